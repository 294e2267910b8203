use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use num::One;

use super::{all_pairs_distances, biconnected_components, MetricGraph, MetricPath};
use crate::error::{Error, Result};
use crate::rational::Q;

/// One construction step: `path` is attached by its endpoints to the endpoints of `attach`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ear {
    pub path: MetricPath,
    pub attach: (usize, usize),
}

/// Ear construction of an outerplanar graph, starting from `initial_path`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OuterplanarBuild {
    pub initial_path: MetricPath,
    pub steps: Vec<Ear>,
}

impl OuterplanarBuild {
    /// Rebuilds the graph on `n` vertices, checking that every step attaches to an edge on the
    /// outer face of the graph built so far.
    pub fn replay(&self, n: usize) -> Result<MetricGraph> {
        let mut edges: Vec<(usize, usize, Q)> = Vec::new();
        let mut outer: HashSet<(usize, usize)> = HashSet::new();
        let mut present: HashSet<usize> = self.initial_path.vertices.iter().copied().collect();
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let add_path =
            |p: &MetricPath, edges: &mut Vec<(usize, usize, Q)>, outer: &mut HashSet<_>| {
                for (w, l) in p.vertices.windows(2).zip(&p.lens) {
                    edges.push((w[0], w[1], l.clone()));
                    outer.insert(key(w[0], w[1]));
                }
            };
        add_path(&self.initial_path, &mut edges, &mut outer);
        for (i, ear) in self.steps.iter().enumerate() {
            let (u, v) = ear.attach;
            if (ear.path.first(), ear.path.last()) != (u, v)
                && (ear.path.first(), ear.path.last()) != (v, u)
            {
                return Err(Error::Invariant(format!(
                    "step {i}: path endpoints differ from attach edge"
                )));
            }
            if !outer.remove(&key(u, v)) {
                return Err(Error::Invariant(format!(
                    "step {i}: attach edge ({u},{v}) is not on the outer face"
                )));
            }
            let inner = &ear.path.vertices[1..ear.path.vertices.len() - 1];
            if inner.iter().any(|x| !present.insert(*x)) {
                return Err(Error::Invariant(format!(
                    "step {i}: ear reuses an existing vertex"
                )));
            }
            add_path(&ear.path, &mut edges, &mut outer);
        }
        MetricGraph::new(n, edges)
    }
}

/// Checks that `cycle` is a Hamiltonian cycle of the given edges with pairwise non-crossing chords.
pub fn outer_cycle_is_valid(edges: &[(usize, usize)], cycle: &[usize]) -> bool {
    let k = cycle.len();
    let pos: HashMap<usize, usize> = cycle.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if pos.len() != k {
        return false;
    }
    let es: HashSet<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    if k >= 2 {
        let needed = if k == 2 { 1 } else { k };
        for i in 0..needed {
            let (a, b) = (cycle[i], cycle[(i + 1) % k]);
            if !es.contains(&(a.min(b), a.max(b))) {
                return false;
            }
        }
    }
    let mut chords = Vec::new();
    for &(a, b) in &es {
        let (Some(&pa), Some(&pb)) = (pos.get(&a), pos.get(&b)) else {
            return false;
        };
        let (lo, hi) = (pa.min(pb), pa.max(pb));
        if hi - lo == 1 || (lo == 0 && hi == k - 1) {
            continue;
        }
        chords.push((lo, hi));
    }
    chords.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for (c, d) in chords {
        while stack.last().is_some_and(|t| t.1 <= c) {
            stack.pop();
        }
        if stack.last().is_some_and(|t| t.1 < d) {
            return false;
        }
        stack.push((c, d));
    }
    true
}

/// Hamiltonian outer cycle of a biconnected outerplanar graph given by its vertices and edges.
pub fn block_outer_cycle(vertices: &[usize], edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    let n = vertices.len();
    if n <= 2 {
        return Ok(vertices.to_vec());
    }
    if edges.len() > 2 * n - 3 {
        return Err(Error::NotOuterplanar(format!(
            "{} edges on {} vertices",
            edges.len(),
            n
        )));
    }
    let mut adj: HashMap<usize, HashSet<usize>> =
        vertices.iter().map(|&v| (v, HashSet::new())).collect();
    for &(a, b) in edges {
        adj.get_mut(&a).unwrap().insert(b);
        adj.get_mut(&b).unwrap().insert(a);
    }
    let mut queue: VecDeque<usize> = vertices
        .iter()
        .copied()
        .filter(|v| adj[v].len() == 2)
        .collect();
    let mut removed: Vec<(usize, usize, usize)> = Vec::new();
    let mut gone: HashSet<usize> = HashSet::new();
    let mut remaining = n;
    while remaining > 3 {
        let Some(v) = queue.pop_front() else {
            return Err(Error::NotOuterplanar("no removable degree-2 vertex".into()));
        };
        if gone.contains(&v) || adj[&v].len() != 2 {
            continue;
        }
        let mut it = adj[&v].iter().copied();
        let (a, b) = (it.next().unwrap(), it.next().unwrap());
        adj.get_mut(&a).unwrap().remove(&v);
        adj.get_mut(&b).unwrap().remove(&v);
        adj.get_mut(&a).unwrap().insert(b);
        adj.get_mut(&b).unwrap().insert(a);
        adj.get_mut(&v).unwrap().clear();
        gone.insert(v);
        removed.push((v, a, b));
        remaining -= 1;
        for x in [a, b] {
            match adj[&x].len() {
                0 | 1 => return Err(Error::NotOuterplanar("block is not biconnected".into())),
                2 => queue.push_back(x),
                _ => {}
            }
        }
    }
    let mut cycle: Vec<usize> = vertices
        .iter()
        .copied()
        .filter(|v| !gone.contains(v))
        .collect();
    for i in 0..3 {
        if !adj[&cycle[i]].contains(&cycle[(i + 1) % 3]) {
            return Err(Error::NotOuterplanar(
                "reduction did not end in a triangle".into(),
            ));
        }
    }
    for &(v, a, b) in removed.iter().rev() {
        let k = cycle.len();
        let ia = cycle.iter().position(|&x| x == a).unwrap();
        let ib = cycle.iter().position(|&x| x == b).unwrap();
        if (ia + 1) % k == ib {
            cycle.insert(ia + 1, v);
        } else if (ib + 1) % k == ia {
            cycle.insert(ib + 1, v);
        } else {
            return Err(Error::NotOuterplanar(format!(
                "vertex {v} cannot be reinserted"
            )));
        }
    }
    if !outer_cycle_is_valid(edges, &cycle) {
        return Err(Error::NotOuterplanar(
            "chords cross the candidate outer cycle".into(),
        ));
    }
    Ok(cycle)
}

pub fn is_outerplanar(g: &MetricGraph) -> bool {
    let b = biconnected_components(g);
    (0..b.blocks.len()).all(|i| {
        let vs = b.vertices(g, i);
        let es: Vec<(usize, usize)> = b.blocks[i]
            .iter()
            .map(|&e| (g.edge(e).u, g.edge(e).v))
            .collect();
        block_outer_cycle(&vs, &es).is_ok()
    })
}

fn path_of(g: &MetricGraph, vs: Vec<usize>) -> MetricPath {
    let lens = vs
        .windows(2)
        .map(|w| g.len(w[0], w[1]).unwrap().clone())
        .collect();
    MetricPath::new(vs, lens).unwrap()
}

/// Unrolls the faces of a biconnected outerplanar graph whose outer cycle is `cycle`, starting from
/// the root edge `(cycle[0], cycle[k-1])`.
fn ears_from_cycle(g: &MetricGraph, cycle: &[usize]) -> OuterplanarBuild {
    let k = cycle.len();
    let initial_path = path_of(g, vec![cycle[0], cycle[k - 1]]);
    let mut steps = Vec::new();
    let mut pending = VecDeque::from([(0usize, k - 1)]);
    while let Some((i, j)) = pending.pop_front() {
        let mut face = vec![i];
        let mut a = i;
        while a != j {
            let upper = if a == i { j - 1 } else { j };
            let next = (a + 1..=upper)
                .rev()
                .find(|&p| g.has_edge(cycle[a], cycle[p]))
                .unwrap();
            face.push(next);
            a = next;
        }
        for w in face.windows(2) {
            if w[1] - w[0] >= 2 {
                pending.push_back((w[0], w[1]));
            }
        }
        let path = path_of(g, face.iter().map(|&p| cycle[p]).collect());
        steps.push(Ear {
            path,
            attach: (cycle[i], cycle[j]),
        });
    }
    OuterplanarBuild {
        initial_path,
        steps,
    }
}

fn is_path_graph(g: &MetricGraph) -> Option<Vec<usize>> {
    if g.n() == 0 || !g.is_connected() || g.m() + 1 != g.n() || (0..g.n()).any(|v| g.degree(v) > 2)
    {
        return None;
    }
    let start = (0..g.n()).find(|&v| g.degree(v) <= 1).unwrap();
    let mut order = vec![start];
    let mut prev = usize::MAX;
    let mut cur = start;
    while let Some(next) = g.neighbors(cur).find(|&w| w != prev) {
        order.push(next);
        prev = cur;
        cur = next;
    }
    Some(order)
}

fn check_biconnected_face(g: &MetricGraph, outer_face: &[usize]) -> Result<()> {
    let b = biconnected_components(g);
    let covered: BTreeSet<usize> = outer_face.iter().copied().collect();
    if b.blocks.len() != 1 || covered.len() != g.n() || outer_face.len() != g.n() {
        return Err(Error::NotBiconnected);
    }
    let es: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    if !outer_cycle_is_valid(&es, outer_face) {
        return Err(Error::NotOuterplanar(
            "given face is not a valid outer cycle".into(),
        ));
    }
    Ok(())
}

/// Ear construction of a biconnected outerplanar graph with the given outer cycle. The root is the
/// single edge `(outer_face[0], outer_face[k-1])` and every inner face contributes one ear. A path
/// graph yields just its initial path.
pub fn ear_decomposition(g: &MetricGraph, outer_face: &[usize]) -> Result<OuterplanarBuild> {
    if let Some(order) = is_path_graph(g) {
        if g.n() >= 3 || outer_face.len() == g.n() {
            return Ok(OuterplanarBuild {
                initial_path: path_of(g, order),
                steps: Vec::new(),
            });
        }
    }
    check_biconnected_face(g, outer_face)?;
    Ok(ears_from_cycle(g, outer_face))
}

/// Deletes attach edges whose ears are shorter than `alpha` times the edge, then rescales so that
/// distances never grow. Returns the slack graph and its ear construction.
pub fn slack_transform(g: &MetricGraph, alpha: &Q) -> Result<(MetricGraph, OuterplanarBuild)> {
    if alpha < &Q::one() {
        return Err(Error::InvalidInput("alpha must be at least 1".into()));
    }
    if let Some(order) = is_path_graph(g) {
        return Ok((
            g.clone(),
            OuterplanarBuild {
                initial_path: path_of(g, order),
                steps: Vec::new(),
            },
        ));
    }
    let vs: Vec<usize> = (0..g.n()).collect();
    let es: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let mut cycle = block_outer_cycle(&vs, &es)?;
    check_biconnected_face(g, &cycle)?;
    // root the construction at a shortest outer edge
    let k = cycle.len();
    let root = (0..k)
        .min_by(|&a, &b| {
            g.len(cycle[a], cycle[(a + 1) % k])
                .cmp(&g.len(cycle[b], cycle[(b + 1) % k]))
        })
        .unwrap();
    cycle.rotate_left((root + 1) % k);
    let build = ears_from_cycle(g, &cycle);

    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    // current expansion of every edge as a vertex sequence
    let mut expansion: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let expand =
        |a: usize, b: usize, expansion: &HashMap<(usize, usize), Vec<usize>>| -> Vec<usize> {
            match expansion.get(&key(a, b)) {
                Some(seq) if seq[0] == a => seq.clone(),
                Some(seq) => seq.iter().rev().copied().collect(),
                None => vec![a, b],
            }
        };
    let mut deleted = vec![false; build.steps.len()];
    let mut current: Vec<Vec<usize>> = vec![Vec::new(); build.steps.len()];
    for (i, ear) in build.steps.iter().enumerate().rev() {
        let mut seq = vec![ear.path.first()];
        for w in ear.path.vertices.windows(2) {
            seq.extend(expand(w[0], w[1], &expansion).into_iter().skip(1));
        }
        let len: Q = seq
            .windows(2)
            .map(|w| g.len(w[0], w[1]).unwrap().clone())
            .sum();
        let (u, v) = ear.attach;
        if len < alpha * g.len(u, v).unwrap() {
            deleted[i] = true;
            let oriented = if seq[0] == u {
                seq.clone()
            } else {
                seq.iter().rev().copied().collect()
            };
            expansion.insert(key(u, v), oriented);
        }
        current[i] = seq;
    }
    let removed: HashSet<(usize, usize)> = build
        .steps
        .iter()
        .zip(&deleted)
        .filter(|(_, d)| **d)
        .map(|(e, _)| key(e.attach.0, e.attach.1))
        .collect();
    let h0 = g.edge_subgraph(|i| !removed.contains(&(g.edge(i).u, g.edge(i).v)));
    let mut lambda = Q::one();
    if !removed.is_empty() {
        let d = all_pairs_distances(&h0);
        for &(u, v) in &removed {
            let stretch = d.at(u, v) / g.len(u, v).unwrap();
            if stretch > lambda {
                lambda = stretch;
            }
        }
    }
    let s = Q::one() / &lambda;
    let h = h0.scaled(&s);
    let ip = build.initial_path.vertices.clone();
    let initial = if removed.contains(&key(ip[0], ip[1])) {
        expand(ip[0], ip[1], &expansion)
    } else {
        ip
    };
    let steps = build
        .steps
        .iter()
        .enumerate()
        .filter(|(i, _)| !deleted[*i])
        .map(|(i, e)| Ear {
            path: path_of(&h, current[i].clone()),
            attach: e.attach,
        })
        .collect();
    Ok((
        h.clone(),
        OuterplanarBuild {
            initial_path: path_of(&h, initial),
            steps,
        },
    ))
}

/// Checks the slack postconditions for `(h, build) = slack_transform(g, alpha)`: edges of `h` are
/// edges of `g`, `d_g >= d_h >= d_g / alpha`, every edge of `h` is a shortest path, and `build`
/// replays to `h` with every ear at least `alpha` times its attach edge.
pub fn check_slack(
    g: &MetricGraph,
    alpha: &Q,
    h: &MetricGraph,
    build: &OuterplanarBuild,
) -> Result<()> {
    let bad = |what: String| Err(Error::Invariant(format!("slack check failed: {what}")));
    if h.n() != g.n() {
        return bad("vertex count changed".into());
    }
    if let Some(e) = h.edges().iter().find(|e| !g.has_edge(e.u, e.v)) {
        return bad(format!("edge ({},{}) is not in the input", e.u, e.v));
    }
    let (dg, dh) = (all_pairs_distances(g), all_pairs_distances(h));
    for u in 0..g.n() {
        for v in 0..g.n() {
            match (dg.get(u, v), dh.get(u, v)) {
                (None, None) => {}
                (Some(a), Some(b)) if b <= a && b * alpha >= *a => {}
                _ => return bad(format!("distance between {u} and {v} out of range")),
            }
        }
    }
    if let Some(e) = h.edges().iter().find(|e| dh.at(e.u, e.v) != &e.len) {
        return bad(format!(
            "edge ({},{}) is longer than the distance",
            e.u, e.v
        ));
    }
    let replayed = build.replay(h.n())?;
    if replayed != *h
        && !(replayed.same_edges(h)
            && replayed
                .edges()
                .iter()
                .all(|e| h.len(e.u, e.v) == Some(&e.len)))
    {
        return bad("construction does not replay to the slack graph".into());
    }
    for ear in &build.steps {
        let (u, v) = ear.attach;
        if ear.path.length() < alpha * h.len(u, v).unwrap() {
            return bad(format!(
                "ear at ({u},{v}) is shorter than alpha times its edge"
            ));
        }
    }
    Ok(())
}
