use std::collections::{HashMap, HashSet, VecDeque};

use super::{biconnected_components, MetricGraph};
use crate::error::{Error, Result};

/// Planarity of a simple biconnected graph given as adjacency lists, by face-by-face path embedding.
fn block_is_planar(adj: &HashMap<usize, Vec<usize>>, m: usize) -> bool {
    let n = adj.len();
    if n <= 4 {
        return true;
    }
    if m > 3 * n - 6 {
        return false;
    }
    let Some(cycle) = find_cycle(adj) else {
        return true;
    };
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut in_h: HashSet<usize> = cycle.iter().copied().collect();
    let mut h_edges: HashSet<(usize, usize)> = HashSet::new();
    for i in 0..cycle.len() {
        h_edges.insert(key(cycle[i], cycle[(i + 1) % cycle.len()]));
    }
    let mut faces: Vec<Vec<usize>> = vec![cycle.clone(), cycle];
    while h_edges.len() < m {
        let frags = fragments(adj, &in_h, &h_edges);
        let mut choice: Option<(usize, usize)> = None;
        for (fi, (att, _)) in frags.iter().enumerate() {
            let ok: Vec<usize> = (0..faces.len())
                .filter(|&f| att.iter().all(|a| faces[f].contains(a)))
                .collect();
            match ok.len() {
                0 => return false,
                1 => {
                    choice = Some((fi, ok[0]));
                    break;
                }
                _ => {
                    if choice.is_none() {
                        choice = Some((fi, ok[0]));
                    }
                }
            }
        }
        let (fi, face_idx) = choice.expect("at least one fragment remains");
        let path = frags[fi].1.clone();
        let face = faces.swap_remove(face_idx);
        let k = face.len();
        let ia = face.iter().position(|&x| x == path[0]).unwrap();
        let ib = face
            .iter()
            .position(|&x| x == *path.last().unwrap())
            .unwrap();
        let inner = &path[1..path.len() - 1];
        let mut f1: Vec<usize> = (0..k)
            .map(|i| face[(ia + i) % k])
            .take((ib + k - ia) % k + 1)
            .collect();
        f1.extend(inner.iter().rev());
        let mut f2: Vec<usize> = (0..k)
            .map(|i| face[(ib + i) % k])
            .take((ia + k - ib) % k + 1)
            .collect();
        f2.extend(inner.iter());
        faces.push(f1);
        faces.push(f2);
        for w in path.windows(2) {
            h_edges.insert(key(w[0], w[1]));
        }
        in_h.extend(inner.iter().copied());
    }
    true
}

fn find_cycle(adj: &HashMap<usize, Vec<usize>>) -> Option<Vec<usize>> {
    let start = *adj.keys().min()?;
    let mut parent: HashMap<usize, usize> = HashMap::from([(start, usize::MAX)]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in &adj[&x] {
            if y == parent[&x] {
                continue;
            }
            if parent.contains_key(&y) {
                // back edge in DFS order closes a cycle through the tree path
                let mut px = vec![x];
                while *px.last().unwrap() != start {
                    px.push(parent[px.last().unwrap()]);
                }
                let mut py = vec![y];
                while *py.last().unwrap() != start {
                    py.push(parent[py.last().unwrap()]);
                }
                while px.len() >= 2 && py.len() >= 2 && px[px.len() - 2] == py[py.len() - 2] {
                    px.pop();
                    py.pop();
                }
                let mut cyc = px;
                py.pop();
                cyc.extend(py.into_iter().rev());
                if cyc.len() >= 3 {
                    return Some(cyc);
                }
                continue;
            }
            parent.insert(y, x);
            stack.push(y);
        }
    }
    None
}

/// Fragments relative to the embedded subgraph: attachment set and a path joining two attachments.
fn fragments(
    adj: &HashMap<usize, Vec<usize>>,
    in_h: &HashSet<usize>,
    h_edges: &HashSet<(usize, usize)>,
) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut out = Vec::new();
    let mut keys: Vec<usize> = adj.keys().copied().collect();
    keys.sort_unstable();
    for &a in &keys {
        if !in_h.contains(&a) {
            continue;
        }
        for &b in &adj[&a] {
            if a < b && in_h.contains(&b) && !h_edges.contains(&(a, b)) {
                out.push((vec![a, b], vec![a, b]));
            }
        }
    }
    let mut seen: HashSet<usize> = HashSet::new();
    for &s in &keys {
        if in_h.contains(&s) || !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut q = VecDeque::from([s]);
        let mut att: Vec<usize> = Vec::new();
        while let Some(x) = q.pop_front() {
            for &y in &adj[&x] {
                if in_h.contains(&y) {
                    if !att.contains(&y) {
                        att.push(y);
                    }
                } else if seen.insert(y) {
                    comp.push(y);
                    q.push_back(y);
                }
            }
        }
        att.sort_unstable();
        let path = fragment_path(adj, in_h, &comp, &att);
        out.push((att, path));
    }
    out
}

fn fragment_path(
    adj: &HashMap<usize, Vec<usize>>,
    in_h: &HashSet<usize>,
    comp: &[usize],
    att: &[usize],
) -> Vec<usize> {
    let a = att[0];
    let x = *comp.iter().find(|c| adj[c].contains(&a)).unwrap();
    let mut parent: HashMap<usize, usize> = HashMap::from([(x, usize::MAX)]);
    let mut q = VecDeque::from([x]);
    while let Some(y) = q.pop_front() {
        if let Some(&b) = adj[&y].iter().find(|&&b| b != a && in_h.contains(&b)) {
            let mut path = vec![b, y];
            let mut cur = y;
            while parent[&cur] != usize::MAX {
                cur = parent[&cur];
                path.push(cur);
            }
            path.push(a);
            path.reverse();
            return path;
        }
        for &z in &adj[&y] {
            if !in_h.contains(&z) && !parent.contains_key(&z) {
                parent.insert(z, y);
                q.push_back(z);
            }
        }
    }
    unreachable!("fragment of a biconnected graph has two attachments")
}

fn planar_edges(n: usize, edges: &[(usize, usize)]) -> bool {
    let g = MetricGraph::new(
        n,
        edges.iter().map(|&(a, b)| (a, b, crate::rational::one())),
    );
    let Ok(g) = g else { return false };
    is_planar(&g)
}

pub fn is_planar(g: &MetricGraph) -> bool {
    let b = biconnected_components(g);
    (0..b.blocks.len()).all(|i| {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for &e in &b.blocks[i] {
            let (u, v) = (g.edge(e).u, g.edge(e).v);
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        block_is_planar(&adj, b.blocks[i].len())
    })
}

/// Whether `face` (a cyclic vertex sequence) bounds a face in some planar embedding of `g`.
/// Cycle edges are subdivided and everything on the cycle is joined to an apex; the result is
/// planar exactly when the cycle can be facial.
pub fn face_is_valid(g: &MetricGraph, face: &[usize]) -> bool {
    let k = face.len();
    let distinct: HashSet<usize> = face.iter().copied().collect();
    if distinct.len() != k || face.iter().any(|&v| v >= g.n()) {
        return false;
    }
    if k <= 2 {
        return k == 0 || (k == 1) || g.has_edge(face[0], face[1]);
    }
    if (0..k).any(|i| !g.has_edge(face[i], face[(i + 1) % k])) {
        return false;
    }
    let n = g.n();
    let apex = n;
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let cyc: HashSet<(usize, usize)> = (0..k).map(|i| key(face[i], face[(i + 1) % k])).collect();
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|e| (e.u, e.v))
        .filter(|e| !cyc.contains(e))
        .collect();
    for i in 0..k {
        let s = n + 1 + i;
        edges.push((face[i], s));
        edges.push((s, face[(i + 1) % k]));
        edges.push((apex, s));
        edges.push((apex, face[i]));
    }
    planar_edges(n + 1 + k, &edges)
}

/// Traces the faces of a rotation system and checks it is planar via Euler's formula.
pub fn faces_from_rotation(g: &MetricGraph, rotation: &[Vec<usize>]) -> Result<Vec<Vec<usize>>> {
    if rotation.len() != g.n() {
        return Err(Error::InvalidInput(
            "rotation must list every vertex".into(),
        ));
    }
    for (v, rot) in rotation.iter().enumerate() {
        let mut a: Vec<usize> = rot.clone();
        let mut b: Vec<usize> = g.neighbors(v).collect();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return Err(Error::InvalidInput(format!(
                "rotation at {v} does not match its neighbors"
            )));
        }
    }
    let pos: Vec<HashMap<usize, usize>> = rotation
        .iter()
        .map(|r| r.iter().enumerate().map(|(i, &w)| (w, i)).collect())
        .collect();
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut faces = Vec::new();
    for u in 0..g.n() {
        for &v in &rotation[u] {
            if used.contains(&(u, v)) {
                continue;
            }
            let mut face = Vec::new();
            let (mut a, mut b) = (u, v);
            while used.insert((a, b)) {
                face.push(a);
                let r = &rotation[b];
                let next = r[(pos[b][&a] + 1) % r.len()];
                a = b;
                b = next;
            }
            faces.push(face);
        }
    }
    let comps: HashSet<usize> = g.components().into_iter().collect();
    let isolated = (0..g.n()).filter(|&v| g.degree(v) == 0).count();
    // V - E + F = 1 + C, where isolated vertices contribute no traced face
    let lhs = g.n() as i64 - g.m() as i64 + faces.len() as i64 + isolated as i64;
    if lhs != 1 + comps.len() as i64 {
        return Err(Error::NotPlanar);
    }
    Ok(faces)
}
