//! Random 1-Lipschitz star-shaped embeddings of outerplanar graphs into metric trees.

use std::collections::BTreeSet;

use num::{Signed, ToPrimitive, Zero};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{
    all_pairs_distances, biconnected_components, glue, is_outerplanar, make_cycle, slack_transform,
    Cycle, Ear, MetricGraph, MetricPath, MetricTree,
};
use crate::graph::{Distances, Rooted, NO_NODE};
use crate::rational::{fmt, q, qr, Q};
use crate::rng::{rng, Rng};

/// Default slack for the ear decomposition.
pub const SLACK: i64 = 160;
/// Expected contraction guaranteed after the slack transform: `6 * SLACK`.
pub const K_EMB: i64 = 960;
/// Anchor offsets `eta` are drawn from multiples of `1 / ETA_GRID`.
const ETA_GRID: i64 = 72000;
/// Anchor pairs sampled per window before moving to the next one.
const ANCHOR_TRIES: usize = 4;

/// A metric tree with a map from graph vertices to tree nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeMap {
    pub tree: MetricTree,
    pub map: Vec<usize>,
    pub root: usize,
}

impl TreeMap {
    pub fn rooted(&self) -> Rooted {
        self.tree.rooted(self.root)
    }

    /// Tree distance between the images of graph vertices `u` and `v`.
    pub fn dist(&self, r: &Rooted, u: usize, v: usize) -> Q {
        r.dist(self.map[u], self.map[v])
    }

    /// All pairwise image distances, row-major.
    pub fn distance_matrix(&self) -> Vec<Q> {
        let r = self.rooted();
        let n = self.map.len();
        let mut out = Vec::with_capacity(n * n);
        for u in 0..n {
            for v in 0..n {
                out.push(self.dist(&r, u, v));
            }
        }
        out
    }

    /// First edge stretched by the map, if any.
    pub fn lipschitz_violation(&self, g: &MetricGraph) -> Option<(usize, usize)> {
        let r = self.rooted();
        g.edges()
            .iter()
            .find(|e| self.dist(&r, e.u, e.v) > e.len)
            .map(|e| (e.u, e.v))
    }

    /// Vertices sharing an image must be at distance zero in `g`.
    pub fn injective_violation(&self, d: &Distances) -> Option<(usize, usize)> {
        let n = self.map.len();
        let mut by_node: std::collections::HashMap<usize, usize> = Default::default();
        for x in 0..n {
            if let Some(&y) = by_node.get(&self.map[x]) {
                if d.get(x, y).is_none_or(|v| !v.is_zero()) {
                    return Some((y, x));
                }
            } else {
                by_node.insert(self.map[x], x);
            }
        }
        None
    }

    /// `x -> self.map[inner[x]]`.
    pub fn compose(&self, inner: &[usize]) -> TreeMap {
        TreeMap {
            tree: self.tree.clone(),
            map: inner.iter().map(|&x| self.map[x]).collect(),
            root: self.root,
        }
    }
}

/// The branching node of `a`, `b`, `c`: the unique node on all three connecting paths.
pub fn median(r: &Rooted, a: usize, b: usize, c: usize) -> usize {
    let cands = [r.lca(a, b), r.lca(a, c), r.lca(b, c)];
    *cands.iter().max_by_key(|&&x| r.hops[x]).unwrap()
}

/// Images of the neighbours of every fiber, keyed by tree node.
fn fiber_targets(
    g: &MetricGraph,
    tm: &TreeMap,
) -> std::collections::BTreeMap<usize, BTreeSet<usize>> {
    let mut out: std::collections::BTreeMap<usize, BTreeSet<usize>> = Default::default();
    for e in g.edges() {
        let (a, b) = (tm.map[e.u], tm.map[e.v]);
        out.entry(a).or_default().insert(b);
        out.entry(b).or_default().insert(a);
    }
    out
}

/// A tree node where the paths realizing graph edges branch away from the node itself.
pub fn star_violation(g: &MetricGraph, tm: &TreeMap) -> Option<usize> {
    let r = tm.rooted();
    for (t, targets) in fiber_targets(g, tm) {
        let ts: Vec<usize> = targets.into_iter().filter(|&c| c != t).collect();
        for (i, &c1) in ts.iter().enumerate() {
            for &c2 in &ts[i + 1..] {
                let m = median(&r, t, c1, c2);
                if m != t && m != c1 && m != c2 {
                    return Some(t);
                }
            }
        }
    }
    None
}

pub fn is_star_shaped(g: &MetricGraph, tm: &TreeMap) -> bool {
    star_violation(g, tm).is_none()
}

/// Number of paths from `F(u)` needed to cover the paths to the images of the neighbours of `u`.
pub fn thinness_at(g: &MetricGraph, tm: &TreeMap, r: &Rooted, u: usize) -> usize {
    let a = tm.map[u];
    let targets: BTreeSet<usize> = g
        .neighbors(u)
        .map(|w| tm.map[w])
        .filter(|&c| c != a)
        .collect();
    targets
        .iter()
        .filter(|&&c| {
            targets
                .iter()
                .all(|&c2| c2 == c || median(r, a, c, c2) != c)
        })
        .count()
}

/// Smallest `delta` for which the map is `delta`-thin.
pub fn thinness(g: &MetricGraph, tm: &TreeMap) -> usize {
    let r = tm.rooted();
    (0..g.n())
        .map(|u| thinness_at(g, tm, &r, u))
        .max()
        .unwrap_or(0)
}

pub fn is_thin(g: &MetricGraph, tm: &TreeMap, delta: usize) -> bool {
    thinness(g, tm) <= delta
}

/// Anchor points on a cycle and the offset used to place them. `widened` marks anchors drawn from
/// a fallback window instead of the standard offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchors {
    pub p: Q,
    pub p_prime: Q,
    pub eta: Q,
    pub widened: bool,
}

fn distinct_distances(c: &Cycle, at: &Q, points: &[Q]) -> bool {
    let mut ds: Vec<Q> = points.iter().map(|s| c.dist_pos(at, s)).collect();
    ds.sort();
    ds.windows(2).all(|w| w[0] != w[1])
}

/// Verifies apartness and conditions (a), (b), (c) for anchors on a cycle whose path runs from
/// position 0 (`u`) to `len_p` (`v`, the good end), with `points` the forbidden positions.
/// Widened anchors are checked for (a) and (c) only.
pub fn check_anchors(
    c: &Cycle,
    len_p: &Q,
    vertex_positions: &[Q],
    points: &[Q],
    a: &Anchors,
) -> Result<()> {
    let len_c = c.circumference();
    let bad = |what: &str| Err(Error::Invariant(format!("anchor check failed: {what}")));
    let v_pos = c.wrap(len_p);
    if !a.widened {
        if c.dist_pos(&a.p, &a.p_prime) != len_c / q(6) {
            return bad("anchors are not a sixth apart");
        }
        let (lo, hi) = (len_c / q(16), len_c * qr(7, 16));
        for end in [Q::zero(), v_pos.clone()] {
            for b in [&a.p, &a.p_prime] {
                let d = c.dist_pos(&end, b);
                if d < lo || d > hi {
                    return bad("anchor too close to or too far from an endpoint");
                }
            }
        }
    }
    let reach = len_p * qr(81, 160);
    for x in [&a.p, &a.p_prime] {
        let du = c.dist_pos(x, &Q::zero());
        if &du + (len_c - len_p) > c.dist_pos(x, &v_pos) {
            return bad("condition (a)");
        }
        if !a.widened
            && vertex_positions
                .iter()
                .any(|s| s <= &reach && c.dist_pos(x, s) > du)
        {
            return bad("condition (b)");
        }
        if !distinct_distances(c, x, points) {
            return bad("condition (c)");
        }
    }
    Ok(())
}

/// Samples anchors `p`, `p'` on `c` for a path from position 0 to `len_p`, whose distances to the
/// path vertices and to `extra` positions are pairwise distinct. With a `window` `[lo, hi]` of
/// path positions the anchors sit at its first and third quarter, shifted by the offset.
pub fn anchor_points(
    c: &Cycle,
    len_p: &Q,
    window: Option<(&Q, &Q)>,
    extra: &[Q],
    rng: &mut Rng,
) -> Result<Anchors> {
    let len_c = c.circumference().clone();
    if !len_p.is_positive() {
        return Err(Error::InvalidInput(
            "anchors need a path of positive length".into(),
        ));
    }
    let chord = &len_c - len_p;
    let delta = &chord / len_p;
    if delta > qr(1, SLACK) {
        return Err(Error::ChordTooLong {
            chord: fmt(&chord),
            limit: fmt(&(len_p / q(SLACK))),
        });
    }
    let vertex_positions: Vec<Q> = c.points().values().cloned().collect();
    let mut points: Vec<Q> = vertex_positions
        .iter()
        .chain(extra)
        .map(|s| c.wrap(s))
        .collect();
    points.sort();
    points.dedup();
    for attempt in 0..1024u32 {
        let den = q(ETA_GRID) * crate::rational::pow2(i64::from(attempt / 64));
        let lo = (&delta * &den).floor().to_integer() + 1;
        let hi = (&den / q(72)).ceil().to_integer() - 1;
        if lo > hi {
            continue;
        }
        let span: num::BigInt = &hi - &lo + 1;
        let k = &lo + rng.gen_range(0..span.to_u64().unwrap_or(u64::MAX));
        let eta = Q::new(k, den.to_integer());
        let (p, p_prime) = match window {
            Some((wl, wh)) => {
                let gap = wh - wl;
                (wl + &gap * (qr(1, 4) + &eta), wl + &gap * (qr(3, 4) - &eta))
            }
            None => ((qr(13, 48) - &eta) * &len_c, (qr(7, 16) - &eta) * &len_c),
        };
        if distinct_distances(c, &p, &points) && distinct_distances(c, &p_prime, &points) {
            let a = Anchors {
                p,
                p_prime,
                eta,
                widened: window.is_some(),
            };
            check_anchors(c, len_p, &vertex_positions, &points, &a)?;
            return Ok(a);
        }
    }
    Err(Error::Invariant(
        "no anchor offset avoids the forbidden distances".into(),
    ))
}

/// Incremental embedding of one biconnected block.
struct BlockState<'a> {
    /// neighbours in the graph before the slack transform
    nbrs: &'a [Vec<usize>],
    tree: MetricTree,
    img: Vec<usize>,
    outer: BTreeSet<(usize, usize)>,
    slack: Q,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl BlockState<'_> {
    /// Whether `x` is a good endpoint of the outer edge `(x, y)`.
    fn is_good(&self, r: &Rooted, x: usize, y: usize) -> bool {
        let (a, b) = (self.img[x], self.img[y]);
        self.nbrs[x]
            .iter()
            .filter(|&&w| self.img[w] != NO_NODE)
            .all(|&w| {
                let c = self.img[w];
                let m = median(r, a, b, c);
                m == c || m == a
            })
    }

    fn check_outer(&self) -> Result<()> {
        let r = self.tree.rooted(0);
        for &(x, y) in &self.outer {
            if !self.is_good(&r, x, y) && !self.is_good(&r, y, x) {
                return Err(Error::Invariant(format!(
                    "outer edge ({x},{y}) has no good endpoint"
                )));
            }
        }
        Ok(())
    }

    fn add_outer_path(&mut self, vs: &[usize]) {
        for w in vs.windows(2) {
            self.outer.insert(key(w[0], w[1]));
        }
    }

    /// Whether every embedded vertex sees its embedded neighbours along a subdivided star.
    fn locally_star_shaped(&self) -> bool {
        let r = self.tree.rooted(0);
        (0..self.img.len())
            .filter(|&x| self.img[x] != NO_NODE)
            .all(|x| {
                let t = self.img[x];
                let ts: Vec<usize> = self.nbrs[x]
                    .iter()
                    .map(|&w| self.img[w])
                    .filter(|&c| c != NO_NODE)
                    .collect();
                ts.iter().enumerate().all(|(i, &c1)| {
                    ts[i + 1..].iter().all(|&c2| {
                        let m = median(&r, t, c1, c2);
                        m == t || m == c1 || m == c2
                    })
                })
            })
    }

    /// The state after gluing `flat(cyc, base)` onto the tree path between the images of the ends.
    fn flattened(&self, path: &MetricPath, cyc: &Cycle, base: &Q) -> Result<Self> {
        let (a, b) = (self.img[path.first()], self.img[path.last()]);
        let flat: Vec<Q> = path
            .positions()
            .iter()
            .map(|s| cyc.dist_pos(base, s))
            .collect();
        let mut levels = flat.clone();
        levels.sort();
        levels.dedup();
        let mut ftree = MetricTree::with_nodes(levels.len());
        for (i, w) in levels.windows(2).enumerate() {
            ftree.add_edge(i, i + 1, &w[1] - &w[0]);
        }
        let node = |x: &Q| levels.binary_search(x).unwrap();
        let (fa, fb) = (&flat[0], flat.last().unwrap());
        if fb - fa != self.tree.rooted(0).dist(a, b) {
            return Err(Error::Invariant(
                "flattened endpoints do not span the chord".into(),
            ));
        }
        let (t, map2) = glue(&self.tree, &ftree, a, b, node(fa), node(fb))?;
        let mut next = BlockState {
            nbrs: self.nbrs,
            tree: t,
            img: self.img.clone(),
            outer: self.outer.clone(),
            slack: self.slack.clone(),
        };
        for (j, &x) in path
            .vertices
            .iter()
            .enumerate()
            .take(path.vertices.len() - 1)
            .skip(1)
        {
            next.img[x] = map2[node(&flat[j])];
        }
        next.outer.remove(&key(path.first(), path.last()));
        next.add_outer_path(&path.vertices);
        Ok(next)
    }

    fn extend(&mut self, ear: &Ear, rng: &mut Rng) -> Result<()> {
        let (u, v) = ear.attach;
        let r = self.tree.rooted(0);
        let good = match (self.is_good(&r, u, v), self.is_good(&r, v, u)) {
            (true, true) => u.min(v),
            (true, false) => u,
            (false, true) => v,
            (false, false) => {
                return Err(Error::Invariant(format!(
                    "attach edge ({u},{v}) has no good endpoint"
                )))
            }
        };
        let other = if good == u { v } else { u };
        let path = if ear.path.first() == other {
            ear.path.clone()
        } else {
            ear.path.reversed()
        };
        let (a, b) = (self.img[other], self.img[good]);
        let chord = r.dist(a, b);
        let len_p = path.length();
        if &chord * &self.slack > len_p {
            return Err(Error::SlackViolation {
                u,
                v,
                detail: format!("path length {} against chord {}", fmt(&len_p), fmt(&chord)),
            });
        }
        if len_p.is_zero() {
            for &x in &path.vertices[1..path.vertices.len() - 1] {
                self.img[x] = a;
            }
            self.outer.remove(&key(u, v));
            self.add_outer_path(&path.vertices);
            return Ok(());
        }
        let cyc = make_cycle(&path, &chord)?;
        let len_c = cyc.circumference().clone();
        let extra: Vec<Q> = r
            .path(a, b)
            .iter()
            .map(|&t| cyc.wrap(&(&len_c - r.dist(a, t))))
            .collect();
        let pos = path.positions();
        // farthest neighbour of the non-good end along the path
        let far = (1..path.vertices.len() - 1)
            .filter(|&j| self.nbrs[other].contains(&path.vertices[j]))
            .map(|j| pos[j].clone())
            .max()
            .unwrap_or_else(Q::zero);
        let top = (&len_p - &chord) / q(2);
        let half = &far / q(2);
        let mut windows: Vec<Option<(Q, Q)>> = vec![None];
        if half < top {
            windows.push(Some((half.clone(), top.clone())));
        }
        let near = ((&far - &chord) / q(2)).max(Q::zero());
        let near_top = half.min(top);
        if near < near_top {
            windows.push(Some((near, near_top)));
        }
        for window in &windows {
            for _ in 0..ANCHOR_TRIES {
                let anchors = anchor_points(
                    &cyc,
                    &len_p,
                    window.as_ref().map(|(l, h)| (l, h)),
                    &extra,
                    rng,
                )?;
                let left = self.flattened(&path, &cyc, &anchors.p)?;
                let right = self.flattened(&path, &cyc, &anchors.p_prime)?;
                if [&left, &right]
                    .iter()
                    .all(|s| s.locally_star_shaped() && s.check_outer().is_ok())
                {
                    *self = if rng.gen_bool(0.5) { left } else { right };
                    return Ok(());
                }
            }
        }
        Err(Error::Invariant(format!(
            "no anchor pair keeps the ear at ({u},{v}) star-shaped"
        )))
    }
}

/// Embeds a biconnected outerplanar block (local ids) and returns its tree and vertex images.
fn embed_block(
    g: &MetricGraph,
    slack: &Q,
    check_steps: bool,
    rng: &mut Rng,
) -> Result<(MetricTree, Vec<usize>)> {
    if g.n() == 2 {
        let mut t = MetricTree::with_nodes(2);
        t.add_edge(0, 1, g.edge(0).len.clone());
        return Ok((t, vec![0, 1]));
    }
    let (_, build) = slack_transform(g, slack)?;
    let nbrs: Vec<Vec<usize>> = (0..g.n()).map(|v| g.neighbors(v).collect()).collect();
    let p1 = &build.initial_path;
    let mut tree = MetricTree::with_nodes(p1.vertices.len());
    let mut img = vec![NO_NODE; g.n()];
    for (i, &x) in p1.vertices.iter().enumerate() {
        img[x] = i;
        if i > 0 {
            tree.add_edge(i - 1, i, p1.lens[i - 1].clone());
        }
    }
    let mut st = BlockState {
        nbrs: &nbrs,
        tree,
        img,
        outer: BTreeSet::new(),
        slack: slack.clone(),
    };
    st.add_outer_path(&p1.vertices);
    if check_steps {
        st.check_outer()?;
    }
    for ear in &build.steps {
        st.extend(ear, rng)?;
        if check_steps {
            st.check_outer()?;
        }
    }
    Ok((st.tree, st.img))
}

/// Options for [`embed_outerplanar_with`].
#[derive(Clone, Debug)]
pub struct EmbedOptions {
    pub slack: Q,
    /// check the good-endpoint invariant after every extension
    pub check_steps: bool,
    /// check 1-Lipschitz, star-shaped and injective on the result
    pub check_result: bool,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        EmbedOptions {
            slack: q(SLACK),
            check_steps: true,
            check_result: true,
        }
    }
}

/// Random tree embedding of an outerplanar graph: blocks are embedded independently and glued at
/// cut vertices, components are joined by zero-length edges, and the root is the image of vertex 0.
pub fn embed_outerplanar_with(
    g: &MetricGraph,
    opts: &EmbedOptions,
    rng: &mut Rng,
) -> Result<TreeMap> {
    let n = g.n();
    if n == 0 {
        return Ok(TreeMap {
            tree: MetricTree::with_nodes(1),
            map: Vec::new(),
            root: 0,
        });
    }
    if !is_outerplanar(g) {
        return Err(Error::NotOuterplanar("input graph".into()));
    }
    if !g.is_reduced() {
        return Err(Error::InvalidInput("edge lengths are not reduced".into()));
    }
    let blocks = biconnected_components(g);
    let mut tree = MetricTree::new();
    let mut img = vec![NO_NODE; n];
    let mut done = vec![false; blocks.blocks.len()];
    let comps = g.components();
    let mut comp_root: Vec<usize> = Vec::new();
    for s in 0..n {
        if img[s] != NO_NODE {
            continue;
        }
        // new component: start from its lowest vertex
        img[s] = tree.add_node();
        if let Some(&first) = comp_root.first() {
            tree.add_edge(first, img[s], Q::zero());
        }
        comp_root.push(img[s]);
        loop {
            let next = (0..blocks.blocks.len()).find(|&i| {
                !done[i] && {
                    let e = g.edge(blocks.blocks[i][0]);
                    comps[e.u] == comps[s]
                        && blocks.vertices(g, i).iter().any(|&x| img[x] != NO_NODE)
                }
            });
            let Some(i) = next else { break };
            done[i] = true;
            let vs = blocks.vertices(g, i);
            let local = |x: usize| vs.binary_search(&x).unwrap();
            let bg = MetricGraph::new(
                vs.len(),
                blocks.blocks[i].iter().map(|&e| {
                    let ed = g.edge(e);
                    (local(ed.u), local(ed.v), ed.len.clone())
                }),
            )?;
            let (bt, bimg) = embed_block(&bg, &opts.slack, opts.check_steps, rng)?;
            let shared = vs.iter().position(|&x| img[x] != NO_NODE).unwrap();
            let pin = bimg[shared];
            let mut node_map = vec![NO_NODE; bt.node_count()];
            node_map[pin] = img[vs[shared]];
            for t in 0..bt.node_count() {
                if node_map[t] == NO_NODE {
                    node_map[t] = tree.add_node();
                }
            }
            for (x, y, l) in bt.edges() {
                tree.add_edge(node_map[x], node_map[y], l);
            }
            for (j, &x) in vs.iter().enumerate() {
                if img[x] == NO_NODE {
                    img[x] = node_map[bimg[j]];
                }
            }
        }
    }
    let tm = TreeMap {
        tree,
        root: img[0],
        map: img,
    };
    if opts.check_result {
        check_embedding(g, &tm)?;
    }
    Ok(tm)
}

/// 1-Lipschitz, star-shaped and injective up to zero distances.
pub fn check_embedding(g: &MetricGraph, tm: &TreeMap) -> Result<()> {
    if !tm.tree.is_tree() {
        return Err(Error::Invariant("embedding target is not a tree".into()));
    }
    if let Some((u, v)) = tm.lipschitz_violation(g) {
        return Err(Error::Invariant(format!("edge ({u},{v}) is stretched")));
    }
    if let Some(t) = star_violation(g, tm) {
        return Err(Error::NotStarShaped(t));
    }
    if let Some((u, v)) = tm.injective_violation(&all_pairs_distances(g)) {
        return Err(Error::Invariant(format!(
            "vertices {u} and {v} share an image"
        )));
    }
    Ok(())
}

/// Random embedding with default options; deterministic in `seed`.
pub fn embed_outerplanar(g: &MetricGraph, seed: u64) -> Result<TreeMap> {
    embed_outerplanar_with(g, &EmbedOptions::default(), &mut rng(seed))
}

/// For a point `p` on the outer cycle (vertex order `cycle`, lengths from `g`) and an outer edge
/// `(u, v)` with `d(p,u) < d(p,v)`, returns `v` if every neighbour of `v` is at least as far from
/// `p` as `u`, else `u` if every neighbour of `u` is at most as far as `v`, else `None`.
pub fn check_good_vertex_exists(
    g: &MetricGraph,
    cycle: &[usize],
    p: &Q,
    u: usize,
    v: usize,
) -> Option<usize> {
    let k = cycle.len();
    let mut pos = vec![Q::zero(); g.n()];
    let mut acc = Q::zero();
    for i in 0..k {
        pos[cycle[i]] = acc.clone();
        acc += g
            .len(cycle[i], cycle[(i + 1) % k])
            .expect("cycle edge")
            .clone();
    }
    let c = Cycle::new(acc, Default::default()).expect("cycle");
    let d = |x: usize| c.dist_pos(p, &pos[x]);
    let (du, dv) = (d(u), d(v));
    if g.neighbors(v).all(|w| d(w) >= du) {
        Some(v)
    } else if g.neighbors(u).all(|w| d(w) <= dv) {
        Some(u)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::graph::MetricPath;

    #[test]
    fn anchor_formulas() {
        // circumference 1, chord ratio 1/160 of the path
        let len_p = qr(160, 161);
        let path = MetricPath::new(vec![0, 1], vec![len_p.clone()]).unwrap();
        let c = make_cycle(&path, &qr(1, 161)).unwrap();
        let eta = qr(1, 100);
        let a = Anchors {
            p: (qr(13, 48) - &eta),
            p_prime: (qr(7, 16) - &eta),
            eta,
            widened: false,
        };
        assert_eq!(a.p, qr(313, 1200));
        assert_eq!(a.p_prime, qr(171, 400));
        assert_eq!(c.dist_pos(&a.p, &a.p_prime), qr(1, 6));
        check_anchors(
            &c,
            &len_p,
            &[q(0), len_p.clone()],
            &[q(0), len_p.clone()],
            &a,
        )
        .unwrap();
    }

    #[test]
    fn anchors_resample_on_collisions() {
        let path = MetricPath::new((0..5).collect(), vec![q(40); 4]).unwrap();
        let c = make_cycle(&path, &q(1)).unwrap();
        let mut r = rng(4);
        for _ in 0..200 {
            let a = anchor_points(&c, &q(160), None, &[qr(321, 2)], &mut r).unwrap();
            assert!(a.eta > qr(1, 160) && a.eta < qr(1, 72));
        }
        let too_long = make_cycle(&path, &q(2)).unwrap();
        assert!(matches!(
            anchor_points(&too_long, &q(160), None, &[], &mut r),
            Err(Error::ChordTooLong { .. })
        ));
    }

    #[test]
    fn path_and_edge_embed_isometrically() {
        let g = generate::path(5);
        let tm = embed_outerplanar(&g, 1).unwrap();
        let r = tm.rooted();
        for u in 0..5 {
            for v in 0..5 {
                assert_eq!(tm.dist(&r, u, v), q((u as i64 - v as i64).abs()));
            }
        }
        let e = MetricGraph::from_int(2, &[(0, 1, 3)]);
        let tm = embed_outerplanar(&e, 1).unwrap();
        assert_eq!(tm.tree.node_count(), 2);
        assert_eq!(tm.dist(&tm.rooted(), 0, 1), q(3));
    }

    #[test]
    fn long_ear_extension_both_outcomes() {
        // a unit edge with a path of length 160 around it
        let mut edges = vec![(0, 1, 1)];
        edges.extend((1..5).map(|i| (i, (i + 1) % 5, 40)));
        edges.pop();
        edges.push((4, 0, 40));
        let g = MetricGraph::from_int(5, &edges);
        assert!(g.is_reduced());
        let mut seen = BTreeSet::new();
        for seed in 0..40 {
            let tm = embed_outerplanar(&g, seed).unwrap();
            seen.insert(tm.distance_matrix());
        }
        assert!(seen.len() >= 2);
    }

    #[test]
    fn random_outerplanar_embeddings_hold_invariants() {
        let mut r = rng(11);
        for i in 0..60 {
            let g = if i % 2 == 0 {
                generate::random_outerplanar(3 + i % 9, 0.6, 50, &mut r)
            } else {
                generate::random_outerplanar_blocks(3 + i % 9, 50, &mut r)
            };
            let tm = embed_outerplanar_with(&g, &EmbedOptions::default(), &mut r).unwrap();
            assert!(is_star_shaped(&g, &tm));
        }
    }

    #[test]
    fn star_counterexample() {
        // tree: 0 - 1, 1 - 2, 1 - 3; graph vertex a at 0 adjacent to b at 2 and c at 3
        let mut t = MetricTree::with_nodes(4);
        t.add_edge(0, 1, q(1));
        t.add_edge(1, 2, q(1));
        t.add_edge(1, 3, q(1));
        let g = MetricGraph::from_int(3, &[(0, 1, 2), (0, 2, 2)]);
        let tm = TreeMap {
            tree: t,
            map: vec![0, 2, 3],
            root: 0,
        };
        assert_eq!(star_violation(&g, &tm), Some(0));
        let spider = TreeMap {
            tree: tm.tree.clone(),
            map: vec![1, 2, 3],
            root: 0,
        };
        assert!(is_star_shaped(&g, &spider));
    }

    #[test]
    fn thinness_counts_arms() {
        let g = generate::path(4);
        let tm = embed_outerplanar(&g, 0).unwrap();
        assert_eq!(thinness(&g, &tm), 2);
        let s = generate::star(4);
        let tm = embed_outerplanar(&s, 0).unwrap();
        assert!(is_thin(&s, &tm, 4) && !is_thin(&s, &tm, 3));
    }

    #[test]
    fn good_vertex_on_cycle_and_c4_chord() {
        let c6 = generate::cycle(6);
        let cyc: Vec<usize> = (0..6).collect();
        assert!(check_good_vertex_exists(&c6, &cyc, &qr(1, 2), 1, 2).is_some());
        let g = MetricGraph::from_int(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1), (0, 2, 1)]);
        let cyc = [0, 1, 2, 3];
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            for k in 0..8 {
                let p = qr(k, 2);
                let (pu, pv) = (p.clone(), p.clone());
                let c = Cycle::new(q(4), Default::default()).unwrap();
                let pos = |x: usize| q(x as i64);
                let (du, dv) = (c.dist_pos(&pu, &pos(u)), c.dist_pos(&pv, &pos(v)));
                if du < dv {
                    assert!(check_good_vertex_exists(&g, &cyc, &p, u, v).is_some());
                } else if dv < du {
                    assert!(check_good_vertex_exists(&g, &cyc, &p, v, u).is_some());
                }
            }
        }
    }
}
