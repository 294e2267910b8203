//! Connected random retractions onto a vertex subset, and onto a face of a planar graph.

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::graph::{all_pairs_distances, is_outerplanar, Distances, MetricGraph};
use crate::instance::{check_face, PlanarInstance};
use crate::partition::{sample_with, Partition};
use crate::rational::{ceil_log2, fmt, pow2, q, to_f64, Q};
use crate::rng::{rng, Rng};

/// A map `V -> S` fixing `S`, with the level at which each vertex joined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Retraction {
    pub target: Vec<usize>,
    pub map: Vec<usize>,
    pub level: Vec<i64>,
    /// lengths were multiplied by this factor before sampling; levels refer to scaled lengths
    pub scale: Q,
}

impl Retraction {
    /// Checks `F|S = id`, connected fibers and `d(x,S) <= d(x,F(x)) < 2^(L(x)+1)` (scaled).
    pub fn check(&self, g: &MetricGraph, d: &Distances) -> Result<()> {
        let n = g.n();
        let mut in_s = vec![false; n];
        for &s in &self.target {
            in_s[s] = true;
            if self.map[s] != s || self.level[s] != 0 {
                return Err(Error::Invariant(format!("target vertex {s} is moved")));
            }
        }
        for x in 0..n {
            if !in_s[self.map[x]] {
                return Err(Error::Invariant(format!(
                    "vertex {x} maps outside the target"
                )));
            }
            let to_s = self
                .target
                .iter()
                .filter_map(|&s| d.get(x, s))
                .min()
                .cloned();
            let dx = d.get(x, self.map[x]).cloned();
            let (Some(to_s), Some(dx)) = (to_s, dx) else {
                return Err(Error::Invariant(format!(
                    "vertex {x} is disconnected from its image"
                )));
            };
            if to_s > dx || &dx * &self.scale >= pow2(self.level[x] + 1) {
                return Err(Error::Invariant(format!(
                    "vertex {x} violates the level bound"
                )));
            }
        }
        for &s in &self.target {
            let fiber: Vec<usize> = (0..n).filter(|&x| self.map[x] == s).collect();
            if !connected_within(g, &fiber) {
                return Err(Error::Invariant(format!("fiber of {s} is disconnected")));
            }
        }
        Ok(())
    }
}

fn connected_within(g: &MetricGraph, set: &[usize]) -> bool {
    if set.is_empty() {
        return true;
    }
    let mut inside = vec![false; g.n()];
    for &x in set {
        inside[x] = true;
    }
    let mut stack = vec![set[0]];
    inside[set[0]] = false;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for y in g.neighbors(x) {
            if inside[y] {
                inside[y] = false;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == set.len()
}

/// Samples a connected retraction of `g` onto `s` using `d = all_pairs_distances(g)`.
pub fn sample_retraction_with(
    g: &MetricGraph,
    d: &Distances,
    s: &[usize],
    rng: &mut Rng,
) -> Result<Retraction> {
    let n = g.n();
    if s.is_empty() {
        return Err(Error::EmptyTarget("no target vertices".into()));
    }
    let mut in_s = vec![false; n];
    for &x in s {
        if x >= n {
            return Err(Error::InvalidInput(format!(
                "target vertex {x} out of range"
            )));
        }
        in_s[x] = true;
    }
    let mut target: Vec<usize> = s.to_vec();
    target.sort_unstable();
    target.dedup();
    // distance to the target, and the scale making it exceed 1 off the target
    let mut gap: Option<Q> = None;
    for x in (0..n).filter(|&x| !in_s[x]) {
        let to_s = target.iter().filter_map(|&t| d.get(x, t)).min().cloned();
        match to_s {
            None => {
                return Err(Error::EmptyTarget(format!(
                    "component of vertex {x} has no target vertex"
                )))
            }
            Some(v) if v.is_zero() => {
                return Err(Error::InvalidInput(format!(
                    "vertex {x} is at distance 0 from the target"
                )))
            }
            Some(v) => {
                if gap.as_ref().is_none_or(|g0| &v < g0) {
                    gap = Some(v);
                }
            }
        }
    }
    let mut map: Vec<usize> = (0..n).collect();
    let mut level = vec![0i64; n];
    let Some(gap) = gap else {
        return Ok(Retraction {
            target,
            map,
            level,
            scale: q(1),
        });
    };
    let scale = q(2) / &gap;
    let gs = g.scaled(&scale);
    let ds = all_pairs_distances(&gs);
    let k0 = ceil_log2(&ds.diameter()).max(1);
    let mut joined = in_s.clone();
    for k in 1..=k0 {
        let part = if k < k0 {
            sample_with(&gs, &ds, &pow2(k), rng)?
        } else {
            let comps = gs.components();
            let mut blocks: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
            for x in 0..n {
                blocks.entry(comps[x]).or_default().push(x);
            }
            Partition {
                tau: pow2(k),
                block_of: comps.clone(),
                blocks: blocks.into_values().collect(),
            }
        };
        // new vertices: same block and connected inside it to an already joined vertex
        let mut fresh = vec![false; n];
        let mut stack: Vec<usize> = (0..n).filter(|&x| joined[x]).collect();
        let mut reached = joined.clone();
        while let Some(x) = stack.pop() {
            for y in gs.neighbors(x) {
                if !reached[y] && part.block_of[y] == part.block_of[x] {
                    reached[y] = true;
                    fresh[y] = true;
                    stack.push(y);
                }
            }
        }
        // components of fresh vertices within a block, each following one joined neighbour
        let mut seen = vec![false; n];
        for start in 0..n {
            if !fresh[start] || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                i += 1;
                for y in gs.neighbors(x) {
                    if fresh[y] && !seen[y] && part.block_of[y] == part.block_of[x] {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
            }
            let b = part.block_of[start];
            let anchor = comp
                .iter()
                .flat_map(|&x| gs.neighbors(x))
                .filter(|&y| joined[y] && part.block_of[y] == b)
                .min()
                .ok_or_else(|| {
                    Error::Invariant("fresh component without joined neighbour".into())
                })?;
            for &x in &comp {
                map[x] = map[anchor];
                level[x] = k;
            }
        }
        for x in 0..n {
            joined[x] |= fresh[x];
        }
    }
    if let Some(x) = (0..n).find(|&x| !joined[x]) {
        return Err(Error::Invariant(format!("vertex {x} never joined")));
    }
    Ok(Retraction {
        target,
        map,
        level,
        scale,
    })
}

/// Samples a connected retraction of `g` onto `s`; deterministic in `seed`.
pub fn sample_retraction(g: &MetricGraph, s: &[usize], seed: u64) -> Result<Retraction> {
    let d = all_pairs_distances(g);
    sample_retraction_with(g, &d, s, &mut rng(seed))
}

/// `sup { d(F(x),F(v)) / len(x,v) : len(x,v) in [tau, 2 tau] }`, or 0 without such edges.
pub fn gradient_at(g: &MetricGraph, d: &Distances, map: &[usize], x: usize, tau: &Q) -> Q {
    let two_tau = tau * q(2);
    let mut best = Q::zero();
    for &(v, e) in g.incident(x) {
        let len = &g.edge(e).len;
        if len < tau || len > &two_tau || !len.is_positive() {
            continue;
        }
        let r = d.at(map[x], map[v]) / len;
        if r > best {
            best = r;
        }
    }
    best
}

/// Mean over `samples` retractions onto `s` of the single-scale gradient at `x`.
pub fn gradient_stat(
    g: &MetricGraph,
    s: &[usize],
    x: usize,
    tau: &Q,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let d = all_pairs_distances(g);
    let mut r = rng(seed);
    let samples = samples.max(1);
    let mut total = 0.0;
    for _ in 0..samples {
        let ret = sample_retraction_with(g, &d, s, &mut r)?;
        total += to_f64(&gradient_at(g, &d, &ret.map, x, tau));
    }
    Ok(total / samples as f64)
}

/// Result of retracting a planar graph onto its face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceRetraction {
    /// outerplanar graph on the face; local vertex `i` is `face[i]`
    pub h: MetricGraph,
    pub face: Vec<usize>,
    /// local vertex of `h` for every vertex of the input graph
    pub map: Vec<usize>,
    pub retraction: Retraction,
}

impl FaceRetraction {
    /// Edges map to edges or collapse, face distances do not shrink, `h` is outerplanar and its
    /// edge lengths equal distances in `g`.
    pub fn check(&self, g: &MetricGraph, d: &Distances) -> Result<()> {
        for e in g.edges() {
            let (a, b) = (self.map[e.u], self.map[e.v]);
            if a != b && !self.h.has_edge(a, b) {
                return Err(Error::Invariant(format!(
                    "edge ({},{}) maps to a non-edge",
                    e.u, e.v
                )));
            }
        }
        for e in self.h.edges() {
            if &e.len != d.at(self.face[e.u], self.face[e.v]) {
                return Err(Error::Invariant(format!(
                    "h edge ({},{}) has the wrong length",
                    e.u, e.v
                )));
            }
        }
        let dh = all_pairs_distances(&self.h);
        for i in 0..self.face.len() {
            for j in 0..self.face.len() {
                let ok = dh
                    .get(i, j)
                    .is_some_and(|x| x >= d.at(self.face[i], self.face[j]));
                if !ok {
                    return Err(Error::Invariant(format!(
                        "face distance shrinks between {} and {}",
                        self.face[i], self.face[j]
                    )));
                }
            }
        }
        if !is_outerplanar(&self.h) {
            return Err(Error::Invariant(
                "retracted graph is not outerplanar".into(),
            ));
        }
        Ok(())
    }
}

/// Retracts `g` onto `face` and contracts the fibers, giving an outerplanar graph on the face.
pub fn retract_face_with(
    g: &MetricGraph,
    d: &Distances,
    face: &[usize],
    rng: &mut Rng,
) -> Result<FaceRetraction> {
    let ret = sample_retraction_with(g, d, face, rng)?;
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in face.iter().enumerate() {
        local[v] = i;
    }
    let map: Vec<usize> = ret.map.iter().map(|&t| local[t]).collect();
    let mut edges: std::collections::BTreeMap<(usize, usize), Q> = Default::default();
    for e in g.edges() {
        let (a, b) = (map[e.u], map[e.v]);
        if a != b {
            let key = (a.min(b), a.max(b));
            edges
                .entry(key)
                .or_insert_with(|| d.at(face[key.0], face[key.1]).clone());
        }
    }
    let h = MetricGraph::new(face.len(), edges.into_iter().map(|((a, b), l)| (a, b, l)))?;
    Ok(FaceRetraction {
        h,
        face: face.to_vec(),
        map,
        retraction: ret,
    })
}

/// Random outerplanar graph on the face of `inst`, with the retraction map; checks the result.
pub fn retract_to_outerplanar(inst: &PlanarInstance, seed: u64) -> Result<FaceRetraction> {
    check_face(&inst.graph, &inst.face, inst.rotation.as_deref())?;
    let d = all_pairs_distances(&inst.graph);
    let fr = retract_face_with(&inst.graph, &d, &inst.face, &mut rng(seed))?;
    fr.retraction.check(&inst.graph, &d)?;
    fr.check(&inst.graph, &d)?;
    Ok(fr)
}

/// Human-readable form of a retraction level bound, for reports.
pub fn level_bound(r: &Retraction, x: usize) -> String {
    fmt(&(pow2(r.level[x] + 1) / &r.scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate;
    use crate::polyflow::{Demands, PolymatroidCaps};

    #[test]
    fn targets_are_fixed() {
        let g = generate::path(6);
        let r = sample_retraction(&g, &[0, 5], 3).unwrap();
        assert_eq!((r.map[0], r.map[5]), (0, 5));
        assert_eq!((r.level[0], r.level[5]), (0, 0));
        r.check(&g, &all_pairs_distances(&g)).unwrap();
    }

    #[test]
    fn star_center_goes_to_a_leaf() {
        let g = generate::star(4);
        let d = all_pairs_distances(&g);
        for seed in 0..200 {
            let r = sample_retraction(&g, &[1, 2, 3, 4], seed).unwrap();
            assert!(r.map[0] >= 1);
            r.check(&g, &d).unwrap();
        }
    }

    #[test]
    fn grid_onto_boundary() {
        let (g, face) = generate::grid(4, 4);
        let d = all_pairs_distances(&g);
        for seed in 0..100 {
            let mut r = rng(seed);
            let fr = retract_face_with(&g, &d, &face, &mut r).unwrap();
            fr.retraction.check(&g, &d).unwrap();
            fr.check(&g, &d).unwrap();
        }
    }

    #[test]
    fn outerplanar_onto_all_vertices_is_identity() {
        let g = generate::cycle(5);
        let inst = PlanarInstance {
            graph: g.clone(),
            face: (0..5).collect(),
            rotation: None,
            caps: PolymatroidCaps::vertex(&vec![q(1); 5]),
            demands: Demands::new(5, []).unwrap(),
        };
        let fr = retract_to_outerplanar(&inst, 1).unwrap();
        assert_eq!(fr.map, (0..5).collect::<Vec<_>>());
        assert!(fr.h.same_edges(&g));
    }

    #[test]
    fn empty_target_rejected() {
        let g = generate::path(3);
        assert!(matches!(
            sample_retraction(&g, &[], 0),
            Err(Error::EmptyTarget(_))
        ));
        let two = MetricGraph::from_int(3, &[(0, 1, 1)]);
        assert!(matches!(
            sample_retraction(&two, &[0], 0),
            Err(Error::EmptyTarget(_))
        ));
    }

    #[test]
    fn gradient_is_one_between_targets() {
        let g = generate::path(2);
        assert_eq!(gradient_stat(&g, &[0, 1], 0, &q(1), 5, 0).unwrap(), 1.0);
        assert_eq!(gradient_stat(&g, &[0, 1], 0, &q(5), 5, 0).unwrap(), 0.0);
    }
}
