//! Thinning of star-shaped tree maps and rounding of tree maps to sparse cuts.

use std::collections::BTreeMap;

use num::{Signed, Zero};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{MetricGraph, MetricTree, NO_NODE};
use crate::polyflow::{
    assignment_cost, nu, separated_demand, AdaptedLengths, CutCertificate, Demands, PolymatroidCaps,
};
use crate::rational::{dyadic_ceil, fmt, q, to_f64, Q};
use crate::rng::{rng, sub_seed, Rng};
use crate::treeembed::{is_thin, star_violation, TreeMap};

/// Thinness reached by [`thin_map`].
pub const THIN_DELTA: usize = 4;
/// Edge sets up to this size get an exact `ν`.
pub const EXACT_NU_LIMIT: usize = 16;

/// Result of thinning: the new map and where each original tree node went.
#[derive(Clone, Debug)]
pub struct Thinned {
    pub map: TreeMap,
    pub node_map: Vec<usize>,
    pub coins: usize,
}

struct Forest {
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    depth: Vec<Q>,
    rep: Vec<usize>,
}

impl Forest {
    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.rep[root] != root {
            root = self.rep[root];
        }
        while self.rep[x] != root {
            let next = self.rep[x];
            self.rep[x] = root;
            x = next;
        }
        root
    }

    /// Child of `x` on the way down to `c` in the current tree.
    fn direction(&self, x: usize, mut c: usize) -> usize {
        while self.parent[c] != x {
            c = self.parent[c];
        }
        c
    }

    /// Merges the arms hanging from `x` into one path by identifying nodes at equal depth.
    fn zip(&mut self, x: usize, arms: &[Vec<usize>]) {
        for arm in arms {
            let mut prev = x;
            for &n in arm {
                self.children[prev].retain(|&c| c != n);
                prev = n;
            }
        }
        let mut all: Vec<usize> = arms.concat();
        all.sort_by(|a, b| self.depth[*a].cmp(&self.depth[*b]).then(a.cmp(b)));
        let mut prev = x;
        let mut i = 0;
        while i < all.len() {
            let r = all[i];
            let mut j = i + 1;
            while j < all.len() && self.depth[all[j]] == self.depth[r] {
                let o = all[j];
                self.rep[o] = r;
                for c in std::mem::take(&mut self.children[o]) {
                    self.parent[c] = r;
                    self.children[r].push(c);
                }
                j += 1;
            }
            self.parent[r] = prev;
            self.children[prev].push(r);
            prev = r;
            i = j;
        }
    }
}

/// Thins a star-shaped map with coins from `coin`: at every node, bottom-up, the arms towards
/// neighbour images are tagged by a coin and arms with equal tags are zipped together.
pub fn thin_map_with_coins(
    g: &MetricGraph,
    tm: &TreeMap,
    coin: &mut dyn FnMut() -> bool,
) -> Result<Thinned> {
    if let Some(t) = star_violation(g, tm) {
        return Err(Error::NotStarShaped(t));
    }
    let r = tm.rooted();
    let k = tm.tree.node_count();
    let mut children = vec![Vec::new(); k];
    for x in 0..k {
        if r.parent[x] != NO_NODE {
            children[r.parent[x]].push(x);
        }
    }
    let mut f = Forest {
        parent: r.parent.clone(),
        children,
        depth: r.depth.clone(),
        rep: (0..k).collect(),
    };
    let mut fiber: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (a, &t) in tm.map.iter().enumerate() {
        fiber[t].push(a);
    }
    let mut coins = 0;
    for &x in r.order.iter().rev() {
        let mut targets: Vec<usize> = Vec::new();
        for &a in &fiber[x] {
            for w in g.neighbors(a) {
                let c0 = tm.map[w];
                if c0 != x && r.is_ancestor(x, c0) {
                    targets.push(f.find(c0));
                }
            }
        }
        targets.sort_unstable();
        targets.dedup();
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &c in &targets {
            groups.entry(f.direction(x, c)).or_default().push(c);
        }
        let mut arms: Vec<Vec<usize>> = Vec::new();
        for (_, group) in groups {
            let deepest = *group
                .iter()
                .max_by(|a, b| f.depth[**a].cmp(&f.depth[**b]))
                .unwrap();
            let mut arm = vec![deepest];
            let mut c = deepest;
            while f.parent[c] != x {
                c = f.parent[c];
                arm.push(c);
            }
            if group.iter().any(|t| !arm.contains(t)) {
                return Err(Error::NotStarShaped(x));
            }
            arm.reverse();
            arms.push(arm);
        }
        let mut sides: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
        for arm in arms {
            coins += 1;
            sides[usize::from(coin())].push(arm);
        }
        for side in &sides {
            if side.len() >= 2 {
                f.zip(x, side);
            }
        }
    }
    let mut id = vec![NO_NODE; k];
    let mut next = 0;
    for x in 0..k {
        if f.rep[x] == x {
            id[x] = next;
            next += 1;
        }
    }
    let mut tree = MetricTree::with_nodes(next);
    for x in 0..k {
        if f.rep[x] == x && f.parent[x] != NO_NODE {
            let p = f.parent[x];
            tree.add_edge(id[p], id[x], &f.depth[x] - &f.depth[p]);
        }
    }
    let node_map: Vec<usize> = (0..k).map(|x| id[f.find(x)]).collect();
    let map = TreeMap {
        tree,
        map: tm.map.iter().map(|&t| node_map[t]).collect(),
        root: node_map[tm.root],
    };
    if !is_thin(g, &map, THIN_DELTA) {
        return Err(Error::Invariant(format!(
            "thinned map is not {THIN_DELTA}-thin"
        )));
    }
    Ok(Thinned {
        map,
        node_map,
        coins,
    })
}

/// Thins with fair coins from `rng`.
pub fn thin_map(g: &MetricGraph, tm: &TreeMap, rng: &mut Rng) -> Result<Thinned> {
    thin_map_with_coins(g, tm, &mut || rng.gen_bool(0.5))
}

/// Number of coins [`thin_map`] flips on this input; it does not depend on their outcomes.
pub fn thin_coin_count(g: &MetricGraph, tm: &TreeMap) -> Result<usize> {
    Ok(thin_map_with_coins(g, tm, &mut || false)?.coins)
}

/// Cut found by rounding a tree map, with the guaranteed bound.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub certificate: CutCertificate,
    /// `delta · Σ ρ̂(ℓ) / Σ dem·d_T`
    pub bound: Q,
    pub tree_edges: usize,
}

/// Threshold assignment: edge `e` goes to its outer endpoint iff it still has length left after
/// reaching `x` and walking `lambda` into the tree edge.
fn sweep_assignment(g: &MetricGraph, s: &[(usize, usize, Q)], lambda: &Q) -> Vec<usize> {
    s.iter()
        .map(|(e, outer, slack)| {
            if lambda <= slack {
                *outer
            } else {
                g.edge(*e).other(*outer)
            }
        })
        .collect()
}

/// Best cut among the edge sets `S(a)` crossing each tree edge `a`, for a `delta`-thin map and
/// lengths `ell` adapted to the tree distances.
pub fn round_thin(
    g: &MetricGraph,
    tm: &TreeMap,
    ell: &AdaptedLengths,
    caps: &PolymatroidCaps,
    dem: &Demands,
    delta: usize,
) -> Result<RoundOutcome> {
    if ell.ends.len() != g.m() {
        return Err(Error::InvalidInput(
            "one length pair per edge expected".into(),
        ));
    }
    if ell
        .ends
        .iter()
        .any(|(a, b)| a.is_negative() || b.is_negative())
    {
        return Err(Error::NegativeEntry);
    }
    let r = tm.rooted();
    for (e, (a, b)) in g.edges().iter().zip(&ell.ends) {
        let d = tm.dist(&r, e.u, e.v);
        if d > a + b {
            return Err(Error::HypothesisViolated {
                u: e.u,
                v: e.v,
                dist: fmt(&d),
                bound: fmt(&(a + b)),
            });
        }
    }
    if !is_thin(g, tm, delta) {
        return Err(Error::Invariant(format!("map is not {delta}-thin")));
    }
    let spread: Q = dem.iter().map(|(u, v, x)| tm.dist(&r, u, v) * x).sum();
    if spread.is_zero() {
        return Err(Error::NoSeparatedDemand);
    }
    let bound = q(delta as i64) * ell.lovasz_total(g, caps)? / &spread;
    let mut best: Option<CutCertificate> = None;
    let mut tree_edges = 0;
    for y in 0..tm.tree.node_count() {
        let x = r.parent[y];
        if x == NO_NODE {
            continue;
        }
        tree_edges += 1;
        let inside = |v: usize| r.is_ancestor(y, tm.map[v]);
        // (edge, endpoint outside the subtree, ℓ_outer − d_T(F(outer), x))
        let s: Vec<(usize, usize, Q)> = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| inside(e.u) != inside(e.v))
            .map(|(i, e)| {
                let outer = if inside(e.u) { e.v } else { e.u };
                (i, outer, ell.at(g, i, outer) - r.dist(tm.map[outer], x))
            })
            .collect();
        let edges: Vec<usize> = s.iter().map(|t| t.0).collect();
        let sep = separated_demand(g, &edges, dem);
        if sep.is_zero() {
            continue;
        }
        let (cost, assignment, exact) = if edges.len() <= EXACT_NU_LIMIT {
            let (c, a) = nu(g, &edges, caps)?;
            (c, a, true)
        } else {
            let len_a = &r.depth[y] - &r.depth[x];
            let mut cands: Vec<Q> = vec![Q::zero(), len_a.clone()];
            cands.extend(
                s.iter()
                    .map(|t| t.2.clone())
                    .filter(|b| !b.is_negative() && b <= &len_a),
            );
            cands.sort();
            cands.dedup();
            let mids: Vec<Q> = cands.windows(2).map(|w| (&w[0] + &w[1]) / q(2)).collect();
            cands.extend(mids);
            let mut best_a: Option<(Q, Vec<usize>)> = None;
            for lam in &cands {
                let a = sweep_assignment(g, &s, lam);
                let c = assignment_cost(g, caps, &edges, &a);
                if best_a.as_ref().is_none_or(|(b, _)| c < *b) {
                    best_a = Some((c, a));
                }
            }
            let (c, a) = best_a.unwrap();
            (c, a, false)
        };
        let sparsity = &cost / &sep;
        if best.as_ref().is_none_or(|b| sparsity < b.sparsity) {
            best = Some(CutCertificate {
                edges,
                assignment,
                nu: cost,
                separated_demand: sep,
                sparsity,
                nu_exact: exact,
            });
        }
    }
    let certificate = best.ok_or(Error::NoSeparatedDemand)?;
    if certificate.sparsity > bound {
        return Err(Error::Invariant(format!(
            "rounded sparsity {} above the guaranteed {}",
            fmt(&certificate.sparsity),
            fmt(&bound)
        )));
    }
    Ok(RoundOutcome {
        certificate,
        bound,
        tree_edges,
    })
}

/// Scales every edge so that `len = ℓ_u + ℓ_v`, then rounds each positive entry up to a power of two.
pub fn dyadic_lengths(g: &MetricGraph, ell: &AdaptedLengths) -> Result<AdaptedLengths> {
    if !ell.is_adapted_to(g) {
        return Err(Error::InvalidInput(
            "lengths are not adapted to the graph".into(),
        ));
    }
    let ends = g
        .edges()
        .iter()
        .zip(&ell.ends)
        .map(|(e, (a, b))| {
            let total = a + b;
            if total.is_zero() {
                return (Q::zero(), Q::zero());
            }
            let up = |x: &Q| {
                let s = x * &e.len / &total;
                if s.is_zero() {
                    s
                } else {
                    dyadic_ceil(&s)
                }
            };
            (up(a), up(b))
        })
        .collect();
    Ok(AdaptedLengths { ends })
}

/// Lengths adapted to the tree distances of `tm`: each edge is charged to its endpoint with the
/// larger dyadic length, in proportion to its stretch.
pub fn tree_adapted_lengths(
    g: &MetricGraph,
    tm: &TreeMap,
    dyadic: &AdaptedLengths,
) -> Result<AdaptedLengths> {
    let r = tm.rooted();
    let mut ends = Vec::with_capacity(g.m());
    for (e, (a, b)) in g.edges().iter().zip(&dyadic.ends) {
        let d = tm.dist(&r, e.u, e.v);
        if e.len.is_zero() {
            if !d.is_zero() {
                return Err(Error::HypothesisViolated {
                    u: e.u,
                    v: e.v,
                    dist: fmt(&d),
                    bound: "0".into(),
                });
            }
            ends.push((Q::zero(), Q::zero()));
            continue;
        }
        let side = |mine: &Q, theirs: &Q| {
            if mine < theirs {
                Q::zero()
            } else {
                q(2) * mine * &d / &e.len
            }
        };
        ends.push((side(a, b), side(b, a)));
    }
    Ok(AdaptedLengths { ends })
}

#[derive(Clone, Debug)]
pub struct MultiscaleOutcome {
    pub best: CutCertificate,
    /// `Σ ρ̂(ℓ) / Σ dem·d` for the input lengths
    pub objective: Q,
    /// rounded sparsity over `objective`, per sample
    pub ratios: Vec<f64>,
    pub per_sample: Vec<CutCertificate>,
}

/// Rounds adapted lengths through `samples` star-shaped tree maps drawn by `sampler`, each thinned
/// and rounded; returns the sparsest cut found.
pub fn multiscale_round(
    g: &MetricGraph,
    ell: &AdaptedLengths,
    caps: &PolymatroidCaps,
    dem: &Demands,
    samples: usize,
    seed: u64,
    sampler: &mut dyn FnMut(u64) -> Result<TreeMap>,
) -> Result<MultiscaleOutcome> {
    let dyadic = dyadic_lengths(g, ell)?;
    let spread = crate::polyflow::demand_distance(g, dem).ok_or(Error::NoSeparatedDemand)?;
    if spread.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let objective = ell.lovasz_total(g, caps)? / &spread;
    let mut per_sample = Vec::with_capacity(samples);
    let mut ratios = Vec::with_capacity(samples);
    for i in 0..samples.max(1) {
        let s = sub_seed(seed, i as u64);
        let tm = sampler(s)?;
        if let Some(t) = star_violation(g, &tm) {
            return Err(Error::NotStarShaped(t));
        }
        let tilde = tree_adapted_lengths(g, &tm, &dyadic)?;
        let thin = thin_map(g, &tm, &mut rng(sub_seed(s, 1)))?;
        let out = round_thin(g, &thin.map, &tilde, caps, dem, THIN_DELTA)?;
        let c = out.certificate;
        ratios.push(if objective.is_zero() {
            f64::INFINITY
        } else {
            to_f64(&(&c.sparsity / &objective))
        });
        per_sample.push(c);
    }
    let best = per_sample
        .iter()
        .min_by(|a, b| a.sparsity.cmp(&b.sparsity))
        .unwrap()
        .clone();
    Ok(MultiscaleOutcome {
        best,
        objective,
        ratios,
        per_sample,
    })
}
