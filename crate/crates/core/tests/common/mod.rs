//! Independent oracles and instance builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use flowcut::graph::MetricGraph;
use flowcut::polyflow::{AdaptedLengths, Demands, PolymatroidCaps, VertexCapacity};
use flowcut::rational::{q, qr, Q};
use flowcut::rng::Rng;
use flowcut::treeembed::TreeMap;
use num::Zero;
use rand::Rng as _;

/// Exact all-pairs distances by Floyd-Warshall.
pub fn floyd(g: &MetricGraph) -> Vec<Vec<Option<Q>>> {
    let n = g.n();
    let mut d: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = Some(Q::zero());
    }
    for e in g.edges() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            if d[a][b].as_ref().is_none_or(|x| &e.len < x) {
                d[a][b] = Some(e.len.clone());
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k].clone() else { continue };
            for j in 0..n {
                if let Some(kj) = &d[k][j] {
                    let via = &ik + kj;
                    if d[i][j].as_ref().is_none_or(|x| &via < x) {
                        d[i][j] = Some(via);
                    }
                }
            }
        }
    }
    d
}

/// Tree edges on the path between two nodes, as sorted node pairs.
fn path_edges(tm: &TreeMap, a: usize, b: usize) -> Vec<(usize, usize)> {
    let p = tm.tree.path(a, b).expect("tree is connected");
    p.windows(2)
        .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
        .collect()
}

/// Union of the tree paths from `t` to each target, as node degrees.
fn union_degrees(tm: &TreeMap, t: usize, targets: &BTreeSet<usize>) -> BTreeMap<usize, usize> {
    let edges: BTreeSet<(usize, usize)> =
        targets.iter().flat_map(|&c| path_edges(tm, t, c)).collect();
    let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
    for (a, b) in edges {
        *deg.entry(a).or_default() += 1;
        *deg.entry(b).or_default() += 1;
    }
    deg
}

/// Star-shaped: around every tree node `t`, the union of paths to images of neighbours of the
/// fiber over `t` has no branching except at `t`.
pub fn star_shaped(g: &MetricGraph, tm: &TreeMap) -> bool {
    let mut targets: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (tm.map[e.u], tm.map[e.v]);
        if a != b {
            targets.entry(a).or_default().insert(b);
            targets.entry(b).or_default().insert(a);
        }
    }
    targets.iter().all(|(&t, ts)| {
        union_degrees(tm, t, ts)
            .iter()
            .all(|(&x, &d)| x == t || d <= 2)
    })
}

/// Fewest paths from `F(u)` covering the paths to the images of the neighbours of `u`.
pub fn thinness_of(g: &MetricGraph, tm: &TreeMap, u: usize) -> usize {
    let t = tm.map[u];
    let ts: BTreeSet<usize> = g
        .neighbors(u)
        .map(|w| tm.map[w])
        .filter(|&c| c != t)
        .collect();
    union_degrees(tm, t, &ts)
        .iter()
        .filter(|(&x, &d)| x != t && d == 1)
        .count()
}

pub fn lipschitz(g: &MetricGraph, tm: &TreeMap) -> bool {
    g.edges()
        .iter()
        .all(|e| tm.tree.dist(tm.map[e.u], tm.map[e.v]).unwrap() <= e.len)
}

/// Vertex cut credit with half credit for pairs touching the set.
pub fn vertex_credit(g: &MetricGraph, inside: &[bool], dem: &Demands) -> Q {
    let n = g.n();
    let mut comp = vec![usize::MAX; n];
    for s in 0..n {
        if inside[s] || comp[s] != usize::MAX {
            continue;
        }
        comp[s] = s;
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for y in g.neighbors(x) {
                if !inside[y] && comp[y] == usize::MAX {
                    comp[y] = s;
                    stack.push(y);
                }
            }
        }
    }
    dem.iter()
        .map(|(u, v, x)| match (inside[u], inside[v]) {
            (true, true) => x.clone(),
            (true, false) | (false, true) => x / q(2),
            _ if comp[u] != comp[v] => x.clone(),
            _ => Q::zero(),
        })
        .sum()
}

/// Every vertex set with positive credit and its sparsity.
pub fn all_vertex_cuts(g: &MetricGraph, cap: &[Q], dem: &Demands) -> Vec<(Vec<usize>, Q)> {
    let n = g.n();
    (1u32..1 << n)
        .filter_map(|s| {
            let inside: Vec<bool> = (0..n).map(|v| s >> v & 1 == 1).collect();
            let credit = vertex_credit(g, &inside, dem);
            if credit.is_zero() {
                return None;
            }
            let c: Q = (0..n).filter(|&v| inside[v]).map(|v| cap[v].clone()).sum();
            Some(((0..n).filter(|&v| inside[v]).collect(), c / credit))
        })
        .collect()
}

pub fn vertex_phi(g: &MetricGraph, cap: &[Q], dem: &Demands) -> Q {
    all_vertex_cuts(g, cap, dem)
        .into_iter()
        .map(|(_, s)| s)
        .min()
        .expect("some demand is separable")
}

/// Non-crossing chord sets of the `n`-cycle `0..n`, each as a graph with the given lengths.
pub fn dissections(n: usize) -> Vec<Vec<(usize, usize)>> {
    let chords: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 2..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !(i == 0 && j == n - 1))
        .collect();
    let cross = |(a, b): (usize, usize), (c, d): (usize, usize)| {
        (a < c && c < b && b < d) || (c < a && a < d && d < b)
    };
    let mut out = Vec::new();
    for mask in 0u32..1 << chords.len() {
        let set: Vec<(usize, usize)> = (0..chords.len())
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| chords[i])
            .collect();
        if set
            .iter()
            .enumerate()
            .all(|(i, &x)| set[i + 1..].iter().all(|&y| !cross(x, y)))
        {
            out.push(set);
        }
    }
    out
}

/// Cycle `0..n` plus `chords`, with integer lengths from `lens` in edge order.
pub fn cycle_with_chords(
    n: usize,
    chords: &[(usize, usize)],
    rng: &mut Rng,
    max_len: i64,
) -> MetricGraph {
    let mut edges: Vec<(usize, usize, Q)> = (0..n)
        .map(|i| (i, (i + 1) % n, q(rng.gen_range(1..=max_len))))
        .collect();
    edges.extend(
        chords
            .iter()
            .map(|&(a, b)| (a, b, q(rng.gen_range(1..=max_len)))),
    );
    MetricGraph::new(n, edges).unwrap()
}

/// Random unit demands on `k` distinct pairs drawn from `vs`.
pub fn random_demands(n: usize, vs: &[usize], k: usize, rng: &mut Rng) -> Demands {
    let mut pairs = BTreeSet::new();
    let want = k.min(vs.len() * (vs.len() - 1) / 2);
    while pairs.len() < want {
        let (a, b) = (
            vs[rng.gen_range(0..vs.len())],
            vs[rng.gen_range(0..vs.len())],
        );
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    Demands::new(n, pairs.into_iter().map(|(a, b)| (a, b, q(1)))).unwrap()
}

/// Random rational in `[lo, hi]` on a grid of `1/den`.
pub fn grid_rational(rng: &mut Rng, lo: i64, hi: i64, den: i64) -> Q {
    qr(rng.gen_range(lo * den..=hi * den), den)
}

/// Lovász extension by sorting: `Σ_i (ℓ_(i) − ℓ_(i+1)) f(top i)` over decreasing entries.
pub fn lovasz(f: impl Fn(u64) -> Q, ell: &[Q]) -> Q {
    let mut order: Vec<usize> = (0..ell.len()).collect();
    order.sort_by(|&a, &b| ell[b].cmp(&ell[a]));
    let mut total = Q::zero();
    let mut mask = 0u64;
    for (k, &i) in order.iter().enumerate() {
        mask |= 1 << i;
        let next = order.get(k + 1).map_or(Q::zero(), |&j| ell[j].clone());
        total += (&ell[i] - next) * f(mask);
    }
    total
}

/// `Σ_v ρ̂_v(ℓ_v)` straight from the capacity description.
pub fn lovasz_total(g: &MetricGraph, caps: &PolymatroidCaps, ell: &AdaptedLengths) -> Q {
    (0..g.n())
        .map(|v| {
            let inc = g.incident(v);
            let entries: Vec<Q> = inc
                .iter()
                .map(|&(_, e)| {
                    if g.edge(e).u == v {
                        ell.ends[e].0.clone()
                    } else {
                        ell.ends[e].1.clone()
                    }
                })
                .collect();
            match &caps.per_vertex[v] {
                VertexCapacity::Uniform(c) => {
                    lovasz(|m| if m == 0 { Q::zero() } else { c.clone() }, &entries)
                }
                VertexCapacity::Table(t) => lovasz(|m| t[m as usize].clone(), &entries),
            }
        })
        .sum()
}

/// Concave-of-cardinality capacities: `ρ_v(S) = Σ_{i<|S|} steps_v[i]` with non-increasing steps.
pub fn concave_caps(g: &MetricGraph, rng: &mut Rng) -> PolymatroidCaps {
    let per_vertex = (0..g.n())
        .map(|v| {
            let d = g.degree(v);
            let mut steps: Vec<Q> = (0..d).map(|_| q(rng.gen_range(0..=4))).collect();
            steps.sort_by(|a, b| b.cmp(a));
            if steps.first().is_some_and(|s| s.is_zero()) {
                steps[0] = q(1);
            }
            let table = (0u64..1 << d)
                .map(|m| steps[..m.count_ones() as usize].iter().sum())
                .collect();
            VertexCapacity::Table(table)
        })
        .collect();
    PolymatroidCaps { per_vertex }
}

/// Minimum assignment cost over all `2^|edges|` endpoint choices.
pub fn brute_nu(g: &MetricGraph, caps: &PolymatroidCaps, edges: &[usize]) -> Q {
    (0u64..1 << edges.len())
        .map(|choice| {
            let mut masks: BTreeMap<usize, u64> = BTreeMap::new();
            for (k, &e) in edges.iter().enumerate() {
                let ed = g.edge(e);
                let x = if choice >> k & 1 == 1 { ed.v } else { ed.u };
                let pos = g.incident(x).iter().position(|&(_, f)| f == e).unwrap();
                *masks.entry(x).or_default() |= 1 << pos;
            }
            masks
                .iter()
                .map(|(&v, &m)| match &caps.per_vertex[v] {
                    VertexCapacity::Uniform(c) => c.clone(),
                    VertexCapacity::Table(t) => t[m as usize].clone(),
                })
                .sum::<Q>()
        })
        .min()
        .unwrap_or_else(Q::zero)
}
