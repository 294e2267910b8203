//! Capacities, demands, cut values and the concurrent-flow LP with its dual.

use std::collections::{BTreeMap, BTreeSet};

use num::{Signed, Zero};
use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::graph::{all_pairs_distances, MetricGraph};
use crate::lp::{self, Arithmetic, Lp, Relation};
use crate::rational::{self, to_f64, Q};

/// Largest ground set for explicit capacity tables and exact `nu`.
pub const MAX_EXACT_SET: usize = 20;
/// Edge-count limit for brute-force edge cuts.
pub const MAX_BRUTE_EDGES: usize = 16;
/// Vertex-count limit for brute-force vertex cuts.
pub const MAX_BRUTE_VERTICES: usize = 22;

/// A set function on `ground()` elements, evaluated on bitmasks.
pub trait SetFunction {
    fn ground(&self) -> usize;
    fn value(&self, mask: u64) -> Q;
}

/// Capacity at one vertex, as a set function over its incident edges in adjacency order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexCapacity {
    /// `cap · [S ≠ ∅]`
    Uniform(Q),
    /// values indexed by bitmask
    Table(Vec<Q>),
}

#[derive(Clone, Copy, Debug)]
pub struct VertexFn<'a> {
    cap: &'a VertexCapacity,
    degree: usize,
}

impl SetFunction for VertexFn<'_> {
    fn ground(&self) -> usize {
        self.degree
    }
    fn value(&self, mask: u64) -> Q {
        match self.cap {
            VertexCapacity::Uniform(c) if mask != 0 => c.clone(),
            VertexCapacity::Uniform(_) => Q::zero(),
            VertexCapacity::Table(t) => t[mask as usize].clone(),
        }
    }
}

/// Plain table-backed set function.
#[derive(Clone, Debug)]
pub struct TableFn(pub Vec<Q>);

impl SetFunction for TableFn {
    fn ground(&self) -> usize {
        self.0.len().trailing_zeros() as usize
    }
    fn value(&self, mask: u64) -> Q {
        self.0[mask as usize].clone()
    }
}

pub fn is_monotone(f: &impl SetFunction) -> bool {
    let k = f.ground();
    (0..1u64 << k).all(|a| (0..k).all(|i| a >> i & 1 == 1 || f.value(a) <= f.value(a | 1 << i)))
}

/// Exhaustive check of `f(A+i) + f(A+j) ≥ f(A) + f(A+i+j)`, which is equivalent to submodularity.
pub fn is_submodular(f: &impl SetFunction) -> bool {
    let k = f.ground();
    for a in 0..1u64 << k {
        let fa = f.value(a);
        for i in 0..k {
            if a >> i & 1 == 1 {
                continue;
            }
            let fi = f.value(a | 1 << i);
            for j in i + 1..k {
                if a >> j & 1 == 1 {
                    continue;
                }
                if &fi + f.value(a | 1 << j) < &fa + f.value(a | 1 << i | 1 << j) {
                    return false;
                }
            }
        }
    }
    true
}

/// Lovász extension by integrating over level sets between consecutive distinct values.
pub fn lovasz_extension(f: &impl SetFunction, ell: &[Q]) -> Result<Q> {
    if ell.len() != f.ground() {
        return Err(Error::InvalidInput(format!(
            "vector of length {} for ground set {}",
            ell.len(),
            f.ground()
        )));
    }
    if ell.iter().any(|x| x.is_negative()) {
        return Err(Error::NegativeEntry);
    }
    let levels: BTreeSet<&Q> = ell.iter().filter(|x| x.is_positive()).collect();
    let mut prev = Q::zero();
    let mut total = Q::zero();
    for tau in levels {
        let mask = ell
            .iter()
            .enumerate()
            .filter(|(_, x)| *x >= tau)
            .fold(0u64, |m, (i, _)| m | 1 << i);
        total += (tau - &prev) * f.value(mask);
        prev = tau.clone();
    }
    Ok(total)
}

/// Polymatroid capacities, one set function per vertex over its incident edges (in the order of
/// [`MetricGraph::incident`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolymatroidCaps {
    pub per_vertex: Vec<VertexCapacity>,
}

impl PolymatroidCaps {
    pub fn vertex(caps: &[Q]) -> Self {
        PolymatroidCaps {
            per_vertex: caps.iter().cloned().map(VertexCapacity::Uniform).collect(),
        }
    }

    /// `Some(cap)` when every vertex has the vertex-capacity form.
    pub fn vertex_caps(&self) -> Option<Vec<Q>> {
        self.per_vertex
            .iter()
            .map(|c| match c {
                VertexCapacity::Uniform(x) => Some(x.clone()),
                VertexCapacity::Table(_) => None,
            })
            .collect()
    }

    pub fn scaled(&self, s: &Q) -> Self {
        let per_vertex = self
            .per_vertex
            .iter()
            .map(|c| match c {
                VertexCapacity::Uniform(x) => VertexCapacity::Uniform(x * s),
                VertexCapacity::Table(t) => {
                    VertexCapacity::Table(t.iter().map(|x| x * s).collect())
                }
            })
            .collect();
        PolymatroidCaps { per_vertex }
    }

    pub fn at<'a>(&'a self, g: &MetricGraph, v: usize) -> VertexFn<'a> {
        VertexFn {
            cap: &self.per_vertex[v],
            degree: g.degree(v),
        }
    }

    /// Checks shapes, nonnegativity, `ρ(∅) = 0`, monotonicity and submodularity (exhaustively).
    pub fn validate(&self, g: &MetricGraph) -> Result<()> {
        if self.per_vertex.len() != g.n() {
            return Err(Error::InvalidInput(format!(
                "{} capacities for {} vertices",
                self.per_vertex.len(),
                g.n()
            )));
        }
        for (v, c) in self.per_vertex.iter().enumerate() {
            match c {
                VertexCapacity::Uniform(x) if x.is_negative() => {
                    return Err(Error::InvalidInput(format!(
                        "negative capacity at vertex {v}"
                    )))
                }
                VertexCapacity::Uniform(_) => {}
                VertexCapacity::Table(t) => {
                    let d = g.degree(v);
                    if d > MAX_EXACT_SET || t.len() != 1 << d {
                        return Err(Error::InvalidInput(format!(
                            "table at vertex {v} needs 2^{d} entries"
                        )));
                    }
                    let f = self.at(g, v);
                    if !t[0].is_zero() || t.iter().any(|x| x.is_negative()) {
                        return Err(Error::InvalidInput(format!(
                            "table at vertex {v} must be nonnegative with empty set 0"
                        )));
                    }
                    if !is_monotone(&f) {
                        return Err(Error::InvalidInput(format!(
                            "table at vertex {v} is not monotone"
                        )));
                    }
                    if !is_submodular(&f) {
                        return Err(Error::InvalidInput(format!(
                            "table at vertex {v} is not submodular"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn position(g: &MetricGraph, v: usize, e: usize) -> usize {
    g.incident(v)
        .iter()
        .position(|&(_, i)| i == e)
        .expect("edge incident to vertex")
}

/// Symmetric demands stored once per unordered pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Demands {
    n: usize,
    pairs: BTreeMap<(usize, usize), Q>,
}

impl Demands {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize, Q)>) -> Result<Self> {
        let mut d = Demands {
            n,
            pairs: BTreeMap::new(),
        };
        for (u, v, x) in pairs {
            if u == v || u >= n || v >= n {
                return Err(Error::InvalidInput(format!("bad demand pair ({u},{v})")));
            }
            if x.is_negative() {
                return Err(Error::InvalidInput(format!("negative demand on ({u},{v})")));
            }
            let key = (u.min(v), u.max(v));
            if d.pairs.contains_key(&key) {
                return Err(Error::InvalidInput(format!(
                    "duplicate demand pair ({u},{v})"
                )));
            }
            if x.is_positive() {
                d.pairs.insert(key, x);
            }
        }
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> Q {
        self.pairs
            .get(&(u.min(v), u.max(v)))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Q)> + '_ {
        self.pairs.iter().map(|(&(u, v), x)| (u, v, x))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.pairs.keys().flat_map(|&(u, v)| [u, v]).collect()
    }

    pub fn total(&self) -> Q {
        self.pairs.values().sum()
    }

    pub fn scaled(&self, s: &Q) -> Self {
        Demands {
            n: self.n,
            pairs: self.pairs.iter().map(|(k, x)| (*k, x * s)).collect(),
        }
    }
}

/// Cut certificate: edge set, valid assignment, capacity and sparsity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutCertificate {
    pub edges: Vec<usize>,
    /// endpoint charged for each edge of `edges`
    pub assignment: Vec<usize>,
    pub nu: Q,
    pub separated_demand: Q,
    pub sparsity: Q,
    /// whether `nu` is the exact minimum over valid assignments
    pub nu_exact: bool,
}

impl CutCertificate {
    /// Recomputes every field from scratch and checks consistency.
    pub fn verify(&self, g: &MetricGraph, caps: &PolymatroidCaps, dem: &Demands) -> Result<()> {
        if self.edges.len() != self.assignment.len() {
            return Err(Error::Invariant(
                "assignment length differs from edge count".into(),
            ));
        }
        for (&e, &x) in self.edges.iter().zip(&self.assignment) {
            let ed = g.edge(e);
            if x != ed.u && x != ed.v {
                return Err(Error::Invariant(format!(
                    "edge {e} assigned to non-endpoint {x}"
                )));
            }
        }
        let nu = assignment_cost(g, caps, &self.edges, &self.assignment);
        let sep = separated_demand(g, &self.edges, dem);
        if nu != self.nu
            || sep != self.separated_demand
            || sep.is_zero()
            || &nu / &sep != self.sparsity
        {
            return Err(Error::Invariant(
                "certificate values do not match recomputation".into(),
            ));
        }
        Ok(())
    }
}

/// `Σ_v ρ_v(g⁻¹(v))` for an explicit assignment.
pub fn assignment_cost(
    g: &MetricGraph,
    caps: &PolymatroidCaps,
    edges: &[usize],
    assignment: &[usize],
) -> Q {
    let mut masks: BTreeMap<usize, u64> = BTreeMap::new();
    for (&e, &x) in edges.iter().zip(assignment) {
        *masks.entry(x).or_default() |= 1 << position(g, x, e);
    }
    masks.iter().map(|(&v, &m)| caps.at(g, v).value(m)).sum()
}

fn f64_tables(caps: &PolymatroidCaps, v: usize) -> Option<Vec<f64>> {
    match &caps.per_vertex[v] {
        VertexCapacity::Uniform(_) => None,
        VertexCapacity::Table(t) => Some(t.iter().map(to_f64).collect()),
    }
}

/// Exact `ν_ρ(S)` by enumerating every valid assignment; returns the value and a minimizer.
pub fn nu(g: &MetricGraph, edges: &[usize], caps: &PolymatroidCaps) -> Result<(Q, Vec<usize>)> {
    let k = edges.len();
    if k > MAX_EXACT_SET {
        return Err(Error::TooLargeForExact(k));
    }
    if k == 0 {
        return Ok((Q::zero(), Vec::new()));
    }
    // local vertex slots
    let mut verts: Vec<usize> = edges
        .iter()
        .flat_map(|&e| [g.edge(e).u, g.edge(e).v])
        .collect();
    verts.sort_unstable();
    verts.dedup();
    let slot = |x: usize| verts.binary_search(&x).unwrap();
    let ends: Vec<[(usize, u64); 2]> = edges
        .iter()
        .map(|&e| {
            let ed = g.edge(e);
            [
                (slot(ed.u), 1u64 << position(g, ed.u, e)),
                (slot(ed.v), 1u64 << position(g, ed.v, e)),
            ]
        })
        .collect();
    let tables: Vec<Option<Vec<f64>>> = verts.iter().map(|&v| f64_tables(caps, v)).collect();
    let uniform: Vec<f64> = verts
        .iter()
        .map(|&v| match &caps.per_vertex[v] {
            VertexCapacity::Uniform(c) => to_f64(c),
            VertexCapacity::Table(_) => 0.0,
        })
        .collect();
    let val = |s: usize, m: u64| match &tables[s] {
        Some(t) => t[m as usize],
        None if m != 0 => uniform[s],
        None => 0.0,
    };
    let mut masks = vec![0u64; verts.len()];
    for e in &ends {
        masks[e[0].0] |= e[0].1;
    }
    let mut cost: f64 = (0..verts.len()).map(|s| val(s, masks[s])).sum();
    let mut best = cost;
    let mut cands: Vec<u64> = vec![0];
    let tol = |b: f64| 1e-9 * (1.0 + b.abs());
    for i in 1u64..1 << k {
        let bit = i.trailing_zeros() as usize;
        let gray = i ^ (i >> 1);
        let (from, to) = if gray >> bit & 1 == 1 {
            (ends[bit][0], ends[bit][1])
        } else {
            (ends[bit][1], ends[bit][0])
        };
        cost -= val(from.0, masks[from.0]) + val(to.0, masks[to.0]);
        masks[from.0] &= !from.1;
        masks[to.0] |= to.1;
        cost += val(from.0, masks[from.0]) + val(to.0, masks[to.0]);
        if cost < best - tol(best) {
            best = cost;
            cands.clear();
            cands.push(gray);
        } else if cost <= best + tol(best) && cands.len() < 4096 {
            cands.push(gray);
        }
    }
    let assign = |m: u64| -> Vec<usize> {
        edges
            .iter()
            .enumerate()
            .map(|(j, &e)| {
                if m >> j & 1 == 1 {
                    g.edge(e).v
                } else {
                    g.edge(e).u
                }
            })
            .collect()
    };
    cands.sort_unstable();
    let mut best_exact: Option<(Q, Vec<usize>)> = None;
    for m in cands {
        let a = assign(m);
        let c = assignment_cost(g, caps, edges, &a);
        if best_exact.as_ref().is_none_or(|(b, _)| c < *b) {
            best_exact = Some((c, a));
        }
    }
    Ok(best_exact.unwrap())
}

/// Component labels of `(V, E ∖ S)`.
pub fn components_without(g: &MetricGraph, removed: &[usize]) -> Vec<usize> {
    let cut: BTreeSet<usize> = removed.iter().copied().collect();
    let mut uf = UnionFind::<usize>::new(g.n());
    for (i, e) in g.edges().iter().enumerate() {
        if !cut.contains(&i) {
            uf.union(e.u, e.v);
        }
    }
    (0..g.n()).map(|v| uf.find(v)).collect()
}

/// `σ_S(u, v)`: whether `u` and `v` are disconnected once `S` is removed.
pub fn sigma(g: &MetricGraph, removed: &[usize], u: usize, v: usize) -> bool {
    let c = components_without(g, removed);
    c[u] != c[v]
}

pub fn separated_demand(g: &MetricGraph, removed: &[usize], dem: &Demands) -> Q {
    let c = components_without(g, removed);
    dem.iter()
        .filter(|(u, v, _)| c[*u] != c[*v])
        .map(|(_, _, x)| x.clone())
        .sum()
}

/// `Φ(S) = ν(S) / Σ dem·σ_S` with exact `ν`.
pub fn sparsity(
    g: &MetricGraph,
    removed: &[usize],
    caps: &PolymatroidCaps,
    dem: &Demands,
) -> Result<Q> {
    let sep = separated_demand(g, removed, dem);
    if sep.is_zero() {
        return Err(Error::NoSeparatedDemand);
    }
    Ok(nu(g, removed, caps)?.0 / sep)
}

fn certificate(
    g: &MetricGraph,
    edges: Vec<usize>,
    caps: &PolymatroidCaps,
    dem: &Demands,
) -> Result<CutCertificate> {
    let sep = separated_demand(g, &edges, dem);
    if sep.is_zero() {
        return Err(Error::NoSeparatedDemand);
    }
    let (nu, assignment) = nu(g, &edges, caps)?;
    Ok(CutCertificate {
        sparsity: &nu / &sep,
        edges,
        assignment,
        nu,
        separated_demand: sep,
        nu_exact: true,
    })
}

/// Minimum sparsity over all edge sets, exactly. Only cuts consisting of edges between distinct
/// components of their complement are enumerated; other sets have the same separation and a
/// larger `ν`.
pub fn brute_sparsest_edge_cut(
    g: &MetricGraph,
    caps: &PolymatroidCaps,
    dem: &Demands,
) -> Result<CutCertificate> {
    let m = g.m();
    if m > MAX_BRUTE_EDGES {
        return Err(Error::TooLarge(m));
    }
    let dems: Vec<(usize, usize, f64)> = dem.iter().map(|(u, v, x)| (u, v, to_f64(x))).collect();
    let mut best = f64::INFINITY;
    let mut cands: Vec<u64> = Vec::new();
    for s in 1u64..1 << m {
        let mut uf = UnionFind::<usize>::new(g.n());
        for (i, e) in g.edges().iter().enumerate() {
            if s >> i & 1 == 0 {
                uf.union(e.u, e.v);
            }
        }
        let closed = g
            .edges()
            .iter()
            .enumerate()
            .all(|(i, e)| s >> i & 1 == 0 || !uf.equiv(e.u, e.v));
        if !closed {
            continue;
        }
        let sep: f64 = dems
            .iter()
            .filter(|(u, v, _)| !uf.equiv(*u, *v))
            .map(|d| d.2)
            .sum();
        if sep <= 0.0 {
            continue;
        }
        let edges: Vec<usize> = (0..m).filter(|i| s >> i & 1 == 1).collect();
        let (nu_q, _) = nu(g, &edges, caps)?;
        let val = to_f64(&nu_q) / sep;
        let tol = 1e-9 * (1.0 + best.abs().min(1e300));
        if val < best - tol {
            best = val;
            cands.clear();
            cands.push(s);
        } else if val <= best + tol {
            cands.push(s);
        }
    }
    let mut out: Option<CutCertificate> = None;
    for s in cands {
        let c = certificate(g, (0..m).filter(|i| s >> i & 1 == 1).collect(), caps, dem)?;
        if out.as_ref().is_none_or(|b| c.sparsity < b.sparsity) {
            out = Some(c);
        }
    }
    out.ok_or(Error::NoSeparatedDemand)
}

/// Demand credit `Σ dem·ρ_S` of a vertex set: half for pairs with one endpoint in `S`, full for
/// pairs inside `S` or in different components of `G[V ∖ S]`.
pub fn vertex_cut_credit(g: &MetricGraph, set: &[usize], dem: &Demands) -> Q {
    let mut inside = vec![false; g.n()];
    for &v in set {
        inside[v] = true;
    }
    let mut uf = UnionFind::<usize>::new(g.n());
    for e in g.edges() {
        if !inside[e.u] && !inside[e.v] {
            uf.union(e.u, e.v);
        }
    }
    let half = rational::qr(1, 2);
    dem.iter()
        .map(|(u, v, x)| match (inside[u], inside[v]) {
            (true, true) => x.clone(),
            (true, false) | (false, true) => x * &half,
            _ if !uf.equiv(u, v) => x.clone(),
            _ => Q::zero(),
        })
        .sum()
}

/// `Φ^v(S) = Σ_{v∈S} cap(v) / Σ dem·ρ_S`.
pub fn vertex_cut_sparsity(g: &MetricGraph, cap: &[Q], set: &[usize], dem: &Demands) -> Result<Q> {
    let credit = vertex_cut_credit(g, set, dem);
    if credit.is_zero() {
        return Err(Error::NoSeparatedDemand);
    }
    let c: Q = set.iter().map(|&v| cap[v].clone()).sum();
    Ok(c / credit)
}

/// Exact minimum vertex-cut sparsity by enumerating all vertex subsets.
pub fn brute_sparsest_vertex_cut(
    g: &MetricGraph,
    cap: &[Q],
    dem: &Demands,
) -> Result<(Vec<usize>, Q)> {
    let n = g.n();
    if n > MAX_BRUTE_VERTICES {
        return Err(Error::TooLarge(n));
    }
    let capf: Vec<f64> = cap.iter().map(to_f64).collect();
    let dems: Vec<(usize, usize, f64)> = dem.iter().map(|(u, v, x)| (u, v, to_f64(x))).collect();
    let edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let mut best = f64::INFINITY;
    let mut cands: Vec<u32> = Vec::new();
    for s in 1u32..1 << n {
        let mut credit = 0.0;
        let mut outside_pair = false;
        for &(u, v, x) in &dems {
            match (s >> u & 1, s >> v & 1) {
                (1, 1) => credit += x,
                (0, 0) => outside_pair = true,
                _ => credit += 0.5 * x,
            }
        }
        if outside_pair {
            let mut uf = UnionFind::<usize>::new(n);
            for &(a, b) in &edges {
                if s >> a & 1 == 0 && s >> b & 1 == 0 {
                    uf.union(a, b);
                }
            }
            for &(u, v, x) in &dems {
                if s >> u & 1 == 0 && s >> v & 1 == 0 && !uf.equiv(u, v) {
                    credit += x;
                }
            }
        }
        if credit <= 0.0 {
            continue;
        }
        let c: f64 = (0..n).filter(|&v| s >> v & 1 == 1).map(|v| capf[v]).sum();
        let val = c / credit;
        let tol = 1e-9 * (1.0 + best.abs().min(1e300));
        if val < best - tol {
            best = val;
            cands.clear();
            cands.push(s);
        } else if val <= best + tol {
            cands.push(s);
        }
    }
    let mut out: Option<(Vec<usize>, Q)> = None;
    for s in cands {
        let set: Vec<usize> = (0..n).filter(|&v| s >> v & 1 == 1).collect();
        let val = vertex_cut_sparsity(g, cap, &set, dem)?;
        if out.as_ref().is_none_or(|(_, b)| val < *b) {
            out = Some((set, val));
        }
    }
    out.ok_or(Error::NoSeparatedDemand)
}

/// Per-edge lengths at each endpoint: `ends[e] = (ℓ_u(e), ℓ_v(e))` for `e = {u, v}`, `u < v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptedLengths {
    pub ends: Vec<(Q, Q)>,
}

impl AdaptedLengths {
    /// `ℓ_v(e) = z_v` for every edge at `v`.
    pub fn from_vertex_weights(g: &MetricGraph, z: &[Q]) -> Self {
        AdaptedLengths {
            ends: g
                .edges()
                .iter()
                .map(|e| (z[e.u].clone(), z[e.v].clone()))
                .collect(),
        }
    }

    pub fn at(&self, g: &MetricGraph, e: usize, v: usize) -> &Q {
        if g.edge(e).u == v {
            &self.ends[e].0
        } else {
            &self.ends[e].1
        }
    }

    /// `ℓ_v` in the order of `g.incident(v)`.
    pub fn vector(&self, g: &MetricGraph, v: usize) -> Vec<Q> {
        g.incident(v)
            .iter()
            .map(|&(_, e)| self.at(g, e, v).clone())
            .collect()
    }

    pub fn lengths(&self) -> Vec<Q> {
        self.ends.iter().map(|(a, b)| a + b).collect()
    }

    /// `len(e) ≤ ℓ_u(e) + ℓ_v(e)` for every edge.
    pub fn is_adapted_to(&self, g: &MetricGraph) -> bool {
        self.ends.len() == g.m()
            && g.edges()
                .iter()
                .zip(&self.ends)
                .all(|(e, (a, b))| e.len <= a + b)
    }

    pub fn scaled(&self, s: &Q) -> Self {
        AdaptedLengths {
            ends: self.ends.iter().map(|(a, b)| (a * s, b * s)).collect(),
        }
    }

    /// `Σ_v ρ̂_v(ℓ_v)`.
    pub fn lovasz_total(&self, g: &MetricGraph, caps: &PolymatroidCaps) -> Result<Q> {
        let mut total = Q::zero();
        for v in 0..g.n() {
            total += lovasz_extension(&caps.at(g, v), &self.vector(g, v))?;
        }
        Ok(total)
    }
}

/// `Σ dem·d_len`, or `None` when a demand pair is disconnected.
pub fn demand_distance(g: &MetricGraph, dem: &Demands) -> Option<Q> {
    let d = all_pairs_distances(g);
    dem.iter()
        .map(|(u, v, x)| d.get(u, v).map(|dd| dd * x))
        .sum()
}

/// `Σ_v ρ̂_v(ℓ_v) / Σ dem·d_len` with `len = ℓ_u + ℓ_v`.
pub fn dual_objective(
    g: &MetricGraph,
    ell: &AdaptedLengths,
    caps: &PolymatroidCaps,
    dem: &Demands,
) -> Result<Q> {
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
    let lg = g.with_lengths(ell.lengths())?;
    let num = ell.lovasz_total(g, caps)?;
    match demand_distance(&lg, dem) {
        None => Ok(Q::zero()),
        Some(d) if d.is_zero() => Err(Error::ZeroDenominator),
        Some(d) => Ok(num / d),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSolution {
    pub epsilon: Q,
    /// commodities are grouped by their smaller endpoint
    pub sources: Vec<usize>,
    /// per source, per arc; arc `2e` runs `u → v` and `2e + 1` runs `v → u` for `e = {u, v}`
    pub flows: Vec<Vec<Q>>,
    /// multiplier of every capacity row as `(vertex, edge mask, value)`
    pub capacity_duals: Vec<(usize, u64, Q)>,
    pub certified: bool,
}

impl FlowSolution {
    /// Total flow per edge, both directions and all commodities.
    pub fn edge_flow(&self, m: usize) -> Vec<Q> {
        (0..m)
            .map(|e| self.flows.iter().map(|f| &f[2 * e] + &f[2 * e + 1]).sum())
            .collect()
    }

    /// Exact feasibility: conservation per commodity group and every polymatroid constraint.
    pub fn verify(&self, g: &MetricGraph, caps: &PolymatroidCaps, dem: &Demands) -> Result<()> {
        for (s, f) in self.sources.iter().zip(&self.flows) {
            if f.iter().any(|x| x.is_negative()) {
                return Err(Error::Invariant("negative flow".into()));
            }
            let mut net = vec![Q::zero(); g.n()];
            for (e, ed) in g.edges().iter().enumerate() {
                net[ed.v] += &f[2 * e] - &f[2 * e + 1];
                net[ed.u] += &f[2 * e + 1] - &f[2 * e];
            }
            for (w, x) in net.iter().enumerate() {
                if w == *s {
                    continue;
                }
                let want = if w > *s {
                    dem.get(*s, w) * &self.epsilon
                } else {
                    Q::zero()
                };
                if *x != want {
                    return Err(Error::Invariant(format!(
                        "conservation fails at {w} for source {s}"
                    )));
                }
            }
        }
        let phi = self.edge_flow(g.m());
        for v in 0..g.n() {
            let d = g.degree(v);
            let f = caps.at(g, v);
            let masks: Vec<u64> = match &caps.per_vertex[v] {
                VertexCapacity::Uniform(_) => vec![(1u64 << d) - 1],
                VertexCapacity::Table(_) => (1..1u64 << d).collect(),
            };
            for mask in masks {
                let load: Q = (0..d)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| phi[g.incident(v)[i].1].clone())
                    .sum();
                if load > f.value(mask) {
                    return Err(Error::Invariant(format!("capacity exceeded at vertex {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Concurrent flow under polymatroid capacities: `Σ_{e∈A} φ(e) ≤ ρ_v(A)` for all `A ⊆ E(v)`.
/// For vertex-capacity form only `A = E(v)` is needed, by monotonicity.
pub fn mcf_polymatroid_lp(
    g: &MetricGraph,
    caps: &PolymatroidCaps,
    dem: &Demands,
    arith: Arithmetic,
) -> Result<FlowSolution> {
    caps.validate(g)?;
    if dem.is_empty() {
        return Err(Error::InvalidInput("no positive demand".into()));
    }
    if dem.n() != g.n() {
        return Err(Error::InvalidInput("demand size differs from graph".into()));
    }
    let n = g.n();
    let m = g.m();
    let sources: Vec<usize> = dem
        .iter()
        .map(|(u, _, _)| u)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let var = |si: usize, arc: usize| 1 + si * 2 * m + arc;
    let mut lp = Lp::new(1 + sources.len() * 2 * m);
    lp.objective = vec![(0, rational::one())];
    let one = rational::one();
    for (si, &s) in sources.iter().enumerate() {
        let mut rows: Vec<Vec<(usize, Q)>> = vec![Vec::new(); n];
        for (e, ed) in g.edges().iter().enumerate() {
            // arc 2e: u → v, arc 2e+1: v → u
            rows[ed.v].push((var(si, 2 * e), one.clone()));
            rows[ed.u].push((var(si, 2 * e), -one.clone()));
            rows[ed.u].push((var(si, 2 * e + 1), one.clone()));
            rows[ed.v].push((var(si, 2 * e + 1), -one.clone()));
        }
        for (w, mut row) in rows.into_iter().enumerate() {
            if w == s {
                continue;
            }
            let d = if w > s { dem.get(s, w) } else { Q::zero() };
            if row.is_empty() && d.is_zero() {
                continue;
            }
            if !d.is_zero() {
                row.push((0, -d));
            }
            lp.add(row, Relation::Eq, Q::zero());
        }
    }
    let mut cap_rows: Vec<(usize, u64)> = Vec::new();
    for v in 0..n {
        let d = g.degree(v);
        if d == 0 {
            continue;
        }
        let f = caps.at(g, v);
        let masks: Vec<u64> = match &caps.per_vertex[v] {
            VertexCapacity::Uniform(_) => vec![(1u64 << d) - 1],
            VertexCapacity::Table(_) => (1..1u64 << d).collect(),
        };
        for mask in masks {
            let mut row = Vec::new();
            for i in 0..d {
                if mask >> i & 1 == 1 {
                    let e = g.incident(v)[i].1;
                    for si in 0..sources.len() {
                        row.push((var(si, 2 * e), one.clone()));
                        row.push((var(si, 2 * e + 1), one.clone()));
                    }
                }
            }
            lp.add(row, Relation::Le, f.value(mask));
            cap_rows.push((v, mask));
        }
    }
    let first_cap = lp.constraints.len() - cap_rows.len();
    let sol = lp::solve(&lp, arith)?;
    let flows = (0..sources.len())
        .map(|si| (0..2 * m).map(|a| sol.x[var(si, a)].clone()).collect())
        .collect();
    let capacity_duals = cap_rows
        .iter()
        .enumerate()
        .map(|(i, &(v, mk))| (v, mk, sol.duals[first_cap + i].clone()))
        .collect();
    Ok(FlowSolution {
        epsilon: sol.value,
        sources,
        flows,
        capacity_duals,
        certified: sol.certified,
    })
}

/// Vertex-capacitated concurrent flow: every flow path uses capacity at its vertices, with the
/// load at each vertex bounded by `2·cap`.
pub fn mcf_vertex_lp(
    g: &MetricGraph,
    cap: &[Q],
    dem: &Demands,
    arith: Arithmetic,
) -> Result<FlowSolution> {
    let doubled: Vec<Q> = cap.iter().map(|c| c * rational::q(2)).collect();
    mcf_polymatroid_lp(g, &PolymatroidCaps::vertex(&doubled), dem, arith)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualSolution {
    /// vertex weights
    pub z: Vec<Q>,
    /// `len(e) = z_u + z_v`
    pub len: Vec<Q>,
    pub ell: AdaptedLengths,
    /// `Σ 2·cap(v)·z_v`, normalized so that `Σ dem·d_len = 1`
    pub objective: Q,
    pub epsilon: Q,
}

/// Optimal dual of the vertex-capacitated LP, read off the capacity-row multipliers.
pub fn mcf_dual_vertex(
    g: &MetricGraph,
    cap: &[Q],
    dem: &Demands,
    arith: Arithmetic,
) -> Result<DualSolution> {
    let sol = mcf_vertex_lp(g, cap, dem, arith)?;
    let mut z = vec![Q::zero(); g.n()];
    for (v, _, y) in &sol.capacity_duals {
        z[*v] = if y.is_negative() {
            Q::zero()
        } else {
            y.clone()
        };
    }
    let mut objective: Q = z.iter().zip(cap).map(|(a, c)| a * c * rational::q(2)).sum();
    let len: Vec<Q> = g.edges().iter().map(|e| &z[e.u] + &z[e.v]).collect();
    let lg = g.with_lengths(len)?;
    if sol.epsilon.is_positive() {
        let d = demand_distance(&lg, dem).ok_or(Error::Infeasible)?;
        if arith == Arithmetic::Exact && d < rational::one() {
            return Err(Error::Invariant("dual distances below one".into()));
        }
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        for x in z.iter_mut() {
            *x /= &d;
        }
        objective /= &d;
        if arith == Arithmetic::Exact && objective != sol.epsilon {
            return Err(Error::Invariant(format!(
                "dual objective {} differs from primal {}",
                rational::fmt(&objective),
                rational::fmt(&sol.epsilon)
            )));
        }
    }
    let len: Vec<Q> = g.edges().iter().map(|e| &z[e.u] + &z[e.v]).collect();
    let ell = AdaptedLengths::from_vertex_weights(g, &z);
    Ok(DualSolution {
        z,
        len,
        ell,
        objective,
        epsilon: sol.epsilon,
    })
}

/// Optimal dual of the polymatroid LP: `ℓ_v(e)` sums the multipliers of the capacity rows at `v`
/// containing `e`, normalized so that `Σ dem·d_len = 1`. Returns the flow, the lengths and
/// `Σ ρ̂(ℓ)`, which never exceeds the flow value.
pub fn mcf_dual_polymatroid(
    g: &MetricGraph,
    caps: &PolymatroidCaps,
    dem: &Demands,
    arith: Arithmetic,
) -> Result<(FlowSolution, AdaptedLengths, Q)> {
    let sol = mcf_polymatroid_lp(g, caps, dem, arith)?;
    let mut ends = vec![(Q::zero(), Q::zero()); g.m()];
    for (v, mask, y) in &sol.capacity_duals {
        if !y.is_positive() {
            continue;
        }
        for (k, &(_, e)) in g.incident(*v).iter().enumerate() {
            if mask >> k & 1 == 1 {
                if g.edge(e).u == *v {
                    ends[e].0 += y;
                } else {
                    ends[e].1 += y;
                }
            }
        }
    }
    let mut ell = AdaptedLengths { ends };
    if sol.epsilon.is_positive() {
        let lg = g.with_lengths(ell.lengths())?;
        let d = demand_distance(&lg, dem).ok_or(Error::Infeasible)?;
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        ell = ell.scaled(&(rational::one() / d));
    }
    let total = ell.lovasz_total(g, caps)?;
    if arith == Arithmetic::Exact && sol.epsilon.is_positive() && total > sol.epsilon {
        return Err(Error::Invariant(format!(
            "dual objective {} exceeds primal {}",
            rational::fmt(&total),
            rational::fmt(&sol.epsilon)
        )));
    }
    Ok((sol, ell, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    fn caps(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q(x)).collect()
    }

    fn single_edge() -> (MetricGraph, Demands) {
        (
            MetricGraph::from_int(2, &[(0, 1, 1)]),
            Demands::new(2, [(0, 1, q(1))]).unwrap(),
        )
    }

    fn path3() -> (MetricGraph, Demands) {
        (
            MetricGraph::from_int(3, &[(0, 1, 1), (1, 2, 1)]),
            Demands::new(3, [(0, 2, q(1))]).unwrap(),
        )
    }

    #[test]
    fn lovasz_basics() {
        let f = VertexCapacity::Uniform(q(2));
        let vf = VertexFn { cap: &f, degree: 2 };
        assert_eq!(lovasz_extension(&vf, &[q(1), q(3)]).unwrap(), q(6));
        assert_eq!(
            lovasz_extension(&vf, &[q(-1), q(3)]),
            Err(Error::NegativeEntry)
        );
        let t = TableFn(vec![q(0), q(2), q(3), q(4)]);
        assert_eq!(lovasz_extension(&t, &[q(1), q(0)]).unwrap(), q(2));
        assert_eq!(lovasz_extension(&t, &[q(1), q(1)]).unwrap(), q(4));
        assert!(is_monotone(&t) && is_submodular(&t));
        assert!(!is_submodular(&TableFn(vec![q(0), q(1), q(1), q(3)])));
    }

    #[test]
    fn nu_examples() {
        let g = MetricGraph::from_int(2, &[(0, 1, 1)]);
        let (v, a) = nu(&g, &[0], &PolymatroidCaps::vertex(&caps(&[3, 5]))).unwrap();
        assert_eq!((v, a), (q(3), vec![0]));
        let (v, a) = nu(&g, &[0], &PolymatroidCaps::vertex(&caps(&[5, 3]))).unwrap();
        assert_eq!((v, a), (q(3), vec![1]));
        assert_eq!(
            nu(&g, &[], &PolymatroidCaps::vertex(&caps(&[1, 1])))
                .unwrap()
                .0,
            q(0)
        );
        let star = MetricGraph::from_int(4, &[(0, 1, 1), (0, 2, 1), (0, 3, 1)]);
        let (v, a) = nu(
            &star,
            &[0, 1, 2],
            &PolymatroidCaps::vertex(&caps(&[1, 1, 1, 1])),
        )
        .unwrap();
        assert_eq!(v, q(1));
        assert_eq!(a, vec![0, 0, 0]);
    }

    #[test]
    fn sigma_and_sparsity() {
        let (g, dem) = path3();
        assert!(!sigma(&g, &[], 0, 2));
        assert!(sigma(&g, &[0, 1], 0, 2));
        assert!(sigma(&g, &[0], 0, 1) && !sigma(&g, &[0], 1, 2));
        let (g1, d1) = single_edge();
        let c = PolymatroidCaps::vertex(&caps(&[1, 1]));
        assert_eq!(sparsity(&g1, &[0], &c, &d1).unwrap(), q(1));
        assert_eq!(
            sparsity(&g, &[], &PolymatroidCaps::vertex(&caps(&[1, 1, 1])), &dem),
            Err(Error::NoSeparatedDemand)
        );
    }

    #[test]
    fn vertex_cut_examples() {
        let (g, dem) = path3();
        let c = caps(&[1, 1, 1]);
        assert_eq!(vertex_cut_sparsity(&g, &c, &[1], &dem).unwrap(), q(1));
        assert_eq!(vertex_cut_sparsity(&g, &c, &[0], &dem).unwrap(), q(2));
        assert_eq!(
            brute_sparsest_vertex_cut(&g, &c, &dem).unwrap(),
            (vec![1], q(1))
        );
        let (g1, d1) = single_edge();
        assert_eq!(vertex_cut_credit(&g1, &[0], &d1), qr(1, 2));
        assert_eq!(
            brute_sparsest_vertex_cut(&g1, &caps(&[1, 1]), &d1).unwrap(),
            (vec![0], q(2))
        );
    }

    #[test]
    fn edge_cut_single_edge() {
        let (g, d) = single_edge();
        let c = brute_sparsest_edge_cut(&g, &PolymatroidCaps::vertex(&caps(&[4, 3])), &d).unwrap();
        assert_eq!(c.sparsity, q(3));
        c.verify(&g, &PolymatroidCaps::vertex(&caps(&[4, 3])), &d)
            .unwrap();
    }

    #[test]
    fn lp_examples() {
        let (g, d) = single_edge();
        let s = mcf_vertex_lp(&g, &caps(&[1, 1]), &d, Arithmetic::Exact).unwrap();
        assert!(s.certified);
        assert_eq!(s.epsilon, q(2));
        let pc = PolymatroidCaps::vertex(&caps(&[2, 2]));
        s.verify(&g, &pc, &d).unwrap();
        let (g, d) = path3();
        assert_eq!(
            mcf_vertex_lp(&g, &caps(&[1, 1, 1]), &d, Arithmetic::Exact)
                .unwrap()
                .epsilon,
            q(1)
        );
        let f = mcf_vertex_lp(&g, &caps(&[1, 1, 1]), &d, Arithmetic::Float).unwrap();
        assert!((to_f64(&f.epsilon) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dual_examples() {
        let (g, d) = single_edge();
        let du = mcf_dual_vertex(&g, &caps(&[1, 1]), &d, Arithmetic::Exact).unwrap();
        assert_eq!(du.objective, q(2));
        assert_eq!(du.len, vec![q(1)]);
        let doubled = PolymatroidCaps::vertex(&caps(&[2, 2]));
        assert_eq!(dual_objective(&g, &du.ell, &doubled, &d).unwrap(), q(2));
        let half = AdaptedLengths {
            ends: vec![(qr(1, 2), qr(1, 2))],
        };
        assert_eq!(
            dual_objective(&g, &half, &PolymatroidCaps::vertex(&caps(&[1, 1])), &d).unwrap(),
            q(1)
        );
        let (g, d) = path3();
        assert_eq!(
            mcf_dual_vertex(&g, &caps(&[1, 1, 1]), &d, Arithmetic::Exact)
                .unwrap()
                .objective,
            q(1)
        );
    }

    #[test]
    fn disconnected_pair_gives_zero() {
        let g = MetricGraph::from_int(4, &[(0, 1, 1), (2, 3, 1)]);
        let d = Demands::new(4, [(0, 2, q(1)), (0, 1, q(1))]).unwrap();
        let s = mcf_vertex_lp(&g, &caps(&[1, 1, 1, 1]), &d, Arithmetic::Exact).unwrap();
        assert_eq!(s.epsilon, q(0));
    }

    #[test]
    fn polymatroid_dual_matches_primal() {
        let (g, d) = path3();
        let table = PolymatroidCaps {
            per_vertex: vec![
                VertexCapacity::Uniform(q(5)),
                VertexCapacity::Table(vec![q(0), q(2), q(3), q(4)]),
                VertexCapacity::Uniform(q(5)),
            ],
        };
        let (sol, ell, total) = mcf_dual_polymatroid(&g, &table, &d, Arithmetic::Exact).unwrap();
        assert_eq!(sol.epsilon, q(2));
        assert_eq!(total, sol.epsilon);
        assert_eq!(dual_objective(&g, &ell, &table, &d).unwrap(), q(2));
        let (g, d) = single_edge();
        let (sol, _, total) = mcf_dual_polymatroid(
            &g,
            &PolymatroidCaps::vertex(&caps(&[3, 1])),
            &d,
            Arithmetic::Exact,
        )
        .unwrap();
        assert_eq!((sol.epsilon, total), (q(1), q(1)));
    }
}
