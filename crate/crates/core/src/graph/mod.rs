//! Metric graphs: exact edge lengths, shortest paths and structural decompositions.

mod blocks;
mod cycle;
mod outerplanar;
mod planarity;
mod tree;

pub use blocks::{biconnected_components, Blocks};
pub use cycle::{flatten, make_cycle, Cycle, FlatPath, MetricPath};
pub use outerplanar::{
    block_outer_cycle, check_slack, ear_decomposition, is_outerplanar, outer_cycle_is_valid,
    slack_transform, Ear, OuterplanarBuild,
};
pub use planarity::{face_is_valid, faces_from_rotation, is_planar};
pub use tree::{glue, MetricTree, Rooted, NO_NODE};

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{q, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: Q,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected simple graph on vertices `0..n` with nonnegative rational edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl MetricGraph {
    /// Builds a graph, rejecting loops, parallel edges, bad ids and negative lengths.
    /// Lengths are kept as given; see [`reduce_lengths`].
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, Q)>) -> Result<Self> {
        let mut g = MetricGraph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            index: HashMap::new(),
        };
        for (u, v, len) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({u},{v}) out of range for n={n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("loop at vertex {u}")));
            }
            if len.is_negative() {
                return Err(Error::InvalidInput(format!(
                    "negative length on edge ({u},{v})"
                )));
            }
            if g.index.contains_key(&key(u, v)) {
                return Err(Error::InvalidInput(format!("parallel edge ({u},{v})")));
            }
            let i = g.edges.len();
            g.index.insert(key(u, v), i);
            g.adj[u].push((v, i));
            g.adj[v].push((u, i));
            g.edges.push(Edge {
                u: u.min(v),
                v: u.max(v),
                len,
            });
        }
        Ok(g)
    }

    /// Convenience constructor with integer lengths; panics on malformed input.
    pub fn from_int(n: usize, edges: &[(usize, usize, i64)]) -> Self {
        Self::new(n, edges.iter().map(|&(u, v, l)| (u, v, q(l)))).expect("valid graph")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    /// `(neighbor, edge index)` pairs at `v`.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(w, _)| w)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_index(&self, u: usize, v: usize) -> Option<usize> {
        self.index.get(&key(u, v)).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.index.contains_key(&key(u, v))
    }

    pub fn len(&self, u: usize, v: usize) -> Option<&Q> {
        self.edge_index(u, v).map(|i| &self.edges[i].len)
    }

    /// Same topology with new lengths, indexed like `edges()`.
    pub fn with_lengths(&self, lens: Vec<Q>) -> Result<Self> {
        assert_eq!(lens.len(), self.m());
        Self::new(
            self.n,
            self.edges.iter().zip(lens).map(|(e, l)| (e.u, e.v, l)),
        )
    }

    pub fn scaled(&self, s: &Q) -> Self {
        self.with_lengths(self.edges.iter().map(|e| &e.len * s).collect())
            .expect("scaling keeps validity")
    }

    /// Subgraph keeping the edges whose index passes `keep`.
    pub fn edge_subgraph(&self, keep: impl Fn(usize) -> bool) -> Self {
        Self::new(
            self.n,
            self.edges
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, e)| (e.u, e.v, e.len.clone())),
        )
        .expect("subgraph of a valid graph")
    }

    /// Connected component label per vertex (labels are the smallest vertex id in the component).
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = s;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &(y, _) in &self.adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = s;
                        stack.push(y);
                    }
                }
            }
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Edges whose length exceeds the distance between their endpoints.
    pub fn unreduced_edges(&self) -> Vec<usize> {
        let d = all_pairs_distances(self);
        (0..self.m())
            .filter(|&i| d.get(self.edges[i].u, self.edges[i].v) != Some(&self.edges[i].len))
            .collect()
    }

    pub fn is_reduced(&self) -> bool {
        self.unreduced_edges().is_empty()
    }

    /// Equality as edge sets with lengths, ignoring insertion order.
    pub fn same_edges(&self, other: &MetricGraph) -> bool {
        let sorted = |g: &MetricGraph| {
            let mut e = g.edges.clone();
            e.sort_by_key(|x| (x.u, x.v));
            e
        };
        self.n == other.n && sorted(self) == sorted(other)
    }
}

/// Shortest-path distances from `src`; `None` is infinity. When `allowed` is given, only
/// vertices marked `true` are used (the induced subgraph).
pub fn dijkstra(g: &MetricGraph, src: usize, allowed: Option<&[bool]>) -> Vec<Option<Q>> {
    let ok = |v: usize| allowed.is_none_or(|a| a[v]);
    let mut dist: Vec<Option<Q>> = vec![None; g.n()];
    if !ok(src) {
        return dist;
    }
    let mut done = vec![false; g.n()];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(Q::zero());
    heap.push(Reverse((Q::zero(), src)));
    while let Some(Reverse((d, x))) = heap.pop() {
        if done[x] {
            continue;
        }
        done[x] = true;
        for &(y, ei) in g.incident(x) {
            if !ok(y) || done[y] {
                continue;
            }
            let nd = &d + &g.edge(ei).len;
            if dist[y].as_ref().is_none_or(|cur| &nd < cur) {
                dist[y] = Some(nd.clone());
                heap.push(Reverse((nd, y)));
            }
        }
    }
    dist
}

/// Dense all-pairs distance matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distances {
    n: usize,
    d: Vec<Option<Q>>,
}

impl Distances {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> Option<&Q> {
        self.d[u * self.n + v].as_ref()
    }

    /// Finite distance; panics across components.
    pub fn at(&self, u: usize, v: usize) -> &Q {
        self.get(u, v)
            .unwrap_or_else(|| panic!("no path between {u} and {v}"))
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> Q {
        self.d
            .iter()
            .flatten()
            .max()
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    pub fn row(&self, u: usize) -> &[Option<Q>] {
        &self.d[u * self.n..(u + 1) * self.n]
    }
}

pub fn all_pairs_distances(g: &MetricGraph) -> Distances {
    let n = g.n();
    let mut d = Vec::with_capacity(n * n);
    for s in 0..n {
        d.extend(dijkstra(g, s, None));
    }
    Distances { n, d }
}

/// Replaces each edge length by the distance between its endpoints.
pub fn reduce_lengths(g: &MetricGraph) -> MetricGraph {
    let d = all_pairs_distances(g);
    g.with_lengths(g.edges().iter().map(|e| d.at(e.u, e.v).clone()).collect())
        .expect("reduced lengths are valid")
}
