use std::collections::VecDeque;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt, Q};

/// An undirected tree with nonnegative rational edge lengths on nodes `0..node_count()`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MetricTree {
    adj: Vec<Vec<(usize, Q)>>,
}

/// A rooted view of a tree with parent pointers and depths.
#[derive(Clone, Debug)]
pub struct Rooted {
    pub root: usize,
    pub parent: Vec<usize>,
    pub parent_len: Vec<Q>,
    pub depth: Vec<Q>,
    pub hops: Vec<usize>,
    /// Nodes in breadth-first order from the root.
    pub order: Vec<usize>,
}

pub const NO_NODE: usize = usize::MAX;

impl Rooted {
    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.hops[a] > self.hops[b] {
            a = self.parent[a];
        }
        while self.hops[b] > self.hops[a] {
            b = self.parent[b];
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
        }
        a
    }

    pub fn dist(&self, a: usize, b: usize) -> Q {
        let c = self.lca(a, b);
        &self.depth[a] + &self.depth[b] - &self.depth[c] - &self.depth[c]
    }

    /// Node sequence from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let c = self.lca(a, b);
        let mut left = vec![a];
        let mut x = a;
        while x != c {
            x = self.parent[x];
            left.push(x);
        }
        let mut right = Vec::new();
        let mut y = b;
        while y != c {
            right.push(y);
            y = self.parent[y];
        }
        right.reverse();
        left.extend(right);
        left
    }

    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut x = b;
        while self.hops[x] > self.hops[a] {
            x = self.parent[x];
        }
        x == a
    }
}

impl MetricTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nodes(k: usize) -> Self {
        MetricTree {
            adj: vec![Vec::new(); k],
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize, len: Q) {
        debug_assert!(a != b && !len.is_negative());
        self.adj[a].push((b, len.clone()));
        self.adj[b].push((a, len));
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adj[a].retain(|(x, _)| *x != b);
        self.adj[b].retain(|(x, _)| *x != a);
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, a: usize) -> &[(usize, Q)] {
        &self.adj[a]
    }

    pub fn edges(&self) -> Vec<(usize, usize, Q)> {
        let mut out = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            for (b, l) in nb {
                if a < *b {
                    out.push((a, *b, l.clone()));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected, acyclic, nonnegative lengths.
    pub fn is_tree(&self) -> bool {
        let k = self.node_count();
        if k == 0 {
            return true;
        }
        if self.edge_count() != k - 1 || self.adj.iter().flatten().any(|(_, l)| l.is_negative()) {
            return false;
        }
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for (y, _) in &self.adj[x] {
                if !seen[*y] {
                    seen[*y] = true;
                    count += 1;
                    stack.push(*y);
                }
            }
        }
        count == k
    }

    /// Roots the tree at `root`; nodes unreachable from `root` keep `NO_NODE` parents.
    pub fn rooted(&self, root: usize) -> Rooted {
        let k = self.node_count();
        let mut parent = vec![NO_NODE; k];
        let mut parent_len = vec![Q::zero(); k];
        let mut depth = vec![Q::zero(); k];
        let mut hops = vec![0; k];
        let mut order = vec![root];
        let mut seen = vec![false; k];
        seen[root] = true;
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            i += 1;
            for (y, l) in &self.adj[x] {
                if !seen[*y] {
                    seen[*y] = true;
                    parent[*y] = x;
                    parent_len[*y] = l.clone();
                    depth[*y] = &depth[x] + l;
                    hops[*y] = hops[x] + 1;
                    order.push(*y);
                }
            }
        }
        Rooted {
            root,
            parent,
            parent_len,
            depth,
            hops,
            order,
        }
    }

    pub fn distances_from(&self, a: usize) -> Vec<Option<Q>> {
        let mut d: Vec<Option<Q>> = vec![None; self.node_count()];
        d[a] = Some(Q::zero());
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            let dx = d[x].clone().unwrap();
            for (y, l) in &self.adj[x] {
                if d[*y].is_none() {
                    d[*y] = Some(&dx + l);
                    queue.push_back(*y);
                }
            }
        }
        d
    }

    pub fn dist(&self, a: usize, b: usize) -> Option<Q> {
        self.distances_from(a)[b].clone()
    }

    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let r = self.rooted(a);
        if b != a && r.parent[b] == NO_NODE {
            return None;
        }
        let mut p = vec![b];
        let mut x = b;
        while x != a {
            x = r.parent[x];
            p.push(x);
        }
        p.reverse();
        Some(p)
    }

    fn path_with_positions(&self, a: usize, b: usize) -> Option<(Vec<usize>, Vec<Q>)> {
        let p = self.path(a, b)?;
        let mut pos = vec![Q::zero()];
        for w in p.windows(2) {
            let l = self.adj[w[0]]
                .iter()
                .find(|(y, _)| *y == w[1])
                .unwrap()
                .1
                .clone();
            let next = pos.last().unwrap() + l;
            pos.push(next);
        }
        Some((p, pos))
    }
}

/// Glues `t2` onto `t1` by identifying the `u2`-`v2` path of `t2` with the `u1`-`v1` path of `t1`
/// point by point. Returns the glued tree (nodes of `t1` keep their ids) and the image of every
/// node of `t2`.
pub fn glue(
    t1: &MetricTree,
    t2: &MetricTree,
    u1: usize,
    v1: usize,
    u2: usize,
    v2: usize,
) -> Result<(MetricTree, Vec<usize>)> {
    let missing = || Error::InvalidInput("glue endpoints are not connected".into());
    let (p1, pos1) = t1.path_with_positions(u1, v1).ok_or_else(missing)?;
    let (p2, pos2) = t2.path_with_positions(u2, v2).ok_or_else(missing)?;
    let (l1, l2) = (pos1.last().unwrap(), pos2.last().unwrap());
    if l1 != l2 {
        return Err(Error::LengthMismatch(fmt(l1), fmt(l2)));
    }
    let mut out = t1.clone();
    let mut map2 = vec![NO_NODE; t2.node_count()];
    // place path-2 nodes along path 1, subdividing its edges where needed
    let mut j = 0;
    for i in 0..p1.len() {
        while j < p2.len() && pos2[j] == pos1[i] {
            map2[p2[j]] = p1[i];
            j += 1;
        }
        if i + 1 == p1.len() {
            break;
        }
        let mut prev = p1[i];
        let mut prev_pos = pos1[i].clone();
        let mut inserted = false;
        while j < p2.len() && pos2[j] < pos1[i + 1] {
            if pos2[j] == prev_pos {
                map2[p2[j]] = prev;
                j += 1;
                continue;
            }
            if !inserted {
                out.remove_edge(p1[i], p1[i + 1]);
                inserted = true;
            }
            let x = out.add_node();
            out.add_edge(prev, x, &pos2[j] - &prev_pos);
            map2[p2[j]] = x;
            prev = x;
            prev_pos = pos2[j].clone();
            j += 1;
        }
        if inserted {
            out.add_edge(prev, p1[i + 1], &pos1[i + 1] - &prev_pos);
        }
    }
    debug_assert!(j == p2.len());
    for x in 0..t2.node_count() {
        if map2[x] == NO_NODE {
            map2[x] = out.add_node();
        }
    }
    let on_path2: std::collections::HashSet<(usize, usize)> = p2
        .windows(2)
        .flat_map(|w| [(w[0], w[1]), (w[1], w[0])])
        .collect();
    for (a, b, l) in t2.edges() {
        if !on_path2.contains(&(a, b)) {
            out.add_edge(map2[a], map2[b], l);
        }
    }
    Ok((out, map2))
}
