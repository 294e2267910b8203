//! Random and structured test instances.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::graph::{reduce_lengths, MetricGraph};
use crate::rational::{q, Q};
use crate::rng::Rng;

fn int_len(rng: &mut Rng, max_len: i64) -> Q {
    q(rng.gen_range(1..=max_len.max(1)))
}

/// Path `0 - 1 - ... - (n-1)` with unit lengths.
pub fn path(n: usize) -> MetricGraph {
    MetricGraph::new(n, (1..n).map(|i| (i - 1, i, q(1)))).expect("path")
}

/// Cycle `0 - 1 - ... - (n-1) - 0` with unit lengths, `n >= 3`.
pub fn cycle(n: usize) -> MetricGraph {
    assert!(n >= 3);
    MetricGraph::new(n, (0..n).map(|i| (i, (i + 1) % n, q(1)))).expect("cycle")
}

/// Star with center 0 and `k` unit leaves.
pub fn star(k: usize) -> MetricGraph {
    MetricGraph::new(k + 1, (1..=k).map(|i| (0, i, q(1)))).expect("star")
}

/// `r x c` unit grid; vertex `(i, j)` is `i * c + j`. Returns the graph and its boundary cycle.
pub fn grid(r: usize, c: usize) -> (MetricGraph, Vec<usize>) {
    assert!(r >= 2 && c >= 2);
    let id = |i: usize, j: usize| i * c + j;
    let mut edges = Vec::new();
    for i in 0..r {
        for j in 0..c {
            if j + 1 < c {
                edges.push((id(i, j), id(i, j + 1), q(1)));
            }
            if i + 1 < r {
                edges.push((id(i, j), id(i + 1, j), q(1)));
            }
        }
    }
    let mut face = Vec::new();
    face.extend((0..c).map(|j| id(0, j)));
    face.extend((1..r).map(|i| id(i, c - 1)));
    face.extend((0..c - 1).rev().map(|j| id(r - 1, j)));
    face.extend((1..r - 1).rev().map(|i| id(i, 0)));
    (MetricGraph::new(r * c, edges).expect("grid"), face)
}

/// Wheel with rim `0..k` and hub `k`, unit lengths. Returns the graph and the rim cycle.
pub fn wheel(k: usize) -> (MetricGraph, Vec<usize>) {
    assert!(k >= 3);
    let mut edges: Vec<_> = (0..k).map(|i| (i, (i + 1) % k, q(1))).collect();
    edges.extend((0..k).map(|i| (i, k, q(1))));
    (
        MetricGraph::new(k + 1, edges).expect("wheel"),
        (0..k).collect(),
    )
}

/// Uniform random labelled tree (random attachment) with integer lengths in `1..=max_len`.
pub fn random_tree(n: usize, max_len: i64, rng: &mut Rng) -> MetricGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let edges: Vec<_> = (1..n)
        .map(|i| (order[rng.gen_range(0..i)], order[i], int_len(rng, max_len)))
        .collect();
    MetricGraph::new(n, edges).expect("tree")
}

/// Splits the polygon `poly` by random diagonals until only triangles remain, collecting the
/// diagonals.
fn random_triangulation(poly: Vec<usize>, rng: &mut Rng, out: &mut Vec<(usize, usize)>) {
    let mut stack = vec![poly];
    while let Some(p) = stack.pop() {
        let k = p.len();
        if k < 4 {
            continue;
        }
        let i = rng.gen_range(0..k);
        let j = (i + rng.gen_range(2..k - 1)) % k;
        let (a, b) = (i.min(j), i.max(j));
        out.push((p[a], p[b]));
        stack.push(p[a..=b].to_vec());
        let mut rest = p[b..].to_vec();
        rest.extend_from_slice(&p[..=a]);
        stack.push(rest);
    }
}

/// Biconnected outerplanar graph on the polygon `0..n` (outer cycle in index order); each diagonal
/// of a random triangulation is kept with probability `chord_p`. Lengths are random integers
/// reduced to shortest-path distances.
pub fn random_outerplanar(n: usize, chord_p: f64, max_len: i64, rng: &mut Rng) -> MetricGraph {
    assert!(n >= 3);
    let mut diagonals = Vec::new();
    random_triangulation((0..n).collect(), rng, &mut diagonals);
    let mut edges: Vec<_> = (0..n)
        .map(|i| (i, (i + 1) % n, int_len(rng, max_len)))
        .collect();
    for (a, b) in diagonals {
        if rng.gen_bool(chord_p) {
            edges.push((a, b, int_len(rng, max_len)));
        }
    }
    reduce_lengths(&MetricGraph::new(n, edges).expect("outerplanar"))
}

/// Outerplanar graph with several blocks: random biconnected pieces and bridges glued at cut
/// vertices.
pub fn random_outerplanar_blocks(n: usize, max_len: i64, rng: &mut Rng) -> MetricGraph {
    let mut edges: Vec<(usize, usize, Q)> = Vec::new();
    let mut used = 1;
    while used < n {
        let anchor = rng.gen_range(0..used);
        let left = n - used;
        if left >= 2 && rng.gen_bool(0.6) {
            let k = rng.gen_range(2..=left.min(6));
            let piece = random_outerplanar(k + 1, 0.5, max_len, rng);
            // local vertex 0 becomes the anchor, the rest are new
            let id = |x: usize| if x == 0 { anchor } else { used + x - 1 };
            edges.extend(
                piece
                    .edges()
                    .iter()
                    .map(|e| (id(e.u), id(e.v), e.len.clone())),
            );
            used += k;
        } else {
            edges.push((anchor, used, int_len(rng, max_len)));
            used += 1;
        }
    }
    reduce_lengths(&MetricGraph::new(n, edges).expect("blocks"))
}

/// Planar graph whose outer face is the polygon `0..face_n`: a random triangulation of the polygon
/// with `inner_n` stacked vertices, after which every inner edge is dropped with probability
/// `drop_p` as long as the graph stays connected. Returns the graph and the face.
pub fn random_planar_with_face(
    face_n: usize,
    inner_n: usize,
    drop_p: f64,
    max_len: i64,
    rng: &mut Rng,
) -> (MetricGraph, Vec<usize>) {
    assert!(face_n >= 3);
    let n = face_n + inner_n;
    let mut diagonals = Vec::new();
    random_triangulation((0..face_n).collect(), rng, &mut diagonals);
    let mut inner: Vec<(usize, usize)> = diagonals;
    // triangles of the current triangulation
    let mut triangles = triangles_of(face_n, &inner);
    for x in face_n..n {
        let t = triangles.swap_remove(rng.gen_range(0..triangles.len()));
        for &c in &t {
            inner.push((c, x));
        }
        triangles.push([t[0], t[1], x]);
        triangles.push([t[1], t[2], x]);
        triangles.push([t[0], t[2], x]);
    }
    inner.shuffle(rng);
    let outer: Vec<(usize, usize)> = (0..face_n).map(|i| (i, (i + 1) % face_n)).collect();
    let mut keep = vec![true; inner.len()];
    for i in 0..inner.len() {
        if !rng.gen_bool(drop_p) {
            continue;
        }
        keep[i] = false;
        let es = outer
            .iter()
            .chain(inner.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| e));
        let g = MetricGraph::new(n, es.map(|&(a, b)| (a, b, q(1)))).expect("planar");
        if !g.is_connected() {
            keep[i] = true;
        }
    }
    let edges: Vec<_> = outer
        .iter()
        .chain(inner.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| e))
        .map(|&(a, b)| (a, b, int_len(rng, max_len)))
        .collect();
    (
        reduce_lengths(&MetricGraph::new(n, edges).expect("planar")),
        (0..face_n).collect(),
    )
}

/// Triangles of a triangulated polygon `0..k` given its diagonals.
fn triangles_of(k: usize, diagonals: &[(usize, usize)]) -> Vec<[usize; 3]> {
    let mut adj = vec![std::collections::BTreeSet::new(); k];
    for i in 0..k {
        adj[i].insert((i + 1) % k);
        adj[(i + 1) % k].insert(i);
    }
    for &(a, b) in diagonals {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut out = Vec::new();
    for a in 0..k {
        for &b in adj[a].range(a + 1..) {
            for &c in adj[b].range(b + 1..) {
                if adj[a].contains(&c) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{face_is_valid, is_outerplanar, is_planar};
    use crate::rng::rng;

    #[test]
    fn outerplanar_generators() {
        let mut r = rng(7);
        for n in 3..12 {
            let g = random_outerplanar(n, 0.7, 5, &mut r);
            assert!(is_outerplanar(&g) && g.is_reduced() && g.is_connected());
            let b = random_outerplanar_blocks(n, 5, &mut r);
            assert!(is_outerplanar(&b) && b.is_reduced() && b.is_connected());
        }
    }

    #[test]
    fn planar_generator_keeps_face() {
        let mut r = rng(3);
        for _ in 0..20 {
            let (g, face) = random_planar_with_face(6, 4, 0.3, 4, &mut r);
            assert!(is_planar(&g) && g.is_connected() && g.is_reduced());
            assert!(face_is_valid(&g, &face));
        }
        let (g, face) = grid(3, 4);
        assert_eq!(face.len(), 10);
        assert!(face_is_valid(&g, &face));
        let (w, rim) = wheel(5);
        assert!(face_is_valid(&w, &rim));
    }

    #[test]
    fn trees_are_trees() {
        let mut r = rng(1);
        let t = random_tree(9, 3, &mut r);
        assert_eq!(t.m(), 8);
        assert!(t.is_connected());
    }
}
