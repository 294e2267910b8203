//! Random padded partitions by iterated shortest-path chopping.

use num::{Signed, Zero};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{all_pairs_distances, dijkstra, Distances, MetricGraph};
use crate::rational::{q, qr, to_f64, Q};
use crate::rng::{rng, Rng};

/// Number of chopping rounds.
pub const CHOP_ROUNDS: usize = 3;
/// Offsets are drawn from a grid of this many points per annulus width.
const OFFSET_GRID: i64 = 1000;

/// A partition of the vertex set into blocks of weak diameter at most `tau`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub tau: Q,
    pub blocks: Vec<Vec<usize>>,
    pub block_of: Vec<usize>,
}

impl Partition {
    fn from_blocks(n: usize, tau: Q, mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort();
        let mut block_of = vec![usize::MAX; n];
        for (i, b) in blocks.iter().enumerate() {
            for &x in b {
                block_of[x] = i;
            }
        }
        Partition {
            tau,
            blocks,
            block_of,
        }
    }

    /// Largest distance in `d` between two vertices of block `i` (`None` if it is infinite).
    pub fn weak_diameter(&self, d: &Distances, i: usize) -> Option<Q> {
        let b = &self.blocks[i];
        let mut best = Q::zero();
        for (k, &x) in b.iter().enumerate() {
            for &y in &b[k + 1..] {
                let dxy = d.get(x, y)?;
                if dxy > &best {
                    best = dxy.clone();
                }
            }
        }
        Some(best)
    }

    /// Blocks cover every vertex exactly once and each has weak diameter at most `tau`.
    pub fn check(&self, d: &Distances) -> Result<()> {
        if self.block_of.contains(&usize::MAX) {
            return Err(Error::Invariant("partition misses a vertex".into()));
        }
        for i in 0..self.blocks.len() {
            match self.weak_diameter(d, i) {
                Some(w) if w <= self.tau => {}
                _ => return Err(Error::Invariant(format!("block {i} exceeds the scale"))),
            }
        }
        Ok(())
    }
}

/// Connected components of `g[set]`.
fn induced_components(g: &MetricGraph, set: &[usize], inside: &mut [bool]) -> Vec<Vec<usize>> {
    for &x in set {
        inside[x] = true;
    }
    let mut out = Vec::new();
    for &s in set {
        if !inside[s] {
            continue;
        }
        inside[s] = false;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            let x = comp[i];
            i += 1;
            for y in g.neighbors(x) {
                if inside[y] {
                    inside[y] = false;
                    comp.push(y);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// One chopping round on a connected cluster: annuli of width `w` around its lowest vertex, with a
/// random offset, split into connected pieces.
fn chop(
    g: &MetricGraph,
    cluster: &[usize],
    w: &Q,
    rng: &mut Rng,
    mask: &mut [bool],
) -> Vec<Vec<usize>> {
    let root = *cluster.iter().min().unwrap();
    for &x in cluster {
        mask[x] = true;
    }
    let dist = dijkstra(g, root, Some(mask));
    for &x in cluster {
        mask[x] = false;
    }
    let r0 = w * qr(rng.gen_range(0..OFFSET_GRID), OFFSET_GRID);
    let mut bands: std::collections::BTreeMap<num::BigInt, Vec<usize>> = Default::default();
    for &x in cluster {
        let dx = dist[x].as_ref().expect("cluster is connected");
        let idx = ((dx - &r0) / w).floor().to_integer();
        bands.entry(idx).or_default().push(x);
    }
    bands
        .into_values()
        .flat_map(|b| induced_components(g, &b, mask))
        .collect()
}

/// Splits a set of weak diameter above `tau` into balls of random radius in `[tau/4, tau/2)`.
fn ball_carve(set: &[usize], d: &Distances, tau: &Q, rng: &mut Rng) -> Vec<Vec<usize>> {
    let mut rest: Vec<usize> = set.to_vec();
    rest.sort_unstable();
    let mut out = Vec::new();
    while let Some(&c) = rest.first() {
        let r = tau * (qr(1, 4) + qr(rng.gen_range(0..OFFSET_GRID), 4 * OFFSET_GRID));
        let (ball, others): (Vec<usize>, Vec<usize>) = rest
            .iter()
            .partition(|&&y| d.get(c, y).is_some_and(|dy| dy <= &r));
        out.push(ball);
        rest = others;
    }
    out
}

/// Samples a partition of `g` at scale `tau` with `d` the all-pairs distances of `g`.
pub fn sample_with(g: &MetricGraph, d: &Distances, tau: &Q, rng: &mut Rng) -> Result<Partition> {
    if !tau.is_positive() {
        return Err(Error::NonPositiveScale);
    }
    let all: Vec<usize> = (0..g.n()).collect();
    let mut mask = vec![false; g.n()];
    let mut clusters = induced_components(g, &all, &mut mask);
    let w = tau / q(6);
    for _ in 0..CHOP_ROUNDS {
        clusters = clusters
            .iter()
            .flat_map(|c| chop(g, c, &w, rng, &mut mask))
            .collect();
    }
    let mut blocks = Vec::new();
    for c in clusters {
        let p = Partition::from_blocks(g.n(), tau.clone(), vec![c.clone()]);
        match p.weak_diameter(d, 0) {
            Some(wd) if &wd <= tau => blocks.push(c),
            _ => blocks.extend(ball_carve(&c, d, tau, rng)),
        }
    }
    let p = Partition::from_blocks(g.n(), tau.clone(), blocks);
    p.check(d)?;
    Ok(p)
}

/// Samples a `tau`-bounded random partition of `g`; deterministic in `seed`.
pub fn sample_padded_partition(g: &MetricGraph, tau: &Q, seed: u64) -> Result<Partition> {
    let d = all_pairs_distances(g);
    sample_with(g, &d, tau, &mut rng(seed))
}

/// Empirical padding statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct PaddingReport {
    /// `(x, R, frequency of B(x, R) not inside the block of x)`
    pub entries: Vec<(usize, Q, f64)>,
    /// `max frequency · tau / R` over entries with `R > 0`
    pub alpha_hat: f64,
    pub samples: usize,
}

/// Estimates the padding constant of the sampler at scale `tau` for every vertex and radius.
pub fn estimate_padding(
    g: &MetricGraph,
    tau: &Q,
    radii: &[Q],
    samples: usize,
    seed: u64,
) -> Result<PaddingReport> {
    let samples = samples.max(1);
    let d = all_pairs_distances(g);
    let mut r = rng(seed);
    let n = g.n();
    let mut counts = vec![0usize; n * radii.len()];
    for _ in 0..samples {
        let p = sample_with(g, &d, tau, &mut r)?;
        for x in 0..n {
            // distance from x to the nearest vertex outside its block
            let escape = (0..n)
                .filter(|&y| p.block_of[y] != p.block_of[x])
                .filter_map(|y| d.get(x, y))
                .min();
            if let Some(e) = escape {
                for (k, rad) in radii.iter().enumerate() {
                    if e <= rad {
                        counts[x * radii.len() + k] += 1;
                    }
                }
            }
        }
    }
    let mut entries = Vec::new();
    let mut alpha_hat = 0.0f64;
    for x in 0..n {
        for (k, rad) in radii.iter().enumerate() {
            let freq = counts[x * radii.len() + k] as f64 / samples as f64;
            if rad.is_positive() {
                alpha_hat = alpha_hat.max(freq * to_f64(tau) / to_f64(rad));
            }
            entries.push((x, rad.clone(), freq));
        }
    }
    Ok(PaddingReport {
        entries,
        alpha_hat,
        samples,
    })
}
