//! End-to-end pipeline runs and Monte Carlo experiments.

use std::collections::BTreeMap;
use std::time::Instant;

use num::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::generate;
use crate::graph::{all_pairs_distances, reduce_lengths, MetricGraph};
use crate::instance::PlanarInstance;
use crate::lp::Arithmetic;
use crate::polyflow::{
    brute_sparsest_edge_cut, brute_sparsest_vertex_cut, mcf_dual_polymatroid, mcf_vertex_lp,
    vertex_cut_sparsity, AdaptedLengths, CutCertificate, Demands, PolymatroidCaps, MAX_BRUTE_EDGES,
    MAX_BRUTE_VERTICES,
};
use crate::rational::{q, qr, to_f64, Q};
use crate::retraction::retract_to_outerplanar;
use crate::rng::{rng, sub_seed};
use crate::thinround::{multiscale_round, EXACT_NU_LIMIT};
use crate::treeembed::{
    embed_outerplanar, embed_outerplanar_with, star_violation, EmbedOptions, TreeMap, K_EMB,
};

/// Outcome of one pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub id: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub samples: usize,
    /// optimal concurrent flow
    pub mcf: Q,
    /// exact sparsest cut, when small enough to enumerate
    pub phi_brute: Option<Q>,
    /// `"vertex"` when capacities are uniform per vertex, else `"edge"`
    pub cut_kind: String,
    /// best rounded edge cut
    pub cut_edges: Vec<usize>,
    pub edge_sparsity: Q,
    /// best vertex separator read off the rounded cuts (vertex capacities only)
    pub separator: Option<Vec<usize>>,
    /// sparsity used for the ratio
    pub best_sparsity: Q,
    pub ratio: Q,
    /// passed checks per stage
    pub tallies: BTreeMap<String, usize>,
    pub runtime_ms: u128,
}

/// Vertex capacities behind uniform polymatroid capacities `2·cap`.
pub fn vertex_capacities(caps: &PolymatroidCaps) -> Option<Vec<Q>> {
    caps.vertex_caps()
        .map(|v| v.iter().map(|c| c / q(2)).collect())
}

/// Best vertex separator among the sets of endpoints charged by assignments of the cut edges.
pub fn vertex_separator(
    g: &MetricGraph,
    cap: &[Q],
    dem: &Demands,
    cert: &CutCertificate,
) -> Option<(Vec<usize>, Q)> {
    let k = cert.edges.len();
    let assignments: Vec<Vec<usize>> = if k <= EXACT_NU_LIMIT {
        (0u32..1 << k)
            .map(|mask| {
                cert.edges
                    .iter()
                    .enumerate()
                    .map(|(j, &e)| {
                        if mask >> j & 1 == 1 {
                            g.edge(e).v
                        } else {
                            g.edge(e).u
                        }
                    })
                    .collect()
            })
            .collect()
    } else {
        vec![cert.assignment.clone()]
    };
    let mut best: Option<(Vec<usize>, Q)> = None;
    let mut seen = std::collections::BTreeSet::new();
    for mut set in assignments {
        set.sort_unstable();
        set.dedup();
        if !seen.insert(set.clone()) {
            continue;
        }
        if let Ok(s) = vertex_cut_sparsity(g, cap, &set, dem) {
            if best.as_ref().is_none_or(|(_, b)| s < *b) {
                best = Some((set, s));
            }
        }
    }
    best
}

/// Zero dual lengths are lifted to a small positive value so the metric stays a metric on `V`.
pub fn lift_zero_lengths(ell: &AdaptedLengths) -> AdaptedLengths {
    let lens = ell.lengths();
    let floor = lens
        .iter()
        .filter(|l| l.is_positive())
        .min()
        .cloned()
        .unwrap_or_else(|| q(1))
        / q(1000);
    let half = &floor / q(2);
    AdaptedLengths {
        ends: ell
            .ends
            .iter()
            .zip(&lens)
            .map(|(pair, l)| {
                if l.is_zero() {
                    (half.clone(), half.clone())
                } else {
                    pair.clone()
                }
            })
            .collect(),
    }
}

/// Full pipeline: optimal dual lengths, then per sample retract onto the face, embed the
/// outerplanar image into a tree, compose, thin and round; the sparsest cut found is reported.
pub fn gap_experiment(
    inst: &PlanarInstance,
    samples: usize,
    seed: u64,
) -> Result<ExperimentReport> {
    let start = Instant::now();
    inst.validate()?;
    let g = &inst.graph;
    let (sol, ell, _) = mcf_dual_polymatroid(g, &inst.caps, &inst.demands, Arithmetic::Exact)?;
    let mcf = sol.epsilon;
    if !mcf.is_positive() {
        return Err(Error::InvalidInput("demands cannot be routed".into()));
    }
    let ell = lift_zero_lengths(&ell);
    let g2 = reduce_lengths(&g.with_lengths(ell.lengths())?);
    let inst2 = PlanarInstance {
        graph: g2.clone(),
        ..inst.clone()
    };
    let mut tallies: BTreeMap<String, usize> = BTreeMap::new();
    let mut sampler = |s: u64| -> Result<TreeMap> {
        let fr = retract_to_outerplanar(&inst2, s)?;
        *tallies.entry("retraction".into()).or_default() += 1;
        let tm = embed_outerplanar(&fr.h, sub_seed(s, 2))?;
        *tallies.entry("embedding".into()).or_default() += 1;
        let composed = tm.compose(&fr.map);
        if let Some(t) = star_violation(&g2, &composed) {
            return Err(Error::NotStarShaped(t));
        }
        *tallies.entry("composition_star".into()).or_default() += 1;
        Ok(composed)
    };
    let ms = multiscale_round(
        &g2,
        &ell,
        &inst.caps,
        &inst.demands,
        samples,
        seed,
        &mut sampler,
    )?;
    tallies.insert("thin_round".into(), ms.per_sample.len());
    let vcap = vertex_capacities(&inst.caps);
    let mut separator = None;
    let mut best_sparsity = ms.best.sparsity.clone();
    if let Some(cap) = &vcap {
        for cert in &ms.per_sample {
            if let Some((set, s)) = vertex_separator(g, cap, &inst.demands, cert) {
                if s < best_sparsity {
                    best_sparsity = s;
                    separator = Some(set);
                }
            }
        }
    }
    if best_sparsity < mcf {
        return Err(Error::Invariant(
            "rounded cut sparser than the optimal flow".into(),
        ));
    }
    let phi_brute = match &vcap {
        Some(cap) if g.n() <= MAX_BRUTE_VERTICES => {
            Some(brute_sparsest_vertex_cut(g, cap, &inst.demands)?.1)
        }
        None if g.m() <= MAX_BRUTE_EDGES => {
            Some(brute_sparsest_edge_cut(g, &inst.caps, &inst.demands)?.sparsity)
        }
        _ => None,
    };
    if let Some(phi) = &phi_brute {
        if phi < &mcf {
            return Err(Error::Invariant(
                "enumerated cut sparser than the optimal flow".into(),
            ));
        }
    }
    Ok(ExperimentReport {
        id: "instance".into(),
        n: g.n(),
        m: g.m(),
        seed,
        samples: samples.max(1),
        ratio: &best_sparsity / &mcf,
        mcf,
        phi_brute,
        cut_kind: if vcap.is_some() { "vertex" } else { "edge" }.into(),
        cut_edges: ms.best.edges.clone(),
        edge_sparsity: ms.best.sparsity,
        separator,
        best_sparsity,
        tallies,
        runtime_ms: start.elapsed().as_millis(),
    })
}

/// Instance with a large vertex flow-cut gap.
#[derive(Clone, Debug)]
pub struct GapWitness {
    pub instance: PlanarInstance,
    /// vertex capacities
    pub cap: Vec<Q>,
    pub mcf: Q,
    pub phi: Q,
    pub separator: Vec<usize>,
    pub ratio: Q,
    pub tried: usize,
}

/// Random search over small outerplanar instances (every vertex on the outer face) for one whose
/// vertex sparsest cut exceeds the vertex concurrent flow by a factor of at least `target`.
pub fn search_gap_instance(
    max_n: usize,
    budget: usize,
    target: &Q,
    seed: u64,
) -> Result<GapWitness> {
    if !(4..=14).contains(&max_n) {
        return Err(Error::InvalidInput(
            "instance size must be between 4 and 14".into(),
        ));
    }
    let mut r = rng(seed);
    let tol = qr(1, 1_000_000);
    let cap_choices = [1, 1, 2, 2, 3, 50];
    for tried in 1..=budget {
        let n = r.gen_range(5..=max_n);
        let g = generate::random_outerplanar(n, r.gen_range(0.2..0.8), 1, &mut r);
        let cap: Vec<Q> = (0..n)
            .map(|_| q(*cap_choices.choose(&mut r).unwrap()))
            .collect();
        let k = r.gen_range(2..=4);
        let mut pairs = std::collections::BTreeSet::new();
        for _ in 0..k {
            let u = r.gen_range(0..n);
            let v = (u + r.gen_range(2..n - 1)) % n;
            pairs.insert((u.min(v), u.max(v)));
        }
        let dem = Demands::new(n, pairs.into_iter().map(|(u, v)| (u, v, q(1))))?;
        let (set, phi) = brute_sparsest_vertex_cut(&g, &cap, &dem)?;
        let approx = mcf_vertex_lp(&g, &cap, &dem, Arithmetic::Float)?.epsilon;
        if !approx.is_positive() || to_f64(&phi) / to_f64(&approx) < to_f64(target) - 1e-3 {
            continue;
        }
        let mcf = mcf_vertex_lp(&g, &cap, &dem, Arithmetic::Exact)?.epsilon;
        let ratio = &phi / &mcf;
        if ratio >= target - &tol {
            let doubled: Vec<Q> = cap.iter().map(|c| c * q(2)).collect();
            let instance = PlanarInstance {
                graph: g,
                face: (0..n).collect(),
                rotation: None,
                caps: PolymatroidCaps::vertex(&doubled),
                demands: dem,
            };
            return Ok(GapWitness {
                instance,
                cap,
                mcf,
                phi,
                separator: set,
                ratio,
                tried,
            });
        }
    }
    Err(Error::BudgetExhausted(budget))
}

/// Empirical contraction of one vertex pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairStat {
    pub u: usize,
    pub v: usize,
    pub dist: f64,
    /// mean tree distance over the graph distance
    pub mean_ratio: f64,
    /// 99% lower confidence bound of `mean_ratio`
    pub lower_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistortionReport {
    pub samples: usize,
    pub pairs: Vec<PairStat>,
    pub min_mean_ratio: f64,
    pub min_lower_ratio: f64,
}

const Z_99: f64 = 2.576;

/// Monte Carlo estimate of `E d_T(F(u), F(v)) / d(u, v)` for every pair; fails if the worst
/// lower confidence bound drops below `1 / K_EMB`.
pub fn distortion_experiment(
    g: &MetricGraph,
    samples: usize,
    seed: u64,
) -> Result<DistortionReport> {
    let samples = samples.max(2);
    let d = all_pairs_distances(g);
    let n = g.n();
    let pairs: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter_map(|(u, v)| {
            d.get(u, v)
                .filter(|x| x.is_positive())
                .map(|x| (u, v, to_f64(x)))
        })
        .collect();
    let mut sum = vec![0.0f64; pairs.len()];
    let mut sq = vec![0.0f64; pairs.len()];
    let opts = EmbedOptions::default();
    for i in 0..samples {
        let tm = embed_outerplanar_with(g, &opts, &mut rng(sub_seed(seed, i as u64)))?;
        let r = tm.rooted();
        for (k, &(u, v, _)) in pairs.iter().enumerate() {
            let x = to_f64(&tm.dist(&r, u, v));
            sum[k] += x;
            sq[k] += x * x;
        }
    }
    let nf = samples as f64;
    let stats: Vec<PairStat> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(u, v, dist))| {
            let mean = sum[k] / nf;
            let var = ((sq[k] - nf * mean * mean) / (nf - 1.0)).max(0.0);
            let lower = mean - Z_99 * (var / nf).sqrt();
            PairStat {
                u,
                v,
                dist,
                mean_ratio: mean / dist,
                lower_ratio: lower / dist,
            }
        })
        .collect();
    let min_mean_ratio = stats
        .iter()
        .map(|p| p.mean_ratio)
        .fold(f64::INFINITY, f64::min);
    let min_lower_ratio = stats
        .iter()
        .map(|p| p.lower_ratio)
        .fold(f64::INFINITY, f64::min);
    if min_lower_ratio < 1.0 / K_EMB as f64 {
        return Err(Error::Invariant(format!(
            "contraction lower bound {min_lower_ratio} below 1/{K_EMB}"
        )));
    }
    Ok(DistortionReport {
        samples,
        pairs: stats,
        min_mean_ratio,
        min_lower_ratio,
    })
}
