//! Acceptance checks, one line per criterion. Exits nonzero if any criterion fails.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use common::{
    brute_nu, concave_caps, cycle_with_chords, dissections, floyd, lipschitz, lovasz_total,
    random_demands, star_shaped, thinness_of, vertex_credit, vertex_phi,
};
use flowcut::config::c_pipeline;
use flowcut::experiment::{
    distortion_experiment, gap_experiment, lift_zero_lengths, search_gap_instance,
    vertex_capacities,
};
use flowcut::generate;
use flowcut::graph::{
    all_pairs_distances, check_slack, flatten, reduce_lengths, slack_transform, Cycle, MetricGraph,
};
use flowcut::instance::PlanarInstance;
use flowcut::io::{q_from_json, read_instance, read_json};
use flowcut::lp::Arithmetic;
use flowcut::partition::sample_with;
use flowcut::polyflow::{
    brute_sparsest_vertex_cut, mcf_dual_polymatroid, mcf_dual_vertex, mcf_polymatroid_lp,
    mcf_vertex_lp, separated_demand, AdaptedLengths, Demands, PolymatroidCaps,
};
use flowcut::rational::{pow2, q, qr, to_f64, Q};
use flowcut::retraction::retract_face_with;
use flowcut::rng::{rng, sub_seed, Rng};
use flowcut::thinround::{
    dyadic_lengths, round_thin, thin_coin_count, thin_map, thin_map_with_coins,
    tree_adapted_lengths, THIN_DELTA,
};
use flowcut::treeembed::{embed_outerplanar, K_EMB};
use num::{Signed, Zero};
use rand::Rng as _;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus() -> Vec<(String, PlanarInstance)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| {
            p.extension().is_some_and(|x| x == "json") && !p.ends_with("expected_bounds.json")
        })
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            (
                p.file_stem().unwrap().to_string_lossy().into_owned(),
                read_instance(&p).expect("corpus instance"),
            )
        })
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    ensure(start.elapsed() <= limit, || {
        format!("{what} took {:.1?}, limit {limit:?}", start.elapsed())
    })
}

fn random_vertex_instance(r: &mut Rng, n: usize) -> (MetricGraph, Vec<Q>, Demands) {
    let face_n = r.gen_range(3..=n);
    let (g, face) = generate::random_planar_with_face(face_n, n - face_n, 0.4, 5, r);
    let cap: Vec<Q> = (0..n).map(|_| q(r.gen_range(1..=5))).collect();
    let k = r.gen_range(1..=4);
    let dem = random_demands(n, &face, k, r);
    (g, cap, dem)
}

fn duality() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let mut worst = 0.0f64;
    let count = 60;
    for i in 0..count {
        let n = 4 + i % 9;
        let (g, cap, dem) = random_vertex_instance(&mut r, n);
        let dual = mcf_dual_vertex(&g, &cap, &dem, Arithmetic::Exact).map_err(|e| e.to_string())?;
        let d = floyd(&g.with_lengths(dual.len.clone()).unwrap());
        let spread: Q = dem
            .iter()
            .map(|(u, v, x)| d[u][v].clone().unwrap() * x)
            .sum();
        let objective: Q = dual
            .z
            .iter()
            .zip(&cap)
            .map(|(z, c)| z * c * q(2))
            .sum::<Q>()
            / spread;
        let float = mcf_vertex_lp(&g, &cap, &dem, Arithmetic::Float).map_err(|e| e.to_string())?;
        let eps = to_f64(&dual.epsilon);
        let rel = |x: f64| (x - eps).abs() / eps.abs().max(1e-300);
        worst = worst
            .max(rel(to_f64(&objective)))
            .max(rel(to_f64(&float.epsilon)));
        ensure(worst <= 1e-9, || {
            format!("instance {i}: relative gap {worst:e}")
        })?;
    }
    within(start, Duration::from_secs(60), "duality")?;
    Ok(format!(
        "{count} instances n<=12, worst relative primal/dual gap {worst:e} (tol 1e-9), {:.1?}",
        start.elapsed()
    ))
}

fn tree_equality() -> Outcome {
    let start = Instant::now();
    let mut r = rng(202);
    let count = 120;
    let mut worst = 0.0f64;
    for i in 0..count {
        let n = 2 + i % 9;
        let g = generate::random_tree(n, 4, &mut r);
        let cap: Vec<Q> = (0..n).map(|_| q(r.gen_range(1..=5))).collect();
        let all: Vec<usize> = (0..n).collect();
        let dem = random_demands(n, &all, r.gen_range(1..=4), &mut r);
        let mcf = mcf_vertex_lp(&g, &cap, &dem, Arithmetic::Exact)
            .map_err(|e| e.to_string())?
            .epsilon;
        let phi = vertex_phi(&g, &cap, &dem);
        worst = worst.max((to_f64(&mcf) - to_f64(&phi)).abs());
        ensure(worst <= 1e-9, || {
            format!("tree {i}: mcf {mcf} vs phi {phi}")
        })?;
    }
    within(start, Duration::from_secs(60), "tree equality")?;
    Ok(format!(
        "{count} trees n<=10, worst |mcf-phi| {worst:e} (tol 1e-9), {:.1?}",
        start.elapsed()
    ))
}

/// Every vertex set (vertex capacities) or every edge set (general capacities) against the LP value.
fn weak_duality() -> Outcome {
    let start = Instant::now();
    let mut cuts = 0u64;
    let insts = corpus();
    for (name, inst) in &insts {
        let g = &inst.graph;
        let dem = &inst.demands;
        let eps = mcf_polymatroid_lp(g, &inst.caps, dem, Arithmetic::Exact)
            .map_err(|e| e.to_string())?
            .epsilon;
        if let Some(cap) = vertex_capacities(&inst.caps) {
            let n = g.n();
            let mut inside = vec![false; n];
            for s in 1u32..1 << n {
                for (v, x) in inside.iter_mut().enumerate() {
                    *x = s >> v & 1 == 1;
                }
                let credit = vertex_credit(g, &inside, dem);
                if credit.is_zero() {
                    continue;
                }
                let c: Q = (0..n).filter(|&v| inside[v]).map(|v| cap[v].clone()).sum();
                cuts += 1;
                ensure(&eps * &credit <= c, || {
                    format!("{name}: vertex set {s:#b} beats the flow")
                })?;
            }
        } else {
            for s in 1u32..1 << g.m() {
                let edges: Vec<usize> = (0..g.m()).filter(|&e| s >> e & 1 == 1).collect();
                let sep = separated_demand(g, &edges, dem);
                if sep.is_zero() {
                    continue;
                }
                cuts += 1;
                ensure(&eps * &sep <= brute_nu(g, &inst.caps, &edges), || {
                    format!("{name}: edge set {s:#b} beats the flow")
                })?;
            }
        }
    }
    Ok(format!(
        "{} corpus instances, {cuts} cuts, 0 violations (exact), {:.1?}",
        insts.len(),
        start.elapsed()
    ))
}

fn gap_witness() -> Outcome {
    let start = Instant::now();
    let target = qr(7, 5);
    let w = search_gap_instance(14, 200_000, &target, 1).map_err(|e| e.to_string())?;
    let g = &w.instance.graph;
    let exact_mcf = mcf_vertex_lp(g, &w.cap, &w.instance.demands, Arithmetic::Exact)
        .map_err(|e| e.to_string())?
        .epsilon;
    let phi = vertex_phi(g, &w.cap, &w.instance.demands);
    let ratio = &phi / &exact_mcf;
    ensure(to_f64(&ratio) >= 1.4 - 1e-6, || {
        format!("ratio {ratio} below 7/5")
    })?;
    ensure(w.instance.face.len() == g.n(), || {
        "demands not on the outer face".into()
    })?;
    within(start, Duration::from_secs(600), "gap search")?;
    Ok(format!(
        "n={} after {} tries: mcf {} phi {} ratio {} (>= 7/5 - 1e-6), {:.1?}",
        g.n(),
        w.tried,
        exact_mcf,
        phi,
        ratio,
        start.elapsed()
    ))
}

/// Structural checks on one sample of every randomized stage, cycling through the corpus.
fn structural() -> Outcome {
    let start = Instant::now();
    let insts = corpus();
    let samples = 10_000usize;
    let alpha = q(160);
    let prepared: Vec<_> = insts
        .iter()
        .map(|(name, inst)| {
            let d = all_pairs_distances(&inst.graph);
            let fd = floyd(&inst.graph);
            (name, inst, d, fd)
        })
        .collect();
    for i in 0..samples {
        let (name, inst, d, fd) = &prepared[i % prepared.len()];
        let g = &inst.graph;
        let mut r = rng(sub_seed(5, i as u64));
        let fail = |what: &str| format!("{name} sample {i}: {what}");
        // retraction
        let fr = retract_face_with(g, d, &inst.face, &mut r).map_err(|e| fail(&e.to_string()))?;
        let ret = &fr.retraction;
        fr.check(g, d).map_err(|e| fail(&e.to_string()))?;
        for (k, &s) in inst.face.iter().enumerate() {
            ensure(ret.map[s] == s && fr.map[s] == k, || {
                fail("target vertex moved")
            })?;
            let fiber: Vec<usize> = (0..g.n()).filter(|&x| ret.map[x] == s).collect();
            let sub = g.edge_subgraph(|e| ret.map[g.edge(e).u] == s && ret.map[g.edge(e).v] == s);
            let comp = sub.components();
            ensure(fiber.iter().all(|&x| comp[x] == comp[s]), || {
                fail("fiber disconnected")
            })?;
        }
        for x in 0..g.n() {
            let dx = fd[x][ret.map[x]].clone().unwrap();
            ensure(dx * &ret.scale < pow2(ret.level[x] + 1), || {
                fail("level bound")
            })?;
        }
        // slack
        let h = reduce_lengths(&fr.h);
        let (hs, build) = slack_transform(&h, &alpha).map_err(|e| fail(&e.to_string()))?;
        check_slack(&h, &alpha, &hs, &build).map_err(|e| fail(&e.to_string()))?;
        // embedding and thinning
        let tm = embed_outerplanar(&h, r.gen()).map_err(|e| fail(&e.to_string()))?;
        ensure(lipschitz(&h, &tm) && star_shaped(&h, &tm), || {
            fail("embedding not Lipschitz and star-shaped")
        })?;
        let composed = tm.compose(&fr.map);
        ensure(star_shaped(g, &composed), || {
            fail("composition not star-shaped")
        })?;
        let t = thin_map(&h, &tm, &mut r).map_err(|e| fail(&e.to_string()))?;
        ensure(lipschitz(&h, &t.map), || fail("thinned map not Lipschitz"))?;
        ensure(
            (0..h.n()).all(|u| thinness_of(&h, &t.map, u) <= THIN_DELTA),
            || fail("thinned map not 4-thin"),
        )?;
        // partition
        let tau = d.diameter() / pow2(r.gen_range(0..5));
        let p = sample_with(g, d, &tau, &mut r).map_err(|e| fail(&e.to_string()))?;
        let mut seen = vec![0; g.n()];
        for b in &p.blocks {
            for &x in b {
                seen[x] += 1;
                ensure(
                    b.iter().all(|&y| fd[x][y].as_ref().unwrap() <= &tau),
                    || fail("block wider than tau"),
                )?;
            }
        }
        ensure(seen.iter().all(|&c| c == 1), || {
            fail("partition does not cover")
        })?;
    }
    Ok(format!(
        "{samples} samples over {} corpus instances, 0 violations, {:.1?}",
        insts.len(),
        start.elapsed()
    ))
}

fn contraction() -> Outcome {
    let start = Instant::now();
    let samples = 10_000;
    let mut r = rng(606);
    let mut graphs = vec![("C6".to_string(), generate::cycle(6))];
    for i in 0..10 {
        let n = r.gen_range(5..=10);
        let g = generate::random_outerplanar(n, 0.5, 6, &mut r);
        graphs.push((format!("outerplanar{i}(n={n})"), g));
    }
    let mut worst_lower = f64::INFINITY;
    let mut worst_mean = f64::INFINITY;
    for (k, (name, g)) in graphs.iter().enumerate() {
        let rep =
            distortion_experiment(g, samples, k as u64).map_err(|e| format!("{name}: {e}"))?;
        worst_lower = worst_lower.min(rep.min_lower_ratio);
        worst_mean = worst_mean.min(rep.min_mean_ratio);
    }
    let bound = 1.0 / K_EMB as f64;
    ensure(worst_lower >= bound, || {
        format!("99% lower bound {worst_lower} below 1/{K_EMB}")
    })?;
    within(start, Duration::from_secs(300), "contraction")?;
    Ok(format!(
        "11 graphs x {samples} samples: min mean ratio {worst_mean:.4}, min 99% lower bound {worst_lower:.4} (>= 1/{K_EMB}), {:.1?}",
        start.elapsed()
    ))
}

fn spider(arms: &[Vec<i64>]) -> MetricGraph {
    let mut edges = Vec::new();
    let mut next = 1;
    for arm in arms {
        let mut prev = 0;
        for &l in arm {
            edges.push((prev, next, l));
            prev = next;
            next += 1;
        }
    }
    MetricGraph::from_int(next, &edges)
}

fn thinning_expectation() -> Outcome {
    let start = Instant::now();
    let mut r = rng(707);
    let mut spiders = 0;
    let mut worst = f64::INFINITY;
    for k in 1..=5usize {
        for trial in 0..8u64 {
            let arms: Vec<Vec<i64>> = (0..k)
                .map(|_| {
                    (0..r.gen_range(1..=3))
                        .map(|_| r.gen_range(1..=4))
                        .collect()
                })
                .collect();
            let g = spider(&arms);
            let n = g.n();
            let tm = embed_outerplanar(&g, trial).map_err(|e| e.to_string())?;
            let coins = thin_coin_count(&g, &tm).map_err(|e| e.to_string())?;
            let mut total = vec![Q::zero(); n * n];
            for outcome in 0u64..1 << coins {
                let mut i = 0;
                let t = thin_map_with_coins(&g, &tm, &mut || {
                    i += 1;
                    outcome >> (i - 1) & 1 == 1
                })
                .map_err(|e| e.to_string())?;
                let rooted = t.map.rooted();
                for u in 0..n {
                    for v in 0..n {
                        total[u * n + v] += t.map.dist(&rooted, u, v);
                    }
                }
            }
            let outcomes = Q::from_integer((1u64 << coins).into());
            let r0 = tm.rooted();
            for u in 0..n {
                for v in u + 1..n {
                    let d = tm.dist(&r0, u, v);
                    let mean = &total[u * n + v] / &outcomes;
                    ensure(&mean * q(2) >= d, || {
                        format!(
                            "arms {arms:?}: pair ({u},{v}) mean {mean} < d/2 = {}",
                            &d / q(2)
                        )
                    })?;
                    if d.is_positive() {
                        worst = worst.min(to_f64(&(mean / d)));
                    }
                }
            }
            spiders += 1;
        }
    }
    Ok(format!("{spiders} spiders with <=5 arms, exact enumeration, min E d'/d = {worst:.4} (>= 1/2), {:.1?}", start.elapsed()))
}

fn random_adapted(g: &MetricGraph, r: &mut Rng) -> AdaptedLengths {
    let ends = (0..g.m())
        .map(|_| (qr(r.gen_range(0..=32), 8), qr(r.gen_range(1..=32), 8)))
        .collect();
    AdaptedLengths { ends }
}

fn round_check(
    g: &MetricGraph,
    caps: &PolymatroidCaps,
    dem: &Demands,
    ell: &AdaptedLengths,
    seed: u64,
) -> Result<bool, String> {
    let h = reduce_lengths(&g.with_lengths(ell.lengths()).unwrap());
    let tm = embed_outerplanar(&h, seed).map_err(|e| e.to_string())?;
    let adapted = tree_adapted_lengths(
        &h,
        &tm,
        &dyadic_lengths(&h, ell).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let t = thin_map(&h, &tm, &mut rng(seed ^ 1)).map_err(|e| e.to_string())?;
    let spread: Q = dem
        .iter()
        .map(|(u, v, x)| t.map.tree.dist(t.map.map[u], t.map.map[v]).unwrap() * x)
        .sum();
    if spread.is_zero() {
        return Ok(false);
    }
    let out = round_thin(&h, &t.map, &adapted, caps, dem, THIN_DELTA).map_err(|e| e.to_string())?;
    let bound = q(THIN_DELTA as i64) * lovasz_total(&h, caps, &adapted) / spread;
    let c = &out.certificate;
    c.verify(&h, caps, dem).map_err(|e| e.to_string())?;
    ensure(c.nu_exact && c.nu == brute_nu(&h, caps, &c.edges), || {
        "nu is not the exact minimum".into()
    })?;
    ensure(c.sparsity <= bound, || {
        format!("sparsity {} above bound {bound}", c.sparsity)
    })?;
    Ok(true)
}

fn rounding_guarantee() -> Outcome {
    let start = Instant::now();
    let mut r = rng(808);
    let mut runs = 0;
    let mut instances: Vec<MetricGraph> = Vec::new();
    for n in 3..=7 {
        for chords in dissections(n) {
            instances.push(cycle_with_chords(n, &chords, &mut r, 4));
        }
    }
    for _ in 0..200 {
        let n = r.gen_range(7..=8);
        instances.push(generate::random_outerplanar(n, 0.6, 4, &mut r));
    }
    for (i, g) in instances.iter().enumerate() {
        let n = g.n();
        let caps = if i % 3 == 2 {
            concave_caps(g, &mut r)
        } else {
            PolymatroidCaps::vertex(&(0..n).map(|_| q(r.gen_range(1..=5))).collect::<Vec<_>>())
        };
        let all: Vec<usize> = (0..n).collect();
        let dem = random_demands(n, &all, r.gen_range(1..=3), &mut r);
        let ell = if i % 2 == 0 {
            lift_zero_lengths(
                &mcf_dual_polymatroid(g, &caps, &dem, Arithmetic::Exact)
                    .map_err(|e| e.to_string())?
                    .1,
            )
        } else {
            random_adapted(g, &mut r)
        };
        if round_check(g, &caps, &dem, &ell, r.gen()).map_err(|e| format!("instance {i}: {e}"))? {
            runs += 1;
        }
    }
    Ok(format!(
        "{runs} rounding runs on outerplanar instances n<=8, exact nu, 0 bound violations, {:.1?}",
        start.elapsed()
    ))
}

fn flat_inequality() -> Outcome {
    let start = Instant::now();
    let mut r = rng(909);
    let trials = 100_000;
    for i in 0..trials {
        let den = 1 << r.gen_range(3..10);
        let len = qr(r.gen_range(4..=4 * den), den);
        let alpha = qr(r.gen_range(0..=1000), 4000);
        let p = qr(r.gen_range(0..=den * 64), den * 64) * &len;
        let qq = &p + &alpha * &len;
        let x = qr(r.gen_range(0..den * 64), den * 64) * &len;
        let y = qr(r.gen_range(0..den * 64), den * 64) * &len;
        let c = Cycle::new(len.clone(), [(0, x), (1, y)].into_iter().collect())
            .map_err(|e| e.to_string())?;
        let lhs = flatten(&c, &p).dist(0, 1) + flatten(&c, &qq).dist(0, 1);
        let rhs = q(4) * &alpha * c.dist(0, 1);
        ensure(c.dist_pos(&p, &qq) == &alpha * &len, || {
            format!("trial {i}: anchors not at alpha*len")
        })?;
        ensure(lhs >= rhs, || format!("trial {i}: {lhs} < {rhs}"))?;
    }
    Ok(format!(
        "{trials} random (C,p,q,x,y), alpha<=1/4, 0 violations, {:.1?}",
        start.elapsed()
    ))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let bounds =
        read_json(&corpus_dir().join("expected_bounds.json")).map_err(|e| e.to_string())?;
    let samples = bounds["samples"].as_u64().unwrap() as usize;
    let seed = bounds["seed"].as_u64().unwrap();
    let recorded_c = q_from_json(&bounds["c_pipeline"]).map_err(|e| e.to_string())?;
    ensure(c_pipeline() <= recorded_c, || {
        format!("C_pipeline {} regressed above {recorded_c}", c_pipeline())
    })?;
    let mut worst = Q::zero();
    let insts = corpus();
    for (name, inst) in &insts {
        let rec = &bounds["instances"][name];
        ensure(!rec.is_null(), || format!("{name}: no recorded bound"))?;
        let rep = gap_experiment(inst, samples, seed).map_err(|e| format!("{name}: {e}"))?;
        let (mcf, ratio) = (
            q_from_json(&rec["mcf"]).unwrap(),
            q_from_json(&rec["ratio"]).unwrap(),
        );
        ensure(rep.mcf == mcf, || {
            format!("{name}: mcf {} differs from recorded {mcf}", rep.mcf)
        })?;
        ensure(rep.ratio <= ratio, || {
            format!("{name}: ratio {} regressed above {ratio}", rep.ratio)
        })?;
        ensure(rep.ratio <= c_pipeline(), || {
            format!("{name}: ratio {} above C_pipeline", rep.ratio)
        })?;
        if let Some(cap) = vertex_capacities(&inst.caps) {
            if inst.graph.n() <= 16 {
                let (_, phi) = brute_sparsest_vertex_cut(&inst.graph, &cap, &inst.demands).unwrap();
                ensure(rep.best_sparsity >= phi, || {
                    format!("{name}: rounded cut below the sparsest cut")
                })?;
            }
        }
        if rep.ratio > worst {
            worst = rep.ratio.clone();
        }
    }
    Ok(format!(
        "{} corpus instances, worst ratio {worst} <= C_pipeline {} (recorded), {:.1?}",
        insts.len(),
        c_pipeline(),
        start.elapsed()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("duality", duality),
        ("tree equality", tree_equality),
        ("weak duality", weak_duality),
        ("gap witness", gap_witness),
        ("structural invariants", structural),
        ("contraction", contraction),
        ("thinning expectation", thinning_expectation),
        ("rounding guarantee", rounding_guarantee),
        ("flat inequality", flat_inequality),
        ("end-to-end ratio", end_to_end),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {id:>2} {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
