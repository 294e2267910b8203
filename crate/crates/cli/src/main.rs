use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flowcut::config::{
    gap_target, DEFAULT_SAMPLES, MAX_BRUTE_EDGES, MAX_BRUTE_VERTICES, THIN_DELTA,
};
use flowcut::experiment::{
    distortion_experiment, gap_experiment, lift_zero_lengths, search_gap_instance,
    vertex_capacities,
};
use flowcut::graph::{all_pairs_distances, is_outerplanar, reduce_lengths, MetricGraph};
use flowcut::instance::PlanarInstance;
use flowcut::io::{
    graph_from_json, graph_to_json, instance_from_json, instance_to_json, q_to_json, read_json,
    report_to_json, tree_map_to_json,
};
use flowcut::lp::Arithmetic;
use flowcut::partition::sample_with;
use flowcut::polyflow::{
    brute_sparsest_edge_cut, brute_sparsest_vertex_cut, mcf_dual_polymatroid, mcf_polymatroid_lp,
    CutCertificate,
};
use flowcut::rational::{self, Q};
use flowcut::retraction::retract_to_outerplanar;
use flowcut::rng::{rng, sub_seed};
use flowcut::thinround::{multiscale_round, thin_map};
use flowcut::treeembed::{check_embedding, embed_outerplanar, is_thin, thinness};
use flowcut::{Error, Result};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "flowcut",
    version,
    about = "Flow/cut gaps in vertex-capacitated and polymatroid planar networks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Random seed
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo samples
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    /// Write the JSON result here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Solve linear programs in exact rational arithmetic (default)
    #[arg(long, global = true, conflicts_with = "float")]
    exact: bool,
    /// Solve linear programs in floating point
    #[arg(long, global = true)]
    float: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check that an instance is planar, its face is a face and demands sit on the face
    Validate { instance: PathBuf },
    /// Sample a tau-bounded random partition of the graph
    Partition {
        instance: PathBuf,
        /// Block diameter bound, as a rational such as 3/2
        #[arg(long)]
        tau: String,
    },
    /// Retract a planar instance onto its face, giving an outerplanar graph
    Retract { instance: PathBuf },
    /// Embed an outerplanar graph into a random tree
    Embed { instance: PathBuf },
    /// Embed an outerplanar graph and thin the tree map
    Thin { instance: PathBuf },
    /// Round optimal dual lengths on an outerplanar instance through thinned tree maps
    Round { instance: PathBuf },
    /// Optimal concurrent flow
    Flow { instance: PathBuf },
    /// Sparsest cut by enumeration
    Cut { instance: PathBuf },
    /// Optimal dual lengths
    Dual { instance: PathBuf },
    /// Full pipeline: rounded cut against the optimal flow
    Gap { instance: PathBuf },
    /// Search small outerplanar instances for a large vertex flow-cut gap
    SearchGap {
        #[arg(long, default_value_t = 14)]
        max_n: usize,
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        /// Target ratio, as a rational
        #[arg(long)]
        target: Option<String>,
    },
    /// Empirical contraction of random tree embeddings of an outerplanar graph
    Distortion { instance: PathBuf },
}

fn load(path: &Path) -> Result<PlanarInstance> {
    instance_from_json(&read_json(path)?)
}

fn load_graph(path: &Path) -> Result<MetricGraph> {
    graph_from_json(&read_json(path)?)
}

fn load_outerplanar(path: &Path) -> Result<MetricGraph> {
    let g = load_graph(path)?;
    if !is_outerplanar(&g) {
        return Err(Error::NotOuterplanar("retract it onto a face first".into()));
    }
    Ok(reduce_lengths(&g))
}

fn cert_json(c: &CutCertificate) -> Value {
    json!({
        "edges": c.edges,
        "assignment": c.assignment,
        "nu": q_to_json(&c.nu),
        "separated_demand": q_to_json(&c.separated_demand),
        "sparsity": q_to_json(&c.sparsity),
        "nu_exact": c.nu_exact,
    })
}

fn qs(v: &[Q]) -> Value {
    Value::Array(v.iter().map(q_to_json).collect())
}

fn run(cli: &Cli) -> Result<Value> {
    let c = &cli.common;
    let arith = if c.float {
        Arithmetic::Float
    } else {
        Arithmetic::Exact
    };
    match &cli.command {
        Command::Validate { instance } => {
            let inst = load(instance)?;
            inst.validate()?;
            Ok(json!({
                "valid": true,
                "n": inst.graph.n(),
                "m": inst.graph.m(),
                "face": inst.face,
                "outerplanar": is_outerplanar(&inst.graph),
                "vertex_capacities": inst.caps.vertex_caps().is_some(),
                "demands": inst.demands.len(),
            }))
        }
        Command::Partition { instance, tau } => {
            let g = load_graph(instance)?;
            let tau = rational::parse(tau)?;
            let d = all_pairs_distances(&g);
            let p = sample_with(&g, &d, &tau, &mut rng(c.seed))?;
            p.check(&d)?;
            let diam: Vec<Value> = (0..p.blocks.len())
                .map(|i| {
                    p.weak_diameter(&d, i)
                        .map_or(Value::Null, |x| q_to_json(&x))
                })
                .collect();
            Ok(json!({ "tau": q_to_json(&tau), "blocks": p.blocks, "weak_diameters": diam }))
        }
        Command::Retract { instance } => {
            let inst = load(instance)?;
            let fr = retract_to_outerplanar(&inst, c.seed)?;
            Ok(json!({
                "face": fr.face,
                "map": fr.map,
                "levels": fr.retraction.level,
                "outerplanar": graph_to_json(&fr.h),
            }))
        }
        Command::Embed { instance } => {
            let g = load_outerplanar(instance)?;
            let tm = embed_outerplanar(&g, c.seed)?;
            check_embedding(&g, &tm)?;
            Ok(json!({ "tree_map": tree_map_to_json(&tm), "thinness": thinness(&g, &tm) }))
        }
        Command::Thin { instance } => {
            let g = load_outerplanar(instance)?;
            let tm = embed_outerplanar(&g, c.seed)?;
            let t = thin_map(&g, &tm, &mut rng(sub_seed(c.seed, 1)))?;
            if t.map.lipschitz_violation(&g).is_some() || !is_thin(&g, &t.map, THIN_DELTA) {
                return Err(Error::Invariant(format!(
                    "thinned map is not 1-Lipschitz and {THIN_DELTA}-thin"
                )));
            }
            Ok(json!({
                "tree_map": tree_map_to_json(&t.map),
                "coins": t.coins,
                "thinness_before": thinness(&g, &tm),
                "thinness": thinness(&g, &t.map),
            }))
        }
        Command::Round { instance } => {
            let inst = load(instance)?;
            inst.validate()?;
            if !is_outerplanar(&inst.graph) {
                return Err(Error::NotOuterplanar(
                    "use the gap subcommand for planar instances".into(),
                ));
            }
            let (sol, ell, _) =
                mcf_dual_polymatroid(&inst.graph, &inst.caps, &inst.demands, Arithmetic::Exact)?;
            let ell = lift_zero_lengths(&ell);
            let g2 = reduce_lengths(&inst.graph.with_lengths(ell.lengths())?);
            let mut sampler = |s: u64| embed_outerplanar(&g2, s);
            let ms = multiscale_round(
                &g2,
                &ell,
                &inst.caps,
                &inst.demands,
                c.samples,
                c.seed,
                &mut sampler,
            )?;
            if ms.best.sparsity < sol.epsilon {
                return Err(Error::Invariant(
                    "rounded cut sparser than the optimal flow".into(),
                ));
            }
            Ok(json!({
                "mcf": q_to_json(&sol.epsilon),
                "objective": q_to_json(&ms.objective),
                "best": cert_json(&ms.best),
                "ratio": q_to_json(&(&ms.best.sparsity / &sol.epsilon)),
                "per_sample_ratio": ms.ratios,
            }))
        }
        Command::Flow { instance } => {
            let inst = load(instance)?;
            let sol = mcf_polymatroid_lp(&inst.graph, &inst.caps, &inst.demands, arith)?;
            if arith == Arithmetic::Exact {
                sol.verify(&inst.graph, &inst.caps, &inst.demands)?;
            }
            Ok(json!({
                "epsilon": q_to_json(&sol.epsilon),
                "epsilon_f64": rational::to_f64(&sol.epsilon),
                "certified": sol.certified,
                "edge_flow": qs(&sol.edge_flow(inst.graph.m())),
            }))
        }
        Command::Cut { instance } => {
            let inst = load(instance)?;
            let g = &inst.graph;
            match vertex_capacities(&inst.caps) {
                Some(cap) if g.n() <= MAX_BRUTE_VERTICES => {
                    let (set, phi) = brute_sparsest_vertex_cut(g, &cap, &inst.demands)?;
                    let edge = if g.m() <= MAX_BRUTE_EDGES {
                        Some(cert_json(&brute_sparsest_edge_cut(
                            g,
                            &inst.caps,
                            &inst.demands,
                        )?))
                    } else {
                        None
                    };
                    Ok(
                        json!({ "kind": "vertex", "separator": set, "sparsity": q_to_json(&phi), "edge_cut": edge }),
                    )
                }
                _ => {
                    let cert = brute_sparsest_edge_cut(g, &inst.caps, &inst.demands)?;
                    Ok(
                        json!({ "kind": "edge", "cut": cert_json(&cert), "sparsity": q_to_json(&cert.sparsity) }),
                    )
                }
            }
        }
        Command::Dual { instance } => {
            let inst = load(instance)?;
            let (sol, ell, total) =
                mcf_dual_polymatroid(&inst.graph, &inst.caps, &inst.demands, arith)?;
            let ends: Vec<Value> = ell
                .ends
                .iter()
                .map(|(a, b)| json!([q_to_json(a), q_to_json(b)]))
                .collect();
            Ok(json!({
                "epsilon": q_to_json(&sol.epsilon),
                "objective": q_to_json(&total),
                "lengths": qs(&ell.lengths()),
                "ends": ends,
            }))
        }
        Command::Gap { instance } => {
            let inst = load(instance)?;
            let mut rep = gap_experiment(&inst, c.samples, c.seed)?;
            rep.id = instance
                .file_stem()
                .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
            Ok(report_to_json(&rep))
        }
        Command::SearchGap {
            max_n,
            budget,
            target,
        } => {
            let target = match target {
                Some(t) => rational::parse(t)?,
                None => gap_target(),
            };
            let w = search_gap_instance(*max_n, *budget, &target, c.seed)?;
            Ok(json!({
                "mcf": q_to_json(&w.mcf),
                "phi": q_to_json(&w.phi),
                "ratio": q_to_json(&w.ratio),
                "separator": w.separator,
                "tried": w.tried,
                "instance": instance_to_json(&w.instance),
            }))
        }
        Command::Distortion { instance } => {
            let g = load_outerplanar(instance)?;
            let rep = distortion_experiment(&g, c.samples, c.seed)?;
            let pairs: Vec<Value> = rep
                .pairs
                .iter()
                .map(|p| json!({ "u": p.u, "v": p.v, "dist": p.dist, "mean_ratio": p.mean_ratio, "lower_ratio": p.lower_ratio }))
                .collect();
            Ok(json!({
                "samples": rep.samples,
                "min_mean_ratio": rep.min_mean_ratio,
                "min_lower_ratio": rep.min_lower_ratio,
                "pairs": pairs,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let value = match run(&cli) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let text = serde_json::to_string_pretty(&value).expect("json");
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => {
            use std::io::Write;
            // a closed pipe is not an error worth reporting
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    ExitCode::SUCCESS
}
