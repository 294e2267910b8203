//! JSON forms of instances, tree maps and reports.
//!
//! Rationals are written as `"a/b"` strings (or `"a"` when integral); integers are accepted on input.

use num::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::experiment::ExperimentReport;
use crate::graph::MetricGraph;
use crate::instance::PlanarInstance;
use crate::polyflow::{Demands, PolymatroidCaps, VertexCapacity};
use crate::rational::{self, q, Q};
use crate::treeembed::TreeMap;

pub const REPORT_SCHEMA: &str = "flowcut.report/1";

fn bad(what: impl Into<String>) -> Error {
    Error::InvalidInput(what.into())
}

pub fn q_to_json(x: &Q) -> Value {
    Value::String(rational::fmt(x))
}

pub fn q_from_json(v: &Value) -> Result<Q> {
    match v {
        Value::String(s) => rational::parse(s),
        Value::Number(n) => n
            .as_i64()
            .map(q)
            .ok_or_else(|| bad(format!("not an integer: {n}"))),
        other => Err(bad(format!("expected a rational, got {other}"))),
    }
}

fn usize_from(v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| bad(format!("expected a vertex id, got {v}")))
}

fn usize_list(v: &Value) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| bad("expected a list of ids"))?
        .iter()
        .map(usize_from)
        .collect()
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} must be a list")))
}

pub fn graph_from_json(v: &Value) -> Result<MetricGraph> {
    let n = usize_from(v.get("n").ok_or_else(|| bad("missing \"n\""))?)?;
    let mut edges = Vec::new();
    for e in array(
        v.get("edges").ok_or_else(|| bad("missing \"edges\""))?,
        "edges",
    )? {
        let e = array(e, "edge")?;
        let len = match e.len() {
            3 => q_from_json(&e[2])?,
            4 => {
                let (a, b) = (q_from_json(&e[2])?, q_from_json(&e[3])?);
                if num::Zero::is_zero(&b) {
                    return Err(Error::ZeroDenominator);
                }
                a / b
            }
            _ => return Err(bad("edges are [u, v, num, den] or [u, v, \"a/b\"]")),
        };
        edges.push((usize_from(&e[0])?, usize_from(&e[1])?, len));
    }
    MetricGraph::new(n, edges)
}

fn int_json(x: &num::BigInt) -> Value {
    x.to_i64()
        .map_or_else(|| Value::String(x.to_string()), Value::from)
}

/// Edges as `[u, v, num, den]`.
pub fn graph_to_json(g: &MetricGraph) -> Value {
    json!({
        "n": g.n(),
        "edges": g.edges().iter().map(|e| json!([e.u, e.v, int_json(e.len.numer()), int_json(e.len.denom())])).collect::<Vec<_>>(),
    })
}

fn caps_from_json(v: Option<&Value>, n: usize) -> Result<PolymatroidCaps> {
    let Some(v) = v else {
        return Ok(PolymatroidCaps::vertex(&vec![q(2); n]));
    };
    if let Some(vc) = v.get("vertex") {
        let c: Vec<Q> = array(vc, "vertex capacities")?
            .iter()
            .map(q_from_json)
            .collect::<Result<_>>()?;
        return Ok(PolymatroidCaps::vertex(
            &c.iter().map(|x| x * q(2)).collect::<Vec<_>>(),
        ));
    }
    if let Some(pc) = v.get("polymatroid") {
        let per_vertex = array(pc, "polymatroid capacities")?
            .iter()
            .map(|x| match x {
                Value::Array(t) => Ok(VertexCapacity::Table(
                    t.iter().map(q_from_json).collect::<Result<_>>()?,
                )),
                other => Ok(VertexCapacity::Uniform(q_from_json(other)?)),
            })
            .collect::<Result<_>>()?;
        return Ok(PolymatroidCaps { per_vertex });
    }
    Err(bad("caps must have a \"vertex\" or \"polymatroid\" field"))
}

fn caps_to_json(caps: &PolymatroidCaps) -> Value {
    match caps.vertex_caps() {
        Some(c) => {
            json!({ "vertex": c.iter().map(|x| q_to_json(&(x / q(2)))).collect::<Vec<_>>() })
        }
        None => json!({
            "polymatroid": caps.per_vertex.iter().map(|c| match c {
                VertexCapacity::Uniform(x) => q_to_json(x),
                VertexCapacity::Table(t) => Value::Array(t.iter().map(q_to_json).collect()),
            }).collect::<Vec<_>>()
        }),
    }
}

pub fn demands_from_json(v: Option<&Value>, n: usize) -> Result<Demands> {
    let mut pairs = Vec::new();
    if let Some(v) = v {
        for d in array(v, "demands")? {
            let d = array(d, "demand")?;
            if d.len() != 3 {
                return Err(bad("demands are [u, v, amount]"));
            }
            pairs.push((usize_from(&d[0])?, usize_from(&d[1])?, q_from_json(&d[2])?));
        }
    }
    Demands::new(n, pairs)
}

fn demands_to_json(d: &Demands) -> Value {
    Value::Array(
        d.iter()
            .map(|(u, v, x)| json!([u, v, q_to_json(x)]))
            .collect(),
    )
}

/// Reads an instance; capacities default to 1 per vertex, demands to none, the face to empty.
/// Vertex capacities `c` are stored as uniform polymatroid capacities `2c`.
pub fn instance_from_json(v: &Value) -> Result<PlanarInstance> {
    let graph = graph_from_json(v)?;
    let n = graph.n();
    let face = match v.get("face") {
        Some(f) => usize_list(f)?,
        None => Vec::new(),
    };
    let rotation = match v.get("rotation") {
        Some(Value::Null) | None => None,
        Some(r) => Some(
            array(r, "rotation")?
                .iter()
                .map(usize_list)
                .collect::<Result<_>>()?,
        ),
    };
    let caps = caps_from_json(v.get("caps"), n)?;
    let demands = demands_from_json(v.get("demands"), n)?;
    Ok(PlanarInstance {
        graph,
        face,
        rotation,
        caps,
        demands,
    })
}

pub fn instance_to_json(inst: &PlanarInstance) -> Value {
    let mut m = match graph_to_json(&inst.graph) {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    m.insert("face".into(), json!(inst.face));
    if let Some(r) = &inst.rotation {
        m.insert("rotation".into(), json!(r));
    }
    m.insert("caps".into(), caps_to_json(&inst.caps));
    m.insert("demands".into(), demands_to_json(&inst.demands));
    Value::Object(m)
}

pub fn read_json(path: &std::path::Path) -> Result<Value> {
    let text =
        std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

pub fn read_instance(path: &std::path::Path) -> Result<PlanarInstance> {
    instance_from_json(&read_json(path)?)
}

pub fn tree_map_to_json(tm: &TreeMap) -> Value {
    json!({
        "nodes": tm.tree.node_count(),
        "edges": tm.tree.edges().iter().map(|(a, b, l)| json!([a, b, q_to_json(l)])).collect::<Vec<_>>(),
        "map": tm.map,
        "root": tm.root,
    })
}

pub fn report_to_json(r: &ExperimentReport) -> Value {
    let mut tallies = Map::new();
    for (k, v) in &r.tallies {
        tallies.insert(k.clone(), json!(v));
    }
    json!({
        "schema": REPORT_SCHEMA,
        "id": r.id,
        "n": r.n,
        "m": r.m,
        "seed": r.seed,
        "samples": r.samples,
        "mcf": q_to_json(&r.mcf),
        "phi_brute": r.phi_brute.as_ref().map(q_to_json),
        "cut_kind": r.cut_kind,
        "cut_edges": r.cut_edges,
        "edge_sparsity": q_to_json(&r.edge_sparsity),
        "separator": r.separator,
        "best_sparsity": q_to_json(&r.best_sparsity),
        "ratio": q_to_json(&r.ratio),
        "ratio_f64": rational::to_f64(&r.ratio),
        "tallies": tallies,
        "runtime_ms": r.runtime_ms as u64,
    })
}
