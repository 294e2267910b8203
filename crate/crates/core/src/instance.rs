use crate::error::{Error, Result};
use crate::graph::{face_is_valid, faces_from_rotation, is_planar, MetricGraph};
use crate::polyflow::{Demands, PolymatroidCaps};

/// A planar metric graph with a distinguished face, capacities and demands on the face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarInstance {
    pub graph: MetricGraph,
    pub face: Vec<usize>,
    pub rotation: Option<Vec<Vec<usize>>>,
    pub caps: PolymatroidCaps,
    pub demands: Demands,
}

impl PlanarInstance {
    /// Checks planarity, the face, the capacities and that demands live on the face.
    pub fn validate(&self) -> Result<()> {
        let g = &self.graph;
        if !is_planar(g) {
            return Err(Error::NotPlanar);
        }
        check_face(g, &self.face, self.rotation.as_deref())?;
        self.caps.validate(g)?;
        if self.demands.n() != g.n() {
            return Err(Error::InvalidInput(
                "demand matrix size differs from graph".into(),
            ));
        }
        let on_face: std::collections::HashSet<usize> = self.face.iter().copied().collect();
        if let Some(v) = self
            .demands
            .support()
            .into_iter()
            .find(|v| !on_face.contains(v))
        {
            return Err(Error::FaceInvalid(format!(
                "demand at vertex {v} off the face"
            )));
        }
        Ok(())
    }
}

/// The face must be a simple cycle (or a single vertex/edge) of `g` that bounds a face of some
/// planar embedding, or of the given rotation system.
pub fn check_face(g: &MetricGraph, face: &[usize], rotation: Option<&[Vec<usize>]>) -> Result<()> {
    let mut seen = vec![false; g.n()];
    for &v in face {
        if v >= g.n() || std::mem::replace(&mut seen[v], true) {
            return Err(Error::FaceInvalid(format!(
                "vertex {v} repeated or out of range"
            )));
        }
    }
    if face.len() >= 2 {
        let k = face.len();
        let closing = if k == 2 { 1 } else { k };
        for i in 0..closing {
            let (a, b) = (face[i], face[(i + 1) % k]);
            if !g.has_edge(a, b) {
                return Err(Error::FaceInvalid(format!("missing face edge ({a},{b})")));
            }
        }
    }
    match rotation {
        Some(rot) => {
            let faces = faces_from_rotation(g, rot)?;
            let k = face.len();
            let matches = |f: &Vec<usize>| {
                f.len() == k
                    && (0..k).any(|s| {
                        (0..k).all(|i| f[(s + i) % k] == face[i])
                            || (0..k).all(|i| f[(s + k - i) % k] == face[i])
                    })
            };
            if k >= 3 && !faces.iter().any(matches) {
                return Err(Error::FaceInvalid(
                    "cycle is not a face of the rotation system".into(),
                ));
            }
        }
        None => {
            if face.len() >= 3 && !face_is_valid(g, face) {
                return Err(Error::FaceInvalid(
                    "cycle bounds no face in any planar embedding".into(),
                ));
            }
        }
    }
    Ok(())
}
