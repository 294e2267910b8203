use std::collections::BTreeMap;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt, Q};

/// A path given by its vertex sequence and consecutive edge lengths.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricPath {
    pub vertices: Vec<usize>,
    pub lens: Vec<Q>,
}

impl MetricPath {
    pub fn new(vertices: Vec<usize>, lens: Vec<Q>) -> Result<Self> {
        if vertices.is_empty() || lens.len() + 1 != vertices.len() {
            return Err(Error::InvalidInput(
                "path needs one more vertex than edges".into(),
            ));
        }
        if lens.iter().any(|l| l.is_negative()) {
            return Err(Error::InvalidInput("negative path length".into()));
        }
        Ok(MetricPath { vertices, lens })
    }

    pub fn length(&self) -> Q {
        self.lens.iter().sum()
    }

    /// Cumulative distance of each vertex from the first one.
    pub fn positions(&self) -> Vec<Q> {
        let mut out = Vec::with_capacity(self.vertices.len());
        let mut acc = Q::zero();
        out.push(acc.clone());
        for l in &self.lens {
            acc += l;
            out.push(acc.clone());
        }
        out
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut lens = self.lens.clone();
        lens.reverse();
        MetricPath { vertices, lens }
    }

    pub fn first(&self) -> usize {
        self.vertices[0]
    }

    pub fn last(&self) -> usize {
        *self.vertices.last().unwrap()
    }
}

/// A continuous cycle of the given circumference with labelled points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    circumference: Q,
    points: BTreeMap<usize, Q>,
}

impl Cycle {
    pub fn new(circumference: Q, points: BTreeMap<usize, Q>) -> Result<Self> {
        if circumference.is_negative() {
            return Err(Error::InvalidInput("negative circumference".into()));
        }
        for p in points.values() {
            if p.is_negative() || (p >= &circumference && !circumference.is_zero()) {
                return Err(Error::InvalidInput(format!(
                    "position {} outside the cycle",
                    fmt(p)
                )));
            }
        }
        Ok(Cycle {
            circumference,
            points,
        })
    }

    pub fn circumference(&self) -> &Q {
        &self.circumference
    }

    pub fn points(&self) -> &BTreeMap<usize, Q> {
        &self.points
    }

    pub fn position(&self, x: usize) -> Option<&Q> {
        self.points.get(&x)
    }

    /// Wraps an arbitrary rational into `[0, circumference)`.
    pub fn wrap(&self, p: &Q) -> Q {
        if self.circumference.is_zero() {
            return Q::zero();
        }
        let k = (p / &self.circumference).floor();
        p - k * &self.circumference
    }

    pub fn dist_pos(&self, a: &Q, b: &Q) -> Q {
        let d = self.wrap(&(a - b));
        let e = &self.circumference - &d;
        if d <= e || self.circumference.is_zero() {
            d
        } else {
            e
        }
    }

    pub fn dist(&self, x: usize, y: usize) -> Q {
        self.dist_pos(&self.points[&x], &self.points[&y])
    }
}

/// Closes `path` into a cycle with a chord of length `chord_len` between its endpoints.
pub fn make_cycle(path: &MetricPath, chord_len: &Q) -> Result<Cycle> {
    let len = path.length();
    if chord_len.is_negative() {
        return Err(Error::InvalidInput("negative chord".into()));
    }
    if chord_len > &len {
        return Err(Error::ChordTooLong {
            chord: fmt(chord_len),
            limit: fmt(&len),
        });
    }
    let circumference = &len + chord_len;
    let mut points = BTreeMap::new();
    for (v, p) in path.vertices.iter().zip(path.positions()) {
        let p = if p == circumference { Q::zero() } else { p };
        points.insert(*v, p);
    }
    Cycle::new(circumference, points)
}

/// The path `flat(C, p)`: each point sits at its cycle distance from the base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatPath {
    pub base: Q,
    pub length: Q,
    pub positions: BTreeMap<usize, Q>,
}

impl FlatPath {
    pub fn dist(&self, x: usize, y: usize) -> Q {
        (&self.positions[&x] - &self.positions[&y]).abs()
    }
}

pub fn flatten(c: &Cycle, p: &Q) -> FlatPath {
    let base = c.wrap(p);
    let positions = c
        .points()
        .iter()
        .map(|(&x, px)| (x, c.dist_pos(&base, px)))
        .collect();
    FlatPath {
        base,
        length: c.circumference() / Q::from_integer(2.into()),
        positions,
    }
}
