//! Linear programs `max c·x` over `x ≥ 0` with `≤`, `=`, `≥` rows.
//!
//! The float path runs a dense two-phase tableau simplex. Its final basis is then certified in
//! exact rational arithmetic (primal feasibility and nonpositive reduced costs); if certification
//! fails an exact revised simplex continues from that basis, and as a last resort the tableau
//! simplex is rerun over rationals.

use std::fmt::Debug;

use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Q)>,
    pub rel: Relation,
    pub rhs: Q,
}

/// Maximize `objective · x` subject to `constraints`, `x ≥ 0`.
#[derive(Clone, Debug, Default)]
pub struct Lp {
    pub vars: usize,
    pub objective: Vec<(usize, Q)>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Arithmetic {
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: Q,
    pub x: Vec<Q>,
    /// One multiplier per constraint: `value = Σ y_i rhs_i` and `c_j ≤ Σ_i y_i a_ij` for all j.
    pub duals: Vec<Q>,
    /// True when optimality was verified in exact arithmetic.
    pub certified: bool,
}

impl Lp {
    pub fn new(vars: usize) -> Self {
        Lp {
            vars,
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Q)>, rel: Relation, rhs: Q) {
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    /// Largest violation of any constraint or sign bound by `x`, exactly.
    pub fn violation(&self, x: &[Q]) -> Q {
        let mut worst = Q::zero();
        for v in x {
            if v.is_negative() && -v > worst {
                worst = -v;
            }
        }
        for c in &self.constraints {
            let lhs: Q = c.coeffs.iter().map(|(j, a)| a * &x[*j]).sum();
            let bad = match c.rel {
                Relation::Le => &lhs - &c.rhs,
                Relation::Ge => &c.rhs - &lhs,
                Relation::Eq => (&lhs - &c.rhs).abs(),
            };
            if bad > worst {
                worst = bad;
            }
        }
        worst
    }

    pub fn objective_value(&self, x: &[Q]) -> Q {
        self.objective.iter().map(|(j, c)| c * &x[*j]).sum()
    }

    /// Checks weak duality for `duals` exactly: sign conditions, dual feasibility and the bound.
    pub fn dual_bound(&self, duals: &[Q]) -> Option<Q> {
        let mut col = vec![Q::zero(); self.vars];
        for (c, y) in self.constraints.iter().zip(duals) {
            let ok = match c.rel {
                Relation::Le => !y.is_negative(),
                Relation::Ge => !y.is_positive(),
                Relation::Eq => true,
            };
            if !ok {
                return None;
            }
            for (j, a) in &c.coeffs {
                col[*j] += a * y;
            }
        }
        for (j, c) in &self.objective {
            col[*j] -= c;
        }
        if col.iter().any(|v| v.is_negative()) {
            return None;
        }
        Some(
            self.constraints
                .iter()
                .zip(duals)
                .map(|(c, y)| &c.rhs * y)
                .sum(),
        )
    }
}

/// Scalar used by the tableau: f64 with tolerances, or exact rationals.
trait Num: Clone + Debug {
    fn nil() -> Self;
    fn unit() -> Self;
    fn from_q(q: &Q) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn pos(&self) -> bool;
    fn nonzero(&self) -> bool;
    fn less(&self, o: &Self) -> bool;
    fn eq_approx(&self, o: &Self) -> bool;
}

const TOL: f64 = 1e-9;

impl Num for f64 {
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn from_q(q: &Q) -> Self {
        rational::to_f64(q)
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn pos(&self) -> bool {
        *self > TOL
    }
    fn nonzero(&self) -> bool {
        self.abs() > TOL
    }
    fn less(&self, o: &Self) -> bool {
        *self < *o - TOL * (1.0 + o.abs())
    }
    fn eq_approx(&self, o: &Self) -> bool {
        (self - o).abs() <= TOL * (1.0 + o.abs())
    }
}

impl Num for Q {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        num::One::one()
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn pos(&self) -> bool {
        self.is_positive()
    }
    fn nonzero(&self) -> bool {
        !self.is_zero()
    }
    fn less(&self, o: &Self) -> bool {
        self < o
    }
    fn eq_approx(&self, o: &Self) -> bool {
        self == o
    }
}

/// Standard form `A x = b`, `b ≥ 0`, with slack, surplus and artificial columns appended.
struct Standard {
    cols: usize,
    /// sparse rows over all columns
    rows: Vec<Vec<(usize, Q)>>,
    rhs: Vec<Q>,
    /// ±1 applied to each original row so that its rhs is nonnegative
    sign: Vec<Q>,
    first_artificial: usize,
    /// initial basic column of each row
    start_basis: Vec<usize>,
    cost: Vec<Q>,
}

impl Standard {
    fn new(lp: &Lp) -> Self {
        let m = lp.constraints.len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut sign = Vec::with_capacity(m);
        let mut rels = Vec::with_capacity(m);
        for c in &lp.constraints {
            let flip = c.rhs.is_negative();
            let s = if flip {
                -Q::from_integer(1.into())
            } else {
                Q::from_integer(1.into())
            };
            let rel = match (c.rel, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            let mut row: Vec<(usize, Q)> = Vec::new();
            for (j, a) in &c.coeffs {
                if !a.is_zero() {
                    row.push((*j, a * &s));
                }
            }
            row.sort_by_key(|e| e.0);
            // merge duplicates
            let mut merged: Vec<(usize, Q)> = Vec::with_capacity(row.len());
            for (j, a) in row {
                match merged.last_mut() {
                    Some((k, b)) if *k == j => *b += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|e| !e.1.is_zero());
            rows.push(merged);
            rhs.push(&c.rhs * &s);
            sign.push(s);
            rels.push(rel);
        }
        let mut next = lp.vars;
        let mut start_basis = vec![usize::MAX; m];
        for i in 0..m {
            match rels[i] {
                Relation::Le => {
                    rows[i].push((next, rational::one()));
                    start_basis[i] = next;
                    next += 1;
                }
                Relation::Ge => {
                    rows[i].push((next, -rational::one()));
                    next += 1;
                }
                Relation::Eq => {}
            }
        }
        let first_artificial = next;
        for i in 0..m {
            if start_basis[i] == usize::MAX {
                rows[i].push((next, rational::one()));
                start_basis[i] = next;
                next += 1;
            }
        }
        let mut cost = vec![Q::zero(); next];
        for (j, c) in &lp.objective {
            cost[*j] += c;
        }
        Standard {
            cols: next,
            rows,
            rhs,
            sign,
            first_artificial,
            start_basis,
            cost,
        }
    }

    fn columns(&self) -> Vec<Vec<(usize, Q)>> {
        let mut cols = vec![Vec::new(); self.cols];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, a) in row {
                cols[*j].push((i, a.clone()));
            }
        }
        cols
    }
}

struct Tableau<T: Num> {
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    /// original row index of each tableau row
    row_of: Vec<usize>,
    cols: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl<T: Num> Tableau<T> {
    fn new(st: &Standard) -> Self {
        let cols = st.cols;
        let t = st
            .rows
            .iter()
            .zip(&st.rhs)
            .map(|(row, b)| {
                let mut r = vec![T::nil(); cols + 1];
                for (j, a) in row {
                    r[*j] = T::from_q(a);
                }
                r[cols] = T::from_q(b);
                r
            })
            .collect();
        Tableau {
            t,
            basis: st.start_basis.clone(),
            row_of: (0..st.rows.len()).collect(),
            cols,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        let nz: Vec<usize> = (0..=self.cols)
            .filter(|&j| self.t[r][j].nonzero())
            .collect();
        for &j in &nz {
            self.t[r][j] = self.t[r][j].div(&p);
        }
        self.t[r][c] = T::unit();
        let prow: Vec<(usize, T)> = nz.iter().map(|&j| (j, self.t[r][j].clone())).collect();
        for i in 0..self.t.len() {
            if i == r || !self.t[i][c].nonzero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for (j, v) in &prow {
                self.t[i][*j] = self.t[i][*j].sub(&f.mul(v));
            }
            self.t[i][c] = T::nil();
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, cost: &[T], allowed: &[bool]) -> Vec<T> {
        let mut d: Vec<T> = cost.to_vec();
        for (i, row) in self.t.iter().enumerate() {
            let cb = &cost[self.basis[i]];
            if !cb.nonzero() {
                continue;
            }
            for j in 0..self.cols {
                if row[j].nonzero() {
                    d[j] = d[j].sub(&cb.mul(&row[j]));
                }
            }
        }
        for j in 0..self.cols {
            if !allowed[j] {
                d[j] = T::nil();
            }
        }
        d
    }

    /// Primal simplex from a feasible basis. Dantzig pricing, Bland's rule after a run of
    /// degenerate pivots.
    fn optimize(&mut self, cost: &[T], allowed: &[bool]) -> Outcome {
        let mut degenerate = 0usize;
        let limit = 50 + 10 * (self.t.len() + self.cols);
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            let bland = degenerate > 20 || iterations > limit;
            let d = self.reduced_costs(cost, allowed);
            let mut enter = None;
            for j in 0..self.cols {
                if !d[j].pos() {
                    continue;
                }
                match enter {
                    None => enter = Some(j),
                    Some(e) if !bland && d[e].less(&d[j]) => enter = Some(j),
                    _ => {}
                }
                if bland {
                    break;
                }
            }
            let Some(c) = enter else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.t.len() {
                if !self.t[i][c].pos() {
                    continue;
                }
                let ratio = self.t[i][self.cols].div(&self.t[i][c]);
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio.less(best)
                            || (ratio.eq_approx(best) && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else {
                return Outcome::Unbounded;
            };
            if ratio.nonzero() {
                degenerate = 0;
            } else {
                degenerate += 1;
            }
            self.pivot(r, c);
        }
    }

    /// Phase one. Afterwards no artificial column is basic and redundant rows are removed.
    fn phase_one(&mut self, st: &Standard) -> Result<()> {
        let cost: Vec<T> = (0..self.cols)
            .map(|j| {
                if j >= st.first_artificial {
                    T::nil().sub(&T::unit())
                } else {
                    T::nil()
                }
            })
            .collect();
        let all = vec![true; self.cols];
        if self.basis.iter().any(|&b| b >= st.first_artificial) {
            self.optimize(&cost, &all);
            for i in 0..self.t.len() {
                if self.basis[i] >= st.first_artificial && self.t[i][self.cols].nonzero() {
                    return Err(Error::Infeasible);
                }
            }
        }
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= st.first_artificial {
                if let Some(c) = (0..st.first_artificial).find(|&j| self.t[i][j].nonzero()) {
                    self.pivot(i, c);
                } else {
                    self.t.remove(i);
                    self.basis.remove(i);
                    self.row_of.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        Ok(())
    }
}

/// Exact solve of a square sparse system given by columns. Returns `None` when singular.
fn solve_columns(cols: &[Vec<(usize, Q)>], rows: &[usize], rhs: &[Q]) -> Option<Vec<Q>> {
    // dense rows restricted to `rows`, unknowns indexed by column position
    let k = cols.len();
    let pos: std::collections::HashMap<usize, usize> =
        rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut a: Vec<Vec<Q>> = vec![vec![Q::zero(); k + 1]; k];
    for (j, col) in cols.iter().enumerate() {
        for (r, v) in col {
            if let Some(&i) = pos.get(r) {
                a[i][j] = v.clone();
            }
        }
    }
    for (i, b) in rhs.iter().enumerate() {
        a[i][k] = b.clone();
    }
    gauss(a, k)
}

fn gauss(mut a: Vec<Vec<Q>>, k: usize) -> Option<Vec<Q>> {
    let mut used = vec![false; k];
    let mut pivot_row = vec![usize::MAX; k];
    for c in 0..k {
        // sparsest available row with a nonzero in column c
        let mut best: Option<(usize, usize)> = None;
        for i in 0..k {
            if used[i] || a[i][c].is_zero() {
                continue;
            }
            let nnz = a[i].iter().filter(|v| !v.is_zero()).count();
            if best.is_none_or(|(_, b)| nnz < b) {
                best = Some((i, nnz));
            }
        }
        let (r, _) = best?;
        used[r] = true;
        pivot_row[c] = r;
        let p = a[r][c].clone();
        let nz: Vec<usize> = (0..=k).filter(|&j| !a[r][j].is_zero()).collect();
        for &j in &nz {
            a[r][j] = &a[r][j] / &p;
        }
        let prow: Vec<(usize, Q)> = nz.iter().map(|&j| (j, a[r][j].clone())).collect();
        for i in 0..k {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for (j, v) in &prow {
                let d = &f * v;
                a[i][*j] -= d;
            }
        }
    }
    Some((0..k).map(|c| a[pivot_row[c]][k].clone()).collect())
}

fn transpose(cols: &[Vec<(usize, Q)>], rows: &[usize]) -> Vec<Vec<(usize, Q)>> {
    // the transposed system has one column per row index in `rows`
    let pos: std::collections::HashMap<usize, usize> =
        rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut out = vec![Vec::new(); rows.len()];
    for (j, col) in cols.iter().enumerate() {
        for (r, v) in col {
            if let Some(&i) = pos.get(r) {
                out[i].push((j, v.clone()));
            }
        }
    }
    out
}

struct Certified {
    x_b: Vec<Q>,
    y: Vec<Q>,
}

enum Check {
    Optimal(Certified),
    /// feasible basis but some column prices out positively
    Improve(Certified, usize),
    Unusable,
}

fn check_basis(st: &Standard, cols: &[Vec<(usize, Q)>], basis: &[usize], rows: &[usize]) -> Check {
    let bcols: Vec<Vec<(usize, Q)>> = basis.iter().map(|&j| cols[j].clone()).collect();
    let rhs: Vec<Q> = rows.iter().map(|&r| st.rhs[r].clone()).collect();
    let Some(x_b) = solve_columns(&bcols, rows, &rhs) else {
        return Check::Unusable;
    };
    if x_b.iter().any(|v| v.is_negative())
        || basis
            .iter()
            .zip(&x_b)
            .any(|(&j, v)| j >= st.first_artificial && !v.is_zero())
    {
        return Check::Unusable;
    }
    let tcols = transpose(&bcols, rows);
    let cb: Vec<Q> = basis.iter().map(|&j| st.cost[j].clone()).collect();
    let idx: Vec<usize> = (0..basis.len()).collect();
    let Some(y_local) = solve_columns(&tcols, &idx, &cb) else {
        return Check::Unusable;
    };
    let mut y = vec![Q::zero(); st.rows.len()];
    for (i, &r) in rows.iter().enumerate() {
        y[r] = y_local[i].clone();
    }
    let in_basis: std::collections::HashSet<usize> = basis.iter().copied().collect();
    for j in 0..st.first_artificial {
        if in_basis.contains(&j) {
            continue;
        }
        let price: Q = cols[j].iter().map(|(r, a)| a * &y[*r]).sum();
        if st.cost[j] > price {
            return Check::Improve(Certified { x_b, y }, j);
        }
    }
    Check::Optimal(Certified { x_b, y })
}

/// Exact revised simplex with Bland's rule from a primal feasible basis.
fn revised_exact(
    st: &Standard,
    cols: &[Vec<(usize, Q)>],
    mut basis: Vec<usize>,
    rows: &[usize],
    max_iter: usize,
) -> Result<Option<(Vec<usize>, Certified)>> {
    for _ in 0..max_iter {
        match check_basis(st, cols, &basis, rows) {
            Check::Unusable => return Ok(None),
            Check::Optimal(c) => return Ok(Some((basis, c))),
            Check::Improve(c, enter) => {
                let bcols: Vec<Vec<(usize, Q)>> = basis.iter().map(|&j| cols[j].clone()).collect();
                let col: Vec<Q> = {
                    let mut dense = vec![Q::zero(); rows.len()];
                    let pos: std::collections::HashMap<usize, usize> =
                        rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
                    for (r, v) in &cols[enter] {
                        if let Some(&i) = pos.get(r) {
                            dense[i] = v.clone();
                        }
                    }
                    dense
                };
                let Some(d) = solve_columns(&bcols, rows, &col) else {
                    return Ok(None);
                };
                let mut leave: Option<(usize, Q)> = None;
                for i in 0..basis.len() {
                    if !d[i].is_positive() {
                        continue;
                    }
                    let ratio = &c.x_b[i] / &d[i];
                    let better = match &leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < *best || (ratio == *best && basis[i] < basis[*l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
                let Some((r, _)) = leave else {
                    return Err(Error::Unbounded);
                };
                basis[r] = enter;
            }
        }
    }
    Ok(None)
}

fn assemble(lp: &Lp, st: &Standard, basis: &[usize], cert: &Certified) -> LpSolution {
    let mut x = vec![Q::zero(); lp.vars];
    for (&j, v) in basis.iter().zip(&cert.x_b) {
        if j < lp.vars {
            x[j] = v.clone();
        }
    }
    let duals: Vec<Q> = cert.y.iter().zip(&st.sign).map(|(y, s)| y * s).collect();
    LpSolution {
        value: lp.objective_value(&x),
        x,
        duals,
        certified: true,
    }
}

fn run_tableau<T: Num>(st: &Standard) -> Result<Tableau<T>> {
    let mut tab = Tableau::<T>::new(st);
    tab.phase_one(st)?;
    let cost: Vec<T> = st.cost.iter().map(T::from_q).collect();
    let allowed: Vec<bool> = (0..st.cols).map(|j| j < st.first_artificial).collect();
    match tab.optimize(&cost, &allowed) {
        Outcome::Optimal => Ok(tab),
        Outcome::Unbounded => Err(Error::Unbounded),
    }
}

fn solve_exact_tableau(lp: &Lp, st: &Standard) -> Result<LpSolution> {
    let tab = run_tableau::<Q>(st)?;
    let cols = st.columns();
    match check_basis(st, &cols, &tab.basis, &tab.row_of) {
        Check::Optimal(c) => Ok(assemble(lp, st, &tab.basis, &c)),
        _ => Err(Error::Invariant(
            "exact simplex ended on a non-optimal basis".into(),
        )),
    }
}

pub fn solve(lp: &Lp, arithmetic: Arithmetic) -> Result<LpSolution> {
    for c in &lp.constraints {
        if c.coeffs.iter().any(|(j, _)| *j >= lp.vars) {
            return Err(Error::InvalidInput(
                "constraint refers to an unknown variable".into(),
            ));
        }
    }
    let st = Standard::new(lp);
    let tab = run_tableau::<f64>(&st)?;
    if arithmetic == Arithmetic::Float {
        let mut x = vec![Q::zero(); lp.vars];
        for (i, &j) in tab.basis.iter().enumerate() {
            if j < lp.vars {
                x[j] = rational::from_f64(tab.t[i][tab.cols].max(0.0));
            }
        }
        let cost: Vec<f64> = st.cost.iter().map(rational::to_f64).collect();
        let all = vec![true; st.cols];
        let d = tab.reduced_costs(&cost, &all);
        // tableau reduced costs of the starting basic columns give the multipliers
        let duals = (0..st.rows.len())
            .map(|r| {
                let j = st.start_basis[r];
                let sb = st.rows[r]
                    .iter()
                    .find(|e| e.0 == j)
                    .map(|e| rational::to_f64(&e.1))
                    .unwrap_or(1.0);
                rational::from_f64((rational::to_f64(&st.cost[j]) - d[j]) / sb) * &st.sign[r]
            })
            .collect();
        return Ok(LpSolution {
            value: lp.objective_value(&x),
            x,
            duals,
            certified: false,
        });
    }
    let cols = st.columns();
    if let Some((basis, cert)) = revised_exact(&st, &cols, tab.basis.clone(), &tab.row_of, 10_000)?
    {
        let sol = assemble(lp, &st, &basis, &cert);
        if lp.violation(&sol.x).is_zero() {
            return Ok(sol);
        }
    }
    solve_exact_tableau(lp, &st)
}
