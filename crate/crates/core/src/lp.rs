//! Small dense linear programs: two-phase tableau simplex with Bland's rule.
//!
//! Variables are mapped to a nonnegative standard form (shift by finite lower
//! bounds, reflect variables with only an upper bound, split free ones), upper
//! bounds become extra `≤` rows, and rows are sign-normalized so that the
//! right-hand side is nonnegative. Phase one minimizes the artificial sum;
//! phase two keeps artificial columns in the tableau (never re-entering) so
//! the initial identity columns carry `B⁻¹` for dual recovery.

use crate::error::{Error, Result};
use crate::numerics::{DenseMatrix, Point};

pub const DEFAULT_FEAS_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: DenseMatrix,
    pub rhs: Vec<f64>,
    pub senses: Vec<Sense>,
    /// Per-variable `(lower, upper)`; infinite values mean unbounded.
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// `min cᵀx` subject to `Ax ≤ b`, `x ≥ 0`.
    pub fn standard(c: Vec<f64>, a: DenseMatrix, b: Vec<f64>) -> Self {
        let n = c.len();
        let m = b.len();
        LinearProgram {
            objective: c,
            constraints: a,
            rhs: b,
            senses: vec![Sense::Le; m],
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.rhs.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        let m = self.n_constraints();
        if n == 0 {
            return Err(Error::config("linear program needs at least one variable"));
        }
        if m > 0 && (self.constraints.rows() != m || self.constraints.cols() != n) {
            return Err(Error::config(format!(
                "constraint matrix is {}x{}, expected {m}x{n}",
                self.constraints.rows(),
                self.constraints.cols()
            )));
        }
        if self.senses.len() != m || self.bounds.len() != n {
            return Err(Error::config("senses/bounds length mismatch"));
        }
        let finite = self.objective.iter().chain(&self.rhs).all(|v| v.is_finite())
            && (m == 0 || self.constraints.is_finite());
        if !finite {
            return Err(Error::config("linear program data must be finite"));
        }
        if self.bounds.iter().any(|(l, u)| l.is_nan() || u.is_nan()) {
            return Err(Error::config("NaN variable bound"));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n_constraints() {
            let lhs: f64 = self.constraints.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
            let viol = match self.senses[i] {
                Sense::Le => lhs - self.rhs[i],
                Sense::Eq => (lhs - self.rhs[i]).abs(),
            };
            worst = worst.max(viol);
        }
        for (v, (l, u)) in x.iter().zip(&self.bounds) {
            worst = worst.max(l - v).max(v - u);
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Option<Point>,
    pub objective_value: f64,
    /// Multipliers of the original constraint rows (sign convention: the
    /// Lagrangian is `cᵀx − yᵀ(Ax − b)`, so `y ≤ 0` on `≤` rows of a minimization).
    pub duals: Option<Vec<f64>>,
    pub pivots: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, pivots: usize) -> Self {
        let objective_value = match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        };
        LpSolution {
            status,
            x: None,
            objective_value,
            duals: None,
            pivots,
        }
    }
}

/// How an original variable is recovered from standard-form columns.
#[derive(Clone, Debug)]
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

struct StandardForm {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    senses: Vec<Sense>,
    c: Vec<f64>,
    maps: Vec<VarMap>,
    n_cols: usize,
}

fn to_standard_form(lp: &LinearProgram) -> Option<StandardForm> {
    let mut maps = Vec::with_capacity(lp.n_vars());
    let mut n_cols = 0;
    let mut upper_rows: Vec<(usize, f64)> = Vec::new();
    for &(l, u) in &lp.bounds {
        if l > u {
            return None;
        }
        let map = match (l.is_finite(), u.is_finite()) {
            (true, _) => {
                let col = n_cols;
                n_cols += 1;
                if u.is_finite() {
                    upper_rows.push((col, u - l));
                }
                VarMap { offset: l, terms: vec![(col, 1.0)] }
            }
            (false, true) => {
                let col = n_cols;
                n_cols += 1;
                VarMap { offset: u, terms: vec![(col, -1.0)] }
            }
            (false, false) => {
                let col = n_cols;
                n_cols += 2;
                VarMap { offset: 0.0, terms: vec![(col, 1.0), (col + 1, -1.0)] }
            }
        };
        maps.push(map);
    }

    let mut c = vec![0.0; n_cols];
    for (j, map) in maps.iter().enumerate() {
        for &(col, coef) in &map.terms {
            c[col] += lp.objective[j] * coef;
        }
    }

    let m = lp.n_constraints();
    let mut a = Vec::with_capacity(m + upper_rows.len());
    let mut b = Vec::with_capacity(m + upper_rows.len());
    let mut senses = Vec::with_capacity(m + upper_rows.len());
    for i in 0..m {
        let mut row = vec![0.0; n_cols];
        let mut rhs = lp.rhs[i];
        for (j, map) in maps.iter().enumerate() {
            let aij = lp.constraints[(i, j)];
            if aij == 0.0 {
                continue;
            }
            rhs -= aij * map.offset;
            for &(col, coef) in &map.terms {
                row[col] += aij * coef;
            }
        }
        a.push(row);
        b.push(rhs);
        senses.push(lp.senses[i]);
    }
    for (col, ub) in upper_rows {
        let mut row = vec![0.0; n_cols];
        row[col] = 1.0;
        a.push(row);
        b.push(ub);
        senses.push(Sense::Le);
    }
    Some(StandardForm { a, b, senses, c, maps, n_cols })
}

struct Tableau {
    /// `m` constraint rows, each `n_total + 1` wide (last entry is the rhs).
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row, same width; last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    n_total: usize,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.n_total]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let width = self.n_total + 1;
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rows[r][col] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for k in 0..width {
                    row[k] -= f * pivot_row[k];
                }
                row[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for k in 0..width {
                self.cost[k] -= f * pivot_row[k];
            }
            self.cost[col] = 0.0;
        }
        self.basis[r] = col;
        self.pivots += 1;
    }

    /// Loads objective `c` (length `n_total`) and prices out the basis.
    fn set_objective(&mut self, c: &[f64]) {
        let width = self.n_total + 1;
        self.cost = vec![0.0; width];
        self.cost[..self.n_total].copy_from_slice(c);
        for (i, &bcol) in self.basis.iter().enumerate() {
            let f = self.cost[bcol];
            if f != 0.0 {
                for k in 0..width {
                    self.cost[k] -= f * self.rows[i][k];
                }
            }
        }
    }

    /// Bland's rule simplex over columns `< allowed`. Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> Result<bool> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Numerical("simplex pivot limit exceeded".into()));
            }
            let Some(col) = (0..allowed).find(|&j| self.cost[j] < -COST_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = row[self.n_total].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, col),
            }
        }
    }
}

/// Solves `lp`; infeasibility and unboundedness are reported in the status.
pub fn solve_lp(lp: &LinearProgram, feas_tol: f64) -> Result<LpSolution> {
    lp.validate()?;
    if !(feas_tol > 0.0) {
        return Err(Error::config("feasibility tolerance must be positive"));
    }
    let Some(sf) = to_standard_form(lp) else {
        return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
    };
    let m = sf.a.len();
    let n = sf.n_cols;

    // Columns: structural [0, n), slacks [n, n + n_slack), artificials after.
    let slack_rows: Vec<usize> = (0..m).filter(|&i| sf.senses[i] == Sense::Le).collect();
    let n_slack = slack_rows.len();
    let mut sign = vec![1.0; m];
    for i in 0..m {
        if sf.b[i] < 0.0 {
            sign[i] = -1.0;
        }
    }
    // A row can start with its slack basic only if it was not negated.
    let art_rows: Vec<usize> = (0..m)
        .filter(|&i| sf.senses[i] == Sense::Eq || sign[i] < 0.0)
        .collect();
    let n_art = art_rows.len();
    let n_total = n + n_slack + n_art;

    let mut rows = vec![vec![0.0; n_total + 1]; m];
    let mut basis = vec![usize::MAX; m];
    // Column that held the identity for row i at the start (B⁻¹ tracking).
    let mut init_col = vec![usize::MAX; m];
    for i in 0..m {
        for j in 0..n {
            rows[i][j] = sign[i] * sf.a[i][j];
        }
        rows[i][n_total] = sign[i] * sf.b[i];
    }
    for (s, &i) in slack_rows.iter().enumerate() {
        rows[i][n + s] = sign[i];
        if sign[i] > 0.0 {
            basis[i] = n + s;
            init_col[i] = n + s;
        }
    }
    for (k, &i) in art_rows.iter().enumerate() {
        rows[i][n + n_slack + k] = 1.0;
        basis[i] = n + n_slack + k;
        init_col[i] = n + n_slack + k;
    }
    let mut tab = Tableau {
        rows,
        cost: Vec::new(),
        basis,
        n_total,
        pivots: 0,
    };

    if n_art > 0 {
        let mut c1 = vec![0.0; n_total];
        for c in c1.iter_mut().skip(n + n_slack) {
            *c = 1.0;
        }
        tab.set_objective(&c1);
        tab.optimize(n_total)?;
        let phase1 = -tab.cost[n_total];
        if phase1 > feas_tol {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, tab.pivots));
        }
        // Drive zero-level artificials out where a structural/slack pivot exists.
        for r in 0..m {
            if tab.basis[r] < n + n_slack {
                continue;
            }
            if let Some(col) = (0..n + n_slack).find(|&j| tab.rows[r][j].abs() > 1e-9) {
                tab.pivot(r, col);
            }
        }
    }

    let mut c2 = vec![0.0; n_total];
    c2[..n].copy_from_slice(&sf.c);
    tab.set_objective(&c2);
    if !tab.optimize(n + n_slack)? {
        return Ok(LpSolution::without_point(LpStatus::Unbounded, tab.pivots));
    }

    let mut xs = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            xs[b] = tab.rhs(i).max(0.0);
        }
    }
    let x: Vec<f64> = sf
        .maps
        .iter()
        .map(|map| map.offset + map.terms.iter().map(|&(col, coef)| coef * xs[col]).sum::<f64>())
        .collect();
    let objective_value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    // ŷ_i = c_Bᵀ B⁻¹ e_i is minus the reduced cost of row i's initial identity column.
    let duals: Vec<f64> = (0..lp.n_constraints())
        .map(|i| -tab.cost[init_col[i]] * sign[i])
        .collect();

    let viol = lp.max_violation(&x);
    let scale = 1.0 + lp.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    if viol > feas_tol * scale.max(1.0) * 10.0 {
        return Err(Error::Numerical(format!(
            "simplex returned a point violating constraints by {viol:e}"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x: Some(Point::from_vec(x)),
        objective_value,
        duals: Some(duals),
        pivots: tab.pivots,
    })
}
