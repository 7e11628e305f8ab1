//! Two-phase revised simplex for `min ‖x‖₁ s.t. Ax = y`, posed as
//! `min 1ᵀ(u + v) s.t. A(u − v) = y, u, v ≥ 0`.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const PIVOT_TOL: f64 = 1e-11;
const REDUCED_COST_TOL: f64 = 1e-10;
/// The basis inverse is rebuilt from scratch this often.
const REFACTOR_EVERY: usize = 40;

pub(super) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub pivots: usize,
    pub optimal: bool,
    /// `max(0, ‖Aᵀπ‖∞ − 1)` at exit.
    pub dual_infeasibility: f64,
}

/// Column `j` of the extended system: `u` columns, `v` columns, then one
/// artificial per row.
#[derive(Clone, Copy, PartialEq)]
enum Var {
    Pos(usize),
    Neg(usize),
    Art(usize),
}

impl Var {
    /// Position in the fixed variable order used by Bland's rule.
    fn order(self, l: usize) -> usize {
        match self {
            Var::Pos(j) => 2 * j,
            Var::Neg(j) => 2 * j + 1,
            Var::Art(r) => 2 * l + r,
        }
    }
}

struct Tableau<'a> {
    a: &'a DenseMatrix,
    /// Row signs making the right-hand side non-negative.
    sign: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<Var>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: usize,
}

impl<'a> Tableau<'a> {
    fn m(&self) -> usize {
        self.rhs.len()
    }

    fn column(&self, v: Var) -> Vec<f64> {
        let m = self.m();
        match v {
            Var::Pos(j) => (0..m).map(|i| self.sign[i] * self.a[(i, j)]).collect(),
            Var::Neg(j) => (0..m).map(|i| -self.sign[i] * self.a[(i, j)]).collect(),
            Var::Art(r) => (0..m).map(|i| if i == r { 1.0 } else { 0.0 }).collect(),
        }
    }

    fn binv_times(&self, v: &[f64]) -> Vec<f64> {
        let m = self.m();
        (0..m).map(|i| (0..m).map(|k| self.binv[i * m + k] * v[k]).sum()).collect()
    }

    /// Gauss–Jordan inversion of the current basis matrix.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m();
        let mut b = vec![0.0; m * m];
        for (k, &v) in self.basis.iter().enumerate() {
            for (i, c) in self.column(v).into_iter().enumerate() {
                b[i * m + k] = c;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&i, &j| b[i * m + c].abs().total_cmp(&b[j * m + c].abs()))
                .expect("non-empty range");
            if b[p * m + c].abs() < 1e-14 {
                return Err(Error::NoConvergence {
                    routine: "basis pursuit simplex (singular basis)",
                    iterations: self.pivots,
                });
            }
            for k in 0..m {
                b.swap(c * m + k, p * m + k);
                inv.swap(c * m + k, p * m + k);
            }
            let d = b[c * m + c];
            for k in 0..m {
                b[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for i in 0..m {
                if i != c {
                    let f = b[i * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            b[i * m + k] -= f * b[c * m + k];
                            inv[i * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.xb = self.binv_times(&self.rhs);
        Ok(())
    }

    fn pivot(&mut self, r: usize, d: &[f64], entering: Var) {
        let m = self.m();
        let dr = d[r];
        for k in 0..m {
            self.binv[r * m + k] /= dr;
        }
        self.xb[r] /= dr;
        for i in 0..m {
            if i != r && d[i] != 0.0 {
                let f = d[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
                self.xb[i] -= f * self.xb[r];
            }
        }
        self.basis[r] = entering;
        self.pivots += 1;
    }

    /// `Aᵀπ` in the original (unsigned) rows for the given basic costs.
    fn prices(&self, cost: impl Fn(Var) -> f64) -> Vec<f64> {
        let m = self.m();
        let cb: Vec<f64> = self.basis.iter().map(|&v| cost(v)).collect();
        let pi: Vec<f64> = (0..m)
            .map(|i| self.sign[i] * (0..m).map(|k| cb[k] * self.binv[k * m + i]).sum::<f64>())
            .collect();
        self.a.tr_matvec(&pi).expect("conformant")
    }

    /// Runs simplex pivots for the given cost until optimal or out of budget.
    /// Artificials never re-enter. Returns whether optimality was reached.
    fn optimize(&mut self, phase_one: bool, budget: usize) -> Result<bool> {
        let cost = |v: Var| match (v, phase_one) {
            (Var::Art(_), true) => 1.0,
            (Var::Art(_), false) => 0.0,
            (_, true) => 0.0,
            (_, false) => 1.0,
        };
        let l = self.a.cols();
        let m = self.m();
        let mut in_basis = vec![false; 2 * l];
        for &v in &self.basis {
            match v {
                Var::Pos(j) => in_basis[j] = true,
                Var::Neg(j) => in_basis[l + j] = true,
                Var::Art(_) => {}
            }
        }
        let mut degenerate_streak = 0;
        let mut since_refactor = 0;
        loop {
            if self.pivots >= budget {
                return Ok(false);
            }
            let w = self.prices(cost);
            let c_real = if phase_one { 0.0 } else { 1.0 };
            let bland = degenerate_streak > 2 * m;
            let mut entering: Option<(Var, f64)> = None;
            for j in 0..l {
                for (var, dj, slot) in [(Var::Pos(j), c_real - w[j], j), (Var::Neg(j), c_real + w[j], l + j)] {
                    if in_basis[slot] || dj >= -REDUCED_COST_TOL {
                        continue;
                    }
                    if bland {
                        if entering.is_none() {
                            entering = Some((var, dj));
                        }
                    } else if entering.is_none_or(|(_, best)| dj < best) {
                        entering = Some((var, dj));
                    }
                }
            }
            let Some((var, _)) = entering else {
                return Ok(true);
            };
            let d = self.binv_times(&self.column(var));
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if d[i] > PIVOT_TOL {
                    let ratio = self.xb[i].max(0.0) / d[i];
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12
                                    && if bland {
                                        self.basis[i].order(l) < self.basis[r].order(l)
                                    } else {
                                        d[i] > d[r]
                                    })
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::NoConvergence {
                    routine: "basis pursuit simplex (unbounded direction)",
                    iterations: self.pivots,
                });
            };
            degenerate_streak = if ratio <= 1e-12 { degenerate_streak + 1 } else { 0 };
            match self.basis[r] {
                Var::Pos(j) => in_basis[j] = false,
                Var::Neg(j) => in_basis[l + j] = false,
                Var::Art(_) => {}
            }
            match var {
                Var::Pos(j) => in_basis[j] = true,
                Var::Neg(j) => in_basis[l + j] = true,
                Var::Art(_) => unreachable!("artificials are never priced"),
            }
            self.pivot(r, &d, var);
            since_refactor += 1;
            if since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                since_refactor = 0;
            }
        }
    }

    /// Pivots zero-valued artificials out of the basis where the row allows it.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let l = self.a.cols();
        for r in 0..self.m() {
            if !matches!(self.basis[r], Var::Art(_)) {
                continue;
            }
            let mut best: Option<(Var, Vec<f64>)> = None;
            for j in 0..l {
                if self.basis.contains(&Var::Pos(j)) || self.basis.contains(&Var::Neg(j)) {
                    continue;
                }
                let d = self.binv_times(&self.column(Var::Pos(j)));
                if d[r].abs() > 1e-9 && best.as_ref().is_none_or(|(_, b)| d[r].abs() > b[r].abs()) {
                    best = Some((Var::Pos(j), d));
                }
            }
            if let Some((var, d)) = best {
                self.pivot(r, &d, var);
            }
        }
        self.refactor()
    }
}

pub(super) fn l1_min(a: &DenseMatrix, y: &[f64], max_pivots: usize) -> Result<SimplexOutcome> {
    let m = a.rows();
    let sign: Vec<f64> = y.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let rhs: Vec<f64> = y.iter().zip(&sign).map(|(v, s)| v * s).collect();
    let mut binv = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut t = Tableau {
        a,
        sign,
        xb: rhs.clone(),
        rhs,
        basis: (0..m).map(Var::Art).collect(),
        binv,
        pivots: 0,
    };

    if !t.optimize(true, max_pivots)? {
        return Ok(outcome(&t, false));
    }
    t.refactor()?;
    let infeasibility: f64 = t
        .basis
        .iter()
        .zip(&t.xb)
        .filter(|(v, _)| matches!(v, Var::Art(_)))
        .map(|(_, x)| x.abs())
        .sum();
    let scale: f64 = y.iter().map(|v| v.abs()).sum();
    if infeasibility > 1e-9 * scale.max(1.0) {
        return Err(Error::invalid(format!(
            "basis pursuit: measurement is not in the range of the sensing matrix (residual {infeasibility:.3e})"
        )));
    }
    t.drive_out_artificials()?;
    let optimal = t.optimize(false, max_pivots)?;
    t.refactor()?;
    Ok(outcome(&t, optimal))
}

fn outcome(t: &Tableau<'_>, optimal: bool) -> SimplexOutcome {
    let l = t.a.cols();
    let mut x = vec![0.0; l];
    for (&v, &val) in t.basis.iter().zip(&t.xb) {
        let val = val.max(0.0);
        match v {
            Var::Pos(j) => x[j] += val,
            Var::Neg(j) => x[j] -= val,
            Var::Art(_) => {}
        }
    }
    let w = t.prices(|v| if matches!(v, Var::Art(_)) { 0.0 } else { 1.0 });
    let dual_infeasibility = w.iter().fold(0.0f64, |acc, v| acc.max(v.abs() - 1.0)).max(0.0);
    SimplexOutcome {
        x,
        pivots: t.pivots,
        optimal,
        dual_infeasibility,
    }
}
