//! Nonlinear solvers for the two moment systems.
//!
//! Soliton: `A x = N(x)` with `N(x)_k = (N(k) x, x) / ‖x‖²`, solved by the
//! fixed-point iteration `x ← A⁻¹ N(x)`.
//!
//! Shock: `P(c) = A c - 2 Σ_k (S(k) c, c) e_k = 0`, solved by Newton's method
//! with the explicit Jacobian whose k-th row is `A_k - 2 cᵀ (S(k) + S(k)ᵀ)`.
//!
//! Both only use the square subsystem picked by
//! [`BasisSpec::soliton_rows`](crate::hermite::BasisSpec::soliton_rows) or
//! [`BasisSpec::shock_rows`](crate::hermite::BasisSpec::shock_rows).

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hermite::MomentTables;
use crate::linalg::{self, norm_inf, Lu, Matrix};

pub use crate::linalg::linear_solve;

/// Which test ended the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum StopCriterion {
    /// The update fell below tolerance.
    Step,
    /// The equation residual fell below tolerance.
    Residual,
    /// The iteration budget ran out.
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Sup norm of the final step or of the final residual, per `criterion`.
    pub residual_inf: f64,
    pub converged: bool,
    pub criterion: StopCriterion,
    pub seed: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Initial step fraction in `(0, 1]`; the step is then halved while the
    /// residual grows.
    pub damping: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
            damping: 1.0,
        }
    }
}

const MAX_HALVINGS: usize = 30;
const DIVERGENCE_RADIUS: f64 = 1e6;

fn check_rows(tables: &MomentTables, rows: &[usize], x0: &[f64]) -> Result<()> {
    if x0.len() != tables.dim() {
        return Err(Error::InvalidInput(format!(
            "initial guess has {} entries, basis has {}",
            x0.len(),
            tables.dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("initial guess is not finite".into()));
    }
    if let Some(&r) = rows.iter().find(|&&r| r > tables.max_order()) {
        return Err(Error::InvalidInput(format!(
            "moment row {r} exceeds table order {}",
            tables.max_order()
        )));
    }
    Ok(())
}

/// `N(x)` restricted to `rows`.
pub fn soliton_map(tables: &MomentTables, rows: &[usize], x: &[f64]) -> Vec<f64> {
    let nrm = linalg::dot(x, x);
    rows.iter()
        .map(|&k| tables.square_moment(k, x) / nrm)
        .collect()
}

/// `A x - N(x)` over `rows`.
pub fn soliton_residual(tables: &MomentTables, rows: &[usize], x: &[f64]) -> Vec<f64> {
    let n = soliton_map(tables, rows, x);
    rows.iter()
        .zip(n)
        .map(|(&k, nk)| tables.mass_moment(k, x) - nk)
        .collect()
}

pub fn fixed_point_solve(
    tables: &MomentTables,
    x0: &[f64],
    opts: &FixedPointOptions,
) -> Result<SolveReport> {
    let rows = tables.basis.soliton_rows()?;
    check_rows(tables, &rows, x0)?;
    let lu = Lu::factor(&tables.a.select_rows(&rows))?;
    let mut x = x0.to_vec();
    let mut step = f64::INFINITY;
    for it in 0..opts.max_iter {
        if linalg::dot(&x, &x) == 0.0 {
            return Err(Error::DegenerateIterate { iteration: it });
        }
        let next = lu.solve(&soliton_map(tables, &rows, &x));
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                iteration: it + 1,
                norm: f64::INFINITY,
            });
        }
        step = next
            .iter()
            .zip(&x)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()));
        x = next;
        if step < opts.tol {
            return Ok(SolveReport {
                x,
                iterations: it + 1,
                residual_inf: step,
                converged: true,
                criterion: StopCriterion::Step,
                seed: x0.to_vec(),
            });
        }
    }
    Err(Error::NotConverged(Box::new(SolveReport {
        x,
        iterations: opts.max_iter,
        residual_inf: step,
        converged: false,
        criterion: StopCriterion::MaxIter,
        seed: x0.to_vec(),
    })))
}

/// `P(c)` over `rows`.
pub fn shock_residual(tables: &MomentTables, rows: &[usize], c: &[f64]) -> Vec<f64> {
    rows.iter()
        .map(|&k| tables.mass_moment(k, c) - 2.0 * tables.step_moment(k, c))
        .collect()
}

/// `P'(c)`: row `k` is `A_k - 2 cᵀ (S(k) + S(k)ᵀ)`.
pub fn shock_jacobian(tables: &MomentTables, rows: &[usize], c: &[f64]) -> Matrix {
    let dim = c.len();
    let mut j = Matrix::zeros(rows.len(), dim);
    for (r, &k) in rows.iter().enumerate() {
        let s = &tables.s_stack[k];
        for col in 0..dim {
            let mut sym = 0.0;
            for i in 0..dim {
                sym += c[i] * (s[(i, col)] + s[(col, i)]);
            }
            j[(r, col)] = tables.a[(k, col)] - 2.0 * sym;
        }
    }
    j
}

pub fn newton_solve(
    tables: &MomentTables,
    x0: &[f64],
    opts: &NewtonOptions,
) -> Result<SolveReport> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "damping {} is outside (0, 1]",
            opts.damping
        )));
    }
    let rows = tables.basis.shock_rows()?;
    check_rows(tables, &rows, x0)?;
    let mut x = x0.to_vec();
    let mut p = shock_residual(tables, &rows, &x);
    let mut pn = norm_inf(&p);
    for it in 0..opts.max_iter {
        if pn < opts.tol {
            return Ok(SolveReport {
                x,
                iterations: it,
                residual_inf: pn,
                converged: true,
                criterion: StopCriterion::Residual,
                seed: x0.to_vec(),
            });
        }
        let jac = shock_jacobian(tables, &rows, &x);
        let dx = Lu::factor(&jac)
            .map_err(|_| Error::SingularJacobian { iteration: it })?
            .solve(&p);
        let dn = norm_inf(&dx);
        // a full step this small means the residual sits at its rounding floor
        if dn <= opts.tol * norm_inf(&x).max(1.0) {
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi -= d);
            return Ok(SolveReport {
                x,
                iterations: it + 1,
                residual_inf: dn,
                converged: true,
                criterion: StopCriterion::Step,
                seed: x0.to_vec(),
            });
        }
        let mut t = opts.damping;
        let mut halvings = 0;
        let (trial, trial_p, trial_n) = loop {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, d)| xi - t * d).collect();
            let tp = shock_residual(tables, &rows, &trial);
            let tn = norm_inf(&tp);
            if tn < pn || halvings == MAX_HALVINGS {
                break (trial, tp, tn);
            }
            t *= 0.5;
            halvings += 1;
        };
        x = trial;
        p = trial_p;
        pn = trial_n;
        let xn = norm_inf(&x);
        if !(xn <= DIVERGENCE_RADIUS) {
            return Err(Error::Diverged {
                iteration: it + 1,
                norm: xn,
            });
        }
    }
    if pn < opts.tol {
        return Ok(SolveReport {
            x,
            iterations: opts.max_iter,
            residual_inf: pn,
            converged: true,
            criterion: StopCriterion::Residual,
            seed: x0.to_vec(),
        });
    }
    Err(Error::NotConverged(Box::new(SolveReport {
        x,
        iterations: opts.max_iter,
        residual_inf: pn,
        converged: false,
        criterion: StopCriterion::MaxIter,
        seed: x0.to_vec(),
    })))
}
