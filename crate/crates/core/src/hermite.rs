//! Orthonormal Hermite functions and the moment tables built from them.
//!
//! `h_j(x) = H_j(x) e^{-x²/2} / (√(2^j j!) π^{1/4})` with `H_j` the
//! physicists' Hermite polynomials. A profile density `φ = Σ c_j h_j` turns
//! every moment condition into linear or quadratic forms in `c`:
//!
//! * `m_k(φ) = ∫ x^k φ = (A c)_k`
//! * `∫ x^k φ² = (N(k) c, c)`
//! * `∫ x^k φ(x) (∫_{-∞}^x φ) dx = (S(k) c, c)`

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::quadrature::PanelRule;

/// `π^{-1/4}`.
pub const PI_POW_NEG_QUARTER: f64 = 0.751_125_544_464_942_5;

/// Which Hermite indices a basis uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Parity {
    All,
    Even,
    Odd,
}

impl Parity {
    fn admits(self, j: usize) -> bool {
        match self {
            Parity::All => true,
            Parity::Even => j.is_multiple_of(2),
            Parity::Odd => j % 2 == 1,
        }
    }

    fn flipped(self) -> Self {
        match self {
            Parity::All => Parity::All,
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// The index set `{j ≤ n_max : parity admits j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasisSpec {
    pub n_max: usize,
    pub parity: Parity,
}

impl BasisSpec {
    pub fn new(n_max: usize, parity: Parity) -> Result<Self> {
        let b = Self { n_max, parity };
        if b.dim() == 0 {
            return Err(Error::InvalidInput(format!(
                "basis with n_max={n_max} and parity {parity:?} is empty"
            )));
        }
        Ok(b)
    }

    pub fn all(n_max: usize) -> Self {
        Self {
            n_max,
            parity: Parity::All,
        }
    }

    pub fn even(n_max: usize) -> Self {
        Self {
            n_max,
            parity: Parity::Even,
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..=self.n_max)
            .filter(|&j| self.parity.admits(j))
            .collect()
    }

    pub fn dim(&self) -> usize {
        (0..=self.n_max).filter(|&j| self.parity.admits(j)).count()
    }

    pub fn contains(&self, j: usize) -> bool {
        j <= self.n_max && self.parity.admits(j)
    }

    /// Position of Hermite index `j` inside the coefficient vector.
    pub fn position(&self, j: usize) -> Option<usize> {
        self.contains(j)
            .then(|| (0..j).filter(|&i| self.parity.admits(i)).count())
    }

    /// Moment rows forming the square soliton system.
    ///
    /// For an even basis every odd moment condition holds by symmetry
    /// (`m_k` and `∫x^kφ²` both vanish), so the genuine conditions are the
    /// even rows `0, 2, …, 2m`. An odd density has zero mass and is rejected.
    pub fn soliton_rows(&self) -> Result<Vec<usize>> {
        match self.parity {
            Parity::All => Ok((0..self.dim()).collect()),
            Parity::Even => Ok(self.indices()),
            Parity::Odd => Err(Error::InvalidInput(
                "an odd profile has zero mass; use an even or full basis".into(),
            )),
        }
    }

    /// Moment rows forming the square shock system.
    ///
    /// For an even density `θ` with unit mass, `K - 1/2` is odd, so every
    /// even shock condition `m_k = 2 r_k` (k ≥ 2) holds identically. The
    /// genuine conditions are the mass row `k = 0` and the odd rows
    /// `1, 3, …, 2m-1`, which is again `dim` rows.
    pub fn shock_rows(&self) -> Result<Vec<usize>> {
        match self.parity {
            Parity::All => Ok((0..self.dim()).collect()),
            Parity::Even => {
                let mut rows = vec![0];
                rows.extend((1..self.dim()).map(|i| 2 * i - 1));
                Ok(rows)
            }
            Parity::Odd => Err(Error::InvalidInput(
                "an odd density has zero mass; use an even or full basis".into(),
            )),
        }
    }
}

/// Expansion coefficients `c` of `Σ c_j h_j` over a basis.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoeffVec {
    pub basis: BasisSpec,
    pub c: Vec<f64>,
}

impl CoeffVec {
    pub fn new(basis: BasisSpec, c: Vec<f64>) -> Result<Self> {
        if c.len() != basis.dim() {
            return Err(Error::InvalidInput(format!(
                "basis has dimension {}, got {} coefficients",
                basis.dim(),
                c.len()
            )));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { basis, c })
    }

    pub fn zeros(basis: BasisSpec) -> Self {
        Self {
            basis,
            c: vec![0.0; basis.dim()],
        }
    }

    /// Coefficient of `h_j` (zero when `j` is outside the basis).
    pub fn get(&self, j: usize) -> f64 {
        self.basis.position(j).map_or(0.0, |p| self.c[p])
    }

    /// `(j, c_j)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.basis.indices().into_iter().zip(self.c.iter().copied())
    }

    /// `∫ φ² = Σ c_j²` by orthonormality.
    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let h = hermite_values(self.basis.n_max, x);
        self.terms().map(|(j, c)| c * h[j]).sum()
    }

    /// `∫_{-∞}^x φ`.
    pub fn eval_antideriv(&self, x: f64) -> f64 {
        let h = hermite_values(self.basis.n_max, x);
        let p = antideriv_values(self.basis.n_max, x, &h);
        self.terms().map(|(j, c)| c * p[j]).sum()
    }

    /// Re-expresses the same function over a larger basis.
    pub fn embed(&self, basis: BasisSpec) -> Result<Self> {
        let mut out = Self::zeros(basis);
        for (j, c) in self.terms() {
            match basis.position(j) {
                Some(p) => out.c[p] = c,
                None if c != 0.0 => {
                    return Err(Error::InvalidInput(format!(
                        "index {j} does not fit in the target basis"
                    )))
                }
                None => {}
            }
        }
        Ok(out)
    }

    pub fn derivative(&self) -> Self {
        hermite_coeff_derivative(self)
    }
}

/// Value of `h_j(x)` by the three-term recurrence.
pub fn hermite_eval(j: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = PI_POW_NEG_QUARTER * libm::exp(-0.5 * x * x);
    for i in 0..j {
        let next = libm::sqrt(2.0 / (i as f64 + 1.0)) * x * cur
            - libm::sqrt(i as f64 / (i as f64 + 1.0)) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `h_0(x), …, h_n(x)`.
pub fn hermite_values(n: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(PI_POW_NEG_QUARTER * libm::exp(-0.5 * x * x));
    if n >= 1 {
        h.push(SQRT_2 * x * h[0]);
    }
    for i in 1..n {
        let fi = i as f64;
        let next = libm::sqrt(2.0 / (fi + 1.0)) * x * h[i] - libm::sqrt(fi / (fi + 1.0)) * h[i - 1];
        h.push(next);
    }
    h
}

/// `P_0(x), …, P_n(x)` with `P_j(x) = ∫_{-∞}^x h_j`, given `h_0..h_n` at `x`.
pub fn antideriv_values(n: usize, x: f64, h: &[f64]) -> Vec<f64> {
    let mut p = Vec::with_capacity(n + 1);
    // 1 + erf(y) = erfc(-y) keeps full relative accuracy in the left tail
    p.push(libm::erfc(-x / SQRT_2) / (SQRT_2 * PI_POW_NEG_QUARTER));
    if n >= 1 {
        p.push(-SQRT_2 * h[0]);
    }
    for j in 2..=n {
        let fj = j as f64;
        let next = libm::sqrt((fj - 1.0) / fj) * p[j - 2] - libm::sqrt(2.0 / fj) * h[j - 1];
        p.push(next);
    }
    p
}

/// `P_j(x) = ∫_{-∞}^x h_j(y) dy`.
pub fn hermite_antideriv(j: usize, x: f64) -> f64 {
    let h = hermite_values(j, x);
    antideriv_values(j, x, &h)[j]
}

/// Coefficients of `ψ'` given those of `ψ`, via
/// `h_j' = √(j/2) h_{j-1} - √((j+1)/2) h_{j+1}`.
pub fn hermite_coeff_derivative(d: &CoeffVec) -> CoeffVec {
    let basis = BasisSpec {
        n_max: d.basis.n_max + 1,
        parity: d.basis.parity.flipped(),
    };
    let mut out = CoeffVec::zeros(basis);
    for (j, c) in d.terms() {
        if j > 0 {
            let p = basis.position(j - 1).expect("ladder stays in basis");
            out.c[p] += c * libm::sqrt(j as f64 / 2.0);
        }
        let p = basis.position(j + 1).expect("ladder stays in basis");
        out.c[p] -= c * libm::sqrt((j as f64 + 1.0) / 2.0);
    }
    out
}

/// `A_{kj}` from `(-i)^j i^k √(2π) h_j^{(k)}(0)`, with the derivative taken
/// through the ladder identity.
pub fn closed_form_moment(k: usize, j: usize) -> f64 {
    if (k + j) % 2 == 1 {
        return 0.0;
    }
    let mut d = CoeffVec::zeros(BasisSpec::all(j));
    d.c[j] = 1.0;
    for _ in 0..k {
        d = d.derivative();
    }
    // (-i)^j i^k = (-1)^j i^{j+k} = (-1)^j (-1)^{(j+k)/2}
    let sign = if (j + (j + k) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    sign * libm::sqrt(2.0 * PI) * d.eval(0.0)
}

/// Moment matrices for `k = 0..=n_moments-1` over one basis.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentTables {
    pub basis: BasisSpec,
    /// `A_{kj} = ∫ x^k h_j`, one row per moment order.
    pub a: Matrix,
    /// `N(k)_{ij} = ∫ x^k h_i h_j`.
    pub n_stack: Vec<Matrix>,
    /// `S(k)_{ij} = ∫ x^k h_i P_j`.
    pub s_stack: Vec<Matrix>,
    /// 1-norm condition number of the square soliton system; infinite when
    /// the basis has no such system or the table is too short for it.
    pub cond_a: f64,
}

/// Relative agreement required between the default panel layout and the
/// refined check layout.
const ASSEMBLY_TOL: f64 = 1e-10;

impl MomentTables {
    /// Highest moment order held.
    pub fn max_order(&self) -> usize {
        self.a.rows() - 1
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `m_k = (A c)_k`.
    pub fn mass_moment(&self, k: usize, c: &[f64]) -> f64 {
        linalg::dot(self.a.row(k), c)
    }

    /// `(N(k) c, c) = ∫ x^k φ²`.
    pub fn square_moment(&self, k: usize, c: &[f64]) -> f64 {
        self.n_stack[k].bilinear(c, c)
    }

    /// `(S(k) c, c) = ∫ x^k θ K`.
    pub fn step_moment(&self, k: usize, c: &[f64]) -> f64 {
        self.s_stack[k].bilinear(c, c)
    }

    /// `∫ x^k θ_left(x) K_right(x) dx` for two densities on this basis.
    pub fn cross_step_moment(&self, k: usize, left: &[f64], right: &[f64]) -> f64 {
        self.s_stack[k].bilinear(left, right)
    }

    /// `Σ_j |A_kj c_j|`, the size of the summands of `m_k`.
    pub fn mass_moment_scale(&self, k: usize, c: &[f64]) -> f64 {
        self.a
            .row(k)
            .iter()
            .zip(c)
            .map(|(a, x)| (a * x).abs())
            .sum()
    }

    /// `Σ_ij |c_i N(k)_ij c_j|`.
    pub fn square_moment_scale(&self, k: usize, c: &[f64]) -> f64 {
        abs_bilinear(&self.n_stack[k], c)
    }

    /// `Σ_ij |c_i S(k)_ij c_j|`.
    pub fn step_moment_scale(&self, k: usize, c: &[f64]) -> f64 {
        abs_bilinear(&self.s_stack[k], c)
    }
}

fn abs_bilinear(m: &Matrix, c: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (i, ci) in c.iter().enumerate() {
        for (mij, cj) in m.row(i).iter().zip(c) {
            sum += (ci * mij * cj).abs();
        }
    }
    sum
}

/// Builds `A`, `N(k)` and `S(k)` for `k = 0..=n` by panel quadrature.
///
/// Each entry is also computed on panels half as wide; an entry whose two
/// values disagree by more than `1e-10` relative to the size of its moment
/// order is reported as a failure.
pub fn assemble_moment_tables(basis: BasisSpec, n: usize) -> Result<MomentTables> {
    if basis.dim() == 0 {
        return Err(Error::InvalidInput("empty basis".into()));
    }
    let reach = basis.n_max.max(n / 2);
    let rule = PanelRule::for_hermite(reach);
    let main = assemble_on(&rule, basis, n);
    let check_rule = PanelRule::new(rule.half_width(), crate::quadrature::PANEL_WIDTH / 2.0);
    let check = assemble_on(&check_rule, basis, n);

    let idx = basis.indices();
    let dim = idx.len();
    for k in 0..=n {
        let scale = 1.0f64
            .max(main.a.row(k).iter().fold(0.0, |m, v| m.max(v.abs())))
            .max(main.n_stack[k].max_abs())
            .max(main.s_stack[k].max_abs());
        let limit = ASSEMBLY_TOL * scale;
        let mut worst = (0.0, 0, 0);
        for i in 0..dim {
            let da = (main.a[(k, i)] - check.a[(k, i)]).abs();
            if da > worst.0 {
                worst = (da, 0, i);
            }
            for j in 0..dim {
                let dn = (main.n_stack[k][(i, j)] - check.n_stack[k][(i, j)]).abs();
                let ds = (main.s_stack[k][(i, j)] - check.s_stack[k][(i, j)]).abs();
                let d = dn.max(ds);
                if d > worst.0 {
                    worst = (d, i, j);
                }
            }
        }
        if !(worst.0 <= limit) {
            return Err(Error::NumericalFailure {
                k,
                i: idx[worst.1],
                j: idx[worst.2],
                discrepancy: worst.0,
            });
        }
    }

    let mut tables = main;
    tables.cond_a = soliton_condition(&tables);
    Ok(tables)
}

fn soliton_condition(t: &MomentTables) -> f64 {
    match t.basis.soliton_rows() {
        Ok(rows) if rows.iter().all(|&r| r <= t.max_order()) => {
            linalg::cond_1(&t.a.select_rows(&rows))
        }
        _ => f64::INFINITY,
    }
}

fn assemble_on(rule: &PanelRule, basis: BasisSpec, n: usize) -> MomentTables {
    let idx = basis.indices();
    let dim = idx.len();
    let mut a = Matrix::zeros(n + 1, dim);
    let mut n_stack = vec![Matrix::zeros(dim, dim); n + 1];
    let mut s_stack = vec![Matrix::zeros(dim, dim); n + 1];
    let mut hv = [vec![0.0; dim], vec![0.0; dim]];
    let mut pv = [vec![0.0; dim], vec![0.0; dim]];
    // mirrored nodes are summed pairwise so that odd integrands cancel exactly
    for left in 0..rule.nodes().len() / 2 {
        let pair = [left, rule.mirror(left)];
        let x = pair.map(|i| rule.nodes()[i]);
        for s in 0..2 {
            let h_all = hermite_values(basis.n_max, x[s]);
            let p_all = antideriv_values(basis.n_max, x[s], &h_all);
            for (slot, &j) in idx.iter().enumerate() {
                hv[s][slot] = h_all[j];
                pv[s][slot] = p_all[j];
            }
        }
        let mut wk = [rule.weights()[left]; 2];
        for k in 0..=n {
            let nk = &mut n_stack[k];
            let sk = &mut s_stack[k];
            for i in 0..dim {
                let wh = [wk[0] * hv[0][i], wk[1] * hv[1][i]];
                a[(k, i)] += wh[0] + wh[1];
                for j in 0..dim {
                    nk[(i, j)] += wh[0] * hv[0][j] + wh[1] * hv[1][j];
                    sk[(i, j)] += wh[0] * pv[0][j] + wh[1] * pv[1][j];
                }
            }
            wk[0] *= x[0];
            wk[1] *= x[1];
        }
    }
    // the product h_i h_j is symmetric; make N(k) symmetric to the last bit
    for nk in &mut n_stack {
        for i in 0..dim {
            for j in 0..i {
                let v = 0.5 * (nk[(i, j)] + nk[(j, i)]);
                nk[(i, j)] = v;
                nk[(j, i)] = v;
            }
        }
    }
    MomentTables {
        basis,
        a,
        n_stack,
        s_stack,
        cond_a: f64::NAN,
    }
}
