//! Composite Gauss–Legendre panel quadrature on a truncated real line.
//!
//! Every integrand handled here carries a Gaussian envelope, so the real line
//! is cut to `[-L, L]` and split into equal panels with a fixed 20-point rule.
//! The node layout depends only on `L` and the panel width, which keeps every
//! sum in the same order and the results bit-reproducible.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hermite;

pub const GAUSS_POINTS: usize = 20;
pub const PANEL_WIDTH: f64 = 0.5;

/// Half-width of the integration window for Hermite indices up to `n_max`.
///
/// Beyond the turning point `√(2n)` a Hermite function decays like a
/// Gaussian, so ten units past it everything is far below double precision.
pub fn domain_half_width(n_max: usize) -> f64 {
    libm::fmax(12.0, libm::sqrt(2.0 * n_max as f64) + 10.0)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = -libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    // symmetrize so odd integrands cancel exactly
    for i in 0..n / 2 {
        let (a, wa) = out[i];
        let (b, wb) = out[n - 1 - i];
        let x = 0.5 * (b - a);
        let w = 0.5 * (wa + wb);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    if n % 2 == 1 {
        out[n / 2].0 = 0.0;
    }
    out
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A fixed set of nodes and weights covering `[-L, L]`.
#[derive(Debug, Clone)]
pub struct PanelRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    half_width: f64,
}

impl PanelRule {
    pub fn new(half_width: f64, panel_width: f64) -> Self {
        let panels = libm::ceil(2.0 * half_width / panel_width) as usize;
        let half_width = panels as f64 * panel_width / 2.0;
        let base = gauss_legendre(GAUSS_POINTS);
        let mut nodes = Vec::with_capacity(panels * GAUSS_POINTS);
        let mut weights = Vec::with_capacity(panels * GAUSS_POINTS);
        let h = panel_width / 2.0;
        for p in 0..panels {
            // integer offsets keep the layout mirror-symmetric to the last bit
            let mid = ((2 * p + 1) as f64 - panels as f64) * h;
            for &(t, w) in &base {
                nodes.push(mid + h * t);
                weights.push(h * w);
            }
        }
        Self {
            nodes,
            weights,
            half_width,
        }
    }

    /// Default layout for Hermite indices up to `n_max`.
    pub fn for_hermite(n_max: usize) -> Self {
        Self::new(domain_half_width(n_max), PANEL_WIDTH)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node mirroring node `i`.
    pub fn mirror(&self, i: usize) -> usize {
        self.nodes.len() - 1 - i
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// A product `x^power · Π h_i(x) · Π P_j(x)` of monomial, Hermite functions
/// and their antiderivatives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Integrand {
    pub power: u32,
    pub hermite: Vec<usize>,
    pub antideriv: Vec<usize>,
}

impl Integrand {
    pub fn eval(&self, x: f64) -> f64 {
        let mut v = libm::pow(x, self.power as f64);
        for &j in &self.hermite {
            v *= hermite::hermite_eval(j, x);
        }
        for &j in &self.antideriv {
            v *= hermite::hermite_antideriv(j, x);
        }
        v
    }

    fn max_index(&self) -> usize {
        self.hermite
            .iter()
            .chain(&self.antideriv)
            .copied()
            .max()
            .unwrap_or(0)
            .max(self.power as usize / 2)
    }
}

/// Integrates a Hermite-product integrand over the real line.
///
/// The value on the default panel layout is compared with one on panels
/// twice as wide; a disagreement above `tol` is reported as a failure.
pub fn quadrature_integral(f: &Integrand, tol: f64) -> Result<f64> {
    if f.hermite.is_empty() {
        return Err(Error::InvalidInput(
            "integrand needs at least one Hermite factor to decay".into(),
        ));
    }
    let l = domain_half_width(f.max_index());
    let fine = PanelRule::new(l, PANEL_WIDTH).integrate(|x| f.eval(x));
    let coarse = PanelRule::new(l, 2.0 * PANEL_WIDTH).integrate(|x| f.eval(x));
    let estimate = (fine - coarse).abs();
    if !(estimate <= tol) {
        return Err(Error::QuadratureTolerance { tol, estimate });
    }
    Ok(fine)
}
