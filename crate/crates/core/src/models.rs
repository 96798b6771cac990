//! The four physical problems: Hopf soliton, Hopf shock and the two
//! elasticity systems.
//!
//! Every shock shares the same normalized density `θ`; the elasticity models
//! only differ in how the jump constants and the shock speed are fixed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hermite::{hermite_values, BasisSpec, CoeffVec, MomentTables, Parity};
use crate::quadrature::{domain_half_width, PanelRule, PANEL_WIDTH};
use crate::solvers::{self, FixedPointOptions, NewtonOptions, SolveReport};

/// Above this the soliton matrix is flagged as nearly singular.
pub const COND_WARN: f64 = 1e12;
/// Above this the soliton solve is refused.
pub const COND_LIMIT: f64 = 1e16;
/// Admissible distance of a shock density's mass from one.
pub const MASS_TOL: f64 = 1e-8;
/// L² error allowed when re-expanding a translated profile.
pub const TRANSLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SeedPreset {
    /// `e_0`, a plain Gaussian.
    Gaussian,
    /// `0.8 h_0 - 0.5 h_2 + 0.2 h_4`, attracted to the first shock branch.
    K,
    /// `e_0` on a basis carrying odd indices, attracted to the second
    /// shock branch.
    K1,
    Explicit(Vec<f64>),
}

impl SeedPreset {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::Gaussian),
            "K" | "k" => Ok(Self::K),
            "K1" | "k1" => Ok(Self::K1),
            other => Err(Error::InvalidInput(format!(
                "unknown seed preset {other:?} (expected gaussian, K or K1)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::K => "K",
            Self::K1 => "K1",
            Self::Explicit(_) => "explicit",
        }
    }

    /// Initial guess over `basis`.
    pub fn resolve(&self, basis: BasisSpec) -> Result<Vec<f64>> {
        let mut x = vec![0.0; basis.dim()];
        let mut place = |j: usize, v: f64| -> Result<()> {
            let p = basis.position(j).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "seed {} needs h_{j}, which the basis lacks",
                    self.name()
                ))
            })?;
            x[p] = v;
            Ok(())
        };
        match self {
            Self::Gaussian => place(0, 1.0)?,
            Self::K => {
                place(0, 0.8)?;
                place(2, -0.5)?;
                place(4, 0.2)?;
            }
            Self::K1 => {
                if basis.parity != Parity::All {
                    return Err(Error::InvalidInput(
                        "seed K1 needs a basis with all parities".into(),
                    ));
                }
                place(0, 1.0)?;
            }
            Self::Explicit(v) => {
                if v.len() != basis.dim() {
                    return Err(Error::InvalidInput(format!(
                        "explicit seed has {} entries, basis has {}",
                        v.len(),
                        basis.dim()
                    )));
                }
                x.copy_from_slice(v);
            }
        }
        Ok(x)
    }
}

/// `l0 + dl · φ((x - c t)/ε)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolitonAnsatz {
    pub l0: f64,
    pub dl: f64,
    pub c: f64,
    pub phi: CoeffVec,
    pub report: SolveReport,
    pub cond_a: f64,
    /// Set when `cond_a` exceeds [`COND_WARN`].
    pub ill_conditioned: bool,
}

/// `h0 + dh · K((x - a t)/ε)` with `K' = θ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShockAnsatz {
    pub h0: f64,
    pub dh: f64,
    pub a: f64,
    pub theta: CoeffVec,
    pub report: SolveReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Self::Plus),
            "minus" | "-" => Ok(Self::Minus),
            other => Err(Error::InvalidInput(format!(
                "unknown branch {other:?} (expected plus or minus)"
            ))),
        }
    }

    fn sign(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ElasticitySystem {
    /// Momentum balance and Hooke law.
    One,
    /// Mass, momentum and Hooke law.
    Two,
}

/// Background values, jumps and speed of an elasticity shock.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ElasticityParams {
    pub system: ElasticitySystem,
    pub u0: f64,
    pub du: f64,
    pub rho0: Option<f64>,
    pub drho: Option<f64>,
    pub sigma0: f64,
    pub dsigma: f64,
    pub k2: f64,
    pub v: f64,
    pub branch: Branch,
}

impl ElasticityParams {
    /// Jump constants of system one.
    pub fn system_one(u0: f64, du: f64, sigma0: f64, k2: f64, branch: Branch) -> Result<Self> {
        check_finite(&[u0, du, sigma0, k2])?;
        if du == 0.0 {
            return Err(Error::DegenerateParameters(
                "the velocity jump du must be nonzero".into(),
            ));
        }
        if !(k2 > 0.0) {
            return Err(Error::DegenerateParameters("k2 must be positive".into()));
        }
        let b = u0 + 0.5 * du;
        let dsigma = 0.5 * (b * du + branch.sign() * du.abs() * libm::sqrt(b * b + 4.0 * k2));
        let v = 2.0 * u0 + du - dsigma / du;
        Ok(Self {
            system: ElasticitySystem::One,
            u0,
            du,
            rho0: None,
            drho: None,
            sigma0,
            dsigma,
            k2,
            v,
            branch,
        })
    }

    /// Jump constants of system two.
    pub fn system_two(
        u0: f64,
        du: f64,
        rho0: f64,
        sigma0: f64,
        k2: f64,
        branch: Branch,
    ) -> Result<Self> {
        check_finite(&[u0, du, rho0, sigma0, k2])?;
        if du == 0.0 {
            return Err(Error::DegenerateParameters(
                "the velocity jump du must be nonzero".into(),
            ));
        }
        if !(rho0 > 0.0) {
            return Err(Error::DegenerateParameters("rho0 must be positive".into()));
        }
        if !(k2 > 0.0) {
            return Err(Error::DegenerateParameters("k2 must be positive".into()));
        }
        let du2 = du * du;
        let denom = rho0 * du2 - 2.0 * k2;
        if denom.abs() <= 1e-14 * (rho0 * du2).max(2.0 * k2) {
            return Err(Error::DegenerateParameters(
                "rho0 du^2 = 2 k2 leaves the density jump undetermined".into(),
            ));
        }
        let r3 = rho0 * rho0 * rho0;
        let disc = r3 * rho0 * du2 * du2 / 4.0 + 4.0 * k2 * du2 * r3;
        if disc < 0.0 {
            return Err(Error::DegenerateParameters("complex density jump".into()));
        }
        let drho = (-1.5 * rho0 * rho0 * du2 + branch.sign() * libm::sqrt(disc)) / denom;
        if drho == 0.0 {
            return Err(Error::DegenerateParameters("zero density jump".into()));
        }
        let tot = 2.0 * rho0 + drho;
        if tot.abs() <= 1e-14 * rho0 {
            return Err(Error::DegenerateParameters(
                "2 rho0 + drho vanishes, stress jump undefined".into(),
            ));
        }
        let dsigma = -2.0 * k2 * drho / tot;
        let v = u0 + du + rho0 * du / drho;
        Ok(Self {
            system: ElasticitySystem::Two,
            u0,
            du,
            rho0: Some(rho0),
            drho: Some(drho),
            sigma0,
            dsigma,
            k2,
            v,
            branch,
        })
    }

    /// Residuals of the algebraic relations fixing the jumps: the stress
    /// quadratic for system one, the two density/stress constraints for
    /// system two.
    pub fn constraint_residuals(&self) -> Vec<f64> {
        let (u0, du, ds, k2) = (self.u0, self.du, self.dsigma, self.k2);
        match (self.system, self.rho0, self.drho) {
            (ElasticitySystem::Two, Some(r0), Some(dr)) => vec![
                r0 * du * du * (r0 + dr) + ds * dr,
                ds * (r0 + 0.5 * dr) + k2 * dr,
            ],
            _ => vec![ds * ds - (u0 + 0.5 * du) * du * ds - k2 * du * du],
        }
    }

    /// The speed recomputed from the stress jump, `u0 + du/2 - k2 du / dsigma`
    /// (system two only).
    pub fn velocity_from_stress(&self) -> Option<f64> {
        match self.system {
            ElasticitySystem::Two if self.dsigma != 0.0 => {
                Some(self.u0 + 0.5 * self.du - self.k2 * self.du / self.dsigma)
            }
            _ => None,
        }
    }
}

fn check_finite(v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("parameters must be finite".into()))
    }
}

pub fn solve_hopf_soliton(
    tables: &MomentTables,
    l0: f64,
    dl: f64,
    seed: &SeedPreset,
    opts: &FixedPointOptions,
) -> Result<SolitonAnsatz> {
    check_finite(&[l0, dl])?;
    if dl == 0.0 {
        return Err(Error::DegenerateParameters(
            "the soliton amplitude dl must be nonzero".into(),
        ));
    }
    let cond_a = tables.cond_a;
    if !(cond_a <= COND_LIMIT) {
        return Err(Error::IllConditioned {
            cond: cond_a,
            limit: COND_LIMIT,
        });
    }
    let x0 = seed.resolve(tables.basis)?;
    let report = solvers::fixed_point_solve(tables, &x0, opts)?;
    let phi = CoeffVec::new(tables.basis, report.x.clone())?;
    let c = l0 + dl * 0.5 * phi.norm_sq();
    Ok(SolitonAnsatz {
        l0,
        dl,
        c,
        phi,
        report,
        cond_a,
        ill_conditioned: cond_a > COND_WARN,
    })
}

/// Solves for the unit-mass density and rejects the zero-mass root.
fn shock_density(
    tables: &MomentTables,
    seed: &SeedPreset,
    opts: &NewtonOptions,
) -> Result<(CoeffVec, SolveReport)> {
    let x0 = seed.resolve(tables.basis)?;
    let report = solvers::newton_solve(tables, &x0, opts)?;
    let mass = tables.mass_moment(0, &report.x);
    if !((mass - 1.0).abs() <= MASS_TOL) {
        return Err(Error::SpuriousBranch { mass });
    }
    Ok((CoeffVec::new(tables.basis, report.x.clone())?, report))
}

pub fn solve_hopf_shock(
    tables: &MomentTables,
    h0: f64,
    dh: f64,
    seed: &SeedPreset,
    opts: &NewtonOptions,
) -> Result<ShockAnsatz> {
    check_finite(&[h0, dh])?;
    if dh == 0.0 {
        return Err(Error::DegenerateParameters(
            "the shock jump dh must be nonzero".into(),
        ));
    }
    let (theta, report) = shock_density(tables, seed, opts)?;
    Ok(ShockAnsatz {
        h0,
        dh,
        a: h0 + 0.5 * dh,
        theta,
        report,
    })
}

/// System one. The returned shock is the unit Hopf shock (`h0 = 0`,
/// `dh = 1`) whose density is shared by the velocity and stress fields.
#[allow(clippy::too_many_arguments)]
pub fn solve_elasticity1(
    tables: &MomentTables,
    u0: f64,
    du: f64,
    sigma0: f64,
    k2: f64,
    branch: Branch,
    seed: &SeedPreset,
    opts: &NewtonOptions,
) -> Result<(ElasticityParams, ShockAnsatz)> {
    let params = ElasticityParams::system_one(u0, du, sigma0, k2, branch)?;
    let shock = solve_hopf_shock(tables, 0.0, 1.0, seed, opts)?;
    Ok((params, shock))
}

/// System two; the density, velocity and stress fields share one density
/// as in [`solve_elasticity1`].
#[allow(clippy::too_many_arguments)]
pub fn solve_elasticity2(
    tables: &MomentTables,
    u0: f64,
    du: f64,
    rho0: f64,
    sigma0: f64,
    k2: f64,
    branch: Branch,
    seed: &SeedPreset,
    opts: &NewtonOptions,
) -> Result<(ElasticityParams, ShockAnsatz)> {
    let params = ElasticityParams::system_two(u0, du, rho0, sigma0, k2, branch)?;
    let shock = solve_hopf_shock(tables, 0.0, 1.0, seed, opts)?;
    Ok((params, shock))
}

/// Anything that can be sampled as a travelling wave.
pub trait Profile {
    /// Names of the physical fields, in column order.
    fn fields(&self) -> Vec<&'static str>;
    fn speed(&self) -> f64;
    /// Field values at the stretched coordinate `y = (x - speed·t)/ε`.
    fn sample(&self, y: f64) -> Vec<f64>;
}

impl Profile for SolitonAnsatz {
    fn fields(&self) -> Vec<&'static str> {
        vec!["v"]
    }

    fn speed(&self) -> f64 {
        self.c
    }

    fn sample(&self, y: f64) -> Vec<f64> {
        vec![self.l0 + self.dl * self.phi.eval(y)]
    }
}

impl Profile for ShockAnsatz {
    fn fields(&self) -> Vec<&'static str> {
        vec!["u"]
    }

    fn speed(&self) -> f64 {
        self.a
    }

    fn sample(&self, y: f64) -> Vec<f64> {
        vec![self.h0 + self.dh * self.theta.eval_antideriv(y)]
    }
}

/// An elasticity shock: jump constants plus the shared density.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticityProfile<'a> {
    pub params: &'a ElasticityParams,
    pub theta: &'a CoeffVec,
}

impl Profile for ElasticityProfile<'_> {
    fn fields(&self) -> Vec<&'static str> {
        match self.params.system {
            ElasticitySystem::One => vec!["u", "sigma"],
            ElasticitySystem::Two => vec!["u", "rho", "sigma"],
        }
    }

    fn speed(&self) -> f64 {
        self.params.v
    }

    fn sample(&self, y: f64) -> Vec<f64> {
        let k = self.theta.eval_antideriv(y);
        let p = self.params;
        let u = p.u0 + p.du * k;
        let s = p.sigma0 + p.dsigma * k;
        match (p.rho0, p.drho) {
            (Some(r0), Some(dr)) => vec![u, r0 + dr * k, s],
            _ => vec![u, s],
        }
    }
}

/// Sampled fields, one row per grid point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileTable {
    pub fields: Vec<String>,
    pub x: Vec<f64>,
    /// `values[i][f]` is field `f` at `x[i]`.
    pub values: Vec<Vec<f64>>,
}

pub fn profile_eval(p: &dyn Profile, grid: &[f64], t: f64, eps: f64) -> Result<ProfileTable> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    if !t.is_finite() || grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("grid and time must be finite".into()));
    }
    let c = p.speed();
    Ok(ProfileTable {
        fields: p.fields().into_iter().map(String::from).collect(),
        x: grid.to_vec(),
        values: grid.iter().map(|&x| p.sample((x - c * t) / eps)).collect(),
    })
}

/// `count` equally spaced points covering `[min, max]`.
pub fn uniform_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min < max) || !min.is_finite() || !max.is_finite() || count < 2 {
        return Err(Error::InvalidInput(
            "grid needs min < max and at least two points".into(),
        ));
    }
    let step = (max - min) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                max
            } else {
                min + step * i as f64
            }
        })
        .collect())
}

const TRANSLATION_PADDING: [usize; 5] = [8, 16, 32, 64, 128];
const MAX_TRANSLATED_INDEX: usize = 200;

/// Coefficients of `x ↦ φ(x + β)` over a full basis enlarged until the L²
/// re-expansion error falls below [`TRANSLATION_TOL`].
pub fn translate_profile(phi: &CoeffVec, beta: f64) -> Result<CoeffVec> {
    if !beta.is_finite() {
        return Err(Error::InvalidInput("shift must be finite".into()));
    }
    if beta == 0.0 {
        return Ok(phi.clone());
    }
    let mut error = f64::INFINITY;
    for pad in TRANSLATION_PADDING {
        let n = phi.basis.n_max + pad;
        if n > MAX_TRANSLATED_INDEX {
            break;
        }
        let basis = BasisSpec::all(n);
        let rule = PanelRule::new(domain_half_width(n) + beta.abs(), PANEL_WIDTH);
        let shifted: Vec<f64> = rule.nodes().iter().map(|&x| phi.eval(x + beta)).collect();
        let mut d = vec![0.0; n + 1];
        for ((&x, &w), &f) in rule.nodes().iter().zip(rule.weights()).zip(&shifted) {
            let h = hermite_values(n, x);
            for j in 0..=n {
                d[j] += w * f * h[j];
            }
        }
        let out = CoeffVec::new(basis, d)?;
        error = libm::sqrt(
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .zip(&shifted)
                .map(|((&x, &w), &f)| {
                    let r = f - out.eval(x);
                    w * r * r
                })
                .sum::<f64>(),
        );
        if error < TRANSLATION_TOL {
            return Ok(out);
        }
    }
    Err(Error::TruncationTooCoarse {
        error,
        tol: TRANSLATION_TOL,
    })
}
