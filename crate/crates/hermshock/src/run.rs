//! Subcommand bodies.

use std::fs;
use std::path::Path;

use hermshock_core::hermite::{assemble_moment_tables, BasisSpec, CoeffVec, MomentTables};
use hermshock_core::laurent::LaurentSeries;
use hermshock_core::models::{
    profile_eval, solve_elasticity1, solve_elasticity2, solve_hopf_shock, solve_hopf_soliton,
    ElasticityParams, ElasticityProfile, ElasticitySystem, Profile, ShockAnsatz, SolitonAnsatz,
    COND_WARN, MASS_TOL,
};
use hermshock_core::residual::{
    elasticity_deficits, pair_with_test_function, shock_deficits, soliton_deficits,
    DeficitSequence, TestFunction,
};
use hermshock_core::{Error, FixedPointOptions, NewtonOptions, SolveReport};
use serde::{Deserialize, Serialize};

use crate::config::{parse_list, GridConfig, Kind, RunConfig, VerifyFlags};
use crate::output;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Core(Error),
    BelowOrder { achieved: i64, p_min: i64 },
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Io(_) => 3,
            Failure::BelowOrder { .. } => 2,
            Failure::Core(e) => match e {
                Error::NotConverged(_) => 2,
                Error::InvalidInput(_) | Error::DegenerateParameters(_) => 3,
                _ => 4,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "invalid configuration: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::BelowOrder { achieved, p_min } => {
                write!(f, "achieved order {achieved} is below the required {p_min}")
            }
            Failure::Io(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

/// Jump constants of the solved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum Jumps {
    Soliton { l0: f64, dl: f64 },
    Shock { h0: f64, dh: f64 },
    Elasticity(ElasticityParams),
}

/// What a solve subcommand writes, and what `verify` reads back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub config: RunConfig,
    pub basis: BasisSpec,
    pub coefficients: Vec<f64>,
    pub velocity: f64,
    pub jumps: Jumps,
    pub achieved_order: i64,
    pub deficits: Vec<DeficitSequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_diagnostic: Option<Vec<f64>>,
    pub solver: SolveReport,
    /// Absent when the basis has no square soliton system.
    pub cond_a: Option<f64>,
    pub warnings: Vec<String>,
}

/// Moment order needed by both the solve and the residual.
fn table_order(cfg: &RunConfig, basis: BasisSpec) -> Result<usize, Failure> {
    let rows = match cfg.command {
        Kind::Soliton => basis.soliton_rows()?,
        Kind::Matrices => vec![0],
        _ => basis.shock_rows()?,
    };
    Ok(rows.into_iter().max().unwrap_or(0).max(cfg.k_max))
}

fn tables_for(cfg: &RunConfig) -> Result<(BasisSpec, MomentTables), Failure> {
    let basis = BasisSpec::new(cfg.n, cfg.parity)?;
    let order = table_order(cfg, basis)?;
    Ok((basis, assemble_moment_tables(basis, order)?))
}

fn finite_or_none(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn newton_opts(cfg: &RunConfig) -> NewtonOptions {
    NewtonOptions {
        tol: cfg.tol.expect("resolved"),
        max_iter: cfg.max_iter.expect("resolved"),
        damping: cfg.damping.expect("resolved"),
    }
}

/// Deficits of a stored or fresh solution; the same path serves both so the
/// achieved order round-trips exactly.
struct Evaluated {
    deficits: Vec<DeficitSequence>,
    diagnostic: Option<Vec<f64>>,
}

impl Evaluated {
    fn achieved_order(&self) -> i64 {
        self.deficits
            .iter()
            .map(|d| d.achieved_order)
            .min()
            .unwrap_or(0)
    }
}

fn evaluate(
    cfg: &RunConfig,
    tables: &MomentTables,
    coefficients: &CoeffVec,
    velocity: f64,
    jumps: &Jumps,
    solver: &SolveReport,
) -> Result<Evaluated, Failure> {
    let k = cfg.k_max;
    Ok(match jumps {
        Jumps::Soliton { l0, dl } => {
            let s = SolitonAnsatz {
                l0: *l0,
                dl: *dl,
                c: velocity,
                phi: coefficients.clone(),
                report: solver.clone(),
                cond_a: tables.cond_a,
                ill_conditioned: tables.cond_a > COND_WARN,
            };
            Evaluated {
                deficits: vec![soliton_deficits(&s, tables, k)?],
                diagnostic: None,
            }
        }
        Jumps::Shock { h0, dh } => {
            let s = ShockAnsatz {
                h0: *h0,
                dh: *dh,
                a: velocity,
                theta: coefficients.clone(),
                report: solver.clone(),
            };
            Evaluated {
                deficits: vec![shock_deficits(&s, tables, k)?],
                diagnostic: None,
            }
        }
        Jumps::Elasticity(p) => {
            let e = elasticity_deficits(p, coefficients, tables, k)?;
            Evaluated {
                deficits: e.equations,
                diagnostic: e.diagnostic,
            }
        }
    })
}

fn sample(cfg: &RunConfig, profile: &dyn Profile) -> Result<(), Failure> {
    let (Some(path), Some(grid)) = (&cfg.profile, cfg.grid) else {
        return Ok(());
    };
    let GridConfig { eps, t, .. } = grid;
    let table = profile_eval(profile, &grid.points(), t, eps)?;
    output::write_profile_csv(path, &table)
}

pub fn solve(cfg: &RunConfig) -> Result<(), Failure> {
    let (basis, tables) = tables_for(cfg)?;
    let seed = cfg.seed.clone().expect("resolved");
    let mut warnings = Vec::new();
    let (coefficients, velocity, jumps, solver) = match cfg.command {
        Kind::Soliton => {
            let opts = FixedPointOptions {
                tol: cfg.tol.expect("resolved"),
                max_iter: cfg.max_iter.expect("resolved"),
            };
            let s = solve_hopf_soliton(
                &tables,
                cfg.l0.expect("resolved"),
                cfg.dl.expect("resolved"),
                &seed,
                &opts,
            )?;
            if s.ill_conditioned {
                warnings.push(format!(
                    "moment matrix condition number {:.3e} exceeds {COND_WARN:e}; coefficients may be inaccurate",
                    s.cond_a
                ));
            }
            sample(cfg, &s)?;
            let jumps = Jumps::Soliton { l0: s.l0, dl: s.dl };
            (s.phi, s.c, jumps, s.report)
        }
        Kind::Shock => {
            let s = solve_hopf_shock(
                &tables,
                cfg.h0.expect("resolved"),
                cfg.dh.expect("resolved"),
                &seed,
                &newton_opts(cfg),
            )?;
            sample(cfg, &s)?;
            let jumps = Jumps::Shock { h0: s.h0, dh: s.dh };
            (s.theta, s.a, jumps, s.report)
        }
        Kind::Elast1 | Kind::Elast2 => {
            let (p, shock) = if cfg.command == Kind::Elast1 {
                solve_elasticity1(
                    &tables,
                    cfg.u0.expect("resolved"),
                    cfg.du.expect("resolved"),
                    cfg.sigma0.expect("resolved"),
                    cfg.k2.expect("resolved"),
                    cfg.branch.expect("resolved"),
                    &seed,
                    &newton_opts(cfg),
                )?
            } else {
                solve_elasticity2(
                    &tables,
                    cfg.u0.expect("resolved"),
                    cfg.du.expect("resolved"),
                    cfg.rho0.expect("resolved"),
                    cfg.sigma0.expect("resolved"),
                    cfg.k2.expect("resolved"),
                    cfg.branch.expect("resolved"),
                    &seed,
                    &newton_opts(cfg),
                )?
            };
            sample(
                cfg,
                &ElasticityProfile {
                    params: &p,
                    theta: &shock.theta,
                },
            )?;
            let v = p.v;
            (shock.theta, v, Jumps::Elasticity(p), shock.report)
        }
        Kind::Matrices => unreachable!("matrices is not a solve"),
    };
    let ev = evaluate(cfg, &tables, &coefficients, velocity, &jumps, &solver)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let record = SolutionRecord {
        config: cfg.clone(),
        basis,
        coefficients: coefficients.c,
        velocity,
        jumps,
        achieved_order: ev.achieved_order(),
        deficits: ev.deficits.clone(),
        momentum_diagnostic: ev.diagnostic,
        solver,
        cond_a: finite_or_none(tables.cond_a),
        warnings,
    };
    if let Some(path) = &cfg.deficits {
        output::write_deficits_csv(path, &ev.deficits)?;
    }
    output::emit_json(cfg.out.as_deref(), &record)
}

#[derive(Debug, Serialize)]
struct MatrixChecks {
    n0_identity_max: f64,
    n_symmetry_max: f64,
    s0_plus_s0t_minus_aat_max: f64,
    a_parity_zero_max: f64,
}

#[derive(Debug, Serialize)]
struct MatrixDump<'a> {
    config: &'a RunConfig,
    basis: BasisSpec,
    indices: Vec<usize>,
    cond_a: Option<f64>,
    a: Vec<Vec<f64>>,
    n: Vec<Vec<Vec<f64>>>,
    s: Vec<Vec<Vec<f64>>>,
    checks: MatrixChecks,
    warnings: Vec<String>,
}

pub fn matrices(cfg: &RunConfig) -> Result<(), Failure> {
    let (basis, t) = tables_for(cfg)?;
    let idx = basis.indices();
    let dim = idx.len();
    let mut checks = MatrixChecks {
        n0_identity_max: 0.0,
        n_symmetry_max: 0.0,
        s0_plus_s0t_minus_aat_max: 0.0,
        a_parity_zero_max: 0.0,
    };
    for k in 0..=t.max_order() {
        let n = &t.n_stack[k];
        for i in 0..dim {
            for j in 0..dim {
                if k == 0 {
                    let id = if i == j { 1.0 } else { 0.0 };
                    checks.n0_identity_max = checks.n0_identity_max.max((n[(i, j)] - id).abs());
                }
                checks.n_symmetry_max = checks.n_symmetry_max.max((n[(i, j)] - n[(j, i)]).abs());
            }
        }
        for (col, &j) in idx.iter().enumerate() {
            if (k + j) % 2 == 1 {
                checks.a_parity_zero_max = checks.a_parity_zero_max.max(t.a[(k, col)].abs());
            }
        }
    }
    let s0 = &t.s_stack[0];
    for i in 0..dim {
        for j in 0..dim {
            let d = s0[(i, j)] + s0[(j, i)] - t.a[(0, i)] * t.a[(0, j)];
            checks.s0_plus_s0t_minus_aat_max = checks.s0_plus_s0t_minus_aat_max.max(d.abs());
        }
    }
    let mut warnings = Vec::new();
    if t.cond_a > COND_WARN && t.cond_a.is_finite() {
        let w = format!(
            "moment matrix condition number {:.3e} exceeds {COND_WARN:e}",
            t.cond_a
        );
        eprintln!("warning: {w}");
        warnings.push(w);
    }
    let dump = MatrixDump {
        config: cfg,
        basis,
        indices: idx,
        cond_a: finite_or_none(t.cond_a),
        a: t.a.to_rows(),
        n: t.n_stack.iter().map(|m| m.to_rows()).collect(),
        s: t.s_stack.iter().map(|m| m.to_rows()).collect(),
        checks,
        warnings,
    };
    output::emit_json(cfg.out.as_deref(), &dump)
}

#[derive(Debug, Serialize)]
struct PairedEquation {
    deficits: DeficitSequence,
    series: LaurentSeries,
    /// Lowest `ε` power with a nonzero coefficient for this test function;
    /// null when every known coefficient vanishes.
    valuation: Option<i64>,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    solution: String,
    stored_achieved_order: i64,
    achieved_order: i64,
    p_min: i64,
    passed: bool,
    test_function: TestFunction,
    equations: Vec<PairedEquation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    momentum_diagnostic: Option<Vec<f64>>,
}

fn malformed(path: &Path, msg: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("solution file {}: {msg}", path.display()))
}

pub fn verify(flags: &VerifyFlags) -> Result<(), Failure> {
    let path = &flags.solution;
    let text = fs::read_to_string(path).map_err(|e| malformed(path, e))?;
    let rec: SolutionRecord = serde_json::from_str(&text).map_err(|e| malformed(path, e))?;
    let cfg = &rec.config;
    if !matches!(
        cfg.command,
        Kind::Soliton | Kind::Shock | Kind::Elast1 | Kind::Elast2
    ) {
        return Err(malformed(path, "not a solution record"));
    }
    let basis = BasisSpec::new(cfg.n, cfg.parity)?;
    if basis != rec.basis {
        return Err(malformed(path, "basis disagrees with its config"));
    }
    let consistent = match (&rec.jumps, cfg.command) {
        (Jumps::Soliton { .. }, Kind::Soliton) | (Jumps::Shock { .. }, Kind::Shock) => true,
        (Jumps::Elasticity(p), Kind::Elast1) => p.system == ElasticitySystem::One,
        (Jumps::Elasticity(p), Kind::Elast2) => p.system == ElasticitySystem::Two,
        _ => false,
    };
    if !consistent {
        return Err(malformed(path, "jump constants do not match the command"));
    }
    let coeffs = CoeffVec::new(basis, rec.coefficients.clone()).map_err(|e| malformed(path, e))?;
    if !rec.velocity.is_finite() {
        return Err(malformed(path, "velocity is not finite"));
    }
    let (_, tables) = tables_for(cfg)?;
    match rec.jumps {
        Jumps::Soliton { .. } => {
            if coeffs.norm_sq() == 0.0 {
                return Err(malformed(path, "soliton coefficients are all zero"));
            }
        }
        _ => {
            let mass = tables.mass_moment(0, &coeffs.c);
            if (mass - 1.0).abs().is_nan() || (mass - 1.0).abs() > MASS_TOL {
                return Err(malformed(
                    path,
                    format!("shock density has mass {mass:e}, not 1"),
                ));
            }
        }
    }

    let ev = evaluate(cfg, &tables, &coeffs, rec.velocity, &rec.jumps, &rec.solver)?;
    let psi_c = parse_list(&flags.psi, "psi")?;
    if !flags.psi_center.is_finite() {
        return Err(Failure::Config("psi_center must be finite".into()));
    }
    let psi = TestFunction {
        d: CoeffVec::new(BasisSpec::all(psi_c.len() - 1), psi_c)?,
        center: flags.psi_center,
    };
    let equations = ev
        .deficits
        .iter()
        .map(|d| {
            let series = pair_with_test_function(d, &psi, i64::MAX);
            PairedEquation {
                deficits: d.clone(),
                valuation: series.valuation().finite(),
                series,
            }
        })
        .collect();
    let achieved = ev.achieved_order();
    let report = VerifyReport {
        solution: path.display().to_string(),
        stored_achieved_order: rec.achieved_order,
        achieved_order: achieved,
        p_min: flags.p_min,
        passed: achieved >= flags.p_min,
        test_function: psi,
        equations,
        momentum_diagnostic: ev.diagnostic,
    };
    if achieved != rec.achieved_order {
        eprintln!(
            "warning: recomputed order {achieved} differs from the stored {}",
            rec.achieved_order
        );
    }
    if let Some(p) = &flags.deficits {
        output::write_deficits_csv(p, &ev.deficits)?;
    }
    output::emit_json(flags.out.as_deref(), &report)?;
    if achieved < flags.p_min {
        return Err(Failure::BelowOrder {
            achieved,
            p_min: flags.p_min,
        });
    }
    Ok(())
}
