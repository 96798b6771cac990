//! Flag parsing, config files and resolution into a [`RunConfig`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hermshock_core::hermite::Parity;
use hermshock_core::models::{uniform_grid, Branch, SeedPreset};
use serde::{Deserialize, Serialize};

use crate::run::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "hermshock",
    version,
    about = "Hermite moment profiles of narrow solitons and smooth shocks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Soliton of the Hopf equation.
    #[command(allow_negative_numbers = true)]
    Soliton(Flags),
    /// Smooth shock of the Hopf equation.
    #[command(allow_negative_numbers = true)]
    Shock(Flags),
    /// Shock of the elasticity system without density.
    #[command(allow_negative_numbers = true)]
    Elast1(Flags),
    /// Shock of the elasticity system with density.
    #[command(allow_negative_numbers = true)]
    Elast2(Flags),
    /// Dump the moment tables and their identity checks.
    #[command(allow_negative_numbers = true)]
    Matrices(Flags),
    /// Recompute the residual of a stored solution.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyFlags),
}

macro_rules! flags {
    ($( $(#[doc = $doc:expr])* $name:ident : $ty:ty ),* $(,)?) => {
        /// Every value is optional; a flag beats the same key in `--config`,
        /// which beats the built-in default.
        #[derive(Debug, Default, Clone, Args, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct Flags {
            /// Flat JSON object whose keys are the flag names below, with
            /// underscores for dashes.
            #[arg(long)]
            #[serde(skip)]
            pub config: Option<PathBuf>,
            $(
                $(#[doc = $doc])*
                #[arg(long)]
                pub $name: Option<$ty>,
            )*
        }

        impl Flags {
            fn or(self, other: Self) -> Self {
                Self {
                    config: self.config,
                    $( $name: self.$name.or(other.$name), )*
                }
            }

            fn given(&self) -> Vec<&'static str> {
                let mut v = Vec::new();
                $( if self.$name.is_some() { v.push(stringify!($name)); } )*
                v
            }
        }
    };
}

flags! {
    /// Highest Hermite index.
    n: usize,
    /// Basis parity: even, all or odd.
    parity: String,
    /// Soliton background level.
    l0: f64,
    /// Soliton amplitude.
    dl: f64,
    /// Shock left state.
    h0: f64,
    /// Shock jump.
    dh: f64,
    /// Elasticity background velocity.
    u0: f64,
    /// Elasticity velocity jump.
    du: f64,
    /// Elasticity background density.
    rho0: f64,
    /// Elasticity background stress.
    sigma0: f64,
    /// Elasticity modulus k².
    k2: f64,
    /// Root of the jump relation: plus or minus.
    branch: String,
    /// Initial guess: gaussian, K, K1 or comma-separated coefficients.
    seed: String,
    /// Solver tolerance.
    tol: f64,
    /// Solver iteration budget.
    max_iter: usize,
    /// Initial Newton step fraction in (0, 1].
    damping: f64,
    /// Highest moment order of the residual deficits.
    k_max: usize,
    /// Scale of the profile.
    eps: f64,
    /// Time at which the profile is sampled.
    t: f64,
    /// Left end of the profile grid.
    grid_min: f64,
    /// Right end of the profile grid.
    grid_max: f64,
    /// Number of profile grid points.
    grid_count: usize,
    /// Solution JSON path; standard output when absent.
    out: PathBuf,
    /// Profile CSV path.
    profile: PathBuf,
    /// Deficit table CSV path.
    deficits: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyFlags {
    /// Solution JSON written by a solve subcommand.
    pub solution: PathBuf,
    /// Lowest acceptable achieved order.
    #[arg(long, default_value_t = 1)]
    pub p_min: i64,
    /// Hermite coefficients of the test function.
    #[arg(long, default_value = "1,0.5")]
    pub psi: String,
    /// Point about which the test function is expanded.
    #[arg(long, default_value_t = 0.0)]
    pub psi_center: f64,
    /// Report JSON path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Deficit table CSV path.
    #[arg(long)]
    pub deficits: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Soliton,
    Shock,
    Elast1,
    Elast2,
    Matrices,
}

impl Kind {
    fn name(self) -> &'static str {
        match self {
            Kind::Soliton => "soliton",
            Kind::Shock => "shock",
            Kind::Elast1 => "elast1",
            Kind::Elast2 => "elast2",
            Kind::Matrices => "matrices",
        }
    }

    fn accepts(self) -> Vec<&'static str> {
        let mut keys = vec!["n", "parity", "k_max", "out"];
        if self == Kind::Matrices {
            return keys;
        }
        keys.extend([
            "seed",
            "tol",
            "max_iter",
            "eps",
            "t",
            "grid_min",
            "grid_max",
            "grid_count",
            "profile",
            "deficits",
        ]);
        match self {
            Kind::Soliton => keys.extend(["l0", "dl"]),
            Kind::Shock => keys.extend(["h0", "dh", "damping"]),
            Kind::Elast1 => keys.extend(["u0", "du", "sigma0", "k2", "branch", "damping"]),
            Kind::Elast2 => keys.extend(["u0", "du", "rho0", "sigma0", "k2", "branch", "damping"]),
            Kind::Matrices => {}
        }
        keys
    }
}

/// Fully resolved run parameters, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Kind,
    pub n: usize,
    pub parity: Parity,
    pub k_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dh: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub du: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedPreset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deficits: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub eps: f64,
    pub t: f64,
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        uniform_grid(self.min, self.max, self.count).expect("validated grid")
    }
}

/// Largest basis index accepted on the command line.
const MAX_N: usize = 60;
const MAX_GRID_POINTS: usize = 10_000_000;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn read_config_file(path: &Path) -> Result<Flags, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
}

pub fn parse_parity(s: &str) -> Result<Parity, Failure> {
    match s {
        "even" => Ok(Parity::Even),
        "all" => Ok(Parity::All),
        "odd" => Ok(Parity::Odd),
        other => Err(invalid(format!(
            "unknown parity {other:?} (expected even, all or odd)"
        ))),
    }
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| invalid(format!("{what}: {v:?} is not a finite number")))
        })
        .collect()
}

fn parse_seed(s: &str) -> Result<SeedPreset, Failure> {
    match SeedPreset::parse(s) {
        Ok(p) => Ok(p),
        Err(_) if s.contains(',') || s.trim().parse::<f64>().is_ok() => {
            Ok(SeedPreset::Explicit(parse_list(s, "seed")?))
        }
        Err(e) => Err(invalid(e.to_string())),
    }
}

fn finite(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be finite")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Applies precedence, fills defaults and validates.
pub fn resolve(kind: Kind, flags: Flags) -> Result<RunConfig, Failure> {
    let accepted = kind.accepts();
    if let Some(bad) = flags.given().into_iter().find(|k| !accepted.contains(k)) {
        return Err(invalid(format!(
            "--{} does not apply to {}",
            bad.replace('_', "-"),
            kind.name()
        )));
    }
    let file = match &flags.config {
        Some(p) => read_config_file(p)?,
        None => Flags::default(),
    };
    let f = flags.or(file);

    let n = f.n.unwrap_or(match kind {
        Kind::Elast1 | Kind::Elast2 => 12,
        _ => 4,
    });
    if n > MAX_N {
        return Err(invalid(format!(
            "n = {n} exceeds the supported maximum {MAX_N}"
        )));
    }
    let parity = parse_parity(f.parity.as_deref().unwrap_or("even"))?;
    let k_max = f.k_max.unwrap_or(n + 4);
    if k_max > 2 * MAX_N {
        return Err(invalid(format!("k_max = {k_max} exceeds {}", 2 * MAX_N)));
    }
    let take = |key: &str, v: Option<f64>, default: f64| -> Result<Option<f64>, Failure> {
        if accepted.contains(&key) {
            finite(key, v.unwrap_or(default)).map(Some)
        } else {
            Ok(None)
        }
    };

    let mut cfg = RunConfig {
        command: kind,
        n,
        parity,
        k_max,
        l0: take("l0", f.l0, 0.0)?,
        dl: take("dl", f.dl, 1.0)?,
        h0: take("h0", f.h0, 0.0)?,
        dh: take("dh", f.dh, 1.0)?,
        u0: take("u0", f.u0, 1.0)?,
        du: take("du", f.du, -1.0)?,
        rho0: take("rho0", f.rho0, 1.1)?,
        sigma0: take("sigma0", f.sigma0, 0.5)?,
        k2: take("k2", f.k2, 0.1)?,
        branch: None,
        seed: None,
        tol: None,
        max_iter: None,
        damping: None,
        grid: None,
        out: f.out,
        profile: None,
        deficits: None,
    };
    if kind == Kind::Matrices {
        return Ok(cfg);
    }

    if accepted.contains(&"branch") {
        let b = f.branch.as_deref().unwrap_or("plus");
        cfg.branch = Some(Branch::parse(b).map_err(|e| invalid(e.to_string()))?);
    }
    cfg.seed = Some(match f.seed.as_deref() {
        Some(s) => parse_seed(s)?,
        None if kind == Kind::Soliton => SeedPreset::Gaussian,
        None => SeedPreset::K,
    });
    cfg.tol = Some(positive("tol", f.tol.unwrap_or(1e-12))?);
    let max_iter = f
        .max_iter
        .unwrap_or(if kind == Kind::Soliton { 10_000 } else { 200 });
    if max_iter == 0 {
        return Err(invalid("max_iter must be at least 1"));
    }
    cfg.max_iter = Some(max_iter);
    if accepted.contains(&"damping") {
        let d = f.damping.unwrap_or(1.0);
        if !(d > 0.0 && d <= 1.0) {
            return Err(invalid(format!("damping must lie in (0, 1], got {d}")));
        }
        cfg.damping = Some(d);
    }
    let grid = GridConfig {
        min: finite("grid_min", f.grid_min.unwrap_or(-8.0))?,
        max: finite("grid_max", f.grid_max.unwrap_or(8.0))?,
        count: f.grid_count.unwrap_or(801),
        eps: positive("eps", f.eps.unwrap_or(1.0))?,
        t: finite("t", f.t.unwrap_or(0.0))?,
    };
    if grid.count > MAX_GRID_POINTS {
        return Err(invalid(format!("grid_count exceeds {MAX_GRID_POINTS}")));
    }
    uniform_grid(grid.min, grid.max, grid.count).map_err(|e| invalid(e.to_string()))?;
    cfg.grid = Some(grid);
    cfg.profile = f.profile;
    cfg.deficits = f.deficits;
    Ok(cfg)
}
