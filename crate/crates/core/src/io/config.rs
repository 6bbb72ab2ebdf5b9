//! TOML run configuration with `--override key=value` support.
//!
//! Unknown keys anywhere in the document are rejected; a misspelled
//! tolerance must not fall back to its default silently.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretize::{Stencil, DEFAULT_CONDITION_CAP, MIN_CONFIG_POINTS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("override `{0}` is not of the form key=value")]
    OverrideSyntax(String),
    #[error("override `{key}`: {message}")]
    OverrideTarget { key: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Finite-difference shifted oscillator with the analytic oracle.
    #[default]
    FdOscillator,
    /// `H = ρ⁻¹hρ` from a random seed; pseudo-Hermitian to rounding.
    Algebraic,
    /// `H` and `η` read from matrix files.
    MatrixFiles,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FdOscillator => "fd-oscillator",
            Mode::Algebraic => "algebraic",
            Mode::MatrixFiles => "matrix-files",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_xmin")]
    pub xmin: f64,
    #[serde(default = "default_xmax")]
    pub xmax: f64,
    #[serde(default = "default_points")]
    pub n: usize,
    #[serde(default)]
    pub stencil: Stencil,
}

fn default_xmin() -> f64 {
    -10.0
}
fn default_xmax() -> f64 {
    10.0
}
fn default_points() -> usize {
    801
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            xmin: default_xmin(),
            xmax: default_xmax(),
            n: default_points(),
            stencil: Stencil::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimesConfig {
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

fn default_t_max() -> f64 {
    10.0
}
fn default_steps() -> usize {
    101
}

impl Default for TimesConfig {
    fn default() -> Self {
        Self {
            t_max: default_t_max(),
            steps: default_steps(),
        }
    }
}

/// Algorithm tolerances. Unset entries take the default of the mode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub admissibility: Option<f64>,
    pub real: Option<f64>,
    pub cluster: Option<f64>,
    pub gram: Option<f64>,
    pub projection: Option<f64>,
    pub h_hermiticity: Option<f64>,
    pub condition_cap: Option<f64>,
}

/// Pass bars for `verify`. Unset entries take the default of the mode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub pseudo_hermiticity: Option<f64>,
    pub gram: Option<f64>,
    pub h_hermiticity: Option<f64>,
    pub isometry: Option<f64>,
    pub unitarity: Option<f64>,
    pub equivalence: Option<f64>,
    pub norm_drift: Option<f64>,
    pub round_trip: Option<f64>,
    pub interior_block: Option<f64>,
}

/// Resolved tolerances, every field set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedTolerances {
    pub admissibility: f64,
    pub real: f64,
    pub cluster: f64,
    pub gram: f64,
    pub projection: f64,
    pub h_hermiticity: f64,
    pub condition_cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    /// Random Hermitian seed: a quasi-Hermitian `H` with real spectrum.
    #[default]
    Hermitian,
    /// Seed with a leading `[[c, g], [−g, c]]` block: complex pair `c ± ig`.
    PtBroken,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraicConfig {
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_rho_min")]
    pub rho_min: f64,
    #[serde(default = "default_rho_max")]
    pub rho_max: f64,
    #[serde(default)]
    pub seed_kind: SeedKind,
    /// Imaginary half-gap of the broken pair.
    #[serde(default = "default_gap")]
    pub gap: f64,
}

fn default_dim() -> usize {
    20
}
fn default_rho_min() -> f64 {
    0.1
}
fn default_rho_max() -> f64 {
    10.0
}
fn default_gap() -> f64 {
    0.5
}

impl Default for AlgebraicConfig {
    fn default() -> Self {
        Self {
            dim: default_dim(),
            rho_min: default_rho_min(),
            rho_max: default_rho_max(),
            seed_kind: SeedKind::default(),
            gap: default_gap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFiles {
    /// Path of `H`, relative to the config file.
    pub hamiltonian: PathBuf,
    /// Path of `η₊`; the identity when absent.
    pub metric: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    /// `(ψ₀ + ψ₁)/√2`
    #[default]
    Superposition,
    Ground,
    /// Seeded random vector; must lie in the span of the retained states.
    Random,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default)]
    pub initial: InitialState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default)]
    pub seed: u64,
    /// States kept from the bottom of the spectrum; all when unset outside
    /// the oscillator mode, 10 in it.
    pub n_states: Option<usize>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub times: TimesConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub algebraic: AlgebraicConfig,
    pub matrix_files: Option<MatrixFiles>,
    #[serde(default)]
    pub evolve: EvolveConfig,
    /// Directory that relative matrix-file paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_alpha() -> f64 {
    0.3
}
fn default_omega() -> f64 {
    1.0
}

/// States kept in oscillator mode when `n_states` is unset.
pub const DEFAULT_FD_STATES: usize = 10;

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("empty config is valid")
    }
}

/// Parse and validate TOML text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &[])
}

/// Parse TOML text, apply `key=value` overrides in order, then validate.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let cfg: RunConfig = table
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read a config file; relative matrix paths resolve against its directory.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut cfg = parse_config_with(&text, overrides)?;
    cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(cfg)
}

/// Split `key=value`. The value is read as a TOML value and falls back to a
/// bare string, so `mode=algebraic` needs no quotes.
pub fn parse_override(spec: &str) -> Result<(Vec<String>, toml::Value), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::OverrideSyntax(spec.to_string()))?;
    let key = key.trim();
    let path: Vec<String> = key.split('.').map(|s| s.trim().to_string()).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::OverrideSyntax(spec.to_string()));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key v was just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    Ok((path, value))
}

pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (path, value) = parse_override(spec)?;
    let (last, parents) = path.split_last().expect("path is non-empty");
    let mut cur = table;
    for p in parents {
        let entry = cur
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => {
                return Err(ConfigError::OverrideTarget {
                    key: path.join("."),
                    message: format!("`{p}` is not a table"),
                })
            }
        };
    }
    cur.insert(last.clone(), value);
    Ok(())
}

fn positive(name: &str, v: Option<f64>) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(ConfigError::Invalid(format!("{name} must be finite and > 0, got {x}"))),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !self.alpha.is_finite() {
            return bad(format!("alpha must be finite, got {}", self.alpha));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad(format!("omega must be > 0, got {}", self.omega));
        }
        let g = &self.grid;
        if !(g.xmin.is_finite() && g.xmax.is_finite() && g.xmin < g.xmax) {
            return bad(format!("grid needs finite xmin < xmax, got [{}, {}]", g.xmin, g.xmax));
        }
        if g.n < MIN_CONFIG_POINTS {
            return bad(format!("grid.n must be at least {MIN_CONFIG_POINTS}, got {}", g.n));
        }
        if !(self.times.t_max >= 0.0 && self.times.t_max.is_finite()) {
            return bad(format!("times.t_max must be finite and >= 0, got {}", self.times.t_max));
        }
        if self.times.steps == 0 {
            return bad("times.steps must be at least 1".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.admissibility", t.admissibility),
            ("tolerances.real", t.real),
            ("tolerances.cluster", t.cluster),
            ("tolerances.gram", t.gram),
            ("tolerances.projection", t.projection),
            ("tolerances.h_hermiticity", t.h_hermiticity),
            ("tolerances.condition_cap", t.condition_cap),
        ] {
            positive(name, v)?;
        }
        let th = &self.thresholds;
        for (name, v) in [
            ("thresholds.pseudo_hermiticity", th.pseudo_hermiticity),
            ("thresholds.gram", th.gram),
            ("thresholds.h_hermiticity", th.h_hermiticity),
            ("thresholds.isometry", th.isometry),
            ("thresholds.unitarity", th.unitarity),
            ("thresholds.equivalence", th.equivalence),
            ("thresholds.norm_drift", th.norm_drift),
            ("thresholds.round_trip", th.round_trip),
            ("thresholds.interior_block", th.interior_block),
        ] {
            positive(name, v)?;
        }
        let a = &self.algebraic;
        if a.dim < 2 {
            return bad(format!("algebraic.dim must be at least 2, got {}", a.dim));
        }
        if !(a.rho_min > 0.0 && a.rho_max >= a.rho_min && a.rho_max.is_finite()) {
            return bad(format!(
                "algebraic rho range needs 0 < rho_min <= rho_max, got [{}, {}]",
                a.rho_min, a.rho_max
            ));
        }
        if !(a.gap.is_finite() && a.gap != 0.0) {
            return bad(format!("algebraic.gap must be finite and non-zero, got {}", a.gap));
        }
        if self.mode == Mode::MatrixFiles && self.matrix_files.is_none() {
            return bad("mode matrix-files needs a [matrix_files] section".into());
        }
        if let Some(k) = self.n_states {
            if k == 0 {
                return bad("n_states must be at least 1".into());
            }
            let limit = match self.mode {
                Mode::FdOscillator => Some(g.n),
                Mode::Algebraic => Some(a.dim),
                Mode::MatrixFiles => None,
            };
            if let Some(limit) = limit.filter(|&l| k > l) {
                return bad(format!("n_states = {k} exceeds the dimension {limit}"));
            }
        }
        Ok(())
    }

    /// Tolerances with mode defaults filled in.
    pub fn resolved_tolerances(&self) -> ResolvedTolerances {
        let t = &self.tolerances;
        let fd = self.mode == Mode::FdOscillator;
        ResolvedTolerances {
            admissibility: t.admissibility.unwrap_or(if fd { 1e-2 } else { 1e-6 }),
            real: t.real.unwrap_or(if fd { 1e-6 } else { 1e-8 }),
            cluster: t.cluster.unwrap_or(1e-8),
            gram: t.gram.unwrap_or(1e-8),
            projection: t.projection.unwrap_or(1e-8),
            h_hermiticity: t.h_hermiticity.unwrap_or(if fd { 1e-2 } else { 1e-10 }),
            condition_cap: t.condition_cap.unwrap_or(DEFAULT_CONDITION_CAP),
        }
    }

    /// `(name, threshold)` for every residual listed in a verify report.
    pub fn resolved_thresholds(&self) -> Vec<(&'static str, f64)> {
        let th = &self.thresholds;
        let fd = self.mode == Mode::FdOscillator;
        let pick = |v: Option<f64>, fd_default: f64| v.unwrap_or(if fd { fd_default } else { 1e-10 });
        let mut out = vec![
            ("pseudo_hermiticity", pick(th.pseudo_hermiticity, 1e-2)),
            ("gram", pick(th.gram, 1e-10)),
            ("h_hermiticity", pick(th.h_hermiticity, 1e-2)),
            ("isometry", pick(th.isometry, 1e-10)),
            ("unitarity", pick(th.unitarity, 1e-6)),
            ("equivalence", pick(th.equivalence, 1e-3)),
            ("norm_drift", pick(th.norm_drift, 1e-10)),
        ];
        match self.mode {
            Mode::FdOscillator => out.push(("interior_block", th.interior_block.unwrap_or(1e-3))),
            Mode::Algebraic => out.push(("round_trip", th.round_trip.unwrap_or(1e-10))),
            Mode::MatrixFiles => {}
        }
        out
    }

    /// Retained state count with the mode default.
    pub fn retained_states(&self) -> Option<usize> {
        match (self.n_states, self.mode) {
            (Some(k), _) => Some(k),
            (None, Mode::FdOscillator) => Some(DEFAULT_FD_STATES.min(self.grid.n)),
            (None, _) => None,
        }
    }

    pub fn resolve_path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }
}
