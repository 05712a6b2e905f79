//! Experiment configuration files (TOML). See `configs/` for one preset per
//! acceptance scenario and the README for the full schema.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Flow,
    Kernel,
    Converge,
    Modbound,
    Exceptional,
    Perturb,
    Freeslice,
    Oracles,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Flow => "flow",
            ScenarioKind::Kernel => "kernel",
            ScenarioKind::Converge => "converge",
            ScenarioKind::Modbound => "modbound",
            ScenarioKind::Exceptional => "exceptional",
            ScenarioKind::Perturb => "perturb",
            ScenarioKind::Freeslice => "freeslice",
            ScenarioKind::Oracles => "oracles",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianPreset {
    Harmonic,
    Free,
    Zero,
}

/// Either a preset or explicit row-major (A, B, C) matrices of
/// a(x, xi) = 1/2 xAx + xi Bx + 1/2 xi C xi.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub preset: Option<HamiltonianPreset>,
    pub a: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<Vec<f64>>>,
    pub c: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    /// V(x) = sum a cos(2 pi k x), entries [a, k]
    CosineSum { terms: Vec<[f64; 2]> },
    /// V(x) = sum c e^{2 pi i k x}, entries [k, re c, im c]
    MeasureAtoms { atoms: Vec<[f64; 3]> },
    /// a exp(-pi ((x - x0) / w)^2)
    GaussianBump { amplitude: f64, centre: f64, width: f64 },
    /// random grid-periodic modes |k| <= band / (2L); the seed defaults to the run seed
    RandomBandLimited { band: usize, seed: Option<u64>, amplitude: Option<f64> },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Zero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "one")]
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderConfig {
    KineticPotential,
    PotentialKinetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepConfig {
    Shear,
    ChirpZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    FreeKernel,
    Mehler,
    StftInversion,
    WignerDuality,
    Covariance,
    Fio,
    Sjostrand,
    MeasureBound,
}

impl OracleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OracleKind::FreeKernel => "free-kernel",
            OracleKind::Mehler => "mehler",
            OracleKind::StftInversion => "stft-inversion",
            OracleKind::WignerDuality => "wigner-duality",
            OracleKind::Covariance => "covariance",
            OracleKind::Fio => "fio",
            OracleKind::Sjostrand => "sjostrand",
            OracleKind::MeasureBound => "measure-bound",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub time: Option<f64>,
    pub n: Option<Vec<usize>>,
    /// inclusive [lo, hi], an alternative to `n`
    pub n_range: Option<[usize; 2]>,
    pub reference_n: Option<usize>,
    pub epsilon: Option<Vec<f64>>,
    pub order: Option<OrderConfig>,
    pub step: Option<StepConfig>,
    /// compact radius; defaults to L/2
    pub radius: Option<f64>,
    /// kernel-plane window centres (x, y); defaults to {-L/4, 0, L/4}^2
    pub window_centres: Option<Vec<[f64; 2]>>,
    pub fl1_weight: Option<f64>,
    pub infs_weight: Option<f64>,
    pub t_star: Option<f64>,
    pub offsets: Option<Vec<f64>>,
    pub oracles: Option<Vec<OracleKind>>,
    /// random Hamiltonians (flow) or random atom sets (measure-bound)
    pub count: Option<usize>,
    pub dims: Option<Vec<usize>>,
    pub time_range: Option<[f64; 2]>,
    pub atoms_per_set: Option<usize>,
    pub phase_steps: Option<usize>,
}

impl RunConfig {
    pub fn n_values(&self) -> Option<Vec<usize>> {
        match (&self.n, self.n_range) {
            (Some(n), _) => Some(n.clone()),
            (None, Some([lo, hi])) => Some((lo..=hi).collect()),
            _ => None,
        }
    }
}

/// Optional thresholds; a runner only asserts the ones that are set, except
/// for oracles, which carry their own defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    pub max_symplectic_defect: Option<f64>,
    pub max_group_law_defect: Option<f64>,
    pub max_inverse_defect: Option<f64>,
    pub max_runtime_s: Option<f64>,
    pub max_analytic_rel_error: Option<f64>,
    pub analytic_radius: Option<f64>,
    pub max_collapse_defect: Option<f64>,
    pub strictly_decreasing: Option<bool>,
    pub max_final_over_cauchy: Option<f64>,
    pub fl1_decreasing: Option<bool>,
    pub max_norm_ratio: Option<f64>,
    pub max_ratio_spread: Option<f64>,
    pub max_closed_form_error: Option<f64>,
    pub slope_target: Option<f64>,
    pub slope_tolerance: Option<f64>,
    pub max_rel_diff: Option<f64>,
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<String>,
    pub svg: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ScenarioKind,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_string(), message: e.to_string() })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text, &path.display().to_string())
}

fn check_matrix(field: &'static str, m: &[Vec<f64>]) -> Result<usize, ConfigError> {
    let d = m.len();
    if d == 0 || m.iter().any(|r| r.len() != d) {
        return Err(invalid(field, "must be a nonempty square matrix"));
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(invalid(field, "entries must be finite"));
    }
    Ok(d)
}

fn grid_periodic(k: f64, l: f64) -> bool {
    let m = 2.0 * l * k;
    (m - m.round()).abs() < 1e-9
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid("name", "must be a nonempty file stem"));
        }
        let h = &self.hamiltonian;
        let explicit = [&h.a, &h.b, &h.c].iter().filter(|m| m.is_some()).count();
        match (h.preset, explicit) {
            (Some(_), 0) | (None, 0) => {}
            (None, 3) => {
                let d = check_matrix("hamiltonian.a", h.a.as_ref().unwrap())?;
                if check_matrix("hamiltonian.b", h.b.as_ref().unwrap())? != d
                    || check_matrix("hamiltonian.c", h.c.as_ref().unwrap())? != d
                {
                    return Err(invalid("hamiltonian", "a, b and c must have the same size"));
                }
            }
            (Some(_), _) => return Err(invalid("hamiltonian", "give either a preset or explicit matrices")),
            (None, _) => return Err(invalid("hamiltonian", "explicit form needs all of a, b and c")),
        }
        if let Some(g) = &self.grid {
            if !(1..=2).contains(&g.dim) {
                return Err(invalid("grid.dim", "must be 1 or 2"));
            }
            if !(g.half_width > 0.0 && g.half_width.is_finite()) {
                return Err(invalid("grid.half_width", "must be positive"));
            }
            if g.points < 8 || !g.points.is_power_of_two() {
                return Err(invalid("grid.points", format!("{} is not a power of two >= 8", g.points)));
            }
            let l = g.half_width;
            match &self.potential {
                PotentialConfig::CosineSum { terms } => {
                    if terms.iter().any(|t| !grid_periodic(t[1], l)) {
                        return Err(invalid("potential.terms", "frequencies must be multiples of 1/(2L)"));
                    }
                }
                PotentialConfig::MeasureAtoms { atoms } => {
                    if atoms.iter().any(|a| !grid_periodic(a[0], l)) {
                        return Err(invalid("potential.atoms", "frequencies must be multiples of 1/(2L)"));
                    }
                }
                PotentialConfig::GaussianBump { width, .. } if !(*width > 0.0) => {
                    return Err(invalid("potential.width", "must be positive"));
                }
                PotentialConfig::RandomBandLimited { band, .. } if *band >= g.points / 2 => {
                    return Err(invalid("potential.band", "must be below N/2"));
                }
                _ => {}
            }
        } else if self.kind != ScenarioKind::Flow && self.kind != ScenarioKind::Oracles {
            return Err(invalid("grid", format!("required for `{}`", self.kind.as_str())));
        }
        let r = &self.run;
        if let Some(n) = &r.n {
            if n.is_empty() || n.contains(&0) {
                return Err(invalid("run.n", "must be a nonempty list of positive integers"));
            }
        }
        match (&r.n, r.n_range) {
            (Some(_), Some(_)) => return Err(invalid("run.n_range", "give either n or n_range")),
            (None, Some([lo, hi])) if lo == 0 || lo > hi => {
                return Err(invalid("run.n_range", "needs 1 <= lo <= hi"))
            }
            _ => {}
        }
        let has_n = r.n.is_some() || r.n_range.is_some();
        if let Some(t) = r.time {
            if !t.is_finite() || t == 0.0 {
                return Err(invalid("run.time", "must be finite and nonzero"));
            }
        }
        if let Some(eps) = &r.epsilon {
            if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
                return Err(invalid("run.epsilon", "values must lie in (0, 1]"));
            }
        }
        if let Some(off) = &r.offsets {
            if off.is_empty() || off.iter().any(|d| !(*d > 0.0)) || off.windows(2).any(|w| w[1] >= w[0]) {
                return Err(invalid("run.offsets", "must be positive and strictly decreasing"));
            }
        }
        if let Some([lo, hi]) = r.time_range {
            if !(lo < hi) {
                return Err(invalid("run.time_range", "needs lo < hi"));
            }
        }
        if let Some(dims) = &r.dims {
            if dims.is_empty() || dims.iter().any(|d| !(1..=4).contains(d)) {
                return Err(invalid("run.dims", "dimensions must lie in 1..=4"));
            }
        }
        let required: &[(&'static str, bool)] = match self.kind {
            ScenarioKind::Flow => &[],
            ScenarioKind::Kernel | ScenarioKind::Converge | ScenarioKind::Modbound => {
                &[("run.time", r.time.is_some()), ("run.n", has_n)]
            }
            ScenarioKind::Exceptional => &[("run.t_star", r.t_star.is_some()), ("run.offsets", r.offsets.is_some())],
            ScenarioKind::Perturb => &[("run.time", r.time.is_some()), ("run.epsilon", r.epsilon.is_some())],
            ScenarioKind::Freeslice => &[("run.time", r.time.is_some()), ("run.n", has_n)],
            ScenarioKind::Oracles => &[("run.oracles", r.oracles.is_some())],
        };
        for (field, ok) in required {
            if !ok {
                return Err(invalid(field, format!("required for `{}`", self.kind.as_str())));
            }
        }
        if self.kind == ScenarioKind::Freeslice && r.n_values().is_some_and(|n| n.iter().any(|&k| k > 8)) {
            return Err(invalid("run.n", "free slicing is limited to n <= 8"));
        }
        if self.kind == ScenarioKind::Perturb && r.n_values().is_some_and(|n| n.len() != 1) {
            return Err(invalid("run.n", "perturb takes a single step count"));
        }
        Ok(())
    }

    pub fn csv_name(&self) -> String {
        self.output.csv.clone().unwrap_or_else(|| format!("{}.csv", self.name))
    }

    pub fn svg_name(&self) -> String {
        self.output.svg.clone().unwrap_or_else(|| format!("{}.svg", self.name))
    }
}
