//! JSON job configuration. Every section has defaults except the problem
//! kind, the model and the schedule radii; `effective_config.json` holds the
//! resolved form, which reproduces the run when fed back in.

use std::path::{Path, PathBuf};

use persson::driver::AuditMode;
use persson::eigen::Mode;
use persson::space::GraphKernelKind;
use persson::subshift::{ModelCheck, SeqPoint};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    MetricSpace,
    Graph,
    Subshift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub problem: ProblemKind,
    pub model: ModelSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolSection>,
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub eigen: EigenSection,
    #[serde(default)]
    pub flags: Flags,
    /// Known essential-spectrum edges `[lower, upper]` of a metric problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_edges: Option<[f64; 2]>,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub info: InfoSection,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output() -> PathBuf {
    PathBuf::from("persson-out")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Builtin {
    Z,
    Z2,
}

/// A site given by its id or, on `Z2`, by its coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteSpec {
    Id(i64),
    Pair([i64; 2]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    L2,
    Linf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTable {
    pub ids: Vec<i64>,
    pub coords: Vec<Vec<f64>>,
    pub norm: Norm,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    // metric_space
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    /// Half-width of the builtin lattice window; defaults to the largest
    /// schedule window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<PointTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ud_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<SiteSpec>,
    // graph
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(i64, i64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges_file: Option<PathBuf>,
    // subshift
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<SeqPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub limit_generators: Vec<SeqPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<ModelCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_radius: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coeff {
    /// Offset `x - y`: one entry on `Z`, two on `Z2`.
    pub hop: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Radial {
    pub distance: f64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteValue {
    pub site: SiteSpec,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Kernel of a metric or graph problem: the sum of all listed parts.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub toeplitz: Vec<Coeff>,
    /// `K(x, y) = value` whenever `d(x, y) = distance`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub radial: Vec<Radial>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub potential: Vec<SiteValue>,
    /// Kernel text file (`bandwidth r`, then `x y re im`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphKernelKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub pattern: String,
    pub k: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Symbol of a subshift problem: rows first, then the table text, then the
/// table file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<RowSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub radii: Vec<i64>,
    /// Defaults to the heuristic pairing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<i64>,
    #[serde(default = "three")]
    pub window_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_cap: Option<i64>,
}

fn three() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub eigen: f64,
    pub stabilization: f64,
    /// Agreement required between ladder edges and oracle edges.
    pub oracle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eigen: persson::eigen::DEFAULT_TOL,
            stabilization: 1e-6,
            oracle: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenSection {
    pub mode: Mode,
    pub dense_threshold: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

impl Default for EigenSection {
    fn default() -> Self {
        EigenSection {
            mode: Mode::Auto,
            dense_threshold: persson::eigen::DEFAULT_DENSE_THRESHOLD,
            max_iter: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Flags {
    pub oracle: bool,
    pub audits: AuditMode,
    /// Whether `|k| = 2^0 = 1` counts in `powers_of_two` rules.
    pub m_from_zero: bool,
    /// Also report the uncompressed truncations and the gap to them.
    pub full_spectrum: bool,
    pub oracle_grid: usize,
    pub oracle_window: i64,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            oracle: true,
            audits: AuditMode::Strict,
            m_from_zero: true,
            full_spectrum: false,
            oracle_grid: 1 << 16,
            oracle_window: 2000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub window: i64,
    pub radii: Vec<i64>,
    pub windows: Vec<i64>,
    /// Random cofinite sets tried by the defect check.
    pub samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            window: 24,
            radii: vec![1, 2, 3],
            windows: vec![16, 20, 24],
            samples: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InfoSection {
    pub max_len: usize,
    pub window: i64,
    pub max_shell: usize,
}

impl Default for InfoSection {
    fn default() -> Self {
        InfoSection {
            max_len: 6,
            window: 128,
            max_shell: 8,
        }
    }
}

/// Schema or semantic problem with a configuration, with the JSON path of
/// the offending value when known.
#[derive(Debug)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.pointer.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at `{}`: {}", self.pointer, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

pub(crate) fn config_error(pointer: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        pointer: pointer.into(),
        message: message.into(),
    }
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| ConfigError {
            pointer: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Semantic checks that the types cannot express.
    pub fn check(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.eigen", t.eigen),
            ("tolerances.stabilization", t.stabilization),
            ("tolerances.oracle", t.oracle),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(config_error(name, format!("must be positive, got {v}")));
            }
        }
        let m = &self.model;
        match self.problem {
            ProblemKind::MetricSpace => {
                if m.builtin.is_some() == m.points.is_some() {
                    return Err(config_error(
                        "model",
                        "give exactly one of `builtin` and `points`",
                    ));
                }
                if self.kernel.is_none() {
                    return Err(config_error(
                        "kernel",
                        "metric_space problems need a kernel",
                    ));
                }
            }
            ProblemKind::Graph => {
                if m.edges.is_some() == m.edges_file.is_some() {
                    return Err(config_error(
                        "model",
                        "give exactly one of `edges` and `edges_file`",
                    ));
                }
                if self.kernel.is_none() {
                    return Err(config_error("kernel", "graph problems need a kernel"));
                }
            }
            ProblemKind::Subshift => {
                if m.alphabet.is_none() {
                    return Err(config_error("model.alphabet", "missing"));
                }
                if m.generator.is_none() {
                    return Err(config_error("model.generator", "missing"));
                }
                if self.symbol.is_none() {
                    return Err(config_error("symbol", "subshift problems need a symbol"));
                }
            }
        }
        for (name, path) in [
            ("model.edges_file", m.edges_file.as_ref()),
            (
                "kernel.file",
                self.kernel.as_ref().and_then(|k| k.file.as_ref()),
            ),
            (
                "symbol.file",
                self.symbol.as_ref().and_then(|s| s.file.as_ref()),
            ),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(config_error(
                        name,
                        format!("{} does not exist", p.display()),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Makes file paths absolute relative to `base`.
    pub fn absolutize(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.model.edges_file.as_mut() {
            fix(p);
        }
        if let Some(p) = self.kernel.as_mut().and_then(|k| k.file.as_mut()) {
            fix(p);
        }
        if let Some(p) = self.symbol.as_mut().and_then(|s| s.file.as_mut()) {
            fix(p);
        }
    }
}

/// Applies the `m_from_zero` flag to every `powers_of_two` rule.
pub(crate) fn apply_m_convention(x: &SeqPoint, m_from_zero: bool) -> SeqPoint {
    match x {
        SeqPoint::PowersOfTwo { base, mark, .. } => SeqPoint::PowersOfTwo {
            base: *base,
            mark: *mark,
            m_from_zero,
        },
        SeqPoint::Shift { base, by } => SeqPoint::Shift {
            base: Box::new(apply_m_convention(base, m_from_zero)),
            by: *by,
        },
        other => other.clone(),
    }
}
