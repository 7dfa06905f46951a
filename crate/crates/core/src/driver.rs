//! The compression ladder: for each exhaustion radius `R` and truncation
//! window `L`, the extreme eigenvalues of the operator compressed to the
//! complement of the `R`-ball (or to the trace set of the Fell shell `M_R`)
//! inside the window. For self-adjoint operators
//!
//! ```text
//! inf sp_ess H = sup_R inf sp(H restricted to the complement),
//! sup sp_ess H = inf_R sup sp(H restricted to the complement),
//! ```
//!
//! and the ladder reports the monotone brackets it can certify together with
//! independent oracle edges.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{extreme_eigs, EigenOptions, Mode, SpectralInterval};
use crate::error::{Error, Result};
use crate::kernel::{BandKernel, Site, SiteSet};
use crate::scalar::Scalar;
use crate::subshift::{
    limit_operator, subshift_operator, symbol_range, trace_set, HoppingSymbol, Shell, SubshiftModel,
};

/// Minimum gap between the largest radius and the smallest window in the
/// default pairing.
pub const DEFAULT_WINDOW_GAP: i64 = 500;

/// A self-adjoint operator together with its exhaustion family.
#[derive(Clone, Debug)]
pub enum Problem<T> {
    /// A kernel on a finite window of a metric space; compressions go to
    /// complements of balls around `center`, truncations to balls of radius
    /// `L` around it.
    Metric {
        kernel: BandKernel<T>,
        center: Site,
        /// Known essential-spectrum edges, if any.
        oracle: Option<(f64, f64)>,
    },
    /// `H_z` on the orbit of an admissible generator; compressions go to the
    /// Fell shells `M_i`.
    Subshift {
        model: SubshiftModel,
        symbol: HoppingSymbol<T>,
    },
}

impl<T: Scalar> Problem<T> {
    pub fn bandwidth(&self) -> f64 {
        match self {
            Problem::Metric { kernel, .. } => kernel.bandwidth(),
            Problem::Subshift { symbol, .. } => symbol.max_hop() as f64,
        }
    }

    /// Dependence radius of the symbol; zero for metric problems.
    pub fn dependence_radius(&self) -> i64 {
        match self {
            Problem::Metric { .. } => 0,
            Problem::Subshift { symbol, .. } => symbol.radius() as i64,
        }
    }

    /// Smallest admissible `L - R`.
    pub fn required_margin(&self) -> i64 {
        self.bandwidth().ceil() as i64 + self.dependence_radius()
    }

    /// `-H`, with the oracle edges swapped and negated.
    pub fn neg(&self) -> Self {
        match self {
            Problem::Metric {
                kernel,
                center,
                oracle,
            } => Problem::Metric {
                kernel: kernel.neg(),
                center: *center,
                oracle: oracle.map(|(lo, hi)| (-hi, -lo)),
            },
            Problem::Subshift { model, symbol } => Problem::Subshift {
                model: model.clone(),
                symbol: symbol.neg(),
            },
        }
    }

    /// The uncompressed truncation at window `l` and its site set.
    pub fn truncation(&self, l: i64) -> Result<(BandKernel<T>, SiteSet)> {
        match self {
            Problem::Metric { kernel, center, .. } => {
                let space = kernel.space();
                if !space.sites().contains(*center) {
                    return Err(Error::Precondition(format!(
                        "center {center} is not in the space"
                    )));
                }
                let window = SiteSet::new(space.ball(*center, l as f64));
                Ok((kernel.restrict(&window), window))
            }
            Problem::Subshift { model, symbol } => {
                let k = subshift_operator(symbol, model.generator(), &Shell::Full, l)?;
                Ok((k, SiteSet::range(-l, l)))
            }
        }
    }

    /// Sites kept by the compression at radius (or shell index) `r` inside
    /// window `l`.
    pub fn compression_sites(&self, r: i64, l: i64) -> Result<SiteSet> {
        match self {
            Problem::Metric { kernel, center, .. } => {
                let space = kernel.space();
                let window = SiteSet::new(space.ball(*center, l as f64));
                Ok(SiteSet::cofinite(&window, space.ball(*center, r as f64)))
            }
            Problem::Subshift { model, .. } => {
                let shell = model.fell_shell(usize::try_from(r).unwrap_or(0))?;
                trace_set(model.generator(), &shell, l)
            }
        }
    }

    /// The matrix handed to the eigensolver at `(r, l)`.
    pub fn compression(&self, r: i64, l: i64) -> Result<(BandKernel<T>, SiteSet)> {
        let (k, _) = self.truncation(l)?;
        let sites = self.compression_sites(r, l)?;
        Ok((k.restrict(&sites), sites))
    }
}

/// Radii (or shell indices) and windows of the ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub radii: Vec<i64>,
    pub windows: Vec<i64>,
    /// Required `L - R` for every cell; defaults to bandwidth plus
    /// dependence radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<i64>,
}

impl Schedule {
    pub fn new(radii: Vec<i64>, windows: Vec<i64>) -> Self {
        Schedule {
            radii,
            windows,
            margin: None,
        }
    }

    /// Windows `L₀, L₀ + 100, …` (`count` of them) with
    /// `L₀ = R_max + max(500, 10·bandwidth·√R_max)`, each capped at `cap`.
    /// The pairing is a heuristic.
    pub fn with_default_windows(
        radii: Vec<i64>,
        bandwidth: f64,
        count: usize,
        cap: Option<i64>,
    ) -> Self {
        let r = radii.iter().copied().max().unwrap_or(0);
        let gap =
            DEFAULT_WINDOW_GAP.max((10.0 * bandwidth * (r.max(0) as f64).sqrt()).ceil() as i64);
        let mut windows: Vec<i64> = (0..count.max(1) as i64)
            .map(|j| {
                let l = r + gap + 100 * j;
                cap.map_or(l, |c| l.min(c))
            })
            .collect();
        windows.dedup();
        Schedule::new(radii, windows)
    }

    /// Checks ordering and the pairing rule; returns the margin in force.
    pub fn validate(&self, required_margin: i64) -> Result<i64> {
        let increasing = |v: &[i64]| v.windows(2).all(|w| w[0] < w[1]);
        if self.radii.is_empty() || self.windows.is_empty() {
            return Err(Error::Config(
                "schedule needs at least one radius and one window".into(),
            ));
        }
        if !increasing(&self.radii) || !increasing(&self.windows) {
            return Err(Error::Config(
                "radii and windows must be strictly increasing".into(),
            ));
        }
        if self.radii[0] < 0 {
            return Err(Error::Config("radii must be nonnegative".into()));
        }
        let margin = self.margin.unwrap_or(required_margin);
        if margin < required_margin {
            return Err(Error::Config(format!(
                "margin {margin} is below bandwidth plus dependence radius ({required_margin})"
            )));
        }
        let r = *self.radii.last().unwrap();
        let l = self.windows[0];
        if l < r + margin {
            return Err(Error::Config(format!(
                "window {l} violates L >= R + margin for R = {r}, margin = {margin}"
            )));
        }
        Ok(margin)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditMode {
    /// The first audit violation is an error.
    #[default]
    Strict,
    /// Violations are recorded in the report.
    Warn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderOptions {
    pub eigen: EigenOptions,
    pub audit: AuditMode,
    /// An edge column is stabilized when its last three windows lie within
    /// `10 · stabilization_tol`.
    pub stabilization_tol: f64,
    pub oracle: bool,
    pub oracle_grid: usize,
    /// Window of the limit-operator fallback of the subshift oracle.
    pub oracle_window: i64,
}

impl Default for LadderOptions {
    fn default() -> Self {
        LadderOptions {
            eigen: EigenOptions::default(),
            audit: AuditMode::Strict,
            stabilization_tol: 1e-6,
            oracle: true,
            oracle_grid: 1 << 16,
            oracle_window: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub radius: i64,
    pub window: i64,
    pub sites: usize,
    pub s_min: SpectralInterval,
    pub s_max: SpectralInterval,
    pub mode: Mode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditFlag {
    /// `a`: monotonicity in the window at fixed radius; `b`: monotonicity in
    /// the radius at fixed window.
    pub audit: char,
    pub edge: Edge,
    pub radius: i64,
    pub window: i64,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleRoute {
    Symbol,
    /// Extreme eigenvalues of a large truncation; not certified.
    Fallback,
    Supplied,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorEdges {
    pub route: OracleRoute,
    pub lower: f64,
    pub upper: f64,
    pub error_bound: f64,
}

/// Independent essential-spectrum edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleEdges {
    pub lower: f64,
    pub upper: f64,
    pub error_bound: f64,
    pub certified: bool,
    pub generators: Vec<GeneratorEdges>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub radii: Vec<i64>,
    pub windows: Vec<i64>,
    pub margin: i64,
    /// Row-major in `(radius, window)`.
    pub cells: Vec<Cell>,
    /// Max over radii of the final-window `s_min`.
    pub persson_lower: SpectralInterval,
    /// Min over radii of the final-window `s_max`.
    pub persson_upper: SpectralInterval,
    pub stabilized_lower: Vec<bool>,
    pub stabilized_upper: Vec<bool>,
    pub all_certified: bool,
    pub audit_flags: Vec<AuditFlag>,
    pub oracle: Option<OracleEdges>,
    pub window_rule: String,
}

impl EdgeReport {
    pub fn cell(&self, ri: usize, li: usize) -> &Cell {
        &self.cells[ri * self.windows.len() + li]
    }

    /// `R,L,smin_lo,smin_hi,smax_lo,smax_hi,certified`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,L,smin_lo,smin_hi,smax_lo,smax_hi,certified\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{:?},{:?},{:?},{:?},{}",
                c.radius,
                c.window,
                c.s_min.lo,
                c.s_min.hi,
                c.s_max.lo,
                c.s_max.hi,
                c.s_min.certified && c.s_max.certified
            );
        }
        out
    }

    /// Two columns `L  value` per radius, blocks separated by blank lines.
    pub fn ladder_dat(&self, edge: Edge) -> String {
        let mut out = String::new();
        let name = match edge {
            Edge::Min => "s_min",
            Edge::Max => "s_max",
        };
        for (ri, r) in self.radii.iter().enumerate() {
            if ri > 0 {
                out.push_str("\n\n");
            }
            let _ = writeln!(out, "# R = {r}: L {name}");
            for li in 0..self.windows.len() {
                let c = self.cell(ri, li);
                let v = match edge {
                    Edge::Min => c.s_min.mid(),
                    Edge::Max => c.s_max.mid(),
                };
                let _ = writeln!(out, "{} {:?}", c.window, v);
            }
        }
        out
    }
}

fn stabilized(column: &[SpectralInterval], band: f64) -> bool {
    if column.len() < 3 {
        return false;
    }
    let tail = &column[column.len() - 3..];
    let lo = tail.iter().map(|s| s.lo).fold(f64::INFINITY, f64::min);
    let hi = tail.iter().map(|s| s.hi).fold(f64::NEG_INFINITY, f64::max);
    hi - lo <= band
}

fn audits(cells: &[Cell], radii: &[i64], windows: &[i64]) -> Vec<AuditFlag> {
    let at = |ri: usize, li: usize| &cells[ri * windows.len() + li];
    let mut flags = Vec::new();
    let mut push = |audit, edge, c: &Cell, detail: String| {
        flags.push(AuditFlag {
            audit,
            edge,
            radius: c.radius,
            window: c.window,
            detail,
        })
    };
    for ri in 0..radii.len() {
        for li in 1..windows.len() {
            let (p, c) = (at(ri, li - 1), at(ri, li));
            if c.s_min.lo > p.s_min.hi {
                push(
                    'a',
                    Edge::Min,
                    c,
                    format!("s_min rose from {:?} to {:?}", p.s_min, c.s_min),
                );
            }
            if c.s_max.hi < p.s_max.lo {
                push(
                    'a',
                    Edge::Max,
                    c,
                    format!("s_max fell from {:?} to {:?}", p.s_max, c.s_max),
                );
            }
        }
    }
    for li in 0..windows.len() {
        for ri in 1..radii.len() {
            let (p, c) = (at(ri - 1, li), at(ri, li));
            if c.s_min.hi < p.s_min.lo {
                push(
                    'b',
                    Edge::Min,
                    c,
                    format!("s_min fell from {:?} to {:?}", p.s_min, c.s_min),
                );
            }
            if c.s_max.lo > p.s_max.hi {
                push(
                    'b',
                    Edge::Max,
                    c,
                    format!("s_max rose from {:?} to {:?}", p.s_max, c.s_max),
                );
            }
        }
    }
    flags
}

/// Runs every `(R, L)` cell of the schedule in parallel and assembles the
/// report.
pub fn compression_ladder<T: Scalar>(
    problem: &Problem<T>,
    schedule: &Schedule,
    opts: &LadderOptions,
) -> Result<EdgeReport> {
    let margin = schedule.validate(problem.required_margin())?;
    if matches!(problem, Problem::Subshift { .. }) && schedule.radii[0] < 1 {
        return Err(Error::Config("shell indices start at 1".into()));
    }
    let truncations: Vec<(BandKernel<T>, SiteSet)> = schedule
        .windows
        .par_iter()
        .map(|&l| problem.truncation(l))
        .collect::<Result<_>>()?;
    let grid: Vec<(usize, usize)> = (0..schedule.radii.len())
        .flat_map(|ri| (0..schedule.windows.len()).map(move |li| (ri, li)))
        .collect();
    let cells: Vec<Cell> = grid
        .par_iter()
        .map(|&(ri, li)| {
            let (r, l) = (schedule.radii[ri], schedule.windows[li]);
            let sites = problem.compression_sites(r, l)?;
            if sites.is_empty() {
                return Err(Error::Precondition(format!(
                    "empty compression at R={r}, L={l}"
                )));
            }
            let eigs = extreme_eigs(&truncations[li].0, &sites, &opts.eigen)?;
            Ok(Cell {
                radius: r,
                window: l,
                sites: sites.len(),
                s_min: eigs.min,
                s_max: eigs.max,
                mode: eigs.mode,
            })
        })
        .collect::<Result<_>>()?;

    let audit_flags = audits(&cells, &schedule.radii, &schedule.windows);
    if opts.audit == AuditMode::Strict {
        if let Some(f) = audit_flags.first() {
            return Err(Error::Audit {
                radius: f.radius as f64,
                window: f.window,
                detail: format!("audit ({}) {:?}: {}", f.audit, f.edge, f.detail),
            });
        }
    }

    let nl = schedule.windows.len();
    let last = |ri: usize| &cells[ri * nl + nl - 1];
    let nr = schedule.radii.len();
    let persson_lower = (0..nr).map(|ri| last(ri).s_min).fold(
        SpectralInterval::new(f64::NEG_INFINITY, f64::NEG_INFINITY, true),
        |a, b| SpectralInterval::new(a.lo.max(b.lo), a.hi.max(b.hi), a.certified && b.certified),
    );
    let persson_upper = (0..nr).map(|ri| last(ri).s_max).fold(
        SpectralInterval::new(f64::INFINITY, f64::INFINITY, true),
        |a, b| SpectralInterval::new(a.lo.min(b.lo), a.hi.min(b.hi), a.certified && b.certified),
    );
    let band = 10.0 * opts.stabilization_tol;
    let column = |ri: usize, edge: Edge| -> Vec<SpectralInterval> {
        (0..nl)
            .map(|li| match edge {
                Edge::Min => cells[ri * nl + li].s_min,
                Edge::Max => cells[ri * nl + li].s_max,
            })
            .collect()
    };
    let stabilized_lower = (0..nr)
        .map(|ri| stabilized(&column(ri, Edge::Min), band))
        .collect();
    let stabilized_upper = (0..nr)
        .map(|ri| stabilized(&column(ri, Edge::Max), band))
        .collect();
    let all_certified = cells.iter().all(|c| c.s_min.certified && c.s_max.certified);

    let oracle = if opts.oracle {
        match problem {
            Problem::Metric { oracle, .. } => oracle.map(|(lower, upper)| OracleEdges {
                lower,
                upper,
                error_bound: 0.0,
                certified: true,
                generators: vec![GeneratorEdges {
                    route: OracleRoute::Supplied,
                    lower,
                    upper,
                    error_bound: 0.0,
                }],
            }),
            Problem::Subshift { model, symbol } => {
                Some(essential_edge_oracle(model, symbol, opts)?)
            }
        }
    } else {
        None
    };

    Ok(EdgeReport {
        radii: schedule.radii.clone(),
        windows: schedule.windows.clone(),
        margin,
        cells,
        persson_lower,
        persson_upper,
        stabilized_lower,
        stabilized_upper,
        all_certified,
        audit_flags,
        oracle,
        window_rule: format!("L >= R + {margin}; window pairing is a heuristic"),
    })
}

/// Essential-spectrum edges as the union of the spectra of the limit
/// operators: the symbol range for constant or periodic limit generators,
/// otherwise the extreme eigenvalues of `limit_operator` at
/// `opts.oracle_window` (flagged uncertified).
pub fn essential_edge_oracle<T: Scalar>(
    model: &SubshiftModel,
    h: &HoppingSymbol<T>,
    opts: &LadderOptions,
) -> Result<OracleEdges> {
    let mut generators = Vec::new();
    for g in model.limit_generators() {
        let edges = if g.period().is_some() {
            let r = symbol_range(h, g, opts.oracle_grid.max(1))?;
            GeneratorEdges {
                route: OracleRoute::Symbol,
                lower: r.range.lo,
                upper: r.range.hi,
                error_bound: r.error_bound,
            }
        } else {
            let w = opts.oracle_window;
            let k = limit_operator(h, g, w)?;
            let e = extreme_eigs(&k, &SiteSet::range(-w, w), &opts.eigen)?;
            GeneratorEdges {
                route: OracleRoute::Fallback,
                lower: e.min.mid(),
                upper: e.max.mid(),
                error_bound: e.min.width().max(e.max.width()),
            }
        };
        generators.push(edges);
    }
    if generators.is_empty() {
        return Err(Error::Precondition("model has no limit generators".into()));
    }
    Ok(OracleEdges {
        lower: generators
            .iter()
            .map(|g| g.lower)
            .fold(f64::INFINITY, f64::min),
        upper: generators
            .iter()
            .map(|g| g.upper)
            .fold(f64::NEG_INFINITY, f64::max),
        error_bound: generators.iter().map(|g| g.error_bound).fold(0.0, f64::max),
        certified: generators.iter().all(|g| g.route == OracleRoute::Symbol),
        generators,
    })
}

/// Extreme eigenvalues of the uncompressed truncation at one window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullCell {
    pub window: i64,
    pub min: SpectralInterval,
    pub max: SpectralInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub ladder: EdgeReport,
    pub full: Vec<FullCell>,
    /// `persson_lower - λ_min(full)` at the final window.
    pub lower_gap: f64,
    /// `λ_max(full) - persson_upper` at the final window.
    pub upper_gap: f64,
    /// Both gaps are nonnegative up to the certification widths.
    pub consistent: bool,
}

/// The ladder plus the uncompressed truncations, exposing eigenvalues that
/// the compressions remove.
pub fn full_vs_essential_gap<T: Scalar>(
    problem: &Problem<T>,
    schedule: &Schedule,
    opts: &LadderOptions,
) -> Result<GapReport> {
    let ladder = compression_ladder(problem, schedule, opts)?;
    let full: Vec<FullCell> = schedule
        .windows
        .par_iter()
        .map(|&l| {
            let (k, window) = problem.truncation(l)?;
            let e = extreme_eigs(&k, &window, &opts.eigen)?;
            Ok(FullCell {
                window: l,
                min: e.min,
                max: e.max,
            })
        })
        .collect::<Result<_>>()?;
    let f = full.last().expect("validated schedule");
    let lower_gap = ladder.persson_lower.mid() - f.min.mid();
    let upper_gap = f.max.mid() - ladder.persson_upper.mid();
    let slack_lo = ladder.persson_lower.width() + f.min.width();
    let slack_hi = ladder.persson_upper.width() + f.max.width();
    Ok(GapReport {
        consistent: lower_gap >= -slack_lo && upper_gap >= -slack_hi,
        ladder,
        full,
        lower_gap,
        upper_gap,
    })
}
