//! Turns a [`JobConfig`] into a problem and runs one command on it.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use persson::driver::{
    compression_ladder, full_vs_essential_gap, AuditMode, Edge, EdgeReport, LadderOptions, Problem,
    Schedule,
};
use persson::eigen::{extreme_eigs, EigenOptions};
use persson::kernel::{BandKernel, Site, SiteSet};
use persson::space::{build_space, graph_kernel, z2_encode, GraphModel, Metric, SiteSpace};
use persson::subshift::{
    main_orbit_operator, subshift_operator, symbol_range, trace_set, validate_symbol, Alphabet,
    HoppingSymbol, Periodicity, SeqPoint, Shell, SubshiftModel, SymbolRow,
};
use persson::Scalar;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    apply_m_convention, config_error, Builtin, ConfigError, JobConfig, KernelSection, Norm,
    ProblemKind, SiteSpec, SymbolSection,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Estimate,
    Verify,
    Info,
}

#[derive(Debug)]
pub enum JobError {
    /// Exit status 2.
    Config(ConfigError),
    /// Exit status 1.
    Failure(String),
}

impl JobError {
    pub fn exit_code(&self) -> u8 {
        match self {
            JobError::Config(_) => 2,
            JobError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for JobError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JobError::Config(e) => write!(f, "configuration error {e}"),
            JobError::Failure(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for JobError {}

impl From<ConfigError> for JobError {
    fn from(e: ConfigError) -> Self {
        JobError::Config(e)
    }
}

impl From<persson::Error> for JobError {
    fn from(e: persson::Error) -> Self {
        match e {
            persson::Error::Config(m) => JobError::Config(config_error("", m)),
            other => JobError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for JobError {
    fn from(e: std::io::Error) -> Self {
        JobError::Failure(e.to_string())
    }
}

/// What a command printed and whether it found a hard failure.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub failed: bool,
    pub out_dir: PathBuf,
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Reads the config at `path`, applies overrides and runs `cmd`.
pub fn run(cmd: Command, path: &Path, overrides: &Overrides) -> Result<Outcome, JobError> {
    let mut cfg = JobConfig::load(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    cfg.absolutize(&base);
    if let Some(out) = &overrides.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    run_config(cmd, cfg)
}

pub fn run_config(cmd: Command, mut cfg: JobConfig) -> Result<Outcome, JobError> {
    cfg.check()?;
    let job = Job::build(&mut cfg)?;
    let out_dir = cfg.output.clone();
    let (files, mut outcome) = match &job {
        AnyProblem::Real(p) => dispatch(cmd, &cfg, p)?,
        AnyProblem::Complex(p) => dispatch(cmd, &cfg, p)?,
    };
    std::fs::create_dir_all(&out_dir)?;
    for (name, text) in files {
        std::fs::write(out_dir.join(name), text)?;
    }
    let effective = serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n";
    std::fs::write(out_dir.join("effective_config.json"), effective)?;
    outcome.out_dir = out_dir;
    Ok(outcome)
}

enum AnyProblem {
    Real(Problem<f64>),
    Complex(Problem<Complex64>),
}

struct Job;

impl Job {
    /// Builds the problem and writes the resolved defaults back into `cfg`.
    fn build(cfg: &mut JobConfig) -> Result<AnyProblem, JobError> {
        match cfg.problem {
            ProblemKind::Subshift => build_subshift(cfg),
            ProblemKind::MetricSpace | ProblemKind::Graph => build_metric(cfg),
        }
    }
}

fn to_real(z: Complex64) -> f64 {
    z.re
}

fn resolve_schedule(cfg: &mut JobConfig, bandwidth: f64) -> Schedule {
    let s = &mut cfg.schedule;
    let schedule = match &s.windows {
        Some(w) => Schedule {
            radii: s.radii.clone(),
            windows: w.clone(),
            margin: s.margin,
        },
        None => {
            let mut d = Schedule::with_default_windows(
                s.radii.clone(),
                bandwidth,
                s.window_count,
                s.window_cap,
            );
            d.margin = s.margin;
            d
        }
    };
    s.windows = Some(schedule.windows.clone());
    schedule
}

fn center_id(spec: Option<SiteSpec>, builtin: Option<Builtin>) -> Site {
    match (spec, builtin) {
        (None, _) => 0,
        (Some(SiteSpec::Id(k)), _) => k,
        (Some(SiteSpec::Pair([i, j])), _) => z2_encode(i, j),
    }
}

fn site_id(spec: SiteSpec) -> Site {
    match spec {
        SiteSpec::Id(k) => k,
        SiteSpec::Pair([i, j]) => z2_encode(i, j),
    }
}

fn build_metric(cfg: &mut JobConfig) -> Result<AnyProblem, JobError> {
    let ks = cfg.kernel.clone().expect("checked");
    let lattice_bw = ks
        .toeplitz
        .iter()
        .map(|c| c.hop.iter().map(|h| h.abs()).sum::<i64>())
        .max()
        .unwrap_or(0);
    let radial_bw = ks.radial.iter().map(|r| r.distance).fold(0.0, f64::max);
    let guess_bw = (lattice_bw as f64).max(radial_bw).max(1.0);
    let schedule = resolve_schedule(cfg, guess_bw);
    let max_window = *schedule.windows.iter().max().unwrap_or(&0);

    let space: Arc<SiteSpace> = match cfg.problem {
        ProblemKind::Graph => {
            let g = graph_model(cfg)?;
            g.space().clone()
        }
        _ => match (&cfg.model.builtin, &cfg.model.points) {
            (Some(b), _) => {
                let w = *cfg.model.window.get_or_insert(max_window + lattice_bw);
                Arc::new(match b {
                    Builtin::Z => SiteSpace::integer_window(-w, w)?,
                    Builtin::Z2 => SiteSpace::grid_window(w)?,
                })
            }
            (None, Some(table)) => Arc::new(point_space(table, cfg.model.ud_alpha.unwrap_or(1.0))?),
            (None, None) => unreachable!("checked"),
        },
    };
    let center = center_id(cfg.model.center, cfg.model.builtin);
    let kernel = metric_kernel(cfg, &ks, &space)?;
    let is_real = kernel.entries().iter().all(|e| e.2.im == 0.0);
    let oracle = cfg
        .oracle_edges
        .map(|[a, b]| (a, b))
        .or_else(|| z_oracle(cfg, &ks));
    Ok(if is_real {
        AnyProblem::Real(Problem::Metric {
            kernel: kernel.map(to_real),
            center,
            oracle,
        })
    } else {
        AnyProblem::Complex(Problem::Metric {
            kernel,
            center,
            oracle,
        })
    })
}

/// Symbol range of a pure Toeplitz kernel on `Z` with finitely supported
/// potential: a compact perturbation, so the essential spectrum is the range.
fn z_oracle(cfg: &JobConfig, ks: &KernelSection) -> Option<(f64, f64)> {
    if cfg.problem != ProblemKind::MetricSpace
        || cfg.model.builtin != Some(Builtin::Z)
        || ks.toeplitz.is_empty()
        || ks.file.is_some()
        || !ks.radial.is_empty()
    {
        return None;
    }
    let coeffs: Vec<(i64, Complex64)> = ks
        .toeplitz
        .iter()
        .map(|c| (c.hop[0], Complex64::new(c.re, c.im)))
        .collect();
    let h = HoppingSymbol::toeplitz(&coeffs);
    let r = symbol_range(&h, &SeqPoint::constant('a'), cfg.flags.oracle_grid.max(1)).ok()?;
    Some((r.range.lo, r.range.hi))
}

fn graph_model(cfg: &JobConfig) -> Result<GraphModel, JobError> {
    Ok(match (&cfg.model.edges, &cfg.model.edges_file) {
        (Some(edges), _) => {
            let text: String = edges
                .iter()
                .map(|(x, y, w)| format!("{x} {y} {w:?}\n"))
                .collect();
            GraphModel::from_edge_list(&text)?
        }
        (None, Some(path)) => GraphModel::from_edge_list(&std::fs::read_to_string(path)?)?,
        (None, None) => unreachable!("checked"),
    })
}

fn point_space(table: &crate::config::PointTable, alpha: f64) -> Result<SiteSpace, JobError> {
    if table.ids.len() != table.coords.len() {
        return Err(config_error("model.points", "ids and coords differ in length").into());
    }
    let coords: HashMap<Site, Vec<f64>> = table
        .ids
        .iter()
        .copied()
        .zip(table.coords.iter().cloned())
        .collect();
    let norm = table.norm;
    let metric = Metric::Custom(Arc::new(move |x, y| {
        let (a, b) = (&coords[&x], &coords[&y]);
        let diffs = a.iter().zip(b).map(|(p, q)| (p - q).abs());
        match norm {
            Norm::L1 => diffs.sum(),
            Norm::L2 => diffs.map(|d| d * d).sum::<f64>().sqrt(),
            Norm::Linf => diffs.fold(0.0, f64::max),
        }
    }));
    Ok(build_space(
        table.ids.iter().copied(),
        metric,
        alpha,
        &[1.0, 2.0],
    )?)
}

fn metric_kernel(
    cfg: &JobConfig,
    ks: &KernelSection,
    space: &Arc<SiteSpace>,
) -> Result<BandKernel<Complex64>, JobError> {
    let mut total = BandKernel::<Complex64>::zero(space.clone());
    if !ks.toeplitz.is_empty() {
        let dim = match cfg.model.builtin {
            Some(Builtin::Z) => 1,
            Some(Builtin::Z2) => 2,
            None => {
                return Err(config_error("kernel.toeplitz", "needs a builtin lattice").into());
            }
        };
        let mut entries = Vec::new();
        let mut bw = 0;
        for c in &ks.toeplitz {
            if c.hop.len() != dim {
                return Err(
                    config_error("kernel.toeplitz", format!("hops need {dim} components")).into(),
                );
            }
            bw = bw.max(c.hop.iter().map(|h| h.abs()).sum::<i64>());
        }
        for y in space.sites().iter() {
            for c in &ks.toeplitz {
                let x = match dim {
                    1 => y + c.hop[0],
                    _ => {
                        let (i, j) = persson::space::z2_decode(y);
                        z2_encode(i + c.hop[0], j + c.hop[1])
                    }
                };
                if space.sites().contains(x) {
                    entries.push((x, y, Complex64::new(c.re, c.im)));
                }
            }
        }
        let part = BandKernel::from_entries(space.clone(), entries, bw as f64)
            .map_err(|e| JobError::Config(config_error("kernel.toeplitz", e.to_string())))?;
        total = total.add(&part)?;
    }
    if !ks.radial.is_empty() {
        let bw = ks.radial.iter().map(|r| r.distance).fold(0.0, f64::max);
        let part = BandKernel::from_fn(space.clone(), bw, |x, y| {
            let d = space.dist(x, y);
            ks.radial
                .iter()
                .find(|r| (r.distance - d).abs() <= 1e-12 * (1.0 + d))
                .map_or(Complex64::new(0.0, 0.0), |r| Complex64::new(r.re, r.im))
        })?;
        total = total.add(&part)?;
    }
    if !ks.potential.is_empty() {
        let mut acc: HashMap<Site, Complex64> = HashMap::new();
        for p in &ks.potential {
            *acc.entry(site_id(p.site)).or_default() += Complex64::new(p.re, p.im);
        }
        let part =
            BandKernel::from_entries(space.clone(), acc.into_iter().map(|(s, v)| (s, s, v)), 0.0)
                .map_err(|e| JobError::Config(config_error("kernel.potential", e.to_string())))?;
        total = total.add(&part)?;
    }
    if let Some(path) = &ks.file {
        let part =
            BandKernel::<Complex64>::from_text(space.clone(), &std::fs::read_to_string(path)?)
                .map_err(|e| JobError::Config(config_error("kernel.file", e.to_string())))?;
        total = total.add(&part)?;
    }
    if let Some(kind) = ks.graph {
        if cfg.problem != ProblemKind::Graph {
            return Err(config_error("kernel.graph", "only for graph problems").into());
        }
        let g = graph_model(cfg)?;
        let part = graph_kernel(&g, kind)?.map(|v| Complex64::new(v, 0.0));
        total = total.add(&part)?;
    }
    Ok(total)
}

fn build_symbol(sec: &SymbolSection) -> Result<HoppingSymbol<Complex64>, JobError> {
    let h = if !sec.rows.is_empty() {
        let width = sec.rows[0].pattern.chars().count();
        if width.is_multiple_of(2) {
            return Err(config_error("symbol.rows[0].pattern", "length must be odd").into());
        }
        let rows = sec
            .rows
            .iter()
            .map(|r| SymbolRow {
                pattern: r.pattern.clone(),
                hop: r.k,
                value: Complex64::new(r.re, r.im),
            })
            .collect();
        HoppingSymbol::new(width / 2, rows)
    } else if let Some(t) = &sec.table {
        HoppingSymbol::from_table(t)
    } else if let Some(p) = &sec.file {
        HoppingSymbol::from_table(&std::fs::read_to_string(p)?)
    } else {
        return Err(config_error("symbol", "give `rows`, `table` or `file`").into());
    };
    h.map_err(|e| JobError::Config(config_error("symbol", e.to_string())))
}

fn build_subshift(cfg: &mut JobConfig) -> Result<AnyProblem, JobError> {
    let m = &mut cfg.model;
    let flag = cfg.flags.m_from_zero;
    let generator = apply_m_convention(m.generator.as_ref().expect("checked"), flag);
    m.generator = Some(generator.clone());
    m.limit_generators = m
        .limit_generators
        .iter()
        .map(|g| apply_m_convention(g, flag))
        .collect();
    let alphabet = Alphabet::new(m.alphabet.as_deref().unwrap_or_default().chars())
        .map_err(|e| config_error("model.alphabet", e.to_string()))?;
    let check = *m.check.get_or_insert_with(Default::default);
    let mut model = SubshiftModel::new(alphabet, generator, m.limit_generators.clone(), &check)
        .map_err(|e| JobError::Config(config_error("model", e.to_string())))?;
    if let Some(r) = m.search_radius {
        model = model.with_search_radius(r);
    }
    let symbol = build_symbol(cfg.symbol.as_ref().expect("checked"))?;
    if let Some(c) = symbol
        .letters()
        .into_iter()
        .find(|&c| !model.alphabet().contains(c))
    {
        return Err(config_error(
            "symbol",
            format!("pattern letter {c:?} is not in the alphabet"),
        )
        .into());
    }
    let bandwidth = symbol.max_hop() as f64;
    resolve_schedule(cfg, bandwidth.max(1.0));
    let is_real = symbol.rows().iter().all(|r| r.value.im == 0.0);
    Ok(if is_real {
        AnyProblem::Real(Problem::Subshift {
            model,
            symbol: symbol.map(to_real),
        })
    } else {
        AnyProblem::Complex(Problem::Subshift { model, symbol })
    })
}

fn ladder_options(cfg: &JobConfig) -> LadderOptions {
    LadderOptions {
        eigen: EigenOptions {
            mode: cfg.eigen.mode,
            tol: cfg.tolerances.eigen,
            dense_threshold: cfg.eigen.dense_threshold,
            max_iter: cfg.eigen.max_iter,
            trace: false,
        },
        audit: cfg.flags.audits,
        stabilization_tol: cfg.tolerances.stabilization,
        oracle: cfg.flags.oracle,
        oracle_grid: cfg.flags.oracle_grid,
        oracle_window: cfg.flags.oracle_window,
    }
}

fn current_schedule(cfg: &JobConfig) -> Schedule {
    Schedule {
        radii: cfg.schedule.radii.clone(),
        windows: cfg.schedule.windows.clone().expect("resolved"),
        margin: cfg.schedule.margin,
    }
}

type Files = Vec<(&'static str, String)>;

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn scalar_name<T: Scalar>() -> &'static str {
    if T::IS_REAL {
        "real"
    } else {
        "complex"
    }
}

fn dispatch<T: Scalar>(
    cmd: Command,
    cfg: &JobConfig,
    problem: &Problem<T>,
) -> Result<(Files, Outcome), JobError> {
    match cmd {
        Command::Estimate => estimate(cfg, problem),
        Command::Verify => verify(cfg, problem),
        Command::Info => info(cfg, problem),
    }
}

fn oracle_agreement(report: &EdgeReport, tol: f64) -> Option<Value> {
    let o = report.oracle.as_ref()?;
    let dl = (report.persson_lower.mid() - o.lower).abs();
    let du = (report.persson_upper.mid() - o.upper).abs();
    Some(json!({
        "lower_diff": dl,
        "upper_diff": du,
        "tolerance": tol,
        "agrees": dl <= tol + o.error_bound && du <= tol + o.error_bound,
        "oracle_certified": o.certified,
    }))
}

fn fmt_interval(s: &persson::eigen::SpectralInterval) -> String {
    format!(
        "[{:.12}, {:.12}]{}",
        s.lo,
        s.hi,
        if s.certified { "" } else { " (uncertified)" }
    )
}

fn estimate<T: Scalar>(
    cfg: &JobConfig,
    problem: &Problem<T>,
) -> Result<(Files, Outcome), JobError> {
    let opts = ladder_options(cfg);
    let schedule = current_schedule(cfg);
    let (report, gap) = if cfg.flags.full_spectrum {
        let g = full_vs_essential_gap(problem, &schedule, &opts)?;
        let extra = json!({
            "full": g.full,
            "lower_gap": g.lower_gap,
            "upper_gap": g.upper_gap,
            "consistent": g.consistent,
        });
        (g.ladder, Some(extra))
    } else {
        (compression_ladder(problem, &schedule, &opts)?, None)
    };
    let agreement = oracle_agreement(&report, cfg.tolerances.oracle);
    let mut lines = vec![
        format!("persson_lower {}", fmt_interval(&report.persson_lower)),
        format!("persson_upper {}", fmt_interval(&report.persson_upper)),
    ];
    if let Some(o) = &report.oracle {
        lines.push(format!(
            "oracle [{:.12}, {:.12}] error bound {:.3e}{}",
            o.lower,
            o.upper,
            o.error_bound,
            if o.certified { "" } else { " (uncertified)" }
        ));
    }
    if let Some(g) = &gap {
        lines.push(format!(
            "full-truncation gap lower {} upper {}",
            g["lower_gap"], g["upper_gap"]
        ));
    }
    for f in &report.audit_flags {
        lines.push(format!(
            "audit ({}) {:?} at R={} L={}: {}",
            f.audit, f.edge, f.radius, f.window, f.detail
        ));
    }
    if !report.all_certified {
        lines.push("some intervals are not certified".into());
    }
    let doc = json!({
        "command": "estimate",
        "scalar": scalar_name::<T>(),
        "report": report,
        "oracle_agreement": agreement,
        "gap": gap,
    });
    let failed = cfg.flags.audits == AuditMode::Strict && !report.audit_flags.is_empty();
    let files = vec![
        ("report.json", pretty(&doc)),
        ("edges.csv", report.to_csv()),
        ("ladder_min.dat", report.ladder_dat(Edge::Min)),
        ("ladder_max.dat", report.ladder_dat(Edge::Max)),
    ];
    Ok((
        files,
        Outcome {
            lines,
            failed,
            ..Outcome::default()
        },
    ))
}

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    detail: Value,
}

fn check(name: &str, passed: bool, detail: Value) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn first_asymmetry<T: Scalar>(k: &BandKernel<T>, tol: f64) -> Option<(Site, Site, T, T)> {
    k.entries().iter().find_map(|&(x, y, v)| {
        let w = k.get(y, x).conj();
        ((v - w).modulus() > tol).then_some((x, y, v, w))
    })
}

fn verify<T: Scalar>(cfg: &JobConfig, problem: &Problem<T>) -> Result<(Files, Outcome), JobError> {
    let vs = &cfg.verify;
    let mut checks = Vec::new();
    let w = vs.window;

    if let Problem::Subshift { model, symbol } = problem {
        let r = validate_symbol(symbol, model, w)?;
        checks.push(check(
            "symbol self-adjointness",
            r.self_adjoint.is_empty(),
            json!(r.self_adjoint.iter().take(5).collect::<Vec<_>>()),
        ));
        checks.push(check(
            "covariance",
            r.covariance.is_empty(),
            json!({"shift_margin": r.shift_margin, "witnesses": r.covariance.iter().take(5).collect::<Vec<_>>()}),
        ));
        let mut mismatched = Vec::new();
        let mut shells = vec![Shell::Full];
        for i in 1..=3 {
            shells.push(model.fell_shell(i)?);
        }
        for shell in &shells {
            let a = subshift_operator(symbol, model.generator(), shell, w)?;
            let b = main_orbit_operator(symbol, model, shell, w)?;
            if !a.same_entries(&b) {
                mismatched.push(shell.radius());
            }
        }
        checks.push(check(
            "orbit coherence",
            mismatched.is_empty(),
            json!({"mismatched_shells": mismatched}),
        ));
    }

    let (k, window) = problem.truncation(w)?;
    let asym = first_asymmetry(&k, persson::eigen::SELF_ADJOINT_TOL);
    checks.push(check(
        "kernel self-adjointness",
        asym.is_none(),
        match asym {
            Some((x, y, v, w)) => json!({
                "row": x, "col": y,
                "value": format!("{v:?}"), "conj_transpose": format!("{w:?}"),
            }),
            None => Value::Null,
        },
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let ids: Vec<Site> = window.iter().collect();
    let mut worst = 0.0f64;
    let mut nonzero = 0;
    for _ in 0..vs.samples {
        let m = rng.random_range(0..=ids.len().min(8));
        let removed: Vec<Site> = ids.choose_multiple(&mut rng, m).copied().collect();
        let set = SiteSet::cofinite(&window, removed);
        let a = k.defect(&k, &set)?;
        let b = k.defect_direct(&k, &set)?;
        if !a.is_zero() {
            nonzero += 1;
        }
        let diff = a.sub(&b)?;
        worst = worst.max(diff.sup_bound());
    }
    let scale = 1.0 + k.sup_bound() * k.sup_bound();
    checks.push(check(
        "defect identity",
        worst <= 1e-12 * scale,
        json!({"samples": vs.samples, "max_difference": worst, "nonzero_defects": nonzero}),
    ));

    let sa = asym.is_none();
    if sa {
        let e = extreme_eigs(&k, &window, &ladder_options(cfg).eigen)?;
        let lam = e.min.lo.abs().max(e.max.hi.abs());
        let schur = k.schur_bound(&window);
        let hahn = k.hahn_norm(&window);
        let slack = 1e-12 * (1.0 + hahn);
        let ok = e.max.lo <= schur + slack && -e.min.hi <= schur + slack && schur <= hahn + slack;
        checks.push(check(
            "norm chain",
            ok,
            json!({"max_abs_eigenvalue": lam, "schur_bound": schur, "hahn_norm": hahn}),
        ));

        let mut opts = ladder_options(cfg);
        opts.audit = AuditMode::Warn;
        opts.oracle = false;
        let sched = Schedule {
            radii: vs.radii.clone(),
            windows: vs.windows.clone(),
            margin: None,
        };
        let ladder = compression_ladder(problem, &sched, &opts)?;
        checks.push(check(
            "monotonicity audits",
            ladder.audit_flags.is_empty(),
            json!(ladder.audit_flags),
        ));
    }

    let failed = checks.iter().any(|c| !c.passed);
    let lines = checks
        .iter()
        .map(|c| {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            if c.passed {
                format!("{tag} {}", c.name)
            } else {
                format!("{tag} {}: {}", c.name, c.detail)
            }
        })
        .collect();
    let doc = json!({"command": "verify", "scalar": scalar_name::<T>(), "passed": !failed, "checks": checks});
    Ok((
        vec![("verify.json", pretty(&doc))],
        Outcome {
            lines,
            failed,
            ..Outcome::default()
        },
    ))
}

fn info<T: Scalar>(cfg: &JobConfig, problem: &Problem<T>) -> Result<(Files, Outcome), JobError> {
    let is = &cfg.info;
    let mut lines = Vec::new();
    let doc = match problem {
        Problem::Subshift { model, symbol } => {
            let dict = model.dictionary(is.max_len, is.window)?;
            let sizes: Vec<usize> = (0..=is.max_len)
                .map(|n| dict.iter().filter(|w| w.len() == n).count())
                .collect();
            lines.push(format!(
                "dictionary sizes by length 0..={}: {}",
                is.max_len,
                sizes
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            ));
            let mut shells = Vec::new();
            for i in 1..=is.max_shell {
                let shell = model.fell_shell(i)?;
                let inside = trace_set(model.generator(), &shell, is.window)?.len();
                let total = (2 * (is.window - i as i64) + 1) as usize;
                lines.push(format!(
                    "shell M_{i}: {inside} of {total} orbit sites inside"
                ));
                shells.push(json!({"index": i, "inside": inside, "outside": total - inside}));
            }
            let probe = model.probe();
            let periodicity = match &probe.periodicity {
                Periodicity::Periodic { period } => format!("periodic with period {period}"),
                Periodicity::NonPeriodic { checked_up_to, .. } => {
                    format!("no period up to {checked_up_to}")
                }
                Periodicity::Inconclusive => "inconclusive".into(),
            };
            let isolation = probe
                .isolation_radius
                .map_or("none found".to_string(), |q| q.to_string());
            lines.push(format!(
                "admissibility probe: {periodicity}, isolation radius {isolation}"
            ));
            json!({
                "command": "info",
                "dictionary_sizes": sizes,
                "shells": shells,
                "probe": probe,
                "symbol_radius": symbol.radius(),
                "hop_support": symbol.hop_support(),
            })
        }
        Problem::Metric { kernel, center, .. } => {
            let space = kernel.space();
            let all = space.sites();
            lines.push(format!(
                "{} sites, bandwidth {}",
                space.len(),
                kernel.bandwidth()
            ));
            lines.push(format!(
                "hahn norm {:.6}, schur bound {:.6}",
                kernel.hahn_norm(all),
                kernel.schur_bound(all)
            ));
            json!({
                "command": "info",
                "sites": space.len(),
                "center": center,
                "bandwidth": kernel.bandwidth(),
                "nnz": kernel.nnz(),
                "hahn_norm": kernel.hahn_norm(all),
                "schur_bound": kernel.schur_bound(all),
                "ud_alpha": space.ud_alpha(),
                "bg_profile": space.bg_profile(),
            })
        }
    };
    Ok((
        vec![("info.json", pretty(&doc))],
        Outcome {
            lines,
            ..Outcome::default()
        },
    ))
}
