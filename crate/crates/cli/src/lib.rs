//! Command implementations behind the `nmsse` binary.

pub mod config;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nmsse::basis::BasisSet;
use nmsse::bath::SpectralDensity;
use nmsse::hierarchy::{run_ensemble, EnsembleConfig, EnsembleResult};
use nmsse::noise::{trajectory_rng, CorrelatorAccumulator, NoiseEvaluator, NoiseRealization};
use nmsse::oracle::{exact_discrete, EdConfig};
use nmsse::{C64, Error};
use serde_json::json;

pub use config::RunConfig;
use config::{Format, SchemeChoice};
use table::Table;

/// Realizations per deterministic noise-check work unit.
const NOISE_CHUNK: usize = 256;

/// Closed-form or propagator residuals above this flag a basis as inconsistent.
pub const RESIDUAL_TOL: f64 = 1e-8;

pub const POPULATION_COLUMNS: [&str; 15] = [
    "t", "re_rho11", "im_rho11", "re_rho12", "im_rho12", "re_rho21", "im_rho21", "re_rho22",
    "im_rho22", "trace_re", "trace_im", "p1_norm", "p2_norm", "p1_se", "p2_se",
];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Io(String),
    #[error("compare: {0}")]
    Compare(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(Error::TooManyAborts { .. }) => 3,
            CliError::Core(
                Error::InvalidParameter(_)
                | Error::Unsupported(_)
                | Error::DegenerateExponential { .. }
                | Error::NonDiagonalEta
                | Error::BosonCutoff { .. },
            ) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Runs `f` on a pool of `threads` workers, or the global pool for 0.
fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// Seed and thread overrides go into the config so the echo reproduces the run.
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.seed {
            cfg.run.master_seed = s;
        }
        if let Some(t) = self.threads {
            cfg.run.threads = t;
        }
        if let Some(o) = &self.out {
            cfg.output.directory = o.clone();
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub result: EnsembleResult,
    pub wall_time: f64,
}

pub fn population_table(r: &EnsembleResult) -> Result<Table, CliError> {
    if r.rho.first().is_some_and(|m| m.nrows() != 2) {
        return Err(CliError::Config(
            "populations.csv holds two-level density matrices only".into(),
        ));
    }
    let mut t = Table::new(POPULATION_COLUMNS.iter().map(|s| s.to_string()).collect());
    for (i, &time) in r.times.iter().enumerate() {
        let m = &r.rho[i];
        let mut row = vec![time];
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            row.push(m[(a, b)].re);
            row.push(m[(a, b)].im);
        }
        row.extend([
            r.trace[i].re,
            r.trace[i].im,
            r.populations[i][0],
            r.populations[i][1],
            r.population_se[i][0],
            r.population_se[i][1],
        ]);
        t.push(row);
    }
    Ok(t)
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    if cfg.bath.scheme() != SchemeChoice::KeZhao {
        return Err(CliError::Config(
            "run supports bath.scheme = \"ke_zhao\" only".into(),
        ));
    }
    let setup = cfg.setup()?;
    let ens = EnsembleConfig {
        n_traj: cfg.run.n_traj,
        master_seed: cfg.run.master_seed,
        grid: setup.grid,
        noise: setup.noise.clone(),
        beta: cfg.bath.beta(),
    };
    let start = Instant::now();
    let result = with_threads(cfg.run.threads, || {
        run_ensemble(std::slice::from_ref(&setup.hierarchy), &ens)
    })??
    .remove(0);
    let wall_time = start.elapsed().as_secs_f64();

    let dir = cfg.output.directory.clone();
    create_dir(&dir)?;
    if cfg.output.formats.contains(&Format::Csv) {
        write_file(&dir.join("populations.csv"), &population_table(&result)?.to_csv())?;
    }
    if cfg.output.formats.contains(&Format::Json) {
        let meta = json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "master_seed": cfg.run.master_seed,
            "n_traj": cfg.run.n_traj,
            "n_completed": result.n_traj,
            "n_aborted": result.n_aborted,
            "batches": result.batches,
            "wall_time_s": wall_time,
            "hierarchy_dimension": result.dimension,
            "auxiliaries": setup.space.len(),
            "basis_functions": setup.basis.len(),
            "noise_modes": setup.noise.len(),
        });
        let text = serde_json::to_string_pretty(&meta).expect("meta is serializable");
        write_file(&dir.join("meta.json"), &text)?;
    }
    Ok(RunSummary {
        directory: dir,
        result,
        wall_time,
    })
}

fn linspace(end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![0.0],
        n => (0..n).map(|i| end * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Empirical noise correlators against their targets; writes `noise_check.csv`.
pub fn noise_check(cfg: &RunConfig, realizations: usize, points: usize) -> Result<Table, CliError> {
    if realizations < 2 || points == 0 {
        return Err(CliError::Config("noise-check needs at least 2 realizations and 1 time point".into()));
    }
    let bath = cfg.bath_spec()?;
    let grid = std::sync::Arc::new(cfg.frequency_grid());
    let beta = cfg.bath.beta();
    let seed = cfg.run.master_seed;
    let diosi = cfg.bath.scheme() == SchemeChoice::DiosiStrunz;
    let times = linspace(cfg.run.t_final, points);
    let step = if points > 1 { times[1] } else { 1.0 };
    let evaluator = NoiseEvaluator::new(&grid, 0.0, step, points.max(1));
    // Fixed chunks merged in order keep the sums independent of the pool size.
    let chunks = realizations.div_ceil(NOISE_CHUNK);
    let partial: Vec<CorrelatorAccumulator> = with_threads(cfg.run.threads, || {
        use rayon::prelude::*;
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = CorrelatorAccumulator::new(&times);
                let end = ((c + 1) * NOISE_CHUNK).min(realizations);
                for i in c * NOISE_CHUNK..end {
                    let mut rng = trajectory_rng(seed, i as u64);
                    let nr = if diosi {
                        NoiseRealization::sample_diosi_strunz(grid.clone(), beta, &mut rng)
                    } else {
                        NoiseRealization::sample(grid.clone(), beta, &mut rng)
                    };
                    let series = evaluator.evaluate(&nr);
                    let values: Vec<(C64, C64)> =
                        series.plus.iter().copied().zip(series.minus.iter().copied()).collect();
                    acc.push_values(values[0], &values[..times.len()]);
                }
                acc
            })
            .collect()
    })?;
    let mut acc = CorrelatorAccumulator::new(&times);
    for p in &partial {
        acc.merge(p);
    }
    let rows = acc.finish(&bath)?;
    let mut t = Table::new(
        [
            "t", "re_pp", "im_pp", "re_pp_se", "im_pp_se", "re_mm", "im_mm", "re_mm_se",
            "im_mm_se", "re_pm", "im_pm", "re_pm_se", "im_pm_se", "alpha1", "re_alpha_conj",
            "im_alpha_conj",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    );
    for r in rows {
        let mut row = vec![r.t];
        for e in [r.plus_plus, r.minus_minus, r.plus_minus] {
            row.extend([e.mean.re, e.mean.im, e.se.re, e.se.im]);
        }
        row.extend([r.target_alpha1, r.target_alpha_conj.re, r.target_alpha_conj.im]);
        t.push(row);
    }
    let dir = &cfg.output.directory;
    create_dir(dir)?;
    write_file(&dir.join("noise_check.csv"), &t.to_csv())?;
    Ok(t)
}

#[derive(Debug, Clone)]
pub struct BasisCheck {
    pub table: Table,
    pub max_residual: f64,
    pub flagged: bool,
}

/// Basis ODE residuals and aBCF reconstruction; writes `basis_check.csv`.
/// `perturb` adds `delta` to one entry of `eta` to exercise the flag.
pub fn basis_check(
    cfg: &RunConfig,
    points: usize,
    perturb: Option<(usize, usize, f64)>,
) -> Result<BasisCheck, CliError> {
    let bath = cfg.bath_spec()?;
    let mut basis = BasisSet::build(&bath, cfg.basis_choice())?;
    if let Some((row, col, delta)) = perturb {
        basis = basis.with_perturbed_eta(row, col, C64::from(delta))?;
    }
    let times = linspace(cfg.run.t_final, points);
    let report = basis.validate(&times);
    let mut t = Table::new(
        [
            "t", "ode_fd", "ode_closed", "propagator", "re_abcf", "im_abcf", "re_basis",
            "im_basis", "abcf_abs_err", "flag",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    );
    let mut max_residual: f64 = 0.0;
    for r in &report.rows {
        let target = bath.abcf(r.t)?;
        let fit = basis.reconstruct_abcf(r.t);
        // The finite difference is reported only: with h = 1e-5 its truncation
        // error grows like h^2 |eta|^3 and dominates for fast bases.
        let worst = r.ode_closed_form.max(r.propagator);
        max_residual = max_residual.max(worst);
        t.push(vec![
            r.t,
            r.ode_finite_difference,
            r.ode_closed_form,
            r.propagator,
            target.re,
            target.im,
            fit.re,
            fit.im,
            (target - fit).norm(),
            if worst > RESIDUAL_TOL { 1.0 } else { 0.0 },
        ]);
    }
    let dir = &cfg.output.directory;
    create_dir(dir)?;
    write_file(&dir.join("basis_check.csv"), &t.to_csv())?;
    Ok(BasisCheck {
        table: t,
        max_residual,
        flagged: max_residual > RESIDUAL_TOL,
    })
}

/// Exact diagonalization for a single-mode discrete bath on the output grid;
/// writes `oracle.csv` with columns shared by `populations.csv`.
pub fn oracle(cfg: &RunConfig, n_boson: usize) -> Result<Table, CliError> {
    let mode = match cfg.spectral_density() {
        SpectralDensity::Discrete { modes } if modes.len() == 1 => modes[0],
        _ => {
            return Err(CliError::Config(
                "oracle needs a discrete bath with exactly one mode".into(),
            ))
        }
    };
    let grid = cfg.time_grid()?;
    let ed = exact_discrete(&EdConfig {
        model: cfg.model(),
        mode,
        beta: cfg.bath.beta(),
        n_boson,
        dt: grid.dt * grid.stride as f64,
        t_final: grid.t_final(),
    })?;
    let mut t = Table::new(
        ["t", "p1_norm", "p2_norm", "trace_re"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    for ((time, p), tr) in ed.times.iter().zip(&ed.populations).zip(&ed.trace) {
        t.push(vec![*time, p[0], p[1], *tr]);
    }
    let dir = &cfg.output.directory;
    create_dir(dir)?;
    write_file(&dir.join("oracle.csv"), &t.to_csv())?;
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnReport {
    pub column: String,
    pub max_abs: f64,
    /// Largest `|a - b| / se`; NaN when neither file carries an error column.
    pub max_se_rel: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub columns: Vec<ColumnReport>,
}

impl CompareReport {
    pub fn pass(&self) -> bool {
        self.columns.iter().all(|c| c.pass)
    }
}

impl std::fmt::Display for CompareReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<12} {:>14} {:>14}  result", "column", "max_abs", "max_se_rel")?;
        for c in &self.columns {
            writeln!(
                f,
                "{:<12} {:>14.6e} {:>14.6e}  {}",
                c.column,
                c.max_abs,
                c.max_se_rel,
                if c.pass { "pass" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.pass() { "pass" } else { "FAIL" })
    }
}

/// Error column paired with a value column: `p1_norm` -> `p1_se`.
fn se_column(name: &str) -> Option<String> {
    name.strip_suffix("_norm").map(|p| format!("{p}_se"))
}

/// Column-wise comparison on a shared time grid. A point passes when
/// `|a - b| <= max(abs_tol, se_factor * se)`, with `se` the two files'
/// errors added in quadrature.
pub fn compare(
    a: &Table,
    b: &Table,
    abs_tol: f64,
    se_factor: f64,
    columns: Option<&[String]>,
) -> Result<CompareReport, CliError> {
    let (ta, tb) = (a.column("t"), b.column("t"));
    let (Some(ta), Some(tb)) = (ta, tb) else {
        return Err(CliError::Compare("both files need a `t` column".into()));
    };
    if ta.len() != tb.len()
        || ta
            .iter()
            .zip(&tb)
            .any(|(x, y)| (x - y).abs() > 1e-9 * x.abs().max(1.0))
    {
        return Err(CliError::Compare(format!(
            "time grids differ ({} vs {} rows)",
            ta.len(),
            tb.len()
        )));
    }
    let names: Vec<String> = match columns {
        Some(c) => c.to_vec(),
        None => a
            .header
            .iter()
            .filter(|h| *h != "t" && !h.ends_with("_se") && b.header.contains(h))
            .cloned()
            .collect(),
    };
    if names.is_empty() {
        return Err(CliError::Compare("no common columns".into()));
    }
    let mut out = Vec::new();
    for name in names {
        let (Some(ca), Some(cb)) = (a.column(&name), b.column(&name)) else {
            return Err(CliError::Compare(format!("column `{name}` missing")));
        };
        let se_name = se_column(&name);
        let se_of = |t: &Table| se_name.as_deref().and_then(|s| t.column(s));
        let (sa, sb) = (se_of(a), se_of(b));
        let has_se = sa.is_some() || sb.is_some();
        let mut report = ColumnReport {
            column: name,
            max_abs: 0.0,
            max_se_rel: if has_se { 0.0 } else { f64::NAN },
            pass: true,
        };
        for i in 0..ca.len() {
            let dev = (ca[i] - cb[i]).abs();
            let var = |s: &Option<Vec<f64>>| s.as_ref().map_or(0.0, |v| v[i] * v[i]);
            let se = (var(&sa) + var(&sb)).sqrt();
            report.max_abs = report.max_abs.max(dev);
            if has_se && se > 0.0 {
                report.max_se_rel = report.max_se_rel.max(dev / se);
            }
            // NaN-safe: a NaN deviation never passes.
            if !(dev <= abs_tol.max(se_factor * se)) {
                report.pass = false;
            }
        }
        out.push(report);
    }
    Ok(CompareReport { columns: out })
}

pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Table::parse(&text).map_err(|e| CliError::Compare(format!("{}: {e}", path.display())))
}
