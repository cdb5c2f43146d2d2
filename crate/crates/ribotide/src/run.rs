//! Command dispatch and file output.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ribotide_core::tasep::SimOptions;

use crate::config::{RunConfig, SubcommandKind};
use crate::error::RunError;
use crate::experiments::{
    figure3_sweep, figure4_convergence, figure56_profiles, limit_table, tasep_runs, tasep_table, SweepSpec,
};
use crate::table::Table;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "RIBOTIDE_THREADS";

/// What a successful run wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: usize,
    pub files: Vec<PathBuf>,
    pub elapsed: Duration,
}

impl Summary {
    /// One line for standard output.
    pub fn line(&self, subcommand: SubcommandKind) -> String {
        let target = match self.files.as_slice() {
            [one] => one.display().to_string(),
            many => format!("{} files", many.len()),
        };
        format!(
            "{}: wrote {} rows to {} in {:.3} s",
            subcommand.as_str(),
            self.rows,
            target,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Worker count from [`THREADS_ENV`]; `None` means hardware parallelism.
pub fn worker_threads() -> Result<Option<usize>, RunError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(RunError::Usage(format!("{THREADS_ENV}={s} must be a positive integer"))),
        },
        Err(e) => Err(RunError::Usage(format!("{THREADS_ENV}: {e}"))),
    }
}

/// Runs the command on a pool sized by [`THREADS_ENV`].
pub fn run(cfg: &RunConfig) -> Result<Summary, RunError> {
    let threads = worker_threads()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| RunError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(cfg))
}

fn sim_options(cfg: &RunConfig) -> SimOptions {
    let g = cfg.geometry();
    let defaults = SimOptions::for_geometry(&g);
    SimOptions {
        burn_in_sweeps: cfg.burn_in.unwrap_or(defaults.burn_in_sweeps),
        sample_sweeps: cfg.sweeps,
        entry: cfg.entry,
        ..defaults
    }
}

/// `0.3` -> `0.3`; the shortest decimal that reads back as the same float.
fn file_tag(x: f64) -> String {
    format!("{x}")
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    files: Vec<PathBuf>,
    rows: usize,
}

impl Writer<'_> {
    fn write(&mut self, stem: &str, table: &Table) -> Result<(), RunError> {
        let path = Path::new(&self.cfg.output).join(format!("{stem}.{}", self.cfg.format.extension()));
        crate::table::write_atomic(&path, table.render(self.cfg.format).as_bytes())?;
        self.rows += table.rows.len();
        self.files.push(path);
        Ok(())
    }
}

fn run_in_pool(cfg: &RunConfig) -> Result<Summary, RunError> {
    let start = Instant::now();
    let mut w = Writer {
        cfg,
        files: Vec::new(),
        rows: 0,
    };
    let mut deferred = None;
    match cfg.subcommand {
        SubcommandKind::Sweep => {
            let spec = SweepSpec {
                rho0_grid: cfg.rho0.clone(),
                c_values: cfg.c.clone(),
                geometry: cfg.geometry(),
                engines: cfg.engines.clone(),
                tasep: sim_options(cfg),
                seed: cfg.seed,
                v: cfg.v,
            };
            let result = figure3_sweep(&spec)?;
            w.write("exit_flow", &result.table())?;
            if let Some(first) = result.failures.first() {
                for f in &result.failures {
                    eprintln!(
                        "warning: {} failed at rho0 = {}, c = {}: {}",
                        f.engine.as_str(),
                        f.rho0,
                        f.c,
                        f.message
                    );
                }
                deferred = Some(RunError::PartialFailure {
                    failed: result.failures.len(),
                    total: result.rows.len(),
                    first: format!("{} at rho0 = {}: {}", first.engine.as_str(), first.rho0, first.message),
                });
            }
        }
        SubcommandKind::Convergence => {
            let report = figure4_convergence(cfg.c0, &cfg.n2, &cfg.rho0, cfg.n1, cfg.n3)?;
            w.write("convergence", &report.table())?;
        }
        SubcommandKind::Profile => {
            let profiles = figure56_profiles(&cfg.rho0, cfg.c[0], &cfg.geometry())?;
            for p in &profiles {
                let tag = file_tag(p.rho0);
                w.write(&format!("profile_rho0={tag}"), &p.table())?;
                if let Some(t) = p.limit_table() {
                    w.write(&format!("limit_profile_rho0={tag}"), &t)?;
                }
            }
        }
        SubcommandKind::Tasep => {
            let runs = tasep_runs(&cfg.rho0, &cfg.c, &cfg.geometry(), cfg.seed, &sim_options(cfg))?;
            w.write("tasep", &tasep_table(&runs))?;
        }
        SubcommandKind::Limit => {
            w.write("limit", &limit_table(&cfg.rho0, cfg.c0)?)?;
        }
    }
    if let Some(e) = deferred {
        return Err(e);
    }
    Ok(Summary {
        rows: w.rows,
        files: w.files,
        elapsed: start.elapsed(),
    })
}
