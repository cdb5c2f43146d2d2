//! Parameter sweeps over the three engines.
//!
//! Grid points are independent and run on the current rayon pool; results
//! are collected in grid order, so the output does not depend on the number
//! of worker threads.

use rayon::prelude::*;

use ribotide_core::analytic::{limit_exit_flow, phi, rho_star};
use ribotide_core::dynamic::{relax, RelaxOptions};
use ribotide_core::stationary::{solve_stationary, DEFAULT_TOL};
use ribotide_core::tasep::{point_seed, simulate, SimOptions, SimResult};
use ribotide_core::{DensityProfile, EngineTag, ModelParams, UorfGeometry};

use crate::error::RunError;
use crate::table::{Cell, Table};

/// `k / denom` for `k` in `first..=last`; exact decimal grid points.
pub fn decimal_grid(first: u32, last: u32, denom: u32) -> Vec<f64> {
    (first..=last).map(|k| k as f64 / denom as f64).collect()
}

/// Exit-flow sweep over upstream densities and conversion probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub rho0_grid: Vec<f64>,
    pub c_values: Vec<f64>,
    pub geometry: UorfGeometry,
    pub engines: Vec<EngineTag>,
    pub tasep: SimOptions,
    pub seed: u64,
    pub v: f64,
}

impl SweepSpec {
    /// 100/200/100 lattice, six conversion probabilities, `rho0` from 0.01
    /// to 0.99, deterministic and limit engines.
    pub fn figure3() -> Self {
        let geometry = UorfGeometry::new(100, 200, 100).expect("valid geometry");
        Self {
            rho0_grid: decimal_grid(1, 99, 100),
            c_values: vec![0.025, 0.035, 0.05, 0.1, 0.2, 0.3],
            geometry,
            engines: vec![EngineTag::Deterministic, EngineTag::Limit],
            tasep: SimOptions::for_geometry(&geometry),
            seed: 1,
            v: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.rho0_grid.is_empty() || self.c_values.is_empty() {
            return Err(RunError::Usage("rho0 and c grids must be non-empty".into()));
        }
        for &rho0 in &self.rho0_grid {
            ModelParams::new(rho0, self.c_values[0], self.v).map_err(usage)?;
        }
        for &c in &self.c_values {
            ModelParams::new(self.rho0_grid[0], c, self.v).map_err(usage)?;
        }
        if self.engines.is_empty() {
            return Err(RunError::Usage("no engine selected".into()));
        }
        if self.engines.contains(&EngineTag::Tasep) && self.tasep.sample_sweeps == 0 {
            return Err(RunError::Usage("--sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

fn usage(e: ribotide_core::Error) -> RunError {
    RunError::Usage(e.to_string())
}

/// One point of the exit-flow sweep. Engines that were not requested, or
/// that failed, leave `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure3Row {
    pub rho0: f64,
    pub c: f64,
    pub j3_tasep: Option<f64>,
    pub se_tasep: Option<f64>,
    pub j3_det: Option<f64>,
    pub j3_limit: Option<f64>,
}

/// An engine failure at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub rho0: f64,
    pub c: f64,
    pub engine: EngineTag,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure3Table {
    pub rows: Vec<Figure3Row>,
    pub failures: Vec<PointFailure>,
}

impl Figure3Table {
    pub const HEADERS: [&'static str; 6] = ["rho0", "c", "j3_tasep", "se_tasep", "j3_det", "j3_limit"];

    pub fn table(&self) -> Table {
        let mut t = Table::new(&Self::HEADERS);
        for r in &self.rows {
            t.push(vec![
                r.rho0.into(),
                r.c.into(),
                r.j3_tasep.into(),
                r.se_tasep.into(),
                r.j3_det.into(),
                r.j3_limit.into(),
            ]);
        }
        t
    }

    /// Rows for one conversion probability, in grid order.
    pub fn curve(&self, c: f64) -> Vec<&Figure3Row> {
        self.rows.iter().filter(|r| r.c == c).collect()
    }
}

/// Deterministic exit flow: the stationary solver up to `rho0 = 1/2`,
/// time relaxation above.
pub fn deterministic_exit_flow(params: &ModelParams, g: &UorfGeometry) -> Result<f64, ribotide_core::Error> {
    if params.rho0 <= 0.5 {
        Ok(solve_stationary(params, g, DEFAULT_TOL)?.j3)
    } else {
        Ok(relax(params, g, &RelaxOptions::for_params(params))?.j3)
    }
}

/// Stationary profile from the same engines as [`deterministic_exit_flow`].
pub fn deterministic_profile(params: &ModelParams, g: &UorfGeometry) -> Result<DensityProfile, ribotide_core::Error> {
    if params.rho0 <= 0.5 {
        solve_stationary(params, g, DEFAULT_TOL)?.to_profile(g)
    } else {
        Ok(relax(params, g, &RelaxOptions::for_params(params))?.profile)
    }
}

/// Exit flow against `rho0` for every engine in `spec.engines`. Engine
/// errors are recorded per point and do not stop the sweep. TASEP point `i`
/// (row-major over `c`, then `rho0`) is seeded with `point_seed(seed, i)`.
pub fn figure3_sweep(spec: &SweepSpec) -> Result<Figure3Table, RunError> {
    spec.validate()?;
    let g = spec.geometry;
    let points: Vec<(usize, f64, f64)> = spec
        .c_values
        .iter()
        .flat_map(|&c| spec.rho0_grid.iter().map(move |&rho0| (c, rho0)))
        .enumerate()
        .map(|(i, (c, rho0))| (i, c, rho0))
        .collect();
    let has = |e: EngineTag| spec.engines.contains(&e);
    let results: Vec<(Figure3Row, Vec<PointFailure>)> = points
        .par_iter()
        .map(|&(i, c, rho0)| {
            let mut row = Figure3Row {
                rho0,
                c,
                j3_tasep: None,
                se_tasep: None,
                j3_det: None,
                j3_limit: None,
            };
            let mut failures = Vec::new();
            let mut fail = |engine, e: ribotide_core::Error| {
                failures.push(PointFailure {
                    rho0,
                    c,
                    engine,
                    message: e.to_string(),
                })
            };
            let params = ModelParams::new(rho0, c, spec.v).expect("validated");
            if has(EngineTag::Tasep) {
                match simulate(&params, &g, point_seed(spec.seed, i as u64), &spec.tasep) {
                    Ok(sim) => {
                        row.j3_tasep = Some(sim.j3_hat);
                        row.se_tasep = Some(sim.se_j3).filter(|s| s.is_finite());
                    }
                    Err(e) => fail(EngineTag::Tasep, e),
                }
            }
            if has(EngineTag::Deterministic) {
                match deterministic_exit_flow(&params, &g) {
                    Ok(j3) => row.j3_det = Some(j3),
                    Err(e) => fail(EngineTag::Deterministic, e),
                }
            }
            if has(EngineTag::Limit) && rho0 < 0.5 {
                match limit_exit_flow(rho0, params.c0(&g)) {
                    Ok(j3) => row.j3_limit = Some(j3),
                    Err(e) => fail(EngineTag::Limit, e),
                }
            }
            (row, failures)
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (row, f) in results {
        rows.push(row);
        failures.extend(f);
    }
    Ok(Figure3Table { rows, failures })
}

/// TASEP runs on a grid, with full counters. Seeding matches
/// [`figure3_sweep`].
pub fn tasep_runs(
    rho0_grid: &[f64],
    c_values: &[f64],
    g: &UorfGeometry,
    seed: u64,
    opts: &SimOptions,
) -> Result<Vec<(ModelParams, u64, SimResult)>, RunError> {
    let points: Vec<(u64, ModelParams)> = c_values
        .iter()
        .flat_map(|&c| rho0_grid.iter().map(move |&rho0| (rho0, c)))
        .enumerate()
        .map(|(i, (rho0, c))| {
            ModelParams::with_unit_velocity(rho0, c)
                .map(|p| (point_seed(seed, i as u64), p))
                .map_err(usage)
        })
        .collect::<Result<_, _>>()?;
    points
        .par_iter()
        .map(|&(s, p)| {
            simulate(&p, g, s, opts)
                .map(|r| (p, s, r))
                .map_err(|e| RunError::numeric(format!("tasep at rho0 = {}, c = {}", p.rho0, p.c), e))
        })
        .collect()
}

pub const TASEP_HEADERS: [&str; 10] = [
    "rho0",
    "c",
    "seed",
    "j3_hat",
    "se_j3",
    "entries",
    "exits_scanning",
    "conversions",
    "collisions",
    "elong_terminations",
];

pub fn tasep_table(runs: &[(ModelParams, u64, SimResult)]) -> Table {
    let mut t = Table::new(&TASEP_HEADERS);
    for (p, seed, r) in runs {
        let s = &r.stats;
        t.push(vec![
            p.rho0.into(),
            p.c.into(),
            (*seed).into(),
            r.j3_hat.into(),
            Some(r.se_j3).filter(|x| x.is_finite()).into(),
            s.entries.into(),
            s.exits_scanning.into(),
            s.conversions.into(),
            s.collisions.into(),
            s.elong_terminations.into(),
        ]);
    }
    t
}

/// Sup-norm distance between the deterministic and limit exit flows as the
/// coding segment grows with `c = c0 / n2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub c0: f64,
    pub n2_values: Vec<usize>,
    pub sup_errors: Vec<f64>,
    /// Grid point of the largest deterministic exit flow, per `n2`.
    pub peak_rho0: Vec<f64>,
}

impl ConvergenceReport {
    pub const HEADERS: [&'static str; 2] = ["n2", "sup_error"];

    pub fn table(&self) -> Table {
        let mut t = Table::new(&Self::HEADERS);
        for (&n2, &e) in self.n2_values.iter().zip(&self.sup_errors) {
            t.push(vec![n2.into(), e.into()]);
        }
        t
    }

    /// `sup_error / (ln n2 / n2)` per row.
    pub fn rate_ratios(&self) -> Vec<f64> {
        self.n2_values
            .iter()
            .zip(&self.sup_errors)
            .map(|(&n, &e)| e / ((n as f64).ln() / n as f64))
            .collect()
    }
}

/// Convergence sweep with upstream and downstream lengths `n1`, `n3`.
pub fn figure4_convergence(
    c0: f64,
    n2_values: &[usize],
    rho0_grid: &[f64],
    n1: usize,
    n3: usize,
) -> Result<ConvergenceReport, RunError> {
    if n2_values.is_empty() || rho0_grid.is_empty() {
        return Err(RunError::Usage("n2 and rho0 lists must be non-empty".into()));
    }
    if n2_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RunError::Usage("--n2 values must be strictly increasing".into()));
    }
    if let Some(&r) = rho0_grid.iter().find(|&&r| !(r > 0.0 && r < 0.5)) {
        return Err(RunError::Usage(format!("--rho0 {r} out of range (0, 0.5)")));
    }
    let mut geometries = Vec::with_capacity(n2_values.len());
    for &n2 in n2_values {
        let g = UorfGeometry::new(n1, n2, n3).map_err(usage)?;
        ModelParams::from_scaled(rho0_grid[0], c0, 1.0, &g)
            .map_err(|e| RunError::Usage(format!("c0 / n2 for n2 = {n2}: {e}")))?;
        geometries.push(g);
    }
    let limits: Vec<f64> = rho0_grid
        .iter()
        .map(|&r| limit_exit_flow(r, c0).map_err(|e| RunError::numeric(format!("limit at rho0 = {r}"), e)))
        .collect::<Result<_, _>>()?;
    let tasks: Vec<(usize, usize)> = (0..geometries.len())
        .flat_map(|a| (0..rho0_grid.len()).map(move |b| (a, b)))
        .collect();
    let flows: Vec<f64> = tasks
        .par_iter()
        .map(|&(a, b)| {
            let g = &geometries[a];
            let p = ModelParams::from_scaled(rho0_grid[b], c0, 1.0, g).expect("validated");
            solve_stationary(&p, g, DEFAULT_TOL)
                .map(|s| s.j3)
                .map_err(|e| RunError::numeric(format!("stationary solution at n2 = {}, rho0 = {}", g.n2, p.rho0), e))
        })
        .collect::<Result<_, _>>()?;
    let mut sup_errors = Vec::new();
    let mut peak_rho0 = Vec::new();
    for row in flows.chunks(rho0_grid.len()) {
        let err = row.iter().zip(&limits).fold(0.0f64, |m, (j, l)| m.max((j - l).abs()));
        let peak = (0..row.len()).fold(0, |best, i| if row[i] > row[best] { i } else { best });
        sup_errors.push(err);
        peak_rho0.push(rho0_grid[peak]);
    }
    Ok(ConvergenceReport {
        c0,
        n2_values: n2_values.to_vec(),
        sup_errors,
        peak_rho0,
    })
}

/// Stationary lattice profile for one upstream density, plus the limit
/// curve along the coding segment when `rho0 < 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub rho0: f64,
    pub profile: DensityProfile,
    /// `(n, rho_star, phi(rho_star))` for `n` in `n1..=n1 + n2`.
    pub limit: Option<Vec<(usize, f64, f64)>>,
}

impl ProfileTable {
    pub const HEADERS: [&'static str; 4] = ["n", "rho_s", "rho_e", "flow_s"];
    pub const LIMIT_HEADERS: [&'static str; 3] = ["n", "rho_star", "flow_star"];

    /// One row per physical site.
    pub fn table(&self) -> Table {
        let mut t = Table::new(&Self::HEADERS);
        let flows = self.profile.scanning_flows();
        for (n, &f) in flows.iter().enumerate() {
            t.push(vec![
                n.into(),
                self.profile.rho_s()[n].into(),
                self.profile.rho_e()[n].into(),
                f.into(),
            ]);
        }
        t
    }

    pub fn limit_table(&self) -> Option<Table> {
        let rows = self.limit.as_ref()?;
        let mut t = Table::new(&Self::LIMIT_HEADERS);
        for &(n, r, f) in rows {
            t.push(vec![n.into(), r.into(), f.into()]);
        }
        Some(t)
    }
}

/// Profiles for each upstream density at conversion probability `c`.
pub fn figure56_profiles(rho0_list: &[f64], c: f64, g: &UorfGeometry) -> Result<Vec<ProfileTable>, RunError> {
    let params: Vec<ModelParams> = rho0_list
        .iter()
        .map(|&r| ModelParams::with_unit_velocity(r, c).map_err(usage))
        .collect::<Result<_, _>>()?;
    params
        .par_iter()
        .map(|p| {
            let profile = deterministic_profile(p, g)
                .map_err(|e| RunError::numeric(format!("profile at rho0 = {}", p.rho0), e))?;
            let limit = if p.rho0 < 0.5 {
                let c0 = p.c0(g);
                let rows = (g.start()..=g.stop())
                    .map(|n| {
                        let tau = (n - g.start()) as f64 / g.n2 as f64;
                        let r = rho_star(p.rho0, tau, c0)?;
                        Ok((n, r, phi(r)))
                    })
                    .collect::<Result<Vec<_>, ribotide_core::Error>>()
                    .map_err(|e| RunError::numeric(format!("limit profile at rho0 = {}", p.rho0), e))?;
                Some(rows)
            } else {
                None
            };
            Ok(ProfileTable {
                rho0: p.rho0,
                profile,
                limit,
            })
        })
        .collect()
}

/// `(rho0, c0, rho_star(rho0, 1, c0), limit exit flow)` rows.
pub fn limit_table(rho0_list: &[f64], c0: f64) -> Result<Table, RunError> {
    let mut t = Table::new(&["rho0", "c0", "rho_star", "j3_limit"]);
    for &rho0 in rho0_list {
        let r = rho_star(rho0, 1.0, c0).map_err(usage)?;
        t.push(vec![rho0.into(), c0.into(), r.into(), Cell::Float(phi(r))]);
    }
    Ok(t)
}
