//! Explicit time relaxation of the deterministic balance equations.
//!
//! Site 0 is pinned to the reservoir density and the ghost site `n_star` is
//! empty. The start codon is evolved as one total density and split into
//! scanning and elongating parts after every step.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath::abs;
use crate::model::{elongating_flow, scanning_flow, DensityProfile, ModelParams, UorfGeometry};

/// Profile plus the total start-codon density and the elapsed time.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicState {
    pub profile: DensityProfile,
    pub rho_start_total: f64,
    pub time: f64,
}

impl DynamicState {
    /// Empty lattice with the reservoir density at site 0.
    pub fn empty(params: &ModelParams, g: &UorfGeometry) -> Self {
        let mut rho_s = vec![0.0; g.n_star + 1];
        rho_s[0] = params.rho0;
        Self {
            profile: DensityProfile::from_parts_unchecked(rho_s, vec![0.0; g.n_star + 1]),
            rho_start_total: 0.0,
            time: 0.0,
        }
    }

    /// Uniform scanning density `fill` on every interior site; used to check
    /// that the steady state does not depend on the initial condition.
    pub fn uniform(params: &ModelParams, g: &UorfGeometry, fill: f64) -> Result<Self> {
        let mut rho_s = vec![fill; g.n_star + 1];
        let mut rho_e = vec![0.0; g.n_star + 1];
        rho_s[0] = params.rho0;
        rho_s[g.n_star] = 0.0;
        rho_s[g.n1] = (1.0 - params.c) * fill;
        rho_e[g.n1] = params.c * fill;
        Ok(Self {
            profile: DensityProfile::new(rho_s, rho_e, g)?,
            rho_start_total: fill,
            time: 0.0,
        })
    }

    /// Builds a state from a profile, taking the start-codon total from it.
    pub fn from_profile(profile: DensityProfile, g: &UorfGeometry) -> Self {
        let total = profile.rho_s()[g.n1] + profile.rho_e()[g.n1];
        Self {
            profile,
            rho_start_total: total,
            time: 0.0,
        }
    }
}

/// Time derivatives of every density. `rho_s[n1]` and `rho_e[n1]` hold the
/// split of `start_total`; pinned sites have zero rate.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityRates {
    pub rho_s: Vec<f64>,
    pub rho_e: Vec<f64>,
    pub start_total: f64,
}

impl DensityRates {
    fn zeros(len: usize) -> Self {
        Self {
            rho_s: vec![0.0; len],
            rho_e: vec![0.0; len],
            start_total: 0.0,
        }
    }

    /// Largest rate magnitude over all evolved quantities.
    pub fn max_abs(&self) -> f64 {
        self.rho_s
            .iter()
            .chain(&self.rho_e)
            .fold(abs(self.start_total), |m, &x| m.max(abs(x)))
    }
}

/// Right-hand side of the balance equations; returns the largest rate.
fn rates_into(
    rho_s: &[f64],
    rho_e: &[f64],
    params: &ModelParams,
    g: &UorfGeometry,
    fs: &mut [f64],
    fe: &mut [f64],
    out: &mut DensityRates,
) -> f64 {
    let n_star = g.n_star;
    let v = params.v;
    for n in 0..n_star {
        fs[n] = scanning_flow(rho_s[n], rho_s[n + 1] + rho_e[n + 1]);
        fe[n] = elongating_flow(rho_e[n], rho_e[n + 1]);
    }
    let d_total = v * (fs[g.n1 - 1] - fs[g.n1] - fe[g.n1]);
    out.start_total = d_total;
    let mut max_rate = abs(d_total);
    for n in (1..n_star).filter(|&n| n != g.n1) {
        let d = v * (fs[n - 1] - fs[n] - rho_s[n] * rho_e[n - 1]);
        out.rho_s[n] = d;
        max_rate = max_rate.max(abs(d));
    }
    out.rho_s[g.n1] = (1.0 - params.c) * d_total;
    out.rho_e[g.n1] = params.c * d_total;
    for n in g.n1 + 1..g.stop() {
        let d = v * (fe[n - 1] - fe[n]);
        out.rho_e[n] = d;
        max_rate = max_rate.max(abs(d));
    }
    max_rate
}

/// Time derivatives at `state`.
pub fn rhs(state: &DynamicState, params: &ModelParams, g: &UorfGeometry) -> DensityRates {
    let len = g.n_star + 1;
    let mut out = DensityRates::zeros(len);
    let mut fs = vec![0.0; g.n_star];
    let mut fe = vec![0.0; g.n_star];
    rates_into(
        state.profile.rho_s(),
        state.profile.rho_e(),
        params,
        g,
        &mut fs,
        &mut fe,
        &mut out,
    );
    out
}

/// Exit flow of scanning particles off the last physical site.
pub fn exit_flow_of(profile: &DensityProfile) -> f64 {
    let n = profile.sites();
    scanning_flow(profile.rho_s()[n - 1], profile.rho_s()[n] + profile.rho_e()[n])
}

/// Integration settings for [`relax`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOptions {
    pub dt: f64,
    pub steady_tol: f64,
    pub max_time: f64,
}

impl RelaxOptions {
    /// `dt = 0.1 / v`, `steady_tol = 1e-10`, `max_time = 1e6`.
    pub fn for_params(params: &ModelParams) -> Self {
        Self {
            dt: 0.1 / params.v,
            steady_tol: 1e-10,
            max_time: 1e6,
        }
    }
}

/// Steady state reached by [`relax`].
#[derive(Debug, Clone, PartialEq)]
pub struct Relaxed {
    pub profile: DensityProfile,
    pub j3: f64,
    pub time: f64,
    pub max_rate: f64,
}

/// Integrates from the empty lattice until every rate is below
/// `opts.steady_tol`.
pub fn relax(params: &ModelParams, g: &UorfGeometry, opts: &RelaxOptions) -> Result<Relaxed> {
    relax_from(DynamicState::empty(params, g), params, g, opts)
}

/// Explicit Euler from an arbitrary initial state. Densities are never
/// clamped: leaving `[0, 1]` aborts with [`Error::BoundViolation`].
pub fn relax_from(state: DynamicState, params: &ModelParams, g: &UorfGeometry, opts: &RelaxOptions) -> Result<Relaxed> {
    if !(opts.dt > 0.0) {
        return Err(Error::OutOfRange {
            name: "dt",
            value: opts.dt,
            range: "(0, inf)",
        });
    }
    if !(params.rho0 > 0.0 && params.rho0 < 1.0) {
        return Err(Error::OutOfRange {
            name: "rho0",
            value: params.rho0,
            range: "(0, 1)",
        });
    }
    let DynamicState {
        profile,
        mut rho_start_total,
        time: t0,
    } = state;
    let mut steps = 0u64;
    let mut time = t0;
    let (mut rho_s, mut rho_e) = profile.into_parts();
    rho_s[0] = params.rho0;
    let len = g.n_star + 1;
    let mut rates = DensityRates::zeros(len);
    let mut fs = vec![0.0; g.n_star];
    let mut fe = vec![0.0; g.n_star];
    let dt = opts.dt;
    let c = params.c;
    loop {
        let max_rate = rates_into(&rho_s, &rho_e, params, g, &mut fs, &mut fe, &mut rates);
        if max_rate < opts.steady_tol {
            let profile = DensityProfile::from_parts_unchecked(rho_s, rho_e);
            let j3 = exit_flow_of(&profile);
            return Ok(Relaxed {
                profile,
                j3,
                time,
                max_rate,
            });
        }
        if time >= opts.max_time {
            return Err(Error::NotConverged { time, max_rate });
        }
        for n in 1..g.n_star {
            rho_s[n] += dt * rates.rho_s[n];
        }
        for n in g.n1 + 1..g.stop() {
            rho_e[n] += dt * rates.rho_e[n];
        }
        rho_start_total += dt * rates.start_total;
        rho_s[g.n1] = (1.0 - c) * rho_start_total;
        rho_e[g.n1] = c * rho_start_total;
        steps += 1;
        time = t0 + steps as f64 * dt;
        for n in 1..g.n_star {
            let (s, e) = (rho_s[n], rho_e[n]);
            if !(s >= 0.0 && e >= 0.0 && s + e <= 1.0) {
                return Err(Error::BoundViolation { site: n, time });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stationary::{solve_stationary, DEFAULT_TOL};

    #[test]
    fn empty_lattice_only_feeds_site_one() {
        let g = UorfGeometry::new(5, 4, 3).unwrap();
        let p = ModelParams::new(0.3, 0.1, 2.0).unwrap();
        let r = rhs(&DynamicState::empty(&p, &g), &p, &g);
        assert!((r.rho_s[1] - 2.0 * 0.3).abs() < 1e-15);
        assert!(r.rho_s.iter().enumerate().all(|(n, &d)| n == 1 || d == 0.0));
        assert!(r.rho_e.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn rates_telescope() {
        let g = UorfGeometry::new(4, 5, 3).unwrap();
        let p = ModelParams::new(0.4, 0.2, 1.5).unwrap();
        let mut s = vec![0.0; 13];
        let mut e = vec![0.0; 13];
        for n in 0..12 {
            s[n] = 0.05 + 0.03 * ((n * 7) % 5) as f64;
        }
        s[0] = 0.4;
        for n in 4..9 {
            e[n] = 0.02 * (n - 3) as f64;
        }
        let prof = DensityProfile::new(s.clone(), e.clone(), &g).unwrap();
        let state = DynamicState::from_profile(prof.clone(), &g);
        let r = rhs(&state, &p, &g);
        let total: f64 = r.rho_s.iter().chain(&r.rho_e).sum();
        let fs = prof.scanning_flows();
        let fe = prof.elongating_flows();
        let coll: f64 = (1..12).map(|n| s[n] * e[n - 1]).sum();
        let expect = 1.5 * (fs[0] - fs[11] - fe[g.stop() - 1] - coll);
        assert!((total - expect).abs() < 1e-14, "{total} vs {expect}");
    }

    #[test]
    fn stationary_solution_is_a_fixed_point() {
        let g = UorfGeometry::new(40, 60, 30).unwrap();
        let p = ModelParams::new(0.3, 0.05, 1.0).unwrap();
        let sol = solve_stationary(&p, &g, DEFAULT_TOL).unwrap();
        let state = DynamicState::from_profile(sol.to_profile(&g).unwrap(), &g);
        assert!(rhs(&state, &p, &g).max_abs() <= 1e-8);
    }

    #[test]
    fn exit_flow_examples() {
        let g = UorfGeometry::new(2, 3, 2).unwrap();
        let mut s = vec![0.0; 8];
        s[6] = 0.1;
        let prof = DensityProfile::new(s, vec![0.0; 8], &g).unwrap();
        assert_eq!(exit_flow_of(&prof), 0.1);
        assert_eq!(exit_flow_of(&DensityProfile::zeros(&g)), 0.0);
    }

    #[test]
    fn relaxation_matches_stationary_solver() {
        let g = UorfGeometry::new(30, 50, 20).unwrap();
        let p = ModelParams::new(0.3, 0.05, 1.0).unwrap();
        let relaxed = relax(&p, &g, &RelaxOptions::for_params(&p)).unwrap();
        let sol = solve_stationary(&p, &g, DEFAULT_TOL).unwrap();
        assert!((relaxed.j3 - sol.j3).abs() < 1e-7);
        let stat = sol.to_profile(&g).unwrap();
        let sup = stat
            .rho_s()
            .iter()
            .zip(relaxed.profile.rho_s())
            .chain(stat.rho_e().iter().zip(relaxed.profile.rho_e()))
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(sup <= 1e-5);
    }

    #[test]
    fn steady_state_ignores_initial_condition_and_step() {
        let g = UorfGeometry::new(20, 30, 10).unwrap();
        let p = ModelParams::new(0.6, 0.05, 1.0).unwrap();
        let opts = RelaxOptions::for_params(&p);
        let a = relax(&p, &g, &opts).unwrap();
        let half = DynamicState::uniform(&p, &g, 0.5).unwrap();
        let b = relax_from(half, &p, &g, &opts).unwrap();
        assert!((a.j3 - b.j3).abs() < 1e-8);
        let c = relax(
            &p,
            &g,
            &RelaxOptions {
                dt: opts.dt / 2.0,
                ..opts
            },
        )
        .unwrap();
        assert!((a.j3 - c.j3).abs() < 1e-8);
    }

    #[test]
    fn vanishing_conversion_conserves_flow() {
        let g = UorfGeometry::new(20, 30, 10).unwrap();
        let p = ModelParams::new(0.4, 1e-8, 1.0).unwrap();
        let r = relax(&p, &g, &RelaxOptions::for_params(&p)).unwrap();
        assert!((r.j3 - 0.24).abs() < 1e-6);
    }

    #[test]
    fn oversized_step_reports_bound_violation() {
        let g = UorfGeometry::new(5, 5, 5).unwrap();
        let p = ModelParams::new(0.9, 0.1, 1.0).unwrap();
        let opts = RelaxOptions {
            dt: 3.0,
            steady_tol: 1e-10,
            max_time: 1e3,
        };
        assert!(matches!(relax(&p, &g, &opts), Err(Error::BoundViolation { .. })));
    }

    #[test]
    fn max_time_is_enforced() {
        let g = UorfGeometry::new(5, 5, 5).unwrap();
        let p = ModelParams::new(0.3, 0.1, 1.0).unwrap();
        let opts = RelaxOptions {
            dt: 0.1,
            steady_tol: 1e-10,
            max_time: 1.0,
        };
        assert!(matches!(relax(&p, &g, &opts), Err(Error::NotConverged { .. })));
    }
}
