//! Stationary solution of the deterministic balance equations.
//!
//! Upstream of the start codon the scanning flow is a constant `j1` and the
//! densities follow `rho[n + 1] = 1 - j1 / rho[n]`. Between the start and
//! stop codons the elongating flow is a constant `J` with
//! `R[m + 1] = 1 - J / R[m]` and `R[n2] = 0`. Downstream of the start codon
//! the scanning densities obey the coupled recursion
//!
//! ```text
//! rho2[m + 1] = 1 - j2[m] / rho2[m]
//! j2[m + 1]   = j2[m] - R[m + 1] rho2[m] - (R[m] - R[m + 2]) rho2[m + 1]
//! ```
//!
//! with `rho2[n2 + n3] = 0`, and the two sides are glued at the start codon by
//! `R[0] = c P`, `rho2[0] = (1 - c) P`, `j1 = j2[0] + J - rho2[0] R[1]`.
//!
//! Run forward, every one of these recursions multiplies perturbations by
//! `(1 - rho) / rho > 1` per site, so a forward shooting method loses all
//! significant digits after a few dozen sites. The forward operations
//! ([`density_iteration`], [`downstream_sweep`], [`residual`]) are kept for
//! analysis and small instances; [`solve_stationary`] runs every recursion
//! backward from its terminal zero, where the same maps contract, and
//! bisects on the start-codon density `P` and the exit flow `j3` instead.

use alloc::vec;
use alloc::vec::Vec;

use crate::analytic::phi;
use crate::error::{Error, Result};
use crate::fmath::abs;
use crate::model::{ModelParams, StationarySolution, UorfGeometry};

/// Default bracket width for every bisection in this module.
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 200;

/// Forward iterations treat densities below this as collapsed.
pub const DENSITY_FLOOR: f64 = 1e-14;

/// Why a forward iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// All requested steps were taken.
    Completed,
    /// A density fell to (or below) [`DENSITY_FLOOR`].
    DensityCollapsed,
    /// A flow became non-positive; the next density would reach 1.
    FlowExhausted,
}

/// Result of a forward density iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    /// `rho[0..=survived]`, all positive.
    pub values: Vec<f64>,
    /// Largest index `k` with `rho[0..=k]` all positive.
    pub survived: usize,
    /// First collapsed density, if any.
    pub terminal: Option<f64>,
    pub stop: StopReason,
}

impl IterationOutcome {
    pub fn completed(&self) -> bool {
        self.stop == StopReason::Completed
    }
}

/// Iterates `rho[k + 1] = 1 - j / rho[k]` from `rho[0] = rho0` for `n` steps,
/// stopping early when a density collapses.
pub fn density_iteration(j: f64, rho0: f64, n: usize) -> IterationOutcome {
    let mut values = Vec::with_capacity(n + 1);
    values.push(rho0);
    let mut rho = rho0;
    for _ in 0..n {
        let next = 1.0 - j / rho;
        if !(next >= DENSITY_FLOOR) {
            return IterationOutcome {
                survived: values.len() - 1,
                values,
                terminal: Some(next),
                stop: StopReason::DensityCollapsed,
            };
        }
        values.push(next);
        rho = next;
    }
    IterationOutcome {
        survived: n,
        values,
        terminal: None,
        stop: StopReason::Completed,
    }
}

/// Bisection on an increasing function: `too_high(x)` reports whether the
/// function at `x` is at or above its target. Runs to machine precision and
/// returns the final bracket.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut too_high: impl FnMut(f64) -> Result<bool>) -> Result<(f64, f64)> {
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if too_high(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let width = hi - lo;
    if !(width <= tol) {
        return Err(Error::ToleranceNotReached {
            iterations: MAX_BISECTIONS,
            width,
        });
    }
    Ok((lo, hi))
}

/// `rho[0]` of the constant-flow sequence ending in `rho[n] = 0`, built
/// backward with `rho[k] = j / (1 - rho[k + 1])`. Infinite once a density
/// reaches 1.
fn backward_head(j: f64, n: usize) -> f64 {
    let mut rho = 0.0;
    for _ in 0..n {
        let gap = 1.0 - rho;
        if gap <= 0.0 {
            return f64::INFINITY;
        }
        rho = j / gap;
        if rho >= 1.0 {
            return f64::INFINITY;
        }
    }
    rho
}

fn backward_fill(j: f64, n: usize, tail: f64) -> Vec<f64> {
    let mut rho = vec![0.0; n + 1];
    rho[n] = tail;
    for k in (0..n).rev() {
        rho[k] = j / (1.0 - rho[k + 1]);
    }
    rho
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "tol",
            value: tol,
            range: "(0, inf)",
        })
    }
}

/// Critical flow `psi_n(rho0)`: the flow for which the iteration started at
/// `rho0` reaches exactly zero at step `n`.
///
/// Bisects on `j` in `(phi(rho0), rho0]` using the backward sequence, whose
/// head `rho[0]` increases with `j`.
pub fn critical_flow_psi(rho0: f64, n: usize, tol: f64) -> Result<f64> {
    crate::model::check_open_unit("rho0", rho0)?;
    check_tol(tol)?;
    if n == 0 {
        return Err(Error::OutOfRange {
            name: "n",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let (lo, hi) = bisect(phi(rho0), rho0, tol, |j| Ok(backward_head(j, n) >= rho0))?;
    Ok(0.5 * (lo + hi))
}

/// Elongating flow `J = psi_n2(r0)` and the densities `R[0..=n2]`, strictly
/// decreasing to `R[n2] = 0`. Indices past `n2` are zero.
pub fn elongating_branch(r0: f64, n2: usize, tol: f64) -> Result<(f64, Vec<f64>)> {
    let j_big2 = critical_flow_psi(r0, n2, tol)?;
    Ok((j_big2, backward_fill(j_big2, n2, 0.0)))
}

/// Forward trajectory of the coupled recursion
/// `rho[k + 1] = 1 - j[k] / rho[k]`, `j[k + 1] = j[k] - r[k] rho[k] - delta[k] rho[k + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledTrajectory {
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
    pub stop: StopReason,
}

/// Runs the coupled recursion for `n` steps. Missing coefficients count as
/// zero.
pub fn coupled_iteration(j0: f64, rho0: f64, r: &[f64], delta: &[f64], n: usize) -> CoupledTrajectory {
    let coef = |s: &[f64], k: usize| s.get(k).copied().unwrap_or(0.0);
    let mut rho = Vec::with_capacity(n + 1);
    let mut j = Vec::with_capacity(n + 1);
    rho.push(rho0);
    j.push(j0);
    for k in 0..n {
        let next_rho = 1.0 - j[k] / rho[k];
        if !(next_rho >= DENSITY_FLOOR) {
            return CoupledTrajectory {
                rho,
                j,
                stop: StopReason::DensityCollapsed,
            };
        }
        let next_j = j[k] - coef(r, k) * rho[k] - coef(delta, k) * next_rho;
        rho.push(next_rho);
        j.push(next_j);
        if !(next_j > 0.0) {
            return CoupledTrajectory {
                rho,
                j,
                stop: StopReason::FlowExhausted,
            };
        }
    }
    CoupledTrajectory {
        rho,
        j,
        stop: StopReason::Completed,
    }
}

/// Forward sweep of the scanning densities downstream of the start codon,
/// for `n_total = n2 + n3` steps, given the elongating densities `r_elong`
/// (indices past its end count as zero).
///
/// Returns the densities `rho2[0..]` and the flows `j2[0..]`; `j2` has at
/// most `n_total` entries and is non-increasing.
pub fn downstream_sweep(j2_0: f64, rho2_0: f64, r_elong: &[f64], n_total: usize) -> (IterationOutcome, Vec<f64>) {
    let r = |m: usize| r_elong.get(m).copied().unwrap_or(0.0);
    let mut rho = Vec::with_capacity(n_total + 1);
    let mut j2 = Vec::with_capacity(n_total);
    rho.push(rho2_0);
    j2.push(j2_0);
    let mut stop = StopReason::Completed;
    let mut terminal = None;
    if !(j2_0 > 0.0) {
        stop = StopReason::FlowExhausted;
    } else {
        for m in 0..n_total {
            let next = 1.0 - j2[m] / rho[m];
            if !(next >= DENSITY_FLOOR) {
                stop = StopReason::DensityCollapsed;
                terminal = Some(next);
                break;
            }
            rho.push(next);
            if m + 1 == n_total {
                break;
            }
            let next_j = j2[m] - r(m + 1) * rho[m] - (r(m) - r(m + 2)) * next;
            j2.push(next_j);
            if !(next_j > 0.0) {
                stop = StopReason::FlowExhausted;
                break;
            }
        }
    }
    let outcome = IterationOutcome {
        survived: rho.len() - 1,
        values: rho,
        terminal,
        stop,
    };
    (outcome, j2)
}

/// Signed forward-shooting score for an upstream flow `j1`.
///
/// If the forward trajectory survives every step the score is the terminal
/// density `rho2[n2 + n3]` (positive when `j1` is too small). A trajectory
/// whose density collapses at step `k` scores `-(steps left) - |terminal|`;
/// one whose flow is exhausted would push densities up to 1 and scores
/// `1 + |flow|`. The score therefore decreases in `j1` and is continuous
/// across its root.
///
/// Forward iteration amplifies rounding by `(1 - rho) / rho` per site, so the
/// score is only meaningful on short lattices.
pub fn residual(j1: f64, params: &ModelParams, g: &UorfGeometry) -> f64 {
    let c = params.c;
    let k_total = g.downstream_len();
    let up = density_iteration(j1, params.rho0, g.n1);
    if !up.completed() {
        let left = (g.n1 - up.survived + k_total) as f64;
        return -left - abs(up.terminal.unwrap_or(0.0));
    }
    let start_total = up.values[g.n1];
    let Ok((j_big2, r_elong)) = elongating_branch(c * start_total, g.n2, DEFAULT_TOL) else {
        return f64::NAN;
    };
    let rho2_0 = (1.0 - c) * start_total;
    let j2_0 = j1 - j_big2 + rho2_0 * r_elong[1];
    let (outcome, j2) = downstream_sweep(j2_0, rho2_0, &r_elong, k_total);
    match outcome.stop {
        StopReason::Completed => outcome.values[k_total],
        StopReason::DensityCollapsed => {
            let left = (k_total - outcome.survived) as f64;
            -left - abs(outcome.terminal.unwrap_or(0.0))
        }
        StopReason::FlowExhausted => 1.0 + abs(*j2.last().unwrap_or(&0.0)),
    }
}

/// Downstream half of the stationary solution for a given start-codon
/// density `P`.
struct Downstream {
    j_big2: f64,
    r_elong: Vec<f64>,
    rho2: Vec<f64>,
    j2: Vec<f64>,
    j1: f64,
}

/// `rho2[0]` and `j2[0]` of the backward sweep ending in `rho2[k] = 0` with
/// exit flow `j3`, or `None` once a density leaves `(0, 1)`.
fn downstream_head(j3: f64, r: &[f64], k_total: usize) -> Option<(f64, f64)> {
    let rr = |m: usize| r.get(m).copied().unwrap_or(0.0);
    // rho2[k - 1] = j2[k - 1] = j3 because rho2[k] = 0.
    let (mut rho, mut j) = (j3, j3);
    for m in (0..k_total - 1).rev() {
        let gap = 1.0 - rho - rr(m + 1);
        if gap <= 0.0 {
            return None;
        }
        let prev = (j + (rr(m) - rr(m + 2)) * rho) / gap;
        if prev >= 1.0 {
            return None;
        }
        j = prev * (1.0 - rho);
        rho = prev;
    }
    Some((rho, j))
}

fn downstream_fill(j3: f64, r: &[f64], k_total: usize) -> (Vec<f64>, Vec<f64>) {
    let rr = |m: usize| r.get(m).copied().unwrap_or(0.0);
    let mut rho = vec![0.0; k_total + 1];
    let mut j = vec![0.0; k_total];
    rho[k_total - 1] = j3;
    j[k_total - 1] = j3;
    for m in (0..k_total - 1).rev() {
        rho[m] = (j[m + 1] + (rr(m) - rr(m + 2)) * rho[m + 1]) / (1.0 - rho[m + 1] - rr(m + 1));
        j[m] = rho[m] * (1.0 - rho[m + 1]);
    }
    (rho, j)
}

fn downstream_for(start_total: f64, c: f64, g: &UorfGeometry, tol: f64) -> Result<Downstream> {
    let k_total = g.downstream_len();
    let (j_big2, r_elong) = elongating_branch(c * start_total, g.n2, tol)?;
    let target = (1.0 - c) * start_total;
    // The backward map is order preserving in (rho, j), so rho2[0] increases
    // with j3; j3 = target already overshoots because densities grow backward.
    let (lo, hi) = bisect(0.0, target, tol, |j3| {
        Ok(downstream_head(j3, &r_elong, k_total).is_none_or(|(rho, _)| rho >= target))
    })?;
    let (rho2, j2) = downstream_fill(0.5 * (lo + hi), &r_elong, k_total);
    let j1 = j2[0] + j_big2 - rho2[0] * r_elong[1];
    Ok(Downstream {
        j_big2,
        r_elong,
        rho2,
        j2,
        j1,
    })
}

/// `rho1[0]` of the upstream sequence ending in `rho1[n1] = start_total`.
fn upstream_head(start_total: f64, j1: f64, n1: usize) -> f64 {
    let mut rho = start_total;
    for _ in 0..n1 {
        let gap = 1.0 - rho;
        if gap <= 0.0 {
            return f64::INFINITY;
        }
        rho = j1 / gap;
        if rho >= 1.0 {
            return f64::INFINITY;
        }
    }
    rho
}

/// Positive decreasing stationary solution for `0 < rho0 <= 1/2`.
///
/// Outer bisection on the start-codon density `P` in `(0, rho0)` matches the
/// upstream boundary `rho1[0] = rho0`; for each `P` an inner bisection on the
/// exit flow matches `rho2[0] = (1 - c) P`, and `J` comes from
/// [`elongating_branch`] with `R[0] = c P`. Upstream densities for larger
/// `rho0` saturate and are handled by [`crate::dynamic::relax`].
pub fn solve_stationary(params: &ModelParams, g: &UorfGeometry, tol: f64) -> Result<StationarySolution> {
    check_tol(tol)?;
    let rho0 = params.rho0;
    if !(rho0 > 0.0 && rho0 <= 0.5) {
        return Err(Error::OutOfRange {
            name: "rho0",
            value: rho0,
            range: "(0, 1/2]",
        });
    }
    let c = params.c;
    let overshoots = |p: f64| -> Result<bool> {
        let down = downstream_for(p, c, g, tol)?;
        Ok(upstream_head(p, down.j1, g.n1) >= rho0)
    };
    // As P -> 0 every flow vanishes and rho1[0] -> 0 < rho0, so only the
    // upper end needs checking.
    if !overshoots(rho0)? {
        return Err(Error::NoSignChange { lo: 0.0, hi: rho0 });
    }
    let (lo, hi) = bisect(0.0, rho0, tol, overshoots)?;
    let start_total = 0.5 * (lo + hi);
    let down = downstream_for(start_total, c, g, tol)?;

    let rho1 = backward_fill(down.j1, g.n1, start_total);
    let j3 = down.rho2[g.downstream_len() - 1];
    Ok(StationarySolution {
        rho1,
        rho2: down.rho2,
        r_elong: down.r_elong,
        j1: down.j1,
        j2: down.j2,
        j_big2: down.j_big2,
        j3,
    })
}
