//! Continuous limit of the stationary solution for long coding segments.
//!
//! With `c = c0 / n2` and `n2 -> inf`, the scanning density along the coding
//! segment tends to
//!
//! ```text
//! rho_star(rho0, tau) = -W(-2 rho0 exp(-rho0 (2 + c0 tau))) / 2,   tau = m / n2,
//! ```
//!
//! where `W` is the principal branch of the Lambert W function, and the exit
//! flow tends to `phi(rho_star(rho0, 1))` with `phi(rho) = rho (1 - rho)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmath::{abs, exp, ln, sqrt};

const INV_E: f64 = 0.367_879_441_171_442_33;
const MAX_ITER: usize = 50;

/// Principal branch `W0` of the Lambert W function on `[-1/e, inf)`.
///
/// Starts from the branch-point series near `-1/e`, from `ln(1 + x)` based
/// guesses in the middle range and from the log asymptotics for large `x`,
/// then runs Halley iterations.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::LambertDomain(x));
    }
    if x < -INV_E {
        // `-1/e` computed at the call site may round one ulp below ours.
        if -INV_E - x <= 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(Error::LambertDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }

    let mut w = initial_guess(x);
    for _ in 0..MAX_ITER {
        let ew = exp(w);
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 <= 0.0 {
            w = -1.0 + 1e-9;
            continue;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        let next = w - step;
        let done = abs(step) <= 4.0 * f64::EPSILON * (1.0 + abs(next));
        w = if next < -1.0 { -1.0 } else { next };
        if done {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.32 {
        // Series in p = sqrt(2 (e x + 1)) around the branch point.
        let p = sqrt((2.0 * (core::f64::consts::E * x + 1.0)).max(0.0));
        -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * 11.0 / 72.0))
    } else if x < 3.0 {
        let l = libm::log1p(x);
        l * (1.0 - libm::log1p(l) / (2.0 + l))
    } else {
        let l1 = ln(x);
        let l2 = ln(l1);
        l1 - l2 + l2 / l1
    }
}

/// Stationary TASEP flow `phi(rho) = rho (1 - rho)`.
#[inline]
pub fn phi(rho: f64) -> f64 {
    rho * (1.0 - rho)
}

/// Inverse of `phi` restricted to `[0, 1/2]`.
pub fn phi_inverse(j: f64) -> Result<f64> {
    if !(0.0..=0.25).contains(&j) {
        return Err(Error::OutOfRange {
            name: "flow",
            value: j,
            range: "[0, 1/4]",
        });
    }
    // Rationalised form of (1 - sqrt(1 - 4j)) / 2; avoids cancellation at small j.
    Ok(2.0 * j / (1.0 + sqrt(1.0 - 4.0 * j)))
}

fn check_limit_density(rho0: f64) -> Result<()> {
    if rho0 > 0.0 && rho0 < 0.5 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name: "rho0",
            value: rho0,
            range: "(0, 1/2)",
        })
    }
}

fn check_nonnegative(name: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: x,
            range: "[0, inf)",
        })
    }
}

/// Limit scanning density at relative position `tau` along the coding segment.
pub fn rho_star(rho0: f64, tau: f64, c0: f64) -> Result<f64> {
    check_limit_density(rho0)?;
    check_nonnegative("tau", tau)?;
    check_nonnegative("c0", c0)?;
    let arg = -2.0 * rho0 * exp(-rho0 * (2.0 + c0 * tau));
    Ok(-0.5 * lambert_w0(arg)?)
}

/// Limit exit flow `phi(rho_star(rho0, 1))`.
pub fn limit_exit_flow(rho0: f64, c0: f64) -> Result<f64> {
    Ok(phi(rho_star(rho0, 1.0, c0)?))
}

/// Upstream density at which [`limit_exit_flow`] peaks, `1 / (2 + c0)`.
pub fn limit_peak_density(c0: f64) -> f64 {
    1.0 / (2.0 + c0)
}

/// One sample of the limit profile along the coding segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitCurveSample {
    pub tau: f64,
    pub rho_hat: f64,
    pub j_hat: f64,
}

/// Samples the limit density and flow at `grid_points` uniform positions on
/// `[0, 1]`, starting from `rho_hat(0) = rho0`.
pub fn limit_profile(rho0: f64, c0: f64, grid_points: usize) -> Result<Vec<LimitCurveSample>> {
    if grid_points < 2 {
        return Err(Error::OutOfRange {
            name: "grid_points",
            value: grid_points as f64,
            range: "[2, inf)",
        });
    }
    let last = (grid_points - 1) as f64;
    (0..grid_points)
        .map(|i| {
            let tau = if i + 1 == grid_points { 1.0 } else { i as f64 / last };
            let rho_hat = rho_star(rho0, tau, c0)?;
            Ok(LimitCurveSample {
                tau,
                rho_hat,
                j_hat: phi(rho_hat),
            })
        })
        .collect()
}
