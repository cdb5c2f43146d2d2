//! Domain types shared by every engine.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Segment lengths of the lattice.
///
/// Sites `0..n1` lie before the start codon, `n1..n1 + n2` between start and
/// stop codon, and `n1 + n2..n_star` after the stop codon. `n_star` is stored
/// redundantly and checked so that a typo in a configuration is caught.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UorfGeometry {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub n_star: usize,
}

impl UorfGeometry {
    /// Builds a geometry with `n_star = n1 + n2 + n3`.
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        validate_geometry(Self {
            n1,
            n2,
            n3,
            n_star: n1 + n2 + n3,
        })
    }

    /// Start codon position.
    pub fn start(&self) -> usize {
        self.n1
    }

    /// Stop codon position.
    pub fn stop(&self) -> usize {
        self.n1 + self.n2
    }

    /// Number of sites downstream of the start codon, `n2 + n3`.
    pub fn downstream_len(&self) -> usize {
        self.n2 + self.n3
    }

    /// Whether elongating particles may occupy site `n`.
    pub fn is_coding(&self, n: usize) -> bool {
        n >= self.start() && n < self.stop()
    }
}

/// Checks every [`UorfGeometry`] invariant and hands the geometry back.
pub fn validate_geometry(g: UorfGeometry) -> Result<UorfGeometry> {
    if g.n1 < 1 {
        return Err(Error::InvalidGeometry("n1 must be at least 1"));
    }
    if g.n2 < 2 {
        return Err(Error::InvalidGeometry("n2 must be at least 2"));
    }
    if g.n1.checked_add(g.n2).and_then(|s| s.checked_add(g.n3)) != Some(g.n_star) {
        return Err(Error::InvalidGeometry("n_star mismatch"));
    }
    Ok(g)
}

/// Upstream density, conversion probability and particle velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Density of scanning particles at site 0.
    pub rho0: f64,
    /// Probability that a scanning particle is converted at the start codon.
    pub c: f64,
    /// Hopping rate in sites per unit time.
    pub v: f64,
}

impl ModelParams {
    pub fn new(rho0: f64, c: f64, v: f64) -> Result<Self> {
        check_open_unit("rho0", rho0)?;
        check_open_unit("c", c)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::OutOfRange {
                name: "v",
                value: v,
                range: "(0, inf)",
            });
        }
        Ok(Self { rho0, c, v })
    }

    /// Parameters with unit velocity.
    pub fn with_unit_velocity(rho0: f64, c: f64) -> Result<Self> {
        Self::new(rho0, c, 1.0)
    }

    /// Parameters from the scaled conversion rate `c0 = c * n2`.
    pub fn from_scaled(rho0: f64, c0: f64, v: f64, g: &UorfGeometry) -> Result<Self> {
        Self::new(rho0, c0 / g.n2 as f64, v)
    }

    /// Scaled conversion rate `c0 = c * n2`.
    pub fn c0(&self, g: &UorfGeometry) -> f64 {
        self.c * g.n2 as f64
    }
}

pub(crate) fn check_open_unit(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: x,
            range: "(0, 1)",
        })
    }
}

/// Flow of scanning particles from a site with density `rho_s_n` into a site
/// whose total occupancy is `rho_next_total`.
#[inline]
pub fn scanning_flow(rho_s_n: f64, rho_next_total: f64) -> f64 {
    rho_s_n * (1.0 - rho_next_total)
}

/// Flow of elongating particles. Scanning occupancy of the next site does not
/// block them: they displace scanning particles on contact.
#[inline]
pub fn elongating_flow(rho_e_n: f64, rho_e_next: f64) -> f64 {
    rho_e_n * (1.0 - rho_e_next)
}

/// Per-site densities of scanning (`rho_s`) and elongating (`rho_e`)
/// particles on sites `0..=n_star`; site `n_star` is an empty ghost site.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    rho_s: Vec<f64>,
    rho_e: Vec<f64>,
}

impl DensityProfile {
    /// Validates bounds, the ghost site and the absence of elongating
    /// particles outside the coding segment.
    pub fn new(rho_s: Vec<f64>, rho_e: Vec<f64>, g: &UorfGeometry) -> Result<Self> {
        if rho_s.len() != g.n_star + 1 || rho_e.len() != g.n_star + 1 {
            return Err(Error::InvalidGeometry("profile arrays must have n_star + 1 entries"));
        }
        for (n, (&s, &e)) in rho_s.iter().zip(&rho_e).enumerate() {
            // NaN fails every comparison below, so spell the checks positively.
            let ok = s >= 0.0 && e >= 0.0 && s + e <= 1.0;
            if !ok {
                return Err(Error::OutOfRange {
                    name: "density",
                    value: if (0.0..=1.0).contains(&s) { e } else { s },
                    range: "rho_s, rho_e >= 0 and rho_s + rho_e <= 1",
                });
            }
            if e != 0.0 && !g.is_coding(n) {
                return Err(Error::OutOfRange {
                    name: "rho_e outside [n1, n1 + n2)",
                    value: e,
                    range: "{0}",
                });
            }
        }
        if rho_s[g.n_star] != 0.0 {
            return Err(Error::OutOfRange {
                name: "ghost-site rho_s",
                value: rho_s[g.n_star],
                range: "{0}",
            });
        }
        Ok(Self { rho_s, rho_e })
    }

    /// The empty lattice.
    pub fn zeros(g: &UorfGeometry) -> Self {
        Self {
            rho_s: vec![0.0; g.n_star + 1],
            rho_e: vec![0.0; g.n_star + 1],
        }
    }

    pub fn rho_s(&self) -> &[f64] {
        &self.rho_s
    }

    pub fn rho_e(&self) -> &[f64] {
        &self.rho_e
    }

    /// Number of physical sites (`n_star`).
    pub fn sites(&self) -> usize {
        self.rho_s.len() - 1
    }

    /// Flow of scanning particles out of every physical site `0..n_star`.
    pub fn scanning_flows(&self) -> Vec<f64> {
        (0..self.sites())
            .map(|n| scanning_flow(self.rho_s[n], self.rho_s[n + 1] + self.rho_e[n + 1]))
            .collect()
    }

    /// Flow of elongating particles out of every physical site `0..n_star`.
    pub fn elongating_flows(&self) -> Vec<f64> {
        (0..self.sites())
            .map(|n| elongating_flow(self.rho_e[n], self.rho_e[n + 1]))
            .collect()
    }

    pub(crate) fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.rho_s, self.rho_e)
    }

    pub(crate) fn from_parts_unchecked(rho_s: Vec<f64>, rho_e: Vec<f64>) -> Self {
        Self { rho_s, rho_e }
    }
}

/// Positive decreasing stationary solution of the balance equations.
///
/// `rho1[n]` is the scanning density upstream of the start codon, with
/// `rho1[n1]` the total density at the start codon. Downstream of it,
/// `rho2[m]` and `r_elong[m]` are the scanning and elongating densities at
/// site `n1 + m`; `j2[m] = rho2[m] * (1 - rho2[m + 1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    pub rho1: Vec<f64>,
    pub rho2: Vec<f64>,
    pub r_elong: Vec<f64>,
    /// Scanning flow upstream of the start codon.
    pub j1: f64,
    pub j2: Vec<f64>,
    /// Elongating flow between start and stop codon.
    pub j_big2: f64,
    /// Exit flow of scanning particles.
    pub j3: f64,
}

impl StationarySolution {
    /// Elongating density at downstream index `m`, zero past the stop codon.
    pub fn r_at(&self, m: usize) -> f64 {
        self.r_elong.get(m).copied().unwrap_or(0.0)
    }

    /// Lays the solution out on the lattice sites `0..=n_star`.
    pub fn to_profile(&self, g: &UorfGeometry) -> Result<DensityProfile> {
        let mut rho_s = vec![0.0; g.n_star + 1];
        let mut rho_e = vec![0.0; g.n_star + 1];
        rho_s[..g.n1].copy_from_slice(&self.rho1[..g.n1]);
        for m in 0..=g.downstream_len() {
            rho_s[g.n1 + m] = self.rho2[m];
            if m < g.n2 {
                rho_e[g.n1 + m] = self.r_elong[m];
            }
        }
        DensityProfile::new(rho_s, rho_e, g)
    }
}

/// Which engine produced a [`FlowCurve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EngineTag {
    Tasep,
    Deterministic,
    Limit,
}

impl EngineTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            EngineTag::Tasep => "tasep",
            EngineTag::Deterministic => "deterministic",
            EngineTag::Limit => "limit",
        }
    }
}

/// Exit flow sampled over increasing upstream densities.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowCurve {
    points: Vec<(f64, f64)>,
    engine_tag: EngineTag,
}

impl FlowCurve {
    pub fn new(points: Vec<(f64, f64)>, engine_tag: EngineTag) -> Result<Self> {
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::OutOfRange {
                name: "rho0 grid",
                value: f64::NAN,
                range: "strictly increasing",
            });
        }
        Ok(Self { points, engine_tag })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn engine_tag(&self) -> EngineTag {
        self.engine_tag
    }
}
