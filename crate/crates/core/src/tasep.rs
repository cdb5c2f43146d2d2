//! Monte Carlo engine for the two-species exclusion process.
//!
//! Random sequential update: each attempt picks a site uniformly from
//! `0..n_star` and applies the transition rule for the pair
//! `(site, site + 1)`. A sweep is `n_star` attempts and is the unit of time,
//! so the exit count per sweep estimates the deterministic exit flow.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fmath::sqrt;
use crate::model::{check_open_unit, DensityProfile, EngineTag, FlowCurve, ModelParams, UorfGeometry};

/// Occupancy of one site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[repr(u8)]
pub enum SiteState {
    #[default]
    Empty = 0,
    Scanning = 1,
    Elongating = 2,
}

/// How site 0 is refilled from the reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EntryRule {
    /// Only the transitions listed in the rule table: a vacant site 0 is
    /// filled when site 1 is vacant too, and a particle leaving site 0 is
    /// replaced with probability `rho0`. With site 1 occupied a vacant site 0
    /// stays vacant.
    #[default]
    Table,
    /// A vacant site 0 is filled with probability `rho0` whatever site 1
    /// holds.
    Refill,
}

impl EntryRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntryRule::Table => "table",
            EntryRule::Refill => "refill",
        }
    }
}

/// What happened to the particle at the selected site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    None,
    Hop,
    /// A scanning particle left the last site before the start codon and
    /// became elongating.
    Conversion,
    /// An elongating particle displaced a scanning particle.
    Collision,
    /// An elongating particle left the coding segment.
    Termination,
    /// A scanning particle left the lattice.
    Exit,
}

/// Result of one update attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    /// A particle entered at site 0.
    pub entry: bool,
    pub kind: Move,
}

impl Transition {
    const NONE: Self = Self {
        entry: false,
        kind: Move::None,
    };

    fn of(kind: Move) -> Self {
        Self { entry: false, kind }
    }
}

/// Applies the transition rule at `site` given a uniform `draw` in `[0, 1)`.
///
/// `lattice` has `n_star` entries; the site past the end counts as vacant.
/// At site 0 the draw is split: below `rho0` the site is refilled and the
/// rescaled remainder decides conversion when `n1 == 1`.
pub fn step(
    lattice: &mut [SiteState],
    site: usize,
    draw: f64,
    params: &ModelParams,
    g: &UorfGeometry,
    entry: EntryRule,
) -> Transition {
    use SiteState::*;
    let last = g.n_star - 1;
    let s = lattice[site];
    let t = if site < last { lattice[site + 1] } else { Empty };

    if site == 0 {
        let rho0 = params.rho0;
        return match (s, t) {
            (Empty, Empty) => {
                if draw < rho0 {
                    lattice[0] = Scanning;
                    Transition {
                        entry: true,
                        kind: Move::None,
                    }
                } else {
                    Transition::NONE
                }
            }
            (Empty, _) if entry == EntryRule::Refill && draw < rho0 => {
                lattice[0] = Scanning;
                Transition {
                    entry: true,
                    kind: Move::None,
                }
            }
            (Scanning, Empty) => {
                let (refill, rest) = if draw < rho0 {
                    (true, draw / rho0)
                } else {
                    (false, (draw - rho0) / (1.0 - rho0))
                };
                let kind = if g.n1 == 1 && rest < params.c {
                    lattice[1] = Elongating;
                    Move::Conversion
                } else {
                    lattice[1] = Scanning;
                    Move::Hop
                };
                lattice[0] = if refill { Scanning } else { Empty };
                Transition { entry: refill, kind }
            }
            _ => Transition::NONE,
        };
    }

    if site == last {
        return match s {
            Scanning => {
                lattice[site] = Empty;
                Transition::of(Move::Exit)
            }
            Elongating => {
                lattice[site] = Empty;
                Transition::of(Move::Termination)
            }
            Empty => Transition::NONE,
        };
    }

    if site == g.n1 - 1 {
        if (s, t) == (Scanning, Empty) {
            lattice[site] = Empty;
            return if draw < params.c {
                lattice[site + 1] = Elongating;
                Transition::of(Move::Conversion)
            } else {
                lattice[site + 1] = Scanning;
                Transition::of(Move::Hop)
            };
        }
        return Transition::NONE;
    }

    if site == g.stop() - 1 {
        return match (s, t) {
            (Scanning, Empty) => {
                lattice[site] = Empty;
                lattice[site + 1] = Scanning;
                Transition::of(Move::Hop)
            }
            (Elongating, Empty | Scanning) => {
                lattice[site] = Empty;
                Transition::of(Move::Termination)
            }
            _ => Transition::NONE,
        };
    }

    match (s, t) {
        (Scanning, Empty) => {
            lattice[site] = Empty;
            lattice[site + 1] = Scanning;
            Transition::of(Move::Hop)
        }
        (Elongating, Empty) => {
            lattice[site] = Empty;
            lattice[site + 1] = Elongating;
            Transition::of(Move::Hop)
        }
        (Elongating, Scanning) => {
            lattice[site] = Empty;
            lattice[site + 1] = Elongating;
            Transition::of(Move::Collision)
        }
        _ => Transition::NONE,
    }
}

/// Event counters and occupancy sums accumulated over the sampling phase.
/// `entries`, `exits_scanning`, `conversions`, `elong_terminations` and
/// `collisions` count over the whole run, burn-in included, so that the
/// particle ledger closes against the final lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimStats {
    /// Sampled sweeps.
    pub sweeps: u64,
    pub entries: u64,
    pub exits_scanning: u64,
    pub conversions: u64,
    pub elong_terminations: u64,
    pub collisions: u64,
    /// Exits during the sampling phase only.
    pub sampled_exits: u64,
    pub site_occupancy_s: Vec<u64>,
    pub site_occupancy_e: Vec<u64>,
}

impl SimStats {
    /// `entries - exits - conversions - collisions`: the number of scanning
    /// particles that must be on the lattice.
    pub fn ledger_scanning(&self) -> i128 {
        self.entries as i128 - self.exits_scanning as i128 - self.conversions as i128 - self.collisions as i128
    }
}

/// Run lengths and the entry rule for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub burn_in_sweeps: u64,
    pub sample_sweeps: u64,
    /// Number of batches for the batch-means standard error.
    pub batches: u64,
    pub entry: EntryRule,
}

impl SimOptions {
    /// `20 * n_star` burn-in sweeps, `1e5` sample sweeps, 100 batches.
    pub fn for_geometry(g: &UorfGeometry) -> Self {
        Self {
            burn_in_sweeps: 20 * g.n_star as u64,
            sample_sweeps: 100_000,
            batches: 100,
            entry: EntryRule::Table,
        }
    }
}

/// Counters and estimates from one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub stats: SimStats,
    /// Mean occupancies, with the empty ghost site appended.
    pub rho_hat: DensityProfile,
    /// Exits per sampled sweep.
    pub j3_hat: f64,
    /// Batch-means standard error of `j3_hat`; NaN with fewer than two
    /// batches.
    pub se_j3: f64,
    /// Final lattice.
    pub lattice: Vec<SiteState>,
}

/// Runs the chain from the state with one scanning particle at site 0.
pub fn simulate(params: &ModelParams, g: &UorfGeometry, seed: u64, opts: &SimOptions) -> Result<SimResult> {
    if opts.sample_sweeps < 1 {
        return Err(Error::OutOfRange {
            name: "sample_sweeps",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    check_open_unit("rho0", params.rho0)?;
    check_open_unit("c", params.c)?;
    let n_star = g.n_star;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lattice = vec![SiteState::Empty; n_star];
    lattice[0] = SiteState::Scanning;
    let mut stats = SimStats {
        sweeps: 0,
        entries: 1,
        exits_scanning: 0,
        conversions: 0,
        elong_terminations: 0,
        collisions: 0,
        sampled_exits: 0,
        site_occupancy_s: vec![0; n_star],
        site_occupancy_e: vec![0; n_star],
    };

    let mut sweep = |lattice: &mut [SiteState], stats: &mut SimStats| {
        let mut exits = 0u64;
        for _ in 0..n_star {
            let site = rng.random_range(0..n_star);
            let draw: f64 = rng.random();
            let tr = step(lattice, site, draw, params, g, opts.entry);
            stats.entries += tr.entry as u64;
            match tr.kind {
                Move::None | Move::Hop => {}
                Move::Conversion => stats.conversions += 1,
                Move::Collision => stats.collisions += 1,
                Move::Termination => stats.elong_terminations += 1,
                Move::Exit => exits += 1,
            }
        }
        stats.exits_scanning += exits;
        exits
    };

    for _ in 0..opts.burn_in_sweeps {
        sweep(&mut lattice, &mut stats);
    }

    let batches = opts.batches.clamp(1, opts.sample_sweeps);
    let mut batch_rates = Vec::with_capacity(batches as usize);
    let mut done = 0u64;
    for b in 0..batches {
        let end = (b + 1) * opts.sample_sweeps / batches;
        let len = end - done;
        let mut batch_exits = 0u64;
        for _ in 0..len {
            batch_exits += sweep(&mut lattice, &mut stats);
            for (n, &x) in lattice.iter().enumerate() {
                match x {
                    SiteState::Scanning => stats.site_occupancy_s[n] += 1,
                    SiteState::Elongating => stats.site_occupancy_e[n] += 1,
                    SiteState::Empty => {}
                }
            }
        }
        stats.sampled_exits += batch_exits;
        batch_rates.push(batch_exits as f64 / len as f64);
        done = end;
    }
    stats.sweeps = opts.sample_sweeps;

    let j3_hat = stats.sampled_exits as f64 / opts.sample_sweeps as f64;
    let se_j3 = batch_standard_error(&batch_rates);
    let norm = opts.sample_sweeps as f64;
    let mut rho_s: Vec<f64> = stats.site_occupancy_s.iter().map(|&k| k as f64 / norm).collect();
    let mut rho_e: Vec<f64> = stats.site_occupancy_e.iter().map(|&k| k as f64 / norm).collect();
    rho_s.push(0.0);
    rho_e.push(0.0);
    let rho_hat = DensityProfile::new(rho_s, rho_e, g)?;
    Ok(SimResult {
        stats,
        rho_hat,
        j3_hat,
        se_j3,
        lattice,
    })
}

fn batch_standard_error(rates: &[f64]) -> f64 {
    let b = rates.len();
    if b < 2 {
        return f64::NAN;
    }
    let mean = rates.iter().sum::<f64>() / b as f64;
    let var = rates.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (b - 1) as f64;
    sqrt(var / b as f64)
}

/// Seed for grid point `index`, decorrelated from neighbouring points by a
/// splitmix64 finalizer.
pub fn point_seed(seed_base: u64, index: u64) -> u64 {
    let mut z = seed_base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One simulation per upstream density, seeded with [`point_seed`].
pub fn flow_curve(rho0_grid: &[f64], c: f64, g: &UorfGeometry, seed_base: u64, opts: &SimOptions) -> Result<FlowCurve> {
    let mut points = Vec::with_capacity(rho0_grid.len());
    for (i, &rho0) in rho0_grid.iter().enumerate() {
        let params = ModelParams::with_unit_velocity(rho0, c)?;
        let r = simulate(&params, g, point_seed(seed_base, i as u64), opts)?;
        points.push((rho0, r.j3_hat));
    }
    FlowCurve::new(points, EngineTag::Tasep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SiteState::*;

    fn setup() -> (ModelParams, UorfGeometry) {
        (
            ModelParams::new(0.3, 0.25, 1.0).unwrap(),
            UorfGeometry::new(3, 4, 3).unwrap(),
        )
    }

    fn apply(pair: (SiteState, SiteState), site: usize, draw: f64) -> ((SiteState, SiteState), Transition) {
        let (p, g) = setup();
        let mut lat = vec![Empty; g.n_star];
        lat[site] = pair.0;
        if site + 1 < g.n_star {
            lat[site + 1] = pair.1;
        }
        let tr = step(&mut lat, site, draw, &p, &g, EntryRule::Table);
        let next = if site + 1 < g.n_star { lat[site + 1] } else { Empty };
        ((lat[site], next), tr)
    }

    #[test]
    fn generic_rules() {
        for draw in [0.0, 0.5, 0.999] {
            assert_eq!(apply((Scanning, Empty), 1, draw).0, (Empty, Scanning));
            assert_eq!(apply((Elongating, Empty), 4, draw).0, (Empty, Elongating));
            let (pair, tr) = apply((Elongating, Scanning), 4, draw);
            assert_eq!(pair, (Empty, Elongating));
            assert_eq!(tr.kind, Move::Collision);
            assert_eq!(apply((Scanning, Scanning), 1, draw).1.kind, Move::None);
            assert_eq!(apply((Scanning, Elongating), 4, draw).0, (Scanning, Elongating));
            assert_eq!(apply((Elongating, Elongating), 4, draw).0, (Elongating, Elongating));
            assert_eq!(apply((Empty, Scanning), 5, draw).1, Transition::NONE);
        }
    }

    #[test]
    fn conversion_rules() {
        let (pair, tr) = apply((Scanning, Empty), 2, 0.1);
        assert_eq!(pair, (Empty, Elongating));
        assert_eq!(tr.kind, Move::Conversion);
        let (pair, tr) = apply((Scanning, Empty), 2, 0.3);
        assert_eq!(pair, (Empty, Scanning));
        assert_eq!(tr.kind, Move::Hop);
        assert_eq!(apply((Scanning, Elongating), 2, 0.1).0, (Scanning, Elongating));
    }

    #[test]
    fn termination_rules() {
        let (pair, tr) = apply((Elongating, Empty), 6, 0.5);
        assert_eq!(pair, (Empty, Empty));
        assert_eq!(tr.kind, Move::Termination);
        let (pair, tr) = apply((Elongating, Scanning), 6, 0.5);
        assert_eq!(pair, (Empty, Scanning));
        assert_eq!(tr.kind, Move::Termination);
        assert_eq!(apply((Scanning, Empty), 6, 0.5).0, (Empty, Scanning));
    }

    #[test]
    fn exit_rule() {
        let (pair, tr) = apply((Scanning, Empty), 9, 0.7);
        assert_eq!(pair.0, Empty);
        assert_eq!(tr.kind, Move::Exit);
    }

    #[test]
    fn entry_rules() {
        let (pair, tr) = apply((Empty, Empty), 0, 0.2);
        assert_eq!(pair, (Scanning, Empty));
        assert!(tr.entry);
        assert_eq!(apply((Empty, Empty), 0, 0.4).0, (Empty, Empty));
        let (pair, tr) = apply((Scanning, Empty), 0, 0.2);
        assert_eq!(pair, (Scanning, Scanning));
        assert!(tr.entry);
        let (pair, tr) = apply((Scanning, Empty), 0, 0.5);
        assert_eq!(pair, (Empty, Scanning));
        assert!(!tr.entry);
        assert_eq!(apply((Empty, Scanning), 0, 0.1).0, (Empty, Scanning));

        let (p, g) = setup();
        let mut lat = vec![Empty; g.n_star];
        lat[1] = Scanning;
        let tr = step(&mut lat, 0, 0.1, &p, &g, EntryRule::Refill);
        assert!(tr.entry);
        assert_eq!(lat[0], Scanning);
    }

    #[test]
    fn entry_next_to_start_codon_converts() {
        let p = ModelParams::new(0.5, 0.5, 1.0).unwrap();
        let g = UorfGeometry::new(1, 3, 2).unwrap();
        let mut lat = vec![Empty; g.n_star];
        lat[0] = Scanning;
        // Refill, then rescaled draw 0.2 < c.
        let tr = step(&mut lat, 0, 0.1, &p, &g, EntryRule::Table);
        assert_eq!((lat[0], lat[1]), (Scanning, Elongating));
        assert_eq!(
            tr,
            Transition {
                entry: true,
                kind: Move::Conversion
            }
        );
        let mut lat = vec![Empty; g.n_star];
        lat[0] = Scanning;
        let tr = step(&mut lat, 0, 0.9, &p, &g, EntryRule::Table);
        assert_eq!((lat[0], lat[1]), (Empty, Scanning));
        assert_eq!(
            tr,
            Transition {
                entry: false,
                kind: Move::Hop
            }
        );
    }

    #[test]
    fn last_site_terminates_without_trailer() {
        let p = ModelParams::new(0.5, 0.5, 1.0).unwrap();
        let g = UorfGeometry::new(2, 3, 0).unwrap();
        let mut lat = vec![Empty; 5];
        lat[4] = Elongating;
        assert_eq!(step(&mut lat, 4, 0.5, &p, &g, EntryRule::Table).kind, Move::Termination);
        assert_eq!(lat[4], Empty);
    }

    #[test]
    fn ledger_segregation_and_determinism() {
        let g = UorfGeometry::new(10, 20, 10).unwrap();
        let p = ModelParams::new(0.4, 0.1, 1.0).unwrap();
        let opts = SimOptions {
            burn_in_sweeps: 200,
            sample_sweeps: 2000,
            batches: 100,
            entry: EntryRule::Table,
        };
        let a = simulate(&p, &g, 7, &opts).unwrap();
        let on_lattice = a.lattice.iter().filter(|&&x| x == Scanning).count() as i128;
        assert_eq!(a.stats.ledger_scanning(), on_lattice);
        for n in 0..g.n_star {
            if !g.is_coding(n) {
                assert_eq!(a.stats.site_occupancy_e[n], 0);
            }
        }
        let b = simulate(&p, &g, 7, &opts).unwrap();
        assert_eq!(a, b);
        let c = simulate(&p, &g, 8, &opts).unwrap();
        assert_ne!(a.stats, c.stats);
        assert!(a.se_j3 > 0.0);
    }

    #[test]
    fn point_seeds_differ() {
        let s: Vec<u64> = (0..100).map(|i| point_seed(42, i)).collect();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
        assert_eq!(point_seed(42, 3), point_seed(42, 3));
    }

    #[test]
    fn singleton_curve() {
        let g = UorfGeometry::new(3, 4, 3).unwrap();
        let opts = SimOptions {
            burn_in_sweeps: 10,
            sample_sweeps: 50,
            batches: 10,
            entry: EntryRule::Table,
        };
        let curve = flow_curve(&[0.3], 0.1, &g, 1, &opts).unwrap();
        assert_eq!(curve.points().len(), 1);
        assert_eq!(curve.engine_tag(), EngineTag::Tasep);
        assert_eq!(curve, flow_curve(&[0.3], 0.1, &g, 1, &opts).unwrap());
    }

    #[test]
    fn zero_sample_sweeps_rejected() {
        let (p, g) = setup();
        let opts = SimOptions {
            sample_sweeps: 0,
            ..SimOptions::for_geometry(&g)
        };
        assert!(simulate(&p, &g, 0, &opts).is_err());
    }
}
