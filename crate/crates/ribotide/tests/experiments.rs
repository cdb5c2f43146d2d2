use ribotide::experiments::{
    decimal_grid, figure3_sweep, figure4_convergence, figure56_profiles, Figure3Row, SweepSpec,
};
use ribotide_core::analytic::{limit_peak_density, rho_star};
use ribotide_core::{EngineTag, UorfGeometry};

fn figure3_geometry() -> UorfGeometry {
    UorfGeometry::new(100, 200, 100).unwrap()
}

fn det(rows: &[&Figure3Row]) -> Vec<f64> {
    rows.iter().map(|r| r.j3_det.unwrap()).collect()
}

#[test]
fn deterministic_curves_are_unimodal_and_ordered_in_c() {
    let spec = SweepSpec {
        rho0_grid: decimal_grid(1, 50, 100),
        engines: vec![EngineTag::Deterministic, EngineTag::Limit],
        ..SweepSpec::figure3()
    };
    let table = figure3_sweep(&spec).unwrap();
    assert!(table.failures.is_empty());
    assert_eq!(table.rows.len(), 50 * 6);
    let curves: Vec<Vec<f64>> = spec.c_values.iter().map(|&c| det(&table.curve(c))).collect();
    for (curve, c) in curves.iter().zip(&spec.c_values) {
        let top = (0..curve.len()).fold(0, |b, i| if curve[i] > curve[b] { i } else { b });
        assert!(curve[..=top].windows(2).all(|w| w[1] >= w[0]), "rising side, c = {c}");
        assert!(curve[top..].windows(2).all(|w| w[1] <= w[0]), "falling side, c = {c}");
    }
    for pair in curves.windows(2) {
        assert!(pair[0].iter().zip(&pair[1]).all(|(a, b)| b < a));
    }
    for row in &table.rows {
        assert!(row.j3_limit.is_some() == (row.rho0 < 0.5));
        assert!(row.j3_tasep.is_none());
    }
}

#[test]
fn convergence_rate_and_peak_location() {
    let grid = decimal_grid(1, 99, 200);
    let report = figure4_convergence(20.0, &[50, 100, 200, 400, 800], &grid, 100, 100).unwrap();
    let e = &report.sup_errors;
    assert!(e.iter().all(|&x| x > 0.0));
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    let factor = e[3] / e[4];
    assert!((1.6..=2.2).contains(&factor), "400 -> 800 factor {factor}");
    let step = grid[1] - grid[0];
    for &peak in &report.peak_rho0 {
        assert!(
            (peak - limit_peak_density(20.0)).abs() <= 2.0 * step + 1e-12,
            "peak at {peak}"
        );
    }
}

#[test]
fn singleton_convergence_list_gives_one_row() {
    let report = figure4_convergence(20.0, &[100], &[0.05, 0.1], 50, 50).unwrap();
    assert_eq!(report.table().rows.len(), 1);
}

#[test]
fn coding_segment_profile_follows_the_limit_curve() {
    let g = figure3_geometry();
    let tables = figure56_profiles(&[0.3], 0.025, &g).unwrap();
    let t = &tables[0];
    let c0 = 0.025 * g.n2 as f64;
    let mut worst = 0.0f64;
    for n in g.start()..=g.stop() {
        let tau = (n - g.start()) as f64 / g.n2 as f64;
        let r = rho_star(0.3, tau, c0).unwrap();
        worst = worst.max((t.profile.rho_s()[n] - r).abs());
    }
    let bound = 5.0 * (g.n2 as f64).ln() / g.n2 as f64;
    assert!(worst <= bound, "{worst} > {bound}");
    assert_eq!(t.limit.as_ref().unwrap().len(), g.n2 + 1);
}

#[test]
fn saturated_flow_profiles_coincide() {
    let g = figure3_geometry();
    let tables = figure56_profiles(&[0.5, 0.9], 0.025, &g).unwrap();
    let half = tables[0].profile.scanning_flows();
    let high = tables[1].profile.scanning_flows();
    let gap = half.iter().zip(&high).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let upstream = high[..g.n1].iter().fold(0.0f64, |m, f| m.max((f - 0.25).abs()));
    assert!(tables[1].limit.is_none());
    assert!(gap <= 1e-4, "flow tables differ by {gap}");
    assert!(upstream <= 1e-4, "upstream flow off 1/4 by {upstream}");
}

#[test]
fn repeated_sweep_is_identical() {
    let g = UorfGeometry::new(20, 40, 20).unwrap();
    let spec = SweepSpec {
        rho0_grid: vec![0.1, 0.4, 0.8],
        c_values: vec![0.05, 0.2],
        geometry: g,
        engines: vec![EngineTag::Tasep, EngineTag::Deterministic, EngineTag::Limit],
        tasep: ribotide_core::tasep::SimOptions {
            sample_sweeps: 2_000,
            ..ribotide_core::tasep::SimOptions::for_geometry(&g)
        },
        seed: 17,
        v: 1.0,
    };
    let a = figure3_sweep(&spec).unwrap().table().to_csv();
    let b = figure3_sweep(&spec).unwrap().table().to_csv();
    assert_eq!(a, b);
}
