use outage_tradeoff::exponents;
use outage_tradeoff::lattice::{voronoi_escape_prob_zn, LatticeDef};
use outage_tradeoff::scheme::{DecoderKind, ModScheme, OutageKind};
use outage_tradeoff::sim::{self, OutageSpec, SimConfig, SweepMode, SweepSettings};

fn zn_scheme(n: usize, m: usize, outage: OutageKind<f64>) -> ModScheme<f64> {
    let lat = LatticeDef::integer(n).unwrap();
    ModScheme::build(&lat, 1.0, m, false, outage, DecoderKind::Lattice).unwrap()
}

#[test]
fn importance_sampling_is_unbiased_on_sphere_outage() {
    let n = 16;
    let lambda = 0.3;
    let theta = exponents::solve_w::<f64>(lambda).unwrap();
    let exact = exponents::sphere_outage_prob(n, theta).unwrap();
    let scheme = zn_scheme(n, 4, OutageKind::SphereRadius(theta));
    for (tilt, seed) in [(1.5, 3u64), (2.0, 4), (1.0 + theta, 5)] {
        let cfg = SimConfig { n, sigma: 0.2, lambda, trials: 20_000, seed, tilt: Some(tilt), u_grid: 1, ..Default::default() };
        let r = sim::run_importance_sampled(&cfg, &scheme).unwrap();
        for e in &r.per_u {
            assert!((e.p_out - exact).abs() < 4.0 * e.stderr, "tilt {tilt}: {} vs {exact}", e.p_out);
        }
    }
}

#[test]
fn tilt_reduces_relative_error_in_the_tail() {
    let n = 32;
    let theta = 1.5;
    let scheme = zn_scheme(n, 4, OutageKind::SphereRadius(theta));
    let exact = exponents::sphere_outage_prob(n, theta).unwrap();
    let base = SimConfig { n, sigma: 0.1, trials: 8192, u_grid: 1, seed: 17, ..Default::default() };
    let plain = sim::run_plain_mc(&base, &scheme).unwrap();
    let is = sim::run_importance_sampled(&SimConfig { tilt: Some(1.0 + theta), ..base }, &scheme).unwrap();
    assert!(exact < 1e-4);
    assert!(is.stderr / is.p_out < 0.1);
    assert!((is.p_out - exact).abs() < 4.0 * is.stderr);
    assert!(plain.p_out == 0.0 || plain.stderr / plain.p_out > is.stderr / is.p_out);
}

#[test]
fn plain_mc_matches_zn_closed_form() {
    let scheme = zn_scheme(6, 12, OutageKind::DecodeError);
    let beta = scheme.codebook().scale();
    let sigma = beta / 3.5;
    let cfg = SimConfig { n: 6, sigma, trials: 30_000, seed: 8, u_grid: 1, ..Default::default() };
    let r = sim::run_plain_mc(&cfg, &scheme).unwrap();
    let exact = voronoi_escape_prob_zn(beta, sigma, 6);
    assert!((r.p_out - exact).abs() < 4.0 * r.stderr + 1e-3);
    assert!(r.ci95.0 <= r.p_out && r.p_out <= r.ci95.1);
}

#[test]
fn same_seed_same_result_different_seed_differs() {
    let scheme = zn_scheme(4, 16, OutageKind::DecodeError);
    let cfg = SimConfig { n: 4, sigma: 0.4, trials: 3000, seed: 99, ..Default::default() };
    let a = sim::run_plain_mc(&cfg, &scheme).unwrap();
    let b = sim::run_plain_mc(&cfg, &scheme).unwrap();
    assert_eq!(a, b);
    let c = sim::run_plain_mc(&SimConfig { seed: 100, ..cfg.clone() }, &scheme).unwrap();
    assert_ne!(a.p_out, c.p_out);
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| sim::run_plain_mc(&cfg, &scheme).unwrap());
    assert_eq!(a, serial);
}

#[test]
fn conditional_cost_is_exact_without_outage() {
    for m in [5usize, 10, 33] {
        let scheme = zn_scheme(3, m, OutageKind::DecodeError);
        let cfg = SimConfig { n: 3, sigma: 1e-8, alpha: 1.5, trials: 16, u_grid: 21, ..Default::default() };
        let r = sim::run_plain_mc(&cfg, &scheme).unwrap();
        assert_eq!(r.p_out, 0.0);
        let want = r
            .per_u
            .iter()
            .map(|e| {
                let (_, center) = scheme.quantize(e.u).unwrap();
                (center - e.u).abs().powf(1.5)
            })
            .fold(0.0, f64::max);
        assert_eq!(r.worst_cost.unwrap(), want);
    }
}

#[test]
fn p_out_is_grid_max() {
    let scheme = zn_scheme(4, 16, OutageKind::DecodeError);
    let cfg = SimConfig { n: 4, sigma: 0.5, trials: 2000, u_grid: 7, ..Default::default() };
    let r = sim::run_plain_mc(&cfg, &scheme).unwrap();
    let max = r.per_u.iter().map(|e| e.p_out).fold(0.0, f64::max);
    assert_eq!(r.p_out, max);
    assert!(r.per_u.iter().any(|e| e.p_out < max));
}

#[test]
fn sweep_simulate_rows_follow_grid_order() {
    let template = SimConfig { trials: 500, outage: OutageSpec::Sphere(None), ..Default::default() };
    let settings = SweepSettings { mode: SweepMode::Simulate, ..Default::default() };
    let rows = sim::sweep_exponents(&template, &settings, &[4, 6], &[0.2, 0.4], &[50.0]);
    let order: Vec<(usize, f64)> = rows.iter().map(|r| (r.n, r.lambda)).collect();
    assert_eq!(order, vec![(4, 0.2), (4, 0.4), (6, 0.2), (6, 0.4)]);
    for r in &rows {
        assert!(r.infeasible.is_none(), "{:?}", r.infeasible);
        assert!(r.p_out >= 0.0 && r.p_out <= 1.0);
        assert!(r.e_lower <= r.e_upper + 1e-12);
    }
}
