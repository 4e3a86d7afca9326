//! Exit criteria. Each test prints one PASS/FAIL line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see them.

use std::time::{Duration, Instant};

use outage_tradeoff::exponents::{self, TradeoffParams};
use outage_tradeoff::lattice::{voronoi_escape_prob_zn, LatticeDef};
use outage_tradeoff::scalar::dist2;
use outage_tradeoff::scheme::{DecoderKind, ModScheme, OutageKind};
use outage_tradeoff::sim::{self, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(name: &str, ok: bool, elapsed: Duration, limit: Duration, detail: String) {
    let timed = elapsed <= limit;
    let status = if ok && timed { "PASS" } else { "FAIL" };
    println!("{status} {name}: {detail}; runtime {:.3}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs());
    assert!(ok, "{name}: {detail}");
    assert!(timed, "{name}: runtime {elapsed:?} over {limit:?}");
}

#[test]
fn root_law() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let lambda = 5.0 * i as f64 / 999.0;
        let w = exponents::solve_w::<f64>(lambda).unwrap();
        worst = worst.max((w - w.ln_1p() - 2.0 * lambda).abs());
    }
    let knee = exponents::solve_w::<f64>(0.5 * (1.0 - std::f64::consts::LN_2)).unwrap();
    let ok = worst <= 1e-12 && (knee - 1.0).abs() <= 1e-9;
    verdict(
        "root_law",
        ok,
        t.elapsed(),
        Duration::from_secs(1),
        format!("max residual {worst:.2e} (tol 1e-12), w at knee {knee:.15} (tol 1e-9)"),
    );
}

#[test]
fn tight_range_identity() {
    let t = Instant::now();
    let lmax = exponents::tight_lambda_max::<f64>();
    let mut worst = 0.0f64;
    for i in 1..=200 {
        let lambda = lmax * i as f64 / 200.0;
        for gamma in [1e2, 1e4, 1e6] {
            for alpha in [1.0, 2.0] {
                let p = TradeoffParams::new(lambda, gamma, alpha).unwrap();
                let eu = exponents::exponent_upper(&p).unwrap().value;
                let el = exponents::exponent_lower(&p).unwrap().value;
                worst = worst.max((eu - el).abs());
            }
        }
    }
    verdict(
        "tight_range_identity",
        worst <= 1e-10,
        t.elapsed(),
        Duration::from_secs(1),
        format!("max |E_U - E_L| {worst:.2e} over 1200 points (tol 1e-10)"),
    );
}

#[test]
fn poltyrev_machinery() {
    let t = Instant::now();
    let e = std::f64::consts::E;
    let jump = |f: &dyn Fn(f64) -> f64, x: f64| {
        let h = 1e-13 * x.max(1.0);
        (f(x - h) - f(x + h)).abs().max((f(x) - f(x - h)).abs())
    };
    let er = |x: f64| exponents::random_coding_exp(x).unwrap();
    let ex = |x: f64| exponents::expurgated_exp(x).unwrap();
    let ep = |x: f64| exponents::poltyrev_exp(x).unwrap();
    let knots = [
        jump(&er, 1.0),
        jump(&er, 2.0),
        jump(&ex, 4.0 / e),
        jump(&ex, 4.0),
        jump(&ep, 1.0),
        jump(&ep, 2.0),
        jump(&ep, 4.0 / e),
        jump(&ep, 4.0),
    ];
    let continuity = knots.iter().cloned().fold(0.0, f64::max);
    let mut round_trip = 0.0f64;
    for i in 1..=3000 {
        let lambda = 3.0 * i as f64 / 3000.0;
        let x = exponents::poltyrev_inv(lambda).unwrap();
        round_trip = round_trip.max((ep(x) - lambda).abs());
    }
    verdict(
        "poltyrev_machinery",
        continuity <= 1e-12 && round_trip <= 1e-10,
        t.elapsed(),
        Duration::from_secs(1),
        format!("max knot jump {continuity:.2e} (tol 1e-12), max round trip {round_trip:.2e} (tol 1e-10)"),
    );
}

#[test]
fn sphere_outage_exponent_trend() {
    let t = Instant::now();
    let lambda = 0.1;
    let theta = exponents::solve_w::<f64>(lambda).unwrap();
    let seq: Vec<f64> = [64usize, 128, 256, 512]
        .iter()
        .map(|&n| -exponents::ln_sphere_outage_prob(n, theta).unwrap() / n as f64)
        .collect();
    let increasing = seq.windows(2).all(|w| w[1] > w[0]);
    let close = ((seq[3] - lambda) / lambda).abs() <= 0.15;
    verdict(
        "sphere_outage_exponent_trend",
        increasing && close,
        t.elapsed(),
        Duration::from_secs(1),
        format!(
            "-ln P/n = {:?}; strictly increasing: {increasing}; within 15% of lambda at n=512: {close}",
            seq.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>()
        ),
    );
}

/// Exhaustive search over integer (and, for E8, half-integer) vectors within
/// one unit of `round(y)` in every coordinate.
fn brute_nearest(y: &[f64], member: &dyn Fn(&[f64]) -> bool, offsets: &[f64]) -> f64 {
    let n = y.len();
    let mut best = f64::INFINITY;
    for &off in offsets {
        let base: Vec<f64> = y.iter().map(|v| (v - off).round() + off).collect();
        let mut digits = vec![0usize; n];
        let mut cand = vec![0.0; n];
        loop {
            for i in 0..n {
                cand[i] = base[i] + digits[i] as f64 - 1.0;
            }
            if member(&cand) {
                best = best.min(dist2(&cand, y));
            }
            let mut i = 0;
            while i < n {
                digits[i] += 1;
                if digits[i] < 3 {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    best
}

#[test]
fn decoder_correctness() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let is_int = |v: f64| (v - v.round()).abs() < 1e-9;
    let zn = |p: &[f64]| p.iter().all(|&v| is_int(v));
    let dn = |p: &[f64]| zn(p) && (p.iter().sum::<f64>().round() as i64) % 2 == 0;
    let e8 = |p: &[f64]| {
        let half = p.iter().all(|&v| is_int(v - 0.5));
        (zn(p) || half) && (p.iter().sum::<f64>().round() as i64).rem_euclid(2) == 0
    };

    let mut mismatches = [0usize; 3];
    for i in 0..1000 {
        let n = 1 + i % 8;
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-6.0..6.0)).collect();
        let got = LatticeDef::integer(n).unwrap().nearest_point(&y).unwrap();
        if !zn(&got) || dist2(&got, &y) > brute_nearest(&y, &zn, &[0.0]) + 1e-12 {
            mismatches[0] += 1;
        }
    }
    for i in 0..1000 {
        let n = 2 + i % 7;
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-6.0..6.0)).collect();
        let got = LatticeDef::checkerboard(n).unwrap().nearest_point(&y).unwrap();
        if !dn(&got) || dist2(&got, &y) > brute_nearest(&y, &dn, &[0.0]) + 1e-12 {
            mismatches[1] += 1;
        }
    }
    let lat = LatticeDef::<f64>::e8();
    for _ in 0..1000 {
        let y: Vec<f64> = (0..8).map(|_| rng.random_range(-6.0..6.0)).collect();
        let got = lat.nearest_point(&y).unwrap();
        if !e8(&got) || dist2(&got, &y) > brute_nearest(&y, &e8, &[0.0, 0.5]) + 1e-12 {
            mismatches[2] += 1;
        }
    }
    verdict(
        "decoder_correctness",
        mismatches == [0, 0, 0],
        t.elapsed(),
        Duration::from_secs(30),
        format!("mismatches Zn {} Dn {} E8 {} over 1000 inputs each", mismatches[0], mismatches[1], mismatches[2]),
    );
}

#[test]
fn scheme_oracle() {
    let t = Instant::now();
    let n = 8;
    let lattice = LatticeDef::integer(n).unwrap();
    let scheme = ModScheme::build(&lattice, 1.0, 16, false, OutageKind::DecodeError, DecoderKind::Lattice).unwrap();
    let beta = scheme.codebook().scale();
    let mut ok = true;
    let mut detail = Vec::new();
    for (ratio, tilt, seed) in [(4.0, 1.2, 41u64), (6.0, 1.3, 61)] {
        let sigma = beta / ratio;
        let exact = voronoi_escape_prob_zn(beta, sigma, n);
        let cfg = SimConfig { n, sigma, trials: 40_000, seed, tilt: Some(tilt), u_grid: 1, ..Default::default() };
        let is = sim::run_importance_sampled(&cfg, &scheme).unwrap();
        for e in &is.per_u {
            let z = (e.p_out - exact).abs() / e.stderr;
            ok &= z <= 3.0 && e.effective_samples >= 1e4;
            detail.push(format!(
                "beta/sigma={ratio} u={:.3} IS {:.5} vs {exact:.5} ({z:.2} se, ess {:.0})",
                e.u, e.p_out, e.effective_samples
            ));
        }
        if ratio == 6.0 {
            let plain = sim::run_plain_mc(&SimConfig { tilt: None, seed: seed + 1, ..cfg }, &scheme).unwrap();
            for e in &plain.per_u {
                let z = (e.p_out - exact).abs() / e.stderr;
                ok &= z <= 3.0;
                detail.push(format!("plain u={:.3} {:.5} ({z:.2} se)", e.u, e.p_out));
            }
        }
    }
    verdict("scheme_oracle", ok, t.elapsed(), Duration::from_secs(60), detail.join("; "));
}

#[test]
fn weak_noise_exactness() {
    let t = Instant::now();
    let lattice = LatticeDef::integer(4).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for m in [8usize, 64, 512] {
        let rho = |x: f64| x * x;
        for pairing in [false, true] {
            let scheme = ModScheme::build(&lattice, 1.0, m, pairing, OutageKind::DecodeError, DecoderKind::Lattice).unwrap();
            let sigma = 1e-6 * scheme.codebook().scale();
            let cfg = SimConfig { n: 4, sigma, trials: 64, u_grid: 33, seed: m as u64, ..Default::default() };
            let r = sim::run_plain_mc(&cfg, &scheme).unwrap();
            let worst = r.worst_cost.unwrap_or(f64::NAN);
            let this_ok = if pairing {
                worst <= rho(3.0 / (2.0 * m as f64)) * (1.0 + 1e-12)
            } else {
                ((worst - rho(1.0 / (2.0 * m as f64))) / rho(1.0 / (2.0 * m as f64))).abs() <= 1e-12
            };
            ok &= this_ok && r.p_out == 0.0;
            detail.push(format!("M={m} pairing={pairing} sup cost {worst:.6e}"));
        }
    }
    verdict("weak_noise_exactness", ok, t.elapsed(), Duration::from_secs(10), detail.join("; "));
}

#[test]
fn converse_sanity() {
    let t = Instant::now();
    let p = TradeoffParams::new(0.05, 1e6, 2.0).unwrap();
    let target: f64 = 2.0 * exponents::rate_converse(&p).unwrap();
    let errs: Vec<f64> = [100usize, 300, 1000]
        .iter()
        .map(|&n| {
            let e: f64 = exponents::converse_exponent_at_budget(&p, 1.0, n, 1.0).unwrap();
            ((e - target) / target).abs()
        })
        .collect();
    let ok = errs[2] <= 0.05 && errs.windows(2).all(|w| w[1] <= w[0]);
    verdict(
        "converse_sanity",
        ok,
        t.elapsed(),
        Duration::from_secs(1),
        format!("relative error vs alpha*R {:?} (tol 5% at n=1000, non-increasing)", errs.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>()),
    );
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["outage-tradeoff"];
    full.extend_from_slice(args);
    let code = outage_tradeoff::cli::run(full, &mut out, &mut err);
    (code, out)
}

#[test]
fn determinism() {
    let t = Instant::now();
    let commands: [&[&str]; 5] = [
        &["exponents", "--lambda", "0.05,0.1,0.15,1", "--gamma", "1e4"],
        &["tradeoff", "--lambda", "0.01:1:50", "--gamma", "1e2,1e4"],
        &["simulate", "--lattice", "z", "--n", "8", "--M", "16", "--sigma", "0.5", "--trials", "3000", "--seed", "9"],
        &["sweep", "--n", "4,8", "--lambda", "0.5", "--gamma", "30", "--trials", "2000", "--tilt", "1.3"],
        &["lattice-info", "--lattice", "e8", "--M", "241"],
    ];
    let mut ok = true;
    for args in commands {
        let (c1, a) = run_cli(args);
        let (c2, b) = run_cli(args);
        ok &= c1 == 0 && c2 == 0 && a == b && !a.is_empty();
    }
    // thread count must not change the bytes
    let sim_args = ["simulate", "--lattice", "d", "--n", "4", "--M", "24", "--sigma", "0.3", "--trials", "5000", "--tilt", "1.5"];
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_cli(&sim_args));
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| run_cli(&sim_args));
    ok &= serial == parallel;
    verdict(
        "determinism",
        ok,
        t.elapsed(),
        Duration::from_secs(60),
        "five verbs run twice plus 1 vs 4 worker threads".to_string(),
    );
}
