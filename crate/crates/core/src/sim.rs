//! Seeded AWGN Monte Carlo for the quantize-and-code scheme.
//!
//! For every `u` on a worst-case grid the harness draws noise vectors,
//! records outage indicators and, outside outage, the cost `ρ(û - u)`. The
//! reported outage probability and conditional cost are maxima over the
//! grid, never averages.
//!
//! Importance sampling draws `Z ~ N(0, t σ² I)` with `t >= 1` and weights
//! each trial by the likelihood ratio
//! `t^{n/2} exp(-‖z‖² (1 - 1/t) / 2σ²)`, computed in the log domain.
//!
//! Trials are split into fixed-size chunks; each `(u, chunk)` pair gets its
//! own ChaCha stream derived from the master seed, and chunk results are
//! merged in index order, so output is bit-identical whether chunks run in
//! parallel or not.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cost::PowerCost;
use crate::error::{domain, Error, Result};
use crate::exponents::{self, TradeoffParams};
use crate::lattice::{Codebook, LatticeDef, LatticeKind, DEFAULT_ENUMERATION_CAP};
use crate::scheme::{worst_case_grid, DecoderKind, ModScheme, OutageKind};

/// Trials per independently seeded work unit.
pub const CHUNK: usize = 1024;

/// Outage rule as configured, before `θ` is resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutageSpec {
    Decode,
    /// `None` uses `θ = w(λ)`.
    Sphere(Option<f64>),
}

impl OutageSpec {
    pub fn resolve(&self, lambda: f64) -> Result<OutageKind<f64>> {
        Ok(match *self {
            OutageSpec::Decode => OutageKind::DecodeError,
            OutageSpec::Sphere(Some(theta)) => OutageKind::SphereRadius(theta),
            OutageSpec::Sphere(None) => OutageKind::SphereRadius(exponents::solve_w(lambda)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub power: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    pub outage: OutageSpec,
    /// Noise variance inflation for importance sampling.
    pub tilt: Option<f64>,
    pub u_grid: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 8,
            power: 1.0,
            sigma: 0.1,
            lambda: 0.1,
            alpha: 2.0,
            trials: 10_000,
            seed: 1,
            outage: OutageSpec::Decode,
            tilt: None,
            u_grid: 9,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.u_grid == 0 {
            return Err(Error::Config("u_grid must be >= 1".into()));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Config(format!("sigma must be finite and > 0, got {}", self.sigma)));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(Error::Config(format!("power must be finite and > 0, got {}", self.power)));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        PowerCost::new(self.alpha)?;
        if let Some(t) = self.tilt {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Config(format!("tilt must be finite and > 0, got {t}")));
            }
        }
        Ok(())
    }

    /// SNR `γ = P/σ²`.
    pub fn gamma(&self) -> f64 {
        self.power / (self.sigma * self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimFlags {
    /// Fewer than two trials: no variance estimate, the interval collapses.
    pub degenerate_ci: bool,
    /// Some grid point saw no non-outage trial, so its conditional cost (and
    /// the supremum) is undefined.
    pub undefined_cost: bool,
    /// No outage was observed anywhere; the estimate is only an upper-bound hint.
    pub no_outage_observed: bool,
}

/// Per-`u` estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub u: f64,
    pub p_out: f64,
    pub stderr: f64,
    pub cond_cost: Option<f64>,
    pub effective_samples: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub n: usize,
    pub p_out: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// `-ln(p_out)/n`; infinite when no outage was seen.
    pub emp_outage_exp: f64,
    pub worst_cost: Option<f64>,
    pub emp_cost_exp: Option<f64>,
    /// Effective sample size at the grid point attaining `p_out`.
    pub trials_effective: f64,
    pub worst_u: f64,
    pub flags: SimFlags,
    pub per_u: Vec<PointEstimate>,
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkStats {
    count: usize,
    sum_w: f64,
    sum_w2: f64,
    sum_wout: f64,
    sum_wout2: f64,
    sum_wkeep: f64,
    /// Weighted mean cost over non-outage trials, updated incrementally so a
    /// constant cost is reproduced exactly.
    mean_cost: f64,
}

impl ChunkStats {
    fn merge(mut self, o: &ChunkStats) -> Self {
        self.count += o.count;
        self.sum_w += o.sum_w;
        self.sum_w2 += o.sum_w2;
        self.sum_wout += o.sum_wout;
        self.sum_wout2 += o.sum_wout2;
        let total = self.sum_wkeep + o.sum_wkeep;
        if total > 0.0 {
            self.mean_cost += (o.sum_wkeep / total) * (o.mean_cost - self.mean_cost);
        }
        self.sum_wkeep = total;
        self
    }
}

// splitmix64 finalizer
fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for work unit `(u_index, chunk)` under master `seed`.
pub fn derive_seed(seed: u64, u_index: usize, chunk: usize) -> u64 {
    mix64(mix64(mix64(seed) ^ u_index as u64) ^ (chunk as u64).rotate_left(32))
}

/// Plain Monte Carlo: noise drawn from the true channel.
pub fn run_plain_mc(cfg: &SimConfig, scheme: &ModScheme<f64>) -> Result<SimResult> {
    run(cfg, scheme, 1.0)
}

/// Importance-sampled estimate using `cfg.tilt` (required, `>= 1`).
pub fn run_importance_sampled(cfg: &SimConfig, scheme: &ModScheme<f64>) -> Result<SimResult> {
    let tilt = cfg
        .tilt
        .ok_or_else(|| Error::Config("importance sampling needs a tilt".into()))?;
    if !(tilt >= 1.0) {
        return Err(Error::Config(format!("tilt must be >= 1 for tail events, got {tilt}")));
    }
    run(cfg, scheme, tilt)
}

/// Dispatches on `cfg.tilt`: importance sampling when present, plain otherwise.
pub fn run_simulation(cfg: &SimConfig, scheme: &ModScheme<f64>) -> Result<SimResult> {
    match cfg.tilt {
        Some(_) => run_importance_sampled(cfg, scheme),
        None => run_plain_mc(cfg, scheme),
    }
}

fn run(cfg: &SimConfig, scheme: &ModScheme<f64>, tilt: f64) -> Result<SimResult> {
    cfg.validate()?;
    if scheme.dimension() != cfg.n {
        return Err(Error::DimensionMismatch { expected: cfg.n, got: scheme.dimension() });
    }
    let n = cfg.n;
    let half_n_ln_tilt = 0.5 * n as f64 * tilt.ln();
    // the weight never exceeds t^{n/2}
    if half_n_ln_tilt > 700.0 {
        return Err(domain(format!("tilt {tilt} overflows likelihood weights at n = {n}")));
    }
    let cost = PowerCost::new(cfg.alpha)?;
    let grid: Vec<f64> = worst_case_grid(cfg.u_grid, scheme.levels());
    let chunks = cfg.trials.div_ceil(CHUNK);
    let units: Vec<(usize, usize)> =
        (0..grid.len()).flat_map(|ui| (0..chunks).map(move |c| (ui, c))).collect();

    let sigma = cfg.sigma;
    let draw_scale = sigma * tilt.sqrt();
    let quad = (1.0 - 1.0 / tilt) / (2.0 * sigma * sigma);

    let stats: Vec<Result<ChunkStats>> = units
        .par_iter()
        .map(|&(ui, c)| {
            let u = grid[ui];
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, ui, c));
            let len = CHUNK.min(cfg.trials - c * CHUNK);
            let mut z = vec![0.0; n];
            let mut s = ChunkStats { count: len, ..Default::default() };
            for _ in 0..len {
                for v in z.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *v = draw_scale * g;
                }
                let w = if tilt == 1.0 {
                    1.0
                } else {
                    let r2: f64 = z.iter().map(|v| v * v).sum();
                    (half_n_ln_tilt - quad * r2).exp()
                };
                s.sum_w += w;
                s.sum_w2 += w * w;
                let mut coin = || rng.random::<bool>();
                match scheme.transmit(u, &z, sigma, &mut coin)? {
                    None => {
                        s.sum_wout += w;
                        s.sum_wout2 += w * w;
                    }
                    Some(est) => {
                        s.sum_wkeep += w;
                        s.mean_cost += (w / s.sum_wkeep) * (cost.rho(est - u) - s.mean_cost);
                    }
                }
            }
            Ok(s)
        })
        .collect();

    let mut per_u = Vec::with_capacity(grid.len());
    let mut stats = stats.into_iter();
    for &u in &grid {
        let mut acc = ChunkStats::default();
        for _ in 0..chunks {
            acc = acc.merge(&stats.next().expect("one result per unit")?);
        }
        per_u.push(point_estimate(u, &acc));
    }
    Ok(summarize(n, cfg.trials, per_u))
}

fn point_estimate(u: f64, s: &ChunkStats) -> PointEstimate {
    let nf = s.count as f64;
    let p = s.sum_wout / nf;
    let stderr = if s.count > 1 {
        let var = ((s.sum_wout2 - nf * p * p) / (nf - 1.0)).max(0.0);
        (var / nf).sqrt()
    } else {
        0.0
    };
    let cond_cost = (s.sum_wkeep > 0.0).then_some(s.mean_cost);
    let effective_samples = if s.sum_w2 > 0.0 { s.sum_w * s.sum_w / s.sum_w2 } else { 0.0 };
    PointEstimate { u, p_out: p.min(1.0), stderr, cond_cost, effective_samples }
}

fn summarize(n: usize, trials: usize, per_u: Vec<PointEstimate>) -> SimResult {
    let worst = per_u
        .iter()
        .fold(None::<&PointEstimate>, |best, e| match best {
            Some(b) if b.p_out >= e.p_out => Some(b),
            _ => Some(e),
        })
        .expect("non-empty grid");
    let p_out = worst.p_out;
    let stderr = worst.stderr;
    let ci95 = ((p_out - 1.96 * stderr).max(0.0), (p_out + 1.96 * stderr).min(1.0));
    let undefined_cost = per_u.iter().any(|e| e.cond_cost.is_none());
    let worst_cost = if undefined_cost {
        None
    } else {
        per_u.iter().filter_map(|e| e.cond_cost).reduce(f64::max)
    };
    let nf = n as f64;
    SimResult {
        n,
        p_out,
        stderr,
        ci95,
        emp_outage_exp: -p_out.ln() / nf,
        worst_cost,
        emp_cost_exp: worst_cost.map(|c| -c.ln() / nf),
        trials_effective: worst.effective_samples,
        worst_u: worst.u,
        flags: SimFlags {
            degenerate_ci: trials < 2,
            undefined_cost,
            no_outage_observed: per_u.iter().all(|e| e.p_out == 0.0),
        },
        per_u,
    }
}

/// How a sweep obtains its outage column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Build the scheme and simulate it.
    Simulate,
    /// Exact sphere-outage probability at `θ` and the deterministic
    /// quantization cost `ρ(1/2M)`; no codebook, no sampling.
    ExactSphere,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub lattice: LatticeKind,
    pub decoder: DecoderKind,
    pub pairing: bool,
    pub mode: SweepMode,
    pub cap: usize,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            lattice: LatticeKind::Zn,
            decoder: DecoderKind::Lattice,
            pairing: false,
            mode: SweepMode::Simulate,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub alpha: f64,
    /// `ln M` of the quantizer used.
    pub ln_levels: f64,
    pub p_out: f64,
    pub stderr: f64,
    pub emp_outage_exp: f64,
    pub worst_cost: Option<f64>,
    pub emp_cost_exp: Option<f64>,
    pub e_upper: f64,
    pub e_lower: f64,
    /// Why the row could not be evaluated, if it could not.
    pub infeasible: Option<String>,
}

/// Evaluates every `(n, λ, γ)` combination in list order (n outermost).
///
/// The quantizer size is `M = ⌈e^{nR}⌉` at the achievable rate `R`; the
/// noise level is `σ = √(P/γ)` with `P` from the template. Rows that cannot
/// be built are reported with `infeasible` set and the sweep continues.
pub fn sweep_exponents(
    template: &SimConfig,
    settings: &SweepSettings,
    n_list: &[usize],
    lambda_list: &[f64],
    gamma_list: &[f64],
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &n in n_list {
        for &lambda in lambda_list {
            for &gamma in gamma_list {
                rows.push(sweep_row(template, settings, n, lambda, gamma));
            }
        }
    }
    rows
}

fn sweep_row(template: &SimConfig, settings: &SweepSettings, n: usize, lambda: f64, gamma: f64) -> SweepRow {
    let mut row = SweepRow {
        n,
        lambda,
        gamma,
        alpha: template.alpha,
        ln_levels: f64::NAN,
        p_out: f64::NAN,
        stderr: f64::NAN,
        emp_outage_exp: f64::NAN,
        worst_cost: None,
        emp_cost_exp: None,
        e_upper: f64::NAN,
        e_lower: f64::NAN,
        infeasible: None,
    };
    if let Err(e) = fill_row(&mut row, template, settings) {
        row.infeasible = Some(e.to_string());
    }
    row
}

fn fill_row(row: &mut SweepRow, template: &SimConfig, settings: &SweepSettings) -> Result<()> {
    let params = TradeoffParams::new(row.lambda, row.gamma, row.alpha)?;
    let point = exponents::curve_point(&params)?;
    row.e_upper = point.e_upper.value;
    row.e_lower = point.e_lower.value;
    let rate = point.rate_achievable;
    if !(rate > 0.0) {
        return Err(Error::Infeasible(format!("achievable rate {rate:.6} is not positive")));
    }
    let n = row.n;
    let nf = n as f64;
    match settings.mode {
        SweepMode::ExactSphere => {
            let ln_levels = exponents::ln_codebook_size_for_locus(nf * rate, 0.5, 1.0);
            row.ln_levels = ln_levels;
            let theta = match template.outage {
                OutageSpec::Sphere(Some(t)) => t,
                _ => point.w,
            };
            let ln_p = exponents::ln_sphere_outage_prob(n, theta)?;
            row.p_out = ln_p.exp();
            row.stderr = 0.0;
            row.emp_outage_exp = -ln_p / nf;
            // ρ(1/2M) = (2M)^{-α}
            let cost_exp = row.alpha * (std::f64::consts::LN_2 + ln_levels) / nf;
            row.emp_cost_exp = Some(cost_exp);
            row.worst_cost = Some((-nf * cost_exp).exp());
            Ok(())
        }
        SweepMode::Simulate => {
            let m_real = (nf * rate).exp().ceil();
            if !(m_real <= settings.cap as f64) {
                return Err(Error::Resource { estimated: m_real, cap: settings.cap });
            }
            let mut m = m_real as usize;
            if settings.pairing && !m.is_multiple_of(2) {
                m += 1;
            }
            row.ln_levels = (m as f64).ln();
            let lattice = LatticeDef::<f64>::new(settings.lattice, n)?;
            let outage = template.outage.resolve(row.lambda)?;
            let codewords = if settings.pairing { m / 2 } else { m };
            let cb = Codebook::build_capped(&lattice, n, template.power, codewords, settings.cap)?;
            let scheme = ModScheme::new(cb, settings.pairing, outage, settings.decoder)?;
            let cfg = SimConfig {
                n,
                sigma: (template.power / row.gamma).sqrt(),
                lambda: row.lambda,
                ..template.clone()
            };
            let res = run_simulation(&cfg, &scheme)?;
            row.p_out = res.p_out;
            row.stderr = res.stderr;
            row.emp_outage_exp = res.emp_outage_exp;
            row.worst_cost = res.worst_cost;
            row.emp_cost_exp = res.emp_cost_exp;
            Ok(())
        }
    }
}
