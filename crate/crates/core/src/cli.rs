//! Command-line front end. Every verb writes CSV preceded by `#` comment
//! lines holding the fully resolved parameters.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::exponents::{self, TradeoffParams};
use crate::lattice::{Codebook, LatticeDef, LatticeKind};
use crate::scheme::{DecoderKind, ModScheme};
use crate::sim::{self, OutageSpec, SimConfig, SweepMode, SweepSettings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

const SIM_HEADER: &str = "n,lambda,gamma,alpha,p_out,stderr,emp_outage_exp,worst_cost,emp_cost_exp,E_U,E_L";
const DEFAULT_LAMBDA_RANGE: &str = "0.01:1:100";

#[derive(Debug, Parser)]
#[command(name = "outage-tradeoff", version, about = "Outage/error-cost exponent calculator and lattice-scheme simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponent table over a λ grid at one SNR.
    Exponents(Params),
    /// E_U and E_L curves over a λ range for several SNRs.
    Tradeoff(Params),
    /// Build one scheme and estimate its outage probability and cost.
    Simulate(Params),
    /// Simulate (or evaluate exactly) over n × λ × γ.
    Sweep(Params),
    /// Lattice constants and optional codebook export.
    LatticeInfo(Params),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exponents(_) => "exponents",
            Command::Tradeoff(_) => "tradeoff",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::LatticeInfo(_) => "lattice-info",
        }
    }

    fn params(&self) -> &Params {
        match self {
            Command::Exponents(p)
            | Command::Tradeoff(p)
            | Command::Simulate(p)
            | Command::Sweep(p)
            | Command::LatticeInfo(p) => p,
        }
    }
}

/// Comma-separated values; an item `a:b:k` expands to `k` evenly spaced
/// points from `a` to `b` inclusive.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid(pub Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [v] => out.push(v.parse::<f64>().map_err(|e| format!("{item}: {e}"))?),
            [a, b, k] => {
                let a: f64 = a.parse().map_err(|e| format!("{item}: {e}"))?;
                let b: f64 = b.parse().map_err(|e| format!("{item}: {e}"))?;
                let k: usize = k.parse().map_err(|e| format!("{item}: {e}"))?;
                match k {
                    0 => {}
                    1 => out.push(a),
                    _ => out.extend((0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64)),
                }
            }
            _ => return Err(format!("bad grid item '{item}', expected v or a:b:k")),
        }
    }
    if let Some(v) = out.iter().find(|v| !v.is_finite()) {
        return Err(format!("non-finite grid value {v}"));
    }
    Ok(Grid(out))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountList(pub Vec<usize>);

fn parse_counts(s: &str) -> Result<CountList, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|e| format!("{t}: {e}")))
        .collect::<Result<_, _>>()
        .map(CountList)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatticeArg {
    Z,
    D,
    E8,
}

impl From<LatticeArg> for LatticeKind {
    fn from(l: LatticeArg) -> Self {
        match l {
            LatticeArg::Z => LatticeKind::Zn,
            LatticeArg::D => LatticeKind::Dn,
            LatticeArg::E8 => LatticeKind::E8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutageArg {
    Decode,
    Sphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Lattice,
    Codebook,
}

impl From<DecoderArg> for DecoderKind {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Lattice => DecoderKind::Lattice,
            DecoderArg::Codebook => DecoderKind::Codebook,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Simulate,
    Exact,
}

/// Flags shared by all verbs; each verb reads the ones it needs.
#[derive(Debug, Clone, Args)]
pub struct Params {
    /// Outage exponent λ (list or a:b:k range)
    #[arg(long, value_parser = parse_grid)]
    pub lambda: Option<Grid>,
    /// SNR γ = P/σ² (list or a:b:k range)
    #[arg(long, value_parser = parse_grid)]
    pub gamma: Option<Grid>,
    /// Cost exponent α ≥ 1 in ρ(t) = |t|^α
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    /// Block length (comma list for sweep)
    #[arg(long, value_parser = parse_counts)]
    pub n: Option<CountList>,
    /// Power limit P
    #[arg(long = "P", default_value_t = 1.0)]
    pub power: f64,
    /// Noise standard deviation
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum, default_value_t = LatticeArg::Z)]
    pub lattice: LatticeArg,
    /// Number of quantization levels
    #[arg(long = "M", conflicts_with = "rate")]
    pub levels: Option<usize>,
    /// Rate in nats per dimension; M = ⌈e^{nR}⌉
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Importance-sampling variance inflation t ≥ 1
    #[arg(long)]
    pub tilt: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutageArg::Decode)]
    pub outage: OutageArg,
    /// Sphere outage radius parameter θ (defaults to w(λ))
    #[arg(long)]
    pub theta: Option<f64>,
    /// Two source bins per codeword, resolved by a fair coin
    #[arg(long)]
    pub pairing: bool,
    #[arg(long, value_enum, default_value_t = DecoderArg::Lattice)]
    pub decoder: DecoderArg,
    /// Number of u points in the worst-case grid
    #[arg(long = "u-grid", default_value_t = 9)]
    pub u_grid: usize,
    /// Sweep evaluation mode
    #[arg(long, value_enum, default_value_t = ModeArg::Simulate)]
    pub mode: ModeArg,
    /// Write the codebook as CSV (lattice-info)
    #[arg(long = "codebook-out")]
    pub codebook_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file; command-line flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report rates and exponents in bits instead of nats
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Infeasible(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) | Error::Resource { .. } => CliError::Infeasible(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the verb and returns
/// the process exit code. CSV goes to `out` unless `--out` is given;
/// diagnostics and summaries go to `err`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => return report(err, CliError::Usage(e)),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli.command, err) {
        Ok(text) => {
            let written = match &cli.command.params().out {
                Some(path) => std::fs::write(path, text.as_bytes()),
                None => out.write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => report(err, e.into()),
            }
        }
        Err(e) => report(err, e),
    }
}

fn report(err: &mut dyn Write, e: CliError) -> i32 {
    let (code, kind, msg) = match e {
        CliError::Usage(m) => (EXIT_USAGE, "usage error", m),
        CliError::Infeasible(m) => (EXIT_INFEASIBLE, "infeasible", m),
        CliError::Io(m) => (EXIT_IO, "io error", m),
    };
    let _ = writeln!(err, "error ({kind}): {msg}");
    code
}

/// Appends `--key=value` for each config-file entry whose flag is absent
/// from the command line.
fn merge_config(mut args: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("config {}: {e}", path.display()))?;
    let given: Vec<String> = args
        .iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config {}:{}: expected key=value", path.display(), lineno + 1))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key == "config" || given.iter().any(|g| g == key) {
            continue;
        }
        match (key, value) {
            ("pairing" | "bits", "true" | "1" | "yes") => args.push(format!("--{key}").into()),
            ("pairing" | "bits", "false" | "0" | "no") => {}
            _ => args.push(format!("--{key}={value}").into()),
        }
    }
    Ok(args)
}

fn execute(cmd: &Command, err: &mut dyn Write) -> CliResult<String> {
    let p = cmd.params();
    let mut buf = String::new();
    let _ = writeln!(buf, "# outage-tradeoff {} {}", cmd.name(), env!("CARGO_PKG_VERSION"));
    match cmd {
        Command::Exponents(_) => cmd_exponents(p, &mut buf)?,
        Command::Tradeoff(_) => cmd_tradeoff(p, &mut buf)?,
        Command::Simulate(_) => cmd_simulate(p, &mut buf, err)?,
        Command::Sweep(_) => cmd_sweep(p, &mut buf)?,
        Command::LatticeInfo(_) => cmd_lattice_info(p, &mut buf)?,
    }
    Ok(buf)
}

fn kv(buf: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(buf, "# {key}={value}");
}

fn units(buf: &mut String, bits: bool) {
    kv(buf, "units", if bits { "bits" } else { "nats" });
}

fn grid_text(g: &[f64]) -> String {
    g.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(";")
}

fn opt_text<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// Fixed-point column for rates, exponents and parameters.
fn fx(v: f64) -> String {
    format!("{v:.12}")
}

/// Scientific column for probabilities and costs.
fn sci(v: f64) -> String {
    format!("{v:.12e}")
}

fn info_scale(bits: bool) -> f64 {
    if bits {
        1.0 / std::f64::consts::LN_2
    } else {
        1.0
    }
}

fn single(grid: &Option<Grid>, name: &str) -> CliResult<Option<f64>> {
    match grid {
        None => Ok(None),
        Some(Grid(v)) if v.len() == 1 => Ok(Some(v[0])),
        Some(Grid(v)) => Err(CliError::Usage(format!("--{name} takes one value here, got {}", v.len()))),
    }
}

fn lambda_grid(p: &Params) -> CliResult<Vec<f64>> {
    Ok(match &p.lambda {
        Some(g) => g.0.clone(),
        None => parse_grid(DEFAULT_LAMBDA_RANGE).map_err(CliError::Usage)?.0,
    })
}

fn cmd_exponents(p: &Params, buf: &mut String) -> CliResult<()> {
    let gamma = single(&p.gamma, "gamma")?.ok_or_else(|| CliError::Usage("exponents needs --gamma".into()))?;
    let lambdas = lambda_grid(p)?;
    kv(buf, "lambda", grid_text(&lambdas));
    kv(buf, "gamma", gamma);
    kv(buf, "alpha", p.alpha);
    units(buf, p.bits);
    let _ = writeln!(buf, "lambda,w,rate_converse,rate_achievable,E_U,E_L,gap,tight");
    for &lambda in &lambdas {
        let _ = writeln!(buf, "{}", exponent_row(lambda, gamma, p.alpha, p.bits)?);
    }
    Ok(())
}

fn exponent_row(lambda: f64, gamma: f64, alpha: f64, bits: bool) -> CliResult<String> {
    let params = TradeoffParams::new(lambda, gamma, alpha)?;
    let pt = exponents::curve_point(&params)?;
    let k = info_scale(bits);
    let gap = pt.gap();
    let tight = lambda <= exponents::tight_lambda_max::<f64>() && gap.abs() <= 1e-10;
    Ok(format!(
        "{},{},{},{},{},{},{},{}",
        fx(lambda),
        fx(pt.w),
        fx(pt.rate_converse * k),
        fx(pt.rate_achievable * k),
        fx(pt.e_upper.value * k),
        fx(pt.e_lower.value * k),
        fx(gap * k),
        tight
    ))
}

fn cmd_tradeoff(p: &Params, buf: &mut String) -> CliResult<()> {
    let gammas = p.gamma.clone().map(|g| g.0).ok_or_else(|| CliError::Usage("tradeoff needs --gamma".into()))?;
    let lambdas = lambda_grid(p)?;
    kv(buf, "lambda", grid_text(&lambdas));
    kv(buf, "gamma", grid_text(&gammas));
    kv(buf, "alpha", p.alpha);
    units(buf, p.bits);
    let _ = writeln!(buf, "gamma,lambda,w,rate_converse,rate_achievable,E_U,E_L,gap,tight");
    for &gamma in &gammas {
        for &lambda in &lambdas {
            let _ = writeln!(buf, "{},{}", fx(gamma), exponent_row(lambda, gamma, p.alpha, p.bits)?);
        }
    }
    Ok(())
}

fn outage_spec(p: &Params) -> OutageSpec {
    match p.outage {
        OutageArg::Decode => OutageSpec::Decode,
        OutageArg::Sphere => OutageSpec::Sphere(p.theta),
    }
}

fn cmd_simulate(p: &Params, buf: &mut String, err: &mut dyn Write) -> CliResult<()> {
    let n = match &p.n {
        Some(CountList(v)) if v.len() == 1 => v[0],
        Some(_) => return Err(CliError::Usage("--n takes one value for simulate".into())),
        None if p.lattice == LatticeArg::E8 => 8,
        None => return Err(CliError::Usage("simulate needs --n".into())),
    };
    let lambda = single(&p.lambda, "lambda")?.unwrap_or(0.1);
    let gamma_flag = single(&p.gamma, "gamma")?;
    let sigma = match (p.sigma, gamma_flag) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give --sigma or --gamma, not both".into())),
        (Some(s), None) => s,
        (None, Some(g)) if g > 0.0 => (p.power / g).sqrt(),
        (None, Some(g)) => return Err(CliError::Usage(format!("gamma must be > 0, got {g}"))),
        (None, None) => return Err(CliError::Usage("simulate needs --sigma or --gamma".into())),
    };
    let cfg = SimConfig {
        n,
        power: p.power,
        sigma,
        lambda,
        alpha: p.alpha,
        trials: p.trials,
        seed: p.seed,
        outage: outage_spec(p),
        tilt: p.tilt,
        u_grid: p.u_grid,
    };
    cfg.validate()?;
    let gamma = cfg.gamma();

    let levels = match (p.levels, p.rate) {
        (Some(m), _) => m,
        (None, Some(r)) => levels_for_rate(r, n)?,
        (None, None) => {
            let r = exponents::rate_achievable(&TradeoffParams::new(lambda, gamma, p.alpha)?)?;
            levels_for_rate(r, n)?
        }
    };
    if levels == 0 {
        return Err(CliError::Usage("M must be >= 1".into()));
    }
    if p.pairing && !levels.is_multiple_of(2) {
        return Err(CliError::Usage(format!("pairing needs an even M, got {levels}")));
    }
    let lattice = LatticeDef::<f64>::new(p.lattice.into(), n)?;
    let outage = cfg.outage.resolve(lambda)?;
    let scheme = ModScheme::build(&lattice, p.power, levels, p.pairing, outage, p.decoder.into())?;

    let (e_u, e_l) = match TradeoffParams::new(lambda, gamma, p.alpha).and_then(|t| exponents::curve_point(&t)) {
        Ok(pt) => (pt.e_upper.value, pt.e_lower.value),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let res = sim::run_simulation(&cfg, &scheme)?;

    kv(buf, "lattice", lattice.name());
    kv(buf, "n", n);
    kv(buf, "P", p.power);
    kv(buf, "sigma", sigma);
    kv(buf, "gamma", gamma);
    kv(buf, "lambda", lambda);
    kv(buf, "alpha", p.alpha);
    kv(buf, "M", levels);
    kv(buf, "beta", scheme.codebook().scale());
    kv(buf, "rate", scheme.codebook().rate());
    kv(buf, "trials", p.trials);
    kv(buf, "seed", p.seed);
    kv(buf, "tilt", opt_text(p.tilt));
    kv(buf, "outage", outage_text(&cfg.outage, lambda)?);
    kv(buf, "pairing", p.pairing);
    kv(buf, "decoder", format!("{:?}", p.decoder).to_lowercase());
    kv(buf, "u_grid", p.u_grid);
    units(buf, p.bits);
    let _ = writeln!(buf, "{SIM_HEADER}");
    let k = info_scale(p.bits);
    let _ = writeln!(
        buf,
        "{},{},{},{},{},{},{},{},{},{},{}",
        n,
        fx(lambda),
        fx(gamma),
        fx(p.alpha),
        sci(res.p_out),
        sci(res.stderr),
        fx(res.emp_outage_exp * k),
        res.worst_cost.map_or_else(|| "NaN".into(), sci),
        res.emp_cost_exp.map_or_else(|| "NaN".into(), |v| fx(v * k)),
        fx(e_u * k),
        fx(e_l * k),
    );

    let mut flags = Vec::new();
    if res.flags.degenerate_ci {
        flags.push("degenerate_ci");
    }
    if res.flags.undefined_cost {
        flags.push("undefined_cost");
    }
    if res.flags.no_outage_observed {
        flags.push("no_outage_observed");
    }
    let _ = writeln!(
        err,
        "summary: p_out={:.6e} stderr={:.3e} ci95=[{:.6e},{:.6e}] ess={:.1} worst_u={:.9} flags={}",
        res.p_out,
        res.stderr,
        res.ci95.0,
        res.ci95.1,
        res.trials_effective,
        res.worst_u,
        if flags.is_empty() { "none".to_string() } else { flags.join(";") }
    );
    Ok(())
}

fn outage_text(spec: &OutageSpec, lambda: f64) -> CliResult<String> {
    Ok(match spec {
        OutageSpec::Decode => "decode".into(),
        OutageSpec::Sphere(Some(t)) => format!("sphere(theta={t})"),
        OutageSpec::Sphere(None) => format!("sphere(theta={})", exponents::solve_w(lambda)?),
    })
}

fn levels_for_rate(rate: f64, n: usize) -> CliResult<usize> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(CliError::Infeasible(format!("rate {rate} gives no codebook")));
    }
    let m = (n as f64 * rate).exp().ceil();
    if m > crate::lattice::DEFAULT_ENUMERATION_CAP as f64 {
        return Err(Error::Resource { estimated: m, cap: crate::lattice::DEFAULT_ENUMERATION_CAP }.into());
    }
    Ok(m as usize)
}

fn cmd_sweep(p: &Params, buf: &mut String) -> CliResult<()> {
    let ns = p.n.clone().map(|c| c.0).ok_or_else(|| CliError::Usage("sweep needs --n".into()))?;
    let gammas = p.gamma.clone().map(|g| g.0).ok_or_else(|| CliError::Usage("sweep needs --gamma".into()))?;
    let lambdas = lambda_grid(p)?;
    let template = SimConfig {
        n: 1,
        power: p.power,
        sigma: 1.0,
        lambda: lambdas.first().copied().unwrap_or(0.1),
        alpha: p.alpha,
        trials: p.trials,
        seed: p.seed,
        outage: outage_spec(p),
        tilt: p.tilt,
        u_grid: p.u_grid,
    };
    template.validate()?;
    let settings = SweepSettings {
        lattice: p.lattice.into(),
        decoder: p.decoder.into(),
        pairing: p.pairing,
        mode: match p.mode {
            ModeArg::Simulate => SweepMode::Simulate,
            ModeArg::Exact => SweepMode::ExactSphere,
        },
        ..Default::default()
    };
    kv(buf, "mode", format!("{:?}", p.mode).to_lowercase());
    kv(buf, "n", ns.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"));
    kv(buf, "lambda", grid_text(&lambdas));
    kv(buf, "gamma", grid_text(&gammas));
    kv(buf, "alpha", p.alpha);
    kv(buf, "P", p.power);
    kv(buf, "lattice", LatticeKind::from(p.lattice).name());
    kv(buf, "trials", p.trials);
    kv(buf, "seed", p.seed);
    kv(buf, "tilt", opt_text(p.tilt));
    kv(buf, "outage", match p.outage {
        OutageArg::Decode => "decode".to_string(),
        OutageArg::Sphere => format!("sphere(theta={})", p.theta.map_or_else(|| "w(lambda)".into(), |t| t.to_string())),
    });
    kv(buf, "pairing", p.pairing);
    kv(buf, "decoder", format!("{:?}", p.decoder).to_lowercase());
    kv(buf, "u_grid", p.u_grid);
    kv(buf, "M", "ceil(exp(n*rate_achievable))");
    units(buf, p.bits);
    let _ = writeln!(buf, "{SIM_HEADER}");
    let k = info_scale(p.bits);
    let rows = sim::sweep_exponents(&template, &settings, &ns, &lambdas, &gammas);
    for r in &rows {
        if let Some(reason) = &r.infeasible {
            let _ = writeln!(buf, "# infeasible n={} lambda={} gamma={}: {reason}", r.n, r.lambda, r.gamma);
        }
        let _ = writeln!(
            buf,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fx(r.lambda),
            fx(r.gamma),
            fx(r.alpha),
            sci(r.p_out),
            sci(r.stderr),
            fx(r.emp_outage_exp * k),
            r.worst_cost.map_or_else(|| "NaN".into(), sci),
            r.emp_cost_exp.map_or_else(|| "NaN".into(), |v| fx(v * k)),
            fx(r.e_upper * k),
            fx(r.e_lower * k),
        );
    }
    Ok(())
}

fn cmd_lattice_info(p: &Params, buf: &mut String) -> CliResult<()> {
    let n = match &p.n {
        Some(CountList(v)) if v.len() == 1 => v[0],
        Some(_) => return Err(CliError::Usage("--n takes one value for lattice-info".into())),
        None if p.lattice == LatticeArg::E8 => 8,
        None => return Err(CliError::Usage("lattice-info needs --n".into())),
    };
    let lattice = LatticeDef::<f64>::new(p.lattice.into(), n)?;
    let sigma = p.sigma.unwrap_or(1.0);
    if !(sigma > 0.0) {
        return Err(CliError::Usage(format!("sigma must be > 0, got {sigma}")));
    }
    // every supported lattice has minimal norm² 1 or 2
    let shell = lattice.enumerate_ball(1.0, 2f64.sqrt())?;
    let min_norm2 = shell
        .iter()
        .map(|v| crate::scalar::norm2(v))
        .filter(|&r| r > 0.5)
        .fold(f64::INFINITY, f64::min);
    let kissing = shell
        .iter()
        .filter(|v| (crate::scalar::norm2(v) - min_norm2).abs() < 1e-9)
        .count();

    kv(buf, "lattice", lattice.name());
    kv(buf, "n", n);
    kv(buf, "sigma", sigma);
    let codebook = match p.levels {
        Some(m) => {
            kv(buf, "M", m);
            kv(buf, "P", p.power);
            Some(Codebook::build(&lattice, n, p.power, m)?)
        }
        None => None,
    };
    let _ = writeln!(buf, "lattice,n,det,nvnr,min_norm2,kissing,M,beta,rate");
    let scale = codebook.as_ref().map_or(1.0, |c| c.scale());
    let det = lattice.voronoi_volume() * scale.powi(n as i32);
    let _ = write!(
        buf,
        "{},{},{},{},{},{}",
        LatticeKind::from(p.lattice).name(),
        n,
        sci(det),
        sci(lattice.nvnr(scale, sigma * sigma)),
        fx(min_norm2 * scale * scale),
        kissing
    );
    match &codebook {
        Some(cb) => {
            let _ = writeln!(buf, ",{},{},{}", cb.len(), fx(cb.scale()), fx(cb.rate() * info_scale(p.bits)));
        }
        None => {
            let _ = writeln!(buf, ",,,");
        }
    }
    if let Some(path) = &p.codebook_out {
        let cb = codebook
            .as_ref()
            .ok_or_else(|| CliError::Usage("--codebook-out needs --M".into()))?;
        let file = std::fs::File::create(path)?;
        cb.write_csv(std::io::BufWriter::new(file))?;
    }
    Ok(())
}
