//! Command-line front end: `evolve`, `check`, `sweep` and `verify`.
//!
//! Exit codes: 0 ok, 1 verify failure, 2 validation, 3 singular stationary
//! system, 4 regime violation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::channel::{classify_regime, ChannelParams, ComplexCM, GaussianState, RegimeClass};
use crate::error::Error;
use crate::propagator::{evolve, residue_general, stationary_cm};
use crate::separability::{
    cm_symplectic_eigenvalues, ppt_general, ppt_xp_symmetric, strong_asymptotic_criterion,
    strong_finite_time_criterion, symmetric_quartic_criterion, weak_intermode_criterion, Decision,
    SignComparison, Verdict, XpSymmetricState, CM_TOL,
};
use crate::sweep::{sweep_grid, AxisRange, BorderPoint, SweepSpec, DEFAULT_NBAR_MAX};
use crate::verify::{run_verify, Suite, DEFAULT_SEED, DEFAULT_TRIALS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_REGIME: i32 = 4;

pub const THREADS_ENV: &str = "GAUSSAMP_THREADS";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SingularSystem { .. } => EXIT_SINGULAR,
            Error::RegimeViolation(_) => EXIT_REGIME,
            _ => EXIT_VALIDATION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "gaussamp",
    version,
    about = "Two-mode Gaussian states under amplification and damping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve a state and print the correlation matrix at sample times (CSV).
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Evolve(EvolveArgs),
    /// Evaluate a separability criterion (JSON).
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Check(CheckArgs),
    /// Critical-noise border over a (gamma3p, eta1p, eta0p) grid (CSV).
    #[command(allow_negative_numbers = true, args_override_self = true)]
    Sweep(SweepArgs),
    /// Run the seeded self-check suites (JSON).
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
}

/// Channel parameters, either normalized (Γ₀ = 1) or as raw rates.
#[derive(Args, Debug, Clone, Default)]
struct ChannelArgs {
    /// Normalized single-mode symmetric drive 2·eta0/gamma0.
    #[arg(long)]
    eta0p: Option<f64>,
    /// Normalized inter-mode drive 2·eta1/gamma0.
    #[arg(long)]
    eta1p: Option<f64>,
    /// Normalized single-mode antisymmetric drive 2·eta3/gamma0.
    #[arg(long)]
    eta3p: Option<f64>,
    /// Normalized damping asymmetry (gamma1 − gamma2)/(gamma1 + gamma2).
    #[arg(long)]
    gamma3p: Option<f64>,
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    eta3: Option<f64>,
    #[arg(long)]
    gamma1: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,
    /// Bath thermal occupancy.
    #[arg(long, default_value_t = 0.0)]
    nbar0: f64,
}

impl ChannelArgs {
    fn normalized_flags(&self) -> Vec<(&'static str, f64)> {
        [
            ("--eta0p", self.eta0p),
            ("--eta1p", self.eta1p),
            ("--eta3p", self.eta3p),
            ("--gamma3p", self.gamma3p),
        ]
        .into_iter()
        .filter_map(|(n, v)| v.map(|v| (n, v)))
        .collect()
    }

    fn raw_flags(&self) -> Vec<(&'static str, f64)> {
        [
            ("--eta0", self.eta0),
            ("--eta1", self.eta1),
            ("--eta3", self.eta3),
            ("--gamma1", self.gamma1),
            ("--gamma2", self.gamma2),
        ]
        .into_iter()
        .filter_map(|(n, v)| v.map(|v| (n, v)))
        .collect()
    }

    /// `normalized_time` / `raw_time` name the time flags given alongside,
    /// which join the corresponding group.
    fn resolve(
        &self,
        normalized_time: Option<&str>,
        raw_time: Option<&str>,
    ) -> CliResult<ChannelParams> {
        let mut normalized: Vec<&str> = self.normalized_flags().iter().map(|(n, _)| *n).collect();
        normalized.extend(normalized_time);
        let mut raw: Vec<&str> = self.raw_flags().iter().map(|(n, _)| *n).collect();
        raw.extend(raw_time);
        if !normalized.is_empty() && !raw.is_empty() {
            return Err(CliError::validation(format!(
                "cannot mix normalized flags ({}) with raw-rate flags ({})",
                normalized.join(", "),
                raw.join(", ")
            )));
        }
        for (name, value) in self
            .normalized_flags()
            .into_iter()
            .chain(self.raw_flags())
            .chain([("--nbar0", self.nbar0)])
        {
            if !value.is_finite() {
                return Err(CliError::validation(format!(
                    "{name} must be finite, got {value}"
                )));
            }
        }
        if !raw.is_empty() {
            let gamma1 = self
                .gamma1
                .ok_or_else(|| CliError::validation("raw-rate input requires --gamma1"))?;
            let gamma2 = self
                .gamma2
                .ok_or_else(|| CliError::validation("raw-rate input requires --gamma2"))?;
            return Ok(ChannelParams::new(
                self.eta0.unwrap_or(0.0),
                self.eta1.unwrap_or(0.0),
                self.eta3.unwrap_or(0.0),
                gamma1,
                gamma2,
                self.nbar0,
            )?);
        }
        let gamma3p = self.gamma3p.unwrap_or(0.0);
        if gamma3p.abs() > 1.0 {
            return Err(CliError::validation(format!(
                "--gamma3p must lie in [-1, 1], got {gamma3p}"
            )));
        }
        Ok(ChannelParams::normalized(
            self.eta0p.unwrap_or(0.0),
            self.eta1p.unwrap_or(0.0),
            self.eta3p.unwrap_or(0.0),
            gamma3p,
            self.nbar0,
        )?)
    }
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Final normalized time gamma0·t/2.
    #[arg(long)]
    tprime_max: Option<f64>,
    /// Final raw time (raw-rate input only).
    #[arg(long, visible_alias = "t")]
    t_max: Option<f64>,
    /// Number of equally spaced sample times from 0 to the final time.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Initial state: vacuum, stationary, or thermal:<nbar>.
    #[arg(long, default_value = "vacuum")]
    initial: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON file whose keys are flag names; flags on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    General,
    Xp,
    Weak,
    StrongFinite,
    StrongAsymptotic,
    Quartic,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Normalized time of a state evolved from the vacuum. Without it,
    /// general and xp use the stationary state.
    #[arg(long)]
    tprime: Option<f64>,
    /// Raw time (raw-rate input only).
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Single gamma3p value (replaces the range flags).
    #[arg(long, conflicts_with_all = ["gamma3p_start", "gamma3p_stop", "gamma3p_step"])]
    gamma3p: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    gamma3p_start: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma3p_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    gamma3p_step: f64,
    /// Single eta1p value (replaces the range flags).
    #[arg(long, conflicts_with_all = ["eta1p_start", "eta1p_stop", "eta1p_step"])]
    eta1p: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    eta1p_start: f64,
    #[arg(long, default_value_t = 2.0)]
    eta1p_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    eta1p_step: f64,
    /// Single eta0p value (replaces the range flags).
    #[arg(long, conflicts_with_all = ["eta0p_start", "eta0p_stop", "eta0p_step"])]
    eta0p: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    eta0p_start: f64,
    /// Defaults to --eta0p-start.
    #[arg(long)]
    eta0p_stop: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    eta0p_step: f64,
    /// Upper end of the noise search interval.
    #[arg(long, default_value_t = DEFAULT_NBAR_MAX)]
    nbar_max: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Random draws per suite.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Force the named suite to fail.
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Round-trip exact, locale independent.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn emit(body: &str, output: &Option<PathBuf>, out: &mut dyn Write) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, body).map_err(|e| {
            CliError::validation(format!("cannot write --output {}: {e}", path.display()))
        }),
        None => out
            .write_all(body.as_bytes())
            .map_err(|e| CliError::validation(format!("cannot write output: {e}"))),
    }
}

/// Inserts the flags encoded by `--config <file>` directly after the
/// subcommand name, so that flags given explicitly override them.
fn expand_config(args: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).cloned();
            if path.is_none() {
                return Err(CliError::validation("--config requires a file path"));
            }
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let shown = PathBuf::from(&path).display().to_string();
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::validation(format!("cannot read --config {shown}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("malformed config {shown}: {e}")))?;
    let serde_json::Value::Object(map) = value else {
        return Err(CliError::validation(format!(
            "malformed config {shown}: expected a JSON object"
        )));
    };
    let mut tokens = Vec::new();
    for (key, v) in map {
        if key == "config" {
            return Err(CliError::validation(format!(
                "malformed config {shown}: nested 'config' key"
            )));
        }
        let flag = format!("--{key}");
        match v {
            serde_json::Value::Null | serde_json::Value::Bool(false) => {}
            serde_json::Value::Bool(true) => tokens.push(OsString::from(flag)),
            serde_json::Value::Number(n) => {
                tokens.push(OsString::from(flag));
                tokens.push(OsString::from(n.to_string()));
            }
            serde_json::Value::String(s) => {
                tokens.push(OsString::from(flag));
                tokens.push(OsString::from(s));
            }
            _ => {
                return Err(CliError::validation(format!(
                    "malformed config {shown}: key '{key}' must be a number, string or boolean"
                )))
            }
        }
    }
    // args[0] is the program name, args[1] the subcommand.
    if args.len() < 2 {
        return Ok(args);
    }
    let mut expanded = args[..2].to_vec();
    expanded.extend(tokens);
    expanded.extend_from_slice(&args[2..]);
    Ok(expanded)
}

fn parse_initial(spec: &str, params: &ChannelParams) -> CliResult<GaussianState> {
    match spec {
        "vacuum" => Ok(GaussianState::vacuum()),
        "stationary" => Ok(GaussianState::centred(stationary_cm(params)?)),
        _ => {
            let n = spec
                .strip_prefix("thermal:")
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|n| n.is_finite() && *n >= 0.0)
                .ok_or_else(|| {
                    CliError::validation(format!(
                        "--initial must be vacuum, stationary or thermal:<nbar >= 0>, got '{spec}'"
                    ))
                })?;
            Ok(GaussianState::centred(ComplexCM::thermal(n)))
        }
    }
}

const EVOLVE_HEADER: &str = "t,tprime,\
x11_re,x11_im,x12_re,x12_im,x21_re,x21_im,x22_re,x22_im,\
y11_re,y11_im,y12_re,y12_im,y21_re,y21_im,y22_re,y22_im,\
nu_minus,nu_plus";

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    tprime: f64,
    x: [[[f64; 2]; 2]; 2],
    y: [[[f64; 2]; 2]; 2],
    nu: [f64; 2],
}

fn cmd_evolve(args: EvolveArgs, out: &mut dyn Write) -> CliResult<()> {
    let params = args.channel.resolve(
        args.tprime_max.map(|_| "--tprime-max"),
        args.t_max.map(|_| "--t-max"),
    )?;
    let t_max = match (args.tprime_max, args.t_max) {
        (Some(tp), None) => params.time_from_tprime(tp),
        (None, Some(t)) => t,
        (None, None) => {
            return Err(CliError::validation(
                "one of --tprime-max or --t-max is required",
            ))
        }
        (Some(_), Some(_)) => unreachable!("rejected as mixed flag groups"),
    };
    if !(t_max.is_finite() && t_max >= 0.0) {
        return Err(CliError::validation(format!(
            "final time must be finite and >= 0, got {t_max}"
        )));
    }
    if args.samples == 0 {
        return Err(CliError::validation("--samples must be at least 1"));
    }
    let initial = parse_initial(&args.initial, &params)?;

    let times: Vec<f64> = if t_max == 0.0 || args.samples == 1 {
        vec![t_max]
    } else {
        (0..args.samples)
            .map(|i| t_max * i as f64 / (args.samples - 1) as f64)
            .collect()
    };
    let mut rows = Vec::with_capacity(times.len());
    for &t in &times {
        let state = if t == 0.0 {
            initial
        } else {
            evolve(&initial, &params, t)?
        };
        let (nu_minus, nu_plus) = cm_symplectic_eigenvalues(&state.cm)?;
        let entries = |m: &crate::pauli::Mat2| {
            std::array::from_fn(|i| std::array::from_fn(|j| [m.get(i, j).re, m.get(i, j).im]))
        };
        rows.push(EvolveRow {
            t,
            tprime: params.tprime(t),
            x: entries(&state.cm.x),
            y: entries(&state.cm.y),
            nu: [nu_minus, nu_plus],
        });
    }

    let body = match args.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = String::from(EVOLVE_HEADER);
            s.push('\n');
            for r in &rows {
                let mut fields = vec![num(r.t), num(r.tprime)];
                for block in [&r.x, &r.y] {
                    for row in block {
                        for entry in row {
                            fields.push(num(entry[0]));
                            fields.push(num(entry[1]));
                        }
                    }
                }
                fields.push(num(r.nu[0]));
                fields.push(num(r.nu[1]));
                s.push_str(&fields.join(","));
                s.push('\n');
            }
            s
        }
    };
    emit(&body, &args.output, out)
}

#[derive(Serialize)]
struct ParamsEcho {
    eta0p: f64,
    eta1p: f64,
    eta3p: f64,
    gamma3p: f64,
    nbar0: f64,
    eta0: f64,
    eta1: f64,
    eta3: f64,
    gamma1: f64,
    gamma2: f64,
}

impl From<&ChannelParams> for ParamsEcho {
    fn from(p: &ChannelParams) -> Self {
        ParamsEcho {
            eta0p: p.eta0p(),
            eta1p: p.eta1p(),
            eta3p: p.eta3p(),
            gamma3p: p.gamma3p(),
            nbar0: p.nbar0(),
            eta0: p.eta0(),
            eta1: p.eta1(),
            eta3: p.eta3(),
            gamma1: p.gamma1(),
            gamma2: p.gamma2(),
        }
    }
}

#[derive(Serialize)]
struct StrongFiniteEcho {
    direct_margin: f64,
    direct_entrywise_margin: f64,
    polynomial_margin: f64,
    polynomial_corrected_margin: f64,
    comparison: SignComparison,
}

#[derive(Serialize)]
struct CheckOutput {
    method: &'static str,
    decision: Decision,
    margin: f64,
    regime: RegimeClass,
    params: ParamsEcho,
    /// "stationary" or "evolved" (from the vacuum, to `tprime`).
    state: &'static str,
    tprime: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    strong_finite: Option<StrongFiniteEcho>,
}

fn require_intermode(params: &ChannelParams, method: &str) -> CliResult<()> {
    if params.is_intermode_only() {
        Ok(())
    } else {
        Err(Error::RegimeViolation(format!(
            "--method {method} needs eta0 = eta3 = 0, got eta0p = {}, eta3p = {}",
            params.eta0p(),
            params.eta3p()
        ))
        .into())
    }
}

fn cmd_check(args: CheckArgs, out: &mut dyn Write) -> CliResult<()> {
    let params = args
        .channel
        .resolve(args.tprime.map(|_| "--tprime"), args.t.map(|_| "--t"))?;
    let tprime = match (args.tprime, args.t) {
        (Some(tp), _) => Some(tp),
        (None, Some(t)) => Some(params.tprime(t)),
        (None, None) => None,
    };
    if let Some(tp) = tprime {
        if !(tp.is_finite() && tp >= 0.0) {
            return Err(CliError::validation(format!(
                "time must be finite and >= 0, got t' = {tp}"
            )));
        }
    }
    let state_cm = |params: &ChannelParams| -> CliResult<ComplexCM> {
        Ok(match tprime {
            Some(tp) => crate::propagator::evolve_vacuum_tprime(params, tp)?.cm,
            None => residue_general(params)?.to_cm(),
        })
    };
    let (g, e, n) = (params.gamma3p(), params.eta1p(), params.nbar0());
    let mut strong_finite = None;
    let mut state = if tprime.is_some() {
        "evolved"
    } else {
        "stationary"
    };
    let (name, verdict): (&'static str, Verdict) = match args.method {
        Method::General => ("general", ppt_general(&state_cm(&params)?)?),
        Method::Xp => {
            let cm = state_cm(&params)?;
            let xp = XpSymmetricState::from_cm(&cm, CM_TOL).map_err(|_| {
                CliError::from(Error::RegimeViolation(
                    "--method xp needs an x-p symmetric state (eta0 = eta3 = 0)".into(),
                ))
            })?;
            ("xp", ppt_xp_symmetric(&xp))
        }
        Method::Weak => {
            require_intermode(&params, "weak")?;
            state = "stationary";
            ("weak", weak_intermode_criterion(g, e, n)?)
        }
        Method::StrongFinite => {
            require_intermode(&params, "strong-finite")?;
            let tp = tprime.ok_or_else(|| {
                CliError::validation("--method strong-finite requires --tprime or --t")
            })?;
            let v = strong_finite_time_criterion(&params, tp)?;
            strong_finite = Some(StrongFiniteEcho {
                direct_margin: v.direct.margin,
                direct_entrywise_margin: v.direct_entrywise.margin,
                polynomial_margin: v.polynomial.margin,
                polynomial_corrected_margin: v.polynomial_corrected.margin,
                comparison: v.comparison,
            });
            ("strong-finite", v.verdict())
        }
        Method::StrongAsymptotic => {
            require_intermode(&params, "strong-asymptotic")?;
            state = "stationary";
            ("strong-asymptotic", strong_asymptotic_criterion(g, e, n)?)
        }
        Method::Quartic => {
            state = "stationary";
            ("quartic", symmetric_quartic_criterion(&params)?)
        }
    };
    let report = CheckOutput {
        method: name,
        decision: verdict.decision,
        margin: verdict.margin,
        regime: classify_regime(&params),
        params: ParamsEcho::from(&params),
        state,
        tprime: if state == "evolved" { tprime } else { None },
        strong_finite,
    };
    emit(&to_json(&report), &args.output, out)
}

fn threads_from_env() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse::<usize>().map_err(|_| {
            CliError::validation(format!(
                "{THREADS_ENV} must be a non-negative integer, got '{v}'"
            ))
        }),
    }
}

pub const SWEEP_HEADER: &str = "gamma3p,eta1p,eta0p,regime,critical_nbar0,status";

fn sweep_csv(points: &[BorderPoint]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for p in points {
        let critical = p.critical_value.map(num).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            num(p.gamma3p),
            num(p.eta1p),
            num(p.eta0p),
            p.governing_regime().as_str(),
            critical,
            p.status.as_str()
        );
    }
    s
}

fn cmd_sweep(args: SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let axis = |single: Option<f64>, start: f64, stop: f64, step: f64| match single {
        Some(v) => AxisRange::single(v),
        None => AxisRange::new(start, stop, step),
    };
    let spec = SweepSpec {
        gamma3p: axis(
            args.gamma3p,
            args.gamma3p_start,
            args.gamma3p_stop,
            args.gamma3p_step,
        ),
        eta1p: axis(
            args.eta1p,
            args.eta1p_start,
            args.eta1p_stop,
            args.eta1p_step,
        ),
        eta0p: axis(
            args.eta0p,
            args.eta0p_start,
            args.eta0p_stop.unwrap_or(args.eta0p_start),
            args.eta0p_step,
        ),
        nbar_max: args.nbar_max,
    };
    spec.validate()?;
    let threads = threads_from_env()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::validation(format!("cannot start {threads} worker threads: {e}")))?;
    let points = pool.install(|| sweep_grid(&spec))?;
    let body = match args.format {
        Format::Csv => sweep_csv(&points),
        Format::Json => to_json(&points),
    };
    emit(&body, &args.output, out)
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    let fault = args
        .inject_fault
        .as_deref()
        .map(Suite::from_name)
        .transpose()?;
    let report = run_verify(args.seed, args.trials, fault);
    emit(&to_json(&report), &args.output, out)?;
    if report.passed {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(
            err,
            "verify: failing suites: {}",
            report.failing_suites().join(", ")
        );
        Ok(EXIT_VERIFY_FAILED)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code; errors go to `err` only.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            return e.code;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(rendered.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(rendered.as_bytes());
                    EXIT_VALIDATION
                }
            };
        }
    };
    let result = match cli.command {
        Command::Evolve(a) => cmd_evolve(a, out).map(|_| EXIT_OK),
        Command::Check(a) => cmd_check(a, out).map(|_| EXIT_OK),
        Command::Sweep(a) => cmd_sweep(a, out).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}
