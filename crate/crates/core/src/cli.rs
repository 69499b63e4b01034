//! Command-line front end. Parses flags, loads and writes files, and
//! delegates every computation to the library modules.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{ArgAction, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::dd::DoubleDouble;
use crate::estimators::{
    aic_order, covariance_determinants, hokalman_order_with_plateau, DEFAULT_COLLAPSE_RATIO,
};
use crate::experiments::{list_experiments, render_experiment, ExperimentSpec};
use crate::io::{load_signal, save_signal, save_signal_pair, write_signal, write_signal_pair};
use crate::rank::{RankPolicy, DEFAULT_GAP_RATIO};
use crate::scalar::Real;
use crate::signal::{
    add_noise, add_offset, gen_high_order, gen_mode_sum, gen_nonhomogeneous, gen_y5,
    uniform_amplitude_for_snr, BaseFunction, HighOrderSpec, Mode, ModeSum, NoiseSpec, Signal,
};

#[derive(Debug, Parser)]
#[command(
    name = "hankel-order",
    version,
    about = "Model-order estimation from sampled responses via Hankel-matrix rank"
)]
pub struct Cli {
    /// Seed for noise generation and experiments.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Rank tolerance policy [default: relative, max(rows,cols)·ε·64].
    #[arg(long, global = true, value_enum)]
    pub policy: Option<PolicyKind>,

    /// Threshold for the policy: relative τ, absolute τ, or minimum gap ratio.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Output path; reports go to standard output when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Print diagnostics to standard error.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Relative,
    Absolute,
    Gap,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a signal CSV (`n,value`, or `n,y,u` for nonhomogeneous).
    Generate(GenerateArgs),
    /// Rank sweep of the Hankel matrix of a signal CSV; prints `order=<k>`.
    Rank(RankArgs),
    /// Order estimate by Ho-Kalman rank, AIC or covariance determinants.
    Estimate(EstimateArgs),
    /// Run a registered experiment; extra `--key value` pairs override its parameters.
    Experiment(ExperimentArgs),
    /// List registered experiments with their default parameters.
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "mode_sum")]
    ModeSum,
    #[value(name = "y5")]
    Y5,
    #[value(name = "high_order")]
    HighOrder,
    #[value(name = "nonhomogeneous")]
    Nonhomogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    Sin,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    /// f64 unless some input value carries more than 17 significant digits.
    Auto,
    F64,
    Dd,
}

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub family: Family,
    #[arg(long, default_value_t = 40)]
    pub count: usize,
    /// Sampling period T.
    #[arg(long, default_value = "1")]
    pub period: String,
    /// mode_sum term `coef,decay[,freq[,cos|sin]]`: coef·e^(−decay·t)·cos|sin(freq·t). Repeatable.
    #[arg(long = "mode", allow_hyphen_values = true)]
    pub modes: Vec<String>,
    /// high_order base function.
    #[arg(long, value_enum, default_value_t = Base::Sin)]
    pub base: Base,
    /// high_order N₀.
    #[arg(long, default_value_t = 50)]
    pub n0: usize,
    /// high_order M.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Uniform noise amplitude a, noise ~ U(−a, a).
    #[arg(long, conflicts_with = "snr_db")]
    pub noise_amplitude: Option<f64>,
    /// Uniform noise at this SNR in dB.
    #[arg(long)]
    pub snr_db: Option<f64>,
    /// Constant added after noise.
    #[arg(long, allow_hyphen_values = true)]
    pub offset: Option<f64>,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Dd)]
    pub precision: PrecisionArg,
}

#[derive(Debug, clap::Args)]
pub struct RankArgs {
    pub input: PathBuf,
    /// Largest Hankel dimension of the sweep n = 2..=n_max [default: ⌊(len+1)/2⌋, at most 20].
    #[arg(long, visible_alias = "n")]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = crate::estimators::DEFAULT_PLATEAU_LEN)]
    pub plateau_len: usize,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Auto)]
    pub precision: PrecisionArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Hokalman,
    Aic,
    Covdet,
}

#[derive(Debug, clap::Args)]
pub struct EstimateArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// hokalman: largest Hankel dimension.
    #[arg(long, visible_alias = "n")]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = crate::estimators::DEFAULT_PLATEAU_LEN)]
    pub plateau_len: usize,
    /// aic: largest AR order.
    #[arg(long, default_value_t = 10)]
    pub p_max: usize,
    /// covdet: `lo:hi` inclusive.
    #[arg(long, default_value = "2:8")]
    pub m_range: String,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Auto)]
    pub precision: PrecisionArg,
}

#[derive(Debug, clap::Args)]
pub struct ExperimentArgs {
    pub name: String,
    /// Parameter overrides as `--key value`, `--key=value` or `key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    pub overrides: Vec<String>,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; usage errors exit with 2.
pub fn run_cli<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let command = Cli::command().after_help(experiment_listing());
    let cli = match command
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let text = err.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err:#}");
            1
        }
    }
}

fn experiment_listing() -> String {
    let mut text = String::from("Experiments:\n");
    for info in list_experiments() {
        text.push_str(&format!("  {:<22} {}\n", info.name, info.description));
    }
    text
}

/// Resolves `--policy`/`--tol`; `None` when neither flag was given.
fn requested_policy(cli: &Cli) -> anyhow::Result<Option<RankPolicy>> {
    let policy = match (cli.policy, cli.tol) {
        (None, None) => return Ok(None),
        (Some(PolicyKind::Relative), None) => RankPolicy::MachineRelative,
        (None | Some(PolicyKind::Relative), Some(tol)) => RankPolicy::relative(tol)?,
        (Some(PolicyKind::Absolute), Some(tol)) => RankPolicy::absolute(tol)?,
        (Some(PolicyKind::Absolute), None) => bail!("--policy absolute needs --tol"),
        (Some(PolicyKind::Gap), tol) => RankPolicy::gap_ratio(tol.unwrap_or(DEFAULT_GAP_RATIO))?,
    };
    Ok(Some(policy))
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<()> {
    let policy = requested_policy(cli)?;
    match &cli.command {
        Command::Generate(args) => match args.precision {
            PrecisionArg::F64 => generate::<f64>(cli, args, stdout),
            PrecisionArg::Dd | PrecisionArg::Auto => generate::<DoubleDouble>(cli, args, stdout),
        },
        Command::Rank(args) => {
            let policy = policy.unwrap_or_default();
            match resolve_precision(args.precision, &args.input)? {
                PrecisionArg::F64 => rank::<f64>(cli, args, policy, stdout, stderr),
                _ => rank::<DoubleDouble>(cli, args, policy, stdout, stderr),
            }
        }
        Command::Estimate(args) => {
            let policy = policy.unwrap_or_default();
            match resolve_precision(args.precision, &args.input)? {
                PrecisionArg::F64 => estimate::<f64>(cli, args, policy, stdout, stderr),
                _ => estimate::<DoubleDouble>(cli, args, policy, stdout, stderr),
            }
        }
        Command::Experiment(args) => experiment(cli, args, policy, stdout, stderr),
        Command::List => {
            for info in list_experiments() {
                let defaults: Vec<String> = info
                    .defaults
                    .iter()
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect();
                writeln!(
                    stdout,
                    "{}\tseed={}\t{}\t{}",
                    info.name,
                    info.default_seed,
                    info.description,
                    defaults.join(" ")
                )?;
            }
            Ok(())
        }
    }
}

/// `auto` picks double-double when any value in the file has more than 17
/// significant digits, i.e. when the data carries more than `f64` precision.
fn resolve_precision(requested: PrecisionArg, input: &Path) -> anyhow::Result<PrecisionArg> {
    if requested != PrecisionArg::Auto {
        return Ok(requested);
    }
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let wide = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .flat_map(|l| l.split(',').skip(1))
        .any(|field| significant_digits(field) > 17);
    Ok(if wide {
        PrecisionArg::Dd
    } else {
        PrecisionArg::F64
    })
}

fn significant_digits(field: &str) -> usize {
    let mantissa = field.trim().split(['e', 'E']).next().unwrap_or("");
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').trim_end_matches('0').len()
}

/// Writes `text` to `--out`, or to standard output.
fn emit(cli: &Cli, text: &str, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_real<T: Real>(text: &str, what: &str) -> anyhow::Result<T> {
    T::parse_decimal(text).ok_or_else(|| anyhow!("{what}: `{text}` is not a number"))
}

fn parse_mode<T: Real>(text: &str) -> anyhow::Result<Mode<T>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let number = |i: usize| parse_real::<T>(parts[i], "--mode");
    match parts.len() {
        2 => Ok(Mode::exponential(number(0)?, number(1)?)),
        3 => Ok(Mode::damped_cos(number(0)?, number(1)?, number(2)?)),
        4 if parts[3] == "cos" => Ok(Mode::damped_cos(number(0)?, number(1)?, number(2)?)),
        4 if parts[3] == "sin" => Ok(Mode::damped_sin(number(0)?, number(1)?, number(2)?)),
        _ => bail!("--mode expects `coef,decay[,freq[,cos|sin]]`, got `{text}`"),
    }
}

fn generate<T: Real>(cli: &Cli, args: &GenerateArgs, stdout: &mut dyn Write) -> anyhow::Result<()> {
    let period: T = parse_real(&args.period, "--period")?;
    let perturb = |signal: Signal<T>| -> anyhow::Result<Signal<T>> {
        let amplitude = match (args.noise_amplitude, args.snr_db) {
            (Some(a), _) => Some(T::of(a)),
            (None, Some(snr)) => Some(uniform_amplitude_for_snr(&signal, T::of(snr))),
            (None, None) => None,
        };
        let noisy = match amplitude {
            Some(a) => add_noise(&signal, &NoiseSpec::new(a, cli.seed.unwrap_or(0))?)?,
            None => signal,
        };
        Ok(match args.offset {
            Some(c) => add_offset(&noisy, T::of(c)),
            None => noisy,
        })
    };
    let signal = match args.family {
        Family::ModeSum => {
            if args.modes.is_empty() {
                bail!("mode_sum needs at least one --mode");
            }
            let modes = args
                .modes
                .iter()
                .map(|m| parse_mode::<T>(m))
                .collect::<anyhow::Result<Vec<_>>>()?;
            gen_mode_sum(&ModeSum::new(modes)?, args.count, period)?
        }
        Family::Y5 => gen_y5(args.count)?,
        Family::HighOrder => {
            let base = match args.base {
                Base::Sin => BaseFunction::Sinusoid,
                Base::Exp => BaseFunction::Exponential,
            };
            gen_high_order(
                &HighOrderSpec::<T>::with_linear_schedule(base, args.n0, args.m),
                args.count,
            )?
        }
        Family::Nonhomogeneous => {
            let (y, u) = gen_nonhomogeneous(args.count, period)?;
            let y = perturb(y)?;
            return match &cli.out {
                Some(path) => Ok(save_signal_pair(path, &y, &u)?),
                None => Ok(write_signal_pair(&y, &u, stdout)?),
            };
        }
    };
    let signal = perturb(signal)?;
    match &cli.out {
        Some(path) => save_signal(path, &signal)?,
        None => write_signal(&signal, stdout)?,
    }
    Ok(())
}

fn provenance_header<T: Real>(input: &Path, signal: &Signal<T>, policy: RankPolicy) -> String {
    format!(
        "# input: {}\n# provenance: {}\n# policy: {policy}\n# precision: {}\n",
        input.display(),
        signal.provenance(),
        std::any::type_name::<T>()
            .rsplit("::")
            .next()
            .unwrap_or("?"),
    )
}

fn default_n_max(len: usize) -> usize {
    (len.div_ceil(2)).clamp(2, 20)
}

fn rank<T: Real>(
    cli: &Cli,
    args: &RankArgs,
    policy: RankPolicy,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> anyhow::Result<()> {
    let signal: Signal<T> = load_signal(&args.input)?;
    let n_max = args.n_max.unwrap_or_else(|| default_n_max(signal.len()));
    let (estimate, sweep) = hokalman_order_with_plateau(&signal, n_max, policy, args.plateau_len)?;
    let mut text = provenance_header(&args.input, &signal, policy);
    sweep.write_csv(string_sink(&mut text))?;
    if cli.verbose > 0 {
        writeln!(stderr, "ranks: {:?}", sweep.ranks())?;
    }
    emit(cli, &text, stdout)?;
    writeln!(stdout, "order={}", estimate.order)?;
    Ok(())
}

fn estimate<T: Real>(
    cli: &Cli,
    args: &EstimateArgs,
    policy: RankPolicy,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> anyhow::Result<()> {
    let signal: Signal<T> = load_signal(&args.input)?;
    let mut text = provenance_header(&args.input, &signal, policy);
    let order = match args.method {
        MethodArg::Hokalman => {
            let n_max = args.n_max.unwrap_or_else(|| default_n_max(signal.len()));
            let (estimate, sweep) =
                hokalman_order_with_plateau(&signal, n_max, policy, args.plateau_len)?;
            sweep.write_csv(string_sink(&mut text))?;
            estimate.order
        }
        MethodArg::Aic => {
            let (estimate, report) = aic_order(&signal, args.p_max)?;
            report.write_csv(string_sink(&mut text))?;
            estimate.order
        }
        MethodArg::Covdet => {
            let (lo, hi) = parse_range(&args.m_range)?;
            let report = covariance_determinants(&signal, lo..=hi)?;
            report.write_csv(string_sink(&mut text))?;
            report.collapse_order(DEFAULT_COLLAPSE_RATIO).order
        }
    };
    if cli.verbose > 0 {
        writeln!(stderr, "method: {:?}, policy: {policy}", args.method)?;
    }
    emit(cli, &text, stdout)?;
    writeln!(stdout, "order={order}")?;
    Ok(())
}

/// Appends CSV output to a `String`.
fn string_sink(text: &mut String) -> StringWriter<'_> {
    StringWriter(text)
}

struct StringWriter<'a>(&'a mut String);

impl Write for StringWriter<'_> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let chunk = std::str::from_utf8(buf)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        self.0.push_str(chunk);
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

fn parse_range(text: &str) -> anyhow::Result<(usize, usize)> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| anyhow!("--m-range expects `lo:hi`, got `{text}`"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .with_context(|| format!("--m-range lower bound `{lo}`"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .with_context(|| format!("--m-range upper bound `{hi}`"))?;
    if lo > hi {
        bail!("--m-range is empty: {lo} > {hi}");
    }
    Ok((lo, hi))
}

/// Turns trailing `--key value`, `--key=value` or `key=value` tokens into
/// `(key, value)` pairs, with dashes in keys read as underscores.
fn parse_overrides(tokens: &[String]) -> anyhow::Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    let mut iter = tokens.iter();
    while let Some(token) = iter.next() {
        let body = token.trim_start_matches('-');
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_owned(), v.to_owned()),
            None if token.starts_with("--") => {
                let value = iter
                    .next()
                    .ok_or_else(|| anyhow!("override `{token}` has no value"))?;
                (body.to_owned(), value.clone())
            }
            None => bail!("cannot read override `{token}`; use --key value or key=value"),
        };
        pairs.push((key.replace('-', "_"), value));
    }
    Ok(pairs)
}

fn experiment(
    cli: &Cli,
    args: &ExperimentArgs,
    policy: Option<RankPolicy>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> anyhow::Result<()> {
    let mut spec = ExperimentSpec::new(&args.name);
    spec.seed = cli.seed;
    let mut out = cli.out.clone();
    let (mut policy_kind, mut tol) = (cli.policy, cli.tol);
    let mut policy_override = None;
    for (key, value) in parse_overrides(&args.overrides)? {
        // global flags written after the experiment name
        match key.as_str() {
            "seed" => spec.seed = Some(value.parse().with_context(|| format!("--seed `{value}`"))?),
            "out" => out = Some(PathBuf::from(value)),
            "policy" => match PolicyKind::from_str(&value, true) {
                Ok(kind) => policy_kind = Some(kind),
                // full policy syntax, e.g. gap:1e3
                Err(_) => policy_override = Some(value),
            },
            "tol" => tol = Some(value.parse().with_context(|| format!("--tol `{value}`"))?),
            _ => spec = spec.with_override(key, value),
        }
    }
    let policy = if policy_kind.is_some() || tol.is_some() {
        let resolved = Cli {
            policy: policy_kind,
            tol,
            ..minimal_cli()
        };
        requested_policy(&resolved)?
    } else {
        policy
    };
    let Some(info) = list_experiments().into_iter().find(|e| e.name == args.name) else {
        // the library error names every registered experiment
        return Err(render_experiment(&spec)
            .err()
            .map_or_else(|| anyhow!("unknown experiment"), Into::into));
    };
    let takes = |key: &str| info.defaults.iter().any(|(k, _)| *k == key);
    if let Some(text) = policy_override {
        spec = spec.with_override("policy", text);
    } else if let Some(policy) = policy {
        if takes("policy") {
            spec = spec.with_override("policy", policy_syntax(policy));
        } else if let (true, RankPolicy::Relative(t)) = (takes("tol"), policy) {
            spec = spec.with_override("tol", format!("{t:e}"));
        } else {
            bail!("experiment `{}` does not take this rank policy", args.name);
        }
    }
    let (text, summary) = render_experiment(&spec)?;
    let path = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", args.name)));
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    if cli.verbose > 0 {
        writeln!(stderr, "wrote {}", path.display())?;
    }
    writeln!(stdout, "{}", summary.line())?;
    Ok(())
}

fn minimal_cli() -> Cli {
    Cli {
        seed: None,
        policy: None,
        tol: None,
        out: None,
        verbose: 0,
        command: Command::List,
    }
}

/// Inverse of `RankPolicy::from_str`.
fn policy_syntax(policy: RankPolicy) -> String {
    match policy {
        RankPolicy::MachineRelative => "default".into(),
        RankPolicy::Relative(t) => format!("relative:{t:e}"),
        RankPolicy::Absolute(t) => format!("absolute:{t:e}"),
        RankPolicy::GapRatio(r) => format!("gap:{r:e}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_forms() {
        let tokens: Vec<String> = ["--p-max", "12", "--count=30", "m_min=3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            parse_overrides(&tokens).unwrap(),
            vec![
                ("p_max".to_string(), "12".to_string()),
                ("count".to_string(), "30".to_string()),
                ("m_min".to_string(), "3".to_string())
            ]
        );
        assert!(parse_overrides(&["--p-max".to_string()]).is_err());
        assert!(parse_overrides(&["bare".to_string()]).is_err());
    }

    #[test]
    fn digit_counting() {
        assert_eq!(significant_digits("3.3333333333333331e-1"), 17);
        assert_eq!(
            significant_digits("-1.237179148263483781091033101075562e-1"),
            34
        );
        assert_eq!(significant_digits("0.00125"), 3);
        assert_eq!(significant_digits("2.0000000000000000e0"), 1);
    }

    #[test]
    fn policy_round_trip() {
        for p in [
            RankPolicy::MachineRelative,
            RankPolicy::Relative(1e-3),
            RankPolicy::Absolute(0.25),
            RankPolicy::GapRatio(100.0),
        ] {
            assert_eq!(policy_syntax(p).parse::<RankPolicy>().unwrap(), p);
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2:8").unwrap(), (2, 8));
        assert!(parse_range("8:2").is_err());
        assert!(parse_range("2-8").is_err());
    }
}
