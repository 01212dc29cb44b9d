//! `gmd` — command-line frontend for the threshold solvers, the error
//! probability evaluators and the Monte Carlo simulator.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 solver regime
//! error (no root / closed form out of regime), 4 exact enumeration too
//! large.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gmd_thresholds::{
    error_prob, gauss, multi_threshold, sim, single_threshold, Channel, CodeShape, Error,
    ThresholdSet,
};

#[derive(Parser)]
#[command(
    name = "gmd",
    about = "Erasure-threshold design and error-rate evaluation for \
             errors-and-erasures BMD decoding over BPSK/AWGN",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Channel selection: exactly one of `--sigma` or `--snr`.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct NoiseArgs {
    /// AWGN standard deviation (linear scale).
    #[arg(long)]
    sigma: Option<f64>,
    /// SNR in dB; sigma = sqrt(0.5 * 10^(-snr/10)).
    #[arg(long, allow_negative_numbers = true)]
    snr: Option<f64>,
}

impl NoiseArgs {
    fn channel(&self) -> Result<Channel, CliError> {
        match (self.sigma, self.snr) {
            (Some(s), None) => Ok(Channel::new(s)?),
            (None, Some(db)) => Ok(Channel::from_snr_db(db)?),
            _ => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Significant digits for numeric output.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=17))]
    digits: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the optimal high-SNR threshold set (z thresholds).
    Thresholds {
        #[command(flatten)]
        noise: NoiseArgs,
        /// Number of thresholds / decoding trials.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        z: u32,
        /// Evaluate the single-threshold closed-form approximation instead
        /// of solving the balance equation (requires --z 1).
        #[arg(long)]
        analytic: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Tabulate the single-threshold goal function as CSV, one column per
    /// threshold, one row per erasure count.
    Goal {
        #[command(flatten)]
        noise: NoiseArgs,
        /// Minimum distance of the outer code.
        #[arg(long)]
        d: u32,
        /// Thresholds, comma separated; each makes one CSV column.
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact and max-form error probabilities for a threshold set.
    Prob {
        #[command(flatten)]
        noise: NoiseArgs,
        /// Block length of the outer code.
        #[arg(long)]
        n: u32,
        /// Minimum distance of the outer code.
        #[arg(long)]
        d: u32,
        /// Strictly increasing thresholds, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sweep SNR and emit the three threshold curves as CSV: balance
    /// equation, closed form, and exact-probability minimizer.
    Sweep {
        /// Sweep start, dB.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        from: f64,
        /// Sweep end, dB (inclusive).
        #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
        to: f64,
        /// Step, dB.
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        /// Block length for the exact-probability minimizer.
        #[arg(long, default_value_t = 127)]
        n: u32,
        /// Minimum distance for the exact-probability minimizer.
        #[arg(long, default_value_t = 63)]
        d: u32,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Monte Carlo estimate of the block error probability.
    Simulate {
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
        /// Number of simulated transmissions.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Seed of the counter-based generator; same seed, same result.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (defaults to the available parallelism). The
        /// estimate does not depend on this.
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Asymptotic gain of optimally-thresholded error/erasure decoding
    /// over errors-only decoding.
    Gain {
        /// Also verify the defining tail identity at this errors-only
        /// noise level.
        #[arg(long)]
        verify_sigma2: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// CLI-level error with its process exit code.
struct CliError {
    message: String,
    code: u8,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoRoot(_) | Error::OutOfRegime(_) => 3,
            Error::TooLarge { .. } => 4,
            _ => 2,
        };
        let mut message = e.to_string();
        if code == 4 {
            message.push_str("; try `gmd simulate`");
        }
        CliError { message, code }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            message: format!("i/o error: {e}"),
            code: 2,
        }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        code: 2,
    }
}

/// `digits` significant digits in scientific notation; parses back exactly
/// (round-trip) at 17 digits.
fn fmt_sig(x: f64, digits: u32) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:.*e}", digits as usize - 1, x)
}

fn writer(out: &OutputArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &out.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError {
                message: format!("cannot create {}: {e}", path.display()),
                code: 2,
            })?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_thresholds(
    noise: &NoiseArgs,
    z: u32,
    analytic: bool,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let ch = noise.channel()?;
    let digits = out.digits;
    let mut w = writer(out)?;
    writeln!(w, "sigma = {}", fmt_sig(ch.sigma(), digits))?;
    writeln!(w, "snr_db = {}", fmt_sig(ch.snr_db(), digits))?;
    writeln!(w, "z = {z}")?;
    if analytic {
        if z != 1 {
            return Err(usage(
                "--analytic applies to the single-threshold case (--z 1)",
            ));
        }
        let t = single_threshold::analytic(&ch)?;
        writeln!(w, "T_analytic = {}", fmt_sig(t, digits))?;
        return Ok(());
    }
    let ts = multi_threshold::solve(&ch, z)?;
    for (i, t) in ts.as_slice().iter().enumerate() {
        writeln!(w, "T_{} = {}", i + 1, fmt_sig(*t, digits))?;
    }
    for (i, r) in multi_threshold::residuals(&ch, &ts).iter().enumerate() {
        writeln!(w, "residual_{} = {}", i + 1, fmt_sig(*r, digits))?;
    }
    Ok(())
}

fn cmd_goal(
    noise: &NoiseArgs,
    d: u32,
    thresholds: &[f64],
    out: &OutputArgs,
) -> Result<(), CliError> {
    let ch = noise.channel()?;
    if thresholds.is_empty() {
        return Err(usage("need at least one threshold"));
    }
    let columns: Vec<Vec<single_threshold::GoalPoint>> = thresholds
        .iter()
        .map(|&t| single_threshold::goal_points(&ch, d, t))
        .collect::<Result<_, _>>()?;
    let mut w = writer(out)?;
    let header: Vec<String> = thresholds.iter().map(|t| format!("{t}")).collect();
    writeln!(w, "tau,{}", header.join(","))?;
    for tau in 0..=d as usize {
        let row: Vec<String> = columns
            .iter()
            .map(|col| fmt_sig(col[tau].value, out.digits))
            .collect();
        writeln!(w, "{},{}", tau, row.join(","))?;
    }
    Ok(())
}

fn cmd_prob(
    noise: &NoiseArgs,
    n: u32,
    d: u32,
    thresholds: &[f64],
    out: &OutputArgs,
) -> Result<(), CliError> {
    let ch = noise.channel()?;
    let code = CodeShape::new(n, d)?;
    let ts = ThresholdSet::new(thresholds.to_vec())?;
    // Evaluate before opening the writer so a guard failure leaves no file.
    let exact = error_prob::exact_multi(&code, &ch, &ts)?;
    let exact_neg_log = error_prob::exact_neg_log_multi(&code, &ch, &ts)?;
    let digits = out.digits;
    let mut w = writer(out)?;
    writeln!(w, "n = {n}")?;
    writeln!(w, "d = {d}")?;
    writeln!(w, "sigma = {}", fmt_sig(ch.sigma(), digits))?;
    let list: Vec<String> = thresholds.iter().map(|t| format!("{t}")).collect();
    writeln!(w, "thresholds = {}", list.join(","))?;
    writeln!(w, "exact_prob = {}", fmt_sig(exact, digits))?;
    writeln!(w, "exact_neg_log = {}", fmt_sig(exact_neg_log, digits))?;
    writeln!(
        w,
        "approx_prob = {}",
        fmt_sig(error_prob::approx_multi(&code, &ch, &ts), digits)
    )?;
    writeln!(
        w,
        "approx_neg_log = {}",
        fmt_sig(error_prob::approx_neg_log_multi(&code, &ch, &ts), digits)
    )?;
    let terms = error_prob::approx_neg_log_terms(&code, &ch, &ts);
    writeln!(w, "max_form_term_left = {}", fmt_sig(terms[0], digits))?;
    writeln!(w, "max_form_term_center = {}", fmt_sig(terms[1], digits))?;
    for (i, t) in terms[2..].iter().enumerate() {
        writeln!(w, "max_form_term_pair_{} = {}", i + 1, fmt_sig(*t, digits))?;
    }
    Ok(())
}

fn cmd_sweep(
    from: f64,
    to: f64,
    step: f64,
    n: u32,
    d: u32,
    out: &OutputArgs,
) -> Result<(), CliError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(usage(format!("step must be positive, got {step}")));
    }
    if !(from.is_finite() && to.is_finite() && from <= to) {
        return Err(usage(format!("bad sweep range [{from}, {to}]")));
    }
    let code = CodeShape::new(n, d)?;
    let digits = out.digits;
    let mut w = writer(out)?;
    writeln!(w, "snr_db,sigma,T_numeric,T_analytic,T_general")?;
    let points = ((to - from) / step + 1e-9).floor() as u64 + 1;
    for k in 0..points {
        let snr = from + k as f64 * step;
        let ch = Channel::from_snr_db(snr)?;
        let t_numeric = single_threshold::solve_high_snr(&ch)
            .map(|t| fmt_sig(t, digits))
            .unwrap_or_default();
        let t_analytic = single_threshold::analytic(&ch)
            .map(|t| fmt_sig(t, digits))
            .unwrap_or_default();
        let t_general = error_prob::optimize_threshold(&code, &ch).threshold;
        writeln!(
            w,
            "{snr},{},{t_numeric},{t_analytic},{}",
            fmt_sig(ch.sigma(), digits),
            fmt_sig(t_general, digits)
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    noise: &NoiseArgs,
    n: u32,
    d: u32,
    thresholds: &[f64],
    trials: u64,
    seed: u64,
    threads: Option<usize>,
    out: &OutputArgs,
) -> Result<(), CliError> {
    let ch = noise.channel()?;
    let code = CodeShape::new(n, d)?;
    let ts = ThresholdSet::new(thresholds.to_vec())?;
    if threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let est = match threads {
        Some(t) => sim::monte_carlo_with_threads(&code, &ch, &ts, trials, seed, t),
        None => sim::monte_carlo(&code, &ch, &ts, trials, seed),
    };
    let digits = out.digits;
    let mut w = writer(out)?;
    writeln!(w, "n = {n}")?;
    writeln!(w, "d = {d}")?;
    writeln!(w, "sigma = {}", fmt_sig(ch.sigma(), digits))?;
    let list: Vec<String> = thresholds.iter().map(|t| format!("{t}")).collect();
    writeln!(w, "thresholds = {}", list.join(","))?;
    writeln!(w, "trials = {trials}")?;
    writeln!(w, "seed = {seed}")?;
    writeln!(w, "error_events = {}", est.error_events)?;
    writeln!(w, "p_hat = {}", fmt_sig(est.p_hat, digits))?;
    writeln!(w, "std_err = {}", fmt_sig(est.std_err, digits))?;
    let lo = (est.p_hat - 1.96 * est.std_err).max(0.0);
    let hi = (est.p_hat + 1.96 * est.std_err).min(1.0);
    writeln!(w, "ci95_lo = {}", fmt_sig(lo, digits))?;
    writeln!(w, "ci95_hi = {}", fmt_sig(hi, digits))?;
    Ok(())
}

fn cmd_gain(verify_sigma2: Option<f64>, out: &OutputArgs) -> Result<(), CliError> {
    let digits = out.digits;
    let mut w = writer(out)?;
    writeln!(
        w,
        "gain_db = {}",
        fmt_sig(single_threshold::asymptotic_gain_db(), digits)
    )?;
    writeln!(
        w,
        "noise_scale_factor = {}",
        fmt_sig(single_threshold::asymptotic_gain_factor(), digits)
    )?;
    if let Some(sigma2) = verify_sigma2 {
        let ch2 = Channel::new(sigma2)?;
        let sigma1 = single_threshold::asymptotic_gain_factor() * sigma2;
        let ch1 = Channel::new(sigma1)?;
        let limit = 3.0 - 2.0 * std::f64::consts::SQRT_2;
        // Tail below the limiting threshold at sigma1 vs tail below zero at
        // sigma2: equal by construction of the gain factor.
        let lhs = gauss::neg_log_prob(&ch1, gauss::Interval::left_of(-limit));
        let rhs = gauss::neg_log_prob(&ch2, gauss::Interval::left_of(0.0));
        writeln!(w, "verify_sigma2 = {}", fmt_sig(sigma2, digits))?;
        writeln!(w, "verify_sigma1 = {}", fmt_sig(sigma1, digits))?;
        writeln!(w, "tail_neg_log_sigma1 = {}", fmt_sig(lhs, digits))?;
        writeln!(w, "tail_neg_log_sigma2 = {}", fmt_sig(rhs, digits))?;
        writeln!(
            w,
            "rel_diff = {}",
            fmt_sig((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE), digits)
        )?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Thresholds {
            noise,
            z,
            analytic,
            out,
        } => cmd_thresholds(noise, *z, *analytic, out),
        Command::Goal {
            noise,
            d,
            thresholds,
            out,
        } => cmd_goal(noise, *d, thresholds, out),
        Command::Prob {
            noise,
            n,
            d,
            thresholds,
            out,
        } => cmd_prob(noise, *n, *d, thresholds, out),
        Command::Sweep {
            from,
            to,
            step,
            n,
            d,
            out,
        } => cmd_sweep(*from, *to, *step, *n, *d, out),
        Command::Simulate {
            noise,
            n,
            d,
            thresholds,
            trials,
            seed,
            threads,
            out,
        } => cmd_simulate(noise, *n, *d, thresholds, *trials, *seed, *threads, out),
        Command::Gain { verify_sigma2, out } => cmd_gain(*verify_sigma2, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
