//! Request model and execution: translate parsed flags into workbench
//! calls, write the artifacts, and surface precondition violations as
//! diagnostics.
//!
//! Precedence everywhere: command-line flags beat the config file, which
//! beats preset defaults. The seed flag falls back to `TRACELAB_SEED`
//! before the config value. Flags that change the error budgets, the
//! population, or the scheme rebuild the accusation boundary from those
//! values; the remaining flags patch the configuration in place.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use tracelab_core::accusation::{
    per_user_epsilons, tardos_boundary, truncation_only_boundary, wald_thresholds, SchemeKind,
    ThresholdVariant,
};
use tracelab_core::analysis::{
    asymptotic_code_length, expected_termination, interleaving_drift_integrals,
};
use tracelab_core::channel::{AttackKind, CollusionChannel};
use tracelab_core::scoring::segment_moments_averaged;
use tracelab_core::sim::{
    preset, run_experiment, write_trials_csv, ExperimentConfig, PresetName, ALL_PRESETS,
};
use tracelab_core::BiasDistribution;

#[derive(Parser)]
#[command(
    name = "tracelab",
    about = "Sequential fingerprinting workbench: simulate pirate tracing runs, \
             derive accusation thresholds, and print closed-form predictions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run a Monte Carlo experiment and write per-trial CSV plus an
    /// aggregate JSON summary on stdout.
    Simulate(SimulateArgs),
    /// Print the accusation boundary for given error budgets.
    Thresholds(ThresholdArgs),
    /// Print drifts, thresholds, and predicted run lengths as JSON.
    Analyze(AnalyzeArgs),
    /// List the built-in experiment presets with their full configurations.
    Presets,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Start from a named preset (see `tracelab presets`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Start from an experiment configuration JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Real coalition size.
    #[arg(long)]
    pub c: Option<usize>,
    /// Coalition size the decoder assumes.
    #[arg(long)]
    pub c0: Option<usize>,
    /// Global false-accusation budget; rebuilds the boundary.
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Global missed-detection budget; rebuilds the boundary.
    #[arg(long)]
    pub eps2: Option<f64>,
    /// Collusion attack: interleaving, all_one, majority, minority, coin.
    #[arg(long)]
    pub attack: Option<String>,
    /// Score function: symmetric, interleaving_ll, all_one, generic_np.
    #[arg(long)]
    pub decoder: Option<String>,
    /// Accusation scheme: non_adaptive, sequential_tardos, wald_sprt,
    /// truncated_sprt; rebuilds the boundary.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Threshold variant: aggressive, conservative, upper_only; rebuilds
    /// the boundary.
    #[arg(long)]
    pub variant: Option<String>,
    /// Disconnection delay in segments.
    #[arg(long = "delay-B")]
    pub delay_b: Option<u64>,
    /// Skip tainted segments while a disconnection is pending.
    #[arg(long)]
    pub taint: Option<bool>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed; falls back to TRACELAB_SEED, then the config value.
    #[arg(long, env = "TRACELAB_SEED")]
    pub seed: Option<u64>,
    /// Worker threads: 1 = serial, 0 = default pool.
    #[arg(long, default_value_t = 0)]
    pub parallelism: usize,
    /// Per-trial CSV output path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long = "max-segments")]
    pub max_segments: Option<u64>,
}

#[derive(Args)]
pub struct ThresholdArgs {
    /// Global false-accusation budget.
    #[arg(long)]
    pub eps1: f64,
    /// Global missed-detection budget.
    #[arg(long, default_value_t = 0.0)]
    pub eps2: f64,
    /// Users to split eps1 across (1 = already per-user).
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Colluders to split eps2 across (1 = already per-user).
    #[arg(long, default_value_t = 1)]
    pub c: usize,
    /// aggressive, conservative, or upper_only.
    #[arg(long, default_value = "upper_only")]
    pub variant: String,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Coalition size.
    #[arg(long)]
    pub c: usize,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub eps1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps2: f64,
    /// Attack whose matched decoder is analyzed.
    #[arg(long, default_value = "interleaving")]
    pub attack: String,
}

/// Canonical spelling: the core names use underscores, the command line
/// traditionally uses hyphens; accept both.
fn normalize(name: &str) -> String {
    name.replace('-', "_")
}

/// Print a line to stdout, treating a closed pipe as a normal end of
/// output rather than an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Thresholds(args) => thresholds(args),
        Command::Analyze(args) => analyze(args),
        Command::Presets => presets(),
    }
}

/// Boundary rebuild policy for flag overrides. Horizontal schemes take
/// per-user budgets; sloped and truncated schemes anchor the final
/// threshold at ln(1/eps1) and end at the segment cap. The sloped boundary
/// uses the interleaving design slope; other slopes require a config file.
fn rebuild_boundary(config: &mut ExperimentConfig, variant: Option<ThresholdVariant>) -> Result<()> {
    let scheme = config.scheme.scheme;
    let boundary = match scheme {
        SchemeKind::WaldSprt | SchemeKind::TruncatedSprt => {
            let (e1, e2) = if config.epsilons_are_per_user {
                (config.eps1, config.eps2)
            } else {
                per_user_epsilons(config.eps1, config.eps2, config.n, config.c)?
            };
            let variant = variant.unwrap_or(if e2 == 0.0 {
                ThresholdVariant::UpperOnly
            } else {
                ThresholdVariant::Aggressive
            });
            let mut b = wald_thresholds(e1, e2, variant)?;
            if scheme == SchemeKind::TruncatedSprt {
                let eta = b.upper.as_ref().expect("wald boundary has an upper part").intercept;
                b.truncation =
                    Some(truncation_only_boundary(config.max_segments, eta)?.truncation.unwrap());
            }
            b
        }
        SchemeKind::SequentialTardos => {
            let eta_final = (1.0 / config.eps1).ln();
            let slope = interleaving_drift_integrals(config.c)?.mu0;
            tardos_boundary(config.max_segments, eta_final, slope)?
        }
        SchemeKind::NonAdaptive => {
            truncation_only_boundary(config.max_segments, (1.0 / config.eps1).ln())?
        }
    };
    config.scheme.boundary = boundary;
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config: ExperimentConfig = match (&args.preset, &args.config) {
        (Some(name), None) => {
            let name: PresetName = normalize(name).parse()?;
            preset(name)?
        }
        (None, Some(path)) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            serde_json::from_reader(BufReader::new(file))
                .with_context(|| format!("parsing {}", path.display()))?
        }
        (Some(_), Some(_)) => bail!("--preset and --config are mutually exclusive"),
        (None, None) => bail!("one of --preset or --config is required"),
    };

    // patch plain fields first
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(c) = args.c {
        config.c = c;
    }
    if let Some(c0) = args.c0 {
        config.c0 = c0;
    }
    if let Some(attack) = &args.attack {
        config.attack = normalize(attack).parse()?;
    }
    if let Some(decoder) = &args.decoder {
        config.decoder = normalize(decoder).parse()?;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(max_segments) = args.max_segments {
        config.max_segments = max_segments;
    }
    if let Some(b) = args.delay_b {
        config.delay_b = b;
        config.scheme.delay.b = b;
    }
    if let Some(taint) = args.taint {
        config.scheme.tainting = taint;
    }

    // budget or scheme changes invalidate the stored boundary
    let mut rebuild = false;
    if let Some(eps1) = args.eps1 {
        config.eps1 = eps1;
        config.epsilons_are_per_user = false;
        rebuild = true;
    }
    if let Some(eps2) = args.eps2 {
        config.eps2 = eps2;
        config.epsilons_are_per_user = false;
        rebuild = true;
    }
    if let Some(scheme) = &args.scheme {
        config.scheme.scheme = normalize(scheme).parse()?;
        rebuild = true;
    }
    rebuild |= args.n.is_some() || args.c.is_some();
    let variant = args
        .variant
        .as_deref()
        .map(|v| normalize(v).parse::<ThresholdVariant>())
        .transpose()?;
    if variant.is_some() {
        rebuild = true;
    }
    if rebuild {
        rebuild_boundary(&mut config, variant)?;
    }

    config.validate()?;
    let (stats, results) = run_experiment(&config, args.parallelism)?;

    let file = File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let mut writer = BufWriter::new(file);
    write_trials_csv(&mut writer, &results)?;
    emit(&serde_json::to_string_pretty(&stats)?)?;
    Ok(())
}

#[derive(Serialize)]
struct ThresholdReport {
    eps1_per_user: f64,
    eps2_per_user: f64,
    eta0: Option<f64>,
    eta1: f64,
}

fn thresholds(args: ThresholdArgs) -> Result<()> {
    let variant: ThresholdVariant = normalize(&args.variant).parse()?;
    let (e1, e2) = per_user_epsilons(args.eps1, args.eps2, args.n, args.c)?;
    let boundary = wald_thresholds(e1, e2, variant)?;
    let report = ThresholdReport {
        eps1_per_user: e1,
        eps2_per_user: e2,
        eta0: boundary.lower.map(|b| b.intercept),
        eta1: boundary.upper.expect("wald boundary has an upper part").intercept,
    };
    emit(&serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

#[derive(Serialize)]
struct AnalyzeReport {
    c: usize,
    n: usize,
    eps1: f64,
    eps2: f64,
    attack: String,
    mu0: f64,
    mu1: f64,
    /// Closed-form drift integral; only the interleaving pairing has one.
    #[serde(rename = "I")]
    i: Option<f64>,
    eta1: f64,
    #[serde(rename = "predicted_T_h1")]
    predicted_t_h1: f64,
    asymptotic_length: f64,
}

/// Drifts of the attack's matched decoder at its design operating point:
/// the interleaving pairing integrates over the arcsine bias in closed
/// form; every other attack is evaluated through the generic
/// likelihood-ratio decoder (all_one at its fixed design bias, the rest
/// under the arcsine distribution).
fn matched_drifts(attack: AttackKind, c: usize) -> Result<(f64, f64, Option<f64>)> {
    if attack == AttackKind::Interleaving {
        let d = interleaving_drift_integrals(c)?;
        return Ok((d.mu0, d.mu1, Some(d.i_value)));
    }
    let channel = CollusionChannel::make_attack(attack, c)?;
    let score = tracelab_core::scoring::ScoreFunction::GenericNp { channel: channel.clone() };
    let dist = if attack == AttackKind::AllOne {
        BiasDistribution::Fixed { p: std::f64::consts::LN_2 / c as f64 }
    } else {
        BiasDistribution::Arcsine
    };
    let moments = segment_moments_averaged(&score, &channel, &dist, 1e-9)?;
    Ok((moments.mu0, moments.mu1, None))
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let attack: AttackKind = normalize(&args.attack).parse()?;
    let (e1, e2) = per_user_epsilons(args.eps1, args.eps2, args.n, args.c)?;
    let (mu0, mu1, i) = matched_drifts(attack, args.c)?;
    let eta1 = (1.0 / e1).ln();
    // Decoders with certain-innocence cells clear innocents by structural
    // zeros, leaving a positive drift among the still-plausible paths; the
    // guilty-side prediction is then the plain crossing time eta1 / mu1.
    let predicted_t_h1 = if mu0 < 0.0 {
        expected_termination(e1, e2, mu0, mu1)?
            .expected_t_h1
            .expect("eps1 > 0 always yields a guilty-side prediction")
    } else {
        eta1 / mu1
    };
    let report = AnalyzeReport {
        c: args.c,
        n: args.n,
        eps1: args.eps1,
        eps2: args.eps2,
        attack: attack.name().to_string(),
        mu0,
        mu1,
        i,
        eta1,
        predicted_t_h1,
        asymptotic_length: asymptotic_code_length(args.c, args.n)?,
    };
    emit(&serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

#[derive(Serialize)]
struct PresetEntry {
    name: &'static str,
    config: ExperimentConfig,
}

fn presets() -> Result<()> {
    let entries: Vec<PresetEntry> = ALL_PRESETS
        .iter()
        .map(|&p| Ok(PresetEntry { name: p.name(), config: preset(p)? }))
        .collect::<Result<_>>()?;
    emit(&serde_json::to_string_pretty(&entries)?)?;
    Ok(())
}
