//! Command-line front end for the weighted-plurality decision library.
//!
//! Subcommands: `check` (decide a truth table and emit a certified report),
//! `effects` (exact or Monte Carlo voter effects), `verify-a` (exact
//! aggregation report for a preferred alternative set), `gen` (write truth
//! tables), and `scaling` (effect-decay experiment CSV).
//!
//! Exit codes are a stable contract:
//!   0  success; for `check`, the function is a weighted plurality
//!   1  internal error
//!   2  unreadable or invalid input
//!   3  the function is not a weighted plurality
//!   4  neutral mode rejected a non-neutral function
//!   5  instance exceeds an enumeration guard
//!   6  the supplied weights fail exact verification
//!   7  an aggregation inequality flag came out false

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use plurality::{
    aggregation_report, build_primal, build_weighted_plurality, canonical_labels, decide,
    decide_with_labels, effect_scaling_experiment, effect_vector, random_neutral_function,
    scaling_csv, Alternative, DecideError, Distribution, EffectMethod, EffectsError, Labels, Mode,
    ScalingFamily, ScfError, SocialChoiceFunction, TieBreakRule, Verdict, WeightVector,
};

const EXIT_INTERNAL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NOT_WP: u8 = 3;
const EXIT_NOT_NEUTRAL: u8 = 4;
const EXIT_TOO_LARGE: u8 = 5;
const EXIT_BAD_WEIGHTS: u8 = 6;
const EXIT_INEQUALITY_FAILED: u8 = 7;

#[derive(Parser)]
#[command(
    name = "plurality",
    version,
    about = "Decide weighted-plurality membership with exact certificates",
    after_help = "Seeds default to $PLURALITY_SEED (then 0); explicit --seed flags win."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a truth table is a weighted plurality and write a
    /// certified decision report.
    Check(CheckArgs),
    /// Compute per-voter effects under a distribution.
    Effects(EffectsArgs),
    /// Verify the aggregation inequalities for a preferred alternative set.
    VerifyA(VerifyAArgs),
    /// Generate a truth table file.
    Gen(GenArgs),
    /// Estimate how voter 1's effect decays with the electorate size.
    Scaling(ScalingArgs),
}

#[derive(clap::Args)]
struct CheckArgs {
    /// Truth-table file (.tt)
    function: PathBuf,
    /// Decision mode: `neutral` uses one label pair (requires a neutral
    /// function); `general` checks all ordered pairs.
    #[arg(long, value_enum, default_value_t = ModeArg::Neutral)]
    mode: ModeArg,
    /// Override the label pair in neutral mode, e.g. `--labels 2,1`.
    #[arg(long, value_parser = parse_labels)]
    labels: Option<Labels>,
    /// Write the decision report JSON here (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Dump the primal decision program as text (neutral mode only).
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Neutral,
    General,
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("method").required(true).args(["exact", "samples"])))]
struct EffectsArgs {
    /// Truth-table file (.tt)
    function: PathBuf,
    /// Distribution JSON file.
    #[arg(long)]
    dist: PathBuf,
    /// Compute exactly in rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Estimate by Monte Carlo with this many samples.
    #[arg(long)]
    samples: Option<u64>,
    /// Seed for the Monte Carlo stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the effect vector JSON here (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(clap::Args)]
struct VerifyAArgs {
    /// Truth-table file (.tt)
    function: PathBuf,
    /// Weights JSON file: an array of rationals summing to 1.
    #[arg(long)]
    weights: PathBuf,
    /// Distribution JSON file.
    #[arg(long)]
    dist: PathBuf,
    /// Preferred alternatives, e.g. `--set 0,2`.
    #[arg(long, value_parser = parse_set)]
    set: AlternativeSet,
    /// Write the aggregation report JSON here (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone)]
struct AlternativeSet(Vec<Alternative>);

#[derive(clap::Args)]
struct GenArgs {
    /// What to generate.
    #[arg(long, value_enum)]
    rule: RuleArg,
    #[arg(short)]
    k: u32,
    #[arg(short)]
    n: usize,
    /// Weights JSON file (weighted-plurality rule).
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Tie-break: `first-match` or `fixed:A` (weighted-plurality rule).
    #[arg(long, default_value = "first-match", value_parser = parse_tie_break)]
    tiebreak: TieBreakRule,
    /// Seed (random-neutral rule).
    #[arg(long)]
    seed: Option<u64>,
    /// Output truth-table path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleArg {
    WeightedPlurality,
    RandomNeutral,
}

#[derive(clap::Args)]
struct ScalingArgs {
    #[arg(short, default_value_t = 3)]
    k: u32,
    /// Vote family: `uniform` or `biased:DELTA`.
    #[arg(long, value_parser = parse_family)]
    family: ScalingFamily,
    /// Electorate sizes, e.g. `--sizes 9,81`.
    #[arg(long, value_parser = parse_sizes)]
    sizes: Sizes,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the CSV here (default: stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone)]
struct Sizes(Vec<usize>);

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() {
    let cli = Cli::parse();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    };
    std::process::exit(code as i32);
}

fn run(command: Command) -> CliResult<u8> {
    match command {
        Command::Check(args) => run_check(args),
        Command::Effects(args) => run_effects(args),
        Command::VerifyA(args) => run_verify_a(args),
        Command::Gen(args) => run_gen(args),
        Command::Scaling(args) => run_scaling(args),
    }
}

fn run_check(args: CheckArgs) -> CliResult<u8> {
    let f = load_function(&args.function)?;
    if args.mode == ModeArg::General && args.labels.is_some() {
        return Err(Failure::new(
            EXIT_INPUT,
            "--labels only applies to neutral mode; the general program ranges over all pairs",
        ));
    }
    if let Some(path) = &args.dump_lp {
        if args.mode == ModeArg::General {
            return Err(Failure::new(
                EXIT_INPUT,
                "--dump-lp only applies to neutral mode",
            ));
        }
        let labels = args.labels.unwrap_or_else(|| canonical_labels(f.k()));
        let primal = build_primal(&f, labels).map_err(map_decide)?;
        fs::write(path, primal.lp.format_text()).map_err(|e| {
            Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display()))
        })?;
    }
    let outcome = match (args.mode, args.labels) {
        (ModeArg::Neutral, Some(labels)) => decide_with_labels(&f, labels),
        (ModeArg::Neutral, None) => decide(&f, Mode::Neutral),
        (ModeArg::General, _) => decide(&f, Mode::General),
    }
    .map_err(map_decide)?;

    let (summary, code) = match outcome.verdict {
        Verdict::IsWeightedPlurality => (
            format!("weighted plurality (optimum {})", outcome.optimum),
            0,
        ),
        Verdict::NotWeightedPlurality => (
            format!(
                "not a weighted plurality (optimum {}); witness on {} profiles",
                outcome.optimum,
                outcome.witness.as_ref().map_or(0, |w| w.support_len())
            ),
            EXIT_NOT_WP,
        ),
    };
    emit_json(&outcome, args.output.as_deref(), &summary)?;
    Ok(code)
}

fn run_effects(args: EffectsArgs) -> CliResult<u8> {
    let f = load_function(&args.function)?;
    let dist = load_distribution(&args.dist)?;
    let method = if args.exact {
        EffectMethod::Exact
    } else {
        let samples = args.samples.expect("clap enforces the method group");
        if samples == 0 {
            return Err(Failure::new(EXIT_INPUT, "--samples must be positive"));
        }
        EffectMethod::MonteCarlo {
            samples,
            seed: resolve_seed(args.seed),
        }
    };
    let effects = effect_vector(&f, &dist, method).map_err(map_effects)?;
    emit_json(
        &effects,
        args.output.as_deref(),
        &format!("effects computed for {} voters", effects.values.len()),
    )?;
    Ok(0)
}

fn run_verify_a(args: VerifyAArgs) -> CliResult<u8> {
    let f = load_function(&args.function)?;
    let weights = load_weights(&args.weights)?;
    let dist = load_distribution(&args.dist)?;
    let report = aggregation_report(&f, &weights, &dist, &args.set.0).map_err(map_effects)?;
    let holds =
        report.delta_chain_holds.unwrap_or(true) && report.effect_chain_holds.unwrap_or(true);
    let summary = if report.delta.is_positive() {
        format!(
            "gap {} realized; inequalities {}",
            report.delta,
            if holds { "hold" } else { "FAILED" }
        )
    } else {
        format!(
            "gap {} is not positive; inequalities are vacuous",
            report.delta
        )
    };
    emit_json(&report, args.output.as_deref(), &summary)?;
    Ok(if holds { 0 } else { EXIT_INEQUALITY_FAILED })
}

fn run_gen(args: GenArgs) -> CliResult<u8> {
    let f = match args.rule {
        RuleArg::WeightedPlurality => {
            let path = args.weights.as_ref().ok_or_else(|| {
                Failure::new(EXIT_INPUT, "--rule weighted-plurality requires --weights")
            })?;
            let weights = load_weights(path)?;
            build_weighted_plurality(args.k, args.n, &weights, args.tiebreak).map_err(map_scf)?
        }
        RuleArg::RandomNeutral => {
            random_neutral_function(args.k, args.n, resolve_seed(args.seed)).map_err(map_scf)?
        }
    };
    fs::write(&args.output, f.to_tt_string()).map_err(|e| {
        Failure::new(
            EXIT_INPUT,
            format!("cannot write {}: {e}", args.output.display()),
        )
    })?;
    println!(
        "wrote {} (k={}, n={}, {} entries)",
        args.output.display(),
        f.k(),
        f.n(),
        f.table_len()
    );
    Ok(0)
}

fn run_scaling(args: ScalingArgs) -> CliResult<u8> {
    if args.samples == 0 {
        return Err(Failure::new(EXIT_INPUT, "--samples must be positive"));
    }
    if args.k < 2 {
        return Err(Failure::new(EXIT_INPUT, "need at least two alternatives"));
    }
    let points = effect_scaling_experiment(
        args.k,
        &args.family,
        &args.sizes.0,
        args.samples,
        resolve_seed(args.seed),
    );
    let csv = scaling_csv(&points);
    match &args.output {
        Some(path) => {
            fs::write(path, &csv).map_err(|e| {
                Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display()))
            })?;
            println!("wrote {} ({} points)", path.display(), points.len());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

// --- input loading and error mapping ---------------------------------------

fn load_function(path: &Path) -> CliResult<SocialChoiceFunction> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    SocialChoiceFunction::from_tt_str(&text).map_err(map_scf)
}

fn load_distribution(path: &Path) -> CliResult<Distribution> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("invalid distribution JSON: {e}")))
}

fn load_weights(path: &Path) -> CliResult<WeightVector> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("invalid weights JSON: {e}")))
}

fn map_scf(e: ScfError) -> Failure {
    match e {
        ScfError::TooLarge(_) => Failure::new(EXIT_TOO_LARGE, e),
        _ => Failure::new(EXIT_INPUT, e),
    }
}

fn map_decide(e: DecideError) -> Failure {
    match e {
        DecideError::NotNeutral {
            ref permutation,
            ref profile,
        } => Failure::new(
            EXIT_NOT_NEUTRAL,
            format!(
                "not neutral: relabeling {permutation} and profile {profile} witness the \
                 violation; rerun with --mode general"
            ),
        ),
        DecideError::Scf(inner) => map_scf(inner),
        DecideError::Dist(_)
        | DecideError::InvalidLabels(_)
        | DecideError::DegenerateFunction { .. } => Failure::new(EXIT_INPUT, e),
        DecideError::SolverInconsistency(_)
        | DecideError::NoSinglePairWitness
        | DecideError::Lp(_) => Failure::new(EXIT_INTERNAL, e),
    }
}

fn map_effects(e: EffectsError) -> Failure {
    match e {
        EffectsError::TooLarge(_) => Failure::new(
            EXIT_TOO_LARGE,
            format!("{e}; use --samples N for a Monte Carlo estimate"),
        ),
        EffectsError::NotAWeightedPlurality => Failure::new(EXIT_BAD_WEIGHTS, e),
        EffectsError::Scf(inner) => map_scf(inner),
        _ => Failure::new(EXIT_INPUT, e),
    }
}

fn emit_json<T: serde::Serialize>(
    value: &T,
    output: Option<&Path>,
    summary: &str,
) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::new(EXIT_INTERNAL, format!("cannot serialize report: {e}")))?;
    text.push('\n');
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| {
                Failure::new(EXIT_INPUT, format!("cannot write {}: {e}", path.display()))
            })?;
            println!("{summary}");
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("PLURALITY_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

// --- flag parsers -----------------------------------------------------------

fn parse_labels(text: &str) -> Result<Labels, String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| "expected two alternatives, e.g. 1,2".to_owned())?;
    let a: u32 = a
        .trim()
        .parse()
        .map_err(|e| format!("bad label {a:?}: {e}"))?;
    let b: u32 = b
        .trim()
        .parse()
        .map_err(|e| format!("bad label {b:?}: {e}"))?;
    Ok(Labels::new(Alternative(a), Alternative(b)))
}

fn parse_set(text: &str) -> Result<AlternativeSet, String> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map(Alternative)
                .map_err(|e| format!("bad alternative {t:?}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err("the set must be nonempty".to_owned());
    }
    Ok(AlternativeSet(values))
}

fn parse_sizes(text: &str) -> Result<Sizes, String> {
    let values = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad size {t:?}: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() || values.contains(&0) {
        return Err("sizes must be positive".to_owned());
    }
    Ok(Sizes(values))
}

fn parse_tie_break(text: &str) -> Result<TieBreakRule, String> {
    if text == "first-match" {
        return Ok(TieBreakRule::FirstMatchingVoter);
    }
    if let Some(rest) = text.strip_prefix("fixed:") {
        let a: u32 = rest
            .parse()
            .map_err(|e| format!("bad fixed winner {rest:?}: {e}"))?;
        return Ok(TieBreakRule::FixedWinner(Alternative(a)));
    }
    Err(format!(
        "unknown tie-break {text:?}; use first-match or fixed:A"
    ))
}

fn parse_family(text: &str) -> Result<ScalingFamily, String> {
    if text == "uniform" {
        return Ok(ScalingFamily::Uniform);
    }
    if let Some(rest) = text.strip_prefix("biased:") {
        let delta: f64 = rest.parse().map_err(|e| format!("bad bias {rest:?}: {e}"))?;
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(format!("bias must lie in (0, 1], got {delta}"));
        }
        return Ok(ScalingFamily::Biased { delta });
    }
    Err(format!(
        "unknown family {text:?}; use uniform or biased:DELTA"
    ))
}
