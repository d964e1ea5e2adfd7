use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use perfcal::algomodel::{predict, ModelOptions, Prediction};
use perfcal::oracle::trace;
use perfcal::profile::DEFAULT_DEGREE;
use perfcal::rank::{best_variant, rank, LayerChoice, SweepSpec};
use perfcal::{gen_synthetic_profile, Algorithm, Error, MachineProfile, Scenario, SyntheticParams, Variant};

mod report;

#[derive(Parser)]
#[command(name = "perfcal", version, about = "Performance predictions for 2D and 2.5D dense linear algebra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict one scenario.
    Predict(PredictArgs),
    /// Rank the four variants over an (n, p) sweep.
    Rank(RankArgs),
    /// Extend calib_max to larger process counts by polynomial regression.
    Extrapolate(ExtrapolateArgs),
    /// Dump the step-by-step schedule of one scenario as CSV.
    Trace(TraceArgs),
    /// Write the synthetic profile.
    GenProfile(GenProfileArgs),
    /// Check a profile file.
    ValidateProfile(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct ModelFlags {
    /// Size the last reduce-scatter step by the thread count.
    #[arg(long)]
    final_step_threads: bool,
    /// Broadcast U over sqrt(p) processes in the non-overlapped 2.5D TRSM loop.
    #[arg(long)]
    full_grid_u: bool,
}

impl ModelFlags {
    fn options(&self) -> ModelOptions {
        ModelOptions {
            final_step_uses_threads: self.final_step_threads,
            trsm25d_full_grid_u_bcast: self.full_grid_u,
        }
    }
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    algo: Algorithm,
    #[arg(long)]
    variant: Variant,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    p: u64,
    /// Layer count, or `auto` for the fastest valid one. Defaults to 1 for
    /// 2D variants and `auto` for 2.5D.
    #[arg(long)]
    c: Option<String>,
    #[arg(long, default_value_t = 1)]
    r: u64,
    #[arg(long, default_value_t = 6)]
    t: u32,
    #[command(flatten)]
    model: ModelFlags,
    /// Output file; standard output when absent or empty.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    algo: Algorithm,
    /// Matrix dimensions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    /// Process counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<u64>,
    /// Layer counts for the 2.5D variants, comma separated, or `auto`.
    #[arg(long, default_value = "auto")]
    c: String,
    #[arg(long, default_value_t = 1)]
    r: u64,
    #[arg(long, default_value_t = 6)]
    t: u32,
    #[command(flatten)]
    model: ModelFlags,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Output file; standard output when absent or empty.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ExtrapolateArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Process counts to add, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    target: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_DEGREE)]
    degree: usize,
    /// Output file; standard output when absent or empty.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct GenProfileArgs {
    #[arg(long)]
    name: Option<String>,
    /// Output file; standard output when absent or empty.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    profile: PathBuf,
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Csv(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: format!("{}: {}", e.kind(), one_line(&e.to_string())),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn invalid(msg: impl Into<String>) -> Failure {
    Error::InvalidScenario(msg.into()).into()
}

fn load_profile(path: &Path) -> Result<MachineProfile, Failure> {
    let file = File::open(path).map_err(|e| Failure {
        code: 2,
        message: format!("io: {}: {e}", path.display()),
    })?;
    Ok(MachineProfile::load(io::BufReader::new(file))?)
}

/// Standard output when `path` is absent or empty.
fn open_out(path: Option<&str>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) if !p.is_empty() => {
            let f = File::create(p).map_err(|e| Failure {
                code: 2,
                message: format!("io: {p}: {e}"),
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn parse_layers(s: &str) -> Result<LayerChoice, Failure> {
    if s.trim() == "auto" {
        return Ok(LayerChoice::Auto);
    }
    s.split(',')
        .map(|x| x.trim().parse::<u64>().map_err(|_| invalid(format!("c must be `auto` or a list of integers (got `{s}`)"))))
        .collect::<Result<Vec<_>, _>>()
        .map(LayerChoice::List)
}

fn scenario_prediction(a: &ScenarioArgs, profile: &MachineProfile) -> Result<Prediction, Failure> {
    let layers = match (&a.c, a.variant.is_replicated()) {
        (Some(c), _) => parse_layers(c)?,
        (None, true) => LayerChoice::Auto,
        (None, false) => LayerChoice::List(vec![1]),
    };
    match layers {
        LayerChoice::List(v) if v.len() == 1 => {
            let s = Scenario::new(a.algo, a.variant, a.n, a.p, v[0], a.r, a.t);
            Ok(predict(profile, &s, a.model.options())?)
        }
        LayerChoice::List(_) => Err(invalid("predict takes a single c or `auto`")),
        LayerChoice::Auto => {
            let spec = SweepSpec {
                algorithm: a.algo,
                ns: vec![a.n],
                ps: vec![a.p],
                layers: LayerChoice::Auto,
                r: a.r,
                t: a.t,
                options: a.model.options(),
            };
            best_variant(profile, &spec, a.variant, a.n, a.p).map_err(invalid)
        }
    }
}

fn cmd_predict(a: PredictArgs) -> Result<(), Failure> {
    let profile = load_profile(&a.scenario.profile)?;
    let pred = scenario_prediction(&a.scenario, &profile)?;
    let mut out = open_out(a.scenario.out.as_deref())?;
    match a.format {
        Format::Text => report::prediction_text(&mut out, &pred)?,
        Format::Csv => report::prediction_csv(&mut out, &pred)?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_trace(a: TraceArgs) -> Result<(), Failure> {
    let profile = load_profile(&a.scenario.profile)?;
    // resolve `auto` the same way predict does so the totals agree
    let pred = scenario_prediction(&a.scenario, &profile)?;
    let steps = trace(&profile, &pred.scenario, a.scenario.model.options())?;
    let mut out = open_out(a.scenario.out.as_deref())?;
    steps.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn cmd_rank(a: RankArgs) -> Result<(), Failure> {
    let profile = load_profile(&a.profile)?;
    let spec = SweepSpec {
        algorithm: a.algo,
        ns: a.n,
        ps: a.p,
        layers: parse_layers(&a.c)?,
        r: a.r,
        t: a.t,
        options: a.model.options(),
    };
    let rows = rank(&profile, &spec)?;
    let mut out = open_out(a.out.as_deref())?;
    match a.format {
        Format::Text => report::rank_text(&mut out, &rows)?,
        Format::Csv => report::rank_csv(&mut out, &rows)?,
    }
    out.flush()?;
    Ok(())
}

fn cmd_extrapolate(a: ExtrapolateArgs) -> Result<(), Failure> {
    let profile = load_profile(&a.profile)?;
    let extended = profile.with_extrapolated_cmax(&a.target, a.degree)?;
    let mut out = open_out(a.out.as_deref())?;
    writeln!(out, "{}", extended.to_json_string())?;
    out.flush()?;
    Ok(())
}

fn cmd_gen_profile(a: GenProfileArgs) -> Result<(), Failure> {
    let mut params = SyntheticParams::default();
    if let Some(name) = a.name {
        params.name = name;
    }
    let profile = gen_synthetic_profile(&params);
    let mut out = open_out(a.out.as_deref())?;
    writeln!(out, "{}", profile.to_json_string())?;
    out.flush()?;
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    let profile = load_profile(&a.profile)?;
    println!(
        "ok: {} ({} kernel curves, {} calib_avg rows, {} calib_max rows)",
        profile.name,
        profile.kernels.len(),
        profile.calib_avg.len(),
        profile.calib_max.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(a) => cmd_predict(a),
        Command::Rank(a) => cmd_rank(a),
        Command::Extrapolate(a) => cmd_extrapolate(a),
        Command::Trace(a) => cmd_trace(a),
        Command::GenProfile(a) => cmd_gen_profile(a),
        Command::ValidateProfile(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
