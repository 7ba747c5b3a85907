//! `weyl-census`: validate Schottky systems, run word censuses and write growth reports.
//!
//! Exit codes: 0 success, 1 operational error, 2 validation failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use weyl_census::census::io::{read_census, write_census, write_ratio_csv};
use weyl_census::census::{build_census_with, growth_report, CensusOptions, FlagBall, GrowthReport, ReportOptions};
use weyl_census::freegroup::Letter;
use weyl_census::schottky::{load_system, presets, SchottkySystem, SystemConfig};
use weyl_census::Error;

const THREADS_ENV: &str = "WEYL_CENSUS_THREADS";

#[derive(Parser)]
#[command(name = "weyl-census", version, about = "Word census and growth reports for Schottky groups in SL(d,R)")]
struct Cli {
    /// Worker threads for the census sweep (falls back to WEYL_CENSUS_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Schottky validation checks and print the report as JSON
    Validate {
        config: PathBuf,
        /// Also write the report to this file
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Enumerate all words up to length L and write census.csv and census.json
    Census {
        config: PathBuf,
        #[arg(short = 'L', long = "length")]
        length: usize,
        #[arg(short, long)]
        out: PathBuf,
        /// Largest number of records to compute
        #[arg(long, default_value_t = weyl_census::census::DEFAULT_BUDGET)]
        budget: u128,
    },
    /// Growth estimates and ratio tables from a cached census
    Report {
        config: PathBuf,
        #[arg(long)]
        census: PathBuf,
        /// Fit window for the critical exponent, as R1:R2
        #[arg(long)]
        window: Option<String>,
        #[arg(long)]
        bins: Option<usize>,
        /// Flag ball around a letter's attracting flag, as letter:radius (default a:0.2)
        #[arg(long = "ballA")]
        ball_a: Option<String>,
        /// Flag ball for inverse directions (default A:0.2)
        #[arg(long = "ballB")]
        ball_b: Option<String>,
        /// Output directory (defaults to the census directory)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Built-in demonstration systems
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Emit { name: String },
}

enum Failure {
    Validation(String),
    Operational(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Operational(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read_config(path: &Path) -> Result<SystemConfig, Error> {
    SystemConfig::from_json(&fs::read_to_string(path)?)
}

fn validated_system(path: &Path) -> std::result::Result<SchottkySystem, Failure> {
    let mut sys = load_system(&read_config(path)?)?;
    let report = sys.validate();
    if !report.passed {
        let why = report.first_error().map(|e| e.to_string()).unwrap_or_default();
        return Err(Failure::Validation(why));
    }
    Ok(sys)
}

fn cmd_validate(config: &Path, out: Option<&Path>) -> Outcome {
    let mut sys = load_system(&read_config(config)?)?;
    let report = sys.validate();
    let text = report.to_json_pretty() + "\n";
    print!("{text}");
    if let Some(path) = out {
        fs::write(path, &text).map_err(Error::from)?;
    }
    if report.passed {
        Ok(())
    } else {
        let why = report.first_error().map(|e| e.to_string()).unwrap_or_default();
        Err(Failure::Validation(why))
    }
}

fn cmd_census(config: &Path, length: usize, out: &Path, budget: u128) -> Outcome {
    let sys = validated_system(config)?;
    let opts = CensusOptions {
        budget,
        ..Default::default()
    };
    let table = build_census_with(&sys, length, &opts)?;
    let (csv_path, json_path) = write_census(&table, sys.config(), out)?;
    println!("records    {}", table.len());
    println!("horizon_R  {}", table.horizon_r());
    println!("horizon_t  {}", table.horizon_t());
    println!("wrote      {}", csv_path.display());
    println!("wrote      {}", json_path.display());
    Ok(())
}

fn parse_pair(text: &str, what: &str) -> Result<(String, String), Error> {
    text.rsplit_once(':')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| Error::Parse(format!("{what} must look like x:y, got {text:?}")))
}

fn parse_float(text: &str, what: &str) -> Result<f64, Error> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what}: {text:?}")))
}

fn parse_ball(sys: &SchottkySystem, spec: &str) -> Result<FlagBall, Error> {
    let (center, radius) = parse_pair(spec, "ball")?;
    let letter = Letter::parse(center.trim(), sys.generator_count())?;
    let radius = parse_float(&radius, "ball radius")?;
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::Parse(format!("ball radius {radius} outside (0, 1]")));
    }
    let flag = sys
        .fixed_flag(letter)
        .ok_or_else(|| Error::NotRegular(format!("letter {center} has no fixed flag")))?;
    Ok(FlagBall::new(flag.clone(), radius))
}

fn print_summary(report: &GrowthReport) {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into());
    println!("records          {}", report.records);
    println!("horizon_R        {:.6}", report.horizon_r);
    println!("horizon_t        {:.6}", report.horizon_t);
    println!(
        "delta_hat        {:.6} +- {:.6}  on [{:.4}, {:.4}]",
        report.delta.delta_hat, report.delta.stderr, report.delta.window.0, report.delta.window.1
    );
    println!("log P(t) slope   {:.6}", report.theorem.primitive_slope);
    println!(
        "N e^-dR          [{:.4}, {:.4}]",
        report.theorem.orbit_ratio_range.0, report.theorem.orbit_ratio_range.1
    );
    println!(
        "P t^r e^-dt      [{:.4}, {:.4}]",
        report.theorem.lower_ratio_range.0, report.theorem.lower_ratio_range.1
    );
    println!(
        "P t e^-dt        [{:.4}, {:.4}]",
        report.theorem.upper_ratio_range.0, report.theorem.upper_ratio_range.1
    );
    println!("benoist_M_hat    {:.6}", report.benoist_m_hat);
    println!("alpha_hat        {}", opt(report.alpha_hat));
    println!("min_wall_gap     {}", opt(report.min_wall_gap));
    if let Some(last) = report.directional.as_ref().and_then(|rows| rows.last()) {
        println!("N(R;A,B)/N(R)    {:.6}  at R = {:.4}", last.fraction, last.r);
    }
    println!(
        "max class mult   {}  (log-log slope {})",
        report.multiplicity.max_count,
        opt(report.multiplicity.slope)
    );
}

#[allow(clippy::too_many_arguments)]
fn cmd_report(
    config: &Path,
    census: &Path,
    window: Option<&str>,
    bins: Option<usize>,
    ball_a: Option<&str>,
    ball_b: Option<&str>,
    out: Option<&Path>,
) -> Outcome {
    let sys = load_system(&read_config(config)?)?;
    let (table, side) = read_census(census)?;
    if side.fingerprint != sys.fingerprint() {
        return Err(Error::FingerprintMismatch {
            expected: sys.fingerprint(),
            found: side.fingerprint,
        }
        .into());
    }
    let window = window
        .map(|w| -> Result<(f64, f64), Error> {
            let (a, b) = parse_pair(w, "window")?;
            Ok((parse_float(&a, "window start")?, parse_float(&b, "window end")?))
        })
        .transpose()?;
    let ball_a = parse_ball(&sys, ball_a.unwrap_or("a:0.2"))?;
    let ball_b = parse_ball(&sys, ball_b.unwrap_or("A:0.2"))?;
    let options = ReportOptions {
        window,
        bins,
        balls: Some((ball_a, ball_b)),
        cone_min_len: None,
    };
    let report = growth_report(&table, &options)?;

    let dir = match out {
        Some(d) => d.to_path_buf(),
        None => census.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    fs::create_dir_all(&dir).map_err(Error::from)?;
    let doc = json!({
        "fingerprint": side.fingerprint,
        "census_digest": side.content_digest,
        "report": report,
    });
    let mut text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
    text.push('\n');
    fs::write(dir.join("report.json"), text).map_err(Error::from)?;
    for (name, rows) in [
        ("orbit_ratios.csv", &report.theorem.orbit_rows),
        ("class_ratios.csv", &report.theorem.class_rows),
    ] {
        let file = fs::File::create(dir.join(name)).map_err(Error::from)?;
        write_ratio_csv(rows, std::io::BufWriter::new(file))?;
    }
    print_summary(&report);
    Ok(())
}

fn cmd_presets(action: &PresetAction) -> Outcome {
    match action {
        PresetAction::List => {
            for name in presets::NAMES {
                println!("{name}");
            }
            Ok(())
        }
        PresetAction::Emit { name } => {
            let cfg = presets::get(name).ok_or_else(|| {
                Error::Parse(format!("unknown preset {name:?}; known: {}", presets::NAMES.join(", ")))
            })?;
            println!("{}", cfg.to_json_pretty());
            Ok(())
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Error> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(None),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(n: Option<usize>) -> Result<(), Error> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Parse(e.to_string()))?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_: Option<usize>) -> Result<(), Error> {
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads(thread_count(cli.threads)?)?;
    match &cli.command {
        Command::Validate { config, out } => cmd_validate(config, out.as_deref()),
        Command::Census {
            config,
            length,
            out,
            budget,
        } => cmd_census(config, *length, out, *budget),
        Command::Report {
            config,
            census,
            window,
            bins,
            ball_a,
            ball_b,
            out,
        } => cmd_report(
            config,
            census,
            window.as_deref(),
            *bins,
            ball_a.as_deref(),
            ball_b.as_deref(),
            out.as_deref(),
        ),
        Command::Presets { action } => cmd_presets(action),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(why)) => {
            eprintln!("validation failed: {why}");
            ExitCode::from(2)
        }
        Err(Failure::Operational(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
