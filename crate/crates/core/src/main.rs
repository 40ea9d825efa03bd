use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use resilia::app::{
    build_temperature_system, load_system, run_analysis_with, seed_from_env, sweep_csv,
    temperature, write_atomic, Report, Stages, SystemSpec, TemperatureLoss, TemperatureParams,
};
use resilia::{Error, Result};

#[derive(Parser)]
#[command(
    name = "resilia",
    version,
    about = "Resilience of linear systems to loss of actuator control"
)]
struct Cli {
    /// Also write the JSON report to this path.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Do not print the report to stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    pairs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Resilience and resilient stabilizability verdicts.
    Check { file: PathBuf },
    /// Lyapunov bounds on reach times and quantitative resilience.
    Bounds {
        file: PathBuf,
        #[command(flatten)]
        pairs: PairArgs,
    },
    /// Exact nominal and/or malfunctioning reach times.
    Reachtime {
        file: PathBuf,
        #[arg(long, conflicts_with_all = ["malfunctioning", "both"])]
        nominal: bool,
        #[arg(long, conflicts_with = "both")]
        malfunctioning: bool,
        #[arg(long)]
        both: bool,
    },
    /// Per-pair bound table as CSV.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pairs: PairArgs,
    },
    /// Built-in case studies.
    Casestudy {
        #[arg(value_enum)]
        name: CaseStudy,
        /// Actuator whose control is lost.
        #[arg(long)]
        lost: TemperatureLoss,
        /// Initial temperature offsets in kelvin.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x0: Option<Vec<f64>>,
        #[command(flatten)]
        pairs: PairArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseStudy {
    Temperature,
}

fn prepare(mut spec: SystemSpec, pairs: Option<&PairArgs>) -> Result<SystemSpec> {
    if let Some(seed) = seed_from_env()? {
        spec.options.seed = seed;
    }
    if let Some(p) = pairs {
        if let Some(n) = p.pairs {
            spec.options.num_pairs = n;
        }
        if let Some(s) = p.seed {
            spec.options.seed = s;
        }
    }
    Ok(spec)
}

fn load(path: &Path, pairs: Option<&PairArgs>) -> Result<SystemSpec> {
    prepare(load_system(path)?, pairs)
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Check { file } => run_analysis_with(&load(file, None)?, Stages::verdicts_only()),
        Command::Bounds { file, pairs } => {
            let stages = Stages {
                nominal: false,
                malfunction: false,
                ..Stages::all()
            };
            run_analysis_with(&load(file, Some(pairs))?, stages)
        }
        Command::Reachtime {
            file,
            nominal,
            malfunctioning,
            ..
        } => {
            let stages = Stages {
                pairs: false,
                nominal: !malfunctioning,
                malfunction: !nominal,
                strict: true,
            };
            run_analysis_with(&load(file, None)?, stages)
        }
        Command::Sweep { file, out, pairs } => {
            let report = run_analysis_with(&load(file, Some(pairs))?, Stages::all())?;
            write_atomic(out, sweep_csv(&report).as_bytes())?;
            Ok(report)
        }
        Command::Casestudy {
            name: CaseStudy::Temperature,
            lost,
            x0,
            pairs,
        } => {
            let params = TemperatureParams::default();
            let mut spec = build_temperature_system(&params, &[lost.column()])?;
            if let Some(x0) = x0 {
                if x0.len() != spec.n {
                    return Err(Error::Dimension {
                        pointer: "/x0".into(),
                        message: format!("--x0 needs {} values, got {}", spec.n, x0.len()),
                    });
                }
                spec.x0 = x0.clone();
            }
            let spec = prepare(spec, Some(pairs))?;
            let mut report = run_analysis_with(&spec, Stages::all())?;
            let computed: Vec<String> = report
                .spectrum
                .eigenvalues
                .iter()
                .map(|l| format!("{:.5}", l[0]))
                .collect();
            report.notes.push(format!(
                "computed spectrum [{}] (wall area included) differs from the reference spectrum [{}]; \
                 reach times are used as the reference instead",
                computed.join(", "),
                temperature::REFERENCE_EIGENVALUES.map(|x| x.to_string()).join(", ")
            ));
            Ok(report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|report| {
        let mut json = report.to_json();
        json.push('\n');
        if let Some(path) = &cli.report {
            write_atomic(path, json.as_bytes())?;
        }
        if !cli.quiet {
            print!("{json}");
        }
        Ok(())
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_byte(&e))
        }
    }
}

fn exit_byte(e: &Error) -> u8 {
    e.exit_code().clamp(1, 255) as u8
}
