use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hav_core::scenario::generate;
use hav_core::simulator::{run, MAX_GENERATION_ATTEMPTS};
use hav_core::{aggregate, ScenarioError, ScenarioParams};
use hav_sim::formats::{self, ScenarioFile};
use hav_sim::{run_batch_parallel, Error};

#[derive(Parser)]
#[command(name = "hav-sim", version, about = "Swarm simulator for truck-trailer vehicles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay one scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Directory for per-vehicle trace CSVs and events.jsonl.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a batch of random experiments and write one record per line.
    Batch {
        #[arg(long)]
        experiments: u64,
        #[arg(long)]
        havs: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        dt: f64,
        #[arg(long, default_value_t = 20_000)]
        max_steps: u32,
        #[arg(long, default_value_t = 10)]
        max_trailers: usize,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a record log into a report and histogram CSVs.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        hist: PathBuf,
    },
    /// Write the scenario a batch would use for one experiment.
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        havs: usize,
        #[arg(long, default_value_t = 10)]
        max_trailers: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            scenario,
            trace,
            out,
        } => {
            let file = formats::read_scenario(&scenario)?;
            let output = run(&file.scenario, &file.params, trace.is_some())?;
            formats::write_record(&out, &output.record)?;
            if let Some(dir) = trace {
                formats::write_trace(&dir, output.trace.as_deref().unwrap_or_default())?;
                formats::write_events(&dir.join("events.jsonl"), &output.events)?;
            }
        }
        Command::Batch {
            experiments,
            havs,
            seed,
            dt,
            max_steps,
            max_trailers,
            workers,
            out,
        } => {
            if experiments == 0 {
                return Err(Error::Invalid("--experiments must be at least 1".into()));
            }
            let params = ScenarioParams {
                seed,
                dt,
                max_steps,
                max_trailers,
                ..ScenarioParams::default()
            };
            let workers = workers.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let records = run_batch_parallel(&params, experiments, havs, workers)?;
            formats::write_records(&out, &records)?;
        }
        Command::Analyze { input, report, hist } => {
            let records = formats::read_records(&input)?;
            formats::write_report(&report, &hist, &aggregate(&records))?;
        }
        Command::Generate {
            seed,
            index,
            havs,
            max_trailers,
            out,
        } => {
            let params = ScenarioParams {
                seed,
                hav_count: havs,
                max_trailers,
                ..ScenarioParams::default()
            };
            for attempt in 0..MAX_GENERATION_ATTEMPTS {
                match generate(&params, index, attempt) {
                    Ok(s) => return formats::write_scenario(&out, &ScenarioFile::new(params, s)),
                    Err(ScenarioError::PlacementBudget { .. }) => continue,
                    Err(e) => return Err(e.into()),
                }
            }
            return Err(ScenarioError::GenerationExhausted {
                index,
                attempts: MAX_GENERATION_ATTEMPTS,
            }
            .into());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hav-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
