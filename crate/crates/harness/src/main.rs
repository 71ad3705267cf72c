use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gradflow_harness::trace::{diagnose_trace, fit_options, read_trace};
use gradflow_harness::{load_config, registry, run_all};

#[derive(Parser)]
#[command(name = "gradflow", version, about = "Run gradflow scenario configs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every scenario in a config file.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Fit Lojasiewicz exponent and decay model to a trace CSV.
    Diagnose {
        trace: PathBuf,
        /// Known critical value of the energy.
        #[arg(long)]
        h_limit: Option<f64>,
        /// Limit estimate when no critical value is given: `last` or `aitken`.
        #[arg(long, default_value = "last", value_parser = ["last", "aitken"])]
        h_estimate: String,
        #[arg(long, default_value_t = 0.5)]
        tail_fraction: f64,
    },
    /// Print the registry names usable in configs.
    ListRegistry,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config, out, jobs } => {
            let scenarios = match load_config(&config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_all(&scenarios, jobs, &out) {
                Ok(summary) => {
                    for r in &summary.scenarios {
                        let failed: Vec<&str> = r.monitors.iter().filter(|m| !m.pass).map(|m| m.name.as_str()).collect();
                        match (&r.error, failed.is_empty()) {
                            (Some(e), _) => println!("{:<5} {} ({e})", r.status, r.id),
                            (None, true) => println!("{:<5} {}", r.status, r.id),
                            (None, false) => println!("{:<5} {} [{}]", r.status, r.id, failed.join(", ")),
                        }
                    }
                    if summary.all_pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Cmd::Diagnose { trace, h_limit, h_estimate, tail_fraction } => match read_trace(&trace)
            .and_then(|t| diagnose_trace(&t, &fit_options(h_limit, &h_estimate, tail_fraction)))
        {
            Ok(rep) => {
                println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Cmd::ListRegistry => {
            print!("{}", registry::listing());
            ExitCode::SUCCESS
        }
    }
}
