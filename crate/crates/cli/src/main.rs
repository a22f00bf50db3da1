use std::path::PathBuf;
use std::process::ExitCode;

use chiwalk_cli::run::{self, EvalArgs};
use chiwalk_cli::{exit, server};
use chiwalk_core::eval::{Approach, DEFAULT_CHECKPOINT_EVERY};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chi-walk", version, about = "Indoor AP localization simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compare localization processes over seeded replicas.
    Eval {
        /// Scenario file or `builtin:grid100` / `builtin:office17`.
        #[arg(long, default_value = "builtin:grid100")]
        scenario: String,
        /// `chi`, `fp:p,c` or `crowd:k`; repeat for several.
        #[arg(long = "approach", required = true)]
        approaches: Vec<Approach>,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 24000.0)]
        horizon: f64,
        /// Checkpoint spacing in time units.
        #[arg(long, default_value_t = DEFAULT_CHECKPOINT_EVERY)]
        every: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write curves.svg.
        #[arg(long)]
        svg: bool,
        /// Exit with status 3 unless CHI beats every other approach at t=8000.
        #[arg(long)]
        check: bool,
    },
    /// Start the session HTTP API on localhost.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
    /// Replay a saved session's event log and verify it.
    Replay { session: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Cmd::Eval { scenario, approaches, seeds, horizon, every, out, svg, check } => {
            run::eval(&EvalArgs { scenario, approaches, seeds, horizon, every, out, svg, check })
        }
        Cmd::Replay { session } => run::replay(&session),
        Cmd::Serve { port } => {
            let rt = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("cannot start runtime: {e}");
                    return ExitCode::from(exit::CONFIG as u8);
                }
            };
            return match rt.block_on(server::serve(port)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("serve: {e}");
                    ExitCode::from(exit::CONFIG as u8)
                }
            };
        }
    };
    if outcome.code == exit::OK {
        println!("{}", outcome.message);
    } else {
        eprintln!("{}", outcome.message);
    }
    ExitCode::from(outcome.code as u8)
}
