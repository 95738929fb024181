use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cellmatch_cli::commands::{run_match, MatchArgs};
use cellmatch_cli::server::{serve, AppState};
use cellmatch_core::eval::report_table;
use cellmatch_core::session::{SessionStore, STORE_ENV};
use cellmatch_core::Mode;

#[derive(Parser)]
#[command(name = "cellmatch", version, about = "Match closed regions and strokes between two keyframes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match keyframe A against keyframe B and write the results.
    Match {
        a: PathBuf,
        b: PathBuf,
        /// SCD, SC or S.
        #[arg(long)]
        mode: Option<Mode>,
        /// TOML engine configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "cellmatch-out")]
        out: PathBuf,
        /// JSON ground truth; enables report.json and report.txt.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Render this many inbetween frames to inbetween.svg.
        #[arg(long)]
        frames: Option<usize>,
    },
    /// Serve the session API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Session directory; sessions stay in memory when unset.
        #[arg(long, env = STORE_ENV)]
        store: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Match {
            a,
            b,
            mode,
            config,
            out,
            reference,
            frames,
        } => {
            let args = MatchArgs {
                a,
                b,
                mode,
                config,
                out,
                reference,
                frames,
            };
            match run_match(&args) {
                Ok(summary) => {
                    for file in &summary.files {
                        println!("{}", file.display());
                    }
                    if let Some(report) = summary.report {
                        print!("{}", report_table(&[(args.a.display().to_string(), report)]));
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::Serve { addr, store } => {
            let state = AppState::new(store.map(SessionStore::new));
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(rt) => rt,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            match runtime.block_on(serve(&addr, state)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot serve on {addr}: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
