//! Command-line front end: run a match, verify a log, render a step.
//!
//! Exit codes: 0 success, 1 bad configuration, 2 runtime failure (including
//! an unreadable or malformed log), 3 replay mismatch.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use herdsim::maps;
use herdsim::runner::{self, ControllerSpec, LogError, MatchConfig, ReplayLog, RunError, Verdict};
use herdsim::world::TeamId;

#[derive(Parser)]
#[command(name = "herdsim", version, about = "Cows-and-herders simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play one match and optionally write its replay log.
    Run {
        /// Map file, or the name of a bundled map (pasture_small, fence_gap, open_30, arena_50).
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 400)]
        steps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// builtin:herders, builtin:random, builtin:idle or net:PORT.
        #[arg(long, default_value = "builtin:herders")]
        team1: ControllerSpec,
        #[arg(long, default_value = "builtin:idle")]
        team2: ControllerSpec,
        /// Override a constant, e.g. `--set d_act_ms=500`. Repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        log: Option<PathBuf>,
        /// Token network clients must send in their hello.
        #[arg(long)]
        token: Option<String>,
        /// Seconds to wait for network teams to connect.
        #[arg(long, default_value_t = 60)]
        wait: u64,
    },
    /// Re-simulate a log and check every recorded state hash.
    Verify {
        #[arg(long)]
        log: PathBuf,
    },
    /// Print the board after the given step of a log.
    Render {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 0)]
        step: u64,
    },
}

const CONFIG: u8 = 1;
const RUNTIME: u8 = 2;
const MISMATCH: u8 = 3;

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            map,
            steps,
            seed,
            team1,
            team2,
            set,
            log,
            token,
            wait,
        } => run(&map, steps, seed, team1, team2, &set, log, token, wait),
        Command::Verify { log } => verify(&log),
        Command::Render { log, step } => render(&log, step),
    }
}

#[allow(clippy::too_many_arguments)]
fn run(
    map: &str,
    steps: u64,
    seed: u64,
    team1: ControllerSpec,
    team2: ControllerSpec,
    set: &[String],
    log: Option<PathBuf>,
    token: Option<String>,
    wait: u64,
) -> ExitCode {
    let cfg = match maps::bundled(map) {
        Some(text) if !Path::new(map).exists() => {
            Ok(MatchConfig::new(text, steps, seed, team1, team2))
        }
        _ => MatchConfig::from_map_file(Path::new(map), steps, seed, team1, team2),
    };
    let mut cfg = match cfg {
        Ok(c) => c,
        Err(e) => return fail(CONFIG, e),
    };
    for s in set {
        if let Err(e) = cfg.params.apply(s) {
            return fail(CONFIG, e);
        }
    }
    cfg.log_path = log;
    cfg.net_token = token;
    cfg.handshake_timeout = Duration::from_secs(wait);
    match runner::run_match(&cfg) {
        Ok(r) => {
            println!(
                "steps {} score {}:{}",
                r.steps,
                r.score(TeamId::ONE),
                r.score(TeamId::TWO)
            );
            for team in &r.crashed {
                println!("team {team} controller crashed");
            }
            ExitCode::SUCCESS
        }
        Err(e @ RunError::Io(_)) | Err(e @ RunError::Net(_)) => fail(RUNTIME, e),
        Err(e) if e.is_config() => fail(CONFIG, e),
        Err(e) => fail(RUNTIME, e),
    }
}

fn verify(path: &Path) -> ExitCode {
    match runner::replay_verify(path) {
        Ok(Verdict::Ok) => {
            println!("ok");
            ExitCode::SUCCESS
        }
        Ok(Verdict::Mismatch { step }) => {
            println!("mismatch at step {step}");
            ExitCode::from(MISMATCH)
        }
        Err(e) => fail(RUNTIME, e),
    }
}

fn render(path: &Path, step: u64) -> ExitCode {
    let shown = ReplayLog::read(path).and_then(|log| runner::render_step(&log, step));
    match shown {
        Ok(board) => {
            print!("{board}");
            ExitCode::SUCCESS
        }
        Err(e @ LogError::StepOutOfRange { .. }) => fail(CONFIG, e),
        Err(e) => fail(RUNTIME, e),
    }
}

fn fail(code: u8, e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}
