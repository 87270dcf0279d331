//! Herders against the random team on `pasture_small`, printing the board
//! every 10 steps and the captures at the end.
//!
//! cargo run --example local_match -- [seed]

use herdsim::maps;
use herdsim::runner::{render_step, run_match, ControllerSpec, MatchConfig, ReplayLog};
use herdsim::world::TeamId;

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let cfg = MatchConfig::new(
        maps::PASTURE_SMALL,
        400,
        seed,
        ControllerSpec::Herders,
        ControllerSpec::Random,
    );
    let result = run_match(&cfg).unwrap();
    let log = ReplayLog::parse(&result.log).unwrap();
    for step in (0..=result.steps).step_by(10) {
        println!("step {step}\n{}", render_step(&log, step).unwrap());
    }
    for c in &result.captures {
        println!(
            "step {:>3}: cow {} penned by team {}",
            c.step, c.cow, c.team
        );
    }
    println!(
        "final {}:{} after {} steps",
        result.score(TeamId::ONE),
        result.score(TeamId::TWO),
        result.steps
    );
}
