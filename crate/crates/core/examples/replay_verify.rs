//! Writes a replay log, checks it, then tampers with one action and checks again.

use herdsim::maps;
use herdsim::runner::{replay_verify, run_match, ControllerSpec, MatchConfig};

fn main() {
    let dir = std::env::temp_dir().join(format!("herdsim-replay-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fence_gap.log");

    let mut cfg = MatchConfig::new(
        maps::FENCE_GAP,
        100,
        9,
        ControllerSpec::Herders,
        ControllerSpec::Idle,
    );
    cfg.log_path = Some(path.clone());
    let result = run_match(&cfg).unwrap();
    println!("{} steps logged to {}", result.steps, path.display());
    println!("verify: {:?}", replay_verify(&path).unwrap());

    let text = std::fs::read_to_string(&path).unwrap();
    let tampered = text.replacen("\"E\"]", "\"Stay\"]", 1);
    std::fs::write(&path, tampered).unwrap();
    println!("after tampering: {:?}", replay_verify(&path).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}
