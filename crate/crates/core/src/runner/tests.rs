use super::*;
use crate::maps;

const EMPTY: &str = "\
8 6 3
########
#1.A..2#
#1....2#
#1..B.2#
#1....2#
########
";

fn cfg(map: &str, steps: u64, seed: u64, a: ControllerSpec, b: ControllerSpec) -> MatchConfig {
    MatchConfig::new(map, steps, seed, a, b)
}

struct Crashing {
    after: u64,
}

impl Controller for Crashing {
    fn decide(
        &mut self,
        world: &WorldState,
        percepts: &BTreeMap<AgentId, Percept>,
    ) -> Result<BTreeMap<AgentId, Action>, ControllerError> {
        if world.step_count() >= self.after {
            return Err(ControllerError("boom".into()));
        }
        Ok(percepts
            .keys()
            .map(|&a| (a, Action::Move(crate::world::Direction::E)))
            .collect())
    }
}

#[test]
fn spec_round_trip() {
    for s in [
        "builtin:herders",
        "builtin:random",
        "builtin:idle",
        "net:7001",
    ] {
        assert_eq!(s.parse::<ControllerSpec>().unwrap().to_string(), s);
    }
    assert!("net:x".parse::<ControllerSpec>().is_err());
    assert!("herders".parse::<ControllerSpec>().is_err());
}

#[test]
fn idle_teams_on_a_cowless_map() {
    let r = run_match(&cfg(
        EMPTY,
        10,
        0,
        ControllerSpec::Idle,
        ControllerSpec::Idle,
    ))
    .unwrap();
    assert_eq!((r.score(TeamId::ONE), r.score(TeamId::TWO)), (0, 0));
    assert_eq!(r.steps, 10);
    let log = ReplayLog::parse(&r.log).unwrap();
    assert_eq!(log.records.len(), 10);
    assert_eq!(verify_log(&log).unwrap(), Verdict::Ok);
}

#[test]
fn config_errors_are_caught_early() {
    let zero = cfg(EMPTY, 0, 0, ControllerSpec::Idle, ControllerSpec::Idle);
    assert!(run_match(&zero).unwrap_err().is_config());
    let same_port = cfg(
        EMPTY,
        5,
        0,
        ControllerSpec::Net(7001),
        ControllerSpec::Net(7001),
    );
    assert!(run_match(&same_port).unwrap_err().is_config());
    let bad_map = cfg(
        "3 3\n...\n",
        5,
        0,
        ControllerSpec::Idle,
        ControllerSpec::Idle,
    );
    assert!(run_match(&bad_map).unwrap_err().is_config());
}

#[test]
fn same_inputs_same_log() {
    let c = cfg(
        maps::PASTURE_SMALL,
        120,
        4,
        ControllerSpec::Herders,
        ControllerSpec::Random,
    );
    let a = run_match(&c).unwrap();
    let b = run_match(&c).unwrap();
    assert_eq!(a.log, b.log);
    let other = run_match(&MatchConfig { seed: 5, ..c }).unwrap();
    assert_ne!(a.log, other.log);
}

#[test]
fn crashed_team_stands_still() {
    let c = cfg(EMPTY, 6, 0, ControllerSpec::Idle, ControllerSpec::Idle);
    let r = run_with_controllers(
        &c,
        Box::new(Crashing { after: 2 }),
        Box::new(IdleController),
    )
    .unwrap();
    assert_eq!(r.crashed, vec![TeamId::ONE]);
    assert_eq!(r.steps, 6);
    let log = ReplayLog::parse(&r.log).unwrap();
    let a = AgentId(0);
    assert_eq!(
        log.records[0].actions[&a],
        Action::Move(crate::world::Direction::E)
    );
    assert!(log.records[2..]
        .iter()
        .all(|s| s.actions[&a] == Action::Stay));
    assert_eq!(verify_log(&log).unwrap(), Verdict::Ok);
}

#[test]
fn match_ends_when_the_last_cow_is_penned() {
    let c = cfg(
        maps::PASTURE_SMALL,
        400,
        1,
        ControllerSpec::Herders,
        ControllerSpec::Idle,
    );
    let r = run_match(&c).unwrap();
    if r.captures.len() == 6 {
        assert!(r.steps < 400);
        assert_eq!(r.captures.last().unwrap().step, r.steps);
    }
}

#[test]
fn tampered_action_is_a_mismatch() {
    let r = run_match(&cfg(
        EMPTY,
        8,
        0,
        ControllerSpec::Random,
        ControllerSpec::Idle,
    ))
    .unwrap();
    let mut log = ReplayLog::parse(&r.log).unwrap();
    // Replace the first move the random team made with Stay.
    let (i, agent) = log
        .records
        .iter()
        .enumerate()
        .find_map(|(i, s)| {
            s.actions
                .iter()
                .find(|(_, act)| matches!(act, Action::Move(_)))
                .map(|(&a, _)| (i, a))
        })
        .expect("random team moved at least once in 8 steps");
    let moved = log.records[i].actions[&agent];
    log.records[i].actions.insert(agent, Action::Stay);
    assert_ne!(moved, Action::Stay);
    assert_eq!(
        verify_log(&log).unwrap(),
        Verdict::Mismatch { step: i as u64 + 1 }
    );
}

#[test]
fn flipped_move_in_the_file_is_a_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.log");
    let mut c = cfg(EMPTY, 3, 0, ControllerSpec::Idle, ControllerSpec::Idle);
    c.log_path = Some(path.clone());
    run_with_controllers(
        &c,
        Box::new(Crashing { after: 99 }),
        Box::new(IdleController),
    )
    .unwrap();
    assert_eq!(replay_verify(&path).unwrap(), Verdict::Ok);
    let text = std::fs::read_to_string(&path).unwrap();
    let flipped = text.replacen("[0,\"E\"]", "[0,\"W\"]", 1);
    assert_ne!(flipped, text);
    std::fs::write(&path, flipped).unwrap();
    assert_eq!(replay_verify(&path).unwrap(), Verdict::Mismatch { step: 1 });
}

#[test]
fn truncated_log_is_malformed() {
    let r = run_match(&cfg(
        EMPTY,
        5,
        0,
        ControllerSpec::Random,
        ControllerSpec::Random,
    ))
    .unwrap();
    let lines: Vec<&str> = r.log.lines().collect();
    let without_result = lines[..lines.len() - 1].join("\n") + "\n";
    assert!(matches!(
        ReplayLog::parse(&without_result),
        Err(LogError::Malformed { .. })
    ));
    let cut = &r.log[..r.log.len() - 10];
    assert!(matches!(
        ReplayLog::parse(cut),
        Err(LogError::Malformed { .. })
    ));
    assert!(matches!(
        ReplayLog::parse(""),
        Err(LogError::Malformed { .. })
    ));
    let skipped = [lines[0], lines[2]].join("\n") + "\n";
    assert!(matches!(
        ReplayLog::parse(&skipped),
        Err(LogError::Malformed { line: 2, .. })
    ));
}

#[test]
fn render_walks_the_log() {
    let r = run_match(&cfg(
        EMPTY,
        4,
        0,
        ControllerSpec::Random,
        ControllerSpec::Idle,
    ))
    .unwrap();
    let log = ReplayLog::parse(&r.log).unwrap();
    let start = render_step(&log, 0).unwrap();
    assert_eq!(start, log.initial_world().unwrap().render());
    let mut world = log.initial_world().unwrap();
    for s in &log.records {
        world.step(&s.actions).unwrap();
    }
    assert_eq!(render_step(&log, 4).unwrap(), world.render());
    assert!(matches!(
        render_step(&log, 5),
        Err(LogError::StepOutOfRange {
            requested: 5,
            last: 4
        })
    ));
}
