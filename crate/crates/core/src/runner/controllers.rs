use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::agents::HerderTeam;
use crate::config::Params;
use crate::world::{Action, AgentId, Direction, Percept, TeamId, WorldState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("controller failed: {0}")]
pub struct ControllerError(pub String);

/// Chooses one team's actions each turn.
///
/// `world` is available for controllers that need ground truth (the random
/// opponent checks move legality); agent teams should only read `percepts`.
/// Agents missing from the returned map stay put.
pub trait Controller {
    fn decide(
        &mut self,
        world: &WorldState,
        percepts: &BTreeMap<AgentId, Percept>,
    ) -> Result<BTreeMap<AgentId, Action>, ControllerError>;

    /// Called once after the last step.
    fn finish(&mut self, _world: &WorldState) {}
}

pub struct IdleController;

impl Controller for IdleController {
    fn decide(
        &mut self,
        _world: &WorldState,
        percepts: &BTreeMap<AgentId, Percept>,
    ) -> Result<BTreeMap<AgentId, Action>, ControllerError> {
        Ok(percepts.keys().map(|&a| (a, Action::Stay)).collect())
    }
}

/// Uniform over legal moves plus Stay, from its own ChaCha8 stream.
pub struct RandomController {
    rng: ChaCha8Rng,
}

impl RandomController {
    pub fn new(seed: u64, team: TeamId) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(team.0 as u64);
        Self { rng }
    }
}

impl Controller for RandomController {
    fn decide(
        &mut self,
        world: &WorldState,
        percepts: &BTreeMap<AgentId, Percept>,
    ) -> Result<BTreeMap<AgentId, Action>, ControllerError> {
        let mut out = BTreeMap::new();
        for &a in percepts.keys() {
            let mut legal = vec![Action::Stay];
            legal.extend(
                Direction::ALL
                    .iter()
                    .filter(|&&d| world.move_is_legal(a, d))
                    .map(|&d| Action::Move(d)),
            );
            out.insert(a, legal[self.rng.gen_range(0..legal.len())]);
        }
        Ok(out)
    }
}

/// The in-process herder team.
pub struct HerdersController {
    team: HerderTeam,
}

impl HerdersController {
    pub fn new(world: &WorldState, team: TeamId, params: &Params) -> Self {
        let starts: Vec<_> = world
            .team_agents(team)
            .into_iter()
            .map(|a| (a, world.agents()[&a].pos))
            .collect();
        Self {
            team: HerderTeam::new(
                team,
                &starts,
                world.width(),
                world.height(),
                world.r_fov(),
                params,
            ),
        }
    }

    pub fn team(&self) -> &HerderTeam {
        &self.team
    }
}

impl Controller for HerdersController {
    fn decide(
        &mut self,
        _world: &WorldState,
        percepts: &BTreeMap<AgentId, Percept>,
    ) -> Result<BTreeMap<AgentId, Action>, ControllerError> {
        Ok(self.team.decide(percepts))
    }
}
