//! A deterministic grid simulator of cows, fences and corrals, and a team of
//! cooperating herder agents that plays it.
//!
//! Start with [`world::WorldState`] for the rules, [`agents::HerderTeam`] for
//! the team, and [`runner::run_match`] to play and log whole matches.

pub mod agents;
pub mod cluster;
pub mod config;
pub mod maps;
pub mod netmatch;
pub mod pathfind;
pub mod runner;
pub mod world;
