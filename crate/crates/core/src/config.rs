//! Tunable constants shared by the world, the planners and the herder team.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    InvalidValue { key: String, value: String },
    #[error("expected KEY=VALUE, got `{0}`")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Field-of-view radius. `None` keeps the radius declared by the map header.
    pub r_fov: Option<i32>,
    /// Radius within which a cow reacts to other entities.
    pub r_cow: i32,
    pub cow_weight_agent: i64,
    pub cow_weight_cow: i64,
    pub cow_weight_wall: i64,
    /// Extra path cost of a cell holding a believed cow.
    pub w_cow: u32,
    /// Extra path cost per believed cow adjacent to a cell.
    pub w_adj: u32,
    /// Path cost of a cell nobody on the team has seen.
    pub w_unknown: u32,
    /// Cluster link distance.
    pub link: i32,
    pub max_cluster: usize,
    pub t_stale: u64,
    pub d_gap: i32,
    pub k_form: usize,
    /// Half-width of the formation arc, degrees.
    pub formation_spread_deg: f64,
    pub p_opp: u64,
    pub r_opp: i32,
    /// Action deadline for network teams, milliseconds.
    pub d_act_ms: u64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            r_fov: None,
            r_cow: 5,
            cow_weight_agent: -3,
            cow_weight_cow: 1,
            cow_weight_wall: -1,
            w_cow: 8,
            w_adj: 4,
            w_unknown: 2,
            link: 2,
            max_cluster: 8,
            t_stale: 20,
            d_gap: 3,
            k_form: 3,
            formation_spread_deg: 60.0,
            p_opp: 10,
            r_opp: 10,
            d_act_ms: 200,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ParamError> {
    value.trim().parse().map_err(|_| ParamError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl Params {
    /// Applies one override. Keys are matched case-insensitively.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ParamError> {
        match key.trim().to_ascii_lowercase().as_str() {
            "r_fov" => self.r_fov = Some(parse(key, value)?),
            "r_cow" => self.r_cow = parse(key, value)?,
            "cow_weight_agent" => self.cow_weight_agent = parse(key, value)?,
            "cow_weight_cow" => self.cow_weight_cow = parse(key, value)?,
            "cow_weight_wall" => self.cow_weight_wall = parse(key, value)?,
            "w_cow" => self.w_cow = parse(key, value)?,
            "w_adj" => self.w_adj = parse(key, value)?,
            "w_unknown" => self.w_unknown = parse(key, value)?,
            "l" | "link" => self.link = parse(key, value)?,
            "max_size" | "max_cluster" => self.max_cluster = parse(key, value)?,
            "t_stale" => self.t_stale = parse(key, value)?,
            "d_gap" => self.d_gap = parse(key, value)?,
            "k_form" => self.k_form = parse(key, value)?,
            "formation_spread" => self.formation_spread_deg = parse(key, value)?,
            "p_opp" => self.p_opp = parse(key, value)?,
            "r_opp" => self.r_opp = parse(key, value)?,
            "d_act" | "d_act_ms" => self.d_act_ms = parse(key, value)?,
            _ => return Err(ParamError::UnknownKey(key.to_string())),
        }
        self.validate(key, value)
    }

    /// Applies a `KEY=VALUE` override.
    pub fn apply(&mut self, assignment: &str) -> Result<(), ParamError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ParamError::Malformed(assignment.to_string()))?;
        self.set(k, v)
    }

    /// Whether every constant is in its usable range.
    pub fn is_valid(&self) -> bool {
        self.r_fov.is_none_or(|r| r >= 0)
            && self.r_cow >= 0
            && self.w_unknown >= 1
            && self.link >= 1
            && self.max_cluster >= 1
            && self.d_gap >= 0
            && self.k_form >= 1
            && self.r_opp >= 0
    }

    fn validate(&self, key: &str, value: &str) -> Result<(), ParamError> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(ParamError::InvalidValue {
                key: key.to_string(),
                value: value.to_string(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_by_spec_names() {
        let mut p = Params::default();
        p.apply("W_cow=12").unwrap();
        p.apply("L=3").unwrap();
        p.apply("max_size=4").unwrap();
        p.apply("R_fov=6").unwrap();
        assert_eq!(
            (p.w_cow, p.link, p.max_cluster, p.r_fov),
            (12, 3, 4, Some(6))
        );
    }

    #[test]
    fn rejects_bad_overrides() {
        let mut p = Params::default();
        assert!(matches!(p.apply("nope=1"), Err(ParamError::UnknownKey(_))));
        assert!(matches!(
            p.apply("L=x"),
            Err(ParamError::InvalidValue { .. })
        ));
        assert!(matches!(
            p.apply("L=0"),
            Err(ParamError::InvalidValue { .. })
        ));
        assert!(matches!(p.apply("L"), Err(ParamError::Malformed(_))));
    }
}
