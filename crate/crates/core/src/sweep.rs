//! One-dimensional what-if sweeps: intervene on a single input of the home
//! team and record how its outcome distribution moves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::model::{validate_profile, RatingField, TacticKind, TacticSpec, TeamProfile};
use crate::params::EngineParams;
use crate::sim::{check_pair, simulate};

/// The input being varied on the home team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VaryTarget {
    Rating(RatingField),
    /// Skill of the home team's current tactic.
    TacticSkill,
    /// Switch to this tactic, with the point as its skill.
    Tactic(TacticKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointMode {
    /// Points are absolute values.
    #[default]
    Value,
    /// Points are offsets from the base value.
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base_home: TeamProfile,
    pub base_away: TeamProfile,
    pub vary: VaryTarget,
    #[serde(default)]
    pub mode: PointMode,
    pub points: Vec<f64>,
    pub trials_per_point: u64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// The point as given in the sweep request.
    pub point: f64,
    /// Value the varied field took.
    pub value: f64,
    pub p_win: f64,
    pub p_draw: f64,
    pub p_lose: f64,
    pub mean_total_goals: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub vary: VaryTarget,
    pub trials_per_point: u64,
    pub seed: u64,
    pub points: Vec<SweepPoint>,
}

fn base_value(base: &TeamProfile, vary: VaryTarget) -> f64 {
    match vary {
        VaryTarget::Rating(f) => base.rating(f).0,
        VaryTarget::TacticSkill => f64::from(base.tactic.skill),
        VaryTarget::Tactic(kind) if base.tactic.kind == kind => f64::from(base.tactic.skill),
        VaryTarget::Tactic(_) => 0.0,
    }
}

fn skill_from(value: f64) -> Result<u8, String> {
    if value.fract() != 0.0 || !(0.0..=255.0).contains(&value) {
        return Err(format!("tactic skill {value} is not a whole number"));
    }
    Ok(value as u8)
}

/// Home profile at one sweep point, and the value the field took. Only the
/// varied field differs from `base`.
pub fn apply_point(
    base: &TeamProfile,
    vary: VaryTarget,
    mode: PointMode,
    point: f64,
) -> Result<(TeamProfile, f64), String> {
    let value = match mode {
        PointMode::Value => point,
        PointMode::Delta => base_value(base, vary) + point,
    };
    let mut p = *base;
    match vary {
        VaryTarget::Rating(f) => p.rating_mut(f).0 = value,
        VaryTarget::TacticSkill => {
            if p.tactic.kind == TacticKind::Normal {
                return Err("tactic skill has no effect under the Normal tactic".into());
            }
            p.tactic.skill = skill_from(value)?;
        }
        VaryTarget::Tactic(kind) => p.tactic = TacticSpec::new(kind, skill_from(value)?),
    }
    Ok((p, value))
}

pub fn validate_spec(spec: &SweepSpec) -> Result<(), EngineError> {
    if spec.points.is_empty() {
        return Err(EngineError::InvalidSweep("points must not be empty".into()));
    }
    if spec.trials_per_point == 0 {
        return Err(EngineError::ZeroTrials);
    }
    if spec.points.iter().any(|x| !x.is_finite()) {
        return Err(EngineError::InvalidSweep("points must be finite".into()));
    }
    let up = spec.points.windows(2).all(|w| w[0] < w[1]);
    let down = spec.points.windows(2).all(|w| w[0] > w[1]);
    if !(up || down) {
        return Err(EngineError::InvalidSweep("points must be strictly ordered".into()));
    }
    check_pair(&spec.base_home, &spec.base_away)?;
    for (index, &point) in spec.points.iter().enumerate() {
        let (p, value) = apply_point(&spec.base_home, spec.vary, spec.mode, point)
            .map_err(|m| EngineError::InvalidSweep(format!("point {index}: {m}")))?;
        let violations: Vec<_> = validate_profile(&p)
            .into_iter()
            .map(|mut v| {
                v.field = format!("base_home.{}", v.field);
                v
            })
            .collect();
        if !violations.is_empty() {
            return Err(EngineError::InvalidSweepPoint { index, value, violations });
        }
    }
    Ok(())
}

/// Every point reuses the same seed, so differences between points come from
/// the intervention and not from sampling noise.
pub fn run_sweep(spec: &SweepSpec, params: &EngineParams) -> Result<SweepResult, EngineError> {
    validate_spec(spec)?;
    let points = spec
        .points
        .par_iter()
        .map(|&point| {
            let (home, value) = apply_point(&spec.base_home, spec.vary, spec.mode, point)
                .expect("validated above");
            let r = simulate(&home, &spec.base_away, params, spec.trials_per_point, spec.seed)?;
            Ok(SweepPoint {
                point,
                value,
                p_win: r.hda.home(),
                p_draw: r.hda.draw(),
                p_lose: r.hda.away(),
                mean_total_goals: r.mean_total_goals,
            })
        })
        .collect::<Result<Vec<_>, EngineError>>()?;
    Ok(SweepResult {
        vary: spec.vary,
        trials_per_point: spec.trials_per_point,
        seed: spec.seed,
        points,
    })
}
