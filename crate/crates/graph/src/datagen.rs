//! Synthetic match datasets: random team pairs, one simulated trial each,
//! with continuous columns binned into labelled categories.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use htsim_core::model::{hatstats, PositionCounts, SpecialityRoster, MAX_TACTIC_SKILL, MIN_TACTIC_SKILL};
use htsim_core::rng::substream;
use htsim_core::sim::{check_pair, simulate_trial, MatchOutcome};
use htsim_core::{EngineParams, Rating, TacticKind, TacticSpec, TeamProfile};

use crate::data::DiscreteDataset;
use crate::error::GraphError;

/// How random team profiles are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSpec {
    /// Ratings are uniform on `[rating_min, rating_max]`.
    pub rating_min: f64,
    pub rating_max: f64,
    pub tactics: Vec<TacticKind>,
    pub skill_min: u8,
    pub skill_max: u8,
    /// Drop pairs where either team's HatStats is below this.
    pub hatstats_min: Option<f64>,
    /// Pair draws allowed per row before giving up on the filter.
    pub max_attempts: u32,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            rating_min: 5.0,
            rating_max: 20.0,
            tactics: TacticKind::ALL.to_vec(),
            skill_min: 5,
            skill_max: 20,
            hatstats_min: None,
            max_attempts: 10_000,
        }
    }
}

impl SamplerSpec {
    pub fn validate(&self) -> Result<(), GraphError> {
        let err = |m: String| Err(GraphError::Sampler(m));
        if !(self.rating_min.is_finite() && self.rating_max.is_finite()) || self.rating_min < 1.0 {
            return err("ratings must be finite and at least 1".into());
        }
        if self.rating_min > self.rating_max {
            return err(format!("rating_min {} exceeds rating_max {}", self.rating_min, self.rating_max));
        }
        if self.tactics.is_empty() {
            return err("no tactics to sample from".into());
        }
        if self.skill_min < MIN_TACTIC_SKILL || self.skill_max > MAX_TACTIC_SKILL || self.skill_min > self.skill_max {
            return err(format!("skill range must lie within {MIN_TACTIC_SKILL}..={MAX_TACTIC_SKILL}"));
        }
        if self.max_attempts == 0 {
            return err("max_attempts must be positive".into());
        }
        if let Some(h) = self.hatstats_min {
            let best = 9.0 * self.rating_max;
            if !h.is_finite() || h > best {
                return err(format!("hatstats_min {h} is unreachable; ratings up to {} give at most {best}", self.rating_max));
            }
        }
        Ok(())
    }
}

/// Discretisation of one group of numeric columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BinRule {
    /// `bins` intervals of equal width on `[min, max]`; values outside go to the end bins.
    EqualWidth { min: f64, max: f64, bins: u16 },
    /// Integer counts `0..cap` as themselves and everything from `cap` up as one label.
    Capped { cap: u32 },
}

impl BinRule {
    fn validate(&self, group: &str) -> Result<(), GraphError> {
        match *self {
            BinRule::EqualWidth { min, max, bins } => {
                if !(min.is_finite() && max.is_finite() && min < max) {
                    return Err(GraphError::BinSpec(format!("{group}: need finite min < max")));
                }
                if !(1..=99).contains(&bins) {
                    return Err(GraphError::BinSpec(format!("{group}: bins must be 1..=99")));
                }
            }
            BinRule::Capped { cap } => {
                if !(1..=99).contains(&cap) {
                    return Err(GraphError::BinSpec(format!("{group}: cap must be 1..=99")));
                }
            }
        }
        Ok(())
    }

    /// Labels sort in value order.
    pub fn label(&self, x: f64) -> String {
        match *self {
            BinRule::EqualWidth { min, max, bins } => {
                let w = (max - min) / bins as f64;
                let i = (((x - min) / w).floor().max(0.0) as u16).min(bins - 1);
                let lo = min + w * i as f64;
                format!("{i:02}_{lo:.2}_{:.2}", lo + w)
            }
            BinRule::Capped { cap } => {
                let v = x.max(0.0) as u32;
                if v >= cap {
                    format!("{cap:02}+")
                } else {
                    format!("{v:02}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BinSpec {
    /// Midfield and the attack and defence averages.
    pub ratings: BinRule,
    pub chances: BinRule,
    pub goals: BinRule,
    pub specialists: BinRule,
}

impl Default for BinSpec {
    fn default() -> Self {
        BinSpec {
            ratings: BinRule::EqualWidth { min: 5.0, max: 20.0, bins: 5 },
            chances: BinRule::Capped { cap: 8 },
            goals: BinRule::Capped { cap: 3 },
            specialists: BinRule::Capped { cap: 4 },
        }
    }
}

impl BinSpec {
    pub fn validate(&self) -> Result<(), GraphError> {
        self.ratings.validate("ratings")?;
        self.chances.validate("chances")?;
        self.goals.validate("goals")?;
        self.specialists.validate("specialists")
    }
}

/// Column names in emission order.
pub fn dataset_columns() -> Vec<String> {
    let per_side = [
        "midfield",
        "attack",
        "defence",
        "tactic",
        "specialists",
        "normal_chances",
        "goals_normal",
        "goals_setpiece",
        "goals_counter",
        "goals_special",
        "goals_total",
    ];
    let mut cols = Vec::new();
    for side in ["home", "away"] {
        cols.extend(per_side.iter().map(|c| format!("{side}_{c}")));
    }
    cols.push("hda".into());
    cols
}

fn rating<R: Rng>(spec: &SamplerSpec, rng: &mut R) -> Rating {
    Rating(rng.random_range(spec.rating_min..=spec.rating_max))
}

fn positions<R: Rng>(rng: &mut R) -> PositionCounts {
    let central_defenders = rng.random_range(1..=3u8);
    let wing_backs = rng.random_range(1..=2u8);
    let forwards = rng.random_range(1..=3u8);
    let used = central_defenders + wing_backs + forwards;
    let wingers = rng.random_range(0..=2u8.min(10 - used - 1));
    let inner_midfielders = 10 - used - wingers;
    PositionCounts {
        central_defenders,
        wing_backs,
        wingers,
        inner_midfielders,
        forwards,
        pdims: rng.random_range(0..=1u8.min(inner_midfielders)),
        pnfs: rng.random_range(0..=2u8.min(forwards)),
    }
}

fn roster<R: Rng>(pos: &PositionCounts, rng: &mut R) -> SpecialityRoster {
    let defenders = pos.defenders() as u8;
    let offensives = pos.offensives() as u8;
    let outfield = pos.outfield() as u8;
    let mut draw = |cap: u8| rng.random_range(0..=cap.min(2));
    SpecialityRoster {
        unpredictable_offensives: draw(offensives),
        unpredictable_sa_players: draw(outfield),
        unpredictable_lp_players: draw(defenders + 1),
        unpredictable_mistake_players: draw(defenders + pos.inner_midfielders),
        unpredictable_owngoal_players: draw(pos.wingers + pos.forwards),
        quick_offensives: draw(offensives),
        quick_defenders: draw(defenders),
        technical_offensives: draw(offensives),
        technical_defenders: draw(defenders),
        head_offensives: draw(offensives),
        corner_head_offensives: draw(outfield),
        corner_head_defensives: draw(outfield),
        head_defenders_or_ims: draw(defenders + pos.inner_midfielders),
    }
}

/// One random profile under `spec`.
pub fn sample_profile<R: Rng>(spec: &SamplerSpec, rng: &mut R) -> TeamProfile {
    let kind = spec.tactics[rng.random_range(0..spec.tactics.len())];
    let tactic = if kind == TacticKind::Normal {
        TacticSpec::normal()
    } else {
        TacticSpec::new(kind, rng.random_range(spec.skill_min..=spec.skill_max))
    };
    let positions = positions(rng);
    TeamProfile {
        left_att: rating(spec, rng),
        mid_att: rating(spec, rng),
        right_att: rating(spec, rng),
        left_def: rating(spec, rng),
        mid_def: rating(spec, rng),
        right_def: rating(spec, rng),
        midfield: rating(spec, rng),
        isp_att: rating(spec, rng),
        isp_def: rating(spec, rng),
        tactic,
        roster: roster(&positions, rng),
        positions,
    }
}

/// A team pair passing the HatStats filter, or `None` after `max_attempts` draws.
pub fn sample_pair<R: Rng>(spec: &SamplerSpec, rng: &mut R) -> Option<(TeamProfile, TeamProfile)> {
    for _ in 0..spec.max_attempts {
        let home = sample_profile(spec, rng);
        let away = sample_profile(spec, rng);
        let ok = spec.hatstats_min.is_none_or(|h| hatstats(&home) >= h && hatstats(&away) >= h);
        if ok {
            return Some((home, away));
        }
    }
    None
}

fn side_record(p: &TeamProfile, o: &htsim_core::sim::TeamOutcome, bins: &BinSpec) -> Vec<String> {
    let specialists: u32 = p.roster.fields().iter().map(|&(_, c)| u32::from(c)).sum();
    vec![
        bins.ratings.label(p.midfield.0),
        bins.ratings.label(p.avg_attack()),
        bins.ratings.label(p.avg_defence()),
        p.tactic.kind.label().to_string(),
        bins.specialists.label(specialists as f64),
        bins.chances.label(o.normal_chances as f64),
        bins.goals.label((o.goals_normal + o.goals_longshot) as f64),
        bins.goals.label(o.goals_setpiece as f64),
        bins.goals.label((o.goals_counter + o.goals_pnf) as f64),
        bins.goals.label(o.goals_special as f64),
        bins.goals.label(o.total() as f64),
    ]
}

fn record(home: &TeamProfile, away: &TeamProfile, m: &MatchOutcome, bins: &BinSpec) -> Vec<String> {
    let mut r = side_record(home, &m.home, bins);
    r.extend(side_record(away, &m.away, bins));
    r.push(m.hda().to_string());
    r
}

/// `n` rows, each from its own random stream, so the result does not depend
/// on the thread count.
pub fn generate_dataset(
    n: usize,
    sampler: &SamplerSpec,
    bins: &BinSpec,
    params: &EngineParams,
    seed: u64,
) -> Result<DiscreteDataset, GraphError> {
    if n == 0 {
        return Err(GraphError::Dataset("at least one row is required".into()));
    }
    sampler.validate()?;
    bins.validate()?;
    params.validate()?;
    let records: Vec<Vec<String>> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            let (home, away) = sample_pair(sampler, &mut rng).ok_or_else(|| {
                GraphError::Sampler(format!(
                    "row {i}: no pair passed the HatStats filter in {} attempts",
                    sampler.max_attempts
                ))
            })?;
            check_pair(&home, &away)?;
            let m = simulate_trial(&home, &away, params, &mut rng);
            Ok(record(&home, &away, &m, bins))
        })
        .collect::<Result<_, GraphError>>()?;
    DiscreteDataset::from_records(dataset_columns(), &records)
}
