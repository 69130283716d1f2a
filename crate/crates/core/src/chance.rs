//! Possession, normal-chance allocation and pressing.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Rating, TacticKind, TacticSpec, TeamProfile};
use crate::params::EngineParams;
use crate::rng::binomial;

pub const EXCLUSIVE_CHANCES: u32 = 5;
pub const SHARED_CHANCES: u32 = 5;

/// Midfields after the CA penalty, with counterattack eligibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMidfields {
    pub home: Rating,
    pub away: Rating,
    pub home_ca_eligible: bool,
    pub away_ca_eligible: bool,
}

/// A team playing CA loses `ca_midfield_penalty` of its midfield. It may
/// counterattack only if its midfield was strictly lower than the opponent's
/// before the penalty.
pub fn effective_midfields(home: &TeamProfile, away: &TeamProfile, params: &EngineParams) -> EffectiveMidfields {
    let factor = 1.0 - params.ca_midfield_penalty;
    let adjust = |p: &TeamProfile| {
        if p.tactic.is(TacticKind::CA) {
            Rating(p.midfield.0 * factor)
        } else {
            p.midfield
        }
    };
    EffectiveMidfields {
        home: adjust(home),
        away: adjust(away),
        home_ca_eligible: home.tactic.is(TacticKind::CA) && home.midfield.0 < away.midfield.0,
        away_ca_eligible: away.tactic.is(TacticKind::CA) && away.midfield.0 < home.midfield.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PossessionPair {
    pub pos_home: f64,
    pub pos_away: f64,
}

/// Cubic ratio of denominated midfields.
pub fn possession(mid_home: Rating, mid_away: Rating) -> PossessionPair {
    let h = mid_home.denominated().powi(3);
    let a = mid_away.denominated().powi(3);
    let pos_home = h / (h + a);
    PossessionPair {
        pos_home,
        pos_away: 1.0 - pos_home,
    }
}

/// Linear ratio of denominated midfields, used to allocate team events.
pub fn linear_possession(mid_home: Rating, mid_away: Rating) -> f64 {
    let h = mid_home.denominated();
    let a = mid_away.denominated();
    h / (h + a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChanceAllocation {
    pub exclusive_home: u32,
    pub exclusive_away: u32,
    pub shared_home: u32,
    pub shared_away: u32,
    pub normal_home: u32,
    pub normal_away: u32,
}

/// Five exclusive chances per team, each won with that team's possession;
/// five shared chances, each going to one side or the other.
pub fn allocate_chances<R: Rng + ?Sized>(pos: PossessionPair, rng: &mut R) -> ChanceAllocation {
    let exclusive_home = binomial(rng, EXCLUSIVE_CHANCES, pos.pos_home);
    let exclusive_away = binomial(rng, EXCLUSIVE_CHANCES, pos.pos_away);
    let shared_home = binomial(rng, SHARED_CHANCES, pos.pos_home);
    let shared_away = SHARED_CHANCES - shared_home;
    ChanceAllocation {
        exclusive_home,
        exclusive_away,
        shared_home,
        shared_away,
        normal_home: exclusive_home + shared_home,
        normal_away: exclusive_away + shared_away,
    }
}

/// Per-attack deletion probabilities caused by pressing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Suppression {
    /// Applied to both teams' normal attacks.
    pub normal: f64,
    /// Applied to the long shots of a side facing a pressing team.
    pub longshot: f64,
}

pub fn pressing_suppression(home: &TacticSpec, away: &TacticSpec, params: &EngineParams) -> Suppression {
    let tr = &params.tactic_ranges;
    let home_pr = home.is(TacticKind::PR);
    let away_pr = away.is(TacticKind::PR);
    let normal = match (home_pr, away_pr) {
        (true, true) => tr.pressing_both.rate((home.skill_f64() + away.skill_f64()) / 2.0),
        (true, false) => tr.pressing.rate(home.skill_f64()),
        (false, true) => tr.pressing.rate(away.skill_f64()),
        (false, false) => 0.0,
    };
    let longshot = if home_pr && away.is(TacticKind::LS) {
        tr.pressing_vs_ls.rate(home.skill_f64())
    } else if away_pr && home.is(TacticKind::LS) {
        tr.pressing_vs_ls.rate(away.skill_f64())
    } else {
        0.0
    };
    Suppression { normal, longshot }
}

/// Keep each of `n` items independently with probability `1 - p_delete`.
pub fn thin<R: Rng + ?Sized>(rng: &mut R, n: u32, p_delete: f64) -> u32 {
    n - binomial(rng, n, p_delete)
}
