//! Where attacks go and whether they score.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Rating, TacticKind, TacticSpec, TeamProfile};
use crate::params::{step_lookup, EngineParams, Variant};
use crate::rng::{binomial, categorical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    Left,
    Middle,
    Right,
    Dfk,
    Ifk,
    Pk,
    LongShot,
}

impl Sector {
    pub const ALL: [Sector; 7] = [
        Sector::Left,
        Sector::Middle,
        Sector::Right,
        Sector::Dfk,
        Sector::Ifk,
        Sector::Pk,
        Sector::LongShot,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorDistribution {
    pub probs: [f64; 7],
}

impl SectorDistribution {
    pub fn get(&self, s: Sector) -> f64 {
        self.probs[s.index()]
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn wings(&self) -> f64 {
        self.get(Sector::Left) + self.get(Sector::Right)
    }
}

/// Baseline sector shares with the tactic's redistribution applied. Every
/// step moves mass between categories, so the total stays 1.
pub fn sector_distribution(tactic: &TacticSpec, params: &EngineParams) -> SectorDistribution {
    let sp = &params.sector_probs;
    let (mut l, mut m, mut r) = (sp.left, sp.middle, sp.right);
    let mut ls = 0.0;
    let tr = &params.tactic_ranges;
    let skill = tactic.skill_f64();

    match tactic.kind {
        TacticKind::AiM => {
            let tcr = tr.aim.rate(skill);
            m += tcr * (l + r);
            l *= 1.0 - tcr;
            r *= 1.0 - tcr;
        }
        TacticKind::AoW => {
            let tcr = tr.aow.rate(skill);
            let moved = tcr * m;
            l += moved / 2.0;
            r += moved / 2.0;
            m -= moved;
        }
        _ => {}
    }

    let ls_rate = if tactic.is(TacticKind::LS) {
        tr.ls.rate(skill)
    } else {
        params.nontactical_ls
    };
    if ls_rate > 0.0 {
        ls = ls_rate * (l + m + r);
        l *= 1.0 - ls_rate;
        m *= 1.0 - ls_rate;
        r *= 1.0 - ls_rate;
    }

    SectorDistribution {
        probs: [l, m, r, sp.dfk, sp.ifk, sp.pk, ls],
    }
}

/// Baseline shares renormalised without penalties, for counterattacks.
pub fn counterattack_distribution(params: &EngineParams) -> SectorDistribution {
    let sp = &params.sector_probs;
    let total = sp.left + sp.middle + sp.right + sp.dfk + sp.ifk;
    SectorDistribution {
        probs: [
            sp.left / total,
            sp.middle / total,
            sp.right / total,
            sp.dfk / total,
            sp.ifk / total,
            0.0,
            0.0,
        ],
    }
}

/// One multinomial draw of `n` attacks over the seven categories.
pub fn assign_sectors<R: Rng + ?Sized>(n: u32, dist: &SectorDistribution, rng: &mut R) -> [u32; 7] {
    let mut counts = [0u32; 7];
    for _ in 0..n {
        if let Some(i) = categorical(rng, &dist.probs) {
            counts[i] += 1;
        }
    }
    counts
}

const OPEN_PLAY_CEILING: f64 = 0.92;
const OPEN_PLAY_EXPONENT: f64 = 3.5;

/// Open-play conversion: `0.92 a^3.5 / (a^3.5 + d^3.5)` on denominated ratings.
/// Attack sectors face the mirrored defence sector of the opponent.
pub fn score_open_play(att: Rating, def: Rating) -> f64 {
    let a = att.denominated().powf(OPEN_PLAY_EXPONENT);
    let d = def.denominated().powf(OPEN_PLAY_EXPONENT);
    OPEN_PLAY_CEILING * a / (a + d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetPieceKind {
    Dfk,
    Ifk,
    Pk,
}

/// The ISP cubic at `isp_att - isp_def`, with the difference clamped to the
/// fitted domain and the result to `[0, 1]`.
pub fn set_piece_curve(diff: f64, params: &EngineParams) -> f64 {
    let sp = &params.set_piece;
    let x = diff.clamp(sp.diff_min, sp.diff_max);
    let c = &sp.cubic;
    (c[0] + x * (c[1] + x * (c[2] + x * c[3]))).clamp(0.0, 1.0)
}

pub fn score_set_piece(kind: SetPieceKind, isp_att: Rating, isp_def: Rating, params: &EngineParams) -> f64 {
    let curve = set_piece_curve(isp_att.0 - isp_def.0, params);
    let sp = &params.set_piece;
    match (kind, params.variant) {
        (SetPieceKind::Pk, Variant::KbProbabilistic) => params.pk_score,
        (SetPieceKind::Pk, Variant::KbRegression) => curve,
        (SetPieceKind::Dfk, _) => (curve * sp.dfk_multiplier).clamp(0.0, 1.0),
        (SetPieceKind::Ifk, _) => (curve * sp.ifk_multiplier).clamp(0.0, 1.0),
    }
}

/// Long-shot conversion, linear in `skill - opp_avg_def` across the domain.
pub fn score_long_shot(tactic_skill: f64, opp_avg_def: f64, params: &EngineParams) -> f64 {
    let ls = &params.long_shot;
    let t = ((tactic_skill - opp_avg_def - ls.diff_min) / (ls.diff_max - ls.diff_min)).clamp(0.0, 1.0);
    ls.score_low + (ls.score_high - ls.score_low) * t
}

/// Conversion rate of an opponent's missed chance into a (non-technical)
/// counterattack.
pub fn counterattack_rate(profile: &TeamProfile, ca_eligible: bool, params: &EngineParams) -> f64 {
    if ca_eligible {
        return params.tactic_ranges.ca.rate(profile.tactic.skill_f64());
    }
    let defenders = profile.positions.defenders();
    step_lookup(&params.ca_nontactical_rates, defenders)
        .or_else(|| params.ca_nontactical_rates.values().next().copied())
        .unwrap_or(0.0)
}

pub fn technical_counterattack_rate(profile: &TeamProfile, params: &EngineParams) -> f64 {
    if profile.roster.technical_defenders == 0 {
        return 0.0;
    }
    let defenders = profile.positions.defenders();
    step_lookup(&params.tech_ca_rates, defenders)
        .or_else(|| params.tech_ca_rates.values().next().copied())
        .unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counterattacks {
    pub regular: u32,
    pub technical: u32,
}

impl Counterattacks {
    pub fn total(&self) -> u32 {
        self.regular + self.technical
    }
}

/// Each missed opponent chance yields at most one regular counterattack, plus
/// an independent technical-defender counterattack.
pub fn generate_counterattacks<R: Rng + ?Sized>(
    missed_opponent_normals: u32,
    profile: &TeamProfile,
    ca_eligible: bool,
    params: &EngineParams,
    rng: &mut R,
) -> Counterattacks {
    let regular = binomial(rng, missed_opponent_normals, counterattack_rate(profile, ca_eligible, params));
    let technical = binomial(
        rng,
        missed_opponent_normals,
        technical_counterattack_rate(profile, params),
    );
    Counterattacks { regular, technical }
}

pub fn pnf_rate(pnfs: u32, opp_cds: u32, params: &EngineParams) -> f64 {
    if pnfs == 0 {
        return 0.0;
    }
    let key = u8::try_from(pnfs).unwrap_or(u8::MAX);
    params
        .pnf_table
        .range(..=key)
        .next_back()
        .and_then(|(_, row)| step_lookup(row, opp_cds))
        .unwrap_or(0.0)
}

/// Extra attacks created by powerful normal forwards from missed chances.
pub fn pnf_extra_attacks<R: Rng + ?Sized>(
    missed_normals: u32,
    pnfs: u32,
    opp_cds: u32,
    params: &EngineParams,
    rng: &mut R,
) -> u32 {
    binomial(rng, missed_normals, pnf_rate(pnfs, opp_cds, params))
}

pub fn pdim_block_rate(pdims: u32, params: &EngineParams) -> f64 {
    if pdims == 0 {
        return 0.0;
    }
    step_lookup(&params.pdim_block, pdims).unwrap_or(0.0)
}

/// Number of opponent normal attacks blocked by defensive inner midfielders.
pub fn pdim_blocks<R: Rng + ?Sized>(opp_normal_attacks: u32, pdims: u32, params: &EngineParams, rng: &mut R) -> u32 {
    binomial(rng, opp_normal_attacks, pdim_block_rate(pdims, params))
}

/// Per-category attack and goal counts for one team's normal chances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AttackTally {
    pub attacks: [u32; 7],
    pub goals: [u32; 7],
    pub missed_normal: u32,
}

impl AttackTally {
    pub fn open_play_goals(&self) -> u32 {
        self.goals[0] + self.goals[1] + self.goals[2]
    }

    pub fn set_piece_goals(&self) -> u32 {
        self.goals[3] + self.goals[4] + self.goals[5]
    }

    pub fn long_shot_goals(&self) -> u32 {
        self.goals[6]
    }

    pub fn total_goals(&self) -> u32 {
        self.goals.iter().sum()
    }
}

/// Scoring probability of an attack by `att` against `def` in a category.
pub fn category_score(sector: Sector, att: &TeamProfile, def: &TeamProfile, params: &EngineParams) -> f64 {
    match sector {
        Sector::Left => score_open_play(att.left_att, def.right_def),
        Sector::Middle => score_open_play(att.mid_att, def.mid_def),
        Sector::Right => score_open_play(att.right_att, def.left_def),
        Sector::Dfk => score_set_piece(SetPieceKind::Dfk, att.isp_att, def.isp_def, params),
        Sector::Ifk => score_set_piece(SetPieceKind::Ifk, att.isp_att, def.isp_def, params),
        Sector::Pk => score_set_piece(SetPieceKind::Pk, att.isp_att, def.isp_def, params),
        Sector::LongShot => {
            let skill = if att.tactic.is(TacticKind::LS) {
                att.tactic.skill_f64()
            } else {
                params.long_shot.nontactical_skill
            };
            score_long_shot(skill, def.avg_defence(), params)
        }
    }
}

/// Resolve already-assigned attacks; goals drawn per category.
pub fn resolve_attacks<R: Rng + ?Sized>(
    attacks: [u32; 7],
    att: &TeamProfile,
    def: &TeamProfile,
    params: &EngineParams,
    rng: &mut R,
) -> AttackTally {
    let mut goals = [0u32; 7];
    for s in Sector::ALL {
        let n = attacks[s.index()];
        if n > 0 {
            goals[s.index()] = binomial(rng, n, category_score(s, att, def, params));
        }
    }
    let total_attacks: u32 = attacks.iter().sum();
    let total_goals: u32 = goals.iter().sum();
    AttackTally {
        attacks,
        goals,
        missed_normal: total_attacks - total_goals,
    }
}
