//! Special events: how many occur, which kind, which team benefits and
//! whether they score.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::attack::score_open_play;
use crate::chance::linear_possession;
use crate::model::{Rating, TacticKind, TacticSpec, TeamProfile};
use crate::params::{step_lookup, EngineParams};
use crate::rng::{bernoulli, binomial, categorical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    WingerAny,
    TechOverHead,
    QuickRush,
    QuickPass,
    UnpredLongPass,
    UnpredScoreOwn,
    UnpredSpecial,
    UnpredMistake,
    UnpredOwnGoal,
    ExperiencedFwd,
    InexpDefender,
    TiredDefender,
    Corner,
}

impl EventKind {
    pub const ALL: [EventKind; 13] = [
        EventKind::WingerAny,
        EventKind::TechOverHead,
        EventKind::QuickRush,
        EventKind::QuickPass,
        EventKind::UnpredLongPass,
        EventKind::UnpredScoreOwn,
        EventKind::UnpredSpecial,
        EventKind::UnpredMistake,
        EventKind::UnpredOwnGoal,
        EventKind::ExperiencedFwd,
        EventKind::InexpDefender,
        EventKind::TiredDefender,
        EventKind::Corner,
    ];

    pub const PLAYER: [EventKind; 9] = [
        EventKind::WingerAny,
        EventKind::TechOverHead,
        EventKind::QuickRush,
        EventKind::QuickPass,
        EventKind::UnpredLongPass,
        EventKind::UnpredScoreOwn,
        EventKind::UnpredSpecial,
        EventKind::UnpredMistake,
        EventKind::UnpredOwnGoal,
    ];

    pub const TEAM: [EventKind; 4] = [
        EventKind::ExperiencedFwd,
        EventKind::InexpDefender,
        EventKind::TiredDefender,
        EventKind::Corner,
    ];

    pub fn is_player_based(self) -> bool {
        (self as usize) < 9
    }

    /// Events whose goal goes to the opponent of the triggering team.
    pub fn is_negative(self) -> bool {
        matches!(self, EventKind::UnpredMistake | EventKind::UnpredOwnGoal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Home,
    Away,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Home => Side::Away,
            Side::Away => Side::Home,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventOutcome {
    pub kind: EventKind,
    /// Team that triggered the event.
    pub beneficiary: Side,
    pub scored: bool,
    /// The goal, if any, counts for the other team.
    pub own_goal: bool,
}

impl EventOutcome {
    /// Team credited with the goal, if one was scored.
    pub fn scoring_side(&self) -> Option<Side> {
        match (self.scored, self.own_goal) {
            (false, _) => None,
            (true, false) => Some(self.beneficiary),
            (true, true) => Some(self.beneficiary.other()),
        }
    }
}

/// Event-rate multipliers from the PC tactic, per side.
pub fn pc_multipliers(home: &TacticSpec, away: &TacticSpec, params: &EngineParams) -> (f64, f64) {
    let tr = &params.tactic_ranges;
    match (home.is(TacticKind::PC), away.is(TacticKind::PC)) {
        (true, true) => {
            let m = tr.pc_both.eval((home.skill_f64() + away.skill_f64()) / 2.0);
            (m, m)
        }
        (true, false) => (tr.pc_self.eval(home.skill_f64()), tr.pc_opponent.eval(home.skill_f64())),
        (false, true) => (tr.pc_opponent.eval(away.skill_f64()), tr.pc_self.eval(away.skill_f64())),
        (false, false) => (1.0, 1.0),
    }
}

/// Binomial trial count and per-trial probability for team and player events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventCountModel {
    pub team_trials: u32,
    pub team_p: f64,
    pub player_trials: u32,
    pub player_p: f64,
}

pub fn event_count_model(home: &TacticSpec, away: &TacticSpec, params: &EngineParams) -> EventCountModel {
    let ev = &params.events;
    let pc = home.is(TacticKind::PC) || away.is(TacticKind::PC);
    let (mh, ma) = pc_multipliers(home, away, params);
    let factor = (mh + ma) / 2.0;
    let extra = if pc { ev.pc_extra_trials } else { 0 };
    let team_trials = ev.team_trials + extra;
    let player_trials = ev.player_trials + extra;
    EventCountModel {
        team_trials,
        team_p: (ev.team_mean * factor / f64::from(team_trials)).clamp(0.0, 1.0),
        player_trials,
        player_p: (ev.player_mean * factor / f64::from(player_trials)).clamp(0.0, 1.0),
    }
}

/// `(team events, player events)` in one match.
pub fn event_counts<R: Rng + ?Sized>(
    home: &TacticSpec,
    away: &TacticSpec,
    params: &EngineParams,
    rng: &mut R,
) -> (u32, u32) {
    let m = event_count_model(home, away, params);
    (binomial(rng, m.team_trials, m.team_p), binomial(rng, m.player_trials, m.player_p))
}

/// Players on `team` able to trigger `kind`, given the opponent.
pub fn enablers(kind: EventKind, team: &TeamProfile, opp: &TeamProfile) -> u32 {
    let r = &team.roster;
    let p = &team.positions;
    let n = match kind {
        EventKind::WingerAny => p.wingers,
        EventKind::TechOverHead => {
            if opp.roster.head_defenders_or_ims > 0 {
                r.technical_offensives
            } else {
                0
            }
        }
        EventKind::QuickRush | EventKind::QuickPass => r.quick_offensives,
        EventKind::UnpredLongPass => r.unpredictable_lp_players,
        EventKind::UnpredScoreOwn => r.unpredictable_offensives,
        EventKind::UnpredSpecial => r.unpredictable_sa_players,
        EventKind::UnpredMistake => r.unpredictable_mistake_players,
        EventKind::UnpredOwnGoal => r.unpredictable_owngoal_players,
        EventKind::ExperiencedFwd => p.forwards,
        EventKind::InexpDefender => opp.positions.defenders() as u8,
        EventKind::TiredDefender | EventKind::Corner => 1,
    };
    u32::from(n)
}

/// Player events that at least one side can trigger.
pub fn feasible_player_events(home: &TeamProfile, away: &TeamProfile) -> Vec<EventKind> {
    EventKind::PLAYER
        .into_iter()
        .filter(|&k| enablers(k, home, away) + enablers(k, away, home) > 0)
        .collect()
}

/// Selection probabilities over `feasible`, renormalised base frequencies.
pub fn player_event_distribution(feasible: &[EventKind], params: &EngineParams) -> Vec<(EventKind, f64)> {
    let weights: Vec<f64> = feasible
        .iter()
        .map(|k| params.player_event_frequencies.get(k).copied().unwrap_or(0.0))
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    feasible.iter().zip(weights).map(|(&k, w)| (k, w / total)).collect()
}

/// Draw a player event kind; `None` when nothing is feasible.
pub fn select_player_event<R: Rng + ?Sized>(
    feasible: &[EventKind],
    params: &EngineParams,
    rng: &mut R,
) -> Option<EventKind> {
    let dist = player_event_distribution(feasible, params);
    let weights: Vec<f64> = dist.iter().map(|&(_, p)| p).collect();
    categorical(rng, &weights).map(|i| dist[i].0)
}

/// Frequency multiplier for experienced-forward / inexperienced-defender
/// events, linear in the number of relevant players.
pub fn scale_expfwd_inexpdef(kind: EventKind, relevant_count: u32, params: &EngineParams) -> f64 {
    let reference = match kind {
        EventKind::ExperiencedFwd => params.events.expfwd_reference,
        EventKind::InexpDefender => params.events.inexpdef_reference,
        _ => return 1.0,
    };
    f64::from(relevant_count) / reference
}

/// Team-event kind weights for this pairing: base frequencies, with the
/// forward and defender events scaled by the average of both sides' counts.
pub fn team_event_weights(home: &TeamProfile, away: &TeamProfile, params: &EngineParams) -> Vec<(EventKind, f64)> {
    EventKind::TEAM
        .into_iter()
        .map(|k| {
            let base = params.team_event_frequencies.get(&k).copied().unwrap_or(0.0);
            let scale = match k {
                EventKind::ExperiencedFwd => {
                    (scale_expfwd_inexpdef(k, u32::from(home.positions.forwards), params)
                        + scale_expfwd_inexpdef(k, u32::from(away.positions.forwards), params))
                        / 2.0
                }
                EventKind::InexpDefender => {
                    (scale_expfwd_inexpdef(k, home.positions.defenders(), params)
                        + scale_expfwd_inexpdef(k, away.positions.defenders(), params))
                        / 2.0
                }
                _ => 1.0,
            };
            (k, base * scale)
        })
        .collect()
}

pub fn select_team_event<R: Rng + ?Sized>(
    home: &TeamProfile,
    away: &TeamProfile,
    params: &EngineParams,
    rng: &mut R,
) -> Option<EventKind> {
    let w = team_event_weights(home, away, params);
    let weights: Vec<f64> = w.iter().map(|&(_, x)| x).collect();
    categorical(rng, &weights).map(|i| w[i].0)
}

/// Probability that `kind` goes to the home side, before PC weighting.
/// `None` when neither side can trigger it.
pub fn home_share(kind: EventKind, home: &TeamProfile, away: &TeamProfile, mids: (Rating, Rating)) -> Option<f64> {
    match kind {
        EventKind::Corner | EventKind::TiredDefender => Some(linear_possession(mids.0, mids.1)),
        _ => {
            let h = f64::from(enablers(kind, home, away));
            let a = f64::from(enablers(kind, away, home));
            if h + a == 0.0 {
                None
            } else {
                Some(h / (h + a))
            }
        }
    }
}

/// Pick the triggering side. PC multipliers tilt the split toward the side
/// with more event inflation.
pub fn allocate_event<R: Rng + ?Sized>(
    kind: EventKind,
    home: &TeamProfile,
    away: &TeamProfile,
    mids: (Rating, Rating),
    pc: (f64, f64),
    rng: &mut R,
) -> Option<Side> {
    let share = home_share(kind, home, away, mids)?;
    let wh = share * pc.0;
    let wa = (1.0 - share) * pc.1;
    if wh + wa <= 0.0 {
        return None;
    }
    Some(if bernoulli(rng, wh / (wh + wa)) { Side::Home } else { Side::Away })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CornerSubtype {
    CornerToHead,
    CornerToAnyone,
}

pub fn corner_to_head_probability(offensive_headers: u32, params: &EngineParams) -> f64 {
    if offensive_headers == 0 {
        return 0.0;
    }
    step_lookup(&params.events.corner_head_probs, offensive_headers).unwrap_or(0.0)
}

pub fn corner_subtype<R: Rng + ?Sized>(offensive_headers: u32, params: &EngineParams, rng: &mut R) -> CornerSubtype {
    if bernoulli(rng, corner_to_head_probability(offensive_headers, params)) {
        CornerSubtype::CornerToHead
    } else {
        CornerSubtype::CornerToAnyone
    }
}

/// Scoring probability of a corner headed by one of `a` offensive headers
/// against `b` defensive headers.
pub fn score_corner_to_head(a: u32, b: u32) -> f64 {
    let (af, bf) = (f64::from(a), f64::from(b));
    if a == 0 {
        return 0.0;
    }
    let base = af / (af + bf);
    let v = if a > b {
        base
    } else if a == b {
        base - 0.05 * (1.0 + 0.1 * (bf - 1.0))
    } else {
        base * af / bf
    };
    v.clamp(0.0, 1.0)
}

/// Average conversion of the attacking side's two wing pairings.
pub fn winger_any_score(att: &TeamProfile, def: &TeamProfile) -> f64 {
    (score_open_play(att.left_att, def.right_def) + score_open_play(att.right_att, def.left_def)) / 2.0
}

pub fn winger_to_head_score(anyone: f64, params: &EngineParams) -> f64 {
    (anyone + params.events.winger_head_bonus).clamp(0.0, 1.0)
}

pub fn winger_head_probability(head_offensives: u32, params: &EngineParams) -> f64 {
    if head_offensives == 0 {
        return 0.0;
    }
    step_lookup(&params.events.winger_head_probs, head_offensives).unwrap_or(0.0)
}

/// Flat per-kind scoring probability; winger and corner events refine this
/// in [`resolve_event`].
pub fn score_event(kind: EventKind, att: &TeamProfile, def: &TeamProfile, params: &EngineParams) -> f64 {
    match kind {
        EventKind::WingerAny => winger_any_score(att, def),
        _ => params.score_probs.get(&kind).copied().unwrap_or(0.0),
    }
}

/// Score an allocated event.
pub fn resolve_event<R: Rng + ?Sized>(
    kind: EventKind,
    side: Side,
    home: &TeamProfile,
    away: &TeamProfile,
    params: &EngineParams,
    rng: &mut R,
) -> EventOutcome {
    let (att, def) = match side {
        Side::Home => (home, away),
        Side::Away => (away, home),
    };
    let p = match kind {
        EventKind::WingerAny => {
            let anyone = winger_any_score(att, def);
            let headers = u32::from(att.roster.head_offensives);
            if bernoulli(rng, winger_head_probability(headers, params)) {
                winger_to_head_score(anyone, params)
            } else {
                anyone
            }
        }
        EventKind::Corner => {
            let a = u32::from(att.roster.corner_head_offensives);
            match corner_subtype(a, params, rng) {
                CornerSubtype::CornerToHead => {
                    score_corner_to_head(a, u32::from(def.roster.corner_head_defensives))
                }
                CornerSubtype::CornerToAnyone => score_event(kind, att, def, params),
            }
        }
        _ => score_event(kind, att, def, params),
    };
    EventOutcome {
        kind,
        beneficiary: side,
        scored: bernoulli(rng, p),
        own_goal: kind.is_negative(),
    }
}

/// Every special event of one match, allocated and resolved. `mids` are the
/// effective midfields used for possession-based allocation.
pub fn draw_events<R: Rng + ?Sized>(
    home: &TeamProfile,
    away: &TeamProfile,
    mids: (Rating, Rating),
    params: &EngineParams,
    rng: &mut R,
) -> Vec<EventOutcome> {
    let (n_team, n_player) = event_counts(&home.tactic, &away.tactic, params, rng);
    let pc = pc_multipliers(&home.tactic, &away.tactic, params);
    let feasible = feasible_player_events(home, away);
    let mut out = Vec::new();
    for i in 0..n_team + n_player {
        let kind = if i < n_team {
            select_team_event(home, away, params, rng)
        } else {
            select_player_event(&feasible, params, rng)
        };
        let Some(kind) = kind else { continue };
        let Some(side) = allocate_event(kind, home, away, mids, pc, rng) else {
            continue;
        };
        out.push(resolve_event(kind, side, home, away, params, rng));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::nm_profile;
    use crate::rng::substream;

    fn params() -> EngineParams {
        EngineParams::kb_probabilistic()
    }

    #[test]
    fn kind_partition() {
        assert_eq!(EventKind::ALL.iter().filter(|k| k.is_player_based()).count(), 9);
        assert!(EventKind::TEAM.iter().all(|k| !k.is_player_based()));
        assert!(EventKind::UnpredOwnGoal.is_negative());
        assert!(!EventKind::QuickRush.is_negative());
    }

    #[test]
    fn count_means_without_pc() {
        let p = params();
        let m = event_count_model(&TacticSpec::normal(), &TacticSpec::normal(), &p);
        assert_eq!((m.team_trials, m.player_trials), (5, 4));
        assert!((m.team_p - 0.0744).abs() < 1e-12);
        assert!((m.player_p - 0.21025).abs() < 1e-12);

        let mut rng = substream(4, 0);
        let n = 100_000;
        let (mut t, mut pl) = (0u64, 0u64);
        for _ in 0..n {
            let (a, b) = event_counts(&TacticSpec::normal(), &TacticSpec::normal(), &p, &mut rng);
            t += u64::from(a);
            pl += u64::from(b);
        }
        assert!((t as f64 / n as f64 - 0.372).abs() < 0.01);
        assert!((pl as f64 / n as f64 - 0.841).abs() < 0.01);
    }

    #[test]
    fn both_pc_triples_events() {
        let p = params();
        let pc = TacticSpec::new(TacticKind::PC, 15);
        let m = event_count_model(&pc, &pc, &p);
        assert_eq!((m.team_trials, m.player_trials), (7, 6));
        let expected = (0.372 + 0.841) * 3.05;
        let mean = m.team_p * 7.0 + m.player_p * 6.0;
        assert!((mean - expected).abs() < 1e-12);
    }

    #[test]
    fn one_side_pc_multipliers() {
        let p = params();
        let pc = TacticSpec::new(TacticKind::PC, 20);
        let (mh, ma) = pc_multipliers(&pc, &TacticSpec::normal(), &p);
        assert!((mh - 3.80).abs() < 1e-12);
        assert!((ma - 1.88).abs() < 1e-12);
        let (mh, ma) = pc_multipliers(&TacticSpec::normal(), &TacticSpec::new(TacticKind::PC, 1), &p);
        assert!((mh - 1.63).abs() < 1e-12);
        assert!((ma - 2.37).abs() < 1e-12);
    }

    #[test]
    fn selection_renormalises() {
        let p = params();
        let all = EventKind::PLAYER.to_vec();
        let d = player_event_distribution(&all, &p);
        assert!((d[0].1 - 0.2572).abs() < 1e-12);
        let no_unpred: Vec<EventKind> = all.iter().copied().filter(|k| (*k as usize) < 4).collect();
        let d = player_event_distribution(&no_unpred, &p);
        assert!((d[0].1 - 0.2572 / 0.7069).abs() < 1e-12);
        assert!((d[0].1 - 0.3638).abs() < 1e-4);
        let mut rng = substream(1, 0);
        assert_eq!(select_player_event(&[EventKind::QuickRush], &p, &mut rng), Some(EventKind::QuickRush));
        assert_eq!(select_player_event(&[], &p, &mut rng), None);
    }

    #[test]
    fn allocation_shares() {
        let mut home = nm_profile();
        let mut away = nm_profile();
        home.roster.quick_offensives = 2;
        away.roster.quick_offensives = 1;
        let mids = (Rating(17.0), Rating(14.0));
        let s = home_share(EventKind::QuickRush, &home, &away, mids).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-12);
        let s = home_share(EventKind::Corner, &home, &away, mids).unwrap();
        assert!((s - 65.0 / 118.0).abs() < 1e-12);
        assert!((s - 0.5508).abs() < 1e-4);
        let s = home_share(EventKind::Corner, &home, &away, (Rating(9.0), Rating(9.0))).unwrap();
        assert_eq!(s, 0.5);
        home.roster.quick_offensives = 0;
        away.roster.quick_offensives = 0;
        assert_eq!(home_share(EventKind::QuickRush, &home, &away, mids), None);
    }

    #[test]
    fn tech_over_head_needs_opposing_header() {
        let home = nm_profile();
        let mut away = nm_profile();
        assert_eq!(enablers(EventKind::TechOverHead, &home, &away), 1);
        away.roster.head_defenders_or_ims = 0;
        assert_eq!(enablers(EventKind::TechOverHead, &home, &away), 0);
    }

    #[test]
    fn inexperienced_defender_weights_opponent_defence() {
        let mut home = nm_profile();
        let away = nm_profile();
        home.positions.central_defenders = 3;
        let s = home_share(EventKind::InexpDefender, &home, &away, (Rating(15.0), Rating(15.0))).unwrap();
        assert!((s - 3.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn corner_head_table() {
        let p = params();
        assert_eq!(corner_to_head_probability(0, &p), 0.0);
        assert_eq!(corner_to_head_probability(1, &p), 0.27);
        assert_eq!(corner_to_head_probability(5, &p), 0.65);
        assert_eq!(corner_to_head_probability(8, &p), 0.65);
    }

    #[test]
    fn corner_to_head_branches() {
        assert!((score_corner_to_head(1, 1) - 0.45).abs() < 1e-12);
        assert!((score_corner_to_head(2, 1) - 2.0 / 3.0).abs() < 1e-12);
        assert!((score_corner_to_head(1, 2) - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(score_corner_to_head(3, 0), 1.0);
    }

    #[test]
    fn event_scores() {
        let p = params();
        let nm = nm_profile();
        assert!((score_event(EventKind::QuickRush, &nm, &nm, &p) - 0.3670).abs() < 1e-12);
        assert!((score_event(EventKind::ExperiencedFwd, &nm, &nm, &p) - 0.3704).abs() < 1e-12);
        assert!((score_event(EventKind::WingerAny, &nm, &nm, &p) - 0.46).abs() < 1e-12);
        assert!((winger_to_head_score(0.42, &p) - 0.53).abs() < 1e-12);
    }

    #[test]
    fn forward_defender_scaling() {
        let p = params();
        assert_eq!(scale_expfwd_inexpdef(EventKind::ExperiencedFwd, 0, &p), 0.0);
        assert_eq!(scale_expfwd_inexpdef(EventKind::ExperiencedFwd, 2, &p), 1.0);
        assert_eq!(scale_expfwd_inexpdef(EventKind::ExperiencedFwd, 3, &p), 1.5);
        assert_eq!(scale_expfwd_inexpdef(EventKind::InexpDefender, 7, &p), 2.0);
    }

    #[test]
    fn own_goals_credit_opponent() {
        let o = EventOutcome {
            kind: EventKind::UnpredOwnGoal,
            beneficiary: Side::Home,
            scored: true,
            own_goal: true,
        };
        assert_eq!(o.scoring_side(), Some(Side::Away));
    }
}
