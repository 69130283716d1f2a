//! The three reference team profiles used for decision analysis: Normal (NM),
//! counterattack (CA) and long shots (LS).
//!
//! Roster mapping notes. A single "Unpred. defender" fires long passes,
//! special actions and mistakes; unpredictable offensives are taken to be
//! wingers or forwards, so they also count toward own-goal and special-action
//! players. A Head inner midfielder or Head defender both attacks and defends
//! corners. The "Powerful defender" only acts through weather and man-marking,
//! which enter via the input ratings, so it has no roster field.

use std::collections::BTreeMap;

use crate::model::{
    PositionCounts, Rating, SpecialityRoster, TacticKind, TacticSpec, TeamProfile,
};

fn ratings(def: f64, att: f64, mid: f64, isp_def: f64, isp_att: f64) -> [Rating; 9] {
    [att, att, att, def, def, def, mid, isp_att, isp_def].map(Rating)
}

fn build(
    r: [Rating; 9],
    tactic: TacticSpec,
    roster: SpecialityRoster,
    positions: PositionCounts,
) -> TeamProfile {
    TeamProfile {
        left_att: r[0],
        mid_att: r[1],
        right_att: r[2],
        left_def: r[3],
        mid_def: r[4],
        right_def: r[5],
        midfield: r[6],
        isp_att: r[7],
        isp_def: r[8],
        tactic,
        roster,
        positions,
    }
}

pub fn nm_profile() -> TeamProfile {
    build(
        ratings(15.0, 15.0, 15.0, 15.0, 10.0),
        TacticSpec::normal(),
        SpecialityRoster {
            unpredictable_offensives: 2,
            unpredictable_sa_players: 3,
            unpredictable_lp_players: 1,
            unpredictable_mistake_players: 1,
            unpredictable_owngoal_players: 2,
            quick_offensives: 2,
            quick_defenders: 1,
            technical_offensives: 1,
            technical_defenders: 0,
            head_offensives: 0,
            corner_head_offensives: 1,
            corner_head_defensives: 1,
            head_defenders_or_ims: 1,
        },
        PositionCounts {
            central_defenders: 1,
            wing_backs: 2,
            wingers: 2,
            inner_midfielders: 3,
            forwards: 2,
            pdims: 0,
            pnfs: 1,
        },
    )
}

pub fn ca_profile() -> TeamProfile {
    build(
        ratings(20.0, 15.0, 10.0, 15.0, 10.0),
        TacticSpec::new(TacticKind::CA, 20),
        SpecialityRoster {
            unpredictable_offensives: 2,
            unpredictable_sa_players: 3,
            unpredictable_lp_players: 1,
            unpredictable_mistake_players: 1,
            unpredictable_owngoal_players: 2,
            quick_offensives: 2,
            quick_defenders: 1,
            technical_offensives: 1,
            technical_defenders: 1,
            head_offensives: 0,
            corner_head_offensives: 0,
            corner_head_defensives: 0,
            head_defenders_or_ims: 0,
        },
        PositionCounts {
            central_defenders: 2,
            wing_backs: 2,
            wingers: 2,
            inner_midfielders: 2,
            forwards: 2,
            pdims: 0,
            pnfs: 1,
        },
    )
}

pub fn ls_profile() -> TeamProfile {
    build(
        ratings(20.0, 5.0, 15.0, 20.0, 15.0),
        TacticSpec::new(TacticKind::LS, 20),
        SpecialityRoster {
            unpredictable_offensives: 2,
            unpredictable_sa_players: 3,
            unpredictable_lp_players: 1,
            unpredictable_mistake_players: 1,
            unpredictable_owngoal_players: 2,
            quick_offensives: 1,
            quick_defenders: 1,
            technical_offensives: 0,
            technical_defenders: 1,
            head_offensives: 0,
            corner_head_offensives: 1,
            corner_head_defensives: 1,
            head_defenders_or_ims: 1,
        },
        PositionCounts {
            central_defenders: 3,
            wing_backs: 2,
            wingers: 2,
            inner_midfielders: 3,
            forwards: 0,
            pdims: 1,
            pnfs: 0,
        },
    )
}

/// The reference profiles keyed `NM`, `CA`, `LS`.
pub fn preset_profiles() -> BTreeMap<&'static str, TeamProfile> {
    BTreeMap::from([("NM", nm_profile()), ("CA", ca_profile()), ("LS", ls_profile())])
}
