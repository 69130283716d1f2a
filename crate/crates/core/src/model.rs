//! Team-level inputs to the engine and the rating arithmetic shared by every
//! mechanism.
//!
//! Ratings are continuous values on the in-game scale. Most formulas work on
//! the *denominated* form `4r - 3`, which maps the lowest legal rating (1) to 1
//! and keeps every ratio in the engine strictly positive.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;

/// A sector, midfield or set-piece rating on the in-game scale.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rating(pub f64);

impl Rating {
    pub fn value(self) -> f64 {
        self.0
    }

    /// `4r - 3` without validation. Callers must hold a validated profile.
    pub fn denominated(self) -> f64 {
        4.0 * self.0 - 3.0
    }
}

impl From<f64> for Rating {
    fn from(v: f64) -> Self {
        Rating(v)
    }
}

/// Checked denomination of a rating, naming the offending field on failure.
pub fn denominate(field: &str, r: Rating) -> Result<f64, EngineError> {
    if !r.0.is_finite() || r.0 < 1.0 {
        return Err(EngineError::RatingBelowOne {
            field: field.to_string(),
            value: r.0,
        });
    }
    Ok(r.denominated())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TacticKind {
    Normal,
    AiM,
    AoW,
    CA,
    LS,
    PR,
    PC,
}

impl TacticKind {
    pub const ALL: [TacticKind; 7] = [
        TacticKind::Normal,
        TacticKind::AiM,
        TacticKind::AoW,
        TacticKind::CA,
        TacticKind::LS,
        TacticKind::PR,
        TacticKind::PC,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TacticKind::Normal => "Normal",
            TacticKind::AiM => "AiM",
            TacticKind::AoW => "AoW",
            TacticKind::CA => "CA",
            TacticKind::LS => "LS",
            TacticKind::PR => "PR",
            TacticKind::PC => "PC",
        }
    }
}

impl std::str::FromStr for TacticKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TacticKind::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown tactic `{s}`"))
    }
}

pub const MIN_TACTIC_SKILL: u8 = 1;
pub const MAX_TACTIC_SKILL: u8 = 20;

/// Tactic choice plus execution skill. Skill is ignored for `Normal`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TacticSpec {
    pub kind: TacticKind,
    #[serde(default)]
    pub skill: u8,
}

impl TacticSpec {
    pub fn normal() -> Self {
        TacticSpec {
            kind: TacticKind::Normal,
            skill: 0,
        }
    }

    pub fn new(kind: TacticKind, skill: u8) -> Self {
        TacticSpec { kind, skill }
    }

    pub fn is(&self, kind: TacticKind) -> bool {
        self.kind == kind
    }

    pub fn skill_f64(&self) -> f64 {
        f64::from(self.skill)
    }
}

/// Number of fielded players carrying each speciality, split by the role in
/// which the speciality can fire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpecialityRoster {
    pub unpredictable_offensives: u8,
    pub unpredictable_sa_players: u8,
    pub unpredictable_lp_players: u8,
    pub unpredictable_mistake_players: u8,
    pub unpredictable_owngoal_players: u8,
    pub quick_offensives: u8,
    pub quick_defenders: u8,
    pub technical_offensives: u8,
    pub technical_defenders: u8,
    pub head_offensives: u8,
    pub corner_head_offensives: u8,
    pub corner_head_defensives: u8,
    pub head_defenders_or_ims: u8,
}

impl SpecialityRoster {
    pub fn fields(&self) -> [(&'static str, u8); 13] {
        [
            ("unpredictable_offensives", self.unpredictable_offensives),
            ("unpredictable_sa_players", self.unpredictable_sa_players),
            ("unpredictable_lp_players", self.unpredictable_lp_players),
            ("unpredictable_mistake_players", self.unpredictable_mistake_players),
            ("unpredictable_owngoal_players", self.unpredictable_owngoal_players),
            ("quick_offensives", self.quick_offensives),
            ("quick_defenders", self.quick_defenders),
            ("technical_offensives", self.technical_offensives),
            ("technical_defenders", self.technical_defenders),
            ("head_offensives", self.head_offensives),
            ("corner_head_offensives", self.corner_head_offensives),
            ("corner_head_defensives", self.corner_head_defensives),
            ("head_defenders_or_ims", self.head_defenders_or_ims),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PositionCounts {
    pub central_defenders: u8,
    pub wing_backs: u8,
    pub wingers: u8,
    pub inner_midfielders: u8,
    pub forwards: u8,
    pub pdims: u8,
    pub pnfs: u8,
}

impl PositionCounts {
    /// Central defenders plus wing backs.
    pub fn defenders(&self) -> u32 {
        u32::from(self.central_defenders) + u32::from(self.wing_backs)
    }

    /// Wingers, inner midfielders and forwards.
    pub fn offensives(&self) -> u32 {
        u32::from(self.wingers) + u32::from(self.inner_midfielders) + u32::from(self.forwards)
    }

    pub fn outfield(&self) -> u32 {
        self.defenders() + self.offensives()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeamProfile {
    pub left_att: Rating,
    pub mid_att: Rating,
    pub right_att: Rating,
    pub left_def: Rating,
    pub mid_def: Rating,
    pub right_def: Rating,
    pub midfield: Rating,
    pub isp_att: Rating,
    pub isp_def: Rating,
    pub tactic: TacticSpec,
    pub roster: SpecialityRoster,
    pub positions: PositionCounts,
}

/// Names of the nine rating fields, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatingField {
    LeftAtt,
    MidAtt,
    RightAtt,
    LeftDef,
    MidDef,
    RightDef,
    Midfield,
    IspAtt,
    IspDef,
}

impl RatingField {
    pub const ALL: [RatingField; 9] = [
        RatingField::LeftAtt,
        RatingField::MidAtt,
        RatingField::RightAtt,
        RatingField::LeftDef,
        RatingField::MidDef,
        RatingField::RightDef,
        RatingField::Midfield,
        RatingField::IspAtt,
        RatingField::IspDef,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RatingField::LeftAtt => "left_att",
            RatingField::MidAtt => "mid_att",
            RatingField::RightAtt => "right_att",
            RatingField::LeftDef => "left_def",
            RatingField::MidDef => "mid_def",
            RatingField::RightDef => "right_def",
            RatingField::Midfield => "midfield",
            RatingField::IspAtt => "isp_att",
            RatingField::IspDef => "isp_def",
        }
    }
}

impl std::str::FromStr for RatingField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RatingField::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown rating field `{s}`"))
    }
}

impl TeamProfile {
    /// Profile with every rating set to `r`, Normal tactic, and no specialities.
    pub fn uniform(r: f64, positions: PositionCounts) -> Self {
        let r = Rating(r);
        TeamProfile {
            left_att: r,
            mid_att: r,
            right_att: r,
            left_def: r,
            mid_def: r,
            right_def: r,
            midfield: r,
            isp_att: r,
            isp_def: r,
            tactic: TacticSpec::normal(),
            roster: SpecialityRoster::default(),
            positions,
        }
    }

    pub fn rating(&self, f: RatingField) -> Rating {
        match f {
            RatingField::LeftAtt => self.left_att,
            RatingField::MidAtt => self.mid_att,
            RatingField::RightAtt => self.right_att,
            RatingField::LeftDef => self.left_def,
            RatingField::MidDef => self.mid_def,
            RatingField::RightDef => self.right_def,
            RatingField::Midfield => self.midfield,
            RatingField::IspAtt => self.isp_att,
            RatingField::IspDef => self.isp_def,
        }
    }

    pub fn rating_mut(&mut self, f: RatingField) -> &mut Rating {
        match f {
            RatingField::LeftAtt => &mut self.left_att,
            RatingField::MidAtt => &mut self.mid_att,
            RatingField::RightAtt => &mut self.right_att,
            RatingField::LeftDef => &mut self.left_def,
            RatingField::MidDef => &mut self.mid_def,
            RatingField::RightDef => &mut self.right_def,
            RatingField::Midfield => &mut self.midfield,
            RatingField::IspAtt => &mut self.isp_att,
            RatingField::IspDef => &mut self.isp_def,
        }
    }

    pub fn avg_attack(&self) -> f64 {
        (self.left_att.0 + self.mid_att.0 + self.right_att.0) / 3.0
    }

    pub fn avg_defence(&self) -> f64 {
        (self.left_def.0 + self.mid_def.0 + self.right_def.0) / 3.0
    }
}

/// `3 * midfield + sum(attack sectors) + sum(defence sectors)`.
pub fn hatstats(p: &TeamProfile) -> f64 {
    3.0 * p.midfield.0
        + (p.left_att.0 + p.mid_att.0 + p.right_att.0)
        + (p.left_def.0 + p.mid_def.0 + p.right_def.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    RatingBelowOne,
    SkillOutOfRange,
    CountOutOfRange,
    ExceedsRole,
    TooManyPlayers,
}

impl ViolationKind {
    /// Cross-field constraints, as opposed to a single value out of bounds.
    pub fn is_semantic(self) -> bool {
        matches!(self, ViolationKind::ExceedsRole | ViolationKind::TooManyPlayers)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

const MAX_OUTFIELD: u32 = 10;
const MAX_SPECIALITY_COUNT: u8 = 11;

/// Every broken invariant of `p`; empty iff the profile is usable.
pub fn validate_profile(p: &TeamProfile) -> Vec<Violation> {
    let mut out = Vec::new();

    for f in RatingField::ALL {
        let r = p.rating(f).0;
        if !r.is_finite() || r < 1.0 {
            out.push(Violation {
                field: f.name().to_string(),
                kind: ViolationKind::RatingBelowOne,
                message: format!("rating {r} is below the minimum of 1"),
            });
        }
    }

    if p.tactic.kind != TacticKind::Normal
        && !(MIN_TACTIC_SKILL..=MAX_TACTIC_SKILL).contains(&p.tactic.skill)
    {
        out.push(Violation {
            field: "tactic.skill".into(),
            kind: ViolationKind::SkillOutOfRange,
            message: format!(
                "skill {} outside {MIN_TACTIC_SKILL}..={MAX_TACTIC_SKILL}",
                p.tactic.skill
            ),
        });
    }

    for (name, count) in p.roster.fields() {
        if count > MAX_SPECIALITY_COUNT {
            out.push(Violation {
                field: format!("roster.{name}"),
                kind: ViolationKind::CountOutOfRange,
                message: format!("count {count} exceeds {MAX_SPECIALITY_COUNT}"),
            });
        }
    }

    let pos = &p.positions;
    let mut role = |field: String, count: u32, limit: u32, role: &str| {
        if count > limit {
            out.push(Violation {
                field,
                kind: ViolationKind::ExceedsRole,
                message: format!("{count} exceeds the {limit} {role}"),
            });
        }
    };
    role("positions.pdims".into(), pos.pdims.into(), pos.inner_midfielders.into(), "inner midfielders");
    role("positions.pnfs".into(), pos.pnfs.into(), pos.forwards.into(), "forwards");

    let r = &p.roster;
    let defenders = pos.defenders();
    let offensives = pos.offensives();
    for (name, count) in [
        ("quick_defenders", r.quick_defenders),
        ("technical_defenders", r.technical_defenders),
    ] {
        role(format!("roster.{name}"), count.into(), defenders, "defenders");
    }
    for (name, count) in [
        ("unpredictable_offensives", r.unpredictable_offensives),
        ("quick_offensives", r.quick_offensives),
        ("technical_offensives", r.technical_offensives),
        ("head_offensives", r.head_offensives),
    ] {
        role(format!("roster.{name}"), count.into(), offensives, "offensive players");
    }
    role(
        "roster.unpredictable_owngoal_players".into(),
        r.unpredictable_owngoal_players.into(),
        u32::from(pos.wingers) + u32::from(pos.forwards),
        "wingers and forwards",
    );
    role(
        "roster.unpredictable_mistake_players".into(),
        r.unpredictable_mistake_players.into(),
        defenders + u32::from(pos.inner_midfielders),
        "defenders and inner midfielders",
    );
    role(
        "roster.unpredictable_lp_players".into(),
        r.unpredictable_lp_players.into(),
        defenders + 1,
        "defenders and keeper",
    );
    role(
        "roster.head_defenders_or_ims".into(),
        r.head_defenders_or_ims.into(),
        defenders + u32::from(pos.inner_midfielders),
        "defenders and inner midfielders",
    );
    for (name, count) in [
        ("unpredictable_sa_players", r.unpredictable_sa_players),
        ("corner_head_offensives", r.corner_head_offensives),
        ("corner_head_defensives", r.corner_head_defensives),
    ] {
        role(format!("roster.{name}"), count.into(), pos.outfield(), "outfield players");
    }

    if pos.outfield() > MAX_OUTFIELD {
        out.push(Violation {
            field: "positions".into(),
            kind: ViolationKind::TooManyPlayers,
            message: format!("{} outfield players exceed {MAX_OUTFIELD}", pos.outfield()),
        });
    }

    out
}

/// `validate_profile` lifted into a `Result`.
pub fn check_profile(p: &TeamProfile) -> Result<(), EngineError> {
    let v = validate_profile(p);
    if v.is_empty() {
        Ok(())
    } else {
        Err(EngineError::InvalidProfile(v))
    }
}
