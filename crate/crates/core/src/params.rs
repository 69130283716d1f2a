//! Engine constants and the two parameter presets.
//!
//! Every number the engine uses lives in [`EngineParams`]. The two presets
//! share one mechanism set and differ only by data:
//!
//! * `kb-probabilistic`: tactic effects interpolate linearly between the
//!   published endpoint ranges, penalties use a flat conversion rate and the
//!   team-event table is the per-match event table.
//! * `kb-regression`: tactic conversion rates follow fitted polynomials in
//!   tactic skill, every set piece (penalties included) follows the ISP cubic,
//!   and team events use the forum-derived goal/no-goal frequency table.
//!
//! Overrides are a flat JSON object of dotted keys, e.g.
//! `{"pk_score": 0.8, "tactic_ranges.aim.high": 0.4, "pdim_block.2": 0.1}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::EngineError;
use crate::events::EventKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    KbProbabilistic,
    KbRegression,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::KbProbabilistic => "kb-probabilistic",
            Variant::KbRegression => "kb-regression",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "kb-probabilistic" => Ok(Variant::KbProbabilistic),
            "kb-regression" => Ok(Variant::KbRegression),
            other => Err(format!(
                "unknown preset `{other}` (expected kb-probabilistic or kb-regression)"
            )),
        }
    }
}

/// Baseline share of normal attacks per sector or set-piece type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorProbs {
    pub left: f64,
    pub middle: f64,
    pub right: f64,
    pub dfk: f64,
    pub ifk: f64,
    pub pk: f64,
}

impl SectorProbs {
    pub fn as_array(&self) -> [f64; 6] {
        [self.left, self.middle, self.right, self.dfk, self.ifk, self.pk]
    }

    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }
}

/// Tactic effect as a function of tactic skill (1..=20).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum TacticCurve {
    /// `low` at skill 1, `high` at skill 20, straight line between.
    Linear { low: f64, high: f64 },
    /// Coefficients in ascending powers of skill.
    Polynomial { coeffs: Vec<f64> },
}

impl TacticCurve {
    pub fn linear(low: f64, high: f64) -> Self {
        TacticCurve::Linear { low, high }
    }

    pub fn eval(&self, skill: f64) -> f64 {
        match self {
            TacticCurve::Linear { low, high } => {
                let t = (skill.clamp(1.0, 20.0) - 1.0) / 19.0;
                low + (high - low) * t
            }
            TacticCurve::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * skill + c)
            }
        }
    }

    /// `eval` clamped to a probability.
    pub fn rate(&self, skill: f64) -> f64 {
        self.eval(skill).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TacticRanges {
    pub aim: TacticCurve,
    pub aow: TacticCurve,
    pub ca: TacticCurve,
    pub ls: TacticCurve,
    pub pressing: TacticCurve,
    pub pressing_both: TacticCurve,
    pub pressing_vs_ls: TacticCurve,
    /// Event-rate multiplier for the side playing PC.
    pub pc_self: TacticCurve,
    /// Event-rate multiplier for the opponent of a PC side.
    pub pc_opponent: TacticCurve,
    pub pc_both: TacticCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetPieceParams {
    /// ISP-difference cubic, ascending powers.
    pub cubic: [f64; 4],
    pub diff_min: f64,
    pub diff_max: f64,
    pub dfk_multiplier: f64,
    pub ifk_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongShotParams {
    pub score_low: f64,
    pub score_high: f64,
    pub diff_min: f64,
    pub diff_max: f64,
    /// Skill proxy for non-tactical long shots.
    pub nontactical_skill: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventParams {
    pub team_trials: u32,
    pub player_trials: u32,
    pub team_mean: f64,
    pub player_mean: f64,
    pub pc_extra_trials: u32,
    /// P(corner-to-head) by offensive header count.
    pub corner_head_probs: BTreeMap<u8, f64>,
    /// P(winger-to-head) by offensive header count.
    pub winger_head_probs: BTreeMap<u8, f64>,
    pub winger_head_bonus: f64,
    pub expfwd_reference: f64,
    pub inexpdef_reference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineParams {
    pub variant: Variant,
    pub sector_probs: SectorProbs,
    pub player_event_frequencies: BTreeMap<EventKind, f64>,
    pub player_event_rates: BTreeMap<EventKind, f64>,
    pub team_event_frequencies: BTreeMap<EventKind, f64>,
    pub team_event_rates: BTreeMap<EventKind, f64>,
    /// Average scoring probability per event kind. For `Corner` this is the
    /// corner-to-anyone rate.
    pub score_probs: BTreeMap<EventKind, f64>,
    pub events: EventParams,
    pub tactic_ranges: TacticRanges,
    pub ca_midfield_penalty: f64,
    /// Non-tactical counterattack rate by defender count (CD + WB).
    pub ca_nontactical_rates: BTreeMap<u8, f64>,
    /// Technical-defender counterattack rate by defender count.
    pub tech_ca_rates: BTreeMap<u8, f64>,
    /// Extra-attack rate by PNF count, then opposing central defenders.
    pub pnf_table: BTreeMap<u8, BTreeMap<u8, f64>>,
    /// Block rate by PDIM count.
    pub pdim_block: BTreeMap<u8, f64>,
    pub pk_score: f64,
    pub set_piece: SetPieceParams,
    pub long_shot: LongShotParams,
    pub nontactical_ls: f64,
}

/// Stated per-match totals of the two event tables.
pub const PLAYER_EVENT_RATE_TOTAL: f64 = 0.8410;
pub const TEAM_EVENT_RATE_TOTAL: f64 = 0.3718;
const RATE_TOLERANCE: f64 = 5e-4;
const SUM_TOLERANCE: f64 = 1e-9;

/// Keys whose children may be added by an override, not just replaced.
const OPEN_MAPS: &[&str] = &[
    "ca_nontactical_rates",
    "tech_ca_rates",
    "pnf_table",
    "pdim_block",
    "events.corner_head_probs",
    "events.winger_head_probs",
];

fn pct_map(rows: &[(EventKind, f64)]) -> BTreeMap<EventKind, f64> {
    rows.iter().map(|&(k, v)| (k, v / 100.0)).collect()
}

impl EngineParams {
    pub fn preset(variant: Variant) -> Self {
        match variant {
            Variant::KbProbabilistic => Self::kb_probabilistic(),
            Variant::KbRegression => Self::kb_regression(),
        }
    }

    pub fn kb_probabilistic() -> Self {
        use EventKind::*;
        let player_event_frequencies = pct_map(&[
            (WingerAny, 25.72),
            (TechOverHead, 15.19),
            (QuickRush, 15.29),
            (QuickPass, 14.49),
            (UnpredLongPass, 8.17),
            (UnpredScoreOwn, 6.37),
            (UnpredSpecial, 6.66),
            (UnpredMistake, 3.45),
            (UnpredOwnGoal, 4.66),
        ]);
        let player_event_rates = pct_map(&[
            (WingerAny, 21.63),
            (TechOverHead, 12.77),
            (QuickRush, 12.86),
            (QuickPass, 12.19),
            (UnpredLongPass, 6.87),
            (UnpredScoreOwn, 5.36),
            (UnpredSpecial, 5.60),
            (UnpredMistake, 2.90),
            (UnpredOwnGoal, 3.92),
        ]);
        let team_event_frequencies = pct_map(&[
            (ExperiencedFwd, 10.76),
            (InexpDefender, 10.54),
            (TiredDefender, 0.12),
            (Corner, 78.58),
        ]);
        let team_event_rates = pct_map(&[
            (ExperiencedFwd, 4.00),
            (InexpDefender, 3.92),
            (TiredDefender, 0.04),
            (Corner, 29.22),
        ]);
        let score_probs = pct_map(&[
            (WingerAny, 49.51),
            (TechOverHead, 29.37),
            (QuickRush, 36.70),
            (QuickPass, 43.87),
            (UnpredLongPass, 40.90),
            (UnpredScoreOwn, 58.22),
            (UnpredSpecial, 42.41),
            (UnpredMistake, 18.16),
            (UnpredOwnGoal, 17.25),
            (ExperiencedFwd, 37.04),
            (InexpDefender, 10.50),
            (TiredDefender, 34.32),
            (Corner, 48.49),
        ]);

        EngineParams {
            variant: Variant::KbProbabilistic,
            sector_probs: SectorProbs {
                left: 0.2565,
                middle: 0.3615,
                right: 0.2565,
                dfk: 0.0586,
                ifk: 0.0418,
                pk: 0.0251,
            },
            player_event_frequencies,
            player_event_rates,
            team_event_frequencies,
            team_event_rates,
            score_probs,
            events: EventParams {
                team_trials: 5,
                player_trials: 4,
                team_mean: 0.372,
                player_mean: 0.841,
                pc_extra_trials: 2,
                corner_head_probs: BTreeMap::from([
                    (0, 0.0),
                    (1, 0.27),
                    (2, 0.42),
                    (3, 0.51),
                    (4, 0.59),
                    (5, 0.65),
                ]),
                winger_head_probs: BTreeMap::from([
                    (0, 0.0),
                    (1, 0.15),
                    (2, 0.29),
                    (3, 0.35),
                    (4, 0.38),
                    (5, 0.42),
                ]),
                winger_head_bonus: 0.11,
                expfwd_reference: 2.0,
                inexpdef_reference: 3.5,
            },
            tactic_ranges: TacticRanges {
                aim: TacticCurve::linear(0.20, 0.35),
                aow: TacticCurve::linear(0.34, 0.52),
                ca: TacticCurve::linear(0.04, 0.45),
                ls: TacticCurve::linear(0.06, 0.43),
                pressing: TacticCurve::linear(0.05, 0.41),
                pressing_both: TacticCurve::linear(0.20, 0.64),
                pressing_vs_ls: TacticCurve::linear(0.44, 0.66),
                pc_self: TacticCurve::linear(2.37, 3.80),
                pc_opponent: TacticCurve::linear(1.63, 1.88),
                pc_both: TacticCurve::linear(3.05, 3.05),
            },
            ca_midfield_penalty: 0.07,
            ca_nontactical_rates: BTreeMap::from([
                (2, 0.0175),
                (3, 0.0363),
                (4, 0.0604),
                (5, 0.0803),
            ]),
            tech_ca_rates: BTreeMap::from([(2, 0.0084), (3, 0.0100), (4, 0.0311)]),
            pnf_table: BTreeMap::from([
                (1, BTreeMap::from([(0, 0.096), (1, 0.069), (2, 0.033), (3, 0.020)])),
                (2, BTreeMap::from([(0, 0.117), (1, 0.096), (2, 0.052), (3, 0.031)])),
                (3, BTreeMap::from([(0, 0.066)])),
            ]),
            pdim_block: BTreeMap::from([(1, 0.065)]),
            pk_score: 0.75,
            set_piece: SetPieceParams {
                cubic: [0.45515, 0.0366246, 0.0000226846, -0.0000380429],
                diff_min: -15.0,
                diff_max: 15.0,
                dfk_multiplier: 1.0,
                ifk_multiplier: 1.0,
            },
            long_shot: LongShotParams {
                score_low: 0.11,
                score_high: 1.00,
                diff_min: -15.0,
                diff_max: 15.0,
                nontactical_skill: 10.0,
            },
            nontactical_ls: 0.0,
        }
    }

    pub fn kb_regression() -> Self {
        use EventKind::*;
        let mut p = Self::kb_probabilistic();
        p.variant = Variant::KbRegression;
        p.tactic_ranges.ca = TacticCurve::Polynomial {
            coeffs: vec![
                -0.617941717072569,
                0.104274398,
                -0.00358354796,
                0.0000434356,
            ],
        };
        p.tactic_ranges.aim = TacticCurve::Polynomial {
            coeffs: vec![0.0705084, 0.02180462, -0.00036765],
        };
        p.tactic_ranges.aow = TacticCurve::Polynomial {
            coeffs: vec![0.10514706, 0.02894608, -0.00046569],
        };
        p.tactic_ranges.ls = TacticCurve::Polynomial {
            coeffs: vec![0.07520052, 0.00761935],
        };

        // (goal, no goal) per-match percentages.
        let table = [
            (Corner, 8.19 + 13.94, 5.21 + 5.58),
            (TiredDefender, 0.31, 0.22),
            (ExperiencedFwd, 2.69, 1.81),
            (InexpDefender, 1.21, 3.45),
        ];
        let total: f64 = table.iter().map(|(_, g, n)| g + n).sum::<f64>() / 100.0;
        p.team_event_rates = table.iter().map(|&(k, g, n)| (k, (g + n) / 100.0)).collect();
        p.team_event_frequencies = table
            .iter()
            .map(|&(k, g, n)| (k, (g + n) / 100.0 / total))
            .collect();
        p.events.team_mean = total;
        for (k, g, n) in table {
            p.score_probs.insert(k, g / (g + n));
        }
        // Corner-to-anyone specifically.
        p.score_probs.insert(Corner, 13.94 / (13.94 + 5.58));
        p
    }

    /// Check every invariant; returns the first broken one.
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |key: &str, reason: String| EngineError::InvalidParam {
            key: key.to_string(),
            reason,
        };
        let prob = |key: String, v: f64| -> Result<(), EngineError> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(bad(&key, format!("{v} is not a probability in [0, 1]")))
            }
        };

        let sp = &self.sector_probs;
        for (name, v) in ["left", "middle", "right", "dfk", "ifk", "pk"]
            .iter()
            .zip(sp.as_array())
        {
            prob(format!("sector_probs.{name}"), v)?;
        }
        if (sp.sum() - 1.0).abs() > SUM_TOLERANCE {
            return Err(bad("sector_probs", format!("sums to {}, expected 1", sp.sum())));
        }

        for (key, map, player) in [
            ("player_event_frequencies", &self.player_event_frequencies, true),
            ("team_event_frequencies", &self.team_event_frequencies, false),
        ] {
            for (k, &v) in map {
                if k.is_player_based() != player {
                    return Err(bad(key, format!("{k:?} does not belong in this table")));
                }
                prob(format!("{key}.{k:?}"), v)?;
            }
            let s: f64 = map.values().sum();
            if (s - 1.0).abs() > SUM_TOLERANCE {
                return Err(bad(key, format!("sums to {s}, expected 1")));
            }
        }
        for (key, map, mean) in [
            ("player_event_rates", &self.player_event_rates, self.events.player_mean),
            ("team_event_rates", &self.team_event_rates, self.events.team_mean),
        ] {
            for (k, &v) in map {
                prob(format!("{key}.{k:?}"), v)?;
            }
            let s: f64 = map.values().sum();
            if (s - mean).abs() >= RATE_TOLERANCE {
                return Err(bad(key, format!("sums to {s}, inconsistent with mean {mean}")));
            }
        }
        for (k, &v) in &self.score_probs {
            prob(format!("score_probs.{k:?}"), v)?;
        }
        for k in EventKind::ALL {
            if !self.score_probs.contains_key(&k) {
                return Err(bad("score_probs", format!("missing {k:?}")));
            }
        }

        let ev = &self.events;
        if ev.team_trials == 0 || ev.player_trials == 0 {
            return Err(bad("events", "trial counts must be positive".into()));
        }
        if !(0.0..=f64::from(ev.team_trials)).contains(&ev.team_mean) {
            return Err(bad("events.team_mean", "must lie in [0, team_trials]".into()));
        }
        if !(0.0..=f64::from(ev.player_trials)).contains(&ev.player_mean) {
            return Err(bad("events.player_mean", "must lie in [0, player_trials]".into()));
        }
        for (key, map) in [
            ("events.corner_head_probs", &ev.corner_head_probs),
            ("events.winger_head_probs", &ev.winger_head_probs),
            ("ca_nontactical_rates", &self.ca_nontactical_rates),
            ("tech_ca_rates", &self.tech_ca_rates),
            ("pdim_block", &self.pdim_block),
        ] {
            for (k, &v) in map {
                prob(format!("{key}.{k}"), v)?;
            }
        }
        for (pnf, row) in &self.pnf_table {
            for (cd, &v) in row {
                prob(format!("pnf_table.{pnf}.{cd}"), v)?;
            }
        }
        prob("events.winger_head_bonus".into(), ev.winger_head_bonus)?;
        if ev.expfwd_reference <= 0.0 || ev.inexpdef_reference <= 0.0 {
            return Err(bad("events", "reference counts must be positive".into()));
        }

        let tr = &self.tactic_ranges;
        for (name, curve) in [
            ("aim", &tr.aim),
            ("aow", &tr.aow),
            ("ca", &tr.ca),
            ("ls", &tr.ls),
            ("pressing", &tr.pressing),
            ("pressing_both", &tr.pressing_both),
            ("pressing_vs_ls", &tr.pressing_vs_ls),
        ] {
            if let TacticCurve::Linear { low, high } = curve {
                prob(format!("tactic_ranges.{name}.low"), *low)?;
                prob(format!("tactic_ranges.{name}.high"), *high)?;
            }
        }
        for (name, curve) in [
            ("pc_self", &tr.pc_self),
            ("pc_opponent", &tr.pc_opponent),
            ("pc_both", &tr.pc_both),
        ] {
            if curve.eval(1.0) < 0.0 || curve.eval(20.0) < 0.0 {
                return Err(bad(&format!("tactic_ranges.{name}"), "multiplier must be >= 0".into()));
            }
        }

        prob("ca_midfield_penalty".into(), self.ca_midfield_penalty)?;
        prob("pk_score".into(), self.pk_score)?;
        prob("nontactical_ls".into(), self.nontactical_ls)?;
        prob("long_shot.score_low".into(), self.long_shot.score_low)?;
        prob("long_shot.score_high".into(), self.long_shot.score_high)?;
        if self.long_shot.diff_min >= self.long_shot.diff_max {
            return Err(bad("long_shot", "diff_min must be below diff_max".into()));
        }
        let spp = &self.set_piece;
        if spp.diff_min >= spp.diff_max {
            return Err(bad("set_piece", "diff_min must be below diff_max".into()));
        }
        if spp.dfk_multiplier < 0.0 || spp.ifk_multiplier < 0.0 {
            return Err(bad("set_piece", "multipliers must be >= 0".into()));
        }
        Ok(())
    }
}

/// Largest-key-at-or-below lookup into a count-keyed table.
pub fn step_lookup(map: &BTreeMap<u8, f64>, count: u32) -> Option<f64> {
    let key = u8::try_from(count).unwrap_or(u8::MAX);
    map.range(..=key).next_back().map(|(_, &v)| v)
}

/// Preset merged with a flat dotted-key override document, then validated.
pub fn load_params(variant: Variant, overrides: &Map<String, Value>) -> Result<EngineParams, EngineError> {
    let base = EngineParams::preset(variant);
    if overrides.is_empty() {
        base.validate()?;
        return Ok(base);
    }
    let mut tree = serde_json::to_value(&base).expect("params serialize");
    for (key, value) in overrides {
        apply_override(&mut tree, key, value.clone())?;
    }
    let params: EngineParams =
        serde_json::from_value(tree).map_err(|e| EngineError::InvalidParam {
            key: "overrides".into(),
            reason: e.to_string(),
        })?;
    params.validate()?;
    Ok(params)
}

/// Parse an override document from JSON text.
pub fn load_params_json(variant: Variant, overrides: &str) -> Result<EngineParams, EngineError> {
    let doc: Value = serde_json::from_str(overrides).map_err(|e| EngineError::InvalidParam {
        key: "overrides".into(),
        reason: e.to_string(),
    })?;
    match doc {
        Value::Object(m) => load_params(variant, &m),
        _ => Err(EngineError::InvalidParam {
            key: "overrides".into(),
            reason: "expected a JSON object of dotted keys".into(),
        }),
    }
}

fn apply_override(tree: &mut Value, key: &str, value: Value) -> Result<(), EngineError> {
    if key == "variant" {
        return Err(EngineError::InvalidParam {
            key: key.into(),
            reason: "select the variant through the preset, not an override".into(),
        });
    }
    let segments: Vec<&str> = key.split('.').collect();
    let mut node = tree;
    for (i, seg) in segments.iter().enumerate() {
        let path = segments[..i].join(".");
        let open = OPEN_MAPS.contains(&path.as_str())
            || (path.starts_with("pnf_table.") && i == 2);
        let obj = node
            .as_object_mut()
            .ok_or_else(|| EngineError::UnknownParam(key.to_string()))?;
        let last = i + 1 == segments.len();
        if !obj.contains_key(*seg) {
            if !open {
                return Err(EngineError::UnknownParam(key.to_string()));
            }
            if seg.parse::<u8>().is_err() {
                return Err(EngineError::InvalidParam {
                    key: key.into(),
                    reason: format!("`{seg}` is not a count"),
                });
            }
            let fresh = if last { value.clone() } else { Value::Object(Map::new()) };
            obj.insert(seg.to_string(), fresh);
        } else if last {
            obj.insert(seg.to_string(), value.clone());
        }
        if last {
            return Ok(());
        }
        node = obj.get_mut(*seg).expect("just ensured");
    }
    Ok(())
}
