//! Ordered home/draw/away forecasts and their scoring.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::EngineError;

const SUM_TOLERANCE: f64 = 1e-9;

/// Probabilities of (home win, draw, away win).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct ForecastTriple {
    p: [f64; 3],
}

impl ForecastTriple {
    pub fn new(p_home: f64, p_draw: f64, p_away: f64) -> Result<Self, EngineError> {
        let p = [p_home, p_draw, p_away];
        let ok = p.iter().all(|v| (0.0..=1.0).contains(v)) && (p.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE;
        if ok {
            Ok(ForecastTriple { p })
        } else {
            Err(EngineError::InvalidForecast(p))
        }
    }

    /// Empirical frequencies from outcome counts.
    pub fn from_counts(home: u64, draw: u64, away: u64) -> Result<Self, EngineError> {
        let n = home + draw + away;
        if n == 0 {
            return Err(EngineError::EmptyOutcomeCounts);
        }
        let n = n as f64;
        Self::new(home as f64 / n, draw as f64 / n, away as f64 / n)
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.p
    }

    pub fn home(&self) -> f64 {
        self.p[0]
    }

    pub fn draw(&self) -> f64 {
        self.p[1]
    }

    pub fn away(&self) -> f64 {
        self.p[2]
    }
}

impl TryFrom<[f64; 3]> for ForecastTriple {
    type Error = EngineError;

    fn try_from(p: [f64; 3]) -> Result<Self, Self::Error> {
        ForecastTriple::new(p[0], p[1], p[2])
    }
}

impl From<ForecastTriple> for [f64; 3] {
    fn from(t: ForecastTriple) -> Self {
        t.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    H,
    D,
    A,
}

impl Outcome {
    pub fn index(self) -> usize {
        match self {
            Outcome::H => 0,
            Outcome::D => 1,
            Outcome::A => 2,
        }
    }

    pub fn indicator(self) -> [f64; 3] {
        let mut e = [0.0; 3];
        e[self.index()] = 1.0;
        e
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::H => "H",
            Outcome::D => "D",
            Outcome::A => "A",
        })
    }
}

impl FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "H" | "h" => Ok(Outcome::H),
            "D" | "d" => Ok(Outcome::D),
            "A" | "a" => Ok(Outcome::A),
            other => Err(format!("unknown outcome `{other}` (expected H, D or A)")),
        }
    }
}

/// Outcome from the sign of the goal difference.
pub fn outcome_to_hda(home_goals: u32, away_goals: u32) -> Outcome {
    match home_goals.cmp(&away_goals) {
        std::cmp::Ordering::Greater => Outcome::H,
        std::cmp::Ordering::Equal => Outcome::D,
        std::cmp::Ordering::Less => Outcome::A,
    }
}

/// Ranked probability score over the ordered outcomes H < D < A.
pub fn rps(pred: &ForecastTriple, observed: Outcome) -> f64 {
    let e = observed.indicator();
    let r = pred.p.len();
    let mut cum = 0.0;
    let mut total = 0.0;
    for i in 0..r - 1 {
        cum += pred.p[i] - e[i];
        total += cum * cum;
    }
    total / (r - 1) as f64
}

pub fn mean_rps(rows: &[(ForecastTriple, Outcome)]) -> Option<f64> {
    if rows.is_empty() {
        return None;
    }
    Some(rows.iter().map(|(p, o)| rps(p, *o)).sum::<f64>() / rows.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    Ignorant,
    Global,
}

/// Uniform forecast, or the empirical outcome frequencies.
pub fn baseline_priors(kind: PriorKind, counts: Option<[u64; 3]>) -> Result<ForecastTriple, EngineError> {
    match kind {
        PriorKind::Ignorant => ForecastTriple::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0),
        PriorKind::Global => {
            let c = counts.ok_or(EngineError::EmptyOutcomeCounts)?;
            ForecastTriple::from_counts(c[0], c[1], c[2])
        }
    }
}

pub fn goal_diff_error(pred_diff: f64, obs_diff: i32) -> f64 {
    (pred_diff - f64::from(obs_diff)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(h: f64, d: f64, a: f64) -> ForecastTriple {
        ForecastTriple::new(h, d, a).unwrap()
    }

    #[test]
    fn rps_reference_table() {
        use Outcome::*;
        let rows = [
            (H, [1.0, 0.0, 0.0], 0.0),
            (H, [0.0, 1.0, 0.0], 0.5),
            (H, [0.0, 0.0, 1.0], 1.0),
            (H, [0.75, 0.25, 0.0], 0.03125),
            (H, [0.75, 0.15, 0.1], 0.03625),
            (H, [0.5, 0.3, 0.2], 0.145),
            (H, [0.5, 0.2, 0.3], 0.17),
            (A, [1.0, 0.0, 0.0], 1.0),
            (A, [0.0, 1.0, 0.0], 0.5),
            (A, [0.0, 0.0, 1.0], 0.0),
            (A, [0.75, 0.25, 0.0], 0.78125),
            (A, [0.75, 0.15, 0.1], 0.68625),
            (A, [0.5, 0.3, 0.2], 0.445),
            (A, [0.5, 0.2, 0.3], 0.37),
            (D, [0.0, 1.0, 0.0], 0.0),
            (D, [0.25, 0.5, 0.25], 0.0625),
            (D, [0.1, 0.5, 0.4], 0.085),
        ];
        for (o, p, expected) in rows {
            let got = rps(&t(p[0], p[1], p[2]), o);
            assert!((got - expected).abs() < 1e-9, "{o} {p:?}: {got} vs {expected}");
        }
    }

    #[test]
    fn rejects_unnormalised() {
        assert!(ForecastTriple::new(0.5, 0.5, 0.5).is_err());
        assert!(ForecastTriple::new(1.2, -0.2, 0.0).is_err());
        assert!(serde_json::from_str::<ForecastTriple>("[0.2, 0.2, 0.2]").is_err());
        let ok: ForecastTriple = serde_json::from_str("[0.2, 0.3, 0.5]").unwrap();
        assert_eq!(ok.draw(), 0.3);
    }

    #[test]
    fn priors() {
        let p = baseline_priors(PriorKind::Ignorant, None).unwrap();
        assert!((p.home() - 0.3333).abs() < 1e-4);
        let g = baseline_priors(PriorKind::Global, Some([50, 25, 25])).unwrap();
        assert_eq!(g.as_array(), [0.5, 0.25, 0.25]);
        assert!(baseline_priors(PriorKind::Global, Some([0, 0, 0])).is_err());
        assert!(baseline_priors(PriorKind::Global, None).is_err());
    }

    #[test]
    fn goal_difference_error() {
        assert_eq!(goal_diff_error(-1.0, 1), 2.0);
        assert_eq!(goal_diff_error(0.0, 0), 0.0);
        assert_eq!(goal_diff_error(1.5, 3), 1.5);
    }

    #[test]
    fn hda_from_scores() {
        assert_eq!(outcome_to_hda(2, 1), Outcome::H);
        assert_eq!(outcome_to_hda(0, 0), Outcome::D);
        assert_eq!(outcome_to_hda(1, 3), Outcome::A);
    }
}
