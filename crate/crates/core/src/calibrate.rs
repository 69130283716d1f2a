//! Fit the flat penalty conversion rate to a target goals-per-match figure.

use serde::{Deserialize, Serialize};

use crate::error::EngineError;
use crate::model::{RatingField, TeamProfile};
use crate::params::EngineParams;
use crate::presets::nm_profile;
use crate::sim::simulate;

/// League-wide average goals per match.
pub const TARGET_GOALS_PER_MATCH: f64 = 3.76;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub target: f64,
    pub trials: u64,
    pub seed: u64,
    pub iterations: u32,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            target: TARGET_GOALS_PER_MATCH,
            trials: 100_000,
            seed: 2024,
            iterations: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub pk_score: f64,
    pub mean_total_goals: f64,
    pub target: f64,
    /// Whether the target lies inside the range reachable with `pk_score` in [0, 1].
    pub bracketed: bool,
    pub goals_at_zero: f64,
    pub goals_at_one: f64,
}

/// The NM profile with every rating set to 15.
pub fn calibration_profile() -> TeamProfile {
    let mut p = nm_profile();
    for f in RatingField::ALL {
        p.rating_mut(f).0 = 15.0;
    }
    p
}

fn mean_goals(params: &EngineParams, pk: f64, profile: &TeamProfile, o: &CalibrationOptions) -> Result<f64, EngineError> {
    let mut p = params.clone();
    p.pk_score = pk;
    Ok(simulate(profile, profile, &p, o.trials, o.seed)?.mean_total_goals)
}

/// Bisection on `pk_score` over [0, 1]. Mean goals increase with the penalty
/// rate, and common random numbers keep that monotone across evaluations.
/// If the target is out of reach the nearest endpoint is returned.
pub fn calibrate_pk_score(params: &EngineParams, opts: &CalibrationOptions) -> Result<CalibrationResult, EngineError> {
    let profile = calibration_profile();
    let lo_goals = mean_goals(params, 0.0, &profile, opts)?;
    let hi_goals = mean_goals(params, 1.0, &profile, opts)?;
    let result = |pk: f64, goals: f64, bracketed: bool| CalibrationResult {
        pk_score: pk,
        mean_total_goals: goals,
        target: opts.target,
        bracketed,
        goals_at_zero: lo_goals,
        goals_at_one: hi_goals,
    };
    if opts.target <= lo_goals {
        return Ok(result(0.0, lo_goals, false));
    }
    if opts.target >= hi_goals {
        return Ok(result(1.0, hi_goals, false));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut best_pk, mut best_goals) = (0.0, lo_goals);
    for _ in 0..opts.iterations {
        let mid = (lo + hi) / 2.0;
        let g = mean_goals(params, mid, &profile, opts)?;
        if (g - opts.target).abs() < (best_goals - opts.target).abs() {
            best_pk = mid;
            best_goals = g;
        }
        if g < opts.target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(result(best_pk, best_goals, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_profile_is_flat() {
        let p = calibration_profile();
        for f in RatingField::ALL {
            assert_eq!(p.rating(f).0, 15.0);
        }
    }

    #[test]
    fn bisection_hits_reachable_target() {
        let params = EngineParams::kb_probabilistic();
        let opts = CalibrationOptions {
            trials: 4_000,
            iterations: 8,
            ..CalibrationOptions::default()
        };
        let probe = CalibrationOptions { target: 0.0, ..opts };
        let r = calibrate_pk_score(&params, &probe).unwrap();
        assert!(!r.bracketed);
        assert_eq!(r.pk_score, 0.0);
        assert!(r.goals_at_one > r.goals_at_zero);

        let mid_target = (r.goals_at_zero + r.goals_at_one) / 2.0;
        let r = calibrate_pk_score(&params, &CalibrationOptions { target: mid_target, ..opts }).unwrap();
        assert!(r.bracketed);
        assert!((r.mean_total_goals - mid_target).abs() < 0.02, "{r:?}");
    }
}
