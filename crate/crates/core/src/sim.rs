//! One match sample, and Monte Carlo aggregation over many.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{
    assign_sectors, category_score, counterattack_distribution, generate_counterattacks,
    pdim_blocks, pnf_extra_attacks, resolve_attacks, score_open_play, sector_distribution, Sector,
};
use crate::chance::{allocate_chances, effective_midfields, possession, pressing_suppression, thin};
use crate::error::EngineError;
use crate::events::{draw_events, Side};
use crate::forecast::{outcome_to_hda, ForecastTriple, Outcome};
use crate::model::{validate_profile, TeamProfile, Violation};
use crate::params::EngineParams;
use crate::rng::{binomial, substream};

/// Goals one team scored in one match, by mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TeamOutcome {
    /// Normal chances allocated before pressing and blocks.
    pub normal_chances: u32,
    pub goals_normal: u32,
    pub goals_setpiece: u32,
    pub goals_counter: u32,
    pub goals_longshot: u32,
    pub goals_special: u32,
    pub goals_pnf: u32,
}

impl TeamOutcome {
    pub fn total(&self) -> u32 {
        self.categories().iter().sum()
    }

    pub fn categories(&self) -> [u32; 6] {
        [
            self.goals_normal,
            self.goals_setpiece,
            self.goals_counter,
            self.goals_longshot,
            self.goals_special,
            self.goals_pnf,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchOutcome {
    pub home: TeamOutcome,
    pub away: TeamOutcome,
}

impl MatchOutcome {
    pub fn hda(&self) -> Outcome {
        outcome_to_hda(self.home.total(), self.away.total())
    }

    pub fn total_goals(&self) -> u32 {
        self.home.total() + self.away.total()
    }

    fn side_mut(&mut self, side: Side) -> &mut TeamOutcome {
        match side {
            Side::Home => &mut self.home,
            Side::Away => &mut self.away,
        }
    }
}

/// Violations of both profiles, with fields prefixed `home.` / `away.`.
pub fn validate_pair(home: &TeamProfile, away: &TeamProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    for (prefix, p) in [("home", home), ("away", away)] {
        for mut v in validate_profile(p) {
            v.field = format!("{prefix}.{}", v.field);
            out.push(v);
        }
    }
    out
}

pub fn check_pair(home: &TeamProfile, away: &TeamProfile) -> Result<(), EngineError> {
    let v = validate_pair(home, away);
    if v.is_empty() {
        Ok(())
    } else {
        Err(EngineError::InvalidProfile(v))
    }
}

/// One sampled match. Profiles must already be valid.
pub fn simulate_trial<R: Rng + ?Sized>(
    home: &TeamProfile,
    away: &TeamProfile,
    params: &EngineParams,
    rng: &mut R,
) -> MatchOutcome {
    let mut out = MatchOutcome::default();

    let mids = effective_midfields(home, away, params);
    let pos = possession(mids.home, mids.away);
    let alloc = allocate_chances(pos, rng);
    out.home.normal_chances = alloc.normal_home;
    out.away.normal_chances = alloc.normal_away;

    let supp = pressing_suppression(&home.tactic, &away.tactic, params);
    let mut n_home = thin(rng, alloc.normal_home, supp.normal);
    let mut n_away = thin(rng, alloc.normal_away, supp.normal);
    n_home -= pdim_blocks(n_home, u32::from(away.positions.pdims), params, rng);
    n_away -= pdim_blocks(n_away, u32::from(home.positions.pdims), params, rng);

    let mut attacks_home = assign_sectors(n_home, &sector_distribution(&home.tactic, params), rng);
    let mut attacks_away = assign_sectors(n_away, &sector_distribution(&away.tactic, params), rng);
    // Long shots of a side facing pressing are thinned once they exist.
    let ls = Sector::LongShot.index();
    if supp.longshot > 0.0 {
        if home.tactic.is(crate::model::TacticKind::LS) {
            attacks_home[ls] = thin(rng, attacks_home[ls], supp.longshot);
        }
        if away.tactic.is(crate::model::TacticKind::LS) {
            attacks_away[ls] = thin(rng, attacks_away[ls], supp.longshot);
        }
    }

    let tally_home = resolve_attacks(attacks_home, home, away, params, rng);
    let tally_away = resolve_attacks(attacks_away, away, home, params, rng);
    for (t, o) in [(&tally_home, &mut out.home), (&tally_away, &mut out.away)] {
        o.goals_normal += t.open_play_goals();
        o.goals_setpiece += t.set_piece_goals();
        o.goals_longshot += t.long_shot_goals();
    }

    let ca_dist = counterattack_distribution(params);
    for (side, team, opp, missed, eligible) in [
        (Side::Home, home, away, tally_away.missed_normal, mids.home_ca_eligible),
        (Side::Away, away, home, tally_home.missed_normal, mids.away_ca_eligible),
    ] {
        let ca = generate_counterattacks(missed, team, eligible, params, rng);
        let sectors = assign_sectors(ca.total(), &ca_dist, rng);
        let mut goals = 0;
        for s in Sector::ALL {
            let n = sectors[s.index()];
            if n > 0 {
                goals += binomial(rng, n, category_score(s, team, opp, params));
            }
        }
        out.side_mut(side).goals_counter += goals;
    }

    for (side, team, opp, missed) in [
        (Side::Home, home, away, tally_home.missed_normal),
        (Side::Away, away, home, tally_away.missed_normal),
    ] {
        let extra = pnf_extra_attacks(
            missed,
            u32::from(team.positions.pnfs),
            u32::from(opp.positions.central_defenders),
            params,
            rng,
        );
        let goals = binomial(rng, extra, score_open_play(team.mid_att, opp.mid_def));
        out.side_mut(side).goals_pnf += goals;
    }

    for ev in draw_events(home, away, (mids.home, mids.away), params, rng) {
        if let Some(scorer) = ev.scoring_side() {
            out.side_mut(scorer).goals_special += 1;
        }
    }

    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalStats {
    pub mean: f64,
    pub sd: f64,
}

/// Per-category goal statistics for one team over all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamReport {
    pub normal: GoalStats,
    pub setpiece: GoalStats,
    pub counter: GoalStats,
    pub longshot: GoalStats,
    pub special: GoalStats,
    pub pnf: GoalStats,
    pub total: GoalStats,
    /// `histogram[g]` = trials in which the team scored exactly `g` goals.
    pub histogram: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub seed: u64,
    pub hda: ForecastTriple,
    pub mean_total_goals: f64,
    pub home: TeamReport,
    pub away: TeamReport,
}

/// Integer sums that reduce identically in any order.
#[derive(Debug, Clone, Default)]
struct Tally {
    n: u64,
    hda: [u64; 3],
    // six categories then the total, per team
    sum: [[u64; 7]; 2],
    sum_sq: [[u64; 7]; 2],
    hist: [Vec<u64>; 2],
}

impl Tally {
    fn add(mut self, o: &MatchOutcome) -> Self {
        self.n += 1;
        self.hda[o.hda().index()] += 1;
        for (t, team) in [&o.home, &o.away].into_iter().enumerate() {
            let cats = team.categories();
            let total = team.total();
            for (i, v) in cats.into_iter().chain([total]).enumerate() {
                let v = u64::from(v);
                self.sum[t][i] += v;
                self.sum_sq[t][i] += v * v;
            }
            let g = total as usize;
            if self.hist[t].len() <= g {
                self.hist[t].resize(g + 1, 0);
            }
            self.hist[t][g] += 1;
        }
        self
    }

    fn merge(mut self, other: Self) -> Self {
        self.n += other.n;
        for i in 0..3 {
            self.hda[i] += other.hda[i];
        }
        for t in 0..2 {
            for i in 0..7 {
                self.sum[t][i] += other.sum[t][i];
                self.sum_sq[t][i] += other.sum_sq[t][i];
            }
            let h = &mut self.hist[t];
            if h.len() < other.hist[t].len() {
                h.resize(other.hist[t].len(), 0);
            }
            for (a, b) in h.iter_mut().zip(&other.hist[t]) {
                *a += b;
            }
        }
        self
    }

    fn stats(&self, t: usize, i: usize) -> GoalStats {
        let n = self.n as f64;
        let mean = self.sum[t][i] as f64 / n;
        let var = if self.n > 1 {
            let s = self.sum[t][i] as f64;
            ((self.sum_sq[t][i] as f64 - s * s / n) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        GoalStats { mean, sd: var.sqrt() }
    }

    fn team_report(&self, t: usize) -> TeamReport {
        TeamReport {
            normal: self.stats(t, 0),
            setpiece: self.stats(t, 1),
            counter: self.stats(t, 2),
            longshot: self.stats(t, 3),
            special: self.stats(t, 4),
            pnf: self.stats(t, 5),
            total: self.stats(t, 6),
            histogram: self.hist[t].clone(),
        }
    }
}

/// Run `trials` independent matches. Trial `i` draws from substream `i` of
/// `seed`, so the report does not depend on thread count.
pub fn simulate(
    home: &TeamProfile,
    away: &TeamProfile,
    params: &EngineParams,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport, EngineError> {
    if trials == 0 {
        return Err(EngineError::ZeroTrials);
    }
    check_pair(home, away)?;
    let tally = (0..trials)
        .into_par_iter()
        .fold(Tally::default, |acc, i| {
            let mut rng = substream(seed, i);
            acc.add(&simulate_trial(home, away, params, &mut rng))
        })
        .reduce(Tally::default, Tally::merge);
    Ok(report_from(&tally, seed))
}

/// Same as [`simulate`] on the calling thread only.
pub fn simulate_serial(
    home: &TeamProfile,
    away: &TeamProfile,
    params: &EngineParams,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport, EngineError> {
    if trials == 0 {
        return Err(EngineError::ZeroTrials);
    }
    check_pair(home, away)?;
    let mut tally = Tally::default();
    for i in 0..trials {
        let mut rng = substream(seed, i);
        tally = tally.add(&simulate_trial(home, away, params, &mut rng));
    }
    Ok(report_from(&tally, seed))
}

fn report_from(t: &Tally, seed: u64) -> SimulationReport {
    let hda = ForecastTriple::from_counts(t.hda[0], t.hda[1], t.hda[2]).expect("at least one trial");
    let home = t.team_report(0);
    let away = t.team_report(1);
    SimulationReport {
        trials: t.n,
        seed,
        hda,
        mean_total_goals: (t.sum[0][6] + t.sum[1][6]) as f64 / t.n as f64,
        home,
        away,
    }
}
