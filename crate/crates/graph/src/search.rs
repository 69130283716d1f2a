//! Hill climbing and tabu search over DAGs, maximising BIC.
//!
//! Both searches run on the dataset with its columns sorted by name, so the
//! learned graph does not depend on the input column order. Candidate moves
//! are visited in (add, delete, reverse) x source x target order and a later
//! move replaces the current best only if its gain is larger by more than
//! [`TIE_EPS`].

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bic::{ScoreCache, ScoredGraph};
use crate::data::DiscreteDataset;
use crate::error::GraphError;
use crate::graph::Dag;

/// Score differences below this are treated as ties.
pub const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchOptions {
    pub max_in_degree: usize,
    pub max_vars: usize,
    /// Wall-clock limit in seconds; the best graph so far is returned when it runs out.
    pub time_budget_secs: Option<f64>,
    pub tabu_length: usize,
    pub max_worsening_steps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_in_degree: 5,
            max_vars: 40,
            time_budget_secs: None,
            tabu_length: 10,
            max_worsening_steps: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MoveKind {
    Add,
    Delete,
    Reverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub kind: MoveKind,
    pub from: usize,
    pub to: usize,
}

struct State {
    masks: Vec<u64>,
}

impl State {
    fn has(&self, a: usize, b: usize) -> bool {
        self.masks[b] & (1 << a) != 0
    }

    /// Whether `to` is reachable from `from`, optionally ignoring one edge.
    fn reaches(&self, from: usize, to: usize, skip: Option<(usize, usize)>) -> bool {
        let n = self.masks.len();
        let mut seen = 1u64 << from;
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            if v == to {
                return true;
            }
            for c in 0..n {
                if self.masks[c] & (1 << v) != 0 && seen & (1 << c) == 0 && skip != Some((v, c)) {
                    seen |= 1 << c;
                    stack.push(c);
                }
            }
        }
        false
    }

    fn apply(&mut self, m: Move) {
        let (a, b) = (m.from, m.to);
        match m.kind {
            MoveKind::Add => self.masks[b] |= 1 << a,
            MoveKind::Delete => self.masks[b] &= !(1 << a),
            MoveKind::Reverse => {
                self.masks[b] &= !(1 << a);
                self.masks[a] |= 1 << b;
            }
        }
    }

    fn after(&self, m: Move) -> Vec<u64> {
        let mut s = State { masks: self.masks.clone() };
        s.apply(m);
        s.masks
    }
}

/// Legal moves with their BIC gains, in the fixed visiting order.
fn moves(state: &State, cache: &mut ScoreCache, max_in: usize) -> Vec<(Move, f64)> {
    let n = state.masks.len();
    let mut out = Vec::new();
    for kind in [MoveKind::Add, MoveKind::Delete, MoveKind::Reverse] {
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                let mb = state.masks[b];
                let ma = state.masks[a];
                let delta = match kind {
                    MoveKind::Add => {
                        if state.has(a, b)
                            || state.has(b, a)
                            || mb.count_ones() as usize >= max_in
                            || state.reaches(b, a, None)
                        {
                            continue;
                        }
                        cache.family(b, mb | 1 << a) - cache.family(b, mb)
                    }
                    MoveKind::Delete => {
                        if !state.has(a, b) {
                            continue;
                        }
                        cache.family(b, mb & !(1 << a)) - cache.family(b, mb)
                    }
                    MoveKind::Reverse => {
                        if !state.has(a, b)
                            || ma.count_ones() as usize >= max_in
                            || state.reaches(a, b, Some((a, b)))
                        {
                            continue;
                        }
                        cache.family(b, mb & !(1 << a)) - cache.family(b, mb) + cache.family(a, ma | 1 << b)
                            - cache.family(a, ma)
                    }
                };
                out.push((Move { kind, from: a, to: b }, delta));
            }
        }
    }
    out
}

/// First move with the largest gain among those accepted by `allowed`.
fn best_move(cands: &[(Move, f64)], mut allowed: impl FnMut(Move) -> bool) -> Option<(Move, f64)> {
    let mut best: Option<(Move, f64)> = None;
    for &(m, d) in cands {
        if !allowed(m) {
            continue;
        }
        match best {
            Some((_, bd)) if d <= bd + TIE_EPS => {}
            _ => best = Some((m, d)),
        }
    }
    best
}

fn prepare(d: &DiscreteDataset, opts: &SearchOptions) -> Result<DiscreteDataset, GraphError> {
    if d.n_cols() > opts.max_vars.min(crate::graph::MAX_NODES) {
        return Err(GraphError::TooManyNodes(d.n_cols(), opts.max_vars.min(crate::graph::MAX_NODES)));
    }
    Ok(d.canonical())
}

fn finish(data: &DiscreteDataset, masks: &[u64]) -> Result<ScoredGraph, GraphError> {
    let mut dag = Dag::empty(data.names().to_vec())?;
    for (b, &m) in masks.iter().enumerate() {
        for a in 0..masks.len() {
            if m & (1 << a) != 0 {
                dag.add_edge(a, b)?;
            }
        }
    }
    crate::bic::bic_score(&dag, data)
}

fn deadline(opts: &SearchOptions) -> Option<Instant> {
    opts.time_budget_secs
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map(|s| Instant::now() + Duration::from_secs_f64(s))
}

fn expired(d: Option<Instant>) -> bool {
    d.is_some_and(|t| Instant::now() >= t)
}

/// Greedy search from the empty graph; stops at a local maximum.
pub fn hill_climb(d: &DiscreteDataset, opts: &SearchOptions) -> Result<ScoredGraph, GraphError> {
    let data = prepare(d, opts)?;
    let mut cache = ScoreCache::new(&data);
    let mut state = State { masks: vec![0; data.n_cols()] };
    let stop = deadline(opts);
    while !expired(stop) {
        let cands = moves(&state, &mut cache, opts.max_in_degree);
        match best_move(&cands, |_| true) {
            Some((m, delta)) if delta > TIE_EPS => state.apply(m),
            _ => break,
        }
    }
    finish(&data, &state.masks)
}

/// Hill climbing that keeps going past local maxima by taking the least
/// worsening move to a graph not in the recent-visit list. Stops after
/// `max_worsening_steps` consecutive steps without a new best and returns the
/// best graph seen.
pub fn tabu_search(d: &DiscreteDataset, opts: &SearchOptions) -> Result<ScoredGraph, GraphError> {
    let data = prepare(d, opts)?;
    let mut cache = ScoreCache::new(&data);
    let mut state = State { masks: vec![0; data.n_cols()] };
    let mut best = (state.masks.clone(), cache.total(&state.masks));
    let mut tabu: VecDeque<Vec<u64>> = VecDeque::new();
    let remember = |tabu: &mut VecDeque<Vec<u64>>, masks: &[u64]| {
        if opts.tabu_length > 0 {
            if tabu.len() == opts.tabu_length {
                tabu.pop_front();
            }
            tabu.push_back(masks.to_vec());
        }
    };
    remember(&mut tabu, &state.masks);
    let mut stale = 0usize;
    let stop = deadline(opts);
    while !expired(stop) {
        let cands = moves(&state, &mut cache, opts.max_in_degree);
        let pick = best_move(&cands, |m| tabu.is_empty() || !tabu.contains(&state.after(m)));
        let Some((m, _)) = pick else { break };
        state.apply(m);
        let score = cache.total(&state.masks);
        remember(&mut tabu, &state.masks);
        if score > best.1 + TIE_EPS {
            best = (state.masks.clone(), score);
            stale = 0;
        } else {
            stale += 1;
            if stale > opts.max_worsening_steps {
                break;
            }
        }
    }
    finish(&data, &best.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_data() -> DiscreteDataset {
        // B copies A three times in four; C is an unrelated cycle.
        let recs: Vec<Vec<String>> = (0..400)
            .map(|i| {
                let a = i % 2;
                let b = if i % 4 == 3 { 1 - a } else { a };
                vec![a.to_string(), b.to_string(), ((i / 2) % 3).to_string()]
            })
            .collect();
        DiscreteDataset::from_records(vec!["A".into(), "B".into(), "C".into()], &recs).unwrap()
    }

    #[test]
    fn finds_dependence() {
        let g = hill_climb(&chain_data(), &SearchOptions::default()).unwrap();
        assert!(g.dag.adjacent(0, 1));
    }

    #[test]
    fn add_tie_resolved_by_order() {
        // A -> B and B -> A score the same, so the first visited wins.
        let g = hill_climb(&chain_data(), &SearchOptions::default()).unwrap();
        assert!(g.dag.has_edge(0, 1));
    }

    #[test]
    fn tabu_never_worse() {
        let d = chain_data();
        let hc = hill_climb(&d, &SearchOptions::default()).unwrap();
        let tb = tabu_search(&d, &SearchOptions::default()).unwrap();
        assert!(tb.bic >= hc.bic - 1e-9);
    }

    #[test]
    fn zero_budget_returns_empty() {
        let opts = SearchOptions { time_budget_secs: Some(0.0), ..Default::default() };
        let g = hill_climb(&chain_data(), &opts).unwrap();
        assert_eq!(g.dag.edge_count(), 0);
    }

    #[test]
    fn in_degree_cap_respected() {
        let opts = SearchOptions { max_in_degree: 0, ..Default::default() };
        let g = hill_climb(&chain_data(), &opts).unwrap();
        assert_eq!(g.dag.edge_count(), 0);
    }

    #[test]
    fn too_many_variables_rejected() {
        let opts = SearchOptions { max_vars: 2, ..Default::default() };
        assert!(matches!(hill_climb(&chain_data(), &opts), Err(GraphError::TooManyNodes(3, 2))));
    }
}
