//! Base-2 BIC for discrete Bayesian network structures.

use std::collections::HashMap;

use crate::data::DiscreteDataset;
use crate::error::GraphError;
use crate::graph::Dag;

/// Log-likelihood and parameter count of one node given its parents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyScore {
    pub ll: f64,
    pub k: u64,
    pub bic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredGraph {
    pub dag: Dag,
    pub bic: f64,
    pub ll: f64,
    pub k: u64,
}

/// Contingency tables larger than this fall back to hashed counting.
const DENSE_LIMIT: usize = 1 << 20;

fn xlog2x_ratio(nijk: u64, nij: u64) -> f64 {
    if nijk == 0 {
        0.0
    } else {
        nijk as f64 * (nijk as f64 / nij as f64).log2()
    }
}

/// Score of `child` with the parent columns in `parents`, all on `d`.
pub fn family_score(d: &DiscreteDataset, child: usize, parents: &[usize]) -> FamilyScore {
    let s = d.cardinality(child) as u64;
    let mut q: u64 = 1;
    for &p in parents {
        q = q.saturating_mul(d.cardinality(p) as u64);
    }
    let k = (s - 1).saturating_mul(q);
    let n = d.n_rows();
    let config = |row: &[u16]| -> u64 {
        parents
            .iter()
            .fold(0u64, |acc, &p| acc.wrapping_mul(d.cardinality(p) as u64).wrapping_add(row[p] as u64))
    };

    let mut ll = 0.0;
    let cells = q.saturating_mul(s);
    if cells <= DENSE_LIMIT as u64 && cells <= (4 * n as u64).max(1024) {
        let s = s as usize;
        let mut counts = vec![0u64; cells as usize];
        for i in 0..n {
            let r = d.row(i);
            counts[config(r) as usize * s + r[child] as usize] += 1;
        }
        for block in counts.chunks(s) {
            let nij: u64 = block.iter().sum();
            if nij > 0 {
                ll += block.iter().map(|&c| xlog2x_ratio(c, nij)).sum::<f64>();
            }
        }
    } else {
        let mut counts: HashMap<(u64, u16), u64> = HashMap::new();
        let mut totals: HashMap<u64, u64> = HashMap::new();
        for i in 0..n {
            let r = d.row(i);
            let j = config(r);
            *counts.entry((j, r[child])).or_default() += 1;
            *totals.entry(j).or_default() += 1;
        }
        let mut terms: Vec<((u64, u16), u64)> = counts.into_iter().collect();
        terms.sort_unstable();
        ll = terms.iter().map(|&((j, _), c)| xlog2x_ratio(c, totals[&j])).sum();
    }
    let bic = ll - (n as f64).log2() / 2.0 * k as f64;
    FamilyScore { ll, k, bic }
}

fn check_nodes(g: &Dag, d: &DiscreteDataset) -> Result<Vec<usize>, GraphError> {
    if g.n() != d.n_cols() {
        return Err(GraphError::NodeMismatch(format!(
            "graph has {} nodes, dataset {} columns",
            g.n(),
            d.n_cols()
        )));
    }
    g.nodes()
        .iter()
        .map(|name| {
            d.column_index(name)
                .map_err(|_| GraphError::NodeMismatch(format!("`{name}` is not a dataset column")))
        })
        .collect()
}

pub fn bic_score(g: &Dag, d: &DiscreteDataset) -> Result<ScoredGraph, GraphError> {
    let col = check_nodes(g, d)?;
    let mut ll = 0.0;
    let mut k = 0u64;
    for v in 0..g.n() {
        let parents: Vec<usize> = g.parents(v).into_iter().map(|p| col[p]).collect();
        let f = family_score(d, col[v], &parents);
        ll += f.ll;
        k = k.saturating_add(f.k);
    }
    Ok(ScoredGraph {
        dag: g.clone(),
        bic: ll - (d.n_rows() as f64).log2() / 2.0 * k as f64,
        ll,
        k,
    })
}

/// Memoised family scores keyed by child column and parent bitmask.
pub struct ScoreCache<'a> {
    data: &'a DiscreteDataset,
    cache: HashMap<(usize, u64), f64>,
}

impl<'a> ScoreCache<'a> {
    pub fn new(data: &'a DiscreteDataset) -> Self {
        ScoreCache { data, cache: HashMap::new() }
    }

    pub fn data(&self) -> &DiscreteDataset {
        self.data
    }

    pub fn family(&mut self, child: usize, mask: u64) -> f64 {
        let d = self.data;
        *self.cache.entry((child, mask)).or_insert_with(|| {
            let parents: Vec<usize> = (0..64).filter(|&i| mask & (1u64 << i) != 0).collect();
            family_score(d, child, &parents).bic
        })
    }

    /// BIC of a graph over the dataset's columns, in column order.
    pub fn total(&mut self, masks: &[u64]) -> f64 {
        masks.iter().enumerate().map(|(v, &m)| self.family(v, m)).sum()
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(rows: &[[&str; 3]]) -> DiscreteDataset {
        let recs: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect();
        DiscreteDataset::from_records(vec!["A".into(), "B".into(), "C".into()], &recs).unwrap()
    }

    #[test]
    fn parameter_count() {
        let d = data(&[["0", "0", "0"], ["1", "1", "1"], ["1", "2", "2"], ["0", "3", "0"]]);
        // C has 3 states, A 2 and B 4.
        assert_eq!(family_score(&d, 2, &[0, 1]).k, 16);
        assert_eq!(family_score(&d, 0, &[]).k, 1);
    }

    #[test]
    fn hand_computed_marginal() {
        let d = data(&[["0", "0", "0"], ["0", "0", "0"], ["0", "0", "0"], ["1", "0", "0"]]);
        let f = family_score(&d, 0, &[]);
        let expect = 3.0 * (0.75f64).log2() + (0.25f64).log2();
        assert!((f.ll - expect).abs() < 1e-12);
        assert!((f.bic - (expect - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn dense_and_hashed_counts_agree() {
        let recs: Vec<Vec<String>> = (0..50)
            .map(|i| vec![(i % 7).to_string(), (i % 11).to_string(), ((i * 3) % 5).to_string()])
            .collect();
        let d = DiscreteDataset::from_records(vec!["A".into(), "B".into(), "C".into()], &recs).unwrap();
        // 7 * 11 * 5 = 385 cells, under both limits; force the hashed path via a
        // dataset whose table is far bigger than its row count.
        let dense = family_score(&d, 2, &[0, 1]);
        let mut big: Vec<Vec<String>> = recs.clone();
        for r in &mut big {
            r.push(r[0].clone() + &r[1]);
        }
        let d2 = DiscreteDataset::from_records(
            vec!["A".into(), "B".into(), "C".into(), "D".into()],
            &big,
        )
        .unwrap();
        let hashed = family_score(&d2, 2, &[0, 1, 3]);
        // D is a function of (A, B), so adding it leaves the likelihood unchanged.
        assert!((dense.ll - hashed.ll).abs() < 1e-9);
    }

    #[test]
    fn scoring_rejects_foreign_graph() {
        let d = data(&[["0", "0", "0"]]);
        let g = Dag::from_edges(&["A", "B", "X"], &[]).unwrap();
        assert!(bic_score(&g, &d).is_err());
    }

    #[test]
    fn total_is_sum_of_families() {
        let d = data(&[["0", "0", "1"], ["1", "1", "1"], ["1", "0", "0"], ["0", "1", "1"]]);
        let g = Dag::from_edges(&["A", "B", "C"], &[("A", "C"), ("B", "C")]).unwrap();
        let s = bic_score(&g, &d).unwrap();
        let mut cache = ScoreCache::new(&d);
        assert!((cache.total(g.parent_masks()) - s.bic).abs() < 1e-12);
        let n = 4f64;
        assert!((s.bic - (s.ll - n.log2() / 2.0 * s.k as f64)).abs() < 1e-12);
    }
}
