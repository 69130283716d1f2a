//! Discrete Bayesian networks with explicit CPTs, used to generate data with a
//! known structure.

use rand::Rng;
use rayon::prelude::*;

use crate::data::DiscreteDataset;
use crate::error::GraphError;
use crate::graph::Dag;
use htsim_core::rng::{categorical, substream};

#[derive(Debug, Clone)]
pub struct DiscreteBn {
    dag: Dag,
    cards: Vec<usize>,
    /// Per node, one distribution per parent configuration. Configurations
    /// enumerate parents in ascending index order, first parent most significant.
    cpts: Vec<Vec<Vec<f64>>>,
}

impl DiscreteBn {
    pub fn new(dag: Dag, cards: Vec<usize>, cpts: Vec<Vec<Vec<f64>>>) -> Result<Self, GraphError> {
        if cards.len() != dag.n() || cpts.len() != dag.n() {
            return Err(GraphError::NodeMismatch("one cardinality and CPT per node".into()));
        }
        for v in 0..dag.n() {
            let q: usize = dag.parents(v).iter().map(|&p| cards[p]).product();
            let name = &dag.nodes()[v];
            if cards[v] < 2 {
                return Err(GraphError::Dataset(format!("`{name}` needs at least two states")));
            }
            if cpts[v].len() != q {
                return Err(GraphError::Dataset(format!("`{name}` CPT has {} rows, expected {q}", cpts[v].len())));
            }
            for row in &cpts[v] {
                let sum: f64 = row.iter().sum();
                if row.len() != cards[v] || row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(GraphError::Dataset(format!("`{name}` CPT row is not a distribution")));
                }
            }
        }
        Ok(DiscreteBn { dag, cards, cpts })
    }

    /// CPT rows drawn at random.
    pub fn random<R: Rng>(dag: Dag, cards: Vec<usize>, concentration: f64, rng: &mut R) -> Result<Self, GraphError> {
        let mut cpts = Vec::with_capacity(dag.n());
        for v in 0..dag.n() {
            let q: usize = dag.parents(v).iter().map(|&p| cards.get(p).copied().unwrap_or(1)).product();
            let s = cards.get(v).copied().unwrap_or(0);
            let rows = (0..q)
                .map(|_| {
                    // Flat Dirichlet when concentration is 1; smaller values sharpen rows.
                    let w: Vec<f64> = (0..s)
                        .map(|_| (-rng.random::<f64>().max(f64::MIN_POSITIVE).ln()).powf(1.0 / concentration))
                        .collect();
                    let t: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / t).collect()
                })
                .collect();
            cpts.push(rows);
        }
        Self::new(dag, cards, cpts)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    fn sample_row(&self, order: &[usize], seed: u64, i: u64) -> Vec<u16> {
        let mut rng = substream(seed, i);
        let mut row = vec![0u16; self.dag.n()];
        for &v in order {
            let j = self
                .dag
                .parents(v)
                .iter()
                .fold(0usize, |acc, &p| acc * self.cards[p] + row[p] as usize);
            row[v] = categorical(&mut rng, &self.cpts[v][j]).expect("validated CPT") as u16;
        }
        row
    }

    /// `n` independent rows; row `i` uses its own random stream.
    pub fn sample(&self, n: usize, seed: u64) -> Result<DiscreteDataset, GraphError> {
        let order = self.dag.topological_order();
        let rows: Vec<Vec<u16>> = (0..n as u64).into_par_iter().map(|i| self.sample_row(&order, seed, i)).collect();
        let records: Vec<Vec<String>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|x| x.to_string()).collect())
            .collect();
        DiscreteDataset::from_records(self.dag.nodes().to_vec(), &records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_cpt() {
        let g = Dag::from_edges(&["A"], &[]).unwrap();
        assert!(DiscreteBn::new(g.clone(), vec![2], vec![vec![vec![0.5, 0.6]]]).is_err());
        assert!(DiscreteBn::new(g, vec![2], vec![vec![vec![0.4, 0.6]]]).is_ok());
    }

    #[test]
    fn sampling_follows_cpt() {
        let g = Dag::from_edges(&["A", "B"], &[("A", "B")]).unwrap();
        let bn = DiscreteBn::new(
            g,
            vec![2, 2],
            vec![vec![vec![0.5, 0.5]], vec![vec![0.9, 0.1], vec![0.2, 0.8]]],
        )
        .unwrap();
        let d = bn.sample(20_000, 3).unwrap();
        let same = (0..d.n_rows()).filter(|&i| d.value(i, 0) == d.value(i, 1)).count() as f64;
        assert!((same / 20_000.0 - 0.85).abs() < 0.02);
        assert_eq!(bn.sample(50, 3).unwrap(), bn.sample(50, 3).unwrap());
    }
}
