//! Confusion counts, F1, balanced scoring function and Hamming distance
//! between a learned graph and a reference graph.

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::graph::{dag_to_cpdag, Cpdag, Dag, EdgeStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphComparison {
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub tn: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub bsf: f64,
    pub shd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompareLevel {
    /// Compare equivalence classes.
    #[default]
    Cpdag,
    /// Compare the DAGs edge by edge.
    Dag,
}

/// Learned `l` against truth `t`, both as edge statuses per unordered pair.
/// A present edge with the wrong orientation or directedness is half a true
/// positive and half a false negative, so it costs 0.5 in the distance.
fn tally(n: usize, learned: impl Fn(usize, usize) -> EdgeStatus, truth: impl Fn(usize, usize) -> EdgeStatus) -> GraphComparison {
    let (mut tp, mut fp, mut fn_, mut tn) = (0.0, 0.0, 0.0, 0.0);
    let mut edges = 0.0;
    for a in 0..n {
        for b in a + 1..n {
            let l = learned(a, b);
            let t = truth(a, b);
            if t != EdgeStatus::Absent {
                edges += 1.0;
            }
            match (l == EdgeStatus::Absent, t == EdgeStatus::Absent) {
                (true, true) => tn += 1.0,
                (false, true) => fp += 1.0,
                (true, false) => fn_ += 1.0,
                (false, false) if l == t => tp += 1.0,
                (false, false) => {
                    tp += 0.5;
                    fn_ += 0.5;
                }
            }
        }
    }
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    let absent = pairs - edges;

    let precision = if tp + fp > 0.0 { tp / (tp + fp) } else if fn_ == 0.0 { 1.0 } else { 0.0 };
    let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 1.0 };
    let f1 = if tp > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else if fp == 0.0 && fn_ == 0.0 {
        1.0
    } else {
        0.0
    };
    let bsf = match (edges > 0.0, absent > 0.0) {
        (true, true) => (tp / edges + tn / absent - fp / absent - fn_ / edges) / 2.0,
        (true, false) => (tp - fn_) / edges,
        (false, true) => (tn - fp) / absent,
        (false, false) => 1.0,
    };
    GraphComparison {
        tp,
        fp,
        fn_,
        tn,
        precision,
        recall,
        f1,
        bsf,
        shd: fp + fn_,
    }
}

/// Position of each of `a`'s names in `b`; errors unless the sets match.
fn align(a: &[String], b: &[String]) -> Result<Vec<usize>, GraphError> {
    if a.len() != b.len() {
        return Err(GraphError::NodeMismatch(format!("{} vs {} nodes", a.len(), b.len())));
    }
    a.iter()
        .map(|name| {
            b.iter()
                .position(|x| x == name)
                .ok_or_else(|| GraphError::NodeMismatch(format!("`{name}` missing from reference")))
        })
        .collect()
}

fn dag_status(g: &Dag, a: usize, b: usize) -> EdgeStatus {
    if g.has_edge(a, b) {
        if a < b {
            EdgeStatus::Forward
        } else {
            EdgeStatus::Backward
        }
    } else if g.has_edge(b, a) {
        if b < a {
            EdgeStatus::Forward
        } else {
            EdgeStatus::Backward
        }
    } else {
        EdgeStatus::Absent
    }
}

/// Status of pair `(a, b)`, `a < b`, expressed in the caller's index order
/// when the graph uses a different one.
fn remap(s: EdgeStatus, ma: usize, mb: usize) -> EdgeStatus {
    match s {
        EdgeStatus::Forward | EdgeStatus::Backward if ma > mb => {
            if s == EdgeStatus::Forward {
                EdgeStatus::Backward
            } else {
                EdgeStatus::Forward
            }
        }
        other => other,
    }
}

pub fn compare_cpdags(learned: &Cpdag, truth: &Cpdag) -> Result<GraphComparison, GraphError> {
    let map = align(learned.nodes(), truth.nodes())?;
    Ok(tally(
        learned.nodes().len(),
        |a, b| learned.status(a, b),
        |a, b| remap(truth.status(map[a], map[b]), map[a], map[b]),
    ))
}

pub fn compare_dags(learned: &Dag, truth: &Dag) -> Result<GraphComparison, GraphError> {
    let map = align(learned.nodes(), truth.nodes())?;
    Ok(tally(
        learned.n(),
        |a, b| dag_status(learned, a, b),
        |a, b| remap(dag_status(truth, map[a], map[b]), map[a], map[b]),
    ))
}

/// Compare two DAGs at the chosen level.
pub fn compare_graphs(learned: &Dag, truth: &Dag, level: CompareLevel) -> Result<GraphComparison, GraphError> {
    match level {
        CompareLevel::Cpdag => compare_cpdags(&dag_to_cpdag(learned), &dag_to_cpdag(truth)),
        CompareLevel::Dag => compare_dags(learned, truth),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dag(edges: &[(&str, &str)]) -> Dag {
        Dag::from_edges(&["A", "B", "C", "D"], edges).unwrap()
    }

    #[test]
    fn identical_graphs_score_perfectly() {
        let g = dag(&[("A", "B"), ("C", "B"), ("B", "D")]);
        let c = compare_graphs(&g, &g, CompareLevel::Cpdag).unwrap();
        assert_eq!((c.f1, c.bsf, c.shd), (1.0, 1.0, 0.0));
    }

    #[test]
    fn empty_learned_has_zero_bsf() {
        let t = dag(&[("A", "B"), ("C", "B")]);
        let c = compare_graphs(&dag(&[]), &t, CompareLevel::Cpdag).unwrap();
        assert_eq!(c.bsf, 0.0);
        assert_eq!(c.fn_, 2.0);
        assert_eq!(c.f1, 0.0);
    }

    #[test]
    fn full_graph_has_zero_bsf() {
        let t = dag(&[("A", "B"), ("C", "D")]);
        let full = dag(&[("A", "B"), ("A", "C"), ("A", "D"), ("B", "C"), ("B", "D"), ("C", "D")]);
        let c = compare_graphs(&full, &t, CompareLevel::Dag).unwrap();
        assert!(c.bsf.abs() < 1e-12);
    }

    #[test]
    fn single_reversal_costs_half() {
        let t = dag(&[("A", "B"), ("C", "B")]);
        let l = dag(&[("B", "A"), ("C", "B")]);
        let c = compare_graphs(&l, &t, CompareLevel::Dag).unwrap();
        assert_eq!(c.shd, 0.5);
        assert_eq!(c.tp + c.fn_, 2.0);
    }

    #[test]
    fn node_order_does_not_matter() {
        let t = Dag::from_edges(&["A", "B", "C"], &[("A", "B")]).unwrap();
        let l = Dag::from_edges(&["C", "B", "A"], &[("A", "B")]).unwrap();
        let c = compare_graphs(&l, &t, CompareLevel::Dag).unwrap();
        assert_eq!(c.shd, 0.0);
        let l = Dag::from_edges(&["C", "B", "A"], &[("B", "A")]).unwrap();
        assert_eq!(compare_graphs(&l, &t, CompareLevel::Dag).unwrap().shd, 0.5);
    }

    #[test]
    fn node_mismatch_rejected() {
        let a = Dag::from_edges(&["A", "B"], &[]).unwrap();
        let b = Dag::from_edges(&["A", "C"], &[]).unwrap();
        assert!(compare_graphs(&a, &b, CompareLevel::Dag).is_err());
    }

    #[test]
    fn extra_edge_is_false_positive() {
        let t = dag(&[("A", "B")]);
        let l = dag(&[("A", "B"), ("C", "D")]);
        let c = compare_graphs(&l, &t, CompareLevel::Dag).unwrap();
        assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1.0, 1.0, 0.0, 4.0));
        assert!((c.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.bsf - (1.0 + 4.0 / 5.0 - 1.0 / 5.0) / 2.0).abs() < 1e-12);
    }
}
