//! Model averaging over DAGs learned on the same variables.

use std::collections::BTreeMap;

use crate::error::GraphError;
use crate::graph::Dag;

/// Count each directed edge across `graphs`, then build one DAG from edges
/// seen at least `min_count` times. Edges are taken by count, most frequent
/// first, with ties broken by (source, target) name descending. An edge that
/// would close a cycle is reversed when the reverse is acyclic and was seen
/// at least once, and dropped otherwise.
pub fn model_average(graphs: &[Dag], min_count: usize) -> Result<Dag, GraphError> {
    let first = graphs.first().ok_or(GraphError::EmptyInput)?;
    let nodes: Vec<String> = first.nodes().to_vec();
    let aligned: Vec<Dag> = graphs
        .iter()
        .map(|g| g.reorder(&nodes))
        .collect::<Result<_, _>>()?;

    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for g in &aligned {
        for e in g.edges() {
            *counts.entry(e).or_default() += 1;
        }
    }

    let mut ranked: Vec<((usize, usize), usize)> =
        counts.iter().filter(|(_, &c)| c >= min_count.max(1)).map(|(&e, &c)| (e, c)).collect();
    ranked.sort_by(|(ea, ca), (eb, cb)| {
        cb.cmp(ca)
            .then_with(|| (&nodes[eb.0], &nodes[eb.1]).cmp(&(&nodes[ea.0], &nodes[ea.1])))
    });

    let mut out = Dag::empty(nodes)?;
    for ((a, b), _) in ranked {
        if out.adjacent(a, b) {
            continue;
        }
        if !out.creates_cycle(a, b) {
            out.add_edge(a, b)?;
        } else if counts.get(&(b, a)).is_some_and(|&c| c > 0) && !out.creates_cycle(b, a) {
            out.add_edge(b, a)?;
        }
    }
    Ok(out)
}
