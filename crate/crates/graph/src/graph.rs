//! Directed acyclic graphs, CPDAGs and their JSON form.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

/// Parent sets are bitmasks, so graphs hold at most this many nodes.
pub const MAX_NODES: usize = 64;

/// `{"nodes": [...], "edges": [["A","B"], ...], "undirected": [...]}`
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub undirected: Vec<[String; 2]>,
}

fn check_names(nodes: &[String]) -> Result<(), GraphError> {
    if nodes.len() > MAX_NODES {
        return Err(GraphError::TooManyNodes(nodes.len(), MAX_NODES));
    }
    let mut seen = HashSet::new();
    for n in nodes {
        if !seen.insert(n.as_str()) {
            return Err(GraphError::DuplicateNode(n.clone()));
        }
    }
    Ok(())
}

fn index_of(nodes: &[String], name: &str) -> Result<usize, GraphError> {
    nodes
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
}

fn bits(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    nodes: Vec<String>,
    parents: Vec<u64>,
}

impl Dag {
    pub fn empty(nodes: Vec<String>) -> Result<Self, GraphError> {
        check_names(&nodes)?;
        let n = nodes.len();
        Ok(Dag { nodes, parents: vec![0; n] })
    }

    pub fn from_edges(nodes: &[&str], edges: &[(&str, &str)]) -> Result<Self, GraphError> {
        let mut g = Dag::empty(nodes.iter().map(|s| s.to_string()).collect())?;
        for (a, b) in edges {
            g.add_edge_named(a, b)?;
        }
        Ok(g)
    }

    pub fn from_json(j: &GraphJson) -> Result<Self, GraphError> {
        if !j.undirected.is_empty() {
            return Err(GraphError::NodeMismatch(
                "a DAG cannot contain undirected edges".into(),
            ));
        }
        let mut g = Dag::empty(j.nodes.clone())?;
        for [a, b] in &j.edges {
            g.add_edge_named(a, b)?;
        }
        Ok(g)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            nodes: self.nodes.clone(),
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b)| [self.nodes[a].clone(), self.nodes[b].clone()])
                .collect(),
            undirected: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn index(&self, name: &str) -> Result<usize, GraphError> {
        index_of(&self.nodes, name)
    }

    pub fn parents_mask(&self, child: usize) -> u64 {
        self.parents[child]
    }

    pub fn parent_masks(&self) -> &[u64] {
        &self.parents
    }

    pub fn parents(&self, child: usize) -> Vec<usize> {
        bits(self.parents[child]).collect()
    }

    pub fn children_mask(&self, node: usize) -> u64 {
        self.parents
            .iter()
            .enumerate()
            .filter(|(_, &p)| p & (1 << node) != 0)
            .fold(0, |m, (c, _)| m | (1 << c))
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to] & (1 << from) != 0
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(|p| p.count_ones() as usize).sum()
    }

    /// Directed edges `(from, to)` in index order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.n())
            .flat_map(|c| bits(self.parents[c]).map(move |p| (p, c)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Directed edges by node name.
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .into_iter()
            .map(|(a, b)| (self.nodes[a].clone(), self.nodes[b].clone()))
            .collect()
    }

    /// Whether a directed path `from -> ... -> to` exists.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let children: Vec<u64> = (0..self.n()).map(|i| self.children_mask(i)).collect();
        let mut seen = 1u64 << from;
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            for c in bits(children[x] & !seen) {
                if c == to {
                    return true;
                }
                seen |= 1 << c;
                stack.push(c);
            }
        }
        false
    }

    /// Whether adding `from -> to` would close a cycle.
    pub fn creates_cycle(&self, from: usize, to: usize) -> bool {
        self.reaches(to, from)
    }

    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        let name = |i: usize| self.nodes[i].clone();
        if from == to {
            return Err(GraphError::SelfLoop(name(from)));
        }
        if self.has_edge(from, to) {
            return Err(GraphError::DuplicateEdge(name(from), name(to)));
        }
        if self.creates_cycle(from, to) {
            return Err(GraphError::Cycle(name(from), name(to)));
        }
        self.parents[to] |= 1 << from;
        Ok(())
    }

    pub fn add_edge_named(&mut self, from: &str, to: &str) -> Result<(), GraphError> {
        let a = self.index(from)?;
        let b = self.index(to)?;
        self.add_edge(a, b)
    }

    pub fn remove_edge(&mut self, from: usize, to: usize) {
        self.parents[to] &= !(1 << from);
    }

    /// Same structure with nodes listed in `order` (a permutation of the names).
    pub fn reorder(&self, order: &[String]) -> Result<Dag, GraphError> {
        if order.len() != self.n() {
            return Err(GraphError::NodeMismatch("reorder needs every node once".into()));
        }
        let mut g = Dag::empty(order.to_vec())?;
        for (a, b) in self.edges() {
            let na = g.index(&self.nodes[a])?;
            let nb = g.index(&self.nodes[b])?;
            g.parents[nb] |= 1 << na;
        }
        Ok(g)
    }

    /// Nodes in an order where every parent precedes its children.
    pub fn topological_order(&self) -> Vec<usize> {
        let mut placed = 0u64;
        let mut order = Vec::with_capacity(self.n());
        while order.len() < self.n() {
            let next = (0..self.n())
                .find(|&i| placed & (1 << i) == 0 && self.parents[i] & !placed == 0)
                .expect("acyclic by construction");
            placed |= 1 << next;
            order.push(next);
        }
        order
    }
}

/// Completed partially directed graph. Undirected pairs are stored with the
/// smaller index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cpdag {
    nodes: Vec<String>,
    directed: BTreeSet<(usize, usize)>,
    undirected: BTreeSet<(usize, usize)>,
}

/// Relationship between two nodes in a partially directed graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeStatus {
    Absent,
    /// Lower index to higher index.
    Forward,
    /// Higher index to lower index.
    Backward,
    Undirected,
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Cpdag {
    pub fn new(
        nodes: Vec<String>,
        directed: BTreeSet<(usize, usize)>,
        undirected: BTreeSet<(usize, usize)>,
    ) -> Result<Self, GraphError> {
        check_names(&nodes)?;
        let n = nodes.len();
        let undirected: BTreeSet<_> = undirected.into_iter().map(|(a, b)| ordered(a, b)).collect();
        for &(a, b) in directed.iter().chain(&undirected) {
            if a >= n || b >= n {
                return Err(GraphError::UnknownNode(format!("index {}", a.max(b))));
            }
            if a == b {
                return Err(GraphError::SelfLoop(nodes[a].clone()));
            }
        }
        let mut pairs = HashSet::new();
        for &(a, b) in &directed {
            if !pairs.insert(ordered(a, b)) {
                return Err(GraphError::DuplicateEdge(nodes[a].clone(), nodes[b].clone()));
            }
        }
        for &(a, b) in &undirected {
            if !pairs.insert((a, b)) {
                return Err(GraphError::DuplicateEdge(nodes[a].clone(), nodes[b].clone()));
            }
        }
        let g = Cpdag { nodes, directed, undirected };
        g.extension()?;
        Ok(g)
    }

    pub fn from_json(j: &GraphJson) -> Result<Self, GraphError> {
        let idx = |s: &String| index_of(&j.nodes, s);
        let mut directed = BTreeSet::new();
        for [a, b] in &j.edges {
            directed.insert((idx(a)?, idx(b)?));
        }
        let mut undirected = BTreeSet::new();
        for [a, b] in &j.undirected {
            undirected.insert((idx(a)?, idx(b)?));
        }
        Cpdag::new(j.nodes.clone(), directed, undirected)
    }

    pub fn to_json(&self) -> GraphJson {
        let name = |i: usize| self.nodes[i].clone();
        GraphJson {
            nodes: self.nodes.clone(),
            edges: self.directed.iter().map(|&(a, b)| [name(a), name(b)]).collect(),
            undirected: self.undirected.iter().map(|&(a, b)| [name(a), name(b)]).collect(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn directed(&self) -> &BTreeSet<(usize, usize)> {
        &self.directed
    }

    pub fn undirected(&self) -> &BTreeSet<(usize, usize)> {
        &self.undirected
    }

    pub fn edge_count(&self) -> usize {
        self.directed.len() + self.undirected.len()
    }

    pub fn status(&self, a: usize, b: usize) -> EdgeStatus {
        let (lo, hi) = ordered(a, b);
        if self.undirected.contains(&(lo, hi)) {
            EdgeStatus::Undirected
        } else if self.directed.contains(&(lo, hi)) {
            EdgeStatus::Forward
        } else if self.directed.contains(&(hi, lo)) {
            EdgeStatus::Backward
        } else {
            EdgeStatus::Absent
        }
    }

    /// A DAG with the same skeleton and directed edges (Dor-Tarsi). Fails if
    /// the graph is not extendable.
    pub fn extension(&self) -> Result<Dag, GraphError> {
        let n = self.nodes.len();
        let mut dir = self.directed.clone();
        let mut und = self.undirected.clone();
        let mut alive: BTreeSet<usize> = (0..n).collect();
        let mut result = Dag::empty(self.nodes.clone())?;
        for &(a, b) in &self.directed {
            result.parents[b] |= 1 << a;
        }
        let adjacent = |dir: &BTreeSet<(usize, usize)>, und: &BTreeSet<(usize, usize)>, a: usize, b: usize| {
            dir.contains(&(a, b)) || dir.contains(&(b, a)) || und.contains(&ordered(a, b))
        };
        while !alive.is_empty() {
            let pick = alive.iter().copied().find(|&x| {
                let is_sink = !dir.iter().any(|&(a, _)| a == x);
                if !is_sink {
                    return false;
                }
                let und_nb: Vec<usize> = und
                    .iter()
                    .filter_map(|&(a, b)| if a == x { Some(b) } else if b == x { Some(a) } else { None })
                    .collect();
                let all_nb: Vec<usize> = alive
                    .iter()
                    .copied()
                    .filter(|&y| y != x && adjacent(&dir, &und, x, y))
                    .collect();
                und_nb
                    .iter()
                    .all(|&y| all_nb.iter().all(|&z| z == y || adjacent(&dir, &und, y, z)))
            });
            let Some(x) = pick else {
                return Err(GraphError::NoExtension);
            };
            let und_nb: Vec<(usize, usize)> = und.iter().copied().filter(|&(a, b)| a == x || b == x).collect();
            for (a, b) in und_nb {
                let y = if a == x { b } else { a };
                result.parents[x] |= 1 << y;
                und.remove(&(a, b));
            }
            dir.retain(|&(a, b)| a != x && b != x);
            alive.remove(&x);
        }
        Ok(result)
    }
}

/// Equivalence-class representative of `g`: v-structures stay directed, the
/// orientation rules propagate compelled directions, and the rest is
/// undirected.
pub fn dag_to_cpdag(g: &Dag) -> Cpdag {
    let n = g.n();
    let adj = |a: usize, b: usize| g.adjacent(a, b);
    let mut directed: BTreeSet<(usize, usize)> = BTreeSet::new();
    for c in 0..n {
        let ps = g.parents(c);
        for (i, &a) in ps.iter().enumerate() {
            for &b in &ps[i + 1..] {
                if !adj(a, b) {
                    directed.insert((a, c));
                    directed.insert((b, c));
                }
            }
        }
    }
    let mut undirected: BTreeSet<(usize, usize)> = g
        .edges()
        .into_iter()
        .filter(|e| !directed.contains(e))
        .map(|(a, b)| ordered(a, b))
        .collect();

    loop {
        let mut orient: Option<(usize, usize)> = None;
        'search: for &(u, v) in &undirected {
            for (a, b) in [(u, v), (v, u)] {
                if meek_applies(a, b, n, &directed, &undirected, &adj) {
                    orient = Some((a, b));
                    break 'search;
                }
            }
        }
        match orient {
            Some((a, b)) => {
                undirected.remove(&ordered(a, b));
                directed.insert((a, b));
            }
            None => break,
        }
    }

    Cpdag {
        nodes: g.nodes.clone(),
        directed,
        undirected,
    }
}

/// Whether one of the four orientation rules compels `a - b` into `a -> b`.
fn meek_applies(
    a: usize,
    b: usize,
    n: usize,
    dir: &BTreeSet<(usize, usize)>,
    und: &BTreeSet<(usize, usize)>,
    adj: &dyn Fn(usize, usize) -> bool,
) -> bool {
    let d = |x: usize, y: usize| dir.contains(&(x, y));
    let u = |x: usize, y: usize| und.contains(&ordered(x, y));
    // R1: c -> a - b, c and b not adjacent.
    if (0..n).any(|c| c != b && d(c, a) && !adj(c, b)) {
        return true;
    }
    // R2: a -> c -> b.
    if (0..n).any(|c| d(a, c) && d(c, b)) {
        return true;
    }
    // R3: a - c -> b, a - e -> b, c and e not adjacent.
    let mids: Vec<usize> = (0..n).filter(|&c| u(a, c) && d(c, b)).collect();
    for (i, &c) in mids.iter().enumerate() {
        for &e in &mids[i + 1..] {
            if !adj(c, e) {
                return true;
            }
        }
    }
    // R4: a - c -> e -> b, with c and b not adjacent and a adjacent to e.
    for c in 0..n {
        if c == b || !u(a, c) || adj(c, b) {
            continue;
        }
        if (0..n).any(|e| d(c, e) && d(e, b) && adj(a, e)) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_cycles_and_loops() {
        let mut g = Dag::from_edges(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        assert!(matches!(g.add_edge_named("C", "A"), Err(GraphError::Cycle(..))));
        assert!(matches!(g.add_edge_named("A", "A"), Err(GraphError::SelfLoop(_))));
        assert!(matches!(g.add_edge_named("A", "B"), Err(GraphError::DuplicateEdge(..))));
        assert!(Dag::empty(vec!["A".into(), "A".into()]).is_err());
    }

    #[test]
    fn chain_is_fully_undirected() {
        let g = Dag::from_edges(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap();
        let c = dag_to_cpdag(&g);
        assert!(c.directed().is_empty());
        assert_eq!(c.undirected().len(), 2);
    }

    #[test]
    fn collider_stays_directed() {
        let g = Dag::from_edges(&["A", "B", "C"], &[("A", "C"), ("B", "C")]).unwrap();
        let c = dag_to_cpdag(&g);
        assert_eq!(c.directed().len(), 2);
        assert!(c.undirected().is_empty());
    }

    #[test]
    fn empty_graph() {
        let g = Dag::from_edges(&["A", "B"], &[]).unwrap();
        assert_eq!(dag_to_cpdag(&g).edge_count(), 0);
    }

    #[test]
    fn orientation_propagates_below_collider() {
        // A -> C <- B, C - D must become C -> D.
        let g = Dag::from_edges(&["A", "B", "C", "D"], &[("A", "C"), ("B", "C"), ("C", "D")]).unwrap();
        let c = dag_to_cpdag(&g);
        assert!(c.directed().contains(&(2, 3)));
    }

    #[test]
    fn json_round_trip() {
        let g = Dag::from_edges(&["A", "B", "C"], &[("A", "C"), ("B", "C")]).unwrap();
        let j = serde_json::to_string(&g.to_json()).unwrap();
        let back = Dag::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
        assert_eq!(g, back);
        let cp = dag_to_cpdag(&g);
        assert_eq!(Cpdag::from_json(&cp.to_json()).unwrap(), cp);
    }

    #[test]
    fn extension_respects_structure() {
        let g = Dag::from_edges(&["A", "B", "C", "D"], &[("A", "B"), ("B", "C"), ("C", "D")]).unwrap();
        let c = dag_to_cpdag(&g);
        let e = c.extension().unwrap();
        assert_eq!(e.edge_count(), 3);
        assert_eq!(dag_to_cpdag(&e), c);
    }

    #[test]
    fn non_extendable_rejected() {
        // A 4-cycle of undirected edges has no consistent orientation
        // without creating a new v-structure.
        let und = BTreeSet::from([(0, 1), (1, 2), (2, 3), (0, 3)]);
        let nodes = ["A", "B", "C", "D"].map(String::from).to_vec();
        assert!(matches!(Cpdag::new(nodes, BTreeSet::new(), und), Err(GraphError::NoExtension)));
    }
}
