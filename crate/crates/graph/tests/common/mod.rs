#![allow(dead_code)]

use std::collections::BTreeSet;

use htsim_graph::bn::DiscreteBn;
use htsim_graph::Dag;

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

/// Every DAG over `n` labelled nodes, by trying all three states of each pair.
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    'outer: for code in 0..total {
        let mut g = Dag::empty(names(n)).unwrap();
        let mut c = code;
        for &(a, b) in &pairs {
            let state = c % 3;
            c /= 3;
            let res = match state {
                1 => g.add_edge(a, b),
                2 => g.add_edge(b, a),
                _ => Ok(()),
            };
            if res.is_err() {
                continue 'outer;
            }
        }
        out.push(g);
    }
    out
}

pub fn skeleton(g: &Dag) -> BTreeSet<(usize, usize)> {
    g.edges().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect()
}

/// Unshielded colliders `(a, c, b)` with `a < b`.
pub fn v_structures(g: &Dag) -> BTreeSet<(usize, usize, usize)> {
    let mut out = BTreeSet::new();
    for c in 0..g.n() {
        let ps = g.parents(c);
        for &a in &ps {
            for &b in &ps {
                if a < b && !g.adjacent(a, b) {
                    out.insert((a, c, b));
                }
            }
        }
    }
    out
}

/// Six binary-or-ternary nodes: A -> C <- B, C -> D -> E, C -> F.
pub fn six_node_bn() -> DiscreteBn {
    let g = Dag::from_edges(
        &["A", "B", "C", "D", "E", "F"],
        &[("A", "C"), ("B", "C"), ("C", "D"), ("D", "E"), ("C", "F")],
    )
    .unwrap();
    let cpts = vec![
        vec![vec![0.5, 0.5]],
        vec![vec![0.4, 0.6]],
        // C | A, B
        vec![
            vec![0.85, 0.1, 0.05],
            vec![0.1, 0.8, 0.1],
            vec![0.15, 0.75, 0.1],
            vec![0.05, 0.1, 0.85],
        ],
        // D | C
        vec![vec![0.9, 0.1], vec![0.2, 0.8], vec![0.5, 0.5]],
        // E | D
        vec![vec![0.8, 0.2], vec![0.25, 0.75]],
        // F | C
        vec![vec![0.7, 0.3], vec![0.3, 0.7], vec![0.9, 0.1]],
    ];
    DiscreteBn::new(g, vec![2, 2, 3, 2, 2, 2], cpts).unwrap()
}
