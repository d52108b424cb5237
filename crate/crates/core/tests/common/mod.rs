//! Random networks shared by the property suites.
#![allow(dead_code, clippy::needless_range_loop)]

use proptest::prelude::*;

use netpower::{EdgeRecord, Network, NodeRecord};

/// Zero-padded so id order equals index order.
pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i:02}")).collect()
}

/// `(n, presence, amounts)`.
pub type Raw = (usize, Vec<Vec<bool>>, Vec<Vec<f64>>);

pub fn raw_graph(min_n: usize, max_n: usize, density: f64) -> impl Strategy<Value = Raw> {
    (min_n..=max_n).prop_flat_map(move |n| {
        (
            Just(n),
            prop::collection::vec(prop::collection::vec(prop::bool::weighted(density), n), n),
            prop::collection::vec(prop::collection::vec(0.05..1.0f64, n), n),
        )
    })
}

/// Share edges `(holder, held, s)`; incoming shares of every node sum below `cap`.
pub fn shares(raw: &Raw, cap: f64, dag: bool) -> Vec<(usize, usize, f64)> {
    let (n, presence, amount) = raw;
    let mut edges = Vec::new();
    for j in 0..*n {
        let holders: Vec<usize> =
            (0..*n).filter(|&i| i != j && presence[i][j] && (!dag || i < j)).collect();
        let total: f64 = holders.iter().map(|&i| amount[i][j]).sum();
        if total == 0.0 {
            continue;
        }
        let scale = cap / (total + 1.0);
        edges.extend(holders.into_iter().map(|i| (i, j, amount[i][j] * scale)));
    }
    edges
}

pub fn ownership(n: usize, persons: usize, values: &[f64], edges: &[(usize, usize, f64)]) -> Network {
    let id = ids(n);
    let nodes = (0..n)
        .map(|i| {
            let v = values.get(i).copied().unwrap_or(1.0);
            if i < persons {
                NodeRecord::person(id[i].clone(), v)
            } else {
                NodeRecord::firm(id[i].clone(), v)
            }
        })
        .collect();
    let edges = edges.iter().map(|&(a, b, w)| EdgeRecord::new(id[a].clone(), id[b].clone(), w)).collect();
    Network::ownership(nodes, edges).expect("generated ownership network is valid")
}

/// Undirected simple graph on `n` nodes; each pair joined when `presence[i][j]`.
pub fn undirected_edges(raw: &Raw) -> Vec<(usize, usize)> {
    let (n, presence, _) = raw;
    let mut edges = Vec::new();
    for i in 0..*n {
        for j in i + 1..*n {
            if presence[i][j] {
                edges.push((i, j));
            }
        }
    }
    edges
}

pub fn undirected(n: usize, edges: &[(usize, usize)], names: &[String]) -> Network {
    let list: Vec<(&str, &str, f64)> =
        edges.iter().map(|&(a, b)| (names[a].as_str(), names[b].as_str(), 1.0)).collect();
    let iso: Vec<&str> = names[..n].iter().map(String::as_str).collect();
    Network::from_edge_list(&list, &iso, false).expect("generated graph is valid")
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == u && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Adds a spanning path so the graph is connected.
pub fn with_path(n: usize, mut edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    for v in 1..n {
        if !edges.contains(&(v - 1, v)) {
            edges.push((v - 1, v));
        }
    }
    edges
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
