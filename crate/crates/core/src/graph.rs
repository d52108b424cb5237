//! Immutable weighted network model shared by every measure.
//!
//! Nodes are kept sorted by id so that matrix indices, iteration order and
//! every derived score vector are deterministic. In ownership mode an edge
//! `i -> j` with weight `s` reads "i holds fraction s of j".

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the incoming-share sum of an ownership network.
pub const OWNERSHIP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Firm,
    Person,
}

impl std::str::FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "firm" => Ok(NodeKind::Firm),
            "person" => Ok(NodeKind::Person),
            other => Err(format!("unknown node kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub kind: NodeKind,
    /// Exogenous endowment (operating revenue, voting stock, ...).
    pub value: f64,
}

impl NodeRecord {
    pub fn new(id: impl Into<String>, kind: NodeKind, value: f64) -> Self {
        NodeRecord { id: id.into(), kind, value }
    }

    pub fn firm(id: impl Into<String>, value: f64) -> Self {
        Self::new(id, NodeKind::Firm, value)
    }

    pub fn person(id: impl Into<String>, value: f64) -> Self {
        Self::new(id, NodeKind::Person, value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

impl EdgeRecord {
    pub fn new(source: impl Into<String>, target: impl Into<String>, weight: f64) -> Self {
        EdgeRecord { source: source.into(), target: target.into(), weight }
    }
}

/// Validated, immutable network.
#[derive(Debug, Clone)]
pub struct Network {
    nodes: Vec<NodeRecord>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize, f64)>,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
    directed: bool,
    ownership: bool,
}

/// Builds a directed network; `ownership` turns on share validation.
pub fn build_network(
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    ownership: bool,
) -> Result<Network> {
    Network::build(nodes, edges, true, ownership)
}

impl Network {
    pub fn build(
        mut nodes: Vec<NodeRecord>,
        edges: Vec<EdgeRecord>,
        directed: bool,
        ownership: bool,
    ) -> Result<Network> {
        if nodes.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        // ownership networks are inherently directed
        let directed = directed || ownership;
        nodes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            if !node.value.is_finite() || node.value < 0.0 {
                return Err(Error::InvalidNodeValue(node.id.clone(), node.value));
            }
            if index.insert(node.id.clone(), i).is_some() {
                return Err(Error::DuplicateNode(node.id.clone()));
            }
        }

        let n = nodes.len();
        let mut seen: BTreeMap<(usize, usize), ()> = BTreeMap::new();
        let mut resolved = Vec::with_capacity(edges.len());
        for e in &edges {
            let (Some(&s), Some(&t)) = (index.get(&e.source), index.get(&e.target)) else {
                return Err(Error::UnknownEndpoint(e.source.clone(), e.target.clone()));
            };
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::NegativeWeight(e.source.clone(), e.target.clone(), e.weight));
            }
            if ownership {
                if s == t {
                    return Err(Error::SelfLoopInOwnership(e.source.clone()));
                }
                if e.weight <= 0.0 || e.weight > 1.0 {
                    return Err(Error::ShareOutOfRange(
                        e.source.clone(),
                        e.target.clone(),
                        e.weight,
                    ));
                }
            }
            let key = if directed { (s, t) } else { (s.min(t), s.max(t)) };
            if seen.insert(key, ()).is_some() {
                return Err(Error::DuplicateEdge(e.source.clone(), e.target.clone()));
            }
            resolved.push((key.0, key.1, e.weight));
        }
        resolved.sort_by_key(|a| (a.0, a.1));

        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(s, t, w) in &resolved {
            out_adj[s].push((t, w));
            in_adj[t].push((s, w));
            if !directed && s != t {
                out_adj[t].push((s, w));
                in_adj[s].push((t, w));
            }
        }
        for list in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            list.sort_by_key(|&(j, _)| j);
        }

        if ownership {
            for (j, incoming) in in_adj.iter().enumerate() {
                let total: f64 = incoming.iter().map(|&(_, w)| w).sum();
                if total > 1.0 + OWNERSHIP_TOLERANCE {
                    return Err(Error::OwnershipOverflow(nodes[j].id.clone(), total));
                }
            }
        }

        Ok(Network { nodes, index, edges: resolved, out_adj, in_adj, directed, ownership })
    }

    pub fn directed(nodes: Vec<NodeRecord>, edges: Vec<EdgeRecord>) -> Result<Network> {
        Self::build(nodes, edges, true, false)
    }

    pub fn undirected(nodes: Vec<NodeRecord>, edges: Vec<EdgeRecord>) -> Result<Network> {
        Self::build(nodes, edges, false, false)
    }

    pub fn ownership(nodes: Vec<NodeRecord>, edges: Vec<EdgeRecord>) -> Result<Network> {
        Self::build(nodes, edges, true, true)
    }

    /// Convenience constructor: nodes are inferred from the edge endpoints
    /// (kind firm, value 0) plus any listed isolated ids.
    pub fn from_edge_list(
        edges: &[(&str, &str, f64)],
        isolated: &[&str],
        directed: bool,
    ) -> Result<Network> {
        let mut ids: Vec<&str> = edges.iter().flat_map(|&(s, t, _)| [s, t]).collect();
        ids.extend_from_slice(isolated);
        ids.sort_unstable();
        ids.dedup();
        let nodes = ids.into_iter().map(|id| NodeRecord::firm(id, 0.0)).collect();
        let edges = edges.iter().map(|&(s, t, w)| EdgeRecord::new(s, t, w)).collect();
        Self::build(nodes, edges, directed, false)
    }

    /// Rebuilds a non-ownership network from a dense matrix; nonzero entries become edges.
    pub fn from_matrix(ids: &[String], m: &DMatrix<f64>, directed: bool) -> Result<Network> {
        if m.nrows() != ids.len() || m.ncols() != ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} ids for a {}x{} matrix",
                ids.len(),
                m.nrows(),
                m.ncols()
            )));
        }
        let nodes = ids.iter().map(|id| NodeRecord::firm(id.clone(), 0.0)).collect();
        let mut edges = Vec::new();
        for i in 0..ids.len() {
            for j in 0..ids.len() {
                if m[(i, j)] != 0.0 && (directed || i <= j) {
                    edges.push(EdgeRecord::new(ids[i].clone(), ids[j].clone(), m[(i, j)]));
                }
            }
        }
        Self::build(nodes, edges, directed, false)
    }

    /// Same topology with every edge weight replaced by 1.
    pub fn with_unit_weights(&self) -> Network {
        let mut net = self.clone();
        net.ownership = false;
        for e in net.edges.iter_mut() {
            e.2 = 1.0;
        }
        for list in net.out_adj.iter_mut().chain(net.in_adj.iter_mut()) {
            for e in list.iter_mut() {
                e.1 = 1.0;
            }
        }
        net
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn is_ownership(&self) -> bool {
        self.ownership
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodeRecord {
        &self.nodes[i]
    }

    pub fn id(&self, i: usize) -> &str {
        &self.nodes[i].id
    }

    pub fn ids(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.id.clone()).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.value).collect()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index.get(id).copied().ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    /// Edges as `(source, target, weight)` index triples, sorted.
    /// Undirected edges appear once with `source <= target`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing neighbours; both directions for undirected networks.
    pub fn out_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.out_adj[i]
    }

    pub fn in_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.in_adj[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        self.out_adj[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .ok()
            .map(|p| self.out_adj[i][p].1)
    }

    /// `M[i][j]` = weight of `i -> j`; with `symmetrize`, `max(M, Mᵀ)`.
    pub fn adjacency_matrix(&self, symmetrize: bool) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, list) in self.out_adj.iter().enumerate() {
            for &(j, w) in list {
                m[(i, j)] = w;
            }
        }
        if symmetrize {
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = m[(i, j)].max(m[(j, i)]);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
        }
        m
    }

    /// 0/1 pattern of the adjacency matrix.
    pub fn binary_adjacency(&self, symmetrize: bool) -> DMatrix<f64> {
        self.adjacency_matrix(symmetrize).map(|w| if w != 0.0 { 1.0 } else { 0.0 })
    }

    /// Direct shareholders of `target`, sorted by shareholder id.
    pub fn shareholders_of(&self, target: &str) -> Result<Vec<(String, f64)>> {
        let t = self.index_of(target)?;
        Ok(self.in_adj[t].iter().map(|&(i, w)| (self.nodes[i].id.clone(), w)).collect())
    }

    /// Fraction of `j` not held by any identified shareholder.
    pub fn free_float(&self, j: usize) -> f64 {
        let held: f64 = self.in_adj[j].iter().map(|&(_, w)| w).sum();
        (1.0 - held).max(0.0)
    }

    /// Weakly connected components, each sorted, ordered by smallest member.
    pub fn weak_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &(v, _) in self.out_adj[u].iter().chain(self.in_adj[u].iter()) {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_weakly_connected(&self) -> bool {
        self.weak_components().len() == 1
    }
}
