//! Dense numerical kernels shared by the measure modules.
//!
//! Everything here is sized for desk-scale networks (a few thousand nodes at
//! most): dense LU, shifted power iteration, BFS/Dijkstra geodesics, Dinic
//! max-flow with path decomposition, and reduced-Laplacian inversion.

#![allow(clippy::needless_range_loop)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Network;

/// Pivots smaller than this in magnitude are treated as zero.
pub const PIVOT_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tolerance: 1e-10, max_iterations: 10_000 }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::param("tolerance", "must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations", "must be >= 1"));
        }
        Ok(())
    }
}

/// LU factorization with partial pivoting, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, m.ncols())));
        }
        let mut lu = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                lu[i * n + j] = m[(i, j)];
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|r| (r, lu[r * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot < PIVOT_EPS {
                return Err(Error::SingularMatrix(pivot));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[k * n + k];
            for r in (k + 1)..n {
                let f = lu[r * n + k] / d;
                lu[r * n + k] = f;
                if f != 0.0 {
                    for j in (k + 1)..n {
                        lu[r * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Ok(LuFactors { n, lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

pub fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum()).collect()
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Maximum absolute row sum.
pub fn matrix_inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

fn residual(m: &DMatrix<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    let mx = mat_vec(m, x);
    b.iter().zip(mx).map(|(bi, mi)| bi - mi).collect()
}

/// Solves `M x = b`, guaranteeing `‖Mx − b‖∞ ≤ tol·(1 + ‖b‖∞)`.
pub fn solve_linear(m: &DMatrix<f64>, b: &[f64], opts: &SolveOptions) -> Result<Vec<f64>> {
    opts.validate()?;
    if m.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} rows vs rhs of {}", m.nrows(), b.len())));
    }
    let lu = LuFactors::new(m)?;
    solve_with(&lu, m, b, opts)
}

fn solve_with(lu: &LuFactors, m: &DMatrix<f64>, b: &[f64], opts: &SolveOptions) -> Result<Vec<f64>> {
    let bound = opts.tolerance * (1.0 + inf_norm(b));
    let mut x = lu.solve(b);
    let mut r = residual(m, &x, b);
    // a few rounds of iterative refinement if the first solve is off
    for _ in 0..4 {
        if inf_norm(&r) <= bound {
            break;
        }
        let dx = lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        r = residual(m, &x, b);
    }
    let res = inf_norm(&r);
    if !res.is_finite() || res > bound {
        return Err(Error::ResidualTooLarge(res));
    }
    Ok(x)
}

/// Inverse of a square matrix, column by column through one LU.
pub fn invert(m: &DMatrix<f64>, opts: &SolveOptions) -> Result<DMatrix<f64>> {
    opts.validate()?;
    let n = m.nrows();
    let lu = LuFactors::new(m)?;
    let mut inv = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = solve_with(&lu, m, &e, opts)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// Largest eigenvalue modulus.
///
/// The spectrum is the union of the spectra of the diagonal blocks given by
/// the strongly connected components, so each block is handled on its own:
/// singletons contribute their diagonal entry, larger blocks go through the
/// real Schur form (power iteration if that stalls on a nonnegative block).
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    let mut rho: f64 = 0.0;
    for comp in strongly_connected_components(m) {
        let r = if comp.len() == 1 {
            m[(comp[0], comp[0])].abs()
        } else {
            let sub = DMatrix::from_fn(comp.len(), comp.len(), |i, j| m[(comp[i], comp[j])]);
            block_radius(sub)
        };
        rho = rho.max(r);
    }
    rho
}

fn block_radius(sub: DMatrix<f64>) -> f64 {
    let nonnegative = sub.iter().all(|&x| x >= 0.0);
    if let Some(schur) = sub.clone().try_schur(f64::EPSILON, 10_000) {
        return schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    if nonnegative {
        let opts = SolveOptions { tolerance: 1e-13, max_iterations: 1_000_000 };
        if let Ok((lambda, _)) = power_iterate(&sub, &opts) {
            return lambda;
        }
    }
    // Gelfand bound as a last resort
    let mut p = sub.clone();
    for _ in 0..6 {
        p = &p * &p;
    }
    matrix_inf_norm(&p).powf(1.0 / 64.0)
}

/// Strongly connected components of the nonzero pattern (`i -> j` when
/// `m[i][j] != 0`), each sorted, in order of smallest member.
pub fn strongly_connected_components(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let succ: Vec<Vec<usize>> =
        (0..n).map(|i| (0..n).filter(|&j| m[(i, j)] != 0.0).collect()).collect();
    scc_of(&succ)
}

/// Tarjan's algorithm over successor lists, iterative.
pub(crate) fn scc_of(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut k)) = call.last_mut() {
            if *k < succ[v].len() {
                let w = succ[v][*k];
                *k += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub eigenvalue: f64,
    /// Nonnegative, unit 1-norm.
    pub eigenvector: Vec<f64>,
}

/// Perron eigenpair of a nonnegative matrix by shifted power iteration.
///
/// The support pattern of `M + Mᵀ` is split into connected blocks; the block
/// with the largest Perron root wins, ties going to the block holding the
/// lowest index. The returned vector is supported on that block only.
pub fn dominant_eigenpair(m: &DMatrix<f64>, opts: &SolveOptions) -> Result<EigenResult> {
    opts.validate()?;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{}x{} is not square", n, m.ncols())));
    }
    if m.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::param("matrix", "entries must be finite and nonnegative"));
    }
    let norm = matrix_inf_norm(m);
    if norm == 0.0 {
        return Err(Error::ZeroMatrix);
    }

    let blocks = support_blocks(m);
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    for block in blocks {
        let sub = DMatrix::from_fn(block.len(), block.len(), |i, j| m[(block[i], block[j])]);
        if sub.iter().all(|&x| x == 0.0) {
            continue;
        }
        let (lambda, x) = power_iterate(&sub, opts)?;
        let better = match &best {
            None => true,
            Some((b, _, _)) => lambda > b + 1e-9 * b.max(1.0),
        };
        if better {
            best = Some((lambda, block, x));
        }
    }
    let (lambda, block, x) = best.ok_or(Error::ZeroMatrix)?;
    let mut v = vec![0.0; n];
    for (k, &i) in block.iter().enumerate() {
        v[i] = x[k];
    }
    let av = mat_vec(m, &v);
    let res = av.iter().zip(&v).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
    if res > opts.tolerance * norm {
        return Err(Error::NoConvergence(opts.max_iterations));
    }
    Ok(EigenResult { eigenvalue: lambda, eigenvector: v })
}

fn support_blocks(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut seen = vec![false; n];
    let mut blocks = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut block = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if !seen[v] && (m[(u, v)] != 0.0 || m[(v, u)] != 0.0) {
                    seen[v] = true;
                    block.push(v);
                    stack.push(v);
                }
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    blocks
}

fn power_iterate(m: &DMatrix<f64>, opts: &SolveOptions) -> Result<(f64, Vec<f64>)> {
    let n = m.nrows();
    let norm = matrix_inf_norm(m);
    // the shift makes the Perron root strictly dominant in modulus
    let shift = 0.5 * norm;
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..opts.max_iterations {
        let ax = mat_vec(m, &x);
        let lambda: f64 = ax.iter().sum::<f64>() / x.iter().sum::<f64>();
        let res = ax.iter().zip(&x).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
        if res <= 0.5 * opts.tolerance * norm {
            return Ok((lambda, x));
        }
        let mut y: Vec<f64> = ax.iter().zip(&x).map(|(a, b)| a + shift * b).collect();
        let s: f64 = y.iter().sum();
        if s == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        y.iter_mut().for_each(|v| *v /= s);
        x = y;
    }
    Err(Error::NoConvergence(opts.max_iterations))
}

/// Shortest-path distances and geodesic counts for every ordered pair.
#[derive(Debug, Clone)]
pub struct Geodesics {
    /// `f64::INFINITY` when unreachable; 0 on the diagonal.
    pub dist: Vec<Vec<f64>>,
    /// Number of distinct shortest paths; 1 on the diagonal.
    pub count: Vec<Vec<f64>>,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Hop-count (BFS) or edge-length (Dijkstra) geodesics following edge direction.
pub fn all_pairs_geodesics(net: &Network, weighted: bool) -> Result<Geodesics> {
    let n = net.len();
    if weighted {
        for &(s, t, w) in net.edges() {
            if w.is_nan() || w <= 0.0 {
                return Err(Error::NegativeEdgeLength(net.id(s).into(), net.id(t).into()));
            }
        }
    }
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    let mut count = vec![vec![0.0; n]; n];
    for s in 0..n {
        let d = &mut dist[s];
        let c = &mut count[s];
        d[s] = 0.0;
        c[s] = 1.0;
        if weighted {
            let mut done = vec![false; n];
            let mut heap = BinaryHeap::new();
            heap.push(HeapItem(0.0, s));
            while let Some(HeapItem(du, u)) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                for &(v, w) in net.out_edges(u) {
                    let alt = du + w;
                    if d[v].is_infinite() || (alt < d[v] && !same_length(alt, d[v])) {
                        d[v] = alt;
                        c[v] = c[u];
                        heap.push(HeapItem(alt, v));
                    } else if same_length(alt, d[v]) && !done[v] {
                        c[v] += c[u];
                    }
                }
            }
        } else {
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in net.out_edges(u) {
                    if d[v].is_infinite() {
                        d[v] = d[u] + 1.0;
                        queue.push_back(v);
                    }
                    if d[v] == d[u] + 1.0 {
                        c[v] += c[u];
                    }
                }
            }
        }
    }
    Ok(Geodesics { dist, count })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow {
    pub value: f64,
    /// Flow routed through each node other than source and sink, after
    /// discarding circulations from the path decomposition.
    pub throughflow: Vec<f64>,
}

const FLOW_EPS: f64 = 1e-12;

struct Dinic {
    to: Vec<usize>,
    cap: Vec<f64>,
    head: Vec<Vec<usize>>,
    level: Vec<i64>,
    iter: Vec<usize>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Dinic { to: vec![], cap: vec![], head: vec![vec![]; n], level: vec![0; n], iter: vec![0; n] }
    }

    fn add(&mut self, u: usize, v: usize, c: f64) -> usize {
        let id = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.head[u].push(id);
        self.to.push(u);
        self.cap.push(0.0);
        self.head[v].push(id + 1);
        id
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > FLOW_EPS && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, f: f64) -> f64 {
        if u == t {
            return f;
        }
        while self.iter[u] < self.head[u].len() {
            let e = self.head[u][self.iter[u]];
            let v = self.to[e];
            if self.cap[e] > FLOW_EPS && self.level[v] == self.level[u] + 1 {
                let d = self.dfs(v, t, f.min(self.cap[e]));
                if d > FLOW_EPS {
                    self.cap[e] -= d;
                    self.cap[e ^ 1] += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0.0
    }

    fn run(&mut self, s: usize, t: usize) -> f64 {
        let mut total = 0.0;
        while self.bfs(s, t) {
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = self.dfs(s, t, f64::INFINITY);
                if f <= FLOW_EPS {
                    break;
                }
                total += f;
            }
        }
        total
    }
}

/// Maximum `source -> sink` flow with edge weights as capacities.
pub fn max_flow(net: &Network, source: &str, sink: &str) -> Result<MaxFlow> {
    let s = net.index_of(source)?;
    let t = net.index_of(sink)?;
    max_flow_indexed(net, s, t)
}

/// Maximum flow value with node `removed` (if any) deleted from the network.
pub fn max_flow_value(net: &Network, s: usize, t: usize, removed: Option<usize>) -> Result<f64> {
    if s == t {
        return Err(Error::param("sink", "source and sink must differ"));
    }
    if removed == Some(s) || removed == Some(t) {
        return Ok(0.0);
    }
    let mut dinic = Dinic::new(net.len());
    for u in (0..net.len()).filter(|&u| Some(u) != removed) {
        for &(v, w) in net.out_edges(u) {
            if w > 0.0 && Some(v) != removed {
                dinic.add(u, v, w);
            }
        }
    }
    Ok(dinic.run(s, t))
}

pub fn max_flow_indexed(net: &Network, s: usize, t: usize) -> Result<MaxFlow> {
    let n = net.len();
    if s == t {
        return Err(Error::param("sink", "source and sink must differ"));
    }
    let mut dinic = Dinic::new(n);
    let mut arcs = Vec::new();
    for u in 0..n {
        for &(v, w) in net.out_edges(u) {
            if w > 0.0 {
                let id = dinic.add(u, v, w);
                arcs.push((u, v, id, w));
            }
        }
    }
    let value = dinic.run(s, t);

    // net flow per ordered pair, cancelling opposite directions
    let mut flow = vec![vec![0.0; n]; n];
    for &(u, v, id, w) in &arcs {
        flow[u][v] += w - dinic.cap[id];
    }
    for u in 0..n {
        for v in (u + 1)..n {
            let d = flow[u][v] - flow[v][u];
            flow[u][v] = d.max(0.0);
            flow[v][u] = (-d).max(0.0);
        }
    }

    let mut throughflow = vec![0.0; n];
    let mut remaining = value;
    while remaining > FLOW_EPS {
        let Some(path) = flow_path(&flow, s, t) else { break };
        let bottleneck = path.windows(2).map(|w| flow[w[0]][w[1]]).fold(f64::INFINITY, f64::min);
        if bottleneck <= FLOW_EPS {
            break;
        }
        for w in path.windows(2) {
            flow[w[0]][w[1]] -= bottleneck;
        }
        for &v in &path[1..path.len() - 1] {
            throughflow[v] += bottleneck;
        }
        remaining -= bottleneck;
    }
    Ok(MaxFlow { value, throughflow })
}

fn flow_path(flow: &[Vec<f64>], s: usize, t: usize) -> Option<Vec<usize>> {
    let n = flow.len();
    let mut prev = vec![usize::MAX; n];
    prev[s] = s;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        if u == t {
            break;
        }
        for v in 0..n {
            if prev[v] == usize::MAX && flow[u][v] > FLOW_EPS {
                prev[v] = u;
                q.push_back(v);
            }
        }
    }
    if prev[t] == usize::MAX {
        return None;
    }
    let mut path = vec![t];
    let mut cur = t;
    while cur != s {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

/// Laplacian `D − A` of the undirected (symmetrized) view.
pub fn laplacian(adjacency: &DMatrix<f64>) -> DMatrix<f64> {
    let n = adjacency.nrows();
    let mut l = -adjacency.clone();
    for i in 0..n {
        l[(i, i)] = 0.0;
        let deg: f64 = (0..n).filter(|&j| j != i).map(|j| adjacency[(i, j)]).sum();
        l[(i, i)] = deg;
    }
    l
}

fn connected(adjacency: &DMatrix<f64>) -> bool {
    support_blocks(adjacency).len() <= 1
}

/// Inverse of the Laplacian with `grounded` removed, re-embedded with a zero
/// row and column at the grounded index.
pub fn grounded_laplacian_inverse(net: &Network, grounded: &str) -> Result<DMatrix<f64>> {
    let g = net.index_of(grounded)?;
    grounded_inverse_of(&net.adjacency_matrix(true), g)
}

pub(crate) fn grounded_inverse_of(adjacency: &DMatrix<f64>, g: usize) -> Result<DMatrix<f64>> {
    let n = adjacency.nrows();
    if !connected(adjacency) {
        return Err(Error::DisconnectedGraph);
    }
    let l = laplacian(adjacency);
    let keep: Vec<usize> = (0..n).filter(|&i| i != g).collect();
    let reduced = DMatrix::from_fn(n - 1, n - 1, |i, j| l[(keep[i], keep[j])]);
    let inv = if n > 1 { invert(&reduced, &SolveOptions::default())? } else { reduced };
    let mut out = DMatrix::zeros(n, n);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[(i, j)] = inv[(a, b)];
        }
    }
    Ok(out)
}
