//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every check compares the library against an independent route (brute
//! force enumeration, truncated series, hand-derived fixtures, stored
//! manifests). Runs without the libtest harness so the lines always print.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netpower::centrality::{self, CentralityOptions};
use netpower::concentration::{self, ChainRule, ShareDistribution};
use netpower::flow::{self, PropagationOptions};
use netpower::hybrid::{self, PivotRule, SimulationConfig};
use netpower::numerics::{self, SolveOptions};
use netpower::optimize::{self, AcquisitionPlan, AcquisitionProblem, Variant};
use netpower::voting::{self, WeightedVotingGame};
use netpower::{EdgeRecord, Error, Network, NodeKind, NodeRecord};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x6e70_0000 + tag)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, limit: Duration) -> std::result::Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------- 1 & 2

/// Integer-weight game; the library sees the weights as `w/den`.
struct IntGame {
    w: Vec<i64>,
    q: i64,
}

fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn oracle_ss(g: &IntGame) -> Vec<BigRational> {
    let n = g.w.len();
    let mut pivots = vec![0i64; n];
    let mut total = 0i64;
    for_each_permutation(n, |p| {
        total += 1;
        let mut acc = 0;
        for &i in p {
            acc += g.w[i];
            if acc >= g.q {
                pivots[i] += 1;
                break;
            }
        }
    });
    pivots.iter().map(|&c| rat(c, total)).collect()
}

fn coalition_weight(g: &IntGame, mask: usize) -> i64 {
    (0..g.w.len()).filter(|i| mask >> i & 1 == 1).map(|i| g.w[i]).sum()
}

fn oracle_banzhaf_swings(g: &IntGame) -> Vec<i64> {
    let n = g.w.len();
    let mut eta = vec![0i64; n];
    for mask in 0..1usize << n {
        let s = coalition_weight(g, mask);
        if s < g.q {
            continue;
        }
        for (i, e) in eta.iter_mut().enumerate() {
            if mask >> i & 1 == 1 && s - g.w[i] < g.q {
                *e += 1;
            }
        }
    }
    eta
}

fn oracle_johnston(g: &IntGame) -> Option<Vec<BigRational>> {
    let n = g.w.len();
    let mut raw = vec![BigRational::zero(); n];
    for mask in 0..1usize << n {
        let s = coalition_weight(g, mask);
        if s < g.q {
            continue;
        }
        let critical: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1 && s - g.w[i] < g.q).collect();
        for &i in &critical {
            raw[i] += rat(1, critical.len() as i64);
        }
    }
    let total: BigRational = raw.iter().cloned().sum();
    if total.is_zero() {
        return None;
    }
    Some(raw.iter().map(|r| r / &total).collect())
}

fn exact_of(p: &voting::PowerProfile) -> Vec<BigRational> {
    p.exact.clone().expect("exact game yields exact profile")
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut r = rng(1);
    for case in 0..500 {
        let n = r.random_range(1..=8);
        let den = [1i64, 2, 3, 7, 10][case % 5];
        let w: Vec<i64> = (0..n).map(|_| r.random_range(0..=12)).collect();
        let total: i64 = w.iter().sum();
        if total == 0 {
            continue;
        }
        let q = r.random_range(1..=total);
        let g = IntGame { w, q };
        let game = WeightedVotingGame::exact(
            (1..=n).map(|i| format!("p{i}")).collect(),
            g.w.iter().map(|&x| rat(x, den)).collect(),
            rat(q, den),
        )
        .map_err(|e| format!("case {case}: {e}"))?;

        let ss = exact_of(&voting::shapley_shubik(&game).map_err(|e| e.to_string())?);
        ensure(ss == oracle_ss(&g), || format!("case {case}: SS {ss:?}"))?;

        let eta = oracle_banzhaf_swings(&g);
        let raw = exact_of(&voting::banzhaf(&game, false).map_err(|e| e.to_string())?);
        let expect: Vec<BigRational> =
            eta.iter().map(|&e| BigRational::new(e.into(), BigInt::one() << (n - 1))).collect();
        ensure(raw == expect, || format!("case {case}: Banzhaf raw"))?;
        let swings: i64 = eta.iter().sum();
        match voting::banzhaf(&game, true) {
            Ok(p) => {
                let norm: Vec<BigRational> = eta.iter().map(|&e| rat(e, swings)).collect();
                ensure(exact_of(&p) == norm, || format!("case {case}: Banzhaf normalized"))?;
            }
            Err(Error::AllPowerless) => ensure(swings == 0, || format!("case {case}: spurious AllPowerless"))?,
            Err(e) => return Err(format!("case {case}: {e}")),
        }

        match (voting::johnston(&game), oracle_johnston(&g)) {
            (Ok(p), Some(o)) => ensure(exact_of(&p) == o, || format!("case {case}: Johnston"))?,
            (Err(Error::NoVulnerableCoalitions), None) => {}
            (got, want) => return Err(format!("case {case}: Johnston {got:?} vs {want:?}")),
        }
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!("500 games exact, {:.1?}", start.elapsed()))
}

fn criterion_2() -> Check {
    let names = |n: usize| (1..=n).map(|i| i.to_string()).collect::<Vec<_>>();
    let g1 = WeightedVotingGame::parse_exact(names(3), &["49", "49", "2"], "50").map_err(|e| e.to_string())?;
    let ss = exact_of(&voting::shapley_shubik(&g1).map_err(|e| e.to_string())?);
    ensure(ss == vec![rat(1, 3); 3], || format!("SS {ss:?}"))?;

    let g2 = WeightedVotingGame::parse_exact(names(3), &["2", "1", "1"], "3").map_err(|e| e.to_string())?;
    let b = exact_of(&voting::banzhaf(&g2, true).map_err(|e| e.to_string())?);
    ensure(b == vec![rat(3, 5), rat(1, 5), rat(1, 5)], || format!("beta' {b:?}"))?;
    let j = exact_of(&voting::johnston(&g2).map_err(|e| e.to_string())?);
    ensure(j == vec![rat(2, 3), rat(1, 6), rat(1, 6)], || format!("Johnston {j:?}"))?;
    Ok("SS (1/3,1/3,1/3), beta' (3/5,1/5,1/5), J (2/3,1/6,1/6)".into())
}

// ---------------------------------------------------------------- 3

fn random_connected(r: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if r.random_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        if connected(n, &edges) {
            return edges;
        }
    }
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
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

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

fn undirected(n: usize, edges: &[(usize, usize)]) -> Network {
    let ids = names(n);
    let list: Vec<(&str, &str, f64)> = edges.iter().map(|&(a, b)| (ids[a].as_str(), ids[b].as_str(), 1.0)).collect();
    let iso: Vec<&str> = ids.iter().map(String::as_str).collect();
    Network::from_edge_list(&list, &iso, false).expect("valid graph")
}

/// All simple paths from `s` to `t`.
fn simple_paths(adj: &[Vec<usize>], s: usize, t: usize) -> Vec<Vec<usize>> {
    fn walk(adj: &[Vec<usize>], t: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == t {
            out.push(path.clone());
            return;
        }
        for &v in &adj[u] {
            if !path.contains(&v) {
                path.push(v);
                walk(adj, t, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(adj, t, &mut vec![s], &mut out);
    out
}

fn adjacency_lists(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

fn criterion_3() -> Check {
    let mut r = rng(3);
    let opts = CentralityOptions::default();
    let mut worst_residual: f64 = 0.0;
    for case in 0..200 {
        let n = r.random_range(2..=7);
        let edges = random_connected(&mut r, n, 0.45);
        let net = undirected(n, &edges);
        let adj = adjacency_lists(n, &edges);
        let geo = numerics::all_pairs_geodesics(&net, false).map_err(|e| e.to_string())?;
        let mut between = vec![0.0; n];
        for s in 0..n {
            for t in 0..n {
                if s == t {
                    continue;
                }
                let paths = simple_paths(&adj, s, t);
                let shortest = paths.iter().map(Vec::len).min().unwrap() - 1;
                let geodesics: Vec<&Vec<usize>> = paths.iter().filter(|p| p.len() - 1 == shortest).collect();
                ensure(geo.dist[s][t] == shortest as f64, || format!("case {case}: dist {s}->{t}"))?;
                ensure(geo.count[s][t] == geodesics.len() as f64, || format!("case {case}: count {s}->{t}"))?;
                if s < t {
                    for p in &geodesics {
                        for &v in &p[1..p.len() - 1] {
                            between[v] += 1.0 / geodesics.len() as f64;
                        }
                    }
                }
            }
        }
        let b = centrality::betweenness_centrality(&net, &opts).map_err(|e| e.to_string())?;
        for (i, (&got, &want)) in b.values.iter().zip(&between).enumerate() {
            ensure((got - want).abs() <= 1e-9, || format!("case {case}: betweenness {i}: {got} vs {want}"))?;
        }

        let e = centrality::eigenvector_centrality(&net, &opts).map_err(|e| e.to_string())?;
        let a = net.adjacency_matrix(true);
        let x = DVector::from_vec(e.values.clone());
        let ax = &a * &x;
        let lambda = x.dot(&ax) / x.dot(&x);
        let residual = (ax - &x * lambda).amax();
        worst_residual = worst_residual.max(residual);
        ensure(residual <= 1e-8, || format!("case {case}: eigen residual {residual:e}"))?;
    }

    let mut worst_tree: f64 = 0.0;
    for case in 0..200 {
        let n = r.random_range(2..=8);
        let edges: Vec<(usize, usize)> = (1..n).map(|v| (r.random_range(0..v), v)).collect();
        let net = undirected(n, &edges);
        let cb = centrality::betweenness_centrality(&net, &opts).map_err(|e| e.to_string())?;
        let cw = centrality::walk_betweenness(&net, &opts).map_err(|e| e.to_string())?;
        for (x, y) in cb.values.iter().zip(&cw.values) {
            worst_tree = worst_tree.max((x - y).abs());
        }
        ensure(worst_tree <= 1e-8, || format!("tree {case}: |C_W - C_B| = {worst_tree:e}"))?;
    }
    Ok(format!(
        "200 graphs match path enumeration; eigen residual <= {worst_residual:.1e}; trees |C_W-C_B| <= {worst_tree:.1e}"
    ))
}

// ---------------------------------------------------------------- 4

fn ownership_net(n: usize, edges: &[(usize, usize, f64)], values: &[f64], persons: usize) -> Network {
    let ids = names(n);
    let nodes = (0..n)
        .map(|i| {
            if i < persons {
                NodeRecord::person(ids[i].clone(), values[i])
            } else {
                NodeRecord::firm(ids[i].clone(), values[i])
            }
        })
        .collect();
    let edges = edges.iter().map(|&(a, b, w)| EdgeRecord::new(ids[a].clone(), ids[b].clone(), w)).collect();
    Network::ownership(nodes, edges).expect("valid ownership network")
}

/// Random ownership edges; incoming shares per node sum to at most `cap`.
fn random_shares(r: &mut ChaCha8Rng, n: usize, p: f64, dag: bool, cap: f64) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for j in 0..n {
        let mut room = cap;
        for i in 0..n {
            if i == j || (dag && i >= j) || !r.random_bool(p) {
                continue;
            }
            let s = (r.random_range(0.05..0.6) * room * 100.0).round() / 100.0;
            if s >= 0.01 {
                edges.push((i, j, s));
                room -= s;
            }
        }
    }
    edges
}

fn criterion_4() -> Check {
    let mut r = rng(4);
    let mut worst = BTreeMap::<&str, f64>::new();
    let mut note = |k: &'static str, v: f64| {
        let e = worst.entry(k).or_insert(0.0);
        *e = e.max(v);
    };
    for case in 0..200 {
        let n = r.random_range(2..=9);
        let dag = case % 2 == 0;
        let edges = random_shares(&mut r, n, 0.4, dag, 0.95);
        let values: Vec<f64> = (0..n).map(|_| r.random_range(0.0..10.0)).collect();
        let net = ownership_net(n, &edges, &values, 0);
        let c = net.adjacency_matrix(false);
        let v = DVector::from_vec(values.clone());
        let ncv = flow::ncv(&net).map_err(|e| format!("case {case}: {e}"))?;
        let x = DVector::from_vec(ncv.values.clone());
        let residual = ((DMatrix::identity(n, n) - &c) * &x - &c * &v).amax();
        note("ncv_residual", residual);
        ensure(residual <= 1e-9, || format!("case {case}: NCV residual {residual:e}"))?;

        let nn = flow::nncv(&net).map_err(|e| format!("case {case}: {e}"))?;
        if dag {
            // C is nilpotent: the walk sum terminates after n terms
            let mut term = &c * &v;
            let mut walk = term.clone();
            for _ in 1..n {
                term = &c * term;
                walk += &term;
            }
            let gap = (walk - &x).amax();
            note("dag_walk_gap", gap);
            ensure(gap <= 1e-12, || format!("case {case}: DAG walk-sum gap {gap:e}"))?;
            for (a, b) in nn.values.iter().zip(&ncv.values) {
                note("dag_nncv_gap", (a - b).abs());
                ensure((a - b).abs() <= 1e-12, || format!("case {case}: nNCV {a} != NCV {b} on DAG"))?;
            }
        } else {
            for (a, b) in nn.values.iter().zip(&ncv.values) {
                ensure(*a <= b + 1e-12, || format!("case {case}: nNCV {a} > NCV {b}"))?;
            }
        }

        // Katz against its truncated series at half the convergence bound
        let norm = numerics::matrix_inf_norm(&c).max(1e-3);
        let alpha = 0.5 / norm;
        let k = flow::katz_influence(&net, alpha, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let mut power = c.clone();
        let mut series = c.clone();
        let mut tail = norm * 0.5 / (1.0 - 0.5);
        let mut steps = 0;
        while tail >= 1e-10 {
            power = &power * &c * alpha;
            series += &power;
            tail *= 0.5;
            steps += 1;
        }
        let gap = (&k.matrix - &series).amax();
        note("katz_gap", gap);
        ensure(gap <= 1e-10 + 1e-12, || format!("case {case}: Katz gap {gap:e} after {steps} terms"))?;

        // PageRank fixed point
        let pr = flow::pagerank(&net, &PropagationOptions::default()).map_err(|e| e.to_string())?;
        let a = net.binary_adjacency(false);
        let d = 0.85;
        let mut next = vec![1.0 - d; n];
        for j in 0..n {
            let out: f64 = a.row(j).sum();
            for (i, slot) in next.iter_mut().enumerate() {
                let p = if out > 0.0 { a[(j, i)] / out } else { 1.0 / n as f64 };
                *slot += d * p * pr.values[j];
            }
        }
        let res = next.iter().zip(&pr.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        note("pagerank_residual", res);
        ensure(res <= 1e-10, || format!("case {case}: PageRank residual {res:e}"))?;
    }
    Ok(format!("200 networks; worst {worst:?}"))
}

// ---------------------------------------------------------------- 5

struct Instance {
    net: Network,
    targets: Vec<usize>,
    alpha: Vec<f64>,
    price: Vec<f64>,
}

fn random_instance(r: &mut ChaCha8Rng) -> Instance {
    let n = r.random_range(3..=13);
    let edges = random_shares(r, n, 0.35, false, 1.0);
    let persons = r.random_range(0..=2.min(n - 1));
    let values: Vec<f64> = (0..n).map(|_| 1.0).collect();
    let net = ownership_net(n, &edges, &values, persons);
    let k = r.random_range(1..=2.min(n - 1));
    let mut targets = Vec::new();
    while targets.len() < k {
        let t = r.random_range(0..n);
        if !targets.contains(&t) {
            targets.push(t);
        }
    }
    targets.sort_unstable();
    let alpha = (0..n).map(|_| [0.5, 0.3, 0.6, 0.51][r.random_range(0..4)]).collect();
    let price = (0..n).map(|_| r.random_range(1..=4) as f64 * 0.5).collect();
    Instance { net, targets, alpha, price }
}

/// Stakes of `i` in `j` that count under the variant's rules.
fn counts(inst: &Instance, variant: Variant, i: usize, j: usize) -> bool {
    let target = |x: usize| inst.targets.contains(&x);
    match variant {
        Variant::Ic | Variant::Ccp => true,
        Variant::Ic2 => target(j) || !target(i),
        Variant::Ic3 => (target(j) || !target(i)) && inst.net.weight(j, i).is_none(),
    }
}

fn stake_from(inst: &Instance, variant: Variant, j: usize, from: impl Fn(usize) -> bool) -> f64 {
    (0..inst.net.len())
        .filter(|&i| from(i) && counts(inst, variant, i, j))
        .filter_map(|i| inst.net.weight(i, j))
        .sum()
}

/// Cheapest cost by exhaustive enumeration of every controlled set; for
/// CCP by a certification-order DP over every node subset.
fn brute_force(inst: &Instance, variant: Variant) -> Option<f64> {
    let n = inst.net.len();
    let free_float = |j: usize| inst.net.free_float(j);
    let tmask: usize = inst.targets.iter().map(|&t| 1 << t).sum();
    if variant == Variant::Ccp {
        let mut best = vec![f64::INFINITY; 1 << n];
        best[0] = 0.0;
        let mut answer = f64::INFINITY;
        for s in 0..1usize << n {
            if best[s].is_infinite() {
                continue;
            }
            if s & tmask == tmask {
                answer = answer.min(best[s]);
            }
            for a in (0..n).filter(|&a| s >> a & 1 == 0) {
                let need = (inst.alpha[a] - stake_from(inst, variant, a, |i| s >> i & 1 == 1)).max(0.0);
                if need > free_float(a) + 1e-9 {
                    continue;
                }
                let c = best[s] + inst.price[a] * need;
                let t = s | 1 << a;
                if c < best[t] {
                    best[t] = c;
                }
            }
        }
        return answer.is_finite().then_some(answer);
    }
    let mut answer = f64::INFINITY;
    'sets: for s in 0..1usize << n {
        if s & tmask != tmask {
            continue;
        }
        let mut cost = 0.0;
        for j in (0..n).filter(|&j| s >> j & 1 == 1) {
            let need = (inst.alpha[j] - stake_from(inst, variant, j, |i| s >> i & 1 == 1)).max(0.0);
            if need > free_float(j) + 1e-9 {
                continue 'sets;
            }
            cost += inst.price[j] * need;
        }
        answer = answer.min(cost);
    }
    answer.is_finite().then_some(answer)
}

/// Re-checks a plan against the control constraints from scratch.
fn recheck(inst: &Instance, variant: Variant, plan: &AcquisitionPlan) -> std::result::Result<(), String> {
    let n = inst.net.len();
    for &t in &inst.targets {
        ensure(plan.controlled[t], || format!("target {t} not controlled"))?;
    }
    let position: Vec<Option<usize>> = match (&plan.order, variant) {
        (Some(order), Variant::Ccp) => {
            let mut pos = vec![None; n];
            for (k, id) in order.iter().enumerate() {
                pos[inst.net.index_of(id).map_err(|e| e.to_string())?] = Some(k);
            }
            ensure((0..n).all(|j| pos[j].is_some() == plan.controlled[j]), || "order != controlled set".into())?;
            pos
        }
        (None, Variant::Ccp) => return Err("CCP plan without order".into()),
        _ => vec![Some(0); n],
    };
    let mut cost = 0.0;
    for j in 0..n {
        let z = plan.purchases[j];
        ensure(z >= 0.0, || format!("negative purchase at {j}"))?;
        ensure(z <= inst.net.free_float(j) + 1e-9, || format!("purchase beyond free float at {j}"))?;
        cost += z * inst.price[j];
        if !plan.controlled[j] {
            ensure(z == 0.0, || format!("purchase of uncontrolled {j}"))?;
            continue;
        }
        let earlier = |i: usize| {
            plan.controlled[i] && (variant != Variant::Ccp || position[i] < position[j])
        };
        let held = z + stake_from(inst, variant, j, earlier);
        ensure(held + 1e-9 >= inst.alpha[j], || format!("{j} holds {held} < {}", inst.alpha[j]))?;
    }
    ensure((cost - plan.total_cost).abs() <= 1e-9, || format!("cost {cost} vs reported {}", plan.total_cost))
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let mut r = rng(5);
    let mut feasible = 0;
    for case in 0..300 {
        let inst = random_instance(&mut r);
        let ids = inst.net.ids();
        let targets: Vec<&str> = inst.targets.iter().map(|&t| ids[t].as_str()).collect();
        let mut costs = BTreeMap::new();
        for variant in Variant::ALL {
            let mut prob = AcquisitionProblem::new(inst.net.clone(), &targets, variant).map_err(|e| e.to_string())?;
            for (i, id) in ids.iter().enumerate() {
                prob.set_threshold(id, inst.alpha[i]).map_err(|e| e.to_string())?;
                prob.set_price(id, inst.price[i]).map_err(|e| e.to_string())?;
            }
            let oracle = brute_force(&inst, variant);
            match (optimize::solve_min_cost_control(&prob), oracle) {
                (Ok(plan), Some(best)) => {
                    ensure((plan.total_cost - best).abs() <= 1e-9, || {
                        format!("case {case} {}: {} vs oracle {best}", variant.name(), plan.total_cost)
                    })?;
                    recheck(&inst, variant, &plan).map_err(|e| format!("case {case} {}: {e}", variant.name()))?;
                    costs.insert(variant.name(), best);
                }
                (Err(Error::Infeasible), None) => {}
                (got, want) => {
                    return Err(format!("case {case} {}: {got:?} vs oracle {want:?}", variant.name()));
                }
            }
        }
        if let Some(&ccp) = costs.get("ccp") {
            let ic = *costs.get("ic").ok_or_else(|| format!("case {case}: CCP feasible, IC not"))?;
            ensure(ccp + 1e-9 >= ic, || format!("case {case}: CCP {ccp} < IC {ic}"))?;
        }
        if costs.contains_key("ic") {
            feasible += 1;
        }
    }
    within_budget(start, Duration::from_secs(120))?;
    Ok(format!("300 instances ({feasible} feasible) x 4 variants, {:.1?}", start.elapsed()))
}

// ---------------------------------------------------------------- 6

fn single_firm() -> Network {
    Network::ownership(
        vec![
            NodeRecord::person("a", 0.0),
            NodeRecord::person("b", 0.0),
            NodeRecord::person("c", 0.0),
            NodeRecord::firm("f", 1.0),
        ],
        vec![EdgeRecord::new("a", "f", 0.49), EdgeRecord::new("b", "f", 0.49), EdgeRecord::new("c", "f", 0.02)],
    )
    .expect("valid network")
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let net = single_firm();
    let t = 200_000usize;
    let game = WeightedVotingGame::parse_exact(vec!["a".into(), "b".into(), "c".into()], &["0.49", "0.49", "0.02"], "0.5")
        .map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for (rule, exact) in [
        (PivotRule::ShapleyOrder, voting::shapley_shubik(&game).map_err(|e| e.to_string())?),
        (PivotRule::JohnstonSplit, voting::johnston(&game).map_err(|e| e.to_string())?),
    ] {
        let cfg = SimulationConfig { iterations: t, quota: 0.5, seed: 11, pivot_rule: rule, ..Default::default() };
        let run = hybrid::npi(&net, &cfg).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for id in ["a", "b", "c"] {
            let p = exact.get(id).unwrap();
            let got = run.frequency(id, "f").unwrap();
            let band = 4.0 * (p * (1.0 - p) / t as f64).sqrt();
            worst = worst.max((got - p).abs() / band);
            ensure((got - p).abs() <= band, || format!("{rule:?} {id}: {got} vs {p} (band {band:e})"))?;
        }
        lines.push(format!("{rule:?} max |err|/band {worst:.2}"));
        let again = hybrid::npi(&net, &cfg).map_err(|e| e.to_string())?;
        ensure(
            again.scores.values.iter().zip(&run.scores.values).all(|(x, y)| x.to_bits() == y.to_bits())
                && again.pivot_frequency == run.pivot_frequency,
            || format!("{rule:?}: rerun differs"),
        )?;
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!("T = {t}: {}; reruns bit-identical; {:.1?}", lines.join(", "), start.elapsed()))
}

// ---------------------------------------------------------------- 7

/// Apex person over a tree of firms, each held by a majority parent and
/// up to two smaller stakes.
fn random_pyramid(r: &mut ChaCha8Rng) -> (Network, String, String) {
    let firms = r.random_range(1..=7);
    let minors = r.random_range(0..=2);
    let mut nodes = vec![NodeRecord::person("apex", 0.0)];
    for m in 0..minors {
        nodes.push(NodeRecord::person(format!("m{m}"), 0.0));
    }
    let firm_id = |k: usize| format!("f{k}");
    let mut edges = Vec::new();
    for k in 0..firms {
        nodes.push(NodeRecord::firm(firm_id(k), r.random_range(1.0..5.0)));
        let parent = if k == 0 { "apex".to_string() } else { firm_id(r.random_range(0..k)) };
        let major = (r.random_range(0.51..0.9f64) * 100.0).round() / 100.0;
        edges.push(EdgeRecord::new(parent.clone(), firm_id(k), major));
        let mut room = 1.0 - major;
        let mut others: Vec<String> = (0..minors).map(|m| format!("m{m}")).collect();
        others.extend((0..k).map(firm_id).filter(|f| *f != parent));
        for _ in 0..2 {
            if others.is_empty() || room < 0.02 {
                break;
            }
            let who = others.swap_remove(r.random_range(0..others.len()));
            let s = ((r.random_range(0.1..0.9) * room).min(major - 0.01) * 100.0).floor() / 100.0;
            if s >= 0.01 {
                edges.push(EdgeRecord::new(who, firm_id(k), s));
                room -= s;
            }
        }
    }
    let deepest = firm_id(firms - 1);
    (Network::ownership(nodes, edges).expect("valid pyramid"), firm_id(0), deepest)
}

fn criterion_7() -> Check {
    let mut r = rng(7);
    for case in 0..100 {
        let (net, root, _) = random_pyramid(&mut r);
        let uc = concentration::ultimate_control(&net, 0.2, ChainRule::WeakestLink).map_err(|e| e.to_string())?;
        for u in uc.iter().filter(|u| u.target.starts_with('f')) {
            ensure(u.owner == "apex", || format!("case {case}: ultimate owner of {} is {}", u.target, u.owner))?;
        }
        let icon = flow::alpha_icon_controllers(&net, &PropagationOptions::default(), 0.5).map_err(|e| e.to_string())?;
        let at_root = icon.iter().find(|c| c.firm == root).and_then(|c| c.controller.clone());
        ensure(at_root.as_deref() == Some("apex"), || format!("case {case}: alpha-ICON names {at_root:?}"))?;
        let cfg = SimulationConfig { iterations: 200, seed: case, ..Default::default() };
        let npi = hybrid::npi(&net, &cfg).map_err(|e| e.to_string())?;
        let top = npi
            .scores
            .ranking()
            .into_iter()
            .find(|id| net.node(net.index_of(id).unwrap()).kind == NodeKind::Person)
            .map(str::to_string);
        ensure(top.as_deref() == Some("apex"), || format!("case {case}: top NPI person {top:?}"))?;
    }
    Ok("100 pyramids: ultimate owner, alpha-ICON root controller and top NPI person all name the apex".into())
}

// ---------------------------------------------------------------- 8

fn criterion_8() -> Check {
    let d = ShareDistribution::parse(vec!["a".into(), "b".into(), "c".into()], &["0.6", "0.2", "0.2"])
        .map_err(|e| e.to_string())?;
    let h = concentration::hhi(&d).map_err(|e| e.to_string())?;
    ensure(h == 0.44, || format!("HHI {h:?}"))?;
    ensure(concentration::hhi_exact(&d) == Some(rat(11, 25)), || "exact HHI".into())?;

    let mut r = rng(8);
    for case in 0..1000 {
        let n = r.random_range(1..=12);
        let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        let ids = (0..n).map(|i| i.to_string()).collect();
        let dist = ShareDistribution::from_amounts(ids, &raw).map_err(|e| e.to_string())?;
        let mut prev = 0.0;
        for k in 1..=n {
            let v = concentration::top_k(&dist, k).map_err(|e| e.to_string())?;
            ensure(v + 1e-15 >= prev, || format!("case {case}: top_{k} {v} < {prev}"))?;
            prev = v;
        }
        ensure((prev - 1.0).abs() <= 1e-12, || format!("case {case}: top_n = {prev}"))?;

        if n <= 10 {
            let level = r.random_range(0.05..=1.0);
            let res = concentration::nci(&dist, level).map_err(|e| e.to_string())?;
            let sum = |mask: usize| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| dist.shares()[i]).sum::<f64>();
            let minimal = (0..1usize << n)
                .filter(|&m| sum(m) + 1e-12 >= level)
                .map(|m| m.count_ones() as usize)
                .min()
                .unwrap();
            ensure(res.members.len() == minimal, || {
                format!("case {case}: NCI set {} vs minimal {minimal}", res.members.len())
            })?;
            ensure(res.covered + 1e-12 >= level, || format!("case {case}: NCI covers {}", res.covered))?;
        }
    }
    Ok("HHI = 0.44 exactly; top-k monotone on 1000; NCI minimal by subset search".into())
}

// ---------------------------------------------------------------- 9

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

fn criterion_9() -> Check {
    let dir = fixtures();
    let mut seen = Vec::new();
    for (doc, want_exit) in [("betweenness.json", 0), ("npi_seeded.json", 0), ("ncv_divergent.json", 2)] {
        let stored = std::fs::read_to_string(dir.join(doc)).map_err(|e| format!("{doc}: {e}"))?;
        let out = Command::new(env!("CARGO_BIN_EXE_netpower"))
            .args(["replay", doc])
            .current_dir(&dir)
            .output()
            .map_err(|e| e.to_string())?;
        let code = out.status.code().unwrap_or(-1);
        ensure(code == want_exit, || format!("{doc}: exit {code}, want {want_exit}"))?;
        ensure(out.stdout == stored.as_bytes(), || format!("{doc}: replay output differs"))?;
        seen.push(format!("{doc} exit {code}"));
    }
    Ok(format!("byte-identical replays: {}", seen.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("classical-index oracle suite", criterion_1),
        ("hand-derived voting fixtures", criterion_2),
        ("centrality oracle suite", criterion_3),
        ("flow-measure consistency", criterion_4),
        ("optimization exactness", criterion_5),
        ("hybrid convergence", criterion_6),
        ("cross-family coherence", criterion_7),
        ("concentration fixtures", criterion_8),
        ("CLI reproducibility", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
