// Independent reference computations checked against the library.

use std::collections::BTreeSet;

use localdense::graph::build_bipartite;
use localdense::growth::run_process;
use localdense::io::{generate_planted, PlantedConfig};
use localdense::oracle::{exact_densest, good_seed_set, top_eigenvalue};
use localdense::{
    global_density, local_density, local_guarantee_bound, BipartiteGraph, LevelVector,
    LocalSchedule, Side, VertexId,
};
use proptest::prelude::*;

type EdgeSpec = Vec<(u8, u8, u8)>;

fn graph_from(edges: &EdgeSpec) -> Option<BipartiteGraph> {
    build_bipartite(
        edges
            .iter()
            .map(|&(l, r, w)| (format!("l{l}"), format!("r{r}"), w as f64)),
    )
    .ok()
}

fn edges_strategy(side: u8, max_edges: usize, max_w: u8) -> impl Strategy<Value = EdgeSpec> {
    prop::collection::vec((0..side, 0..side, 1..=max_w), 1..max_edges)
}

/// Weight lookup from the edge iterator only.
fn weight_matrix(g: &BipartiteGraph) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut w = vec![vec![0.0; n]; n];
    for (l, r, x) in g.edges() {
        w[l.index()][r.index()] += x;
        w[r.index()][l.index()] += x;
    }
    w
}

/// Enumerates every nonempty S ⊆ L and T ⊆ R.
fn naive_densest(g: &BipartiteGraph) -> f64 {
    let w = weight_matrix(g);
    let ls: Vec<usize> = g.left_vertices().map(|v| v.index()).collect();
    let rs: Vec<usize> = g.right_vertices().map(|v| v.index()).collect();
    let mut best = 0.0f64;
    for sm in 1u32..(1 << ls.len()) {
        for tm in 1u32..(1 << rs.len()) {
            let mut e = 0.0;
            for (a, &u) in ls.iter().enumerate() {
                if sm >> a & 1 == 1 {
                    for (b, &v) in rs.iter().enumerate() {
                        if tm >> b & 1 == 1 {
                            e += w[u][v];
                        }
                    }
                }
            }
            let d = e / ((sm.count_ones() * tm.count_ones()) as f64).sqrt();
            best = best.max(d);
        }
    }
    best
}

#[test]
fn closed_form_complete_graphs() {
    for a in 1..=5usize {
        for b in 1..=5usize {
            let g = build_bipartite(
                (0..a).flat_map(|i| (0..b).map(move |j| (format!("l{i}"), format!("r{j}"), 1.0))),
            )
            .unwrap();
            let want = ((a * b) as f64).sqrt();
            assert!((naive_densest(&g) - want).abs() < 1e-12);
            assert!((exact_densest(&g, 20).unwrap().density() - want).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_matches_naive(edges in edges_strategy(6, 20, 4)) {
        let g = graph_from(&edges).unwrap();
        let naive = naive_densest(&g);
        let exact = exact_densest(&g, 20).unwrap();
        prop_assert!((exact.density() - naive).abs() <= 1e-12 * naive.max(1.0));
        // the reported sets really achieve the reported density
        let again = g.density(exact.left(), exact.right()).unwrap();
        prop_assert!((again.density() - exact.density()).abs() <= 1e-12 * naive.max(1.0));
    }

    #[test]
    fn spectral_bound_dominates(edges in edges_strategy(6, 20, 5)) {
        let g = graph_from(&edges).unwrap();
        let eig = top_eigenvalue(&g, 1e-10, 100_000).unwrap();
        prop_assert!(eig.value + eig.residual >= naive_densest(&g));
    }

    #[test]
    fn density_is_side_symmetric(edges in edges_strategy(8, 30, 3), ms in any::<u16>(), mt in any::<u16>()) {
        let g = graph_from(&edges).unwrap();
        let h = g.transposed();
        let s: Vec<VertexId> = g.left_vertices().enumerate().filter(|(k, _)| ms >> (k % 16) & 1 == 1).map(|(_, v)| v).collect();
        let t: Vec<VertexId> = g.right_vertices().enumerate().filter(|(k, _)| mt >> (k % 16) & 1 == 1).map(|(_, v)| v).collect();
        prop_assume!(!s.is_empty() && !t.is_empty());
        let s2: Vec<VertexId> = s.iter().map(|&v| h.find(Side::Right, g.label(v)).unwrap()).collect();
        let t2: Vec<VertexId> = t.iter().map(|&v| h.find(Side::Left, g.label(v)).unwrap()).collect();
        let d1 = g.density(&s, &t).unwrap().density();
        let d2 = h.density(&t2, &s2).unwrap().density();
        prop_assert_eq!(d1, d2);
    }

    #[test]
    fn restrict_preserves_density(edges in edges_strategy(8, 30, 3), ms in any::<u16>(), mt in any::<u16>()) {
        let g = graph_from(&edges).unwrap();
        let s: Vec<VertexId> = g.left_vertices().enumerate().filter(|(k, _)| ms >> (k % 16) & 1 == 1).map(|(_, v)| v).collect();
        let t: Vec<VertexId> = g.right_vertices().enumerate().filter(|(k, _)| mt >> (k % 16) & 1 == 1).map(|(_, v)| v).collect();
        prop_assume!(!s.is_empty() && !t.is_empty());
        let d = g.density(&s, &t).unwrap();
        match g.restrict(&s, &t) {
            Ok(h) => {
                let all_l: Vec<VertexId> = h.left_vertices().collect();
                let all_r: Vec<VertexId> = h.right_vertices().collect();
                let dh = h.density(&all_l, &all_r).unwrap();
                prop_assert!((dh.edge_weight() - d.edge_weight()).abs() < 1e-9);
                prop_assert_eq!(dh.density(), d.density());
            }
            Err(_) => prop_assert_eq!(d.edge_weight(), 0.0),
        }
    }

    #[test]
    fn local_and_global_never_beat_exact(edges in edges_strategy(6, 24, 3), k in 1usize..12) {
        let g = graph_from(&edges).unwrap();
        let opt = naive_densest(&g);
        let gd = global_density(&g, false).unwrap().subgraph.density();
        prop_assert!(gd <= opt + 1e-12 * opt);
        for v in g.left_vertices() {
            if let Ok(r) = local_density(&g, v, k, false) {
                prop_assert!(r.subgraph.density() <= opt + 1e-12 * opt);
            }
        }
    }

    #[test]
    fn process_matches_dense_simulation(edges in edges_strategy(7, 30, 4), k in 1usize..40, start in 0u8..7) {
        let g = graph_from(&edges).unwrap();
        let v = g.left_vertices().nth(start as usize % g.left_count()).unwrap();
        let schedule = LocalSchedule::new(k).unwrap();
        let run = run_process(&g, LevelVector::unit(&g, v), &schedule.epsilons, true);
        let sim = simulate(&g, v, &schedule.epsilons);
        match (run.best, sim) {
            (None, None) => {}
            (Some(c), Some(s)) => {
                prop_assert_eq!((c.t, c.i, c.j), (s.t, s.i, s.j));
                prop_assert_eq!(c.subgraph.density(), s.density);
                let left: BTreeSet<usize> = c.subgraph.left().iter().map(|v| v.index()).collect();
                let right: BTreeSet<usize> = c.subgraph.right().iter().map(|v| v.index()).collect();
                prop_assert_eq!(left, s.left);
                prop_assert_eq!(right, s.right);
                let trace = run.trace.unwrap();
                prop_assert_eq!(trace.steps.len(), s.norms.len());
                for (step, &(xn, rn)) in trace.steps.iter().zip(&s.norms) {
                    prop_assert!((step.x_norm - xn).abs() <= 1e-12 * xn);
                    prop_assert!((step.rounded_norm - rn).abs() <= 1e-12 * rn);
                }
            }
            (a, b) => prop_assert!(false, "library {:?} vs simulation {:?}", a.map(|c| c.t), b.map(|s| s.t)),
        }
    }

    #[test]
    fn runs_are_deterministic(edges in edges_strategy(8, 40, 3), k in 1usize..20) {
        let g = graph_from(&edges).unwrap();
        let a = global_density(&g, true).unwrap();
        let b = global_density(&g, true).unwrap();
        prop_assert_eq!(&a.subgraph, &b.subgraph);
        prop_assert_eq!(a.found_at, b.found_at);
        prop_assert_eq!(a.work, b.work);
        let v = g.left_vertices().next().unwrap();
        let a = local_density(&g, v, k, true).unwrap();
        let b = local_density(&g, v, k, true).unwrap();
        prop_assert_eq!(&a.subgraph, &b.subgraph);
        prop_assert_eq!(format!("{:?}", a.traces), format!("{:?}", b.traces));
    }
}

struct SimBest {
    t: usize,
    i: i32,
    j: i32,
    density: f64,
    left: BTreeSet<usize>,
    right: BTreeSet<usize>,
    norms: Vec<(f64, f64)>,
}

fn pow2_at_least(z: f64) -> f64 {
    let mut p = 2f64.powi(z.log2().round() as i32);
    while p < z {
        p *= 2.0;
    }
    while p / 2.0 >= z {
        p /= 2.0;
    }
    p
}

/// Dense-vector replay of the process from `1_v`.
fn simulate(g: &BipartiteGraph, v: VertexId, eps: &[f64]) -> Option<SimBest> {
    let n = g.vertex_count();
    let w = weight_matrix(g);
    let is_left = |u: usize| g.side(VertexId(u as u32)) == Side::Left;
    let mut x = vec![0.0; n];
    x[v.index()] = 1.0;
    let mut best: Option<SimBest> = None;
    let mut norms = Vec::new();
    for t in 0..eps.len() - 1 {
        if x.iter().all(|&a| a == 0.0) {
            break;
        }
        let mut y = vec![0.0; n];
        for u in 0..n {
            for (k, yk) in y.iter_mut().enumerate() {
                *yk += x[u] * w[u][k];
            }
        }
        for a in y.iter_mut() {
            if *a > 0.0 {
                *a = pow2_at_least(*a);
            }
        }
        if y.iter().all(|&a| a == 0.0) {
            break;
        }
        let xn = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        let yn = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        norms.push((xn, yn));
        let levels = |vec: &[f64]| -> BTreeSet<i32> {
            vec.iter()
                .filter(|&&a| a > 0.0)
                .map(|&a| a.log2() as i32)
                .collect()
        };
        for i in levels(&x) {
            for j in levels(&y) {
                let si: BTreeSet<usize> =
                    (0..n).filter(|&u| x[u] == 2f64.powi(i)).collect();
                let sj: BTreeSet<usize> =
                    (0..n).filter(|&u| y[u] == 2f64.powi(j)).collect();
                let e: f64 = si.iter().flat_map(|&a| sj.iter().map(move |&b| (a, b))).map(|(a, b)| w[a][b]).sum();
                let d = e / ((si.len() * sj.len()) as f64).sqrt();
                if best.as_ref().is_none_or(|b| d > b.density) {
                    let (left, right) = if si.iter().all(|&u| is_left(u)) { (si, sj) } else { (sj, si) };
                    best = Some(SimBest { t, i, j, density: d, left, right, norms: Vec::new() });
                }
            }
        }
        let cut = eps[t + 1] * yn;
        x = y.iter().map(|&a| if a > cut { a } else { 0.0 }).collect();
    }
    best.map(|mut b| {
        b.norms = norms;
        b
    })
}

#[test]
fn dense_simulation_on_star() {
    let g = build_bipartite((0..4).map(|j| ("c".to_string(), format!("r{j}"), 1.0))).unwrap();
    let s = simulate(&g, VertexId(0), &LocalSchedule::new(4).unwrap().epsilons).unwrap();
    assert_eq!(s.density, 2.0);
    assert_eq!(s.norms[0], (1.0, 2.0));
}

#[test]
fn good_seeds_meet_local_guarantee() {
    for seed in 0..12 {
        let inst = generate_planted(&PlantedConfig {
            n_left: 60,
            n_right: 60,
            noise_edges: 120,
            block_left: 3 + seed as usize % 4,
            block_right: 4 + seed as usize % 3,
            density_factor: 1.0,
            seed,
            isolate_block: false,
        })
        .unwrap();
        let g = &inst.graph;
        let (s, t) = (&inst.planted_left, &inst.planted_right);
        let theta = g.density(s, t).unwrap().density() / 2.0;
        let rep = good_seed_set(g, s, t, theta).unwrap();
        assert!(rep.coverage >= 0.5, "seed {seed}: coverage {}", rep.coverage);
        let k = s.len().max(t.len());
        let bound = local_guarantee_bound(theta, g.max_degree(), k).unwrap();
        for &v in &rep.good_set {
            let d = local_density(g, v, k, false).unwrap().subgraph.density();
            assert!(d >= bound, "seed {seed}, vertex {v:?}: {d} < {bound}");
        }
    }
}
