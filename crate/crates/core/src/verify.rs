//! Property checks over graphs, growth traces and algorithm outputs.
//!
//! [`run_suite`] drives everything the `verify` subcommand reports; the
//! per-trace checker is public so tests can apply it to their own runs.

use serde::Serialize;

use crate::global::{global_density, global_guarantee_bound};
use crate::graph::{BipartiteGraph, VertexId};
use crate::growth::{exp2i, growth_bound_check, level_count_bound, GrowthTrace};
use crate::local::{local_density, local_guarantee_bound, DensityResult, LocalSchedule};
use crate::oracle::{
    exact_densest, good_seed_set, top_eigenvalue, verify_round, OracleError, DEFAULT_MAX_ITERS,
    DEFAULT_TOL,
};

/// Every property the suite can report, in report order.
pub const PROPERTIES: &[(&str, &str)] = &[
    ("graph.symmetric", "adjacency lists mirror each other"),
    ("graph.degree_stats", "cached Δ, fanout and m match a recount"),
    ("trace.support_bound", "|Support(x_t)| <= 1/ε_t² at every step"),
    ("trace.level_bound", "levels of round(x_t A) <= ⌈log2(2Δ/ε_t)⌉ + 1"),
    ("trace.growth_lemma", "‖round(x_t A)‖ <= 2θ‖x_t‖log2(2Δ/ε_t) with θ = step max pair density"),
    ("trace.growth_lemma_theta", "growth lemma at the user-supplied θ"),
    ("trace.pruned_mass", "pruned mass <= ε_{t+1}·‖round(x_t A)‖·√(removed count)"),
    ("trace.norms", "recorded norms match the level sets"),
    ("trace.monotone_best", "best-so-far density is the running max of step maxima"),
    ("local.work_bound", "edges touched <= Σ_t 2·max_fanout/ε_t²"),
    ("global.guarantee", "global density >= λ̂/(8 + 4·log2 n)"),
    ("global.spectral_upper", "global density <= λ̂ + residual"),
    ("oracle.exact_upper", "no reported density exceeds the exact optimum"),
    ("oracle.spectral_vs_exact", "λ̂ + residual >= exact optimum"),
    ("planted.coverage", "good seed set covers at least half of e(S,T)"),
    ("planted.certificates", "every good-seed certificate re-verifies"),
    ("planted.local_guarantee", "every good seed reaches θ/(8·log2(16ΔK))"),
    ("determinism", "repeated runs give identical results"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub property: &'static str,
    pub status: Status,
    pub checked: usize,
    pub violations: usize,
    pub detail: String,
}

impl PropertyOutcome {
    fn counted(property: &'static str, checked: usize, violations: usize, detail: String) -> Self {
        PropertyOutcome {
            property,
            status: if violations == 0 { Status::Pass } else { Status::Fail },
            checked,
            violations,
            detail,
        }
    }

    fn skipped(property: &'static str, why: &str) -> Self {
        PropertyOutcome {
            property,
            status: Status::Skip,
            checked: 0,
            violations: 0,
            detail: why.to_owned(),
        }
    }
}

/// Violation counts for one or more traces.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TraceCheck {
    pub steps: usize,
    pub vectors: usize,
    pub support: usize,
    pub levels: usize,
    pub growth: usize,
    pub growth_theta: usize,
    pub pruned_mass: usize,
    pub norms: usize,
    pub monotone: usize,
}

impl TraceCheck {
    pub fn merge(&mut self, o: &TraceCheck) {
        self.steps += o.steps;
        self.vectors += o.vectors;
        self.support += o.support;
        self.levels += o.levels;
        self.growth += o.growth;
        self.growth_theta += o.growth_theta;
        self.pruned_mass += o.pruned_mass;
        self.norms += o.norms;
        self.monotone += o.monotone;
    }

    pub fn is_clean(&self) -> bool {
        self.support + self.levels + self.growth + self.growth_theta + self.pruned_mass
            + self.norms
            + self.monotone
            == 0
    }
}

fn support_cap(epsilon: f64) -> f64 {
    if epsilon > 0.0 {
        1.0 / (epsilon * epsilon)
    } else {
        f64::INFINITY
    }
}

fn norm_from_levels(levels: &crate::growth::LevelSets) -> f64 {
    levels
        .levels()
        .iter()
        .map(|l| l.vertices.len() as f64 * exp2i(l.exponent) * exp2i(l.exponent))
        .sum::<f64>()
        .sqrt()
}

/// Checks one trace against the support, level, growth and pruning bounds.
/// `theta`, when given, is an extra fixed threshold for the growth lemma.
pub fn check_trace(g: &BipartiteGraph, trace: &GrowthTrace, theta: Option<f64>) -> TraceCheck {
    let delta = g.max_degree();
    let mut c = TraceCheck::default();
    let mut running = f64::NEG_INFINITY;
    for s in &trace.steps {
        c.steps += 1;
        c.vectors += 1;
        if s.x_support as f64 > support_cap(s.epsilon) {
            c.support += 1;
        }
        if s.rounded_levels.len() > level_count_bound(delta, s.epsilon) {
            c.levels += 1;
        }
        let theta_step = s.max_pair_density;
        if !growth_bound_check(theta_step, delta, s.epsilon, s.x_norm, s.rounded_norm, theta_step) {
            c.growth += 1;
        }
        if let Some(th) = theta {
            if !growth_bound_check(th, delta, s.epsilon, s.x_norm, s.rounded_norm, theta_step) {
                c.growth_theta += 1;
            }
        }
        let cap = s.epsilon_next * s.rounded_norm * (s.pruned_count as f64).sqrt();
        if s.pruned_mass > cap * (1.0 + 1e-12) {
            c.pruned_mass += 1;
        }
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        if !rel(norm_from_levels(&s.x_levels), s.x_norm)
            || !rel(norm_from_levels(&s.rounded_levels), s.rounded_norm)
        {
            c.norms += 1;
        }
        running = running.max(s.max_pair_density);
        if s.best_density != running {
            c.monotone += 1;
        }
    }
    if let Some(last) = trace.steps.last() {
        c.vectors += 1;
        if last.next_support as f64 > support_cap(last.epsilon_next) {
            c.support += 1;
        }
    }
    c
}

/// Provable work ceiling for a local run with target size `K`.
pub fn local_work_ceiling(g: &BipartiteGraph, target_size: usize) -> f64 {
    let schedule = LocalSchedule::new(target_size).expect("K >= 1");
    schedule.epsilons[..schedule.horizon]
        .iter()
        .map(|&e| 2.0 * g.max_fanout() as f64 * support_cap(e).floor())
        .sum()
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub theta: Option<f64>,
    pub planted: Option<(Vec<VertexId>, Vec<VertexId>)>,
    pub target_size: Option<usize>,
    pub max_seeds: usize,
    pub exact_cap: usize,
}

fn same_result(a: &DensityResult, b: &DensityResult) -> bool {
    a.subgraph == b.subgraph && a.found_at == b.found_at && a.work == b.work
}

/// Runs every applicable property and returns one outcome per entry of
/// [`PROPERTIES`].
pub fn run_suite(g: &BipartiteGraph, opts: &SuiteOptions) -> Vec<PropertyOutcome> {
    let mut out = Vec::with_capacity(PROPERTIES.len());

    // graph structure
    let mut asym = 0;
    let mut entries = 0;
    for u in (0..g.vertex_count() as u32).map(VertexId) {
        for (w, wt) in g.neighbors(u) {
            entries += 1;
            if g.side(w) == g.side(u) || !g.neighbors(w).any(|(x, xw)| x == u && xw == wt) {
                asym += 1;
            }
        }
    }
    out.push(PropertyOutcome::counted(
        "graph.symmetric",
        entries,
        asym,
        format!("{entries} adjacency entries"),
    ));
    let all: Vec<VertexId> = (0..g.vertex_count() as u32).map(VertexId).collect();
    let delta = all.iter().map(|&v| g.weighted_degree(v)).fold(0.0, f64::max);
    let fan = all.iter().map(|&v| g.fanout(v)).max().unwrap_or(0);
    let half: f64 = all.iter().map(|&v| g.weighted_degree(v)).sum::<f64>() / 2.0;
    let stats_bad = usize::from(delta != g.max_degree())
        + usize::from(fan != g.max_fanout())
        + usize::from((half - g.total_weight()).abs() > 1e-9 * half.max(1.0));
    out.push(PropertyOutcome::counted(
        "graph.degree_stats",
        3,
        stats_bad,
        format!("Δ={} fanout={} m={}", g.max_degree(), g.max_fanout(), g.total_weight()),
    ));

    // algorithm runs
    let global = global_density(g, true).expect("nonempty graph has a candidate");
    let target = opts
        .target_size
        .or(opts.planted.as_ref().map(|(s, t)| s.len().max(t.len())))
        .unwrap_or(8);
    let theta_planted = opts.planted.as_ref().map(|(s, t)| {
        let d = g.density(s, t).map(|x| x.density()).unwrap_or(0.0);
        opts.theta.unwrap_or(d / 2.0)
    });
    let report = match (&opts.planted, theta_planted) {
        (Some((s, t)), Some(th)) => Some(good_seed_set(g, s, t, th)),
        _ => None,
    };
    let mut seeds: Vec<VertexId> = match (&opts.planted, &report) {
        (Some((s, _)), _) => s.clone(),
        _ => g
            .left_vertices()
            .filter(|&v| g.fanout(v) > 0)
            .take(opts.max_seeds.max(1))
            .collect(),
    };
    seeds.sort_unstable();
    seeds.dedup();
    let locals: Vec<(VertexId, DensityResult)> = seeds
        .iter()
        .filter_map(|&v| local_density(g, v, target, true).ok().map(|r| (v, r)))
        .collect();

    let mut tc = TraceCheck::default();
    for r in std::iter::once(&global).chain(locals.iter().map(|(_, r)| r)) {
        for trace in &r.traces {
            tc.merge(&check_trace(g, trace, opts.theta));
        }
    }
    let runs = format!("{} runs, {} steps", locals.len() + 1, tc.steps);
    out.push(PropertyOutcome::counted("trace.support_bound", tc.vectors, tc.support, runs.clone()));
    out.push(PropertyOutcome::counted("trace.level_bound", tc.steps, tc.levels, runs.clone()));
    out.push(PropertyOutcome::counted("trace.growth_lemma", tc.steps, tc.growth, runs.clone()));
    out.push(match opts.theta {
        Some(th) => PropertyOutcome::counted(
            "trace.growth_lemma_theta",
            tc.steps,
            tc.growth_theta,
            format!("θ={th}"),
        ),
        None => PropertyOutcome::skipped("trace.growth_lemma_theta", "no --theta given"),
    });
    out.push(PropertyOutcome::counted("trace.pruned_mass", tc.steps, tc.pruned_mass, runs.clone()));
    out.push(PropertyOutcome::counted("trace.norms", tc.steps, tc.norms, runs.clone()));
    out.push(PropertyOutcome::counted("trace.monotone_best", tc.steps, tc.monotone, runs));

    let ceiling = local_work_ceiling(g, target);
    let over = locals
        .iter()
        .filter(|(_, r)| r.work.edges_touched as f64 > ceiling)
        .count();
    out.push(PropertyOutcome::counted(
        "local.work_bound",
        locals.len(),
        over,
        format!("K={target}, ceiling {ceiling}"),
    ));

    // spectral
    let eig = match top_eigenvalue(g, DEFAULT_TOL, DEFAULT_MAX_ITERS) {
        Ok(e) => e,
        Err(OracleError::NoConvergence { estimate }) => *estimate,
        Err(e) => unreachable!("top_eigenvalue only fails to converge: {e}"),
    };
    let gd = global.subgraph.density();
    let bound = global_guarantee_bound(eig.value, g.vertex_count()).unwrap_or(0.0);
    out.push(PropertyOutcome::counted(
        "global.guarantee",
        1,
        usize::from(gd < bound),
        format!("density {gd}, λ̂ {}, bound {bound}", eig.value),
    ));
    out.push(PropertyOutcome::counted(
        "global.spectral_upper",
        1,
        usize::from(gd > eig.value + eig.residual),
        format!("density {gd}, λ̂+res {}", eig.value + eig.residual),
    ));

    // exact oracle where it fits
    match exact_densest(g, opts.exact_cap) {
        Ok(best) => {
            let opt = best.density();
            let tol = 1e-9 * opt.max(1.0);
            let over = std::iter::once(gd)
                .chain(locals.iter().map(|(_, r)| r.subgraph.density()))
                .filter(|&d| d > opt + tol)
                .count();
            out.push(PropertyOutcome::counted(
                "oracle.exact_upper",
                locals.len() + 1,
                over,
                format!("d(A) = {opt}"),
            ));
            out.push(PropertyOutcome::counted(
                "oracle.spectral_vs_exact",
                1,
                usize::from(eig.value + eig.residual < opt),
                format!("λ̂+res {} vs d(A) {opt}", eig.value + eig.residual),
            ));
        }
        Err(_) => {
            let why = format!("smaller side exceeds cap {}", opts.exact_cap);
            out.push(PropertyOutcome::skipped("oracle.exact_upper", &why));
            out.push(PropertyOutcome::skipped("oracle.spectral_vs_exact", &why));
        }
    }

    // planted block
    match (&opts.planted, report, theta_planted) {
        (Some((s, t)), Some(Ok(rep)), Some(th)) => {
            out.push(PropertyOutcome::counted(
                "planted.coverage",
                1,
                usize::from(rep.coverage < 0.5),
                format!("coverage {} with |G|={}", rep.coverage, rep.good_set.len()),
            ));
            let bad = rep
                .rounds
                .iter()
                .filter(|rd| !verify_round(g, rd, s, t, th))
                .count();
            out.push(PropertyOutcome::counted(
                "planted.certificates",
                rep.rounds.len(),
                bad,
                format!("{} rounds", rep.rounds.len()),
            ));
            let k = s.len().max(t.len());
            let need = local_guarantee_bound(th, g.max_degree().max(1.0), k).unwrap_or(f64::INFINITY);
            let short = rep
                .good_set
                .iter()
                .filter(|&&v| {
                    local_density(g, v, k, false).map_or(true, |r| r.subgraph.density() < need)
                })
                .count();
            out.push(PropertyOutcome::counted(
                "planted.local_guarantee",
                rep.good_set.len(),
                short + usize::from(rep.good_set.is_empty()),
                format!("θ={th}, K={k}, bound {need}"),
            ));
        }
        (Some(_), Some(Err(e)), _) => {
            for p in ["planted.coverage", "planted.certificates", "planted.local_guarantee"] {
                out.push(PropertyOutcome::counted(p, 1, 1, e.to_string()));
            }
        }
        _ => {
            for p in ["planted.coverage", "planted.certificates", "planted.local_guarantee"] {
                out.push(PropertyOutcome::skipped(p, "no --planted sets given"));
            }
        }
    }

    // determinism
    let again = global_density(g, true).expect("ran above");
    let mut diffs = usize::from(!same_result(&global, &again));
    if let Some((v, first)) = locals.first() {
        let rerun = local_density(g, *v, target, true).expect("ran above");
        diffs += usize::from(!same_result(first, &rerun));
    }
    out.push(PropertyOutcome::counted(
        "determinism",
        1 + usize::from(!locals.is_empty()),
        diffs,
        String::new(),
    ));

    debug_assert_eq!(out.len(), PROPERTIES.len());
    debug_assert!(out.iter().zip(PROPERTIES).all(|(o, p)| o.property == p.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{generate_planted, PlantedConfig};

    #[test]
    fn suite_on_planted_instance_passes() {
        let inst = generate_planted(&PlantedConfig {
            n_left: 40,
            n_right: 40,
            noise_edges: 60,
            block_left: 5,
            block_right: 4,
            density_factor: 1.0,
            seed: 9,
            isolate_block: false,
        })
        .unwrap();
        let opts = SuiteOptions {
            theta: Some(1.0),
            planted: Some((inst.planted_left.clone(), inst.planted_right.clone())),
            target_size: None,
            max_seeds: 16,
            exact_cap: 0,
        };
        let out = run_suite(&inst.graph, &opts);
        assert_eq!(out.len(), PROPERTIES.len());
        for o in &out {
            assert_ne!(o.status, Status::Fail, "{o:?}");
        }
        assert_eq!(
            out.iter().filter(|o| o.status == Status::Skip).count(),
            2,
            "only the exact oracle is skipped"
        );
    }

    #[test]
    fn trace_check_flags_tampering() {
        let inst = generate_planted(&PlantedConfig {
            n_left: 10,
            n_right: 10,
            noise_edges: 20,
            block_left: 3,
            block_right: 3,
            density_factor: 1.0,
            seed: 1,
            isolate_block: false,
        })
        .unwrap();
        let g = &inst.graph;
        let mut r = global_density(g, true).unwrap();
        assert!(check_trace(g, &r.traces[0], None).is_clean());
        let step = &mut r.traces[0].steps[0];
        step.rounded_norm *= 1e6;
        step.x_support = 1 << 30;
        let c = check_trace(g, &r.traces[0], None);
        assert!(c.growth > 0 && c.support > 0 && c.norms > 0);
    }
}
