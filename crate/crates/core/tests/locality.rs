// Work accounting of the local search.

use localdense::io::{generate_planted, PlantedConfig};
use localdense::local_density;
use localdense::verify::local_work_ceiling;

// Edges touched stay within C·max_fanout·K² on every seed tried.
const C: f64 = 64.0;

#[test]
fn work_is_quadratic_in_target_size() {
    let mut worst = 0.0f64;
    for seed in 0..6u64 {
        for &(n, noise) in &[(200usize, 400usize), (200, 4000), (100, 5000)] {
            let inst = generate_planted(&PlantedConfig {
                n_left: n,
                n_right: n,
                noise_edges: noise,
                block_left: 6,
                block_right: 6,
                density_factor: 1.0,
                seed,
                isolate_block: false,
            })
            .unwrap();
            let g = &inst.graph;
            for k in [1usize, 2, 4, 8, 16, 32] {
                for v in g.left_vertices().take(10) {
                    let Ok(r) = local_density(g, v, k, false) else { continue };
                    let w = r.work.edges_touched as f64;
                    assert!(w <= local_work_ceiling(g, k));
                    let ratio = w / (g.max_fanout() * k * k) as f64;
                    worst = worst.max(ratio);
                }
            }
        }
    }
    assert!(worst <= C, "edges/(fanout·K²) reached {worst}");
}

#[test]
fn work_does_not_depend_on_background_size() {
    let mut counts = Vec::new();
    for n in [1_000usize, 10_000, 50_000] {
        let inst = generate_planted(&PlantedConfig {
            n_left: n,
            n_right: n,
            noise_edges: 2 * n,
            block_left: 5,
            block_right: 3,
            density_factor: 0.8,
            seed: 3,
            isolate_block: true,
        })
        .unwrap();
        let r = local_density(&inst.graph, inst.planted_left[1], 8, false).unwrap();
        counts.push((r.work, r.subgraph.density()));
    }
    assert!(counts.windows(2).all(|w| w[0] == w[1]), "{counts:?}");
}
