#![allow(dead_code)]

use actdate::{ModelParams, TimestampedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple graph with dates near the endpoints' midpoint, activity
/// dates in [1200, 1400] and parameters in a realistic range.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_n: usize,
) -> (TimestampedGraph, Vec<f64>, ModelParams) {
    let n = rng.random_range(2..=max_n);
    let z: Vec<f64> = (0..n).map(|_| rng.random_range(1200.0..1400.0)).collect();
    let p_edge = rng.random_range(0.1..0.7);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p_edge) {
                let mid = 0.5 * (z[i] + z[j]);
                edges.push((i, j, mid + rng.random_range(-40.0..40.0)));
            }
        }
    }
    let graph = TimestampedGraph::new(n, edges).unwrap();
    let params = ModelParams::new(
        rng.random_range(-3.0..1.0),
        rng.random_range(2e-4..5e-3),
        rng.random_range(5.0..60.0),
    )
    .unwrap();
    (graph, z, params)
}

/// Log-likelihood written directly from the model definition: ordered pairs
/// over a dense adjacency matrix, halved to the unordered-pair convention.
pub fn naive_log_likelihood(graph: &TimestampedGraph, z: &[f64], params: &ModelParams) -> f64 {
    let n = graph.n();
    let mut a = vec![vec![0.0; n]; n];
    let mut d = vec![vec![0.0; n]; n];
    for e in graph.edges() {
        a[e.u][e.v] = 1.0;
        a[e.v][e.u] = 1.0;
        d[e.u][e.v] = e.date;
        d[e.v][e.u] = e.date;
    }
    let (alpha, beta, sigma) = (params.alpha(), params.beta(), params.sigma());
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let eta = alpha - beta * (z[i] - z[j]).powi(2);
            total += a[i][j] * eta - (1.0 + eta.exp()).ln();
            if a[i][j] == 1.0 {
                let r = d[i][j] - (z[i] + z[j]) / 2.0;
                total += -sigma.ln() - r * r / (2.0 * sigma * sigma);
            }
        }
    }
    total / 2.0
}

/// Relative error with an absolute floor on the denominator.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}
