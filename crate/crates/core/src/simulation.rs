//! Ground-truthed network generation.
//!
//! Activity dates are drawn uniformly on `[z_low, z_high]`, pairs connect
//! independently with the logistic probability, and each edge receives a
//! Gaussian (or uniform, for the misspecified regime) date. Optional rewiring
//! noise is applied before the largest connected component is extracted.

use std::collections::{HashSet, VecDeque};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Error;
use crate::graph::TimestampedGraph;
use crate::model::{connection_probability, LatentDates, ModelParams};

/// Resampling budget per rewired edge before it is left in place.
pub const MAX_REWIRE_ATTEMPTS: usize = 100;

/// Logistic intercept giving connection probability `d` between vertices
/// with equal activity dates: the log-odds `log(d / (1 - d))`.
pub fn alpha_for_density(d: f64) -> Result<f64, Error> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::DegenerateDensity(d));
    }
    Ok((d / (1.0 - d)).ln())
}

/// Distance penalty making the connection probability exactly `epsilon` at
/// `span` years: `(log(1/epsilon - 1) + alpha) / span^2`.
pub fn beta_for_span(alpha: f64, span: f64, epsilon: f64) -> Result<f64, Error> {
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::InvalidParams(format!("span must be positive, got {span}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParams(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let beta = ((1.0 / epsilon - 1.0).ln() + alpha) / (span * span);
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "alpha={alpha}, epsilon={epsilon} give a non-positive beta"
        )));
    }
    Ok(beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DateModel {
    /// `N((z_i + z_j)/2, sigma^2)`.
    Gaussian,
    /// Uniform between the two endpoint activity dates.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub z_low: f64,
    pub z_high: f64,
    pub target_density: f64,
    pub life_span: f64,
    pub epsilon: f64,
    pub sigma: f64,
    pub date_model: DateModel,
    pub rewire_fraction: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 100,
            z_low: 1200.0,
            z_high: 1400.0,
            target_density: 0.5,
            life_span: 80.0,
            epsilon: 1e-6,
            sigma: 20.0,
            date_model: DateModel::Gaussian,
            rewire_fraction: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.z_low.is_finite() && self.z_high.is_finite() && self.z_low <= self.z_high) {
            return bad(format!("invalid date range [{}, {}]", self.z_low, self.z_high));
        }
        if !(self.target_density > 0.0 && self.target_density < 1.0) {
            return bad(format!("target density {} outside (0, 1)", self.target_density));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.life_span > 0.0 && self.life_span.is_finite()) {
            return bad(format!("life span must be positive, got {}", self.life_span));
        }
        if !(0.0..1.0).contains(&self.rewire_fraction) {
            return bad(format!("rewire fraction {} outside [0, 1)", self.rewire_fraction));
        }
        Ok(())
    }

    /// `(alpha, beta, sigma)` implied by the density and life-span rules.
    pub fn params(&self) -> Result<ModelParams, Error> {
        let alpha = alpha_for_density(self.target_density)?;
        let beta = beta_for_span(alpha, self.life_span, self.epsilon)?;
        ModelParams::new(alpha, beta, self.sigma)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    /// Largest connected component, relabelled `0..m`.
    pub graph: TimestampedGraph,
    pub z_true: LatentDates,
    /// Pre-extraction id of each component vertex.
    pub original_ids: Vec<usize>,
    pub params_true: ModelParams,
    /// At least as many edges as free parameters (`m + 3`).
    pub accepted: bool,
    pub edges_per_vertex: f64,
    /// Full network before component extraction (after rewiring).
    pub full_graph: TimestampedGraph,
    pub full_z: LatentDates,
    /// Edges left in place because no valid new endpoint was found.
    pub rewire_skipped: usize,
}

/// Draws edges and dates for fixed activity dates `z`.
pub fn sample_edges<R: Rng + ?Sized>(
    z: &[f64],
    params: &ModelParams,
    date_model: DateModel,
    rng: &mut R,
) -> TimestampedGraph {
    let n = z.len();
    let noise = Normal::new(0.0, params.sigma()).expect("sigma is positive and finite");
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let p = connection_probability(z[i], z[j], params);
            if rng.random::<f64>() < p {
                let date = match date_model {
                    DateModel::Gaussian => 0.5 * (z[i] + z[j]) + noise.sample(rng),
                    DateModel::Uniform => {
                        let (lo, hi) = if z[i] <= z[j] { (z[i], z[j]) } else { (z[j], z[i]) };
                        if lo == hi {
                            lo
                        } else {
                            rng.random_range(lo..=hi)
                        }
                    }
                };
                edges.push((i, j, date));
            }
        }
    }
    TimestampedGraph::new(n, edges).expect("sampled pairs are distinct and non-loop")
}

/// Generates one network under `config`.
pub fn generate(config: &SimConfig) -> Result<SimOutput, Error> {
    config.validate()?;
    let params = config.params()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let z: Vec<f64> = (0..config.n)
        .map(|_| {
            if config.z_low == config.z_high {
                config.z_low
            } else {
                rng.random_range(config.z_low..=config.z_high)
            }
        })
        .collect();

    let mut full = sample_edges(&z, &params, config.date_model, &mut rng);
    let mut rewire_skipped = 0;
    if config.rewire_fraction > 0.0 {
        let (g, skipped) = rewire(&full, config.rewire_fraction, &mut rng)?;
        full = g;
        rewire_skipped = skipped;
    }

    let (graph, original_ids) = largest_connected_component(&full);
    let z_true = LatentDates::new(original_ids.iter().map(|&v| z[v]).collect())?;
    let m = graph.n();
    let accepted = m >= 2 && graph.edge_count() >= m + 3;
    let edges_per_vertex = if m == 0 {
        0.0
    } else {
        graph.edge_count() as f64 / m as f64
    };

    Ok(SimOutput {
        graph,
        z_true,
        original_ids,
        params_true: params,
        accepted,
        edges_per_vertex,
        full_graph: full,
        full_z: LatentDates::new(z)?,
        rewire_skipped,
    })
}

/// Moves one endpoint of `round(fraction * |E|)` randomly chosen edges to a
/// uniformly drawn vertex, keeping each edge's date.
///
/// New endpoints that would create a self-loop or repeat an existing pair
/// are redrawn; after [`MAX_REWIRE_ATTEMPTS`] failures the edge is left as is.
/// Returns the new graph and the number of edges left in place.
pub fn rewire<R: Rng + ?Sized>(
    graph: &TimestampedGraph,
    fraction: f64,
    rng: &mut R,
) -> Result<(TimestampedGraph, usize), Error> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParams(format!(
            "rewire fraction {fraction} outside [0, 1)"
        )));
    }
    let m = graph.edge_count();
    let count = (fraction * m as f64).round() as usize;
    if count == 0 {
        return Ok((graph.clone(), 0));
    }

    let n = graph.n();
    let mut edges: Vec<(usize, usize, f64)> =
        graph.edges().iter().map(|e| (e.u, e.v, e.date)).collect();
    let mut present: HashSet<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let mut skipped = 0;

    for k in index::sample(rng, m, count) {
        let (u, v, date) = edges[k];
        let keep = if rng.random_bool(0.5) { u } else { v };
        let mut moved = None;
        for _ in 0..MAX_REWIRE_ATTEMPTS {
            let w = rng.random_range(0..n);
            if w == keep {
                continue;
            }
            let pair = (keep.min(w), keep.max(w));
            if present.contains(&pair) {
                continue;
            }
            moved = Some(pair);
            break;
        }
        match moved {
            Some(pair) => {
                present.remove(&(u, v));
                present.insert(pair);
                edges[k] = (pair.0, pair.1, date);
            }
            None => skipped += 1,
        }
    }

    Ok((TimestampedGraph::new(n, edges)?, skipped))
}

/// Induced subgraph on the largest connected component, relabelled so that
/// new vertex `k` is `mapping[k]` in `graph` (mapping is ascending).
///
/// Ties go to the component containing the smallest vertex id.
pub fn largest_connected_component(graph: &TimestampedGraph) -> (TimestampedGraph, Vec<usize>) {
    let n = graph.n();
    let mut label = vec![usize::MAX; n];
    let mut best: Option<(usize, usize)> = None; // (label, size)
    let mut queue = VecDeque::new();
    let mut next_label = 0;

    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next_label;
        queue.push_back(start);
        let mut size = 0;
        while let Some(v) = queue.pop_front() {
            size += 1;
            for w in graph.neighbors(v) {
                if label[w] == usize::MAX {
                    label[w] = next_label;
                    queue.push_back(w);
                }
            }
        }
        if best.is_none_or(|(_, s)| size > s) {
            best = Some((next_label, size));
        }
        next_label += 1;
    }

    let Some((keep, _)) = best else {
        return (TimestampedGraph::empty(0), Vec::new());
    };
    let mapping: Vec<usize> = (0..n).filter(|&v| label[v] == keep).collect();
    let mut new_id = vec![usize::MAX; n];
    for (k, &v) in mapping.iter().enumerate() {
        new_id[v] = k;
    }
    let edges = graph
        .edges()
        .iter()
        .filter(|e| label[e.u] == keep)
        .map(|e| (new_id[e.u], new_id[e.v], e.date));
    let sub = TimestampedGraph::new(mapping.len(), edges).expect("subgraph of a valid graph");
    (sub, mapping)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_for_density(0.5).unwrap(), 0.0);
        assert!((alpha_for_density(0.1).unwrap() + 9f64.ln()).abs() < 1e-15);
        assert!((alpha_for_density(0.1).unwrap() - (-2.19722)).abs() < 1e-5);
        assert!(alpha_for_density(0.0).is_err());
        assert!(alpha_for_density(1.0).is_err());
        assert!(alpha_for_density(f64::NAN).is_err());
    }

    #[test]
    fn alpha_round_trips_through_probability() {
        for d in [0.1, 0.2, 0.33, 0.5, 0.9] {
            let p = ModelParams::new(alpha_for_density(d).unwrap(), 1e-3, 1.0).unwrap();
            assert!((connection_probability(1300.0, 1300.0, &p) - d).abs() < 1e-12);
        }
    }

    #[test]
    fn beta_examples() {
        let beta = beta_for_span(0.0, 80.0, 1e-6).unwrap();
        assert!((beta - (1e6f64 - 1.0).ln() / 6400.0).abs() < 1e-18);
        assert!((beta - 2.158_673_368_431_84e-3).abs() < 1e-15);

        for alpha in [0.0, -(9f64.ln())] {
            let beta = beta_for_span(alpha, 80.0, 1e-6).unwrap();
            let p = ModelParams::new(alpha, beta, 20.0).unwrap();
            let prob = connection_probability(1200.0, 1280.0, &p);
            assert!((prob - 1e-6).abs() / 1e-6 < 1e-9, "alpha={alpha}: {prob}");
        }

        // alpha so low that the target is above the equal-date probability
        assert!(beta_for_span(-20.0, 80.0, 1e-6).is_err());
        assert!(beta_for_span(0.0, 0.0, 1e-6).is_err());
    }

    #[test]
    fn lcc_examples() {
        let g = TimestampedGraph::new(5, [(0, 1, 1.0), (3, 4, 2.0), (4, 2, 3.0)]).unwrap();
        let (c, map) = largest_connected_component(&g);
        assert_eq!(map, vec![2, 3, 4]);
        assert_eq!(c.n(), 3);
        assert_eq!(c.edge_count(), 2);
        assert!(c.has_edge(1, 2) && c.has_edge(2, 0));

        let path = TimestampedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let (c, map) = largest_connected_component(&path);
        assert_eq!(map, vec![0, 1, 2]);
        assert_eq!(c, path);

        // equal sizes: the component holding vertex 0 wins
        let g = TimestampedGraph::new(4, [(2, 3, 1.0), (0, 1, 2.0)]).unwrap();
        assert_eq!(largest_connected_component(&g).1, vec![0, 1]);

        let (c, map) = largest_connected_component(&TimestampedGraph::empty(0));
        assert_eq!((c.n(), map.len()), (0, 0));
        let (c, map) = largest_connected_component(&TimestampedGraph::empty(3));
        assert_eq!((c.n(), map), (1, vec![0]));
    }

    #[test]
    fn rewire_zero_fraction_is_identity() {
        let g = TimestampedGraph::new(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (h, skipped) = rewire(&g, 0.0, &mut rng).unwrap();
        assert_eq!(h, g);
        assert_eq!(skipped, 0);
        assert!(rewire(&g, 1.0, &mut rng).is_err());
    }

    #[test]
    fn rewire_complete_graph_skips_everything() {
        let edges: Vec<_> = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j, (i * 10 + j) as f64)))
            .collect();
        let g = TimestampedGraph::new(4, edges).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (h, skipped) = rewire(&g, 0.5, &mut rng).unwrap();
        assert_eq!(skipped, 3);
        assert_eq!(h, g);
    }

    #[test]
    fn rewire_selects_rounded_count() {
        // 300 edges among 100 vertices; 5% moves exactly 15 of them.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pairs = HashSet::new();
        while pairs.len() < 300 {
            let a = rng.random_range(0..100usize);
            let b = rng.random_range(0..100usize);
            if a != b {
                pairs.insert((a.min(b), a.max(b)));
            }
        }
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort();
        let g = TimestampedGraph::new(100, pairs.iter().enumerate().map(|(k, &(a, b))| (a, b, k as f64)))
            .unwrap();
        let (h, skipped) = rewire(&g, 0.05, &mut rng).unwrap();
        assert_eq!(skipped, 0);
        let changed = g
            .edges()
            .iter()
            .zip(h.edges())
            .filter(|(a, b)| (a.u, a.v) != (b.u, b.v))
            .count();
        assert_eq!(changed, 15);
        assert!(g.edges().iter().zip(h.edges()).all(|(a, b)| a.date == b.date));
    }

    #[test]
    fn generate_is_deterministic() {
        let cfg = SimConfig {
            target_density: 0.3,
            rewire_fraction: 0.05,
            seed: 99,
            ..SimConfig::default()
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
    }

    #[test]
    fn generate_rejects_bad_config() {
        let cfg = SimConfig {
            target_density: 1.0,
            ..SimConfig::default()
        };
        assert!(generate(&cfg).is_err());
        let cfg = SimConfig {
            z_low: 1400.0,
            z_high: 1200.0,
            ..SimConfig::default()
        };
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn tiny_network_is_not_accepted() {
        let cfg = SimConfig {
            n: 1,
            ..SimConfig::default()
        };
        let out = generate(&cfg).unwrap();
        assert!(!out.accepted);
        assert_eq!(out.graph.n(), 1);
        assert_eq!(out.edges_per_vertex, 0.0);
    }
}
