//! The latent activity-date model.
//!
//! Every vertex `i` carries an activity date `z_i` (years). Two vertices are
//! connected with probability `sigmoid(alpha - beta * (z_i - z_j)^2)` and an
//! edge between them carries a date drawn from `N((z_i + z_j) / 2, sigma^2)`.
//!
//! The log-likelihood is summed over unordered pairs `i < j`, which is half of
//! the ordered-pair sum. The Gaussian normalising constant is dropped.

use std::ops::Deref;

use crate::error::Error;
use crate::graph::TimestampedGraph;

/// Scalar parameters of the connection and date models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
    sigma: f64,
}

impl ModelParams {
    /// `beta` is in years⁻², `sigma` in years. Both must be positive and all
    /// three finite.
    pub fn new(alpha: f64, beta: f64, sigma: f64) -> Result<Self, Error> {
        if !(alpha.is_finite() && beta.is_finite() && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite value in (alpha={alpha}, beta={beta}, sigma={sigma})"
            )));
        }
        if beta <= 0.0 {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {beta}")));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidParams(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self { alpha, beta, sigma })
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// One activity date per vertex, in years.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentDates(Vec<f64>);

impl LatentDates {
    pub fn new(z: Vec<f64>) -> Result<Self, Error> {
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite latent date at vertex {i}")));
        }
        Ok(Self(z))
    }

    /// Checks that the vector matches the vertex count of `graph`.
    pub fn for_graph(z: Vec<f64>, graph: &TimestampedGraph) -> Result<Self, Error> {
        if z.len() != graph.n() {
            return Err(Error::DimensionMismatch {
                expected: graph.n(),
                got: z.len(),
            });
        }
        Self::new(z)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for LatentDates {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Partial derivatives of [`log_likelihood`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikelihoodGradient {
    pub z: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
}

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `1 / (1 + e^-x)` without overflow.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Logit of the connection probability.
#[inline]
fn connection_logit(zi: f64, zj: f64, alpha: f64, beta: f64) -> f64 {
    let d = zi - zj;
    alpha - beta * d * d
}

/// Probability that vertices with activity dates `zi` and `zj` interact.
pub fn connection_probability(zi: f64, zj: f64, params: &ModelParams) -> f64 {
    sigmoid(connection_logit(zi, zj, params.alpha, params.beta))
}

/// Per-edge date term `-log sigma - (d - (zi + zj)/2)^2 / (2 sigma^2)`.
pub fn date_log_density(d: f64, zi: f64, zj: f64, sigma: f64) -> f64 {
    let r = d - 0.5 * (zi + zj);
    -sigma.ln() - r * r / (2.0 * sigma * sigma)
}

fn check_dims(graph: &TimestampedGraph, z: &[f64]) {
    assert_eq!(
        z.len(),
        graph.n(),
        "latent date vector has {} entries for a graph with {} vertices",
        z.len(),
        graph.n()
    );
}

/// Log-likelihood of the observed graph and dates given `z` and `params`.
///
/// The logistic term runs over all unordered pairs, the date term over edges.
/// Returns 0 for graphs with fewer than two vertices.
pub fn log_likelihood(graph: &TimestampedGraph, z: &[f64], params: &ModelParams) -> f64 {
    check_dims(graph, z);
    let (alpha, beta, sigma) = (params.alpha, params.beta, params.sigma);

    let mut pairs = 0.0;
    for i in 0..z.len() {
        let zi = z[i];
        for &zj in &z[i + 1..] {
            pairs -= softplus(connection_logit(zi, zj, alpha, beta));
        }
    }

    let mut edges = 0.0;
    for e in graph.edges() {
        edges += connection_logit(z[e.u], z[e.v], alpha, beta);
        edges += date_log_density(e.date, z[e.u], z[e.v], sigma);
    }
    pairs + edges
}

/// Log-likelihood and its analytic gradient with respect to every `z_i`,
/// `alpha`, `beta` and `sigma`, in one pass.
pub fn log_likelihood_and_gradient(
    graph: &TimestampedGraph,
    z: &[f64],
    params: &ModelParams,
) -> (f64, LogLikelihoodGradient) {
    check_dims(graph, z);
    let (alpha, beta, sigma) = (params.alpha, params.beta, params.sigma);
    let n = z.len();

    let mut value = 0.0;
    let mut gz = vec![0.0; n];
    let mut ga = 0.0;
    let mut gb = 0.0;
    let mut gs = 0.0;

    // Non-edge part of every pair: -softplus(eta), d/d eta = -p.
    for i in 0..n {
        let zi = z[i];
        let mut gzi = 0.0;
        for j in i + 1..n {
            let d = zi - z[j];
            let d2 = d * d;
            let eta = alpha - beta * d2;
            value -= softplus(eta);
            let w = -sigmoid(eta);
            let dz = -2.0 * beta * d * w;
            gzi += dz;
            gz[j] -= dz;
            ga += w;
            gb -= w * d2;
        }
        gz[i] += gzi;
    }

    // Edge part: +eta for the logistic term, plus the Gaussian date term.
    let inv_s2 = 1.0 / (sigma * sigma);
    for e in graph.edges() {
        let (zu, zv) = (z[e.u], z[e.v]);
        let d = zu - zv;
        let d2 = d * d;
        value += alpha - beta * d2;
        ga += 1.0;
        gb -= d2;
        gz[e.u] -= 2.0 * beta * d;
        gz[e.v] += 2.0 * beta * d;

        let r = e.date - 0.5 * (zu + zv);
        value += -sigma.ln() - 0.5 * r * r * inv_s2;
        let dz = 0.5 * r * inv_s2;
        gz[e.u] += dz;
        gz[e.v] += dz;
        gs += -1.0 / sigma + r * r * inv_s2 / sigma;
    }

    (
        value,
        LogLikelihoodGradient {
            z: gz,
            alpha: ga,
            beta: gb,
            sigma: gs,
        },
    )
}

/// Analytic gradient of [`log_likelihood`].
pub fn log_likelihood_gradient(
    graph: &TimestampedGraph,
    z: &[f64],
    params: &ModelParams,
) -> LogLikelihoodGradient {
    log_likelihood_and_gradient(graph, z, params).1
}
