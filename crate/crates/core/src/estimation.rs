//! Maximum-likelihood fitting of activity dates and model parameters.
//!
//! The objective is maximised over `(z, alpha, log beta, log sigma)` by
//! gradient ascent with an Armijo backtracking line search, so accepted steps
//! never decrease the log-likelihood and `beta`, `sigma` stay positive.

use crate::error::Error;
use crate::graph::TimestampedGraph;
use crate::model::{log_likelihood, log_likelihood_gradient, LatentDates, ModelParams};
use crate::simulation::{alpha_for_density, beta_for_span};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Stop once `|ΔL| / (|L| + 1)` falls below this.
    pub relative_tolerance: f64,
    /// First trial step of the line search.
    pub initial_step: f64,
    pub armijo_c: f64,
    pub backtracking_factor: f64,
    pub max_backtracks: usize,
    /// Connection probability targeted at `span_init` years by the default `beta`.
    pub epsilon_init: f64,
    pub span_init: f64,
    pub sigma_init: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            relative_tolerance: 1e-8,
            initial_step: 1.0,
            armijo_c: 1e-4,
            backtracking_factor: 0.5,
            max_backtracks: 50,
            epsilon_init: 1e-6,
            span_init: 100.0,
            sigma_init: 50.0,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::InvalidParams(what.to_string()));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance < 1.0) {
            return bad("relative_tolerance must lie in (0, 1)");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be positive");
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return bad("armijo_c must lie in (0, 1)");
        }
        if !(self.backtracking_factor > 0.0 && self.backtracking_factor < 1.0) {
            return bad("backtracking_factor must lie in (0, 1)");
        }
        if self.max_backtracks == 0 {
            return bad("max_backtracks must be positive");
        }
        if !(self.epsilon_init > 0.0 && self.epsilon_init < 1.0) {
            return bad("epsilon_init must lie in (0, 1)");
        }
        if !(self.span_init > 0.0 && self.span_init.is_finite()) {
            return bad("span_init must be positive");
        }
        if !(self.sigma_init > 0.0 && self.sigma_init.is_finite()) {
            return bad("sigma_init must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Relative objective change dropped below the tolerance.
    Tolerance,
    /// The gradient vanished exactly.
    ZeroGradient,
    MaxIterations,
    /// No step satisfied the Armijo condition after the first iteration.
    LineSearchStalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub z_hat: LatentDates,
    pub params_hat: ModelParams,
    pub initial_log_likelihood: f64,
    pub final_log_likelihood: f64,
    /// Number of accepted steps.
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Log-likelihood at the start followed by one value per accepted step.
    pub trace: Vec<f64>,
}

/// Mean date of the incident edges of every vertex.
///
/// Isolated vertices get the mean of all edge dates; with no edges at all
/// every entry is zero.
pub fn local_average_init(graph: &TimestampedGraph) -> LatentDates {
    let fallback = graph.mean_date().unwrap_or(0.0);
    let edges = graph.edges();
    let z = (0..graph.n())
        .map(|v| {
            let inc = graph.incident(v);
            if inc.is_empty() {
                fallback
            } else {
                inc.iter().map(|&k| edges[k].date).sum::<f64>() / inc.len() as f64
            }
        })
        .collect();
    LatentDates::new(z).expect("edge dates are finite")
}

/// Starting parameters: `sigma = sigma_init`, `alpha` matching the observed
/// density at equal dates, and `beta` bringing the connection probability down
/// to `epsilon_init` at a distance of `span_init` years.
pub fn default_param_init(graph: &TimestampedGraph, config: &FitConfig) -> Result<ModelParams, Error> {
    if graph.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let density = graph.density();
    let alpha = alpha_for_density(density).map_err(|_| Error::DegenerateDensity(density))?;
    let beta = beta_for_span(alpha, config.span_init, config.epsilon_init)?;
    ModelParams::new(alpha, beta, config.sigma_init)
}

/// Objective in the optimisation coordinates `[z - center; alpha; log beta; log sigma]`.
struct Problem<'a> {
    graph: &'a TimestampedGraph,
    n: usize,
    // diagonal search-direction scaling
    scale: Vec<f64>,
}

impl Problem<'_> {
    fn params(&self, x: &[f64]) -> Option<ModelParams> {
        let n = self.n;
        ModelParams::new(x[n], x[n + 1].exp(), x[n + 2].exp()).ok()
    }

    fn value(&self, x: &[f64]) -> f64 {
        match self.params(x) {
            Some(p) => log_likelihood(self.graph, &x[..self.n], &p),
            None => f64::NEG_INFINITY,
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let p = self.params(x).expect("iterate stays finite");
        let g = log_likelihood_gradient(self.graph, &x[..n], &p);
        let mut out = g.z;
        out.push(g.alpha);
        // chain rule through beta = e^b, sigma = e^s
        out.push(g.beta * p.beta());
        out.push(g.sigma * p.sigma());
        out
    }
}

/// Maximises the log-likelihood of `graph`.
///
/// Missing starting values default to [`local_average_init`] and
/// [`default_param_init`]. Fails only on invalid input or when no ascent
/// step exists at the starting point.
pub fn fit(
    graph: &TimestampedGraph,
    config: &FitConfig,
    init_z: Option<&LatentDates>,
    init_params: Option<&ModelParams>,
) -> Result<FitResult, Error> {
    config.validate()?;
    if graph.edge_count() == 0 {
        return Err(Error::NoEdges);
    }
    let n = graph.n();
    let z0 = match init_z {
        Some(z) if z.len() != n => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
            })
        }
        Some(z) => z.clone(),
        None => local_average_init(graph),
    };
    let p0 = match init_params {
        Some(p) => *p,
        None => default_param_init(graph, config)?,
    };

    // Work on dates centred at the mean edge date; the likelihood only sees
    // differences and residuals, so this is exact up to rounding.
    let center = graph.mean_date().expect("graph has edges");
    let centered = graph.shift_dates(-center);

    let mut scale = vec![config.sigma_init * config.sigma_init; n];
    scale.extend([1.0, 1.0, 1.0]);
    let problem = Problem {
        graph: &centered,
        n,
        scale,
    };

    let mut x: Vec<f64> = z0.iter().map(|v| v - center).collect();
    x.extend([p0.alpha(), p0.beta().ln(), p0.sigma().ln()]);

    // Values always come from `Problem::value` so the trace compares like
    // with like; the gradient pass sums in a different order.
    let mut value = problem.value(&x);
    let mut grad = problem.gradient(&x);
    let initial = value;
    let mut trace = vec![value];
    let mut iterations = 0;
    let mut stop = StopReason::MaxIterations;
    let mut trial = vec![0.0; x.len()];

    while iterations < config.max_iterations {
        let dir: Vec<f64> = grad.iter().zip(&problem.scale).map(|(g, s)| g * s).collect();
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if slope == 0.0 {
            stop = StopReason::ZeroGradient;
            break;
        }

        let mut step = config.initial_step;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            for ((t, xi), di) in trial.iter_mut().zip(&x).zip(&dir) {
                *t = xi + step * di;
            }
            let v = problem.value(&trial);
            if v.is_finite() && v >= value + config.armijo_c * step * slope {
                accepted = Some(v);
                break;
            }
            step *= config.backtracking_factor;
        }

        let Some(new_value) = accepted else {
            if iterations == 0 {
                return Err(Error::LineSearchFailed);
            }
            stop = StopReason::LineSearchStalled;
            break;
        };

        std::mem::swap(&mut x, &mut trial);
        let change = (new_value - value).abs() / (value.abs() + 1.0);
        iterations += 1;
        value = new_value;
        grad = problem.gradient(&x);
        trace.push(value);
        if change < config.relative_tolerance {
            stop = StopReason::Tolerance;
            break;
        }
    }

    let params_hat = problem.params(&x).expect("iterate stays finite");
    let z_hat = LatentDates::new(x[..n].iter().map(|v| v + center).collect())?;
    Ok(FitResult {
        z_hat,
        params_hat,
        initial_log_likelihood: initial,
        final_log_likelihood: value,
        iterations,
        converged: matches!(stop, StopReason::Tolerance | StopReason::ZeroGradient),
        stop_reason: stop,
        trace,
    })
}
