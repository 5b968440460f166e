//! Scoring estimates against ground truth and running simulation batches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Error;
use crate::estimation::{fit, local_average_init, FitConfig};
use crate::simulation::{generate, DateModel, SimConfig};

/// Mean squared difference between two date vectors.
pub fn mse(z_true: &[f64], z_est: &[f64]) -> Result<f64, Error> {
    if z_true.len() != z_est.len() {
        return Err(Error::DimensionMismatch {
            expected: z_true.len(),
            got: z_est.len(),
        });
    }
    if z_true.is_empty() {
        return Err(Error::InvalidInput("mse of empty vectors".into()));
    }
    let sum: f64 = z_true.iter().zip(z_est).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / z_true.len() as f64)
}

/// Positive when the model estimate is closer to the truth than local averages.
#[inline]
pub fn improvement(mse_local: f64, mse_model: f64) -> f64 {
    mse_local - mse_model
}

/// Kernel-smoothed curve on a grid. `None` marks grid points where the total
/// kernel weight underflowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedCurve {
    pub grid_x: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub bandwidth: f64,
}

impl SmoothedCurve {
    /// Smoothed value at the grid point nearest to `x`.
    pub fn value_near(&self, x: f64) -> Option<f64> {
        let k = self
            .grid_x
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))?
            .0;
        self.values[k]
    }
}

pub const DEFAULT_GRID_POINTS: usize = 200;
const MIN_TOTAL_WEIGHT: f64 = 1e-300;

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^(-1/5)`.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let sd = var.sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = match (sd > 0.0, iqr > 0.0) {
        (true, true) => sd.min(iqr / 1.34),
        (true, false) => sd,
        (false, true) => iqr / 1.34,
        (false, false) => 1.0,
    };
    0.9 * spread * n.powf(-0.2)
}

// linear interpolation between order statistics
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Nadaraya–Watson regression of `ys` on `xs` with a Gaussian kernel.
///
/// The bandwidth defaults to [`silverman_bandwidth`] and the grid to
/// [`DEFAULT_GRID_POINTS`] evenly spaced points over the range of `xs`.
pub fn kernel_smooth(
    xs: &[f64],
    ys: &[f64],
    bandwidth: Option<f64>,
    grid: Option<&[f64]>,
) -> Result<SmoothedCurve, Error> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "kernel smoothing needs at least 2 samples, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::InvalidParams(format!("bandwidth must be positive, got {h}"))),
        None => silverman_bandwidth(xs),
    };
    let grid_x = match grid {
        Some(g) => {
            if g.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
                return Err(Error::InvalidInput("grid must be strictly ascending".into()));
            }
            g.to_vec()
        }
        None => {
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                vec![lo]
            } else {
                let step = (hi - lo) / (DEFAULT_GRID_POINTS - 1) as f64;
                (0..DEFAULT_GRID_POINTS)
                    .map(|k| if k + 1 == DEFAULT_GRID_POINTS { hi } else { lo + step * k as f64 })
                    .collect()
            }
        }
    };

    let values = grid_x
        .iter()
        .map(|&g| {
            let mut wsum = 0.0;
            let mut wy = 0.0;
            for (x, y) in xs.iter().zip(ys) {
                let u = (g - x) / h;
                let w = (-0.5 * u * u).exp();
                wsum += w;
                wy += w * y;
            }
            (wsum >= MIN_TOTAL_WEIGHT).then(|| wy / wsum)
        })
        .collect();

    Ok(SmoothedCurve {
        grid_x,
        values,
        bandwidth: h,
    })
}

/// Smallest grid `x` from which the curve stays nonnegative up to the end of
/// the grid. Missing values neither break nor start a run.
pub fn positive_crossing(curve: &SmoothedCurve) -> Option<f64> {
    let mut crossing = None;
    for (x, v) in curve.grid_x.iter().zip(&curve.values).rev() {
        match v {
            Some(v) if *v >= 0.0 => crossing = Some(*x),
            Some(_) => break,
            None => {}
        }
    }
    crossing
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Ideal,
    Uniform,
    Rewired,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Ideal => "ideal",
            Scenario::Uniform => "uniform",
            Scenario::Rewired => "rewired",
        }
    }

    pub fn date_model(self) -> DateModel {
        match self {
            Scenario::Uniform => DateModel::Uniform,
            Scenario::Ideal | Scenario::Rewired => DateModel::Gaussian,
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "ideal" => Ok(Scenario::Ideal),
            "uniform" => Ok(Scenario::Uniform),
            "rewired" => Ok(Scenario::Rewired),
            other => Err(Error::InvalidInput(format!("unknown scenario {other:?}"))),
        }
    }
}

/// How the target density is chosen for each replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySweep {
    Fixed(f64),
    Uniform { low: f64, high: f64 },
}

impl Default for DensitySweep {
    fn default() -> Self {
        DensitySweep::Uniform { low: 0.1, high: 0.5 }
    }
}

/// One simulated network and how both estimators fared on it.
///
/// The error fields are `None` when the network was discarded or the fit
/// could not start.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub scenario: Scenario,
    pub rewire_fraction: f64,
    pub target_density: f64,
    pub seed: u64,
    pub n_lcc: usize,
    pub edges: usize,
    pub edges_per_vertex: f64,
    pub mse_local: Option<f64>,
    pub mse_model: Option<f64>,
    pub improvement: Option<f64>,
    pub converged: bool,
    pub accepted: bool,
    /// Log-likelihood at the local-average start and after fitting.
    pub initial_log_likelihood: Option<f64>,
    pub final_log_likelihood: Option<f64>,
    /// Whether the accepted-step trace never decreased.
    pub monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub replicates: usize,
    pub density: DensitySweep,
    pub rewire_fraction: f64,
    pub seed_base: u64,
    /// Template for everything but density, date model, rewiring and seed.
    pub sim: SimConfig,
    pub fit: FitConfig,
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, replicates: usize, seed_base: u64) -> Self {
        Self {
            scenario,
            replicates,
            density: DensitySweep::default(),
            rewire_fraction: if scenario == Scenario::Rewired { 0.05 } else { 0.0 },
            seed_base,
            sim: SimConfig::default(),
            fit: FitConfig::default(),
        }
    }
}

fn replicate_seed(base: u64, r: usize) -> u64 {
    base.wrapping_add(r as u64)
}

/// Density for replicate seed `seed`, drawn from its own ChaCha stream so it
/// does not perturb the network sampler.
fn draw_density(sweep: DensitySweep, seed: u64) -> f64 {
    match sweep {
        DensitySweep::Fixed(d) => d,
        DensitySweep::Uniform { low, high } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            if low == high {
                low
            } else {
                rng.random_range(low..high)
            }
        }
    }
}

fn validate_sweep(sweep: DensitySweep) -> Result<(), Error> {
    let ok = |d: f64| d > 0.0 && d < 1.0;
    match sweep {
        DensitySweep::Fixed(d) if ok(d) => Ok(()),
        DensitySweep::Uniform { low, high } if ok(low) && ok(high) && low <= high => Ok(()),
        other => Err(Error::InvalidParams(format!("invalid density sweep {other:?}"))),
    }
}

/// Simulates, fits and scores replicate `r` of `config`.
pub fn run_replicate(config: &ExperimentConfig, r: usize) -> Result<ExperimentRecord, Error> {
    let seed = replicate_seed(config.seed_base, r);
    let density = draw_density(config.density, seed);
    let sim_cfg = SimConfig {
        target_density: density,
        date_model: config.scenario.date_model(),
        rewire_fraction: config.rewire_fraction,
        seed,
        ..config.sim.clone()
    };
    let out = generate(&sim_cfg)?;
    let mut rec = ExperimentRecord {
        scenario: config.scenario,
        rewire_fraction: config.rewire_fraction,
        target_density: density,
        seed,
        n_lcc: out.graph.n(),
        edges: out.graph.edge_count(),
        edges_per_vertex: out.edges_per_vertex,
        mse_local: None,
        mse_model: None,
        improvement: None,
        converged: false,
        accepted: out.accepted,
        initial_log_likelihood: None,
        final_log_likelihood: None,
        monotone: true,
    };
    if !out.accepted {
        return Ok(rec);
    }

    let local = local_average_init(&out.graph);
    let mse_local = mse(&out.z_true, &local)?;
    rec.mse_local = Some(mse_local);
    match fit(&out.graph, &config.fit, Some(&local), None) {
        Ok(res) => {
            let mse_model = mse(&out.z_true, &res.z_hat)?;
            rec.mse_model = Some(mse_model);
            rec.improvement = Some(improvement(mse_local, mse_model));
            rec.converged = res.converged;
            rec.initial_log_likelihood = Some(res.initial_log_likelihood);
            rec.final_log_likelihood = Some(res.final_log_likelihood);
            rec.monotone = res.trace.windows(2).all(|w| w[1] >= w[0])
                && res.final_log_likelihood >= res.initial_log_likelihood;
        }
        // Degenerate starts (e.g. a complete component) are recorded, not fatal.
        Err(_) => rec.converged = false,
    }
    Ok(rec)
}

/// Runs every replicate, in parallel, returning records in replicate order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, Error> {
    if config.replicates == 0 {
        return Err(Error::InvalidParams("replicate count must be positive".into()));
    }
    validate_sweep(config.density)?;
    config.fit.validate()?;
    (0..config.replicates)
        .into_par_iter()
        .map(|r| run_replicate(config, r))
        .collect()
}

/// Improvement curve over accepted, fitted records, with and without the
/// records whose improvement falls below a floor.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSummary {
    pub curve: Option<SmoothedCurve>,
    pub crossing: Option<f64>,
    pub filtered_curve: Option<SmoothedCurve>,
    pub filtered_crossing: Option<f64>,
    pub excluded: usize,
}

/// `(edges_per_vertex, improvement)` of every scored record.
pub fn scored_points(records: &[ExperimentRecord]) -> (Vec<f64>, Vec<f64>) {
    records
        .iter()
        .filter(|r| r.accepted)
        .filter_map(|r| r.improvement.map(|imp| (r.edges_per_vertex, imp)))
        .unzip()
}

pub fn summarize(
    records: &[ExperimentRecord],
    bandwidth: Option<f64>,
    exclude_below: Option<f64>,
) -> Result<ExperimentSummary, Error> {
    let (xs, ys) = scored_points(records);
    let curve = if xs.len() >= 2 {
        Some(kernel_smooth(&xs, &ys, bandwidth, None)?)
    } else {
        None
    };
    let crossing = curve.as_ref().and_then(positive_crossing);

    let mut summary = ExperimentSummary {
        crossing,
        filtered_crossing: crossing,
        filtered_curve: curve.clone(),
        curve,
        excluded: 0,
    };
    if let Some(floor) = exclude_below {
        let (fx, fy): (Vec<f64>, Vec<f64>) =
            xs.iter().zip(&ys).filter(|(_, &y)| y >= floor).map(|(x, y)| (*x, *y)).unzip();
        summary.excluded = xs.len() - fx.len();
        summary.filtered_curve = if fx.len() >= 2 {
            Some(kernel_smooth(&fx, &fy, bandwidth, None)?)
        } else {
            None
        };
        summary.filtered_crossing = summary.filtered_curve.as_ref().and_then(positive_crossing);
    }
    Ok(summary)
}
