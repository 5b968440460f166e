//! Activity-date estimation for timestamped interaction networks.
//!
//! Each vertex of an undirected graph is given a latent activity date; the
//! probability that two vertices interact decays with the squared distance
//! between their dates, and interaction dates scatter around the midpoint.
//! [`estimation::fit`] recovers the dates by maximum likelihood and
//! [`simulation`] / [`evaluation`] reproduce the simulation study comparing
//! the fitted dates with per-vertex averages of incident edge dates.

pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod graph;
pub mod io;
pub mod model;
pub mod simulation;

pub use error::Error;
pub use estimation::{default_param_init, fit, local_average_init, FitConfig, FitResult, StopReason};
pub use graph::{Edge, TimestampedGraph};
pub use model::{
    connection_probability, date_log_density, log_likelihood, log_likelihood_gradient, LatentDates,
    LogLikelihoodGradient, ModelParams,
};
