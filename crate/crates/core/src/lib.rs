//! Exact enumeration, lace expansion and Monte Carlo for the weakly
//! self-avoiding walk on Z^d and on the discrete torus.

pub mod enumeration;
pub mod error;
pub mod lace;
pub mod lattice;
pub mod metropolis;
pub mod params;
pub mod path;
pub mod perm;
pub mod scaling;
pub mod stats;
pub mod walk;

pub use enumeration::{enumerate, enumerate_torus_via_lift, enumerate_with, two_point_series, EnumerationOptions, EnumerationSummary, TwoPointTable};
pub use error::{Error, Result};
pub use lace::{j_value, kjk_check, kjk_check_exact, pi_series_partial, Interval, Lace, PiSeries};
pub use lattice::{Ambient, LatticePoint, Step};
pub use metropolis::{metropolis_sample, sample_paths, MetropolisConfig, MetropolisResult, Observable, ObservableEstimate};
pub use params::ModelParams;
pub use path::{lift_path, project_path, rescale, PathAmbient, RescaledPath};
pub use perm::{perm_partition_estimate, perm_run, ChainGrowthConfig, PermResult};
pub use scaling::{
    degenerate_regime_check, diffusion_fit, dilute_ratio_experiment, fdd_statistic, standard_frequency_grid, tightness_check, DiffusionFit, FddResult,
    GaussianReference, IncrementSpec,
};
pub use stats::EstimateWithError;
pub use walk::{lift_walk, project_walk, Walk};
