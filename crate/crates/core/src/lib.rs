//! Linear graph-neural-network propagation on two-class contextual stochastic
//! block models.
//!
//! The crate samples CSBM graphs and Gaussian node features, propagates them
//! with random-walk, symmetric, PPNP and APPNP operators, evaluates
//! closed-form bounds on class-mean separation and within-class variance,
//! turns those bounds into depth predictions, and checks everything against
//! Monte Carlo simulation.
//!
//! Trials are keyed by `(seed, trial_index)` and run data-parallel with
//! rayon under the default `parallel` feature; disabling it gives a
//! sequential build with bit-identical results.

pub mod csbm;
pub mod depth;
pub mod empirics;
pub mod error;
pub mod graph;
pub mod io;
pub mod par;
pub mod propagation;
pub mod rng;
pub mod theory;

pub use csbm::{
    check_regime, expected_operator_spectrum, sample_features, sample_graph, sample_instance, CsbmParams,
    LogBase, RegimeReport,
};
pub use depth::{predict_depth, DepthPrediction, Scenario};
pub use error::{Error, Result};
pub use graph::{Features, Graph, LoadReport};
pub use io::load_graph;
pub use propagation::{
    appnp_step, exact_variance_profile, ppnp, propagate, rw_step, sym_step, NodeRepresentations, OperatorKind,
    OperatorSpec, VarianceProfile,
};
pub use theory::{ConcentrationConfig, TheoryBounds};
