//! Monte Carlo estimators for walks killed on leaving a cone.

pub mod batch;
pub mod estimators;
pub mod walk;

pub use batch::{run_batched, McConfig};
pub use estimators::{
    conditional_endpoint_test, estimate_en_sequence, estimate_kappa_fit, estimate_max_moment,
    estimate_survival, estimate_v_decomposition, estimate_v_truncated, estimate_v_truncated_multi,
    fit_tail_slope, two_sample_chi_square, EndpointBin, EndpointTest, KappaFit, KappaRow, MaxMoment,
    SurvivalCurve, SurvivalRow, VDecomposition, DEFAULT_HORIZON_CAP,
};
pub use walk::{lattice_coords, lattice_point, simulate_exit, ExitRecord, Walker};
