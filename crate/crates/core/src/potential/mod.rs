//! Slowly varying majorants, the defect `f`, the kernel `Ĝ`, region
//! integrals and the `Y` supermartingale check.

pub mod beta;
pub mod f;
pub mod gamma;
pub mod ghat;
pub mod green;
pub mod polar;
pub mod scan;
pub mod ubeta;
pub mod ycheck;

pub use beta::BetaField;
pub use f::{f_bound_scan, f_value, FEvaluator};
pub use gamma::{construct_gamma_default, validate_gamma, GammaFn, GammaReport};
pub use ghat::{ghat_eval, GhatCase};
pub use scan::{potential_ratio_scan, PotentialScan};
pub use ubeta::{u_beta, UBetaGrid};
pub use ycheck::{scan_shift, supermartingale_y_check, ShiftScan, YCheckReport};
