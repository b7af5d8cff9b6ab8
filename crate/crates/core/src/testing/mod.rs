//! Two-weight testing: the testing constant, sparse families, principal
//! cubes, and search-based lower bounds for the operator norm.

mod norm;
mod principal;
mod regime;
mod sawyer;
mod sparse;

pub use norm::{
    estimate_operator_norm, estimate_partial_test_constant, CandidateSource, NormEstimate, NormRatio,
    PartialEstimate, SearchStrategy,
};
pub use principal::{build_principal_cubes, carleson_check, CarlesonCheck, PrincipalCube, PrincipalForest, SigmaAverages};
pub use regime::{regime_check, regime_for, split_by_dominant_slot, Regime, RegimeReport};
pub use sawyer::{
    lattice_numerator, sandwich_numerator, sawyer_constant, sawyer_denominator, sawyer_ratio, sawyer_scan,
    sawyer_work, InnerMode, SawyerResult, SawyerScan, DEFAULT_SAWYER_WORK, TIE_TOLERANCE,
};
pub use sparse::{
    build_sparse_family, default_level_base, term_growth_bound, validate_sparse_family, SparseCheck, SparseEntry,
    SparseFamily, SparseValidation,
};
