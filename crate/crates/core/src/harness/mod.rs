//! Scenario configs, the shipped corpus, end-to-end runs, invariant suites
//! and parameter sweeps.

mod config;
mod corpus;
mod report;
mod run;
mod sweep;
mod verify;

pub use config::{Budgets, ExponentsConfig, OutputConfig, OutputFormat, ScenarioConfig, SparseConfig, Steps};
pub use corpus::{corpus_names, corpus_scenario, default_corpus, extended_corpus};
pub use report::{
    constant_key, family_label, serde_name, tool_version, CheckOutcome, PrincipalSummary, Ratios, Report,
    SandwichSummary, SparseSummary, Timing, SCHEMA_VERSION,
};
pub use run::{
    principal_forest, principal_root, run_scenario, sandwich_summary, sandwich_violations, sigma_inputs,
    sparse_families, RunOutcome, ORDER_SLACK,
};
pub use sweep::{set_path, sweep_experiment, SweepRow, SweepTable};
pub use verify::{verify_suite, Suite, SuiteOutcome, VerifyOptions, VerifyReport, NORM_RATIO_BOUND, SYMMETRY_TOL};
