//! Ground truth construction and parameter fitting.

mod fit;
mod ground_truth;
pub mod optimiser;

pub use fit::{
    extend_model, fit_model, fit_objective, fit_term, initialise_term, params_to_term,
    term_to_params, FitConfig, FitReport, FittedTerm, ParameterBounds, INITIAL_SEMI_AXIS,
    INITIAL_STEEPNESS, PARAMETER_COUNT,
};
pub use ground_truth::{
    average_ground_truths, build_ground_truth, build_ground_truth_with_terms, BinIndex,
    MembershipGroundTruth, TrainingExample,
};
