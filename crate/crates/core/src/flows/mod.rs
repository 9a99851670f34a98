//! Two flows where every quantity is computable end to end, each with a
//! time-domain oracle that does not go through the measure engine.

mod gauss;
pub mod mult;
pub mod periodic;

pub use mult::{
    model_norms, mult_average_norm, mult_cross_spectral, mult_spectral, operator_norm_lower, sharpness_witness, x_norm_sq,
    y_norm_sq, y_tilde_sq, CrossTerm, ModelNorms, PiecewisePowerFunction, PowerTerm, SharpnessWitness, YNorm,
};
pub use periodic::{periodic_eval, trajectory_average_norm, Circle, Mode, PeriodicEval, PeriodicFlowModel};
