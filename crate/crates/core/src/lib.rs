//! Numerical toolkit for convergence rates of continuous-time ergodic
//! averages: Fejér-kernel decay norms of spectral measures, the rate
//! constants linking power singularities at the origin to power decay,
//! measure-class verdicts, and two concrete flow models with independent
//! time-domain oracles.

pub mod catalog;
pub mod classes;
pub mod error;
pub mod flows;
pub mod kernels;
pub mod measures;
pub mod quad;
pub mod rates;
pub mod roots;
pub mod special;

pub use error::{Error, Result};
pub use kernels::{fejer, rho, rho_argmin, RhoResult};
pub use measures::{Atom, CantorComponent, Domain, Family, Fejer, Kernel, PowerKernel, Segment, SpectralMeasure};
pub use quad::{QuadResult, QuadStatus, Tolerance, TracePoint};
pub use rates::{
    alpha2_integral, decay_norm, fit_power_law, lemma_bounds, localize, rate_constant, singularity_norm, LemmaBounds, PowerFit,
    RateCertificate, RateForm, RateInputs, TheoremTag, Validity,
};
pub use classes::{class_membership, inclusion_suite, maximal_rate_check, ClassId, ClassVerdict, MaxRateVerdict, Verdict};
pub use flows::{
    model_norms, mult_average_norm, mult_spectral, operator_norm_lower, periodic_eval, sharpness_witness, PeriodicFlowModel,
    PiecewisePowerFunction,
};
