//! Multifractal entropy spectra on subshifts of finite type.
//!
//! The crate evaluates `Psi_q`-weighted covering and packing pre-measures of
//! Bowen balls exactly on the cylinder tree, extracts their critical
//! exponents, and assembles the partition growth rate `h(q)`, its Legendre
//! transform and the level-set spectrum, with independent oracles
//! (exhaustive antichain search, Perron roots, word counting) to check them.
//!
//! Balls use the dyadic metric `rho(x, y) = 2^-min{i : x_i != y_i}` with
//! `eps = 2^-k`, so a Bowen ball of order `n` is a cylinder of length
//! `n + k`. Values that can be zero or infinite are carried as natural logs.

pub mod entropy;
pub mod error;
pub mod local;
pub mod logspace;
pub mod measure;
pub mod perron;
pub mod premeasure;
pub mod spectrum;
pub mod symbolic;
pub mod thermo;

pub use entropy::{
    bowen_entropy, critical_exponent, default_schedule, growth_rate_entropy, packing_entropy,
    packing_entropy_delta, CriticalExponent, EntropyEstimate, Method, ScheduleEntry,
};
pub use error::{Error, Result};
pub use local::{
    filtration_check, filtration_member, local_entropy, sample_level_set, FiltrationCheck,
    LocalEntropySample,
};
pub use measure::{doubling_check, DoublingBound, DoublingReport, Mass, MeasureModel, ModelKind};
pub use premeasure::{
    antichain_oracle, covering_premeasure, packing_outer, packing_premeasure, psi, CylinderTree,
    Extremum, PremeasureParams, PremeasureValue,
};
pub use spectrum::{
    closed_form_curve, level_identity_residual, domain_endpoints, h_curve, legendre,
    level_set_spectrum_oracle, one_sided_derivatives, LevelIdentity, DomainEndpoints, LegendrePoint,
    LevelSetBin, Provenance, SpectrumCurve,
};
pub use symbolic::{bowen_cylinder, hausdorff_distance, CylinderSet, DepthOffset, ShiftSpace, Word};
pub use thermo::{closed_form_h, correlation_entropy, gibbs_identity_residual, pressure, Potential};
