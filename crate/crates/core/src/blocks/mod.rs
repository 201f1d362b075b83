//! Analytic building blocks for the corrections: the φ/ψ pair, Fejér
//! approximants, σ-families, the Pythagoras lift and random-sign flattening.

pub mod fejer;
pub mod flatten;
pub mod phi;
pub mod pythagoras;
pub mod sigma;

pub use fejer::{fejer_indicator, fejer_rademacher, scale_copy, vallee_poussin};
pub use flatten::{flatten_best, flatten_signs, flatten_target, FlattenOutcome};
pub use phi::PhiPsi;
pub use pythagoras::pythagoras_lift;
pub use sigma::{build_sigma_family, BadSet, ScaleLattice, SigmaCertificate, SigmaFamily, SigmaSpec};
