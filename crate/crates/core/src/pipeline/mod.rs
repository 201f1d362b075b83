//! The global construction: an initial pair with windings (1, 0), then
//! alternating stages that push both moduli towards the unit circle while
//! keeping coefficient moduli equal.

pub mod config;
pub mod driver;
pub mod init;
pub mod stages;

pub use config::{c2_from, Config, Constants, Preset};
pub use driver::{run, samples_csv, write_checkpoint, RunAbort, RunOutput, StageReport, CERT_SLACK};
pub use init::{calibrate_init_eps, init_partners, init_partners_with, phi_init, phi_init_coeff, InitOptions, InitReport};
pub use stages::{base4_digits, carve, half_gap_stage, kill_gap, lambda, HalfGapOutput, HalfGapReport, KillGapOutput, KillGapReport};

use crate::trigpoly::TrigPoly;

/// Two polynomials with equal coefficient moduli and their windings.
#[derive(Clone, Debug, PartialEq)]
pub struct PartnerPair {
    pub f: TrigPoly,
    pub g: TrigPoly,
    pub winding_f: i64,
    pub winding_g: i64,
    pub moduli_residual: f64,
}
