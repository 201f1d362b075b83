//! Spectral corrections and compatible liftings. Every operation returns the
//! extended polynomials together with the grid measurements that certify
//! its postconditions.

mod cert;
pub mod compatible;
pub mod interval;
pub mod lifting;
pub mod sublevel;

pub use cert::{certify_lifting, CellGrid, LiftingCertificate, LiftingSpec};

pub use compatible::{compatible_correct, compatible_correct_set, compatible_correct_set_with, compatible_correct_with, CorrectedPair};
pub use interval::{correct_interval, correct_interval_with, correct_simple_set, correct_simple_set_with, Corrected};
pub use lifting::{lift_mu, lift_pair_interval, lift_pair_interval_with, lift_pair_set, lift_pair_set_with, LiftedPair};

pub use sublevel::{dip_interval_depth, sublevel_set};

use crate::trigpoly::MAX_GRID;

/// Tuning shared by all corrections. Defaults are desk-scale choices.
#[derive(Clone, Debug)]
pub struct CorrectionOptions {
    /// `1 − c₁ < |f| < 1 + c₁` is required before a correction.
    pub c1: f64,
    /// Tolerance for "`|f|` takes the same value at both ends".
    pub boundary_tol: f64,
    /// Starting and largest oscillation frequency of the adaptive search.
    pub m_floor: u64,
    pub m_cap: u64,
    /// The correction keeps the band `deg f < |n| ≤ band_factor·M`.
    pub band_factor: u64,
    /// Smallest certification grid.
    pub grid_floor: usize,
    /// Largest grid any step may allocate.
    pub max_grid: usize,
    /// Fejér order of the Rademacher approximant inside σ-families.
    pub psi_order: u32,
    /// Largest frequency a σ-family may reach.
    pub freq_cap: u64,
    /// Ceiling for measured constants (`K_g`, `K_set`, fitted σ constants).
    pub ceiling: f64,
    pub k_flat: f64,
    pub flatten_attempts: usize,
    pub seed: u64,
}

impl Default for CorrectionOptions {
    fn default() -> Self {
        CorrectionOptions {
            c1: 0.25,
            boundary_tol: 1e-9,
            m_floor: 8,
            m_cap: 1 << 20,
            band_factor: 8,
            grid_floor: 1 << 16,
            max_grid: MAX_GRID,
            psi_order: 8,
            freq_cap: 1 << 22,
            ceiling: 5.0,
            k_flat: 3.0,
            flatten_attempts: 64,
            seed: 0,
        }
    }
}
