//! Numerical tolerances shared by every module.
//!
//! All matrices handled here are at most 512x512, so plain `f64` arithmetic
//! keeps rounding well below these thresholds.

/// Tolerance record used by the density-matrix checks and post-selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max |M - M†| entry for a matrix to count as Hermitian.
    pub hermiticity: f64,
    /// Max |tr ρ - 1|.
    pub trace: f64,
    /// Smallest admissible eigenvalue (negative: numerical noise floor).
    pub psd_floor: f64,
    /// Post-selection probabilities below this are treated as impossible events.
    pub null_outcome: f64,
    /// Max magnitude of an off-pattern entry in an X state.
    pub x_state: f64,
    /// Max |‖ψ‖ - 1| for pure state vectors.
    pub norm: f64,
    /// Slack allowed on |γⱼ| ≤ √(aⱼbⱼ).
    pub x_coherence: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    hermiticity: 1e-10,
    trace: 1e-10,
    psd_floor: -1e-9,
    null_outcome: 1e-14,
    x_state: 1e-10,
    norm: 1e-10,
    x_coherence: 1e-9,
};

/// A facet value counts as a violation only above `bound + VIOLATION_MARGIN`.
pub const VIOLATION_MARGIN: f64 = 1e-7;

/// Denominators of the closed-form ρ₄ expressions below this are degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-14;
