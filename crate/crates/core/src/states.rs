//! The three input state families, the closed-form swapped state and X-state
//! parameter extraction.
//!
//! Basis order is lexicographic, `|000⟩, |001⟩, …, |111⟩`.

use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
#[allow(unused_imports)] // unused when dev-dependencies turn on num-traits/std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::qlin::{ComplexMatrix, DensityMatrix};
use crate::tol::{DEGENERATE_DENOMINATOR, TOLERANCES};

pub const KET_000: usize = 0b000;
pub const KET_001: usize = 0b001;
pub const KET_010: usize = 0b010;
pub const KET_100: usize = 0b100;
pub const KET_111: usize = 0b111;

/// One of the four tripartite families: the three inputs and the swapped output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Rho1,
    Rho2,
    Rho3,
    Rho4,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Rho1, Family::Rho2, Family::Rho3, Family::Rho4];
    pub const INITIAL: [Family; 3] = [Family::Rho1, Family::Rho2, Family::Rho3];

    pub fn build(self, params: &StateFamilyParams) -> Result<DensityMatrix> {
        match self {
            Family::Rho1 => make_rho1(params.theta1, params.p1),
            Family::Rho2 => make_rho2(params.p2),
            Family::Rho3 => make_rho3(params.theta3, params.p3),
            Family::Rho4 => make_rho4_closed_form(params.theta1, params.theta3, params.p3),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Rho1 => "rho1",
            Family::Rho2 => "rho2",
            Family::Rho3 => "rho3",
            Family::Rho4 => "rho4",
        }
    }
}

impl core::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho1" | "1" => Ok(Family::Rho1),
            "rho2" | "2" => Ok(Family::Rho2),
            "rho3" | "3" => Ok(Family::Rho3),
            "rho4" | "4" => Ok(Family::Rho4),
            _ => Err(Error::InvalidConfig("family must be one of rho1, rho2, rho3, rho4")),
        }
    }
}

/// The five scalars that fix ρ₁, ρ₂, ρ₃ and hence ρ₄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateFamilyParams {
    pub theta1: f64,
    pub p1: f64,
    pub p2: f64,
    pub theta3: f64,
    pub p3: f64,
}

impl StateFamilyParams {
    pub fn new(theta1: f64, p1: f64, p2: f64, theta3: f64, p3: f64) -> Result<Self> {
        let params = Self {
            theta1,
            p1,
            p2,
            theta3,
            p3,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_angle("theta1", self.theta1)?;
        check_probability("p1", self.p1)?;
        check_probability("p2", self.p2)?;
        check_angle("theta3", self.theta3)?;
        check_probability("p3", self.p3)
    }
}

pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite(name));
    }
    if value < min || value > max {
        return Err(Error::RangeViolation { name, value, min, max });
    }
    Ok(())
}

fn check_angle(name: &'static str, value: f64) -> Result<()> {
    check_range(name, value, 0.0, FRAC_PI_4)
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    check_range(name, value, 0.0, 1.0)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `weight·|ψ⟩⟨ψ| + (1 - weight)·|admixture⟩⟨admixture|` for
/// `|ψ⟩ = c₀|000⟩ + c₇|111⟩` (unnormalized sum allowed by the caller).
fn ghz_like_mixture(c000: f64, c111: f64, weight: f64, admixture: usize, admixture_weight: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(8, 8);
    m[(KET_000, KET_000)] = real(weight * c000 * c000);
    m[(KET_111, KET_111)] = real(weight * c111 * c111);
    m[(KET_000, KET_111)] = real(weight * c000 * c111);
    m[(KET_111, KET_000)] = real(weight * c000 * c111);
    m[(admixture, admixture)] += real(admixture_weight);
    m
}

/// `p₁|ψ_f⟩⟨ψ_f| + (1-p₁)|001⟩⟨001|`, `|ψ_f⟩ = cosθ₁|000⟩ + sinθ₁|111⟩`.
pub fn make_rho1(theta1: f64, p1: f64) -> Result<DensityMatrix> {
    check_angle("theta1", theta1)?;
    check_probability("p1", p1)?;
    DensityMatrix::new(ghz_like_mixture(theta1.cos(), theta1.sin(), p1, KET_001, 1.0 - p1))
}

/// `p₂|ψ_m⟩⟨ψ_m| + (1-p₂)|010⟩⟨010|` with the GHZ vector `|ψ_m⟩`.
pub fn make_rho2(p2: f64) -> Result<DensityMatrix> {
    check_probability("p2", p2)?;
    DensityMatrix::new(ghz_like_mixture(FRAC_1_SQRT_2, FRAC_1_SQRT_2, p2, KET_010, 1.0 - p2))
}

/// `p₃|ψ_l⟩⟨ψ_l| + (1-p₃)|100⟩⟨100|`, `|ψ_l⟩ = sinθ₃|000⟩ + cosθ₃|111⟩`.
pub fn make_rho3(theta3: f64, p3: f64) -> Result<DensityMatrix> {
    check_angle("theta3", theta3)?;
    check_probability("p3", p3)?;
    DensityMatrix::new(ghz_like_mixture(theta3.sin(), theta3.cos(), p3, KET_100, 1.0 - p3))
}

/// Normalization of the swapped state: `sin²θ₁ + p₃ cos2θ₁ sin²θ₃`.
pub fn rho4_denominator(theta1: f64, theta3: f64, p3: f64) -> f64 {
    let s1 = theta1.sin();
    let s3 = theta3.sin();
    s1 * s1 + p3 * (2.0 * theta1).cos() * s3 * s3
}

/// Swapped state `(p₃|φ⟩⟨φ| + (1-p₃)sin²θ₁|100⟩⟨100|) / (sin²θ₁ + p₃cos2θ₁sin²θ₃)`
/// with `|φ⟩ = cosθ₁ sinθ₃|000⟩ + sinθ₁ cosθ₃|111⟩`.
pub fn make_rho4_closed_form(theta1: f64, theta3: f64, p3: f64) -> Result<DensityMatrix> {
    check_angle("theta1", theta1)?;
    check_angle("theta3", theta3)?;
    check_probability("p3", p3)?;
    let denominator = rho4_denominator(theta1, theta3, p3);
    if denominator < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateOutcome { denominator });
    }
    let s1 = theta1.sin();
    let m = ghz_like_mixture(theta1.cos() * theta3.sin(), s1 * theta3.cos(), p3, KET_100, (1.0 - p3) * s1 * s1);
    DensityMatrix::new(m.scale_real(1.0 / denominator))
}

/// GHZ projector `|ψ_m⟩⟨ψ_m|`.
pub fn ghz() -> DensityMatrix {
    make_rho2(1.0).expect("p2 = 1 is in range")
}

/// Diagonal and anti-diagonal entries of a three-qubit X state.
///
/// `a[j]` sits at `(j, j)`, `b[j]` at `(7-j, 7-j)` and `gamma[j]` at `(j, 7-j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStateParams {
    pub a: [f64; 4],
    pub b: [f64; 4],
    pub gamma: [Complex64; 4],
}

impl XStateParams {
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.a.iter().chain(&self.b).sum();
        if (total - 1.0).abs() > TOLERANCES.trace {
            return Err(Error::InvalidState(crate::StateDefect::Trace(total)));
        }
        for j in 0..4 {
            if self.a[j] < 0.0 || self.b[j] < 0.0 {
                return Err(Error::InvalidState(crate::StateDefect::NotPositive(self.a[j].min(self.b[j]))));
            }
            if self.gamma[j].norm() > (self.a[j] * self.b[j]).sqrt() + TOLERANCES.x_coherence {
                return Err(Error::InvalidState(crate::StateDefect::NotPositive(
                    (self.a[j] * self.b[j]).sqrt() - self.gamma[j].norm(),
                )));
            }
        }
        Ok(())
    }

    /// `⟨σz⊗σz⊗σz⟩` of the state; the parity of basis index `i` is `(-1)^popcount(i)`.
    pub fn zzz(&self) -> f64 {
        let parity = |i: usize| if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        (0..4).map(|j| parity(j) * self.a[j] + parity(7 - j) * self.b[j]).sum()
    }
}

/// Builds the density matrix of an X state.
pub fn x_state(x: &XStateParams) -> Result<DensityMatrix> {
    x.validate()?;
    let mut m = ComplexMatrix::zeros(8, 8);
    for j in 0..4 {
        m[(j, j)] = real(x.a[j]);
        m[(7 - j, 7 - j)] = real(x.b[j]);
        m[(j, 7 - j)] = x.gamma[j];
        m[(7 - j, j)] = x.gamma[j].conj();
    }
    DensityMatrix::new(m)
}

/// Reads `(a, b, γ)` off an X-shaped three-qubit state.
pub fn extract_x_params(rho: &DensityMatrix) -> Result<XStateParams> {
    if rho.qubits() != 3 {
        return Err(Error::DimensionMismatch {
            op: "extract_x_params",
            left: (rho.dim(), rho.dim()),
            right: (8, 8),
        });
    }
    for row in 0..8 {
        for col in 0..8 {
            if row == col || row + col == 7 {
                continue;
            }
            let magnitude = rho.get(row, col).norm();
            if magnitude >= TOLERANCES.x_state {
                return Err(Error::NotXState { row, col, magnitude });
            }
        }
    }
    let mut x = XStateParams {
        a: [0.0; 4],
        b: [0.0; 4],
        gamma: [Complex64::new(0.0, 0.0); 4],
    };
    for j in 0..4 {
        x.a[j] = rho.get(j, j).re;
        x.b[j] = rho.get(7 - j, 7 - j).re;
        x.gamma[j] = rho.get(j, 7 - j);
    }
    Ok(x)
}
