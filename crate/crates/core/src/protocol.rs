//! Preparation stage of the sequential measurement protocol and diagonal
//! local filters.
//!
//! Three three-qubit states are spread over parties A₁, A₂, A₃ so that each
//! party holds three qubits. Every party Bell-measures two of them and keeps
//! the third; post-selecting on the outcomes leaves a three-qubit state on the
//! kept qubits.
//!
//! The nine qubits are ordered internally as `ρ₁¹ρ₁²ρ₁³ ρ₂¹ρ₂²ρ₂³ ρ₃¹ρ₃²ρ₃³`,
//! i.e. `3·state + particle`, matching the tensor product `ρ₁ ⊗ ρ₂ ⊗ ρ₃`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::BellOutcome;
use crate::qlin::{conjugate, phase, project_trailing, ComplexMatrix, DensityMatrix, KroneckerProduct};
use crate::states::check_range;
use crate::tol::TOLERANCES;

/// A single qubit of one of the three input states (both 0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Particle {
    pub state: usize,
    pub index: usize,
}

impl Particle {
    pub const fn new(state: usize, index: usize) -> Self {
        Self { state, index }
    }

    /// Position in the internal nine-qubit register.
    pub fn register_index(self) -> usize {
        3 * self.state + self.index
    }
}

/// What one party does: Bell-measure a pair, keep one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartyRole {
    pub measured: (Particle, Particle),
    pub kept: Particle,
}

/// Distribution of the nine qubits over the three parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmpWiring {
    roles: [PartyRole; 3],
}

impl SmpWiring {
    pub fn new(roles: [PartyRole; 3]) -> Result<Self> {
        let mut seen = [false; 9];
        for role in &roles {
            for p in [role.measured.0, role.measured.1, role.kept] {
                if p.state > 2 || p.index > 2 {
                    return Err(Error::InvalidWiring("particle outside the 3x3 register"));
                }
                let i = p.register_index();
                if seen[i] {
                    return Err(Error::InvalidWiring("a particle is assigned twice"));
                }
                seen[i] = true;
            }
        }
        Ok(Self { roles })
    }

    /// The wiring of the reference protocol:
    /// A₁ measures (ρ₂³, ρ₃¹) and keeps ρ₁¹; A₂ measures (ρ₁², ρ₂¹) and keeps
    /// ρ₃²; A₃ measures (ρ₁³, ρ₂²) and keeps ρ₃³.
    pub fn standard() -> Self {
        let p = Particle::new;
        Self::new([
            PartyRole {
                measured: (p(1, 2), p(2, 0)),
                kept: p(0, 0),
            },
            PartyRole {
                measured: (p(0, 1), p(1, 0)),
                kept: p(2, 1),
            },
            PartyRole {
                measured: (p(0, 2), p(1, 1)),
                kept: p(2, 2),
            },
        ])
        .expect("standard wiring is a partition")
    }

    pub fn roles(&self) -> &[PartyRole; 3] {
        &self.roles
    }

    /// Register order with the kept qubits (A₁, A₂, A₃) first, then the three
    /// measured pairs party by party.
    fn register_order(&self) -> [usize; 9] {
        let mut order = [0; 9];
        for (party, role) in self.roles.iter().enumerate() {
            order[party] = role.kept.register_index();
            order[3 + 2 * party] = role.measured.0.register_index();
            order[4 + 2 * party] = role.measured.1.register_index();
        }
        order
    }
}

impl Default for SmpWiring {
    fn default() -> Self {
        Self::standard()
    }
}

fn require_three_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.qubits() == 3 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            op: "protocol input",
            left: (rho.dim(), rho.dim()),
            right: (8, 8),
        })
    }
}

/// `|b₁⟩ ⊗ |b₂⟩ ⊗ |b₃⟩` over the six measured qubits.
fn bell_product(outcomes: [BellOutcome; 3]) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(1.0, 0.0)];
    for o in outcomes {
        let b = o.vector();
        v = v.iter().flat_map(|&a| b.iter().map(move |&x| a * x)).collect();
    }
    v
}

/// Unnormalized post-measurement state on the kept qubits: its trace is the
/// joint probability of `outcomes`.
fn post_selected(product: &KroneckerProduct<'_>, order: &[usize; 9], outcomes: [BellOutcome; 3]) -> Result<ComplexMatrix> {
    project_trailing(product, order, &bell_product(outcomes))
}

/// Runs the preparation stage and post-selects on `outcomes` (one per party).
///
/// Returns the normalized state on (A₁, A₂, A₃)'s kept qubits and the joint
/// probability of the outcomes. A diagonal phase `diag(1, e^{-iχ})` on A₁'s
/// qubit makes `⟨000|ρ|111⟩` real and nonnegative.
pub fn smp_prepare(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    rho3: &DensityMatrix,
    outcomes: [BellOutcome; 3],
    wiring: &SmpWiring,
) -> Result<(DensityMatrix, f64)> {
    for rho in [rho1, rho2, rho3] {
        require_three_qubits(rho)?;
    }
    let product = KroneckerProduct::new(vec![rho1.matrix(), rho2.matrix(), rho3.matrix()])?;
    let reduced = post_selected(&product, &wiring.register_order(), outcomes)?;
    let probability = reduced.trace().re;
    if !(probability >= TOLERANCES.null_outcome) {
        return Err(Error::NullOutcome { probability });
    }
    let normalized = reduced.scale_real(1.0 / probability);

    let coherence = normalized[(0, 7)];
    let chi = if coherence.norm() > 0.0 { -coherence.arg() } else { 0.0 };
    let correction = ComplexMatrix::from_fn(8, 8, |r, c| match (r == c, r >= 4) {
        (true, true) => phase(-chi),
        (true, false) => Complex64::new(1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let corrected = correction.matmul(&normalized)?.matmul(&correction.adjoint())?;
    let mut state = DensityMatrix::new(corrected)?;
    // force the corrected coherence onto the real axis exactly
    if coherence.norm() > 0.0 {
        let mut m = state.into_matrix();
        let g = m[(0, 7)].norm();
        m[(0, 7)] = Complex64::new(g, 0.0);
        m[(7, 0)] = Complex64::new(g, 0.0);
        state = DensityMatrix::new(m)?;
    }
    Ok((state, probability))
}

/// Joint probabilities of all 64 outcome triples.
pub fn smp_outcome_distribution(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    rho3: &DensityMatrix,
    wiring: &SmpWiring,
) -> Result<BTreeMap<[BellOutcome; 3], f64>> {
    for rho in [rho1, rho2, rho3] {
        require_three_qubits(rho)?;
    }
    let product = KroneckerProduct::new(vec![rho1.matrix(), rho2.matrix(), rho3.matrix()])?;
    let order = wiring.register_order();
    let mut out = BTreeMap::new();
    for a in BellOutcome::ALL {
        for b in BellOutcome::ALL {
            for c in BellOutcome::ALL {
                let p = post_selected(&product, &order, [a, b, c])?.trace().re;
                out.insert([a, b, c], p);
            }
        }
    }
    Ok(out)
}

/// Strengths `ε₁, ε₂, ε₃ ∈ [0, 1]` of the diagonal filters `diag(εⱼ, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    pub eps: [f64; 3],
}

impl FilterParams {
    pub fn new(eps1: f64, eps2: f64, eps3: f64) -> Result<Self> {
        check_range("eps1", eps1, 0.0, 1.0)?;
        check_range("eps2", eps2, 0.0, 1.0)?;
        check_range("eps3", eps3, 0.0, 1.0)?;
        Ok(Self { eps: [eps1, eps2, eps3] })
    }

    pub const fn identity() -> Self {
        Self { eps: [1.0; 3] }
    }

    /// `F₁ ⊗ F₂ ⊗ F₃` (diagonal, 8x8).
    pub fn operator(&self) -> ComplexMatrix {
        let diag: Vec<f64> = (0..8usize)
            .map(|i| (0..3).filter(|q| (i >> (2 - q)) & 1 == 0).map(|q| self.eps[q]).product())
            .collect();
        ComplexMatrix::from_real_diag(&diag)
    }
}

/// Applies the local filters and renormalizes; returns the success probability.
pub fn apply_filters(rho: &DensityMatrix, f: &FilterParams) -> Result<(DensityMatrix, f64)> {
    require_three_qubits(rho)?;
    conjugate(rho, &f.operator())
}
