//! Facet inequalities in correlator form, the two built-in facets, and the
//! closed-form Svetlichny maxima of the state families.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

#[allow(unused_imports)] // unused when dev-dependencies turn on num-traits/std
use num_traits::Float;

use crate::error::{Error, FacetDefect, Result};
use crate::measure::{CorrelatorTable, Monomial};
use crate::protocol::FilterParams;
use crate::states::{check_range, rho4_denominator, Family, StateFamilyParams, XStateParams};
use crate::tol::{DEGENERATE_DENOMINATOR, TOLERANCES, VIOLATION_MARGIN};

/// Highest facet id of the two-input two-output NS₂ polytope.
pub const MAX_FACET_ID: u32 = 185;
pub const SVETLICHNY_ID: u32 = 185;
pub const NS3_ID: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub monomial: Monomial,
    pub coef: f64,
}

impl Term {
    pub const fn new(monomial: Monomial, coef: f64) -> Self {
        Self { monomial, coef }
    }
}

/// `Σ coef·⟨monomial⟩ ≤ bound`. Id 0 marks a user-defined inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetInequality {
    id: u32,
    bound: f64,
    terms: Vec<Term>,
}

impl FacetInequality {
    pub fn new(id: u32, bound: f64, terms: Vec<Term>) -> Result<Self> {
        if id > MAX_FACET_ID {
            return Err(Error::InvalidFacet(FacetDefect::BadId(id)));
        }
        if terms.is_empty() {
            return Err(Error::InvalidFacet(FacetDefect::Empty));
        }
        if !bound.is_finite() || terms.iter().any(|t| !t.coef.is_finite()) {
            return Err(Error::InvalidFacet(FacetDefect::NonFinite));
        }
        let mut seen = [false; Monomial::COUNT];
        for t in &terms {
            let i = t.monomial.index();
            if seen[i] {
                return Err(Error::InvalidFacet(FacetDefect::DuplicateMonomial(format!("{}", t.monomial))));
            }
            seen[i] = true;
        }
        Ok(Self { id, bound, terms })
    }

    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Coefficient vector indexed by [`Monomial::index`].
    pub fn coefficients(&self) -> [f64; Monomial::COUNT] {
        let mut c = [0.0; Monomial::COUNT];
        for t in &self.terms {
            c[t.monomial.index()] = t.coef;
        }
        c
    }

    pub fn evaluate(&self, t: &CorrelatorTable) -> f64 {
        evaluate(self, t)
    }

    /// `value > bound + margin`.
    pub fn is_violated_by(&self, value: f64) -> bool {
        value > self.bound + VIOLATION_MARGIN
    }

    /// Same functional and bound as the Svetlichny facet, whatever the id.
    pub fn is_svetlichny(&self) -> bool {
        let s = svetlichny_facet();
        self.bound == s.bound && self.coefficients() == s.coefficients()
    }
}

/// Every table carries all 26 correlators, so no monomial can be missing.
pub fn evaluate(f: &FacetInequality, t: &CorrelatorTable) -> f64 {
    f.terms.iter().map(|term| term.coef * t.get(term.monomial)).sum()
}

fn term(x: Option<u8>, y: Option<u8>, z: Option<u8>, coef: f64) -> Term {
    Term::new(Monomial::new(x, y, z).expect("built-in monomial"), coef)
}

/// `S = ⟨x₀y₀z₀⟩ + ⟨x₁y₀z₀⟩ − ⟨x₀y₁z₀⟩ + ⟨x₁y₁z₀⟩ + ⟨x₀y₀z₁⟩ − ⟨x₁y₀z₁⟩ + ⟨x₀y₁z₁⟩ + ⟨x₁y₁z₁⟩ ≤ 4`.
pub fn svetlichny_facet() -> FacetInequality {
    let signs = [
        ((0, 0, 0), 1.0),
        ((1, 0, 0), 1.0),
        ((0, 1, 0), -1.0),
        ((1, 1, 0), 1.0),
        ((0, 0, 1), 1.0),
        ((1, 0, 1), -1.0),
        ((0, 1, 1), 1.0),
        ((1, 1, 1), 1.0),
    ];
    let terms = signs.iter().map(|&((a, b, c), s)| Term::new(Monomial::xyz(a, b, c), s)).collect();
    FacetInequality::new(SVETLICHNY_ID, 4.0, terms).expect("valid built-in")
}

/// The third facet of the NS₂ polytope (17 terms).
pub fn ns3_facet() -> FacetInequality {
    let (n, i0, i1) = (None, Some(0), Some(1));
    let terms = alloc::vec![
        term(i0, n, n, -1.0),
        term(i1, n, n, -1.0),
        term(i0, i0, n, -1.0),
        term(n, i1, n, -2.0),
        term(n, n, i0, -1.0),
        term(i1, i0, n, 1.0),
        term(i0, n, i0, -1.0),
        term(n, i0, i0, 1.0),
        term(i1, i0, i0, 1.0),
        term(i0, i1, i0, -1.0),
        term(i1, i1, i0, 1.0),
        term(n, n, i1, -1.0),
        term(i1, n, i1, 1.0),
        term(n, i0, i1, -1.0),
        term(i0, i0, i1, -1.0),
        term(i0, i1, i1, 1.0),
        term(i1, i1, i1, 1.0),
    ];
    FacetInequality::new(NS3_ID, 4.0, terms).expect("valid built-in")
}

/// Which argument of `max(sine, diagonal)` won.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    SineBranch,
    DiagonalBranch,
}

/// Closed-form maximum of the Svetlichny functional, with both branches kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormBound {
    pub value: f64,
    pub branch: Branch,
    pub sine: f64,
    pub diagonal: f64,
}

impl ClosedFormBound {
    /// Ties go to the sine branch.
    pub fn from_branches(sine: f64, diagonal: f64) -> Self {
        let (value, branch) = if sine >= diagonal {
            (sine, Branch::SineBranch)
        } else {
            (diagonal, Branch::DiagonalBranch)
        };
        Self {
            value,
            branch,
            sine,
            diagonal,
        }
    }

    /// Svetlichny violated (beyond the margin).
    pub fn violates(&self) -> bool {
        self.value > 4.0 + VIOLATION_MARGIN
    }
}

/// Maximum Svetlichny value of each family over all projective settings.
pub fn closed_form_b(family: Family, params: &StateFamilyParams) -> Result<ClosedFormBound> {
    params.validate()?;
    let StateFamilyParams {
        theta1,
        p1,
        p2,
        theta3,
        p3,
    } = *params;
    let four_root2 = 4.0 * SQRT_2;
    Ok(match family {
        Family::Rho1 => ClosedFormBound::from_branches(
            four_root2 * p1 * (2.0 * theta1).sin(),
            4.0 * (1.0 - p1 - p1 * (2.0 * theta1).cos()).abs(),
        ),
        Family::Rho2 => ClosedFormBound::from_branches(four_root2 * p2, 4.0 * (1.0 - p2)),
        Family::Rho3 => ClosedFormBound::from_branches(
            four_root2 * p3 * (2.0 * theta3).sin(),
            4.0 * (1.0 - p3 + p3 * (2.0 * theta3).cos()).abs(),
        ),
        Family::Rho4 => {
            let n = rho4_denominator(theta1, theta3, p3);
            if n < DEGENERATE_DENOMINATOR {
                return Err(Error::DegenerateOutcome { denominator: n });
            }
            let s3 = theta3.sin();
            ClosedFormBound::from_branches(
                2.0 * SQRT_2 * p3 * (2.0 * theta1).sin() * (2.0 * theta3).sin() / n,
                2.0 * (1.0 - 2.0 * p3 * s3 * s3 - (2.0 * theta1).cos()).abs() / n,
            )
        }
    })
}

/// Svetlichny maximum of an X state whose only coherence is `γ[0]`
/// (between |000⟩ and |111⟩): `max(8√2|γ₀|, 4|⟨σz σz σz⟩|)`.
///
/// Returns `None` when any other coherence exceeds the X-state tolerance.
pub fn svetlichny_single_coherence(x: &XStateParams) -> Option<ClosedFormBound> {
    if x.gamma[1..].iter().any(|g| g.norm() >= TOLERANCES.x_state) {
        return None;
    }
    Some(ClosedFormBound::from_branches(
        8.0 * SQRT_2 * x.gamma[0].norm(),
        4.0 * x.zzz().abs(),
    ))
}

/// Applies `diag(ε₁,1) ⊗ diag(ε₂,1) ⊗ diag(ε₃,1)` to an X state and renormalizes.
pub fn filter_x_state(x: &XStateParams, f: &FilterParams) -> Result<XStateParams> {
    // amplitude weight of basis index i: product of εq over the qubits q reading 0
    let weight = |i: usize| -> f64 { (0..3).filter(|q| (i >> (2 - q)) & 1 == 0).map(|q| f.eps[q]).product() };
    let mut out = *x;
    for j in 0..4 {
        let (wa, wb) = (weight(j), weight(7 - j));
        out.a[j] *= wa * wa;
        out.b[j] *= wb * wb;
        out.gamma[j] *= wa * wb;
    }
    let total: f64 = out.a.iter().chain(&out.b).sum();
    if !(total >= DEGENERATE_DENOMINATOR) {
        return Err(Error::DegenerateOutcome { denominator: total });
    }
    for v in out.a.iter_mut().chain(out.b.iter_mut()) {
        *v /= total;
    }
    for g in &mut out.gamma {
        *g /= total;
    }
    Ok(out)
}

/// Svetlichny maximum of the filtered ρ₁(θ₁, p₁).
pub fn filtered_svetlichny_bound(theta1: f64, p1: f64, f: &FilterParams) -> Result<ClosedFormBound> {
    check_range("theta1", theta1, 0.0, core::f64::consts::FRAC_PI_4)?;
    check_range("p1", p1, 0.0, 1.0)?;
    let [e1, e2, e3] = f.eps;
    let e = e1 * e2 * e3;
    let (c, s) = (theta1.cos(), theta1.sin());
    let den = (1.0 - p1) * e1 * e1 * e2 * e2 + p1 * e * e * c * c + p1 * s * s;
    if den < DEGENERATE_DENOMINATOR {
        return Err(Error::DegenerateOutcome { denominator: den });
    }
    let sine = 4.0 * SQRT_2 * p1 * e * (2.0 * theta1).sin() / den;
    // |000⟩ even, |001⟩ and |111⟩ odd
    let zzz = (p1 * e * e * c * c - (1.0 - p1) * e1 * e1 * e2 * e2 - p1 * s * s) / den;
    Ok(ClosedFormBound::from_branches(sine, 4.0 * zzz.abs()))
}

/// `sup` over `ε ∈ (0,1]³` of [`filtered_svetlichny_bound`], with a
/// maximizing (or limiting) filter.
///
/// The sine branch is largest at `ε₁ε₂ = ε₁ε₂ε₃ = e`, i.e. `ε₃ = 1`, where it
/// is `4√2 p sin2θ / (e(1 − p sin²θ) + p sin²θ / e)`; the diagonal branch never
/// exceeds 4.
pub fn filtered_svetlichny_sup(theta1: f64, p1: f64) -> Result<(f64, FilterParams)> {
    check_range("theta1", theta1, 0.0, core::f64::consts::FRAC_PI_4)?;
    check_range("p1", p1, 0.0, 1.0)?;
    let s2 = theta1.sin().powi(2);
    let a = 1.0 - p1 * s2;
    let e_star = if a > 0.0 { (p1 * s2 / a).sqrt().min(1.0) } else { 1.0 };
    let mut best = (4.0, FilterParams::identity());
    let mut consider = |f: FilterParams| -> Result<()> {
        match filtered_svetlichny_bound(theta1, p1, &f) {
            Ok(b) if b.value > best.0 => best = (b.value, f),
            Ok(_) | Err(Error::DegenerateOutcome { .. }) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    };
    consider(FilterParams::identity())?;
    if e_star > 0.0 {
        consider(FilterParams::new(e_star, 1.0, 1.0)?)?;
    }
    Ok(best)
}

/// `2 / (3 + cos2θ₁)`: filtered ρ₁ violates Svetlichny exactly above this `p₁`.
pub fn filtered_rho1_threshold(theta1: f64) -> f64 {
    2.0 / (3.0 + (2.0 * theta1).cos())
}
