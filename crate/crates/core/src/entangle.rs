//! Genuine multipartite concurrence (C_GM) of three-qubit X states and pure
//! states.

use num_complex::Complex64;
#[allow(unused_imports)] // unused when dev-dependencies turn on num-traits/std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::states::{rho4_denominator, Family, StateFamilyParams, XStateParams};
use crate::tol::{DEGENERATE_DENOMINATOR, TOLERANCES};

/// `2·maxᵢ{0, |γᵢ| − wᵢ}` with `wᵢ = Σ_{j≠i} √(aⱼbⱼ)`.
pub fn cgm_xstate(x: &XStateParams) -> f64 {
    let roots: [f64; 4] = core::array::from_fn(|j| (x.a[j] * x.b[j]).max(0.0).sqrt());
    let total: f64 = roots.iter().sum();
    (0..4).map(|i| x.gamma[i].norm() - (total - roots[i])).fold(0.0, f64::max) * 2.0
}

/// `min_j √(2(1 − tr ρ_j²))` over the single-qubit marginals of `|ψ⟩`.
///
/// For a pure state the purity of a one-qubit marginal equals that of the
/// complementary two-qubit marginal, so 2x2 reductions cover all three cuts.
pub fn cgm_pure(psi: &[Complex64]) -> Result<f64> {
    if psi.len() != 8 {
        return Err(Error::DimensionMismatch {
            op: "cgm_pure",
            left: (psi.len(), 1),
            right: (8, 1),
        });
    }
    if psi.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("state vector"));
    }
    let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > TOLERANCES.norm {
        return Err(Error::NormViolation { norm });
    }
    let mut best = f64::INFINITY;
    for q in 0..3 {
        let bit = 1 << (2 - q);
        // 2x2 marginal [[r00, r01], [r01*, r11]]
        let (mut r00, mut r11, mut r01) = (0.0, 0.0, Complex64::new(0.0, 0.0));
        for i in (0..8).filter(|i| i & bit == 0) {
            let (u, v) = (psi[i], psi[i | bit]);
            r00 += u.norm_sqr();
            r11 += v.norm_sqr();
            r01 += u * v.conj();
        }
        let purity = r00 * r00 + r11 * r11 + 2.0 * r01.norm_sqr();
        best = best.min((2.0 * (1.0 - purity)).max(0.0).sqrt());
    }
    Ok(best)
}

/// Closed-form C_GM of each family.
pub fn cgm_family(family: Family, params: &StateFamilyParams) -> Result<f64> {
    params.validate()?;
    let p = params;
    Ok(match family {
        Family::Rho1 => p.p1 * (2.0 * p.theta1).sin(),
        Family::Rho2 => p.p2,
        Family::Rho3 => p.p3 * (2.0 * p.theta3).sin(),
        Family::Rho4 => {
            let n = rho4_denominator(p.theta1, p.theta3, p.p3);
            if n < DEGENERATE_DENOMINATOR {
                return Err(Error::DegenerateOutcome { denominator: n });
            }
            p.p3 * (2.0 * p.theta1).sin() * (2.0 * p.theta3).sin() / (2.0 * n)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{extract_x_params, ghz, make_rho4_closed_form};
    use alloc::vec;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn ghz_is_one() {
        assert!((cgm_xstate(&extract_x_params(&ghz()).unwrap()) - 1.0).abs() < 1e-14);
        let mut psi = vec![c(0.0); 8];
        psi[0] = c(FRAC_1_SQRT_2);
        psi[7] = c(FRAC_1_SQRT_2);
        assert!((cgm_pure(&psi).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn no_coherence_is_zero() {
        let x = XStateParams {
            a: [0.25, 0.0, 0.25, 0.0],
            b: [0.25, 0.25, 0.0, 0.0],
            gamma: [c(0.0); 4],
        };
        assert_eq!(cgm_xstate(&x), 0.0);
    }

    #[test]
    fn product_state_is_zero() {
        let mut psi = vec![c(0.0); 8];
        psi[0] = c(1.0);
        assert_eq!(cgm_pure(&psi).unwrap(), 0.0);
    }

    #[test]
    fn psi_f_matches_family() {
        for &t in &[0.05, 0.3, 0.7] {
            let mut psi = vec![c(0.0); 8];
            psi[0] = c(Float::cos(t));
            psi[7] = c(Float::sin(t));
            assert!((cgm_pure(&psi).unwrap() - Float::sin(2.0 * t)).abs() < 1e-12);
        }
    }

    #[test]
    fn unnormalized_rejected() {
        let psi = vec![c(1.0); 8];
        assert!(matches!(cgm_pure(&psi), Err(Error::NormViolation { .. })));
    }

    #[test]
    fn rho4_against_closed_form() {
        let p = StateFamilyParams::new(0.1, 0.5, 0.5, 0.3, 0.5).unwrap();
        let x = extract_x_params(&make_rho4_closed_form(0.1, 0.3, 0.5).unwrap()).unwrap();
        assert!((cgm_xstate(&x) - cgm_family(Family::Rho4, &p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn simple_families() {
        let p = StateFamilyParams::new(0.2, 0.0, 0.7, 0.2, 0.4).unwrap();
        assert_eq!(cgm_family(Family::Rho2, &p).unwrap(), 0.7);
        assert_eq!(cgm_family(Family::Rho1, &p).unwrap(), 0.0);
    }
}
