//! Dichotomic spin observables, correlator tables and the Bell basis.

use core::f64::consts::{FRAC_1_SQRT_2, TAU};
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // unused when dev-dependencies turn on num-traits/std
use num_traits::Float;

use crate::error::{Error, Result};
use crate::qlin::{tensor_all, ComplexMatrix, DensityMatrix};

const fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `I, σx, σy, σz` for index 0..4.
pub fn pauli(index: usize) -> ComplexMatrix {
    let data = match index {
        0 => [cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(1.0, 0.0)],
        1 => [cx(0.0, 0.0), cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)],
        2 => [cx(0.0, 0.0), cx(0.0, -1.0), cx(0.0, 1.0), cx(0.0, 0.0)],
        3 => [cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0), cx(-1.0, 0.0)],
        _ => panic!("pauli index {index} out of range"),
    };
    ComplexMatrix::new(2, 2, data.to_vec()).expect("2x2")
}

/// Unit vector `(sinθ cosφ, sinθ sinφ, cosθ)`.
#[inline]
pub fn bloch(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// `sinθcosφ·σx + sinθsinφ·σy + cosθ·σz`.
pub fn observable(theta: f64, phi: f64) -> ComplexMatrix {
    let [x, y, z] = bloch(theta, phi);
    ComplexMatrix::new(2, 2, alloc::vec![cx(z, 0.0), cx(x, -y), cx(x, y), cx(-z, 0.0)]).expect("2x2")
}

/// Twelve spherical angles fixing the six observables `x₀, x₁, y₀, y₁, z₀, z₁`.
///
/// Order: `θa₀, φa₀, θa₁, φa₁, αb₀, βb₀, αb₁, βb₁, ζc₀, ηc₀, ζc₁, ηc₁`.
/// Angles are canonicalized into `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    angles: [f64; 12],
}

impl MeasurementSetting {
    pub fn new(angles: [f64; 12]) -> Result<Self> {
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("measurement angles"));
        }
        Ok(Self {
            angles: angles.map(|a| {
                let r = num_traits::Euclid::rem_euclid(&a, &TAU);
                // rem_euclid can round up to exactly 2π for tiny negative inputs
                if r >= TAU {
                    0.0
                } else {
                    r
                }
            }),
        })
    }

    /// Same observable (polar, azimuth) for every party and input.
    pub fn uniform(theta: f64, phi: f64) -> Result<Self> {
        Self::new([theta, phi].repeat(6).try_into().expect("12 angles"))
    }

    pub fn angles(&self) -> &[f64; 12] {
        &self.angles
    }

    /// `(polar, azimuth)` for `party` ∈ 0..3 (A, B, C) and `input` ∈ 0..2.
    pub fn party_angles(&self, party: usize, input: usize) -> (f64, f64) {
        let i = 4 * party + 2 * input;
        (self.angles[i], self.angles[i + 1])
    }

    pub fn direction(&self, party: usize, input: usize) -> [f64; 3] {
        let (t, p) = self.party_angles(party, input);
        bloch(t, p)
    }
}

/// A correlator monomial: for each party, the input it measures or `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    slots: [Option<u8>; 3],
}

impl Monomial {
    pub const COUNT: usize = 26;

    /// `None` if every slot is empty or an input is not 0/1.
    pub const fn new(x: Option<u8>, y: Option<u8>, z: Option<u8>) -> Option<Self> {
        let slots = [x, y, z];
        let mut i = 0;
        let mut present = false;
        while i < 3 {
            if let Some(v) = slots[i] {
                if v > 1 {
                    return None;
                }
                present = true;
            }
            i += 1;
        }
        if present {
            Some(Self { slots })
        } else {
            None
        }
    }

    /// Full three-party monomial `⟨x_a y_b z_c⟩`.
    pub const fn xyz(a: u8, b: u8, c: u8) -> Self {
        match Self::new(Some(a), Some(b), Some(c)) {
            Some(m) => m,
            None => panic!("inputs must be 0 or 1"),
        }
    }

    pub fn slots(&self) -> [Option<u8>; 3] {
        self.slots
    }

    pub fn parties(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    /// Dense index in `0..26`.
    pub fn index(&self) -> usize {
        let code = |s: Option<u8>| s.map_or(0, |v| v as usize + 1);
        9 * code(self.slots[0]) + 3 * code(self.slots[1]) + code(self.slots[2]) - 1
    }

    pub fn from_index(index: usize) -> Option<Self> {
        if index >= Self::COUNT {
            return None;
        }
        let code = index + 1;
        let slot = |c: usize| (c > 0).then(|| (c - 1) as u8);
        Self::new(slot(code / 9), slot((code / 3) % 3), slot(code % 3))
    }

    pub fn all() -> impl Iterator<Item = Monomial> {
        (0..Self::COUNT).map(|i| Self::from_index(i).expect("index in range"))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, slot) in ['x', 'y', 'z'].iter().zip(self.slots) {
            if let Some(v) = slot {
                write!(f, "{name}{v}")?;
            }
        }
        Ok(())
    }
}

/// Values of all 26 correlator monomials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorTable {
    values: [f64; Monomial::COUNT],
}

impl CorrelatorTable {
    pub fn from_values(values: [f64; Monomial::COUNT]) -> Self {
        Self { values }
    }

    #[inline]
    pub fn get(&self, m: Monomial) -> f64 {
        self.values[m.index()]
    }

    pub fn values(&self) -> &[f64; Monomial::COUNT] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Monomial, f64)> + '_ {
        Monomial::all().map(move |m| (m, self.get(m)))
    }

    /// `α·self + β·other`, entrywise.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let mut values = [0.0; Monomial::COUNT];
        for (i, v) in values.iter_mut().enumerate() {
            *v = alpha * self.values[i] + beta * other.values[i];
        }
        Self { values }
    }
}

fn require_three_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.qubits() == 3 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            op: "three-qubit correlators",
            left: (rho.dim(), rho.dim()),
            right: (8, 8),
        })
    }
}

/// All 26 correlators `tr[ρ(O_A ⊗ O_B ⊗ O_C)]`, with the identity standing in
/// for absent parties.
pub fn correlators(rho: &DensityMatrix, m: &MeasurementSetting) -> Result<CorrelatorTable> {
    require_three_qubits(rho)?;
    let identity = ComplexMatrix::identity(2);
    let obs: [[ComplexMatrix; 2]; 3] = core::array::from_fn(|party| {
        core::array::from_fn(|input| {
            let (t, p) = m.party_angles(party, input);
            observable(t, p)
        })
    });
    let mut values = [0.0; Monomial::COUNT];
    for mono in Monomial::all() {
        let factors: [&ComplexMatrix; 3] = core::array::from_fn(|party| match mono.slots[party] {
            Some(input) => &obs[party][input as usize],
            None => &identity,
        });
        values[mono.index()] = rho.expectation(&tensor_all(&factors))?;
    }
    Ok(CorrelatorTable { values })
}

/// Pauli correlation tensor `T_ijk = tr[ρ(σᵢ ⊗ σⱼ ⊗ σₖ)]`, index 0 = identity.
///
/// Contracting with `(1, 0, 0, 0)` for absent parties and `(0, n̂)` for
/// measured ones reproduces [`correlators`] at a fraction of the cost, which is
/// what the optimizer uses.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    t: [[[f64; 4]; 4]; 4],
}

impl CorrelationTensor {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        require_three_qubits(rho)?;
        let p: [ComplexMatrix; 4] = core::array::from_fn(pauli);
        let mut t = [[[0.0; 4]; 4]; 4];
        for (i, ti) in t.iter_mut().enumerate() {
            for (j, tij) in ti.iter_mut().enumerate() {
                for (k, tijk) in tij.iter_mut().enumerate() {
                    *tijk = rho.expectation(&tensor_all(&[&p[i], &p[j], &p[k]]))?;
                }
            }
        }
        Ok(Self { t })
    }

    pub fn component(&self, i: usize, j: usize, k: usize) -> f64 {
        self.t[i][j][k]
    }

    /// Correlators from raw angles (no canonicalization needed).
    pub fn correlators_from_angles(&self, angles: &[f64; 12]) -> CorrelatorTable {
        // per party: [absent, input 0, input 1] as Pauli-basis coefficient vectors
        let vecs: [[[f64; 4]; 3]; 3] = core::array::from_fn(|party| {
            let dir = |input: usize| {
                let [x, y, z] = bloch(angles[4 * party + 2 * input], angles[4 * party + 2 * input + 1]);
                [0.0, x, y, z]
            };
            [[1.0, 0.0, 0.0, 0.0], dir(0), dir(1)]
        });
        let mut a_contracted = [[[0.0; 4]; 4]; 3];
        for (sa, m) in a_contracted.iter_mut().enumerate() {
            let u = &vecs[0][sa];
            for (i, &ui) in u.iter().enumerate() {
                if ui == 0.0 {
                    continue;
                }
                for (row, tj) in m.iter_mut().zip(&self.t[i]) {
                    for (x, &t) in row.iter_mut().zip(tj) {
                        *x += ui * t;
                    }
                }
            }
        }
        let mut values = [0.0; Monomial::COUNT];
        for (sa, m) in a_contracted.iter().enumerate() {
            for sb in 0..3 {
                let w = &vecs[1][sb];
                let mut v = [0.0; 4];
                for (j, &wj) in w.iter().enumerate() {
                    if wj == 0.0 {
                        continue;
                    }
                    for k in 0..4 {
                        v[k] += wj * m[j][k];
                    }
                }
                for sc in 0..3 {
                    if sa + sb + sc == 0 {
                        continue;
                    }
                    let c = &vecs[2][sc];
                    let value = v[0] * c[0] + v[1] * c[1] + v[2] * c[2] + v[3] * c[3];
                    values[9 * sa + 3 * sb + sc - 1] = value;
                }
            }
        }
        CorrelatorTable { values }
    }

    pub fn correlators(&self, m: &MeasurementSetting) -> CorrelatorTable {
        self.correlators_from_angles(m.angles())
    }
}

/// Outcome of a two-qubit Bell-basis measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::PhiPlus,
        BellOutcome::PhiMinus,
        BellOutcome::PsiPlus,
        BellOutcome::PsiMinus,
    ];

    /// Amplitudes on `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn vector(self) -> [Complex64; 4] {
        let s = FRAC_1_SQRT_2;
        let (a, b, c, d) = match self {
            BellOutcome::PhiPlus => (s, 0.0, 0.0, s),
            BellOutcome::PhiMinus => (s, 0.0, 0.0, -s),
            BellOutcome::PsiPlus => (0.0, s, s, 0.0),
            BellOutcome::PsiMinus => (0.0, s, -s, 0.0),
        };
        [cx(a, 0.0), cx(b, 0.0), cx(c, 0.0), cx(d, 0.0)]
    }

    pub fn name(self) -> &'static str {
        match self {
            BellOutcome::PhiPlus => "phi+",
            BellOutcome::PhiMinus => "phi-",
            BellOutcome::PsiPlus => "psi+",
            BellOutcome::PsiMinus => "psi-",
        }
    }
}

impl core::str::FromStr for BellOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BellOutcome::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or(Error::InvalidConfig("Bell outcome must be phi+, phi-, psi+ or psi-"))
    }
}

/// Rank-1 projector onto a Bell vector.
pub fn bell_projector(outcome: BellOutcome) -> ComplexMatrix {
    ComplexMatrix::outer(&outcome.vector())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ghz, make_rho1};
    use core::f64::consts::FRAC_PI_2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn observable_poles_and_equator() {
        assert!(observable(0.0, 1.234).max_abs_diff(&pauli(3)).unwrap() < 1e-15);
        assert!(observable(FRAC_PI_2, 0.0).max_abs_diff(&pauli(1)).unwrap() < 1e-15);
        assert!(observable(FRAC_PI_2, FRAC_PI_2).max_abs_diff(&pauli(2)).unwrap() < 1e-15);
    }

    #[test]
    fn observable_squares_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let o = observable(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU);
            let sq = o.matmul(&o).unwrap();
            assert!(sq.max_abs_diff(&ComplexMatrix::identity(2)).unwrap() < 1e-12);
            assert!(o.trace().norm() < 1e-15);
            assert!(o.hermiticity_defect() < 1e-15);
        }
    }

    #[test]
    fn ghz_with_sigma_z() {
        let t = correlators(&ghz(), &MeasurementSetting::uniform(0.0, 0.0).unwrap()).unwrap();
        for (m, v) in t.iter() {
            let expect = if m.parties() == 2 { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-15, "{m}: {v}");
        }
    }

    #[test]
    fn product_eigenstate_gives_all_ones() {
        let rho = DensityMatrix::basis_state(3, 0).unwrap();
        let t = correlators(&rho, &MeasurementSetting::uniform(0.0, 0.0).unwrap()).unwrap();
        assert!(t.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn tensor_route_matches_dense_trace() {
        let rho = make_rho1(0.1, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tensor = CorrelationTensor::new(&rho).unwrap();
        for _ in 0..20 {
            let angles: [f64; 12] = core::array::from_fn(|_| rng.random::<f64>() * TAU);
            let setting = MeasurementSetting::new(angles).unwrap();
            let dense = correlators(&rho, &setting).unwrap();
            let fast = tensor.correlators(&setting);
            for (a, b) in dense.values().iter().zip(fast.values()) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn monomial_index_roundtrip() {
        let all: alloc::vec::Vec<Monomial> = Monomial::all().collect();
        assert_eq!(all.len(), 26);
        for (i, m) in all.iter().enumerate() {
            assert_eq!(m.index(), i);
        }
        assert_eq!(Monomial::new(None, None, None), None);
        assert_eq!(Monomial::new(Some(2), None, None), None);
        assert_eq!(alloc::format!("{}", Monomial::xyz(0, 1, 0)), "x0y1z0");
        assert_eq!(alloc::format!("{}", Monomial::new(None, Some(1), None).unwrap()), "y1");
    }

    #[test]
    fn angles_are_canonicalized() {
        let s = MeasurementSetting::new([-0.5, 7.0, TAU, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1e-300]).unwrap();
        let a = s.angles();
        assert!((a[0] - (TAU - 0.5)).abs() < 1e-15);
        assert!((a[1] - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(a[2], 0.0);
        assert!(a.iter().all(|&x| (0.0..TAU).contains(&x)));
        assert!(MeasurementSetting::new([f64::INFINITY; 12]).is_err());
    }

    #[test]
    fn bell_projectors_complete_and_orthogonal() {
        let mut sum = ComplexMatrix::zeros(4, 4);
        for (i, a) in BellOutcome::ALL.iter().enumerate() {
            let pa = bell_projector(*a);
            sum = sum.add(&pa).unwrap();
            for b in &BellOutcome::ALL[i + 1..] {
                let prod = pa.matmul(&bell_projector(*b)).unwrap();
                assert!(prod.max_abs_diff(&ComplexMatrix::zeros(4, 4)).unwrap() < 1e-15);
            }
        }
        assert!(sum.max_abs_diff(&ComplexMatrix::identity(4)).unwrap() < 1e-15);
    }

    #[test]
    fn psi_minus_overlap_with_01() {
        let p = bell_projector(BellOutcome::PsiMinus);
        let ket01 = [cx(0.0, 0.0), cx(1.0, 0.0), cx(0.0, 0.0), cx(0.0, 0.0)];
        let out = p.apply(&ket01).unwrap();
        let norm2: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm2 - 0.5).abs() < 1e-15);
    }
}
