//! Dense complex linear algebra for small qubit registers.
//!
//! Qubit ordering is big-endian: qubit 0 is the leftmost tensor factor, so in
//! a basis index qubit `q` of an `n`-qubit register is bit `n - 1 - q`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)] // unused when dev-dependencies turn on num-traits/std
use num_traits::Float;
use num_traits::Zero;

use crate::error::{Error, Result, StateDefect};
use crate::tol::TOLERANCES;

/// Largest register this crate handles.
pub const MAX_QUBITS: usize = 10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::ShapeMismatch {
                rows,
                cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// `|ψ⟩⟨ψ|` for an (unnormalized) ket.
    pub fn outer(ket: &[Complex64]) -> Self {
        Self::from_fn(ket.len(), ket.len(), |r, c| ket[r] * ket[c].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(self.mismatch("matmul", other));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let other_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with("add", other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with("sub", other, |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(self.mismatch("trace_product", other));
        }
        let mut acc = ZERO;
        for r in 0..self.rows {
            for c in 0..self.cols {
                acc += self[(r, c)] * other[(c, r)];
            }
        }
        Ok(acc)
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "apply",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(self.mismatch("max_abs_diff", other));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Largest entrywise modulus of `M - M†`; `inf` for non-square input.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    ///
    /// `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`,
    /// whose spectrum is that of `H` with every eigenvalue doubled.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::InvalidState(StateDefect::NotSquare {
                rows: self.rows,
                cols: self.cols,
            }));
        }
        let n = self.rows;
        let herm = |r: usize, c: usize| (self[(r, c)] + self[(c, r)].conj()) * 0.5;
        let embedded = DMatrix::<f64>::from_fn(2 * n, 2 * n, |r, c| {
            let z = herm(r % n, c % n);
            match (r < n, c < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut values: Vec<f64> = SymmetricEigen::new(embedded).eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values.into_iter().step_by(2).collect())
    }

    fn zip_with(&self, op: &'static str, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(self.mismatch(op, other));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    fn mismatch(&self, op: &'static str, other: &Self) -> Error {
        Error::DimensionMismatch {
            op,
            left: self.shape(),
            right: other.shape(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    ComplexMatrix::from_fn(rows, cols, |r, c| a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)])
}

/// Kronecker product of a list of factors, leftmost first.
pub fn tensor_all(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    factors.iter().fold(ComplexMatrix::identity(1), |acc, f| tensor(&acc, f))
}

/// Read access to a square operator on a qubit register.
pub trait Operator {
    fn dim(&self) -> usize;
    fn entry(&self, row: usize, col: usize) -> Complex64;
}

impl Operator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    #[inline]
    fn entry(&self, row: usize, col: usize) -> Complex64 {
        self[(row, col)]
    }
}

/// Lazy Kronecker product of square factors; entries are computed on demand.
#[derive(Debug, Clone)]
pub struct KroneckerProduct<'a> {
    factors: Vec<&'a ComplexMatrix>,
    dim: usize,
}

impl<'a> KroneckerProduct<'a> {
    pub fn new(factors: Vec<&'a ComplexMatrix>) -> Result<Self> {
        let mut dim = 1;
        for f in &factors {
            if !f.is_square() {
                return Err(Error::InvalidState(StateDefect::NotSquare {
                    rows: f.rows,
                    cols: f.cols,
                }));
            }
            dim *= f.rows;
        }
        Ok(Self { factors, dim })
    }

    pub fn materialize(&self) -> ComplexMatrix {
        tensor_all(&self.factors)
    }
}

impl Operator for KroneckerProduct<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn entry(&self, mut row: usize, mut col: usize) -> Complex64 {
        let mut acc = ONE;
        for f in self.factors.iter().rev() {
            let d = f.rows;
            acc *= f[(row % d, col % d)];
            if acc.is_zero() {
                return ZERO;
            }
            row /= d;
            col /= d;
        }
        acc
    }
}

/// Number of qubits for a `2^n` dimension.
pub fn qubit_count(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        let n = dim.trailing_zeros() as usize;
        (1..=MAX_QUBITS).contains(&n).then_some(n)
    } else {
        None
    }
}

/// Maps a subsystem index onto the full register: bit `j` (big-endian within
/// the `positions.len()`-bit value) lands on qubit `positions[j]`.
#[inline]
fn scatter(value: usize, positions: &[usize], qubits: usize) -> usize {
    let width = positions.len();
    let mut full = 0;
    for (j, &q) in positions.iter().enumerate() {
        let bit = (value >> (width - 1 - j)) & 1;
        full |= bit << (qubits - 1 - q);
    }
    full
}

fn check_qubit_list(list: &[usize], qubits: usize) -> Result<()> {
    let mut seen = 0u32;
    for &q in list {
        if q >= qubits {
            return Err(Error::QubitOutOfRange { index: q, qubits });
        }
        if seen & (1 << q) != 0 {
            return Err(Error::DuplicateQubit(q));
        }
        seen |= 1 << q;
    }
    Ok(())
}

/// Reorders the qubits of an operator: qubit `i` of the result is qubit
/// `order[i]` of the input.
pub fn permute_qubits(op: &impl Operator, order: &[usize]) -> Result<ComplexMatrix> {
    let qubits = qubit_count(op.dim()).ok_or(Error::InvalidState(StateDefect::NotQubitRegister(op.dim())))?;
    if order.len() != qubits {
        return Err(Error::InvalidWiring("permutation must list every qubit once"));
    }
    check_qubit_list(order, qubits)?;
    let dim = op.dim();
    let map: Vec<usize> = (0..dim).map(|i| scatter(i, order, qubits)).collect();
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| op.entry(map[r], map[c])))
}

/// `Tr_M[(I ⊗ |v⟩⟨v|) O (I ⊗ |v⟩⟨v|)]` where the register is first reordered
/// by `order`, the leading `order.len() - m` qubits are kept and the trailing
/// `m` qubits (with `2^m = v.len()`) are projected onto `|v⟩` and traced out.
///
/// Zero components of `v` are skipped, so sparse projectors are cheap even on
/// large registers.
pub fn project_trailing(op: &impl Operator, order: &[usize], v: &[Complex64]) -> Result<ComplexMatrix> {
    let qubits = qubit_count(op.dim()).ok_or(Error::InvalidState(StateDefect::NotQubitRegister(op.dim())))?;
    if order.len() != qubits {
        return Err(Error::InvalidWiring("permutation must list every qubit once"));
    }
    check_qubit_list(order, qubits)?;
    let projected = qubit_count(v.len()).filter(|&m| m < qubits).ok_or(Error::DimensionMismatch {
        op: "project_trailing",
        left: (op.dim(), op.dim()),
        right: (v.len(), 1),
    })?;
    let (kept, traced) = order.split_at(qubits - projected);
    let kept_dim = 1usize << kept.len();
    let support: Vec<(usize, Complex64)> = v
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_zero())
        .map(|(m, &a)| (scatter(m, traced, qubits), a))
        .collect();
    let kept_map: Vec<usize> = (0..kept_dim).map(|k| scatter(k, kept, qubits)).collect();

    let mut out = ComplexMatrix::zeros(kept_dim, kept_dim);
    for (r, &kr) in kept_map.iter().enumerate() {
        for (c, &kc) in kept_map.iter().enumerate() {
            let mut acc = ZERO;
            for &(mr, vr) in &support {
                for &(mc, vc) in &support {
                    acc += vr.conj() * op.entry(kr | mr, kc | mc) * vc;
                }
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Positive semidefinite, unit-trace, Hermitian matrix on `qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (within [`TOLERANCES`]).
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let qubits = Self::check(&matrix)?;
        Ok(Self { qubits, matrix })
    }

    fn check(matrix: &ComplexMatrix) -> Result<usize> {
        if !matrix.is_square() {
            return Err(Error::InvalidState(StateDefect::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            }));
        }
        if matrix.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("density matrix"));
        }
        let qubits = qubit_count(matrix.rows).ok_or(Error::InvalidState(StateDefect::NotQubitRegister(matrix.rows)))?;
        let defect = matrix.hermiticity_defect();
        if defect > TOLERANCES.hermiticity {
            return Err(Error::InvalidState(StateDefect::NotHermitian(defect)));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOLERANCES.trace || tr.im.abs() > TOLERANCES.trace {
            return Err(Error::InvalidState(StateDefect::Trace(tr.re)));
        }
        let min = matrix.hermitian_eigenvalues()?[0];
        if min < TOLERANCES.psd_floor {
            return Err(Error::InvalidState(StateDefect::NotPositive(min)));
        }
        Ok(qubits)
    }

    /// `|ψ⟩⟨ψ|` for a unit-norm ket.
    pub fn from_pure(ket: &[Complex64]) -> Result<Self> {
        let norm = ket.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOLERANCES.norm {
            return Err(Error::NormViolation { norm });
        }
        Self::new(ComplexMatrix::outer(ket))
    }

    /// Computational basis projector `|index⟩⟨index|`.
    pub fn basis_state(qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        if qubits == 0 || qubits > MAX_QUBITS || index >= dim {
            return Err(Error::QubitOutOfRange { index, qubits });
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        Ok(Self { qubits, matrix: m })
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::InvalidState(StateDefect::NotQubitRegister(1 << qubits.min(31))));
        }
        let dim = 1usize << qubits;
        Ok(Self {
            qubits,
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    /// `Re tr(ρ O)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Result<f64> {
        Ok(self.matrix.trace_product(op)?.re)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.hermitian_eigenvalues().map(|v| v[0]).unwrap_or(f64::NAN)
    }

    /// `weight·self + (1 - weight)·other`.
    pub fn mix(&self, other: &Self, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::RangeViolation {
                name: "weight",
                value: weight,
                min: 0.0,
                max: 1.0,
            });
        }
        let m = self.matrix.scale_real(weight).add(&other.matrix.scale_real(1.0 - weight))?;
        Self::new(m)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Self::new(tensor(&self.matrix, &other.matrix))
    }
}

/// Reduced state on `keep`, in the listed order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.qubits;
    check_qubit_list(keep, n)?;
    if keep.is_empty() {
        return Err(Error::InvalidWiring("partial trace must keep at least one qubit"));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kept_dim = 1usize << keep.len();
    let traced_map: Vec<usize> = (0..1usize << traced.len()).map(|t| scatter(t, &traced, n)).collect();
    let kept_map: Vec<usize> = (0..kept_dim).map(|k| scatter(k, keep, n)).collect();
    let out = ComplexMatrix::from_fn(kept_dim, kept_dim, |r, c| {
        traced_map.iter().map(|&t| rho.matrix[(kept_map[r] | t, kept_map[c] | t)]).sum()
    });
    DensityMatrix::new(out)
}

/// `(KρK† / p, p)` with `p = tr(KρK†)`.
pub fn conjugate(rho: &DensityMatrix, k: &ComplexMatrix) -> Result<(DensityMatrix, f64)> {
    if !k.is_square() || k.rows != rho.dim() {
        return Err(Error::DimensionMismatch {
            op: "conjugate",
            left: k.shape(),
            right: rho.matrix.shape(),
        });
    }
    let unnormalized = k.matmul(&rho.matrix)?.matmul(&k.adjoint())?;
    let p = unnormalized.trace().re;
    if !(p >= TOLERANCES.null_outcome) {
        return Err(Error::NullOutcome { probability: p });
    }
    Ok((DensityMatrix::new(unnormalized.scale_real(1.0 / p))?, p))
}

/// `½ Σ |λᵢ(a - b)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let diff = a.matrix.sub(&b.matrix)?;
    Ok(0.5 * diff.hermitian_eigenvalues()?.iter().map(|l| l.abs()).sum::<f64>())
}

/// Unit-modulus phase `e^{iχ}`.
pub fn phase(chi: f64) -> Complex64 {
    Complex64::new(chi.cos(), chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0])
    }

    fn bell_phi_plus() -> DensityMatrix {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[c(s), c(0.0), c(0.0), c(s)]).unwrap()
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn zz_on_11_has_eigenvalue_plus_one() {
        let zz = tensor(&sigma_z(), &sigma_z());
        let out = zz.apply(&[c(0.0), c(0.0), c(0.0), c(1.0)]).unwrap();
        assert_eq!(out[3], c(1.0));
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let p0 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
        let p1 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
        assert_eq!(tensor(&p0, &p1), ComplexMatrix::from_real_diag(&[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn bell_marginals_are_maximally_mixed() {
        let rho = bell_phi_plus();
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        for q in 0..2 {
            let red = partial_trace(&rho, &[q]).unwrap();
            assert!(red.matrix().max_abs_diff(mixed.matrix()).unwrap() < 1e-15);
        }
    }

    #[test]
    fn tracing_nothing_is_identity() {
        let rho = bell_phi_plus();
        assert_eq!(partial_trace(&rho, &[0, 1]).unwrap(), rho);
    }

    #[test]
    fn partial_trace_of_product_state() {
        // |0⟩⊗|1⟩⊗|0⟩ = basis index 0b010
        let rho = DensityMatrix::basis_state(3, 0b010).unwrap();
        let red = partial_trace(&rho, &[0, 2]).unwrap();
        assert_eq!(red, DensityMatrix::basis_state(2, 0).unwrap());
    }

    #[test]
    fn partial_trace_respects_keep_order() {
        let rho = DensityMatrix::basis_state(3, 0b100).unwrap();
        assert_eq!(partial_trace(&rho, &[0, 1]).unwrap(), DensityMatrix::basis_state(2, 0b10).unwrap());
        assert_eq!(partial_trace(&rho, &[1, 0]).unwrap(), DensityMatrix::basis_state(2, 0b01).unwrap());
    }

    #[test]
    fn partial_trace_rejects_bad_indices() {
        let rho = bell_phi_plus();
        assert_eq!(partial_trace(&rho, &[2]), Err(Error::QubitOutOfRange { index: 2, qubits: 2 }));
        assert_eq!(partial_trace(&rho, &[1, 1]), Err(Error::DuplicateQubit(1)));
    }

    #[test]
    fn conjugate_identity_keeps_state() {
        let rho = bell_phi_plus();
        let (out, p) = conjugate(&rho, &ComplexMatrix::identity(4)).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()).unwrap() < 1e-15);
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conjugate_born_rule() {
        let rho = DensityMatrix::maximally_mixed(1).unwrap();
        let (out, p) = conjugate(&rho, &ComplexMatrix::from_real_diag(&[1.0, 0.0])).unwrap();
        assert_eq!(out, DensityMatrix::basis_state(1, 0).unwrap());
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn conjugate_orthogonal_projection_is_null() {
        let rho = DensityMatrix::basis_state(1, 0).unwrap();
        let err = conjugate(&rho, &ComplexMatrix::from_real_diag(&[0.0, 1.0])).unwrap_err();
        assert!(matches!(err, Error::NullOutcome { .. }));
    }

    #[test]
    fn density_matrix_validation() {
        let not_psd = ComplexMatrix::from_real_diag(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(not_psd),
            Err(Error::InvalidState(StateDefect::NotPositive(_)))
        ));
        let bad_trace = ComplexMatrix::from_real_diag(&[0.5, 0.4]);
        assert!(matches!(
            DensityMatrix::new(bad_trace),
            Err(Error::InvalidState(StateDefect::Trace(_)))
        ));
        let mut skew = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        skew[(0, 1)] = c(0.1);
        assert!(matches!(
            DensityMatrix::new(skew),
            Err(Error::InvalidState(StateDefect::NotHermitian(_)))
        ));
        let three = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!(matches!(
            DensityMatrix::new(three),
            Err(Error::InvalidState(StateDefect::NotQubitRegister(3)))
        ));
    }

    #[test]
    fn hermitian_eigenvalues_of_sigma_y() {
        let y = ComplexMatrix::new(
            2,
            2,
            alloc::vec![c(0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), c(0.0)],
        )
        .unwrap();
        let ev = y.hermitian_eigenvalues().unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permute_swaps_qubits() {
        let m = DensityMatrix::basis_state(3, 0b001).unwrap();
        let p = permute_qubits(m.matrix(), &[2, 0, 1]).unwrap();
        assert_eq!(p, DensityMatrix::basis_state(3, 0b100).unwrap().into_matrix());
    }

    #[test]
    fn lazy_kronecker_matches_dense() {
        let a = bell_phi_plus();
        let b = DensityMatrix::maximally_mixed(1).unwrap();
        let view = KroneckerProduct::new(alloc::vec![a.matrix(), b.matrix()]).unwrap();
        let dense = tensor(a.matrix(), b.matrix());
        for r in 0..8 {
            for col in 0..8 {
                assert_eq!(view.entry(r, col), dense[(r, col)]);
            }
        }
        assert_eq!(view.materialize(), dense);
    }

    #[test]
    fn project_trailing_matches_dense_route() {
        // Project qubit 0 of Φ⁺ onto |1⟩ after moving it to the back.
        let rho = bell_phi_plus();
        let out = project_trailing(rho.matrix(), &[1, 0], &[c(0.0), c(1.0)]).unwrap();
        let expect = ComplexMatrix::from_real_diag(&[0.0, 0.5]);
        assert!(out.max_abs_diff(&expect).unwrap() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        assert!(matches!(
            ComplexMatrix::new(2, 2, alloc::vec![c(1.0); 3]),
            Err(Error::ShapeMismatch { .. })
        ));
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(4);
        assert!(matches!(a.matmul(&b), Err(Error::DimensionMismatch { .. })));
    }
}
