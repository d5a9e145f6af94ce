//! Finite-dimensional operator algebra on composite Hilbert spaces.
//!
//! Factor order is fixed by [`HilbertSpace::factor_dims`]: the first factor is the
//! most significant index of the flattened basis. For the atom-cavity systems in
//! this crate the atom comes first (`|−⟩` = 0, `|+⟩` = 1) and the truncated Fock
//! space second.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec, ONE, ZERO};
use num_complex::Complex64 as C64;

/// Default tolerance for Hermiticity and positivity checks on states.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factor_dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        if let Some(d) = factor_dims.iter().find(|&&d| d == 0) {
            return Err(Error::InvalidSpace(format!("factor dimension {d} must be at least 1")));
        }
        Ok(Self { factor_dims })
    }

    /// Two-level atom tensored with a Fock space truncated at `n_max` photons.
    pub fn atom_cavity(n_max: usize) -> Self {
        Self { factor_dims: vec![2, n_max + 1] }
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn n_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn tensor(&self, other: &HilbertSpace) -> HilbertSpace {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        HilbertSpace { factor_dims: dims }
    }

    /// Flat basis index of a multi-index.
    pub fn index_of(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.factor_dims.len());
        digits
            .iter()
            .zip(&self.factor_dims)
            .fold(0, |acc, (&d, &n)| {
                assert!(d < n, "basis digit {d} out of range for factor of dimension {n}");
                acc * n + d
            })
    }

    /// Multi-index of a flat basis index.
    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.factor_dims.len()];
        for (slot, &n) in digits.iter_mut().zip(&self.factor_dims).rev() {
            *slot = index % n;
            index /= n;
        }
        digits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CMat,
    label: String,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CMat, label: impl Into<String>) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { space, matrix, label: label.into() })
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self { space: space.clone(), matrix: CMat::identity(n, n), label: "I".into() }
    }

    pub fn zero(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self { space: space.clone(), matrix: CMat::zeros(n, n), label: "0".into() }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dagger(&self) -> Self {
        Self { space: self.space.clone(), matrix: self.matrix.adjoint(), label: format!("{}†", self.label) }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::hermitian_deviation(&self.matrix) <= tol
    }

    /// Product `self · other` on the same space.
    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
            label: format!("{}{}", self.label, other.label),
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
            label: format!("{}+{}", self.label, other.label),
        })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Self { space: self.space.clone(), matrix: &self.matrix * factor, label: self.label.clone() }
    }

    pub fn apply(&self, ket: &KetState) -> Result<KetState> {
        if ket.space() != &self.space {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: ket.amplitudes().len() });
        }
        Ok(KetState { space: self.space.clone(), amplitudes: &self.matrix * ket.amplitudes() })
    }

    fn check_same_space(&self, other: &Operator) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(())
    }
}

/// Kronecker product; factor order is `a` then `b`.
pub fn tensor_product(a: &Operator, b: &Operator) -> Operator {
    Operator {
        space: a.space.tensor(&b.space),
        matrix: linalg::kron(&a.matrix, &b.matrix),
        label: format!("{}⊗{}", a.label, b.label),
    }
}

/// Embed a single-factor matrix into the full space at factor `slot`.
pub fn embed(space: &HilbertSpace, slot: usize, local: &CMat, label: &str) -> Result<Operator> {
    let dims = space.factor_dims();
    if slot >= dims.len() {
        return Err(Error::InvalidSpace(format!("factor index {slot} out of range")));
    }
    if local.nrows() != dims[slot] || local.ncols() != dims[slot] {
        return Err(Error::DimensionMismatch { expected: dims[slot], got: local.nrows() });
    }
    let mut m = CMat::identity(1, 1);
    for (k, &d) in dims.iter().enumerate() {
        let factor = if k == slot { local.clone() } else { CMat::identity(d, d) };
        m = linalg::kron(&m, &factor);
    }
    Operator::new(space.clone(), m, label)
}

#[derive(Debug, Clone)]
pub struct AtomOps {
    pub s_z: Operator,
    pub s_plus: Operator,
    pub s_minus: Operator,
}

#[derive(Debug, Clone)]
pub struct CavityOps {
    pub a: Operator,
    pub a_dag: Operator,
    pub n_op: Operator,
}

/// Atomic operators on factor `slot` (which must be two-dimensional).
pub fn make_atom_ops(space: &HilbertSpace, slot: usize) -> Result<AtomOps> {
    if space.factor_dims().get(slot) != Some(&2) {
        return Err(Error::InvalidSpace(format!("factor {slot} is not a two-level system")));
    }
    let s_z = CMat::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE]);
    // |+⟩⟨−| with |−⟩ = 0, |+⟩ = 1
    let s_plus = CMat::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]);
    let s_minus = s_plus.adjoint();
    Ok(AtomOps {
        s_z: embed(space, slot, &s_z, "Sz")?,
        s_plus: embed(space, slot, &s_plus, "S+")?,
        s_minus: embed(space, slot, &s_minus, "S-")?,
    })
}

/// Truncated bosonic operators on factor `slot`; `a|n⟩ = √n |n−1⟩`, and
/// `a†|n_max⟩ = 0`.
pub fn make_cavity_ops(space: &HilbertSpace, slot: usize) -> Result<CavityOps> {
    let dim = *space
        .factor_dims()
        .get(slot)
        .ok_or_else(|| Error::InvalidSpace(format!("factor index {slot} out of range")))?;
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = linalg::r((n as f64).sqrt());
    }
    let n_op = CMat::from_diagonal(&CVec::from_iterator(dim, (0..dim).map(|n| linalg::r(n as f64))));
    Ok(CavityOps {
        a_dag: embed(space, slot, &a.adjoint(), "a†")?,
        a: embed(space, slot, &a, "a")?,
        n_op: embed(space, slot, &n_op, "n")?,
    })
}

/// Cavity operators for a run that injects `n_exc` excitations.
pub fn make_cavity_ops_checked(space: &HilbertSpace, slot: usize, n_exc: usize) -> Result<CavityOps> {
    let dim = space.factor_dims().get(slot).copied().unwrap_or(0);
    if n_exc > 0 && dim < 2 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: "must be at least 1 when an excitation is injected".into(),
        });
    }
    make_cavity_ops(space, slot)
}

#[derive(Debug, Clone)]
pub struct KetState {
    space: HilbertSpace,
    amplitudes: CVec,
}

impl KetState {
    pub fn new(space: HilbertSpace, amplitudes: CVec) -> Result<Self> {
        if amplitudes.len() != space.total_dim() {
            return Err(Error::DimensionMismatch { expected: space.total_dim(), got: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if norm > 1.0 + 1e-12 {
            return Err(Error::InvalidState(format!("ket norm {norm} exceeds 1")));
        }
        Ok(Self { space, amplitudes })
    }

    /// Normalized superposition; the input need not be normalized.
    pub fn normalized(space: HilbertSpace, amplitudes: CVec) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::VanishingNorm(0.0));
        }
        Self::new(space, amplitudes / linalg::r(norm))
    }

    pub fn basis(space: &HilbertSpace, digits: &[usize]) -> Self {
        let mut v = CVec::zeros(space.total_dim());
        v[space.index_of(digits)] = ONE;
        Self { space: space.clone(), amplitudes: v }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space.clone(),
            matrix: linalg::outer(&self.amplitudes, &self.amplitudes),
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMat,
    tolerance: f64,
}

impl DensityMatrix {
    /// Normalized state: Hermitian, unit trace and positive within `tolerance`.
    pub fn new(space: HilbertSpace, matrix: CMat, tolerance: f64) -> Result<Self> {
        let state = Self::unchecked(space, matrix, tolerance)?;
        state.check_trace(1.0)?;
        state.check_shape_and_positivity()?;
        Ok(state)
    }

    /// Sub-normalized conditional block: trace in `[0, 1]` within tolerance.
    pub fn conditional(space: HilbertSpace, matrix: CMat, tolerance: f64) -> Result<Self> {
        let state = Self::unchecked(space, matrix, tolerance)?;
        let tr = state.trace();
        if tr < -tolerance || tr > 1.0 + tolerance {
            return Err(Error::InvalidState(format!("conditional trace {tr} outside [0, 1]")));
        }
        state.check_shape_and_positivity()?;
        Ok(state)
    }

    /// Wraps a matrix without the Hermiticity/trace/positivity checks. Use
    /// [`DensityMatrix::hygiene`] to inspect it later.
    pub fn unchecked(space: HilbertSpace, matrix: CMat, tolerance: f64) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: matrix.nrows() });
        }
        if tolerance < 0.0 || !tolerance.is_finite() {
            return Err(Error::InvalidState(format!("tolerance {tolerance} must be finite and non-negative")));
        }
        Ok(Self { space, matrix, tolerance })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.matrix * &self.matrix)).re
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        linalg::trace(&(op.matrix() * &self.matrix))
    }

    pub fn hygiene(&self) -> Hygiene {
        Hygiene {
            trace: self.trace(),
            hermitian_deviation: linalg::hermitian_deviation(&self.matrix),
            min_eigenvalue: linalg::min_eigenvalue(&self.matrix),
        }
    }

    fn check_trace(&self, expected: f64) -> Result<()> {
        let tr = linalg::trace(&self.matrix);
        if (tr - linalg::r(expected)).norm() > self.tolerance {
            return Err(Error::InvalidState(format!("trace {tr} differs from {expected}")));
        }
        Ok(())
    }

    fn check_shape_and_positivity(&self) -> Result<()> {
        let dev = linalg::hermitian_deviation(&self.matrix);
        if dev > self.tolerance {
            return Err(Error::NotHermitian(dev));
        }
        let min = linalg::min_eigenvalue(&self.matrix);
        if min < -self.tolerance {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hygiene {
    pub trace: f64,
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
}

/// Partial trace over every factor not listed in `keep`. Kept factors retain
/// their original relative order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    let dims = space.factor_dims();
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.is_empty() {
        return Err(Error::InvalidSpace("partial trace must keep at least one factor".into()));
    }
    if let Some(&k) = keep_sorted.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidSpace(format!("factor index {k} out of range")));
    }
    let kept_space = HilbertSpace::new(keep_sorted.iter().map(|&k| dims[k]).collect())?;
    let n_out = kept_space.total_dim();
    let mut out = CMat::zeros(n_out, n_out);
    let n = space.total_dim();
    for i in 0..n {
        let di = space.digits_of(i);
        for j in 0..n {
            let dj = space.digits_of(j);
            let traced_equal = (0..dims.len())
                .filter(|k| !keep_sorted.contains(k))
                .all(|k| di[k] == dj[k]);
            if !traced_equal {
                continue;
            }
            let ki: Vec<usize> = keep_sorted.iter().map(|&k| di[k]).collect();
            let kj: Vec<usize> = keep_sorted.iter().map(|&k| dj[k]).collect();
            out[(kept_space.index_of(&ki), kept_space.index_of(&kj))] += rho.matrix()[(i, j)];
        }
    }
    DensityMatrix::unchecked(kept_space, out, rho.tolerance())
}

/// Scalar trace, i.e. the partial trace over every factor.
pub fn full_trace(rho: &DensityMatrix) -> C64 {
    linalg::trace(rho.matrix())
}
