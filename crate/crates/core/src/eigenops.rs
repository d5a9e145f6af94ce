//! Spectral decomposition of a system Hamiltonian and the split of a coupling
//! operator into components of definite transition frequency,
//! `A(ω) = Σ_{ε′−ε=ω} Π(ε) A Π(ε′)`.
//!
//! With this sign convention `A(ω)` with `ω > 0` lowers the energy by `ω`, so
//! `[H, A(ω)] = −ω A(ω)` and `A(ω)† = A(−ω)`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::ops::{tensor_product, Operator};
#[cfg(test)]
use crate::ops::HilbertSpace;

/// Hermiticity tolerance on the Hamiltonian handed to [`decompose`].
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigenoperator blocks with Frobenius norm below this are dropped.
pub const BLOCK_DROP_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projectors: Vec<Operator>,
    pub degeneracy_tol: f64,
}

#[derive(Debug, Clone)]
pub struct EigenOperator {
    pub frequency: f64,
    pub op: Operator,
    pub source_index: usize,
}

/// Relative degeneracy tolerance used when none is given: `1e-8 · max|ε|`
/// (absolute `1e-8` for a zero Hamiltonian).
pub fn default_degeneracy_tol(h: &Operator) -> f64 {
    let scale = linalg::eigh(h.matrix()).0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-8 * if scale > 0.0 { scale } else { 1.0 }
}

/// Groups sorted values into clusters whose consecutive gaps are `<= tol`.
fn cluster(sorted: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if v - sorted[*g.last().unwrap()] <= tol => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups
}

pub fn decompose(h: &Operator, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    let dev = linalg::hermitian_deviation(h.matrix());
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let (values, vectors) = linalg::eigh(h.matrix());
    let n = values.len();
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    for group in cluster(&values, degeneracy_tol) {
        let mean = group.iter().map(|&i| values[i]).sum::<f64>() / group.len() as f64;
        let mut p = CMat::zeros(n, n);
        for &i in &group {
            let v = vectors.column(i);
            p += v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(Operator::new(h.space().clone(), p, format!("Π({mean:.6})"))?);
    }
    Ok(SpectralDecomposition { eigenvalues, projectors, degeneracy_tol })
}

/// Frequency components of `a` against `decomp`, sorted by frequency. Blocks
/// whose transition frequencies agree within the degeneracy tolerance are
/// summed into one component; zero blocks are dropped.
pub fn eigenoperators(a: &Operator, decomp: &SpectralDecomposition, source_index: usize) -> Vec<EigenOperator> {
    let k = decomp.eigenvalues.len();
    let mut blocks: Vec<(f64, CMat)> = Vec::with_capacity(k * k);
    for (i, pi) in decomp.projectors.iter().enumerate() {
        let left = pi.matrix() * a.matrix();
        for (j, pj) in decomp.projectors.iter().enumerate() {
            let block = &left * pj.matrix();
            if linalg::fro(&block) < BLOCK_DROP_TOL {
                continue;
            }
            blocks.push((decomp.eigenvalues[j] - decomp.eigenvalues[i], block));
        }
    }
    blocks.sort_by(|x, y| x.0.total_cmp(&y.0));
    let freqs: Vec<f64> = blocks.iter().map(|b| b.0).collect();
    let mut out = Vec::new();
    for group in cluster(&freqs, decomp.degeneracy_tol) {
        let omega = group.iter().map(|&i| freqs[i]).sum::<f64>() / group.len() as f64;
        let mut sum = CMat::zeros(a.dim(), a.dim());
        for &i in &group {
            sum += &blocks[i].1;
        }
        if linalg::fro(&sum) < BLOCK_DROP_TOL {
            continue;
        }
        let op = Operator::new(a.space().clone(), sum, format!("{}({omega:.6})", a.label()))
            .expect("block shares the operator's space");
        out.push(EigenOperator { frequency: omega, op, source_index });
    }
    out
}

/// Finds the component at `omega` (within `tol`), if any.
pub fn component_at(ops: &[EigenOperator], omega: f64, tol: f64) -> Option<&EigenOperator> {
    ops.iter().find(|e| (e.frequency - omega).abs() <= tol)
}

/// Norm of `[H_S ⊗ 1 + 1 ⊗ H_B, Σ_k S_k ⊗ B_k]` for a finite toy bath. Vanishes
/// when every pair conserves the free energy.
pub fn verify_rwa_conservation(h_s: &Operator, h_b: &Operator, pairs: &[(Operator, Operator)]) -> Result<f64> {
    let ds = h_s.dim();
    let db = h_b.dim();
    for (s, b) in pairs {
        if s.space() != h_s.space() {
            return Err(Error::DimensionMismatch { expected: ds, got: s.dim() });
        }
        if b.space() != h_b.space() {
            return Err(Error::DimensionMismatch { expected: db, got: b.dim() });
        }
    }
    let free = tensor_product(h_s, &Operator::identity(h_b.space()))
        .add(&tensor_product(&Operator::identity(h_s.space()), h_b))?;
    let mut h_int = CMat::zeros(ds * db, ds * db);
    for (s, b) in pairs {
        h_int += tensor_product(s, b).matrix();
    }
    Ok(linalg::fro(&linalg::commutator(free.matrix(), &h_int)))
}
