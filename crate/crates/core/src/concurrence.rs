//! Two-qubit concurrence.

use crate::linalg::{self, c, r, CMat, ZERO};

fn sigma_y_sigma_y() -> CMat {
    let sy = CMat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]);
    linalg::kron(&sy, &sy)
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)` of a two-qubit density
/// matrix, where `λ_i` are the decreasing square roots of the eigenvalues of
/// `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`. They are computed as the eigenvalues of the
/// Hermitian `√(√ρ ρ̃ √ρ)`. The input is normalized by its trace first.
pub fn wootters(rho: &CMat) -> f64 {
    assert_eq!(rho.shape(), (4, 4), "concurrence needs a two-qubit state");
    let tr = linalg::trace(rho).re;
    if tr <= 0.0 {
        return 0.0;
    }
    let rho = rho * r(1.0 / tr);
    let (vals, vecs) = linalg::eigh(&rho);
    let sqrt_diag = CMat::from_diagonal(&nalgebra::DVector::from_iterator(4, vals.iter().map(|v| r(v.max(0.0).sqrt()))));
    let sqrt_rho = &vecs * sqrt_diag * vecs.adjoint();
    let yy = sigma_y_sigma_y();
    let tilde = &yy * rho.conjugate() * &yy;
    let m = &sqrt_rho * tilde * &sqrt_rho;
    let (mu, _) = linalg::eigh(&m);
    let mut lambdas: Vec<f64> = mu.iter().map(|v| v.max(0.0).sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0)
}

/// Embeds a single-excitation block on span{|1,0⟩, |0,1⟩} (first qubit excited,
/// second qubit excited) into a 4×4 two-qubit matrix in the `|q₁ q₂⟩` basis.
pub fn embed_single_excitation(first_excited: f64, second_excited: f64, coherence: num_complex::Complex64) -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(2, 2)] = r(first_excited);
    m[(1, 1)] = r(second_excited);
    m[(2, 1)] = coherence;
    m[(1, 2)] = coherence.conj();
    m
}
