//! Literal closed-form expressions kept for comparison with the exact block
//! propagator and the Wootters concurrence. Nothing in the library ships these
//! values; they feed the discrepancy reports.
//!
//! The reference expressions use rates that are half the tensor entries of
//! [`JcParams`], so `γ₁₁ = g11/2`, `γ₂₂ = (g22 + κ)/2` and `γ₂₁ = g12/2` below.

use crate::jc::{block_constants, JcParams};
use crate::linalg::{c, r, I};
use num_complex::Complex64 as C64;

/// Transcribed concurrence
/// `√((2(ρ₁₁ρ₂₂ + |ρ₁₂|²) + 4ρ₂₂|ρ₁₂|)/s) − √((2(ρ₁₁ρ₂₂ + |ρ₁₂|²) − 4ρ₂₂|ρ₁₂|)/s)`
/// with `s = ρ₁₁ + ρ₂₂`, reading the open modulus as `|ρ₁₂|`. Negative
/// radicands are clamped to zero.
pub fn transcribed_concurrence(r11: f64, r22: f64, r12: C64) -> f64 {
    let s = r11 + r22;
    let base = 2.0 * (r11 * r22 + r12.norm_sqr());
    let cross = 4.0 * r22 * r12.norm();
    ((base + cross) / s).max(0.0).sqrt() - ((base - cross) / s).max(0.0).sqrt()
}

/// Exact concurrence of a single-excitation block: `2|ρ₁₂| / (ρ₁₁ + ρ₂₂)`.
pub fn x_state_concurrence(r11: f64, r22: f64, r12: C64) -> f64 {
    (2.0 * r12.norm() / (r11 + r22)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranscribedBlock {
    pub rho11: C64,
    pub rho12: C64,
    pub rho22: C64,
}

/// Envelope `e^{−2γ₂₂(n−½)t − γ₁₁t}` in the halved rates above.
pub fn transcribed_envelope(p: &JcParams, n: usize, t: f64) -> f64 {
    let (g11, g22) = (0.5 * p.g11, 0.5 * p.cavity_rate());
    (-2.0 * g22 * (n as f64 - 0.5) * t - g11 * t).exp()
}

/// Reference top-block entries from `|n−1,+⟩`, transcribed symbol by symbol
/// with `Δ = (γ₁₁ − γ₂₂)/2`, `A_n = a_n + i b_n = √(Δ² + nMP)`.
pub fn transcribed_block(p: &JcParams, n: usize, t: f64) -> TranscribedBlock {
    let (g11, g22) = (0.5 * p.g11, 0.5 * p.cavity_rate());
    let g21 = 0.5 * p.g12;
    let m = p.eps - I * g21;
    let pp = p.eps.conj() - I * g21.conj();
    let delta = r(0.5 * (g11 - g22));
    let nf = n as f64;
    let a_n = (delta * delta + m * pp * nf).sqrt();
    let (a, b) = (a_n.re, a_n.im);
    let env = transcribed_envelope(p, n, t);
    let mod2 = a_n.norm_sqr();
    let (cos, cosh) = ((2.0 * a * t).cos(), (2.0 * b * t).cosh());
    let (sin, sinh) = ((2.0 * a * t).sin(), (2.0 * b * t).sinh());

    let rho11 = r(env / (2.0 * mod2))
        * (r((mod2 - delta.norm_sqr()) * cos) + r((mod2 + delta.norm_sqr()) * cosh) - I * 2.0 * b * delta * (sin + sinh));
    let rho12 = I * nf.sqrt() * m.conj() / (a_n.conj() * 2.0)
        * env
        * (c(sin, -sinh) + I * delta / a_n * (cos - cosh));
    let rho22 = r(nf * m.norm_sqr() / (4.0 * mod2) * env) * c(sin, -sinh);
    TranscribedBlock { rho11, rho12, rho22 }
}

/// Real closed forms of the top-block populations from `|n−1,+⟩`, written with
/// the exact constants `A_n = a + ib` and `Δ = iδ`, `δ = (g11 − g22 − κ)/4`:
///
/// ```text
/// ρ₁₁ = env/(2|A|²) {(|A|² − δ²) cos 2at + (|A|² + δ²) cosh 2bt − 2δ(a sin 2at + b sinh 2bt)}
/// ρ₂₂ = env · n|P|²/(2|A|²) (cosh 2bt − cos 2at)
/// ```
pub fn corrected_populations(p: &JcParams, n: usize, t: f64) -> (f64, f64) {
    let k = block_constants(p, n);
    let (a, b) = (k.a_n.re, k.a_n.im);
    let d = k.delta.im;
    let mod2 = k.a_n.norm_sqr();
    let env = transcribed_envelope(p, n, t);
    let rho11 = env / (2.0 * mod2)
        * ((mod2 - d * d) * (2.0 * a * t).cos() + (mod2 + d * d) * (2.0 * b * t).cosh()
            - 2.0 * d * (a * (2.0 * a * t).sin() + b * (2.0 * b * t).sinh()));
    let rho22 = env * n as f64 * k.p.norm_sqr() / (2.0 * mod2) * ((2.0 * b * t).cosh() - (2.0 * a * t).cos());
    (rho11, rho22)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jc::{closed_form_block, BlockInitial};

    #[test]
    fn transcribed_concurrence_departs_on_maximal_block() {
        assert!((transcribed_concurrence(0.5, 0.5, r(-0.5)) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(x_state_concurrence(0.5, 0.5, r(-0.5)), 1.0);
        assert_eq!(transcribed_concurrence(1.0, 0.0, r(0.0)), 0.0);
    }

    #[test]
    fn corrected_forms_match_propagator() {
        let p = JcParams { g11: 0.01, g22: 0.02, g12: c(0.01, 0.0), ..JcParams::default() };
        for n in 1..4 {
            let grid: Vec<f64> = (0..20).map(|k| 0.9 * k as f64).collect();
            let sol = closed_form_block(&p, n, &BlockInitial::Upper, &grid).unwrap();
            for (k, &t) in grid.iter().enumerate() {
                let (r11, r22) = corrected_populations(&p, n, t);
                assert!((r11 - sol.rho11[k]).abs() < 1e-12, "n={n} t={t}");
                assert!((r22 - sol.rho22[k]).abs() < 1e-12, "n={n} t={t}");
            }
        }
    }

    #[test]
    fn transcribed_populations_are_not_real_in_general() {
        let p = JcParams { g11: 0.01, g22: 0.02, g12: c(0.01, 0.0), ..JcParams::default() };
        let b = transcribed_block(&p, 1, 7.0);
        assert!(b.rho22.im.abs() > 1e-6);
    }
}
