#![allow(dead_code)]

use oqs_core::linalg::{c, r, CMat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let m = random_matrix(rng, n);
    (&m + m.adjoint()) * r(0.5)
}

/// Random full-rank density matrix `G G† / tr(G G†)`.
pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let g = random_matrix(rng, n);
    let m = &g * g.adjoint();
    let tr = oqs_core::linalg::trace(&m).re;
    m * r(1.0 / tr)
}

pub fn uniform(t_end: f64, n: usize) -> Vec<f64> {
    oqs_core::integrator::uniform_grid(t_end, n)
}
