//! Dissipative Jaynes-Cummings model: one two-level atom and one cavity mode
//! emitting into a common zero-temperature reservoir, optionally with a second,
//! independent reservoir for mirror losses.
//!
//! ```text
//! H_S = (ω₀/2) S_z + ω₀ a†a + ε a S₊ + ε* a† S₋
//! D(ρ) = g11 (S₋ρS₊ − ½{S₊S₋,ρ}) + (g22 + κ)(aρa† − ½{a†a,ρ})
//!      + g12 (aρS₊ − ½{S₊a,ρ}) + g12* (S₋ρa† − ½{a†S₋,ρ})
//! ```
//!
//! The dissipator uses the bare lowering operators `S₋` and `a` at frequency ω₀.
//! The total excitation number `S₊S₋ + a†a` is conserved by `H_S` and lowered by
//! one at every jump, so a state starting with `n` excitations splits into the
//! blocks of [`crate::trajectory`]. The top block lives on the two-dimensional
//! span of `|n−1,+⟩` and `|n,−⟩` and has the closed form computed by
//! [`closed_form_block`].

use crate::concurrence;
use crate::eigenops::{decompose, default_degeneracy_tol, eigenoperators, EigenOperator};
use crate::error::{Error, Result};
use crate::integrator;
use crate::linalg::{self, c, r, CMat, CVec, I, ONE};
use crate::master::{MasterEquation, SpectralCorrelationTensor, TemperatureMode, TensorEntry};
use crate::ops::{make_atom_ops, make_cavity_ops_checked, AtomOps, CavityOps, DensityMatrix, HilbertSpace, KetState, Operator};
use crate::trajectory::TrajectoryHierarchy;
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcParams {
    pub omega0: f64,
    pub eps: C64,
    pub g11: f64,
    pub g22: f64,
    pub g12: C64,
    pub k_mirror: f64,
    pub n_exc: usize,
    pub n_max: usize,
}

impl Default for JcParams {
    fn default() -> Self {
        Self {
            omega0: 1.0,
            eps: c(0.1, 0.0),
            g11: 0.01,
            g22: 0.01,
            g12: c(0.01, 0.0),
            k_mirror: 0.0,
            n_exc: 1,
            n_max: 3,
        }
    }
}

impl JcParams {
    pub fn validate(&self) -> Result<()> {
        fn bad(name: &'static str, reason: impl Into<String>) -> Error {
            Error::InvalidParameter { name, reason: reason.into() }
        }
        if !self.omega0.is_finite() {
            return Err(bad("omega0", "must be finite"));
        }
        if !(self.eps.re.is_finite() && self.eps.im.is_finite()) {
            return Err(bad("eps", "must be finite"));
        }
        for (name, v) in [("g11", self.g11), ("g22", self.g22), ("k_mirror", self.k_mirror)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(bad(name, format!("{v} must be finite and non-negative")));
            }
        }
        if !(self.g12.re.is_finite() && self.g12.im.is_finite()) {
            return Err(bad("g12", "must be finite"));
        }
        if self.n_max < self.n_exc + 2 {
            return Err(bad("n_max", format!("{} must be at least n_exc + 2 = {}", self.n_max, self.n_exc + 2)));
        }
        // positivity of the common-bath 2×2 tensor
        let slack = self.g11 * self.g22 - self.g12.norm_sqr();
        if slack < -1e-10 * (self.g11 * self.g22).max(1e-300) && slack < -1e-20 {
            return Err(Error::NotPositive { omega: self.omega0, eigenvalue: min_eig_2x2(self.g11, self.g22, self.g12) });
        }
        Ok(())
    }

    /// Total cavity rate, common bath plus mirror losses.
    pub fn cavity_rate(&self) -> f64 {
        self.g22 + self.k_mirror
    }

    /// γ(ω₀) over the channels (atom, cavity).
    pub fn gamma_matrix(&self) -> CMat {
        CMat::from_row_slice(2, 2, &[r(self.g11), self.g12, self.g12.conj(), r(self.cavity_rate())])
    }
}

fn min_eig_2x2(a: f64, d: f64, b: C64) -> f64 {
    let mean = 0.5 * (a + d);
    let half = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
    mean - half
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenBasis {
    /// Lowering operators of the uncoupled Hamiltonian, `S₋` and `a` at ω₀.
    #[default]
    Bare,
    /// Frequency components against the full coupled `H_S`, with the same γ at
    /// every positive transition frequency.
    Dressed,
}

#[derive(Debug, Clone, Default)]
pub struct JcOptions {
    pub basis: EigenBasis,
    /// Lamb-shift coefficients `S(ω₀)`; zero shift when absent.
    pub lamb: Option<CMat>,
}

#[derive(Debug, Clone)]
pub struct JcModel {
    pub params: JcParams,
    pub space: HilbertSpace,
    pub atom: AtomOps,
    pub cavity: CavityOps,
    pub master: MasterEquation,
    /// `S₊S₋ + a†a`.
    pub excitation: Operator,
}

pub fn build_jc(params: JcParams) -> Result<JcModel> {
    build_jc_with(params, JcOptions::default())
}

pub fn build_jc_with(params: JcParams, options: JcOptions) -> Result<JcModel> {
    params.validate()?;
    let space = HilbertSpace::atom_cavity(params.n_max);
    let atom = make_atom_ops(&space, 0)?;
    let cavity = make_cavity_ops_checked(&space, 1, params.n_exc)?;

    let bare = atom.s_z.scale(r(0.5 * params.omega0)).add(&cavity.n_op.scale(r(params.omega0)))?;
    let coupling = atom.s_plus.mul(&cavity.a)?.scale(params.eps).add(&cavity.a_dag.mul(&atom.s_minus)?.scale(params.eps.conj()))?;
    let h_s = bare.add(&coupling)?.with_label("H_S");

    let a1 = atom.s_plus.add(&atom.s_minus)?.with_label("A1");
    let a2 = cavity.a_dag.add(&cavity.a)?.with_label("A2");
    let reference = match options.basis {
        EigenBasis::Bare => &bare,
        EigenBasis::Dressed => &h_s,
    };
    let decomp = decompose(reference, default_degeneracy_tol(reference))?;
    let couplings: Vec<Vec<EigenOperator>> = vec![eigenoperators(&a1, &decomp, 0), eigenoperators(&a2, &decomp, 1)];

    let gamma = params.gamma_matrix();
    let entry = |omega: f64| TensorEntry { omega, gamma: gamma.clone(), lamb: options.lamb.clone() };
    let entries = match options.basis {
        EigenBasis::Bare => vec![entry(params.omega0)],
        EigenBasis::Dressed => {
            let mut freqs: Vec<f64> = couplings.iter().flatten().map(|e| e.frequency).filter(|&w| w > 0.0).collect();
            freqs.sort_by(f64::total_cmp);
            freqs.dedup_by(|a, b| (*a - *b).abs() <= 1e-8 * a.abs().max(1.0));
            freqs.into_iter().map(entry).collect()
        }
    };
    let tensor = SpectralCorrelationTensor::new(2, entries)?;
    let mut master = MasterEquation::new(h_s, couplings, tensor, TemperatureMode::Zero)?;
    if options.lamb.is_some() {
        master = master.with_lamb_shift()?;
    }
    let excitation = atom.s_plus.mul(&atom.s_minus)?.add(&cavity.n_op)?.with_label("N");
    Ok(JcModel { params, space, atom, cavity, master, excitation })
}

/// Initial condition inside the `n`-excitation doublet span{|n−1,+⟩, |n,−⟩}.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockInitial {
    /// `|n−1,+⟩`: atom excited.
    Upper,
    /// `|n,−⟩`: all excitations in the cavity.
    Lower,
    /// `p|n−1,+⟩⟨n−1,+| + (1−p)|n,−⟩⟨n,−|`.
    Mixture { upper_weight: f64 },
    /// Explicit 2×2 block in the (upper, lower) basis.
    Block(CMat),
}

impl BlockInitial {
    pub fn matrix(&self) -> Result<CMat> {
        let m = match self {
            BlockInitial::Upper => CMat::from_row_slice(2, 2, &[ONE, linalg::ZERO, linalg::ZERO, linalg::ZERO]),
            BlockInitial::Lower => CMat::from_row_slice(2, 2, &[linalg::ZERO, linalg::ZERO, linalg::ZERO, ONE]),
            BlockInitial::Mixture { upper_weight } => {
                if !(0.0..=1.0).contains(upper_weight) {
                    return Err(Error::InvalidParameter { name: "upper_weight", reason: format!("{upper_weight} not in [0, 1]") });
                }
                CMat::from_row_slice(2, 2, &[r(*upper_weight), linalg::ZERO, linalg::ZERO, r(1.0 - upper_weight)])
            }
            BlockInitial::Block(m) => {
                if m.shape() != (2, 2) {
                    return Err(Error::DimensionMismatch { expected: 2, got: m.nrows() });
                }
                m.clone()
            }
        };
        Ok(m)
    }

    /// Pure-state components with weights, for trajectory sampling.
    pub fn kets(&self) -> Result<Vec<(f64, CVec)>> {
        let m = self.matrix()?;
        let (vals, vecs) = linalg::eigh(&m);
        Ok(vals
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &v)| v > 1e-14)
            .map(|(k, &v)| (v, vecs.column(k).into_owned()))
            .collect())
    }
}

impl JcModel {
    pub fn dim(&self) -> usize {
        self.space.total_dim()
    }

    /// Flat index of `|photons, atom⟩` with `atom_up` selecting `|+⟩`.
    pub fn index(&self, photons: usize, atom_up: bool) -> usize {
        self.space.index_of(&[atom_up as usize, photons])
    }

    /// Indices of `|n−1,+⟩` and `|n,−⟩`.
    pub fn doublet(&self, n: usize) -> (usize, usize) {
        assert!(n >= 1, "doublet needs at least one excitation");
        (self.index(n - 1, true), self.index(n, false))
    }

    pub fn ground(&self) -> KetState {
        KetState::basis(&self.space, &[0, 0])
    }

    /// Lifts a 2×2 doublet block to the full space.
    pub fn lift_block(&self, n: usize, block: &CMat) -> CMat {
        let (u, l) = self.doublet(n);
        let mut m = CMat::zeros(self.dim(), self.dim());
        let idx = [u, l];
        for a in 0..2 {
            for b in 0..2 {
                m[(idx[a], idx[b])] = block[(a, b)];
            }
        }
        m
    }

    /// 2×2 restriction of a full matrix to the `n` doublet.
    pub fn restrict_block(&self, n: usize, m: &CMat) -> CMat {
        let (u, l) = self.doublet(n);
        let idx = [u, l];
        CMat::from_fn(2, 2, |a, b| m[(idx[a], idx[b])])
    }

    /// Initial density matrix with `params.n_exc` excitations.
    pub fn initial_state(&self, initial: &BlockInitial) -> Result<DensityMatrix> {
        let n = self.params.n_exc;
        let m = if n == 0 {
            self.ground().projector().into_matrix()
        } else {
            self.lift_block(n, &initial.matrix()?)
        };
        DensityMatrix::new(self.space.clone(), m, 1e-9)
    }

    pub fn initial_kets(&self, initial: &BlockInitial) -> Result<Vec<(f64, KetState)>> {
        let n = self.params.n_exc;
        if n == 0 {
            return Ok(vec![(1.0, self.ground())]);
        }
        let (u, l) = self.doublet(n);
        initial
            .kets()?
            .into_iter()
            .map(|(w, v)| {
                let mut amps = CVec::zeros(self.dim());
                amps[u] = v[0];
                amps[l] = v[1];
                Ok((w, KetState::normalized(self.space.clone(), amps)?))
            })
            .collect()
    }

    /// `⟨S₊S₋⟩`.
    pub fn excited_population(&self, rho: &CMat) -> f64 {
        let p = self.atom.s_plus.mul(&self.atom.s_minus).expect("same space");
        linalg::trace(&(p.matrix() * rho)).re
    }

    /// Projector on the sector with `n` total excitations.
    pub fn sector_projector(&self, n: usize) -> CMat {
        let mut p = CMat::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            let d = self.space.digits_of(i);
            if d[0] + d[1] == n {
                p[(i, i)] = ONE;
            }
        }
        p
    }

    /// Two-qubit restriction to atom ⊗ span{|n−1⟩, |n⟩}, as a 4×4 matrix in the
    /// (atom, photon − (n−1)) qubit basis. Not renormalized.
    pub fn qubit_pair(&self, n: usize, rho: &CMat) -> CMat {
        assert!(n >= 1);
        let idx = |q: usize| {
            let (atom, photon) = (q / 2, q % 2);
            self.space.index_of(&[atom, n - 1 + photon])
        };
        CMat::from_fn(4, 4, |a, b| rho[(idx(a), idx(b))])
    }

    /// Wootters concurrence of the atom-cavity pair restricted to
    /// span{|0⟩, |1⟩} of the mode, renormalized on that subspace.
    pub fn concurrence(&self, rho: &CMat) -> f64 {
        concurrence::wootters(&self.qubit_pair(1, rho))
    }

    /// The dark state `(|0,+⟩ − e^{−iφ}|1,−⟩)/√2` for the cross-rate phase φ.
    pub fn dark_state(&self) -> KetState {
        let phase = self.params.g12.arg();
        let mut amps = CVec::zeros(self.dim());
        amps[self.index(0, true)] = r(std::f64::consts::FRAC_1_SQRT_2);
        amps[self.index(1, false)] = -C64::from_polar(std::f64::consts::FRAC_1_SQRT_2, -phase);
        KetState::new(self.space.clone(), amps).expect("normalized")
    }
}

/// Closed-form evolution of the top doublet under the no-jump generator.
///
/// On span{|n−1,+⟩, |n,−⟩} the generator is `B = c·1 + K` with
///
/// ```text
/// Ω₀ = ω₀ − i g11/2,   Ω = ω₀ − i (g22 + κ)/2,
/// M  = ε − i g12/2,    P = ε* − i g12*/2,
/// c  = (n − ½) Ω − i g11/4,   Δ = (Ω − Ω₀)/2,
/// K  = [[−Δ, √n M], [√n P, Δ]],   K² = A_n² 1,   A_n² = Δ² + n M P,
/// ```
///
/// so `e^{−iBt} = e^{−ict} (cos(A_n t) − i sin(A_n t)/A_n · K)`, which is even in
/// `A_n`; the principal root (Re ≥ 0) is stored.
#[derive(Debug, Clone)]
pub struct BlockSolution {
    pub n: usize,
    pub omega0_c: C64,
    pub omega_c: C64,
    pub m: C64,
    pub p: C64,
    pub delta: C64,
    pub a_n: C64,
    pub center: C64,
    pub grid: Vec<f64>,
    pub rho11: Vec<f64>,
    pub rho12: Vec<C64>,
    pub rho21: Vec<C64>,
    pub rho22: Vec<f64>,
}

/// The block constants for `n` excitations (grid and coefficients left empty).
pub fn block_constants(p: &JcParams, n: usize) -> BlockSolution {
    let nf = n as f64;
    let omega0_c = c(p.omega0, -0.5 * p.g11);
    let omega_c = c(p.omega0, -0.5 * p.cavity_rate());
    let m = p.eps - I * p.g12 * 0.5;
    let pp = p.eps.conj() - I * p.g12.conj() * 0.5;
    let delta = (omega_c - omega0_c) * 0.5;
    let a_n = (delta * delta + m * pp * nf).sqrt();
    let center = omega_c * (nf - 0.5) - I * (0.25 * p.g11);
    BlockSolution {
        n,
        omega0_c,
        omega_c,
        m,
        p: pp,
        delta,
        a_n,
        center,
        grid: Vec::new(),
        rho11: Vec::new(),
        rho12: Vec::new(),
        rho21: Vec::new(),
        rho22: Vec::new(),
    }
}

/// `sin(z)/z`-weighted time factor `sin(A t)/A`, regular at `A → 0`.
fn sin_over(a: C64, t: f64) -> C64 {
    let z = a * t;
    if z.norm() < 1e-4 {
        let z2 = z * z;
        (ONE - z2 / 6.0 + z2 * z2 / 120.0) * t
    } else {
        z.sin() / a
    }
}

impl BlockSolution {
    /// Traceless part `K` of the 2×2 generator.
    pub fn k_matrix(&self) -> CMat {
        let s = (self.n as f64).sqrt();
        CMat::from_row_slice(2, 2, &[-self.delta, self.m * s, self.p * s, self.delta])
    }

    /// The 2×2 block of `B`.
    pub fn generator_block(&self) -> CMat {
        self.k_matrix() + CMat::identity(2, 2) * self.center
    }

    /// Analytic `e^{−iBt}` on the doublet using root `a` (either sign).
    pub fn propagator_with_root(&self, a: C64, t: f64) -> CMat {
        let phase = (-I * self.center * t).exp();
        let cos = (a * t).cos();
        (CMat::identity(2, 2) * cos - self.k_matrix() * (I * sin_over(a, t))) * phase
    }

    pub fn propagator(&self, t: f64) -> CMat {
        self.propagator_with_root(self.a_n, t)
    }

    pub fn block(&self, k: usize) -> CMat {
        CMat::from_row_slice(2, 2, &[r(self.rho11[k]), self.rho12[k], self.rho21[k], r(self.rho22[k])])
    }

    /// Atom-excited weight of the doublet, ρ_{11}; for one excitation this is the
    /// full `⟨S₊S₋⟩` since the ground sector has the atom in `|−⟩`.
    pub fn excited_population(&self, k: usize) -> f64 {
        self.rho11[k]
    }

    /// Trace `ρ_{11} + ρ_{22}`: probability that no jump has happened.
    pub fn survival(&self, k: usize) -> f64 {
        self.rho11[k] + self.rho22[k]
    }
}

pub fn closed_form_block(p: &JcParams, n: usize, initial: &BlockInitial, grid: &[f64]) -> Result<BlockSolution> {
    p.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", reason: "the doublet needs at least one excitation".into() });
    }
    integrator::validate_grid(grid)?;
    let rho0 = initial.matrix()?;
    let mut sol = block_constants(p, n);
    sol.grid = grid.to_vec();
    for &t in grid {
        let u = sol.propagator(t);
        let rho = (&u * &rho0) * u.adjoint();
        sol.rho11.push(rho[(0, 0)].re);
        sol.rho12.push(rho[(0, 1)]);
        sol.rho21.push(rho[(1, 0)]);
        sol.rho22.push(rho[(1, 1)].re);
    }
    Ok(sol)
}

/// Concurrence of a doublet block conditioned on no emission, i.e. of the
/// normalized state `block / tr(block)` embedded in the atom ⊗ {n−1, n} qubit
/// pair.
pub fn block_concurrence(block: &CMat) -> Result<f64> {
    let tr = (block[(0, 0)] + block[(1, 1)]).re;
    if tr <= 1e-12 {
        return Err(Error::VanishingNorm(tr));
    }
    // atom excited ↔ first qubit, extra photon ↔ second qubit
    let m = concurrence::embed_single_excitation(block[(0, 0)].re, block[(1, 1)].re, block[(0, 1)]);
    Ok(concurrence::wootters(&m))
}

pub fn conditional_concurrence(block: &BlockSolution, k: usize) -> Result<f64> {
    block_concurrence(&block.block(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Asymptotics {
    Decaying,
    DecoherenceFree,
}

/// Relative tolerance for the decoherence-free parameter conditions.
pub const DFS_TOL: f64 = 1e-9;

/// Whether the parameters admit a stationary dark state in the one-excitation
/// sector: no mirror loss, equal rates, a rank-one tensor and the cross-rate
/// phase aligned with the coupling phase.
pub fn classify(p: &JcParams) -> Asymptotics {
    let scale = p.g11.max(p.g22).max(f64::MIN_POSITIVE);
    let equal = (p.g11 - p.g22).abs() <= DFS_TOL * scale;
    let saturated = (p.g12.norm() - (p.g11 * p.g22).sqrt()).abs() <= DFS_TOL * scale;
    let phase_ok = if p.eps.norm() == 0.0 {
        true
    } else {
        let diff = (p.g12 * p.eps.conj()).arg();
        diff.abs() <= 1e-9
    };
    if p.k_mirror == 0.0 && p.g11 > 0.0 && equal && saturated && phase_ok {
        Asymptotics::DecoherenceFree
    } else {
        Asymptotics::Decaying
    }
}

/// Long-time state from a one-excitation initial block. In the decoherence-free
/// case the dark-state weight of the initial block survives:
/// `(1 − w)|0,−⟩⟨0,−| + w|ψ_D⟩⟨ψ_D|` with `w = ⟨ψ_D|ρ₀|ψ_D⟩` (½ for `|0,+⟩`).
pub fn asymptotic_state(p: &JcParams, initial: &BlockInitial) -> Result<(DensityMatrix, Asymptotics)> {
    if p.n_exc != 1 {
        return Err(Error::InvalidParameter { name: "n_exc", reason: "asymptotics are derived for one excitation".into() });
    }
    if p.g11 == 0.0 && p.cavity_rate() == 0.0 {
        return Err(Error::InvalidParameter { name: "g11", reason: "without dissipation there is no stationary state".into() });
    }
    let model = build_jc(*p)?;
    let kind = classify(p);
    let ground = model.ground().projector().into_matrix();
    let m = match kind {
        Asymptotics::Decaying => ground,
        Asymptotics::DecoherenceFree => {
            let rho0 = model.lift_block(1, &initial.matrix()?);
            let dark = model.dark_state();
            let w = (dark.amplitudes().adjoint() * &rho0 * dark.amplitudes())[(0, 0)].re;
            ground * r(1.0 - w) + dark.projector().into_matrix() * r(w)
        }
    };
    Ok((DensityMatrix::new(model.space.clone(), m, 1e-9)?, kind))
}

/// Top hierarchy block at grid index `k`, normalized: the state conditioned on
/// no emission so far.
pub fn no_jump_postselect(h: &TrajectoryHierarchy, k: usize) -> Result<DensityMatrix> {
    let top = h.block(h.n_max_exc(), k);
    let tr = linalg::trace(top).re;
    if tr <= 1e-12 {
        return Err(Error::VanishingNorm(tr));
    }
    DensityMatrix::new(h.space().clone(), top * r(1.0 / tr), 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn rejects_invalid_params() {
        let p = JcParams { g12: c(0.02, 0.0), ..JcParams::default() };
        assert!(matches!(p.validate(), Err(Error::NotPositive { .. })));
        let p = JcParams { g11: -0.1, ..JcParams::default() };
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "g11", .. })));
        let p = JcParams { n_max: 2, ..JcParams::default() };
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "n_max", .. })));
    }

    #[test]
    fn hamiltonian_layout() {
        let p = JcParams { eps: c(0.1, 0.05), ..JcParams::default() };
        let model = build_jc(p).unwrap();
        let h = model.master.hamiltonian().matrix();
        let (u, l) = model.doublet(2);
        assert_eq!(h[(u, u)], r(1.5));
        assert_eq!(h[(l, l)], r(1.5));
        assert!((h[(u, l)] - p.eps * 2f64.sqrt()).norm() < 1e-15);
        assert!((h[(l, u)] - p.eps.conj() * 2f64.sqrt()).norm() < 1e-15);
    }

    #[test]
    fn closed_form_initial_values() {
        let p = JcParams::default();
        let sol = closed_form_block(&p, 1, &BlockInitial::Upper, &[0.0, 1.0]).unwrap();
        assert_eq!(sol.rho11[0], 1.0);
        assert_eq!(sol.rho22[0], 0.0);
        assert_eq!(sol.rho12[0], linalg::ZERO);
    }

    #[test]
    fn branch_flip_invariance() {
        let p = JcParams { g11: 0.03, g22: 0.01, g12: c(0.01, 0.005), ..JcParams::default() };
        let sol = block_constants(&p, 2);
        for t in [0.0, 0.7, 13.0] {
            let a = sol.propagator_with_root(sol.a_n, t);
            let b = sol.propagator_with_root(-sol.a_n, t);
            assert!(max_abs_diff(&a, &b) < 1e-14);
        }
        assert!(sol.a_n.re >= 0.0);
    }

    #[test]
    fn a_n_identity_and_symmetric_case() {
        let p = JcParams { g11: 0.02, g22: 0.02, g12: c(0.01, 0.0), ..JcParams::default() };
        for n in 1..4 {
            let s = block_constants(&p, n);
            assert_eq!(s.delta, linalg::ZERO);
            assert!((s.a_n - (s.m * s.p * n as f64).sqrt()).norm() < 1e-15);
            assert!((s.a_n * s.a_n - (s.delta * s.delta + s.m * s.p * n as f64)).norm() < 1e-15);
        }
    }

    #[test]
    fn dark_state_identities() {
        let model = build_jc(JcParams::default()).unwrap();
        let psi = model.dark_state();
        let jump = model.atom.s_minus.add(&model.cavity.a).unwrap();
        assert_eq!(jump.apply(&psi).unwrap().norm(), 0.0);
        let h_psi = model.master.hamiltonian().matrix() * psi.amplitudes();
        let energy = (psi.amplitudes().adjoint() * &h_psi)[(0, 0)];
        assert!((energy.norm() - h_psi.norm()).abs() < 1e-12);
        assert!((energy.re - (0.5 - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&JcParams::default()), Asymptotics::DecoherenceFree);
        assert_eq!(classify(&JcParams { k_mirror: 0.05, ..JcParams::default() }), Asymptotics::Decaying);
        assert_eq!(classify(&JcParams { g12: linalg::ZERO, ..JcParams::default() }), Asymptotics::Decaying);
        assert_eq!(classify(&JcParams { g12: c(0.0, 0.01), ..JcParams::default() }), Asymptotics::Decaying);
        // negative coupling needs the opposite cross-rate sign
        let flipped = JcParams { eps: c(-0.1, 0.0), g12: c(-0.01, 0.0), ..JcParams::default() };
        assert_eq!(classify(&flipped), Asymptotics::DecoherenceFree);
    }

    #[test]
    fn asymptotic_mixture_for_atom_start() {
        let (rho, kind) = asymptotic_state(&JcParams::default(), &BlockInitial::Upper).unwrap();
        assert_eq!(kind, Asymptotics::DecoherenceFree);
        let model = build_jc(JcParams::default()).unwrap();
        assert!((model.excited_population(rho.matrix()) - 0.25).abs() < 1e-15);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn block_concurrence_extremes() {
        let s = 0.5;
        let anti = CMat::from_row_slice(2, 2, &[r(s), r(-s), r(-s), r(s)]);
        assert!((block_concurrence(&anti).unwrap() - 1.0).abs() < 1e-12);
        let product = CMat::from_row_slice(2, 2, &[r(0.4), linalg::ZERO, linalg::ZERO, linalg::ZERO]);
        assert_eq!(block_concurrence(&product).unwrap(), 0.0);
        assert!(matches!(block_concurrence(&CMat::zeros(2, 2)), Err(Error::VanishingNorm(_))));
    }
}
