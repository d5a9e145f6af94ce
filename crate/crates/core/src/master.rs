//! Markovian master equation with a full (non-diagonal) spectral correlation
//! tensor:
//!
//! ```text
//! dρ/dt = −i[H_S + H_LS, ρ] + Σ_ω Σ_{α,β} γ_{αβ}(ω) (A_β(ω) ρ A_α(ω)† − ½{A_α(ω)† A_β(ω), ρ})
//! H_LS  = Σ_ω Σ_{α,β} S_{αβ}(ω) A_α(ω)† A_β(ω)
//! ```

use crate::eigenops::EigenOperator;
use crate::error::{Error, Result};
use crate::integrator;
use crate::linalg::{self, r, CMat, CVec, I};
use crate::ops::{DensityMatrix, HilbertSpace, Operator};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

pub const TENSOR_HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues of γ(ω) at or below this are treated as zero when counting jumps.
pub const RANK_TOL: f64 = 1e-12;
/// Default fraction of the shortest dynamical time scale used as the RK4 step.
pub const DEFAULT_STEP_FRACTION: f64 = 1.0 / 400.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorEntry {
    pub omega: f64,
    pub gamma: CMat,
    pub lamb: Option<CMat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCorrelationTensor {
    channels: usize,
    entries: Vec<TensorEntry>,
}

impl SpectralCorrelationTensor {
    pub fn new(channels: usize, entries: Vec<TensorEntry>) -> Result<Self> {
        for e in &entries {
            for m in std::iter::once(&e.gamma).chain(e.lamb.iter()) {
                if m.nrows() != channels || m.ncols() != channels {
                    return Err(Error::DimensionMismatch { expected: channels, got: m.nrows() });
                }
                let dev = linalg::max_abs_diff(m, &m.adjoint());
                if dev > TENSOR_HERMITIAN_TOL {
                    return Err(Error::TensorNotHermitian { omega: e.omega, deviation: dev });
                }
            }
            let min = linalg::min_eigenvalue(&e.gamma);
            if min < -PSD_TOL {
                return Err(Error::NotPositive { omega: e.omega, eigenvalue: min });
            }
        }
        Ok(Self { channels, entries })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn entries(&self) -> &[TensorEntry] {
        &self.entries
    }

    /// Largest eigenvalue of γ(ω) over all frequencies.
    pub fn max_rate(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.gamma.nrows() > 0)
            .map(|e| *linalg::eigh(&e.gamma).0.last().unwrap())
            .fold(0.0, f64::max)
    }

    pub fn has_negative_frequencies(&self) -> bool {
        self.entries.iter().any(|e| e.omega < 0.0)
    }
}

/// Drops every negative-frequency entry (no absorption at zero temperature).
pub fn apply_t0_filter(tensor: &SpectralCorrelationTensor) -> SpectralCorrelationTensor {
    SpectralCorrelationTensor {
        channels: tensor.channels,
        entries: tensor.entries.iter().filter(|e| e.omega >= 0.0).cloned().collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetailedBalanceReport {
    pub passed: bool,
    pub max_violation: f64,
}

/// Checks `γ(ω) = e^{−βω} γ(−ω)` entrywise for every positive frequency, with a
/// missing partner read as zero. `beta = ∞` is the zero-temperature limit and
/// passes iff every negative-frequency rate vanishes.
pub fn validate_detailed_balance(tensor: &SpectralCorrelationTensor, beta: f64) -> DetailedBalanceReport {
    let tol = 1e-10 * tensor.entries.iter().map(|e| linalg::max_abs(&e.gamma)).fold(1.0, f64::max);
    if beta.is_infinite() && beta > 0.0 {
        let worst = tensor
            .entries
            .iter()
            .filter(|e| e.omega < 0.0)
            .map(|e| linalg::max_abs(&e.gamma))
            .fold(0.0, f64::max);
        return DetailedBalanceReport { passed: worst == 0.0, max_violation: worst };
    }
    let n = tensor.channels;
    let zero = CMat::zeros(n, n);
    let freq_tol = |w: f64| 1e-8 * w.abs().max(1.0);
    let mut worst = 0.0f64;
    let mut seen_negative = vec![false; tensor.entries.len()];
    for e in tensor.entries.iter().filter(|e| e.omega > 0.0) {
        let partner = tensor.entries.iter().position(|p| (p.omega + e.omega).abs() <= freq_tol(e.omega));
        let g_neg = match partner {
            Some(k) => {
                seen_negative[k] = true;
                &tensor.entries[k].gamma
            }
            None => &zero,
        };
        let expected = g_neg * r((-beta * e.omega).exp());
        worst = worst.max(linalg::max_abs_diff(&e.gamma, &expected));
    }
    // negative entries without a positive partner must then vanish too
    for (k, e) in tensor.entries.iter().enumerate() {
        if e.omega < 0.0 && !seen_negative[k] {
            worst = worst.max(linalg::max_abs(&e.gamma) * (beta * e.omega).exp());
        }
    }
    DetailedBalanceReport { passed: worst <= tol, max_violation: worst }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TemperatureMode {
    Zero,
    /// Finite inverse temperature; the tensor is checked against detailed
    /// balance on assembly. Evolution is identical to the zero mode otherwise.
    ValidatedFinite { beta: f64 },
}

/// One `(α, β)` term at one frequency: `γ (A_β ρ A_α† − ½{A_α†A_β, ρ})`.
#[derive(Debug, Clone)]
pub struct DissipatorTerm {
    pub omega: f64,
    pub alpha: usize,
    pub beta: usize,
    pub gamma: C64,
    pub jump: CMat,
    pub jump_adj: CMat,
    pub anti: CMat,
}

#[derive(Debug, Clone)]
pub struct Dissipator {
    terms: Vec<DissipatorTerm>,
}

impl Dissipator {
    pub fn terms(&self) -> &[DissipatorTerm] {
        &self.terms
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        for t in &self.terms {
            let sandwich = (&t.jump * rho) * &t.jump_adj;
            let anti = &t.anti * rho + rho * &t.anti;
            out += (sandwich - anti * r(0.5)) * t.gamma;
        }
        out
    }

    /// Jump part `Σ γ A_β ρ A_α†` alone.
    pub fn jump_part(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(rho.nrows(), rho.ncols());
        for t in &self.terms {
            out += ((&t.jump * rho) * &t.jump_adj) * t.gamma;
        }
        out
    }

    /// `Σ γ A_α† A_β`, the Hermitian decay operator.
    pub fn decay_operator(&self, dim: usize) -> CMat {
        let mut out = CMat::zeros(dim, dim);
        for t in &self.terms {
            out += &t.anti * t.gamma;
        }
        out
    }
}

fn freq_tol(omega: f64) -> f64 {
    1e-8 * omega.abs().max(1.0)
}

fn component(couplings: &[Vec<EigenOperator>], alpha: usize, omega: f64) -> Option<&CMat> {
    couplings[alpha]
        .iter()
        .find(|e| (e.frequency - omega).abs() <= freq_tol(omega))
        .map(|e| e.op.matrix())
}

fn assemble_dissipator(couplings: &[Vec<EigenOperator>], tensor: &SpectralCorrelationTensor) -> Dissipator {
    let mut terms = Vec::new();
    for e in &tensor.entries {
        for alpha in 0..tensor.channels {
            for beta in 0..tensor.channels {
                let gamma = e.gamma[(alpha, beta)];
                if gamma == linalg::ZERO {
                    continue;
                }
                let (Some(a_alpha), Some(a_beta)) = (component(couplings, alpha, e.omega), component(couplings, beta, e.omega)) else {
                    continue;
                };
                let jump_adj = a_alpha.adjoint();
                let anti = &jump_adj * a_beta;
                terms.push(DissipatorTerm { omega: e.omega, alpha, beta, gamma, jump: a_beta.clone(), jump_adj, anti });
            }
        }
    }
    Dissipator { terms }
}

/// `H_LS = Σ_ω Σ_{α,β} S_{αβ}(ω) A_α(ω)† A_β(ω)`.
pub fn build_lamb_shift(
    space: &HilbertSpace,
    couplings: &[Vec<EigenOperator>],
    tensor: &SpectralCorrelationTensor,
) -> Result<Operator> {
    if couplings.len() != tensor.channels {
        return Err(Error::ChannelMismatch { tensor: tensor.channels, couplings: couplings.len() });
    }
    let n = space.total_dim();
    let mut h = CMat::zeros(n, n);
    for e in &tensor.entries {
        let lamb = e.lamb.as_ref().ok_or(Error::MissingLambShift(e.omega))?;
        for alpha in 0..tensor.channels {
            for beta in 0..tensor.channels {
                let s = lamb[(alpha, beta)];
                if s == linalg::ZERO {
                    continue;
                }
                if let (Some(a), Some(b)) = (component(couplings, alpha, e.omega), component(couplings, beta, e.omega)) {
                    h += (a.adjoint() * b) * s;
                }
            }
        }
    }
    Operator::new(space.clone(), h, "H_LS")
}

#[derive(Debug, Clone)]
pub struct MasterEquation {
    hamiltonian: Operator,
    lamb_shift: Operator,
    couplings: Vec<Vec<EigenOperator>>,
    tensor: SpectralCorrelationTensor,
    temperature: TemperatureMode,
    dissipator: Dissipator,
}

impl MasterEquation {
    /// Assembles the generator with a zero Lamb shift.
    pub fn new(
        hamiltonian: Operator,
        couplings: Vec<Vec<EigenOperator>>,
        tensor: SpectralCorrelationTensor,
        temperature: TemperatureMode,
    ) -> Result<Self> {
        let dev = linalg::hermitian_deviation(hamiltonian.matrix());
        if dev > crate::eigenops::HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        if couplings.len() != tensor.channels {
            return Err(Error::ChannelMismatch { tensor: tensor.channels, couplings: couplings.len() });
        }
        for comp in couplings.iter().flatten() {
            if comp.op.space() != hamiltonian.space() {
                return Err(Error::DimensionMismatch { expected: hamiltonian.dim(), got: comp.op.dim() });
            }
        }
        if let TemperatureMode::ValidatedFinite { beta } = temperature {
            let report = validate_detailed_balance(&tensor, beta);
            if !report.passed {
                return Err(Error::DetailedBalance(report.max_violation));
            }
        }
        let dissipator = assemble_dissipator(&couplings, &tensor);
        let lamb_shift = Operator::zero(hamiltonian.space()).with_label("H_LS");
        Ok(Self { hamiltonian, lamb_shift, couplings, tensor, temperature, dissipator })
    }

    /// Replaces the Lamb shift with the one built from the tensor's `S(ω)`.
    pub fn with_lamb_shift(mut self) -> Result<Self> {
        self.lamb_shift = build_lamb_shift(self.hamiltonian.space(), &self.couplings, &self.tensor)?;
        Ok(self)
    }

    pub fn space(&self) -> &HilbertSpace {
        self.hamiltonian.space()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn lamb_shift(&self) -> &Operator {
        &self.lamb_shift
    }

    /// `H_S + H_LS`.
    pub fn total_hamiltonian(&self) -> CMat {
        self.hamiltonian.matrix() + self.lamb_shift.matrix()
    }

    /// Norm of `[H_S, H_LS]`; reported, not enforced.
    pub fn lamb_commutator_norm(&self) -> f64 {
        linalg::fro(&linalg::commutator(self.hamiltonian.matrix(), self.lamb_shift.matrix()))
    }

    pub fn couplings(&self) -> &[Vec<EigenOperator>] {
        &self.couplings
    }

    pub fn tensor(&self) -> &SpectralCorrelationTensor {
        &self.tensor
    }

    pub fn temperature(&self) -> TemperatureMode {
        self.temperature
    }

    pub fn dissipator(&self) -> &Dissipator {
        &self.dissipator
    }

    /// Right-hand side `−i[H_S + H_LS, ρ] + D(ρ)`.
    pub fn rhs(&self, rho: &CMat) -> CMat {
        let h = self.total_hamiltonian();
        linalg::commutator(&h, rho) * (-I) + self.dissipator.apply(rho)
    }

    /// RK4 step bound `fraction · min(2π/ω_scale, 1/γ_scale)` where `ω_scale` is
    /// the spread of the spectrum of `H_S + H_LS` and `γ_scale` the larger of the
    /// top tensor eigenvalue and the norm of the decay operator.
    pub fn step_bound(&self, fraction: f64) -> f64 {
        let h = self.total_hamiltonian();
        let (vals, _) = linalg::eigh(&h);
        let spread = vals.last().copied().unwrap_or(0.0) - vals.first().copied().unwrap_or(0.0);
        let decay = self.dissipator.decay_operator(self.dim());
        let decay_norm = linalg::eigh(&decay).0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let rate = self.tensor.max_rate().max(decay_norm);
        let mut bound = f64::INFINITY;
        if spread > 0.0 {
            bound = bound.min(2.0 * PI / spread);
        }
        if rate > 0.0 {
            bound = bound.min(1.0 / rate);
        }
        fraction * bound
    }
}

/// The dissipator as a superoperator closure.
pub fn build_dissipator(me: &MasterEquation) -> &Dissipator {
    me.dissipator()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub step_fraction: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { step_fraction: DEFAULT_STEP_FRACTION }
    }
}

pub fn integrate(me: &MasterEquation, rho0: &DensityMatrix, grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    integrate_with(me, rho0, grid, IntegratorOptions::default())
}

pub fn integrate_with(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    grid: &[f64],
    options: IntegratorOptions,
) -> Result<Vec<DensityMatrix>> {
    if rho0.space() != me.space() {
        return Err(Error::DimensionMismatch { expected: me.dim(), got: rho0.matrix().nrows() });
    }
    let h_max = me.step_bound(options.step_fraction);
    let series = integrator::rk4_linear_on_grid(vec![rho0.matrix().clone()], grid, h_max, |y| vec![me.rhs(&y[0])])?;
    series
        .into_iter()
        .map(|mut y| DensityMatrix::unchecked(me.space().clone(), y.swap_remove(0), rho0.tolerance()))
        .collect()
}

/// One Lindblad channel `L = √λ Σ_β conj(u_β) A_β(ω)` from the eigenpair
/// `(λ, u)` of γ(ω).
#[derive(Debug, Clone)]
pub struct JumpChannel {
    pub omega: f64,
    pub rate: f64,
    pub weights: CVec,
    pub op: CMat,
}

/// Eigen-decomposition of one γ(ω); returns the pairs with `λ > RANK_TOL`.
pub fn diagonalize_entry(gamma: &CMat, omega: f64) -> Result<Vec<(f64, CVec)>> {
    let (vals, vecs) = linalg::eigh(gamma);
    if let Some(&min) = vals.first() {
        if min < -PSD_TOL {
            return Err(Error::NotPositive { omega, eigenvalue: min });
        }
    }
    Ok(vals
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &l)| l > RANK_TOL)
        .map(|(k, &l)| (l, vecs.column(k).into_owned()))
        .collect())
}

/// Lindblad (diagonal) form of the dissipator: one jump operator per nonzero
/// eigenvalue of every γ(ω).
pub fn diagonalize_gamma(me: &MasterEquation) -> Result<Vec<JumpChannel>> {
    let n = me.dim();
    let mut out = Vec::new();
    for e in me.tensor().entries() {
        for (rate, u) in diagonalize_entry(&e.gamma, e.omega)? {
            let mut op = CMat::zeros(n, n);
            let mut any = false;
            for (beta, w) in u.iter().enumerate() {
                if let Some(a) = component(me.couplings(), beta, e.omega) {
                    op += a * w.conj();
                    any = true;
                }
            }
            if !any {
                continue;
            }
            out.push(JumpChannel { omega: e.omega, rate, weights: u, op: op * r(rate.sqrt()) });
        }
    }
    Ok(out)
}

/// `Σ_k L_k ρ L_k† − ½{L_k†L_k, ρ}`.
pub fn lindblad_dissipator(channels: &[JumpChannel], rho: &CMat) -> CMat {
    let mut out = CMat::zeros(rho.nrows(), rho.ncols());
    for ch in channels {
        let adj = ch.op.adjoint();
        let ll = &adj * &ch.op;
        out += (&ch.op * rho) * &adj - (&ll * rho + rho * &ll) * r(0.5);
    }
    out
}
