//! Zero-temperature trajectory decomposition of the master equation.
//!
//! With only emission channels present the generator splits into a
//! non-Hermitian no-jump part `B = H₀ − (i/2) H′`, `H′ = Σ_{ω>0} Σ γ_{αβ} A_α†A_β`,
//! and the jump map `J(ρ) = Σ_{ω>0} Σ γ_{αβ} A_β ρ A_α†`. Starting from a state
//! with `N` excitations, the state after exactly `N − i` jumps is the block
//! `ρ_i`, and
//!
//! ```text
//! dρ_N/dt = −i(B ρ_N − ρ_N B†)
//! dρ_i/dt = −i(B ρ_i − ρ_i B†) + J(ρ_{i+1}),     ρ(t) = Σ_i ρ_i(t).
//! ```
//!
//! Each block is a deterministic function of time; the differential form above
//! is the Duhamel equivalent of the nested time-ordered integrals over jump
//! times. [`mcwf_unravel`] samples the same process one pure trajectory at a
//! time after bringing the tensor into diagonal (Lindblad) form.

use crate::eigenops::decompose;
use crate::error::{Error, Result};
use crate::integrator;
use crate::linalg::{self, expm, r, CMat, CVec, I};
use crate::master::{diagonalize_gamma, IntegratorOptions, JumpChannel, MasterEquation};
use crate::ops::{DensityMatrix, HilbertSpace, KetState, Operator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct EffectiveGenerator {
    pub b: CMat,
    pub h0: CMat,
    pub hprime: CMat,
}

impl EffectiveGenerator {
    /// `H₀ − (i/2) H′` rebuilt from the stored parts.
    pub fn rebuild(&self) -> CMat {
        &self.h0 - &self.hprime * (I * 0.5)
    }

    /// `e^{−iBt}`.
    pub fn propagator(&self, t: f64) -> CMat {
        expm(&(&self.b * (-I * t)))
    }
}

/// Rejects tensors that still carry absorption (`ω < 0`) entries, or emission-free
/// `ω = 0` rates which have no place in the excitation hierarchy.
fn check_filtered(me: &MasterEquation) -> Result<()> {
    for e in me.tensor().entries() {
        if e.omega < 0.0 || (e.omega == 0.0 && linalg::max_abs(&e.gamma) > 0.0) {
            return Err(Error::UnfilteredTensor(e.omega));
        }
    }
    Ok(())
}

pub fn effective_generator(me: &MasterEquation) -> Result<EffectiveGenerator> {
    check_filtered(me)?;
    let h0 = me.total_hamiltonian();
    let hprime = me.dissipator().decay_operator(me.dim());
    let b = &h0 - &hprime * (I * 0.5);
    Ok(EffectiveGenerator { b, h0, hprime })
}

/// `e^{−iBt} f e^{+iB†t}`.
pub fn propagate_deterministic(generator: &EffectiveGenerator, f: &CMat, t: f64) -> CMat {
    let u = generator.propagator(t);
    (&u * f) * u.adjoint()
}

#[derive(Debug, Clone)]
pub struct TrajectoryHierarchy {
    space: HilbertSpace,
    grid: Vec<f64>,
    /// `blocks[i][k]` is `ρ_i(grid[k])`.
    blocks: Vec<Vec<CMat>>,
}

impl TrajectoryHierarchy {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn n_max_exc(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, i: usize, k: usize) -> &CMat {
        &self.blocks[i][k]
    }

    pub fn block_series(&self, i: usize) -> &[CMat] {
        &self.blocks[i]
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn block_trace(&self, i: usize, k: usize) -> f64 {
        linalg::trace(&self.blocks[i][k]).re
    }
}

/// Identifies the single excitation sector `rho0` lives in, as measured by the
/// Hermitian `counter` whose eigenvalues label sectors 0, 1, 2, …
pub fn excitation_sector(rho0: &CMat, counter: &Operator) -> Result<usize> {
    let decomp = decompose(counter, 1e-8)?;
    let occupied: Vec<usize> = (0..decomp.projectors.len())
        .filter(|&a| linalg::fro(&(decomp.projectors[a].matrix() * rho0)) > 1e-12)
        .collect();
    if occupied.len() != 1 {
        return Err(Error::MultipleSectors(occupied.len()));
    }
    let label = decomp.eigenvalues[occupied[0]];
    let rounded = label.round();
    if (label - rounded).abs() > 1e-9 || rounded < 0.0 {
        return Err(Error::NonIntegerSector(label));
    }
    Ok(rounded as usize)
}

pub fn solve_hierarchy(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    counter: &Operator,
    grid: &[f64],
) -> Result<TrajectoryHierarchy> {
    solve_hierarchy_with(me, rho0, counter, grid, IntegratorOptions::default())
}

pub fn solve_hierarchy_with(
    me: &MasterEquation,
    rho0: &DensityMatrix,
    counter: &Operator,
    grid: &[f64],
    options: IntegratorOptions,
) -> Result<TrajectoryHierarchy> {
    if rho0.space() != me.space() || counter.space() != me.space() {
        return Err(Error::DimensionMismatch { expected: me.dim(), got: rho0.matrix().nrows() });
    }
    let generator = effective_generator(me)?;
    let top = excitation_sector(rho0.matrix(), counter)?;
    let n = me.dim();
    let mut y0 = vec![CMat::zeros(n, n); top + 1];
    y0[top] = rho0.matrix().clone();

    let b = generator.b.clone();
    let b_adj = b.adjoint();
    let dissipator = me.dissipator();
    let h_max = me.step_bound(options.step_fraction);
    let series = integrator::rk4_linear_on_grid(y0, grid, h_max, |y| {
        (0..y.len())
            .map(|i| {
                let mut d = (&b * &y[i] - &y[i] * &b_adj) * (-I);
                if i + 1 < y.len() {
                    d += dissipator.jump_part(&y[i + 1]);
                }
                d
            })
            .collect()
    })?;

    let mut blocks = vec![Vec::with_capacity(grid.len()); top + 1];
    for state in series {
        for (i, m) in state.into_iter().enumerate() {
            blocks[i].push(m);
        }
    }
    Ok(TrajectoryHierarchy { space: me.space().clone(), grid: grid.to_vec(), blocks })
}

/// `ρ(t) = Σ_i ρ_i(t)` at every grid point.
pub fn reconstruct(h: &TrajectoryHierarchy) -> Vec<DensityMatrix> {
    (0..h.grid.len())
        .map(|k| {
            let mut sum = h.blocks[0][k].clone();
            for block in &h.blocks[1..] {
                sum += &block[k];
            }
            DensityMatrix::unchecked(h.space.clone(), sum, crate::ops::DEFAULT_TOLERANCE)
                .expect("blocks share the hierarchy's space")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McwfOptions {
    pub n_traj: usize,
    pub seed: u64,
    /// Target upper bound on the per-step jump probability used to pick `dt`.
    pub max_jump_probability: f64,
    /// Explicit step; overrides the automatic choice.
    pub dt: Option<f64>,
}

impl McwfOptions {
    pub fn new(n_traj: usize, seed: u64) -> Self {
        Self { n_traj, seed, max_jump_probability: 0.01, dt: None }
    }
}

/// Hard ceiling on the per-step jump probability of the first-order scheme.
pub const JUMP_PROBABILITY_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub time: f64,
    pub channel: usize,
}

#[derive(Debug, Clone)]
pub struct McwfResult {
    pub grid: Vec<f64>,
    pub average: Vec<DensityMatrix>,
    /// Jump records per trajectory, in trajectory order.
    pub jumps: Vec<Vec<JumpRecord>>,
    pub channels: Vec<JumpChannel>,
    /// Fraction of trajectories with no jump up to each grid point.
    pub no_jump_fraction: Vec<f64>,
    /// Normalized state of the jump-free trajectories (absent once none remain).
    pub no_jump_state: Vec<Option<CMat>>,
}

struct Partial {
    sum: Vec<CMat>,
    no_jump_sum: Vec<CMat>,
    no_jump_count: Vec<usize>,
    jumps: Vec<Vec<JumpRecord>>,
}

const CHUNK: usize = 32;

pub fn mcwf_unravel(me: &MasterEquation, psi0: &KetState, grid: &[f64], options: McwfOptions) -> Result<McwfResult> {
    mcwf_unravel_mixture(me, &[(1.0, psi0.clone())], grid, options)
}

/// Trajectory ensemble from a statistical mixture of kets: each trajectory draws
/// its initial ket with the given weights from its own random stream.
pub fn mcwf_unravel_mixture(
    me: &MasterEquation,
    initial: &[(f64, KetState)],
    grid: &[f64],
    options: McwfOptions,
) -> Result<McwfResult> {
    integrator::validate_grid(grid)?;
    if options.n_traj == 0 {
        return Err(Error::InvalidParameter { name: "n_traj", reason: "must be at least 1".into() });
    }
    let total_weight: f64 = initial.iter().map(|(w, _)| *w).sum();
    if initial.is_empty() || initial.iter().any(|(w, _)| *w < 0.0) || total_weight.is_nan() || total_weight <= 0.0 {
        return Err(Error::InvalidParameter { name: "initial", reason: "weights must be non-negative and not all zero".into() });
    }
    let mut kets = Vec::with_capacity(initial.len());
    for (_, k) in initial {
        if k.space() != me.space() {
            return Err(Error::DimensionMismatch { expected: me.dim(), got: k.amplitudes().len() });
        }
        let norm = k.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("initial ket norm {norm} is not 1")));
        }
        kets.push(k.amplitudes().clone());
    }
    let cumulative: Vec<f64> = initial
        .iter()
        .scan(0.0, |acc, (w, _)| {
            *acc += w / total_weight;
            Some(*acc)
        })
        .collect();

    let generator = effective_generator(me)?;
    let channels = diagonalize_gamma(me)?;
    let decay_norm = {
        let mut total = CMat::zeros(me.dim(), me.dim());
        for ch in &channels {
            total += ch.op.adjoint() * &ch.op;
        }
        linalg::eigh(&total).0.last().copied().unwrap_or(0.0).max(0.0)
    };
    let dt_max = match options.dt {
        Some(dt) if dt > 0.0 => dt,
        Some(dt) => return Err(Error::InvalidParameter { name: "dt", reason: format!("{dt} is not positive") }),
        None if decay_norm > 0.0 => options.max_jump_probability / decay_norm,
        None => f64::INFINITY,
    };

    // per-interval substep count and no-jump propagator
    let steps: Vec<(usize, f64, CMat)> = grid
        .windows(2)
        .map(|w| {
            let n = integrator::substeps(w[1] - w[0], dt_max);
            let h = (w[1] - w[0]) / n as f64;
            (n, h, generator.propagator(h))
        })
        .collect();

    let n_chunks = options.n_traj.div_ceil(CHUNK);
    let partials: Vec<Result<Partial>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let n = me.dim();
            let mut part = Partial {
                sum: vec![CMat::zeros(n, n); grid.len()],
                no_jump_sum: vec![CMat::zeros(n, n); grid.len()],
                no_jump_count: vec![0; grid.len()],
                jumps: Vec::new(),
            };
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(options.n_traj);
            for traj in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
                rng.set_stream(traj as u64);
                let pick: f64 = rng.random();
                let which = cumulative.iter().position(|&c| pick < c).unwrap_or(kets.len() - 1);
                let mut psi = kets[which].clone();
                let mut record = Vec::new();
                let accumulate = |k: usize, psi: &CVec, jumped: bool, part: &mut Partial| {
                    let proj = linalg::outer(psi, psi);
                    if !jumped {
                        part.no_jump_sum[k] += &proj;
                        part.no_jump_count[k] += 1;
                    }
                    part.sum[k] += proj;
                };
                accumulate(0, &psi, false, &mut part);
                let mut next = CVec::zeros(n);
                for (interval, (n_sub, h, u)) in steps.iter().enumerate() {
                    let t0 = grid[interval];
                    for s in 0..*n_sub {
                        let time = t0 + (s + 1) as f64 * h;
                        u.mul_to(&psi, &mut next);
                        let p_jump = (1.0 - next.norm_squared()).max(0.0);
                        if p_jump > JUMP_PROBABILITY_LIMIT {
                            return Err(Error::StepTooLarge { time, probability: p_jump });
                        }
                        let draw: f64 = rng.random();
                        if draw < p_jump {
                            let candidates: Vec<CVec> = channels.iter().map(|ch| &ch.op * &psi).collect();
                            let weights: Vec<f64> = candidates.iter().map(|v| v.norm_squared()).collect();
                            let total: f64 = weights.iter().sum();
                            if total > 0.0 {
                                let target = rng.random::<f64>() * total;
                                let mut acc = 0.0;
                                let mut chosen = weights.len() - 1;
                                for (c, w) in weights.iter().enumerate() {
                                    acc += w;
                                    if target < acc {
                                        chosen = c;
                                        break;
                                    }
                                }
                                let v = &candidates[chosen];
                                psi = v / r(v.norm());
                                record.push(JumpRecord { time, channel: chosen });
                                continue;
                            }
                        }
                        next *= r(1.0 / next.norm());
                        std::mem::swap(&mut psi, &mut next);
                    }
                    accumulate(interval + 1, &psi, !record.is_empty(), &mut part);
                }
                part.jumps.push(record);
            }
            Ok(part)
        })
        .collect();

    let n = me.dim();
    let mut sum = vec![CMat::zeros(n, n); grid.len()];
    let mut no_jump_sum = vec![CMat::zeros(n, n); grid.len()];
    let mut no_jump_count = vec![0usize; grid.len()];
    let mut jumps = Vec::with_capacity(options.n_traj);
    for part in partials {
        let part = part?;
        for k in 0..grid.len() {
            sum[k] += &part.sum[k];
            no_jump_sum[k] += &part.no_jump_sum[k];
            no_jump_count[k] += part.no_jump_count[k];
        }
        jumps.extend(part.jumps);
    }
    let scale = r(1.0 / options.n_traj as f64);
    let average = sum
        .into_iter()
        .map(|m| DensityMatrix::unchecked(me.space().clone(), m * scale, crate::ops::DEFAULT_TOLERANCE))
        .collect::<Result<Vec<_>>>()?;
    let no_jump_fraction = no_jump_count.iter().map(|&c| c as f64 / options.n_traj as f64).collect();
    let no_jump_state = no_jump_sum
        .into_iter()
        .zip(&no_jump_count)
        .map(|(m, &c)| (c > 0).then(|| m * r(1.0 / c as f64)))
        .collect();
    Ok(McwfResult { grid: grid.to_vec(), average, jumps, channels, no_jump_fraction, no_jump_state })
}
