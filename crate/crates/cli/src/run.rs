//! Executes a validated configuration into a time series of observables.

use oqs_core::concurrence::wootters;
use oqs_core::jc::{closed_form_block, JcModel};
use oqs_core::linalg::{self, r, CMat};
use oqs_core::master::{integrate, MasterEquation};
use oqs_core::trajectory::{mcwf_unravel_mixture, reconstruct, solve_hierarchy, JumpRecord, McwfOptions};
use oqs_core::{DensityMatrix, KetState, Operator};
use rayon::prelude::*;

use crate::config::{Engine, McwfConfig, Observable, RunConfig, System};
use crate::error::{CliError, Result};
use crate::series::Series;

/// Trace below which a conditional state is reported as absent (NaN).
pub const CONDITIONAL_NORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: Series,
    /// Jump records per trajectory, for the mcwf engine.
    pub jumps: Option<Vec<Vec<JumpRecord>>>,
}

/// Raw engine output before observables are taken.
struct Evolution {
    states: Vec<CMat>,
    /// Block traces `tr ρ_i(t)`, indexed `[i][k]`, when the engine has them.
    blocks: Option<Vec<Vec<f64>>>,
    /// Normalized no-jump state per grid point.
    conditional: Option<Vec<Option<CMat>>>,
    jumps: Option<Vec<Vec<JumpRecord>>>,
}

fn normalized(m: &CMat) -> Option<CMat> {
    let tr = linalg::trace(m).re;
    (tr > CONDITIONAL_NORM_FLOOR).then(|| m * r(1.0 / tr))
}

fn evolve_integrate(me: &MasterEquation, rho0: &DensityMatrix, grid: &[f64]) -> Result<Evolution> {
    let states = integrate(me, rho0, grid)?.into_iter().map(DensityMatrix::into_matrix).collect();
    Ok(Evolution { states, blocks: None, conditional: None, jumps: None })
}

fn evolve_nud(me: &MasterEquation, rho0: &DensityMatrix, counter: &Operator, grid: &[f64]) -> Result<Evolution> {
    let h = solve_hierarchy(me, rho0, counter, grid)?;
    let states = reconstruct(&h).into_iter().map(DensityMatrix::into_matrix).collect();
    let top = h.n_max_exc();
    let blocks = (0..=top).map(|i| (0..grid.len()).map(|k| h.block_trace(i, k)).collect()).collect();
    let conditional = (0..grid.len()).map(|k| normalized(h.block(top, k))).collect();
    Ok(Evolution { states, blocks: Some(blocks), conditional: Some(conditional), jumps: None })
}

fn evolve_mcwf(me: &MasterEquation, kets: &[(f64, KetState)], grid: &[f64], cfg: McwfConfig) -> Result<Evolution> {
    let mut options = McwfOptions::new(cfg.n_traj, cfg.seed);
    options.dt = cfg.dt;
    let res = mcwf_unravel_mixture(me, kets, grid, options)?;
    Ok(Evolution {
        states: res.average.into_iter().map(DensityMatrix::into_matrix).collect(),
        blocks: None,
        conditional: Some(res.no_jump_state),
        jumps: Some(res.jumps),
    })
}

fn evolve_closed_form(model: &JcModel, initial: &oqs_core::jc::BlockInitial, grid: &[f64]) -> Result<Evolution> {
    let sol = closed_form_block(&model.params, 1, initial, grid)?;
    let ground = model.ground().projector().into_matrix();
    let mut states = Vec::with_capacity(grid.len());
    let mut conditional = Vec::with_capacity(grid.len());
    let mut blocks = vec![Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len())];
    for k in 0..grid.len() {
        let top = model.lift_block(1, &sol.block(k));
        let s = sol.survival(k);
        states.push(&ground * r(1.0 - s) + &top);
        conditional.push(normalized(&top));
        blocks[0].push(1.0 - s);
        blocks[1].push(s);
    }
    Ok(Evolution { states, blocks: Some(blocks), conditional: Some(conditional), jumps: None })
}

fn mcwf_config(config: &RunConfig) -> Result<McwfConfig> {
    config.mcwf.ok_or_else(|| CliError::config("mcwf", "engine mcwf needs an mcwf block with n_traj and seed"))
}

fn purity(m: &CMat) -> f64 {
    linalg::trace(&(m * m)).re
}

/// Runs one configuration (its sweep, if any, is ignored).
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let grid = config.grid.points();
    let mut columns: Vec<String> = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    let mut push = |name: String, col: Vec<f64>| {
        columns.push(name);
        values.push(col);
    };

    let jumps = match &config.system {
        System::Jc(jc) => {
            let model = jc.build()?;
            let rho0 = model.initial_state(&jc.initial)?;
            let evo = match config.engine {
                Engine::Integrate => evolve_integrate(&model.master, &rho0, &grid)?,
                Engine::Nud => evolve_nud(&model.master, &rho0, &model.excitation, &grid)?,
                Engine::Mcwf => evolve_mcwf(&model.master, &model.initial_kets(&jc.initial)?, &grid, mcwf_config(config)?)?,
                Engine::ClosedForm => evolve_closed_form(&model, &jc.initial, &grid)?,
            };
            let n = model.params.n_exc;
            for &o in &config.outputs {
                match o {
                    Observable::Population => push("p_excited".into(), evo.states.iter().map(|m| model.excited_population(m)).collect()),
                    Observable::Concurrence => push("concurrence".into(), evo.states.iter().map(|m| model.concurrence(m)).collect()),
                    Observable::Trace => push("trace".into(), evo.states.iter().map(|m| linalg::trace(m).re).collect()),
                    Observable::Purity => push("purity".into(), evo.states.iter().map(purity).collect()),
                    Observable::Blocks => {
                        let blocks = match &evo.blocks {
                            Some(b) => b.clone(),
                            None => (0..=n)
                                .map(|i| {
                                    let p = model.sector_projector(i);
                                    evo.states.iter().map(|m| linalg::trace(&(&p * m)).re).collect()
                                })
                                .collect(),
                        };
                        for (i, b) in blocks.into_iter().enumerate() {
                            push(format!("block_{i}"), b);
                        }
                    }
                    Observable::ConditionalState => {
                        let cond = conditional(&evo)?;
                        push("cond_p_excited".into(), cond.iter().map(|m| m.as_ref().map_or(f64::NAN, |m| model.excited_population(m))).collect());
                        push(
                            "cond_concurrence".into(),
                            cond.iter().map(|m| m.as_ref().map_or(f64::NAN, |m| wootters(&model.qubit_pair(n, m)))).collect(),
                        );
                    }
                }
            }
            evo.jumps
        }
        System::Custom(custom) => {
            let me = custom.build()?;
            let rho0 = custom.initial_state()?;
            let evo = match config.engine {
                Engine::Integrate => evolve_integrate(&me, &rho0, &grid)?,
                Engine::Nud => {
                    let counter = custom
                        .excitation_operator()
                        .ok_or_else(|| CliError::config("params.excitation", "engine nud needs an excitation operator"))??;
                    evolve_nud(&me, &rho0, &counter, &grid)?
                }
                Engine::Mcwf => evolve_mcwf(&me, &custom.initial_kets()?, &grid, mcwf_config(config)?)?,
                Engine::ClosedForm => return Err(CliError::config("engine", "closed-form is available for the jc-* models only")),
            };
            let dim = custom.space.total_dim();
            for &o in &config.outputs {
                match o {
                    Observable::Population => {
                        for i in 0..dim {
                            push(format!("p_{i}"), evo.states.iter().map(|m| m[(i, i)].re).collect());
                        }
                    }
                    Observable::Concurrence => push("concurrence".into(), evo.states.iter().map(wootters).collect()),
                    Observable::Trace => push("trace".into(), evo.states.iter().map(|m| linalg::trace(m).re).collect()),
                    Observable::Purity => push("purity".into(), evo.states.iter().map(purity).collect()),
                    Observable::Blocks => {
                        let blocks = evo.blocks.clone().ok_or_else(|| CliError::config("outputs", "blocks on custom-tensor needs engine nud"))?;
                        for (i, b) in blocks.into_iter().enumerate() {
                            push(format!("block_{i}"), b);
                        }
                    }
                    Observable::ConditionalState => {
                        let cond = conditional(&evo)?;
                        push("cond_purity".into(), cond.iter().map(|m| m.as_ref().map_or(f64::NAN, purity)).collect());
                        if custom.is_qubit_pair() {
                            push("cond_concurrence".into(), cond.iter().map(|m| m.as_ref().map_or(f64::NAN, wootters)).collect());
                        }
                    }
                }
            }
            evo.jumps
        }
    };
    let series = Series::new(config.name.clone(), grid, columns, values)?;
    Ok(RunOutput { series, jumps })
}

fn conditional(evo: &Evolution) -> Result<&Vec<Option<CMat>>> {
    evo.conditional
        .as_ref()
        .ok_or_else(|| CliError::config("outputs", "conditional-state is not available from this engine"))
}

/// Runs every sweep point concurrently; results come back in sweep order.
pub fn run_sweep(config: &RunConfig) -> Result<Vec<RunOutput>> {
    let points = config.sweep_points()?;
    points.par_iter().map(run).collect()
}
