//! Run configurations: a strict JSON tree, validated into [`RunConfig`].
//!
//! Unknown keys are rejected everywhere and every error names the offending
//! path, e.g. `params.g11`. The full schema is documented in `docs/config.md`.

use std::fmt;
use std::str::FromStr;

use oqs_core::eigenops::{decompose, default_degeneracy_tol, eigenoperators};
use oqs_core::jc::{build_jc_with, BlockInitial, EigenBasis, JcModel, JcOptions, JcParams};
use oqs_core::linalg::{self, c, CMat, CVec};
use oqs_core::master::{apply_t0_filter, MasterEquation, SpectralCorrelationTensor, TemperatureMode, TensorEntry};
use oqs_core::{DensityMatrix, HilbertSpace, KetState, Operator};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    JcCommon,
    JcTwoBath,
    JcMirror,
    CustomTensor,
}

impl ModelKind {
    pub fn is_jc(self) -> bool {
        self != ModelKind::CustomTensor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Integrate,
    Nud,
    Mcwf,
    ClosedForm,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Integrate => "integrate",
            Engine::Nud => "nud",
            Engine::Mcwf => "mcwf",
            Engine::ClosedForm => "closed-form",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "integrate" => Ok(Engine::Integrate),
            "nud" => Ok(Engine::Nud),
            "mcwf" => Ok(Engine::Mcwf),
            "closed-form" => Ok(Engine::ClosedForm),
            _ => Err(format!("unknown engine `{s}` (expected integrate, nud, mcwf or closed-form)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Population,
    Concurrence,
    Trace,
    Purity,
    Blocks,
    ConditionalState,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Population => "population",
            Observable::Concurrence => "concurrence",
            Observable::Trace => "trace",
            Observable::Purity => "purity",
            Observable::Blocks => "blocks",
            Observable::ConditionalState => "conditional-state",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub t_end: f64,
    /// Number of intervals; the grid has `n_steps + 1` points.
    pub n_steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        oqs_core::integrator::uniform_grid(self.t_end, self.n_steps)
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self { t_end: 100.0, n_steps: 200 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McwfConfig {
    pub n_traj: usize,
    pub seed: u64,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

/// Parameters that a sweep may vary, all on the Jaynes-Cummings models.
pub const SWEEPABLE: [&str; 6] = ["omega0", "eps", "g11", "g22", "g12", "k_mirror"];

#[derive(Debug, Clone)]
pub struct JcSystem {
    pub params: JcParams,
    pub initial: BlockInitial,
    pub basis: EigenBasis,
    pub lamb: Option<CMat>,
}

impl JcSystem {
    pub fn build(&self) -> oqs_core::Result<JcModel> {
        build_jc_with(self.params, JcOptions { basis: self.basis, lamb: self.lamb.clone() })
    }
}

#[derive(Debug, Clone)]
pub enum CustomInitial {
    Ket(CVec),
    Density(CMat),
}

#[derive(Debug, Clone)]
pub struct CustomSystem {
    pub space: HilbertSpace,
    pub hamiltonian: CMat,
    pub couplings: Vec<CMat>,
    pub tensor: SpectralCorrelationTensor,
    pub beta: Option<f64>,
    pub lamb_shift: bool,
    pub initial: CustomInitial,
    pub excitation: Option<CMat>,
}

impl CustomSystem {
    /// Master equation with every coupling decomposed against the Hamiltonian.
    /// At zero temperature the negative-frequency entries are dropped.
    pub fn build(&self) -> oqs_core::Result<MasterEquation> {
        let h = Operator::new(self.space.clone(), self.hamiltonian.clone(), "H")?;
        let decomp = decompose(&h, default_degeneracy_tol(&h))?;
        let mut couplings = Vec::with_capacity(self.couplings.len());
        for (k, a) in self.couplings.iter().enumerate() {
            let op = Operator::new(self.space.clone(), a.clone(), format!("A{}", k + 1))?;
            if !op.is_hermitian(oqs_core::eigenops::HERMITIAN_TOL) {
                return Err(oqs_core::Error::NotHermitian(linalg::hermitian_deviation(a)));
            }
            couplings.push(eigenoperators(&op, &decomp, k));
        }
        let (tensor, mode) = match self.beta {
            None => (apply_t0_filter(&self.tensor), TemperatureMode::Zero),
            Some(beta) => (self.tensor.clone(), TemperatureMode::ValidatedFinite { beta }),
        };
        let me = MasterEquation::new(h, couplings, tensor, mode)?;
        if self.lamb_shift {
            me.with_lamb_shift()
        } else {
            Ok(me)
        }
    }

    pub fn initial_state(&self) -> oqs_core::Result<DensityMatrix> {
        match &self.initial {
            CustomInitial::Ket(v) => Ok(KetState::normalized(self.space.clone(), v.clone())?.projector()),
            CustomInitial::Density(m) => DensityMatrix::new(self.space.clone(), m.clone(), 1e-9),
        }
    }

    /// Weighted pure components of the initial state.
    pub fn initial_kets(&self) -> oqs_core::Result<Vec<(f64, KetState)>> {
        match &self.initial {
            CustomInitial::Ket(v) => Ok(vec![(1.0, KetState::normalized(self.space.clone(), v.clone())?)]),
            CustomInitial::Density(m) => {
                let (vals, vecs) = linalg::eigh(m);
                vals.iter()
                    .enumerate()
                    .rev()
                    .filter(|(_, &w)| w > 1e-14)
                    .map(|(k, &w)| Ok((w, KetState::normalized(self.space.clone(), vecs.column(k).into_owned())?)))
                    .collect()
            }
        }
    }

    pub fn excitation_operator(&self) -> Option<oqs_core::Result<Operator>> {
        self.excitation.as_ref().map(|m| Operator::new(self.space.clone(), m.clone(), "N"))
    }

    pub fn is_qubit_pair(&self) -> bool {
        self.space.factor_dims() == [2, 2]
    }
}

#[derive(Debug, Clone)]
pub enum System {
    Jc(JcSystem),
    Custom(Box<CustomSystem>),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub name: String,
    pub model: ModelKind,
    pub system: System,
    pub grid: Grid,
    pub outputs: Vec<Observable>,
    pub engine: Engine,
    pub mcwf: Option<McwfConfig>,
    pub sweep: Option<Sweep>,
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub engine: Option<Engine>,
    pub seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    name: Option<String>,
    /// Free text for annotating a config file; ignored.
    #[serde(default, rename = "description")]
    _description: Option<String>,
    model: ModelKind,
    #[serde(default)]
    params: Option<Value>,
    #[serde(default)]
    grid: Option<RawGrid>,
    #[serde(default)]
    outputs: Option<Vec<Observable>>,
    #[serde(default)]
    engine: Option<Engine>,
    #[serde(default)]
    mcwf: Option<RawMcwf>,
    #[serde(default)]
    sweep: Option<RawSweep>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t_end: f64,
    n_steps: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMcwf {
    n_traj: usize,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    dt: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    param: String,
    values: Vec<f64>,
}

/// A real number or a `[re, im]` pair.
#[derive(Clone, Copy)]
enum RawComplex {
    Real(f64),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for RawComplex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl<'de> serde::de::Visitor<'de> for Visitor {
            type Value = RawComplex;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a [re, im] pair")
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<RawComplex, E> {
                Ok(RawComplex::Real(v))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<RawComplex, E> {
                Ok(RawComplex::Real(v as f64))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<RawComplex, E> {
                Ok(RawComplex::Real(v as f64))
            }

            fn visit_seq<A: serde::de::SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<RawComplex, A::Error> {
                let re = seq.next_element()?.ok_or_else(|| serde::de::Error::invalid_length(0, &self))?;
                let im = seq.next_element()?.ok_or_else(|| serde::de::Error::invalid_length(1, &self))?;
                if seq.next_element::<serde::de::IgnoredAny>()?.is_some() {
                    return Err(serde::de::Error::invalid_length(3, &self));
                }
                Ok(RawComplex::Pair([re, im]))
            }
        }
        d.deserialize_any(Visitor)
    }
}

impl RawComplex {
    fn value(self) -> oqs_core::Complex64 {
        match self {
            RawComplex::Real(x) => c(x, 0.0),
            RawComplex::Pair([re, im]) => c(re, im),
        }
    }
}

type RawMatrix = Vec<Vec<RawComplex>>;

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RawJc {
    omega0: Option<f64>,
    eps: Option<RawComplex>,
    g11: Option<f64>,
    g22: Option<f64>,
    g12: Option<RawComplex>,
    k_mirror: Option<f64>,
    n_exc: Option<usize>,
    n_max: Option<usize>,
    initial: Option<RawInitial>,
    basis: Option<RawBasis>,
    lamb: Option<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
enum RawInitial {
    Upper,
    Lower,
    Mixture(f64),
    Block(RawMatrix),
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawBasis {
    Bare,
    Dressed,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCustom {
    dims: Vec<usize>,
    hamiltonian: RawMatrix,
    couplings: Vec<RawMatrix>,
    tensor: Vec<RawEntry>,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default)]
    lamb_shift: bool,
    initial: RawCustomInitial,
    #[serde(default)]
    excitation: Option<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    omega: f64,
    gamma: RawMatrix,
    #[serde(default)]
    lamb: Option<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
enum RawCustomInitial {
    Ket(Vec<RawComplex>),
    Density(RawMatrix),
}

fn schema_error<E: fmt::Display>(prefix: &str, e: serde_path_to_error::Error<E>) -> CliError {
    let inner = e.path().to_string();
    let path = match (prefix, inner.as_str()) {
        ("", ".") => String::new(),
        ("", p) => p.to_string(),
        (pre, ".") => pre.to_string(),
        (pre, p) => format!("{pre}.{p}"),
    };
    if path.is_empty() {
        CliError::Config(e.into_inner().to_string())
    } else {
        CliError::config(&path, e.into_inner())
    }
}

fn from_value<T: DeserializeOwned>(prefix: &str, value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| schema_error(prefix, e))
}

fn matrix(path: &str, raw: &RawMatrix, dim: Option<usize>) -> Result<CMat> {
    let n = raw.len();
    if n == 0 {
        return Err(CliError::config(path, "matrix must not be empty"));
    }
    if let Some(d) = dim {
        if n != d {
            return Err(CliError::config(path, format!("expected {d} rows, found {n}")));
        }
    }
    for (i, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::config(&format!("{path}[{i}]"), format!("expected {n} entries, found {}", row.len())));
        }
    }
    Ok(CMat::from_fn(n, n, |i, j| raw[i][j].value()))
}

/// Parses and validates a configuration without overrides.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: Overrides) -> Result<RunConfig> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| schema_error("", e))?;
    de.end().map_err(|e| CliError::Config(e.to_string()))?;

    let name = raw.name.unwrap_or_else(|| "run".to_string());
    if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
        return Err(CliError::config("name", format!("`{name}` is not usable as a file stem")));
    }

    let grid = match raw.grid {
        None => Grid::default(),
        Some(g) => Grid { t_end: g.t_end, n_steps: g.n_steps },
    };
    if !(grid.t_end > 0.0 && grid.t_end.is_finite()) {
        return Err(CliError::config("grid.t_end", format!("{} must be positive and finite", grid.t_end)));
    }
    if grid.n_steps < 2 {
        return Err(CliError::config("grid.n_steps", format!("{} must be at least 2", grid.n_steps)));
    }

    let outputs = raw.outputs.unwrap_or_else(|| vec![Observable::Population]);
    if outputs.is_empty() {
        return Err(CliError::config("outputs", "at least one observable is required"));
    }
    for (k, o) in outputs.iter().enumerate() {
        if outputs[..k].contains(o) {
            return Err(CliError::config(&format!("outputs[{k}]"), format!("`{}` listed twice", o.name())));
        }
    }

    let engine = overrides.engine.or(raw.engine).unwrap_or_default();
    let mcwf = match raw.mcwf {
        None => None,
        Some(m) => {
            if m.n_traj < 1 {
                return Err(CliError::config("mcwf.n_traj", "must be at least 1"));
            }
            if let Some(dt) = m.dt {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(CliError::config("mcwf.dt", format!("{dt} must be positive and finite")));
                }
            }
            match overrides.seed.or(m.seed) {
                Some(seed) => Some(McwfConfig { n_traj: m.n_traj, seed, dt: m.dt }),
                None if engine == Engine::Mcwf => {
                    return Err(CliError::config("mcwf.seed", "an explicit seed is required"));
                }
                None => None,
            }
        }
    };
    if engine == Engine::Mcwf && mcwf.is_none() {
        return Err(CliError::config("mcwf", "engine mcwf needs an mcwf block with n_traj and seed"));
    }

    let params = raw.params.unwrap_or(Value::Object(Default::default()));
    let system = if raw.model.is_jc() {
        System::Jc(jc_system(raw.model, from_value("params", params)?)?)
    } else {
        if params.as_object().is_some_and(|m| m.is_empty()) {
            return Err(CliError::config("params", "custom-tensor needs an explicit tensor spec"));
        }
        System::Custom(Box::new(custom_system(from_value("params", params)?)?))
    };

    let sweep = raw.sweep.map(|s| Sweep { param: s.param, values: s.values });
    let config = RunConfig { name, model: raw.model, system, grid, outputs, engine, mcwf, sweep };
    config.check_compatibility()?;
    if let Some(sweep) = &config.sweep {
        if !config.model.is_jc() {
            return Err(CliError::config("sweep", "sweeps are available for the jc-* models only"));
        }
        if !SWEEPABLE.contains(&sweep.param.as_str()) {
            return Err(CliError::config("sweep.param", format!("`{}` is not one of {}", sweep.param, SWEEPABLE.join(", "))));
        }
        if sweep.values.is_empty() {
            return Err(CliError::config("sweep.values", "at least one value is required"));
        }
        for (k, &v) in sweep.values.iter().enumerate() {
            config.with_param(&sweep.param, v).map_err(|e| match e {
                CliError::Config(msg) => CliError::config(&format!("sweep.values[{k}]"), msg),
                other => other,
            })?;
        }
    }
    Ok(config)
}

fn jc_param_error(e: oqs_core::Error) -> CliError {
    match e {
        oqs_core::Error::InvalidParameter { name: "upper_weight", reason } => CliError::config("params.initial.mixture", reason),
        oqs_core::Error::InvalidParameter { name, reason } => CliError::config(&format!("params.{name}"), reason),
        oqs_core::Error::NotPositive { .. } => CliError::config("params.g12", e),
        oqs_core::Error::InvalidState(_) => CliError::config("params.initial", e),
        oqs_core::Error::DimensionMismatch { .. } => CliError::config("params.initial", e),
        other => CliError::config("params", other),
    }
}

fn jc_system(model: ModelKind, raw: RawJc) -> Result<JcSystem> {
    let mut p = JcParams::default();
    match model {
        ModelKind::JcTwoBath => p.g12 = c(0.0, 0.0),
        ModelKind::JcMirror => p.k_mirror = 5.0 * p.g11,
        _ => {}
    }
    if let Some(v) = raw.omega0 {
        p.omega0 = v;
    }
    if let Some(v) = raw.eps {
        p.eps = v.value();
    }
    if let Some(v) = raw.g11 {
        p.g11 = v;
    }
    if let Some(v) = raw.g22 {
        p.g22 = v;
    }
    if let Some(v) = raw.g12 {
        p.g12 = v.value();
    }
    if let Some(v) = raw.k_mirror {
        p.k_mirror = v;
    }
    if let Some(n) = raw.n_exc {
        p.n_exc = n;
        p.n_max = n + 2;
    }
    if let Some(v) = raw.n_max {
        p.n_max = v;
    }
    check_model_params(model, &p)?;
    p.validate().map_err(jc_param_error)?;

    let initial = match raw.initial {
        None | Some(RawInitial::Upper) => BlockInitial::Upper,
        Some(RawInitial::Lower) => BlockInitial::Lower,
        Some(RawInitial::Mixture(w)) => BlockInitial::Mixture { upper_weight: w },
        Some(RawInitial::Block(m)) => BlockInitial::Block(matrix("params.initial.block", &m, Some(2))?),
    };
    let basis = match raw.basis {
        None | Some(RawBasis::Bare) => EigenBasis::Bare,
        Some(RawBasis::Dressed) => EigenBasis::Dressed,
    };
    let lamb = raw.lamb.as_ref().map(|m| matrix("params.lamb", m, Some(2))).transpose()?;
    let system = JcSystem { params: p, initial, basis, lamb };
    let model = system.build().map_err(jc_param_error)?;
    model.initial_state(&system.initial).map_err(jc_param_error)?;
    Ok(system)
}

fn check_model_params(model: ModelKind, p: &JcParams) -> Result<()> {
    if model == ModelKind::JcTwoBath && p.g12.norm() != 0.0 {
        return Err(CliError::config("params.g12", "jc-two-bath has independent baths, so g12 must be 0"));
    }
    if model != ModelKind::JcMirror && p.k_mirror != 0.0 {
        return Err(CliError::config("params.k_mirror", "only jc-mirror has a mirror bath"));
    }
    Ok(())
}

fn custom_system(raw: RawCustom) -> Result<CustomSystem> {
    let space = HilbertSpace::new(raw.dims.clone()).map_err(|e| CliError::config("params.dims", e))?;
    let d = space.total_dim();
    let hamiltonian = matrix("params.hamiltonian", &raw.hamiltonian, Some(d))?;
    if raw.couplings.is_empty() {
        return Err(CliError::config("params.couplings", "at least one coupling operator is required"));
    }
    let couplings = raw
        .couplings
        .iter()
        .enumerate()
        .map(|(k, m)| matrix(&format!("params.couplings[{k}]"), m, Some(d)))
        .collect::<Result<Vec<_>>>()?;
    let channels = couplings.len();
    let mut entries = Vec::with_capacity(raw.tensor.len());
    for (k, e) in raw.tensor.iter().enumerate() {
        let path = format!("params.tensor[{k}]");
        if !e.omega.is_finite() {
            return Err(CliError::config(&format!("{path}.omega"), "must be finite"));
        }
        let gamma = matrix(&format!("{path}.gamma"), &e.gamma, Some(channels))?;
        let lamb = e.lamb.as_ref().map(|m| matrix(&format!("{path}.lamb"), m, Some(channels))).transpose()?;
        SpectralCorrelationTensor::new(channels, vec![TensorEntry { omega: e.omega, gamma: gamma.clone(), lamb: lamb.clone() }])
            .map_err(|err| CliError::config(&path, err))?;
        entries.push(TensorEntry { omega: e.omega, gamma, lamb });
    }
    let tensor = SpectralCorrelationTensor::new(channels, entries).map_err(|e| CliError::config("params.tensor", e))?;
    if let Some(beta) = raw.beta {
        if beta.is_nan() || beta <= 0.0 {
            return Err(CliError::config("params.beta", format!("{beta} must be positive")));
        }
    }
    let initial = match raw.initial {
        RawCustomInitial::Ket(v) => {
            if v.len() != d {
                return Err(CliError::config("params.initial.ket", format!("expected {d} amplitudes, found {}", v.len())));
            }
            CustomInitial::Ket(CVec::from_iterator(d, v.iter().map(|z| z.value())))
        }
        RawCustomInitial::Density(m) => CustomInitial::Density(matrix("params.initial.density", &m, Some(d))?),
    };
    let excitation = raw.excitation.as_ref().map(|m| matrix("params.excitation", m, Some(d))).transpose()?;
    let system = CustomSystem {
        space,
        hamiltonian,
        couplings,
        tensor,
        beta: raw.beta,
        lamb_shift: raw.lamb_shift,
        initial,
        excitation,
    };
    system.build().map_err(|e| CliError::config("params", e))?;
    system.initial_state().map_err(|e| CliError::config("params.initial", e))?;
    if let Some(op) = system.excitation_operator() {
        let op = op.map_err(|e| CliError::config("params.excitation", e))?;
        if !op.is_hermitian(1e-9) {
            return Err(CliError::config("params.excitation", "must be Hermitian"));
        }
    }
    Ok(system)
}

impl RunConfig {
    /// Checks that the engine, model and requested observables fit together.
    fn check_compatibility(&self) -> Result<()> {
        let engine = self.engine;
        match &self.system {
            System::Jc(jc) => {
                let n = jc.params.n_exc;
                if engine == Engine::ClosedForm {
                    if n != 1 {
                        return Err(CliError::config("engine", "closed-form needs params.n_exc = 1"));
                    }
                    if jc.basis != EigenBasis::Bare || jc.lamb.is_some() {
                        return Err(CliError::config("engine", "closed-form needs the bare basis and no Lamb shift"));
                    }
                }
                for (k, o) in self.outputs.iter().enumerate() {
                    let path = format!("outputs[{k}]");
                    match o {
                        Observable::Concurrence if n > 1 => {
                            return Err(CliError::config(&path, "concurrence is defined for n_exc ≤ 1"));
                        }
                        Observable::ConditionalState if n == 0 => {
                            return Err(CliError::config(&path, "conditional-state needs n_exc ≥ 1"));
                        }
                        Observable::ConditionalState if engine == Engine::Integrate => {
                            return Err(CliError::config(&path, "conditional-state needs engine nud, mcwf or closed-form"));
                        }
                        _ => {}
                    }
                }
            }
            System::Custom(custom) => {
                if engine == Engine::ClosedForm {
                    return Err(CliError::config("engine", "closed-form is available for the jc-* models only"));
                }
                if engine == Engine::Nud {
                    if custom.excitation.is_none() {
                        return Err(CliError::config("params.excitation", "engine nud needs an excitation operator"));
                    }
                    if custom.beta.is_some() && custom.tensor.has_negative_frequencies() {
                        return Err(CliError::config("engine", "nud needs a tensor without negative frequencies"));
                    }
                }
                for (k, o) in self.outputs.iter().enumerate() {
                    let path = format!("outputs[{k}]");
                    match o {
                        Observable::Concurrence if !custom.is_qubit_pair() => {
                            return Err(CliError::config(&path, "concurrence needs params.dims = [2, 2]"));
                        }
                        Observable::Blocks if engine != Engine::Nud => {
                            return Err(CliError::config(&path, "blocks on custom-tensor needs engine nud"));
                        }
                        Observable::ConditionalState if !matches!(engine, Engine::Nud | Engine::Mcwf) => {
                            return Err(CliError::config(&path, "conditional-state needs engine nud or mcwf"));
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy with one Jaynes-Cummings parameter replaced, revalidated.
    pub fn with_param(&self, param: &str, value: f64) -> Result<RunConfig> {
        let System::Jc(jc) = &self.system else {
            return Err(CliError::config("sweep", "sweeps are available for the jc-* models only"));
        };
        let mut jc = jc.clone();
        let p = &mut jc.params;
        match param {
            "omega0" => p.omega0 = value,
            "eps" => p.eps = c(value, 0.0),
            "g11" => p.g11 = value,
            "g22" => p.g22 = value,
            "g12" => p.g12 = c(value, 0.0),
            "k_mirror" => p.k_mirror = value,
            other => return Err(CliError::config("sweep.param", format!("`{other}` cannot be swept"))),
        }
        check_model_params(self.model, p)?;
        p.validate().map_err(jc_param_error)?;
        jc.build().map_err(jc_param_error)?;
        let mut out = self.clone();
        out.system = System::Jc(jc);
        out.sweep = None;
        Ok(out)
    }

    /// One configuration per sweep value, each with a suffixed name.
    pub fn sweep_points(&self) -> Result<Vec<RunConfig>> {
        let Some(sweep) = &self.sweep else {
            return Err(CliError::config("sweep", "the config declares no sweep"));
        };
        sweep
            .values
            .iter()
            .map(|&v| {
                let mut point = self.with_param(&sweep.param, v)?;
                point.name = format!("{}_{}_{}", self.name, sweep.param, v);
                Ok(point)
            })
            .collect()
    }

    pub fn jc(&self) -> Option<&JcSystem> {
        match &self.system {
            System::Jc(jc) => Some(jc),
            System::Custom(_) => None,
        }
    }
}
