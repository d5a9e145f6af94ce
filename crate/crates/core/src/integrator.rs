//! Fixed-step classic Runge-Kutta driver for linear matrix-valued systems.

use crate::error::{Error, Result};
use crate::linalg::{r, CMat, CVec, ONE};
use std::collections::HashMap;

/// Upper bound on substeps per grid interval before the step is declared to
/// have underflowed.
pub const MAX_SUBSTEPS: usize = 50_000_000;

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidGrid);
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// Uniform grid of `n_steps + 1` points on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, n_steps: usize) -> Vec<f64> {
    (0..=n_steps).map(|k| t_end * k as f64 / n_steps as f64).collect()
}

/// Number of equal substeps needed to cover `dt` with steps no longer than `h_max`.
pub fn substeps(dt: f64, h_max: f64) -> usize {
    if !h_max.is_finite() {
        return 1;
    }
    ((dt / h_max).ceil() as usize).max(1)
}

fn axpy(y: &[CMat], h: f64, k: &[CMat]) -> Vec<CMat> {
    y.iter().zip(k).map(|(a, b)| a + b * r(h)).collect()
}

/// Integrates `y' = f(y)` from `grid[0]`, recording the state at every grid
/// point. Each interval is split into the fewest equal substeps of length at
/// most `h_max`.
pub fn rk4_on_grid<F>(y0: Vec<CMat>, grid: &[f64], h_max: f64, f: F) -> Result<Vec<Vec<CMat>>>
where
    F: Fn(&[CMat]) -> Vec<CMat>,
{
    validate_grid(grid)?;
    if h_max.is_nan() || h_max <= 0.0 {
        return Err(Error::StepUnderflow { time: grid[0], reason: format!("step bound {h_max} is not positive") });
    }
    let mut out = Vec::with_capacity(grid.len());
    let mut y = y0;
    out.push(y.clone());
    for w in grid.windows(2) {
        let dt = w[1] - w[0];
        let n = substeps(dt, h_max);
        if n > MAX_SUBSTEPS {
            return Err(Error::StepUnderflow {
                time: w[0],
                reason: format!("{n} substeps needed for an interval of {dt}"),
            });
        }
        let h = dt / n as f64;
        for _ in 0..n {
            let k1 = f(&y);
            let k2 = f(&axpy(&y, 0.5 * h, &k1));
            let k3 = f(&axpy(&y, 0.5 * h, &k2));
            let k4 = f(&axpy(&y, h, &k3));
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += (&k1[i] + (&k2[i] + &k3[i]) * r(2.0) + &k4[i]) * r(h / 6.0);
            }
        }
        if y.iter().any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::StepUnderflow { time: w[1], reason: "state became non-finite".into() });
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Largest flattened state for which [`rk4_linear_on_grid`] assembles the
/// one-step matrix; bigger systems are stepped directly.
pub const PROPAGATOR_MAX_STATE: usize = 320;

fn flatten(y: &[CMat]) -> CVec {
    CVec::from_iterator(y.iter().map(|m| m.len()).sum(), y.iter().flat_map(|m| m.iter().copied()))
}

fn unflatten(v: &CVec, shapes: &[(usize, usize)]) -> Vec<CMat> {
    let mut offset = 0;
    shapes
        .iter()
        .map(|&(rows, cols)| {
            let m = CMat::from_column_slice(rows, cols, &v.as_slice()[offset..offset + rows * cols]);
            offset += rows * cols;
            m
        })
        .collect()
}

fn matrix_power(base: &CMat, mut n: usize) -> CMat {
    let mut result = CMat::identity(base.nrows(), base.ncols());
    let mut square = base.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &square;
        }
        n >>= 1;
        if n > 0 {
            square = &square * &square;
        }
    }
    result
}

/// Same scheme as [`rk4_on_grid`] for a linear, time-independent `f`. For a
/// linear right-hand side `S y` one RK4 step is the polynomial
/// `1 + hS + (hS)²/2 + (hS)³/6 + (hS)⁴/24`, so the step matrix is assembled once
/// and raised to the substep count of each interval.
pub fn rk4_linear_on_grid<F>(y0: Vec<CMat>, grid: &[f64], h_max: f64, f: F) -> Result<Vec<Vec<CMat>>>
where
    F: Fn(&[CMat]) -> Vec<CMat>,
{
    let size: usize = y0.iter().map(|m| m.len()).sum();
    if size > PROPAGATOR_MAX_STATE {
        return rk4_on_grid(y0, grid, h_max, f);
    }
    validate_grid(grid)?;
    if h_max.is_nan() || h_max <= 0.0 {
        return Err(Error::StepUnderflow { time: grid[0], reason: format!("step bound {h_max} is not positive") });
    }
    let shapes: Vec<(usize, usize)> = y0.iter().map(|m| m.shape()).collect();
    let mut generator = CMat::zeros(size, size);
    for j in 0..size {
        let mut e = CVec::zeros(size);
        e[j] = ONE;
        generator.set_column(j, &flatten(&f(&unflatten(&e, &shapes))));
    }
    let mut cache: HashMap<(usize, u64), CMat> = HashMap::new();
    let mut y = flatten(&y0);
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0);
    for w in grid.windows(2) {
        let dt = w[1] - w[0];
        let n = substeps(dt, h_max);
        if n > MAX_SUBSTEPS {
            return Err(Error::StepUnderflow {
                time: w[0],
                reason: format!("{n} substeps needed for an interval of {dt}"),
            });
        }
        let h = dt / n as f64;
        let propagator = cache.entry((n, h.to_bits())).or_insert_with(|| {
            let hs = &generator * r(h);
            let mut step = CMat::identity(size, size);
            let mut term = CMat::identity(size, size);
            for k in 1..=4 {
                term = &term * &hs * r(1.0 / k as f64);
                step += &term;
            }
            matrix_power(&step, n)
        });
        y = &*propagator * &y;
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::StepUnderflow { time: w[1], reason: "state became non-finite".into() });
        }
        out.push(unflatten(&y, &shapes));
    }
    Ok(out)
}
