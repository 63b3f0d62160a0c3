//! Central finite differences: the independent oracle for the AD jets.

use super::diff::{Field, Var};
use super::sample::{ChartBox, TangentSample};
use crate::error::{Error, Result};

/// Relative step for first order stencils.
pub const STEP_LOW_ORDER: f64 = 1e-5;
/// Relative step for second order stencils. At `1e-5` the round-off of the
/// four-point stencil, about `ε|f|/h²`, is already of order `1e-5·|f|`.
pub const STEP_SECOND_ORDER: f64 = 1e-4;
/// Base step for third order stencils, used with one Richardson level.
pub const STEP_THIRD_ORDER: f64 = 1e-3;

/// Default step for a stencil of total order `order`.
pub fn default_step(order: usize) -> f64 {
    match order {
        0 | 1 => STEP_LOW_ORDER,
        2 => STEP_SECOND_ORDER,
        _ => STEP_THIRD_ORDER,
    }
}

/// The oracle used to validate AD jets: central differences at
/// [`default_step`], with the third-order stencil extrapolated from `h` and
/// `h/2` to remove its `O(h²)` term.
pub fn fd_reference<F: Field>(
    field: &F,
    s: &TangentSample,
    multi_index: &[Var],
    chart: Option<&ChartBox>,
) -> Result<f64> {
    let h = default_step(multi_index.len());
    if multi_index.len() < 3 {
        return fd_oracle(field, s, multi_index, h, chart);
    }
    let coarse = fd_oracle(field, s, multi_index, h, chart)?;
    let fine = fd_oracle(field, s, multi_index, 0.5 * h, chart)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Central-difference estimate of the mixed partial `∂^k f / ∂v_1 … ∂v_k`.
///
/// Each slot `v` gets its own step `h_v = step·(1 + |coordinate|)`; the
/// stencil is the tensor product of two-point central differences, so the
/// truncation error is `O(step²)`. Stencil points must stay inside `chart`
/// (when given).
pub fn fd_oracle<F: Field>(
    field: &F,
    s: &TangentSample,
    multi_index: &[Var],
    step: f64,
    chart: Option<&ChartBox>,
) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {step}"
        )));
    }
    if multi_index.len() > 3 {
        return Err(Error::InvalidArgument(format!(
            "finite-difference order {} exceeds 3",
            multi_index.len()
        )));
    }
    let n = s.dim();
    if let Some(&v) = multi_index.iter().find(|v| match v {
        Var::X(k) | Var::Y(k) => *k >= n,
    }) {
        return Err(Error::InvalidArgument(format!(
            "index {v:?} out of range for n = {n}"
        )));
    }
    let steps: Vec<f64> = multi_index
        .iter()
        .map(|v| {
            let c = match *v {
                Var::X(k) => s.x[k],
                Var::Y(k) => s.y[k],
            };
            step * (1.0 + c.abs())
        })
        .collect();

    let k = multi_index.len();
    let mut acc = 0.0;
    let mut x = s.x.clone();
    let mut y = s.y.clone();
    for signs in 0..(1usize << k) {
        x.copy_from_slice(&s.x);
        y.copy_from_slice(&s.y);
        let mut weight = 1.0;
        for (slot, (v, h)) in multi_index.iter().zip(&steps).enumerate() {
            let sgn = if signs >> slot & 1 == 1 { -1.0 } else { 1.0 };
            weight *= sgn;
            match *v {
                Var::X(i) => x[i] += sgn * h,
                Var::Y(i) => y[i] += sgn * h,
            }
        }
        if let Some(chart) = chart {
            if !chart.contains(&x) {
                return Err(Error::DomainExit { x });
            }
        }
        acc += weight * field.eval(&x, &y);
    }
    let denom: f64 = steps.iter().map(|h| 2.0 * h).product();
    let v = acc / denom;
    if !v.is_finite() {
        return Err(Error::NumericalBreakdown {
            path: format!("fd{multi_index:?}"),
        });
    }
    Ok(v)
}
