//! Central finite differences with Richardson extrapolation.

use serde::{Deserialize, Serialize};

use super::expr::ScalarExpr;
use crate::error::{Error, Result};

/// Step and extrapolation depth for numerical derivatives.
///
/// `step = None` picks a default per total derivative order: `1e-4` for first
/// derivatives, `1e-2` for second and third, `2e-2` for fourth. The step used
/// on axis `i` is `h * max(1, |x_i|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdPolicy {
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    2
}

impl Default for FdPolicy {
    fn default() -> Self {
        FdPolicy { step: None, levels: default_levels() }
    }
}

impl FdPolicy {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Invalid(format!("finite-difference step must be positive, got {h}")));
            }
        }
        if self.levels == 0 {
            return Err(Error::Invalid("Richardson levels must be at least 1".into()));
        }
        Ok(())
    }

    pub fn step_for_order(&self, order: usize) -> f64 {
        self.step.unwrap_or(match order {
            0 | 1 => 1e-4,
            2 | 3 => 1e-2,
            _ => 2e-2,
        })
    }
}

/// Offsets (in units of h) and weights of the central stencil for `d^m/dx^m`.
fn stencil(order: usize) -> (&'static [f64], &'static [f64]) {
    match order {
        1 => (&[-1.0, 1.0], &[-0.5, 0.5]),
        2 => (&[-1.0, 0.0, 1.0], &[1.0, -2.0, 1.0]),
        3 => (&[-2.0, -1.0, 1.0, 2.0], &[-0.5, 1.0, -1.0, 0.5]),
        4 => (&[-2.0, -1.0, 0.0, 1.0, 2.0], &[1.0, -4.0, 6.0, -4.0, 1.0]),
        _ => unreachable!("stencil order {order}"),
    }
}

/// Per-axis derivative orders of a multi-index, sorted by axis.
fn axis_orders(dim: usize, multi_index: &[usize]) -> Result<Vec<(usize, usize)>> {
    let mut counts = vec![0usize; dim];
    for &a in multi_index {
        if a >= dim {
            return Err(Error::Invalid(format!("derivative axis {a} out of range for dimension {dim}")));
        }
        counts[a] += 1;
    }
    Ok(counts.into_iter().enumerate().filter(|&(_, m)| m > 0).collect())
}

fn tensor_stencil<F>(f: &F, x: &[f64], axes: &[(usize, usize)], steps: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let stencils: Vec<_> = axes.iter().map(|&(_, m)| stencil(m)).collect();
    let mut idx = vec![0usize; axes.len()];
    let mut point = x.to_vec();
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for (a, &(axis, _)) in axes.iter().enumerate() {
            let (offsets, weights) = stencils[a];
            point[axis] = x[axis] + offsets[idx[a]] * steps[a];
            w *= weights[idx[a]];
        }
        if w != 0.0 {
            total += w * f(&point)?;
        }
        let mut a = 0;
        loop {
            if a == axes.len() {
                let denom: f64 = axes.iter().zip(steps).map(|(&(_, m), h)| h.powi(m as i32)).product();
                return Ok(total / denom);
            }
            idx[a] += 1;
            if idx[a] < stencils[a].0.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Mixed partial derivative of `f` at `x` along the axes in `multi_index`.
///
/// The result depends only on the multiset of axes, so permuted multi-indices
/// give bitwise identical values. Each axis may appear at most four times.
pub fn partial<F>(f: &F, x: &[f64], multi_index: &[usize], policy: &FdPolicy) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    policy.validate()?;
    let axes = axis_orders(x.len(), multi_index)?;
    if axes.is_empty() {
        return f(x);
    }
    if let Some(&(axis, m)) = axes.iter().find(|&&(_, m)| m > 4) {
        return Err(Error::Invalid(format!("order {m} along axis {axis} exceeds supported stencils")));
    }
    let h = policy.step_for_order(multi_index.len());
    let base: Vec<f64> = axes.iter().map(|&(axis, _)| h * x[axis].abs().max(1.0)).collect();

    // Central stencils have even error expansions in h, so halving the step
    // and eliminating h^2, h^4, ... in turn is the standard Richardson table.
    let mut row: Vec<f64> = Vec::with_capacity(policy.levels + 1);
    for k in 0..=policy.levels {
        let scale = 0.5_f64.powi(k as i32);
        let steps: Vec<f64> = base.iter().map(|s| s * scale).collect();
        let mut d = tensor_stencil(f, x, &axes, &steps)?;
        let mut factor = 1.0;
        for prev in row.iter_mut() {
            factor *= 4.0;
            let next = d + (d - *prev) / (factor - 1.0);
            *prev = d;
            d = next;
        }
        row.push(d);
    }
    Ok(*row.last().expect("levels >= 1"))
}

/// Numerical derivative of a scalar expression, up to third order.
pub fn derive_fd(e: &ScalarExpr, x: &[f64], multi_index: &[usize], policy: &FdPolicy) -> Result<f64> {
    if x.len() != e.dim() {
        return Err(Error::DimensionMismatch { expected: e.dim(), actual: x.len() });
    }
    if multi_index.len() > 3 {
        return Err(Error::Invalid(format!("derivative order {} exceeds 3", multi_index.len())));
    }
    partial(&|p: &[f64]| e.eval(p), x, multi_index, policy)
}
