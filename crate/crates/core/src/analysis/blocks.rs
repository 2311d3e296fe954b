//! Smoothness norms: exact mixed Sobolev norms from Fourier coefficients,
//! Littlewood–Paley and Besov norms built from the blocks `q_k(f)`, and
//! mixed differences.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::norms::{check_exponent, lq_mean};
use crate::error::{Error, Result};
use crate::hier::HierCoeffs;
use crate::laurent::{binomial_rational, rational_to_f64};
use crate::quasi_interp::decompose_fn;
use crate::scheme::QIScheme;

/// `(Σ_s |f̂(s)|² Π_j (1 + |s_j|²)^r)^{1/2}`.
pub fn sobolev_norm_fourier(coeffs: &BTreeMap<Vec<i64>, Complex64>, r: f64) -> f64 {
    coeffs
        .iter()
        .map(|(s, c)| c.norm_sqr() * s.iter().map(|&sj| (1.0 + (sj * sj) as f64).powf(r)).product::<f64>())
        .sum::<f64>()
        .sqrt()
}

fn grid_shape(coeffs: &HierCoeffs, resolution: usize) -> Result<Vec<usize>> {
    let required = 1usize << (coeffs.max_level() + 2);
    if resolution < required {
        return Err(Error::ResolutionTooLow { resolution, required });
    }
    Ok(vec![resolution; coeffs.dim()])
}

/// `‖(Σ_k |2^{r|k|₁} q_k|²)^{1/2}‖_p` for the blocks stored in `coeffs`.
pub fn lp_block_norm_of(coeffs: &HierCoeffs, r: f64, p: f64, resolution: usize) -> Result<f64> {
    check_exponent(p)?;
    let shape = grid_shape(coeffs, resolution)?;
    let mut square = vec![0.0; shape.iter().product()];
    coeffs.for_each_block_on_grid(&shape, |k, block| {
        let w = 2f64.powf(r * k.norm1() as f64);
        for (acc, v) in square.iter_mut().zip(block) {
            *acc += (w * v).powi(2);
        }
    });
    square.iter_mut().for_each(|v| *v = v.sqrt());
    Ok(lq_mean(&square, p))
}

/// [`lp_block_norm_of`] applied to `R_m(f)`.
#[allow(clippy::too_many_arguments)]
pub fn lp_block_norm(
    f: impl Fn(&[f64]) -> f64,
    scheme: &QIScheme,
    d: usize,
    r: f64,
    p: f64,
    m: u32,
    resolution: usize,
) -> Result<f64> {
    lp_block_norm_of(&decompose_fn(scheme, f, d, m)?, r, p, resolution)
}

/// `(Σ_k (2^{r|k|₁} ‖q_k‖_p)^θ)^{1/θ}`, a supremum for `θ = ∞`.
pub fn besov_block_norm_of(coeffs: &HierCoeffs, r: f64, p: f64, theta: f64, resolution: usize) -> Result<f64> {
    if !(p > 0.0 && theta > 0.0) {
        return Err(Error::InvalidArgument(format!("need p, θ > 0, got p = {p}, θ = {theta}")));
    }
    let shape = grid_shape(coeffs, resolution)?;
    let mut terms = Vec::new();
    coeffs.for_each_block_on_grid(&shape, |k, block| {
        terms.push(2f64.powf(r * k.norm1() as f64) * lq_mean(block, p));
    });
    Ok(if theta.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else {
        terms.iter().map(|t| t.powf(theta)).sum::<f64>().powf(1.0 / theta)
    })
}

/// [`besov_block_norm_of`] applied to `R_m(f)`.
#[allow(clippy::too_many_arguments)]
pub fn besov_block_norm(
    f: impl Fn(&[f64]) -> f64,
    scheme: &QIScheme,
    d: usize,
    r: f64,
    p: f64,
    theta: f64,
    m: u32,
    resolution: usize,
) -> Result<f64> {
    besov_block_norm_of(&decompose_fn(scheme, f, d, m)?, r, p, theta, resolution)
}

/// The mixed difference `Π_{i∈u} Δ^ℓ_{h_i}` of `f` at `x`, with
/// `Δ^ℓ_h f(x) = Σ_j (-1)^{ℓ-j} C(ℓ,j) f(x + j h)`. `u = ∅` gives `f(x)`.
pub fn difference(f: &dyn Fn(&[f64]) -> f64, ell: u32, u: &[usize], h: &[f64], x: &[f64]) -> f64 {
    let Some((&axis, rest)) = u.split_first() else {
        return f(x);
    };
    let mut y = x.to_vec();
    (0..=ell)
        .map(|j| {
            let sign = if (ell - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            y[axis] = x[axis] + j as f64 * h[axis];
            sign * rational_to_f64(&binomial_rational(ell, j)) * difference(f, ell, rest, h, &y)
        })
        .sum()
}
