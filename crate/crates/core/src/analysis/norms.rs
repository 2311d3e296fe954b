//! `L_q(T^d)` norms by periodic trapezoid rule or quasi-Monte Carlo.

use crate::error::{Error, Result};
use crate::hier::HierCoeffs;
use crate::tensor::{pairwise_sum, unflatten};

/// Above this dimension quadrature switches from tensor grids to sampling.
pub const MAX_GRID_DIM: usize = 3;

/// Default number of QMC samples for `d > MAX_GRID_DIM`.
pub const DEFAULT_QMC_SAMPLES: usize = 200_000;

/// Independent random shifts used to estimate the QMC standard error.
const QMC_SHIFTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    /// Zero for grid quadrature.
    pub std_error: f64,
}

pub(crate) fn check_exponent(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidArgument(format!("norm exponent must be ≥ 1, got {q}")));
    }
    Ok(())
}

/// `(mean |v|^q)^{1/q}`, or `max |v|` for `q = ∞`.
pub fn lq_mean(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    if q.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let scale = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    // scaling keeps |v|^q representable for large q
    let powered: Vec<f64> = values.iter().map(|v| (v.abs() / scale).powf(q)).collect();
    scale * (pairwise_sum(&powered) / values.len() as f64).powf(1.0 / q)
}

/// Per-axis grid resolution used for level-`m` residuals.
pub fn default_resolution(d: usize, m: u32) -> usize {
    match d {
        0..=2 => 1 << (m + 3),
        3 => 1 << (m + 2),
        _ => DEFAULT_QMC_SAMPLES,
    }
}

/// The points `{i / res}^d`, row-major.
pub fn uniform_grid(d: usize, res: usize) -> impl Iterator<Item = Vec<f64>> {
    let shape = vec![res; d];
    let total = res.pow(d as u32);
    let mut idx = vec![0; d];
    (0..total).map(move |flat| {
        unflatten(flat, &shape, &mut idx);
        idx.iter().map(|&i| i as f64 / res as f64).collect()
    })
}

/// Randomly shifted rank-1 lattice points from the additive recurrence with
/// the generalized golden ratio, in `QMC_SHIFTS` groups.
pub fn qmc_points(d: usize, samples: usize, seed: u64) -> Vec<Vec<Vec<f64>>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    // φ_d solves x^{d+1} = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=d).map(|j| phi.powi(-(j as i32)).fract()).collect();
    let per = samples.div_ceil(QMC_SHIFTS).max(1);
    (0..QMC_SHIFTS)
        .map(|_| {
            let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            (1..=per)
                .map(|n| (0..d).map(|j| (shift[j] + n as f64 * alpha[j]).fract()).collect())
                .collect()
        })
        .collect()
}

fn qmc_estimate(groups: &[Vec<f64>], q: f64) -> NormEstimate {
    if q.is_infinite() {
        let value = groups.iter().map(|g| lq_mean(g, q)).fold(0.0, f64::max);
        return NormEstimate { value, std_error: 0.0 };
    }
    let all: Vec<f64> = groups.concat();
    let value = lq_mean(&all, q);
    let per: Vec<f64> = groups.iter().map(|g| lq_mean(g, q)).collect();
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    let var = per.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (per.len() as f64 - 1.0).max(1.0);
    NormEstimate { value, std_error: (var / per.len() as f64).sqrt() }
}

/// `‖f‖_q` on `T^d`. For `d ≤ 3`, `resolution` is points per axis of a
/// periodic trapezoid grid; otherwise it is the number of QMC samples.
pub fn lq_norm(f: impl Fn(&[f64]) -> f64, q: f64, d: usize, resolution: usize) -> Result<NormEstimate> {
    check_exponent(q)?;
    if resolution == 0 || d == 0 {
        return Err(Error::InvalidArgument("resolution and dimension must be positive".into()));
    }
    if d <= MAX_GRID_DIM {
        let values: Vec<f64> = uniform_grid(d, resolution).map(|x| f(&x)).collect();
        return Ok(NormEstimate { value: lq_mean(&values, q), std_error: 0.0 });
    }
    let groups: Vec<Vec<f64>> =
        qmc_points(d, resolution, 0x5eed).iter().map(|g| g.iter().map(|x| f(x)).collect()).collect();
    Ok(qmc_estimate(&groups, q))
}

fn guard(approx: &HierCoeffs, resolution: usize) -> Result<()> {
    let required = 1usize << (approx.max_level() + 2);
    if resolution < required {
        return Err(Error::ResolutionTooLow { resolution, required });
    }
    Ok(())
}

/// `‖f - approx‖_q`, refusing grids coarser than `2^{m+2}` per axis.
pub fn residual_norm(
    f: impl Fn(&[f64]) -> f64,
    approx: &HierCoeffs,
    q: f64,
    resolution: usize,
) -> Result<NormEstimate> {
    check_exponent(q)?;
    let d = approx.dim();
    if d > MAX_GRID_DIM {
        let groups: Vec<Vec<f64>> = qmc_points(d, resolution, 0x5eed)
            .iter()
            .map(|g| g.iter().map(|x| f(x) - approx.eval(x)).collect())
            .collect();
        return Ok(qmc_estimate(&groups, q));
    }
    guard(approx, resolution)?;
    let target: Vec<f64> = uniform_grid(d, resolution).map(|x| f(&x)).collect();
    residual_norm_on_grid(&target, approx, q, resolution)
}

/// As [`residual_norm`], with `f` already sampled on `{i / resolution}^d`.
pub fn residual_norm_on_grid(target: &[f64], approx: &HierCoeffs, q: f64, resolution: usize) -> Result<NormEstimate> {
    check_exponent(q)?;
    guard(approx, resolution)?;
    let d = approx.dim();
    if target.len() != resolution.pow(d as u32) {
        return Err(Error::DimensionMismatch { expected: resolution.pow(d as u32), got: target.len() });
    }
    let mut diff = target.to_vec();
    approx.for_each_block_on_grid(&vec![resolution; d], |_, block| {
        for (r, b) in diff.iter_mut().zip(block) {
            *r -= b;
        }
    });
    Ok(NormEstimate { value: lq_mean(&diff, q), std_error: 0.0 })
}

/// `‖Σ_k q_k‖_q` of stored coefficients on a per-axis uniform grid.
pub fn coeffs_lq_norm(coeffs: &HierCoeffs, q: f64, res: &[usize]) -> Result<f64> {
    check_exponent(q)?;
    Ok(lq_mean(&coeffs.eval_grid(res), q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constants() {
        for q in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lq_norm(|_| 0.0, q, 2, 8).unwrap().value, 0.0);
            assert!((lq_norm(|_| 1.0, q, 2, 8).unwrap().value - 1.0).abs() < 1e-15);
            assert!((lq_norm(|_| 1.0, q, 5, 1000).unwrap().value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sine_two_norm() {
        let v = lq_norm(|x| (2.0 * PI * x[0]).sin(), 2.0, 1, 1 << 12).unwrap();
        assert!((v.value - 0.5f64.sqrt()).abs() < 1e-10);
        let sup = lq_norm(|x| (2.0 * PI * x[0]).sin(), f64::INFINITY, 1, 1 << 12).unwrap();
        assert!((sup.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qmc_reports_standard_error() {
        let f = |x: &[f64]| x.iter().map(|t| (2.0 * PI * t).cos()).sum::<f64>();
        // ‖f‖_2² = d / 2
        let est = lq_norm(f, 2.0, 4, 50_000).unwrap();
        assert!((est.value - 2f64.sqrt()).abs() < 1e-3, "{est:?}");
        assert!(est.std_error > 0.0 && est.std_error < 1e-2);
    }

    #[test]
    fn refining_the_grid_changes_little() {
        let f = |x: &[f64]| (2.0 * PI * x[0]).sin().abs().powf(1.5) * (1.0 + (2.0 * PI * x[1]).cos().powi(2));
        let a = lq_norm(f, 3.0, 2, 256).unwrap().value;
        let b = lq_norm(f, 3.0, 2, 512).unwrap().value;
        assert!((a - b).abs() / b < 0.01);
    }

    #[test]
    fn residual_guard() {
        let hc = HierCoeffs::new(1, 2, 5).unwrap();
        assert_eq!(
            residual_norm(|_| 0.0, &hc, 2.0, 64).unwrap_err(),
            Error::ResolutionTooLow { resolution: 64, required: 128 }
        );
        assert_eq!(residual_norm(|_| 2.0, &hc, 2.0, 128).unwrap().value, 2.0);
    }

    #[test]
    fn rejects_bad_exponent() {
        assert!(matches!(lq_norm(|_| 1.0, 0.5, 1, 4), Err(Error::InvalidArgument(_))));
    }
}
