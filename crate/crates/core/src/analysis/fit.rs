//! Least-squares fits of `err(m) ≈ C 2^{-ρ m} m^β`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of levels a fit accepts.
pub const MIN_LEVELS: usize = 4;

/// Levels dropped from the coarse end by [`fit_rate_default`].
pub const DEFAULT_DROP: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateModel {
    /// `C 2^{-ρ m}`.
    PureDyadic,
    /// `C 2^{-ρ m} m^β`, with `β` fixed (`Some`) or fitted (`None`).
    DyadicLogPow { beta: Option<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rho: f64,
    pub beta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    /// Largest `|fit(m) / err(m) - 1|` over the fitted levels.
    pub residual: f64,
    pub range: [u32; 2],
}

impl RateFit {
    pub fn predict(&self, m: u32) -> f64 {
        let log = if self.beta == 0.0 { 0.0 } else { self.beta * (m as f64).log2() };
        self.c * 2f64.powf(-self.rho * m as f64 + log)
    }
}

/// Fits `log₂ err = log₂ C - ρ m + β log₂ m` over every level in `errors`.
pub fn fit_rate(errors: &BTreeMap<u32, f64>, model: RateModel) -> Result<RateFit> {
    if errors.len() < MIN_LEVELS {
        return Err(Error::DegenerateFit(format!("{} levels, need at least {MIN_LEVELS}", errors.len())));
    }
    if let Some((m, e)) = errors.iter().find(|(_, e)| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::DegenerateFit(format!("error at m = {m} is {e}, need a positive finite value")));
    }
    let values: Vec<f64> = errors.values().copied().collect();
    if values.windows(2).all(|w| w[1] >= w[0]) {
        return Err(Error::DegenerateFit("errors never decrease".into()));
    }
    let uses_log = !matches!(model, RateModel::PureDyadic);
    if uses_log && errors.contains_key(&0) {
        return Err(Error::DegenerateFit("log-power models need m ≥ 1".into()));
    }

    // columns: 1, -m, log₂ m
    let free_beta = matches!(model, RateModel::DyadicLogPow { beta: None });
    let fixed_beta = match model {
        RateModel::DyadicLogPow { beta: Some(b) } => b,
        _ => 0.0,
    };
    let rows: Vec<(Vec<f64>, f64)> = errors
        .iter()
        .map(|(&m, &e)| {
            let lm = if uses_log { (m as f64).log2() } else { 0.0 };
            let mut x = vec![1.0, -(m as f64)];
            if free_beta {
                x.push(lm);
            }
            (x, e.log2() - fixed_beta * lm)
        })
        .collect();
    let coef = least_squares(&rows)?;
    let fit = RateFit {
        rho: coef[1],
        beta: if free_beta { coef[2] } else { fixed_beta },
        c: 2f64.powf(coef[0]),
        residual: 0.0,
        range: [*errors.keys().next().unwrap(), *errors.keys().last().unwrap()],
    };
    let residual = errors.iter().map(|(&m, &e)| (fit.predict(m) / e - 1.0).abs()).fold(0.0, f64::max);
    Ok(RateFit { residual, ..fit })
}

/// [`fit_rate`] after dropping up to [`DEFAULT_DROP`] of the coarsest
/// levels, never leaving fewer than [`MIN_LEVELS`].
pub fn fit_rate_default(errors: &BTreeMap<u32, f64>, model: RateModel) -> Result<RateFit> {
    let drop = DEFAULT_DROP.min(errors.len().saturating_sub(MIN_LEVELS));
    let kept: BTreeMap<u32, f64> = errors.iter().skip(drop).map(|(&m, &e)| (m, e)).collect();
    fit_rate(&kept, model)
}

/// Solves the normal equations by Gaussian elimination with partial pivoting.
fn least_squares(rows: &[(Vec<f64>, f64)]) -> Result<Vec<f64>> {
    let n = rows[0].0.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (x, y) in rows {
        for i in 0..n {
            for j in 0..n {
                a[i][j] += x[i] * x[j];
            }
            a[i][n] += x[i] * y;
        }
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::DegenerateFit("singular design matrix".into()));
        }
        a.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let factor = a[row][col] / a[col][col];
                for j in col..=n {
                    a[row][j] -= factor * a[col][j];
                }
            }
        }
    }
    Ok((0..n).map(|i| a[i][n] / a[i][i]).collect())
}
