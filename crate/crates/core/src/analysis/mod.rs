//! Measurement: norms, smoothness block norms, differences and rate fits.

mod blocks;
mod fit;
mod norms;

pub use blocks::{
    besov_block_norm, besov_block_norm_of, difference, lp_block_norm, lp_block_norm_of, sobolev_norm_fourier,
};
pub use fit::{fit_rate, fit_rate_default, RateFit, RateModel, DEFAULT_DROP, MIN_LEVELS};
pub use norms::{
    coeffs_lq_norm, default_resolution, lq_mean, lq_norm, qmc_points, residual_norm, residual_norm_on_grid, uniform_grid,
    NormEstimate, DEFAULT_QMC_SAMPLES, MAX_GRID_DIM,
};

/// The exponent ρ of `sup ‖f - R_m f‖_q ≍ 2^{-ρ m} (log)^β` over the unit
/// ball of mixed smoothness `r` in `L_p`: `r` for `p ≥ q`, `r - 1/p + 1/q`
/// for `p < q` (`r - 1/p` when `q = ∞`).
pub fn theoretical_rate(r: f64, p: f64, q: f64) -> f64 {
    if p >= q {
        r
    } else {
        r - 1.0 / p + 1.0 / q
    }
}

/// The matching power of `m`: `(d-1)/2` for `p ≥ q`, none for `p < q < ∞`,
/// `(d-1)(1 - 1/p)` for `q = ∞`.
pub fn theoretical_log_power(d: usize, p: f64, q: f64) -> f64 {
    let d1 = d as f64 - 1.0;
    if q.is_infinite() {
        d1 * (1.0 - 1.0 / p)
    } else if p >= q {
        d1 / 2.0
    } else {
        0.0
    }
}
