//! End-to-end runs: recovery-rate benchmarks, witness sweeps and grid
//! cardinality tables. Each returns a serializable report that embeds its
//! resolved configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    coeffs_lq_norm, default_resolution, fit_rate_default, residual_norm, residual_norm_on_grid, theoretical_log_power,
    theoretical_rate, RateFit, RateModel, MAX_GRID_DIM,
};
use crate::bspline::level_size;
use crate::dyadic::point_to_f64;
use crate::error::{Error, Result};
use crate::hier::HierCoeffs;
use crate::quasi_interp::{decompose, FnSource, LatticeSource};
use crate::scheme::QIScheme;
use crate::smolyak::{count_points, enumerate_grid, finest_lattice};
use crate::testfuncs::{mixed_smooth, witness_g1, witness_g2, Phases, TrigFunction};

/// Largest lattice sampled through the FFT path instead of pointwise.
const MAX_FFT_POINTS: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fixture {
    Random,
    Coherent,
    /// Coherent when `q > p`, random otherwise.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub d: usize,
    pub r_eff: f64,
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub m_lo: u32,
    pub m_hi: u32,
    pub seed: u64,
    /// Per-axis grid points (`d ≤ 3`) or QMC samples; `None` for the defaults.
    pub resolution: Option<usize>,
    pub fixture: Fixture,
    /// Hyperbolic-cross truncation of the fixture; `None` for the default.
    pub k_max: Option<u64>,
}

impl BenchConfig {
    pub fn new(d: usize, r_eff: f64, p: f64, q: f64, m_lo: u32, m_hi: u32) -> Self {
        Self { d, r_eff, p, q, m_lo, m_hi, seed: 1, resolution: None, fixture: Fixture::Auto, k_max: None }
    }

    /// Default truncation: far enough beyond the finest grid that the
    /// missing tail does not bend the measured rate.
    pub fn resolved_k_max(&self) -> u64 {
        self.k_max.unwrap_or_else(|| {
            let extra = match self.d {
                1 => 5,
                2 => 4,
                3 => 2,
                _ => 0,
            };
            1 << (self.m_hi + extra)
        })
    }

    pub fn resolved_fixture(&self) -> Fixture {
        match self.fixture {
            Fixture::Auto if self.q > self.p => Fixture::Coherent,
            Fixture::Auto => Fixture::Random,
            other => other,
        }
    }

    /// Hard errors for illegal values, warnings outside the range the rate theory covers.
    pub fn validate(&self, scheme: &QIScheme) -> Result<Vec<String>> {
        if self.d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        if self.m_lo > self.m_hi {
            return Err(Error::InvalidArgument(format!("empty level range {}..{}", self.m_lo, self.m_hi)));
        }
        if !(self.p > 1.0) || !(self.q > 1.0) {
            return Err(Error::InvalidArgument(format!("need p, q > 1, got p = {}, q = {}", self.p, self.q)));
        }
        if !(self.r_eff > 0.0) {
            return Err(Error::InvalidArgument(format!("need r > 0, got {}", self.r_eff)));
        }
        let mut warnings = Vec::new();
        let lo = (1.0 / self.p).max(0.5);
        let hi = scheme.ell() as f64 - 1.0;
        if !(self.r_eff > lo && self.r_eff < hi) {
            warnings.push(format!("r = {} lies outside ({lo}, {hi}); the rate theory does not apply", self.r_eff));
        }
        if self.p.is_infinite() {
            warnings.push("p = ∞ is outside the covered range".into());
        }
        Ok(warnings)
    }
}

/// Norm exponents as JSON numbers, with `"inf"` for `∞`.
mod exponent {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &f64, s: S) -> Result<S::Ok, S::Error> {
        if q.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*q)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(D::Error::custom(format!("bad exponent '{t}'"))),
        }
    }
}

pub fn norm_label(q: f64) -> String {
    if q.is_infinite() {
        "Linf".into()
    } else {
        format!("L{q}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub m: u32,
    pub n_points: u64,
    /// `n / (2^m m^{d-1})`.
    pub n_ratio: f64,
    pub error: f64,
    pub std_error: f64,
    pub norm_kind: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub scheme: String,
    pub ell: u32,
    pub fixture: Fixture,
    pub k_max: u64,
    pub rows: Vec<BenchRow>,
    pub fit: RateFit,
    pub model: String,
    pub theoretical_rho: f64,
    pub theoretical_beta: f64,
    pub warnings: Vec<String>,
}

impl BenchReport {
    /// CSV columns `m, n_points, n_ratio, error, norm_kind`.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("m,n_points,n_ratio,error,norm_kind\n");
        for row in &self.rows {
            out += &format!("{},{},{:.6},{:e},{}\n", row.m, row.n_points, row.n_ratio, row.error, row.norm_kind);
        }
        out
    }
}

/// Fit model used for a dimension: the log power only exists for `d ≥ 2`.
pub fn model_for(d: usize) -> RateModel {
    if d == 1 {
        RateModel::PureDyadic
    } else {
        RateModel::DyadicLogPow { beta: None }
    }
}

fn model_name(model: RateModel) -> String {
    match model {
        RateModel::PureDyadic => "pure_dyadic".into(),
        RateModel::DyadicLogPow { beta: None } => "dyadic_logpow(free)".into(),
        RateModel::DyadicLogPow { beta: Some(b) } => format!("dyadic_logpow({b})"),
    }
}

/// `R_m(f)` for a trigonometric fixture, sampling through the FFT when the
/// finest lattice is small enough.
pub fn recover_trig(scheme: &QIScheme, f: &TrigFunction, m: u32) -> Result<HierCoeffs> {
    let d = f.dim();
    let n = finest_lattice(scheme, m);
    if d <= MAX_GRID_DIM && n.checked_pow(d as u32).is_some_and(|t| t <= MAX_FFT_POINTS) {
        let values = f.eval_uniform_grid(n);
        decompose(scheme, &mut LatticeSource::new(n, d, &values), d, m)
    } else {
        decompose(scheme, &mut FnSource::new(|x: &[f64]| f.eval(x)), d, m)
    }
}

/// Measures `‖f - R_m f‖_q` over `m_lo..=m_hi` and fits the decay.
pub fn run_benchmark(scheme: &QIScheme, cfg: &BenchConfig) -> Result<BenchReport> {
    let warnings = cfg.validate(scheme)?;
    let fixture = cfg.resolved_fixture();
    let k_max = cfg.resolved_k_max();
    let phases = match fixture {
        Fixture::Coherent => Phases::Coherent,
        _ => Phases::Random(cfg.seed),
    };
    let f = mixed_smooth(cfg.r_eff, k_max, cfg.d, phases)?;
    let mut rows = Vec::new();
    for m in cfg.m_lo..=cfg.m_hi {
        let approx = recover_trig(scheme, &f, m)?;
        let res = cfg.resolution.unwrap_or_else(|| default_resolution(cfg.d, m));
        let est = if cfg.d <= MAX_GRID_DIM {
            residual_norm_on_grid(&f.eval_uniform_grid(res), &approx, cfg.q, res)?
        } else {
            residual_norm(|x| f.eval(x), &approx, cfg.q, res)?
        };
        let n_points = count_points(cfg.d, m, scheme);
        rows.push(BenchRow {
            m,
            n_points,
            n_ratio: cardinality_ratio(n_points, cfg.d, m),
            error: est.value,
            std_error: est.std_error,
            norm_kind: norm_label(cfg.q),
        });
    }
    let errors: BTreeMap<u32, f64> = rows.iter().map(|r| (r.m, r.error)).collect();
    let model = model_for(cfg.d);
    let fit = fit_rate_default(&errors, model)?;
    Ok(BenchReport {
        config: cfg.clone(),
        scheme: scheme.name().to_string(),
        ell: scheme.ell(),
        fixture,
        k_max,
        rows,
        fit,
        model: model_name(model),
        theoretical_rho: theoretical_rate(cfg.r_eff, cfg.p, cfg.q),
        theoretical_beta: theoretical_log_power(cfg.d, cfg.p, cfg.q),
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub planted_rho: f64,
    pub planted_beta: f64,
    pub fit: RateFit,
}

/// Fits synthetic errors `3 · 2^{-1.5 m} m^{0.5}` over the configured range.
pub fn run_selftest(cfg: &BenchConfig) -> Result<SelftestReport> {
    let (rho, beta) = (1.5, 0.5);
    let errors: BTreeMap<u32, f64> = (cfg.m_lo.max(1)..=cfg.m_hi)
        .map(|m| (m, 3.0 * 2f64.powf(-rho * m as f64) * (m as f64).powf(beta)))
        .collect();
    let fit = fit_rate_default(&errors, RateModel::DyadicLogPow { beta: None })?;
    Ok(SelftestReport { planted_rho: rho, planted_beta: beta, fit })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    G1,
    G2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    pub kind: WitnessKind,
    pub d: usize,
    pub m_lo: u32,
    pub m_hi: u32,
    pub r: f64,
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    /// Grid points per knot interval used for the norm quadrature.
    pub oversample: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub m: u32,
    pub grid_points: usize,
    pub grid_max: f64,
    pub norm: f64,
    /// `norm(m) / norm(m - 1)`; absent on the first row.
    pub step_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub config: WitnessConfig,
    pub scheme: String,
    pub ell: u32,
    pub level_offset: u32,
    pub rows: Vec<WitnessRow>,
    /// Decay fit of the norms (`None` when the sweep is too short).
    pub fit: Option<RateFit>,
    /// Per-step norm ratio predicted by the construction.
    pub expected_step_ratio: f64,
}

pub fn build_witness(scheme: &QIScheme, cfg: &WitnessConfig, m: u32) -> Result<HierCoeffs> {
    match cfg.kind {
        WitnessKind::G1 => witness_g1(scheme, cfg.d, m, cfg.r),
        WitnessKind::G2 => witness_g2(scheme, cfg.d, m, cfg.r, cfg.p),
    }
}

/// Per-axis quadrature grid resolving the finest knots of `hc`.
fn witness_resolution(hc: &HierCoeffs, oversample: usize) -> Vec<usize> {
    let mut top = vec![0; hc.dim()];
    for (k, _) in hc.blocks() {
        for (t, &ki) in top.iter_mut().zip(k.levels()) {
            *t = (*t).max(ki);
        }
    }
    top.iter().map(|&ki| oversample * level_size(hc.ell(), ki)).collect()
}

/// Evaluates each witness on the sample grid it must defeat and measures
/// its `L_q` norm.
pub fn run_witness(scheme: &QIScheme, cfg: &WitnessConfig) -> Result<WitnessReport> {
    if cfg.m_lo < 1 || cfg.m_lo > cfg.m_hi {
        return Err(Error::InvalidArgument(format!("witness sweep needs 1 ≤ m_lo ≤ m_hi, got {}..{}", cfg.m_lo, cfg.m_hi)));
    }
    if cfg.oversample == 0 {
        return Err(Error::InvalidArgument("oversample must be positive".into()));
    }
    let level_offset = crate::testfuncs::witness_offset(scheme.ell(), cfg.d)?;
    let mut rows: Vec<WitnessRow> = Vec::new();
    for m in cfg.m_lo..=cfg.m_hi {
        let hc = build_witness(scheme, cfg, m)?;
        let grid = enumerate_grid(cfg.d, m, scheme);
        let grid_max = grid.points().map(|p| hc.eval(&point_to_f64(p)).abs()).fold(0.0, f64::max);
        let norm = coeffs_lq_norm(&hc, cfg.q, &witness_resolution(&hc, cfg.oversample))?;
        let step_ratio = rows.last().map(|prev| norm / prev.norm);
        rows.push(WitnessRow { m, grid_points: grid.len(), grid_max, norm, step_ratio });
    }
    let norms: BTreeMap<u32, f64> = rows.iter().map(|r| (r.m, r.norm)).collect();
    let fit = if norms.len() >= crate::analysis::MIN_LEVELS {
        Some(fit_rate_default(&norms, model_for(cfg.d))?)
    } else {
        None
    };
    let expected_step_ratio = match cfg.kind {
        WitnessKind::G1 => 2f64.powf(-cfg.r),
        WitnessKind::G2 => 2f64.powf(-(cfg.r - 1.0 / cfg.p + 1.0 / cfg.q)),
    };
    Ok(WitnessReport {
        config: cfg.clone(),
        scheme: scheme.name().to_string(),
        ell: scheme.ell(),
        level_offset,
        rows,
        fit,
        expected_step_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CardinalityRow {
    pub m: u32,
    pub n_points: u64,
    /// `n / (2^m m^{d-1})`.
    pub ratio: f64,
}

/// `n / (2^m max(m,1)^{d-1})`.
pub fn cardinality_ratio(n: u64, d: usize, m: u32) -> f64 {
    n as f64 / (2f64.powi(m as i32) * (m.max(1) as f64).powi(d as i32 - 1))
}

/// `|SampleGrid(d, m)|` against the `2^m m^{d-1}` shape.
pub fn cardinality_table(scheme: &QIScheme, d: usize, m_lo: u32, m_hi: u32) -> Vec<CardinalityRow> {
    (m_lo..=m_hi)
        .map(|m| {
            let n = count_points(d, m, scheme);
            CardinalityRow { m, n_points: n, ratio: cardinality_ratio(n, d, m) }
        })
        .collect()
}
