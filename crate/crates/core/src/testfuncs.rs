//! Test functions: trigonometric polynomials with controlled mixed
//! smoothness, truncated Bernoulli kernels, and the witnesses that vanish on
//! a sparse grid.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::sobolev_norm_fourier;
use crate::error::{Error, Result};
use crate::hier::{HierCoeffs, MultiIndex};
use crate::scheme::QIScheme;
use crate::smolyak::SmolyakIndexSet;

/// Fixed excess decay of [`random_mixed_smooth`] fixtures.
pub const SMOOTHNESS_EPS: f64 = 0.05;

/// `f(x) = Σ_s f̂(s) e^{2πi (s, x)}` with finitely many modes.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigFunction {
    d: usize,
    modes: BTreeMap<Vec<i64>, Complex64>,
    real: bool,
}

impl TrigFunction {
    /// Zero modes are dropped; realness is detected from conjugate symmetry.
    pub fn new(d: usize, modes: BTreeMap<Vec<i64>, Complex64>) -> Result<Self> {
        if let Some(s) = modes.keys().find(|s| s.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: s.len() });
        }
        let modes: BTreeMap<_, _> = modes.into_iter().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).collect();
        let real = modes.iter().all(|(s, c)| {
            let neg: Vec<i64> = s.iter().map(|v| -v).collect();
            modes.get(&neg).is_some_and(|cn| (cn - c.conj()).norm() <= 1e-15 * c.norm().max(1.0))
        });
        Ok(Self { d, modes, real })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn modes(&self) -> &BTreeMap<Vec<i64>, Complex64> {
        &self.modes
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Largest `|s_j|` over all modes.
    pub fn max_frequency(&self) -> i64 {
        self.modes.keys().flat_map(|s| s.iter().map(|v| v.abs())).max().unwrap_or(0)
    }

    pub fn eval_complex(&self, x: &[f64]) -> Complex64 {
        self.modes
            .iter()
            .map(|(s, c)| {
                let phase: f64 = s.iter().zip(x).map(|(&sj, &xj)| sj as f64 * xj).sum();
                c * Complex64::from_polar(1.0, 2.0 * PI * phase.rem_euclid(1.0))
            })
            .sum()
    }

    /// The real part of [`Self::eval_complex`].
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_complex(x).re
    }

    /// Real parts on the grid `{i / n}^d` (row-major), exact up to rounding:
    /// modes are folded modulo `n` and synthesized by inverse FFTs.
    pub fn eval_uniform_grid(&self, n: usize) -> Vec<f64> {
        let shape = vec![n; self.d];
        let total = n.pow(self.d as u32);
        let mut data = vec![Complex64::new(0.0, 0.0); total];
        for (s, c) in &self.modes {
            let flat = s.iter().fold(0usize, |acc, &sj| acc * n + sj.rem_euclid(n as i64) as usize);
            data[flat] += c;
        }
        let fft = FftPlanner::new().plan_fft_inverse(n);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.d {
            let inner: usize = shape[axis + 1..].iter().product();
            let outer = total / (n * inner);
            for o in 0..outer {
                for i in 0..inner {
                    let base = o * n * inner + i;
                    for (t, v) in line.iter_mut().enumerate() {
                        *v = data[base + t * inner];
                    }
                    fft.process(&mut line);
                    for (t, v) in line.iter().enumerate() {
                        data[base + t * inner] = *v;
                    }
                }
            }
        }
        data.into_iter().map(|v| v.re).collect()
    }

    /// `(Σ_s |f̂(s)|² Π_j (1 + |s_j|²)^r)^{1/2}`.
    pub fn sobolev_norm(&self, r: f64) -> f64 {
        sobolev_norm_fourier(&self.modes, r)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let modes = self.modes.iter().map(|(s, c)| (s.clone(), c * alpha)).collect();
        Self { d: self.d, modes, real: self.real }
    }
}

#[derive(Serialize, Deserialize)]
struct ModeJson {
    s: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct TrigJson {
    d: usize,
    modes: Vec<ModeJson>,
}

impl Serialize for TrigFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let modes = self.modes.iter().map(|(s, c)| ModeJson { s: s.clone(), re: c.re, im: c.im }).collect();
        TrigJson { d: self.d, modes }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TrigFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = TrigJson::deserialize(deserializer)?;
        let modes = raw.modes.into_iter().map(|m| (m.s, Complex64::new(m.re, m.im))).collect();
        TrigFunction::new(raw.d, modes).map_err(serde::de::Error::custom)
    }
}

/// Tensor product of `1 + 2 Σ_{k=1}^{K} k^{-r} cos(2πk x - rπ/2)`.
pub fn bernoulli_partial(r: f64, k_max: u32, d: usize) -> TrigFunction {
    let mut uni: Vec<(i64, Complex64)> = vec![(0, Complex64::new(1.0, 0.0))];
    for k in 1..=k_max as i64 {
        let c = Complex64::from_polar((k as f64).powf(-r), -r * PI / 2.0);
        uni.push((k, c));
        uni.push((-k, c.conj()));
    }
    let mut modes: BTreeMap<Vec<i64>, Complex64> = BTreeMap::from([(vec![], Complex64::new(1.0, 0.0))]);
    for _ in 0..d {
        let mut next = BTreeMap::new();
        for (s, c) in &modes {
            for &(k, ck) in &uni {
                let mut t = s.clone();
                t.push(k);
                next.insert(t, c * ck);
            }
        }
        modes = next;
    }
    TrigFunction::new(d, modes).expect("dimensions agree")
}

/// All `s ∈ Z^d` with `Π_j max(1, |s_j|) ≤ k_max`.
pub fn hyperbolic_cross(d: usize, k_max: u64) -> Vec<Vec<i64>> {
    fn rec(d: usize, budget: u64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for v in -(budget as i64)..=budget as i64 {
            cur.push(v);
            rec(d, budget / v.unsigned_abs().max(1), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, k_max, &mut Vec::new(), &mut out);
    out
}

/// Sign pattern of a mixed-smoothness fixture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phases {
    /// Independent random signs per pair `±s`.
    Random(u64),
    /// All coefficients positive: the energy piles up at the origin, which
    /// makes `L_q` errors with `q > 2` decay at the slowest admissible rate.
    Coherent,
}

/// `f̂(s) = ξ_s Π_j (1 + |s_j|)^{-r-1/2-ε}` on the hyperbolic cross
/// `Π max(1, |s_j|) ≤ k_max`, scaled to unit `W^r_2` norm.
pub fn mixed_smooth(r_eff: f64, k_max: u64, d: usize, phases: Phases) -> Result<TrigFunction> {
    if !(r_eff > 0.0) {
        return Err(Error::InvalidArgument(format!("effective smoothness must be positive, got {r_eff}")));
    }
    let decay = -r_eff - 0.5 - SMOOTHNESS_EPS;
    let mut rng = ChaCha8Rng::seed_from_u64(match phases {
        Phases::Random(seed) => seed,
        Phases::Coherent => 0,
    });
    let mut modes = BTreeMap::new();
    for s in hyperbolic_cross(d, k_max) {
        let neg: Vec<i64> = s.iter().map(|v| -v).collect();
        if neg < s {
            continue;
        }
        let sign = match phases {
            Phases::Random(_) if rng.random::<bool>() => -1.0,
            _ => 1.0,
        };
        let amp = sign * s.iter().map(|&v| (1.0 + v.abs() as f64).powf(decay)).product::<f64>();
        modes.insert(neg, Complex64::new(amp, 0.0));
        modes.insert(s, Complex64::new(amp, 0.0));
    }
    let f = TrigFunction::new(d, modes)?;
    let norm = f.sobolev_norm(r_eff);
    Ok(f.scaled(1.0 / norm))
}

/// Random-sign fixture of unit `W^{r_eff}_2` norm.
pub fn random_mixed_smooth(r_eff: f64, k_max: u64, d: usize, seed: u64) -> Result<TrigFunction> {
    mixed_smooth(r_eff, k_max, d, Phases::Random(seed))
}

/// Extra levels between the grid and the witness blocks: a spline of level
/// `k` has knots on `2^{-k} Z` only at multiples of `ℓ`, while grid points of
/// level `k'` lie on `2^{-k'-log₂ℓ} Z`. Blocks with `|k|₁ = m + offset`
/// leave, for every grid point, an axis on which it is a knot.
pub fn witness_offset(ell: u32, d: usize) -> Result<u32> {
    if !ell.is_power_of_two() || ell < 2 {
        return Err(Error::InvalidArgument(format!(
            "witnesses vanishing on the grid need ℓ a power of two, got {ell}"
        )));
    }
    Ok(d as u32 * (ell.trailing_zeros() - 1) + 1)
}

/// `2^{-rm} m^{-(d-1)/2} Σ_{|k|₁ = m + offset} Σ_{s ∈ I*(k)} N_{k,s}`, where
/// `I*(k)` keeps every `ℓ`-th shift so supports within a block are disjoint.
pub fn witness_g1(scheme: &QIScheme, d: usize, m: u32, r: f64) -> Result<HierCoeffs> {
    if m < 1 {
        return Err(Error::InvalidArgument("witnesses need m ≥ 1".into()));
    }
    let ell = scheme.ell();
    let level = m + witness_offset(ell, d)?;
    let scale = 2f64.powf(-r * m as f64) * (m as f64).powf(-(d as f64 - 1.0) / 2.0);
    let mut hc = HierCoeffs::with_spline(d, level, scheme.spline().clone());
    for k in SmolyakIndexSet::new(d, level).iter().filter(|k| k.norm1() == level) {
        let shape = k.shape(ell);
        let mut block = vec![0.0; shape.iter().product()];
        let starred: Vec<usize> = shape.iter().map(|n| n / ell as usize).collect();
        let mut idx = vec![0; d];
        for flat in 0..starred.iter().product() {
            crate::tensor::unflatten(flat, &starred, &mut idx);
            let s: Vec<usize> = idx.iter().map(|i| i * ell as usize).collect();
            block[crate::tensor::flat_index(&s, &shape)] = scale;
        }
        hc.insert_block(k.clone(), block)?;
    }
    Ok(hc)
}

/// `2^{-(r - 1/p) m} N_{k*, 0}` with `k* = (m + offset, 0, …, 0)`.
pub fn witness_g2(scheme: &QIScheme, d: usize, m: u32, r: f64, p: f64) -> Result<HierCoeffs> {
    if m < 1 {
        return Err(Error::InvalidArgument("witnesses need m ≥ 1".into()));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p must exceed 1, got {p}")));
    }
    let level = m + witness_offset(scheme.ell(), d)?;
    let mut levels = vec![0; d];
    levels[0] = level;
    let mut hc = HierCoeffs::with_spline(d, level, scheme.spline().clone());
    hc.set(&MultiIndex::new(levels), &vec![0; d], 2f64.powf(-(r - 1.0 / p) * m as f64))?;
    Ok(hc)
}

/// Named closed-form functions for command-line and demo use.
pub const BUILTIN_FUNCTIONS: [&str; 4] = ["sine", "product-sine", "abs-sine", "kink"];

pub fn builtin_function(name: &str) -> Result<fn(&[f64]) -> f64> {
    fn sine(x: &[f64]) -> f64 {
        x.iter().map(|t| (2.0 * PI * t).sin()).sum()
    }
    fn product_sine(x: &[f64]) -> f64 {
        x.iter().map(|t| (2.0 * PI * t).sin()).product()
    }
    fn abs_sine(x: &[f64]) -> f64 {
        x.iter().map(|t| (2.0 * PI * t).sin().abs().powf(1.5)).product()
    }
    fn kink(x: &[f64]) -> f64 {
        x.iter().map(|t| (t.rem_euclid(1.0) - 0.5).abs()).product()
    }
    match name {
        "sine" => Ok(sine),
        "product-sine" => Ok(product_sine),
        "abs-sine" => Ok(abs_sine),
        "kink" => Ok(kink),
        other => Err(Error::InvalidArgument(format!(
            "unknown function '{other}', expected one of {}",
            BUILTIN_FUNCTIONS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::lq_norm;
    use crate::smolyak::enumerate_grid;

    #[test]
    fn bernoulli_first_term() {
        let f = bernoulli_partial(2.0, 1, 1);
        for i in 0..20 {
            let x = i as f64 / 20.0 + 0.013;
            let expected = 1.0 + 2.0 * (2.0 * PI * x - PI).cos();
            assert!((f.eval(&[x]) - expected).abs() < 1e-13);
        }
        assert!(f.is_real());
    }

    #[test]
    fn bernoulli_tensorizes() {
        let f1 = bernoulli_partial(1.5, 6, 1);
        let f2 = bernoulli_partial(1.5, 6, 2);
        assert!((f2.eval(&[0.0, 0.0]) - f1.eval(&[0.0]).powi(2)).abs() < 1e-12);
        assert!((f2.eval(&[0.3, 0.7]) - f1.eval(&[0.3]) * f1.eval(&[0.7])).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_sobolev_growth_threshold() {
        // Σ k^{-2r'} (1+k²)^r is finite iff r < r' - 1/2
        let r_prime = 2.0;
        for (r, grows) in [(1.2, false), (1.5, true), (1.8, true)] {
            let a = bernoulli_partial(r_prime, 1 << 10, 1).sobolev_norm(r);
            let b = bernoulli_partial(r_prime, 1 << 14, 1).sobolev_norm(r);
            assert_eq!(b / a > 1.05, grows, "r = {r}: {a} -> {b}");
        }
    }

    #[test]
    fn real_functions_evaluate_real() {
        let f = random_mixed_smooth(1.25, 16, 2, 7).unwrap();
        assert!(f.is_real());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            assert!(f.eval_complex(&x).im.abs() < 1e-13);
        }
    }

    #[test]
    fn fixtures_are_normalized_and_reproducible() {
        let a = random_mixed_smooth(1.25, 32, 2, 11).unwrap();
        assert!((a.sobolev_norm(1.25) - 1.0).abs() < 1e-12);
        assert_eq!(a, random_mixed_smooth(1.25, 32, 2, 11).unwrap());
        assert_ne!(a, random_mixed_smooth(1.25, 32, 2, 12).unwrap());
        let c = mixed_smooth(0.8, 64, 1, Phases::Coherent).unwrap();
        assert!((c.sobolev_norm(0.8) - 1.0).abs() < 1e-12);
        assert!(c.modes().values().all(|v| v.re > 0.0));
    }

    #[test]
    fn hyperbolic_cross_counts() {
        assert_eq!(hyperbolic_cross(1, 5).len(), 11);
        // |s₁ s₂| ≤ 2 with zeros counted as 1
        let hc = hyperbolic_cross(2, 2);
        assert!(hc.iter().all(|s| s.iter().map(|v| v.unsigned_abs().max(1)).product::<u64>() <= 2));
        assert_eq!(hc.len(), 5 * 5 - 4);
    }

    #[test]
    fn fft_grid_matches_pointwise() {
        let f = random_mixed_smooth(1.0, 40, 2, 3).unwrap();
        let n = 16; // smaller than the bandwidth: folding must alias correctly
        let grid = f.eval_uniform_grid(n);
        for (flat, v) in grid.iter().enumerate() {
            let x = [(flat / n) as f64 / n as f64, (flat % n) as f64 / n as f64];
            assert!((v - f.eval(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let f = bernoulli_partial(1.5, 2, 2);
        let json = serde_json::to_string(&f).unwrap();
        assert!(json.starts_with(r#"{"d":2,"modes":[{"s":[-2,-2],"re":"#));
        let back: TrigFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn witness_offsets() {
        assert_eq!(witness_offset(2, 3).unwrap(), 1);
        assert_eq!(witness_offset(4, 2).unwrap(), 3);
        assert_eq!(witness_offset(8, 1).unwrap(), 3);
        assert!(witness_offset(6, 1).is_err());
    }

    fn max_on_grid(hc: &HierCoeffs, scheme: &QIScheme, d: usize, m: u32) -> f64 {
        enumerate_grid(d, m, scheme)
            .points()
            .map(|p| hc.eval(&crate::dyadic::point_to_f64(p)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn witnesses_vanish_on_the_grid() {
        for name in ["faber", "cubic"] {
            let scheme = QIScheme::builtin(name).unwrap();
            for (d, m) in [(1, 3), (2, 2), (2, 4), (3, 2)] {
                let g1 = witness_g1(&scheme, d, m, 1.25).unwrap();
                assert!(g1.max_abs_coeff() > 0.0);
                assert!(max_on_grid(&g1, &scheme, d, m) < 1e-12, "{name} d={d} m={m}");
                let g2 = witness_g2(&scheme, d, m, 1.25, 2.0).unwrap();
                assert_eq!(g2.nnz(), 1);
                assert!(max_on_grid(&g2, &scheme, d, m) < 1e-12);
            }
        }
    }

    #[test]
    fn witness_blocks_are_bounded_by_one() {
        let scheme = QIScheme::builtin("cubic").unwrap();
        let g1 = witness_g1(&scheme, 2, 2, 0.0).unwrap();
        let level = g1.max_level();
        let res = 4 << level;
        let mut worst: f64 = 0.0;
        g1.for_each_block_on_grid(&[res, res], |_, block| {
            worst = worst.max(block.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
        });
        // C₁ = 1 with scale m^{-(d-1)/2} = 2^{-1/2} at r = 0
        assert!(worst * 2f64.sqrt() <= 1.0 + 1e-12);
    }

    #[test]
    fn witness_matches_direct_sum() {
        let scheme = QIScheme::builtin("faber").unwrap();
        let (d, m, r) = (2, 3, 1.25);
        let g1 = witness_g1(&scheme, d, m, r).unwrap();
        let level = m + 1;
        let spline = scheme.spline().clone();
        let scale = 2f64.powf(-r * m as f64) / (m as f64).sqrt();
        let direct = |x: &[f64]| {
            let mut total = 0.0;
            for k0 in 0..=level {
                let k = [k0, level - k0];
                for s0 in (0..2usize << k[0]).step_by(2) {
                    for s1 in (0..2usize << k[1]).step_by(2) {
                        total += spline.eval_tensor(&k, &[s0, s1], x).unwrap();
                    }
                }
            }
            scale * total
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x = [rng.random::<f64>(), rng.random::<f64>()];
            assert!((g1.eval(&x) - direct(&x)).abs() < 1e-12);
        }
        assert!(lq_norm(direct, 2.0, 2, 64).unwrap().value > 0.0);
    }

    #[test]
    fn builtin_functions() {
        for name in BUILTIN_FUNCTIONS {
            let f = builtin_function(name).unwrap();
            assert!(f(&[0.25, 0.25]).is_finite());
        }
        assert!(builtin_function("nope").is_err());
    }
}
