//! Coefficient functionals of the periodic quasi-interpolation representation
//! `f = Σ_k q_k(f) = Σ_k Σ_{s ∈ I(k)} c_{k,s}(f) N_{k,s}`.
//!
//! Two independent routes compute `c_{k,s}`:
//!
//! * [`detail_coeff`] applies, axis by axis, `T^{[P_Λ]}` on level-0 axes and
//!   `T^{[P*]} ∘ Δ^ℓ` (even or odd `P*` by the parity of `s_j`) on refined axes.
//! * [`detail_coeff_oracle`] forms `a_{k,s} - (Q_{k-1} re-expanded on level k)`
//!   straight from the mask and the refinement equation.
//!
//! [`decompose`] is the bulk version of the first route: it gathers samples on
//! the lattice of each block and runs the same filters as circular convolutions.

use std::collections::{BTreeSet, HashMap};

use crate::bspline::{level_size, level_step};
use crate::dyadic::{point_to_f64, Coord, GridPoint};
use crate::error::{Error, Result};
use crate::hier::{HierCoeffs, MultiIndex};
use crate::laurent::{binomial_rational, rational_to_f64};
use crate::scheme::QIScheme;
use crate::smolyak::SmolyakIndexSet;
use crate::tensor::map_axis;

/// A univariate coefficient functional as `(lattice offset, weight)` taps,
/// offsets in units of `h_k` relative to `s`.
pub type Taps = Vec<(i64, f64)>;

/// Where sample values come from during a decomposition.
pub trait SampleSource {
    fn sample(&mut self, point: &[Coord]) -> f64;

    /// Reports problems collected while sampling.
    fn finish(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Memoizing wrapper around a callable; each grid point is evaluated once.
pub struct FnSource<F> {
    f: F,
    cache: HashMap<GridPoint, f64>,
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> FnSource<F> {
    pub fn new(f: F) -> Self {
        Self { f, cache: HashMap::new(), evaluations: 0 }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn into_cache(self) -> HashMap<GridPoint, f64> {
        self.cache
    }
}

impl<F: FnMut(&[f64]) -> f64> SampleSource for FnSource<F> {
    fn sample(&mut self, point: &[Coord]) -> f64 {
        if let Some(&v) = self.cache.get(point) {
            return v;
        }
        let v = (self.f)(&point_to_f64(point));
        self.evaluations += 1;
        self.cache.insert(point.to_vec(), v);
        v
    }
}

/// Samples supplied up front; absent points are collected and reported.
pub struct MapSource<'a> {
    values: &'a HashMap<GridPoint, f64>,
    missing: BTreeSet<GridPoint>,
}

impl<'a> MapSource<'a> {
    pub fn new(values: &'a HashMap<GridPoint, f64>) -> Self {
        Self { values, missing: BTreeSet::new() }
    }
}

impl SampleSource for MapSource<'_> {
    fn sample(&mut self, point: &[Coord]) -> f64 {
        match self.values.get(point) {
            Some(&v) => v,
            None => {
                self.missing.insert(point.to_vec());
                0.0
            }
        }
    }

    fn finish(&mut self) -> Result<()> {
        if self.missing.is_empty() {
            return Ok(());
        }
        let points = std::mem::take(&mut self.missing).iter().map(|p| point_to_f64(p)).collect();
        Err(Error::MissingSamples { points })
    }
}

/// Values on the full uniform lattice `{i / n}^d` (row-major).
pub struct LatticeSource<'a> {
    n: u64,
    values: &'a [f64],
}

impl<'a> LatticeSource<'a> {
    pub fn new(n: usize, d: usize, values: &'a [f64]) -> Self {
        assert_eq!(values.len(), n.pow(d as u32), "lattice size");
        Self { n: n as u64, values }
    }
}

impl SampleSource for LatticeSource<'_> {
    fn sample(&mut self, point: &[Coord]) -> f64 {
        let flat = point.iter().fold(0usize, |acc, c| {
            let i = c.lattice_index(self.n).expect("sample point off the lattice");
            acc * self.n as usize + i
        });
        self.values[flat]
    }
}

impl QIScheme {
    /// Taps of `c_{k,s}` along one axis, built by literal composition
    /// `T^{[P*]} ∘ Δ^ℓ` for `k > 0` (duplicates are not merged).
    pub fn detail_taps(&self, k: u32, s: usize) -> Taps {
        let ops = self.ops();
        if k == 0 {
            return ops.lambda.taps().to_vec();
        }
        let star = if s.is_multiple_of(2) { &ops.even_star } else { &ops.odd_star };
        let mut taps = Vec::with_capacity(star.taps().len() * ops.diff.taps().len());
        for &(e, w) in star.taps() {
            for &(j, dw) in ops.diff.taps() {
                taps.push((e + j, w * dw));
            }
        }
        taps
    }

    /// Sorted distinct lattice offsets read by `c_{k,s}`.
    pub fn read_offsets(&self, k: u32, s: usize) -> Vec<i64> {
        let mut offs: Vec<i64> = self.detail_taps(k, s).into_iter().map(|(e, _)| e).collect();
        offs.sort_unstable();
        offs.dedup();
        offs
    }

    /// Lattice indices of level `k` read by any `c_{k,s}`, as a membership mask.
    pub fn level_read_mask(&self, k: u32) -> Vec<bool> {
        let n = level_size(self.ell(), k);
        let mut mask = vec![false; n];
        for parity in 0..2.min(n) {
            let offs = self.read_offsets(k, parity);
            for s in (parity..n).step_by(2) {
                for &e in &offs {
                    mask[(s as i64 + e).rem_euclid(n as i64) as usize] = true;
                }
            }
        }
        mask
    }
}

/// `a_{k,s}(f) = Σ_{|j| ≤ μ} λ(j) f(h_k (s - j + ℓ/2))`, univariate.
pub fn a_coeff(scheme: &QIScheme, k: u32, s: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mu = scheme.mu() as i64;
    let half = scheme.ell() as i64 / 2;
    (-mu..=mu)
        .map(|j| {
            let x = Coord::on_level(scheme.ell(), k, s as i64 - j + half).to_f64();
            scheme.ops().mask[(j + mu) as usize] * f(x)
        })
        .sum()
}

/// Tensor `a_{k,s}(f)`, applying the univariate functional per axis.
pub fn a_coeff_tensor(scheme: &QIScheme, k: &[u32], s: &[usize], f: impl Fn(&[f64]) -> f64) -> f64 {
    let mu = scheme.mu() as i64;
    let half = scheme.ell() as i64 / 2;
    let per_axis: Vec<Vec<(Coord, f64)>> = k
        .iter()
        .zip(s)
        .map(|(&ki, &si)| {
            (-mu..=mu)
                .map(|j| {
                    let c = Coord::on_level(scheme.ell(), ki, si as i64 - j + half);
                    (c, scheme.ops().mask[(j + mu) as usize])
                })
                .collect()
        })
        .collect();
    tensor_apply(&per_axis, &f)
}

/// `c_{k,s}(f)` via the explicit shift-operator formula.
pub fn detail_coeff(scheme: &QIScheme, k: &[u32], s: &[usize], f: impl Fn(&[f64]) -> f64) -> Result<f64> {
    check_shift(scheme, k, s)?;
    let per_axis: Vec<Vec<(Coord, f64)>> = k
        .iter()
        .zip(s)
        .map(|(&ki, &si)| {
            scheme
                .detail_taps(ki, si)
                .into_iter()
                .map(|(e, w)| (Coord::on_level(scheme.ell(), ki, si as i64 + e), w))
                .collect()
        })
        .collect();
    Ok(tensor_apply(&per_axis, &f))
}

/// `c_{k,s}(f)` read off `Π (Q_{k_i} - Q_{k_i - 1})(f)` after re-expanding the
/// coarse B-splines on level `k` with the refinement equation. Shares nothing
/// with the Laurent derivation beyond the mask itself.
pub fn detail_coeff_oracle(
    scheme: &QIScheme,
    k: &[u32],
    s: &[usize],
    f: impl Fn(&[f64]) -> f64,
) -> Result<f64> {
    check_shift(scheme, k, s)?;
    let ell = scheme.ell();
    let mu = scheme.mu() as i64;
    let half = ell as i64 / 2;
    let lambda: Vec<f64> = (-mu..=mu).map(|j| rational_to_f64(&scheme.lambda(j))).collect();
    let a_functional = |level: u32, shift: i64, weight: f64, out: &mut Vec<(Coord, f64)>| {
        for j in -mu..=mu {
            let c = Coord::on_level(ell, level, shift - j + half);
            out.push((c, weight * lambda[(j + mu) as usize]));
        }
    };
    let refine = 2f64.powi(1 - ell as i32);
    let per_axis: Vec<Vec<(Coord, f64)>> = k
        .iter()
        .zip(s)
        .map(|(&ki, &si)| {
            let mut out = Vec::new();
            a_functional(ki, si as i64, 1.0, &mut out);
            if ki > 0 {
                let coarse = level_size(ell, ki - 1) as i64;
                for j in 0..=ell as i64 {
                    if (si as i64 - j).rem_euclid(2) != 0 {
                        continue;
                    }
                    let t = ((si as i64 - j) / 2).rem_euclid(coarse);
                    let w = -refine * rational_to_f64(&binomial_rational(ell, j as u32));
                    a_functional(ki - 1, t, w, &mut out);
                }
            }
            out
        })
        .collect();
    Ok(tensor_apply(&per_axis, &f))
}

fn check_shift(scheme: &QIScheme, k: &[u32], s: &[usize]) -> Result<()> {
    if k.len() != s.len() {
        return Err(Error::DimensionMismatch { expected: k.len(), got: s.len() });
    }
    for (&ki, &si) in k.iter().zip(s) {
        let len = level_size(scheme.ell(), ki);
        if si >= len {
            return Err(Error::IndexOutOfRange { k: ki, s: si, len });
        }
    }
    Ok(())
}

/// `Σ Π_i w_i f(x_1, .., x_d)` over the product of per-axis taps, applied
/// axis-sequentially (last axis innermost).
fn tensor_apply(per_axis: &[Vec<(Coord, f64)>], f: &impl Fn(&[f64]) -> f64) -> f64 {
    fn rec(axis: usize, per_axis: &[Vec<(Coord, f64)>], x: &mut Vec<f64>, f: &impl Fn(&[f64]) -> f64) -> f64 {
        if axis == per_axis.len() {
            return f(x);
        }
        let mut acc = 0.0;
        for &(c, w) in &per_axis[axis] {
            x[axis] = c.to_f64();
            acc += w * rec(axis + 1, per_axis, x, f);
        }
        acc
    }
    let mut x = vec![0.0; per_axis.len()];
    rec(0, per_axis, &mut x, f)
}

/// Sample values of one block's lattice `Π_i {j h_{k_i}}`, restricted to the
/// points the block's functionals read (zeros elsewhere).
fn gather_block(scheme: &QIScheme, k: &MultiIndex, masks: &[Vec<bool>], source: &mut dyn SampleSource) -> Vec<f64> {
    let ell = scheme.ell();
    let shape = k.shape(ell);
    let total: usize = shape.iter().product();
    let mut data = vec![0.0; total];
    let mut idx = vec![0usize; shape.len()];
    let mut point = vec![Coord::ZERO; shape.len()];
    for (flat, slot) in data.iter_mut().enumerate() {
        crate::tensor::unflatten(flat, &shape, &mut idx);
        let mut needed = true;
        for (axis, &i) in idx.iter().enumerate() {
            if !masks[axis][i] {
                needed = false;
                break;
            }
            point[axis] = Coord::on_level(ell, k.levels()[axis], i as i64);
        }
        if needed {
            *slot = source.sample(&point);
        }
    }
    data
}

/// Turns lattice samples of block `k` into its coefficients `c_{k,·}`.
fn filter_block(scheme: &QIScheme, k: &MultiIndex, mut data: Vec<f64>) -> Vec<f64> {
    let ops = scheme.ops();
    let shape = k.shape(scheme.ell());
    for (axis, &ki) in k.levels().iter().enumerate() {
        let n = shape[axis];
        data = if ki == 0 {
            map_axis(&data, &shape, axis, n, |line, out| {
                for (s, o) in out.iter_mut().enumerate() {
                    *o = ops.lambda.apply_periodic(line, s);
                }
            })
        } else {
            let mut diff = vec![0.0; n];
            map_axis(&data, &shape, axis, n, |line, out| {
                for (i, dv) in diff.iter_mut().enumerate() {
                    *dv = ops.diff.apply_periodic(line, i);
                }
                for (s, o) in out.iter_mut().enumerate() {
                    let star = if s % 2 == 0 { &ops.even_star } else { &ops.odd_star };
                    *o = star.apply_periodic(&diff, s);
                }
            })
        };
    }
    data
}

/// `a_{k,·}(f)`: coefficients of the full operator `Q_k(f)` on level `k`.
pub fn full_operator_block(scheme: &QIScheme, k: &MultiIndex, source: &mut dyn SampleSource) -> Vec<f64> {
    let ell = scheme.ell();
    let masks: Vec<Vec<bool>> = k.levels().iter().map(|&ki| vec![true; level_size(ell, ki)]).collect();
    let mut data = gather_block(scheme, k, &masks, source);
    let shape = k.shape(ell);
    for axis in 0..k.dim() {
        data = map_axis(&data, &shape, axis, shape[axis], |line, out| {
            for (s, o) in out.iter_mut().enumerate() {
                *o = scheme.ops().lambda.apply_periodic(line, s);
            }
        });
    }
    data
}

/// All `c_{k,s}(f)` with `|k|₁ ≤ m`.
pub fn decompose(scheme: &QIScheme, source: &mut dyn SampleSource, d: usize, m: u32) -> Result<HierCoeffs> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let level_masks: Vec<Vec<bool>> = (0..=m).map(|k| scheme.level_read_mask(k)).collect();
    let mut hc = HierCoeffs::with_spline(d, m, scheme.spline().clone());
    for k in SmolyakIndexSet::new(d, m).iter() {
        let masks: Vec<Vec<bool>> = k.levels().iter().map(|&ki| level_masks[ki as usize].clone()).collect();
        let samples = gather_block(scheme, k, &masks, source);
        hc.insert_block(k.clone(), filter_block(scheme, k, samples))?;
    }
    source.finish()?;
    Ok(hc)
}

/// [`decompose`] for a callable, with a fresh sample cache.
pub fn decompose_fn(scheme: &QIScheme, f: impl Fn(&[f64]) -> f64, d: usize, m: u32) -> Result<HierCoeffs> {
    decompose(scheme, &mut FnSource::new(f), d, m)
}

/// The grid step `h_k` (re-exported for callers building sample points).
pub fn step(scheme: &QIScheme, k: u32) -> f64 {
    level_step(scheme.ell(), k)
}
