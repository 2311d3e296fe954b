//! Hierarchical B-spline coefficients `c_{k,s}` and their partial sums.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bspline::{level_size, CardinalSpline};
use crate::error::{Error, Result};
use crate::tensor::{flat_index, map_axis, unflatten};

/// A level vector `k ∈ Z_+^d`. Orders graded-lexicographically:
/// first by `|k|₁`, then lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(levels: Vec<u32>) -> Self {
        Self(levels)
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn levels(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm1(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `(ℓ 2^{k_1}, .., ℓ 2^{k_d})`, the extent of `I(k)`.
    pub fn shape(&self, ell: u32) -> Vec<usize> {
        self.0.iter().map(|&k| level_size(ell, k)).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.norm1().cmp(&other.norm1()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// The representation `Σ_{|k|₁ ≤ m} Σ_{s ∈ I(k)} c_{k,s} N_{k,s}`.
///
/// Blocks are stored densely over `I(k)` (row-major, axis 0 slowest) and
/// sparsely over `k`.
#[derive(Clone, Debug)]
pub struct HierCoeffs {
    d: usize,
    ell: u32,
    max_level: u32,
    blocks: BTreeMap<MultiIndex, Vec<f64>>,
    spline: Arc<CardinalSpline>,
}

impl HierCoeffs {
    pub fn new(d: usize, ell: u32, max_level: u32) -> Result<Self> {
        Ok(Self::with_spline(d, max_level, Arc::new(CardinalSpline::new(ell)?)))
    }

    pub fn with_spline(d: usize, max_level: u32, spline: Arc<CardinalSpline>) -> Self {
        Self { d, ell: spline.order(), max_level, blocks: BTreeMap::new(), spline }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn spline(&self) -> &Arc<CardinalSpline> {
        &self.spline
    }

    fn check_level(&self, k: &MultiIndex) -> Result<()> {
        if k.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: k.dim() });
        }
        if k.norm1() > self.max_level {
            return Err(Error::InvalidArgument(format!(
                "block {k} exceeds max level {}",
                self.max_level
            )));
        }
        Ok(())
    }

    fn check_shift(&self, k: &MultiIndex, s: &[usize]) -> Result<()> {
        if s.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: s.len() });
        }
        for (&ki, &si) in k.levels().iter().zip(s) {
            let len = level_size(self.ell, ki);
            if si >= len {
                return Err(Error::IndexOutOfRange { k: ki, s: si, len });
            }
        }
        Ok(())
    }

    /// Replaces the whole block `k`.
    pub fn insert_block(&mut self, k: MultiIndex, values: Vec<f64>) -> Result<()> {
        self.check_level(&k)?;
        let expected: usize = k.shape(self.ell).iter().product();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        self.blocks.insert(k, values);
        Ok(())
    }

    pub fn set(&mut self, k: &MultiIndex, s: &[usize], c: f64) -> Result<()> {
        self.check_level(k)?;
        self.check_shift(k, s)?;
        let shape = k.shape(self.ell);
        let block = self
            .blocks
            .entry(k.clone())
            .or_insert_with(|| vec![0.0; shape.iter().product()]);
        block[flat_index(s, &shape)] = c;
        Ok(())
    }

    pub fn get(&self, k: &MultiIndex, s: &[usize]) -> f64 {
        if self.check_shift(k, s).is_err() {
            return 0.0;
        }
        self.blocks
            .get(k)
            .map_or(0.0, |b| b[flat_index(s, &k.shape(self.ell))])
    }

    pub fn block(&self, k: &MultiIndex) -> Option<&[f64]> {
        self.blocks.get(k).map(Vec::as_slice)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&MultiIndex, &[f64])> {
        self.blocks.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// All stored `(k, s, c)` in `(|k|₁, k, s)` order, zeros included.
    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, Vec<usize>, f64)> + '_ {
        self.blocks.iter().flat_map(move |(k, values)| {
            let shape = k.shape(self.ell);
            values.iter().enumerate().map(move |(flat, &c)| {
                let mut s = vec![0; shape.len()];
                unflatten(flat, &shape, &mut s);
                (k, s, c)
            })
        })
    }

    /// Number of nonzero coefficients.
    pub fn nnz(&self) -> usize {
        self.blocks.values().map(|b| b.iter().filter(|c| **c != 0.0).count()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.blocks.values().flatten().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `self + alpha * other`, coefficientwise.
    pub fn axpy(&self, alpha: f64, other: &HierCoeffs) -> Result<HierCoeffs> {
        if other.d != self.d || other.ell != self.ell {
            return Err(Error::InvalidArgument("incompatible coefficient sets".into()));
        }
        let mut out = self.clone();
        out.max_level = self.max_level.max(other.max_level);
        for (k, b) in &other.blocks {
            let dst = out.blocks.entry(k.clone()).or_insert_with(|| vec![0.0; b.len()]);
            for (x, y) in dst.iter_mut().zip(b) {
                *x += alpha * y;
            }
        }
        Ok(out)
    }

    /// `q_k(x) = Σ_s c_{k,s} N_{k,s}(x)` for a single block.
    pub fn eval_block(&self, k: &MultiIndex, x: &[f64]) -> f64 {
        match self.blocks.get(k) {
            Some(values) => self.eval_block_values(k, values, x),
            None => 0.0,
        }
    }

    fn eval_block_values(&self, k: &MultiIndex, values: &[f64], x: &[f64]) -> f64 {
        let ell = self.ell as usize;
        let shape = k.shape(self.ell);
        // ℓ active shifts per axis; sum over their tensor product.
        let mut active: Vec<(usize, f64)> = Vec::with_capacity(self.d * ell);
        for (axis, &ki) in k.levels().iter().enumerate() {
            self.spline.for_each_active(ki, x[axis], |s, v| active.push((s, v)));
        }
        let mut total = 0.0;
        let combos = ell.pow(self.d as u32);
        let mut idx = vec![0usize; self.d];
        for combo in 0..combos {
            let mut rem = combo;
            let mut w = 1.0;
            for axis in (0..self.d).rev() {
                let (s, v) = active[axis * ell + rem % ell];
                rem /= ell;
                idx[axis] = s;
                w *= v;
            }
            if w != 0.0 {
                total += w * values[flat_index(&idx, &shape)];
            }
        }
        total
    }

    /// The partial sum `Σ_{k,s} c_{k,s} N_{k,s}(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.d, "point dimension");
        self.blocks.iter().map(|(k, v)| self.eval_block_values(k, v, x)).sum()
    }

    /// Calls `visit(k, values)` with each block `q_k` sampled on the uniform
    /// grid `{i / res_j}` (row-major, axis 0 slowest).
    pub fn for_each_block_on_grid(&self, res: &[usize], mut visit: impl FnMut(&MultiIndex, &[f64])) {
        assert_eq!(res.len(), self.d, "resolution dimension");
        let mut tables: BTreeMap<(u32, usize), Vec<(usize, f64)>> = BTreeMap::new();
        for (k, values) in &self.blocks {
            let mut shape = k.shape(self.ell);
            let mut data = values.clone();
            for axis in 0..self.d {
                let (ki, n_out) = (k.levels()[axis], res[axis]);
                let table = tables
                    .entry((ki, n_out))
                    .or_insert_with(|| synthesis_table(&self.spline, ki, n_out));
                let ell = self.ell as usize;
                data = map_axis(&data, &shape, axis, n_out, |line, out| {
                    for (p, o) in out.iter_mut().enumerate() {
                        *o = table[p * ell..(p + 1) * ell].iter().map(|&(s, v)| v * line[s]).sum();
                    }
                });
                shape[axis] = n_out;
            }
            visit(k, &data);
        }
    }

    /// The partial sum on the uniform grid `{i / res_j}`.
    pub fn eval_grid(&self, res: &[usize]) -> Vec<f64> {
        let mut total = vec![0.0; res.iter().product()];
        self.for_each_block_on_grid(res, |_, values| {
            for (t, v) in total.iter_mut().zip(values) {
                *t += v;
            }
        });
        total
    }
}

/// For each grid point `p / n`, the ℓ active `(s, N_{k,s}(p/n))` pairs.
fn synthesis_table(spline: &CardinalSpline, k: u32, n: usize) -> Vec<(usize, f64)> {
    let mut table = Vec::with_capacity(n * spline.order() as usize);
    for p in 0..n {
        spline.for_each_active(k, p as f64 / n as f64, |s, v| table.push((s, v)));
    }
    table
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    k: Vec<u32>,
    s: Vec<usize>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct HierJson {
    d: usize,
    ell: u32,
    m: u32,
    entries: Vec<EntryJson>,
}

impl Serialize for HierCoeffs {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .entries()
            .filter(|(_, _, c)| *c != 0.0)
            .map(|(k, s, c)| EntryJson { k: k.levels().to_vec(), s, c })
            .collect();
        HierJson { d: self.d, ell: self.ell, m: self.max_level, entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HierCoeffs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = HierJson::deserialize(deserializer)?;
        let mut hc = HierCoeffs::new(raw.d, raw.ell, raw.m).map_err(D::Error::custom)?;
        for e in raw.entries {
            hc.set(&MultiIndex::new(e.k), &e.s, e.c).map_err(D::Error::custom)?;
        }
        Ok(hc)
    }
}
