//! Smolyak index sets, the sample grid read by `R_m`, and recovery from samples.
//!
//! The grid exposed here is the set of points the coefficient functionals of
//! all blocks `|k|₁ ≤ m` actually read, mask overhang included. Along one
//! axis, level `k` reads a subset `R_k` of the lattice `{i h_k}`; a block
//! reads the product `R_{k_1} × .. × R_{k_d}`.

use std::collections::{BTreeMap, HashMap};

use serde::{Serialize, Serializer};

use crate::bspline::level_size;
use crate::dyadic::{point_to_f64, Coord, GridPoint};
use crate::error::Result;
use crate::hier::{HierCoeffs, MultiIndex};
use crate::quasi_interp::{decompose, FnSource, MapSource};
use crate::scheme::QIScheme;

/// All `k ∈ Z_+^d` with `|k|₁ ≤ m`, graded-lexicographic.
#[derive(Clone, Debug)]
pub struct SmolyakIndexSet {
    d: usize,
    m: u32,
    indices: Vec<MultiIndex>,
}

impl SmolyakIndexSet {
    pub fn new(d: usize, m: u32) -> Self {
        let mut indices = Vec::new();
        for n in 0..=m {
            let mut cur = vec![0u32; d];
            compositions(n, 0, &mut cur, &mut indices);
        }
        Self { d, m, indices }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_level(&self) -> u32 {
        self.m
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `Σ_{j=0}^{m} C(j+d-1, d-1)`.
    pub fn expected_len(d: usize, m: u32) -> u64 {
        (0..=m as u64).map(|j| binom(j + d as u64 - 1, d as u64 - 1)).sum()
    }
}

/// Lexicographic enumeration of `k` with `|k|₁ = n`.
fn compositions(n: u32, axis: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if axis + 1 == cur.len() {
        cur[axis] = n;
        out.push(MultiIndex::new(cur.clone()));
        return;
    }
    for v in 0..=n {
        cur[axis] = v;
        compositions(n - v, axis + 1, cur, out);
    }
    cur[axis] = 0;
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// The points read by `R_m`, each tagged with the first block (in graded-lex
/// order) that reads it.
#[derive(Clone, Debug)]
pub struct SampleGrid {
    pub d: usize,
    pub m: u32,
    pub ell: u32,
    pub mu: usize,
    points: BTreeMap<GridPoint, MultiIndex>,
}

impl SampleGrid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &[Coord]) -> bool {
        self.points.contains_key(p)
    }

    /// Points in ascending coordinate order, with their provenance block.
    pub fn iter(&self) -> impl Iterator<Item = (&GridPoint, &MultiIndex)> {
        self.points.iter()
    }

    pub fn points(&self) -> impl Iterator<Item = &GridPoint> {
        self.points.keys()
    }

    /// CSV: `x_1,..,x_d,k` with the provenance level vector as `k1;k2;..`.
    pub fn to_csv(&self) -> String {
        let mut out: Vec<String> = (1..=self.d).map(|i| format!("x_{i}")).collect();
        out.push("k".into());
        let mut csv = out.join(",") + "\n";
        for (p, k) in &self.points {
            let mut row: Vec<String> = p.iter().map(|c| format!("{}", c.to_f64())).collect();
            row.push(k.levels().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"));
            csv += &row.join(",");
            csv.push('\n');
        }
        csv
    }
}

#[derive(Serialize)]
struct GridPointJson {
    x: Vec<f64>,
    k: Vec<u32>,
}

#[derive(Serialize)]
struct GridJson {
    d: usize,
    ell: u32,
    m: u32,
    points: Vec<GridPointJson>,
}

/// `{"d", "ell", "m", "points": [{"x": [..], "k": [..]}]}`.
impl Serialize for SampleGrid {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let points = self
            .points
            .iter()
            .map(|(p, k)| GridPointJson { x: point_to_f64(p), k: k.levels().to_vec() })
            .collect();
        GridJson { d: self.d, ell: self.ell, m: self.m, points }.serialize(serializer)
    }
}

/// Per-axis read sets `R_k` for `k = 0..=m`, as sorted lattice coordinates.
fn axis_read_sets(scheme: &QIScheme, m: u32) -> Vec<Vec<Coord>> {
    (0..=m)
        .map(|k| {
            scheme
                .level_read_mask(k)
                .into_iter()
                .enumerate()
                .filter(|(_, read)| *read)
                .map(|(i, _)| Coord::on_level(scheme.ell(), k, i as i64))
                .collect()
        })
        .collect()
}

pub fn enumerate_grid(d: usize, m: u32, scheme: &QIScheme) -> SampleGrid {
    let sets = axis_read_sets(scheme, m);
    let mut points = BTreeMap::new();
    for k in SmolyakIndexSet::new(d, m).iter() {
        let axes: Vec<&Vec<Coord>> = k.levels().iter().map(|&ki| &sets[ki as usize]).collect();
        let total: usize = axes.iter().map(|a| a.len()).product();
        let mut p = vec![Coord::ZERO; d];
        for flat in 0..total {
            let mut rem = flat;
            for axis in (0..d).rev() {
                p[axis] = axes[axis][rem % axes[axis].len()];
                rem /= axes[axis].len();
            }
            points.entry(p.clone()).or_insert_with(|| k.clone());
        }
    }
    SampleGrid { d, m, ell: scheme.ell(), mu: scheme.mu(), points }
}

/// `|SampleGrid(d, m)|`.
///
/// When the per-axis read sets are nested (`R_k ⊆ R_{k+1}`, true for the
/// builtin schemes) a point belongs to the grid iff the sum of its per-axis
/// first levels is at most `m`, which is counted without materializing points.
/// Otherwise falls back to enumeration.
pub fn count_points(d: usize, m: u32, scheme: &QIScheme) -> u64 {
    let sets = axis_read_sets(scheme, m);
    let nested = sets.windows(2).all(|w| w[0].iter().all(|c| w[1].binary_search(c).is_ok()));
    if !nested {
        return enumerate_grid(d, m, scheme).len() as u64;
    }
    // new[j]: points first read at level j along one axis
    let new: Vec<u64> = (0..=m as usize)
        .map(|j| sets[j].len() as u64 - if j == 0 { 0 } else { sets[j - 1].len() as u64 })
        .collect();
    // ways[t]: number of prefixes whose first levels sum to t
    let mut ways = vec![0u64; m as usize + 1];
    ways[0] = 1;
    for _ in 0..d {
        let mut next = vec![0u64; m as usize + 1];
        for (t, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for (j, &nj) in new.iter().enumerate() {
                if t + j > m as usize {
                    break;
                }
                next[t + j] += w * nj;
            }
        }
        ways = next;
    }
    ways.iter().sum()
}

/// `R_m(f)` from a callable (evaluated once per grid point).
pub fn recover_fn(scheme: &QIScheme, d: usize, m: u32, f: impl Fn(&[f64]) -> f64) -> Result<HierCoeffs> {
    decompose(scheme, &mut FnSource::new(f), d, m)
}

/// `R_m(f)` from sample values alone; fails with `MissingSamples` listing
/// every grid point absent from `values`. Extra entries are ignored.
pub fn recover(scheme: &QIScheme, d: usize, m: u32, values: &HashMap<GridPoint, f64>) -> Result<HierCoeffs> {
    decompose(scheme, &mut MapSource::new(values), d, m)
}

/// `ℓ 2^m`, the per-axis resolution of the finest lattice containing the grid.
pub fn finest_lattice(scheme: &QIScheme, m: u32) -> usize {
    level_size(scheme.ell(), m)
}
