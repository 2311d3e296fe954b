//! Exact torus coordinates.
//!
//! Every sample the coefficient functionals read sits at `i · h_k` for some
//! level `k`, i.e. at `i / (ℓ 2^k)`. [`Coord`] stores such a point as a reduced
//! fraction in `[0, 1)`, so coincident points from different levels compare
//! and hash equal.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;

use crate::bspline::level_size;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coord {
    num: u64,
    den: u64,
}

/// A point of the d-torus with exact coordinates.
pub type GridPoint = Vec<Coord>;

impl Coord {
    pub const ZERO: Coord = Coord { num: 0, den: 1 };

    /// `num / den` reduced modulo 1.
    pub fn new(num: i64, den: u64) -> Self {
        assert!(den > 0, "zero denominator");
        let num = num.rem_euclid(den as i64) as u64;
        let g = num.gcd(&den);
        Self { num: num / g, den: den / g }
    }

    /// `idx · h_k = idx / (ℓ 2^k)` reduced modulo 1.
    pub fn on_level(ell: u32, k: u32, idx: i64) -> Self {
        Self::new(idx, level_size(ell, k) as u64)
    }

    /// Snaps `x` onto the lattice with spacing `1/den`, if it lies within `tol` of it.
    pub fn snap(x: f64, den: u64, tol: f64) -> Option<Self> {
        let scaled = x * den as f64;
        let idx = scaled.round();
        ((scaled - idx).abs() <= tol * den as f64).then(|| Self::new(idx as i64, den))
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Index of this point on the lattice `{i / n}`, if it belongs to it.
    pub fn lattice_index(&self, n: u64) -> Option<usize> {
        n.is_multiple_of(self.den).then(|| (self.num * (n / self.den)) as usize)
    }
}

impl Ord for Coord {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Coord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

pub fn point_to_f64(p: &[Coord]) -> Vec<f64> {
    p.iter().map(Coord::to_f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_and_wrap() {
        assert_eq!(Coord::new(2, 8), Coord::new(1, 4));
        assert_eq!(Coord::new(9, 8), Coord::new(1, 8));
        assert_eq!(Coord::new(-1, 4), Coord::new(3, 4));
        assert_eq!(Coord::new(8, 8), Coord::ZERO);
        assert_eq!(Coord::on_level(4, 1, 4), Coord::on_level(2, 0, 1));
        assert_eq!(Coord::on_level(6, 2, 8), Coord::new(1, 3));
    }

    #[test]
    fn ordering_is_numeric() {
        let mut v = vec![Coord::new(3, 4), Coord::new(1, 3), Coord::new(1, 2), Coord::ZERO];
        v.sort();
        assert_eq!(v, vec![Coord::ZERO, Coord::new(1, 3), Coord::new(1, 2), Coord::new(3, 4)]);
    }

    #[test]
    fn snapping_and_lattice_index() {
        assert_eq!(Coord::snap(0.375, 16, 1e-9), Some(Coord::new(3, 8)));
        assert_eq!(Coord::snap(0.3, 16, 1e-9), None);
        assert_eq!(Coord::new(3, 8).lattice_index(16), Some(6));
        assert_eq!(Coord::new(1, 3).lattice_index(16), None);
    }
}
