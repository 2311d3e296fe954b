//! Cardinal B-splines `M_ℓ` and their 1-periodic dyadic dilates.
//!
//! `M_ℓ` is stored as ℓ exact polynomial pieces, one per unit interval
//! `[j, j+1)`, in the local variable `u = x - j`, obtained by repeated
//! convolution with the indicator of `[0, 1)`. Evaluation is Horner on the
//! frozen `f64` copy of the active piece.
//!
//! Level `k` uses step `h_k = 1 / (ℓ 2^k)` and the shift set
//! `I(k) = {0, .., ℓ 2^k - 1}`; `N_{k,s}(x) = Σ_n M_ℓ((x + n)/h_k - s)`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::laurent::{rational_to_f64, Rational};

/// Step `h_k = 1/(ℓ 2^k)`.
pub fn level_step(ell: u32, k: u32) -> f64 {
    1.0 / level_size(ell, k) as f64
}

/// `|I(k)| = ℓ 2^k`.
pub fn level_size(ell: u32, k: u32) -> usize {
    (ell as usize) << k
}

pub(crate) fn check_order(ell: u32) -> Result<()> {
    if ell < 2 || !ell.is_multiple_of(2) {
        return Err(Error::InvalidOrder(ell));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CardinalSpline {
    ell: u32,
    pieces: Vec<Vec<Rational>>,
    pieces_f64: Vec<Vec<f64>>,
}

impl CardinalSpline {
    pub fn new(ell: u32) -> Result<Self> {
        check_order(ell)?;
        let mut pieces = vec![vec![Rational::one()]];
        for order in 1..ell as usize {
            let anti: Vec<Vec<Rational>> = pieces.iter().map(|p| antiderivative(p)).collect();
            let mut next = Vec::with_capacity(order + 1);
            for j in 0..=order {
                // ∫_{x-1}^{x} M_order on [j, j+1): tail of piece j-1 plus head of piece j.
                let mut piece = vec![Rational::zero(); order + 1];
                if j >= 1 {
                    let prev = &anti[j - 1];
                    piece[0] += eval_exact(prev, &Rational::one());
                    for (i, c) in prev.iter().enumerate() {
                        piece[i] -= c;
                    }
                }
                if j < order {
                    for (i, c) in anti[j].iter().enumerate() {
                        piece[i] += c;
                    }
                }
                next.push(piece);
            }
            pieces = next;
        }
        let pieces_f64 = pieces.iter().map(|p| p.iter().map(rational_to_f64).collect()).collect();
        Ok(Self { ell, pieces, pieces_f64 })
    }

    pub fn order(&self) -> u32 {
        self.ell
    }

    /// Exact coefficients of `M_ℓ(j + u)` in ascending powers of `u`.
    pub fn piece(&self, j: usize) -> &[Rational] {
        &self.pieces[j]
    }

    /// `M_ℓ(j + u)` for `u ∈ [0, 1)`.
    #[inline]
    pub fn eval_piece(&self, j: usize, u: f64) -> f64 {
        self.pieces_f64[j].iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// `M_ℓ(x)`, zero outside `[0, ℓ)`.
    pub fn eval(&self, x: f64) -> f64 {
        if !(0.0..self.ell as f64).contains(&x) {
            return 0.0;
        }
        let j = x.floor();
        self.eval_piece(j as usize, x - j)
    }

    /// `N_{k,s}(x)`.
    pub fn eval_periodic(&self, k: u32, s: usize, x: f64) -> Result<f64> {
        let n = level_size(self.ell, k);
        if s >= n {
            return Err(Error::IndexOutOfRange { k, s, len: n });
        }
        let t = x.rem_euclid(1.0) * n as f64;
        let u = (t - s as f64).rem_euclid(n as f64);
        Ok(self.eval(u))
    }

    /// Calls `visit(s, N_{k,s}(x))` for the ℓ shifts whose support touches `x`.
    #[inline]
    pub fn for_each_active(&self, k: u32, x: f64, mut visit: impl FnMut(usize, f64)) {
        let n = level_size(self.ell, k);
        let t = x.rem_euclid(1.0) * n as f64;
        let i = (t.floor() as usize).min(n - 1);
        let u = t - i as f64;
        for j in 0..self.ell as usize {
            let s = (i + n - j % n) % n;
            visit(s, self.eval_piece(j, u));
        }
    }

    /// `N_{k,s}(x) = Π_i N_{k_i,s_i}(x_i)`.
    pub fn eval_tensor(&self, k: &[u32], s: &[usize], x: &[f64]) -> Result<f64> {
        if s.len() != k.len() {
            return Err(Error::DimensionMismatch { expected: k.len(), got: s.len() });
        }
        if x.len() != k.len() {
            return Err(Error::DimensionMismatch { expected: k.len(), got: x.len() });
        }
        let mut acc = 1.0;
        for ((&ki, &si), &xi) in k.iter().zip(s).zip(x) {
            acc *= self.eval_periodic(ki, si, xi)?;
        }
        Ok(acc)
    }
}

/// Convenience wrapper building the spline table on every call.
pub fn eval_cardinal(ell: u32, x: f64) -> Result<f64> {
    Ok(CardinalSpline::new(ell)?.eval(x))
}

/// A single periodic dilate `N_{k,s}` of `M_ℓ`, validated on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicSpline {
    pub ell: u32,
    pub k: u32,
    pub s: usize,
}

impl PeriodicSpline {
    pub fn new(ell: u32, k: u32, s: usize) -> Result<Self> {
        check_order(ell)?;
        let len = level_size(ell, k);
        if s >= len {
            return Err(Error::IndexOutOfRange { k, s, len });
        }
        Ok(Self { ell, k, s })
    }

    pub fn eval(&self, spline: &CardinalSpline, x: f64) -> Result<f64> {
        if spline.order() != self.ell {
            return Err(Error::InvalidArgument(format!(
                "spline of order {} cannot evaluate N of order {}",
                spline.order(),
                self.ell
            )));
        }
        spline.eval_periodic(self.k, self.s, x)
    }
}

fn antiderivative(p: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] = c / Rational::from_integer((i as i64 + 1).into());
    }
    out
}

fn eval_exact(p: &[Rational], u: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * u + c)
}
