//! Exact univariate Laurent polynomials over the rationals.
//!
//! A [`LaurentPoly`] stores `Σ c_i z^(lo + i)` with arbitrary-precision
//! rational coefficients and is always kept in canonical (trimmed) form, so
//! structural equality is polynomial equality. The quasi-interpolation symbols
//! are derived here symbolically; floating point only enters through
//! [`ShiftOperator`], which freezes a polynomial into `(offset, weight)` taps.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Formats as `"num/den"`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a bare integer `"num"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad rational {s:?}: {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(parse_int(n)?, den))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn binomial(n: u32, k: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Binomial coefficient as a rational.
pub fn binomial_rational(n: u32, k: u32) -> Rational {
    Rational::from_integer(binomial(n, k))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LaurentPoly {
    lo: i64,
    coeffs: Vec<Rational>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self { lo: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(Rational::one(), 0)
    }

    pub fn monomial(c: Rational, exp: i64) -> Self {
        Self::new(exp, vec![c])
    }

    /// Builds `Σ coeffs[i] z^(lo + i)` and trims it to canonical form.
    pub fn new(lo: i64, coeffs: Vec<Rational>) -> Self {
        let mut p = Self { lo, coeffs };
        p.canonicalize();
        p
    }

    pub fn from_ints(lo: i64, coeffs: &[i64]) -> Self {
        Self::new(lo, coeffs.iter().map(|&c| Rational::from_integer(c.into())).collect())
    }

    /// `(z - 1)^n`, the symbol of the n-th forward difference.
    pub fn z_minus_one_pow(n: u32) -> Self {
        let coeffs = (0..=n)
            .map(|j| {
                let c = binomial(n, j);
                Rational::from_integer(if (n - j).is_multiple_of(2) { c } else { -c })
            })
            .collect();
        Self::new(0, coeffs)
    }

    fn canonicalize(&mut self) {
        let Some(first) = self.coeffs.iter().position(|c| !c.is_zero()) else {
            self.coeffs.clear();
            self.lo = 0;
            return;
        };
        let last = self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap();
        self.coeffs.truncate(last + 1);
        self.coeffs.drain(..first);
        self.lo += first as i64;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest exponent carrying a nonzero coefficient (0 for the zero polynomial).
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Highest exponent carrying a nonzero coefficient (`lo - 1` for zero).
    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, exp: i64) -> Rational {
        let i = exp - self.lo;
        if i < 0 || i >= self.coeffs.len() as i64 {
            Rational::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Nonzero terms as `(exponent, coefficient)`, ascending in exponent.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.lo + i as i64, c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.lo, self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `q(z) = p(z^2)`.
    pub fn substitute_z_squared(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![Rational::zero(); 2 * self.coeffs.len() - 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[2 * i] = c.clone();
        }
        Self::new(2 * self.lo, coeffs)
    }

    /// Returns `r` with `self = divisor * r`, or [`Error::NotDivisible`].
    pub fn divide_exact(&self, divisor: &LaurentPoly) -> Result<LaurentPoly> {
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        // Both are z^lo times an ordinary polynomial with nonzero constant term,
        // so ordinary long division decides divisibility.
        let num = &self.coeffs;
        let den = &divisor.coeffs;
        if num.len() < den.len() {
            return Err(self.not_divisible(divisor));
        }
        let mut rem = num.clone();
        let qlen = num.len() - den.len() + 1;
        let mut quot = vec![Rational::zero(); qlen];
        let lead = den.last().unwrap();
        for i in (0..qlen).rev() {
            let c = &rem[i + den.len() - 1] / lead;
            if c.is_zero() {
                continue;
            }
            for (j, d) in den.iter().enumerate() {
                rem[i + j] -= &c * d;
            }
            quot[i] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(self.not_divisible(divisor));
        }
        Ok(Self::new(self.lo - divisor.lo, quot))
    }

    fn not_divisible(&self, divisor: &LaurentPoly) -> Error {
        Error::NotDivisible { dividend: self.to_string(), divisor: divisor.to_string() }
    }

    /// `Σ |c_s|`.
    pub fn coeff_abs_sum(&self) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |acc, c| acc + c.abs())
    }

    /// Coefficient sequence reads the same in both directions.
    pub fn is_palindromic(&self) -> bool {
        let n = self.coeffs.len();
        (0..n / 2).all(|i| self.coeffs[i] == self.coeffs[n - 1 - i])
    }

    /// `Σ_s c_s f(x + s h)`, converting coefficients on the fly.
    ///
    /// Hot paths should freeze the polynomial once with [`ShiftOperator::new`].
    pub fn apply_shift_operator(&self, h: f64, f: impl Fn(f64) -> f64, x: f64) -> f64 {
        ShiftOperator::new(self).apply(h, f, x)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exp, c) in self.terms().collect::<Vec<_>>().into_iter().rev() {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag.is_one();
            // fractions are set apart from the variable, integers are not
            let sep = if mag.is_integer() { "" } else { " " };
            if !unit || exp == 0 {
                write!(f, "{mag}")?;
            }
            match exp {
                0 => {}
                1 => write!(f, "{sep}z")?,
                e => write!(f, "{sep}z^{e}")?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(rhs.lo);
        let hi = self.hi().max(rhs.hi());
        let coeffs = (lo..=hi).map(|e| self.coeff(e) + rhs.coeff(e)).collect();
        LaurentPoly::new(lo, coeffs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { lo: self.lo, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly::new(self.lo + rhs.lo, coeffs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[derive(Serialize, Deserialize)]
struct LaurentJson {
    lo: i64,
    coeffs: Vec<String>,
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        LaurentJson { lo: self.lo, coeffs: self.coeffs.iter().map(format_rational).collect() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = LaurentJson::deserialize(deserializer)?;
        let coeffs = raw
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(LaurentPoly::new(raw.lo, coeffs))
    }
}

/// Floating-point image of `T_h^{[P]}`: `f ↦ Σ_s c_s f(· + s h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftOperator {
    taps: Vec<(i64, f64)>,
}

impl ShiftOperator {
    pub fn new(p: &LaurentPoly) -> Self {
        Self { taps: p.terms().map(|(e, c)| (e, rational_to_f64(c))).collect() }
    }

    pub fn taps(&self) -> &[(i64, f64)] {
        &self.taps
    }

    pub fn is_zero(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn apply(&self, h: f64, f: impl Fn(f64) -> f64, x: f64) -> f64 {
        self.taps.iter().map(|&(e, w)| w * f(x + e as f64 * h)).sum()
    }

    /// Circular filter on a periodic lattice: `out[i] = Σ w · data[(i + e) mod n]`.
    pub fn apply_periodic(&self, data: &[f64], i: usize) -> f64 {
        let n = data.len() as i64;
        self.taps
            .iter()
            .map(|&(e, w)| w * data[(i as i64 + e).rem_euclid(n) as usize])
            .sum()
    }
}
