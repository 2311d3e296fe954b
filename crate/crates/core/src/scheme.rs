//! Quasi-interpolation schemes: a B-spline order ℓ plus an even mask Λ.
//!
//! [`QIScheme::build`] derives, in exact arithmetic, the symbol
//! `P_Λ(z) = z^{ℓ/2} Σ λ(s) z^s`, the refinement symbols `P'_even`/`P'_odd`,
//! the detail symbols `P_even = P_Λ - P'_even`, `P_odd = z P_Λ - P'_odd`, and
//! their reduced forms `P* = P / (z - 1)^ℓ`. Everything the numerical code
//! needs is then frozen into [`ShiftOperator`]s.
//!
//! The odd symbols act from the even node to the left: for odd `s` the
//! coefficient is `T^{[P*_odd]} ∘ Δ^ℓ f((s - 1) h)`. With this anchoring the
//! cubic scheme gives `P*_odd = (z² + 4z + 1) / 12`.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bspline::{check_order, CardinalSpline};
use crate::error::{Error, Result};
use crate::laurent::{
    binomial_rational, format_rational, parse_rational, rational, rational_to_f64, LaurentPoly,
    Rational, ShiftOperator,
};

/// Relative residual allowed when checking polynomial reproduction.
pub const REPRODUCTION_TOL: f64 = 1e-10;

/// Names accepted by [`QIScheme::builtin`].
pub const BUILTIN_SCHEMES: [&str; 2] = ["faber", "cubic"];

#[derive(Clone, Debug)]
pub struct QIScheme {
    name: String,
    ell: u32,
    mu: usize,
    lambda: Vec<Rational>,
    spline: Arc<CardinalSpline>,
    symbols: Symbols,
    ops: FrozenOps,
    warnings: Vec<String>,
}

/// Exact symbols derived from the mask.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Symbols {
    pub p_lambda: LaurentPoly,
    pub p_even_prime: LaurentPoly,
    pub p_odd_prime: LaurentPoly,
    pub p_even: LaurentPoly,
    pub p_odd: LaurentPoly,
    pub p_even_star: LaurentPoly,
    pub p_odd_star: LaurentPoly,
    pub d_ell: LaurentPoly,
}

#[derive(Clone, Debug)]
pub(crate) struct FrozenOps {
    pub lambda: ShiftOperator,
    pub even_star: ShiftOperator,
    pub odd_star: ShiftOperator,
    pub diff: ShiftOperator,
    /// `λ(j)` for `j = -μ..=μ` as floats.
    pub mask: Vec<f64>,
}

/// On-disk mask description: `{"ell": 4, "lambda": ["-1/6", "4/3", "-1/6"]}`,
/// with `lambda` listing `λ(-μ), .., λ(μ)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MaskFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub ell: u32,
    pub lambda: Vec<String>,
}

impl QIScheme {
    /// Derives and validates a scheme from `λ(-μ), .., λ(μ)`.
    pub fn build(ell: u32, lambda: &[Rational]) -> Result<Self> {
        Self::build_named("custom", ell, lambda)
    }

    pub fn build_named(name: &str, ell: u32, lambda: &[Rational]) -> Result<Self> {
        check_order(ell)?;
        if lambda.len().is_multiple_of(2) {
            return Err(Error::InvalidMask(format!(
                "mask must list λ(-μ..=μ), got an even length {}",
                lambda.len()
            )));
        }
        let mu = lambda.len() / 2;
        if (0..mu).any(|j| lambda[j] != lambda[lambda.len() - 1 - j]) {
            return Err(Error::InvalidMask("mask is not symmetric, λ(-j) ≠ λ(j)".into()));
        }
        if mu + 1 < ell as usize / 2 {
            return Err(Error::InvalidMask(format!("half-width μ = {mu} is below ℓ/2 - 1")));
        }

        let symbols = derive_symbols(ell, mu, lambda)?;
        let mut warnings = Vec::new();
        for (label, p) in [("P*_even", &symbols.p_even_star), ("P*_odd", &symbols.p_odd_star)] {
            if !p.is_palindromic() {
                warnings.push(format!("{label} = {p} is not symmetric"));
            }
        }
        let ops = FrozenOps {
            lambda: ShiftOperator::new(&symbols.p_lambda),
            even_star: ShiftOperator::new(&symbols.p_even_star),
            // odd symbols are anchored one node to the left of `s h`
            odd_star: ShiftOperator::new(&(&symbols.p_odd_star * &LaurentPoly::monomial(Rational::one(), -1))),
            diff: ShiftOperator::new(&symbols.d_ell),
            mask: lambda.iter().map(rational_to_f64).collect(),
        };
        let scheme = Self {
            name: name.to_string(),
            ell,
            mu,
            lambda: lambda.to_vec(),
            spline: Arc::new(CardinalSpline::new(ell)?),
            symbols,
            ops,
            warnings,
        };
        let residual = scheme.reproduction_residual();
        if !(residual < REPRODUCTION_TOL) {
            return Err(Error::NotAQuasiInterpolant(format!(
                "polynomial reproduction residual {residual:.3e} exceeds {REPRODUCTION_TOL:e}"
            )));
        }
        Ok(scheme)
    }

    /// `faber`: ℓ = 2, λ(0) = 1. `cubic`: ℓ = 4, λ = (-1/6, 4/3, -1/6).
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "faber" => Self::build_named("faber", 2, &[rational(1, 1)]),
            "cubic" => {
                Self::build_named("cubic", 4, &[rational(-1, 6), rational(8, 6), rational(-1, 6)])
            }
            other => Err(Error::InvalidArgument(format!(
                "unknown builtin scheme {other:?}, expected one of {BUILTIN_SCHEMES:?}"
            ))),
        }
    }

    pub fn from_mask_file(mask: &MaskFile) -> Result<Self> {
        let lambda = mask.lambda.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
        Self::build_named(mask.name.as_deref().unwrap_or("custom"), mask.ell, &lambda)
    }

    pub fn from_mask_json(json: &str) -> Result<Self> {
        let mask: MaskFile =
            serde_json::from_str(json).map_err(|e| Error::InvalidMask(e.to_string()))?;
        Self::from_mask_file(&mask)
    }

    pub fn mask_file(&self) -> MaskFile {
        MaskFile {
            name: Some(self.name.clone()),
            ell: self.ell,
            lambda: self.lambda.iter().map(format_rational).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    /// `λ(j)` for `j ∈ -μ..=μ`.
    pub fn lambda(&self, j: i64) -> Rational {
        let i = j + self.mu as i64;
        if i < 0 || i as usize >= self.lambda.len() {
            Rational::zero()
        } else {
            self.lambda[i as usize].clone()
        }
    }

    pub fn symbols(&self) -> &Symbols {
        &self.symbols
    }

    pub fn spline(&self) -> &Arc<CardinalSpline> {
        &self.spline
    }

    pub(crate) fn ops(&self) -> &FrozenOps {
        &self.ops
    }

    /// Non-fatal findings from construction, e.g. an asymmetric `P*`.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `‖Λ‖ = Σ |λ(j)|`.
    pub fn mask_norm(&self) -> Rational {
        self.lambda.iter().fold(Rational::zero(), |acc, c| acc + num_traits::Signed::abs(c))
    }

    /// `sup_x Σ_s |Σ_j λ(j) M(x - j - s)|`, sampled on a uniform grid of `[0, 1)`.
    pub fn lebesgue_constant(&self, samples: usize) -> f64 {
        let mu = self.mu as i64;
        let ell = self.ell as i64;
        (0..samples)
            .map(|i| {
                let x = i as f64 / samples as f64;
                (-(mu + ell)..=mu + 1)
                    .map(|s| {
                        (-mu..=mu)
                            .map(|j| self.ops.mask[(j + mu) as usize] * self.spline.eval(x - (j + s) as f64))
                            .sum::<f64>()
                            .abs()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative error of the non-periodic operator
    /// `Q(g)(x) = Σ_s Λ(g, s) M(x - s)` on the monomials `x^j`, `j < ℓ`,
    /// over a window around the origin.
    pub fn reproduction_residual(&self) -> f64 {
        let ell = self.ell as i64;
        let mu = self.mu as i64;
        let mut worst: f64 = 0.0;
        for deg in 0..self.ell as i32 {
            let g = |x: f64| x.powi(deg);
            for i in 0..=40 {
                let x = -2.0 + 4.0 * i as f64 / 40.0 + 1e-3;
                let lo = (x - ell as f64).ceil() as i64;
                let hi = x.floor() as i64;
                let q: f64 = (lo..=hi)
                    .map(|s| {
                        let coeff: f64 = (-mu..=mu)
                            .map(|j| self.ops.mask[(j + mu) as usize] * g((s - j) as f64 + ell as f64 / 2.0))
                            .sum();
                        coeff * self.spline.eval(x - s as f64)
                    })
                    .sum();
                let scale = (2.0 + ell as f64 + mu as f64).powi(deg).max(1.0);
                worst = worst.max((q - g(x)).abs() / scale);
            }
        }
        worst
    }
}

fn derive_symbols(ell: u32, mu: usize, lambda: &[Rational]) -> Result<Symbols> {
    let half = ell / 2;
    let p_lambda = LaurentPoly::new(half as i64 - mu as i64, lambda.to_vec());
    let p_lambda_sq = p_lambda.substitute_z_squared();
    let scale = Rational::one() / Rational::from_integer((1i64 << (ell - 1)).into());

    let even_sum = (0..=half).fold(LaurentPoly::zero(), |acc, j| {
        &acc + &LaurentPoly::monomial(binomial_rational(ell, 2 * j), -2 * j as i64)
    });
    let odd_sum = (0..half).fold(LaurentPoly::zero(), |acc, j| {
        &acc + &LaurentPoly::monomial(binomial_rational(ell, 2 * j + 1), -2 * j as i64)
    });
    let p_even_prime = (&p_lambda_sq * &even_sum).scale(&scale);
    let p_odd_prime = (&p_lambda_sq * &odd_sum).scale(&scale);
    let p_even = &p_lambda - &p_even_prime;
    // The odd family is read relative to the even node (s - 1) h, so both
    // P_Λ and P'_odd carry one fewer power of z than at s h.
    let p_odd = &(&p_lambda * &LaurentPoly::monomial(Rational::one(), 1)) - &p_odd_prime;

    let d_ell = LaurentPoly::z_minus_one_pow(ell);
    let reduce = |label: &str, p: &LaurentPoly| {
        p.divide_exact(&d_ell).map_err(|_| {
            Error::NotAQuasiInterpolant(format!(
                "{label} = {p} has no factor (z - 1)^{ell}; Q does not annihilate degree < {ell}"
            ))
        })
    };
    let p_even_star = reduce("P_even", &p_even)?;
    let p_odd_star = reduce("P_odd", &p_odd)?;
    Ok(Symbols { p_lambda, p_even_prime, p_odd_prime, p_even, p_odd, p_even_star, p_odd_star, d_ell })
}
