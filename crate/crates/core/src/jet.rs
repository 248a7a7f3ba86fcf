//! Scalar abstraction and truncated multivariate Taylor numbers.
//!
//! A [`Jet`] is an element of the algebra generated by up to
//! [`MAX_GENERATORS`] nilpotent infinitesimals `ε_0 … ε_{k-1}` with
//! `ε_i² = 0`. Coefficients are indexed by the bitmask of the generators in
//! each monomial, so a jet with `k` active generators carries `2^k`
//! coefficients. Evaluating a smooth map on `x + ε_i v` and reading the `ε_i`
//! coefficient gives the exact directional derivative; nesting generators
//! gives exact mixed higher derivatives, which is what iterated Lie brackets
//! and Lie derivatives need.
//!
//! Model code is written once against [`Scalar`] and runs on plain `f64`
//! for simulation and on `Jet` for differentiation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Maximum number of nilpotent generators (nesting depth of derivatives).
pub const MAX_GENERATORS: usize = 6;
const LEN: usize = 1 << MAX_GENERATORS;

/// Number type the vector fields are generic over.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Real (non-infinitesimal) part.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn recip(self) -> Self;

    fn tan(self) -> Self {
        self.sin() / self.cos()
    }

    fn sqr(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn recip(self) -> Self {
        1.0 / self
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
}

/// Truncated Taylor number over nilpotent generators.
#[derive(Clone, Copy)]
pub struct Jet {
    coeffs: [f64; LEN],
    gens: u8,
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut coeffs = [0.0; LEN];
        coeffs[0] = v;
        Self { coeffs, gens: 0 }
    }

    /// Number of generators that may carry nonzero coefficients.
    pub fn generators(&self) -> usize {
        self.gens as usize
    }

    fn size(&self) -> usize {
        1 << self.gens
    }

    /// Coefficient of the monomial whose generator set is `mask`.
    pub fn coeff(&self, mask: usize) -> f64 {
        self.coeffs.get(mask).copied().unwrap_or(0.0)
    }

    /// Multiply by the infinitesimal `ε_gen`. Components already carrying
    /// `ε_gen` vanish.
    pub fn times_generator(&self, gen: usize) -> Self {
        assert!(gen < MAX_GENERATORS, "generator index out of range");
        let bit = 1 << gen;
        let gens = self.gens.max(gen as u8 + 1);
        let mut out = [0.0; LEN];
        for s in 0..self.size() {
            if s & bit == 0 {
                out[s | bit] = self.coeffs[s];
            }
        }
        Self { coeffs: out, gens }
    }

    /// The coefficient of `ε_gen`, i.e. the exact derivative along the
    /// direction that was attached to that generator.
    pub fn generator_part(&self, gen: usize) -> Self {
        let bit = 1 << gen;
        let mut out = [0.0; LEN];
        if gen < self.gens as usize {
            for s in 0..self.size() {
                if s & bit == 0 {
                    out[s] = self.coeffs[s | bit];
                }
            }
        }
        Self {
            coeffs: out,
            gens: self.gens,
        }
    }

    /// `Σ_j d[j]·n^j` where `n` is the nilpotent part of `self`.
    fn compose(&self, derivs: &[f64]) -> Self {
        let mut nil = *self;
        nil.coeffs[0] = 0.0;
        let mut acc = Jet::constant(derivs[derivs.len() - 1]);
        acc.gens = self.gens;
        for d in derivs.iter().rev().skip(1) {
            acc = acc * nil + *d;
        }
        acc
    }

    fn series_len(&self) -> usize {
        self.gens as usize + 1
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("gens", &self.gens)
            .field("coeffs", &&self.coeffs[..self.size()])
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.gens = self.gens.max(rhs.gens);
        let n = self.size();
        for (a, b) in self.coeffs[..n].iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.gens = self.gens.max(rhs.gens);
        let n = self.size();
        for (a, b) in self.coeffs[..n].iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        let n = self.size();
        for a in self.coeffs[..n].iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let gens = self.gens.max(rhs.gens);
        let size = 1usize << gens;
        let mut out = [0.0; LEN];
        // subset convolution: c[S] = Σ_{T ⊆ S} a[T]·b[S∖T]
        for (s, slot) in out.iter_mut().enumerate().take(size) {
            let mut acc = 0.0;
            let mut t = s;
            loop {
                acc += self.coeffs[t] * rhs.coeffs[s ^ t];
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            *slot = acc;
        }
        Jet { coeffs: out, gens }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        let n = self.size();
        for a in self.coeffs[..n].iter_mut() {
            *a *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(mut self, rhs: f64) -> Jet {
        let n = self.size();
        for a in self.coeffs[..n].iter_mut() {
            *a /= rhs;
        }
        self
    }
}

impl Scalar for Jet {
    fn cst(v: f64) -> Self {
        Jet::constant(v)
    }

    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn sin(self) -> Self {
        let a = self.coeffs[0];
        let (s, c) = a.sin_cos();
        let cycle = [s, c, -s, -c];
        let mut d = Vec::with_capacity(self.series_len());
        let mut fact = 1.0;
        for j in 0..self.series_len() {
            if j > 0 {
                fact *= j as f64;
            }
            d.push(cycle[j % 4] / fact);
        }
        self.compose(&d)
    }

    fn cos(self) -> Self {
        let a = self.coeffs[0];
        let (s, c) = a.sin_cos();
        let cycle = [c, -s, -c, s];
        let mut d = Vec::with_capacity(self.series_len());
        let mut fact = 1.0;
        for j in 0..self.series_len() {
            if j > 0 {
                fact *= j as f64;
            }
            d.push(cycle[j % 4] / fact);
        }
        self.compose(&d)
    }

    fn exp(self) -> Self {
        let e = self.coeffs[0].exp();
        let mut d = Vec::with_capacity(self.series_len());
        let mut fact = 1.0;
        for j in 0..self.series_len() {
            if j > 0 {
                fact *= j as f64;
            }
            d.push(e / fact);
        }
        self.compose(&d)
    }

    fn recip(self) -> Self {
        let a = self.coeffs[0];
        let mut d = Vec::with_capacity(self.series_len());
        let mut term = 1.0 / a;
        for _ in 0..self.series_len() {
            d.push(term);
            term *= -1.0 / a;
        }
        self.compose(&d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(v: f64, gen: usize) -> Jet {
        Jet::constant(v) + Jet::constant(1.0).times_generator(gen)
    }

    #[test]
    fn first_derivatives_of_elementary_functions() {
        let x = seed(0.7, 0);
        assert!((x.sin().coeff(1) - 0.7f64.cos()).abs() < 1e-15);
        assert!((x.cos().coeff(1) + 0.7f64.sin()).abs() < 1e-15);
        assert!((x.exp().coeff(1) - 0.7f64.exp()).abs() < 1e-15);
        assert!((x.recip().coeff(1) + 1.0 / 0.49).abs() < 1e-14);
        let t = x.tan();
        assert!((t.coeff(1) - 1.0 / 0.7f64.cos().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn mixed_generators_give_higher_derivatives() {
        // d³/dx³ sin x at 0.3 via three independent seeds of the same variable
        let x = Jet::constant(0.3)
            + Jet::constant(1.0).times_generator(0)
            + Jet::constant(1.0).times_generator(1)
            + Jet::constant(1.0).times_generator(2);
        let s = x.sin();
        assert!((s.coeff(0b111) + 0.3f64.cos()).abs() < 1e-14);
        assert!((s.coeff(0b011) + 0.3f64.sin()).abs() < 1e-14);
        let r = x.recip();
        // third derivative of 1/x is -6/x⁴
        assert!((r.coeff(0b111) + 6.0 / 0.3f64.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn generators_are_nilpotent() {
        let e = Jet::constant(1.0).times_generator(2);
        let sq = e * e;
        assert!((0..LEN).all(|m| sq.coeff(m) == 0.0));
        assert_eq!(e.times_generator(2).coeff(4), 0.0);
    }

    #[test]
    fn generator_part_extracts_derivative() {
        let x = seed(2.0, 1);
        let y = x * x * x; // derivative 3x² = 12
        let d = y.generator_part(1);
        assert!((d.value() - 12.0).abs() < 1e-14);
        assert_eq!(d.coeff(2), 0.0);
    }

    #[test]
    fn division_matches_product_rule() {
        let x = seed(1.5, 0);
        let q = x.sin() / (x * x + 1.0);
        let h = 1.5f64;
        let expected = (h.cos() * (h * h + 1.0) - h.sin() * 2.0 * h) / (h * h + 1.0).powi(2);
        assert!((q.coeff(1) - expected).abs() < 1e-14);
    }
}
