//! Exact polynomials over `Z/p^N`.

use std::fmt;

use crate::coeff::PrecisionContext;
use crate::error::{Error, Result};

/// A polynomial over `Z/p^N` with no implied truncation in `T`.
///
/// Coefficients are stored lowest degree first with trailing zeros removed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<u64>,
    ctx: PrecisionContext,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly{:?}", self.coeffs)
    }
}

impl Poly {
    pub fn zero(ctx: &PrecisionContext) -> Self {
        Poly { coeffs: Vec::new(), ctx: *ctx }
    }

    pub fn one(ctx: &PrecisionContext) -> Self {
        Self::constant(ctx, 1)
    }

    pub fn constant(ctx: &PrecisionContext, c: i64) -> Self {
        Self::from_i64(ctx, &[c])
    }

    /// `c·T^k`.
    pub fn monomial(ctx: &PrecisionContext, c: i64, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = ctx.reduce_i64(c);
        Self::from_raw(ctx, coeffs)
    }

    pub fn from_i64(ctx: &PrecisionContext, coeffs: &[i64]) -> Self {
        Self::from_raw(ctx, coeffs.iter().map(|&c| ctx.reduce_i64(c)).collect())
    }

    /// Takes already reduced coefficients.
    pub fn from_raw(ctx: &PrecisionContext, mut coeffs: Vec<u64>) -> Self {
        debug_assert!(coeffs.iter().all(|&c| c < ctx.modulus()));
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Poly { coeffs, ctx: *ctx }
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Coefficients in the symmetric range around zero.
    pub fn to_i64(&self) -> Vec<i64> {
        self.coeffs.iter().map(|&c| self.ctx.symmetric(c)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Number of stored coefficients (`degree + 1`, or 0 for zero).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let ctx = &self.ctx;
        let n = self.len().max(other.len());
        let coeffs = (0..n).map(|i| ctx.add(self.coeff(i), other.coeff(i))).collect();
        Poly::from_raw(ctx, coeffs)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let ctx = &self.ctx;
        let n = self.len().max(other.len());
        let coeffs = (0..n).map(|i| ctx.sub(self.coeff(i), other.coeff(i))).collect();
        Poly::from_raw(ctx, coeffs)
    }

    pub fn neg(&self) -> Poly {
        let coeffs = self.coeffs.iter().map(|&c| self.ctx.neg(c)).collect();
        Poly::from_raw(&self.ctx, coeffs)
    }

    pub fn scale(&self, k: u64) -> Poly {
        let coeffs = self.coeffs.iter().map(|&c| self.ctx.mul(c, k)).collect();
        Poly::from_raw(&self.ctx, coeffs)
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(&self.ctx);
        }
        Poly::from_raw(&self.ctx, mul_series(&self.ctx, &self.coeffs, &other.coeffs, usize::MAX))
    }

    /// Multiplication by `T^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Poly { coeffs, ctx: self.ctx }
    }

    /// Keeps the terms of degree below `k`.
    pub fn truncate(&self, k: usize) -> Poly {
        Poly::from_raw(&self.ctx, self.coeffs.iter().take(k).copied().collect())
    }

    /// Evaluates at an integer point.
    pub fn eval(&self, x: u64) -> u64 {
        let ctx = &self.ctx;
        let x = x % ctx.modulus();
        self.coeffs.iter().rev().fold(0, |acc, &c| ctx.add(ctx.mul(acc, x), c))
    }

    /// Quotient and remainder by a monic polynomial.
    pub fn div_rem_monic(&self, m: &Poly) -> Result<(Poly, Poly)> {
        let d = m.degree().ok_or(Error::NotDistinguished)?;
        if m.coeffs[d] != 1 {
            return Err(Error::NotDistinguished);
        }
        let ctx = &self.ctx;
        let mut r = self.coeffs.clone();
        if r.len() <= d {
            return Ok((Poly::zero(ctx), self.clone()));
        }
        let mut q = vec![0; r.len() - d];
        for i in (d..r.len()).rev() {
            let c = r[i];
            if c == 0 {
                continue;
            }
            q[i - d] = c;
            for j in 0..=d {
                r[i - d + j] = ctx.sub_mul(r[i - d + j], c, m.coeffs[j]);
            }
        }
        r.truncate(d);
        Ok((Poly::from_raw(ctx, q), Poly::from_raw(ctx, r)))
    }

    /// Minimal coefficient valuation, or `None` for zero.
    pub fn content_valuation(&self) -> Option<u32> {
        self.coeffs.iter().filter_map(|&c| self.ctx.valuation(c)).min()
    }

    /// `(λ, μ)` of `Λ/(f)` for this exact polynomial: `μ` is the content
    /// valuation and `λ` the first index where it is attained.
    pub fn invariants(&self) -> Result<(usize, u32)> {
        let mu = self
            .content_valuation()
            .ok_or_else(|| Error::PrecisionExhausted("polynomial vanishes modulo p^N".into()))?;
        let lambda = self.coeffs.iter().position(|&c| self.ctx.valuation(c) == Some(mu)).expect("minimum is attained");
        Ok((lambda, mu))
    }

    /// `(1+T)^k − 1`.
    pub fn one_plus_t_pow_minus_one(ctx: &PrecisionContext, k: usize) -> Poly {
        // binomial coefficients by Pascal's rule modulo p^N
        let mut row = vec![0u64; k + 1];
        row[0] = 1;
        for i in 1..=k {
            for j in (1..=i).rev() {
                row[j] = ctx.add(row[j], row[j - 1]);
            }
        }
        row[0] = 0;
        Poly::from_raw(ctx, row)
    }
}

/// Product of two coefficient slices truncated to `limit` terms.
pub(crate) fn mul_series(ctx: &PrecisionContext, a: &[u64], b: &[u64], limit: usize) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let n = (a.len() + b.len() - 1).min(limit);
    let mut out = vec![0u64; n];
    if ctx.modulus() < (1 << 32) {
        // accumulate in u128 and reduce once per output slot
        let mut acc = vec![0u128; n];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 || i >= n {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(n - i) {
                acc[i + j] += (x * y) as u128;
            }
        }
        let m = ctx.modulus() as u128;
        for (o, s) in out.iter_mut().zip(acc) {
            *o = (s % m) as u64;
        }
    } else {
        for (i, &x) in a.iter().enumerate() {
            if x == 0 || i >= n {
                continue;
            }
            for (j, &y) in b.iter().enumerate().take(n - i) {
                out[i + j] = ctx.add(out[i + j], ctx.mul(x, y));
            }
        }
    }
    out
}

/// Inverse of a power series with unit constant term, modulo `T^limit`.
pub(crate) fn inv_series(ctx: &PrecisionContext, h: &[u64], limit: usize) -> Result<Vec<u64>> {
    let c0 = ctx.inv(*h.first().ok_or(Error::NotAUnit)?)?;
    let mut out = vec![0u64; limit];
    if limit == 0 {
        return Ok(out);
    }
    out[0] = c0;
    for k in 1..limit {
        let mut s = 0u64;
        for j in 1..=k.min(h.len() - 1) {
            s = ctx.add(s, ctx.mul(h[j], out[k - j]));
        }
        out[k] = ctx.mul(ctx.neg(s), c0);
    }
    Ok(out)
}
