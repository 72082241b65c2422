//! Arithmetic in `Z/p^N` and exact linear algebra over it.
//!
//! Every residue is stored reduced in `[0, p^N)`. Moduli are kept below
//! `2^63` so that products fit in `u128`; contexts whose modulus is below
//! `2^32` use plain `u64` products.

use std::fmt;

use crate::error::{Error, Result};

/// The working precision: a prime `p`, coefficients modulo `p^N` and power
/// series modulo `T^M`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    p: u64,
    coeff_precision: u32,
    t_precision: usize,
    modulus: u64,
}

impl fmt::Debug for PrecisionContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrecisionContext(p={}, N={}, M={})", self.p, self.coeff_precision, self.t_precision)
    }
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrecisionContext {
    pub fn new(p: u64, coeff_precision: u32, t_precision: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidContext(format!("{p} is not prime")));
        }
        if coeff_precision == 0 || t_precision == 0 {
            return Err(Error::InvalidContext("precisions N and M must be positive".into()));
        }
        let mut modulus: u64 = 1;
        for _ in 0..coeff_precision {
            modulus = modulus
                .checked_mul(p)
                .filter(|&m| m < (1u64 << 63))
                .ok_or_else(|| Error::InvalidContext(format!("{p}^{coeff_precision} does not fit below 2^63")))?;
        }
        Ok(PrecisionContext { p, coeff_precision, t_precision, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// `N`: residues live modulo `p^N`.
    pub fn coeff_precision(&self) -> u32 {
        self.coeff_precision
    }

    /// `M`: power series are truncated modulo `T^M`.
    pub fn t_precision(&self) -> usize {
        self.t_precision
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Same prime and coefficient precision, different `T`-window.
    pub fn with_t_precision(&self, t_precision: usize) -> Result<Self> {
        Self::new(self.p, self.coeff_precision, t_precision)
    }

    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.coeff_precision {
            return 0;
        }
        self.p.pow(k)
    }

    #[inline]
    pub fn reduce_i64(&self, x: i64) -> u64 {
        (x as i128).rem_euclid(self.modulus as i128) as u64
    }

    #[inline]
    pub fn reduce_i128(&self, x: i128) -> u64 {
        x.rem_euclid(self.modulus as i128) as u64
    }

    /// Representative in `(-p^N/2, p^N/2]`.
    #[inline]
    pub fn symmetric(&self, x: u64) -> i64 {
        if x > self.modulus / 2 {
            x as i64 - self.modulus as i64
        } else {
            x as i64
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.modulus < (1 << 32) {
            (a * b) % self.modulus
        } else {
            ((a as u128 * b as u128) % self.modulus as u128) as u64
        }
    }

    /// `a - k*b`, the elimination kernel.
    #[inline]
    pub fn sub_mul(&self, a: u64, k: u64, b: u64) -> u64 {
        self.sub(a, self.mul(k, b))
    }

    /// Largest `v < N` with `p^v | x`, or `None` when `x = 0`.
    pub fn valuation(&self, x: u64) -> Option<u32> {
        if x == 0 {
            return None;
        }
        let mut v = 0;
        let mut y = x;
        while y.is_multiple_of(self.p) {
            y /= self.p;
            v += 1;
        }
        Some(v)
    }

    pub fn inv(&self, x: u64) -> Result<u64> {
        if x.is_multiple_of(self.p) {
            return Err(Error::NotAUnit);
        }
        let (mut r0, mut r1) = (self.modulus as i128, x as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce_i128(t0))
    }

    pub fn residue(&self, x: i64) -> Residue {
        Residue { value: self.reduce_i64(x), ctx: *self }
    }
}

/// An element of `Z/p^N`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    ctx: PrecisionContext,
}

impl fmt::Debug for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.ctx.modulus)
    }
}

impl Residue {
    pub fn new(ctx: &PrecisionContext, value: i64) -> Self {
        ctx.residue(value)
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    /// `None` is the infinity marker: the residue is zero at this precision.
    pub fn valuation(&self) -> Option<u32> {
        self.ctx.valuation(self.value)
    }

    pub fn invert_unit(&self) -> Result<Residue> {
        Ok(Residue { value: self.ctx.inv(self.value)?, ctx: self.ctx })
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
}

macro_rules! residue_binop {
    ($tr:ident, $method:ident, $op:ident) => {
        impl std::ops::$tr for Residue {
            type Output = Residue;
            fn $method(self, rhs: Residue) -> Residue {
                assert_eq!(self.ctx, rhs.ctx, "residues from different contexts");
                Residue { value: self.ctx.$op(self.value, rhs.value), ctx: self.ctx }
            }
        }
    };
}
residue_binop!(Add, add, add);
residue_binop!(Sub, sub, sub);
residue_binop!(Mul, mul, mul);

impl std::ops::Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue { value: self.ctx.neg(self.value), ctx: self.ctx }
    }
}

/// Dense row-major matrix over `Z/p^N`.
#[derive(Clone, PartialEq, Eq)]
pub struct ResidueMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
    ctx: PrecisionContext,
}

impl fmt::Debug for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ResidueMatrix {}x{} mod {}", self.rows, self.cols, self.ctx.modulus)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[r * self.cols..(r + 1) * self.cols])?;
        }
        Ok(())
    }
}

impl ResidueMatrix {
    pub fn zeros(ctx: &PrecisionContext, rows: usize, cols: usize) -> Self {
        ResidueMatrix { rows, cols, data: vec![0; rows * cols], ctx: *ctx }
    }

    pub fn identity(ctx: &PrecisionContext, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(ctx: &PrecisionContext, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.iter().map(|&x| ctx.reduce_i64(x))).collect();
        Ok(ResidueMatrix { rows: rows.len(), cols, data, ctx: *ctx })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] = v % self.ctx.modulus;
    }

    pub fn entry(&self, r: usize, c: usize) -> Residue {
        Residue { value: self.get(r, c), ctx: self.ctx }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.ctx, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn mul(&self, other: &ResidueMatrix) -> Result<ResidueMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ctx = &self.ctx;
        let mut out = Self::zeros(ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = ctx.add(out.data[idx], ctx.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[u64]) -> Vec<u64> {
        (0..self.rows)
            .map(|r| (0..self.cols).fold(0, |acc, c| self.ctx.add(acc, self.ctx.mul(self.get(r, c), v[c]))))
            .collect()
    }

    /// Valuations of the nonzero elementary divisors, in pivot order.
    ///
    /// Full pivoting on minimal valuation; divisors that vanish modulo
    /// `p^N` are not reported.
    pub fn elementary_valuations(&self) -> Vec<u32> {
        let ctx = &self.ctx;
        let mut a = self.data.clone();
        let cols = self.cols;
        let mut rows_left: Vec<usize> = (0..self.rows).collect();
        let mut cols_left: Vec<usize> = (0..self.cols).collect();
        let mut out = Vec::new();
        loop {
            let mut best: Option<(u32, usize, usize)> = None;
            'search: for (ri, &r) in rows_left.iter().enumerate() {
                for (ci, &c) in cols_left.iter().enumerate() {
                    if let Some(v) = ctx.valuation(a[r * cols + c]) {
                        if best.is_none_or(|b| v < b.0) {
                            best = Some((v, ri, ci));
                            if v == 0 {
                                break 'search;
                            }
                        }
                    }
                }
            }
            let Some((v, ri, ci)) = best else { break };
            let r = rows_left.swap_remove(ri);
            let c = cols_left.swap_remove(ci);
            out.push(v);
            let pv = ctx.p_pow(v);
            let unit_inv = ctx.inv(a[r * cols + c] / pv).expect("cofactor is a unit");
            for &j in &cols_left {
                a[r * cols + j] = ctx.mul(a[r * cols + j], unit_inv);
            }
            for &s in &rows_left {
                let e = a[s * cols + c];
                if e == 0 {
                    continue;
                }
                let k = e / pv;
                for &j in &cols_left {
                    let x = a[r * cols + j];
                    if x != 0 {
                        a[s * cols + j] = ctx.sub_mul(a[s * cols + j], k, x);
                    }
                }
            }
        }
        out
    }

    /// `log_p` of the size of the column span.
    pub fn log_image_size(&self) -> u64 {
        let n = self.ctx.coeff_precision as u64;
        self.elementary_valuations().iter().map(|&v| n - v as u64).sum()
    }

    pub fn howell_form(&self) -> HowellForm {
        let ctx = self.ctx;
        let width = self.rows;
        let generators: Vec<Vec<u64>> =
            (0..self.cols).map(|c| (0..self.rows).map(|r| self.get(r, c)).collect()).collect();
        let basis = row_howell(&ctx, generators, width);
        let n = ctx.coeff_precision as u64;
        let log_image: u64 = basis.iter().map(|(_, v, _)| n - *v as u64).sum();
        let mut h = ResidueMatrix::zeros(&ctx, self.rows, basis.len());
        for (j, (_, _, row)) in basis.iter().enumerate() {
            for (i, &x) in row.iter().enumerate() {
                h.data[i * basis.len() + j] = x;
            }
        }
        HowellForm { h, log_kernel_size: self.cols as u64 * n - log_image, log_image_size: log_image }
    }
}

/// Howell normal form of the column span of a matrix.
///
/// Columns of `h` are the canonical generators: column `j` has its leading
/// entry `p^v` in a row strictly below that of column `j-1`, entries of
/// other columns in that row are reduced modulo `p^v`, and the span has the
/// Howell property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HowellForm {
    pub h: ResidueMatrix,
    pub log_kernel_size: u64,
    pub log_image_size: u64,
}

fn scale_row(ctx: &PrecisionContext, row: &mut [u64], k: u64) {
    for x in row.iter_mut() {
        *x = ctx.mul(*x, k);
    }
}

fn row_howell(ctx: &PrecisionContext, mut work: Vec<Vec<u64>>, width: usize) -> Vec<(usize, u32, Vec<u64>)> {
    let nprec = ctx.coeff_precision;
    work.retain(|r| r.iter().any(|&x| x != 0));
    let mut done: Vec<(usize, u32, Vec<u64>)> = Vec::new();
    for c in 0..width {
        let best = work.iter().enumerate().filter_map(|(i, r)| ctx.valuation(r[c]).map(|v| (v, i))).min();
        let Some((v, idx)) = best else { continue };
        let mut row = work.swap_remove(idx);
        let pv = ctx.p_pow(v);
        let unit_inv = ctx.inv(row[c] / pv).expect("cofactor is a unit");
        scale_row(ctx, &mut row, unit_inv);
        for other in work.iter_mut() {
            let e = other[c];
            if e == 0 {
                continue;
            }
            let k = e / pv;
            for j in c..width {
                if row[j] != 0 {
                    other[j] = ctx.sub_mul(other[j], k, row[j]);
                }
            }
        }
        if v > 0 {
            let mut extra = row.clone();
            scale_row(ctx, &mut extra, ctx.p_pow(nprec - v));
            work.push(extra);
        }
        work.retain(|r| r.iter().any(|&x| x != 0));
        done.push((c, v, row));
    }
    for i in 0..done.len() {
        let (ci, vi) = (done[i].0, done[i].1);
        let pv = ctx.p_pow(vi);
        let (head, tail) = done.split_at_mut(i);
        let pivot_row = &tail[0].2;
        for (_, _, row) in head.iter_mut() {
            let q = row[ci] / pv;
            if q == 0 {
                continue;
            }
            for j in ci..width {
                if pivot_row[j] != 0 {
                    row[j] = ctx.sub_mul(row[j], q, pivot_row[j]);
                }
            }
        }
    }
    done
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, n: u32) -> PrecisionContext {
        PrecisionContext::new(p, n, 8).unwrap()
    }

    #[test]
    fn context_validation() {
        assert!(PrecisionContext::new(4, 2, 2).is_err());
        assert!(PrecisionContext::new(3, 0, 2).is_err());
        assert!(PrecisionContext::new(3, 2, 0).is_err());
        assert!(PrecisionContext::new(2, 63, 2).is_err());
        assert!(PrecisionContext::new(2, 62, 2).is_ok());
        assert!(PrecisionContext::new(3, 39, 2).is_ok());
        assert!(PrecisionContext::new(3, 40, 2).is_err());
    }

    #[test]
    fn valuation_examples() {
        let c = ctx(3, 8);
        assert_eq!(c.residue(18).valuation(), Some(2));
        assert_eq!(c.residue(1).valuation(), Some(0));
        assert_eq!(c.residue(0).valuation(), None);
        assert_eq!(c.residue(-3).valuation(), Some(1));
    }

    #[test]
    fn invert_unit_examples() {
        assert_eq!(ctx(3, 2).residue(2).invert_unit().unwrap().value(), 5);
        assert_eq!(ctx(3, 1).residue(1).invert_unit().unwrap().value(), 1);
        assert_eq!(ctx(3, 2).residue(3).invert_unit(), Err(Error::NotAUnit));
    }

    #[test]
    fn howell_examples() {
        let c = ctx(3, 2);
        let a = ResidueMatrix::from_rows(&c, &[vec![3]]).unwrap();
        let hf = a.howell_form();
        assert_eq!((hf.log_image_size, hf.log_kernel_size), (1, 1));

        let c3 = ctx(3, 3);
        let hf = ResidueMatrix::identity(&c3, 2).howell_form();
        assert_eq!((hf.log_image_size, hf.log_kernel_size), (6, 0));

        // Kernel of [[3,0],[0,9]] over Z/9, counted by enumerating all 81
        // column vectors: x with 3x ≡ 0 (3 choices), y free (9 choices).
        let a = ResidueMatrix::from_rows(&c, &[vec![3, 0], vec![0, 9]]).unwrap();
        let kernel = (0..9u64)
            .flat_map(|x| (0..9u64).map(move |y| (x, y)))
            .filter(|&(x, y)| a.apply(&[x, y]).iter().all(|&e| e == 0))
            .count();
        assert_eq!(kernel, 27);
        let hf = a.howell_form();
        assert_eq!((hf.log_image_size, hf.log_kernel_size), (1, 3));
    }

    #[test]
    fn howell_property_requires_augmentation() {
        // The span of (3,1) over Z/9 contains 3*(3,1) = (0,3), which has a
        // later leading row and must appear as its own generator.
        let c = ctx(3, 2);
        let a = ResidueMatrix::from_rows(&c, &[vec![3], vec![1]]).unwrap();
        let hf = a.howell_form();
        assert_eq!(hf.log_image_size, 2);
        assert_eq!(hf.h.cols(), 2);
    }

    fn brute_force_span(a: &ResidueMatrix) -> std::collections::HashSet<Vec<u64>> {
        let m = a.context().modulus();
        let mut span = std::collections::HashSet::new();
        let mut coeffs = vec![0u64; a.cols()];
        loop {
            span.insert(a.apply(&coeffs));
            let mut i = 0;
            loop {
                if i == coeffs.len() {
                    return span;
                }
                coeffs[i] += 1;
                if coeffs[i] < m {
                    break;
                }
                coeffs[i] = 0;
                i += 1;
            }
        }
    }

    fn small_matrix() -> impl Strategy<Value = (u64, u32, usize, usize, Vec<i64>)> {
        (prop_oneof![Just(2u64), Just(3u64)], 1u32..=3, 1usize..=3, 1usize..=3)
            .prop_filter("enumeration budget", |(p, n, _, cols)| {
                (*cols as f64) * (*n as f64) * (*p as f64).log2() <= 16.0
            })
            .prop_flat_map(|(p, n, r, c)| {
                let m = p.pow(n) as i64;
                (Just(p), Just(n), Just(r), Just(c), prop::collection::vec(0..m, r * c))
            })
    }

    proptest! {
        #[test]
        fn kernel_matches_enumeration((p, n, _r, c, vals) in small_matrix()) {
            let ctx = ctx(p, n);
            let rows: Vec<Vec<i64>> = vals.chunks(c).map(|x| x.to_vec()).collect();
            let a = ResidueMatrix::from_rows(&ctx, &rows).unwrap();
            let span = brute_force_span(&a);
            let size = span.len() as f64;
            let hf = a.howell_form();
            prop_assert_eq!((p as f64).powi(hf.log_image_size as i32), size);
            prop_assert_eq!(hf.log_image_size + hf.log_kernel_size, c as u64 * n as u64);
            prop_assert_eq!(a.log_image_size(), hf.log_image_size);
            // the Howell generators span the same module
            prop_assert_eq!(brute_force_span(&hf.h), span);
        }

        #[test]
        fn howell_is_idempotent(
            p in prop_oneof![Just(2u64), Just(3u64), Just(5u64)],
            n in 1u32..=5,
            r in 1usize..=5,
            c in 1usize..=5,
            seed in prop::collection::vec(any::<i64>(), 25),
        ) {
            let ctx = ctx(p, n);
            let rows: Vec<Vec<i64>> = (0..r).map(|i| (0..c).map(|j| seed[i * 5 + j] % 1000).collect()).collect();
            let a = ResidueMatrix::from_rows(&ctx, &rows).unwrap();
            let hf = a.howell_form();
            let again = hf.h.howell_form();
            prop_assert_eq!(&again.h, &hf.h);
            prop_assert_eq!(hf.log_image_size + hf.log_kernel_size, c as u64 * n as u64);
        }
    }
}
