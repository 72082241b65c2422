//! Matrices over `Z/p^N[T]`.

use std::fmt;

use crate::coeff::PrecisionContext;
use crate::error::{Error, Result};
use crate::linalg::{self, Fp, FpPoly, IntPolyMatrix};
use crate::poly::Poly;

/// Dense row-major matrix of exact polynomials. Matrices act on column
/// vectors from the left.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Poly>,
    ctx: PrecisionContext,
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PolyMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<Vec<i64>> = (0..self.cols).map(|c| self.get(r, c).to_i64()).collect();
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

impl PolyMatrix {
    pub fn zeros(ctx: &PrecisionContext, rows: usize, cols: usize) -> Self {
        PolyMatrix { rows, cols, data: vec![Poly::zero(ctx); rows * cols], ctx: *ctx }
    }

    pub fn identity(ctx: &PrecisionContext, n: usize) -> Self {
        Self::scalar(ctx, n, &Poly::one(ctx))
    }

    /// `f·I_n`.
    pub fn scalar(ctx: &PrecisionContext, n: usize, f: &Poly) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, f.clone());
        }
        m
    }

    pub fn from_rows(ctx: &PrecisionContext, rows: Vec<Vec<Poly>>) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        if rows.iter().flatten().any(|p| p.context() != ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(PolyMatrix { rows: rows.len(), cols, data: rows.into_iter().flatten().collect(), ctx: *ctx })
    }

    /// Entries given as integer coefficient lists, lowest degree first.
    pub fn from_i64(ctx: &PrecisionContext, rows: &[Vec<Vec<i64>>]) -> Result<Self> {
        let polys = rows.iter().map(|r| r.iter().map(|e| Poly::from_i64(ctx, e)).collect()).collect();
        Self::from_rows(ctx, polys)
    }

    /// A `rows × cols` matrix with no entries when either side is zero.
    pub fn empty(ctx: &PrecisionContext, rows: usize, cols: usize) -> Self {
        Self::zeros(ctx, rows, cols)
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

    pub fn get(&self, r: usize, c: usize) -> &Poly {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Poly) {
        debug_assert_eq!(v.context(), &self.ctx);
        self.data[r * self.cols + c] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<Poly>> {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c).clone()).collect()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Poly::is_zero)
    }

    pub fn max_degree(&self) -> usize {
        self.data.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.ctx, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(PolyMatrix { data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(), ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(PolyMatrix { data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(), ..self.clone() })
    }

    pub fn neg(&self) -> Self {
        PolyMatrix { data: self.data.iter().map(Poly::neg).collect(), ..self.clone() }
    }

    pub fn scale(&self, f: &Poly) -> Self {
        PolyMatrix { data: self.data.iter().map(|a| a.mul(f)).collect(), ..self.clone() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(&self.ctx, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(b));
                }
            }
        }
        Ok(out)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(&self.ctx, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut out = Self::zeros(&self.ctx, rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            for c in 0..self.cols {
                out.set(i, c, self.get(r, c).clone());
            }
        }
        out
    }

    /// Writes `block` with its top-left corner at `(r0, c0)`.
    pub fn put(&mut self, r0: usize, c0: usize, block: &PolyMatrix) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c).clone());
            }
        }
    }

    /// `[[a, b], [c, d]]` from blocks with compatible shapes.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::DimensionMismatch("block shapes".into()));
        }
        let mut out = Self::zeros(&a.ctx, a.rows + c.rows, a.cols + b.cols);
        out.put(0, 0, a);
        out.put(0, a.cols, b);
        out.put(a.rows, 0, c);
        out.put(a.rows, a.cols, d);
        Ok(out)
    }

    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let mut out = Self::zeros(&a.ctx, a.rows + b.rows, a.cols + b.cols);
        out.put(0, 0, a);
        out.put(a.rows, a.cols, b);
        out
    }

    fn fp(&self) -> Fp {
        Fp(self.ctx.p())
    }

    pub(crate) fn reduce_mod_p(&self) -> Vec<Vec<FpPoly>> {
        let p = self.ctx.p();
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| {
                        let mut v: Vec<u64> = self.get(r, c).coeffs().iter().map(|&x| x % p).collect();
                        while v.last() == Some(&0) {
                            v.pop();
                        }
                        v
                    })
                    .collect()
            })
            .collect()
    }

    /// Entries lifted to `Z[T]` with coefficients in the symmetric range.
    pub(crate) fn lift(&self) -> IntPolyMatrix {
        (0..self.rows).map(|r| (0..self.cols).map(|c| self.get(r, c).to_i64()).collect()).collect()
    }

    /// Rank over `F_p(T)` of the reduction modulo `p`.
    pub fn rank_mod_p(&self) -> usize {
        linalg::fp_poly_rank(self.fp(), self.reduce_mod_p())
    }

    /// `T`-adic elementary exponents of the reduction modulo `p`, over
    /// `F_p[[T]]`, sorted ascending; one per unit of `F_p(T)`-rank.
    pub fn exponents_mod_p(&self) -> Vec<usize> {
        let reduced = self.reduce_mod_p();
        let rank = linalg::fp_poly_rank(self.fp(), reduced.clone());
        linalg::t_adic_exponents(self.fp(), &reduced, rank)
    }

    /// Rank over `Q(T)` of the symmetric integer lift, estimated at a few
    /// evaluation points modulo a word prime.
    pub fn lift_rank(&self) -> usize {
        linalg::lift_rank(&self.lift())
    }

    pub fn det(&self) -> Result<Poly> {
        Ok(self.det_adjugate_columns(&[])?.0)
    }

    /// Determinant and the requested columns of the adjugate.
    pub fn det_adjugate_columns(&self, cols: &[usize]) -> Result<(Poly, Vec<Vec<Poly>>)> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let (d, adj) = linalg::det_adjugate_mod(&self.lift(), cols, self.ctx.modulus())?;
        let det = Poly::from_raw(&self.ctx, d);
        let adj = adj.into_iter().map(|col| col.into_iter().map(|e| Poly::from_raw(&self.ctx, e)).collect()).collect();
        Ok((det, adj))
    }
}
