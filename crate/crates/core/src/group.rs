//! Finite p-groups given by Cayley tables and matrices over the group ring
//! `Λ[G]`.

use std::fmt;
use std::sync::Arc;

use crate::coeff::PrecisionContext;
use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::module::LambdaModule;
use crate::poly::Poly;

pub const MAX_GROUP_ORDER: usize = 64;

/// A finite p-group. Elements are indices `0..order`; `table[a][b]` is the
/// product `a·b`.
#[derive(Clone, PartialEq, Eq)]
pub struct PGroup {
    p: u64,
    order: usize,
    table: Arc<Vec<usize>>,
    identity: usize,
    inverse: Arc<Vec<usize>>,
}

impl fmt::Debug for PGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PGroup(order={}, p={})", self.order, self.p)
    }
}

impl PGroup {
    /// Checks the table exhaustively and returns the group.
    pub fn validate(table: &[Vec<usize>], p: u64) -> Result<Self> {
        let n = table.len();
        if n == 0 || n > MAX_GROUP_ORDER {
            return Err(Error::InvalidTable(format!("order must be between 1 and {MAX_GROUP_ORDER}, got {n}")));
        }
        if table.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidTable("table is not square".into()));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::InvalidTable("entry out of range".into()));
        }
        let mut k = n;
        while k.is_multiple_of(p as usize) {
            k /= p as usize;
        }
        if k != 1 {
            return Err(Error::NotPPower { order: n, p });
        }
        let identity =
            (0..n).find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a)).ok_or(Error::NoIdentity)?;
        let mut inverse = Vec::with_capacity(n);
        #[allow(clippy::needless_range_loop)]
        for a in 0..n {
            let b = (0..n).find(|&b| table[a][b] == identity && table[b][a] == identity).ok_or(Error::NoInverse(a))?;
            inverse.push(b);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::NotAssociative(a, b, c));
                    }
                }
            }
        }
        Ok(PGroup {
            p,
            order: n,
            table: Arc::new(table.iter().flatten().copied().collect()),
            identity,
            inverse: Arc::new(inverse),
        })
    }

    pub fn trivial(p: u64) -> Self {
        Self::validate(&[vec![0]], p).expect("trivial group")
    }

    /// `Z/n` with element `k` standing for the `k`-th power of a generator.
    pub fn cyclic(n: usize, p: u64) -> Result<Self> {
        let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::validate(&table, p)
    }

    /// Direct product; `(a, b)` has index `a·|H| + b`.
    pub fn product(&self, other: &PGroup) -> Result<Self> {
        let (m, k) = (self.order, other.order);
        let table: Vec<Vec<usize>> = (0..m * k)
            .map(|x| (0..m * k).map(|y| self.mul(x / k, y / k) * k + other.mul(x % k, y % k)).collect())
            .collect();
        Self::validate(&table, self.p)
    }

    /// Parses names such as `1`, `Z/9` or `Z/3xZ/3`.
    pub fn from_name(name: &str, p: u64) -> Result<Self> {
        let name = name.trim();
        if name == "1" {
            return Ok(Self::trivial(p));
        }
        let mut group = Self::trivial(p);
        for factor in name.split(['x', '×']) {
            let n = factor
                .trim()
                .strip_prefix("Z/")
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| Error::InvalidTable(format!("unrecognised group name {name:?}")))?;
            group = group.product(&Self::cyclic(n, p)?)?;
        }
        Ok(group)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }
}

/// `Σ_g x_g·g` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingElement {
    coeffs: Vec<Poly>,
}

impl GroupRingElement {
    pub fn zero(ctx: &PrecisionContext, group: &PGroup) -> Self {
        GroupRingElement { coeffs: vec![Poly::zero(ctx); group.order()] }
    }

    pub fn new(group: &PGroup, coeffs: Vec<Poly>) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a group of order {}",
                coeffs.len(),
                group.order()
            )));
        }
        Ok(GroupRingElement { coeffs })
    }

    /// `f·1`.
    pub fn scalar(f: &Poly, group: &PGroup) -> Self {
        let mut x = Self::zero(f.context(), group);
        x.coeffs[group.identity()] = f.clone();
        x
    }

    /// The group element `g` itself.
    pub fn basis(ctx: &PrecisionContext, group: &PGroup, g: usize) -> Self {
        let mut x = Self::zero(ctx, group);
        x.coeffs[g] = Poly::one(ctx);
        x
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        GroupRingElement { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GroupRingElement { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn neg(&self) -> Self {
        GroupRingElement { coeffs: self.coeffs.iter().map(Poly::neg).collect() }
    }

    pub fn mul(&self, other: &Self, group: &PGroup) -> Self {
        let ctx = *self.coeffs[0].context();
        let mut out = Self::zero(&ctx, group);
        for (g, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (h, y) in other.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let gh = group.mul(g, h);
                out.coeffs[gh] = out.coeffs[gh].add(&x.mul(y));
            }
        }
        out
    }

    /// Image under `g ↦ 1`.
    pub fn augment(&self) -> Poly {
        let ctx = self.coeffs[0].context();
        self.coeffs.iter().fold(Poly::zero(ctx), |acc, c| acc.add(c))
    }
}

/// Matrix over `Λ[G]`, acting on column vectors from the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<GroupRingElement>,
    group: PGroup,
    ctx: PrecisionContext,
}

impl GroupRingMatrix {
    pub fn zeros(ctx: &PrecisionContext, group: &PGroup, rows: usize, cols: usize) -> Self {
        GroupRingMatrix {
            rows,
            cols,
            entries: vec![GroupRingElement::zero(ctx, group); rows * cols],
            group: group.clone(),
            ctx: *ctx,
        }
    }

    pub fn identity(ctx: &PrecisionContext, group: &PGroup, n: usize) -> Self {
        Self::scalar_embed(&PolyMatrix::identity(ctx, n), group)
    }

    /// Entries listed row by row.
    pub fn from_entries(
        ctx: &PrecisionContext,
        group: &PGroup,
        rows: usize,
        cols: usize,
        entries: Vec<GroupRingElement>,
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        if entries.iter().any(|e| e.coeffs.len() != group.order()) {
            return Err(Error::DimensionMismatch("entry has wrong number of coefficients".into()));
        }
        if entries.iter().flat_map(|e| &e.coeffs).any(|c| c.context() != ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(GroupRingMatrix { rows, cols, entries, group: group.clone(), ctx: *ctx })
    }

    /// `Λ`-matrix viewed over `Λ[G]` through `Λ ⊂ Λ[G]`.
    pub fn scalar_embed(m: &PolyMatrix, group: &PGroup) -> Self {
        let entries = (0..m.rows())
            .flat_map(|r| (0..m.cols()).map(move |c| (r, c)))
            .map(|(r, c)| GroupRingElement::scalar(m.get(r, c), group))
            .collect();
        GroupRingMatrix { rows: m.rows(), cols: m.cols(), entries, group: group.clone(), ctx: *m.context() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn group(&self) -> &PGroup {
        &self.group
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn get(&self, r: usize, c: usize) -> &GroupRingElement {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, x: GroupRingElement) {
        self.entries[r * self.cols + c] = x;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(GroupRingElement::is_zero)
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        if self.group != other.group {
            return Err(Error::DimensionMismatch("matrices over different groups".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch("shapes differ".into()));
        }
        Ok(GroupRingMatrix {
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect(),
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        GroupRingMatrix { entries: self.entries.iter().map(GroupRingElement::neg).collect(), ..self.clone() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(&self.ctx, &self.group, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    let prod = a.mul(other.get(k, j), &self.group);
                    out.entries[idx] = out.entries[idx].add(&prod);
                }
            }
        }
        Ok(out)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut out = Self::zeros(&self.ctx, &self.group, self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                out.set(r, j, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut out = Self::zeros(&self.ctx, &self.group, rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            for c in 0..self.cols {
                out.set(i, c, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn put(&mut self, r0: usize, c0: usize, block: &Self) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c).clone());
            }
        }
    }

    /// `[[a, b], [c, d]]`.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::DimensionMismatch("block shapes".into()));
        }
        let mut out = Self::zeros(&a.ctx, &a.group, a.rows + c.rows, a.cols + b.cols);
        out.put(0, 0, a);
        out.put(0, a.cols, b);
        out.put(a.rows, 0, c);
        out.put(a.rows, a.cols, d);
        Ok(out)
    }

    pub fn block_diag(a: &Self, b: &Self) -> Self {
        let mut out = Self::zeros(&a.ctx, &a.group, a.rows + b.rows, a.cols + b.cols);
        out.put(0, 0, a);
        out.put(a.rows, a.cols, b);
        out
    }

    /// Left regular representation: entry `x` becomes the `|G|×|G|` block
    /// with `x_g` at position `(g·h, h)`.
    pub fn regular_expand(&self) -> PolyMatrix {
        let n = self.group.order();
        let mut out = PolyMatrix::zeros(&self.ctx, self.rows * n, self.cols * n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let x = self.get(i, j);
                for (g, c) in x.coeffs.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for h in 0..n {
                        let gh = self.group.mul(g, h);
                        out.set(i * n + gh, j * n + h, c.clone());
                    }
                }
            }
        }
        out
    }

    /// Entrywise augmentation `g ↦ 1`.
    pub fn augment(&self) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(&self.ctx, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).augment());
            }
        }
        out
    }

    /// The `Λ`-module `Λ[G]^rows / (columns)` with `G` forgotten.
    pub fn expanded_module(&self) -> LambdaModule {
        LambdaModule::new(self.rows * self.group.order(), self.regular_expand()).expect("shape")
    }

    /// `Λ ⊗_{Λ[G]} (Λ[G]^rows / (columns))`.
    pub fn coinvariants(&self) -> LambdaModule {
        LambdaModule::new(self.rows, self.augment()).expect("shape")
    }
}
