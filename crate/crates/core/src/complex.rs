//! Bounded cochain complexes of finite free `Λ[G]`-modules.
//!
//! Boundaries raise degree: `d^i : C^i → C^{i+1}` is a
//! `rank(i+1) × rank(i)` matrix acting on column vectors. The cone of
//! `φ : C' → C` is `C''^i = C'^{i+1} ⊕ C^i` with boundary
//! `[[−d', 0], [φ, d]]`, and `C[k]^i = C^{i+k}` with boundary `(−1)^k d`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::coeff::PrecisionContext;
use crate::error::{Error, Result};
use crate::group::{GroupRingMatrix, PGroup};
use crate::matrix::PolyMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectComplex {
    group: PGroup,
    ctx: PrecisionContext,
    min_degree: i64,
    ranks: Vec<usize>,
    boundaries: Vec<GroupRingMatrix>,
}

/// Torsion and `μ = 0` status, overall and degree by degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Classification {
    pub torsion: bool,
    pub mu_zero: bool,
    pub per_degree_torsion: Vec<bool>,
    pub per_degree_mu_zero: Vec<bool>,
}

/// Outcome of comparing `λ(C)` with `|G|·λ(C̄)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct KidaReport {
    pub mu_zero_c: bool,
    pub mu_zero_cbar: bool,
    pub lambda_c: Option<i64>,
    pub lambda_cbar: Option<i64>,
    pub group_order: usize,
    pub identity_holds: Option<bool>,
    pub violation: bool,
}

impl PerfectComplex {
    /// Builds and validates a complex with terms in degrees
    /// `min_degree .. min_degree + ranks.len()`.
    pub fn new(
        group: &PGroup,
        ctx: &PrecisionContext,
        min_degree: i64,
        ranks: Vec<usize>,
        boundaries: Vec<GroupRingMatrix>,
    ) -> Result<Self> {
        if boundaries.len() + 1 != ranks.len().max(1) {
            return Err(Error::BoundaryMismatch(min_degree + boundaries.len() as i64));
        }
        for (k, d) in boundaries.iter().enumerate() {
            let deg = min_degree + k as i64;
            if d.rows() != ranks[k + 1] || d.cols() != ranks[k] {
                return Err(Error::BoundaryMismatch(deg));
            }
            if d.group() != group {
                return Err(Error::BoundaryMismatch(deg));
            }
            if d.context() != ctx {
                return Err(Error::ContextMismatch);
            }
        }
        for k in 1..boundaries.len() {
            if !boundaries[k].mul(&boundaries[k - 1])?.is_zero() {
                return Err(Error::NotAComplex(min_degree + k as i64 - 1));
            }
        }
        Ok(PerfectComplex { group: group.clone(), ctx: *ctx, min_degree, ranks, boundaries })
    }

    pub fn zero(group: &PGroup, ctx: &PrecisionContext) -> Self {
        PerfectComplex { group: group.clone(), ctx: *ctx, min_degree: 0, ranks: Vec::new(), boundaries: Vec::new() }
    }

    /// `Λ[G]^rank` concentrated in one degree.
    pub fn single(group: &PGroup, ctx: &PrecisionContext, degree: i64, rank: usize) -> Self {
        Self::new(group, ctx, degree, vec![rank], Vec::new()).expect("single term")
    }

    /// `[C^a →d C^{a+1}]`.
    pub fn two_term(degree: i64, d: &GroupRingMatrix) -> Self {
        Self::new(d.group(), d.context(), degree, vec![d.cols(), d.rows()], vec![d.clone()]).expect("one boundary")
    }

    pub fn group(&self) -> &PGroup {
        &self.group
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn min_degree(&self) -> i64 {
        self.min_degree
    }

    /// Top degree; equals `min_degree − 1` for the empty complex.
    pub fn max_degree(&self) -> i64 {
        self.min_degree + self.ranks.len() as i64 - 1
    }

    /// Number of boundaries between the extreme terms.
    pub fn length(&self) -> usize {
        self.ranks.len().saturating_sub(1)
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn boundaries(&self) -> &[GroupRingMatrix] {
        &self.boundaries
    }

    pub fn rank(&self, i: i64) -> usize {
        let k = i - self.min_degree;
        if k < 0 {
            return 0;
        }
        self.ranks.get(k as usize).copied().unwrap_or(0)
    }

    /// `d^i`, a zero matrix of the right shape outside the stored range.
    pub fn boundary(&self, i: i64) -> GroupRingMatrix {
        let k = i - self.min_degree;
        if k >= 0 && (k as usize) < self.boundaries.len() {
            return self.boundaries[k as usize].clone();
        }
        GroupRingMatrix::zeros(&self.ctx, &self.group, self.rank(i + 1), self.rank(i))
    }

    /// Drops zero terms at both ends.
    pub fn trimmed(&self) -> Self {
        let Some(first) = self.ranks.iter().position(|&r| r > 0) else {
            return Self::zero(&self.group, &self.ctx);
        };
        let last = self.ranks.iter().rposition(|&r| r > 0).expect("nonempty");
        PerfectComplex {
            group: self.group.clone(),
            ctx: self.ctx,
            min_degree: self.min_degree + first as i64,
            ranks: self.ranks[first..=last].to_vec(),
            boundaries: self.boundaries[first..last].to_vec(),
        }
    }

    fn from_range(
        group: &PGroup,
        ctx: &PrecisionContext,
        lo: i64,
        hi: i64,
        rank: impl Fn(i64) -> usize,
        boundary: impl Fn(i64) -> GroupRingMatrix,
    ) -> Result<Self> {
        if hi < lo {
            return Ok(Self::zero(group, ctx));
        }
        let ranks = (lo..=hi).map(&rank).collect();
        let boundaries = (lo..hi).map(&boundary).collect();
        Self::new(group, ctx, lo, ranks, boundaries)
    }

    /// `C[k]`.
    pub fn shift(&self, k: i64) -> Self {
        let sign_flip = k.rem_euclid(2) == 1;
        PerfectComplex {
            group: self.group.clone(),
            ctx: self.ctx,
            min_degree: self.min_degree - k,
            ranks: self.ranks.clone(),
            boundaries: self.boundaries.iter().map(|d| if sign_flip { d.neg() } else { d.clone() }).collect(),
        }
    }

    /// `Λ ⊗_{Λ[G]} C` over the trivial group.
    pub fn base_change(&self) -> Self {
        let trivial = PGroup::trivial(self.group.p());
        PerfectComplex {
            group: trivial.clone(),
            ctx: self.ctx,
            min_degree: self.min_degree,
            ranks: self.ranks.clone(),
            boundaries: self.boundaries.iter().map(|d| GroupRingMatrix::scalar_embed(&d.augment(), &trivial)).collect(),
        }
    }

    /// Degreewise direct sum.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        let lo = self.min_degree.min(other.min_degree);
        let hi = self.max_degree().max(other.max_degree());
        Self::from_range(
            &self.group,
            &self.ctx,
            lo,
            hi,
            |i| self.rank(i) + other.rank(i),
            |i| GroupRingMatrix::block_diag(&self.boundary(i), &other.boundary(i)),
        )
    }

    /// The boundaries after forgetting `G`, keyed by source degree.
    pub fn expanded_boundaries(&self) -> Vec<(i64, PolyMatrix)> {
        self.boundaries.iter().enumerate().map(|(k, d)| (self.min_degree + k as i64, d.regular_expand())).collect()
    }

    /// Torsion is decided by ranks over `Q(T)` of the integer lift of the
    /// expanded boundaries, `μ = 0` by ranks over `F_p(T)` of their
    /// reduction: a degree passes when the two adjacent ranks fill the term.
    pub fn classify(&self) -> Result<Classification> {
        let n = self.group.order();
        let expanded = self.expanded_boundaries();
        let mut lift = Vec::with_capacity(expanded.len());
        let mut modp = Vec::with_capacity(expanded.len());
        for (_, m) in &expanded {
            let rp = m.rank_mod_p();
            // a nonzero minor modulo p is a nonzero minor over Z
            lift.push(m.lift_rank().max(rp));
            modp.push(rp);
        }
        let mut per_t = Vec::with_capacity(self.ranks.len());
        let mut per_mu = Vec::with_capacity(self.ranks.len());
        for (k, &r) in self.ranks.iter().enumerate() {
            let size = r * n;
            let out_l = lift.get(k).copied().unwrap_or(0);
            let in_l = if k > 0 { lift[k - 1] } else { 0 };
            let out_p = modp.get(k).copied().unwrap_or(0);
            let in_p = if k > 0 { modp[k - 1] } else { 0 };
            if out_l + in_l > size {
                return Err(Error::PrecisionExhausted(format!(
                    "integer lift is not a complex at degree {}",
                    self.min_degree + k as i64
                )));
            }
            per_t.push(out_l + in_l == size);
            per_mu.push(out_p + in_p == size);
        }
        Ok(Classification {
            torsion: per_t.iter().all(|&x| x),
            mu_zero: per_mu.iter().all(|&x| x),
            per_degree_torsion: per_t,
            per_degree_mu_zero: per_mu,
        })
    }

    /// `λ(C) = Σ (−1)^i λ(H^i(C))` for a complex with `μ = 0`.
    ///
    /// With `μ = 0` every `H^i` is finitely generated over `Z_p`, so `λ(C)`
    /// is the Euler characteristic of `C/p` over `F_p[[T]]`, whose
    /// cohomology in degree `i+1` has dimension equal to the sum of the
    /// `T`-adic elementary exponents of `d̄^i`. Two-term square complexes
    /// are also checked against the determinant of the boundary.
    pub fn lambda(&self) -> Result<i64> {
        if !self.classify()?.mu_zero {
            return Err(Error::NotMuZero);
        }
        let mut total: i64 = 0;
        for (i, m) in self.expanded_boundaries() {
            let delta: i64 = m.exponents_mod_p().iter().map(|&e| e as i64).sum();
            total += if (i + 1).rem_euclid(2) == 0 { delta } else { -delta };
        }
        if self.boundaries.len() == 1 && self.ranks[0] == self.ranks[1] {
            let m = self.boundaries[0].regular_expand();
            let (lam, _) = m.det()?.invariants()?;
            let top = self.max_degree();
            let expected = if top.rem_euclid(2) == 0 { lam as i64 } else { -(lam as i64) };
            if expected != total {
                return Err(Error::Unstable(format!(
                    "elementary-divisor route gives {total}, determinant route gives {expected}"
                )));
            }
        }
        Ok(total)
    }

    /// Classifies `C` and `C̄` and compares `λ(C)` with `|G|·λ(C̄)`.
    pub fn verify_kida(&self) -> Result<KidaReport> {
        let cbar = self.base_change();
        let mu_c = self.classify()?.mu_zero;
        let mu_cbar = cbar.classify()?.mu_zero;
        let lambda_c = if mu_c { Some(self.lambda()?) } else { None };
        let lambda_cbar = if mu_cbar { Some(cbar.lambda()?) } else { None };
        let order = self.group.order();
        let identity_holds = match (lambda_c, lambda_cbar) {
            (Some(l), Some(lb)) => Some(l == order as i64 * lb),
            _ => None,
        };
        Ok(KidaReport {
            mu_zero_c: mu_c,
            mu_zero_cbar: mu_cbar,
            lambda_c,
            lambda_cbar,
            group_order: order,
            identity_holds,
            violation: mu_c != mu_cbar || identity_holds == Some(false),
        })
    }
}

/// A degreewise map of complexes `φ : source → target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    source: PerfectComplex,
    target: PerfectComplex,
    maps: BTreeMap<i64, GroupRingMatrix>,
}

impl ChainMap {
    /// Components not listed are zero. Commutation `d φ = φ d` is checked
    /// in every degree.
    pub fn new(source: &PerfectComplex, target: &PerfectComplex, maps: BTreeMap<i64, GroupRingMatrix>) -> Result<Self> {
        if source.group != target.group {
            return Err(Error::DimensionMismatch("complexes over different groups".into()));
        }
        for (&i, m) in &maps {
            if m.rows() != target.rank(i) || m.cols() != source.rank(i) {
                return Err(Error::DimensionMismatch(format!("map component at degree {i}")));
            }
        }
        let phi = ChainMap { source: source.clone(), target: target.clone(), maps };
        let lo = source.min_degree.min(target.min_degree) - 1;
        let hi = source.max_degree().max(target.max_degree());
        for i in lo..=hi {
            let left = target.boundary(i).mul(&phi.component(i))?;
            let right = phi.component(i + 1).mul(&source.boundary(i))?;
            if left != right {
                return Err(Error::NotChainMap(i));
            }
        }
        Ok(phi)
    }

    pub fn identity(c: &PerfectComplex) -> Self {
        let maps = (c.min_degree..=c.max_degree())
            .map(|i| (i, GroupRingMatrix::identity(&c.ctx, &c.group, c.rank(i))))
            .collect();
        ChainMap { source: c.clone(), target: c.clone(), maps }
    }

    pub fn zero(source: &PerfectComplex, target: &PerfectComplex) -> Self {
        ChainMap { source: source.clone(), target: target.clone(), maps: BTreeMap::new() }
    }

    pub fn source(&self) -> &PerfectComplex {
        &self.source
    }

    pub fn target(&self) -> &PerfectComplex {
        &self.target
    }

    /// `φ^i`, zero where not given.
    pub fn component(&self, i: i64) -> GroupRingMatrix {
        self.maps.get(&i).cloned().unwrap_or_else(|| {
            GroupRingMatrix::zeros(&self.target.ctx, &self.target.group, self.target.rank(i), self.source.rank(i))
        })
    }

    /// `C''^i = C'^{i+1} ⊕ C^i` with boundary `[[−d', 0], [φ, d]]`, with
    /// zero end terms removed.
    pub fn cone(&self) -> Result<PerfectComplex> {
        let (s, t) = (&self.source, &self.target);
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        if !s.is_empty() {
            lo = lo.min(s.min_degree - 1);
            hi = hi.max(s.max_degree() - 1);
        }
        if !t.is_empty() {
            lo = lo.min(t.min_degree);
            hi = hi.max(t.max_degree());
        }
        if lo > hi {
            return Ok(PerfectComplex::zero(&t.group, &t.ctx));
        }
        let c = PerfectComplex::from_range(
            &t.group,
            &t.ctx,
            lo,
            hi,
            |i| s.rank(i + 1) + t.rank(i),
            |i| {
                let top_right = GroupRingMatrix::zeros(&t.ctx, &t.group, s.rank(i + 2), t.rank(i));
                GroupRingMatrix::block2(&s.boundary(i + 1).neg(), &top_right, &self.component(i + 1), &t.boundary(i))
                    .expect("cone blocks")
            },
        )?;
        Ok(c.trimmed())
    }

    /// The induced map on `Λ ⊗_{Λ[G]} −`.
    pub fn base_change(&self) -> ChainMap {
        let trivial = PGroup::trivial(self.source.group.p());
        ChainMap {
            source: self.source.base_change(),
            target: self.target.base_change(),
            maps: self.maps.iter().map(|(&i, m)| (i, GroupRingMatrix::scalar_embed(&m.augment(), &trivial))).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupRingElement;
    use crate::poly::Poly;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(3, 8, 32).unwrap()
    }

    fn z3() -> PGroup {
        PGroup::cyclic(3, 3).unwrap()
    }

    fn entry(c: &PrecisionContext, g: &PGroup, x: GroupRingElement) -> GroupRingMatrix {
        GroupRingMatrix::from_entries(c, g, 1, 1, vec![x]).unwrap()
    }

    fn scalar(c: &PrecisionContext, g: &PGroup, f: &[i64]) -> GroupRingMatrix {
        entry(c, g, GroupRingElement::scalar(&Poly::from_i64(c, f), g))
    }

    /// `[Λ[G] → Λ[G]]`, multiplication by `g − (1+T)`.
    fn generator_complex() -> PerfectComplex {
        let (c, g) = (ctx(), z3());
        let x = GroupRingElement::basis(&c, &g, 1).sub(&GroupRingElement::scalar(&Poly::from_i64(&c, &[1, 1]), &g));
        PerfectComplex::two_term(0, &entry(&c, &g, x))
    }

    #[test]
    fn validation_examples() {
        let (c, g) = (ctx(), z3());
        assert_eq!(PerfectComplex::single(&g, &c, 0, 1).length(), 0);
        assert_eq!(generator_complex().length(), 1);
        let t = scalar(&c, &g, &[0, 1]);
        let err = PerfectComplex::new(&g, &c, 0, vec![1, 1, 1], vec![t.clone(), t.clone()]);
        assert_eq!(err, Err(Error::NotAComplex(0)));
        let wide = GroupRingMatrix::zeros(&c, &g, 1, 2);
        assert_eq!(PerfectComplex::new(&g, &c, 0, vec![1, 1], vec![wide]), Err(Error::BoundaryMismatch(0)));
    }

    #[test]
    fn classify_examples() {
        let (c, g) = (ctx(), z3());
        let cl = generator_complex().classify().unwrap();
        assert!(cl.torsion && cl.mu_zero);
        let cl = PerfectComplex::two_term(0, &scalar(&c, &g, &[3])).classify().unwrap();
        assert!(cl.torsion && !cl.mu_zero);
        assert_eq!(cl.per_degree_mu_zero, vec![false, false]);
        let cl = PerfectComplex::single(&g, &c, 0, 1).classify().unwrap();
        assert!(!cl.torsion && !cl.mu_zero);
    }

    #[test]
    fn lambda_examples() {
        let cx = generator_complex();
        assert_eq!(cx.lambda().unwrap(), -3);
        assert_eq!(cx.base_change().lambda().unwrap(), -1);
        let (c, g) = (ctx(), z3());
        assert_eq!(cx.base_change().boundaries()[0].augment(), PolyMatrix::from_i64(&c, &[vec![vec![0, -1]]]).unwrap());
        let contractible = ChainMap::identity(&cx).cone().unwrap();
        assert_eq!(contractible.lambda().unwrap(), 0);
        assert_eq!(PerfectComplex::two_term(0, &scalar(&c, &g, &[3])).lambda(), Err(Error::NotMuZero));
        assert_eq!(cx.shift(1).lambda().unwrap(), 3);
    }

    #[test]
    fn kida_examples() {
        let r = generator_complex().verify_kida().unwrap();
        assert_eq!((r.lambda_c, r.lambda_cbar, r.identity_holds), (Some(-3), Some(-1), Some(true)));
        assert!(!r.violation);

        let (c, g) = (ctx(), z3());
        let r = PerfectComplex::two_term(0, &scalar(&c, &g, &[3])).verify_kida().unwrap();
        assert!(!r.mu_zero_c && !r.mu_zero_cbar && !r.violation);
        assert_eq!(r.identity_holds, None);

        let r = PerfectComplex::two_term(0, &scalar(&c, &g, &[0, 1])).verify_kida().unwrap();
        assert_eq!((r.lambda_c, r.lambda_cbar), (Some(-3), Some(-1)));
    }

    #[test]
    fn cone_examples() {
        let cx = generator_complex();
        let from_zero = ChainMap::zero(&PerfectComplex::zero(cx.group(), cx.context()), &cx);
        assert_eq!(from_zero.cone().unwrap(), cx);

        // [Λ →3 Λ] → [Λ →3T Λ] via (T, 1) in degrees (0, 1)
        let g = PGroup::trivial(3);
        let c = ctx();
        let src = PerfectComplex::two_term(0, &scalar(&c, &g, &[3]));
        let dst = PerfectComplex::two_term(0, &scalar(&c, &g, &[0, 3]));
        let maps = BTreeMap::from([(0, scalar(&c, &g, &[1])), (1, scalar(&c, &g, &[0, 1]))]);
        let phi = ChainMap::new(&src, &dst, maps).unwrap();
        let cone = phi.cone().unwrap();
        assert_eq!(cone.ranks(), &[1, 2, 1]);
        assert!(cone.classify().unwrap().torsion);
        let bad = BTreeMap::from([(0, scalar(&c, &g, &[1])), (1, scalar(&c, &g, &[1]))]);
        assert_eq!(ChainMap::new(&src, &dst, bad), Err(Error::NotChainMap(0)));
    }

    #[test]
    fn base_change_commutes_with_cone_and_shift() {
        let cx = generator_complex();
        let x = cx.boundaries()[0].clone();
        let phi = ChainMap::new(&cx, &cx, BTreeMap::from([(0, x.clone()), (1, x)])).unwrap();
        assert_eq!(phi.cone().unwrap().base_change(), phi.base_change().cone().unwrap());
        assert_eq!(cx.shift(3).base_change(), cx.base_change().shift(3));
    }
}
