//! The truncated Iwasawa algebra `Z/p^N[[T]]/(T^M)`.

use std::fmt;

use crate::coeff::{PrecisionContext, Residue};
use crate::error::{Error, Result};
use crate::poly::{inv_series, mul_series, Poly};

/// An element of `Z/p^N[[T]]/(T^M)`.
///
/// When `exact_degree` is set the element is a genuine polynomial of at
/// most that degree; otherwise the coefficients beyond `T^M` are unknown.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IwasawaElement {
    coeffs: Vec<u64>,
    ctx: PrecisionContext,
    exact_degree: Option<usize>,
}

impl fmt::Debug for IwasawaElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown = self.coeffs.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
        write!(f, "{:?}", &self.coeffs[..shown])?;
        match self.exact_degree {
            Some(d) => write!(f, " (exact, deg <= {d})"),
            None => write!(f, " + O(T^{})", self.coeffs.len()),
        }
    }
}

impl IwasawaElement {
    pub fn zero(ctx: &PrecisionContext) -> Self {
        IwasawaElement { coeffs: vec![0; ctx.t_precision()], ctx: *ctx, exact_degree: Some(0) }
    }

    /// A truncated power series; coefficients past `T^M` are dropped.
    pub fn series(ctx: &PrecisionContext, coeffs: &[i64]) -> Self {
        let m = ctx.t_precision();
        let mut c: Vec<u64> = coeffs.iter().take(m).map(|&x| ctx.reduce_i64(x)).collect();
        c.resize(m, 0);
        IwasawaElement { coeffs: c, ctx: *ctx, exact_degree: None }
    }

    /// An exact polynomial; fails when its degree does not fit the window.
    pub fn polynomial(ctx: &PrecisionContext, coeffs: &[i64]) -> Result<Self> {
        Self::from_poly(&Poly::from_i64(ctx, coeffs))
    }

    pub fn from_poly(f: &Poly) -> Result<Self> {
        let ctx = f.context();
        let m = ctx.t_precision();
        let d = f.degree().unwrap_or(0);
        if d >= m {
            return Err(Error::TDepthExhausted { needed: d, available: m });
        }
        let mut coeffs = f.coeffs().to_vec();
        coeffs.resize(m, 0);
        Ok(IwasawaElement { coeffs, ctx: *ctx, exact_degree: Some(d) })
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Residue {
        Residue::new(&self.ctx, self.ctx.symmetric(self.coeffs[i]))
    }

    pub fn exact_degree(&self) -> Option<usize> {
        self.exact_degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The polynomial with the same coefficients and a zero tail.
    pub fn zero_tail(&self) -> Poly {
        Poly::from_raw(&self.ctx, self.coeffs.clone())
    }

    /// The exact polynomial, or `NotExact` for a truncated series.
    pub fn to_poly(&self) -> Result<Poly> {
        match self.exact_degree {
            Some(_) => Ok(self.zero_tail()),
            None => Err(Error::NotExact),
        }
    }

    fn check(&self, other: &IwasawaElement) -> Result<()> {
        if self.ctx != other.ctx {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    fn combine_exact(a: Option<usize>, b: Option<usize>, f: impl Fn(usize, usize) -> usize, m: usize) -> Option<usize> {
        match (a, b) {
            (Some(x), Some(y)) => Some(f(x, y)).filter(|&d| d < m),
            _ => None,
        }
    }

    pub fn add(&self, other: &IwasawaElement) -> Result<IwasawaElement> {
        self.check(other)?;
        let ctx = &self.ctx;
        Ok(IwasawaElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| ctx.add(a, b)).collect(),
            ctx: *ctx,
            exact_degree: Self::combine_exact(self.exact_degree, other.exact_degree, usize::max, usize::MAX),
        })
    }

    pub fn sub(&self, other: &IwasawaElement) -> Result<IwasawaElement> {
        self.check(other)?;
        let ctx = &self.ctx;
        Ok(IwasawaElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| ctx.sub(a, b)).collect(),
            ctx: *ctx,
            exact_degree: Self::combine_exact(self.exact_degree, other.exact_degree, usize::max, usize::MAX),
        })
    }

    pub fn mul(&self, other: &IwasawaElement) -> Result<IwasawaElement> {
        self.check(other)?;
        let m = self.ctx.t_precision();
        let mut coeffs = mul_series(&self.ctx, &self.coeffs, &other.coeffs, m);
        coeffs.resize(m, 0);
        Ok(IwasawaElement {
            coeffs,
            ctx: self.ctx,
            exact_degree: Self::combine_exact(self.exact_degree, other.exact_degree, |a, b| a + b, m),
        })
    }

    /// Weierstrass preparation `f = p^μ · P · u`.
    ///
    /// A truncated series is prepared through its zero-tail representative,
    /// so the recomposition holds modulo `(p^N, T^M)`.
    pub fn prepare(&self) -> Result<Preparation> {
        let ctx = &self.ctx;
        let m = ctx.t_precision();
        let mu = self
            .coeffs
            .iter()
            .filter_map(|&c| ctx.valuation(c))
            .min()
            .ok_or_else(|| Error::PrecisionExhausted("all coefficients vanish modulo p^N".into()))?;
        let pmu = ctx.p_pow(mu);
        let g: Vec<u64> = self.coeffs.iter().map(|&c| c / pmu).collect();
        let lambda =
            g.iter().position(|&c| c % ctx.p() != 0).ok_or(Error::TDepthExhausted { needed: m, available: m })?;
        let g = Poly::from_raw(ctx, g);
        let distinguished = distinguished_factor(&g, lambda)?;
        let (unit, rest) = g.div_rem_monic(&distinguished)?;
        if !rest.is_zero() {
            return Err(Error::NoConvergence(ctx.coeff_precision() as usize + 2));
        }
        Ok(Preparation {
            mu,
            lambda,
            distinguished: IwasawaElement::from_poly(&distinguished)?,
            unit: IwasawaElement::from_poly(&unit)?,
        })
    }

    /// `(λ, μ)` of `Λ/(f)`.
    pub fn invariants(&self) -> Result<(usize, u32)> {
        let prep = self.prepare()?;
        Ok((prep.lambda, prep.mu))
    }

    /// Weierstrass division by a distinguished polynomial.
    pub fn divide(&self, divisor: &IwasawaElement) -> Result<(IwasawaElement, IwasawaElement)> {
        self.divide_from(divisor, &IwasawaElement::zero(&self.ctx))
    }

    /// Weierstrass division started from an arbitrary initial quotient.
    ///
    /// The fixed-point map contracts by a factor `p`, so every start reaches
    /// the same pair within `N + 1` steps.
    pub fn divide_from(
        &self,
        divisor: &IwasawaElement,
        guess: &IwasawaElement,
    ) -> Result<(IwasawaElement, IwasawaElement)> {
        self.check(divisor)?;
        self.check(guess)?;
        let ctx = &self.ctx;
        let m = ctx.t_precision();
        let pd = divisor.zero_tail();
        let d = match pd.degree() {
            Some(d) if d >= 1 && pd.coeff(d) == 1 => d,
            _ => return Err(Error::NotDistinguished),
        };
        if (0..d).any(|i| !pd.coeff(i).is_multiple_of(ctx.p())) {
            return Err(Error::NotDistinguished);
        }
        let low = &pd.coeffs()[..d];
        let top: Vec<u64> = self.coeffs[d.min(m)..].to_vec();
        let mut q: Vec<u64> = guess.coeffs[..m - d].to_vec();
        let cap = ctx.coeff_precision() as usize + 2;
        let mut converged = false;
        for _ in 0..cap {
            let next = contraction_step(ctx, &top, low, &[1], &q, d, m - d);
            if next == q {
                converged = true;
                break;
            }
            q = next;
        }
        if !converged {
            return Err(Error::NoConvergence(cap));
        }
        let qp = Poly::from_raw(ctx, q);
        let prod = mul_series(ctx, qp.coeffs(), pd.coeffs(), m);
        let mut r: Vec<u64> = (0..m).map(|i| ctx.sub(self.coeffs[i], prod.get(i).copied().unwrap_or(0))).collect();
        debug_assert!(r[d..].iter().all(|&c| c == 0));
        r.truncate(d);
        let mut quotient = IwasawaElement::from_poly(&qp)?;
        if self.exact_degree.is_none() {
            quotient.exact_degree = None;
        }
        Ok((quotient, IwasawaElement::from_poly(&Poly::from_raw(ctx, r))?))
    }
}

/// One step `Q ↦ τ(F) − τ(B·h⁻¹·Q)` of the Weierstrass fixed point, where
/// `τ` drops the terms below `T^shift` and divides by `T^shift`.
fn contraction_step(
    ctx: &PrecisionContext,
    top: &[u64],
    low: &[u64],
    hinv: &[u64],
    q: &[u64],
    shift: usize,
    window: usize,
) -> Vec<u64> {
    let hq = mul_series(ctx, hinv, q, window + shift);
    let bhq = mul_series(ctx, low, &hq, window + shift);
    (0..window)
        .map(|i| {
            let t = top.get(i).copied().unwrap_or(0);
            let s = bhq.get(i + shift).copied().unwrap_or(0);
            ctx.sub(t, s)
        })
        .collect()
}

/// Distinguished polynomial `P` of degree `lambda` with `g = P·u`, for an
/// exact `g` whose first unit coefficient sits at `lambda`.
fn distinguished_factor(g: &Poly, lambda: usize) -> Result<Poly> {
    let ctx = g.context();
    if lambda == 0 {
        return Ok(Poly::one(ctx));
    }
    // Solve T^λ = q·g + r. Only q mod T^λ is needed; each contraction step
    // consumes λ terms of the window, so start wide enough for N+2 steps.
    let steps = ctx.coeff_precision() as usize + 2;
    let window = lambda * (steps + 1);
    let low = &g.coeffs()[..lambda];
    let h = &g.coeffs()[lambda..];
    let hinv = inv_series(ctx, h, window + lambda)?;
    let mut q_big = vec![0u64; window];
    let mut heads: Vec<Vec<u64>> = Vec::with_capacity(steps);
    for _ in 0..steps {
        let w = q_big.len();
        q_big = contraction_step(ctx, &[1], low, &hinv, &q_big, lambda, w - lambda);
        heads.push(q_big[..lambda].to_vec());
    }
    if heads[steps - 1] != heads[steps - 2] {
        return Err(Error::NoConvergence(steps));
    }
    // q = h⁻¹·Q modulo T^λ, then P = T^λ − r = q·g with the low part kept.
    let q = mul_series(ctx, &hinv, &q_big, lambda);
    let qg = mul_series(ctx, &q, g.coeffs(), lambda);
    let mut p = qg;
    p.resize(lambda, 0);
    p.push(1);
    Ok(Poly::from_raw(ctx, p))
}

/// `f ≡ p^μ · distinguished · unit (mod p^N, T^M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preparation {
    pub mu: u32,
    pub lambda: usize,
    pub distinguished: IwasawaElement,
    pub unit: IwasawaElement,
}

impl Preparation {
    /// `p^μ · distinguished · unit` in the truncated ring.
    pub fn recompose(&self) -> Result<IwasawaElement> {
        let ctx = self.unit.context();
        let mut prod = self.distinguished.mul(&self.unit)?;
        let pmu = ctx.p_pow(self.mu);
        for c in prod.coeffs.iter_mut() {
            *c = ctx.mul(*c, pmu);
        }
        Ok(prod)
    }
}

/// `ω_n = (1+T)^{p^n} − 1` as an exact element.
pub fn omega(n: u32, ctx: &PrecisionContext) -> Result<IwasawaElement> {
    let m = ctx.t_precision();
    let deg = ctx
        .p()
        .checked_pow(n)
        .map(|d| d as usize)
        .filter(|&d| d < m)
        .ok_or(Error::TDepthExhausted { needed: ctx.p().saturating_pow(n) as usize, available: m })?;
    IwasawaElement::from_poly(&Poly::one_plus_t_pow_minus_one(ctx, deg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64) -> PrecisionContext {
        PrecisionContext::new(p, 8, 16).unwrap()
    }

    fn poly(c: &PrecisionContext, x: &[i64]) -> IwasawaElement {
        IwasawaElement::polynomial(c, x).unwrap()
    }

    #[test]
    fn prepare_examples() {
        let c = ctx(3);
        let prep = poly(&c, &[3, 1]).prepare().unwrap();
        assert_eq!((prep.mu, prep.lambda), (0, 1));
        assert_eq!(prep.distinguished, poly(&c, &[3, 1]));
        assert_eq!(prep.unit, poly(&c, &[1]));

        let prep = poly(&c, &[3, 3]).prepare().unwrap();
        assert_eq!((prep.mu, prep.lambda), (1, 0));
        assert_eq!(prep.distinguished, poly(&c, &[1]));
        assert_eq!(prep.unit, poly(&c, &[1, 1]));
    }

    #[test]
    fn prepare_recovers_known_factors() {
        let c = ctx(3);
        let f = poly(&c, &[2, 1]).mul(&poly(&c, &[3, 0, 1])).unwrap();
        assert_eq!(f, poly(&c, &[6, 3, 2, 1]));
        let prep = f.prepare().unwrap();
        assert_eq!((prep.mu, prep.lambda), (0, 2));
        assert_eq!(prep.distinguished, poly(&c, &[3, 0, 1]));
        assert_eq!(prep.unit, poly(&c, &[2, 1]));
    }

    #[test]
    fn prepare_rejects_zero() {
        let c = ctx(3);
        assert!(matches!(IwasawaElement::series(&c, &[6561, 6561 * 2]).prepare(), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn divide_examples() {
        let c = ctx(3);
        let p = poly(&c, &[3, 0, 1]);
        let (q, r) = poly(&c, &[0, 0, 0, 1]).divide(&p).unwrap();
        assert_eq!(q, poly(&c, &[0, 1]));
        assert_eq!(r, poly(&c, &[0, -3]));
        assert_eq!(r.coeffs()[1], 6561 - 3);

        let (q, r) = p.divide(&p).unwrap();
        assert_eq!((q, r), (poly(&c, &[1]), IwasawaElement::zero(&c)));

        let f = p.mul(&poly(&c, &[5, 1])).unwrap().add(&poly(&c, &[7])).unwrap();
        let (q, r) = f.divide(&p).unwrap();
        assert_eq!((q, r), (poly(&c, &[5, 1]), poly(&c, &[7])));

        assert_eq!(f.divide(&poly(&c, &[1, 1])), Err(Error::NotDistinguished));
        assert_eq!(f.divide(&poly(&c, &[3, 0, 2])), Err(Error::NotDistinguished));
        assert_eq!(f.divide(&poly(&c, &[3])), Err(Error::NotDistinguished));
    }

    #[test]
    fn omega_examples() {
        let c3 = ctx(3);
        assert_eq!(omega(0, &c3).unwrap(), poly(&c3, &[0, 1]));
        assert_eq!(omega(1, &c3).unwrap(), poly(&c3, &[0, 3, 3, 1]));
        let c2 = ctx(2);
        assert_eq!(omega(1, &c2).unwrap(), poly(&c2, &[0, 2, 1]));
        assert_eq!(omega(1, &c2).unwrap().exact_degree(), Some(2));
        assert!(matches!(omega(3, &c3), Err(Error::TDepthExhausted { .. })));
    }

    #[test]
    fn invariants_examples() {
        let c = ctx(3);
        let f = poly(&c, &[9]).mul(&poly(&c, &[3, 0, 1])).unwrap().mul(&poly(&c, &[1, 1])).unwrap();
        assert_eq!(f.invariants().unwrap(), (2, 2));
        assert_eq!(poly(&c, &[1]).invariants().unwrap(), (0, 0));
        assert_eq!(omega(1, &c).unwrap().invariants().unwrap(), (3, 0));
    }

    #[test]
    fn omega_tower_divides() {
        for p in [2u64, 3, 5] {
            let c = PrecisionContext::new(p, 8, 32).unwrap();
            let mut n = 0;
            while let Ok(next) = omega(n + 1, &c) {
                let prep = omega(n, &c).unwrap().prepare().unwrap();
                let (_, r) = next.divide(&prep.distinguished).unwrap();
                assert!(r.is_zero(), "p={p} n={n}");
                n += 1;
            }
        }
    }

    fn element() -> impl Strategy<Value = (u64, Vec<i64>)> {
        prop_oneof![Just(2u64), Just(3u64), Just(5u64)]
            .prop_flat_map(|p| (Just(p), prop::collection::vec(-400i64..400, 1..32)))
    }

    proptest! {
        #[test]
        fn recompose_holds((p, coeffs) in element()) {
            let c = PrecisionContext::new(p, 8, 32).unwrap();
            let f = IwasawaElement::series(&c, &coeffs);
            prop_assume!(!f.is_zero());
            let prep = f.prepare().unwrap();
            let back = prep.recompose().unwrap();
            prop_assert_eq!(back.coeffs(), f.coeffs());
            let d = prep.distinguished.zero_tail();
            prop_assert_eq!(d.degree(), Some(prep.lambda));
            prop_assert_eq!(d.coeff(prep.lambda), 1);
            for i in 0..prep.lambda {
                prop_assert!(d.coeff(i).is_multiple_of(p));
            }
            prop_assert!(!prep.unit.coeffs()[0].is_multiple_of(p));
        }

        #[test]
        fn invariants_are_additive((p, a) in element(), b in prop::collection::vec(-400i64..400, 1..16)) {
            let c = PrecisionContext::new(p, 8, 32).unwrap();
            let f = IwasawaElement::polynomial(&c, &a).unwrap();
            let g = IwasawaElement::polynomial(&c, &b).unwrap();
            prop_assume!(!f.is_zero() && !g.is_zero());
            let (lf, mf) = f.invariants().unwrap();
            let (lg, mg) = g.invariants().unwrap();
            prop_assume!(mf + mg < 8 && lf + lg < 32);
            prop_assert_eq!(f.mul(&g).unwrap().invariants().unwrap(), (lf + lg, mf + mg));
        }

        #[test]
        fn division_is_unique(
            (p, coeffs) in element(),
            low in prop::collection::vec(-20i64..20, 1..5),
            guess in prop::collection::vec(-1000i64..1000, 0..32),
        ) {
            let c = PrecisionContext::new(p, 8, 32).unwrap();
            let mut dcoeffs: Vec<i64> = low.iter().map(|&x| x * p as i64).collect();
            dcoeffs.push(1);
            let div = IwasawaElement::polynomial(&c, &dcoeffs).unwrap();
            let f = IwasawaElement::series(&c, &coeffs);
            let (q, r) = f.divide(&div).unwrap();
            let back = q.mul(&div).unwrap().add(&r).unwrap();
            prop_assert_eq!(back.coeffs(), f.coeffs());
            prop_assert!(r.zero_tail().degree().is_none_or(|d| d < dcoeffs.len() - 1));
            let (q2, r2) = f.divide_from(&div, &IwasawaElement::series(&c, &guess)).unwrap();
            prop_assert_eq!(q2.coeffs(), q.coeffs());
            prop_assert_eq!(r2, r);
        }
    }
}
