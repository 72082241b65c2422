//! Finitely presented modules over the Iwasawa algebra and their `λ`, `μ`
//! invariants.

use serde::Serialize;

use crate::coeff::{PrecisionContext, ResidueMatrix};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::PolyMatrix;
use crate::poly::Poly;
use crate::ring::IwasawaElement;

pub const DEFAULT_MATRIX_BUDGET: usize = 4096;

/// `Λ^g / (column span of the relation matrix)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaModule {
    generators: usize,
    relations: PolyMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    Determinant,
    Growth,
}

/// `λ`, `μ` (and for the growth route `ν`) of a module. Non-torsion modules
/// carry no invariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InvariantReport {
    pub lambda: Option<usize>,
    pub mu: Option<u32>,
    pub nu: Option<i64>,
    pub torsion: bool,
    pub method: Method,
    /// First layer from which the growth fit is exact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable_from: Option<u32>,
    /// `(n, log_p |M/ω_n M|)` for each computed layer.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub layers: Vec<(u32, u64)>,
}

impl LambdaModule {
    pub fn new(generators: usize, relations: PolyMatrix) -> Result<Self> {
        if relations.rows() != generators {
            return Err(Error::DimensionMismatch(format!(
                "{} generators but relation matrix has {} rows",
                generators,
                relations.rows()
            )));
        }
        Ok(LambdaModule { generators, relations })
    }

    /// Relations given as ring elements; each must be an exact polynomial.
    pub fn from_elements(ctx: &PrecisionContext, generators: usize, relations: &[Vec<IwasawaElement>]) -> Result<Self> {
        let rows = relations
            .iter()
            .map(|r| r.iter().map(IwasawaElement::to_poly).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let cols = rows.first().map_or(0, |r| r.len());
        let m = if rows.is_empty() { PolyMatrix::zeros(ctx, 0, cols) } else { PolyMatrix::from_rows(ctx, rows)? };
        Self::new(generators, m)
    }

    /// `Λ/(f)`.
    pub fn cyclic(f: &Poly) -> Self {
        let m = PolyMatrix::from_rows(f.context(), vec![vec![f.clone()]]).expect("1x1");
        LambdaModule { generators: 1, relations: m }
    }

    pub fn zero(ctx: &PrecisionContext) -> Self {
        LambdaModule { generators: 0, relations: PolyMatrix::zeros(ctx, 0, 0) }
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn relations(&self) -> &PolyMatrix {
        &self.relations
    }

    pub fn context(&self) -> &PrecisionContext {
        self.relations.context()
    }

    pub fn direct_sum(&self, other: &LambdaModule) -> LambdaModule {
        LambdaModule {
            generators: self.generators + other.generators,
            relations: PolyMatrix::block_diag(&self.relations, &other.relations),
        }
    }

    /// `μ = 0` for a square torsion presentation: the determinant is nonzero
    /// modulo `p`.
    pub fn mu_vanishes(&self) -> bool {
        self.relations.rank_mod_p() == self.generators
    }

    /// `(λ, μ)` from the determinant of a square presentation.
    pub fn exact_invariants(&self) -> Result<InvariantReport> {
        let (rows, cols) = (self.relations.rows(), self.relations.cols());
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let det = self.relations.det()?;
        if det.is_zero() {
            return Err(Error::ZeroDeterminant { identically_zero: self.relations.lift_rank() < rows });
        }
        let (lambda, mu) = det.invariants()?;
        Ok(InvariantReport {
            lambda: Some(lambda),
            mu: Some(mu),
            nu: None,
            torsion: true,
            method: Method::Determinant,
            stable_from: None,
            layers: Vec::new(),
        })
    }

    /// The presentation of `M/ω_n M` over `Z/p^N`, on the basis
    /// `e_i T^j` (`j < p^n`).
    pub fn layer_presentation(&self, n: u32, budget: usize) -> Result<ResidueMatrix> {
        let ctx = *self.context();
        let deg =
            ctx.p().checked_pow(n).map(|d| d as usize).ok_or(Error::BudgetExceeded { rows: usize::MAX, budget })?;
        let rows = self.generators.saturating_mul(deg);
        if rows > budget {
            return Err(Error::BudgetExceeded { rows, budget });
        }
        let omega = Poly::one_plus_t_pow_minus_one(&ctx, deg);
        let ncols = self.relations.cols() * deg;
        let mut a = ResidueMatrix::zeros(&ctx, rows, ncols);
        for i in 0..self.generators {
            for c in 0..self.relations.cols() {
                let (_, mut r) = self.relations.get(i, c).div_rem_monic(&omega)?;
                for j in 0..deg {
                    for (k, &x) in r.coeffs().iter().enumerate() {
                        a.set(i * deg + k, c * deg + j, x);
                    }
                    // r ← T·r mod ω_n
                    r = r.shift(1).div_rem_monic(&omega)?.1;
                }
            }
        }
        Ok(a)
    }

    /// `log_p |M/ω_n M|`.
    pub fn finite_quotient_log_size(&self, n: u32, budget: usize) -> Result<u64> {
        let a = self.layer_presentation(n, budget)?;
        let vals = a.elementary_valuations();
        if vals.len() < a.rows() {
            let lifted: linalg::IntPolyMatrix = (0..a.rows())
                .map(|r| (0..a.cols()).map(|c| vec![self.context().symmetric(a.get(r, c))]).collect())
                .collect();
            if linalg::lift_rank(&lifted) < a.rows() {
                return Err(Error::InfiniteQuotient { layer: n });
            }
            return Err(Error::PrecisionExhausted(format!(
                "an elementary divisor at layer {n} vanishes modulo p^{}",
                self.context().coeff_precision()
            )));
        }
        Ok(vals.iter().map(|&v| v as u64).sum())
    }

    /// Fits `log_p |M/ω_n M| = μ p^n + λ n + ν` on the last three layers of
    /// the range and reports the first layer from which the fit is exact.
    pub fn growth_invariants(&self, n_range: (u32, u32), budget: usize) -> Result<InvariantReport> {
        let (lo, hi) = n_range;
        if hi < lo || hi - lo < 3 {
            return Err(Error::InvalidRange(format!("need at least four layers, got {lo}..={hi}")));
        }
        let layers =
            (lo..=hi).map(|n| self.finite_quotient_log_size(n, budget).map(|e| (n, e))).collect::<Result<Vec<_>>>()?;
        let p = self.context().p() as i128;
        let e = |k: usize| layers[k].1 as i128;
        let last = layers.len() - 1;
        let n = (hi - 2) as i128;
        let pn = p.pow(hi - 2);
        let d1 = e(last - 1) - e(last - 2);
        let d2 = e(last) - e(last - 1);
        let denom = pn * (p - 1) * (p - 1);
        if (d2 - d1) % denom != 0 || d2 < d1 {
            return Err(Error::Unstable(format!(
                "layer sizes {:?} do not fit μ·p^n + λ·n + ν; raise n_max, N or M",
                layers
            )));
        }
        let mu = (d2 - d1) / denom;
        let lambda = d1 - mu * pn * (p - 1);
        if lambda < 0 {
            return Err(Error::Unstable(format!("negative λ from layer sizes {:?}; raise n_max, N or M", layers)));
        }
        let nu = e(last - 2) - mu * pn - lambda * n;
        let fits = |(k, size): &(u32, u64)| mu * p.pow(*k) + lambda * *k as i128 + nu == *size as i128;
        let first_bad = layers.iter().rposition(|l| !fits(l));
        let stable_from = first_bad.map_or(lo, |i| layers[i].0 + 1);
        Ok(InvariantReport {
            lambda: Some(lambda as usize),
            mu: Some(mu as u32),
            nu: Some(nu as i64),
            torsion: true,
            method: Method::Growth,
            stable_from: Some(stable_from),
            layers,
        })
    }
}

/// Default layer range for the growth fit at a prime.
pub fn default_layer_range(p: u64) -> (u32, u32) {
    match p {
        2 => (0, 5),
        3 => (0, 4),
        _ => (0, 3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(3, 8, 32).unwrap()
    }

    fn cyclic(c: &[i64]) -> LambdaModule {
        LambdaModule::cyclic(&Poly::from_i64(&ctx(), c))
    }

    #[test]
    fn exact_invariants_examples() {
        let r = cyclic(&[3, 1]).exact_invariants().unwrap();
        assert_eq!((r.lambda, r.mu, r.torsion), (Some(1), Some(0), true));
        let m = LambdaModule::new(
            2,
            PolyMatrix::from_i64(&ctx(), &[vec![vec![0, 1], vec![3]], vec![vec![], vec![0, 1]]]).unwrap(),
        )
        .unwrap();
        let r = m.exact_invariants().unwrap();
        assert_eq!((r.lambda, r.mu), (Some(2), Some(0)));
        let r = cyclic(&[3]).exact_invariants().unwrap();
        assert_eq!((r.lambda, r.mu), (Some(0), Some(1)));
    }

    #[test]
    fn exact_invariants_errors() {
        let c = ctx();
        let m = LambdaModule::new(1, PolyMatrix::from_i64(&c, &[vec![vec![1], vec![2]]]).unwrap()).unwrap();
        assert!(matches!(m.exact_invariants(), Err(Error::NotSquare { rows: 1, cols: 2 })));
        let singular =
            LambdaModule::new(2, PolyMatrix::from_i64(&c, &[vec![vec![1], vec![2]], vec![vec![2], vec![4]]]).unwrap())
                .unwrap();
        assert_eq!(singular.exact_invariants(), Err(Error::ZeroDeterminant { identically_zero: true }));
        // det = 3^8 vanishes modulo 3^8 although the presentation has full rank
        let tiny =
            LambdaModule::new(2, PolyMatrix::from_i64(&c, &[vec![vec![81], vec![]], vec![vec![], vec![81]]]).unwrap())
                .unwrap();
        assert_eq!(tiny.exact_invariants(), Err(Error::ZeroDeterminant { identically_zero: false }));
    }

    #[test]
    fn layer_sizes() {
        let m = cyclic(&[3, 1]);
        let sizes: Vec<u64> = (0..4).map(|n| m.finite_quotient_log_size(n, 4096).unwrap()).collect();
        assert_eq!(sizes, vec![1, 2, 3, 4]);
        let m = cyclic(&[3]);
        let sizes: Vec<u64> = (0..4).map(|n| m.finite_quotient_log_size(n, 4096).unwrap()).collect();
        assert_eq!(sizes, vec![1, 3, 9, 27]);
        assert_eq!(LambdaModule::zero(&ctx()).finite_quotient_log_size(3, 4096).unwrap(), 0);
        assert!(matches!(cyclic(&[0, 1]).finite_quotient_log_size(1, 4096), Err(Error::InfiniteQuotient { layer: 1 })));
        assert!(matches!(
            cyclic(&[3]).finite_quotient_log_size(4, 40),
            Err(Error::BudgetExceeded { rows: 81, budget: 40 })
        ));
    }

    #[test]
    fn layer_size_by_hand() {
        // Λ/(T+3, ω_0) = Z_3/3 and Λ/(T+3, ω_1) = Z_3/((−2)^3 − 1) = Z_3/9
        let m = cyclic(&[3, 1]);
        let direct = |n: u32| {
            let x: i64 = (-2i64).pow(3u32.pow(n)) - 1;
            let mut v = 0;
            let mut y = x.abs();
            while y % 3 == 0 {
                y /= 3;
                v += 1;
            }
            v
        };
        for n in 0..3 {
            assert_eq!(m.finite_quotient_log_size(n, 4096).unwrap(), direct(n));
        }
    }

    #[test]
    fn growth_examples() {
        let r = cyclic(&[3, 1]).growth_invariants((0, 3), 4096).unwrap();
        assert_eq!((r.lambda, r.mu, r.nu), (Some(1), Some(0), Some(1)));
        let r = cyclic(&[3]).growth_invariants((0, 3), 4096).unwrap();
        assert_eq!((r.lambda, r.mu, r.nu), (Some(0), Some(1), Some(0)));
        assert_eq!(r.stable_from, Some(0));
        assert!(matches!(cyclic(&[3]).growth_invariants((0, 2), 4096), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn layers_fail_where_module_meets_omega() {
        // 3·ω_1 shares the factor ω_1 with every later ω_n, so those
        // quotients are infinite; the determinant still reads (3, 1).
        let c = ctx();
        let f = Poly::one_plus_t_pow_minus_one(&c, 3).scale(3);
        let m = LambdaModule::cyclic(&f);
        let r = m.exact_invariants().unwrap();
        assert_eq!((r.lambda, r.mu), (Some(3), Some(1)));
        assert!(matches!(m.growth_invariants((0, 3), 4096), Err(Error::InfiniteQuotient { .. })));
    }

    fn coprime_to_omega() -> impl Strategy<Value = Vec<i64>> {
        // λ-part T + p·a avoids the roots ζ − 1 of ω_n when a ≢ 0 mod p
        (1i64..3, prop::collection::vec(-5i64..5, 0..3), 0u32..2).prop_map(|(a, tail, mu)| {
            let base = Poly::from_i64(&ctx(), &[3 * a, 1]);
            let mut unit = vec![1];
            unit.extend(tail);
            let f = base.mul(&Poly::from_i64(&ctx(), &unit)).scale(3u64.pow(mu));
            f.to_i64()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn determinant_and_growth_agree(a in coprime_to_omega(), b in coprime_to_omega()) {
            let m = cyclic(&a).direct_sum(&cyclic(&b));
            let exact = m.exact_invariants().unwrap();
            let growth = m.growth_invariants((0, 4), 4096).unwrap();
            prop_assert_eq!((exact.lambda, exact.mu), (growth.lambda, growth.mu));
            let ea = cyclic(&a).exact_invariants().unwrap();
            let eb = cyclic(&b).exact_invariants().unwrap();
            prop_assert_eq!(exact.lambda.unwrap(), ea.lambda.unwrap() + eb.lambda.unwrap());
            prop_assert_eq!(exact.mu.unwrap(), ea.mu.unwrap() + eb.mu.unwrap());
        }
    }
}
