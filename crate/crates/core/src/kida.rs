//! Kida-type formulas: `λ` upstairs from `λ` downstairs plus local terms.
//!
//! All arithmetic is checked `i128`; results that do not fit `i64` are
//! reported as [`Error::Overflow`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionType {
    Good,
    Split,
    PotGood,
    PotSplit,
    Other,
}

fn one() -> u64 {
    1
}

/// A fiber of `count` primes sharing ramification index `e` and inertia
/// degree `f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PrimeDatum {
    pub e: u64,
    #[serde(default = "one")]
    pub f: u64,
    #[serde(default = "one")]
    pub count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ReductionType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_lambda_base: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_lambda_top: Option<u64>,
}

impl PrimeDatum {
    pub fn new(e: u64, f: u64, count: u64) -> Self {
        PrimeDatum { e, f, count, label: None, local_lambda_base: None, local_lambda_top: None }
    }

    fn check(&self) -> Result<()> {
        if self.e == 0 || self.f == 0 || self.count == 0 {
            return Err(Error::InvalidContext("e, f and count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GenericOrdInput {
    pub degree: u64,
    pub lambda_sel_base: u64,
    #[serde(default)]
    pub lambda_h0_a_base: u64,
    #[serde(default)]
    pub delta_base: u64,
    #[serde(default)]
    pub lambda_h0_a_top: u64,
    #[serde(default)]
    pub delta_top: u64,
    #[serde(default)]
    pub primes: Vec<PrimeDatum>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LieMode {
    Generic,
    Cm,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LieRankInput {
    pub mode: LieMode,
    pub lambda_base: u64,
    #[serde(default)]
    pub delta: u64,
    #[serde(default)]
    pub lambda_h0_a_base: u64,
    #[serde(default)]
    pub delta_base: u64,
    /// Primes of the base that do not split completely.
    #[serde(default)]
    pub primes: Vec<PrimeDatum>,
}

/// One record per evaluator, tagged by `formula`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FormulaInput {
    MainOrd(GenericOrdInput),
    #[serde(rename_all = "camelCase")]
    TotallyReal {
        degree: u64,
        lambda_base: u64,
        #[serde(default)]
        primes: Vec<PrimeDatum>,
        #[serde(default)]
        xs: bool,
    },
    #[serde(rename_all = "camelCase")]
    CmSplit {
        degree: u64,
        delta: u64,
        lambda_base: u64,
        #[serde(default)]
        primes: Vec<PrimeDatum>,
    },
    #[serde(rename_all = "camelCase")]
    KidaClassical {
        degree: u64,
        delta: u64,
        lambda_base: u64,
        #[serde(default)]
        primes: Vec<PrimeDatum>,
    },
    #[serde(rename_all = "camelCase")]
    SigmaRamified {
        degree: u64,
        lambda_base: u64,
        #[serde(default)]
        primes: Vec<PrimeDatum>,
    },
    #[serde(rename_all = "camelCase")]
    EllipticOrdinary {
        degree: u64,
        lambda_base: u64,
        #[serde(default)]
        primes: Vec<PrimeDatum>,
    },
    #[serde(rename_all = "camelCase")]
    EllipticSupersingular {
        degree: u64,
        lambda_base: u64,
        #[serde(default)]
        primes: Vec<PrimeDatum>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<Vec<i8>>,
    },
    LieRank(LieRankInput),
    #[serde(rename_all = "camelCase")]
    LocalRankHm1 {
        reduction_type: ReductionType,
        has_p_torsion_point: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FormulaOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_top: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_rank: Option<u8>,
    pub warnings: Vec<String>,
}

fn int(x: u64) -> i128 {
    x as i128
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

fn add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

fn narrow(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Overflow)
}

fn is_prime_power(d: u64) -> bool {
    if d == 1 {
        return true;
    }
    let mut q = 2;
    while q * q <= d {
        if d.is_multiple_of(q) {
            let mut m = d;
            while m.is_multiple_of(q) {
                m /= q;
            }
            return m == 1;
        }
        q += 1;
    }
    true
}

fn check_degree(d: u64) -> Result<()> {
    if d == 0 || !is_prime_power(d) {
        return Err(Error::InvalidContext(format!("degree {d} is not a prime power")));
    }
    Ok(())
}

/// `Σ count·(w(P) − 1)` with `w` either `e` or `n = e·f`.
fn fiber_sum(primes: &[PrimeDatum], weight: impl Fn(&PrimeDatum) -> Result<i128>) -> Result<i128> {
    let mut s = 0i128;
    for q in primes {
        q.check()?;
        s = add(s, mul(int(q.count), weight(q)? - 1)?)?;
    }
    Ok(s)
}

fn n_of(q: &PrimeDatum) -> Result<i128> {
    mul(int(q.e), int(q.f))
}

fn e_of(q: &PrimeDatum) -> Result<i128> {
    Ok(int(q.e))
}

/// `degree·(λ − δ) + δ + Σ count·(w − 1)`.
fn riemann_hurwitz(degree: u64, lambda: u64, delta: u64, sum: i128) -> Result<i64> {
    check_degree(degree)?;
    let top = mul(int(degree), int(lambda) - int(delta))?;
    narrow(add(add(top, int(delta))?, sum)?)
}

pub fn eval_main_ord(input: &GenericOrdInput) -> Result<i64> {
    check_degree(input.degree)?;
    let base = int(input.lambda_sel_base) - int(input.lambda_h0_a_base) - int(input.delta_base);
    let mut total = add(mul(int(input.degree), base)?, int(input.lambda_h0_a_top) + int(input.delta_top))?;
    for (k, q) in input.primes.iter().enumerate() {
        q.check()?;
        let (Some(lb), Some(lt)) = (q.local_lambda_base, q.local_lambda_top) else {
            return Err(Error::MissingLocalData(format!("prime {k} lacks local lambda values")));
        };
        let term = mul(n_of(q)?, int(lb))? - int(lt);
        total = add(total, mul(int(q.count), term)?)?;
    }
    narrow(total)
}

pub fn eval_totally_real(degree: u64, lambda_base: u64, primes: &[PrimeDatum], xs: bool) -> Result<i64> {
    let sum = if xs { 0 } else { fiber_sum(primes, e_of)? };
    riemann_hurwitz(degree, lambda_base, 1, sum)
}

pub fn eval_cm_split(degree: u64, delta: u64, lambda_base: u64, primes: &[PrimeDatum]) -> Result<i64> {
    riemann_hurwitz(degree, lambda_base, delta, fiber_sum(primes, n_of)?)
}

pub fn eval_kida_classical(degree: u64, delta: u64, lambda_base: u64, primes: &[PrimeDatum]) -> Result<i64> {
    riemann_hurwitz(degree, lambda_base, delta, fiber_sum(primes, e_of)?)
}

pub fn eval_sigma_ramified(degree: u64, lambda_base: u64, primes: &[PrimeDatum]) -> Result<i64> {
    riemann_hurwitz(degree, lambda_base, 1, fiber_sum(primes, n_of)?)
}

/// Rank of the local term at a prime of the given reduction type.
pub fn local_rank_hm1(reduction: ReductionType, has_p_torsion_point: bool) -> u8 {
    match reduction {
        ReductionType::Good if has_p_torsion_point => 2,
        ReductionType::Split => 1,
        _ => 0,
    }
}

pub fn eval_elliptic_ordinary(degree: u64, lambda_base: u64, primes: &[PrimeDatum]) -> Result<i64> {
    check_degree(degree)?;
    let mut total = mul(int(degree), int(lambda_base))?;
    for (k, q) in primes.iter().enumerate() {
        q.check()?;
        let Some(label) = q.label else {
            return Err(Error::MissingLocalData(format!("prime {k} lacks a reduction label")));
        };
        let term = match label {
            ReductionType::Good => mul(2, int(q.e) - 1)?,
            ReductionType::Split => int(q.e) - 1,
            ReductionType::PotGood => -2,
            ReductionType::PotSplit => -1,
            ReductionType::Other => 0,
        };
        total = add(total, mul(int(q.count), term)?)?;
    }
    narrow(total)
}

/// Same arithmetic as the ordinary case; `ε` is carried for the record only.
pub fn eval_elliptic_supersingular(degree: u64, lambda_base: u64, primes: &[PrimeDatum]) -> Result<i64> {
    eval_elliptic_ordinary(degree, lambda_base, primes)
}

/// The generic input reproducing [`eval_elliptic_ordinary`]: trivial global
/// `H^0` and `δ`, `f = 1`, and local values from [`local_rank_hm1`] below
/// and above.
pub fn elliptic_as_main_ord(degree: u64, lambda_base: u64, primes: &[PrimeDatum]) -> Result<GenericOrdInput> {
    let mut out = Vec::with_capacity(primes.len());
    for (k, q) in primes.iter().enumerate() {
        let Some(label) = q.label else {
            return Err(Error::MissingLocalData(format!("prime {k} lacks a reduction label")));
        };
        let (below, above) = match label {
            ReductionType::Good => ((ReductionType::Good, true), (ReductionType::Good, true)),
            ReductionType::Split => ((ReductionType::Split, false), (ReductionType::Split, false)),
            ReductionType::PotGood => ((ReductionType::Other, false), (ReductionType::Good, true)),
            ReductionType::PotSplit => ((ReductionType::Other, false), (ReductionType::Split, false)),
            ReductionType::Other => ((ReductionType::Other, false), (ReductionType::Other, false)),
        };
        out.push(PrimeDatum {
            e: q.e,
            f: 1,
            count: q.count,
            label: Some(label),
            local_lambda_base: Some(local_rank_hm1(below.0, below.1) as u64),
            local_lambda_top: Some(local_rank_hm1(above.0, above.1) as u64),
        });
    }
    Ok(GenericOrdInput {
        degree,
        lambda_sel_base: lambda_base,
        lambda_h0_a_base: 0,
        delta_base: 0,
        lambda_h0_a_top: 0,
        delta_top: 0,
        primes: out,
    })
}

pub fn eval_lie_rank(input: &LieRankInput) -> Result<i64> {
    if input.delta > 1 {
        return Err(Error::InvalidContext("delta must be 0 or 1".into()));
    }
    let mut total = match input.mode {
        LieMode::Generic => int(input.lambda_base) - int(input.lambda_h0_a_base) - int(input.delta_base),
        LieMode::Cm => int(input.lambda_base) - int(input.delta),
    };
    for (k, q) in input.primes.iter().enumerate() {
        q.check()?;
        let local = match input.mode {
            LieMode::Cm => 1,
            LieMode::Generic => match q.local_lambda_base {
                Some(l) => int(l),
                None => return Err(Error::MissingLocalData(format!("prime {k} lacks a local lambda"))),
            },
        };
        total = add(total, mul(int(q.count), local)?)?;
    }
    narrow(total)
}

pub fn evaluate(input: &FormulaInput) -> Result<FormulaOutput> {
    let lambda = match input {
        FormulaInput::MainOrd(x) => eval_main_ord(x)?,
        FormulaInput::TotallyReal { degree, lambda_base, primes, xs } => {
            eval_totally_real(*degree, *lambda_base, primes, *xs)?
        }
        FormulaInput::CmSplit { degree, delta, lambda_base, primes } => {
            eval_cm_split(*degree, *delta, *lambda_base, primes)?
        }
        FormulaInput::KidaClassical { degree, delta, lambda_base, primes } => {
            eval_kida_classical(*degree, *delta, *lambda_base, primes)?
        }
        FormulaInput::SigmaRamified { degree, lambda_base, primes } => {
            eval_sigma_ramified(*degree, *lambda_base, primes)?
        }
        FormulaInput::EllipticOrdinary { degree, lambda_base, primes } => {
            eval_elliptic_ordinary(*degree, *lambda_base, primes)?
        }
        FormulaInput::EllipticSupersingular { degree, lambda_base, primes, .. } => {
            eval_elliptic_supersingular(*degree, *lambda_base, primes)?
        }
        FormulaInput::LieRank(x) => eval_lie_rank(x)?,
        FormulaInput::LocalRankHm1 { reduction_type, has_p_torsion_point } => {
            return Ok(FormulaOutput {
                lambda_top: None,
                local_rank: Some(local_rank_hm1(*reduction_type, *has_p_torsion_point)),
                warnings: Vec::new(),
            })
        }
    };
    let mut warnings = Vec::new();
    if lambda < 0 {
        warnings.push(format!("predicted lambda {lambda} is negative"));
    }
    Ok(FormulaOutput { lambda_top: Some(lambda), local_rank: None, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labelled(e: u64, label: ReductionType) -> PrimeDatum {
        PrimeDatum { label: Some(label), ..PrimeDatum::new(e, 1, 1) }
    }

    #[test]
    fn main_ord_examples() {
        let id = GenericOrdInput {
            degree: 1,
            lambda_sel_base: 5,
            lambda_h0_a_base: 1,
            delta_base: 1,
            lambda_h0_a_top: 1,
            delta_top: 1,
            primes: vec![],
        };
        assert_eq!(eval_main_ord(&id).unwrap(), 5);
        let q = PrimeDatum { local_lambda_base: Some(1), local_lambda_top: Some(1), ..PrimeDatum::new(3, 1, 1) };
        let x = GenericOrdInput {
            degree: 3,
            lambda_sel_base: 4,
            lambda_h0_a_base: 0,
            delta_base: 0,
            lambda_h0_a_top: 0,
            delta_top: 0,
            primes: vec![q],
        };
        assert_eq!(eval_main_ord(&x).unwrap(), 3 * 4 + 2);
        let missing = GenericOrdInput { primes: vec![PrimeDatum::new(3, 1, 1)], ..x };
        assert!(matches!(eval_main_ord(&missing), Err(Error::MissingLocalData(_))));
    }

    #[test]
    fn riemann_hurwitz_examples() {
        assert_eq!(eval_totally_real(3, 1, &[], false).unwrap(), 1);
        let two = [PrimeDatum::new(3, 1, 2)];
        assert_eq!(eval_totally_real(3, 1, &two, false).unwrap(), 5);
        assert_eq!(eval_totally_real(3, 2, &two, true).unwrap(), 4);
        assert_eq!(eval_cm_split(3, 1, 2, &two).unwrap(), 8);
        assert_eq!(eval_cm_split(1, 1, 7, &[]).unwrap(), 7);
        assert_eq!(eval_cm_split(9, 0, 0, &[PrimeDatum::new(9, 1, 1)]).unwrap(), 8);
        assert_eq!(eval_kida_classical(3, 1, 2, &two).unwrap(), 8);
        assert_eq!(eval_kida_classical(1, 0, 7, &[]).unwrap(), 7);
        assert_eq!(eval_kida_classical(9, 0, 0, &[PrimeDatum::new(9, 1, 1)]).unwrap(), 8);
        assert_eq!(eval_sigma_ramified(3, 1, &[]).unwrap(), 1);
        assert_eq!(eval_sigma_ramified(3, 1, &two).unwrap(), 5);
        assert_eq!(eval_sigma_ramified(3, 2, &[PrimeDatum::new(1, 3, 1)]).unwrap(), 6);
        assert_eq!(eval_sigma_ramified(1, 4, &[]).unwrap(), 4);
        assert!(eval_kida_classical(6, 0, 1, &[]).is_err());
    }

    #[test]
    fn elliptic_examples() {
        assert_eq!(local_rank_hm1(ReductionType::Good, true), 2);
        assert_eq!(local_rank_hm1(ReductionType::Split, false), 1);
        assert_eq!(local_rank_hm1(ReductionType::Good, false), 0);
        assert_eq!(eval_elliptic_ordinary(3, 2, &[labelled(3, ReductionType::Good)]).unwrap(), 10);
        assert_eq!(eval_elliptic_ordinary(3, 2, &[labelled(3, ReductionType::PotGood)]).unwrap(), 4);
        assert_eq!(eval_elliptic_ordinary(1, 2, &[]).unwrap(), 2);
        assert_eq!(eval_elliptic_supersingular(3, 2, &[labelled(3, ReductionType::Good)]).unwrap(), 10);
        let out = evaluate(&FormulaInput::EllipticOrdinary {
            degree: 3,
            lambda_base: 0,
            primes: vec![labelled(1, ReductionType::PotGood)],
        })
        .unwrap();
        assert_eq!(out.lambda_top, Some(-2));
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn lie_examples() {
        let cm = LieRankInput {
            mode: LieMode::Cm,
            lambda_base: 4,
            delta: 1,
            lambda_h0_a_base: 0,
            delta_base: 0,
            primes: vec![PrimeDatum::new(1, 1, 2)],
        };
        assert_eq!(eval_lie_rank(&cm).unwrap(), 5);
        let bare = LieRankInput { mode: LieMode::Generic, primes: vec![], delta: 0, ..cm.clone() };
        assert_eq!(eval_lie_rank(&bare).unwrap(), 4);
        assert!(eval_lie_rank(&LieRankInput { delta: 2, ..cm }).is_err());
    }

    #[test]
    fn schema_round_trip() {
        let text = r#"{ "formula": "kida-classical", "degree": 3, "delta": 1, "lambdaBase": 2, "primes": [{"e":3, "count":2}] }"#;
        let input: FormulaInput = serde_json::from_str(text).unwrap();
        let out = evaluate(&input).unwrap();
        assert_eq!(serde_json::to_string(&out).unwrap(), r#"{"lambdaTop":8,"warnings":[]}"#);
        let again: FormulaInput = serde_json::from_str(&serde_json::to_string(&input).unwrap()).unwrap();
        assert_eq!(again, input);
        assert!(serde_json::from_str::<FormulaInput>(r#"{"formula":"kida-classical","degree":3}"#).is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let big = [PrimeDatum::new(u64::MAX, u64::MAX, u64::MAX)];
        assert_eq!(eval_cm_split(1, 0, 0, &big), Err(Error::Overflow));
    }

    fn reduction() -> impl Strategy<Value = ReductionType> {
        prop_oneof![
            Just(ReductionType::Good),
            Just(ReductionType::Split),
            Just(ReductionType::PotGood),
            Just(ReductionType::PotSplit),
            Just(ReductionType::Other)
        ]
    }

    proptest! {
        #[test]
        fn elliptic_is_a_main_ord_instance(
            k in 0u32..4,
            lambda in 0u64..20,
            primes in proptest::collection::vec((1u64..30, 1u64..4, reduction()), 0..5),
        ) {
            let primes: Vec<PrimeDatum> = primes
                .into_iter()
                .map(|(e, c, r)| PrimeDatum { label: Some(r), ..PrimeDatum::new(e, 1, c) })
                .collect();
            let degree = 3u64.pow(k);
            let generic = elliptic_as_main_ord(degree, lambda, &primes).unwrap();
            prop_assert_eq!(
                eval_main_ord(&generic).unwrap(),
                eval_elliptic_ordinary(degree, lambda, &primes).unwrap()
            );
        }

        #[test]
        fn lie_modes_agree_on_unit_locals(
            lambda in 0u64..20,
            delta in 0u64..2,
            counts in proptest::collection::vec(1u64..5, 0..4),
        ) {
            let primes: Vec<PrimeDatum> = counts
                .iter()
                .map(|&c| PrimeDatum { local_lambda_base: Some(1), ..PrimeDatum::new(1, 1, c) })
                .collect();
            let cm = LieRankInput { mode: LieMode::Cm, lambda_base: lambda, delta, lambda_h0_a_base: 0, delta_base: 0, primes: primes.clone() };
            let generic = LieRankInput { mode: LieMode::Generic, delta_base: delta, ..cm.clone() };
            prop_assert_eq!(eval_lie_rank(&cm).unwrap(), eval_lie_rank(&generic).unwrap());
        }

        #[test]
        fn unramified_primes_change_nothing(lambda in 0u64..20, c in 1u64..5) {
            let q = PrimeDatum { local_lambda_base: Some(2), local_lambda_top: Some(2), ..PrimeDatum::new(1, 1, c) };
            let x = GenericOrdInput { degree: 1, lambda_sel_base: lambda, lambda_h0_a_base: 0, delta_base: 0, lambda_h0_a_top: 0, delta_top: 0, primes: vec![] };
            let y = GenericOrdInput { primes: vec![q.clone()], ..x.clone() };
            prop_assert_eq!(eval_main_ord(&x).unwrap(), eval_main_ord(&y).unwrap());
            prop_assert_eq!(eval_cm_split(9, 1, lambda, &[]).unwrap(), eval_cm_split(9, 1, lambda, &[q]).unwrap());
        }
    }
}
