//! Annihilators of top cohomology and the length-reducing triangle
//! `C' → C → C''`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{ChainMap, PerfectComplex};
use crate::error::{Error, Result};
use crate::group::{GroupRingElement, GroupRingMatrix};
use crate::matrix::PolyMatrix;
use crate::poly::Poly;

/// `f ∈ Λ` with `f·C^b ⊆ im d^{b−1}`, witnessed by `d^{b−1}·lift = f·I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annihilator {
    pub f: Poly,
    pub lift: GroupRingMatrix,
}

/// Picks `Λ[G]`-columns `S` of the top boundary whose augmentation is
/// invertible over `F_p(T)`; then `f = det L(d_S)` up to a constant unit
/// and the adjugate supplies the lift.
pub fn find_annihilator(c: &PerfectComplex) -> Result<Annihilator> {
    let b = c.max_degree();
    let d = c.boundary(b - 1);
    let nb = c.rank(b);
    let aug = d.augment();
    let mut chosen: Vec<usize> = Vec::with_capacity(nb);
    for col in 0..d.cols() {
        if chosen.len() == nb {
            break;
        }
        chosen.push(col);
        if aug.select_columns(&chosen).rank_mod_p() < chosen.len() {
            chosen.pop();
        }
    }
    if chosen.len() < nb {
        return Err(Error::MuNotZeroAtTop);
    }
    let ann = annihilator_from(c, &d.select_columns(&chosen), |y| place_rows(c, &chosen, y))?;
    Ok(ann)
}

/// Like [`find_annihilator`] but accepts `μ > 0` at the top by mixing the
/// columns of `d^{b−1}` with random scalar combinations.
pub fn find_annihilator_any(c: &PerfectComplex) -> Result<Annihilator> {
    match find_annihilator(c) {
        Err(Error::MuNotZeroAtTop) => {}
        other => return other,
    }
    let b = c.max_degree();
    let d = c.boundary(b - 1);
    let (nb, na) = (c.rank(b), d.cols());
    let ctx = c.context();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let mut r = PolyMatrix::zeros(ctx, na, nb);
        for i in 0..na {
            for j in 0..nb {
                r.set(i, j, Poly::constant(ctx, rng.gen_range(-3..=3)));
            }
        }
        let r = GroupRingMatrix::scalar_embed(&r, c.group());
        let mixed = d.mul(&r)?;
        if mixed.regular_expand().lift_rank() < nb * c.group().order() {
            continue;
        }
        return annihilator_from(c, &mixed, |y| r.mul(y).expect("shapes"));
    }
    if d.regular_expand().lift_rank() < nb * c.group().order() {
        Err(Error::NotTorsion)
    } else {
        Err(Error::PrecisionExhausted("no nonsingular square block found".into()))
    }
}

fn place_rows(c: &PerfectComplex, rows: &[usize], y: &GroupRingMatrix) -> GroupRingMatrix {
    let b = c.max_degree();
    let mut out = GroupRingMatrix::zeros(c.context(), c.group(), c.rank(b - 1), c.rank(b));
    for (k, &r) in rows.iter().enumerate() {
        for j in 0..y.cols() {
            out.set(r, j, y.get(k, j).clone());
        }
    }
    out
}

fn annihilator_from(
    c: &PerfectComplex,
    square: &GroupRingMatrix,
    to_lift: impl Fn(&GroupRingMatrix) -> GroupRingMatrix,
) -> Result<Annihilator> {
    let g = c.group();
    let ctx = c.context();
    let n = square.rows();
    let order = g.order();
    let want: Vec<usize> = (0..n).map(|j| j * order + g.identity()).collect();
    let (det, adj) = square.regular_expand().det_adjugate_columns(&want)?;
    if det.is_zero() {
        return Err(Error::PrecisionExhausted("annihilator vanishes at this precision".into()));
    }
    let (lam, mu) = det.invariants()?;
    // keep f monic in degree λ when μ = 0; otherwise leave it as is
    let unit = if mu == 0 { ctx.inv(det.coeff(lam))? } else { 1 };
    let f = det.scale(unit);
    let mut y = GroupRingMatrix::zeros(ctx, g, n, n);
    for (j, col) in adj.iter().enumerate() {
        for i in 0..n {
            let coeffs = (0..order).map(|h| col[i * order + h].scale(unit)).collect();
            y.set(i, j, GroupRingElement::new(g, coeffs)?);
        }
    }
    let lift = to_lift(&y);
    let ann = Annihilator { f, lift };
    check_annihilator(c, &ann)?;
    Ok(ann)
}

fn check_annihilator(c: &PerfectComplex, ann: &Annihilator) -> Result<()> {
    let b = c.max_degree();
    let lhs = c.boundary(b - 1).mul(&ann.lift)?;
    let rhs = scalar_matrix(c, c.rank(b), &ann.f);
    if lhs != rhs {
        return Err(Error::NotAnnihilating);
    }
    Ok(())
}

fn scalar_matrix(c: &PerfectComplex, n: usize, f: &Poly) -> GroupRingMatrix {
    GroupRingMatrix::scalar_embed(&PolyMatrix::scalar(c.context(), n, f), c.group())
}

/// The pieces of one reduction step.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// `[C^b →f C^b]` in degrees `b−1, b`.
    pub c_prime: PerfectComplex,
    /// `φ : C' → C`, the lift in degree `b−1` and the identity in degree `b`.
    pub map: ChainMap,
    /// The cone of `φ` with its contractible top pair removed; lives in
    /// degrees `a .. b−1`.
    pub c_second: PerfectComplex,
}

/// Needs `b − a ≥ 2`.
pub fn reduce_step(c: &PerfectComplex, ann: &Annihilator) -> Result<Reduction> {
    let c = c.trimmed();
    let (a, b) = (c.min_degree(), c.max_degree());
    if c.is_empty() || b - a < 2 {
        return Err(Error::LengthTooShort);
    }
    check_annihilator(&c, ann)?;
    let (ctx, g) = (c.context(), c.group());
    let nb = c.rank(b);
    let c_prime = PerfectComplex::two_term(b - 1, &scalar_matrix(&c, nb, &ann.f));
    let maps = BTreeMap::from([(b - 1, ann.lift.clone()), (b, GroupRingMatrix::identity(ctx, g, nb))]);
    let map = ChainMap::new(&c_prime, &c, maps)?;

    let mut ranks: Vec<usize> = (a..b).map(|i| c.rank(i)).collect();
    ranks[(b - 2 - a) as usize] += nb;
    let mut boundaries: Vec<GroupRingMatrix> = (a..b - 1).map(|i| c.boundary(i)).collect();
    if b - 3 >= a {
        let zero = GroupRingMatrix::zeros(ctx, g, nb, c.rank(b - 3));
        let d = c.boundary(b - 3);
        let mut m = GroupRingMatrix::zeros(ctx, g, nb + d.rows(), d.cols());
        m.put(0, 0, &zero);
        m.put(nb, 0, &d);
        boundaries[(b - 3 - a) as usize] = m;
    }
    let d = c.boundary(b - 2);
    let mut m = GroupRingMatrix::zeros(ctx, g, d.rows(), nb + d.cols());
    m.put(0, 0, &ann.lift);
    m.put(0, nb, &d);
    boundaries[(b - 2 - a) as usize] = m;
    let c_second = PerfectComplex::new(g, ctx, a, ranks, boundaries)?;
    Ok(Reduction { c_prime, map, c_second })
}

/// `λ(C)` for any torsion complex, by repeated reduction down to two terms
/// and determinants there. Unlike [`PerfectComplex::lambda`] this allows
/// `μ > 0`.
pub fn lambda_by_reduction(c: &PerfectComplex) -> Result<i64> {
    let c = c.trimmed();
    if c.is_empty() {
        return Ok(0);
    }
    let (a, b) = (c.min_degree(), c.max_degree());
    let sign = |deg: i64, x: i64| if deg.rem_euclid(2) == 0 { x } else { -x };
    match b - a {
        0 => Err(Error::NotTorsion),
        1 => {
            let d = c.boundary(a);
            if d.rows() != d.cols() {
                return Err(Error::NotTorsion);
            }
            let m = d.regular_expand();
            let det = m.det()?;
            if det.is_zero() {
                return Err(if m.lift_rank() < m.rows() {
                    Error::NotTorsion
                } else {
                    Error::PrecisionExhausted("determinant vanishes at this precision".into())
                });
            }
            Ok(sign(b, det.invariants()?.0 as i64))
        }
        _ => {
            let ann = find_annihilator_any(&c)?;
            let red = reduce_step(&c, &ann)?;
            let (lam_f, _) = ann.f.invariants()?;
            let top = (c.rank(b) * c.group().order() * lam_f) as i64;
            Ok(sign(b, top) + lambda_by_reduction(&red.c_second)?)
        }
    }
}
