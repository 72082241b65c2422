//! Seeded generators for complexes, triangles and Selmer-shaped cones.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coeff::PrecisionContext;
use crate::complex::{ChainMap, PerfectComplex};
use crate::group::{GroupRingElement, GroupRingMatrix, PGroup};
use crate::poly::Poly;
use crate::reduce::{find_annihilator_any, reduce_step};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Family {
    /// Fraction-field exact mod `p` by construction.
    MuZero,
    /// Contains a `p`-divisible boundary block.
    MuPositive,
    Unconstrained,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComplexParams {
    pub family: Family,
    /// Number of boundaries, clamped to `1..=4`.
    pub length: usize,
    /// Clamped to `1..=4`.
    pub max_rank: usize,
    /// `T`-degree of generated entries, clamped to `0..=3`.
    pub max_degree: usize,
}

impl ComplexParams {
    pub fn new(family: Family, length: usize) -> Self {
        ComplexParams { family, length, max_rank: 4, max_degree: 2 }
    }

    fn clamped(self) -> Self {
        ComplexParams {
            family: self.family,
            length: self.length.clamp(1, 4),
            max_rank: self.max_rank.clamp(1, 4),
            max_degree: self.max_degree.min(3),
        }
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A polynomial of degree at most `deg` with coefficients in `[−bound, bound]`.
pub fn random_poly(rng: &mut impl Rng, ctx: &PrecisionContext, deg: usize, bound: i64) -> Poly {
    let c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-bound..=bound)).collect();
    Poly::from_i64(ctx, &c)
}

/// Each group element gets a nonzero coefficient with probability one half.
pub fn random_element(
    rng: &mut impl Rng,
    ctx: &PrecisionContext,
    g: &PGroup,
    deg: usize,
    bound: i64,
) -> GroupRingElement {
    let coeffs = (0..g.order())
        .map(|_| if rng.gen_bool(0.5) { random_poly(rng, ctx, deg, bound) } else { Poly::zero(ctx) })
        .collect();
    GroupRingElement::new(g, coeffs).expect("order matches")
}

fn augmentation_vanishes_mod_p(x: &GroupRingElement, ctx: &PrecisionContext) -> bool {
    x.augment().coeffs().iter().all(|&c| c % ctx.p() == 0)
}

/// An element invertible over `F_p((T))[G]`, so `Λ[G]/x` has `μ = 0`.
fn mu_zero_element(rng: &mut impl Rng, ctx: &PrecisionContext, g: &PGroup, deg: usize) -> GroupRingElement {
    let mut x = random_element(rng, ctx, g, deg, 2);
    if augmentation_vanishes_mod_p(&x, ctx) {
        let k = rng.gen_range(0..=deg);
        x = x.add(&GroupRingElement::scalar(&Poly::monomial(ctx, 1, k), g));
    }
    x
}

fn unit_element(rng: &mut impl Rng, ctx: &PrecisionContext, g: &PGroup) -> GroupRingElement {
    let h = rng.gen_range(0..g.order());
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    let f = Poly::from_i64(ctx, &[sign, rng.gen_range(-1..=1)]);
    GroupRingElement::basis(ctx, g, h).mul(&GroupRingElement::scalar(&f, g), g)
}

fn one_by_one(ctx: &PrecisionContext, g: &PGroup, x: GroupRingElement) -> GroupRingMatrix {
    GroupRingMatrix::from_entries(ctx, g, 1, 1, vec![x]).expect("1x1")
}

struct Piece {
    start: usize,
    ranks: Vec<usize>,
    boundaries: Vec<GroupRingMatrix>,
}

struct Builder<'a> {
    ctx: &'a PrecisionContext,
    g: &'a PGroup,
    ranks: Vec<usize>,
    max_rank: usize,
    pieces: Vec<(Piece, Vec<usize>)>,
}

impl<'a> Builder<'a> {
    fn new(ctx: &'a PrecisionContext, g: &'a PGroup, length: usize, max_rank: usize) -> Self {
        Builder { ctx, g, ranks: vec![0; length + 1], max_rank, pieces: Vec::new() }
    }

    fn fits(&self, start: usize, ranks: &[usize]) -> bool {
        start + ranks.len() <= self.ranks.len()
            && ranks.iter().enumerate().all(|(k, &r)| self.ranks[start + k] + r <= self.max_rank)
    }

    fn add(&mut self, piece: Piece) -> bool {
        if !self.fits(piece.start, &piece.ranks) {
            return false;
        }
        let offsets = (0..piece.ranks.len()).map(|k| self.ranks[piece.start + k]).collect();
        for (k, &r) in piece.ranks.iter().enumerate() {
            self.ranks[piece.start + k] += r;
        }
        self.pieces.push((piece, offsets));
        true
    }

    fn two_term(&mut self, start: usize, x: GroupRingElement) -> bool {
        let d = one_by_one(self.ctx, self.g, x);
        self.add(Piece { start, ranks: vec![1, 1], boundaries: vec![d] })
    }

    fn koszul(&mut self, start: usize, x: GroupRingElement, y: GroupRingElement) -> bool {
        let (c, g) = (self.ctx, self.g);
        let d0 = GroupRingMatrix::from_entries(c, g, 2, 1, vec![x.clone(), y.clone()]).expect("2x1");
        let d1 = GroupRingMatrix::from_entries(c, g, 1, 2, vec![y, x.neg()]).expect("1x2");
        self.add(Piece { start, ranks: vec![1, 2, 1], boundaries: vec![d0, d1] })
    }

    fn free(&mut self, degree: usize) -> bool {
        self.add(Piece { start: degree, ranks: vec![1], boundaries: Vec::new() })
    }

    fn build(self) -> PerfectComplex {
        let length = self.ranks.len() - 1;
        let mut bounds: Vec<GroupRingMatrix> =
            (0..length).map(|i| GroupRingMatrix::zeros(self.ctx, self.g, self.ranks[i + 1], self.ranks[i])).collect();
        for (piece, offsets) in &self.pieces {
            for (k, d) in piece.boundaries.iter().enumerate() {
                bounds[piece.start + k].put(offsets[k + 1], offsets[k], d);
            }
        }
        PerfectComplex::new(self.g, self.ctx, 0, self.ranks, bounds).expect("direct sum of complexes")
    }
}

/// Basis changes `U_i` in every degree; returns the conjugated complex and
/// the `(U_i, U_i^{-1})` pairs.
fn mix(c: &PerfectComplex, rng: &mut impl Rng) -> (PerfectComplex, Vec<(GroupRingMatrix, GroupRingMatrix)>) {
    let (ctx, g) = (c.context(), c.group());
    let mut changes = Vec::with_capacity(c.ranks().len());
    for &n in c.ranks() {
        let mut u = GroupRingMatrix::identity(ctx, g, n);
        let mut uinv = u.clone();
        for _ in 0..2 {
            let (e, einv) = if n >= 2 && rng.gen_bool(0.7) {
                let j = rng.gen_range(0..n);
                let k = (j + rng.gen_range(1..n)) % n;
                let x = random_element(rng, ctx, g, 1, 1);
                let mut e = GroupRingMatrix::identity(ctx, g, n);
                let mut einv = e.clone();
                e.set(j, k, x.clone());
                einv.set(j, k, x.neg());
                (e, einv)
            } else if n >= 1 {
                let j = rng.gen_range(0..n);
                let h = rng.gen_range(0..g.order());
                let mut e = GroupRingMatrix::identity(ctx, g, n);
                let mut einv = e.clone();
                e.set(j, j, GroupRingElement::basis(ctx, g, h));
                einv.set(j, j, GroupRingElement::basis(ctx, g, g.inverse(h)));
                (e, einv)
            } else {
                continue;
            };
            u = e.mul(&u).expect("square");
            uinv = uinv.mul(&einv).expect("square");
        }
        changes.push((u, uinv));
    }
    let a = c.min_degree();
    let bounds = c
        .boundaries()
        .iter()
        .enumerate()
        .map(|(k, d)| changes[k + 1].0.mul(d).and_then(|m| m.mul(&changes[k].1)).expect("shapes"))
        .collect();
    let mixed = PerfectComplex::new(g, ctx, a, c.ranks().to_vec(), bounds).expect("conjugate of a complex");
    (mixed, changes)
}

/// Deterministic in `seed`. Terms sit in degrees `0..=length`.
pub fn random_complex(g: &PGroup, ctx: &PrecisionContext, params: ComplexParams, seed: u64) -> PerfectComplex {
    let mut rng = rng_for(seed);
    random_complex_with(g, ctx, params, &mut rng)
}

fn random_complex_with(
    g: &PGroup,
    ctx: &PrecisionContext,
    params: ComplexParams,
    rng: &mut impl Rng,
) -> PerfectComplex {
    let params = params.clamped();
    let (len, deg) = (params.length, params.max_degree);
    let mut b = Builder::new(ctx, g, len, params.max_rank);
    if params.family == Family::MuPositive {
        let at = rng.gen_range(0..len);
        let x = mu_zero_element(rng, ctx, g, deg);
        let p = GroupRingElement::scalar(&Poly::constant(ctx, ctx.p() as i64), g);
        b.two_term(at, p.mul(&x, g));
    }
    for at in [0, len - 1] {
        let x = mu_zero_element(rng, ctx, g, deg);
        b.two_term(at, x);
    }
    let extra = rng.gen_range(0..=len + 1);
    for _ in 0..extra {
        let at = rng.gen_range(0..len);
        let kind = rng.gen_range(0..if params.family == Family::Unconstrained { 6 } else { 3 });
        match kind {
            0 => {
                let x = mu_zero_element(rng, ctx, g, deg);
                b.two_term(at, x);
            }
            1 => {
                let x = unit_element(rng, ctx, g);
                b.two_term(at, x);
            }
            2 => {
                if at + 2 <= len {
                    let x = mu_zero_element(rng, ctx, g, deg);
                    let y = random_element(rng, ctx, g, deg, 2);
                    b.koszul(at, x, y);
                }
            }
            3 => {
                b.free(rng.gen_range(0..=len));
            }
            4 => {
                let x = random_element(rng, ctx, g, deg, 2);
                b.two_term(at, x);
            }
            _ => {
                let x = random_element(rng, ctx, g, deg, 1);
                let p = GroupRingElement::scalar(&Poly::constant(ctx, ctx.p() as i64), g);
                b.two_term(at, p.mul(&x, g));
            }
        }
    }
    mix(&b.build(), rng).0
}

/// `C' →φ C → cone(φ)`.
#[derive(Clone, Debug)]
pub struct Triangle {
    pub map: ChainMap,
    pub cone: PerfectComplex,
}

/// Half of the draws are reduction triangles of a random complex, the rest
/// are `s·id` on a summand of a mixed direct sum.
pub fn random_triangle(g: &PGroup, ctx: &PrecisionContext, params: ComplexParams, seed: u64) -> Triangle {
    let mut rng = rng_for(seed);
    if rng.gen_bool(0.5) {
        let mut p = params.clamped();
        p.length = p.length.max(2);
        let c = random_complex_with(g, ctx, p, &mut rng);
        if let Ok(ann) = find_annihilator_any(&c) {
            if let Ok(red) = reduce_step(&c, &ann) {
                let cone = red.map.cone().expect("cone");
                return Triangle { map: red.map, cone };
            }
        }
    }
    let source = random_complex_with(g, ctx, params, &mut rng);
    let other_params =
        ComplexParams { family: if rng.gen_bool(0.5) { Family::MuZero } else { params.family }, ..params };
    let other = random_complex_with(g, ctx, other_params, &mut rng);
    let s = match rng.gen_range(0..3) {
        0 => Poly::from_i64(ctx, &[rng.gen_range(1..=2), 1]),
        1 => Poly::constant(ctx, ctx.p() as i64),
        _ => Poly::from_i64(ctx, &[1, rng.gen_range(-1..=1)]),
    };
    let sum = source.direct_sum(&other).expect("same group");
    let (target, changes) = mix(&sum, &mut rng);
    let a = sum.min_degree();
    let mut maps = BTreeMap::new();
    for i in source.min_degree()..=source.max_degree() {
        let n = source.rank(i);
        let mut incl = GroupRingMatrix::zeros(ctx, g, sum.rank(i), n);
        let scalar = GroupRingElement::scalar(&s, g);
        for k in 0..n {
            incl.set(k, k, scalar.clone());
        }
        let u = &changes[(i - a) as usize].0;
        maps.insert(i, u.mul(&incl).expect("shapes"));
    }
    let map = ChainMap::new(&source, &target, maps).expect("scalar inclusion is a chain map");
    let cone = map.cone().expect("cone");
    Triangle { map, cone }
}

/// Rank data `([k_v : Q_p], rank T_v^-)` for one local term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalRank {
    pub degree: usize,
    pub rank: usize,
}

/// `C = cone(global → ⊕ local)[−1]` with ranks balanced so that the
/// free part of global `H^1` maps onto the local terms.
#[derive(Clone, Debug)]
pub struct SelmerShape {
    pub global: PerfectComplex,
    pub local: PerfectComplex,
    pub map: ChainMap,
    pub complex: PerfectComplex,
    pub local_ranks: Vec<LocalRank>,
}

pub fn selmer_shape(g: &PGroup, ctx: &PrecisionContext, seed: u64) -> SelmerShape {
    let mut rng = rng_for(seed);
    let places = rng.gen_range(1..=2);
    let local_ranks: Vec<LocalRank> =
        (0..places).map(|_| LocalRank { degree: rng.gen_range(1..=2), rank: rng.gen_range(0..=1) }).collect();
    let s: usize = local_ranks.iter().map(|l| l.degree * l.rank).sum();

    // global: a μ = 0 torsion complex in degrees 0..=2 plus Λ[G]^s in degree 1
    let params = ComplexParams { family: Family::MuZero, length: 2, max_rank: 2, max_degree: 1 };
    let tors = random_complex_with(g, ctx, params, &mut rng);
    let free = PerfectComplex::single(g, ctx, 1, s);
    let (global, changes) = mix(&tors.direct_sum(&free).expect("same group"), &mut rng);

    // local: Λ[G]^s in degree 1 plus a torsion block in degrees 1..=2
    let x = mu_zero_element(&mut rng, ctx, g, 1);
    let local_tors = PerfectComplex::two_term(1, &one_by_one(ctx, g, x.clone()));
    let local = PerfectComplex::single(g, ctx, 1, s).direct_sum(&local_tors).expect("same group");

    // φ^1 sends the free summand isomorphically onto Λ[G]^s and
    // φ^2 = x·ψ, φ^1 = ψ·d^1 on the torsion block
    let d1 = global.boundary(1);
    let psi_coeffs = (0..d1.rows()).map(|_| random_element(&mut rng, ctx, g, 0, 1)).collect();
    let psi = GroupRingMatrix::from_entries(ctx, g, 1, d1.rows(), psi_coeffs).expect("row");
    let mut phi1 = GroupRingMatrix::zeros(ctx, g, s + 1, global.rank(1));
    let mut proj = GroupRingMatrix::zeros(ctx, g, s, global.rank(1));
    for k in 0..s {
        proj.set(k, tors.rank(1) + k, GroupRingElement::scalar(&Poly::one(ctx), g));
    }
    // undo the basis change on the free summand before projecting
    let proj = proj.mul(&changes[1].1).expect("shapes");
    phi1.put(0, 0, &proj);
    phi1.put(s, 0, &psi.mul(&d1).expect("shapes"));
    let phi2 = one_by_one(ctx, g, x).mul(&psi).expect("shapes");
    let maps = BTreeMap::from([(1, phi1), (2, phi2)]);
    let map = ChainMap::new(&global, &local, maps).expect("chain map by construction");
    let complex = map.cone().expect("cone").shift(-1);
    SelmerShape { global, local, map, complex, local_ranks }
}
