//! Linear algebra over `F_p[T]`, `F_p[[T]]` and `Z[T]` used by the matrix
//! layer: fraction-field ranks, `T`-adic elementary exponents and exact
//! determinants reconstructed from word-sized primes.

#![allow(clippy::needless_range_loop)]

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arithmetic modulo a prime below `2^32`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Fp(pub u64);

impl Fp {
    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.0
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(!a.is_multiple_of(self.0));
        self.pow(a, self.0 - 2)
    }

    #[inline]
    pub fn reduce(self, x: i64) -> u64 {
        x.rem_euclid(self.0 as i64) as u64
    }
}

pub(crate) type FpPoly = Vec<u64>;

fn trim(mut a: FpPoly) -> FpPoly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_poly_mul(f: Fp, a: &[u64], b: &[u64]) -> FpPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(out)
}

fn fp_poly_sub(f: Fp, a: &[u64], b: &[u64]) -> FpPoly {
    let n = a.len().max(b.len());
    trim((0..n).map(|i| f.sub(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0))).collect())
}

/// Exact quotient `a / b`; the caller guarantees divisibility.
fn fp_poly_divexact(f: Fp, a: &[u64], b: &[u64]) -> FpPoly {
    if a.is_empty() {
        return Vec::new();
    }
    let db = b.len() - 1;
    let lead_inv = f.inv(b[db]);
    let mut r = a.to_vec();
    let mut q = vec![0u64; a.len() - db];
    for i in (db..r.len()).rev() {
        let c = f.mul(r[i], lead_inv);
        if c == 0 {
            continue;
        }
        q[i - db] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[i - db + j] = f.sub(r[i - db + j], f.mul(c, bj));
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0), "inexact Bareiss division");
    trim(q)
}

/// Rank over `F_p(T)` by fraction-free elimination.
pub(crate) fn fp_poly_rank(f: Fp, mut a: Vec<Vec<FpPoly>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut prev: FpPoly = vec![1];
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let pivot = (r..rows).filter(|&i| !a[i][c].is_empty()).min_by_key(|&i| a[i][c].len());
        let Some(pivot) = pivot else { continue };
        a.swap(r, pivot);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let x = fp_poly_mul(f, &a[r][c], &a[i][j]);
                let y = fp_poly_mul(f, &a[i][c], &a[r][j]);
                a[i][j] = fp_poly_divexact(f, &fp_poly_sub(f, &x, &y), &prev);
            }
            a[i][c] = Vec::new();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

fn valuation(s: &[u64]) -> Option<usize> {
    s.iter().position(|&x| x != 0)
}

/// Elementary exponents of a matrix over `F_p[[T]]/T^k`; divisors that
/// vanish modulo `T^k` are dropped.
fn t_adic_smith(f: Fp, a: &[Vec<FpPoly>], k: usize) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Vec<u64>>> = a
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    let mut s: Vec<u64> = e.iter().take(k).copied().collect();
                    s.resize(k, 0);
                    s
                })
                .collect()
        })
        .collect();
    let mut rows_left: Vec<usize> = (0..rows).collect();
    let mut cols_left: Vec<usize> = (0..cols).collect();
    let mut out = Vec::new();
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        'search: for (ri, &r) in rows_left.iter().enumerate() {
            for (ci, &c) in cols_left.iter().enumerate() {
                if let Some(v) = valuation(&m[r][c]) {
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
        // u^{-1} for the pivot T^v·u, to precision T^{k-v}
        let unit = &m[r][c][v..];
        let w = k - v;
        let u0 = f.inv(unit[0]);
        let mut uinv = vec![0u64; w];
        uinv[0] = u0;
        for i in 1..w {
            let mut s = 0;
            for j in 1..=i {
                s = f.add(s, f.mul(unit[j], uinv[i - j]));
            }
            uinv[i] = f.mul(f.sub(0, s), u0);
        }
        let pivot_row: Vec<(usize, Vec<u64>)> = cols_left.iter().map(|&j| (j, m[r][j].clone())).collect();
        for &s in &rows_left {
            let e = &m[s][c];
            if valuation(e).is_none() {
                continue;
            }
            // factor = (e / T^v) · u^{-1} mod T^{k-v}
            let shifted = &e[v..];
            let mut factor = vec![0u64; w];
            for (i, &x) in shifted.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in uinv.iter().enumerate().take(w - i) {
                    factor[i + j] = f.add(factor[i + j], f.mul(x, y));
                }
            }
            for (j, prow) in &pivot_row {
                let Some(pv) = valuation(prow) else { continue };
                let target = &mut m[s][*j];
                for (a_i, &x) in factor.iter().enumerate() {
                    if x == 0 {
                        continue;
                    }
                    for b_i in pv..k.saturating_sub(a_i) {
                        let y = prow[b_i];
                        if y != 0 {
                            target[a_i + b_i] = f.sub(target[a_i + b_i], f.mul(x, y));
                        }
                    }
                }
            }
        }
    }
    out
}

/// `T`-adic elementary exponents of a matrix over `F_p[T]` whose rank over
/// `F_p(T)` is known; the truncation is widened until all of them appear.
pub(crate) fn t_adic_exponents(f: Fp, a: &[Vec<FpPoly>], rank: usize) -> Vec<usize> {
    if rank == 0 {
        return Vec::new();
    }
    let mut k = 8;
    loop {
        let mut ex = t_adic_smith(f, a, k);
        if ex.len() >= rank {
            debug_assert_eq!(ex.len(), rank);
            ex.sort_unstable();
            return ex;
        }
        k *= 2;
    }
}

/// Rank of a matrix over `F_q`.
pub(crate) fn rank_mod_prime(f: Fp, mut a: Vec<Vec<u64>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, p);
        let inv = f.inv(a[r][c]);
        for j in c..cols {
            a[r][j] = f.mul(a[r][j], inv);
        }
        for i in r + 1..rows {
            let e = a[i][c];
            if e == 0 {
                continue;
            }
            for j in c..cols {
                let x = a[r][j];
                if x != 0 {
                    a[i][j] = f.sub(a[i][j], f.mul(e, x));
                }
            }
        }
        r += 1;
    }
    r
}

/// Determinant over `F_q`, and optionally `det · A^{-1} e_k` for the
/// requested columns `k`. Returns `None` for the columns when `A` is
/// singular.
fn det_and_solve(f: Fp, mut a: Vec<Vec<u64>>, want: &[usize]) -> (u64, Option<Vec<Vec<u64>>>) {
    let n = a.len();
    let mut rhs: Vec<Vec<u64>> = (0..n).map(|i| want.iter().map(|&k| u64::from(i == k)).collect()).collect();
    let mut det = 1u64;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| a[i][c] != 0) else {
            return (0, None);
        };
        if p != c {
            a.swap(p, c);
            rhs.swap(p, c);
            det = f.sub(0, det);
        }
        det = f.mul(det, a[c][c]);
        let inv = f.inv(a[c][c]);
        for j in c..n {
            a[c][j] = f.mul(a[c][j], inv);
        }
        for x in rhs[c].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..n {
            if i == c || a[i][c] == 0 {
                continue;
            }
            let e = a[i][c];
            for j in c..n {
                let x = a[c][j];
                a[i][j] = f.sub(a[i][j], f.mul(e, x));
            }
            for t in 0..want.len() {
                let x = rhs[c][t];
                rhs[i][t] = f.sub(rhs[i][t], f.mul(e, x));
            }
        }
    }
    if want.is_empty() {
        return (det, Some(Vec::new()));
    }
    let cols = (0..want.len()).map(|t| (0..n).map(|i| f.mul(det, rhs[i][t])).collect()).collect();
    (det, Some(cols))
}

/// Lagrange basis over fixed nodes: row `k` holds the coefficients of the
/// polynomial that is 1 at `xs[k]` and 0 at the other nodes.
struct Interpolator {
    f: Fp,
    basis: Vec<Vec<u64>>,
}

impl Interpolator {
    fn new(f: Fp, xs: &[u64]) -> Self {
        let n = xs.len();
        let mut master = vec![1u64];
        for &x in xs {
            let mut next = vec![0u64; master.len() + 1];
            for (k, &c) in master.iter().enumerate() {
                next[k + 1] = f.add(next[k + 1], c);
                next[k] = f.sub(next[k], f.mul(c, x));
            }
            master = next;
        }
        let basis = xs
            .iter()
            .enumerate()
            .map(|(k, &xk)| {
                // master / (T − x_k) by synthetic division
                let mut q = vec![0u64; n];
                let mut carry = 0;
                for i in (1..=n).rev() {
                    carry = f.add(master[i], f.mul(carry, xk));
                    q[i - 1] = carry;
                }
                let w =
                    xs.iter().enumerate().filter(|&(j, _)| j != k).fold(1, |acc, (_, &xj)| f.mul(acc, f.sub(xk, xj)));
                let w = f.inv(w);
                q.iter().map(|&c| f.mul(c, w)).collect()
            })
            .collect();
        Interpolator { f, basis }
    }

    /// Coefficients of the polynomial of degree `< xs.len()` through the
    /// points `(xs[k], ys[k])`.
    fn apply(&self, ys: &[u64]) -> Vec<u64> {
        let q = self.f.0;
        let mut out = vec![0u64; ys.len()];
        for (&y, row) in ys.iter().zip(&self.basis) {
            if y == 0 {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(row) {
                *o = (*o + y * b) % q;
            }
        }
        out
    }
}

#[cfg(test)]
fn interpolate(f: Fp, xs: &[u64], ys: &[u64]) -> Vec<u64> {
    Interpolator::new(f, xs).apply(ys)
}

/// Deterministic Miller–Rabin for `n < 2^32`.
fn is_word_prime(n: u64) -> bool {
    if n < 2 || n.is_multiple_of(2) {
        return n == 2;
    }
    let f = Fp(n);
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 7, 61] {
        if a % n == 0 {
            continue;
        }
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes just below `2^31`, largest first.
pub(crate) fn word_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let mut out = Vec::new();
        let mut n = (1u64 << 31) - 1;
        while out.len() < 400 {
            if is_word_prime(n) {
                out.push(n);
            }
            n -= 2;
        }
        out
    })
}

/// One adjugate column: an entry per row, each a coefficient list.
type PolyColumn = Vec<Vec<u64>>;

/// Rough count of field operations allowed for one exact determinant.
const DET_WORK_LIMIT: f64 = 5e8;

/// A matrix over `Z[T]`, indexed `[row][col][degree]`.
pub(crate) type IntPolyMatrix = Vec<Vec<Vec<i64>>>;

fn eval_mod(f: Fp, a: &IntPolyMatrix, x: u64) -> Vec<Vec<u64>> {
    a.iter()
        .map(|row| row.iter().map(|e| e.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), f.reduce(c)))).collect())
        .collect()
}

/// Rank over `Q(T)` estimated by evaluating at a few points modulo a word
/// prime; never exceeds the true rank.
pub(crate) fn lift_rank(a: &IntPolyMatrix) -> usize {
    let f = Fp(word_primes()[0]);
    let cap = a.len().min(a.first().map_or(0, |r| r.len()));
    let mut best = 0;
    for x in [1_234_567u64, 987_654_321, 55_555] {
        best = best.max(rank_mod_prime(f, eval_mod(f, a, x)));
        if best == cap {
            break;
        }
    }
    best
}

fn degree_bound(a: &IntPolyMatrix) -> usize {
    a.iter().map(|row| row.iter().map(|e| e.iter().rposition(|&c| c != 0).unwrap_or(0)).max().unwrap_or(0)).sum()
}

fn log2_coefficient_bound(a: &IntPolyMatrix) -> f64 {
    a.iter()
        .map(|row| {
            let l1: f64 = row.iter().flat_map(|e| e.iter()).map(|&c| (c as f64).abs()).sum();
            l1.max(1.0).log2()
        })
        .sum()
}

fn crt_to_modulus(residues: &[u64], primes: &[u64], modulus: u64) -> u64 {
    let mut x = BigInt::from(residues[0]);
    let mut m = BigInt::from(primes[0]);
    for (&r, &q) in residues.iter().zip(primes).skip(1) {
        let f = Fp(q);
        let xm = (&x % q).to_u64().expect("reduced");
        let mm = (&m % q).to_u64().expect("reduced");
        let t = f.mul(f.sub(r, xm), f.inv(mm));
        x += &m * t;
        m *= q;
    }
    let half: BigInt = &m >> 1;
    if x > half {
        x -= &m;
    }
    let r = x % modulus;
    let r = if r.is_negative() { r + modulus } else { r };
    if r.is_zero() {
        0
    } else {
        r.to_u64().expect("reduced")
    }
}

/// Determinant of a square integer polynomial matrix and the requested
/// columns of its adjugate, all reduced modulo `modulus`.
///
/// Each word prime contributes values at `deg + 1` regular points; the
/// coefficients are rebuilt by interpolation and the Chinese remainder
/// theorem once the primes cover twice the coefficient bound.
pub(crate) fn det_adjugate_mod(a: &IntPolyMatrix, want: &[usize], modulus: u64) -> Result<(Vec<u64>, Vec<PolyColumn>)> {
    let n = a.len();
    if n == 0 {
        let cols = want.iter().map(|_| Vec::new()).collect();
        return Ok((vec![1 % modulus], cols));
    }
    let deg = degree_bound(a);
    let npts = deg + 1;
    let bits = log2_coefficient_bound(a) + 2.0;
    let primes = word_primes();
    let nprimes = ((bits / 30.9).ceil() as usize).max(1);
    let avg_deg = deg as f64 / n as f64;
    let work = nprimes as f64 * npts as f64 * (n * n) as f64 * (avg_deg + n as f64 + want.len() as f64);
    if nprimes > primes.len() || work > DET_WORK_LIMIT {
        return Err(Error::WorkLimit(format!("{n}x{n} matrix, degree bound {deg}, {nprimes} primes")));
    }
    let primes = &primes[..nprimes];

    // per prime: det coefficients and adjugate column coefficients
    let mut det_res: Vec<Vec<u64>> = Vec::with_capacity(nprimes);
    let mut adj_res: Vec<Vec<Vec<Vec<u64>>>> = Vec::with_capacity(nprimes);
    for &q in primes {
        let f = Fp(q);
        let mut xs = Vec::with_capacity(npts);
        let mut dets = Vec::with_capacity(npts);
        let mut cols: Vec<Vec<Vec<u64>>> = Vec::with_capacity(npts);
        let mut x = 0u64;
        let mut misses = 0;
        while xs.len() < npts {
            let (d, sol) = det_and_solve(f, eval_mod(f, a, x), want);
            match sol {
                Some(c) => {
                    xs.push(x);
                    dets.push(d);
                    cols.push(c);
                }
                None if want.is_empty() => {
                    xs.push(x);
                    dets.push(0);
                    cols.push(Vec::new());
                }
                None => {
                    misses += 1;
                    if misses > npts + 8 {
                        // det vanishes identically modulo q; adjugate is
                        // only requested for nonsingular matrices
                        let zero_cols = want.iter().map(|_| vec![vec![0; n]; npts]).collect();
                        det_res.push(vec![0; npts]);
                        adj_res.push(zero_cols);
                        break;
                    }
                }
            }
            x += 1;
        }
        if xs.len() < npts {
            continue;
        }
        let interp = Interpolator::new(f, &xs);
        det_res.push(interp.apply(&dets));
        let per_col = (0..want.len())
            .map(|t| {
                (0..n)
                    .map(|i| {
                        let ys: Vec<u64> = cols.iter().map(|c| c[t][i]).collect();
                        interp.apply(&ys)
                    })
                    .collect()
            })
            .collect();
        adj_res.push(per_col);
    }

    let det = (0..npts)
        .map(|k| {
            let rs: Vec<u64> = det_res.iter().map(|d| d[k]).collect();
            crt_to_modulus(&rs, primes, modulus)
        })
        .collect();
    let adj = (0..want.len())
        .map(|t| {
            (0..n)
                .map(|i| {
                    (0..npts)
                        .map(|k| {
                            let rs: Vec<u64> = adj_res.iter().map(|c| c[t][i][k]).collect();
                            crt_to_modulus(&rs, primes, modulus)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok((det, adj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bareiss_rank_small() {
        let f = Fp(3);
        // [[T, 1], [T^2, T]] has determinant 0
        let a = vec![vec![vec![0, 1], vec![1]], vec![vec![0, 0, 1], vec![0, 1]]];
        assert_eq!(fp_poly_rank(f, a), 1);
        let b = vec![vec![vec![0, 1], vec![1]], vec![vec![1], vec![0, 1]]];
        assert_eq!(fp_poly_rank(f, b), 2);
        assert_eq!(fp_poly_rank(f, vec![vec![vec![], vec![]]]), 0);
    }

    #[test]
    fn t_adic_exponents_of_diagonal() {
        let f = Fp(5);
        let a = vec![vec![vec![0, 0, 0, 1], vec![]], vec![vec![], vec![0, 2, 1]]];
        assert_eq!(t_adic_exponents(f, &a, 2), vec![1, 3]);
        let big = vec![vec![vec![0; 20].into_iter().chain([1]).collect::<Vec<_>>()]];
        assert_eq!(t_adic_exponents(f, &big, 1), vec![20]);
    }

    #[test]
    fn word_primes_are_prime() {
        let ps = word_primes();
        assert_eq!(ps[0], 2_147_483_647);
        for &q in &ps[..5] {
            assert!(crate::coeff::is_prime(q));
        }
        assert!(!is_word_prime(2_147_483_649));
    }

    #[test]
    fn interpolation_round_trip() {
        let f = Fp(word_primes()[0]);
        let xs = [0, 1, 2, 3];
        let poly = [5u64, 0, 7, 1];
        let ys: Vec<u64> = xs.iter().map(|&x| poly.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))).collect();
        assert_eq!(interpolate(f, &xs, &ys), poly.to_vec());
    }

    #[test]
    fn determinant_with_large_coefficients() {
        // det [[1000T + 7, 3], [T^2, 999]] = 999000 T + 6993 − 3 T^2
        let a = vec![vec![vec![7, 1000], vec![3]], vec![vec![0, 0, 1], vec![999]]];
        let m = 1u64 << 40;
        let (d, adj) = det_adjugate_mod(&a, &[0, 1], m).unwrap();
        assert_eq!(trim(d), vec![6993, 999000, m - 3]);
        // adjugate columns: [[999], [−T^2]] and [[−3], [1000T + 7]]
        assert_eq!(trim(adj[0][0].clone()), vec![999]);
        assert_eq!(trim(adj[0][1].clone()), vec![0, 0, m - 1]);
        assert_eq!(trim(adj[1][0].clone()), vec![m - 3]);
        assert_eq!(trim(adj[1][1].clone()), vec![7, 1000]);
    }

    fn cofactor_det(a: &[Vec<i64>]) -> i128 {
        let n = a.len();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = a[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| x).collect())
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * a[0][j] as i128 * cofactor_det(&minor)
            })
            .sum()
    }

    proptest! {
        #[test]
        fn constant_determinants_match_cofactor_expansion(
            n in 1usize..5,
            vals in prop::collection::vec(-1000i64..1000, 16),
        ) {
            let a: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| vals[i * 4 + j]).collect()).collect();
            let expected = cofactor_det(&a);
            let m = 1u64 << 62;
            let lifted: IntPolyMatrix = a.iter().map(|r| r.iter().map(|&x| vec![x]).collect()).collect();
            let (d, _) = det_adjugate_mod(&lifted, &[], m).unwrap();
            prop_assert_eq!(d[0], expected.rem_euclid(m as i128) as u64);
        }

        #[test]
        fn polynomial_determinant_evaluates_correctly(
            n in 1usize..4,
            vals in prop::collection::vec(-50i64..50, 27),
            x in -5i64..5,
        ) {
            let a: IntPolyMatrix = (0..n)
                .map(|i| (0..n).map(|j| vals[(i * 3 + j) * 3..(i * 3 + j) * 3 + 3].to_vec()).collect())
                .collect();
            let m = 1u64 << 62;
            let (d, _) = det_adjugate_mod(&a, &[], m).unwrap();
            let at_x: Vec<Vec<i64>> = a
                .iter()
                .map(|r| r.iter().map(|e| e.iter().rev().fold(0i64, |acc, &c| acc * x + c)).collect())
                .collect();
            let expected = cofactor_det(&at_x).rem_euclid(m as i128);
            let got = d.iter().rev().fold(0i128, |acc, &c| (acc * x as i128 + c as i128).rem_euclid(m as i128));
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn fraction_field_rank_matches_evaluation(
            rows in 1usize..5,
            cols in 1usize..5,
            vals in prop::collection::vec(0u64..3, 48),
            rank_cap in 0usize..4,
        ) {
            // product of a rows×k and k×cols matrix has rank ≤ k
            let f = Fp(3);
            let k = rank_cap.min(rows).min(cols);
            let left: Vec<Vec<FpPoly>> = (0..rows).map(|i| (0..k).map(|j| trim(vec![vals[i * 4 + j], vals[16 + i * 4 + j]])).collect()).collect();
            let right: Vec<Vec<FpPoly>> = (0..k).map(|i| (0..cols).map(|j| trim(vec![vals[32 + i * 4 + j], 1])).collect()).collect();
            let prod: Vec<Vec<FpPoly>> = (0..rows)
                .map(|i| {
                    (0..cols)
                        .map(|j| {
                            (0..k).fold(Vec::new(), |acc, t| {
                                let term = fp_poly_mul(f, &left[i][t], &right[t][j]);
                                let neg = fp_poly_sub(f, &[], &term);
                                fp_poly_sub(f, &acc, &neg)
                            })
                        })
                        .collect()
                })
                .collect();
            let r = fp_poly_rank(f, prod.clone());
            prop_assert!(r <= k);
            // the rank equals the number of T-adic elementary divisors
            prop_assert_eq!(t_adic_exponents(f, &prod, r).len(), r);
            // specializing T to a constant can only lose rank
            for t in 0..3u64 {
                let ev: Vec<Vec<u64>> = prod.iter().map(|row| row.iter().map(|e| e.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, t), c))).collect()).collect();
                prop_assert!(rank_mod_prime(f, ev) <= r);
            }
        }
    }
}
