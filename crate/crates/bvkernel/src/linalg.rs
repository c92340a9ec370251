//! Exact dense linear algebra over the rationals: inversion, rank, and
//! fraction-free integer rank for the homology checks.

use crate::scalar::Scalar;
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Exact inverse by Gauss-Jordan elimination; `None` when singular.
pub fn invert(m: &[Vec<Scalar>]) -> Option<Vec<Vec<Scalar>>> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return None;
    }
    let mut a: Vec<Vec<Scalar>> = m.to_vec();
    let mut inv: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Scalar::one() } else { Scalar::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &a[col][j] * &f;
                a[r][j] = &a[r][j] - &t;
                let t = &inv[col][j] * &f;
                inv[r][j] = &inv[r][j] - &t;
            }
        }
    }
    Some(inv)
}

/// Rank of a rational matrix, computed fraction-free: denominators are
/// cleared row by row and the integer matrix is reduced by Bareiss
/// elimination, so no intermediate arithmetic leaves the integers.
pub fn rank(m: &[Vec<Scalar>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let mut lcm = BigInt::one();
            for v in row {
                let d = v.denom();
                let g = num_integer::Integer::gcd(&lcm, d);
                lcm = &lcm / &g * d;
            }
            row.iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect()
        })
        .collect();
    bareiss_rank(&mut a, rows, cols)
}

fn bareiss_rank(a: &mut [Vec<BigInt>], rows: usize, cols: usize) -> usize {
    let mut rank = 0;
    let mut prev = BigInt::one();
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let Some(pivot) = (row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, pivot);
        for r in (row + 1)..rows {
            for c in (col + 1)..cols {
                let num = &a[row][col] * &a[r][c] - &a[r][col] * &a[row][c];
                a[r][c] = num / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[row][col].clone();
        row += 1;
        rank += 1;
    }
    rank
}

/// Kernel dimension of a rational matrix acting on column vectors.
pub fn nullity(m: &[Vec<Scalar>], domain_dim: usize) -> usize {
    domain_dim - rank(m)
}

/// `p^T m p` for a change of basis `p` acting on a bilinear form `m` with
/// the graded convention handled by the caller (plain congruence here; the
/// callers only ever congruence-transform forms whose bases they reorder
/// with explicit Koszul signs separately).
pub fn congruence(m: &[Vec<Scalar>], p: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = m.len();
    let mut tmp = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Scalar::zero();
            for k in 0..n {
                acc += &m[i][k] * &p[k][j];
            }
            tmp[i][j] = acc;
        }
    }
    let mut out = vec![vec![Scalar::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Scalar::zero();
            for k in 0..n {
                acc += &p[k][i] * &tmp[k][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

/// Univariate polynomial over the rationals, coefficients from the
/// constant term up, trailing zeros trimmed.  Used for exact rank
/// bookkeeping of matrices whose entries depend linearly on one formal
/// multiplier.
pub type Poly = Vec<Scalar>;

pub fn poly_trim(p: &mut Poly) {
    while p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

pub fn poly_is_zero(p: &Poly) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// Degree of a nonzero polynomial (callers exclude zero).
pub fn poly_deg(p: &Poly) -> usize {
    debug_assert!(!poly_is_zero(p));
    p.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
}

pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if poly_is_zero(a) || poly_is_zero(b) {
        return Vec::new();
    }
    let mut out = vec![Scalar::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if cb.is_zero() {
                continue;
            }
            out[i + j] += ca * cb;
        }
    }
    poly_trim(&mut out);
    out
}

pub fn poly_sub(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    if out.len() < b.len() {
        out.resize(b.len(), Scalar::zero());
    }
    for (i, cb) in b.iter().enumerate() {
        out[i] = &out[i] - cb;
    }
    poly_trim(&mut out);
    out
}

/// Euclidean division `a = q b + r` with `deg r < deg b`; `b` nonzero.
pub fn poly_divmod(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let mut r = a.clone();
    poly_trim(&mut r);
    let db = poly_deg(b);
    let lead = b[db].clone();
    let mut q: Poly = Vec::new();
    while !poly_is_zero(&r) && poly_deg(&r) >= db {
        let dr = poly_deg(&r);
        let c = &r[dr] / &lead;
        let shift = dr - db;
        if q.len() <= shift {
            q.resize(shift + 1, Scalar::zero());
        }
        q[shift] = &q[shift] + &c;
        for (i, cb) in b.iter().enumerate() {
            let t = cb * &c;
            r[shift + i] = &r[shift + i] - &t;
        }
        poly_trim(&mut r);
    }
    poly_trim(&mut q);
    (q, r)
}

/// Diagonalizes a polynomial matrix by row and column operations over the
/// one-variable polynomial ring and returns the nonzero diagonal entries.
/// Their count is the rank over the rational function field; the cokernel
/// of the matrix is torsion-free exactly when every returned entry is a
/// nonzero constant (the product of the entries equals the top
/// determinantal divisor up to a constant, which row and column operations
/// preserve).
pub fn smith_diagonal(mut m: Vec<Vec<Poly>>) -> Vec<Poly> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    let mut k = 0;
    while k < rows && k < cols {
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if poly_is_zero(&m[i][j]) {
                    continue;
                }
                let better = match pivot {
                    None => true,
                    Some((pi, pj)) => poly_deg(&m[i][j]) < poly_deg(&m[pi][pj]),
                };
                if better {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break;
        };
        m.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        loop {
            let mut smaller = false;
            for r in (k + 1)..rows {
                if poly_is_zero(&m[r][k]) {
                    continue;
                }
                let (q, _) = poly_divmod(&m[r][k], &m[k][k]);
                for c in k..cols {
                    let t = poly_mul(&q, &m[k][c]);
                    m[r][c] = poly_sub(&m[r][c], &t);
                }
                if !poly_is_zero(&m[r][k]) {
                    m.swap(k, r);
                    smaller = true;
                }
            }
            for c in (k + 1)..cols {
                if poly_is_zero(&m[k][c]) {
                    continue;
                }
                let (q, _) = poly_divmod(&m[k][c], &m[k][k]);
                for row in m.iter_mut().skip(k) {
                    let t = poly_mul(&q, &row[k]);
                    row[c] = poly_sub(&row[c], &t);
                }
                if !poly_is_zero(&m[k][c]) {
                    for row in m.iter_mut() {
                        row.swap(k, c);
                    }
                    smaller = true;
                }
            }
            if !smaller {
                break;
            }
        }
        diag.push(m[k][k].clone());
        k += 1;
    }
    diag
}

pub fn identity(n: usize) -> Vec<Vec<Scalar>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Scalar::one() } else { Scalar::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<Scalar>], b: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![Scalar::zero(); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = Scalar::zero();
            for t in 0..k {
                acc += &a[i][t] * &b[t][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn inverts_2x2() {
        let m = vec![vec![int(1), int(2)], vec![int(3), int(4)]];
        let inv = invert(&m).unwrap();
        assert_eq!(inv[0][0], int(-2));
        assert_eq!(inv[0][1], int(1));
        assert_eq!(inv[1][0], ratio(3, 2));
        assert_eq!(inv[1][1], ratio(-1, 2));
    }

    #[test]
    fn singular_returns_none() {
        let m = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(invert(&m).is_none());
    }

    #[test]
    fn rank_counts_pivots() {
        let m = vec![
            vec![int(1), int(2), int(3)],
            vec![int(2), int(4), int(6)],
            vec![int(0), int(1), int(1)],
        ];
        assert_eq!(rank(&m), 2);
        assert_eq!(nullity(&m, 3), 1);
    }

    #[test]
    fn rank_handles_rationals() {
        let m = vec![vec![ratio(1, 2), ratio(1, 3)], vec![ratio(3, 2), int(1)]];
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn rank_of_empty_and_zero() {
        assert_eq!(rank(&[]), 0);
        let z = vec![vec![int(0); 4]; 2];
        assert_eq!(rank(&z), 0);
    }
}
