//! Z/2-graded linear algebra: parities, the Koszul sign of a permutation of
//! graded objects, graded vector spaces with labelled bases, and graded
//! symmetric pairings.
//!
//! # Design Notes
//!
//! `koszul_sign` is the single sign engine of the crate.  Every sign in the
//! cyclic-word calculus, the trace expansions, the matrix Laplacian, the
//! Fourier transform and the operadic contractions is produced by handing a
//! concrete reordering of concrete parities to this one function.  Nothing
//! else in the code base decides a sign by formula transcription.

use crate::error::Error;
use crate::scalar::{int, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, MulAssign, Neg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_u8(b: u8) -> Parity {
        if b % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::from_u8(self.as_u8() + rhs.as_u8())
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// A multiplicative sign, +1 or -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity_product(p: Parity, q: Parity) -> Sign {
        if p.is_odd() && q.is_odd() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn scalar(self) -> Scalar {
        match self {
            Sign::Plus => int(1),
            Sign::Minus => int(-1),
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl MulAssign for Sign {
    fn mul_assign(&mut self, rhs: Sign) {
        *self = *self * rhs;
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        self * Sign::Minus
    }
}

/// Koszul sign of reordering a sequence of graded objects.
///
/// `sigma[i]` is the position that the object currently at position `i`
/// moves to; the reordered sequence therefore holds object `i` at slot
/// `sigma[i]`.  The sign is the product of `(-1)^{p_i p_j}` over all
/// inversions, i.e. pairs `i < j` with `sigma[i] > sigma[j]`, which counts
/// exactly the transpositions of odd pairs needed to effect the reordering.
///
/// Errors when `sigma` is not a permutation of `0..parities.len()`.
pub fn koszul_sign(parities: &[Parity], sigma: &[usize]) -> Result<Sign, Error> {
    if parities.len() != sigma.len() {
        return Err(Error::LengthMismatch {
            left: parities.len(),
            right: sigma.len(),
        });
    }
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(Error::NotAPermutation);
        }
        seen[s] = true;
    }
    let mut sign = Sign::Plus;
    for i in 0..n {
        if !parities[i].is_odd() {
            continue;
        }
        for j in (i + 1)..n {
            if parities[j].is_odd() && sigma[i] > sigma[j] {
                sign = -sign;
            }
        }
    }
    Ok(sign)
}

/// Stable-sorts a sequence of graded items and returns the sorted sequence
/// with the Koszul sign of the reordering, or `None` when two equal odd
/// items collide (the square of an odd object is zero).
pub fn sort_graded<T: Ord + Clone>(
    items: &[T],
    parities: &[Parity],
) -> Result<Option<(Vec<T>, Sign)>, Error> {
    if items.len() != parities.len() {
        return Err(Error::LengthMismatch {
            left: items.len(),
            right: parities.len(),
        });
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[a].cmp(&items[b]).then(a.cmp(&b)));
    let mut sigma = vec![0usize; items.len()];
    for (slot, &item) in order.iter().enumerate() {
        sigma[item] = slot;
    }
    let sign = koszul_sign(parities, &sigma)?;
    let sorted: Vec<T> = order.iter().map(|&i| items[i].clone()).collect();
    for w in 1..sorted.len() {
        if sorted[w - 1] == sorted[w] && parities[order[w]].is_odd() {
            return Ok(None);
        }
    }
    Ok(Some((sorted, sign)))
}

/// Applies the same permutation convention as `koszul_sign`: returns the
/// reordered sequence holding `items[i]` at slot `sigma[i]`.
pub fn apply_permutation<T: Clone>(items: &[T], sigma: &[usize]) -> Vec<T> {
    let mut out: Vec<Option<T>> = vec![None; items.len()];
    for (i, item) in items.iter().enumerate() {
        out[sigma[i]] = Some(item.clone());
    }
    out.into_iter().map(|x| x.unwrap()).collect()
}

/// A finite-dimensional Z/2-graded vector space with an ordered, labelled
/// homogeneous basis.  Basis order is declaration order and fixes every
/// canonical form downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedSpace {
    basis: Vec<(String, Parity)>,
}

impl GradedSpace {
    pub fn new(basis: Vec<(String, Parity)>) -> Result<GradedSpace, Error> {
        for (i, (label, _)) in basis.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::EmptyLabel);
            }
            if basis[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(GradedSpace { basis })
    }

    /// Space with labels `x1..xk` even and `t1..tm` odd, for quick setups.
    pub fn standard(even: usize, odd: usize) -> GradedSpace {
        let mut basis = Vec::new();
        for i in 1..=even {
            basis.push((format!("x{i}"), Parity::Even));
        }
        for i in 1..=odd {
            basis.push((format!("t{i}"), Parity::Odd));
        }
        GradedSpace { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn dim_even(&self) -> usize {
        self.basis.iter().filter(|(_, p)| !p.is_odd()).count()
    }

    pub fn dim_odd(&self) -> usize {
        self.basis.iter().filter(|(_, p)| p.is_odd()).count()
    }

    pub fn parity(&self, index: usize) -> Parity {
        self.basis[index].1
    }

    pub fn label(&self, index: usize) -> &str {
        &self.basis[index].0
    }

    pub fn index_of(&self, label: &str) -> Result<usize, Error> {
        self.basis
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str, Parity)> {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, (l, p))| (i, l.as_str(), *p))
    }
}

/// A graded symmetric bilinear form on a `GradedSpace`.
///
/// The form has a definite parity: an entry `l(v, w)` may be nonzero only
/// when `parity(v) + parity(w)` equals the form parity, and graded symmetry
/// `l(v, w) = (-1)^{vw} l(w, v)` holds entrywise.  Construction validates
/// both, plus nondegeneracy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    parity: Parity,
    entries: Vec<Vec<Scalar>>,
}

impl Pairing {
    pub fn new(
        space: &GradedSpace,
        parity: Parity,
        entries: Vec<Vec<Scalar>>,
    ) -> Result<Pairing, Error> {
        let form = Pairing { parity, entries };
        validate_pairing(space, &form)?;
        Ok(form)
    }

    /// The standard odd form on a space with equal even and odd dimensions,
    /// pairing the i-th even basis vector with the i-th odd one.
    pub fn standard_odd(space: &GradedSpace) -> Result<Pairing, Error> {
        let (ne, no) = (space.dim_even(), space.dim_odd());
        if ne != no {
            return Err(Error::DimensionMismatch(format!(
                "odd form needs equal even/odd dimensions, got ({ne}|{no})"
            )));
        }
        let evens: Vec<usize> = space.iter().filter(|(_, _, p)| !p.is_odd()).map(|t| t.0).collect();
        let odds: Vec<usize> = space.iter().filter(|(_, _, p)| p.is_odd()).map(|t| t.0).collect();
        let d = space.dim();
        let mut entries = vec![vec![int(0); d]; d];
        for k in 0..ne {
            entries[evens[k]][odds[k]] = int(1);
            entries[odds[k]][evens[k]] = int(1);
        }
        Pairing::new(space, Parity::Odd, entries)
    }

    /// The standard even form: identity on the even-even block, the standard
    /// symplectic form on consecutive odd pairs.  The odd dimension must be
    /// even for nondegeneracy.
    pub fn standard_even(space: &GradedSpace) -> Result<Pairing, Error> {
        let no = space.dim_odd();
        if no % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "even form needs an even number of odd basis vectors, got {no}"
            )));
        }
        let evens: Vec<usize> = space.iter().filter(|(_, _, p)| !p.is_odd()).map(|t| t.0).collect();
        let odds: Vec<usize> = space.iter().filter(|(_, _, p)| p.is_odd()).map(|t| t.0).collect();
        let d = space.dim();
        let mut entries = vec![vec![int(0); d]; d];
        for &i in &evens {
            entries[i][i] = int(1);
        }
        for pair in odds.chunks(2) {
            entries[pair[0]][pair[1]] = int(1);
            entries[pair[1]][pair[0]] = int(-1);
        }
        Pairing::new(space, Parity::Even, entries)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn value(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i][j]
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &Vec<Vec<Scalar>> {
        &self.entries
    }

    /// Exact inverse matrix `l^{ij}`, satisfying `sum_k l_{ik} l^{kj} = delta_i^j`.
    pub fn inverse(&self) -> Result<Vec<Vec<Scalar>>, Error> {
        crate::linalg::invert(&self.entries).ok_or(Error::SingularPairing)
    }
}

/// Checks parity selection, graded symmetry and nondegeneracy of a pairing
/// against a space.  Errors name the first offending entry.
pub fn validate_pairing(space: &GradedSpace, form: &Pairing) -> Result<(), Error> {
    let d = space.dim();
    if form.entries.len() != d || form.entries.iter().any(|row| row.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "pairing matrix must be {d}x{d}"
        )));
    }
    for i in 0..d {
        for j in 0..d {
            let v = &form.entries[i][j];
            if v.numer() != &num_bigint::BigInt::from(0)
                && space.parity(i) + space.parity(j) != form.parity
            {
                return Err(Error::PairingParity {
                    row: space.label(i).to_string(),
                    col: space.label(j).to_string(),
                });
            }
            let sign = Sign::from_parity_product(space.parity(i), space.parity(j));
            let mirrored = sign.scalar() * form.entries[j][i].clone();
            if *v != mirrored {
                return Err(Error::PairingSymmetry {
                    row: space.label(i).to_string(),
                    col: space.label(j).to_string(),
                });
            }
        }
    }
    if crate::linalg::invert(&form.entries).is_none() {
        return Err(Error::SingularPairing);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn p(bits: &[u8]) -> Vec<Parity> {
        bits.iter().map(|&b| Parity::from_u8(b)).collect()
    }

    #[test]
    fn identity_is_plus() {
        assert_eq!(koszul_sign(&p(&[1, 1, 1]), &[0, 1, 2]).unwrap(), Sign::Plus);
    }

    #[test]
    fn swapping_two_odds_is_minus() {
        assert_eq!(koszul_sign(&p(&[1, 1]), &[1, 0]).unwrap(), Sign::Minus);
    }

    #[test]
    fn swapping_even_past_odd_is_plus() {
        assert_eq!(koszul_sign(&p(&[0, 1]), &[1, 0]).unwrap(), Sign::Plus);
        assert_eq!(koszul_sign(&p(&[1, 0]), &[1, 0]).unwrap(), Sign::Plus);
    }

    #[test]
    fn cyclic_rotation_of_three_odds_is_plus() {
        // (u1,u2,u3) -> (u3,u1,u2): item 0 moves to slot 1, item 1 to slot 2,
        // item 2 to slot 0; two odd-odd inversions cancel.
        let sigma = [1, 2, 0];
        assert_eq!(koszul_sign(&p(&[1, 1, 1]), &sigma).unwrap(), Sign::Plus);
        let rotated = apply_permutation(&['a', 'b', 'c'], &sigma);
        assert_eq!(rotated, vec!['c', 'a', 'b']);
    }

    #[test]
    fn rejects_non_permutations() {
        assert!(koszul_sign(&p(&[0, 0]), &[0, 0]).is_err());
        assert!(koszul_sign(&p(&[0, 0]), &[0, 2]).is_err());
        assert!(koszul_sign(&p(&[0]), &[0, 1]).is_err());
    }

    /// Oracle: build the same reordering out of adjacent transpositions and
    /// multiply their individual signs.
    fn brute_sign(parities: &[Parity], sigma: &[usize]) -> Sign {
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        // bubble-sort `order` by target slot, flipping sign per odd-odd swap
        let mut sign = Sign::Plus;
        let n = order.len();
        for _ in 0..n {
            for k in 0..n.saturating_sub(1) {
                if sigma[order[k]] > sigma[order[k + 1]] {
                    sign = sign
                        * Sign::from_parity_product(parities[order[k]], parities[order[k + 1]]);
                    order.swap(k, k + 1);
                }
            }
        }
        sign
    }

    #[test]
    fn matches_transposition_oracle_exhaustively() {
        // all parity vectors and all permutations for n <= 4
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for rest in perms(n - 1) {
                for slot in 0..n {
                    let mut p: Vec<usize> = rest.iter().map(|&x| x + usize::from(x >= slot)).collect();
                    p.insert(0, slot);
                    out.push(p);
                }
            }
            out
        }
        for n in 0..=4usize {
            for mask in 0..(1u32 << n) {
                let parities: Vec<Parity> =
                    (0..n).map(|i| Parity::from_u8(((mask >> i) & 1) as u8)).collect();
                for sigma in perms(n) {
                    assert_eq!(
                        koszul_sign(&parities, &sigma).unwrap(),
                        brute_sign(&parities, &sigma),
                        "parities {parities:?} sigma {sigma:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn graded_space_rejects_duplicates() {
        assert!(GradedSpace::new(vec![
            ("a".into(), Parity::Even),
            ("a".into(), Parity::Odd)
        ])
        .is_err());
    }

    #[test]
    fn standard_odd_pairing_on_1_1() {
        let v = GradedSpace::standard(1, 1);
        let l = Pairing::standard_odd(&v).unwrap();
        assert_eq!(*l.value(0, 1), int(1));
        assert_eq!(*l.value(1, 0), int(1));
        assert_eq!(*l.value(0, 0), int(0));
        let inv = l.inverse().unwrap();
        assert_eq!(inv[0][1], int(1));
        assert_eq!(inv[1][0], int(1));
    }

    #[test]
    fn inverse_of_scaled_form() {
        // 2x2 odd form with value 4: inverse entries are 1/4
        let v = GradedSpace::standard(1, 1);
        let entries = vec![vec![int(0), int(4)], vec![int(4), int(0)]];
        let l = Pairing::new(&v, Parity::Odd, entries).unwrap();
        let inv = l.inverse().unwrap();
        assert_eq!(inv[0][1], ratio(1, 4));
        assert_eq!(inv[1][0], ratio(1, 4));
    }

    #[test]
    fn validation_rejects_wrong_parity_entry() {
        let v = GradedSpace::standard(1, 1);
        let entries = vec![vec![int(1), int(0)], vec![int(0), int(0)]];
        assert!(Pairing::new(&v, Parity::Odd, entries).is_err());
    }

    #[test]
    fn validation_rejects_asymmetric_odd_block() {
        // even form on (0|2) must be antisymmetric on the odd-odd block
        let v = GradedSpace::standard(0, 2);
        let entries = vec![vec![int(0), int(1)], vec![int(1), int(0)]];
        assert!(Pairing::new(&v, Parity::Even, entries).is_err());
        let entries = vec![vec![int(0), int(1)], vec![int(-1), int(0)]];
        assert!(Pairing::new(&v, Parity::Even, entries).is_ok());
    }

    #[test]
    fn validation_rejects_degenerate() {
        let v = GradedSpace::standard(2, 0);
        let entries = vec![vec![int(1), int(1)], vec![int(1), int(1)]];
        assert!(matches!(
            Pairing::new(&v, Parity::Even, entries),
            Err(Error::SingularPairing)
        ));
    }
}
