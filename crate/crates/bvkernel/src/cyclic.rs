//! Cyclic words over a graded basis and the free graded-commutative algebra
//! they generate, in two flavors keyed to the parity of the pairing the
//! calculus will later contract letters with.
//!
//! # Design Notes
//!
//! A cyclic word is stored by one distinguished rotation, the
//! lexicographically least one; the Koszul sign of rotating a given spelling
//! into that form is returned to the caller for absorption into the
//! enclosing coefficient.  A word whose nontrivial cyclic symmetry reaches
//! the least rotation with both signs is identically zero and is never
//! stored.
//!
//! The two flavors differ in exactly two places, both centralized here: the
//! parity a letter carries while it moves around a cycle
//! (`WordAlgebra::rot_parity`), and an extra parity shift per whole word
//! (`WordAlgebra::word_parity`).  In the even-pairing flavor a letter lives
//! in the shifted copy of the space, so it rotates with its space parity
//! flipped, and every word contributes one extra flip to the parity of the
//! enclosing term; that packaging realizes both the shifted generators and
//! the cycle-orientation sign of the twisted symmetric algebra, and it is
//! exactly what the block-matrix trace realization reproduces once its
//! variables also carry shifted parities.  Every sign below is produced by
//! `koszul_sign`; nothing here decides a sign by local formula.

use crate::error::Error;
use crate::graded::{apply_permutation, koszul_sign, sort_graded, GradedSpace, Parity, Sign};
use crate::scalar::{int, is_zero, render, Scalar};
use serde::{Deserialize, Serialize};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

/// Which of the two pairing parities the algebra is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    OddPairing,
    EvenPairing,
}

impl Flavor {
    /// The parity a compatible pairing on the letter space must have.
    pub fn pairing_parity(self) -> Parity {
        match self {
            Flavor::OddPairing => Parity::Odd,
            Flavor::EvenPairing => Parity::Even,
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::OddPairing => write!(f, "odd-pairing"),
            Flavor::EvenPairing => write!(f, "even-pairing"),
        }
    }
}

/// A cyclic word in canonical rotation.  Letters are basis indices into the
/// underlying `GradedSpace`; construction goes through
/// `WordAlgebra::canonicalize`, which owns the rotation-sign bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CyclicWord {
    letters: Vec<usize>,
}

impl CyclicWord {
    /// Wraps a spelling without canonicalizing.  Trace expansions are
    /// well-defined on any spelling, so realization code may build words
    /// directly; everything stored in an `FElement` still goes through
    /// `canonicalize`.
    pub(crate) fn from_letters(letters: Vec<usize>) -> CyclicWord {
        CyclicWord { letters }
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", body.join(" "))
    }
}

/// The context an `FElement` lives in: the letter space plus the flavor.
/// All parity and canonicalization questions about words are answered here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordAlgebra {
    space: GradedSpace,
    flavor: Flavor,
}

impl WordAlgebra {
    pub fn new(space: GradedSpace, flavor: Flavor) -> WordAlgebra {
        WordAlgebra { space, flavor }
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// The parity a letter carries for rotation and reordering purposes:
    /// its space parity in the odd-pairing flavor, the flip of it in the
    /// even-pairing flavor (the letter then lives in the shifted copy of
    /// the space).
    pub fn rot_parity(&self, letter: usize) -> Parity {
        match self.flavor {
            Flavor::OddPairing => self.space.parity(letter),
            Flavor::EvenPairing => self.space.parity(letter).flip(),
        }
    }

    /// Rotation parities of all letters of a word, in storage order.
    pub fn letter_parities(&self, word: &CyclicWord) -> Vec<Parity> {
        word.letters.iter().map(|&l| self.rot_parity(l)).collect()
    }

    /// The effective parity of a whole word inside a term: the sum of its
    /// letters' rotation parities, plus one extra flip per word in the
    /// even-pairing flavor.
    pub fn word_parity(&self, word: &CyclicWord) -> Parity {
        let mut p = word
            .letters
            .iter()
            .fold(Parity::Even, |acc, &l| acc + self.rot_parity(l));
        if self.flavor == Flavor::EvenPairing {
            p = p.flip();
        }
        p
    }

    /// Canonicalizes a spelling of a cyclic word.  Returns the canonical
    /// rotation together with the Koszul sign `s` such that the input class
    /// equals `s` times the canonical class, or `None` when the word is
    /// identically zero because some rotation fixes the letter sequence
    /// with sign `-1`.
    pub fn canonicalize(&self, letters: &[usize]) -> Result<Option<(CyclicWord, Sign)>, Error> {
        if letters.is_empty() {
            return Err(Error::Input(
                "a cyclic word needs at least one letter".into(),
            ));
        }
        for &l in letters {
            if l >= self.space.dim() {
                return Err(Error::LetterOutOfRange(l));
            }
        }
        let n = letters.len();
        let parities: Vec<Parity> = letters.iter().map(|&l| self.rot_parity(l)).collect();
        let mut rotations: Vec<(Vec<usize>, Sign)> = Vec::with_capacity(n);
        for k in 0..n {
            let sigma: Vec<usize> = (0..n).map(|i| (i + n - k) % n).collect();
            let rotated = apply_permutation(letters, &sigma);
            let sign = koszul_sign(&parities, &sigma)?;
            rotations.push((rotated, sign));
        }
        let least = rotations.iter().map(|(r, _)| r).min().unwrap().clone();
        let mut sign: Option<Sign> = None;
        for (r, s) in &rotations {
            if *r == least {
                match sign {
                    None => sign = Some(*s),
                    Some(prev) if prev != *s => return Ok(None),
                    _ => {}
                }
            }
        }
        Ok(Some((CyclicWord { letters: least }, sign.unwrap())))
    }

    /// Canonicalizes a word given by basis labels.
    pub fn word(&self, labels: &[&str]) -> Result<Option<(CyclicWord, Sign)>, Error> {
        let letters = labels
            .iter()
            .map(|l| self.space.index_of(l))
            .collect::<Result<Vec<usize>, Error>>()?;
        self.canonicalize(&letters)
    }

    /// Builds the element `coeff * w_1 ... w_m` from raw spellings,
    /// canonicalizing each word and sorting the word list with signs.
    pub fn element(&self, coeff: Scalar, raw_words: &[Vec<usize>]) -> Result<FElement, Error> {
        let mut out = FElement::zero(self);
        out.insert_raw(self, coeff, raw_words)?;
        Ok(out)
    }

    /// `element`, with words given by basis labels.
    pub fn element_from_labels(
        &self,
        coeff: Scalar,
        words: &[&[&str]],
    ) -> Result<FElement, Error> {
        let raw = words
            .iter()
            .map(|w| {
                w.iter()
                    .map(|l| self.space.index_of(l))
                    .collect::<Result<Vec<usize>, Error>>()
            })
            .collect::<Result<Vec<Vec<usize>>, Error>>()?;
        self.element(coeff, &raw)
    }

    /// All nonzero canonical cyclic words with exactly `len` letters, in
    /// lexicographic order.
    pub fn canonical_words(&self, len: usize) -> Vec<CyclicWord> {
        if len == 0 {
            return Vec::new();
        }
        let d = self.space.dim();
        let mut out = Vec::new();
        let mut tuple = vec![0usize; len];
        'odometer: loop {
            if let Some((w, sign)) = self.canonicalize(&tuple).unwrap() {
                if w.letters() == &tuple[..] {
                    debug_assert_eq!(sign, Sign::Plus);
                    out.push(w);
                }
            }
            let mut i = len;
            loop {
                if i == 0 {
                    break 'odometer;
                }
                i -= 1;
                tuple[i] += 1;
                if tuple[i] < d {
                    break;
                }
                tuple[i] = 0;
            }
        }
        out
    }

    /// The monomial basis of the n-letter homogeneous component: all
    /// nondecreasing word lists with total letter count `n`, words of odd
    /// effective parity appearing at most once.
    pub fn basis(&self, n: usize) -> Vec<FElement> {
        let words_by_len: Vec<Vec<CyclicWord>> =
            (0..=n).map(|l| self.canonical_words(l)).collect();
        let mut out = Vec::new();
        let mut acc: Vec<CyclicWord> = Vec::new();
        self.basis_rec(n, None, &words_by_len, &mut acc, &mut out);
        out
    }

    fn basis_rec(
        &self,
        remaining: usize,
        min_word: Option<CyclicWord>,
        words_by_len: &[Vec<CyclicWord>],
        acc: &mut Vec<CyclicWord>,
        out: &mut Vec<FElement>,
    ) {
        if remaining == 0 {
            let mut el = FElement::zero(self);
            el.terms.insert(acc.clone(), int(1));
            out.push(el);
            return;
        }
        for len in 1..=remaining {
            for w in &words_by_len[len] {
                if let Some(m) = &min_word {
                    if w < m {
                        continue;
                    }
                    if w == m && self.word_parity(w).is_odd() {
                        continue;
                    }
                }
                acc.push(w.clone());
                self.basis_rec(remaining - len, Some(w.clone()), words_by_len, acc, out);
                acc.pop();
            }
        }
    }

    /// A reproducible random element of `⊕_{k ≤ n} F_k` with `nterms`
    /// monomials (fewer when the basis is small) and small nonzero integer
    /// coefficients.
    pub fn random_element<R: rand::Rng>(
        &self,
        n: usize,
        nterms: usize,
        rng: &mut R,
    ) -> FElement {
        let pool: Vec<FElement> = (0..=n).flat_map(|k| self.basis(k)).collect();
        let mut out = FElement::zero(self);
        for _ in 0..nterms {
            let pick = &pool[rng.gen_range(0..pool.len())];
            let mut c = rng.gen_range(-3i64..=3);
            if c == 0 {
                c = 1;
            }
            out = out.add(&pick.scale(&int(c))).unwrap();
        }
        out
    }

    /// Renders a word with basis labels, e.g. `(x1 t1)`.
    pub fn render_word(&self, word: &CyclicWord) -> String {
        let labels: Vec<&str> = word.letters.iter().map(|&l| self.space.label(l)).collect();
        format!("({})", labels.join(" "))
    }

    /// Renders an element for diagnostics; the CLI has its own grammar.
    pub fn render_element(&self, x: &FElement) -> String {
        if x.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (ws, c) in x.terms() {
            let body = if ws.is_empty() {
                "1".to_string()
            } else {
                ws.iter()
                    .map(|w| self.render_word(w))
                    .collect::<Vec<_>>()
                    .join("")
            };
            parts.push(format!("{} {}", render(c), body));
        }
        parts.join(" + ")
    }
}

/// An element of the (twisted) symmetric algebra on cyclic words: a finite
/// sum of canonical word-list monomials with exact coefficients.  Zero
/// coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FElement {
    flavor: Flavor,
    dim: usize,
    terms: BTreeMap<Vec<CyclicWord>, Scalar>,
}

impl FElement {
    pub fn zero(alg: &WordAlgebra) -> FElement {
        FElement {
            flavor: alg.flavor,
            dim: alg.space.dim(),
            terms: BTreeMap::new(),
        }
    }

    /// The unit: the empty word list with coefficient one.
    pub fn unit(alg: &WordAlgebra) -> FElement {
        let mut u = FElement::zero(alg);
        u.terms.insert(Vec::new(), int(1));
        u
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<CyclicWord>, &Scalar)> {
        self.terms.iter()
    }

    /// The coefficient of a canonical word-list monomial (zero if absent).
    pub fn coefficient(&self, words: &[CyclicWord]) -> Scalar {
        self.terms
            .get(words)
            .cloned()
            .unwrap_or_else(crate::scalar::zero)
    }

    fn compat(&self, other: &FElement) -> Result<(), Error> {
        if self.flavor != other.flavor {
            return Err(Error::FlavorMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    fn check_ctx(&self, alg: &WordAlgebra) -> Result<(), Error> {
        if self.flavor != alg.flavor {
            return Err(Error::FlavorMismatch);
        }
        if self.dim != alg.space.dim() {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &FElement) -> Result<FElement, Error> {
        self.compat(other)?;
        let mut out = self.clone();
        for (ws, c) in &other.terms {
            match out.terms.entry(ws.clone()) {
                Entry::Vacant(e) => {
                    e.insert(c.clone());
                }
                Entry::Occupied(mut e) => {
                    *e.get_mut() += c.clone();
                    if is_zero(e.get()) {
                        e.remove();
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &FElement) -> Result<FElement, Error> {
        self.add(&other.scale(&int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> FElement {
        if is_zero(c) {
            return FElement {
                flavor: self.flavor,
                dim: self.dim,
                terms: BTreeMap::new(),
            };
        }
        FElement {
            flavor: self.flavor,
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(ws, v)| (ws.clone(), v * c))
                .collect(),
        }
    }

    /// Inserts `coeff` times a list of already-canonical words, sorting the
    /// list and absorbing the Koszul sign of the sort computed from the
    /// words' effective parities.  A repeated word of odd effective parity
    /// annihilates the term.
    pub fn insert_sorted(
        &mut self,
        alg: &WordAlgebra,
        coeff: Scalar,
        words: Vec<CyclicWord>,
    ) -> Result<(), Error> {
        self.check_ctx(alg)?;
        if is_zero(&coeff) {
            return Ok(());
        }
        let parities: Vec<Parity> = words.iter().map(|w| alg.word_parity(w)).collect();
        let (sorted, sign) = match sort_graded(&words, &parities)? {
            None => return Ok(()),
            Some(pair) => pair,
        };
        let c = coeff * sign.scalar();
        match self.terms.entry(sorted) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if is_zero(e.get()) {
                    e.remove();
                }
            }
        }
        Ok(())
    }

    /// Inserts `coeff` times a list of raw word spellings, canonicalizing
    /// each word first (its rotation sign multiplies the coefficient, a
    /// zero word kills the term), then sorting the word list.
    pub fn insert_raw(
        &mut self,
        alg: &WordAlgebra,
        coeff: Scalar,
        raw_words: &[Vec<usize>],
    ) -> Result<(), Error> {
        let mut c = coeff;
        let mut words = Vec::with_capacity(raw_words.len());
        for raw in raw_words {
            match alg.canonicalize(raw)? {
                None => return Ok(()),
                Some((w, s)) => {
                    c *= s.scalar();
                    words.push(w);
                }
            }
        }
        self.insert_sorted(alg, c, words)
    }

    /// Graded-commutative product.
    pub fn mul(&self, other: &FElement, alg: &WordAlgebra) -> Result<FElement, Error> {
        self.compat(other)?;
        self.check_ctx(alg)?;
        let mut out = FElement::zero(alg);
        for (ws1, c1) in &self.terms {
            for (ws2, c2) in &other.terms {
                let mut words = ws1.clone();
                words.extend(ws2.iter().cloned());
                out.insert_sorted(alg, c1 * c2, words)?;
            }
        }
        Ok(out)
    }

    /// Splits by total letter count; the parts sum back to the element.
    pub fn grade(&self) -> BTreeMap<usize, FElement> {
        let mut out: BTreeMap<usize, FElement> = BTreeMap::new();
        for (ws, c) in &self.terms {
            let n: usize = ws.iter().map(|w| w.len()).sum();
            out.entry(n)
                .or_insert_with(|| FElement {
                    flavor: self.flavor,
                    dim: self.dim,
                    terms: BTreeMap::new(),
                })
                .terms
                .insert(ws.clone(), c.clone());
        }
        out
    }

    /// Total letter count when homogeneous, `None` otherwise or when zero.
    pub fn letter_degree(&self) -> Option<usize> {
        let mut deg: Option<usize> = None;
        for ws in self.terms.keys() {
            let n: usize = ws.iter().map(|w| w.len()).sum();
            match deg {
                None => deg = Some(n),
                Some(d) if d != n => return None,
                _ => {}
            }
        }
        deg
    }

    /// Splits into the even-parity and odd-parity parts; they sum back to
    /// the element.
    pub fn parity_parts(&self, alg: &WordAlgebra) -> (FElement, FElement) {
        let mut even = FElement::zero(alg);
        let mut odd = FElement::zero(alg);
        for (ws, c) in &self.terms {
            let p = ws
                .iter()
                .fold(Parity::Even, |acc, w| acc + alg.word_parity(w));
            let target = if p.is_odd() { &mut odd } else { &mut even };
            target.terms.insert(ws.clone(), c.clone());
        }
        (even, odd)
    }

    /// Parity when homogeneous, `None` otherwise or when zero.
    pub fn parity(&self, alg: &WordAlgebra) -> Option<Parity> {
        let mut p: Option<Parity> = None;
        for ws in self.terms.keys() {
            let tp = ws
                .iter()
                .fold(Parity::Even, |acc, w| acc + alg.word_parity(w));
            match p {
                None => p = Some(tp),
                Some(q) if q != tp => return None,
                _ => {}
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space_ab(pa: Parity, pb: Parity) -> GradedSpace {
        GradedSpace::new(vec![("a".into(), pa), ("b".into(), pb)]).unwrap()
    }

    fn alg_11(flavor: Flavor) -> WordAlgebra {
        WordAlgebra::new(GradedSpace::standard(1, 1), flavor)
    }

    #[test]
    fn canonicalize_rotates_even_letters_without_sign() {
        let alg = WordAlgebra::new(space_ab(Parity::Even, Parity::Even), Flavor::OddPairing);
        let (w, s) = alg.canonicalize(&[1, 0]).unwrap().unwrap();
        assert_eq!(w.letters(), &[0, 1]);
        assert_eq!(s, Sign::Plus);
    }

    #[test]
    fn repeated_odd_letter_word_is_zero() {
        let alg = WordAlgebra::new(space_ab(Parity::Odd, Parity::Odd), Flavor::OddPairing);
        assert!(alg.canonicalize(&[0, 0]).unwrap().is_none());
    }

    #[test]
    fn alternating_odd_word_canonicalizes_with_minus_on_shift() {
        let alg = WordAlgebra::new(space_ab(Parity::Odd, Parity::Odd), Flavor::OddPairing);
        let (w, s) = alg.canonicalize(&[0, 1, 0, 1]).unwrap().unwrap();
        assert_eq!(w.letters(), &[0, 1, 0, 1]);
        assert_eq!(s, Sign::Plus);
        let (w, s) = alg.canonicalize(&[1, 0, 1, 0]).unwrap().unwrap();
        assert_eq!(w.letters(), &[0, 1, 0, 1]);
        assert_eq!(s, Sign::Minus);
    }

    #[test]
    fn canonicalization_is_idempotent() {
        for flavor in [Flavor::OddPairing, Flavor::EvenPairing] {
            let alg = alg_11(flavor);
            for len in 1..=4usize {
                let mut tuple = vec![0usize; len];
                loop {
                    if let Some((w, _)) = alg.canonicalize(&tuple).unwrap() {
                        let (w2, s2) = alg.canonicalize(w.letters()).unwrap().unwrap();
                        assert_eq!(w2, w);
                        assert_eq!(s2, Sign::Plus);
                    }
                    let mut i = len;
                    let mut done = false;
                    loop {
                        if i == 0 {
                            done = true;
                            break;
                        }
                        i -= 1;
                        tuple[i] += 1;
                        if tuple[i] < 2 {
                            break;
                        }
                        tuple[i] = 0;
                    }
                    if done {
                        break;
                    }
                }
            }
        }
    }

    #[test]
    fn unit_is_neutral() {
        let alg = alg_11(Flavor::OddPairing);
        let x = alg.element(int(3), &[vec![0, 1], vec![0]]).unwrap();
        let u = FElement::unit(&alg);
        assert_eq!(x.mul(&u, &alg).unwrap(), x);
        assert_eq!(u.mul(&x, &alg).unwrap(), x);
    }

    #[test]
    fn single_words_commute_with_parity_sign() {
        for flavor in [Flavor::OddPairing, Flavor::EvenPairing] {
            let alg = alg_11(flavor);
            for w1 in (1..=3usize).flat_map(|l| alg.canonical_words(l)) {
                for w2 in (1..=3usize).flat_map(|l| alg.canonical_words(l)) {
                    let x = alg.element(int(1), &[w1.letters().to_vec()]).unwrap();
                    let y = alg.element(int(1), &[w2.letters().to_vec()]).unwrap();
                    let xy = x.mul(&y, &alg).unwrap();
                    let yx = y.mul(&x, &alg).unwrap();
                    let sign =
                        Sign::from_parity_product(alg.word_parity(&w1), alg.word_parity(&w2));
                    assert_eq!(xy, yx.scale(&sign.scalar()), "flavor {flavor} {w1} {w2}");
                }
            }
        }
    }

    #[test]
    fn even_flavor_parity_shift_controls_squares() {
        // letter 1 is odd in the space, so its shifted rotation parity is
        // even; the word-level shift then makes the one-letter word odd and
        // its square vanishes.  Letter 0 is even, the same packaging makes
        // its one-letter word even, and the square survives.
        let alg = alg_11(Flavor::EvenPairing);
        let t = alg.element(int(1), &[vec![1]]).unwrap();
        assert!(t.mul(&t, &alg).unwrap().is_zero());
        let x = alg.element(int(1), &[vec![0]]).unwrap();
        assert!(!x.mul(&x, &alg).unwrap().is_zero());
        // odd flavor for contrast: the even letter squares freely
        let alg_odd = alg_11(Flavor::OddPairing);
        let x = alg_odd.element(int(1), &[vec![0]]).unwrap();
        assert!(!x.mul(&x, &alg_odd).unwrap().is_zero());
        let t = alg_odd.element(int(1), &[vec![1]]).unwrap();
        assert!(t.mul(&t, &alg_odd).unwrap().is_zero());
    }

    #[test]
    fn rotation_signs_use_shifted_parities_in_even_flavor() {
        // odd flavor: the doubled even letter survives as a cycle, the
        // doubled odd letter dies; even flavor: the roles swap, because the
        // letters rotate with shifted parities there.
        let alg = alg_11(Flavor::OddPairing);
        assert!(alg.canonicalize(&[0, 0]).unwrap().is_some());
        assert!(alg.canonicalize(&[1, 1]).unwrap().is_none());
        let alg = alg_11(Flavor::EvenPairing);
        assert!(alg.canonicalize(&[0, 0]).unwrap().is_none());
        assert!(alg.canonicalize(&[1, 1]).unwrap().is_some());
    }

    #[test]
    fn multiplication_is_associative_on_random_elements() {
        for flavor in [Flavor::OddPairing, Flavor::EvenPairing] {
            let alg = WordAlgebra::new(GradedSpace::standard(2, 2), flavor);
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..10 {
                let x = alg.random_element(3, 3, &mut rng);
                let y = alg.random_element(3, 3, &mut rng);
                let z = alg.random_element(3, 3, &mut rng);
                let xy_z = x.mul(&y, &alg).unwrap().mul(&z, &alg).unwrap();
                let x_yz = x.mul(&y.mul(&z, &alg).unwrap(), &alg).unwrap();
                assert_eq!(xy_z, x_yz);
            }
        }
    }

    #[test]
    fn grade_splits_and_reassembles() {
        let alg = alg_11(Flavor::OddPairing);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = alg.random_element(5, 6, &mut rng);
        let parts = x.grade();
        let mut sum = FElement::zero(&alg);
        for (n, part) in &parts {
            assert_eq!(part.letter_degree(), Some(*n));
            sum = sum.add(part).unwrap();
        }
        assert_eq!(sum, x);
        assert!(FElement::zero(&alg).grade().is_empty());
    }

    #[test]
    fn two_letter_component_has_expected_dimension() {
        let alg = alg_11(Flavor::OddPairing);
        assert_eq!(alg.basis(2).len(), 4);
        let alg = alg_11(Flavor::EvenPairing);
        assert_eq!(alg.basis(2).len(), 4);
    }

    #[test]
    fn basis_elements_are_distinct_and_nonzero() {
        for flavor in [Flavor::OddPairing, Flavor::EvenPairing] {
            let alg = WordAlgebra::new(GradedSpace::standard(1, 1), flavor);
            for n in 0..=5usize {
                let basis = alg.basis(n);
                for (i, x) in basis.iter().enumerate() {
                    assert!(!x.is_zero());
                    assert_eq!(x.letter_degree(), Some(n));
                    for y in &basis[i + 1..] {
                        assert_ne!(x, y);
                    }
                }
            }
        }
    }

    #[test]
    fn subtraction_prunes_zero_coefficients() {
        let alg = alg_11(Flavor::OddPairing);
        let x = alg.element(int(2), &[vec![0, 1]]).unwrap();
        assert!(x.sub(&x).unwrap().is_zero());
    }

    #[test]
    fn mismatched_flavors_are_rejected() {
        let a = alg_11(Flavor::OddPairing);
        let b = alg_11(Flavor::EvenPairing);
        let x = FElement::unit(&a);
        let y = FElement::unit(&b);
        assert!(matches!(x.add(&y), Err(Error::FlavorMismatch)));
        assert!(matches!(x.mul(&y, &a), Err(Error::FlavorMismatch)));
    }
}
