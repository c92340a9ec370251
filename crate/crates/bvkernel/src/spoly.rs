//! Supercommutative polynomials with exact coefficients over a registry of
//! graded variables.
//!
//! # Design Notes
//!
//! Variables live in a `VarTable` that owns their names and parities;
//! polynomials store only variable ids, so the same arithmetic serves
//! matrix-entry variables and adjoined formal odd parameters alike.
//! Monomials are kept as sorted id lists (odd ids at most once) and every
//! reordering sign comes from `sort_graded`, hence from `koszul_sign`.
//!
//! Derivatives are graded left derivations: `d_w(uv) = d_w(u) v +
//! (-1)^{|w||u|} u d_w(v)`, so on a sorted monomial the derivative at
//! position `i` carries the sign of moving `d_w` past the prefix.

use crate::error::Error;
use crate::graded::{sort_graded, Parity, Sign};
use crate::scalar::{int, is_zero, render, Scalar};
use serde::{Deserialize, Serialize};
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

/// Identifier of a variable in a `VarTable`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub u32);

/// Registry of graded variables.  Ids are dense and ordered by registration,
/// which fixes the canonical monomial order.
#[derive(Debug, Clone, Default)]
pub struct VarTable {
    names: Vec<String>,
    parities: Vec<Parity>,
    lookup: BTreeMap<String, u32>,
}

impl VarTable {
    pub fn new() -> VarTable {
        VarTable::default()
    }

    pub fn add(&mut self, name: impl Into<String>, parity: Parity) -> Result<VarId, Error> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::EmptyLabel);
        }
        if self.lookup.contains_key(&name) {
            return Err(Error::DuplicateLabel(name));
        }
        let id = self.names.len() as u32;
        self.lookup.insert(name.clone(), id);
        self.names.push(name);
        self.parities.push(parity);
        Ok(VarId(id))
    }

    pub fn parity(&self, v: VarId) -> Parity {
        self.parities[v.0 as usize]
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn id_of(&self, name: &str) -> Result<VarId, Error> {
        self.lookup
            .get(name)
            .map(|&i| VarId(i))
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &str, Parity)> {
        self.names
            .iter()
            .zip(&self.parities)
            .enumerate()
            .map(|(i, (n, p))| (VarId(i as u32), n.as_str(), *p))
    }
}

/// A monomial: variable ids sorted ascending, odd ids appearing at most
/// once.  The empty monomial is the unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Monomial {
        Monomial(vec![v.0])
    }

    /// Builds a monomial from ids already in canonical ascending order.
    pub fn from_sorted_ids(ids: Vec<u32>) -> Monomial {
        debug_assert!(ids.windows(2).all(|w| w[0] <= w[1]));
        Monomial(ids)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().map(|&i| VarId(i))
    }

    pub fn parity(&self, table: &VarTable) -> Parity {
        self.vars()
            .fold(Parity::Even, |acc, v| acc + table.parity(v))
    }

    /// Product of two sorted monomials: merged id list and the Koszul sign
    /// of the merge, or `None` when an odd variable repeats.
    pub fn mul(&self, other: &Monomial, table: &VarTable) -> Option<(Monomial, Sign)> {
        let items: Vec<u32> = self.0.iter().chain(&other.0).copied().collect();
        let parities: Vec<Parity> = items.iter().map(|&i| table.parity(VarId(i))).collect();
        sort_graded(&items, &parities)
            .expect("lengths match by construction")
            .map(|(sorted, sign)| (Monomial(sorted), sign))
    }

    pub fn render(&self, table: &VarTable) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.vars()
            .map(|v| table.name(v).to_string())
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// A supercommutative polynomial: canonical monomials with exact nonzero
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SPoly {
    terms: BTreeMap<Monomial, Scalar>,
}

impl SPoly {
    pub fn zero() -> SPoly {
        SPoly::default()
    }

    pub fn one() -> SPoly {
        SPoly::constant(int(1))
    }

    pub fn constant(c: Scalar) -> SPoly {
        let mut p = SPoly::zero();
        p.insert(Monomial::one(), c);
        p
    }

    pub fn var(v: VarId) -> SPoly {
        let mut p = SPoly::zero();
        p.insert(Monomial::var(v), int(1));
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(crate::scalar::zero)
    }

    /// Adds `c * m`, merging and pruning zeros.
    pub fn insert(&mut self, m: Monomial, c: Scalar) {
        if is_zero(&c) {
            return;
        }
        match self.terms.entry(m) {
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
    }

    pub fn add(&self, other: &SPoly) -> SPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SPoly) -> SPoly {
        self.add(&other.scale(&int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> SPoly {
        if is_zero(c) {
            return SPoly::zero();
        }
        SPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }

    pub fn mul(&self, other: &SPoly, table: &VarTable) -> SPoly {
        let mut out = SPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((m, sign)) = m1.mul(m2, table) {
                    out.insert(m, c1 * c2 * sign.scalar());
                }
            }
        }
        out
    }

    pub fn pow(&self, k: usize, table: &VarTable) -> SPoly {
        let mut out = SPoly::one();
        for _ in 0..k {
            out = out.mul(self, table);
        }
        out
    }

    /// Graded left derivative with respect to variable `w`.
    pub fn derive(&self, w: VarId, table: &VarTable) -> SPoly {
        let pw = table.parity(w);
        let mut out = SPoly::zero();
        for (m, c) in &self.terms {
            let mut prefix = Parity::Even;
            for (i, v) in m.vars().enumerate() {
                if v == w {
                    let sign = Sign::from_parity_product(pw, prefix);
                    let mut rest = m.0.clone();
                    rest.remove(i);
                    out.insert(Monomial(rest), c * sign.scalar());
                }
                prefix = prefix + table.parity(v);
            }
        }
        out
    }

    /// Applies the derivation of parity `d_parity` that sends each variable
    /// `v` to `rule(v)`: acting on a monomial it replaces one factor at a
    /// time, with the sign of carrying the derivation past the prefix.
    pub fn apply_derivation(
        &self,
        d_parity: Parity,
        rule: &dyn Fn(VarId) -> SPoly,
        table: &VarTable,
    ) -> SPoly {
        let mut out = SPoly::zero();
        for (m, c) in &self.terms {
            let ids: Vec<VarId> = m.vars().collect();
            let mut prefix = Parity::Even;
            for (i, &v) in ids.iter().enumerate() {
                let image = rule(v);
                if !image.is_zero() {
                    let sign = Sign::from_parity_product(d_parity, prefix);
                    // rebuild prefix * image * suffix in the algebra
                    let mut piece = SPoly::constant(c * sign.scalar());
                    for (j, &u) in ids.iter().enumerate() {
                        let factor = if j == i { image.clone() } else { SPoly::var(u) };
                        piece = piece.mul(&factor, table);
                    }
                    out = out.add(&piece);
                }
                prefix = prefix + table.parity(v);
            }
        }
        out
    }

    /// Parity when homogeneous, `None` otherwise or when zero.
    pub fn parity(&self, table: &VarTable) -> Option<Parity> {
        let mut p: Option<Parity> = None;
        for m in self.terms.keys() {
            let mp = m.parity(table);
            match p {
                None => p = Some(mp),
                Some(q) if q != mp => return None,
                _ => {}
            }
        }
        p
    }

    /// Polynomial degree when homogeneous, `None` otherwise or when zero.
    pub fn degree(&self) -> Option<usize> {
        let mut d: Option<usize> = None;
        for m in self.terms.keys() {
            match d {
                None => d = Some(m.degree()),
                Some(k) if k != m.degree() => return None,
                _ => {}
            }
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Sign-separated rendering in the deterministic monomial order, e.g.
    /// `2 a*b - 1/2 c`.
    pub fn render(&self, table: &VarTable) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = !crate::scalar::is_positive(c);
            let mag = if neg { -c.clone() } else { c.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let coeff = render(&mag);
            if m.degree() == 0 {
                out.push_str(&coeff);
            } else if mag == int(1) {
                out.push_str(&m.render(table));
            } else {
                out.push_str(&format!("{} {}", coeff, m.render(table)));
            }
        }
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let body: Vec<String> = self.0.iter().map(|i| format!("v{i}")).collect();
        write!(f, "{}", body.join("*"))
    }
}
