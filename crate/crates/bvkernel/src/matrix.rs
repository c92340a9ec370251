//! Supermatrix realizations: trace expansions of cyclic words into
//! polynomials in matrix-entry variables, the matrix-side second-order
//! operator and bracket, and the pairing-space tensor constructions.
//!
//! # Design Notes
//!
//! Everything is derived from two mechanical rules and nothing else:
//!
//! * matrices over the polynomial ring multiply as `(MN)[i][j] = sum_k
//!   (-1)^{p(M[i][k]) (k+j)} M[i][k] N[k][j]` (the sign is the Koszul cost
//!   of carrying the left entry past the unit `E[k][j]`), and the
//!   supertrace is `sum_i (-1)^{i} M[i][i]`;
//! * the block algebra with the odd trace is handled through its faithful
//!   embedding as supermatrices commuting with the odd involution `p`, so
//!   its product and trace need no separate sign rules at all.
//!
//! The second-order operator contracts transposed-index variable pairs
//! with the inverse of the trace pairing on matrix units tensored with the
//! letter pairing taken directly; the residual exchange sign is pinned by
//! the sweep test at the bottom of this file, which verifies that the
//! implemented sign pattern is the only member of its family that kills
//! adjacent self-contractions (the trace of the identity), squares to
//! zero, and stays nonzero where it must.

use crate::cyclic::{CyclicWord, FElement, Flavor};
use crate::error::Error;
use crate::graded::{GradedSpace, Pairing, Parity, Sign};
use crate::scalar::{int, is_zero, Scalar};
use crate::spoly::{Monomial, SPoly, VarId, VarTable};
use std::collections::BTreeMap;
use std::fmt;

/// The matrix algebra a realization expands into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraKind {
    /// Full matrix superalgebra on a space of dimension (even|odd), with
    /// the supertrace pairing.
    Gl { even: usize, odd: usize },
    /// The subalgebra of matrices on (n|n) commuting with the odd
    /// involution that swaps the two blocks, with the odd trace pairing.
    Q { n: usize },
}

impl AlgebraKind {
    pub fn gl(n: usize) -> AlgebraKind {
        AlgebraKind::Gl { even: n, odd: n }
    }

    pub fn q(n: usize) -> AlgebraKind {
        AlgebraKind::Q { n }
    }

    /// Dimension of the square matrices the realization works with (the
    /// block algebra is embedded in matrices of twice its block size).
    pub fn matrix_dim(&self) -> usize {
        match *self {
            AlgebraKind::Gl { even, odd } => even + odd,
            AlgebraKind::Q { n } => 2 * n,
        }
    }

    /// Parity of a matrix index.
    pub fn index_parity(&self, i: usize) -> Parity {
        match *self {
            AlgebraKind::Gl { even, .. } => {
                if i < even {
                    Parity::Even
                } else {
                    Parity::Odd
                }
            }
            AlgebraKind::Q { n } => {
                if i < n {
                    Parity::Even
                } else {
                    Parity::Odd
                }
            }
        }
    }

    /// The flavor of cyclic-word algebra this realization expands.
    pub fn flavor(&self) -> Flavor {
        match self {
            AlgebraKind::Gl { .. } => Flavor::OddPairing,
            AlgebraKind::Q { .. } => Flavor::EvenPairing,
        }
    }
}

impl fmt::Display for AlgebraKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AlgebraKind::Gl { even, odd } => write!(f, "gl({even}|{odd})"),
            AlgebraKind::Q { n } => write!(f, "q({n})"),
        }
    }
}

/// Which block of the realization a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Block {
    A,
    X,
    Y,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Block::A => write!(f, "A"),
            Block::X => write!(f, "X"),
            Block::Y => write!(f, "Y"),
        }
    }
}

/// A square matrix with polynomial entries and graded index set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatPoly {
    idx: Vec<Parity>,
    entries: Vec<Vec<SPoly>>,
}

impl MatPoly {
    pub fn zero(idx: Vec<Parity>) -> MatPoly {
        let d = idx.len();
        MatPoly {
            idx,
            entries: vec![vec![SPoly::zero(); d]; d],
        }
    }

    pub fn identity(idx: Vec<Parity>) -> MatPoly {
        let mut m = MatPoly::zero(idx);
        for i in 0..m.dim() {
            m.entries[i][i] = SPoly::one();
        }
        m
    }

    pub fn from_scalars(idx: Vec<Parity>, rows: Vec<Vec<Scalar>>) -> MatPoly {
        MatPoly {
            idx,
            entries: rows
                .into_iter()
                .map(|row| row.into_iter().map(SPoly::constant).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.idx.len()
    }

    pub fn index_parities(&self) -> &[Parity] {
        &self.idx
    }

    pub fn entry(&self, i: usize, j: usize) -> &SPoly {
        &self.entries[i][j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, p: SPoly) {
        self.entries[i][j] = p;
    }

    pub fn add(&self, other: &MatPoly) -> MatPoly {
        let mut out = self.clone();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                out.entries[i][j] = out.entries[i][j].add(&other.entries[i][j]);
            }
        }
        out
    }

    pub fn sub(&self, other: &MatPoly) -> MatPoly {
        self.add(&other.scale(&int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> MatPoly {
        MatPoly {
            idx: self.idx.clone(),
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|p| p.scale(c)).collect())
                .collect(),
        }
    }

    /// Matrix product.  Per monomial of the left entry, carrying it past
    /// the right unit costs `(-1)^{p(monomial) (k + j)}` where `k` is the
    /// contracted index and `j` the right column.
    pub fn mul(&self, other: &MatPoly, table: &VarTable) -> MatPoly {
        let d = self.dim();
        let mut out = MatPoly::zero(self.idx.clone());
        for i in 0..d {
            for j in 0..d {
                let mut acc = SPoly::zero();
                for k in 0..d {
                    let left = &self.entries[i][k];
                    let right = &other.entries[k][j];
                    if left.is_zero() || right.is_zero() {
                        continue;
                    }
                    let flip = (self.idx[k] + self.idx[j]).is_odd();
                    let left_adj = if flip {
                        flip_odd_monomials(left, table)
                    } else {
                        left.clone()
                    };
                    acc = acc.add(&left_adj.mul(right, table));
                }
                out.entries[i][j] = acc;
            }
        }
        out
    }

    /// Supertrace: `sum_i (-1)^{i} M[i][i]`.
    pub fn supertrace(&self) -> SPoly {
        let mut out = SPoly::zero();
        for i in 0..self.dim() {
            let term = if self.idx[i].is_odd() {
                self.entries[i][i].scale(&int(-1))
            } else {
                self.entries[i][i].clone()
            };
            out = out.add(&term);
        }
        out
    }

    /// Total parity of the matrix as an element (index parity plus entry
    /// parity, uniform over nonzero entries), `None` if mixed or zero.
    pub fn total_parity(&self, table: &VarTable) -> Option<Parity> {
        let mut p: Option<Parity> = None;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let e = &self.entries[i][j];
                if e.is_zero() {
                    continue;
                }
                let ep = e.parity(table)?;
                let tp = ep + self.idx[i] + self.idx[j];
                match p {
                    None => p = Some(tp),
                    Some(q) if q != tp => return None,
                    _ => {}
                }
            }
        }
        p
    }

    /// Graded commutator `MN - (-1)^{p(M)p(N)} NM` of homogeneous matrices.
    pub fn commutator(&self, other: &MatPoly, table: &VarTable) -> Result<MatPoly, Error> {
        let pm = self.total_parity(table);
        let pn = other.total_parity(table);
        let sign = match (pm, pn) {
            (Some(a), Some(b)) => Sign::from_parity_product(a, b),
            // a zero operand commutes with everything
            _ if self.is_zero() || other.is_zero() => Sign::Plus,
            _ => {
                return Err(Error::Input(
                    "commutator needs parity-homogeneous matrices".into(),
                ))
            }
        };
        let mn = self.mul(other, table);
        let nm = other.mul(self, table).scale(&sign.scalar());
        Ok(mn.sub(&nm))
    }

    pub fn is_zero(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().all(|p| p.is_zero()))
    }
}

/// Scales the odd-parity monomials of a polynomial by -1.
fn flip_odd_monomials(p: &SPoly, table: &VarTable) -> SPoly {
    let mut out = SPoly::zero();
    for (m, c) in p.terms() {
        let c = if m.parity(table).is_odd() {
            -c.clone()
        } else {
            c.clone()
        };
        out.insert(m.clone(), c);
    }
    out
}

/// A realization context: the letter space with its pairing, the matrix
/// algebra, and the registry of entry variables.
#[derive(Debug, Clone)]
pub struct MatCtx {
    space: GradedSpace,
    pairing: Pairing,
    alg: AlgebraKind,
    table: VarTable,
    ids: BTreeMap<(Block, usize, usize, usize), VarId>,
}

impl MatCtx {
    /// Builds the variable registry for the given letter space and
    /// algebra.  The pairing parity must match the algebra: the supertrace
    /// realization expands the odd-pairing flavor, the odd-trace
    /// realization the even-pairing flavor.
    pub fn new(space: GradedSpace, pairing: Pairing, alg: AlgebraKind) -> Result<MatCtx, Error> {
        let wanted = alg.flavor().pairing_parity();
        if pairing.parity() != wanted {
            return Err(Error::FlavorPairingParity {
                pairing: pairing.parity().to_string(),
                flavor: alg.flavor().to_string(),
            });
        }
        if pairing.dim() != space.dim() {
            return Err(Error::DimensionMismatch(format!(
                "pairing is {}x{} but the space has dimension {}",
                pairing.dim(),
                pairing.dim(),
                space.dim()
            )));
        }
        let mut table = VarTable::new();
        let mut ids = BTreeMap::new();
        match alg {
            AlgebraKind::Gl { even, odd } => {
                let m = even + odd;
                for (v, label, pv) in space.iter() {
                    for r in 0..m {
                        for c in 0..m {
                            let p = pv + alg.index_parity(r) + alg.index_parity(c);
                            let id = table.add(format!("A[{label},{r},{c}]"), p)?;
                            ids.insert((Block::A, v, r, c), id);
                        }
                    }
                }
            }
            AlgebraKind::Q { n } => {
                // the letters of the even-pairing flavor live in the
                // shifted copy of the space, so an entry variable carries
                // the flipped letter parity plus its unit parity: X units
                // are even, Y units odd.
                for (v, label, pv) in space.iter() {
                    for r in 0..n {
                        for c in 0..n {
                            let id = table.add(format!("X[{label},{r},{c}]"), pv.flip())?;
                            ids.insert((Block::X, v, r, c), id);
                        }
                    }
                    for r in 0..n {
                        for c in 0..n {
                            let id = table.add(format!("Y[{label},{r},{c}]"), pv)?;
                            ids.insert((Block::Y, v, r, c), id);
                        }
                    }
                }
            }
        }
        Ok(MatCtx {
            space,
            pairing,
            alg,
            table,
            ids,
        })
    }

    pub fn space(&self) -> &GradedSpace {
        &self.space
    }

    pub fn pairing(&self) -> &Pairing {
        &self.pairing
    }

    pub fn alg(&self) -> AlgebraKind {
        self.alg
    }

    pub fn table(&self) -> &VarTable {
        &self.table
    }

    pub fn var(&self, block: Block, v: usize, r: usize, c: usize) -> VarId {
        self.ids[&(block, v, r, c)]
    }

    /// Adjoins a formal odd parameter to the coefficient ring.
    pub fn add_odd_param(&mut self, name: impl Into<String>) -> Result<VarId, Error> {
        self.table.add(name, Parity::Odd)
    }

    /// The entry variable of the letter matrix at position `(i, j)` of the
    /// realization, with the sign of the block embedding.
    fn entry_var(&self, v: usize, i: usize, j: usize) -> (VarId, Sign) {
        match self.alg {
            AlgebraKind::Gl { .. } => (self.var(Block::A, v, i, j), Sign::Plus),
            AlgebraKind::Q { n } => match (i < n, j < n) {
                (true, true) => (self.var(Block::X, v, i, j), Sign::Plus),
                (true, false) => (self.var(Block::Y, v, i, j - n), Sign::Plus),
                (false, true) => (self.var(Block::Y, v, i - n, j), Sign::Minus),
                (false, false) => (self.var(Block::X, v, i - n, j - n), Sign::Plus),
            },
        }
    }

    /// Index parities of the realization matrices.
    pub fn idx_parities(&self) -> Vec<Parity> {
        (0..self.alg.matrix_dim())
            .map(|i| self.alg.index_parity(i))
            .collect()
    }

    /// The generic matrix of a letter: entries are the registered
    /// variables, block-embedded for the odd-trace algebra.
    pub fn letter_matrix(&self, v: usize) -> MatPoly {
        let d = self.alg.matrix_dim();
        let mut m = MatPoly::zero(self.idx_parities());
        for i in 0..d {
            for j in 0..d {
                let (id, sign) = self.entry_var(v, i, j);
                m.set_entry(i, j, SPoly::var(id).scale(&sign.scalar()));
            }
        }
        m
    }

    /// The odd involution the block algebra commutes with.
    pub fn p_matrix(&self) -> MatPoly {
        let n = match self.alg {
            AlgebraKind::Q { n } => n,
            AlgebraKind::Gl { .. } => panic!("p matrix only exists for the block algebra"),
        };
        let mut m = MatPoly::zero(self.idx_parities());
        for a in 0..n {
            m.set_entry(a, a + n, SPoly::one());
            m.set_entry(a + n, a, SPoly::one());
        }
        m
    }

    /// The trace functional of the realization: the supertrace, or the odd
    /// trace reading the trace of the upper off-diagonal block (on the
    /// generators written as block pairs `(X, Y)` this is `tr(Y)`, the
    /// unique trace vanishing on the even part).
    pub fn trace(&self, m: &MatPoly) -> SPoly {
        match self.alg {
            AlgebraKind::Gl { .. } => m.supertrace(),
            AlgebraKind::Q { n } => {
                let mut out = SPoly::zero();
                for i in 0..n {
                    out = out.add(m.entry(i, i + n));
                }
                out
            }
        }
    }

    /// Trace expansion of one cyclic word by explicit matrix products;
    /// the reference implementation for `trace_word`.
    pub fn trace_word_by_products(&self, word: &CyclicWord) -> SPoly {
        let letters = word.letters();
        let mut m = self.letter_matrix(letters[0]);
        for &v in &letters[1..] {
            m = m.mul(&self.letter_matrix(v), &self.table);
        }
        self.trace(&m)
    }

    /// Trace expansion of one cyclic word, streaming over index tuples
    /// with early canonical merging (no intermediate matrices).  For a
    /// tuple `(i_1..i_r)` the term is the product of the entry variables
    /// `M_{w_m}[i_m][i_{m+1}]`; the structural sign collects, per step,
    /// the Koszul cost of carrying the accumulated entry monomial past the
    /// next unit.  The supertrace closes the tuple at `i_1` with the sign
    /// `(-1)^{i_1}`; the odd trace closes it in the mirror block at
    /// `i_1 + n` with opening rows restricted to the first block.
    pub fn trace_word(&self, word: &CyclicWord) -> SPoly {
        let letters = word.letters();
        let r = letters.len();
        let d = self.alg.matrix_dim();
        let is_q = matches!(self.alg, AlgebraKind::Q { .. });
        let qn = match self.alg {
            AlgebraKind::Q { n } => n,
            _ => 0,
        };
        let open_rows = if is_q { qn } else { d };
        let mut out = SPoly::zero();
        let mut tuple = vec![0usize; r];
        'odometer: loop {
            let close = if is_q { tuple[0] + qn } else { tuple[0] };
            let mut vars = Vec::with_capacity(r);
            let mut parities = Vec::with_capacity(r);
            let mut sign = Sign::Plus;
            let mut prefix = Parity::Even;
            for m in 0..r {
                let row = tuple[m];
                let col = if m + 1 < r { tuple[m + 1] } else { close };
                let (id, esign) = self.entry_var(letters[m], row, col);
                sign *= esign;
                let vp = self.table.parity(id);
                if m > 0 {
                    // carry the accumulated monomial past the unit E[row][col]
                    let cost = self.alg.index_parity(row) + self.alg.index_parity(col);
                    sign *= Sign::from_parity_product(prefix, cost);
                }
                vars.push(id.0);
                parities.push(vp);
                prefix = prefix + vp;
            }
            if !is_q && self.alg.index_parity(tuple[0]).is_odd() {
                sign = -sign;
            }
            if let Some((sorted, ssign)) =
                crate::graded::sort_graded(&vars, &parities).expect("lengths match")
            {
                out.insert(Monomial::from_sorted_ids(sorted), (sign * ssign).scalar());
            }
            let mut i = r;
            loop {
                if i == 0 {
                    break 'odometer;
                }
                i -= 1;
                tuple[i] += 1;
                let cap = if i == 0 { open_rows } else { d };
                if tuple[i] < cap {
                    break;
                }
                tuple[i] = 0;
            }
        }
        out
    }

    /// Trace expansion of a whole element: each word becomes its trace
    /// polynomial, word lists multiply.
    pub fn expand(&self, x: &FElement) -> Result<SPoly, Error> {
        if x.flavor() != self.alg.flavor() {
            return Err(Error::FlavorMismatch);
        }
        let mut out = SPoly::zero();
        for (words, coeff) in x.terms() {
            let mut term = SPoly::constant(coeff.clone());
            for w in words {
                term = term.mul(&self.trace_word(w), &self.table);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// The list of contracted variable pairs of the second-order operator:
    /// `Delta = 1/2 sum coeff d_b d_a` (`d_a` acting first).  One pair per
    /// transposed unit pair and letter pair with nonzero pairing value.
    fn delta_pairs(&self, rule: &DeltaRule) -> Vec<(VarId, VarId, Scalar)> {
        let mut pairs = Vec::new();
        let dim_v = self.space.dim();
        match self.alg {
            AlgebraKind::Gl { .. } => {
                let m = self.alg.matrix_dim();
                for nu in 0..dim_v {
                    for ka in 0..dim_v {
                        let l = self.pairing.value(nu, ka);
                        if is_zero(l) {
                            continue;
                        }
                        for r in 0..m {
                            for c in 0..m {
                                let a = self.var(Block::A, nu, r, c);
                                let b = self.var(Block::A, ka, c, r);
                                let ip = self.alg.index_parity(r) + self.alg.index_parity(c);
                                let mut exp = 0u8;
                                if rule.row_bit && self.alg.index_parity(r).is_odd() {
                                    exp += 1;
                                }
                                if rule.col_bit && self.alg.index_parity(c).is_odd() {
                                    exp += 1;
                                }
                                if rule.nu_bit
                                    && self.space.parity(nu).is_odd()
                                    && ip.is_odd()
                                {
                                    exp += 1;
                                }
                                if rule.kappa_bit
                                    && self.space.parity(ka).is_odd()
                                    && ip.is_odd()
                                {
                                    exp += 1;
                                }
                                let coeff = if exp % 2 == 1 { -l.clone() } else { l.clone() };
                                pairs.push((b, a, coeff));
                            }
                        }
                    }
                }
            }
            AlgebraKind::Q { n } => {
                for nu in 0..dim_v {
                    for ka in 0..dim_v {
                        let l = self.pairing.value(nu, ka);
                        if is_zero(l) {
                            continue;
                        }
                        for r in 0..n {
                            for c in 0..n {
                                // X against Y: the second unit is odd
                                let a = self.var(Block::X, nu, r, c);
                                let b = self.var(Block::Y, ka, c, r);
                                let mut exp = 0u8;
                                if rule.nu_bit && self.space.parity(nu).is_odd() {
                                    exp += 1;
                                }
                                if rule.xy_minus {
                                    exp += 1;
                                }
                                let coeff = if exp % 2 == 1 { -l.clone() } else { l.clone() };
                                pairs.push((b, a, coeff));
                                // Y against X: the second unit is even
                                let a = self.var(Block::Y, nu, r, c);
                                let b = self.var(Block::X, ka, c, r);
                                let mut exp = 0u8;
                                if rule.kappa_bit && self.space.parity(ka).is_odd() {
                                    exp += 1;
                                }
                                if rule.yx_minus {
                                    exp += 1;
                                }
                                let coeff = if exp % 2 == 1 { -l.clone() } else { l.clone() };
                                pairs.push((b, a, coeff));
                            }
                        }
                    }
                }
            }
        }
        pairs
    }

    pub(crate) fn delta_with_rule(&self, p: &SPoly, rule: &DeltaRule) -> SPoly {
        let mut out = SPoly::zero();
        for (first, second, coeff) in self.delta_pairs(rule) {
            let d = p.derive(first, &self.table).derive(second, &self.table);
            if !d.is_zero() {
                out = out.add(&d.scale(&(coeff / int(2))));
            }
        }
        out
    }

    /// The matrix-side second-order operator.
    pub fn delta(&self, p: &SPoly) -> SPoly {
        let rule = match self.alg {
            AlgebraKind::Gl { .. } => &PINNED_GL_RULE,
            AlgebraKind::Q { .. } => &PINNED_Q_RULE,
        };
        self.delta_with_rule(p, rule)
    }

    /// The odd bracket as the deviation of `delta` from being a first-order
    /// operator: `{P,Q} = Delta(PQ) - Delta(P)Q - (-1)^{p(P)} P Delta(Q)`,
    /// extended bilinearly over the parity components of `P`.
    pub fn bracket(&self, p: &SPoly, q: &SPoly) -> SPoly {
        let (pe, po) = split_parity(p, &self.table);
        let mut out = SPoly::zero();
        for (part, sign) in [(pe, Sign::Plus), (po, Sign::Minus)] {
            if part.is_zero() {
                continue;
            }
            let pq = part.mul(q, &self.table);
            let t1 = self.delta(&pq);
            let t2 = self.delta(&part).mul(q, &self.table);
            let t3 = part.mul(&self.delta(q), &self.table).scale(&sign.scalar());
            out = out.add(&t1.sub(&t2).sub(&t3));
        }
        out
    }

    /// The derivation of the adjoint flow of a scalar matrix `g` on entry
    /// variables: the flow moves each letter matrix by `[t g, A_v]` with a
    /// formal parameter `t` of the same parity as `g` (so the commutator
    /// is an honest even one), and the derivation is the `t`-derivative of
    /// the flowed entries.  Routing the parameter through the matrix
    /// product keeps every positional sign mechanical.  For the block
    /// algebra `g` must lie in the algebra; variables are read off from
    /// the top block row.
    pub fn adjoint_derivation(&self, g: &MatPoly, p: &SPoly) -> Result<SPoly, Error> {
        let g_parity = g.total_parity(&self.table).ok_or_else(|| {
            Error::Input("adjoint action needs a parity-homogeneous matrix".into())
        })?;
        let mut ext = self.table.clone();
        let t = ext.add("__flow", g_parity)?;
        let tg = {
            let mut m = MatPoly::zero(g.index_parities().to_vec());
            for i in 0..g.dim() {
                for j in 0..g.dim() {
                    m.set_entry(i, j, SPoly::var(t).mul(g.entry(i, j), &ext));
                }
            }
            m
        };
        let dim_v = self.space.dim();
        let mut images: BTreeMap<VarId, SPoly> = BTreeMap::new();
        for v in 0..dim_v {
            let comm = tg.commutator(&self.letter_matrix(v), &ext)?;
            let mut put = |id: VarId, e: &SPoly| {
                images.insert(id, e.derive(t, &ext));
            };
            match self.alg {
                AlgebraKind::Gl { .. } => {
                    let d = self.alg.matrix_dim();
                    for i in 0..d {
                        for j in 0..d {
                            put(self.var(Block::A, v, i, j), comm.entry(i, j));
                        }
                    }
                }
                AlgebraKind::Q { n } => {
                    for r in 0..n {
                        for c in 0..n {
                            put(self.var(Block::X, v, r, c), comm.entry(r, c));
                            put(self.var(Block::Y, v, r, c), comm.entry(r, c + n));
                        }
                    }
                }
            }
        }
        Ok(p.apply_derivation(
            g_parity,
            &|v| images.get(&v).cloned().unwrap_or_else(SPoly::zero),
            &self.table,
        ))
    }
}

/// Splits a polynomial into even and odd parts by monomial parity.
pub fn split_parity(p: &SPoly, table: &VarTable) -> (SPoly, SPoly) {
    let mut even = SPoly::zero();
    let mut odd = SPoly::zero();
    for (m, c) in p.terms() {
        if m.parity(table).is_odd() {
            odd.insert(m.clone(), c.clone());
        } else {
            even.insert(m.clone(), c.clone());
        }
    }
    (even, odd)
}

/// Exchange-sign pattern of the second-order operator; see the sweep test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeltaRule {
    pub row_bit: bool,
    pub col_bit: bool,
    pub nu_bit: bool,
    pub kappa_bit: bool,
    pub xy_minus: bool,
    pub yx_minus: bool,
}

/// The pinned sign pattern of the supertrace realization: a contracted
/// pair `(A[nu,r,c], A[kappa,c,r])` enters with the exponent
/// `row + letter(nu)*(row+col)`.  The sweep test shows this pattern and
/// its mirror (the same operator written from the other end of the pair)
/// are the only members of the family that kill adjacent
/// self-contractions and commute with every adjoint derivation.
pub const PINNED_GL_RULE: DeltaRule = DeltaRule {
    row_bit: true,
    col_bit: false,
    nu_bit: true,
    kappa_bit: false,
    xy_minus: false,
    yx_minus: false,
};

/// The pinned sign pattern of the odd-trace realization: both directions
/// of a contracted pair enter with a constant minus and the `(X, Y)`
/// direction carries the extra exponent `letter(nu)`.  The sweep test
/// checks the anchors here; the exact member of the anchor family is fixed
/// by the expansion correspondence with the combinatorial operator under
/// its no-extra-signs splice rule.
pub const PINNED_Q_RULE: DeltaRule = DeltaRule {
    row_bit: false,
    col_bit: false,
    nu_bit: true,
    kappa_bit: false,
    xy_minus: true,
    yx_minus: true,
};

/// Tensor of a pairing space with a trace-pairing matrix algebra: the new
/// basis is (letter, matrix unit) pairs with added parities, the new
/// pairing is the product of values with the Koszul exchange sign, and its
/// parity is the sum of the two parities (the odd-trace factor flips it).
/// For the block algebra the letters enter with shifted parity, matching
/// the shifted copy of the space its realization is built on.
pub fn tensor_with_trace_algebra(
    space: &GradedSpace,
    pairing: &Pairing,
    alg: AlgebraKind,
) -> Result<(GradedSpace, Pairing), Error> {
    let (unit_labels, unit_parities, gram) = trace_unit_pairing(alg);
    let u = unit_labels.len();
    let shift = match alg {
        AlgebraKind::Gl { .. } => Parity::Even,
        AlgebraKind::Q { .. } => Parity::Odd,
    };
    let mut basis = Vec::new();
    for (_, label, pv) in space.iter() {
        for k in 0..u {
            basis.push((
                format!("{label}*{}", unit_labels[k]),
                pv + shift + unit_parities[k],
            ));
        }
    }
    let new_space = GradedSpace::new(basis)?;
    let d = space.dim() * u;
    let mut entries = vec![vec![crate::scalar::zero(); d]; d];
    for (v, _, _) in space.iter() {
        for (w, _, pw) in space.iter() {
            let lvw = pairing.value(v, w);
            if is_zero(lvw) {
                continue;
            }
            for i in 0..u {
                for j in 0..u {
                    let g = &gram[i][j];
                    if is_zero(g) {
                        continue;
                    }
                    // exchange: the first unit crosses the second letter
                    let sign = Sign::from_parity_product(unit_parities[i], pw + shift);
                    entries[v * u + i][w * u + j] = lvw * g * sign.scalar();
                }
            }
        }
    }
    let gram_parity = match alg {
        AlgebraKind::Gl { .. } => Parity::Even,
        AlgebraKind::Q { .. } => Parity::Odd,
    };
    let new_pairing = Pairing::new(&new_space, pairing.parity() + gram_parity, entries)?;
    Ok((new_space, new_pairing))
}

/// Unit labels, parities, and the Gram matrix of the trace pairing of the
/// algebra: supertrace pairs transposed units with `(-1)^{row}`, the odd
/// trace pairs the even and odd generators of matching transposed indices.
pub fn trace_unit_pairing(alg: AlgebraKind) -> (Vec<String>, Vec<Parity>, Vec<Vec<Scalar>>) {
    match alg {
        AlgebraKind::Gl { even, odd } => {
            let m = even + odd;
            let mut labels = Vec::new();
            let mut parities = Vec::new();
            for r in 0..m {
                for c in 0..m {
                    labels.push(format!("E[{r},{c}]"));
                    parities.push(alg.index_parity(r) + alg.index_parity(c));
                }
            }
            let u = labels.len();
            let mut gram = vec![vec![crate::scalar::zero(); u]; u];
            for r in 0..m {
                for c in 0..m {
                    let i = r * m + c;
                    let j = c * m + r;
                    let s = if alg.index_parity(r).is_odd() {
                        int(-1)
                    } else {
                        int(1)
                    };
                    gram[i][j] = s;
                }
            }
            (labels, parities, gram)
        }
        AlgebraKind::Q { n } => {
            let mut labels = Vec::new();
            let mut parities = Vec::new();
            for r in 0..n {
                for c in 0..n {
                    labels.push(format!("U[{r},{c}]"));
                    parities.push(Parity::Even);
                }
            }
            for r in 0..n {
                for c in 0..n {
                    labels.push(format!("W[{r},{c}]"));
                    parities.push(Parity::Odd);
                }
            }
            let u = labels.len();
            let sq = n * n;
            let mut gram = vec![vec![crate::scalar::zero(); u]; u];
            for r in 0..n {
                for c in 0..n {
                    let x_rc = r * n + c;
                    let y_cr = sq + c * n + r;
                    gram[x_rc][y_cr] = int(1);
                    gram[y_cr][x_rc] = int(1);
                }
            }
            (labels, parities, gram)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::WordAlgebra;

    fn v11() -> (GradedSpace, Pairing) {
        let v = GradedSpace::new(vec![
            ("x".into(), Parity::Even),
            ("t".into(), Parity::Odd),
        ])
        .unwrap();
        let l = Pairing::standard_odd(&v).unwrap();
        (v, l)
    }

    fn v22_even() -> (GradedSpace, Pairing) {
        let v = GradedSpace::standard(2, 2);
        let l = Pairing::standard_even(&v).unwrap();
        (v, l)
    }

    fn ctx_gl(n: usize) -> MatCtx {
        let (v, l) = v11();
        MatCtx::new(v, l, AlgebraKind::gl(n)).unwrap()
    }

    fn ctx_q(n: usize) -> MatCtx {
        let (v, l) = v22_even();
        MatCtx::new(v, l, AlgebraKind::q(n)).unwrap()
    }

    #[test]
    fn supertrace_of_identity_counts_signed_dimension() {
        let ctx = ctx_gl(2);
        let id = MatPoly::identity(ctx.idx_parities());
        assert!(id.supertrace().is_zero());
        let idx = vec![Parity::Even, Parity::Even];
        let id = MatPoly::identity(idx);
        assert_eq!(id.supertrace(), SPoly::constant(int(2)));
    }

    #[test]
    fn single_letter_trace_is_the_signed_diagonal() {
        let ctx = ctx_gl(1);
        let alg = WordAlgebra::new(ctx.space().clone(), Flavor::OddPairing);
        let (w, _) = alg.canonicalize(&[0]).unwrap().unwrap();
        let p = ctx.trace_word(&w);
        let a00 = ctx.var(Block::A, 0, 0, 0);
        let a11 = ctx.var(Block::A, 0, 1, 1);
        assert_eq!(p.coefficient(&Monomial::var(a00)), int(1));
        assert_eq!(p.coefficient(&Monomial::var(a11)), int(-1));
        assert_eq!(p.num_terms(), 2);
    }

    fn all_tuples(dim: usize, len: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|t| {
                    (0..dim).map(move |l| {
                        let mut t = t.clone();
                        t.push(l);
                        t
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn streamed_expansion_matches_matrix_products() {
        for n in 1..=2usize {
            let ctx = ctx_gl(n);
            for len in 1..=4usize {
                for t in all_tuples(ctx.space().dim(), len) {
                    let w = CyclicWord::from_letters(t);
                    assert_eq!(
                        ctx.trace_word(&w),
                        ctx.trace_word_by_products(&w),
                        "gl({n}|{n}) word {w}"
                    );
                }
            }
            let ctx = ctx_q(n);
            for len in 1..=3usize {
                for t in all_tuples(ctx.space().dim(), len) {
                    let w = CyclicWord::from_letters(t);
                    assert_eq!(
                        ctx.trace_word(&w),
                        ctx.trace_word_by_products(&w),
                        "q({n}) word {w}"
                    );
                }
            }
        }
    }

    #[test]
    fn odd_trace_reads_the_off_block() {
        // a generic single letter: the odd trace of its matrix is the
        // trace of the off-diagonal block
        let ctx = ctx_q(2);
        let m = ctx.letter_matrix(0);
        let tr = ctx.trace(&m);
        let mut expected = SPoly::zero();
        for i in 0..2 {
            expected = expected.add(&SPoly::var(ctx.var(Block::Y, 0, i, i)));
        }
        assert_eq!(tr, expected);
    }

    #[test]
    fn odd_trace_vanishes_on_commutators() {
        let ctx = ctx_q(2);
        let a = ctx.letter_matrix(0);
        // commutator of the generic letter with itself against a scalar
        // block element
        let mut g = MatPoly::zero(ctx.idx_parities());
        for (i, j, val) in [(0usize, 1usize, 2i64), (2, 3, 2), (1, 0, -1), (3, 2, -1)] {
            g.set_entry(i, j, SPoly::constant(int(val)));
        }
        let comm = g.commutator(&a, ctx.table()).unwrap();
        assert!(ctx.trace(&comm).is_zero());
    }

    #[test]
    fn delta_kills_linear_polynomials() {
        let ctx = ctx_gl(1);
        let p = SPoly::var(ctx.var(Block::A, 0, 0, 1)).add(&SPoly::one());
        assert!(ctx.delta(&p).is_zero());
    }

    #[test]
    fn delta_kills_adjacent_self_contraction() {
        // the trace of a two-letter word of paired letters contracts to
        // the trace of the identity, which vanishes for both trace
        // functionals
        for n in 1..=3usize {
            let ctx = ctx_gl(n);
            let t = ctx.trace_word(&CyclicWord::from_letters(vec![0, 1]));
            assert!(ctx.delta(&t).is_zero(), "gl({n}|{n})");
            let ctx = ctx_q(n);
            let t = ctx.trace_word(&CyclicWord::from_letters(vec![2, 3]));
            assert!(!t.is_zero(), "q({n}) probe degenerate");
            assert!(ctx.delta(&t).is_zero(), "q({n})");
        }
    }

    /// Scalar matrices forming a basis of the algebra acting adjointly.
    fn adjoint_basis(ctx: &MatCtx) -> Vec<MatPoly> {
        let mut out = Vec::new();
        match ctx.alg() {
            AlgebraKind::Gl { .. } => {
                let d = ctx.alg().matrix_dim();
                for a in 0..d {
                    for b in 0..d {
                        let mut g = MatPoly::zero(ctx.idx_parities());
                        g.set_entry(a, b, SPoly::one());
                        out.push(g);
                    }
                }
            }
            AlgebraKind::Q { n } => {
                for a in 0..n {
                    for b in 0..n {
                        let mut g = MatPoly::zero(ctx.idx_parities());
                        g.set_entry(a, b, SPoly::one());
                        g.set_entry(a + n, b + n, SPoly::one());
                        out.push(g);
                        let mut g = MatPoly::zero(ctx.idx_parities());
                        g.set_entry(a, b + n, SPoly::one());
                        g.set_entry(a + n, b, SPoly::constant(int(-1)));
                        out.push(g);
                    }
                }
            }
        }
        out
    }

    /// Graded commutator of the candidate operator with the adjoint
    /// derivation of `g`, applied to `p`.
    fn equivariance_residual(ctx: &MatCtx, rule: &DeltaRule, g: &MatPoly, p: &SPoly) -> SPoly {
        let gp = g.total_parity(ctx.table()).unwrap();
        let a = ctx
            .adjoint_derivation(g, &ctx.delta_with_rule(p, rule))
            .unwrap();
        let b = ctx.delta_with_rule(&ctx.adjoint_derivation(g, p).unwrap(), rule);
        if gp.is_odd() {
            b.add(&a)
        } else {
            b.sub(&a)
        }
    }

    #[test]
    fn adjoint_derivation_kills_traces_probe() {
        for (ctx, label) in [(ctx_gl(1), "gl"), (ctx_gl(2), "gl2")] {
            for len in 1..=4usize {
                for t in all_tuples(ctx.space().dim(), len) {
                    let tw = ctx.trace_word(&CyclicWord::from_letters(t.clone()));
                    for (gi, g) in adjoint_basis(&ctx).iter().enumerate() {
                        let r = ctx.adjoint_derivation(g, &tw).unwrap();
                        assert!(
                            r.is_zero(),
                            "{label} word {t:?} unit {gi}: residual {}",
                            r.render(ctx.table())
                        );
                    }
                }
            }
        }
        for (ctx, label) in [(ctx_q(1), "q1"), (ctx_q(2), "q2")] {
            for len in 1..=3usize {
                for t in all_tuples(ctx.space().dim(), len) {
                    let tw = ctx.trace_word(&CyclicWord::from_letters(t.clone()));
                    for (gi, g) in adjoint_basis(&ctx).iter().enumerate() {
                        let r = ctx.adjoint_derivation(g, &tw).unwrap();
                        assert!(
                            r.is_zero(),
                            "{label} word {t:?} unit {gi}: residual {}",
                            r.render(ctx.table())
                        );
                    }
                }
            }
        }
    }

    /// Sum of all trace polynomials up to `max_len` letters.
    fn trace_sum_probe(ctx: &MatCtx, max_len: usize) -> SPoly {
        let mut probe = SPoly::zero();
        for len in 1..=max_len {
            for t in all_tuples(ctx.space().dim(), len) {
                probe = probe.add(&ctx.trace_word(&CyclicWord::from_letters(t)));
            }
        }
        probe
    }

    /// Sum of squared trace probes: rich enough to see every contraction
    /// sector of the operator.
    fn squared_probe(ctx: &MatCtx, max_len: usize) -> SPoly {
        let probe = trace_sum_probe(ctx, max_len);
        probe.mul(&probe, ctx.table())
    }

    /// The anchor battery at the smallest block size, where the squared
    /// probe is affordable: adjacent self-contraction vanishes, the
    /// operator squares to zero, it commutes with every adjoint
    /// derivation, and it is nonzero.
    fn rule_passes_small_anchors(ctx: &MatCtx, rule: &DeltaRule, adjacent: &[usize]) -> bool {
        let max_len = if matches!(ctx.alg(), AlgebraKind::Gl { .. }) {
            3
        } else {
            2
        };
        let probe = squared_probe(ctx, max_len);
        let adj = ctx
            .delta_with_rule(
                &ctx.trace_word(&CyclicWord::from_letters(adjacent.to_vec())),
                rule,
            )
            .is_zero();
        let d1 = ctx.delta_with_rule(&probe, rule);
        let squares = ctx.delta_with_rule(&d1, rule).is_zero();
        let equi = adjoint_basis(ctx)
            .iter()
            .all(|g| equivariance_residual(ctx, rule, g, &probe).is_zero());
        adj && squares && equi && !d1.is_zero()
    }

    /// The anchors repeated at the next block size on the unsquared probe,
    /// where index parities genuinely mix: adjacent self-contraction and
    /// equivariance (the nonvanishing check stays at the small size).
    fn rule_passes_large_anchors(ctx: &MatCtx, rule: &DeltaRule, adjacent: &[usize]) -> bool {
        let probe = trace_sum_probe(ctx, 3);
        let adj = ctx
            .delta_with_rule(
                &ctx.trace_word(&CyclicWord::from_letters(adjacent.to_vec())),
                rule,
            )
            .is_zero();
        let equi = adjoint_basis(ctx)
            .iter()
            .all(|g| equivariance_residual(ctx, rule, g, &probe).is_zero());
        adj && equi
    }

    #[test]
    fn supertrace_delta_sign_pattern_is_pinned_by_anchors() {
        // of the sixteen sign patterns, exactly the implemented exponent
        // `row + letter(nu)*(row+col)` and its mirror written from the
        // other end of the pair kill adjacent self-contractions, commute
        // with every adjoint derivation, square to zero, and stay nonzero
        // on a squared probe
        let bits = [false, true];
        let mut survivors = Vec::new();
        for row_bit in bits {
            for col_bit in bits {
                for nu_bit in bits {
                    for kappa_bit in bits {
                        let rule = DeltaRule {
                            row_bit,
                            col_bit,
                            nu_bit,
                            kappa_bit,
                            xy_minus: false,
                            yx_minus: false,
                        };
                        if rule_passes_small_anchors(&ctx_gl(1), &rule, &[0, 1])
                            && rule_passes_large_anchors(&ctx_gl(2), &rule, &[0, 1])
                        {
                            survivors.push((row_bit, col_bit, nu_bit, kappa_bit));
                        }
                    }
                }
            }
        }
        assert_eq!(
            survivors,
            vec![(false, true, false, true), (true, false, true, false)]
        );
        let p = &PINNED_GL_RULE;
        assert!(survivors.contains(&(p.row_bit, p.col_bit, p.nu_bit, p.kappa_bit)));
    }

    #[test]
    fn odd_trace_delta_sign_pattern_family_and_pin() {
        // the anchors cut the sixteen patterns down to the four with equal
        // direction signs and opposite letter bits (the two contraction
        // directions then reinforce on every letter parity; equal letter
        // bits silently zero out the odd-letter sector, which the
        // odd-letter probe rules out); within the four, which
        // normalization matches the combinatorial operator is decided by
        // the expansion correspondence, not here
        let bits = [false, true];
        // a product of two traces drawn from the odd letters only (one
        // factor per trace, not a symmetrized square, which would vanish
        // because every all-odd-letter trace is odd here): its image is
        // the pure odd-sector join, so rules blind to odd letters die
        let ctx1 = ctx_q(1);
        let odd_probe = ctx1
            .trace_word(&CyclicWord::from_letters(vec![2]))
            .mul(
                &ctx1.trace_word(&CyclicWord::from_letters(vec![2, 3])),
                ctx1.table(),
            );
        let mut survivors = Vec::new();
        for nu_bit in bits {
            for kappa_bit in bits {
                for xy_minus in bits {
                    for yx_minus in bits {
                        let rule = DeltaRule {
                            row_bit: false,
                            col_bit: false,
                            nu_bit,
                            kappa_bit,
                            xy_minus,
                            yx_minus,
                        };
                        // adjacent probe: the two-letter word of paired odd
                        // letters
                        if rule_passes_small_anchors(&ctx1, &rule, &[2, 3])
                            && !ctx1.delta_with_rule(&odd_probe, &rule).is_zero()
                            && rule_passes_large_anchors(&ctx_q(2), &rule, &[2, 3])
                        {
                            survivors.push((nu_bit, kappa_bit, xy_minus, yx_minus));
                        }
                    }
                }
            }
        }
        assert_eq!(
            survivors,
            vec![
                (false, true, false, false),
                (false, true, true, true),
                (true, false, false, false),
                (true, false, true, true),
            ]
        );
        let p = &PINNED_Q_RULE;
        assert!(survivors.contains(&(p.nu_bit, p.kappa_bit, p.xy_minus, p.yx_minus)));
    }

    #[test]
    fn expansion_respects_rotation_and_zero_words() {
        // the trace of any spelling equals the rotation sign times the
        // trace of the canonical spelling, and spellings that cancel to
        // zero as words expand to the zero polynomial
        let cases: Vec<(MatCtx, usize)> = vec![
            (ctx_gl(1), 4),
            (ctx_gl(2), 3),
            (ctx_q(1), 3),
            (ctx_q(2), 3),
        ];
        for (ctx, max_len) in cases {
            let alg = WordAlgebra::new(ctx.space().clone(), ctx.alg().flavor());
            for len in 1..=max_len {
                for t in all_tuples(ctx.space().dim(), len) {
                    let tr = ctx.trace_word(&CyclicWord::from_letters(t.clone()));
                    match alg.canonicalize(&t).unwrap() {
                        None => {
                            assert!(tr.is_zero(), "{} word {t:?}", ctx.alg());
                        }
                        Some((w, s)) => {
                            let canon = ctx.trace_word(&w).scale(&s.scalar());
                            assert_eq!(tr, canon, "{} word {t:?}", ctx.alg());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn expansion_preserves_word_parity() {
        // nonzero trace polynomials are parity-homogeneous of exactly the
        // word parity, so the expansion map preserves parity
        for (ctx, max_len) in [(ctx_gl(1), 4), (ctx_gl(2), 3), (ctx_q(1), 3), (ctx_q(2), 3)] {
            let alg = WordAlgebra::new(ctx.space().clone(), ctx.alg().flavor());
            for len in 1..=max_len {
                for w in alg.canonical_words(len) {
                    let tr = ctx.trace_word(&w);
                    if tr.is_zero() {
                        continue;
                    }
                    assert_eq!(
                        tr.parity(ctx.table()),
                        Some(alg.word_parity(&w)),
                        "{} word {w}",
                        ctx.alg()
                    );
                }
            }
        }
    }

    #[test]
    fn delta_squares_to_zero() {
        let ctx = ctx_gl(2);
        let sq = ctx.delta(&ctx.delta(&squared_probe(&ctx, 3)));
        assert!(sq.is_zero());
        let ctx = ctx_q(2);
        let sq = ctx.delta(&ctx.delta(&squared_probe(&ctx, 2)));
        assert!(sq.is_zero());
    }

    #[test]
    fn bracket_of_anything_with_one_vanishes() {
        let ctx = ctx_gl(1);
        let t = ctx.trace_word(
            &WordAlgebra::new(ctx.space().clone(), Flavor::OddPairing)
                .canonicalize(&[0, 1])
                .unwrap()
                .unwrap()
                .0,
        );
        assert!(ctx.bracket(&t, &SPoly::one()).is_zero());
        assert!(ctx.bracket(&SPoly::one(), &t).is_zero());
    }

    #[test]
    fn tensor_pairing_parities() {
        let (v, l) = v11();
        let (tv, tl) = tensor_with_trace_algebra(&v, &l, AlgebraKind::gl(1)).unwrap();
        assert_eq!(tv.dim(), 8);
        assert_eq!(tl.parity(), Parity::Odd);
        let (_, tl) = tensor_with_trace_algebra(&v, &l, AlgebraKind::q(1)).unwrap();
        assert_eq!(tl.parity(), Parity::Even);
    }
}
