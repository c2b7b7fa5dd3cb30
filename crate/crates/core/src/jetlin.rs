//! Exact linear algebra on truncated jet spaces.
//!
//! Columns are ordered by degree first, so an echelon basis built with
//! "leading entry = lowest column" answers every lower truncation at once:
//! the rank of the projection to degree `<= d` is the number of pivots in
//! degree `<= d`.

use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::ring::{monomials_in_range, monomials_of_degree, Monomial, Polynomial};

/// Sparse vector, sorted by column, no zero entries.
pub type SparseVec = Vec<(usize, Rational)>;

/// Truncated module `O_q^m / m^{k+1}` (or its maximal-ideal part).
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    components: usize,
    max_degree: u32,
    include_constants: bool,
    basis: Vec<(usize, Monomial)>,
    index: HashMap<(usize, Monomial), usize>,
    /// `degree_end[d]` = number of columns of degree `<= d`.
    degree_end: Vec<usize>,
}

impl JetSpace {
    pub fn new(nvars: usize, components: usize, max_degree: u32, include_constants: bool) -> Arc<Self> {
        let lo = if include_constants { 0 } else { 1 };
        let mut basis = Vec::new();
        let mut degree_end = vec![0; max_degree as usize + 1];
        for d in lo..=max_degree {
            let monos = monomials_of_degree(nvars, d);
            for c in 0..components {
                for m in &monos {
                    basis.push((c, m.clone()));
                }
            }
            degree_end[d as usize] = basis.len();
        }
        let index = basis.iter().enumerate().map(|(i, b)| (b.clone(), i)).collect();
        Arc::new(JetSpace { nvars, components, max_degree, include_constants, basis, index, degree_end })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn include_constants(&self) -> bool {
        self.include_constants
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(usize, Monomial)] {
        &self.basis
    }

    pub fn column(&self, comp: usize, m: &Monomial) -> Option<usize> {
        self.index.get(&(comp, m.clone())).copied()
    }

    pub fn column_degree(&self, c: usize) -> u32 {
        self.basis[c].1.degree()
    }

    /// Number of columns of degree at most `d`.
    pub fn dim_up_to(&self, d: u32) -> usize {
        if d >= self.max_degree {
            return self.dim();
        }
        self.degree_end[d as usize]
    }

    /// Encodes a section, dropping terms above the truncation degree.
    pub fn encode(&self, comps: &[Polynomial]) -> Result<SparseVec> {
        if comps.len() != self.components {
            return Err(Error::Dimension(format!(
                "vector with {} components in a {}-component jet space",
                comps.len(),
                self.components
            )));
        }
        let mut v = Vec::new();
        for (j, p) in comps.iter().enumerate() {
            if p.nvars() != self.nvars {
                return Err(Error::Dimension(format!(
                    "component in {} variables, jet space in {}",
                    p.nvars(),
                    self.nvars
                )));
            }
            for (m, c) in p.terms() {
                if m.degree() > self.max_degree {
                    break;
                }
                match self.column(j, m) {
                    Some(col) => v.push((col, c.clone())),
                    None => {
                        return Err(Error::Dimension(
                            "constant term in a jet space without constants".into(),
                        ))
                    }
                }
            }
        }
        v.sort_by_key(|e| e.0);
        Ok(v)
    }

    /// Encodes `shift * p` placed in component `comp`, truncated.
    pub fn encode_shifted(&self, comp: usize, p: &Polynomial, shift: &Monomial, coeff: &Rational, out: &mut Vec<(usize, Rational)>) {
        let sd = shift.degree();
        for (m, c) in p.terms() {
            if m.degree() + sd > self.max_degree {
                break;
            }
            let mm = m.mul(shift);
            if let Some(col) = self.column(comp, &mm) {
                out.push((col, c * coeff));
            }
        }
    }

    pub fn decode(&self, v: &[(usize, Rational)]) -> Vec<Polynomial> {
        let mut out = vec![Polynomial::zero(self.nvars); self.components];
        for (c, a) in v {
            let (j, m) = &self.basis[*c];
            out[*j].add_term(m.clone(), a);
        }
        out
    }

    /// Position of each column in the component-major order
    /// (component, then degree, then monomial order).
    pub fn component_major_rank(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = (0..self.dim()).collect();
        cols.sort_by(|&a, &b| {
            let (ja, ma) = &self.basis[a];
            let (jb, mb) = &self.basis[b];
            ja.cmp(jb).then_with(|| ma.cmp(mb))
        });
        let mut rank = vec![0; self.dim()];
        for (pos, c) in cols.into_iter().enumerate() {
            rank[c] = pos;
        }
        rank
    }
}

/// Sorts and merges duplicate columns, dropping zeros.
pub fn normalize(mut v: Vec<(usize, Rational)>) -> SparseVec {
    v.sort_by_key(|e| e.0);
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (c, a) in v {
        match out.last_mut() {
            Some((lc, la)) if *lc == c => *la += &a,
            _ => out.push((c, a)),
        }
        if out.last().is_some_and(|(_, a)| a.is_zero()) {
            out.pop();
        }
    }
    out
}

pub fn axpy(y: &SparseVec, a: &Rational, x: &SparseVec) -> SparseVec {
    let mut merged: Vec<(usize, Rational)> = y.clone();
    merged.extend(x.iter().map(|(c, v)| (*c, v * a)));
    normalize(merged)
}

struct Scratch {
    vals: Vec<Rational>,
    mark: Vec<bool>,
    heap: BinaryHeap<Reverse<usize>>,
}

impl Scratch {
    fn ensure(&mut self, n: usize) {
        if self.vals.len() < n {
            self.vals.resize(n, Rational::zero());
            self.mark.resize(n, false);
        }
    }

    fn touch(&mut self, c: usize) {
        if !self.mark[c] {
            self.mark[c] = true;
            self.heap.push(Reverse(c));
        }
    }

    fn drain(&mut self) -> SparseVec {
        let mut out = Vec::with_capacity(self.heap.len());
        while let Some(Reverse(c)) = self.heap.pop() {
            self.mark[c] = false;
            let v = std::mem::take(&mut self.vals[c]);
            if !v.is_zero() {
                out.push((c, v));
            }
        }
        out
    }
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = const { RefCell::new(Scratch { vals: Vec::new(), mark: Vec::new(), heap: BinaryHeap::new() }) };
}

/// Incremental semi-echelon basis. Each stored row has leading entry 1 at
/// its pivot column and no entries to the left of it.
#[derive(Clone, Debug)]
pub struct Echelon {
    ncols: usize,
    rows: Vec<Option<SparseVec>>,
    rank: usize,
}

pub enum Reduced {
    /// The vector lies in the span.
    Zero,
    /// Leading column of the remainder and the remainder itself.
    Leading(usize, SparseVec),
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon { ncols, rows: vec![None; ncols], rank: 0 }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.rows[c].is_some()
    }

    pub fn row(&self, c: usize) -> Option<&SparseVec> {
        self.rows[c].as_ref()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().enumerate().filter(|(_, r)| r.is_some()).map(|(c, _)| c)
    }

    /// Number of pivots in columns `< limit`.
    pub fn rank_below(&self, limit: usize) -> usize {
        self.rows[..limit.min(self.ncols)].iter().filter(|r| r.is_some()).count()
    }

    /// Eliminates leading entries in columns `< limit` as long as pivots
    /// exist there. With `stop_early`, gives up as soon as a leading column
    /// without pivot is hit (then the returned vector is not meaningful).
    fn reduce_impl(&self, v: &[(usize, Rational)], limit: usize, stop_early: bool) -> Reduced {
        SCRATCH.with(|s| {
            let mut s = s.borrow_mut();
            s.ensure(self.ncols);
            for (c, a) in v {
                debug_assert!(*c < self.ncols);
                let cur = std::mem::take(&mut s.vals[*c]);
                s.vals[*c] = &cur + a;
                s.touch(*c);
            }
            let mut leading = None;
            while let Some(&Reverse(c)) = s.heap.peek() {
                if s.vals[c].is_zero() {
                    s.heap.pop();
                    s.mark[c] = false;
                    continue;
                }
                if c >= limit {
                    leading = Some(c);
                    break;
                }
                match &self.rows[c] {
                    Some(row) => {
                        s.heap.pop();
                        s.mark[c] = false;
                        let f = std::mem::take(&mut s.vals[c]);
                        for (j, a) in &row[1..] {
                            let cur = std::mem::take(&mut s.vals[*j]);
                            s.vals[*j] = &cur - &(&f * a);
                            s.touch(*j);
                        }
                    }
                    None => {
                        leading = Some(c);
                        break;
                    }
                }
            }
            let _ = stop_early;
            let rest = s.drain();
            match leading {
                None => Reduced::Zero,
                Some(c) => Reduced::Leading(c, rest),
            }
        })
    }

    pub fn reduce(&self, v: &[(usize, Rational)]) -> Reduced {
        self.reduce_impl(v, self.ncols, false)
    }

    /// Reduces leading entries only in columns `< limit`.
    pub fn reduce_below(&self, v: &[(usize, Rational)], limit: usize) -> Reduced {
        self.reduce_impl(v, limit, false)
    }

    /// Canonical remainder: every pivot column is eliminated, so the map
    /// `v -> normal_form(v)` is linear with kernel the span.
    pub fn normal_form(&self, v: &[(usize, Rational)]) -> SparseVec {
        SCRATCH.with(|s| {
            let mut s = s.borrow_mut();
            s.ensure(self.ncols);
            for (c, a) in v {
                let cur = std::mem::take(&mut s.vals[*c]);
                s.vals[*c] = &cur + a;
                s.touch(*c);
            }
            let mut out = Vec::new();
            while let Some(Reverse(c)) = s.heap.pop() {
                s.mark[c] = false;
                let f = std::mem::take(&mut s.vals[c]);
                if f.is_zero() {
                    continue;
                }
                match &self.rows[c] {
                    Some(row) => {
                        for (j, a) in &row[1..] {
                            let cur = std::mem::take(&mut s.vals[*j]);
                            s.vals[*j] = &cur - &(&f * a);
                            s.touch(*j);
                        }
                    }
                    // Later rows start to the right of `c`, so this entry is final.
                    None => out.push((c, f)),
                }
            }
            out
        })
    }

    pub fn contains(&self, v: &[(usize, Rational)]) -> bool {
        matches!(self.reduce_impl(v, self.ncols, true), Reduced::Zero)
    }

    /// Adds a vector; returns its new pivot column if it was independent.
    pub fn insert(&mut self, v: &[(usize, Rational)]) -> Option<usize> {
        match self.reduce(v) {
            Reduced::Zero => None,
            Reduced::Leading(c, rest) => {
                self.store(c, rest);
                Some(c)
            }
        }
    }

    fn store(&mut self, c: usize, rest: SparseVec) {
        debug_assert_eq!(rest[0].0, c);
        let inv = rest[0].1.recip();
        let row: SparseVec = if inv.is_one() {
            rest
        } else {
            rest.into_iter().map(|(j, a)| (j, &a * &inv)).collect()
        };
        self.rows[c] = Some(row);
        self.rank += 1;
    }

    /// Inserts a row already in reduced form (leading column without pivot).
    pub fn insert_reduced(&mut self, c: usize, rest: SparseVec) {
        assert!(self.rows[c].is_none());
        self.store(c, rest);
    }

    /// Fully reduced rows, pivots cleared above and below, by pivot column.
    pub fn rref(&self) -> Vec<(usize, SparseVec)> {
        let mut done: Vec<Option<SparseVec>> = vec![None; self.ncols];
        let pivots: Vec<usize> = self.pivots().collect();
        for &c in pivots.iter().rev() {
            let row = self.rows[c].as_ref().unwrap();
            let mut acc: std::collections::BTreeMap<usize, Rational> = row.iter().cloned().collect();
            let cols: Vec<usize> = row[1..].iter().map(|e| e.0).filter(|&j| done[j].is_some()).collect();
            // Reduced rows only carry non-pivot columns, so one pass suffices.
            for j in cols {
                let f = match acc.get(&j) {
                    Some(f) => f.clone(),
                    None => continue,
                };
                for (t, a) in done[j].as_ref().unwrap() {
                    let e = acc.entry(*t).or_default();
                    *e = &*e - &(&f * a);
                    if e.is_zero() {
                        acc.remove(t);
                    }
                }
            }
            done[c] = Some(acc.into_iter().collect());
        }
        pivots.into_iter().map(|c| (c, done[c].take().unwrap())).collect()
    }
}

/// Echelonized span inside a jet space.
#[derive(Clone, Debug)]
pub struct Subspace {
    ambient: Arc<JetSpace>,
    rows: Vec<(usize, SparseVec)>,
    echelon: Echelon,
}

impl Subspace {
    pub fn ambient(&self) -> &Arc<JetSpace> {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduced row-echelon rows.
    pub fn rows(&self) -> &[(usize, SparseVec)] {
        &self.rows
    }

    pub fn contains(&self, v: &[(usize, Rational)]) -> bool {
        self.echelon.contains(v)
    }

    pub fn echelon(&self) -> &Echelon {
        &self.echelon
    }

    pub fn from_echelon(ambient: Arc<JetSpace>, echelon: Echelon) -> Self {
        let rows = echelon.rref();
        Subspace { ambient, rows, echelon }
    }
}

fn check_vec(ambient: &JetSpace, v: &[(usize, Rational)]) -> Result<()> {
    if v.iter().any(|(c, _)| *c >= ambient.dim()) {
        return Err(Error::Dimension(format!("vector outside the {}-dimensional ambient", ambient.dim())));
    }
    Ok(())
}

pub fn span(ambient: &Arc<JetSpace>, vectors: &[SparseVec]) -> Result<Subspace> {
    let mut e = Echelon::new(ambient.dim());
    for v in vectors {
        check_vec(ambient, v)?;
        e.insert(v);
    }
    Ok(Subspace::from_echelon(ambient.clone(), e))
}

/// Quotient dimension `dim A - dim B` with a cobasis of `A/B`.
pub fn nested_quotient_dim(a: &Subspace, b: &Subspace) -> Result<(usize, Vec<SparseVec>)> {
    if !Arc::ptr_eq(&a.ambient, &b.ambient) && a.ambient.dim() != b.ambient.dim() {
        return Err(Error::Dimension("subspaces of different ambients".into()));
    }
    for (_, r) in &b.rows {
        if !a.contains(r) {
            return Err(Error::Inconsistent("B is not contained in A".into()));
        }
    }
    let cob = quotient_cobasis(&a.ambient, a.echelon(), b.echelon());
    Ok((a.dim() - b.dim(), cob))
}

/// Re-echelonizes `e` so that leading entries are the last columns in
/// component-major order. The complement of its pivots is what a greedy
/// scan over ambient basis vectors in component-major order picks.
fn reorder_component_major(amb: &JetSpace, e: &Echelon, rank: &[usize]) -> Echelon {
    let n = amb.dim();
    let mut out = Echelon::new(n);
    let mut rows: Vec<SparseVec> = e
        .pivots()
        .map(|c| normalize(e.row(c).unwrap().iter().map(|(j, a)| (n - 1 - rank[*j], a.clone())).collect()))
        .collect();
    rows.sort_by_key(|r| r.len());
    for r in rows {
        out.insert(&r);
    }
    out
}

/// Representatives of `A/B` (`B` inside `A`), chosen greedily over the
/// ambient basis in component-major order. Unit vectors are used whenever
/// they lie in `A`; otherwise the `A`-row with that leading column.
pub fn quotient_cobasis(amb: &JetSpace, a: &Echelon, b: &Echelon) -> Vec<SparseVec> {
    let n = amb.dim();
    let rank = amb.component_major_rank();
    let mut inv = vec![0; n];
    for (c, &r) in rank.iter().enumerate() {
        inv[n - 1 - r] = c;
    }
    let ra = reorder_component_major(amb, a, &rank);
    let rb = reorder_component_major(amb, b, &rank);
    let mut picks: Vec<usize> = ra.pivots().filter(|&c| !rb.is_pivot(c)).collect();
    // Ascending component-major position.
    picks.reverse();
    picks
        .into_iter()
        .map(|pc| {
            let col = inv[pc];
            let unit = vec![(col, Rational::one())];
            if a.contains(&unit) {
                unit
            } else {
                normalize(ra.row(pc).unwrap().iter().map(|(j, v)| (inv[*j], v.clone())).collect())
            }
        })
        .collect()
}

/// Ambient basis vectors complementing `A`, greedy in component-major order.
pub fn normal_cobasis(amb: &JetSpace, a: &Echelon) -> Vec<usize> {
    let n = amb.dim();
    let rank = amb.component_major_rank();
    let mut inv = vec![0; n];
    for (c, &r) in rank.iter().enumerate() {
        inv[n - 1 - r] = c;
    }
    let ra = reorder_component_major(amb, a, &rank);
    let mut out: Vec<usize> = (0..n).rev().filter(|&pc| !ra.is_pivot(pc)).map(|pc| inv[pc]).collect();
    out.sort_by_key(|&c| rank[c]);
    out
}

/// Non-pivot columns of `a` in degree `<= d`: the standard monomials
/// with respect to the local degree order.
pub fn standard_cobasis(amb: &JetSpace, a: &Echelon, d: u32) -> Vec<usize> {
    (0..amb.dim_up_to(d)).filter(|&c| !a.is_pivot(c)).collect()
}

/// Coefficients `c` with `sum c_i v_i = target`, or `None`.
pub fn linear_solve(ncols: usize, vectors: &[SparseVec], target: &[(usize, Rational)]) -> Result<Option<Vec<Rational>>> {
    let m = vectors.len();
    if vectors.iter().chain(std::iter::once(&target.to_vec())).any(|v| v.iter().any(|(c, _)| *c >= ncols)) {
        return Err(Error::Dimension("vector outside the ambient".into()));
    }
    let mut e = Echelon::new(ncols + m);
    for (i, v) in vectors.iter().enumerate() {
        let mut w = v.clone();
        w.push((ncols + i, Rational::one()));
        e.insert(&w);
    }
    match e.reduce_below(target, ncols) {
        Reduced::Zero => Ok(Some(vec![Rational::zero(); m])),
        Reduced::Leading(c, rest) if c >= ncols => {
            let mut coeffs = vec![Rational::zero(); m];
            for (j, a) in rest {
                coeffs[j - ncols] = -a;
            }
            Ok(Some(coeffs))
        }
        Reduced::Leading(..) => Ok(None),
    }
}

/// Basis of `{c : sum c_i v_i = 0}`.
pub fn kernel(ncols: usize, vectors: &[SparseVec]) -> Vec<Vec<Rational>> {
    let m = vectors.len();
    let mut e = Echelon::new(ncols + m);
    let mut out = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        let mut w = v.clone();
        w.push((ncols + i, Rational::one()));
        if let Some(c) = e.insert(&w) {
            if c >= ncols {
                let row = e.row(c).unwrap();
                let mut k = vec![Rational::zero(); m];
                for (j, a) in row {
                    k[j - ncols] = a.clone();
                }
                out.push(k);
            }
        }
    }
    out
}

/// Evaluates `sum c_i v_i`.
pub fn combine(vectors: &[SparseVec], coeffs: &[Rational]) -> SparseVec {
    let mut all = Vec::new();
    for (v, c) in vectors.iter().zip(coeffs) {
        if c.is_zero() {
            continue;
        }
        all.extend(v.iter().map(|(j, a)| (*j, a * c)));
    }
    normalize(all)
}

/// Monomial multiples of module generators, truncated into `amb`.
pub fn module_multiples(amb: &JetSpace, gens: &[Vec<Polynomial>]) -> Vec<SparseVec> {
    let k = amb.max_degree();
    let n = amb.nvars();
    let mut out = Vec::new();
    for g in gens {
        let ord = g.iter().filter_map(|p| p.order()).min();
        let Some(ord) = ord else { continue };
        if ord > k {
            continue;
        }
        for m in monomials_in_range(n, 0, k - ord) {
            let mut v = Vec::new();
            for (j, p) in g.iter().enumerate() {
                amb.encode_shifted(j, p, &m, &Rational::one(), &mut v);
            }
            let v = normalize(v);
            if !v.is_empty() {
                out.push(v);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn span_examples() {
        let amb = JetSpace::new(2, 1, 1, false);
        assert_eq!(amb.dim(), 2);
        let s = span(&amb, &[vec![(0, r(1))], vec![(0, r(1)), (1, r(1))]]).unwrap();
        assert_eq!(s.dim(), 2);
        let v = vec![(0, r(3)), (1, r(-1))];
        let v2 = vec![(0, r(6)), (1, r(-2))];
        assert_eq!(span(&amb, &[v, v2]).unwrap().dim(), 1);
        assert_eq!(span(&amb, &[]).unwrap().dim(), 0);
        assert!(span(&amb, &[vec![(5, r(1))]]).is_err());
    }

    #[test]
    fn nested_examples() {
        let amb = JetSpace::new(1, 1, 5, false);
        let all: Vec<SparseVec> = (0..5).map(|c| vec![(c, r(1))]).collect();
        let a = span(&amb, &all).unwrap();
        assert_eq!(nested_quotient_dim(&a, &a).unwrap().0, 0);
        let b = span(&amb, &all[..3]).unwrap();
        let (d, cob) = nested_quotient_dim(&a, &b).unwrap();
        assert_eq!(d, 2);
        assert_eq!(cob.len(), 2);
        assert!(nested_quotient_dim(&b, &a).is_err());
    }

    #[test]
    fn solve_examples() {
        let vs = vec![vec![(0, r(1)), (1, r(2))], vec![(1, r(1)), (2, r(1))]];
        let t = vec![(0, r(2)), (1, r(5)), (2, r(1))];
        let c = linear_solve(3, &vs, &t).unwrap().unwrap();
        assert_eq!(combine(&vs, &c), t);
        assert_eq!(linear_solve(3, &vs, &[]).unwrap().unwrap(), vec![r(0), r(0)]);
        assert!(linear_solve(3, &vs, &[(2, r(1))]).unwrap().is_none());
    }

    #[test]
    fn kernel_basic() {
        let vs = vec![vec![(0, r(1))], vec![(1, r(1))], vec![(0, r(2)), (1, r(-3))]];
        let k = kernel(2, &vs);
        assert_eq!(k.len(), 1);
        assert!(combine(&vs, &k[0]).is_empty());
    }

    fn arb_vecs() -> impl Strategy<Value = Vec<SparseVec>> {
        prop::collection::vec(prop::collection::vec((0usize..8, -3i64..4), 0..5), 0..7)
            .prop_map(|vs| vs.into_iter().map(|v| normalize(v.into_iter().map(|(c, a)| (c, r(a))).collect())).collect())
    }

    proptest! {
        #[test]
        fn rref_is_canonical(vs in arb_vecs()) {
            let amb = JetSpace::new(1, 1, 8, false);
            let s = span(&amb, &vs).unwrap();
            let again = span(&amb, &s.rows().iter().map(|r| r.1.clone()).collect::<Vec<_>>()).unwrap();
            prop_assert_eq!(s.rows(), again.rows());
            // cleared above and below
            for (c, row) in s.rows() {
                prop_assert!(row[0].0 == *c && row[0].1.is_one());
                for (c2, _) in s.rows() {
                    if c2 != c {
                        prop_assert!(row.iter().all(|(j, _)| j != c2));
                    }
                }
            }
        }

        #[test]
        fn order_independent(vs in arb_vecs()) {
            let amb = JetSpace::new(1, 1, 8, false);
            let mut rev = vs.clone();
            rev.reverse();
            let (a, b) = (span(&amb, &vs).unwrap(), span(&amb, &rev).unwrap());
            prop_assert_eq!(a.rows(), b.rows());
        }

        #[test]
        fn quotient_arithmetic(vs in arb_vecs(), cut in 0usize..7) {
            let amb = JetSpace::new(1, 1, 8, false);
            let cut = cut.min(vs.len());
            let a = span(&amb, &vs).unwrap();
            let b = span(&amb, &vs[..cut]).unwrap();
            let (d, cob) = nested_quotient_dim(&a, &b).unwrap();
            prop_assert_eq!(d + b.dim(), a.dim());
            prop_assert_eq!(cob.len(), d);
            let mut all: Vec<SparseVec> = b.rows().iter().map(|r| r.1.clone()).collect();
            all.extend(cob.iter().cloned());
            prop_assert_eq!(span(&amb, &all).unwrap().dim(), a.dim());
            for c in &cob {
                prop_assert!(a.contains(c));
            }
        }

        #[test]
        fn solve_iff_member(vs in arb_vecs(), t in prop::collection::vec((0usize..8, -3i64..4), 0..4)) {
            let t = normalize(t.into_iter().map(|(c, a)| (c, r(a))).collect());
            let amb = JetSpace::new(1, 1, 8, false);
            let s = span(&amb, &vs).unwrap();
            match linear_solve(8, &vs, &t).unwrap() {
                Some(c) => prop_assert_eq!(combine(&vs, &c), t),
                None => prop_assert!(!s.contains(&t)),
            }
        }
    }
}
