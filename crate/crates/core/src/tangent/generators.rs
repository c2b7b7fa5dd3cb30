use std::collections::HashMap;
use std::sync::Arc;

use crate::germ::{MapGerm, Side, VectorField};
use crate::jetlin::{normalize, JetSpace, SparseVec};
use crate::rational::Rational;
use crate::ring::{binomial, monomials_in_range, monomials_of_degree, Exp, Monomial, Polynomial};

use super::{GroupSpec, VolumeSide};

/// One term `c * y^beta d/dy_i` of a polynomial vector field.
pub(crate) type FieldTerm = (usize, Monomial, Rational);

/// Homogeneous divergence-free fields of degree `d` in `q` variables as
/// lists of monomial terms: `y^beta d_i` with `beta_i = 0`, and
/// `-h_{y_j} d_1 + h_{y_1} d_j` for monomials `h` of degree `d + 1`.
pub(crate) fn divergence_free_terms(q: usize, d: u32, keep: &dyn Fn(&Monomial) -> bool) -> Vec<Vec<FieldTerm>> {
    let mut out = Vec::new();
    for beta in monomials_of_degree(q, d) {
        if !keep(&beta) {
            continue;
        }
        for i in 0..q {
            if beta.exps()[i] == 0 {
                out.push(vec![(i, beta.clone(), Rational::one())]);
            }
        }
    }
    if q >= 2 {
        for h in monomials_of_degree(q, d + 1) {
            let e = h.exps();
            if e[0] == 0 {
                continue;
            }
            for j in 1..q {
                if e[j] == 0 {
                    continue;
                }
                let (cj, hj) = h.derive(j).unwrap();
                let (c1, h1) = h.derive(0).unwrap();
                if !keep(&hj) && !keep(&h1) {
                    continue;
                }
                out.push(vec![
                    (0, hj, Rational::from_int(-(cj as i64))),
                    (j, h1, Rational::from_int(c1 as i64)),
                ]);
            }
        }
    }
    out
}

/// Basis of the homogeneous divergence-free fields of degree `d`.
pub fn divergence_free_basis(q: usize, d: u32, side: Side) -> Vec<VectorField> {
    divergence_free_terms(q, d, &|_| true)
        .into_iter()
        .map(|terms| {
            let mut comps = vec![Polynomial::zero(q); q];
            for (i, m, c) in terms {
                comps[i].add_term(m, &c);
            }
            VectorField::new(side, comps)
        })
        .collect()
}

/// Closed form `(q-1) C(q+d-1, d) + C(q+d-2, d)`.
pub fn divergence_free_dim(q: usize, d: u32) -> u64 {
    let (q, d) = (q as u64, d as u64);
    if q == 0 {
        return 0;
    }
    (q - 1) * binomial(q + d - 1, d) + binomial(q + d - 2, d)
}

/// Generator families of `LG f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Source,
    SourceDivFree,
    Target,
    TargetDivFree,
    Matrix,
    MatrixTraceFree,
}

/// Builds truncated images of monomial generators inside one jet space.
pub struct GeneratorBuilder<'a> {
    f: &'a MapGerm,
    amb: Arc<JetSpace>,
    jac: Vec<Vec<Polynomial>>,
    /// Orders of the components; `None` for a zero component.
    orders: Vec<Option<u32>>,
    powers: HashMap<Monomial, Polynomial>,
}

impl<'a> GeneratorBuilder<'a> {
    pub fn new(f: &'a MapGerm, amb: Arc<JetSpace>) -> Self {
        assert_eq!(amb.components(), f.p());
        assert_eq!(amb.nvars(), f.n());
        let jac = f.jacobian();
        let orders = f.components().iter().map(|c| c.order()).collect();
        GeneratorBuilder { f, amb, jac, orders, powers: HashMap::new() }
    }

    pub fn ambient(&self) -> &Arc<JetSpace> {
        &self.amb
    }

    fn k(&self) -> u32 {
        self.amb.max_degree()
    }

    /// `tf(x^alpha d_i)`.
    pub fn source_image(&self, i: usize, alpha: &Monomial, coeff: &Rational, out: &mut Vec<(usize, Rational)>) {
        for j in 0..self.f.p() {
            self.amb.encode_shifted(j, &self.jac[j][i], alpha, coeff, out);
        }
    }

    fn source_terms(&self, terms: &[FieldTerm]) -> SparseVec {
        let mut v = Vec::new();
        for (i, m, c) in terms {
            self.source_image(*i, m, c, &mut v);
        }
        normalize(v)
    }

    /// Images of `x^alpha d_i` for `lo <= |alpha| <= hi`.
    pub fn source_full(&self, lo: u32, hi: u32) -> Vec<SparseVec> {
        let n = self.f.n();
        let mut out = Vec::new();
        for alpha in monomials_in_range(n, lo, hi) {
            for i in 0..n {
                let v = self.source_terms(&[(i, alpha.clone(), Rational::one())]);
                if !v.is_empty() {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Images of divergence-free source fields of degree `1..=hi`.
    pub fn source_divfree(&self, hi: u32) -> Vec<SparseVec> {
        let n = self.f.n();
        let mut out = Vec::new();
        for d in 1..=hi {
            for terms in divergence_free_terms(n, d, &|_| true) {
                let v = self.source_terms(&terms);
                if !v.is_empty() {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Weighted order of `f^beta`, `None` when it vanishes identically.
    fn power_order(&self, beta: &Monomial) -> Option<u32> {
        let mut s = 0;
        for (j, &e) in beta.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            s += self.orders[j]? * e as u32;
        }
        Some(s)
    }

    /// `f^beta` truncated at `k`; memoized along a chain of divisors.
    fn power(&mut self, beta: &Monomial) -> Polynomial {
        if let Some(p) = self.powers.get(beta) {
            return p.clone();
        }
        let n = self.f.n();
        let r = match beta.exps().iter().position(|&e| e > 0) {
            None => Polynomial::one(n),
            Some(j) => {
                let mut e = beta.exps().to_vec();
                e[j] -= 1;
                let lower = self.power(&Monomial::new(e));
                lower.mul_truncated(&self.f.components()[j], Some(self.k()))
            }
        };
        self.powers.insert(beta.clone(), r.clone());
        r
    }

    fn target_terms(&mut self, terms: &[FieldTerm]) -> SparseVec {
        let mut v = Vec::new();
        let one = Monomial::one(self.f.n());
        for (j, beta, c) in terms {
            if self.power_order(beta).is_none_or(|o| o > self.k()) {
                continue;
            }
            let pw = self.power(beta);
            self.amb.encode_shifted(*j, &pw, &one, c, &mut v);
        }
        normalize(v)
    }

    /// Target exponents `beta` with `lo <= |beta|` whose image survives truncation.
    fn target_exponents(&self, lo: u32) -> Vec<Monomial> {
        let p = self.f.p();
        let k = self.k();
        let mut out = Vec::new();
        let mut cur = vec![0 as Exp; p];
        fn rec(j: usize, budget: u32, orders: &[Option<u32>], cur: &mut Vec<Exp>, out: &mut Vec<Monomial>) {
            if j == cur.len() {
                out.push(Monomial::from_slice(cur));
                return;
            }
            let max = match orders[j] {
                Some(o) if o > 0 => budget / o,
                _ => 0,
            };
            for e in 0..=max {
                cur[j] = e as Exp;
                rec(j + 1, budget - e * orders[j].unwrap_or(0), orders, cur, out);
            }
            cur[j] = 0;
        }
        rec(0, k, &self.orders, &mut cur, &mut out);
        out.retain(|m| m.degree() >= lo);
        out.sort();
        out
    }

    /// Images `f^beta e_j` of `y^beta d_j`, `|beta| >= lo`.
    pub fn target_full(&mut self, lo: u32) -> Vec<SparseVec> {
        let p = self.f.p();
        let mut out = Vec::new();
        for beta in self.target_exponents(lo) {
            for j in 0..p {
                let v = self.target_terms(&[(j, beta.clone(), Rational::one())]);
                if !v.is_empty() {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Images of divergence-free target fields of degree `>= 1`.
    pub fn target_divfree(&mut self) -> Vec<SparseVec> {
        let p = self.f.p();
        let k = self.k();
        let min_order = self.orders.iter().flatten().copied().min().unwrap_or(1).max(1);
        let orders = self.orders.clone();
        let alive = move |m: &Monomial| {
            let mut s = 0u32;
            for (j, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match orders[j] {
                    Some(o) => s += o * e as u32,
                    None => return false,
                }
            }
            s <= k
        };
        let mut out = Vec::new();
        for d in 1..=(k / min_order) {
            for terms in divergence_free_terms(p, d, &alive) {
                let v = self.target_terms(&terms);
                if !v.is_empty() {
                    out.push(v);
                }
            }
        }
        out
    }

    /// Images `x^alpha f_j e_i` of `x^alpha E_ij`.
    pub fn matrix_full(&self) -> Vec<SparseVec> {
        let p = self.f.p();
        let mut out = Vec::new();
        for j in 0..p {
            let Some(o) = self.orders[j] else { continue };
            if o > self.k() {
                continue;
            }
            for alpha in monomials_in_range(self.f.n(), 0, self.k() - o) {
                for i in 0..p {
                    let mut v = Vec::new();
                    self.amb.encode_shifted(i, &self.f.components()[j], &alpha, &Rational::one(), &mut v);
                    let v = normalize(v);
                    if !v.is_empty() {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    /// Images of `x^alpha E_ij` (`i != j`) and `x^alpha (E_ii - E_11)`.
    pub fn matrix_tracefree(&self) -> Vec<SparseVec> {
        let p = self.f.p();
        let comps = self.f.components();
        let k = self.k();
        let mut out = Vec::new();
        for alpha in monomials_in_range(self.f.n(), 0, k.saturating_sub(1)) {
            for i in 0..p {
                for j in 0..p {
                    let mut v = Vec::new();
                    let one = Rational::one();
                    if i != j {
                        self.amb.encode_shifted(i, &comps[j], &alpha, &one, &mut v);
                    } else if i > 0 {
                        self.amb.encode_shifted(i, &comps[i], &alpha, &one, &mut v);
                        self.amb.encode_shifted(0, &comps[0], &alpha, &-one.clone(), &mut v);
                    }
                    let v = normalize(v);
                    if !v.is_empty() {
                        out.push(v);
                    }
                }
            }
        }
        out
    }

    pub fn part(&mut self, part: Part) -> Vec<SparseVec> {
        let k = self.k();
        match part {
            Part::Source => self.source_full(1, k),
            Part::SourceDivFree => self.source_divfree(k),
            Part::Target => self.target_full(1),
            Part::TargetDivFree => self.target_divfree(),
            Part::Matrix => self.matrix_full(),
            Part::MatrixTraceFree => self.matrix_tracefree(),
        }
    }
}

/// Parts shared by `LG` and `LG_Omega` and the parts where they differ:
/// `(common, unconstrained, constrained)`.
pub(crate) fn part_split(g: GroupSpec) -> (Vec<Part>, Vec<Part>, Vec<Part>) {
    let b = g.base;
    let mut common = Vec::new();
    let mut full = Vec::new();
    let mut restricted = Vec::new();
    if b.has_source() {
        if g.volume == VolumeSide::Source {
            full.push(Part::Source);
            restricted.push(Part::SourceDivFree);
        } else {
            common.push(Part::Source);
        }
    }
    let (t, tr) = if b.has_target_fields() {
        (Part::Target, Part::TargetDivFree)
    } else {
        (Part::Matrix, Part::MatrixTraceFree)
    };
    if b.has_target_fields() || b.has_matrices() {
        if g.volume == VolumeSide::Target {
            full.push(t);
            restricted.push(tr);
        } else {
            common.push(t);
        }
    }
    (common, full, restricted)
}

/// Truncated images of the generator family of `LG f` (or `LG_Omega f`)
/// inside `m_n theta_f` modulo degree `k + 1`.
pub fn gamma_generators(f: &MapGerm, g: GroupSpec, k: u32) -> (Arc<JetSpace>, Vec<SparseVec>) {
    let amb = JetSpace::new(f.n(), f.p(), k, false);
    let mut b = GeneratorBuilder::new(f, amb.clone());
    let (common, full, restricted) = part_split(g);
    let parts = if g.volume == VolumeSide::None { full } else { restricted };
    let mut out = Vec::new();
    for p in common.into_iter().chain(parts) {
        out.extend(b.part(p));
    }
    (amb, out)
}
