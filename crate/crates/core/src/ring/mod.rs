//! Exact sparse polynomials over Q.

mod monomial;
mod parse;
mod poly;

use std::collections::BTreeSet;

pub use monomial::{binomial, monomials_in_range, monomials_of_degree, Exp, Monomial};
pub use parse::{infer_variables, parse_component_lists, parse_components, parse_polynomial};
pub use poly::{default_names, poly_arith, ArithOp, Polynomial};

use crate::error::{invalid, Error, Result};

/// Composition `g(subst)` modulo terms of degree above `k`.
///
/// Every substituted polynomial must vanish at the origin, otherwise the
/// truncated result would not be the jet of the composite.
pub fn compose_truncated(g: &Polynomial, subst: &[Polynomial], k: u32) -> Result<Polynomial> {
    if let Some(i) = subst.iter().position(|s| !s.constant_term().is_zero()) {
        return Err(invalid(format!("substituted component {i} has a nonzero constant term")));
    }
    g.compose(subst, Some(k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightedDegree {
    Isobaric(i64),
    Mixed(Vec<i64>),
}

impl WeightedDegree {
    pub fn is_isobaric(&self) -> bool {
        matches!(self, WeightedDegree::Isobaric(_))
    }
}

/// Weighted degrees `<w, alpha>` occurring in `f`.
pub fn weighted_degree_analysis(f: &Polynomial, w: &[i64]) -> Result<WeightedDegree> {
    if w.len() != f.nvars() {
        return Err(Error::Arity(format!("{} weights for {} variables", w.len(), f.nvars())));
    }
    if f.is_zero() {
        return Err(invalid("weighted degree of the zero polynomial is undefined"));
    }
    let degs: BTreeSet<i64> = f.terms().map(|(m, _)| m.weighted_degree(w)).collect();
    Ok(if degs.len() == 1 {
        WeightedDegree::Isobaric(*degs.iter().next().unwrap())
    } else {
        WeightedDegree::Mixed(degs.into_iter().collect())
    })
}

/// Jacobian matrix, rows indexed by components.
pub fn jacobian(f: &[Polynomial], nvars: usize) -> Vec<Vec<Polynomial>> {
    f.iter()
        .map(|c| (0..nvars).map(|i| c.derivative(i).expect("variable index")).collect())
        .collect()
}

/// Determinant by cofactor expansion; only used on small matrices.
pub fn determinant(m: &[Vec<Polynomial>], nvars: usize) -> Polynomial {
    let n = m.len();
    match n {
        0 => Polynomial::one(nvars),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Polynomial::zero(nvars);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Polynomial>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, p)| p.clone()).collect())
                    .collect();
                let t = &m[0][j] * &determinant(&minor, nvars);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// All maximal minors of a `k x n` matrix with `k <= n`.
pub fn maximal_minors(m: &[Vec<Polynomial>], nvars: usize) -> Vec<Polynomial> {
    let k = m.len();
    let n = m.first().map_or(0, |r| r.len());
    subsets(n, k)
        .into_iter()
        .map(|cols| {
            let sub: Vec<Vec<Polynomial>> = m.iter().map(|r| cols.iter().map(|&c| r[c].clone()).collect()).collect();
            determinant(&sub, nvars)
        })
        .filter(|p| !p.is_zero())
        .collect()
}
