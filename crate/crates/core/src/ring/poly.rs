use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;

use super::monomial::{Exp, Monomial};

/// Sparse polynomial over Q in a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(Monomial::var(nvars, i), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let nvars = m.nvars();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { nvars, terms }
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(m, Rational::one())
    }

    pub fn from_terms(nvars: usize, it: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::zero(nvars);
        for (m, c) in it {
            assert_eq!(m.nvars(), nvars, "monomial arity");
            p.add_term(m, &c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.nvars))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// Highest total degree, `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Lowest total degree of a term, `None` for zero.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree())
    }

    pub fn add_term(&mut self, m: Monomial, c: &Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_arity(&self, other: &Polynomial) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Arity(format!(
                "polynomials in {} and {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c);
        }
        Ok(r)
    }

    pub fn try_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), &-c);
        }
        Ok(r)
    }

    pub fn try_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_arity(other)?;
        Ok(self.mul_truncated(other, None))
    }

    /// Product, dropping terms above degree `k` when given.
    pub fn mul_truncated(&self, other: &Polynomial, k: Option<u32>) -> Polynomial {
        assert_eq!(self.nvars, other.nvars, "polynomial arity");
        let mut r = Polynomial::zero(self.nvars);
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            if k.is_some_and(|k| d1 > k) {
                break;
            }
            for (m2, c2) in &other.terms {
                if k.is_some_and(|k| d1 + m2.degree() > k) {
                    break;
                }
                r.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        r
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        self.pow_truncated(e, None)
    }

    pub fn pow_truncated(&self, e: u32, k: Option<u32>) -> Polynomial {
        let mut acc = Polynomial::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_truncated(&base, k);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_truncated(&base, k);
            }
        }
        match k {
            Some(k) => acc.truncate(k),
            None => acc,
        }
    }

    pub fn derivative(&self, i: usize) -> Result<Polynomial> {
        if i >= self.nvars {
            return Err(Error::Arity(format!(
                "derivative in variable {i} of a polynomial in {} variables",
                self.nvars
            )));
        }
        let mut r = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            if let Some((e, low)) = m.derive(i) {
                r.add_term(low, &(c * &Rational::from_int(e as i64)));
            }
        }
        Ok(r)
    }

    /// Drops every term of degree above `k`.
    pub fn truncate(&self, k: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .take_while(|(m, _)| m.degree() <= k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn homogeneous_part(&self, d: u32) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `self(subst_0, .., subst_{n-1})`, truncated at `k` when given.
    pub fn compose(&self, subst: &[Polynomial], k: Option<u32>) -> Result<Polynomial> {
        if subst.len() != self.nvars {
            return Err(Error::Arity(format!(
                "composition needs {} substitutions, got {}",
                self.nvars,
                subst.len()
            )));
        }
        let m = match subst.first() {
            Some(p) => p.nvars,
            None => 0,
        };
        if subst.iter().any(|p| p.nvars != m) {
            return Err(Error::Arity("substitutions in different rings".into()));
        }
        let mut powers: Vec<Vec<Polynomial>> = subst.iter().map(|p| vec![Polynomial::one(m), p.clone()]).collect();
        let mut r = Polynomial::zero(m);
        for (mono, c) in &self.terms {
            let mut t = Polynomial::constant(m, c.clone());
            for (i, &e) in mono.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul_truncated(&subst[i], k);
                    powers[i].push(next);
                }
                t = t.mul_truncated(&powers[i][e as usize], k);
            }
            r = r.try_add(&t)?;
        }
        Ok(r)
    }

    /// Re-embeds into `n >= nvars` variables, existing ones first.
    pub fn extend_vars(&self, n: usize) -> Polynomial {
        assert!(n >= self.nvars);
        Polynomial {
            nvars: n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.exps().to_vec();
                    e.resize(n, 0);
                    (Monomial::new(e), c.clone())
                })
                .collect(),
        }
    }

    /// Renames variable `i` to `perm[i]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Polynomial {
        assert_eq!(perm.len(), self.nvars);
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = vec![0 as Exp; self.nvars];
                    for (i, &x) in m.exps().iter().enumerate() {
                        e[perm[i]] = x;
                    }
                    (Monomial::new(e), c.clone())
                })
                .collect(),
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        let mut s = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    t = &t * &point[i].pow(e as u32);
                }
            }
            s += &t;
        }
        s
    }

    /// Whether every term has weighted degree `d`.
    pub fn is_weighted_homogeneous(&self, w: &[i64], d: i64) -> bool {
        self.terms.keys().all(|m| m.weighted_degree(w) == d)
    }

    pub fn format(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                s.push_str(&a.to_string());
            } else if a.is_one() {
                s.push_str(&m.format(names));
            } else {
                s.push_str(&a.to_string());
                s.push('*');
                s.push_str(&m.format(names));
            }
        }
        s
    }
}

pub fn default_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(&default_names("x", self.nvars)))
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.try_add(rhs).expect("polynomial arity")
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.try_sub(rhs).expect("polynomial arity")
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        self.try_mul(rhs).expect("polynomial arity")
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

/// Elementary operations exposed under one entry point.
#[derive(Clone, Debug)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Pow(u32),
    Derivative(usize),
    Truncate(u32),
    Compose(Vec<Polynomial>),
}

/// Applies `op`; binary operations fold over all operands.
pub fn poly_arith(op: &ArithOp, operands: &[Polynomial]) -> Result<Polynomial> {
    let first = operands
        .first()
        .ok_or_else(|| crate::error::invalid("no operands"))?;
    match op {
        ArithOp::Add | ArithOp::Sub | ArithOp::Mul => {
            let mut acc = first.clone();
            for p in &operands[1..] {
                acc = match op {
                    ArithOp::Add => acc.try_add(p)?,
                    ArithOp::Sub => acc.try_sub(p)?,
                    _ => acc.try_mul(p)?,
                };
            }
            Ok(acc)
        }
        ArithOp::Pow(e) => Ok(first.pow(*e)),
        ArithOp::Derivative(i) => first.derivative(*i),
        ArithOp::Truncate(k) => Ok(first.truncate(*k)),
        ArithOp::Compose(s) => first.compose(s, None),
    }
}
