//! Map-germs, vector fields, matrix fields and densities, with the maps
//! `tf`, `wf`, the matrix action and the divergence.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rational::Rational;
use crate::ring::{compose_truncated, infer_variables, jacobian, parse_components, Polynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Source,
    Target,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Source => "source",
            Side::Target => "target",
        })
    }
}

/// Polynomial map `(K^n,0) -> (K^p,0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapGerm {
    source_vars: Vec<String>,
    target_vars: Vec<String>,
    components: Vec<Polynomial>,
}

impl MapGerm {
    pub fn new(source_vars: Vec<String>, target_vars: Vec<String>, components: Vec<Polynomial>) -> Result<Self> {
        let n = source_vars.len();
        if n == 0 {
            return Err(invalid("a germ needs at least one source variable"));
        }
        if components.is_empty() {
            return Err(invalid("a germ needs at least one component"));
        }
        if target_vars.len() != components.len() {
            return Err(Error::Arity(format!(
                "{} target variables for {} components",
                target_vars.len(),
                components.len()
            )));
        }
        for (j, c) in components.iter().enumerate() {
            if c.nvars() != n {
                return Err(Error::Arity(format!("component {j} has arity {}, expected {n}", c.nvars())));
            }
            if !c.constant_term().is_zero() {
                return Err(invalid(format!("component {j} does not vanish at the origin")));
            }
        }
        Ok(MapGerm { source_vars, target_vars, components })
    }

    /// Builds a germ with default target names `y1..yp`.
    pub fn from_components(source_vars: Vec<String>, components: Vec<Polynomial>) -> Result<Self> {
        let p = components.len();
        let t = default_target_names(p, &source_vars);
        MapGerm::new(source_vars, t, components)
    }

    /// Parses `"x, x*y + y^5"`. Source variables default to the identifiers
    /// in order of appearance.
    pub fn parse(text: &str, source_vars: Option<&[String]>, target_vars: Option<&[String]>) -> Result<Self> {
        let src: Vec<String> = match source_vars {
            Some(v) => v.to_vec(),
            None => infer_variables(text),
        };
        let comps = parse_components(text, &src)?;
        let tgt = match target_vars {
            Some(v) => v.to_vec(),
            None => default_target_names(comps.len(), &src),
        };
        MapGerm::new(src, tgt, comps)
    }

    pub fn n(&self) -> usize {
        self.source_vars.len()
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn source_vars(&self) -> &[String] {
        &self.source_vars
    }

    pub fn target_vars(&self) -> &[String] {
        &self.target_vars
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    /// Highest total degree among the components.
    pub fn max_degree(&self) -> u32 {
        self.components.iter().filter_map(|c| c.degree()).max().unwrap_or(0)
    }

    pub fn jacobian(&self) -> Vec<Vec<Polynomial>> {
        jacobian(&self.components, self.n())
    }

    pub fn format(&self) -> String {
        let parts: Vec<String> = self.components.iter().map(|c| c.format(&self.source_vars)).collect();
        format!("({})", parts.join(", "))
    }

    /// Rank of the linear part at the origin.
    pub fn linear_rank(&self) -> usize {
        let n = self.n();
        let rows: Vec<crate::jetlin::SparseVec> = self
            .components
            .iter()
            .map(|c| {
                (0..n)
                    .filter_map(|i| {
                        let a = c.coeff(&crate::ring::Monomial::var(n, i));
                        (!a.is_zero()).then_some((i, a))
                    })
                    .collect()
            })
            .collect();
        let mut e = crate::jetlin::Echelon::new(n);
        for r in &rows {
            e.insert(r);
        }
        e.rank()
    }
}

impl fmt::Display for MapGerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

/// `y1..yp`, or `Y1..Yp` if that clashes with a source name.
pub fn default_target_names(p: usize, source: &[String]) -> Vec<String> {
    for prefix in ["y", "Y", "t", "T"] {
        let names: Vec<String> = (1..=p).map(|i| format!("{prefix}{i}")).collect();
        if names.iter().all(|n| !source.contains(n)) {
            return names;
        }
    }
    (1..=p).map(|i| format!("target{i}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub side: Side,
    pub components: Vec<Polynomial>,
}

impl VectorField {
    pub fn new(side: Side, components: Vec<Polynomial>) -> Self {
        VectorField { side, components }
    }

    pub fn zero(side: Side, q: usize) -> Self {
        VectorField { side, components: vec![Polynomial::zero(q); q] }
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn vanishing_at_origin(&self) -> bool {
        self.components.iter().all(|c| c.constant_term().is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn format(&self, names: &[String]) -> String {
        let mut parts = Vec::new();
        for (i, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let s = c.format(names);
            let s = if c.len() > 1 { format!("({s})") } else { s };
            parts.push(format!("{s}*d/d{}", names[i]));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// `p x p` matrix over the source ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixField {
    pub entries: Vec<Vec<Polynomial>>,
}

impl MatrixField {
    pub fn new(entries: Vec<Vec<Polynomial>>) -> Result<Self> {
        let p = entries.len();
        if entries.iter().any(|r| r.len() != p) {
            return Err(Error::Dimension("matrix field must be square".into()));
        }
        Ok(MatrixField { entries })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn trace(&self) -> Polynomial {
        let n = self.entries.first().map_or(0, |r| r[0].nvars());
        let mut t = Polynomial::zero(n);
        for (i, r) in self.entries.iter().enumerate() {
            t = &t + &r[i];
        }
        t
    }
}

/// `h dx_1 ^ .. ^ dx_q` with `h(0) != 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeDensity {
    h: Polynomial,
}

impl VolumeDensity {
    pub fn new(h: Polynomial) -> Result<Self> {
        if h.constant_term().is_zero() {
            return Err(invalid("density vanishes at the origin"));
        }
        Ok(VolumeDensity { h })
    }

    pub fn standard(q: usize) -> Self {
        VolumeDensity { h: Polynomial::one(q) }
    }

    pub fn h(&self) -> &Polynomial {
        &self.h
    }

    pub fn is_standard(&self) -> bool {
        self.h.is_constant()
    }

    pub fn arity(&self) -> usize {
        self.h.nvars()
    }
}

/// Power-series inverse of `h` modulo degree `k + 1`.
pub fn series_inverse(h: &Polynomial, k: u32) -> Result<Polynomial> {
    let c0 = h.constant_term();
    if c0.is_zero() {
        return Err(invalid("series inverse of a non-unit"));
    }
    let n = h.nvars();
    let inv0 = c0.recip();
    // h = c0 (1 - u), 1/h = (1/c0) sum u^i
    let u = (&Polynomial::one(n) - &h.scale(&inv0)).truncate(k);
    let mut acc = Polynomial::one(n);
    let mut pw = Polynomial::one(n);
    for _ in 0..k {
        pw = pw.mul_truncated(&u, Some(k));
        if pw.is_zero() {
            break;
        }
        acc = &acc + &pw;
    }
    Ok(acc.scale(&inv0).truncate(k))
}

/// `tf(a) = df(a)`, truncated at degree `k`.
pub fn tf_apply(f: &MapGerm, a: &VectorField, k: u32) -> Result<Vec<Polynomial>> {
    if a.side != Side::Source || a.arity() != f.n() {
        return Err(invalid("tf needs a source vector field"));
    }
    let jac = f.jacobian();
    Ok(jac
        .iter()
        .map(|row| {
            let mut s = Polynomial::zero(f.n());
            for (d, ai) in row.iter().zip(&a.components) {
                s = &s + &d.mul_truncated(ai, Some(k));
            }
            s
        })
        .collect())
}

/// `wf(b) = b o f`, truncated at degree `k`.
pub fn wf_apply(f: &MapGerm, b: &VectorField, k: u32) -> Result<Vec<Polynomial>> {
    if b.side != Side::Target || b.arity() != f.p() {
        return Err(invalid("wf needs a target vector field"));
    }
    b.components.iter().map(|c| compose_truncated(c, f.components(), k)).collect()
}

/// `B f`, truncated at degree `k`.
pub fn matrix_action(f: &MapGerm, b: &MatrixField, k: u32) -> Result<Vec<Polynomial>> {
    if b.size() != f.p() {
        return Err(Error::Dimension(format!("{0}x{0} matrix for {1} components", b.size(), f.p())));
    }
    Ok(b.entries
        .iter()
        .map(|row| {
            let mut s = Polynomial::zero(f.n());
            for (e, c) in row.iter().zip(f.components()) {
                s = &s + &e.mul_truncated(c, Some(k));
            }
            s
        })
        .collect())
}

/// `div_h(X) = sum_i d_i(h X_i) / h`, exact modulo degree above `k`.
pub fn divergence(x: &VectorField, omega: &VolumeDensity, k: u32) -> Result<Polynomial> {
    let q = x.arity();
    if omega.arity() != q {
        return Err(Error::Arity(format!("{q}-dimensional field with a {}-dimensional density", omega.arity())));
    }
    if x.components.iter().any(|c| c.nvars() != q) {
        return Err(Error::Arity("field components in the wrong ring".into()));
    }
    let mut s = Polynomial::zero(q);
    if omega.is_standard() {
        for (i, c) in x.components.iter().enumerate() {
            s = &s + &c.derivative(i)?;
        }
        return Ok(s.truncate(k));
    }
    let h = omega.h();
    for (i, c) in x.components.iter().enumerate() {
        s = &s + &h.mul_truncated(c, Some(k + 1)).derivative(i)?;
    }
    let inv = series_inverse(h, k)?;
    Ok(s.mul_truncated(&inv, Some(k)))
}

/// `X(g) = sum X_i d_i g`.
pub fn apply_field(x: &VectorField, g: &Polynomial) -> Result<Polynomial> {
    let mut s = Polynomial::zero(g.nvars());
    for (i, c) in x.components.iter().enumerate() {
        s = &s + &(c * &g.derivative(i)?);
    }
    Ok(s)
}

/// `sum_i w_i x_i d_i`.
pub fn euler_field(w: &[i64]) -> VectorField {
    let q = w.len();
    VectorField::new(
        Side::Source,
        (0..q).map(|i| Polynomial::var(q, i).scale(&Rational::from_int(w[i]))).collect(),
    )
}
