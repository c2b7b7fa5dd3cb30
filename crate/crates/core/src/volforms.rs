//! Infinitesimal Moser equation at jet level.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::germ::{divergence, Side, VectorField, VolumeDensity};
use crate::jetlin::{linear_solve, JetSpace};
use crate::rational::Rational;
use crate::ring::{monomials_in_range, Polynomial};

/// `g` with `div(g E_w) = density`, term by term:
/// `div(m E_w) = (sum w + deg_w m) m`.
pub fn euler_primitive(density: &Polynomial, w: &[i64], names: &[String]) -> Result<Polynomial> {
    let q = density.nvars();
    if w.len() != q || names.len() != q {
        return Err(Error::Arity(format!("{} weights for {q} variables", w.len())));
    }
    let total: i64 = w.iter().sum();
    let mut g = Polynomial::zero(q);
    for (m, c) in density.terms() {
        let den = total + m.weighted_degree(w);
        if den == 0 {
            return Err(Error::ZeroDenominator(m.format(names)));
        }
        g.add_term(m.clone(), &(c / &Rational::from_int(den)));
    }
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
pub struct MEquivalenceWitness {
    /// Components of `X`.
    pub x: Vec<String>,
    /// Coefficients per generator: `X = sum_i c_i X_i`, `c_i` a polynomial.
    pub coefficients: Vec<String>,
    pub residual_order: u32,
    #[serde(skip)]
    pub field: VectorField,
}

/// Solves `d(X _| Omega) = Omega_0 - Omega_1` modulo degree above `k`,
/// with `X` in the `C_q`-module generated by `gens`. `Omega` is the
/// reference density (standard when `None`). Returns `None` when the
/// truncated system has no solution.
pub fn m_equivalence_witness(
    omega0: &VolumeDensity,
    omega1: &VolumeDensity,
    gens: &[VectorField],
    k: u32,
    reference: Option<&VolumeDensity>,
    names: &[String],
) -> Result<Option<MEquivalenceWitness>> {
    let q = omega0.arity();
    if names.len() != q || omega1.arity() != q || gens.iter().any(|g| g.arity() != q) || reference.is_some_and(|r| r.arity() != q) {
        return Err(Error::Arity("densities and fields must live on the same space".into()));
    }
    let std = VolumeDensity::standard(q);
    let omega = reference.unwrap_or(&std);
    let amb = JetSpace::new(q, 1, k, true);
    let rhs = (omega0.h() - omega1.h()).truncate(k);
    let target = amb.encode(std::slice::from_ref(&rhs))?;
    // d(X _| h dx) = div(h X) dx
    let mut cols = Vec::new();
    let mut vecs = Vec::new();
    let monos = monomials_in_range(q, 0, k + 1);
    for (i, g) in gens.iter().enumerate() {
        for m in &monos {
            let comps: Vec<Polynomial> =
                g.components.iter().map(|c| omega.h().mul_truncated(&c.mul_monomial(m, &Rational::one()), Some(k + 1))).collect();
            let d = divergence(&VectorField::new(g.side, comps), &std, k)?;
            vecs.push(amb.encode(std::slice::from_ref(&d))?);
            cols.push((i, m.clone()));
        }
    }
    let Some(c) = linear_solve(amb.dim(), &vecs, &target)? else {
        return Ok(None);
    };
    let mut coeffs = vec![Polynomial::zero(q); gens.len()];
    for ((i, m), a) in cols.iter().zip(&c) {
        if !a.is_zero() {
            coeffs[*i].add_term(m.clone(), a);
        }
    }
    let side = gens.first().map_or(Side::Source, |g| g.side);
    let mut x = vec![Polynomial::zero(q); q];
    for (g, cf) in gens.iter().zip(&coeffs) {
        for (xi, gi) in x.iter_mut().zip(&g.components) {
            *xi = &*xi + &(cf * gi);
        }
    }
    let field = VectorField::new(side, x);
    let hx: Vec<Polynomial> = field.components.iter().map(|c| omega.h().mul_truncated(c, Some(k + 1))).collect();
    let check = divergence(&VectorField::new(side, hx), &std, k)?;
    if check != rhs {
        return Err(Error::Inconsistent("witness residual does not vanish".into()));
    }
    Ok(Some(MEquivalenceWitness {
        x: field.components.iter().map(|c| c.format(names)).collect(),
        coefficients: coeffs.iter().map(|c| c.format(names)).collect(),
        residual_order: k,
        field,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::euler_field;
    use crate::ring::parse_polynomial;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    fn p(s: &str) -> Polynomial {
        parse_polynomial(s, &xy()).unwrap()
    }

    #[test]
    fn primitives() {
        assert_eq!(euler_primitive(&p("1"), &[1, 1], &xy()).unwrap(), p("1/2"));
        assert_eq!(euler_primitive(&p("x^2*y"), &[1, 1], &xy()).unwrap(), p("x^2*y/5"));
        assert_eq!(euler_primitive(&p("y^3"), &[1, 0], &xy()).unwrap(), p("y^3"));
        assert!(matches!(euler_primitive(&p("x"), &[1, -2], &xy()), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn witness_for_euler_module() {
        let o0 = VolumeDensity::new(p("1 + x")).unwrap();
        let o1 = VolumeDensity::standard(2);
        let e = euler_field(&[1, 1]);
        let w = m_equivalence_witness(&o0, &o1, std::slice::from_ref(&e), 4, None, &xy()).unwrap().unwrap();
        assert_eq!(w.coefficients, vec!["1/3*x".to_string()]);
        let same = m_equivalence_witness(&o1, &o1, &[e], 4, None, &xy()).unwrap().unwrap();
        assert!(same.field.is_zero());
        assert!(m_equivalence_witness(&o0, &o1, &[], 4, None, &xy()).unwrap().is_none());
    }

    #[test]
    fn reference_density_does_not_matter() {
        let o0 = VolumeDensity::new(p("1 + x*y + y^3")).unwrap();
        let o1 = VolumeDensity::new(p("1 - x^2")).unwrap();
        let h = VolumeDensity::new(p("2 + x - y^2")).unwrap();
        let gens = [euler_field(&[1, 2])];
        for k in 2..6 {
            let a = m_equivalence_witness(&o0, &o1, &gens, k, None, &xy()).unwrap().is_some();
            let b = m_equivalence_witness(&o0, &o1, &gens, k, Some(&h), &xy()).unwrap().is_some();
            assert_eq!(a, b);
        }
    }
}
