//! Lower bound `dim M >= 1` from the filtration-0 part of `gamma_f0`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::germ::MapGerm;
use crate::jetlin::{kernel, JetSpace};
use crate::rational::Rational;
use crate::ring::{monomials_in_range, Monomial, Polynomial};
use crate::tangent::{membership, BaseGroup, GroupSpec, VolumeSide};
use crate::weights::WeightData;

#[derive(Clone, Debug, Serialize)]
pub struct KernelBasisElement {
    /// Source field, as `d/dx`-components.
    pub source: Vec<String>,
    /// Target field components (A) or matrix entries row by row (K).
    pub target: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiltrationZeroKernel {
    pub dim: usize,
    pub source_generators: usize,
    pub target_generators: usize,
    pub codomain_monomials: usize,
    /// Rank of the divergence of the volume-side field (target for A,
    /// source for K) on the kernel. The divergence of a filtration-0 field
    /// is a constant, so this is 0 or 1.
    pub divergence_rank: usize,
    pub basis: Vec<KernelBasisElement>,
}

/// Monomials with `<w, alpha> = target`, for positive weights.
fn monomials_of_weight(w: &[i64], target: i64) -> Vec<Monomial> {
    if target < 0 {
        return Vec::new();
    }
    let wmin = *w.iter().min().unwrap();
    let dmax = (target / wmin) as u32;
    monomials_in_range(w.len(), 0, dmax).into_iter().filter(|m| m.weighted_degree(w) == target).collect()
}

enum Gen {
    Source(usize, Monomial),
    Target(usize, Monomial),
    Matrix(usize, usize, Monomial),
}

/// Kernel of `(a, b) -> tf(a) - wf(b)` (A) or `(a, B) -> tf(a) - B f` (K)
/// restricted to filtration 0.
pub fn filtration_zero_kernel(f0: &MapGerm, weights: &WeightData, base: BaseGroup) -> Result<FiltrationZeroKernel> {
    if !matches!(base, BaseGroup::A | BaseGroup::K) {
        return Err(Error::UnsupportedGroup(format!("the kernel criterion is stated for A and K, not {base}")));
    }
    if !weights.is_isobaric_for(f0) {
        return Err(Error::NotQuasiHomogeneous(format!("{} is not isobaric for the given weights", f0.format())));
    }
    let w = &weights.weights;
    let delta = &weights.degrees;
    if w.iter().any(|&x| x <= 0) {
        return Err(Error::DegenerateWeights("source weights must be positive".into()));
    }
    if base == BaseGroup::A && delta.iter().any(|&d| d <= 0) {
        return Err(Error::DegenerateWeights("target degrees must be positive".into()));
    }
    let n = f0.n();
    let p = f0.p();
    let codomain: usize = delta.iter().map(|&d| monomials_of_weight(w, d).len()).sum();
    if codomain == 0 {
        return Err(Error::DegenerateWeights("the filtration-0 part of theta_f is empty".into()));
    }

    let mut gens = Vec::new();
    let mut images: Vec<Vec<Polynomial>> = Vec::new();
    let jac = f0.jacobian();
    for i in 0..n {
        for a in monomials_of_weight(w, w[i]) {
            let x = Polynomial::monomial(a.clone());
            images.push((0..p).map(|j| &jac[j][i] * &x).collect());
            gens.push(Gen::Source(i, a));
        }
    }
    let ns = gens.len();
    let minus = Rational::from_int(-1);
    match base {
        BaseGroup::A => {
            let powers = |b: &Monomial| {
                let mut s = Polynomial::one(n);
                for (j, e) in b.exps().iter().enumerate() {
                    s = &s * &f0.components()[j].pow(*e as u32);
                }
                s
            };
            for j in 0..p {
                for b in monomials_of_weight(delta, delta[j]) {
                    let mut v = vec![Polynomial::zero(n); p];
                    v[j] = powers(&b).scale(&minus);
                    images.push(v);
                    gens.push(Gen::Target(j, b));
                }
            }
        }
        _ => {
            for i in 0..p {
                for j in 0..p {
                    for a in monomials_of_weight(w, delta[i] - delta[j]) {
                        let mut v = vec![Polynomial::zero(n); p];
                        v[i] = f0.components()[j].mul_monomial(&a, &minus);
                        images.push(v);
                        gens.push(Gen::Matrix(i, j, a));
                    }
                }
            }
        }
    }
    let top = images.iter().flatten().filter_map(|c| c.degree()).max().unwrap_or(0);
    let amb = JetSpace::new(n, p, top, true);
    let vecs = images.iter().map(|v| amb.encode(v)).collect::<Result<Vec<_>>>()?;
    let ker = kernel(amb.dim(), &vecs);

    let names = f0.source_vars();
    let tnames = f0.target_vars();
    let mut divergence_rank = 0;
    let basis = ker
        .iter()
        .map(|c| {
            let mut src = vec![Polynomial::zero(n); n];
            let tsize = if base == BaseGroup::A { p } else { p * p };
            let tvars = if base == BaseGroup::A { p } else { n };
            let mut tgt = vec![Polynomial::zero(tvars); tsize];
            for (g, a) in gens.iter().zip(c) {
                if a.is_zero() {
                    continue;
                }
                match g {
                    Gen::Source(i, m) => src[*i].add_term(m.clone(), a),
                    Gen::Target(j, m) => tgt[*j].add_term(m.clone(), a),
                    Gen::Matrix(i, j, m) => tgt[i * p + j].add_term(m.clone(), a),
                }
            }
            let div = if base == BaseGroup::A {
                (0..p).map(|j| tgt[j].derivative(j).unwrap()).fold(Polynomial::zero(p), |a, b| &a + &b)
            } else {
                (0..n).map(|i| src[i].derivative(i).unwrap()).fold(Polynomial::zero(n), |a, b| &a + &b)
            };
            if !div.is_zero() {
                divergence_rank = 1;
            }
            let tn = if base == BaseGroup::A { tnames } else { names };
            KernelBasisElement {
                source: src.iter().map(|s| s.format(names)).collect(),
                target: tgt.iter().map(|s| s.format(tn)).collect(),
            }
        })
        .collect();
    Ok(FiltrationZeroKernel {
        dim: ker.len(),
        source_generators: ns,
        target_generators: gens.len() - ns,
        codomain_monomials: codomain,
        divergence_rank,
        basis,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Modulus,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusCertificate {
    pub f0: String,
    /// The deformation direction as components.
    pub m: Vec<String>,
    pub filtration: i64,
    pub weights: WeightData,
    pub base: BaseGroup,
    pub order: u32,
    pub kernel_dim: usize,
    pub divergence_rank: usize,
    pub m_in_tangent: bool,
    pub verdict: Verdict,
}

/// A monomial vector `x^alpha e_j`, given as components with one
/// nonzero monomial entry.
pub fn monomial_vector(f: &MapGerm, comps: &[Polynomial]) -> Result<(usize, Monomial, Rational)> {
    if comps.len() != f.p() {
        return Err(Error::Arity(format!("{} components for a map with {} targets", comps.len(), f.p())));
    }
    let nz: Vec<usize> = (0..comps.len()).filter(|&j| !comps[j].is_zero()).collect();
    if nz.len() != 1 || comps[nz[0]].len() != 1 {
        return Err(invalid("M must be a single monomial in a single component"));
    }
    let j = nz[0];
    let (m, c) = comps[j].terms().next().unwrap();
    Ok((j, m.clone(), c.clone()))
}

/// `modulus` when the filtration-0 kernel is one-dimensional and `M`
/// is not in `pi_k(LG f0)`; `inconclusive` otherwise.
pub fn modulus_certificate(
    f0: &MapGerm,
    m: &[Polynomial],
    weights: &WeightData,
    base: BaseGroup,
    k: u32,
) -> Result<ModulusCertificate> {
    let (j, mono, _) = monomial_vector(f0, m)?;
    if weights.weights.len() != f0.n() || weights.degrees.len() != f0.p() {
        return Err(Error::Arity("weights do not match the germ".into()));
    }
    let fil = mono.weighted_degree(&weights.weights) - weights.degrees[j];
    if fil <= 0 {
        return Err(invalid(format!("M has filtration {fil}, a positive filtration is required")));
    }
    if mono.is_one() {
        return Err(invalid("M must vanish at the origin"));
    }
    if k < mono.degree() {
        return Err(invalid(format!("order {k} is below the degree {} of M", mono.degree())));
    }
    let ker = filtration_zero_kernel(f0, weights, base)?;
    let inside = membership(f0, GroupSpec::new(base, VolumeSide::None)?, k, m)?;
    let verdict = if ker.dim == 1 && !inside { Verdict::Modulus } else { Verdict::Inconclusive };
    Ok(ModulusCertificate {
        f0: f0.format(),
        m: m.iter().map(|c| c.format(f0.source_vars())).collect(),
        filtration: fil,
        weights: weights.clone(),
        base,
        order: k,
        kernel_dim: ker.dim,
        divergence_rank: ker.divergence_rank,
        m_in_tangent: inside,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::parse_polynomial;

    fn wd(w: &[i64], d: &[i64]) -> WeightData {
        WeightData { weights: w.to_vec(), degrees: d.to_vec() }
    }

    fn vecp(f: &MapGerm, s: &[&str]) -> Vec<Polynomial> {
        s.iter().map(|t| parse_polynomial(t, f.source_vars()).unwrap()).collect()
    }

    #[test]
    fn euler_pair_kernel() {
        let f = MapGerm::parse("x, x*y + y^5", None, None).unwrap();
        let k = filtration_zero_kernel(&f, &wd(&[4, 1], &[4, 5]), BaseGroup::A).unwrap();
        assert_eq!(k.dim, 1);
        assert_eq!(k.divergence_rank, 1);
        let k2 = filtration_zero_kernel(&f, &wd(&[8, 2], &[8, 10]), BaseGroup::A).unwrap();
        assert_eq!(k2.dim, 1);
    }

    #[test]
    fn twenty_two_initial_part() {
        let f = MapGerm::parse(
            "x1, x2, x1*y + y^3, x2*y, x1*y^2, x2*y^2 + y^4",
            Some(&["x1".into(), "x2".into(), "y".into()]),
            None,
        )
        .unwrap();
        let k = filtration_zero_kernel(&f, &wd(&[2, 2, 1], &[2, 2, 3, 3, 4, 4]), BaseGroup::A).unwrap();
        assert_eq!(k.dim, 1);
    }

    #[test]
    fn boundary_germ_modulus() {
        let f = MapGerm::parse("x, x*y + y^5", None, None).unwrap();
        let c = modulus_certificate(&f, &vecp(&f, &["0", "y^7"]), &wd(&[4, 1], &[4, 5]), BaseGroup::A, 8).unwrap();
        assert_eq!(c.verdict, Verdict::Modulus);
        assert_eq!(c.filtration, 2);
        let inside = modulus_certificate(&f, &vecp(&f, &["0", "y^9"]), &wd(&[4, 1], &[4, 5]), BaseGroup::A, 9).unwrap();
        assert!(inside.m_in_tangent);
        assert_eq!(inside.verdict, Verdict::Inconclusive);
        assert!(modulus_certificate(&f, &vecp(&f, &["0", "y^3"]), &wd(&[4, 1], &[4, 5]), BaseGroup::A, 8).is_err());
    }

    #[test]
    fn fw_k_modulus() {
        let f = MapGerm::parse("x*y + z^3, x*z + y^2*z^2", None, None).unwrap();
        let w = wd(&[7, 2, 3], &[9, 10]);
        let c = modulus_certificate(&f, &vecp(&f, &["0", "y^6"]), &w, BaseGroup::K, 6).unwrap();
        assert_eq!(c.kernel_dim, 1);
        assert_eq!(c.verdict, Verdict::Modulus);
    }

    #[test]
    fn h_family_kernel() {
        let v: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let f = MapGerm::parse("x*z + x*y^2 + y^3, y*z, x^2", Some(&v), None).unwrap();
        let k = filtration_zero_kernel(&f, &wd(&[1, 1, 2], &[3, 3, 2]), BaseGroup::K).unwrap();
        // (x^2 d/dz, B) with B f = (x f_3, y f_3, 0) is divergence-free
        assert_eq!(k.dim, 3);
        assert_eq!(k.divergence_rank, 1);
    }

    #[test]
    fn degenerate_weights() {
        let f = MapGerm::parse("x, y^2", None, None).unwrap();
        assert!(matches!(
            filtration_zero_kernel(&f, &wd(&[1, 0], &[1, 0]), BaseGroup::A),
            Err(Error::DegenerateWeights(_))
        ));
    }
}
