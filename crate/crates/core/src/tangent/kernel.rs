//! Route B: project the kernel of `gamma_f` to one factor and measure the
//! span of the divergences.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::germ::{divergence, MapGerm, Side, VectorField, VolumeDensity};
use crate::jetlin::{combine, kernel, Echelon, JetSpace, SparseVec};
use crate::rational::Rational;
use crate::ring::{monomials_in_range, Monomial, Polynomial};

use super::generators::GeneratorBuilder;
use super::moduli::stabilization;
use super::BaseGroup;

#[derive(Clone, Debug, Serialize)]
pub struct KernelElement {
    /// Components of the projected field, or matrix entries row by row.
    pub components: Vec<String>,
    pub divergence: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub germ: String,
    pub base: BaseGroup,
    pub factor: Side,
    pub degree_cap: u32,
    /// Jet order of the codomain in which `gamma_f` is solved.
    pub image_order: u32,
    pub order: u32,
    pub kernel_dim: usize,
    pub elements: Vec<KernelElement>,
    /// `dim C_r / (span div + m^{l+1})` for `l = 0..=order`.
    pub colength: Vec<usize>,
    pub cobasis: Vec<String>,
    pub stabilized: bool,
    pub stable_value: Option<usize>,
    pub recheck: bool,
}

enum FactorGen {
    Source(usize, Monomial),
    Target(usize, Monomial),
    Matrix(usize, usize, Monomial),
}

/// Route B. The kernel is computed for factor generators of degree `<= d`
/// against the other factor, inside jets of order high enough that every
/// factor image is exact.
pub fn kernel_route(f: &MapGerm, base: BaseGroup, factor: Side, d: u32, k: u32, window: usize) -> Result<KernelReport> {
    let dmax = f.max_degree().max(1);
    let (has_factor, image_order) = match factor {
        Side::Source => (base.has_source(), d + dmax),
        Side::Target if base.has_target_fields() => (true, (d * dmax).max(d + dmax)),
        Side::Target => (base.has_matrices(), d + dmax),
    };
    if !has_factor {
        return Err(invalid(format!("{base} has no {factor} factor")));
    }
    if d <= k {
        return Err(invalid(format!("degree cap {d} must exceed the order {k}")));
    }
    let n = f.n();
    let p = f.p();
    let amb = JetSpace::new(n, p, image_order, false);
    let mut b = GeneratorBuilder::new(f, amb.clone());

    // Other factor: everything that can reach the image degrees.
    let mut others: Vec<SparseVec> = Vec::new();
    match factor {
        Side::Source => {
            if base.has_target_fields() {
                others.extend(b.target_full(1));
            }
            if base.has_matrices() {
                others.extend(b.matrix_full());
            }
        }
        Side::Target => {
            if base.has_source() {
                others.extend(b.source_full(1, image_order));
            }
        }
    }
    let mut m = Echelon::new(amb.dim());
    others.sort_by_key(|r| r.len());
    for r in &others {
        m.insert(r);
    }

    // Factor generators and their images.
    let mut gens: Vec<FactorGen> = Vec::new();
    let mut images: Vec<SparseVec> = Vec::new();
    match factor {
        Side::Source => {
            for alpha in monomials_in_range(n, 1, d) {
                for i in 0..n {
                    let mut v = Vec::new();
                    b.source_image(i, &alpha, &Rational::one(), &mut v);
                    gens.push(FactorGen::Source(i, alpha.clone()));
                    images.push(crate::jetlin::normalize(v));
                }
            }
        }
        Side::Target if base.has_target_fields() => {
            let t = JetSpace::new(p, 1, d, false);
            for (_, beta) in t.basis() {
                for j in 0..p {
                    let mut comps = vec![Polynomial::zero(p); p];
                    comps[j] = Polynomial::monomial(beta.clone());
                    let field = VectorField::new(Side::Target, comps);
                    let img = crate::germ::wf_apply(f, &field, image_order)?;
                    gens.push(FactorGen::Target(j, beta.clone()));
                    images.push(amb.encode(&img)?);
                }
            }
        }
        Side::Target => {
            for alpha in monomials_in_range(n, 0, d) {
                for i in 0..p {
                    for j in 0..p {
                        let mut v = Vec::new();
                        amb.encode_shifted(i, &f.components()[j], &alpha, &Rational::one(), &mut v);
                        gens.push(FactorGen::Matrix(i, j, alpha.clone()));
                        images.push(crate::jetlin::normalize(v));
                    }
                }
            }
        }
    }

    let residuals: Vec<SparseVec> = images.iter().map(|v| m.normal_form(v)).collect();
    let ker = kernel(amb.dim(), &residuals);
    let recheck = ker.iter().all(|c| m.contains(&combine(&images, c)));

    // Divergences live in C_p for target fields, in C_n otherwise
    // (source fields, and traces of matrices).
    let is_matrix = factor == Side::Target && !base.has_target_fields();
    let (r, names) = match factor == Side::Target && !is_matrix {
        true => (p, f.target_vars().to_vec()),
        false => (n, f.source_vars().to_vec()),
    };
    let std = VolumeDensity::standard(r);
    let mut elements = Vec::new();
    let mut divs = Vec::new();
    for c in &ker {
        let (comps, div) = match is_matrix {
            false => {
                let q = if factor == Side::Source { n } else { p };
                let mut comps = vec![Polynomial::zero(q); q];
                for (g, a) in gens.iter().zip(c) {
                    if a.is_zero() {
                        continue;
                    }
                    match g {
                        FactorGen::Source(i, m) | FactorGen::Target(i, m) => comps[*i].add_term(m.clone(), a),
                        FactorGen::Matrix(..) => unreachable!(),
                    }
                }
                let field = VectorField::new(factor, comps.clone());
                let div = divergence(&field, &std, k.max(d))?;
                (comps, div)
            }
            true => {
                let mut entries = vec![Polynomial::zero(n); p * p];
                for (g, a) in gens.iter().zip(c) {
                    if let FactorGen::Matrix(i, j, m) = g {
                        entries[i * p + j].add_term(m.clone(), a);
                    }
                }
                let mut tr = Polynomial::zero(n);
                for i in 0..p {
                    tr = &tr + &entries[i * p + i];
                }
                (entries, tr)
            }
        };
        elements.push(KernelElement {
            components: comps.iter().map(|c| c.format(&names)).collect(),
            divergence: div.format(&names),
        });
        divs.push(div);
    }

    let cjets = JetSpace::new(r, 1, k, true);
    let mut de = Echelon::new(cjets.dim());
    for dv in &divs {
        let v = cjets.encode(std::slice::from_ref(&dv.truncate(k)))?;
        if !v.is_empty() {
            de.insert(&v);
        }
    }
    let colength: Vec<usize> = (0..=k)
        .map(|l| {
            let lim = cjets.dim_up_to(l);
            lim - de.rank_below(lim)
        })
        .collect();
    let cobasis = crate::jetlin::standard_cobasis(&cjets, &de, k)
        .into_iter()
        .map(|c| cjets.basis()[c].1.format(&names))
        .collect();
    let (_, stabilized, stable_value) = stabilization(&colength, window);
    Ok(KernelReport {
        germ: f.format(),
        base,
        factor,
        degree_cap: d,
        image_order,
        order: k,
        kernel_dim: ker.len(),
        elements,
        colength,
        cobasis,
        stabilized,
        stable_value,
        recheck,
    })
}
