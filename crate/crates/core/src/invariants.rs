//! Colengths of ideals and modules, Milnor and Tjurina numbers, and the
//! upper bounds for `K_Omega_n` moduli.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::germ::MapGerm;
use crate::jetlin::{module_multiples, standard_cobasis, Echelon, JetSpace};
use crate::rational::Rational;
use crate::ring::{jacobian, maximal_minors, Polynomial};
use crate::tangent::{gamma_generators, BaseGroup, GroupSpec, VolumeSide};
use crate::weights::{wqh_certificate, WeightData, WqhQuery};

pub const DEFAULT_SEED: u64 = 0x6d75;
pub const DEFAULT_RETRIES: usize = 5;

/// A colength, or the verdict that none was certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Colength {
    Finite(usize),
    InfiniteSuspected,
}

impl Colength {
    pub fn finite(self) -> Option<usize> {
        match self {
            Colength::Finite(v) => Some(v),
            Colength::InfiniteSuspected => None,
        }
    }
}

impl Serialize for Colength {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Colength::Finite(v) => s.serialize_u64(*v as u64),
            Colength::InfiniteSuspected => s.serialize_str("INFINITE_SUSPECTED"),
        }
    }
}

impl std::fmt::Display for Colength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Colength::Finite(v) => write!(f, "{v}"),
            Colength::InfiniteSuspected => f.write_str("INFINITE_SUSPECTED"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ColengthResult {
    pub value: Colength,
    pub certified: bool,
    /// First order `d` with `colength(d) = colength(d - 1)`: then every
    /// degree-`d` element lies in the span, and Nakayama gives
    /// `m^d` inside the module.
    pub certificate_order: Option<u32>,
    /// `dim O^m / (I + m^{d+1} O^m)` for `d = 0..=k_max`.
    pub per_order: Vec<usize>,
    /// Standard monomials (or monomial vectors) of the quotient, when certified.
    pub cobasis: Vec<String>,
}

fn format_unit(comps: usize, c: usize, m: &str) -> String {
    if comps == 1 {
        return m.to_string();
    }
    let parts: Vec<&str> = (0..comps).map(|j| if j == c { m } else { "0" }).collect();
    format!("({})", parts.join(", "))
}

/// Colength of the submodule of `O_n^m` generated by `gens`.
pub fn colength_module(gens: &[Vec<Polynomial>], nvars: usize, names: &[String], k_max: u32) -> Result<ColengthResult> {
    if gens.is_empty() {
        return Err(invalid("empty generator list"));
    }
    let comps = gens[0].len();
    if comps == 0 || gens.iter().any(|g| g.len() != comps || g.iter().any(|p| p.nvars() != nvars)) {
        return Err(Error::Arity("generators of mixed shape".into()));
    }
    if names.len() != nvars {
        return Err(Error::Arity(format!("{} names for {nvars} variables", names.len())));
    }
    if k_max < 1 {
        return Err(invalid("k_max must be positive"));
    }
    let amb = JetSpace::new(nvars, comps, k_max, true);
    let mut rows = module_multiples(&amb, gens);
    rows.sort_by_key(|r| (r.len(), r[0].0));
    let mut e = Echelon::new(amb.dim());
    for r in &rows {
        e.insert(r);
    }
    let per_order: Vec<usize> = (0..=k_max)
        .map(|d| {
            let lim = amb.dim_up_to(d);
            lim - e.rank_below(lim)
        })
        .collect();
    let certificate_order = (1..=k_max).find(|&d| per_order[d as usize] == per_order[d as usize - 1]);
    let (value, cobasis) = match certificate_order {
        Some(d) => {
            let cob = standard_cobasis(&amb, &e, d)
                .into_iter()
                .map(|c| {
                    let (j, m) = &amb.basis()[c];
                    format_unit(comps, *j, &m.format(names))
                })
                .collect();
            (Colength::Finite(per_order[d as usize]), cob)
        }
        None => (Colength::InfiniteSuspected, Vec::new()),
    };
    Ok(ColengthResult { value, certified: certificate_order.is_some(), certificate_order, per_order, cobasis })
}

/// Colength of an ideal of `O_n`.
pub fn colength_ideal(gens: &[Polynomial], names: &[String], k_max: u32) -> Result<ColengthResult> {
    let Some(first) = gens.first() else {
        return Err(invalid("empty generator list"));
    };
    let n = first.nvars();
    let g: Vec<Vec<Polynomial>> = gens.iter().map(|p| vec![p.clone()]).collect();
    colength_module(&g, n, names, k_max)
}

/// All first partials of all polynomials: the ideal written
/// `<grad g_1, .., grad g_s>`.
pub fn gradient_ideal(gens: &[Polynomial]) -> Vec<Polynomial> {
    let mut out = Vec::new();
    for g in gens {
        for i in 0..g.nvars() {
            let d = g.derivative(i).expect("variable index");
            if !d.is_zero() {
                out.push(d);
            }
        }
    }
    out
}

/// Colength of `tf(theta_n) + f^*(m_p) theta_f` in `theta_f`.
pub fn tjurina(f: &MapGerm, k_max: u32) -> Result<ColengthResult> {
    let n = f.n();
    let p = f.p();
    let jac = f.jacobian();
    let mut gens: Vec<Vec<Polynomial>> = (0..n).map(|i| (0..p).map(|j| jac[j][i].clone()).collect()).collect();
    for c in f.components() {
        for i in 0..p {
            let mut v = vec![Polynomial::zero(n); p];
            v[i] = c.clone();
            gens.push(v);
        }
    }
    colength_module(&gens, n, f.source_vars(), k_max)
}

#[derive(Clone, Debug, Serialize)]
pub struct MilnorStage {
    /// Number of components entering this stage.
    pub stage: usize,
    pub colength: ColengthResult,
    /// Milnor number of the complete intersection of the first `stage` components.
    pub mu: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MilnorReport {
    pub value: usize,
    pub certified: bool,
    pub seed: u64,
    pub attempts: usize,
    /// Linear recombination of the components that was used, when the
    /// given order failed.
    pub recombination: Option<Vec<Vec<Rational>>>,
    pub stages: Vec<MilnorStage>,
}

fn le_greuel(comps: &[Polynomial], names: &[String], k_max: u32) -> std::result::Result<Vec<MilnorStage>, String> {
    let n = names.len();
    let mut stages = Vec::new();
    let mut prev = 0usize;
    for j in 1..=comps.len() {
        let mut gens: Vec<Polynomial> = comps[..j - 1].to_vec();
        let jac = jacobian(&comps[..j], n);
        gens.extend(maximal_minors(&jac, n).into_iter().filter(|m| !m.is_zero()));
        if gens.is_empty() {
            return Err(format!("stage {j}: all minors vanish"));
        }
        let c = colength_ideal(&gens, names, k_max).map_err(|e| format!("stage {j}: {e}"))?;
        let Colength::Finite(v) = c.value else {
            return Err(format!("stage {j}: colength not certified by order {k_max}"));
        };
        if v < prev {
            return Err(format!("stage {j}: colength {v} below the previous Milnor number {prev}"));
        }
        stages.push(MilnorStage { stage: j, colength: c, mu: v - prev });
        prev = v - prev;
    }
    Ok(stages)
}

fn random_matrix(rng: &mut ChaCha8Rng, p: usize) -> Vec<Vec<Rational>> {
    loop {
        let m: Vec<Vec<Rational>> =
            (0..p).map(|_| (0..p).map(|_| Rational::from_int(rng.gen_range(-4..=4))).collect()).collect();
        let mut e = Echelon::new(p);
        let rank = m
            .iter()
            .filter(|row| {
                let v: Vec<(usize, Rational)> =
                    row.iter().enumerate().filter(|(_, a)| !a.is_zero()).map(|(i, a)| (i, a.clone())).collect();
                !v.is_empty() && e.insert(&v).is_some()
            })
            .count();
        if rank == p {
            return m;
        }
    }
}

/// Milnor number of a hypersurface or of an ICIS. The ICIS case uses the
/// Le-Greuel recursion on the given components, then on seeded random
/// recombinations when some stage is not finite.
pub fn milnor(f: &MapGerm, k_max: u32, seed: Option<u64>) -> Result<MilnorReport> {
    let n = f.n();
    let p = f.p();
    if p > n {
        return Err(Error::Dimension(format!("a complete intersection needs p <= n, got p={p}, n={n}")));
    }
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let names = f.source_vars();
    let mut last = String::new();
    let retries = if p == 1 { 0 } else { DEFAULT_RETRIES };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..=retries {
        let (comps, recombination) = if attempt == 0 {
            (f.components().to_vec(), None)
        } else {
            let a = random_matrix(&mut rng, p);
            let comps = a
                .iter()
                .map(|row| {
                    let mut s = Polynomial::zero(n);
                    for (c, g) in row.iter().zip(f.components()) {
                        s = &s + &g.scale(c);
                    }
                    s
                })
                .collect();
            (comps, Some(a))
        };
        match le_greuel(&comps, names, k_max) {
            Ok(stages) => {
                let value = stages.last().map_or(0, |s| s.mu);
                return Ok(MilnorReport { value, certified: true, seed, attempts: attempt + 1, recombination, stages });
            }
            Err(e) => last = e,
        }
    }
    Err(Error::NonFinite(format!("Milnor number of {} after {} attempts: {last}", f.format(), retries + 1)))
}

/// Milnor number of a single function germ.
pub fn milnor_hypersurface(h: &Polynomial, names: &[String], k_max: u32) -> Result<ColengthResult> {
    let grad = gradient_ideal(std::slice::from_ref(h));
    if grad.is_empty() {
        return Err(invalid("constant function germ"));
    }
    colength_ideal(&grad, names, k_max)
}

#[derive(Clone, Debug, Serialize)]
pub struct VarchenkoReport {
    pub mu: usize,
    pub tau: usize,
    pub value: usize,
}

/// `mu(h) - tau(h)`, the dimension of `<h, grad h> / <grad h>`.
pub fn varchenko_dim(h: &Polynomial, names: &[String], k_max: u32) -> Result<VarchenkoReport> {
    let mu = milnor_hypersurface(h, names, k_max)?;
    let Colength::Finite(mu) = mu.value else {
        return Err(Error::NonFinite("Milnor number not certified".into()));
    };
    let mut gens = gradient_ideal(std::slice::from_ref(h));
    gens.insert(0, h.clone());
    let tau = colength_ideal(&gens, names, k_max)?;
    let Colength::Finite(tau) = tau.value else {
        return Err(Error::NonFinite("Tjurina number not certified".into()));
    };
    if tau > mu {
        return Err(Error::Inconsistent(format!("tau = {tau} exceeds mu = {mu}")));
    }
    Ok(VarchenkoReport { mu, tau, value: mu - tau })
}

#[derive(Clone, Debug)]
pub enum BoundMode {
    /// Colength of the gradient ideal of the components, each of which
    /// must be quasi-homogeneous in the given coordinates.
    WqhGenerators,
    /// `mu(sum a_i g_i)` for the given coefficients.
    Hypersurface(Vec<Rational>),
    /// Minimum of `mu(sum a_i g_i)` over the coordinate projections and
    /// `samples` seeded random projections.
    GenericLinear { seed: u64, samples: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundSample {
    pub coefficients: Vec<Rational>,
    pub mu: Colength,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub mode: String,
    pub value: Colength,
    pub certified: bool,
    /// Weights certifying quasi-homogeneity of each component.
    pub component_weights: Vec<WeightData>,
    pub samples: Vec<BoundSample>,
    pub note: String,
}

fn component_weights(f: &MapGerm, g: &Polynomial) -> Result<Option<WeightData>> {
    let single = MapGerm::new(f.source_vars().to_vec(), vec!["t".into()], vec![g.clone()])?;
    let positive = wqh_certificate(&single, WqhQuery::QuasiHomogeneous)?;
    if let Some(c) = positive.certificate {
        return Ok(Some(c.weights));
    }
    let nonneg = wqh_certificate(&single, WqhQuery::Group(GroupSpec::new(BaseGroup::K, VolumeSide::Source)?))?;
    Ok(nonneg.certificate.map(|c| c.weights).filter(|w| w.degrees[0] > 0))
}

fn combination(f: &MapGerm, a: &[Rational]) -> Polynomial {
    let mut s = Polynomial::zero(f.n());
    for (c, g) in a.iter().zip(f.components()) {
        s = &s + &g.scale(c);
    }
    s
}

fn mu_of(h: &Polynomial, names: &[String], k_max: u32) -> Colength {
    if h.is_zero() {
        return Colength::InfiniteSuspected;
    }
    milnor_hypersurface(h, names, k_max).map_or(Colength::InfiniteSuspected, |c| c.value)
}

/// Upper bounds for `dim M(K_Omega_n, f)`.
pub fn upper_bound(f: &MapGerm, mode: &BoundMode, k_max: u32) -> Result<BoundReport> {
    let names = f.source_vars();
    match mode {
        BoundMode::WqhGenerators => {
            let mut ws = Vec::new();
            for (j, g) in f.components().iter().enumerate() {
                if g.is_zero() {
                    return Err(Error::NotQuasiHomogeneous(format!("component {} is zero", j + 1)));
                }
                match component_weights(f, g)? {
                    Some(w) => ws.push(w),
                    None => {
                        return Err(Error::NotQuasiHomogeneous(format!(
                            "component {} is not quasi-homogeneous in the given coordinates",
                            j + 1
                        )))
                    }
                }
            }
            let c = colength_ideal(&gradient_ideal(f.components()), names, k_max)?;
            Ok(BoundReport {
                mode: "wqh_generators".into(),
                value: c.value,
                certified: c.certified,
                component_weights: ws,
                samples: Vec::new(),
                note: "hypothesis checked as quasi-homogeneity of each component in the given coordinates".into(),
            })
        }
        BoundMode::Hypersurface(a) => {
            if a.len() != f.p() {
                return Err(Error::Arity(format!("{} coefficients for {} components", a.len(), f.p())));
            }
            let mu = mu_of(&combination(f, a), names, k_max);
            Ok(BoundReport {
                mode: "hypersurface".into(),
                value: mu,
                certified: mu.finite().is_some(),
                component_weights: Vec::new(),
                samples: vec![BoundSample { coefficients: a.clone(), mu }],
                note: String::new(),
            })
        }
        BoundMode::GenericLinear { seed, samples } => {
            let p = f.p();
            let mut coeffs: Vec<Vec<Rational>> = (0..p)
                .map(|i| (0..p).map(|j| Rational::from_int((i == j) as i64)).collect())
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            while coeffs.len() < p + samples {
                let a: Vec<Rational> = (0..p).map(|_| Rational::from_int(rng.gen_range(-5..=5))).collect();
                if a.iter().any(|c| !c.is_zero()) {
                    coeffs.push(a);
                }
            }
            let out: Vec<BoundSample> = coeffs
                .into_iter()
                .map(|a| {
                    let mu = mu_of(&combination(f, &a), names, k_max);
                    BoundSample { coefficients: a, mu }
                })
                .collect();
            let Some(best) = out.iter().filter_map(|s| s.mu.finite()).min() else {
                return Err(Error::NonFinite("no sampled projection has a certified Milnor number".into()));
            };
            Ok(BoundReport {
                mode: "generic_linear".into(),
                value: Colength::Finite(best),
                certified: true,
                component_weights: Vec::new(),
                samples: out,
                note: String::new(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiltrationClass {
    pub vector: Vec<String>,
    pub component: usize,
    pub monomial: String,
    pub filtration: i64,
}

/// Standard monomial vectors of `m_n theta_f / pi_k(LA f0)` with
/// positive filtration.
pub fn positive_filtration_basis(f0: &MapGerm, weights: &WeightData, k: u32) -> Result<Vec<FiltrationClass>> {
    if !weights.is_isobaric_for(f0) {
        return Err(Error::NotQuasiHomogeneous(format!("{} is not isobaric for the given weights", f0.format())));
    }
    let (amb, gens) = gamma_generators(f0, GroupSpec::new(BaseGroup::A, VolumeSide::None)?, k);
    let mut e = Echelon::new(amb.dim());
    let mut gens = gens;
    gens.sort_by_key(|r| r.len());
    for g in &gens {
        e.insert(g);
    }
    let names = f0.source_vars();
    let mut out: Vec<FiltrationClass> = standard_cobasis(&amb, &e, k)
        .into_iter()
        .filter_map(|c| {
            let (j, m) = &amb.basis()[c];
            let fil = m.weighted_degree(&weights.weights) - weights.degrees[*j];
            (fil > 0).then(|| {
                let s = m.format(names);
                FiltrationClass {
                    vector: (0..f0.p()).map(|i| if i == *j { s.clone() } else { "0".into() }).collect(),
                    component: *j,
                    monomial: s,
                    filtration: fil,
                }
            })
        })
        .collect();
    out.sort_by_key(|c| (c.filtration, c.component));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::parse_polynomial;

    fn names(s: &str) -> Vec<String> {
        s.split(',').map(|t| t.to_string()).collect()
    }

    fn polys(text: &[&str], n: &[String]) -> Vec<Polynomial> {
        text.iter().map(|t| parse_polynomial(t, n).unwrap()).collect()
    }

    #[test]
    fn ideal_colengths() {
        let v = names("x,y");
        let r = colength_ideal(&polys(&["x", "y"], &v), &v, 4).unwrap();
        assert_eq!(r.value, Colength::Finite(1));
        assert!(r.certified);
        assert_eq!(r.cobasis, vec!["1"]);
        let r = colength_ideal(&polys(&["x^2", "y^2"], &v), &v, 6).unwrap();
        assert_eq!(r.value, Colength::Finite(4));
        let r = colength_ideal(&polys(&["x*y"], &v), &v, 8).unwrap();
        assert_eq!(r.value, Colength::InfiniteSuspected);
        assert!(colength_ideal(&[], &v, 4).is_err());
    }

    #[test]
    fn certificate_is_stable_in_k() {
        let v = names("x,y");
        let g = polys(&["x^3 + y^4", "x*y^2"], &v);
        let a = colength_ideal(&g, &v, 8).unwrap();
        let b = colength_ideal(&g, &v, 10).unwrap();
        assert!(a.certified);
        assert_eq!(a.value, b.value);
        assert_eq!(a.cobasis, b.cobasis);
    }

    #[test]
    fn gradient_colength_of_g557() {
        let v = names("x,y");
        let g = polys(&["x^2 + y^5", "x*y^5 + y^7"], &v);
        let r = colength_ideal(&gradient_ideal(&g), &v, 10).unwrap();
        assert_eq!(r.value, Colength::Finite(4));
        assert_eq!(r.cobasis, vec!["1", "y", "y^2", "y^3"]);
    }

    #[test]
    fn hypersurface_numbers() {
        let v = names("x,y");
        let h = parse_polynomial("x^3 + y^3", &v).unwrap();
        assert_eq!(milnor_hypersurface(&h, &v, 8).unwrap().value, Colength::Finite(4));
        assert_eq!(varchenko_dim(&h, &v, 8).unwrap().value, 0);
        let h = parse_polynomial("x^5 + y^5 + x^3*y^3", &v).unwrap();
        let r = varchenko_dim(&h, &v, 14).unwrap();
        assert_eq!(r.mu, 16);
        assert_eq!(r.value, 1);
        let f = MapGerm::parse("x^2 + y^2", None, None).unwrap();
        assert_eq!(milnor(&f, 6, None).unwrap().value, 1);
        assert_eq!(tjurina(&f, 6).unwrap().value, Colength::Finite(1));
    }

    #[test]
    fn fw_space_curve() {
        let f = MapGerm::parse("x*y + z^3, x*z + y^2*z^2 + y^6", None, None).unwrap();
        assert_eq!(milnor(&f, 12, None).unwrap().value, 17);
        assert_eq!(tjurina(&f, 12).unwrap().value, Colength::Finite(15));
        let c = colength_ideal(&gradient_ideal(f.components()), f.source_vars(), 6).unwrap();
        assert_eq!(c.value, Colength::Finite(1));
        let b = upper_bound(&f, &BoundMode::WqhGenerators, 6).unwrap();
        assert_eq!(b.value, Colength::Finite(1));
        let b = upper_bound(&f, &BoundMode::GenericLinear { seed: 1, samples: 3 }, 10).unwrap();
        assert_eq!(b.value, Colength::Finite(2));
    }

    #[test]
    fn milnor_seeds_agree() {
        let f = MapGerm::parse("x*y + z^3, x*z + y^2*z^2 + y^7", None, None).unwrap();
        let a = milnor(&f, 12, Some(3)).unwrap();
        assert_eq!(a.value, 18);
        let swapped = MapGerm::parse("x*z + y^2*z^2 + y^7, x*y + z^3", None, None).unwrap();
        assert_eq!(milnor(&swapped, 12, Some(11)).unwrap().value, 18);
    }

    #[test]
    fn filtration_classes() {
        let f = MapGerm::parse("x, x*y + y^5", None, None).unwrap();
        let w = WeightData { weights: vec![4, 1], degrees: vec![4, 5] };
        let b = positive_filtration_basis(&f, &w, 9).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].vector, vec!["0".to_string(), "y^7".to_string()]);
        assert_eq!(b[0].filtration, 2);
        let s = MapGerm::parse("x, y^3 + x*y", None, None).unwrap();
        let w = WeightData { weights: vec![2, 1], degrees: vec![2, 3] };
        assert!(positive_filtration_basis(&s, &w, 8).unwrap().is_empty());
        let bad = WeightData { weights: vec![1, 1], degrees: vec![1, 3] };
        assert!(positive_filtration_basis(&s, &bad, 8).is_err());
    }
}
