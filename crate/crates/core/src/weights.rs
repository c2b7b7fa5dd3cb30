//! Quasihomogeneity and weak quasihomogeneity in the given coordinates.
//!
//! The weights `(w, delta)` with `<w, alpha> = delta_j` for every monomial
//! of `f_j` form a linear space; the sign conditions are decided on it by
//! Fourier-Motzkin elimination over exact rationals.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::germ::MapGerm;
use crate::jetlin::Echelon;
use crate::rational::{primitive_integer_vector, Rational};
use crate::ring::{weighted_degree_analysis, WeightedDegree};
use crate::tangent::{BaseGroup, GroupSpec, VolumeSide};

/// Integer source weights and target degrees.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct WeightData {
    pub weights: Vec<i64>,
    pub degrees: Vec<i64>,
}

impl WeightData {
    /// Whether every component is isobaric of its degree.
    pub fn is_isobaric_for(&self, f: &MapGerm) -> bool {
        if self.weights.len() != f.n() || self.degrees.len() != f.p() {
            return false;
        }
        f.components().iter().zip(&self.degrees).all(|(c, &d)| {
            c.is_zero()
                || matches!(weighted_degree_analysis(c, &self.weights), Ok(WeightedDegree::Isobaric(e)) if e == d)
        })
    }
}

/// Homogeneous solution space in `(w, delta)` coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct WeightSpace {
    pub n: usize,
    pub p: usize,
    /// Primitive integer basis vectors `(w_1..w_n, delta_1..delta_p)`.
    pub basis: Vec<Vec<BigInt>>,
}

pub fn qh_weight_space(f: &MapGerm) -> WeightSpace {
    let n = f.n();
    let p = f.p();
    let cols = n + p;
    let mut e = Echelon::new(cols);
    for (j, c) in f.components().iter().enumerate() {
        for (m, _) in c.terms() {
            let mut row: Vec<(usize, Rational)> = m
                .exps()
                .iter()
                .enumerate()
                .filter(|(_, &a)| a > 0)
                .map(|(i, &a)| (i, Rational::from_int(a as i64)))
                .collect();
            row.push((n + j, Rational::from_int(-1)));
            e.insert(&row);
        }
    }
    let rref = e.rref();
    let pivots: Vec<usize> = rref.iter().map(|r| r.0).collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (pc, row) in &rref {
            if let Some((_, a)) = row.iter().find(|(c, _)| *c == free) {
                v[*pc] = -a;
            }
        }
        basis.push(primitive_integer_vector(&v));
    }
    WeightSpace { n, p, basis }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WqhCondition {
    /// all `delta_j >= 0`, `sum delta > 0`
    TargetDegreesNonnegative,
    /// all `w_i >= 0`, `sum w > 0`
    SourceWeightsNonnegative,
    /// `sum delta != 0`
    DegreeSumNonzero,
    /// all `w_i > 0`
    PositiveWeights,
}

impl fmt::Display for WqhCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WqhCondition::TargetDegreesNonnegative => "delta >= 0, sum(delta) > 0",
            WqhCondition::SourceWeightsNonnegative => "w >= 0, sum(w) > 0",
            WqhCondition::DegreeSumNonzero => "sum(delta) != 0",
            WqhCondition::PositiveWeights => "w > 0",
        })
    }
}

impl WqhCondition {
    pub fn holds(self, w: &WeightData) -> bool {
        let sd: i64 = w.degrees.iter().sum();
        let sw: i64 = w.weights.iter().sum();
        match self {
            WqhCondition::TargetDegreesNonnegative => w.degrees.iter().all(|&d| d >= 0) && sd > 0,
            WqhCondition::SourceWeightsNonnegative => w.weights.iter().all(|&x| x >= 0) && sw > 0,
            WqhCondition::DegreeSumNonzero => sd != 0,
            WqhCondition::PositiveWeights => w.weights.iter().all(|&x| x > 0),
        }
    }
}

/// What is being asked: a volume-constrained group or plain q.h.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WqhQuery {
    Group(GroupSpec),
    QuasiHomogeneous,
}

impl WqhQuery {
    pub fn condition(self) -> Result<WqhCondition> {
        match self {
            WqhQuery::QuasiHomogeneous => Ok(WqhCondition::PositiveWeights),
            WqhQuery::Group(g) => match (g.base, g.volume) {
                (BaseGroup::A, VolumeSide::Target) => Ok(WqhCondition::TargetDegreesNonnegative),
                (BaseGroup::K, VolumeSide::Source) => Ok(WqhCondition::SourceWeightsNonnegative),
                (BaseGroup::K, VolumeSide::Target) => Ok(WqhCondition::DegreeSumNonzero),
                (BaseGroup::R | BaseGroup::L | BaseGroup::C, _) => Err(Error::UnsupportedGroup(format!(
                    "{g}: only the trivial versions of weak quasihomogeneity apply"
                ))),
                _ => Err(Error::UnsupportedGroup(format!("{g}: no weak quasihomogeneity notion"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivialTag {
    ZeroComponent,
    PositiveRank,
}

#[derive(Clone, Debug, Serialize)]
pub struct WqhCertificate {
    pub weights: WeightData,
    pub condition: WqhCondition,
    pub trivially: Option<TrivialTag>,
}

impl WqhCertificate {
    /// Re-checks isobaricity and the sign condition from scratch.
    pub fn validate(&self, f: &MapGerm) -> bool {
        self.weights.is_isobaric_for(f) && self.condition.holds(&self.weights)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WqhOutcome {
    pub certificate: Option<WqhCertificate>,
    /// Elimination log; ends with the contradiction when infeasible.
    pub trace: Vec<String>,
}

/// `a . t >= 0` or `> 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Ineq {
    a: Vec<Rational>,
    strict: bool,
}

fn normalize_ineq(a: Vec<Rational>, strict: bool) -> Ineq {
    let p = primitive_integer_vector(&a);
    Ineq { a: p.into_iter().map(Rational::from_bigint).collect(), strict }
}

/// Deduplicates, keeping the strict version of repeated inequalities.
fn dedup(v: Vec<Ineq>) -> Vec<Ineq> {
    let mut m: BTreeMap<Vec<Rational>, bool> = BTreeMap::new();
    for i in v {
        let e = m.entry(i.a).or_insert(false);
        *e |= i.strict;
    }
    m.into_iter()
        .filter(|(a, strict)| *strict || a.iter().any(|x| !x.is_zero()))
        .map(|(a, strict)| Ineq { a, strict })
        .collect()
}

fn dot(a: &[Rational], t: &[Rational]) -> Rational {
    let mut s = Rational::zero();
    for (x, y) in a.iter().zip(t) {
        if !x.is_zero() && !y.is_zero() {
            s += &(x * y);
        }
    }
    s
}

fn floor(r: &Rational) -> BigInt {
    let (n, d) = (r.numer(), r.denom());
    let q = &n / &d;
    if n.is_negative() && &q * &d != n {
        q - 1
    } else {
        q
    }
}

/// Picks a value for one coordinate between the given bounds.
fn choose(lower: Option<(Rational, bool)>, upper: Option<(Rational, bool)>) -> Option<Rational> {
    let ok = |x: &Rational| {
        lower.as_ref().is_none_or(|(l, s)| if *s { x > l } else { x >= l })
            && upper.as_ref().is_none_or(|(u, s)| if *s { x < u } else { x <= u })
    };
    if let (Some((l, ls)), Some((u, us))) = (&lower, &upper) {
        if l > u || (l == u && (*ls || *us)) {
            return None;
        }
    }
    // Integers by increasing absolute value, positive first.
    let lo_i: Option<BigInt> = lower.as_ref().map(|(l, _)| floor(l));
    let hi_i: Option<BigInt> = upper.as_ref().map(|(u, _)| floor(u) + BigInt::from(1));
    let zero = BigInt::zero();
    let start = match (&lo_i, &hi_i) {
        (Some(l), _) if l > &zero => l.clone(),
        (_, Some(h)) if h < &zero => h.clone(),
        _ => zero.clone(),
    };
    let mut cands = vec![start.clone()];
    for k in 1..4i64 {
        cands.push(&start + k);
        cands.push(&start - k);
    }
    for c in cands {
        let r = Rational::from_bigint(c);
        if ok(&r) {
            return Some(r);
        }
    }
    match (lower, upper) {
        (Some((l, _)), Some((u, _))) => Some(&(&l + &u) / &Rational::from_int(2)),
        (Some((l, _)), None) => Some(&l + &Rational::one()),
        (None, Some((u, _))) => Some(&u - &Rational::one()),
        (None, None) => Some(Rational::zero()),
    }
}

/// Fourier-Motzkin feasibility of a homogeneous system; returns a point.
fn fourier_motzkin(m: usize, system: Vec<Ineq>, trace: &mut Vec<String>) -> Option<Vec<Rational>> {
    let mut stages: Vec<Vec<Ineq>> = vec![dedup(system)];
    for var in (0..m).rev() {
        let cur = stages.last().unwrap();
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut next = Vec::new();
        for i in cur {
            match i.a[var].signum() {
                1 => pos.push(i),
                -1 => neg.push(i),
                _ => next.push(i.clone()),
            }
        }
        for p in &pos {
            for q in &neg {
                let ap = p.a[var].recip();
                let aq = q.a[var].abs().recip();
                let a: Vec<Rational> = p.a.iter().zip(&q.a).map(|(x, y)| &(x * &ap) + &(y * &aq)).collect();
                next.push(normalize_ineq(a, p.strict || q.strict));
            }
        }
        let next = dedup(next);
        trace.push(format!(
            "eliminate t{}: {} lower, {} upper, {} untouched -> {} constraints",
            var + 1,
            pos.len(),
            neg.len(),
            cur.len() - pos.len() - neg.len(),
            next.len()
        ));
        stages.push(next);
    }
    if stages.last().unwrap().iter().any(|i| i.strict) {
        trace.push("derived 0 > 0: infeasible".into());
        return None;
    }
    // Back-substitute t1, t2, ...; stage m - var constrains t_{var+1}.
    let mut t = vec![Rational::zero(); m];
    for var in 0..m {
        let st = &stages[m - 1 - var];
        let mut lower: Option<(Rational, bool)> = None;
        let mut upper: Option<(Rational, bool)> = None;
        for i in st {
            let c = &i.a[var];
            if c.is_zero() {
                continue;
            }
            // c t_var + rest >= 0
            let rest = dot(&i.a[..var], &t[..var]);
            let b = &(-&rest) / c;
            if c.is_positive() {
                let tighter = match &lower {
                    None => true,
                    Some((l, s)) => &b > l || (&b == l && i.strict && !s),
                };
                if tighter {
                    lower = Some((b, i.strict));
                }
            } else {
                let tighter = match &upper {
                    None => true,
                    Some((u, s)) => &b < u || (&b == u && i.strict && !s),
                };
                if tighter {
                    upper = Some((b, i.strict));
                }
            }
        }
        t[var] = choose(lower, upper)?;
    }
    trace.push("feasible".into());
    Some(t)
}

fn condition_system(cond: WqhCondition, n: usize, p: usize, basis: &[Vec<Rational>]) -> Vec<Ineq> {
    let m = basis.len();
    let coord = |idx: usize| -> Vec<Rational> { basis.iter().map(|v| v[idx].clone()).collect() };
    let sum = |range: std::ops::Range<usize>| -> Vec<Rational> {
        (0..m)
            .map(|b| {
                let mut s = Rational::zero();
                for i in range.clone() {
                    s += &basis[b][i];
                }
                s
            })
            .collect()
    };
    let mut sys = Vec::new();
    match cond {
        WqhCondition::TargetDegreesNonnegative => {
            for j in 0..p {
                sys.push(Ineq { a: coord(n + j), strict: false });
            }
            sys.push(Ineq { a: sum(n..n + p), strict: true });
        }
        WqhCondition::SourceWeightsNonnegative => {
            for i in 0..n {
                sys.push(Ineq { a: coord(i), strict: false });
            }
            sys.push(Ineq { a: sum(0..n), strict: true });
        }
        // By homogeneity, sum != 0 is feasible iff sum > 0 is.
        WqhCondition::DegreeSumNonzero => sys.push(Ineq { a: sum(n..n + p), strict: true }),
        WqhCondition::PositiveWeights => {
            for i in 0..n {
                sys.push(Ineq { a: coord(i), strict: true });
            }
        }
    }
    sys
}

fn to_weight_data(n: usize, z: &[BigInt]) -> Option<WeightData> {
    let v: Option<Vec<i64>> = z.iter().map(|x| x.to_i64()).collect();
    let v = v?;
    Some(WeightData { weights: v[..n].to_vec(), degrees: v[n..].to_vec() })
}

fn max_abs(w: &WeightData) -> i64 {
    w.weights.iter().chain(&w.degrees).map(|x| x.abs()).max().unwrap_or(0)
}

/// Small combinations of the basis, used to look for a smaller witness.
fn small_combinations(m: usize) -> Vec<Vec<i64>> {
    let range: Vec<i64> = if m <= 3 { (-2..=2).collect() } else if m <= 6 { (-1..=1).collect() } else { vec![] };
    let mut out = vec![vec![]];
    for _ in 0..m {
        let mut next = Vec::new();
        for v in &out {
            for &r in &range {
                let mut w = v.clone();
                w.push(r);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

pub fn trivially_wqh(f: &MapGerm, group: GroupSpec) -> Option<TrivialTag> {
    match group.volume {
        VolumeSide::Target if f.components().iter().any(|c| c.is_zero()) => Some(TrivialTag::ZeroComponent),
        VolumeSide::Source if f.linear_rank() >= 1 => Some(TrivialTag::PositiveRank),
        _ => None,
    }
}

/// Searches for weights satisfying the query's sign condition.
pub fn wqh_certificate(f: &MapGerm, query: WqhQuery) -> Result<WqhOutcome> {
    let cond = query.condition()?;
    let n = f.n();
    let p = f.p();
    let ws = qh_weight_space(f);
    let basis: Vec<Vec<Rational>> =
        ws.basis.iter().map(|v| v.iter().cloned().map(Rational::from_bigint).collect()).collect();
    let m = basis.len();
    let mut trace = vec![format!("solution space of dimension {m} in (w, delta)")];
    let trivially = match query {
        WqhQuery::Group(g) => trivially_wqh(f, g),
        WqhQuery::QuasiHomogeneous => None,
    };
    let sys = condition_system(cond, n, p, &basis);
    let point = if m == 0 {
        trace.push("only the zero solution".into());
        None
    } else {
        fourier_motzkin(m, sys, &mut trace)
    };
    let Some(t) = point else {
        return Ok(WqhOutcome { certificate: None, trace });
    };
    let combine = |t: &[Rational]| -> Vec<Rational> {
        (0..n + p).map(|i| dot(&basis.iter().map(|b| b[i].clone()).collect::<Vec<_>>(), t)).collect()
    };
    let mut best = to_weight_data(n, &primitive_integer_vector(&combine(&t)))
        .filter(|w| cond.holds(w))
        .ok_or_else(|| Error::Inconsistent("elimination witness violates the condition".into()))?;
    for c in small_combinations(m) {
        let t: Vec<Rational> = c.iter().map(|&x| Rational::from_int(x)).collect();
        let z = primitive_integer_vector(&combine(&t));
        if let Some(w) = to_weight_data(n, &z) {
            // Smallest max |entry|; ties go to the lexicographically larger vector.
            let key = |w: &WeightData| (max_abs(w), std::cmp::Reverse((w.weights.clone(), w.degrees.clone())));
            if cond.holds(&w) && key(&w) < key(&best) {
                best = w;
            }
        }
    }
    let cert = WqhCertificate { weights: best, condition: cond, trivially };
    if !cert.validate(f) {
        return Err(Error::Inconsistent("certificate failed re-validation".into()));
    }
    Ok(WqhOutcome { certificate: Some(cert), trace })
}
