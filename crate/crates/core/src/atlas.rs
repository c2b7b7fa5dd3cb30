//! Embedded normal-form tables, instantiation and the verification runner.
//!
//! Tables are TOML files, one per table. Component templates are ring
//! expressions with `{expr}` placeholders: `expr` is a linear integer
//! combination of the entry parameters (`{2k+1}`, `{5+i}`), or `Q` for the
//! suspension `z1^2 + ... + z_r^2`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::criteria::{modulus_certificate, Verdict};
use crate::error::{Error, Result};
use crate::germ::MapGerm;
use crate::invariants::{
    colength_ideal, gradient_ideal, milnor, tjurina, upper_bound, varchenko_dim, BoundMode, DEFAULT_SEED,
};
use crate::rational::Rational;
use crate::ring::parse_polynomial;
use crate::tangent::{moduli_dimension, BaseGroup, GroupSpec, ModuliOptions, VolumeSide};
use crate::weights::{wqh_certificate, WeightData, WqhQuery};

pub const ATLAS_ENV: &str = "GERM_MODULI_ATLAS";

const BUILTIN: &[(&str, &str)] = &[
    ("class_n2", include_str!("../atlas/class_n2.toml")),
    ("class_24", include_str!("../atlas/class_24.toml")),
    ("class_n2n", include_str!("../atlas/class_n2n.toml")),
    ("k_examples", include_str!("../atlas/k_examples.toml")),
    ("fold_cusp", include_str!("../atlas/fold_cusp.toml")),
    ("hypersurfaces", include_str!("../atlas/hypersurfaces.toml")),
];

const DEFAULT_MODULI_KMAX: u32 = 8;
const DEFAULT_INVARIANT_KMAX: u32 = 14;
const GENERIC_SAMPLES: usize = 4;

/// An integer or rational literal, or a `{...}` template.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

impl Scalar {
    fn eval(&self, params: &BTreeMap<String, Rational>) -> Result<Rational> {
        match self {
            Scalar::Int(v) => Ok(Rational::from_int(*v)),
            Scalar::Text(t) => {
                let t = t.trim();
                match t.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
                    Some(e) => eval_linear(e, params),
                    None => t.parse().map_err(|_| atlas(format!("not a number: `{t}`"))),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRange {
    pub min: Option<Scalar>,
    pub max: Option<Scalar>,
    /// Values tried by the runner when the entry lists no joint samples.
    #[serde(default)]
    pub samples: Vec<Scalar>,
    #[serde(default)]
    pub exclude: Vec<Scalar>,
    /// Integer unless set.
    #[serde(default)]
    pub rational: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvariantKind {
    Milnor,
    Tjurina,
    GradientColength,
    Varchenko,
    BoundWqh,
    BoundGeneric,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Expectation {
    Wqh {
        group: String,
        side: String,
        present: bool,
    },
    /// `value` is an integer or `"unbounded"`; `at_least`/`at_most` give
    /// an interval; `growth_from` is the first order of strict growth.
    Moduli {
        group: String,
        side: String,
        kmax: Option<u32>,
        value: Option<Scalar>,
        at_least: Option<Scalar>,
        at_most: Option<Scalar>,
        growth_from: Option<u32>,
    },
    /// `f0 + M` with the filtration-0 kernel criterion. Weights default to
    /// a quasihomogeneity certificate of `f0`.
    Modulus {
        f0: Vec<String>,
        m: Vec<String>,
        base: String,
        order: Option<u32>,
        weights: Option<Vec<i64>>,
        degrees: Option<Vec<i64>>,
    },
    Invariant {
        kind: InvariantKind,
        value: Scalar,
        kmax: Option<u32>,
    },
}

impl Expectation {
    pub fn op(&self) -> &'static str {
        match self {
            Expectation::Wqh { .. } => "wqh",
            Expectation::Moduli { .. } => "moduli",
            Expectation::Modulus { .. } => "modulus",
            Expectation::Invariant { kind, .. } => match kind {
                InvariantKind::Milnor => "milnor",
                InvariantKind::Tjurina => "tjurina",
                InvariantKind::GradientColength => "gradient_colength",
                InvariantKind::Varchenko => "varchenko",
                InvariantKind::BoundWqh => "bound_wqh",
                InvariantKind::BoundGeneric => "bound_generic",
            },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalFormEntry {
    pub id: String,
    pub family: String,
    /// Core source variables; suspension variables `z1, z2, ...` are appended.
    pub source: Vec<String>,
    pub target: Option<Vec<String>>,
    /// Whether `{Q}` may be suspended to higher source dimension.
    #[serde(default)]
    pub suspension: bool,
    /// Source dimensions checked by the runner (default: the core dimension).
    #[serde(default)]
    pub dims: Vec<usize>,
    pub components: Vec<String>,
    pub provenance: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamRange>,
    /// Conditions joined by `and` / `or` over chained comparisons, all of
    /// which must hold.
    #[serde(default)]
    pub constraints: Vec<String>,
    /// Joint parameter samples; overrides per-parameter samples.
    #[serde(default)]
    pub samples: Vec<BTreeMap<String, Scalar>>,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasTable {
    pub id: String,
    pub title: String,
    pub provenance: String,
    #[serde(default)]
    pub entries: Vec<NormalFormEntry>,
}

fn atlas(msg: impl Into<String>) -> Error {
    Error::Atlas(msg.into())
}

/// Evaluates `c0 + c1 a + c2*b - ...` over the parameters.
fn eval_linear(expr: &str, params: &BTreeMap<String, Rational>) -> Result<Rational> {
    let s: Vec<char> = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(atlas("empty expression"));
    }
    let mut i = 0;
    let mut total = Rational::zero();
    while i < s.len() {
        let mut sign = Rational::one();
        while i < s.len() && (s[i] == '+' || s[i] == '-') {
            if s[i] == '-' {
                sign = -sign;
            }
            i += 1;
        }
        let start = i;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        let coeff = if i > start {
            Rational::from_int(s[start..i].iter().collect::<String>().parse().map_err(|_| atlas(format!("bad integer in `{expr}`")))?)
        } else {
            Rational::one()
        };
        if i < s.len() && s[i] == '*' {
            i += 1;
        }
        let vstart = i;
        while i < s.len() && (s[i].is_ascii_alphanumeric() || s[i] == '_') {
            i += 1;
        }
        let term = if i > vstart {
            let name: String = s[vstart..i].iter().collect();
            let v = params.get(&name).ok_or_else(|| atlas(format!("unknown parameter `{name}` in `{expr}`")))?;
            &coeff * v
        } else if i > start {
            coeff
        } else {
            return Err(atlas(format!("malformed expression `{expr}`")));
        };
        total = &total + &(&sign * &term);
        if i < s.len() && s[i] != '+' && s[i] != '-' {
            return Err(atlas(format!("unexpected `{}` in `{expr}`", s[i])));
        }
    }
    Ok(total)
}

const COMPARATORS: &[&str] = &["<=", ">=", "!=", "==", "<", ">"];

fn eval_comparison(text: &str, params: &BTreeMap<String, Rational>) -> Result<bool> {
    let mut operands = Vec::new();
    let mut ops = Vec::new();
    let mut rest = text;
    loop {
        let hit = COMPARATORS
            .iter()
            .filter_map(|op| rest.find(op).map(|p| (p, *op)))
            .min_by_key(|&(p, op)| (p, std::cmp::Reverse(op.len())));
        match hit {
            Some((p, op)) => {
                operands.push(eval_linear(&rest[..p], params)?);
                ops.push(op);
                rest = &rest[p + op.len()..];
            }
            None => {
                operands.push(eval_linear(rest, params)?);
                break;
            }
        }
    }
    if ops.is_empty() {
        return Err(atlas(format!("constraint `{text}` has no comparison")));
    }
    Ok(ops.iter().enumerate().all(|(i, op)| {
        let (a, b) = (&operands[i], &operands[i + 1]);
        match *op {
            "<=" => a <= b,
            ">=" => a >= b,
            "!=" => a != b,
            "==" => a == b,
            "<" => a < b,
            _ => a > b,
        }
    }))
}

fn eval_constraint(text: &str, params: &BTreeMap<String, Rational>) -> Result<bool> {
    for alt in text.split(" or ") {
        let mut all = true;
        for part in alt.split(" and ") {
            all &= eval_comparison(part, params)?;
        }
        if all {
            return Ok(true);
        }
    }
    Ok(false)
}

fn render(v: &Rational) -> String {
    if v.is_integer() && !v.is_negative() {
        v.to_string()
    } else {
        format!("({v})")
    }
}

fn substitute(template: &str, params: &BTreeMap<String, Rational>, q: &str) -> Result<String> {
    let mut out = String::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..].find('}').ok_or_else(|| atlas(format!("unclosed `{{` in `{template}`")))? + open;
        let inner = rest[open + 1..close].trim();
        if inner == "Q" {
            out.push_str(&format!("({q})"));
        } else {
            out.push_str(&render(&eval_linear(inner, params)?));
        }
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

impl NormalFormEntry {
    pub fn core_dim(&self) -> usize {
        self.source.len()
    }

    pub fn check_dims(&self) -> Vec<usize> {
        if self.dims.is_empty() {
            vec![self.core_dim()]
        } else {
            self.dims.clone()
        }
    }

    /// Range, exclusion and constraint checks.
    pub fn check_params(&self, params: &BTreeMap<String, Rational>) -> Result<()> {
        for name in params.keys() {
            if !self.params.contains_key(name) {
                return Err(atlas(format!("{}: unknown parameter `{name}`", self.id)));
            }
        }
        for (name, range) in &self.params {
            let v = params.get(name).ok_or_else(|| atlas(format!("{}: missing parameter `{name}`", self.id)))?;
            if !range.rational && !v.is_integer() {
                return Err(atlas(format!("{}: parameter {name} = {v} must be an integer", self.id)));
            }
            if let Some(min) = &range.min {
                if *v < min.eval(params)? {
                    return Err(atlas(format!("{}: parameter {name} = {v} is below its range", self.id)));
                }
            }
            if let Some(max) = &range.max {
                if *v > max.eval(params)? {
                    return Err(atlas(format!("{}: parameter {name} = {v} is above its range", self.id)));
                }
            }
            for ex in &range.exclude {
                if *v == ex.eval(params)? {
                    return Err(atlas(format!("{}: parameter {name} = {v} is an excluded value", self.id)));
                }
            }
        }
        for c in &self.constraints {
            if !eval_constraint(c, params)? {
                return Err(atlas(format!("{}: constraint `{c}` fails", self.id)));
            }
        }
        Ok(())
    }

    fn source_vars(&self, n: usize) -> Result<Vec<String>> {
        let core = self.core_dim();
        if n < core || (n > core && !self.suspension) {
            return Err(atlas(format!("{}: source dimension {n} is not available (core dimension {core})", self.id)));
        }
        let mut vars = self.source.clone();
        vars.extend((1..=n - core).map(|i| format!("z{i}")));
        Ok(vars)
    }

    fn build(&self, templates: &[String], params: &BTreeMap<String, Rational>, n: usize) -> Result<MapGerm> {
        let vars = self.source_vars(n)?;
        let q = if n > self.core_dim() {
            vars[self.core_dim()..].iter().map(|z| format!("{z}^2")).collect::<Vec<_>>().join(" + ")
        } else {
            "0".to_string()
        };
        let comps = templates
            .iter()
            .map(|t| {
                let text = substitute(t, params, &q)?;
                parse_polynomial(&text, &vars).map_err(|e| atlas(format!("{}: component `{text}`: {e}", self.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        match &self.target {
            Some(t) => MapGerm::new(vars, t.clone(), comps),
            None => MapGerm::from_components(vars, comps),
        }
    }

    /// The germ at the given parameters; `n` defaults to the core dimension.
    pub fn instantiate(&self, params: &BTreeMap<String, Rational>, n: Option<usize>) -> Result<MapGerm> {
        self.check_params(params)?;
        self.build(&self.components, params, n.unwrap_or(self.core_dim()))
    }

    /// Parameter samples in table order: the joint list if given, else the
    /// product of the per-parameter samples (the minimum when none).
    pub fn parameter_samples(&self) -> Result<Vec<BTreeMap<String, Rational>>> {
        let empty = BTreeMap::new();
        if !self.samples.is_empty() {
            return self
                .samples
                .iter()
                .map(|s| s.iter().map(|(k, v)| Ok((k.clone(), v.eval(&empty)?))).collect())
                .collect();
        }
        let mut out = vec![BTreeMap::new()];
        for (name, range) in &self.params {
            let vals: Vec<Rational> = if !range.samples.is_empty() {
                range.samples.iter().map(|v| v.eval(&empty)).collect::<Result<_>>()?
            } else if let Some(min) = &range.min {
                vec![min.eval(&empty)?]
            } else {
                return Err(atlas(format!("{}: parameter `{name}` has neither samples nor a minimum", self.id)));
            };
            out = out
                .into_iter()
                .flat_map(|m| {
                    vals.iter().map(move |v| {
                        let mut m = m.clone();
                        m.insert(name.clone(), v.clone());
                        m
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

impl AtlasTable {
    pub fn parse(text: &str) -> Result<Self> {
        let t: AtlasTable = toml::from_str(text).map_err(|e| atlas(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.provenance.trim().is_empty() {
            return Err(atlas(format!("table {}: empty provenance", self.id)));
        }
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(&e.id) {
                return Err(atlas(format!("table {}: duplicate entry id {}", self.id, e.id)));
            }
            if e.provenance.trim().is_empty() {
                return Err(atlas(format!("{}: empty provenance", e.id)));
            }
            for n in e.check_dims() {
                e.source_vars(n)?;
            }
            for s in e.parameter_samples()? {
                e.check_params(&s)?;
            }
        }
        Ok(())
    }

    pub fn entry(&self, id: &str) -> Option<&NormalFormEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

pub fn builtin_tables() -> Result<Vec<AtlasTable>> {
    BUILTIN.iter().map(|(_, text)| AtlasTable::parse(text)).collect()
}

/// Tables from a file or a directory of `*.toml` files (sorted by name).
pub fn load_path(path: &Path) -> Result<Vec<AtlasTable>> {
    let read = |p: &Path| -> Result<AtlasTable> {
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        AtlasTable::parse(&text).map_err(|e| atlas(format!("{}: {e}", p.display())))
    };
    if path.is_dir() {
        let mut files: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?
            .filter_map(|d| d.ok().map(|d| d.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        files.sort();
        files.iter().map(|p| read(p)).collect()
    } else {
        Ok(vec![read(path)?])
    }
}

/// An explicit path, else `GERM_MODULI_ATLAS`, else the embedded tables.
pub fn load_tables(path: Option<&Path>) -> Result<Vec<AtlasTable>> {
    match path {
        Some(p) => load_path(p),
        None => match std::env::var_os(ATLAS_ENV) {
            Some(p) if !p.is_empty() => load_path(Path::new(&p)),
            _ => builtin_tables(),
        },
    }
}

pub fn find_table<'a>(tables: &'a [AtlasTable], id: &str) -> Result<&'a AtlasTable> {
    tables.iter().find(|t| t.id == id).ok_or_else(|| {
        let ids: Vec<&str> = tables.iter().map(|t| t.id.as_str()).collect();
        atlas(format!("no table `{id}` (available: {})", ids.join(", ")))
    })
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Maximum number of parameter samples per entry.
    pub budget: Option<usize>,
    /// Caps every order used by the checks.
    pub kmax: Option<u32>,
    /// Restricts to these entry ids.
    pub entries: Option<Vec<String>>,
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub entry: String,
    pub params: BTreeMap<String, String>,
    pub n: usize,
    pub op: String,
    pub germ: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    pub provenance: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub table: String,
    pub title: String,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

struct Job<'a> {
    entry: &'a NormalFormEntry,
    params: BTreeMap<String, Rational>,
    n: usize,
    expect: &'a Expectation,
}

fn group_of(base: &str, side: &str) -> Result<GroupSpec> {
    GroupSpec::new(base.parse::<BaseGroup>()?, side.parse::<VolumeSide>()?)
}

fn as_count(v: &Rational) -> Result<usize> {
    v.to_i64().filter(|&x| x >= 0).map(|x| x as usize).ok_or_else(|| atlas(format!("expected a count, got {v}")))
}

fn cap(k: u32, opts: &VerifyOptions) -> u32 {
    opts.kmax.map_or(k, |c| k.min(c))
}

/// `(expected, observed, pass)` for one expectation.
fn run_check(job: &Job, f: &MapGerm, opts: &VerifyOptions) -> Result<(String, String, bool)> {
    let p = &job.params;
    match job.expect {
        Expectation::Wqh { group, side, present } => {
            let out = wqh_certificate(f, WqhQuery::Group(group_of(group, side)?))?;
            let observed = match &out.certificate {
                Some(c) => format!("certificate w={:?} delta={:?}", c.weights.weights, c.weights.degrees),
                None => "no certificate".to_string(),
            };
            let expected = if *present { "certificate" } else { "no certificate" };
            Ok((expected.into(), observed, out.certificate.is_some() == *present))
        }
        Expectation::Moduli { group, side, kmax, value, at_least, at_most, growth_from } => {
            let k = cap(kmax.unwrap_or(DEFAULT_MODULI_KMAX), opts);
            let g = group_of(group, side)?;
            let r = moduli_dimension(f, g, k, ModuliOptions { cobasis: false, ..Default::default() })?;
            let dims = r.quotient_dims();
            let observed = format!(
                "{g} k<={k}: quotient dims {dims:?}, {}",
                r.stable_value.map_or("not stabilized".to_string(), |v| format!("stable at {v}"))
            );
            let unbounded = matches!(value, Some(Scalar::Text(t)) if t == "unbounded");
            if unbounded || growth_from.is_some() {
                let from = growth_from.unwrap_or(4);
                let seq: Vec<usize> = r.per_order.iter().filter(|row| row.k >= from).map(|row| row.quotient_dim).collect();
                let grows = seq.len() >= 2 && seq.windows(2).all(|w| w[0] < w[1]);
                return Ok((format!("strict growth from k={from}, unbounded"), observed, grows && !r.stabilized));
            }
            if let Some(v) = value {
                let v = as_count(&v.eval(p)?)?;
                return Ok((format!("{v}"), observed, r.stable_value == Some(v)));
            }
            let lo = at_least.as_ref().map(|s| s.eval(p).and_then(|v| as_count(&v))).transpose()?;
            let hi = at_most.as_ref().map(|s| s.eval(p).and_then(|v| as_count(&v))).transpose()?;
            let expected = match (lo, hi) {
                (Some(a), Some(b)) => format!("in [{a}, {b}]"),
                (Some(a), None) => format!(">= {a}"),
                (None, Some(b)) => format!("<= {b}"),
                (None, None) => return Err(atlas(format!("{}: moduli expectation without a value", job.entry.id))),
            };
            let top = r.top();
            let pass = lo.is_none_or(|a| top >= a) && hi.is_none_or(|b| r.stable_value.is_some_and(|v| v <= b));
            Ok((expected, observed, pass))
        }
        Expectation::Modulus { f0, m, base, order, weights, degrees } => {
            let g0 = job.entry.build(f0, p, job.n)?;
            let vars = g0.source_vars().to_vec();
            let mvec = m
                .iter()
                .map(|t| parse_polynomial(&substitute(t, p, "0")?, &vars))
                .collect::<Result<Vec<_>>>()?;
            let wd = match (weights, degrees) {
                (Some(w), Some(d)) => WeightData { weights: w.clone(), degrees: d.clone() },
                (None, None) => wqh_certificate(&g0, WqhQuery::QuasiHomogeneous)?
                    .certificate
                    .ok_or_else(|| atlas(format!("{}: f0 is not quasihomogeneous", job.entry.id)))?
                    .weights,
                _ => return Err(atlas(format!("{}: weights and degrees go together", job.entry.id))),
            };
            let deg = mvec.iter().filter_map(|c| c.degree()).max().unwrap_or(0);
            let k = cap(order.unwrap_or(deg), opts).max(deg);
            let c = modulus_certificate(&g0, &mvec, &wd, base.parse()?, k)?;
            let observed = format!(
                "{:?} (filtration {}, kernel dim {}, M in tangent space: {})",
                c.verdict, c.filtration, c.kernel_dim, c.m_in_tangent
            )
            .to_lowercase();
            Ok(("modulus".into(), observed, c.verdict == Verdict::Modulus))
        }
        Expectation::Invariant { kind, value, kmax } => {
            let k = cap(kmax.unwrap_or(DEFAULT_INVARIANT_KMAX), opts);
            let want = as_count(&value.eval(p)?)?;
            let got: String = match kind {
                InvariantKind::Milnor => match milnor(f, k, None) {
                    Ok(r) => r.value.to_string(),
                    Err(e) => e.to_string(),
                },
                InvariantKind::Tjurina => tjurina(f, k)?.value.to_string(),
                InvariantKind::GradientColength => {
                    colength_ideal(&gradient_ideal(f.components()), f.source_vars(), k)?.value.to_string()
                }
                InvariantKind::Varchenko => {
                    if f.p() != 1 {
                        return Err(atlas(format!("{}: varchenko needs a function germ", job.entry.id)));
                    }
                    match varchenko_dim(&f.components()[0], f.source_vars(), k) {
                        Ok(r) => r.value.to_string(),
                        Err(e) => e.to_string(),
                    }
                }
                InvariantKind::BoundWqh => upper_bound(f, &BoundMode::WqhGenerators, k)?.value.to_string(),
                InvariantKind::BoundGeneric => {
                    upper_bound(f, &BoundMode::GenericLinear { seed: DEFAULT_SEED, samples: GENERIC_SAMPLES }, k)?
                        .value
                        .to_string()
                }
            };
            Ok((want.to_string(), got.clone(), got == want.to_string()))
        }
    }
}

fn run_job(job: &Job, opts: &VerifyOptions) -> Check {
    let germ = job.entry.build(&job.entry.components, &job.params, job.n);
    let (germ_text, outcome) = match germ {
        Ok(f) => (f.format(), run_check(job, &f, opts)),
        Err(e) => (String::new(), Err(e)),
    };
    let (expected, observed, pass) = outcome.unwrap_or_else(|e| ("a result".into(), format!("error: {e}"), false));
    Check {
        entry: job.entry.id.clone(),
        params: job.params.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        n: job.n,
        op: job.expect.op().to_string(),
        germ: germ_text,
        expected,
        observed,
        pass,
        provenance: job.entry.provenance.clone(),
    }
}

/// Runs every expectation of every sampled entry. Checks run
/// concurrently; the report is ordered by entry id, then by sample,
/// dimension and expectation in table order.
pub fn verify_table(table: &AtlasTable, opts: &VerifyOptions) -> Result<TableReport> {
    let mut entries: Vec<&NormalFormEntry> = table
        .entries
        .iter()
        .filter(|e| opts.entries.as_ref().is_none_or(|ids| ids.contains(&e.id)))
        .collect();
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let mut jobs = Vec::new();
    for e in entries {
        let mut samples = e.parameter_samples()?;
        if let Some(b) = opts.budget {
            samples.truncate(b.max(1));
        }
        for s in samples {
            e.check_params(&s)?;
            for n in e.check_dims() {
                for x in &e.expect {
                    jobs.push(Job { entry: e, params: s.clone(), n, expect: x });
                }
            }
        }
    }
    let threads = opts
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Check>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let c = run_job(&jobs[i], opts);
                results.lock().unwrap()[i] = Some(c);
            });
        }
    });
    let checks: Vec<Check> = results.into_inner().unwrap().into_iter().map(|c| c.expect("every job ran")).collect();
    let passed = checks.iter().filter(|c| c.pass).count();
    Ok(TableReport {
        table: table.id.clone(),
        title: table.title.clone(),
        failed: checks.len() - passed,
        passed,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, i64)]) -> BTreeMap<String, Rational> {
        kv.iter().map(|(k, v)| (k.to_string(), Rational::from_int(*v))).collect()
    }

    fn table(id: &str) -> AtlasTable {
        builtin_tables().unwrap().into_iter().find(|t| t.id == id).unwrap()
    }

    fn germ(s: &str, vars: &[&str]) -> MapGerm {
        let v: Vec<String> = vars.iter().map(|x| x.to_string()).collect();
        MapGerm::parse(s, Some(&v), None).unwrap()
    }

    #[test]
    fn builtin_tables_load() {
        let ts = builtin_tables().unwrap();
        assert_eq!(ts.len(), BUILTIN.len());
        for (t, (id, _)) in ts.iter().zip(BUILTIN) {
            assert_eq!(t.id, *id);
            assert!(t.entries.iter().all(|e| !e.provenance.is_empty() && !e.expect.is_empty()));
        }
    }

    #[test]
    fn linear_expressions() {
        let p = params(&[("k", 2), ("l", 5)]);
        assert_eq!(eval_linear("2k+1", &p).unwrap(), Rational::from_int(5));
        assert_eq!(eval_linear("2*l - 2k - 1", &p).unwrap(), Rational::from_int(5));
        assert_eq!(eval_linear("-k", &p).unwrap(), Rational::from_int(-2));
        assert!(eval_linear("k^2", &p).is_err());
        assert!(eval_linear("m", &p).is_err());
        assert!(eval_constraint("l > k", &p).unwrap());
        assert!(eval_constraint("k < 3 < l", &p).unwrap());
        assert!(!eval_constraint("k >= l or l != 5", &p).unwrap());
        assert!(eval_constraint("k >= l or l != 4 and k == 2", &p).unwrap());
    }

    #[test]
    fn plane_normal_form_with_suspension() {
        let t = table("class_n2");
        let e = t.entry("n2-lips").unwrap();
        let f = e.instantiate(&params(&[("k", 2)]), Some(2)).unwrap();
        assert_eq!(f.components(), germ("x, y^3 + x^2*y", &["x", "y"]).components());
        let g = e.instantiate(&params(&[("k", 3)]), Some(4)).unwrap();
        assert_eq!(g.components(), germ("x, y^3 + x^3*y + z1^2 + z2^2", &["x", "y", "z1", "z2"]).components());
        assert!(e.instantiate(&params(&[("k", 1)]), None).is_err());
        assert!(t.entry("n2-boundary-xy-y5").unwrap().instantiate(&params(&[("a", 1)]), Some(3)).is_err());
    }

    #[test]
    fn example_families() {
        let t = table("k_examples");
        let fw = t.entry("fw-1i").unwrap().instantiate(&params(&[("i", 1)]), None).unwrap();
        assert_eq!(fw.components(), germ("x*y + z^3, x*z + y^2*z^2 + y^6", &["x", "y", "z"]).components());
        let g = t.entry("g-klm").unwrap();
        let f = g.instantiate(&params(&[("k", 5), ("l", 5), ("m", 7)]), None).unwrap();
        assert_eq!(f.components(), germ("x^2 + y^5, x*y^5 + y^7", &["x", "y"]).components());
        // k = 2(m - l)
        assert!(g.instantiate(&params(&[("k", 4), ("l", 4), ("m", 6)]), None).is_err());
        let gl = t.entry("g-lambda").unwrap();
        let mut p = BTreeMap::new();
        p.insert("lambda".to_string(), Rational::new(-1, 4));
        assert!(gl.instantiate(&p, None).is_err());
        p.insert("lambda".to_string(), Rational::new(-1, 3));
        let f = gl.instantiate(&p, None).unwrap();
        assert_eq!(f.components(), germ("x*y + z^3, x*z + y^2*z^2 - 1/3*y^5 + y^6", &["x", "y", "z"]).components());
    }

    #[test]
    fn verification_is_ordered_and_deterministic() {
        let t = table("class_n2");
        let opts = VerifyOptions {
            entries: Some(vec!["n2-fold".into(), "n2-boundary-xy-y5".into()]),
            kmax: Some(8),
            ..Default::default()
        };
        let a = verify_table(&t, &opts).unwrap();
        let b = verify_table(&t, &VerifyOptions { threads: Some(1), ..opts.clone() }).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.checks[0].entry, "n2-boundary-xy-y5");
        assert_eq!(a.checks.len(), 3 + 2 * 2);
        assert_eq!(a.failed, 0, "{:#?}", a.checks);
    }
}
