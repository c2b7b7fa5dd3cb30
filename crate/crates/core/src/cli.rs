//! Command-line front end. `run` parses arguments, dispatches to the
//! engine and writes one report; the binary is a thin wrapper.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::atlas::{find_table, load_tables, verify_table, TableReport, VerifyOptions};
use crate::criteria::{filtration_zero_kernel, modulus_certificate, FiltrationZeroKernel, ModulusCertificate, Verdict};
use crate::error::Error;
use crate::germ::{euler_field, MapGerm, Side, VectorField, VolumeDensity};
use crate::invariants::{
    colength_ideal, gradient_ideal, milnor, tjurina, upper_bound, varchenko_dim, BoundMode, BoundReport, ColengthResult, MilnorReport, VarchenkoReport, DEFAULT_SEED,
};
use crate::rational::Rational;
use crate::report::{Report, Request, Status};
use crate::ring::{default_names, parse_component_lists, parse_components, parse_polynomial, Polynomial};
use crate::tangent::{kernel_route, moduli_dimension, BaseGroup, GroupSpec, KernelReport, ModuliOptions, ModuliReport, VolumeSide};
use crate::volforms::{euler_primitive, m_equivalence_witness, MEquivalenceWitness};
use crate::weights::{wqh_certificate, WeightData, WqhOutcome, WqhQuery};

#[derive(Parser, Debug)]
#[command(name = "germ-moduli", version, about = "Moduli of map-germs under volume-preserving equivalence groups")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug, Clone)]
struct MapArgs {
    /// Components separated by commas, e.g. "x, x*y + y^5".
    #[arg(long)]
    map: String,
    /// Source variables in order (default: order of appearance).
    #[arg(long, value_delimiter = ',')]
    source_vars: Option<Vec<String>>,
    /// Target variables in order (default: y1, y2, ...).
    #[arg(long, value_delimiter = ',')]
    target_vars: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Route {
    A,
    B,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weak quasihomogeneity certificate, or NONE.
    Wqh {
        #[command(flatten)]
        map: MapArgs,
        /// Base group: A or K.
        #[arg(long)]
        group: Option<String>,
        /// Volume constraint side: source or target.
        #[arg(long)]
        side: Option<String>,
        /// Ask for plain quasihomogeneity (positive weights) instead.
        #[arg(long)]
        qh: bool,
        /// Include the elimination log.
        #[arg(long)]
        trace: bool,
    },
    /// dim pi_k(LG f) - dim pi_k(LG_Omega f) for k = 2..kmax.
    Moduli {
        #[command(flatten)]
        map: MapArgs,
        /// Base group: R, C, L, A or K.
        #[arg(long)]
        group: String,
        /// Volume constraint side: source or target.
        #[arg(long, default_value = "target")]
        side: String,
        /// Highest jet order.
        #[arg(long, default_value_t = 8)]
        kmax: u32,
        /// Stabilization window: the last window + 1 values must agree.
        #[arg(long, default_value_t = 2)]
        window: usize,
        #[arg(long, value_enum, default_value_t = Route::A)]
        route: Route,
        /// Degree cap of the kernel route (default kmax + max component degree).
        #[arg(long)]
        degree_cap: Option<u32>,
        /// Skip the quotient representatives.
        #[arg(long)]
        no_cobasis: bool,
    },
    /// Route B: kernel of gamma_f projected to the volume-side factor.
    Kernel {
        #[command(flatten)]
        map: MapArgs,
        /// Base group: C, L, A or K.
        #[arg(long)]
        group: String,
        /// Factor that carries the volume constraint: source or target.
        #[arg(long, default_value = "target")]
        side: String,
        /// Highest colength order.
        #[arg(long, default_value_t = 6)]
        kmax: u32,
        /// Degree cap of the factor generators (default kmax + max component degree).
        #[arg(long)]
        degree_cap: Option<u32>,
        /// Stabilization window for the colength sequence.
        #[arg(long, default_value_t = 2)]
        window: usize,
    },
    /// Milnor and Tjurina numbers, mu - tau, gradient-ideal colength.
    Invariants {
        #[command(flatten)]
        map: MapArgs,
        /// Milnor number (Le-Greuel for complete intersections).
        #[arg(long)]
        mu: bool,
        /// Tjurina number.
        #[arg(long)]
        tau: bool,
        /// mu - tau, for hypersurfaces.
        #[arg(long)]
        varchenko: bool,
        /// Colength of the ideal of all partials of all components.
        #[arg(long)]
        gradient: bool,
        /// Highest jet order of the colength certificates.
        #[arg(long, default_value_t = 14)]
        kmax: u32,
        /// Seed of the random recombinations (default 0x6d75).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Upper bounds for dim M(K_Omega_n, f).
    Bounds {
        #[command(flatten)]
        map: MapArgs,
        /// wqh_generators, generic_linear or hypersurface.
        #[arg(long)]
        mode: String,
        /// Coefficients of the combination, for the hypersurface mode.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coefficients: Option<Vec<String>>,
        /// Random projections beyond the coordinate ones.
        #[arg(long, default_value_t = 4)]
        samples: usize,
        /// Seed of the random projections (default 0x6d75).
        #[arg(long)]
        seed: Option<u64>,
        /// Highest jet order of the Milnor computations.
        #[arg(long, default_value_t = 14)]
        kmax: u32,
    },
    /// Filtration-0 kernel criterion for a monomial deformation of a q.h. germ.
    Criterion {
        #[command(flatten)]
        map: MapArgs,
        /// The deformation M as components, e.g. "0, y^7".
        #[arg(long)]
        monomial: String,
        /// Source weights of the q.h. initial part (default: a q.h. certificate).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Option<Vec<i64>>,
        /// Target degrees matching --weights.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        degrees: Option<Vec<i64>>,
        /// A or K.
        #[arg(long)]
        base: String,
        /// Jet order of the membership test (default deg M).
        #[arg(long)]
        order: Option<u32>,
    },
    /// g with div(g E_w) = density.
    Euler {
        /// The density h, as a polynomial.
        #[arg(long)]
        density: String,
        /// Weights w of the Euler field, one per variable.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        weights: Vec<i64>,
        /// Variables (default x, y, z, or x1, x2, ... beyond three).
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<String>>,
    },
    /// Jet-level M-equivalence of two volume densities.
    Mequiv {
        /// Density of the first volume form.
        #[arg(long)]
        omega0: String,
        /// Density of the second volume form.
        #[arg(long)]
        omega1: String,
        /// Generators of M, fields separated by ';', components by ','.
        #[arg(long)]
        gens: Option<String>,
        /// Adds the Euler field of these weights to the generators; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        euler: Vec<String>,
        /// Variables (default x, y, z, or x1, x2, ... beyond three).
        #[arg(long, value_delimiter = ',')]
        vars: Option<Vec<String>>,
        /// Jet order of the equation.
        #[arg(long, default_value_t = 4)]
        kmax: u32,
        /// Reference density (default: the standard one).
        #[arg(long)]
        reference: Option<String>,
    },
    /// The embedded normal-form tables.
    Atlas {
        #[command(subcommand)]
        action: AtlasCommand,
    },
}

#[derive(Subcommand, Debug)]
enum AtlasCommand {
    /// Tables and entry ids.
    List {
        /// Table file or directory (default: GERM_MODULI_ATLAS, else the embedded tables).
        #[arg(long)]
        path: Option<PathBuf>,
    },
    /// One entry as stored.
    Show {
        /// Table file or directory (default: GERM_MODULI_ATLAS, else the embedded tables).
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        table: String,
        #[arg(long)]
        entry: String,
    },
    /// A concrete germ from an entry.
    Instantiate {
        /// Table file or directory (default: GERM_MODULI_ATLAS, else the embedded tables).
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        table: String,
        #[arg(long)]
        entry: String,
        /// name=value; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        param: Vec<String>,
        /// Source dimension, for suspended entries.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Checks every stored expectation ("all" for every table).
    Verify {
        /// Table file or directory (default: GERM_MODULI_ATLAS, else the embedded tables).
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        table: String,
        /// Maximum parameter samples per entry.
        #[arg(long)]
        budget: Option<usize>,
        /// Caps every jet order used by the checks.
        #[arg(long)]
        kmax: Option<u32>,
        /// Restricts to these entries; repeatable.
        #[arg(long)]
        entry: Vec<String>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// A user-facing failure: exit code 1, or 2 for non-finite results.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

/// Attaches the offending input, with a caret under the position.
fn located(e: Error, text: &str) -> Failure {
    let offset = match &e {
        Error::Syntax { offset, .. } | Error::UnknownVariable { offset, .. } | Error::NegativeExponent { offset } => {
            Some(*offset)
        }
        _ => None,
    };
    match offset {
        Some(o) => {
            let col = text.get(..o.min(text.len())).map_or(o, |s| s.chars().count());
            Failure::usage(format!("{e}\n  {text}\n  {}^", " ".repeat(col)))
        }
        None => engine(e),
    }
}

fn engine(e: Error) -> Failure {
    let code = if matches!(e, Error::NonFinite(_)) { 2 } else { 1 };
    Failure { code, message: e.to_string() }
}

type Out = std::result::Result<(i32, String, String), Failure>;

struct Ctx {
    format: Format,
    timing: bool,
    start: Instant,
}

impl Ctx {
    /// Renders the report; returns exit code, stdout text and stderr notes.
    fn emit<T: Serialize>(&self, mut report: Report<T>, text: String) -> Out {
        let code = report.status.exit_code();
        let ms = self.start.elapsed().as_secs_f64() * 1e3;
        let body = match self.format {
            Format::Json => {
                if self.timing {
                    report.timing_ms = Some((ms * 1e3).round() / 1e3);
                }
                report.to_json()
            }
            Format::Text => {
                let mut t = text;
                if self.timing {
                    t.push_str(&format!("time: {ms:.3} ms\n"));
                }
                t
            }
        };
        let note = if code == 2 { "result is inconclusive (exit status 2)".to_string() } else { String::new() };
        Ok((code, body, note))
    }
}

fn parse_germ(m: &MapArgs) -> std::result::Result<MapGerm, Failure> {
    MapGerm::parse(&m.map, m.source_vars.as_deref(), m.target_vars.as_deref()).map_err(|e| located(e, &m.map))
}

fn germ_request(f: &MapGerm) -> Request {
    Request {
        germ: Some(f.format()),
        source_vars: Some(f.source_vars().to_vec()),
        target_vars: Some(f.target_vars().to_vec()),
        ..Default::default()
    }
}

fn group_spec(group: &str, side: &str) -> std::result::Result<GroupSpec, Failure> {
    let base: BaseGroup = group.parse().map_err(engine)?;
    let side: VolumeSide = side.parse().map_err(engine)?;
    GroupSpec::new(base, side).map_err(engine)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn run_wqh(ctx: &Ctx, map: &MapArgs, group: Option<&str>, side: Option<&str>, qh: bool, trace: bool) -> Out {
    let f = parse_germ(map)?;
    let (query, label) = match (qh, group) {
        (true, None) => (WqhQuery::QuasiHomogeneous, "quasihomogeneous".to_string()),
        (false, Some(g)) => {
            let side = side.ok_or_else(|| Failure::usage("--side is required with --group"))?;
            let spec = group_spec(g, side)?;
            (WqhQuery::Group(spec), spec.to_string())
        }
        (true, Some(_)) => return Err(Failure::usage("--qh and --group are exclusive")),
        (false, None) => return Err(Failure::usage("one of --group or --qh is required")),
    };
    let mut out: WqhOutcome = wqh_certificate(&f, query).map_err(engine)?;
    if !trace {
        out.trace.clear();
    }
    let text = match &out.certificate {
        Some(c) => format!(
            "germ: {}\nquery: {label}\ncertificate: w = ({}), delta = ({})\ncondition: {}{}\n",
            f.format(),
            join(&c.weights.weights),
            join(&c.weights.degrees),
            c.condition,
            c.trivially.map_or(String::new(), |t| format!("\ntrivially: {t:?}"))
        ),
        None => format!("germ: {}\nquery: {label}\nNONE: no certificate\n", f.format()),
    } + &out.trace.iter().map(|l| format!("  {l}\n")).collect::<String>();
    let mut req = germ_request(&f);
    req.group = Some(label);
    let req = req.option("trace", trace);
    ctx.emit(Report::new("wqh", req, Status::Success, true, out), text)
}

#[derive(Serialize)]
struct ModuliResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    route_a: Option<ModuliReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    route_b: Option<KernelReport>,
    /// Both routes stabilized at the same value.
    #[serde(skip_serializing_if = "Option::is_none")]
    agree: Option<bool>,
}

fn factor_of(side: VolumeSide) -> std::result::Result<Side, Failure> {
    match side {
        VolumeSide::Source => Ok(Side::Source),
        VolumeSide::Target => Ok(Side::Target),
        VolumeSide::None => Err(Failure::usage("the kernel route needs a volume side")),
    }
}

fn kernel_text(r: &KernelReport) -> String {
    let mut t = format!(
        "route B: {} {} factor, degree cap {}, image order {}, kernel dim {}\n",
        r.base, r.factor, r.degree_cap, r.image_order, r.kernel_dim
    );
    for (l, c) in r.colength.iter().enumerate() {
        t.push_str(&format!("  l={l:<3} colength {c}\n"));
    }
    match r.stable_value {
        Some(v) => t.push_str(&format!("  stabilized: {v}; cobasis {{{}}}\n", r.cobasis.join(", "))),
        None => t.push_str("  not stabilized\n"),
    }
    t
}

#[allow(clippy::too_many_arguments)]
fn run_moduli(
    ctx: &Ctx,
    map: &MapArgs,
    group: &str,
    side: &str,
    kmax: u32,
    window: usize,
    route: Route,
    degree_cap: Option<u32>,
    no_cobasis: bool,
) -> Out {
    let f = parse_germ(map)?;
    let g = group_spec(group, side)?;
    let d = degree_cap.unwrap_or(kmax + f.max_degree().max(1));
    let mut text = format!("germ: {}\ngroup: {g}\n", f.format());
    let a = if route != Route::B {
        let r = moduli_dimension(&f, g, kmax, ModuliOptions { window, cobasis: !no_cobasis }).map_err(engine)?;
        text.push_str("route A:\n");
        for row in &r.per_order {
            text.push_str(&format!(
                "  k={:<3} dim full {:<6} dim constrained {:<6} quotient_dim {}\n",
                row.k, row.dim_full, row.dim_constrained, row.quotient_dim
            ));
        }
        match r.stable_value {
            Some(v) => text.push_str(&format!("  stabilized: quotient_dim {v}\n")),
            None => text.push_str(&format!(
                "  not stabilized by k={kmax}; growth sequence [{}]\n",
                join(&r.quotient_dims())
            )),
        }
        if let Some(cb) = &r.cobasis {
            let items: Vec<String> = cb.iter().map(|v| format!("({})", v.join(", "))).collect();
            text.push_str(&format!("  cobasis at k={kmax}: {{{}}}\n", items.join(", ")));
        }
        Some(r)
    } else {
        None
    };
    let b = if route != Route::A {
        let r = kernel_route(&f, g.base, factor_of(g.volume)?, d, kmax, window).map_err(engine)?;
        text.push_str(&kernel_text(&r));
        Some(r)
    } else {
        None
    };
    let agree = match (&a, &b) {
        (Some(a), Some(b)) => Some(a.stable_value.is_some() && a.stable_value == b.stable_value),
        _ => None,
    };
    if let Some(x) = agree {
        text.push_str(&format!("routes agree: {x}\n"));
    }
    let stable = a.as_ref().is_none_or(|r| r.stabilized) && b.as_ref().is_none_or(|r| r.stabilized) && agree != Some(false);
    let status = if stable { Status::Success } else { Status::Inconclusive };
    let mut req = germ_request(&f);
    req.group = Some(g.to_string());
    let mut req = req.option("kmax", kmax).option("window", window).option("route", format!("{route:?}").to_lowercase());
    if route != Route::A {
        req = req.option("degree_cap", d);
    }
    ctx.emit(Report::new("moduli", req, status, stable, ModuliResult { route_a: a, route_b: b, agree }), text)
}

fn run_kernel(ctx: &Ctx, map: &MapArgs, group: &str, side: &str, kmax: u32, degree_cap: Option<u32>, window: usize) -> Out {
    let f = parse_germ(map)?;
    let g = group_spec(group, side)?;
    let d = degree_cap.unwrap_or(kmax + f.max_degree().max(1));
    let r = kernel_route(&f, g.base, factor_of(g.volume)?, d, kmax, window).map_err(engine)?;
    let mut text = format!("germ: {}\ngroup: {g}\n", f.format());
    text.push_str(&kernel_text(&r));
    for e in &r.elements {
        text.push_str(&format!("  element ({}) divergence {}\n", e.components.join(", "), e.divergence));
    }
    let status = if r.stabilized { Status::Success } else { Status::Inconclusive };
    let mut req = germ_request(&f);
    req.group = Some(g.to_string());
    let req = req.option("kmax", kmax).option("degree_cap", d).option("window", window);
    let certified = r.stabilized;
    ctx.emit(Report::new("kernel", req, status, certified, r), text)
}

#[derive(Serialize)]
struct InvariantsResult {
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<MilnorReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<ColengthResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    varchenko: Option<VarchenkoReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gradient_colength: Option<ColengthResult>,
}

fn colength_line(name: &str, c: &ColengthResult) -> String {
    let cert = match c.certificate_order {
        Some(d) => format!("certified at order {d}"),
        None => "not certified".to_string(),
    };
    let cob = if c.cobasis.is_empty() { String::new() } else { format!("; cobasis {{{}}}", c.cobasis.join(", ")) };
    format!("{name}: {} ({cert}){cob}\n", c.value)
}

#[allow(clippy::too_many_arguments)]
fn run_invariants(
    ctx: &Ctx,
    map: &MapArgs,
    mu: bool,
    tau: bool,
    varchenko: bool,
    gradient: bool,
    kmax: u32,
    seed: Option<u64>,
) -> Out {
    if !(mu || tau || varchenko || gradient) {
        return Err(Failure::usage("choose at least one of --mu, --tau, --varchenko, --gradient"));
    }
    let f = parse_germ(map)?;
    let mut text = format!("germ: {}\n", f.format());
    let mut certified = true;
    let m = if mu {
        let r = milnor(&f, kmax, seed).map_err(engine)?;
        text.push_str(&format!(
            "mu: {} (seed {}, {} attempt{})\n",
            r.value,
            r.seed,
            r.attempts,
            if r.attempts == 1 { "" } else { "s" }
        ));
        Some(r)
    } else {
        None
    };
    let t = if tau {
        let r = tjurina(&f, kmax).map_err(engine)?;
        certified &= r.certified;
        text.push_str(&colength_line("tau", &r));
        Some(r)
    } else {
        None
    };
    let v = if varchenko {
        if f.p() != 1 {
            return Err(Failure::usage("--varchenko needs a function germ (one component)"));
        }
        let r = varchenko_dim(&f.components()[0], f.source_vars(), kmax).map_err(engine)?;
        text.push_str(&format!("varchenko: mu - tau = {} - {} = {}\n", r.mu, r.tau, r.value));
        Some(r)
    } else {
        None
    };
    let g = if gradient {
        let r = colength_ideal(&gradient_ideal(f.components()), f.source_vars(), kmax).map_err(engine)?;
        certified &= r.certified;
        text.push_str(&colength_line("gradient colength", &r));
        Some(r)
    } else {
        None
    };
    let status = if certified { Status::Success } else { Status::Inconclusive };
    let req = germ_request(&f).option("kmax", kmax).option("seed", seed.unwrap_or(DEFAULT_SEED));
    ctx.emit(
        Report::new("invariants", req, status, certified, InvariantsResult { mu: m, tau: t, varchenko: v, gradient_colength: g }),
        text,
    )
}

fn parse_rationals(v: &[String]) -> std::result::Result<Vec<Rational>, Failure> {
    v.iter().map(|s| s.parse::<Rational>().map_err(|e| Failure::usage(e.to_string()))).collect()
}

#[allow(clippy::too_many_arguments)]
fn run_bounds(
    ctx: &Ctx,
    map: &MapArgs,
    mode: &str,
    coefficients: Option<&[String]>,
    samples: usize,
    seed: Option<u64>,
    kmax: u32,
) -> Out {
    let f = parse_germ(map)?;
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let m = match mode {
        "wqh" | "wqh_generators" => BoundMode::WqhGenerators,
        "generic" | "generic_linear" => BoundMode::GenericLinear { seed, samples },
        "hypersurface" => {
            let c = coefficients.ok_or_else(|| Failure::usage("--mode hypersurface needs --coefficients"))?;
            BoundMode::Hypersurface(parse_rationals(c)?)
        }
        other => return Err(Failure::usage(format!("unknown mode `{other}` (wqh_generators, generic_linear, hypersurface)"))),
    };
    let r: BoundReport = upper_bound(&f, &m, kmax).map_err(engine)?;
    let mut text = format!("germ: {}\nmode: {}\nupper bound: {}\n", f.format(), r.mode, r.value);
    for w in &r.component_weights {
        text.push_str(&format!("  component weights w = ({}), degree {}\n", join(&w.weights), join(&w.degrees)));
    }
    for s in &r.samples {
        text.push_str(&format!("  projection ({}): mu {}\n", join(&s.coefficients), s.mu));
    }
    let status = if r.certified { Status::Success } else { Status::Inconclusive };
    let req = germ_request(&f).option("mode", &r.mode).option("kmax", kmax).option("seed", seed).option("samples", samples);
    let certified = r.certified;
    ctx.emit(Report::new("bounds", req, status, certified, r), text)
}

#[derive(Serialize)]
struct CriterionResult {
    certificate: ModulusCertificate,
    kernel: FiltrationZeroKernel,
}

#[allow(clippy::too_many_arguments)]
fn run_criterion(
    ctx: &Ctx,
    map: &MapArgs,
    monomial: &str,
    weights: Option<&[i64]>,
    degrees: Option<&[i64]>,
    base: &str,
    order: Option<u32>,
) -> Out {
    let f = parse_germ(map)?;
    let m = parse_components(monomial, f.source_vars()).map_err(|e| located(e, monomial))?;
    let wd = match (weights, degrees) {
        (Some(w), Some(d)) => WeightData { weights: w.to_vec(), degrees: d.to_vec() },
        (None, None) => {
            wqh_certificate(&f, WqhQuery::QuasiHomogeneous)
                .map_err(engine)?
                .certificate
                .ok_or_else(|| Failure::usage(format!("{} is not quasihomogeneous; pass --weights and --degrees", f.format())))?
                .weights
        }
        _ => return Err(Failure::usage("--weights and --degrees go together")),
    };
    let base: BaseGroup = base.parse().map_err(engine)?;
    let k = order.unwrap_or_else(|| m.iter().filter_map(Polynomial::degree).max().unwrap_or(0));
    let cert = modulus_certificate(&f, &m, &wd, base, k).map_err(engine)?;
    let kernel = filtration_zero_kernel(&f, &wd, base).map_err(engine)?;
    let text = format!(
        "f0: {}\nM: ({})\nweights: w = ({}), delta = ({})\nfiltration of M: {}\nfiltration-0 kernel: dim {} (divergence rank {})\nM in the tangent space at order {}: {}\nverdict: {}\n",
        cert.f0,
        cert.m.join(", "),
        join(&wd.weights),
        join(&wd.degrees),
        cert.filtration,
        cert.kernel_dim,
        cert.divergence_rank,
        cert.order,
        cert.m_in_tangent,
        if cert.verdict == Verdict::Modulus { "modulus" } else { "inconclusive" }
    );
    let status = if cert.verdict == Verdict::Modulus { Status::Success } else { Status::Inconclusive };
    let mut req = germ_request(&f);
    req.group = Some(base.to_string());
    let req = req.option("monomial", monomial).option("order", k);
    ctx.emit(Report::new("criterion", req, status, true, CriterionResult { certificate: cert, kernel }), text)
}

fn default_vars(q: usize) -> Vec<String> {
    if q <= 3 {
        ["x", "y", "z"][..q].iter().map(|s| s.to_string()).collect()
    } else {
        default_names("x", q)
    }
}

#[derive(Serialize)]
struct EulerResult {
    primitive: String,
    /// `div(g E_w)` recomputed from the primitive equals the density.
    check: bool,
}

fn run_euler(ctx: &Ctx, density: &str, weights: &[i64], vars: Option<&[String]>) -> Out {
    let vars = vars.map_or_else(|| default_vars(weights.len()), |v| v.to_vec());
    let h = parse_polynomial(density, &vars).map_err(|e| located(e, density))?;
    let g = euler_primitive(&h, weights, &vars).map_err(engine)?;
    let e = euler_field(weights);
    let mut div = Polynomial::zero(vars.len());
    for (i, c) in e.components.iter().enumerate() {
        div = &div + &(&g * c).derivative(i).map_err(engine)?;
    }
    let check = div == h;
    let primitive = g.format(&vars);
    let text = format!("density: {}\nweights: ({})\nprimitive g: {primitive}\ncheck div(g E_w) = density: {check}\n", h.format(&vars), join(weights));
    let req = Request { source_vars: Some(vars.clone()), ..Default::default() }
        .option("density", h.format(&vars))
        .option("weights", join(weights));
    ctx.emit(Report::new("euler", req, Status::Success, check, EulerResult { primitive, check }), text)
}

#[derive(Serialize)]
struct MequivResult {
    equivalent: bool,
    witness: Option<MEquivalenceWitness>,
}

#[allow(clippy::too_many_arguments)]
fn run_mequiv(
    ctx: &Ctx,
    omega0: &str,
    omega1: &str,
    gens: Option<&str>,
    euler: &[String],
    vars: Option<&[String]>,
    kmax: u32,
    reference: Option<&str>,
) -> Out {
    let eulers: Vec<Vec<i64>> = euler
        .iter()
        .map(|s| {
            s.split(',')
                .map(|t| t.trim().parse::<i64>().map_err(|_| Failure::usage(format!("bad weight list `{s}`"))))
                .collect()
        })
        .collect::<std::result::Result<_, _>>()?;
    let vars = match vars {
        Some(v) => v.to_vec(),
        None => {
            let q = eulers.first().map(|w| w.len()).or_else(|| {
                gens.and_then(|g| g.split(';').find(|p| !p.trim().is_empty()).map(|p| p.split(',').count()))
            });
            default_vars(q.ok_or_else(|| Failure::usage("pass --vars, or give generators to fix the dimension"))?)
        }
    };
    let q = vars.len();
    let density = |t: &str| -> std::result::Result<VolumeDensity, Failure> {
        VolumeDensity::new(parse_polynomial(t, &vars).map_err(|e| located(e, t))?).map_err(engine)
    };
    let o0 = density(omega0)?;
    let o1 = density(omega1)?;
    let refd = reference.map(density).transpose()?;
    let mut fields = Vec::new();
    if let Some(g) = gens {
        for comps in parse_component_lists(g, &vars).map_err(|e| located(e, g))? {
            if comps.len() != q {
                return Err(Failure::usage(format!("a generator has {} components in {q} variables", comps.len())));
            }
            fields.push(VectorField::new(Side::Source, comps));
        }
    }
    for w in &eulers {
        if w.len() != q {
            return Err(Failure::usage(format!("{} Euler weights in {q} variables", w.len())));
        }
        fields.push(euler_field(w));
    }
    let w = m_equivalence_witness(&o0, &o1, &fields, kmax, refd.as_ref(), &vars).map_err(engine)?;
    let text = match &w {
        Some(w) => format!(
            "omega0 and omega1 are M-equivalent modulo order {}\nX = ({})\ncoefficients: ({})\n",
            w.residual_order + 1,
            w.x.join(", "),
            w.coefficients.join(", ")
        ),
        None => format!("no solution modulo order {}\n", kmax + 1),
    };
    let status = if w.is_some() { Status::Success } else { Status::Inconclusive };
    let req = Request { source_vars: Some(vars.clone()), ..Default::default() }
        .option("omega0", o0.h().format(&vars))
        .option("omega1", o1.h().format(&vars))
        .option("generators", fields.iter().map(|f| f.format(&vars)).collect::<Vec<_>>().join("; "))
        .option("kmax", kmax);
    ctx.emit(Report::new("mequiv", req, status, true, MequivResult { equivalent: w.is_some(), witness: w }), text)
}

#[derive(Serialize)]
struct TableSummary {
    id: String,
    title: String,
    provenance: String,
    entries: Vec<String>,
}

#[derive(Serialize)]
struct Instance {
    table: String,
    entry: String,
    params: BTreeMap<String, Rational>,
    germ: String,
    source_vars: Vec<String>,
    target_vars: Vec<String>,
}

fn run_atlas(ctx: &Ctx, action: &AtlasCommand) -> Out {
    let path = match action {
        AtlasCommand::List { path }
        | AtlasCommand::Show { path, .. }
        | AtlasCommand::Instantiate { path, .. }
        | AtlasCommand::Verify { path, .. } => path.as_deref(),
    };
    let tables = load_tables(path).map_err(engine)?;
    let mut req = Request::default();
    if let Some(p) = path {
        req = req.option("path", p.display());
    }
    match action {
        AtlasCommand::List { .. } => {
            let out: Vec<TableSummary> = tables
                .iter()
                .map(|t| TableSummary {
                    id: t.id.clone(),
                    title: t.title.clone(),
                    provenance: t.provenance.clone(),
                    entries: t.entries.iter().map(|e| e.id.clone()).collect(),
                })
                .collect();
            let text: String = out
                .iter()
                .map(|t| format!("{}: {} ({} entries)\n  {}\n", t.id, t.title, t.entries.len(), t.entries.join(" ")))
                .collect();
            ctx.emit(Report::new("atlas list", req, Status::Success, true, out), text)
        }
        AtlasCommand::Show { table, entry, .. } => {
            let t = find_table(&tables, table).map_err(engine)?;
            let e = t.entry(entry).ok_or_else(|| Failure::usage(format!("no entry `{entry}` in table {table}")))?;
            let text = format!(
                "{}: {}\nprovenance: {}\nsource: {}\ncomponents: ({})\nexpectations: {}\n",
                e.id,
                e.family,
                e.provenance,
                e.source.join(", "),
                e.components.join(", "),
                e.expect.iter().map(|x| x.op()).collect::<Vec<_>>().join(", ")
            );
            let req = req.option("table", table).option("entry", entry);
            ctx.emit(Report::new("atlas show", req, Status::Success, true, e.clone()), text)
        }
        AtlasCommand::Instantiate { table, entry, param, n, .. } => {
            let t = find_table(&tables, table).map_err(engine)?;
            let e = t.entry(entry).ok_or_else(|| Failure::usage(format!("no entry `{entry}` in table {table}")))?;
            let mut params = BTreeMap::new();
            for p in param {
                let (k, v) = p.split_once('=').ok_or_else(|| Failure::usage(format!("--param expects name=value, got `{p}`")))?;
                params.insert(k.trim().to_string(), v.trim().parse::<Rational>().map_err(|e| Failure::usage(e.to_string()))?);
            }
            let f = e.instantiate(&params, *n).map_err(engine)?;
            let text = format!("{}\n", f.format());
            let mut req = req.option("table", table).option("entry", entry);
            if let Some(n) = n {
                req = req.option("n", n);
            }
            let out = Instance {
                table: table.clone(),
                entry: entry.clone(),
                params,
                germ: f.format(),
                source_vars: f.source_vars().to_vec(),
                target_vars: f.target_vars().to_vec(),
            };
            ctx.emit(Report::new("atlas instantiate", req, Status::Success, true, out), text)
        }
        AtlasCommand::Verify { table, budget, kmax, entry, threads, .. } => {
            let chosen: Vec<_> = if table == "all" {
                tables.iter().collect()
            } else {
                vec![find_table(&tables, table).map_err(engine)?]
            };
            let opts = VerifyOptions {
                budget: *budget,
                kmax: *kmax,
                entries: (!entry.is_empty()).then(|| entry.clone()),
                threads: *threads,
            };
            let reports: Vec<TableReport> =
                chosen.iter().map(|t| verify_table(t, &opts)).collect::<crate::error::Result<_>>().map_err(engine)?;
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!("table {}: {} passed, {} failed\n", r.table, r.passed, r.failed));
                for c in &r.checks {
                    let params = if c.params.is_empty() {
                        String::new()
                    } else {
                        format!(" [{}]", c.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" "))
                    };
                    text.push_str(&format!(
                        "  {} {}{} n={} {}: expected {}, observed {}\n",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.entry,
                        params,
                        c.n,
                        c.op,
                        c.expected,
                        c.observed
                    ));
                }
            }
            let ok = reports.iter().all(|r| r.failed == 0);
            let mut req = req.option("table", table);
            if let Some(b) = budget {
                req = req.option("budget", b);
            }
            if let Some(k) = kmax {
                req = req.option("kmax", k);
            }
            let status = if ok { Status::Success } else { Status::Inconclusive };
            ctx.emit(Report::new("atlas verify", req, status, ok, reports), text)
        }
    }
}

fn dispatch(cli: &Cli) -> Out {
    let ctx = Ctx { format: cli.format, timing: cli.timing, start: Instant::now() };
    match &cli.command {
        Command::Wqh { map, group, side, qh, trace } => run_wqh(&ctx, map, group.as_deref(), side.as_deref(), *qh, *trace),
        Command::Moduli { map, group, side, kmax, window, route, degree_cap, no_cobasis } => {
            run_moduli(&ctx, map, group, side, *kmax, *window, *route, *degree_cap, *no_cobasis)
        }
        Command::Kernel { map, group, side, kmax, degree_cap, window } => {
            run_kernel(&ctx, map, group, side, *kmax, *degree_cap, *window)
        }
        Command::Invariants { map, mu, tau, varchenko, gradient, kmax, seed } => {
            run_invariants(&ctx, map, *mu, *tau, *varchenko, *gradient, *kmax, *seed)
        }
        Command::Bounds { map, mode, coefficients, samples, seed, kmax } => {
            run_bounds(&ctx, map, mode, coefficients.as_deref(), *samples, *seed, *kmax)
        }
        Command::Criterion { map, monomial, weights, degrees, base, order } => {
            run_criterion(&ctx, map, monomial, weights.as_deref(), degrees.as_deref(), base, *order)
        }
        Command::Euler { density, weights, vars } => run_euler(&ctx, density, weights, vars.as_deref()),
        Command::Mequiv { omega0, omega1, gens, euler, vars, kmax, reference } => {
            run_mequiv(&ctx, omega0, omega1, gens.as_deref(), euler, vars.as_deref(), *kmax, reference.as_deref())
        }
        Command::Atlas { action } => run_atlas(&ctx, action),
    }
}

/// Runs one invocation. Reports go to `out`, diagnostics to `err`; the
/// return value is the exit status (0 success, 2 inconclusive, 1 error).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok((code, body, note)) => {
            let _ = write!(out, "{body}");
            if cli.format == Format::Json {
                let _ = writeln!(out);
            }
            if !note.is_empty() {
                let _ = writeln!(err, "{note}");
            }
            code
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

