use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::germ::MapGerm;
use crate::jetlin::{quotient_cobasis, Echelon, JetSpace, SparseVec};
use crate::ring::Polynomial;

use super::generators::{part_split, GeneratorBuilder};
use super::{GroupSpec, VolumeSide};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderRow {
    pub k: u32,
    pub dim_full: usize,
    pub dim_constrained: usize,
    pub quotient_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModuliReport {
    pub germ: String,
    pub group: GroupSpec,
    pub k_max: u32,
    pub window: usize,
    pub per_order: Vec<OrderRow>,
    pub monotone: bool,
    pub stabilized: bool,
    pub stable_value: Option<usize>,
    /// Representatives of the quotient at the top order, one list of
    /// components per element.
    pub cobasis: Option<Vec<Vec<String>>>,
}

impl ModuliReport {
    pub fn quotient_dims(&self) -> Vec<usize> {
        self.per_order.iter().map(|r| r.quotient_dim).collect()
    }

    pub fn top(&self) -> usize {
        self.per_order.last().map_or(0, |r| r.quotient_dim)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ModuliOptions {
    pub window: usize,
    pub cobasis: bool,
}

impl Default for ModuliOptions {
    fn default() -> Self {
        ModuliOptions { window: 2, cobasis: true }
    }
}

/// Inserts short rows first; they are cheap pivots for the long ones.
fn fill(e: &mut Echelon, mut rows: Vec<SparseVec>) -> Vec<usize> {
    rows.sort_by_key(|r| (r.len(), r[0].0));
    rows.iter().filter_map(|r| e.insert(r)).collect()
}

/// Stabilization rule: nondecreasing sequence whose last `window + 1`
/// values agree.
pub(crate) fn stabilization(values: &[usize], window: usize) -> (bool, bool, Option<usize>) {
    let monotone = values.windows(2).all(|w| w[0] <= w[1]);
    let n = values.len();
    let stable = monotone && n > window && values[n - window - 1..].iter().all(|&v| v == values[n - 1]);
    (monotone, stable, stable.then(|| values[n - 1]))
}

/// Route A: `dim pi_k(LG f) - dim pi_k(LG_Omega f)` for `k = 2..=k_max`.
pub fn moduli_dimension(f: &MapGerm, group: GroupSpec, k_max: u32, opts: ModuliOptions) -> Result<ModuliReport> {
    if k_max < 2 {
        return Err(invalid("k_max must be at least 2"));
    }
    if group.volume == VolumeSide::None {
        return Err(invalid("moduli need a volume constraint on the source or target side"));
    }
    let group = GroupSpec::new(group.base, group.volume)?;
    let amb = JetSpace::new(f.n(), f.p(), k_max, false);
    let (common, full, restricted) = part_split(group);

    let mut builder = GeneratorBuilder::new(f, amb.clone());
    let mut base = Echelon::new(amb.dim());
    let mut rows = Vec::new();
    for p in common {
        rows.extend(builder.part(p));
    }
    fill(&mut base, rows);
    let full_rows: Vec<SparseVec> = full.into_iter().flat_map(|p| builder.part(p)).collect();
    let restricted_rows: Vec<SparseVec> = restricted.into_iter().flat_map(|p| builder.part(p)).collect();

    let (a, (b, b_new)) = std::thread::scope(|s| {
        let base_a = base.clone();
        let ha = s.spawn(move || {
            let mut a = base_a;
            fill(&mut a, full_rows);
            a
        });
        let mut b = base;
        let b_new = fill(&mut b, restricted_rows);
        (ha.join().expect("echelon thread"), (b, b_new))
    });

    for c in &b_new {
        if !a.contains(b.row(*c).unwrap()) {
            return Err(Error::Inconsistent(format!(
                "constrained tangent space is not inside the full one for {}",
                f.format()
            )));
        }
    }

    let mut per_order = Vec::new();
    for k in 2..=k_max {
        let lim = amb.dim_up_to(k);
        let da = a.rank_below(lim);
        let db = b.rank_below(lim);
        per_order.push(OrderRow { k, dim_full: da, dim_constrained: db, quotient_dim: da - db });
    }
    let q: Vec<usize> = per_order.iter().map(|r| r.quotient_dim).collect();
    let (monotone, stabilized, stable_value) = stabilization(&q, opts.window);
    let cobasis = opts.cobasis.then(|| {
        quotient_cobasis(&amb, &a, &b).iter().map(|v| format_jet(&amb, v, f.source_vars())).collect()
    });
    Ok(ModuliReport {
        germ: f.format(),
        group,
        k_max,
        window: opts.window,
        per_order,
        monotone,
        stabilized,
        stable_value,
        cobasis,
    })
}

pub(crate) fn format_jet(amb: &JetSpace, v: &SparseVec, names: &[String]) -> Vec<String> {
    amb.decode(v).iter().map(|p| p.format(names)).collect()
}

/// Encodes a section of `theta_f` into `m_n theta_f` jets of order `k`.
pub fn jet_vector(f: &MapGerm, k: u32, v: &[Polynomial]) -> Result<(Arc<JetSpace>, SparseVec)> {
    let amb = JetSpace::new(f.n(), f.p(), k, false);
    let e = amb.encode(v)?;
    Ok((amb, e))
}

/// Whether `v` lies in `pi_k(LG f)` for the (possibly constrained) group.
pub fn membership(f: &MapGerm, group: GroupSpec, k: u32, v: &[Polynomial]) -> Result<bool> {
    let group = GroupSpec::new(group.base, group.volume)?;
    let (amb, gens) = super::gamma_generators(f, group, k);
    let target = amb.encode(v)?;
    if target.is_empty() {
        return Ok(true);
    }
    let mut e = Echelon::new(amb.dim());
    fill(&mut e, gens);
    Ok(e.contains(&target))
}
