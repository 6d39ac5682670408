//! The composite capacity `M_{ρ,η}(μ) = M_η(D_{ρη} μ)` at finite depth.
//!
//! `D_{ρη}` replaces the value of a cube of generation `j'` by the mass of its
//! ancestor at generation `⌊ρη j'⌋`; `M_η` takes, for each cube `I`, the
//! largest such value over surviving subcubes. The sup over all depths is
//! truncated at `J_sim`. Survivors are streamed generation by generation and
//! folded into dense arrays for the analysis levels `0..=J_analysis` only.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::CascadeModel;
use crate::dyadic::{check_depth, DyadicIndex};
use crate::error::{invalid, Error, Result};
use crate::sampling::{epsilon, floor_generation, survivors, SamplingConfig};

/// Cap on `Σ_{j' ≤ J_sim} E|S_{j'}|`, keeping the survivor streams in memory.
pub const MAX_EXPECTED_SURVIVORS: f64 = (1u64 << 29) as f64;
/// Cap on the size of one dense analysis level.
pub const MAX_LEVEL_BITS: u32 = 26;
/// Generations dropped by the truncation diagnostic.
pub const TRUNCATION_PROBE: u32 = 2;
/// Changed-cube fraction above which a run is flagged.
pub const TRUNCATION_TOLERANCE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorParams {
    pub rho: f64,
    pub eta: f64,
    pub j_analysis: u32,
    pub j_sim: u32,
}

impl OperatorParams {
    /// Validated parameters for dimension `dim`; `j_sim = None` selects
    /// [`OperatorParams::default_j_sim`].
    pub fn new(dim: usize, rho: f64, eta: f64, j_analysis: u32, j_sim: Option<u32>) -> Result<Self> {
        let p = Self {
            rho,
            eta,
            j_analysis,
            j_sim: j_sim.unwrap_or_else(|| Self::default_j_sim(dim, eta, j_analysis)),
        };
        p.validate(dim)?;
        Ok(p)
    }

    pub fn rho_eta(&self) -> f64 {
        self.rho * self.eta
    }

    /// Smallest admissible truncation depth: `J_analysis` when every cube
    /// survives, else `⌈J_analysis/η⌉`, the depth at which a generation-
    /// `J_analysis` cube expects one surviving descendant.
    pub fn min_j_sim(eta: f64, j_analysis: u32) -> u32 {
        if eta >= 1.0 {
            j_analysis
        } else {
            (j_analysis as f64 / eta - 1e-9).ceil() as u32
        }
    }

    /// `⌈J_a/(η - ε_{J_a})⌉ + 2` when `η > ε_{J_a}` and that depth fits the
    /// survivor budget, otherwise `⌈J_a/η⌉ + 4`; `J_a` itself when `η = 1`.
    pub fn default_j_sim(dim: usize, eta: f64, j_analysis: u32) -> u32 {
        if eta >= 1.0 {
            return j_analysis;
        }
        let fallback = Self::min_j_sim(eta, j_analysis).saturating_add(4);
        let gap = eta - epsilon(j_analysis);
        if gap <= 0.0 {
            return fallback;
        }
        let preferred = (j_analysis as f64 / gap - 1e-9).ceil() + 2.0;
        if preferred * dim as f64 <= 62.0
            && expected_survivors(dim, eta, preferred as u32) <= MAX_EXPECTED_SURVIVORS
        {
            preferred as u32
        } else {
            fallback
        }
    }

    fn check_ranges(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::Config(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.rho > 0.0 && self.rho * self.eta <= 1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "rho must lie in (0, 1/eta], got {} with eta = {}",
                self.rho, self.eta
            )));
        }
        if self.j_sim < self.j_analysis {
            return Err(Error::Config("J_sim must be ≥ J_analysis".into()));
        }
        Ok(())
    }

    /// Full check against a dimension, including the memory budget.
    pub fn validate(&self, dim: usize) -> Result<()> {
        self.check_ranges()?;
        if self.j_sim < Self::min_j_sim(self.eta, self.j_analysis) {
            return Err(Error::Config(format!(
                "J_sim = {} below the minimum {}",
                self.j_sim,
                Self::min_j_sim(self.eta, self.j_analysis)
            )));
        }
        check_depth(dim, self.j_sim).map_err(|e| Error::Config(e.to_string()))?;
        if dim as u32 * self.j_analysis > MAX_LEVEL_BITS {
            return Err(Error::Config(format!(
                "J_analysis = {} gives analysis levels larger than 2^{MAX_LEVEL_BITS} cubes",
                self.j_analysis
            )));
        }
        let expected = expected_survivors(dim, self.eta, self.j_sim);
        if expected > MAX_EXPECTED_SURVIVORS {
            return Err(Error::Config(format!(
                "J_sim = {} needs about {expected:.3e} survivors (limit {MAX_EXPECTED_SURVIVORS:.3e})",
                self.j_sim
            )));
        }
        Ok(())
    }
}

/// `Σ_{j ≤ j_sim} 2^{jdη}`
fn expected_survivors(dim: usize, eta: f64, j_sim: u32) -> f64 {
    (0..=j_sim).map(|j| (j as f64 * dim as f64 * eta).exp2()).sum()
}

/// `log2 μ(I^{ρη})`: the mass of the ancestor at generation `⌊ρη g(I)⌋`.
pub fn dilated_capacity(model: &CascadeModel, rho_times_eta: f64, idx: &DyadicIndex) -> f64 {
    debug_assert!(rho_times_eta > 0.0 && rho_times_eta <= 1.0 + 1e-12);
    let m = floor_generation(rho_times_eta * idx.generation() as f64).min(idx.generation());
    model.log2_capacity(&idx.ancestor_unchecked(m))
}

/// Values of one analysis level, indexed by word key, with `-∞` for zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LeaderField {
    pub dim: usize,
    pub level: u32,
    /// `log2 M_{ρ,η}(μ)(I)` before the neighborhood max.
    pub field: Vec<f64>,
    /// `log2 max_{I' ∈ N(I)} M_{ρ,η}(μ)(I')`.
    pub leaders: Vec<f64>,
}

impl LeaderField {
    /// Wraps an un-maximized field and computes its leaders.
    pub fn from_field(dim: usize, level: u32, field: Vec<f64>) -> Result<Self> {
        check_depth(dim, level)?;
        if field.len() as u64 != 1u64 << (dim as u32 * level) {
            return invalid(format!(
                "level {level} in d={dim} needs {} values, got {}",
                1u64 << (dim as u32 * level),
                field.len()
            ));
        }
        let leaders = neighborhood_max(dim, level, &field);
        Ok(Self {
            dim,
            level,
            field,
            leaders,
        })
    }

    pub fn len(&self) -> usize {
        self.field.len()
    }
    pub fn is_empty(&self) -> bool {
        self.field.is_empty()
    }

    pub fn cube(&self, key: u64) -> DyadicIndex {
        DyadicIndex::from_key_unchecked(self.dim, self.level, key)
    }

    /// Number of cubes with a positive value.
    pub fn positive_count(&self) -> usize {
        self.field.iter().filter(|v| **v > f64::NEG_INFINITY).count()
    }
}

/// Max over `N(I)` for every cube of a dense level.
pub fn neighborhood_max(dim: usize, level: u32, values: &[f64]) -> Vec<f64> {
    match dim {
        1 => {
            let n = values.len();
            (0..n)
                .map(|k| {
                    let lo = k.saturating_sub(1);
                    let hi = (k + 1).min(n - 1);
                    values[lo..=hi].iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        }
        _ => (0..values.len() as u64)
            .into_par_iter()
            .map(|k| {
                DyadicIndex::from_key_unchecked(dim, level, k)
                    .neighbors()
                    .members
                    .iter()
                    .map(|m| values[m.key() as usize])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect(),
    }
}

/// Recomputes the leaders of a field (the field itself is kept).
pub fn leaders(field: &LeaderField) -> LeaderField {
    LeaderField {
        leaders: neighborhood_max(field.dim, field.level, &field.field),
        ..field.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    /// Deepest generation of the reference (truncated) sup.
    pub reference_j_sim: u32,
    pub j_sim: u32,
    /// Per analysis level, fraction of cubes whose value changes when the
    /// deepest generations are added.
    pub changed_fraction: Vec<f64>,
    pub max_changed_fraction: f64,
    pub flagged: bool,
}

/// All analysis levels `0..=J_analysis` of one seed.
#[derive(Clone, Debug)]
pub struct MrhoFields {
    pub params: OperatorParams,
    pub levels: Vec<LeaderField>,
    pub truncation: TruncationReport,
}

impl MrhoFields {
    pub fn level(&self, j: u32) -> &LeaderField {
        &self.levels[j as usize]
    }
}

/// Per-generation contributions `(level-top key, value)`, reduced by max
/// within each key; the survivor keys arrive sorted so runs are contiguous.
fn contributions(
    model: &CascadeModel,
    rho_eta: f64,
    sampling: &SamplingConfig,
    gen: u32,
    top: u32,
) -> Result<Vec<(u64, f64)>> {
    let set = survivors(sampling, gen)?;
    let d = sampling.d as u32;
    let anc = floor_generation(rho_eta * gen as f64).min(gen);
    let anc_shift = d * (gen - anc);
    let target = gen.min(top);
    let shift = d * (gen - target);
    let mut out: Vec<(u64, f64)> = Vec::new();
    for &k in set.keys() {
        let v = model.log2_capacity(&DyadicIndex::from_key_unchecked(sampling.d, anc, k >> anc_shift));
        let t = k >> shift;
        match out.last_mut() {
            Some((tk, tv)) if *tk == t => *tv = tv.max(v),
            _ => out.push((t, v)),
        }
    }
    Ok(out)
}

fn empty_levels(dim: usize, top: u32) -> Vec<Vec<f64>> {
    (0..=top)
        .map(|j| vec![f64::NEG_INFINITY; 1usize << (dim as u32 * j)])
        .collect()
}

/// Turns per-level direct contributions into subtree maxima, bottom-up.
fn propagate(dim: usize, mut direct: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for j in (0..direct.len().saturating_sub(1)).rev() {
        let (upper, lower) = direct.split_at_mut(j + 1);
        let (cur, child) = (&mut upper[j], &lower[0]);
        let fan = 1usize << dim;
        for (k, v) in cur.iter_mut().enumerate() {
            let m = child[k * fan..(k + 1) * fan]
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            *v = v.max(m);
        }
    }
    direct
}

fn check_inputs(model: &CascadeModel, params: &OperatorParams, sampling: &SamplingConfig) -> Result<()> {
    sampling.validate()?;
    if model.dim() != sampling.d {
        return invalid(format!(
            "model dimension {} differs from sampling dimension {}",
            model.dim(),
            sampling.d
        ));
    }
    if params.eta != sampling.eta {
        return invalid(format!(
            "operator eta {} differs from sampling eta {}",
            params.eta, sampling.eta
        ));
    }
    params.validate(model.dim())
}

/// Every analysis level of `M_{ρ,η}(μ)` for one seed, with the truncation
/// diagnostic.
pub fn mrho_fields(
    model: &CascadeModel,
    params: &OperatorParams,
    sampling: &SamplingConfig,
) -> Result<MrhoFields> {
    check_inputs(model, params, sampling)?;
    let dim = model.dim();
    let top = params.j_analysis;
    let reference = params.j_sim.saturating_sub(TRUNCATION_PROBE).max(top);
    let per_gen: Vec<Vec<(u64, f64)>> = (0..=params.j_sim)
        .into_par_iter()
        .map(|g| contributions(model, params.rho_eta(), sampling, g, top))
        .collect::<Result<_>>()?;

    let mut shallow = empty_levels(dim, top);
    let mut deep = empty_levels(dim, top);
    for (g, contrib) in per_gen.iter().enumerate() {
        let g = g as u32;
        let level = &mut if g <= reference { &mut shallow } else { &mut deep }[g.min(top) as usize];
        for &(k, v) in contrib {
            let slot = &mut level[k as usize];
            *slot = slot.max(v);
        }
    }
    for (s, d) in shallow.iter().zip(deep.iter_mut()) {
        for (a, b) in s.iter().zip(d.iter_mut()) {
            *b = b.max(*a);
        }
    }
    let truncated = propagate(dim, shallow);
    let full = propagate(dim, deep);

    let changed_fraction: Vec<f64> = truncated
        .iter()
        .zip(&full)
        .map(|(t, f)| t.iter().zip(f).filter(|(a, b)| a != b).count() as f64 / t.len() as f64)
        .collect();
    let max_changed_fraction = changed_fraction.iter().cloned().fold(0.0, f64::max);
    let truncation = TruncationReport {
        reference_j_sim: reference,
        j_sim: params.j_sim,
        changed_fraction,
        max_changed_fraction,
        flagged: max_changed_fraction > TRUNCATION_TOLERANCE,
    };
    let levels = full
        .into_iter()
        .enumerate()
        .map(|(j, f)| LeaderField::from_field(dim, j as u32, f))
        .collect::<Result<_>>()?;
    Ok(MrhoFields {
        params: *params,
        levels,
        truncation,
    })
}

/// One analysis level of `M_{ρ,η}(μ)`.
pub fn mrho_field(
    model: &CascadeModel,
    params: &OperatorParams,
    sampling: &SamplingConfig,
    j: u32,
) -> Result<LeaderField> {
    if j > params.j_analysis {
        return invalid(format!("level {j} exceeds J_analysis = {}", params.j_analysis));
    }
    check_inputs(model, params, sampling)?;
    let dim = model.dim();
    let mut level = vec![f64::NEG_INFINITY; 1usize << (dim as u32 * j)];
    let per_gen: Vec<Vec<(u64, f64)>> = (j..=params.j_sim)
        .into_par_iter()
        .map(|g| contributions(model, params.rho_eta(), sampling, g, j))
        .collect::<Result<_>>()?;
    for contrib in &per_gen {
        for &(k, v) in contrib {
            let slot = &mut level[k as usize];
            *slot = slot.max(v);
        }
    }
    LeaderField::from_field(dim, j, level)
}

/// Comparison of a field with the two-sided bounds
/// `μ(I^{ρ'}) 2^{-jε̃} ≤ M(I) ≤ μ(I^{ρη})`, where `ρ' = min(ρ, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub level: u32,
    pub cubes: usize,
    /// Cubes exceeding `log2 μ(I^{ρη})`; must be zero.
    pub upper_violations: usize,
    /// Cubes with no survivor in the truncated subtree.
    pub empty_cubes: usize,
    /// 99th percentile of `|field(I) - log2 μ(I^{ρ'})| / j`.
    pub eps_tilde_99: f64,
    pub max_deviation: f64,
}

pub fn bound_report(model: &CascadeModel, params: &OperatorParams, field: &LeaderField) -> BoundReport {
    let j = field.level;
    let rho_ref = params.rho.min(1.0);
    let mut upper_violations = 0;
    let mut empty_cubes = 0;
    let mut devs = Vec::with_capacity(field.len());
    for (k, &v) in field.field.iter().enumerate() {
        let cube = field.cube(k as u64);
        if v > dilated_capacity(model, params.rho_eta(), &cube) {
            upper_violations += 1;
        }
        if v == f64::NEG_INFINITY {
            empty_cubes += 1;
            devs.push(f64::INFINITY);
            continue;
        }
        let reference = dilated_capacity(model, rho_ref, &cube);
        devs.push((v - reference).abs() / j.max(1) as f64);
    }
    devs.sort_by(|a, b| a.total_cmp(b));
    let q = ((devs.len() as f64 * 0.99).ceil() as usize).clamp(1, devs.len()) - 1;
    BoundReport {
        level: j,
        cubes: field.len(),
        upper_violations,
        empty_cubes,
        eps_tilde_99: devs[q],
        max_deviation: *devs.last().unwrap(),
    }
}

/// Writes `j,k0[,k1],field,leader` rows for each level.
pub fn write_level_csv<W: io::Write>(levels: &[LeaderField], w: &mut csv::Writer<W>) -> Result<()> {
    for lf in levels {
        for k in 0..lf.len() {
            let cube = lf.cube(k as u64);
            let mut row = vec![lf.level.to_string()];
            row.extend(cube.coords().iter().map(|c| c.to_string()));
            row.push(format!("{}", lf.field[k]));
            row.push(format!("{}", lf.leaders[k]));
            w.write_record(&row)?;
        }
    }
    Ok(())
}

/// Reads a level dump written by [`write_level_csv`]. Levels must be
/// complete; the dimension is inferred from the column count.
pub fn read_level_csv<R: io::Read>(r: &mut csv::Reader<R>) -> Result<Vec<LeaderField>> {
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad value {s:?}: {e}")))
    };
    let mut out: Vec<LeaderField> = Vec::new();
    let mut current: Option<(usize, u32, Vec<f64>)> = None;
    let finish = |cur: Option<(usize, u32, Vec<f64>)>, out: &mut Vec<LeaderField>| -> Result<()> {
        if let Some((d, j, f)) = cur {
            out.push(LeaderField::from_field(d, j, f)?);
        }
        Ok(())
    };
    for rec in r.records() {
        let rec = rec?;
        let dim = match rec.len() {
            4 => 1,
            5 => 2,
            n => return Err(Error::Parse(format!("level dump rows need 4 or 5 columns, got {n}"))),
        };
        let j: u32 = rec[0]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad level {:?}: {e}", &rec[0])))?;
        let coords = (1..=dim)
            .map(|i| {
                rec[i]
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("bad coordinate {:?}: {e}", &rec[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        let key = DyadicIndex::new(j, &coords)?.key();
        let value = parse(&rec[dim + 1])?;
        if current.as_ref().map(|(d, l, _)| (*d, *l)) != Some((dim, j)) {
            finish(current.take(), &mut out)?;
            current = Some((dim, j, vec![f64::NAN; 1usize << (dim as u32 * j)]));
        }
        current.as_mut().unwrap().2[key as usize] = value;
    }
    finish(current.take(), &mut out)?;
    if out.iter().any(|lf| lf.field.iter().any(|v| v.is_nan())) {
        return Err(Error::Parse("level dump has missing cubes".into()));
    }
    Ok(out)
}
