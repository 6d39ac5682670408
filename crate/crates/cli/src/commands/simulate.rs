//! `simulate`: per-seed empirical τ and LD tables plus medians across seeds.

use std::collections::BTreeMap;

use mfcap_core::operators::{mrho_fields, write_level_csv, MrhoFields};
use mfcap_core::sampling::survivors;
use mfcap_core::spectra::{empirical_tau, ld_bin, ld_histogram};
use mfcap_core::SamplingConfig;
use rayon::prelude::*;

use super::Session;
use crate::config::LoadedConfig;
use crate::manifest::TruncationSummary;
use crate::output::{csv_bytes, fmt_f64};
use crate::stats::spread;
use crate::{CliError, CliResult, RunOptions};

pub const TAU_HEADER: [&str; 4] = ["j", "q", "tau", "tau_leader"];
pub const LD_HEADER: [&str; 6] = ["j", "epsilon", "source", "H", "value", "count"];
pub const TAU_SUMMARY_HEADER: [&str; 8] = ["j", "q", "median", "q25", "q75", "median_leader", "q25_leader", "q75_leader"];
pub const LD_SUMMARY_HEADER: [&str; 9] =
    ["j", "epsilon", "source", "H", "median", "q25", "q75", "median_count", "seeds_present"];

const SOURCES: [(&str, bool); 2] = [("field", false), ("leader", true)];

/// One LD bin of one seed.
#[derive(Clone, Copy, Debug)]
struct LdRow {
    j: u32,
    eps_idx: usize,
    leader: bool,
    bin: i64,
    h: f64,
    value: f64,
    count: u64,
}

struct SeedOutput {
    seed: u64,
    /// `(τ_j, τ_j with leaders)` indexed by `[j - 1][q]`.
    tau: Vec<Vec<(f64, f64)>>,
    ld: Vec<LdRow>,
    max_changed: f64,
    reference_j_sim: u32,
    flagged: bool,
    files: Vec<(String, Vec<u8>)>,
}

pub fn run(loaded: &LoadedConfig, opts: &RunOptions) -> CliResult<()> {
    let cfg = &loaded.config;
    cfg.validate_simulation()?;
    let model = cfg.model()?;
    let params = cfg.operator_params()?;
    let qs = cfg.q_grid.points()?;
    let eps = cfg.ld_epsilons();
    let ld_levels = cfg.ld_levels();
    let seeds = cfg.seeds();
    let mut session = Session::open(opts)?;

    let outputs: Vec<SeedOutput> = seeds
        .par_iter()
        .map(|&seed| -> CliResult<SeedOutput> {
            let sampling = SamplingConfig::new(cfg.eta(), seed, cfg.dim())?;
            let fields = mrho_fields(&model, &params, &sampling)?;
            let tau = tau_tables(&fields, &qs)?;
            let ld = ld_tables(&fields, &ld_levels, &eps)?;
            let dir = format!("seed_{seed}");
            let mut files = vec![];
            if cfg.emit.csv {
                files.push((format!("{dir}/tau_emp.csv"), tau_csv(&tau, &qs)?));
                files.push((format!("{dir}/ld.csv"), ld_csv(&ld, &eps)?));
            }
            if opts.dump_levels {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(false)
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(vec![]);
                write_level_csv(&fields.levels, &mut w)?;
                files.push((format!("{dir}/levels.csv"), w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?));
            }
            if opts.dump_survivors {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(false)
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(vec![]);
                for g in 0..=params.j_sim {
                    survivors(&sampling, g)?.write_csv(&mut w)?;
                }
                files.push((format!("{dir}/survivors.csv"), w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?));
            }
            Ok(SeedOutput {
                seed,
                tau,
                ld,
                max_changed: fields.truncation.max_changed_fraction,
                reference_j_sim: fields.truncation.reference_j_sim,
                flagged: fields.truncation.flagged,
                files,
            })
        })
        .collect::<CliResult<_>>()?;

    for o in &outputs {
        let mut paths = vec![];
        for (rel, bytes) in &o.files {
            paths.push(session.sink.write(rel, bytes)?);
        }
        session.per_seed.insert(o.seed, paths);
    }
    if cfg.emit.csv {
        session.sink.write_csv("tau_summary.csv", &TAU_SUMMARY_HEADER, &tau_summary(&outputs, &qs))?;
        session.sink.write_csv("ld_summary.csv", &LD_SUMMARY_HEADER, &ld_summary(&outputs, &eps))?;
    }
    let warning = outputs.iter().any(|o| o.flagged);
    if warning {
        session.warnings.push(format!(
            "truncation at J_sim = {} changes more than 1% of the cubes at some analysis level",
            params.j_sim
        ));
    }
    session.truncation = Some(TruncationSummary {
        reference_j_sim: outputs.first().map_or(params.j_sim, |o| o.reference_j_sim),
        j_sim: params.j_sim,
        max_changed_fraction: outputs.iter().map(|o| (o.seed, o.max_changed)).collect(),
        warning,
    });
    session.finish("simulate", loaded)
}

fn tau_tables(fields: &MrhoFields, qs: &[f64]) -> CliResult<Vec<Vec<(f64, f64)>>> {
    (1..=fields.params.j_analysis)
        .into_par_iter()
        .map(|j| {
            let lf = fields.level(j);
            let plain = empirical_tau(lf, qs, false)?;
            let lead = empirical_tau(lf, qs, true)?;
            Ok(plain.y.into_iter().zip(lead.y).collect())
        })
        .collect()
}

fn ld_tables(fields: &MrhoFields, levels: &[u32], eps: &[f64]) -> CliResult<Vec<LdRow>> {
    let mut rows = vec![];
    for &j in levels {
        for (eps_idx, &e) in eps.iter().enumerate() {
            for (_, leader) in SOURCES {
                let est = ld_histogram(fields.level(j), e, leader)?;
                for i in 0..est.centers.len() {
                    rows.push(LdRow {
                        j,
                        eps_idx,
                        leader,
                        bin: ld_bin(est.centers[i], e),
                        h: est.centers[i],
                        value: est.values[i],
                        count: est.counts[i],
                    });
                }
            }
        }
    }
    Ok(rows)
}

fn source_name(leader: bool) -> &'static str {
    if leader {
        "leader"
    } else {
        "field"
    }
}

fn tau_csv(tau: &[Vec<(f64, f64)>], qs: &[f64]) -> CliResult<Vec<u8>> {
    let mut rows = vec![];
    for (jm1, per_q) in tau.iter().enumerate() {
        for (q, (t, tl)) in qs.iter().zip(per_q) {
            rows.push(vec![(jm1 + 1).to_string(), fmt_f64(*q), fmt_f64(*t), fmt_f64(*tl)]);
        }
    }
    csv_bytes(&TAU_HEADER, &rows)
}

fn ld_csv(ld: &[LdRow], eps: &[f64]) -> CliResult<Vec<u8>> {
    let rows: Vec<Vec<String>> = ld
        .iter()
        .map(|r| {
            vec![
                r.j.to_string(),
                fmt_f64(eps[r.eps_idx]),
                source_name(r.leader).to_string(),
                fmt_f64(r.h),
                fmt_f64(r.value),
                r.count.to_string(),
            ]
        })
        .collect();
    csv_bytes(&LD_HEADER, &rows)
}

fn tau_summary(outputs: &[SeedOutput], qs: &[f64]) -> Vec<Vec<String>> {
    let Some(first) = outputs.first() else {
        return vec![];
    };
    let mut rows = vec![];
    for jm1 in 0..first.tau.len() {
        for (qi, q) in qs.iter().enumerate() {
            let plain: Vec<f64> = outputs.iter().map(|o| o.tau[jm1][qi].0).collect();
            let lead: Vec<f64> = outputs.iter().map(|o| o.tau[jm1][qi].1).collect();
            let (p, l) = (spread(&plain), spread(&lead));
            rows.push(vec![
                (jm1 + 1).to_string(),
                fmt_f64(*q),
                fmt_f64(p.median),
                fmt_f64(p.q25),
                fmt_f64(p.q75),
                fmt_f64(l.median),
                fmt_f64(l.q25),
                fmt_f64(l.q75),
            ]);
        }
    }
    rows
}

/// Seeds without a bin contribute `-∞` values and zero counts.
fn ld_summary(outputs: &[SeedOutput], eps: &[f64]) -> Vec<Vec<String>> {
    type Key = (u32, usize, bool, i64);
    let mut cells: BTreeMap<Key, (f64, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for o in outputs {
        for r in &o.ld {
            let e = cells.entry((r.j, r.eps_idx, r.leader, r.bin)).or_insert((r.h, vec![], vec![]));
            if r.count > 0 {
                e.1.push(r.value);
                e.2.push(r.count as f64);
            }
        }
    }
    cells
        .into_iter()
        .map(|((j, ei, leader, _), (h, mut vals, mut counts))| {
            let present = vals.len();
            vals.resize(outputs.len(), f64::NEG_INFINITY);
            counts.resize(outputs.len(), 0.0);
            let s = spread(&vals);
            let c = spread(&counts);
            vec![
                j.to_string(),
                fmt_f64(eps[ei]),
                source_name(leader).to_string(),
                fmt_f64(h),
                fmt_f64(s.median),
                fmt_f64(s.q25),
                fmt_f64(s.q75),
                fmt_f64(c.median),
                present.to_string(),
            ]
        })
        .collect()
}
