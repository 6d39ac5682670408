//! `check-lemmas`: covering and crowding of the survivor sets over seeds.

use mfcap_core::sampling::{check_covering, check_crowding};
use mfcap_core::SamplingConfig;
use rayon::prelude::*;
use serde::Serialize;

use super::Session;
use crate::config::LoadedConfig;
use crate::output::fmt_f64;
use crate::{CliResult, RunOptions};

/// Seeds used when the configuration lists none.
pub const DEFAULT_SEEDS: u64 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaLevel {
    pub j: u32,
    pub seeds: usize,
    /// Fraction of seeds whose covering fraction is exactly 1.
    pub covering_pass_fraction: f64,
    /// Fraction of seeds with at most `j` survivors per cell.
    pub crowding_pass_fraction: f64,
}

pub fn run(loaded: &LoadedConfig, opts: &RunOptions) -> CliResult<()> {
    let cfg = &loaded.config;
    let mut seeds = cfg.seeds();
    if seeds.is_empty() {
        seeds = (0..DEFAULT_SEEDS).collect();
    }
    let levels = cfg.lemma_levels();
    let jobs: Vec<(u32, u64)> = levels.iter().flat_map(|&j| seeds.iter().map(move |&s| (j, s))).collect();
    let results = jobs
        .par_iter()
        .map(|&(j, seed)| -> CliResult<_> {
            let sc = SamplingConfig::new(cfg.eta(), seed, cfg.dim())?;
            Ok((check_covering(&sc, j)?, check_crowding(&sc, j)?))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut session = Session::open(opts)?;
    if cfg.emit.csv {
        let rows: Vec<Vec<String>> = jobs
            .iter()
            .zip(&results)
            .map(|(&(j, seed), (cov, crowd))| {
                vec![
                    seed.to_string(),
                    j.to_string(),
                    cov.cover_generation.to_string(),
                    cov.cells.to_string(),
                    cov.covered.to_string(),
                    fmt_f64(cov.fraction),
                    crowd.cell_generation.to_string(),
                    crowd.max_count.to_string(),
                    crowd.within_bound.to_string(),
                ]
            })
            .collect();
        let header = [
            "seed",
            "j",
            "cover_generation",
            "cells",
            "covered",
            "covering_fraction",
            "cell_generation",
            "max_count",
            "within_bound",
        ];
        session.sink.write_csv("lemmas.csv", &header, &rows)?;
    }
    let summary: Vec<LemmaLevel> = levels
        .iter()
        .map(|&j| {
            let mine: Vec<_> = jobs.iter().zip(&results).filter(|((jj, _), _)| *jj == j).map(|(_, r)| r).collect();
            let n = mine.len() as f64;
            LemmaLevel {
                j,
                seeds: mine.len(),
                covering_pass_fraction: mine.iter().filter(|(c, _)| c.fraction == 1.0).count() as f64 / n,
                crowding_pass_fraction: mine.iter().filter(|(_, c)| c.within_bound).count() as f64 / n,
            }
        })
        .collect();
    if cfg.emit.json {
        session.sink.write_json("lemmas.json", &summary)?;
    }
    session.finish("check-lemmas", loaded)
}
