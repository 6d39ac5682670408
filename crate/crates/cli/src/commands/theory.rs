//! `theory`: phase parameters, predicted σ and τ, numeric τ* and the oracle.

use mfcap_core::spectra::uniform_grid;
use mfcap_core::theory::{
    oracle_d_tilde_batch, predicted_sigma, predicted_tau, tau_star, Breakpoint, CaseTag, FormalismSet,
    PhaseParams, PredictedSpectra,
};
use rayon::prelude::*;
use serde::Serialize;

use super::Session;
use crate::config::{LoadedConfig, RunConfig};
use crate::output::fmt_f64;
use crate::{CliError, CliResult, RunOptions};

pub const DEFAULT_H_STEP: f64 = 1e-3;

#[derive(Debug, Serialize)]
pub struct TheoryReport {
    pub case_tag: CaseTag,
    pub params: PhaseParams,
    pub domain: (f64, f64),
    pub formalism_set: FormalismSet,
    pub sigma_breakpoints: Vec<Breakpoint>,
    pub tau_kinks: Vec<Breakpoint>,
}

/// The configured H grid, or `[0, 2·max dom σ]` at the default step.
pub fn h_grid(cfg: &RunConfig, spectra: &PredictedSpectra) -> CliResult<Vec<f64>> {
    match &cfg.h_grid {
        Some(g) => g.points(),
        None => uniform_grid(0.0, 2.0 * spectra.domain().1, DEFAULT_H_STEP).map_err(CliError::config),
    }
}

pub fn run(loaded: &LoadedConfig, opts: &RunOptions) -> CliResult<()> {
    let cfg = &loaded.config;
    let model = cfg.model()?;
    let (rho, eta) = (cfg.rho(), cfg.eta());
    let spectra = PredictedSpectra::new(&model, rho, eta)?;
    let params = &spectra.params;
    let hs = h_grid(cfg, &spectra)?;
    let qs = cfg.q_grid.points()?;
    let mut session = Session::open(opts)?;

    if cfg.emit.json {
        let report = TheoryReport {
            case_tag: params.case_tag,
            params: params.clone(),
            domain: spectra.domain(),
            formalism_set: spectra.formalism_set(),
            sigma_breakpoints: spectra.sigma_breakpoints(),
            tau_kinks: spectra.tau_kinks(),
        };
        session.sink.write_json("params.json", &report)?;
    }
    if cfg.emit.csv {
        let sigma = predicted_sigma(&model, rho, eta, params, &hs)?;
        let rows = pairs(&sigma.x, &sigma.y);
        session.sink.write_csv("sigma_theory.csv", &["H", "sigma"], &rows)?;

        let tau = predicted_tau(&model, rho, eta, params, &qs)?;
        let rows = pairs(&tau.x, &tau.y);
        session.sink.write_csv("tau_theory.csv", &["q", "tau"], &rows)?;

        let ts = tau_star(&spectra, &hs, &cfg.conjugation())?;
        let rows: Vec<Vec<String>> = (0..ts.len())
            .map(|i| vec![fmt_f64(ts.x[i]), fmt_f64(ts.y[i]), ts.endpoint[i].to_string()])
            .collect();
        session.sink.write_csv("tau_star.csv", &["H", "tau_star", "endpoint"], &rows)?;

        if rho < 1.0 {
            let (lo, hi) = (spectra.domain().0, rho * params.tau_prime_zero);
            let window: Vec<f64> = hs.iter().cloned().filter(|&h| h >= lo && h <= hi).collect();
            let oracle = oracle_d_tilde_batch(&model, rho, eta, &window, cfg.theory.oracle_density.0)?;
            let sigma: Vec<f64> = window.par_iter().map(|&h| spectra.sigma(h)).collect();
            let rows: Vec<Vec<String>> = (0..window.len())
                .map(|i| vec![fmt_f64(window[i]), fmt_f64(oracle[i]), fmt_f64(sigma[i])])
                .collect();
            session.sink.write_csv("oracle.csv", &["H", "oracle", "sigma"], &rows)?;
        }
    }
    session.finish("theory", loaded)
}

fn pairs(x: &[f64], y: &[f64]) -> Vec<Vec<String>> {
    x.iter().zip(y).map(|(a, b)| vec![fmt_f64(*a), fmt_f64(*b)]).collect()
}
