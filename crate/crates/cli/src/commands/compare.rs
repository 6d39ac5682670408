//! `compare`: sup-gaps between the simulated and predicted tables found in
//! the output directory.

use std::path::Path;

use mfcap_core::spectra::{CurveKind, SpectrumCurve};
use serde::Serialize;

use super::Session;
use crate::config::LoadedConfig;
use crate::output::Table;
use crate::{CliError, CliResult, RunOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapCheck {
    /// Analysis level the check was made at, when it applies.
    pub j: Option<u32>,
    /// Largest absolute gap; `null` when infinite.
    pub sup_gap: f64,
    /// Where the largest gap occurs (`q` or `H`).
    pub worst_at: Option<f64>,
    pub points: usize,
    pub tolerance: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub tau: GapCheck,
    pub ld: Vec<LdCheck>,
    /// Absent when `ρ ≥ 1` (no oracle table).
    pub oracle: Option<GapCheck>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdCheck {
    pub epsilon: f64,
    #[serde(flatten)]
    pub gap: GapCheck,
    /// Bins left out because the conjugate there is only a bound from the
    /// end of the `q` range (the predicted value is `-∞`).
    pub skipped_bins: usize,
}

fn gap_check(j: Option<u32>, pairs: &[(f64, f64, f64)], tolerance: f64) -> GapCheck {
    let mut sup = 0.0f64;
    let mut worst = None;
    for &(at, a, b) in pairs {
        let g = if a == b { 0.0 } else { (a - b).abs() };
        let g = if g.is_nan() { f64::INFINITY } else { g };
        if worst.is_none() || g > sup {
            sup = g;
            worst = Some(at);
        }
    }
    GapCheck {
        j,
        sup_gap: sup,
        worst_at: worst,
        points: pairs.len(),
        tolerance,
        within: sup <= tolerance,
    }
}

fn curve(t: &Table, x: &str, y: &str, kind: CurveKind) -> CliResult<SpectrumCurve> {
    SpectrumCurve::new(kind, t.f64s(x)?, t.f64s(y)?).map_err(|e| CliError::Runtime(e.to_string()))
}

fn read(dir: &Path, name: &str) -> CliResult<Table> {
    let p = dir.join(name);
    if !p.exists() {
        return Err(CliError::Runtime(format!(
            "{} not found; run theory and simulate first",
            p.display()
        )));
    }
    Table::read(&p)
}

pub fn compare(dir: &Path, loaded: &LoadedConfig) -> CliResult<CompareReport> {
    let cfg = &loaded.config;
    let c = &cfg.compare;

    let theory_tau = curve(&read(dir, "tau_theory.csv")?, "q", "tau", CurveKind::TauOfQ)?;
    let summary = read(dir, "tau_summary.csv")?;
    let js = summary.f64s("j")?;
    let top = js.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let qs = summary.f64s("q")?;
    let med = summary.f64s(if c.tau_leaders { "median_leader" } else { "median" })?;
    let pairs: Vec<(f64, f64, f64)> = (0..js.len())
        .filter(|&i| js[i] == top)
        .filter(|&i| qs[i] >= theory_tau.x[0] && qs[i] <= *theory_tau.x.last().unwrap())
        .map(|i| (qs[i], med[i], theory_tau.value_at(qs[i])))
        .collect();
    let tau = gap_check(Some(top as u32), &pairs, c.tau_tol.0);

    let star_table = read(dir, "tau_star.csv")?;
    let star = curve(&star_table, "H", "tau_star", CurveKind::Conjugate)?;
    let bound: Vec<bool> = star_table.strings("endpoint")?.iter().map(|s| s == "true").collect();
    let bound_at = |h: f64| {
        let nearest = (0..star.x.len()).min_by(|&a, &b| (star.x[a] - h).abs().total_cmp(&(star.x[b] - h).abs()));
        nearest.is_none_or(|k| bound[k])
    };

    let ld_table = read(dir, "ld_summary.csv")?;
    let lj = ld_table.f64s("j")?;
    let le = ld_table.f64s("epsilon")?;
    let src = ld_table.strings("source")?;
    let lh = ld_table.f64s("H")?;
    let lmed = ld_table.f64s("median")?;
    let lcount = ld_table.f64s("median_count")?;
    let ltop = lj.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let want = if c.ld_leaders { "leader" } else { "field" };
    let mut eps: Vec<f64> = vec![];
    for &e in &le {
        if !eps.contains(&e) {
            eps.push(e);
        }
    }
    let ld = eps
        .iter()
        .map(|&e| {
            let bins: Vec<usize> = (0..lj.len())
                .filter(|&i| lj[i] == ltop && le[i] == e && src[i] == want)
                .filter(|&i| lcount[i] >= c.min_count.0 as f64)
                .collect();
            let pairs: Vec<(f64, f64, f64)> = bins
                .iter()
                .filter(|&&i| !bound_at(lh[i]))
                .map(|&i| (lh[i], lmed[i], star.value_at(lh[i])))
                .collect();
            LdCheck {
                epsilon: e,
                gap: gap_check(Some(ltop as u32), &pairs, c.ld_tol.0),
                skipped_bins: bins.len() - pairs.len(),
            }
        })
        .collect::<Vec<_>>();

    let oracle = if cfg.rho() < 1.0 {
        let t = read(dir, "oracle.csv")?;
        let (h, o, s) = (t.f64s("H")?, t.f64s("oracle")?, t.f64s("sigma")?);
        let pairs: Vec<(f64, f64, f64)> = (0..h.len()).map(|i| (h[i], o[i], s[i])).collect();
        Some(gap_check(None, &pairs, c.oracle_tol.0))
    } else {
        None
    };

    let pass = tau.within && ld.iter().all(|l| l.gap.within) && oracle.as_ref().is_none_or(|o| o.within);
    Ok(CompareReport { tau, ld, oracle, pass })
}

pub fn run(loaded: &LoadedConfig, opts: &RunOptions) -> CliResult<()> {
    let report = compare(&opts.out, loaded)?;
    let mut session = Session::open(opts)?;
    session.sink.write_json("compare.json", &report)?;
    if !report.pass {
        session.warnings.push("comparison outside tolerance".into());
    }
    session.finish("compare", loaded)?;
    if report.pass {
        Ok(())
    } else {
        let mut failed = vec![];
        if !report.tau.within {
            failed.push(format!("tau sup-gap {} > {}", report.tau.sup_gap, report.tau.tolerance));
        }
        for l in report.ld.iter().filter(|l| !l.gap.within) {
            failed.push(format!("LD (eps {}) sup-gap {} > {}", l.epsilon, l.gap.sup_gap, l.gap.tolerance));
        }
        if let Some(o) = report.oracle.as_ref().filter(|o| !o.within) {
            failed.push(format!("oracle sup-gap {} > {}", o.sup_gap, o.tolerance));
        }
        Err(CliError::Comparison(failed.join("; ")))
    }
}
