//! `plotdata`: joins theory and simulation tables into plot-ready CSVs.

use std::path::Path;

use mfcap_core::spectra::{CurveKind, SpectrumCurve};

use super::Session;
use crate::config::LoadedConfig;
use crate::output::{fmt_f64, Table};
use crate::svg::{line_chart, Series};
use crate::{CliError, CliResult, RunOptions};

fn optional(dir: &Path, name: &str) -> CliResult<Option<Table>> {
    let p = dir.join(name);
    if p.exists() {
        Table::read(&p).map(Some)
    } else {
        Ok(None)
    }
}

fn required(dir: &Path, name: &str) -> CliResult<Table> {
    optional(dir, name)?.ok_or_else(|| CliError::Runtime(format!("{name} not found; run theory first")))
}

fn curve(t: &Table, x: &str, y: &str) -> CliResult<SpectrumCurve> {
    SpectrumCurve::new(CurveKind::SigmaOfH, t.f64s(x)?, t.f64s(y)?).map_err(|e| CliError::Runtime(e.to_string()))
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn run(loaded: &LoadedConfig, opts: &RunOptions) -> CliResult<()> {
    let cfg = &loaded.config;
    let dir = opts.out.as_path();
    let sigma = curve(&required(dir, "sigma_theory.csv")?, "H", "sigma")?;
    let star_t = required(dir, "tau_star.csv")?;
    let (hs, star) = (star_t.f64s("H")?, star_t.f64s("tau_star")?);
    let oracle = optional(dir, "oracle.csv")?.map(|t| curve(&t, "H", "oracle")).transpose()?;
    let tau_t = required(dir, "tau_theory.csv")?;
    let (qs, tau) = (tau_t.f64s("q")?, tau_t.f64s("tau")?);
    let summary = optional(dir, "tau_summary.csv")?;
    let ld = optional(dir, "ld_summary.csv")?;
    let star_curve = SpectrumCurve::new(CurveKind::Conjugate, hs.clone(), star.clone())?;

    let oracle_at = |h: f64| {
        oracle
            .as_ref()
            .filter(|o| !o.is_empty() && h >= o.x[0] && h <= *o.x.last().unwrap())
            .map(|o| o.value_at(h))
    };
    let sigma_rows: Vec<Vec<String>> = (0..hs.len())
        .map(|i| vec![fmt_f64(hs[i]), fmt_f64(sigma.value_at(hs[i])), fmt_f64(star[i]), cell(oracle_at(hs[i]))])
        .collect();

    let mut emp: Vec<Option<(f64, f64, f64)>> = vec![None; qs.len()];
    let mut have_emp = false;
    if let Some(s) = &summary {
        let js = s.f64s("j")?;
        let top = js.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        have_emp = true;
        let (sq, m, a, b) = (s.f64s("q")?, s.f64s("median_leader")?, s.f64s("q25_leader")?, s.f64s("q75_leader")?);
        for i in (0..js.len()).filter(|&i| js[i] == top) {
            if let Some(k) = qs.iter().position(|&q| q == sq[i]) {
                emp[k] = Some((m[i], a[i], b[i]));
            }
        }
    }
    let tau_rows: Vec<Vec<String>> = (0..qs.len())
        .map(|i| {
            vec![
                fmt_f64(qs[i]),
                fmt_f64(tau[i]),
                cell(emp[i].map(|e| e.0)),
                cell(emp[i].map(|e| e.1)),
                cell(emp[i].map(|e| e.2)),
            ]
        })
        .collect();

    let source = if cfg.compare.ld_leaders { "leader" } else { "field" };
    let mut ld_rows = vec![];
    if let Some(t) = &ld {
        let js = t.f64s("j")?;
        let top = js.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (e, src, h) = (t.f64s("epsilon")?, t.strings("source")?, t.f64s("H")?);
        let (m, a, b, c) = (t.f64s("median")?, t.f64s("q25")?, t.f64s("q75")?, t.f64s("median_count")?);
        for i in (0..js.len()).filter(|&i| js[i] == top && src[i] == source) {
            ld_rows.push(vec![
                fmt_f64(e[i]),
                fmt_f64(h[i]),
                fmt_f64(m[i]),
                fmt_f64(a[i]),
                fmt_f64(b[i]),
                fmt_f64(c[i]),
                fmt_f64(star_curve.value_at(h[i])),
            ]);
        }
    }

    let mut session = Session::open(opts)?;
    if cfg.emit.csv {
        session.sink.write_csv("plot_sigma.csv", &["H", "sigma", "tau_star", "oracle"], &sigma_rows)?;
        session.sink.write_csv(
            "plot_tau.csv",
            &["q", "tau_theory", "tau_emp_median", "tau_emp_q25", "tau_emp_q75"],
            &tau_rows,
        )?;
        if ld.is_some() {
            session.sink.write_csv(
                "plot_ld.csv",
                &["epsilon", "H", "median", "q25", "q75", "median_count", "tau_star"],
                &ld_rows,
            )?;
        }
    }
    if cfg.emit.svg_plotdata {
        let (lo, hi) = {
            let f = sigma.finite_indices();
            match (f.first(), f.last()) {
                (Some(&a), Some(&b)) => (sigma.x[a], sigma.x[b]),
                _ => (f64::NEG_INFINITY, f64::INFINITY),
            }
        };
        let in_dom = |h: f64| h >= lo && h <= hi;
        let mut series = vec![
            Series {
                label: "sigma",
                points: sigma.x.iter().cloned().zip(sigma.y.iter().cloned()).collect(),
            },
            Series {
                label: "tau*",
                points: hs.iter().cloned().zip(star.iter().cloned()).filter(|(h, _)| in_dom(*h)).collect(),
            },
        ];
        if let Some(o) = &oracle {
            series.push(Series {
                label: "oracle",
                points: o.x.iter().cloned().zip(o.y.iter().cloned()).collect(),
            });
        }
        session.sink.write("sigma.svg", line_chart("spectrum", "H", &series).as_bytes())?;
        let mut series = vec![Series {
            label: "tau (theory)",
            points: qs.iter().cloned().zip(tau.iter().cloned()).collect(),
        }];
        if have_emp {
            series.push(Series {
                label: "tau (median leaders)",
                points: qs.iter().zip(&emp).filter_map(|(q, e)| e.map(|e| (*q, e.0))).collect(),
            });
        }
        session.sink.write("tau.svg", line_chart("L^q spectrum", "q", &series).as_bytes())?;
    }
    session.finish("plotdata", loaded)
}
