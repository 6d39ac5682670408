//! End-to-end runs through the public API: sampling, the operator,
//! estimators and predicted spectra working together.

use mfcap_core::operators::{mrho_fields, read_level_csv, write_level_csv, OperatorParams};
use mfcap_core::sampling::{check_covering, check_crowding, survivors};
use mfcap_core::spectra::{empirical_tau, ld_histogram, uniform_grid};
use mfcap_core::theory::{tau_star, CaseTag, ConjugationOptions, PredictedSpectra};
use mfcap_core::{CascadeModel, DyadicIndex, SamplingConfig};

fn binomial() -> CascadeModel {
    CascadeModel::new(1, vec![0.3, 0.7], 1.0).unwrap()
}

#[test]
fn unsampled_undilated_operator_is_the_cascade() {
    let model = binomial();
    let params = OperatorParams::new(1, 1.0, 1.0, 10, None).unwrap();
    let sampling = SamplingConfig::new(1.0, 7, 1).unwrap();
    let fields = mrho_fields(&model, &params, &sampling).unwrap();
    let top = fields.level(10);
    for (k, v) in top.field.iter().enumerate() {
        let cube = DyadicIndex::from_key(1, 10, k as u64).unwrap();
        assert!((v - model.log2_capacity(&cube)).abs() < 1e-12);
    }
    let qs = uniform_grid(-2.0, 3.0, 0.5).unwrap();
    let tau = empirical_tau(top, &qs, false).unwrap();
    for (q, t) in qs.iter().zip(&tau.y) {
        assert!((t - model.tau(*q)).abs() < 1e-10, "q={q}: {t} vs {}", model.tau(*q));
    }
}

#[test]
fn same_seed_same_fields() {
    let model = binomial();
    let params = OperatorParams::new(1, 0.5, 0.5, 10, None).unwrap();
    let a = mrho_fields(&model, &params, &SamplingConfig::new(0.5, 3, 1).unwrap()).unwrap();
    let b = mrho_fields(&model, &params, &SamplingConfig::new(0.5, 3, 1).unwrap()).unwrap();
    let c = mrho_fields(&model, &params, &SamplingConfig::new(0.5, 4, 1).unwrap()).unwrap();
    assert_eq!(a.levels, b.levels);
    assert_ne!(a.levels, c.levels);
}

#[test]
fn level_dump_round_trips() {
    let model = CascadeModel::new(2, vec![0.1, 0.2, 0.3, 0.4], 1.0).unwrap();
    let params = OperatorParams::new(2, 0.8, 0.6, 5, None).unwrap();
    let fields = mrho_fields(&model, &params, &SamplingConfig::new(0.6, 11, 2).unwrap()).unwrap();
    let mut w = csv::Writer::from_writer(vec![]);
    write_level_csv(&fields.levels, &mut w).unwrap();
    let bytes = w.into_inner().unwrap();
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes.as_slice());
    assert_eq!(read_level_csv(&mut r).unwrap(), fields.levels);
}

#[test]
fn survivor_sets_cover_and_do_not_crowd() {
    for seed in 0..5 {
        let cfg = SamplingConfig::new(0.5, seed, 1).unwrap();
        assert!(!survivors(&cfg, 16).unwrap().is_empty());
        assert_eq!(check_covering(&cfg, 16).unwrap().fraction, 1.0);
        assert!(check_crowding(&cfg, 16).unwrap().within_bound);
    }
}

#[test]
fn ld_histogram_counts_every_positive_cube() {
    let model = binomial();
    let params = OperatorParams::new(1, 0.5, 0.5, 12, None).unwrap();
    let fields = mrho_fields(&model, &params, &SamplingConfig::new(0.5, 1, 1).unwrap()).unwrap();
    let level = fields.level(12);
    let ld = ld_histogram(level, 0.05, false).unwrap();
    let positive = level.field.iter().filter(|v| v.is_finite()).count() as u64;
    assert_eq!(ld.total(), positive);
    assert!(ld.values.iter().all(|v| *v <= 1.0 + 1e-12));
}

#[test]
fn predicted_spectra_obey_the_formalism_for_rho_one() {
    let spectra = PredictedSpectra::new(&binomial(), 1.0, 0.6).unwrap();
    assert_eq!(spectra.params.case_tag, CaseTag::RhoEqualsOne);
    let (lo, hi) = spectra.domain();
    let hs: Vec<f64> = (1..200).map(|i| lo + (hi - lo) * i as f64 / 200.0).collect();
    let star = tau_star(&spectra, &hs, &ConjugationOptions::default()).unwrap();
    for (h, t) in hs.iter().zip(&star.y) {
        assert!((t - spectra.sigma(*h)).abs() < 1e-3, "H={h}");
    }
}
