//! Run configuration: one TOML file with nested sections.
//!
//! Numbers may be written as decimal strings (`rho = "0.5"`) or as plain TOML
//! numbers; seeds may exceed the TOML integer range when quoted.

use std::fmt;
use std::marker::PhantomData;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mfcap_core::operators::OperatorParams;
use mfcap_core::spectra::uniform_grid;
use mfcap_core::theory::ConjugationOptions;
use mfcap_core::CascadeModel;
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

/// A number read from either a string or a TOML number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num<T>(pub T);

impl<'de, T> Deserialize<'de> for Num<T>
where
    T: FromStr,
    T::Err: fmt::Display,
{
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor<T>(PhantomData<T>);

        impl<T> NumVisitor<T>
        where
            T: FromStr,
            T::Err: fmt::Display,
        {
            fn parse<E: de::Error>(s: &str) -> Result<Num<T>, E> {
                s.trim()
                    .parse::<T>()
                    .map(Num)
                    .map_err(|e| E::custom(format!("bad number {s:?}: {e}")))
            }
        }

        impl<T> Visitor<'_> for NumVisitor<T>
        where
            T: FromStr,
            T::Err: fmt::Display,
        {
            type Value = Num<T>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                Self::parse(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Self::parse(&v.to_string())
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Self::parse(&v.to_string())
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Self::parse(&v.to_string())
            }
        }

        d.deserialize_any(NumVisitor(PhantomData))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub d: Num<usize>,
    pub weights: Vec<Num<f64>>,
    #[serde(default = "one")]
    pub gamma: Num<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub rho: Num<f64>,
    pub eta: Num<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DepthSection {
    pub j_analysis: Num<u32>,
    pub j_sim: Option<Num<u32>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min: Num<f64>,
    pub max: Num<f64>,
    pub step: Num<f64>,
}

impl GridSection {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        uniform_grid(self.min.0, self.max.0, self.step.0).map_err(CliError::config)
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdSection {
    #[serde(default)]
    pub epsilon: Vec<Num<f64>>,
    #[serde(default)]
    pub j: Vec<Num<u32>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitSection {
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub json: bool,
    #[serde(default)]
    pub svg_plotdata: bool,
}

impl Default for EmitSection {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            svg_plotdata: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySection {
    /// Points per axis of the brute-force oracle grid.
    #[serde(default = "oracle_density")]
    pub oracle_density: Num<usize>,
    #[serde(default = "sixty")]
    pub conjugate_q_max: Num<f64>,
    #[serde(default = "milli")]
    pub conjugate_q_step: Num<f64>,
}

impl Default for TheorySection {
    fn default() -> Self {
        Self {
            oracle_density: oracle_density(),
            conjugate_q_max: sixty(),
            conjugate_q_step: milli(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    #[serde(default = "tau_tol")]
    pub tau_tol: Num<f64>,
    #[serde(default = "ld_tol")]
    pub ld_tol: Num<f64>,
    #[serde(default = "oracle_tol")]
    pub oracle_tol: Num<f64>,
    /// LD bins whose median count is below this are not compared.
    #[serde(default = "min_count")]
    pub min_count: Num<u64>,
    /// Compare τ built on leaders (`true`) or on the cubes' own values.
    #[serde(default = "yes")]
    pub tau_leaders: bool,
    /// Same choice for the LD histograms.
    #[serde(default)]
    pub ld_leaders: bool,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            tau_tol: tau_tol(),
            ld_tol: ld_tol(),
            oracle_tol: oracle_tol(),
            min_count: min_count(),
            tau_leaders: true,
            ld_leaders: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaSection {
    #[serde(default = "lemma_levels")]
    pub j: Vec<Num<u32>>,
}

impl Default for LemmaSection {
    fn default() -> Self {
        Self { j: lemma_levels() }
    }
}

fn one() -> Num<f64> {
    Num(1.0)
}
fn yes() -> bool {
    true
}
fn oracle_density() -> Num<usize> {
    Num(2001)
}
fn sixty() -> Num<f64> {
    Num(60.0)
}
fn milli() -> Num<f64> {
    Num(1e-3)
}
fn tau_tol() -> Num<f64> {
    Num(0.15)
}
fn ld_tol() -> Num<f64> {
    Num(0.25)
}
fn oracle_tol() -> Num<f64> {
    Num(5e-3)
}
fn min_count() -> Num<u64> {
    Num(10)
}
fn lemma_levels() -> Vec<Num<u32>> {
    vec![Num(16), Num(20), Num(24)]
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub operator: OperatorSection,
    pub depths: DepthSection,
    pub q_grid: GridSection,
    pub h_grid: Option<GridSection>,
    #[serde(default)]
    pub ld: LdSection,
    #[serde(default)]
    pub seeds: Vec<Num<u64>>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub emit: EmitSection,
    #[serde(default)]
    pub theory: TheorySection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub lemmas: LemmaSection,
}

/// A parsed configuration together with the hash of its source text.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<LoadedConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok(LoadedConfig {
            config: Self::parse(&text)?,
            hash: sha256_hex(text.as_bytes()),
        })
    }

    pub fn rho(&self) -> f64 {
        self.operator.rho.0
    }

    pub fn eta(&self) -> f64 {
        self.operator.eta.0
    }

    pub fn dim(&self) -> usize {
        self.model.d.0
    }

    pub fn model(&self) -> CliResult<CascadeModel> {
        let w = self.model.weights.iter().map(|w| w.0).collect();
        CascadeModel::new(self.dim(), w, self.model.gamma.0).map_err(CliError::config)
    }

    pub fn operator_params(&self) -> CliResult<OperatorParams> {
        OperatorParams::new(
            self.dim(),
            self.rho(),
            self.eta(),
            self.depths.j_analysis.0,
            self.depths.j_sim.map(|n| n.0),
        )
        .map_err(CliError::config)
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.seeds.iter().map(|s| s.0).collect()
    }

    pub fn ld_epsilons(&self) -> Vec<f64> {
        self.ld.epsilon.iter().map(|e| e.0).collect()
    }

    pub fn ld_levels(&self) -> Vec<u32> {
        self.ld.j.iter().map(|j| j.0).collect()
    }

    pub fn lemma_levels(&self) -> Vec<u32> {
        self.lemmas.j.iter().map(|j| j.0).collect()
    }

    pub fn conjugation(&self) -> ConjugationOptions {
        ConjugationOptions {
            q_max: self.theory.conjugate_q_max.0,
            q_step: self.theory.conjugate_q_step.0,
            ..ConjugationOptions::default()
        }
    }

    /// Checks that do not depend on the subcommand.
    pub fn validate(&self) -> CliResult<()> {
        let (rho, eta) = (self.rho(), self.eta());
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(CliError::Config(format!("eta = {eta} outside (0, 1]")));
        }
        if !(rho > 0.0 && rho <= (1.0 / eta) * (1.0 + 1e-12)) {
            return Err(CliError::Config(format!("rho = {rho} outside (0, 1/eta]")));
        }
        self.model()?;
        self.operator_params()?;
        self.q_grid.points()?;
        if let Some(h) = &self.h_grid {
            h.points()?;
        }
        if let Some(e) = self.ld_epsilons().iter().find(|e| !(**e > 0.0)) {
            return Err(CliError::Config(format!("LD epsilon {e} must be positive")));
        }
        let ja = self.depths.j_analysis.0;
        if let Some(j) = self.ld_levels().iter().find(|&&j| j == 0 || j > ja) {
            return Err(CliError::Config(format!("LD level {j} outside 1..={ja}")));
        }
        if let Some(j) = self.lemma_levels().iter().find(|&&j| j < 2) {
            return Err(CliError::Config(format!("lemma level {j} must be at least 2")));
        }
        if self.theory.oracle_density.0 < 2 {
            return Err(CliError::Config("oracle_density must be at least 2".into()));
        }
        if !(self.theory.conjugate_q_step.0 > 0.0 && self.theory.conjugate_q_max.0 > 0.0) {
            return Err(CliError::Config("conjugate q range must be positive".into()));
        }
        let c = &self.compare;
        if [c.tau_tol.0, c.ld_tol.0, c.oracle_tol.0].iter().any(|t| !(*t >= 0.0)) {
            return Err(CliError::Config("comparison tolerances must be non-negative".into()));
        }
        Ok(())
    }

    /// Extra checks for `simulate`.
    pub fn validate_simulation(&self) -> CliResult<()> {
        if self.seeds.is_empty() {
            return Err(CliError::Config("simulate needs at least one seed".into()));
        }
        Ok(())
    }
}
