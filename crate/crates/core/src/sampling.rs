//! Seeded survivor sets `S_j(η)`: the cubes of generation `j` whose
//! Bernoulli variable of parameter `2^{-jd(1-η)}` equals 1.
//!
//! A generation is drawn as a count `N ~ Binomial(2^{jd}, p)` followed by `N`
//! distinct uniform positions, which has exactly the joint law of the i.i.d.
//! field. Randomness comes from ChaCha8 keyed by the seed with the generation
//! as stream id, so every `(seed, j)` pair is an independent, reproducible
//! stream regardless of evaluation order.

use std::io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::dyadic::{check_depth, check_dim, DyadicIndex};
use crate::error::{invalid, Result};

/// `⌊x⌋` for generation arithmetic, robust to products such as `0.3 · 10`
/// landing a few ulps below an integer.
#[inline]
pub fn floor_generation(x: f64) -> u32 {
    (x + 1e-9).floor().max(0.0) as u32
}

/// `ε_j = 2 log2(j+2) / j`; infinite at `j = 0`.
pub fn epsilon(j: u32) -> f64 {
    if j == 0 {
        f64::INFINITY
    } else {
        2.0 * ((j + 2) as f64).log2() / j as f64
    }
}

/// `⌊j(η - ε_j)⌋`, clamped at 0.
pub fn covering_generation(eta: f64, j: u32) -> u32 {
    let x = j as f64 * (eta - epsilon(j));
    if x.is_finite() {
        floor_generation(x)
    } else {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub eta: f64,
    pub seed: u64,
    pub d: usize,
}

impl SamplingConfig {
    pub fn new(eta: f64, seed: u64, d: usize) -> Result<Self> {
        let c = Self { eta, seed, d };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.d)?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return invalid(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        Ok(())
    }

    /// `log2` of the survival probability at generation `j`.
    pub fn log2_probability(&self, j: u32) -> f64 {
        -(j as f64) * self.d as f64 * (1.0 - self.eta)
    }

    /// `E|S_j| = 2^{jdη}`.
    pub fn expected_count(&self, j: u32) -> f64 {
        (j as f64 * self.d as f64 * self.eta).exp2()
    }

    fn rng(&self, j: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(j as u64);
        rng
    }
}

/// The survivors of one generation, as word keys ([`DyadicIndex::key`]) in
/// increasing order, i.e. sorted lexicographically by word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivorSet {
    dim: usize,
    generation: u32,
    keys: Vec<u64>,
}

impl SurvivorSet {
    /// Builds a set from arbitrary keys; they are sorted and deduplicated.
    pub fn from_keys(dim: usize, generation: u32, mut keys: Vec<u64>) -> Result<Self> {
        check_dim(dim)?;
        check_depth(dim, generation)?;
        let bits = dim as u32 * generation;
        if keys.iter().any(|&k| k >> bits != 0) {
            return invalid(format!("survivor key out of range for generation {generation}"));
        }
        keys.sort_unstable();
        keys.dedup();
        Ok(Self {
            dim,
            generation,
            keys,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn generation(&self) -> u32 {
        self.generation
    }
    pub fn keys(&self) -> &[u64] {
        &self.keys
    }
    pub fn len(&self) -> usize {
        self.keys.len()
    }
    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = DyadicIndex> + '_ {
        self.keys
            .iter()
            .map(|&k| DyadicIndex::from_key_unchecked(self.dim, self.generation, k))
    }

    /// Keys of the survivors lying in `cube`; a contiguous slice because
    /// subtrees are contiguous in word order.
    pub fn keys_in(&self, cube: &DyadicIndex) -> &[u64] {
        if cube.dim() != self.dim || cube.generation() > self.generation {
            return &[];
        }
        let shift = self.dim as u32 * (self.generation - cube.generation());
        let k = cube.key();
        let lo = k << shift;
        let start = self.keys.partition_point(|&x| x < lo);
        let end = start + self.keys[start..].partition_point(|&x| x >> shift == k);
        &self.keys[start..end]
    }

    /// Writes `j,k0[,k1]` rows.
    pub fn write_csv<W: io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for idx in self.iter() {
            let mut row = vec![self.generation.to_string()];
            row.extend(idx.coords().iter().map(|c| c.to_string()));
            w.write_record(&row)?;
        }
        Ok(())
    }
}

/// Draws `S_j(η)` for `config.seed`.
pub fn survivors(config: &SamplingConfig, j: u32) -> Result<SurvivorSet> {
    config.validate()?;
    check_depth(config.d, j)?;
    let bits = config.d as u32 * j;
    let total = 1u64 << bits;
    let lp = config.log2_probability(j);
    if lp == 0.0 {
        return Ok(SurvivorSet {
            dim: config.d,
            generation: j,
            keys: (0..total).collect(),
        });
    }
    let mut rng = config.rng(j);
    let count = Binomial::new(total, lp.exp2())
        .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?
        .sample(&mut rng);
    let mut keys: Vec<u64> = rand::seq::index::sample(&mut rng, total as usize, count as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    keys.sort_unstable();
    Ok(SurvivorSet {
        dim: config.d,
        generation: j,
        keys,
    })
}

/// `S_j(η, W)` for the cube `W`.
pub fn survivors_in(cube: &DyadicIndex, set: &SurvivorSet) -> Vec<DyadicIndex> {
    set.keys_in(cube)
        .iter()
        .map(|&k| DyadicIndex::from_key_unchecked(set.dim, set.generation, k))
        .collect()
}

/// Sizes of the runs of equal ancestors at `shift` bits above the keys.
fn ancestor_runs(keys: &[u64], shift: u32) -> impl Iterator<Item = usize> + '_ {
    keys.chunk_by(move |a, b| a >> shift == b >> shift)
        .map(|c| c.len())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveringReport {
    pub j: u32,
    pub epsilon: f64,
    /// `⌊j(η - ε_j)⌋`
    pub cover_generation: u32,
    pub cells: u64,
    pub covered: u64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrowdingReport {
    pub j: u32,
    /// `⌊ηj⌋`
    pub cell_generation: u32,
    pub max_count: usize,
    pub within_bound: bool,
}

pub fn covering_report(set: &SurvivorSet, eta: f64) -> CoveringReport {
    let j = set.generation;
    let m = covering_generation(eta, j);
    let shift = set.dim as u32 * (j - m);
    let covered = ancestor_runs(&set.keys, shift).count() as u64;
    let cells = 1u64 << (set.dim as u32 * m);
    CoveringReport {
        j,
        epsilon: epsilon(j),
        cover_generation: m,
        cells,
        covered,
        fraction: covered as f64 / cells as f64,
    }
}

pub fn crowding_report(set: &SurvivorSet, eta: f64) -> CrowdingReport {
    let j = set.generation;
    let m = floor_generation(eta * j as f64).min(j);
    let shift = set.dim as u32 * (j - m);
    let max_count = ancestor_runs(&set.keys, shift).max().unwrap_or(0);
    CrowdingReport {
        j,
        cell_generation: m,
        max_count,
        within_bound: max_count <= j as usize,
    }
}

fn check_generation(j: u32) -> Result<()> {
    if j < 2 {
        invalid(format!("lemma checks need j ≥ 2, got {j}"))
    } else {
        Ok(())
    }
}

/// Fraction of the cubes of generation `⌊j(η-ε_j)⌋` holding a survivor.
pub fn check_covering(config: &SamplingConfig, j: u32) -> Result<CoveringReport> {
    check_generation(j)?;
    Ok(covering_report(&survivors(config, j)?, config.eta))
}

/// Largest `#S_j(η, W)` over `W` of generation `⌊ηj⌋`, against the bound `j`.
pub fn check_crowding(config: &SamplingConfig, j: u32) -> Result<CrowdingReport> {
    check_generation(j)?;
    Ok(crowding_report(&survivors(config, j)?, config.eta))
}
