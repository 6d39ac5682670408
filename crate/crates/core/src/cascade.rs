//! Multinomial dyadic cascades `μ = ν^γ`.
//!
//! `ν` gives mass `Π w_{digit}` to the cube of word `w`; raising to the power
//! `γ` keeps every Gibbs-capacity property with constant 1, so `τ_μ`, `τ_μ′`
//! and `σ_μ` are available in closed form. All masses are carried as base-2
//! logarithms.

use serde::{Deserialize, Serialize};

use crate::dyadic::{check_dim, DyadicIndex};
use crate::error::{invalid, Result};
use crate::roots;

const SUM_TOL: f64 = 1e-12;
const ENDPOINT_TOL: f64 = 1e-12;

/// Multinomial weight vector over the `2^d` children plus the exponent `γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CascadeSpec", into = "CascadeSpec")]
pub struct CascadeModel {
    dim: usize,
    weights: Vec<f64>,
    gamma: f64,
    /// `-γ log2 w_i`: the exponent contributed by one digit `i`.
    costs: Vec<f64>,
    h_min: f64,
    h_max: f64,
    top_multiplicity: usize,
    bottom_multiplicity: usize,
}

/// Plain-data form of a model, as found in run configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub d: usize,
    pub weights: Vec<f64>,
    pub gamma: f64,
}

impl TryFrom<CascadeSpec> for CascadeModel {
    type Error = crate::Error;
    fn try_from(s: CascadeSpec) -> Result<Self> {
        CascadeModel::new(s.d, s.weights, s.gamma)
    }
}

impl From<CascadeModel> for CascadeSpec {
    fn from(m: CascadeModel) -> Self {
        CascadeSpec {
            d: m.dim,
            weights: m.weights,
            gamma: m.gamma,
        }
    }
}

impl CascadeModel {
    pub fn new(dim: usize, weights: Vec<f64>, gamma: f64) -> Result<Self> {
        check_dim(dim)?;
        if weights.len() != 1 << dim {
            return invalid(format!(
                "expected {} weights for d={dim}, got {}",
                1 << dim,
                weights.len()
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return invalid("weights must be finite and > 0 (full support)");
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return invalid(format!("weights sum to {sum}, expected 1"));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return invalid(format!("gamma must be finite and > 0, got {gamma}"));
        }
        let costs: Vec<f64> = weights.iter().map(|w| -gamma * w.log2()).collect();
        let wmax = weights.iter().cloned().fold(f64::MIN, f64::max);
        let wmin = weights.iter().cloned().fold(f64::MAX, f64::min);
        let top_multiplicity = weights.iter().filter(|&&w| w == wmax).count();
        let bottom_multiplicity = weights.iter().filter(|&&w| w == wmin).count();
        Ok(Self {
            dim,
            h_min: -gamma * wmax.log2(),
            h_max: -gamma * wmin.log2(),
            weights,
            gamma,
            costs,
            top_multiplicity,
            bottom_multiplicity,
        })
    }

    /// `λ_γ`: uniform weights.
    pub fn lebesgue(dim: usize, gamma: f64) -> Result<Self> {
        check_dim(dim)?;
        let n = 1 << dim;
        Self::new(dim, vec![1.0 / n as f64; n], gamma)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// `τ_μ′(+∞)`, the smallest local dimension.
    pub fn h_min(&self) -> f64 {
        self.h_min
    }
    /// `τ_μ′(-∞)`, the largest local dimension.
    pub fn h_max(&self) -> f64 {
        self.h_max
    }
    pub fn top_multiplicity(&self) -> usize {
        self.top_multiplicity
    }
    pub fn bottom_multiplicity(&self) -> usize {
        self.bottom_multiplicity
    }
    pub fn is_multifractal(&self) -> bool {
        self.h_max > self.h_min
    }

    /// Same weights, another exponent.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.dim, self.weights.clone(), gamma)
    }

    /// Number of occurrences of each digit in the word of `idx`.
    fn digit_counts(&self, idx: &DyadicIndex) -> [u32; 4] {
        let j = idx.generation();
        let c = idx.coords();
        match self.dim {
            1 => {
                let ones = c[0].count_ones();
                [j - ones, ones, 0, 0]
            }
            _ => {
                let mask = if j == 0 { 0 } else { u64::MAX >> (64 - j) };
                let (x, y) = (c[0], c[1]);
                let n3 = (x & y).count_ones();
                let n1 = (x & !y & mask).count_ones();
                let n2 = (!x & y & mask).count_ones();
                [j - n1 - n2 - n3, n1, n2, n3]
            }
        }
    }

    /// `log2 μ(I_w) = γ Σ_levels log2 w_digit`, exact in the digit counts.
    pub fn log2_capacity(&self, idx: &DyadicIndex) -> f64 {
        debug_assert_eq!(idx.dim(), self.dim);
        let counts = self.digit_counts(idx);
        -counts
            .iter()
            .zip(&self.costs)
            .map(|(&n, &c)| n as f64 * c)
            .sum::<f64>()
    }

    /// `log2 ν(I_w)`, the additive measure behind `μ`.
    pub fn log2_mass(&self, idx: &DyadicIndex) -> f64 {
        self.log2_capacity(idx) / self.gamma
    }

    /// `log2 μ(3I) = γ log2 Σ_{I′ ∈ N(I)} ν(I′)`.
    pub fn log2_capacity_3i(&self, idx: &DyadicIndex) -> f64 {
        let logs: Vec<f64> = idx
            .neighbors()
            .members
            .iter()
            .map(|m| self.log2_mass(m))
            .collect();
        self.gamma * log2_sum_exp2(&logs)
    }

    /// `τ_μ(q) = -log2 Σ_i w_i^{γq}`.
    pub fn tau(&self, q: f64) -> f64 {
        let a: Vec<f64> = self.costs.iter().map(|c| -q * c).collect();
        -log2_sum_exp2(&a)
    }

    /// Tilted probabilities `w_i^{γq} / Σ w^{γq}`.
    fn tilted(&self, q: f64) -> Vec<f64> {
        let a: Vec<f64> = self.costs.iter().map(|c| -q * c).collect();
        let m = a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = a.iter().map(|x| (x - m).exp2()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect()
    }

    /// `τ_μ′(q)`: the tilted mean of the digit costs.
    pub fn tau_prime(&self, q: f64) -> f64 {
        self.tilted(q)
            .iter()
            .zip(&self.costs)
            .map(|(p, c)| p * c)
            .sum()
    }

    /// `τ_μ″(q) = -ln 2 · Var(cost)` under the tilted law.
    pub fn tau_second(&self, q: f64) -> f64 {
        let p = self.tilted(q);
        let mean: f64 = p.iter().zip(&self.costs).map(|(p, c)| p * c).sum();
        let var: f64 = p
            .iter()
            .zip(&self.costs)
            .map(|(p, c)| p * (c - mean) * (c - mean))
            .sum();
        -std::f64::consts::LN_2 * var
    }

    /// `σ_μ(τ′(q)) = q τ′(q) - τ(q)`.
    pub fn sigma_at_q(&self, q: f64) -> f64 {
        q * self.tau_prime(q) - self.tau(q)
    }

    /// The `q` with `τ′(q) = h`, for `h` strictly inside `(H_min, H_max)`.
    pub fn q_of_h(&self, h: f64) -> Result<f64> {
        if !self.is_multifractal() || h <= self.h_min || h >= self.h_max {
            return invalid(format!(
                "H = {h} not inside ({}, {})",
                self.h_min, self.h_max
            ));
        }
        // -τ′ is increasing in q.
        roots::solve_increasing(|q| -self.tau_prime(q), -h)
    }

    /// `σ_μ(H)`, with `-∞` outside `[H_min, H_max]` and the endpoint values
    /// `log2` of the extreme-weight multiplicities.
    pub fn sigma(&self, h: f64) -> f64 {
        let scale = 1.0 + self.h_max.abs();
        if !self.is_multifractal() {
            return if (h - self.h_min).abs() <= ENDPOINT_TOL * scale {
                self.dim as f64
            } else {
                f64::NEG_INFINITY
            };
        }
        if h < self.h_min - ENDPOINT_TOL * scale || h > self.h_max + ENDPOINT_TOL * scale {
            return f64::NEG_INFINITY;
        }
        if h <= self.h_min + ENDPOINT_TOL * scale {
            return (self.top_multiplicity as f64).log2();
        }
        if h >= self.h_max - ENDPOINT_TOL * scale {
            return (self.bottom_multiplicity as f64).log2();
        }
        match self.q_of_h(h) {
            Ok(q) => {
                let s = q * h - self.tau(q);
                // the bracketed q may sit marginally past a flat endpoint
                let lo = (self.top_multiplicity.min(self.bottom_multiplicity) as f64).log2();
                s.clamp(lo.min(s), self.dim as f64)
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// `σ_μ′(H) = q(H)`, infinite at the endpoints.
    pub fn sigma_prime(&self, h: f64) -> f64 {
        if h <= self.h_min {
            f64::INFINITY
        } else if h >= self.h_max {
            f64::NEG_INFINITY
        } else {
            self.q_of_h(h).unwrap_or(f64::NAN)
        }
    }

    /// The unique `q` with `τ_μ(q) = level` (`τ_μ` is a homeomorphism of ℝ).
    pub fn tau_inverse(&self, level: f64) -> Result<f64> {
        roots::solve_increasing(|q| self.tau(q), level)
    }

    /// The point of `[H_min, τ′(0)]` where the increasing branch of `σ_μ`
    /// reaches `level`, together with its dual `q ≥ 0`. Levels at or below
    /// `σ_μ(H_min)` return `(H_min, +∞)`.
    pub fn increasing_branch_at(&self, level: f64) -> Result<(f64, f64)> {
        let d = self.dim as f64;
        if level > d {
            return invalid(format!("level {level} exceeds the spectrum maximum {d}"));
        }
        if !self.is_multifractal() {
            return Ok((self.h_min, f64::INFINITY));
        }
        let floor = (self.top_multiplicity as f64).log2();
        if level <= floor {
            return Ok((self.h_min, f64::INFINITY));
        }
        if level >= d {
            return Ok((self.tau_prime(0.0), 0.0));
        }
        // q ↦ σ(τ′(q)) decreases from d to log2(top multiplicity) on [0, ∞).
        let f = |q: f64| self.sigma_at_q(q) - level;
        let mut hi = 1.0;
        while f(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Ok((self.h_min, f64::INFINITY));
            }
        }
        let q = roots::bisect(f, 0.0, hi)?;
        Ok((self.tau_prime(q), q))
    }
}

/// `log2 Σ 2^{x_i}`, ignoring `-∞` entries; `-∞` for an empty or all-`-∞`
/// input.
pub fn log2_sum_exp2(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp2()).sum();
    m + s.log2()
}
