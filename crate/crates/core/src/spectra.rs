//! Empirical multifractal estimators on a level of a field: the moment
//! scaling function `τ_j`, large-deviation histograms, a grid
//! Legendre–Fenchel transform and coarse local-dimension traces.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{log2_sum_exp2, CascadeModel};
use crate::dyadic::DyadicIndex;
use crate::error::{invalid, Result};
use crate::operators::{mrho_fields, LeaderField, OperatorParams};
use crate::sampling::SamplingConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    TauOfQ,
    SigmaOfH,
    LdOfH,
    Conjugate,
}

/// A sampled function on a strictly increasing grid; `-∞` marks points
/// outside the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub kind: CurveKind,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Conjugates: the minimizing abscissa was a grid endpoint, so the true
    /// infimum may lie below the reported value.
    pub endpoint: Vec<bool>,
    /// False when the curve could not be estimated (no positive cube).
    pub valid: bool,
    /// The grid does not cover the whole domain of the tabulated function.
    #[serde(default)]
    pub truncated: bool,
}

impl SpectrumCurve {
    pub fn new(kind: CurveKind, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return invalid("abscissae and values differ in length");
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("grid must be strictly increasing");
        }
        let n = x.len();
        Ok(Self {
            kind,
            x,
            y,
            endpoint: vec![false; n],
            valid: true,
            truncated: false,
        })
    }

    /// Tabulates `f` on `grid`.
    pub fn from_fn(kind: CurveKind, grid: &[f64], f: impl Fn(f64) -> f64 + Sync) -> Result<Self> {
        let y = grid.par_iter().map(|&x| f(x)).collect();
        Self::new(kind, grid.to_vec(), y)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }
    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Indices of the finite values.
    pub fn finite_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.y[i].is_finite()).collect()
    }

    /// Chord test: the finite values occupy a contiguous run and their
    /// successive slopes never increase by more than `tol`.
    pub fn is_concave(&self, tol: f64) -> bool {
        let idx = self.finite_indices();
        if idx.len() < 3 {
            return true;
        }
        if idx.windows(2).any(|w| w[1] != w[0] + 1) {
            return false;
        }
        let slopes: Vec<f64> = idx
            .windows(2)
            .map(|w| (self.y[w[1]] - self.y[w[0]]) / (self.x[w[1]] - self.x[w[0]]))
            .collect();
        slopes.windows(2).all(|s| s[1] <= s[0] + tol)
    }

    /// Linear interpolation; `-∞` outside the grid or next to `-∞` values.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.len();
        if n == 0 || x < self.x[0] || x > self.x[n - 1] {
            return f64::NEG_INFINITY;
        }
        let i = self.x.partition_point(|&g| g <= x);
        if i == 0 {
            return self.y[0];
        }
        if i == n || self.x[i - 1] == x {
            return self.y[i - 1];
        }
        let (x0, x1, y0, y1) = (self.x[i - 1], self.x[i], self.y[i - 1], self.y[i]);
        if !(y0.is_finite() && y1.is_finite()) {
            return f64::NEG_INFINITY;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Evenly spaced grid `min, min+step, …` up to `max` (inclusive, with a
/// relative tolerance on the last point).
pub fn uniform_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(max >= min) || !min.is_finite() || !max.is_finite() {
        return invalid(format!("bad grid [{min}, {max}] step {step}"));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| min + i as f64 * step).collect())
}

/// `τ_j(q) = -(1/j) log2 Σ 2^{q v(I)}` over the cubes whose own value is
/// positive, `v` being the leader value or the cube's own value.
pub fn empirical_tau(field: &LeaderField, qgrid: &[f64], use_leaders: bool) -> Result<SpectrumCurve> {
    if field.level == 0 {
        return invalid("empirical τ needs a level j ≥ 1");
    }
    let j = field.level as f64;
    let source = if use_leaders { &field.leaders } else { &field.field };
    let vals: Vec<f64> = field
        .field
        .iter()
        .zip(source)
        .filter(|(f, _)| **f > f64::NEG_INFINITY)
        .map(|(_, v)| *v)
        .collect();
    let mut curve = if vals.is_empty() {
        let mut c = SpectrumCurve::new(CurveKind::TauOfQ, qgrid.to_vec(), vec![f64::INFINITY; qgrid.len()])?;
        c.valid = false;
        c
    } else {
        SpectrumCurve::from_fn(CurveKind::TauOfQ, qgrid, |q| {
            let terms: Vec<f64> = vals.iter().map(|v| q * v).collect();
            -log2_sum_exp2(&terms) / j
        })?
    };
    curve.kind = CurveKind::TauOfQ;
    Ok(curve)
}

/// Histogram of coarse exponents `-v/j` over windows
/// `[(2k-1)ε, (2k+1)ε)` centered at `2kε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdEstimate {
    pub level: u32,
    pub epsilon: f64,
    pub centers: Vec<f64>,
    pub counts: Vec<u64>,
    /// `log2(count)/j`, `-∞` for empty bins.
    pub values: Vec<f64>,
}

impl LdEstimate {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bin index of an exponent for windows of half-width `eps`.
pub fn ld_bin(h: f64, eps: f64) -> i64 {
    (h / (2.0 * eps) + 0.5).floor() as i64
}

pub fn ld_histogram(field: &LeaderField, eps: f64, use_leaders: bool) -> Result<LdEstimate> {
    if !(eps > 0.0) {
        return invalid(format!("LD half-width must be > 0, got {eps}"));
    }
    if field.level == 0 {
        return invalid("LD histograms need a level j ≥ 1");
    }
    let j = field.level as f64;
    let source = if use_leaders { &field.leaders } else { &field.field };
    let bins: Vec<i64> = field
        .field
        .iter()
        .zip(source)
        .filter(|(f, _)| **f > f64::NEG_INFINITY)
        .map(|(_, v)| ld_bin(-v / j, eps))
        .collect();
    let (lo, hi) = match (bins.iter().min(), bins.iter().max()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => {
            return Ok(LdEstimate {
                level: field.level,
                epsilon: eps,
                centers: vec![],
                counts: vec![],
                values: vec![],
            })
        }
    };
    let mut counts = vec![0u64; (hi - lo + 1) as usize];
    for b in bins {
        counts[(b - lo) as usize] += 1;
    }
    let centers = (lo..=hi).map(|k| 2.0 * eps * k as f64).collect();
    let values = counts
        .iter()
        .map(|&c| if c == 0 { f64::NEG_INFINITY } else { (c as f64).log2() / j })
        .collect();
    Ok(LdEstimate {
        level: field.level,
        epsilon: eps,
        centers,
        counts,
        values,
    })
}

/// `f*(h) = min_i (h x_i - f(x_i))` over the finite points of `curve`.
///
/// Exact at the kinks of concave piecewise-linear data. When the minimum is
/// attained at a grid endpoint the infimum may be lower (possibly `-∞`);
/// such points carry the `endpoint` flag.
pub fn legendre(curve: &SpectrumCurve, out_grid: &[f64]) -> Result<SpectrumCurve> {
    let idx = curve.finite_indices();
    if idx.len() < 2 {
        return invalid("Legendre transform needs at least two finite points");
    }
    if curve.y.contains(&f64::INFINITY) {
        let mut out = SpectrumCurve::new(
            CurveKind::Conjugate,
            out_grid.to_vec(),
            vec![f64::NEG_INFINITY; out_grid.len()],
        )?;
        out.valid = false;
        return Ok(out);
    }
    let (first, last) = (idx[0], *idx.last().unwrap());
    let pts: Vec<(usize, f64, f64)> = idx.iter().map(|&i| (i, curve.x[i], curve.y[i])).collect();
    let res: Vec<(f64, bool)> = out_grid
        .par_iter()
        .map(|&h| {
            let mut best = f64::INFINITY;
            let mut arg = first;
            for &(i, x, y) in &pts {
                let v = h * x - y;
                if v < best {
                    best = v;
                    arg = i;
                }
            }
            (best, arg == first || arg == last)
        })
        .collect();
    let mut out = SpectrumCurve::new(
        CurveKind::Conjugate,
        out_grid.to_vec(),
        res.iter().map(|r| r.0).collect(),
    )?;
    out.endpoint = res.iter().map(|r| r.1).collect();
    Ok(out)
}

/// `(j, -log2 W̃(I_j(x)) / j)` along the cubes containing `x`, with `W̃` the
/// leader of `M_{ρ,η}(μ)`.
pub fn local_dim_trace(
    model: &CascadeModel,
    params: &OperatorParams,
    sampling: &SamplingConfig,
    x: &[f64],
    j_list: &[u32],
) -> Result<Vec<(u32, f64)>> {
    if let Some(&j) = j_list.iter().find(|&&j| j == 0 || j > params.j_analysis) {
        return invalid(format!("trace level {j} outside 1..={}", params.j_analysis));
    }
    let fields = mrho_fields(model, params, sampling)?;
    j_list
        .iter()
        .map(|&j| {
            let cube = DyadicIndex::of_point(x, j)?;
            let v = fields.level(j).leaders[cube.key() as usize];
            Ok((j, -v / j as f64))
        })
        .collect()
}
