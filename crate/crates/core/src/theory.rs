//! Closed-form spectra of `M_{ρ,η}(μ)` for multinomial `μ`: phase-transition
//! parameters, the case split for `ρ < 1`, the predicted `σ` and `τ`, the set
//! where the multifractal formalism holds, and a brute-force variational
//! oracle for the `ρ < 1` spectrum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::CascadeModel;
use crate::error::{invalid, Error, Result};
use crate::roots;
use crate::spectra::{legendre, uniform_grid, CurveKind, SpectrumCurve};

/// Width of the band on `σ_μ(H_ρ) - threshold` treated as the frontier
/// `H_{ρ,η} = H_ρ`.
pub const FRONTIER_TOL: f64 = 1e-10;
const RHO_ONE_TOL: f64 = 1e-12;
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    RhoEqualsOne,
    Case1,
    Case2a,
    Case2b,
    RhoGreaterOne,
}

/// Parameters of the predicted spectra. Fields that do not apply to the
/// regime are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub case_tag: CaseTag,
    pub d: usize,
    pub rho: f64,
    pub eta: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub tau_prime_zero: f64,
    /// Weights all equal: the formulas reduce to the Lebesgue case.
    pub monofractal: bool,
    /// `τ_μ(q1) = 0`.
    pub q1: f64,
    pub h1: f64,
    /// `τ_μ(q_ρ) = d(1-ρ)/ρ`.
    pub q_rho: Option<f64>,
    pub h_rho: Option<f64>,
    pub theta_rho_of_h_rho: Option<f64>,
    /// `d(1-ρ)/(1/η - ρ)`.
    pub threshold: Option<f64>,
    /// `σ_μ(H_{ρ,η}) = threshold` on the increasing branch.
    pub h_rho_eta: Option<f64>,
    /// `H_{ρ,η} = H_ρ` within [`FRONTIER_TOL`].
    pub frontier: bool,
    /// `min{H : σ_μ(H) ≥ d(1-1/ρ)}`.
    pub h1_rho: Option<f64>,
    /// Tangency point of the line through `(0, d(1-1/ρ))`.
    pub h2_rho: Option<f64>,
    pub h3_rho: Option<f64>,
    /// `σ_μ′(H_ρ^{(2)})`
    pub q2_rho: Option<f64>,
    /// `σ_μ′(H_ρ^{(1)})`; `None` when infinite.
    pub q1_rho: Option<f64>,
}

fn check_rho_eta(rho: f64, eta: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return invalid(format!("eta must lie in (0, 1], got {eta}"));
    }
    if !(rho > 0.0 && rho * eta <= 1.0 + RHO_ONE_TOL) {
        return invalid(format!("rho must lie in (0, 1/eta], got {rho} with eta = {eta}"));
    }
    Ok(())
}

/// `δ_ρ(H) = (d(1-ρ) + ρσ_μ(H)) / σ_μ(H)`.
pub fn delta_rho(model: &CascadeModel, rho: f64, h: f64) -> f64 {
    let s = model.sigma(h);
    (model.dim() as f64 * (1.0 - rho) + rho * s) / s
}

/// `θ_ρ(H) = ρH σ_μ(H) / (d(1-ρ) + ρσ_μ(H))` on `[H_min, τ_μ′(0)]`.
pub fn theta_rho(model: &CascadeModel, rho: f64, h: f64) -> f64 {
    theta_from(model.dim(), rho, h, model.sigma(h))
}

fn theta_from(d: usize, rho: f64, h: f64, s: f64) -> f64 {
    rho * h * s / (d as f64 * (1.0 - rho) + rho * s)
}

/// `θ_ρ^{-1}(t)` with the matching `σ_μ` value, by bisection along the
/// increasing branch parametrized by `q ≥ 0` (`θ_ρ(τ′(q))` decreases in `q`).
/// Targets at or below `θ_ρ(H_min)` return `H_min`.
pub fn theta_rho_inverse(model: &CascadeModel, rho: f64, t: f64) -> Result<(f64, f64)> {
    let d = model.dim();
    let top = rho * model.tau_prime(0.0);
    if t > top * (1.0 + DOMAIN_TOL) + DOMAIN_TOL {
        return invalid(format!("θ_ρ^{{-1}}({t}) undefined above ρτ′(0) = {top}"));
    }
    if t >= top {
        return Ok((model.tau_prime(0.0), d as f64));
    }
    let hmin_val = theta_rho(model, rho, model.h_min());
    if !model.is_multifractal() || t <= hmin_val {
        return Ok((model.h_min(), model.sigma(model.h_min())));
    }
    let g = |q: f64| theta_from(d, rho, model.tau_prime(q), model.sigma_at_q(q)) - t;
    let mut hi = 1.0;
    while g(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e9 {
            return Ok((model.h_min(), model.sigma(model.h_min())));
        }
    }
    let q = roots::bisect(g, 0.0, hi)?;
    Ok((model.tau_prime(q), model.sigma_at_q(q)))
}

/// Solves every parameter applicable to `(ρ, η)` and classifies the regime.
pub fn solve_phase_params(model: &CascadeModel, rho: f64, eta: f64) -> Result<PhaseParams> {
    check_rho_eta(rho, eta)?;
    let d = model.dim() as f64;
    let monofractal = !model.is_multifractal();
    let rho_one = (rho - 1.0).abs() <= RHO_ONE_TOL;
    let rho_inv_eta = (rho * eta - 1.0).abs() <= RHO_ONE_TOL;
    if monofractal && !(rho_one || rho_inv_eta) {
        return Err(Error::NotMultifractal);
    }
    let q1 = model.tau_inverse(0.0)?;
    let mut p = PhaseParams {
        case_tag: CaseTag::RhoEqualsOne,
        d: model.dim(),
        rho,
        eta,
        h_min: model.h_min(),
        h_max: model.h_max(),
        tau_prime_zero: model.tau_prime(0.0),
        monofractal,
        q1,
        h1: model.tau_prime(q1),
        q_rho: None,
        h_rho: None,
        theta_rho_of_h_rho: None,
        threshold: None,
        h_rho_eta: None,
        frontier: false,
        h1_rho: None,
        h2_rho: None,
        h3_rho: None,
        q2_rho: None,
        q1_rho: None,
    };
    if rho_one {
        return Ok(p);
    }
    if rho > 1.0 {
        p.case_tag = CaseTag::RhoGreaterOne;
        if monofractal {
            return Ok(p);
        }
        let level = d * (1.0 - 1.0 / rho);
        let q2 = model.tau_inverse(-level)?;
        let (h1r, q1r) = model.increasing_branch_at(level)?;
        p.q2_rho = Some(q2);
        p.h2_rho = Some(model.tau_prime(q2));
        p.h3_rho = Some(level / q2);
        p.h1_rho = Some(h1r);
        p.q1_rho = q1r.is_finite().then_some(q1r);
        return Ok(p);
    }
    let q_rho = model.tau_inverse(d * (1.0 - rho) / rho)?;
    let h_rho = model.tau_prime(q_rho);
    let s_rho = model.sigma_at_q(q_rho);
    let threshold = d * (1.0 - rho) / (1.0 / eta - rho);
    p.q_rho = Some(q_rho);
    p.h_rho = Some(h_rho);
    p.theta_rho_of_h_rho = Some(theta_from(model.dim(), rho, h_rho, s_rho));
    p.threshold = Some(threshold);
    if model.sigma(model.h_min()) > threshold {
        p.case_tag = CaseTag::Case1;
        return Ok(p);
    }
    p.h_rho_eta = Some(model.increasing_branch_at(threshold)?.0);
    let gap = s_rho - threshold;
    p.frontier = gap.abs() <= FRONTIER_TOL;
    p.case_tag = if gap > FRONTIER_TOL {
        CaseTag::Case2a
    } else {
        CaseTag::Case2b
    };
    Ok(p)
}

/// A labelled abscissa where the formula changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub label: String,
    pub at: f64,
}

fn bp(label: &str, at: f64) -> Breakpoint {
    Breakpoint {
        label: label.to_string(),
        at,
    }
}

/// `I_{ρ,η}`: a closed interval (possibly absent) plus isolated points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormalismSet {
    pub interval: Option<(f64, f64)>,
    pub points: Vec<f64>,
}

impl FormalismSet {
    pub fn contains(&self, h: f64, tol: f64) -> bool {
        self.interval
            .is_some_and(|(a, b)| h >= a - tol && h <= b + tol)
            || self.points.iter().any(|p| (h - p).abs() <= tol)
    }

    /// Endpoints of the interval and the isolated points.
    pub fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.interval.map(|(a, b)| vec![a, b]).unwrap_or_default();
        e.extend(&self.points);
        e
    }
}

/// The predicted spectra of `M_{ρ,η}(μ)` for one model and `(ρ, η)`.
#[derive(Clone, Debug)]
pub struct PredictedSpectra {
    pub model: CascadeModel,
    pub params: PhaseParams,
}

impl PredictedSpectra {
    pub fn new(model: &CascadeModel, rho: f64, eta: f64) -> Result<Self> {
        Ok(Self {
            model: model.clone(),
            params: solve_phase_params(model, rho, eta)?,
        })
    }

    fn rho_eta(&self) -> f64 {
        self.params.rho * self.params.eta
    }

    fn d(&self) -> f64 {
        self.params.d as f64
    }

    /// `[lo, hi]` where the predicted spectrum is finite.
    pub fn domain(&self) -> (f64, f64) {
        let p = &self.params;
        let re = self.rho_eta();
        match p.case_tag {
            CaseTag::RhoEqualsOne => (p.eta * p.h_min, p.h_max),
            CaseTag::RhoGreaterOne if p.monofractal => (p.h_min, p.h_min / p.eta),
            CaseTag::RhoGreaterOne => (re * p.h1_rho.unwrap(), p.h_max + p.h3_rho.unwrap()),
            _ => (re * p.h_min, p.rho * p.h_max),
        }
    }

    /// Breakpoints of `σ`, domain ends included, in increasing order.
    pub fn sigma_breakpoints(&self) -> Vec<Breakpoint> {
        let p = &self.params;
        let (lo, hi) = self.domain();
        let re = self.rho_eta();
        let mut v = vec![bp("domain_min", lo)];
        match p.case_tag {
            CaseTag::RhoEqualsOne => {
                v.push(bp("eta_h1", p.eta * p.h1));
                v.push(bp("h1", p.h1));
            }
            CaseTag::RhoGreaterOne if p.monofractal => {}
            CaseTag::RhoGreaterOne => {
                v.push(bp("rho_eta_h2", re * p.h2_rho.unwrap()));
                v.push(bp("h2_plus_h3", p.h2_rho.unwrap() + p.h3_rho.unwrap()));
            }
            CaseTag::Case1 | CaseTag::Case2a | CaseTag::Case2b => {
                if p.case_tag != CaseTag::Case1 {
                    v.push(bp("rho_eta_h_rho_eta", re * p.h_rho_eta.unwrap()));
                }
                if p.case_tag != CaseTag::Case2b {
                    v.push(bp("rho_eta_h_rho", re * p.h_rho.unwrap()));
                    v.push(bp("theta_h_rho", p.theta_rho_of_h_rho.unwrap()));
                }
                v.push(bp("rho_tau_prime_zero", p.rho * p.tau_prime_zero));
            }
        }
        v.push(bp("domain_max", hi));
        v
    }

    /// Abscissae where `τ` changes formula.
    pub fn tau_kinks(&self) -> Vec<Breakpoint> {
        let p = &self.params;
        match p.case_tag {
            CaseTag::RhoEqualsOne => vec![bp("q1", p.q1)],
            CaseTag::RhoGreaterOne if p.monofractal => {
                vec![bp("q_kink", self.d() * p.eta / p.h_min)]
            }
            CaseTag::RhoGreaterOne => {
                let mut v = vec![bp("q2_rho", p.q2_rho.unwrap())];
                if let Some(q) = p.q1_rho {
                    v.push(bp("q1_rho", q));
                }
                v
            }
            _ => vec![bp("q_rho", p.q_rho.unwrap())],
        }
    }

    /// Predicted `σ_{M_{ρ,η}(μ)}(H)`, `-∞` off the domain.
    pub fn sigma(&self, h: f64) -> f64 {
        let (lo, hi) = self.domain();
        let tol = DOMAIN_TOL * (1.0 + hi.abs());
        if !(h >= lo - tol && h <= hi + tol) {
            return f64::NEG_INFINITY;
        }
        let h = h.clamp(lo, hi);
        let p = &self.params;
        let m = &self.model;
        let (d, rho, eta, re) = (self.d(), p.rho, p.eta, self.rho_eta());
        match p.case_tag {
            CaseTag::RhoEqualsOne => {
                if h < eta * p.h1 {
                    eta * m.sigma(h / eta)
                } else if h < p.h1 {
                    m.sigma(p.h1) / p.h1 * h
                } else {
                    m.sigma(h)
                }
            }
            CaseTag::RhoGreaterOne if p.monofractal => d * eta * h / p.h_min,
            CaseTag::RhoGreaterOne => {
                let (h2, h3, q2) = (p.h2_rho.unwrap(), p.h3_rho.unwrap(), p.q2_rho.unwrap());
                if h < re * h2 {
                    re * m.sigma(h / re) - d * (rho - 1.0) * eta
                } else if h < h2 + h3 {
                    q2 * h
                } else {
                    m.sigma(h - h3)
                }
            }
            tag => {
                let top = rho * p.tau_prime_zero;
                if tag != CaseTag::Case1 && h < re * p.h_rho_eta.unwrap() {
                    return m.sigma(h / re);
                }
                if tag != CaseTag::Case2b {
                    let (h_rho, th) = (p.h_rho.unwrap(), p.theta_rho_of_h_rho.unwrap());
                    if h < re * h_rho {
                        return eta * (d * (1.0 - rho) + rho * m.sigma(h / re));
                    }
                    if h < th {
                        return m.sigma(h_rho) / th * h;
                    }
                }
                if h < top {
                    theta_rho_inverse(m, rho, h).map_or(f64::NAN, |(_, s)| s)
                } else {
                    m.sigma(h / rho)
                }
            }
        }
    }

    /// Predicted `τ_{M_{ρ,η}(μ)}(q)`.
    pub fn tau(&self, q: f64) -> f64 {
        let p = &self.params;
        let m = &self.model;
        let (d, rho, eta, re) = (self.d(), p.rho, p.eta, self.rho_eta());
        match p.case_tag {
            CaseTag::RhoEqualsOne => {
                if q < p.q1 {
                    m.tau(q)
                } else {
                    eta * m.tau(q)
                }
            }
            CaseTag::RhoGreaterOne if p.monofractal => {
                let s = q - d * eta / p.h_min;
                if s >= 0.0 {
                    s * p.h_min
                } else {
                    s * p.h_min / eta
                }
            }
            CaseTag::RhoGreaterOne => {
                if q <= p.q2_rho.unwrap() {
                    m.tau(q) + p.h3_rho.unwrap() * q
                } else if p.q1_rho.is_none_or(|q1r| q < q1r) {
                    re * m.tau(q) + d * (rho - 1.0) * eta
                } else {
                    re * p.h1_rho.unwrap() * q
                }
            }
            _ => {
                let base = d * (rho - 1.0) + rho * m.tau(q);
                if q < p.q_rho.unwrap() {
                    base
                } else {
                    eta * base
                }
            }
        }
    }

    /// `I_{ρ,η}`; the whole domain when `ρ ≥ 1`.
    pub fn formalism_set(&self) -> FormalismSet {
        let p = &self.params;
        let re = self.rho_eta();
        let top = p.rho * p.tau_prime_zero;
        match p.case_tag {
            CaseTag::RhoEqualsOne | CaseTag::RhoGreaterOne => FormalismSet {
                interval: Some(self.domain()),
                points: vec![],
            },
            CaseTag::Case1 => FormalismSet {
                interval: Some((re * p.h_min, p.theta_rho_of_h_rho.unwrap())),
                points: vec![top],
            },
            CaseTag::Case2a => FormalismSet {
                interval: Some((re * p.h_rho_eta.unwrap(), p.theta_rho_of_h_rho.unwrap())),
                points: vec![top],
            },
            CaseTag::Case2b if p.frontier => FormalismSet {
                interval: None,
                points: vec![re * p.h_rho_eta.unwrap(), top],
            },
            CaseTag::Case2b => FormalismSet {
                interval: None,
                points: vec![top],
            },
        }
    }

    /// `σ` tabulated on `grid` with the in-range breakpoints inserted.
    pub fn sigma_curve(&self, grid: &[f64]) -> Result<SpectrumCurve> {
        let pts: Vec<f64> = self.sigma_breakpoints().iter().map(|b| b.at).collect();
        let x = merge_grid(grid, &pts);
        let mut c = SpectrumCurve::from_fn(CurveKind::SigmaOfH, &x, |h| self.sigma(h))?;
        let (lo, hi) = self.domain();
        c.truncated = grid.first().is_none_or(|&g| g > lo) || grid.last().is_none_or(|&g| g < hi);
        Ok(c)
    }

    /// `τ` tabulated on `grid` with the in-range kinks inserted.
    pub fn tau_curve(&self, grid: &[f64]) -> Result<SpectrumCurve> {
        let pts: Vec<f64> = self.tau_kinks().iter().map(|b| b.at).collect();
        let x = merge_grid(grid, &pts);
        SpectrumCurve::from_fn(CurveKind::TauOfQ, &x, |q| self.tau(q))
    }
}

/// `grid ∪ extra` restricted to the span of `grid`, sorted, with points
/// closer than `1e-13` merged.
pub fn merge_grid(grid: &[f64], extra: &[f64]) -> Vec<f64> {
    let (Some(&a), Some(&b)) = (grid.first(), grid.last()) else {
        return vec![];
    };
    let mut x: Vec<f64> = grid.to_vec();
    x.extend(extra.iter().filter(|&&e| e >= a && e <= b));
    x.sort_by(|p, q| p.total_cmp(q));
    let mut out: Vec<f64> = Vec::with_capacity(x.len());
    for v in x {
        match out.last() {
            Some(&l) if v - l < 1e-13 * (1.0 + v.abs()) => {}
            _ => out.push(v),
        }
    }
    out
}

pub fn predicted_sigma(model: &CascadeModel, rho: f64, eta: f64, params: &PhaseParams, grid: &[f64]) -> Result<SpectrumCurve> {
    check_params(model, rho, eta, params)?;
    PredictedSpectra {
        model: model.clone(),
        params: params.clone(),
    }
    .sigma_curve(grid)
}

pub fn predicted_tau(model: &CascadeModel, rho: f64, eta: f64, params: &PhaseParams, grid: &[f64]) -> Result<SpectrumCurve> {
    check_params(model, rho, eta, params)?;
    PredictedSpectra {
        model: model.clone(),
        params: params.clone(),
    }
    .tau_curve(grid)
}

fn check_params(model: &CascadeModel, rho: f64, eta: f64, params: &PhaseParams) -> Result<()> {
    if params.rho != rho || params.eta != eta || params.d != model.dim() || params.h_min != model.h_min() {
        return invalid("phase parameters were solved for another model or (rho, eta)");
    }
    Ok(())
}

/// Grid over `σ_μ`'s domain for the oracle: `u`, `σ_μ(u)` and
/// `d(1-ρ) + ρσ_μ(u)`.
struct OracleGrid {
    u: Vec<f64>,
    sigma: Vec<f64>,
    lifted: Vec<f64>,
    delta: Vec<f64>,
}

impl OracleGrid {
    fn new(model: &CascadeModel, rho: f64, eta: f64, density: usize) -> Result<Self> {
        if density < 2 {
            return invalid("oracle grid density must be ≥ 2");
        }
        let n = density;
        let lin = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
        let (hmin, hmax) = (model.h_min(), model.h_max());
        let mut u = vec![];
        let mut sigma = vec![];
        for i in 0..n {
            let x = lin(hmin, hmax, i);
            let s = model.sigma(x);
            if s > f64::NEG_INFINITY {
                u.push(x);
                sigma.push(s);
            }
        }
        let d = model.dim() as f64;
        let lifted = sigma.iter().map(|s| d * (1.0 - rho) + rho * s).collect();
        let delta = (0..n).map(|i| lin(1.0, 1.0 / eta, i)).collect();
        Ok(Self {
            u,
            sigma,
            lifted,
            delta,
        })
    }

    /// `max { min(lifted/δ, σ) : ρu/δ ≤ H }` over the full grid.
    fn max_at(&self, rho: f64, h: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for i in 0..self.u.len() {
            let ru = rho * self.u[i];
            for &dl in &self.delta {
                if ru / dl <= h + 1e-12 {
                    best = best.max((self.lifted[i] / dl).min(self.sigma[i]));
                }
            }
        }
        best
    }
}

fn check_oracle_args(model: &CascadeModel, rho: f64, eta: f64, h: f64) -> Result<()> {
    check_rho_eta(rho, eta)?;
    if rho >= 1.0 {
        return invalid("the variational oracle covers rho < 1 only");
    }
    let top = rho * model.tau_prime(0.0);
    if !(h >= 0.0 && h <= top + 1e-12 * (1.0 + top)) {
        return invalid(format!("H = {h} outside [0, ρτ′(0)] = [0, {top}]"));
    }
    Ok(())
}

/// `D̃(H) = max { m_ρ(u, δ) : ρu/δ ≤ H, 1 ≤ δ ≤ 1/η }`, with
/// `m_ρ(u, δ) = min((d(1-ρ) + ρσ_μ(u))/δ, σ_μ(u))`, by exhaustive search on
/// a `density × density` grid of `[H_min, H_max] × [1, 1/η]`.
pub fn oracle_d_tilde(model: &CascadeModel, rho: f64, eta: f64, h: f64, density: usize) -> Result<f64> {
    check_oracle_args(model, rho, eta, h)?;
    Ok(OracleGrid::new(model, rho, eta, density)?.max_at(rho, h))
}

/// [`oracle_d_tilde`] for many `H`, sharing the grid.
pub fn oracle_d_tilde_batch(model: &CascadeModel, rho: f64, eta: f64, hs: &[f64], density: usize) -> Result<Vec<f64>> {
    for &h in hs {
        check_oracle_args(model, rho, eta, h)?;
    }
    let g = OracleGrid::new(model, rho, eta, density)?;
    Ok(hs.par_iter().map(|&h| g.max_at(rho, h)).collect())
}

/// Numeric `τ*` against the predicted `σ` on a grid of the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormalismReport {
    pub h: Vec<f64>,
    pub sigma: Vec<f64>,
    pub tau_star: Vec<f64>,
    /// `|τ* - σ| ≤ tol`
    pub holds: Vec<bool>,
    /// Membership in `I_{ρ,η}` (exact, no tolerance).
    pub expected: Vec<bool>,
    pub tol: f64,
    pub formalism_set: FormalismSet,
    /// Grid points where `holds` and `expected` differ and which are more
    /// than one grid cell away from every edge of `I_{ρ,η}`.
    pub mismatches: Vec<f64>,
    /// `min(τ* - σ)` over domain points outside `I_{ρ,η}` (grid cells next
    /// to an edge excluded); `+∞` when there are none.
    pub min_gap_outside: f64,
    /// `max |τ* - σ|` over the grid.
    pub max_abs_gap: f64,
}

/// Options of the numeric conjugation behind [`formalism_report`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugationOptions {
    pub q_max: f64,
    pub q_step: f64,
    pub tol: f64,
}

impl Default for ConjugationOptions {
    fn default() -> Self {
        Self {
            q_max: 60.0,
            q_step: 1e-3,
            tol: 1e-3,
        }
    }
}

/// Numeric Legendre transform of the predicted `τ` on `h_grid`.
pub fn tau_star(spectra: &PredictedSpectra, h_grid: &[f64], opts: &ConjugationOptions) -> Result<SpectrumCurve> {
    let q = uniform_grid(-opts.q_max, opts.q_max, opts.q_step)?;
    legendre(&spectra.tau_curve(&q)?, h_grid)
}

pub fn formalism_report(model: &CascadeModel, rho: f64, eta: f64, params: &PhaseParams, h_grid: &[f64]) -> Result<FormalismReport> {
    formalism_report_with(model, rho, eta, params, h_grid, &ConjugationOptions::default())
}

pub fn formalism_report_with(
    model: &CascadeModel,
    rho: f64,
    eta: f64,
    params: &PhaseParams,
    h_grid: &[f64],
    opts: &ConjugationOptions,
) -> Result<FormalismReport> {
    check_params(model, rho, eta, params)?;
    let spectra = PredictedSpectra {
        model: model.clone(),
        params: params.clone(),
    };
    let (lo, hi) = spectra.domain();
    let h: Vec<f64> = h_grid.iter().cloned().filter(|&x| x >= lo && x <= hi).collect();
    if h.len() < 2 {
        return invalid("H grid has fewer than two points inside the domain");
    }
    let cell = h.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let sigma: Vec<f64> = h.par_iter().map(|&x| spectra.sigma(x)).collect();
    let ts = tau_star(&spectra, &h, opts)?.y;
    let set = spectra.formalism_set();
    let edges = set.edges();
    let near_edge = |x: f64| edges.iter().any(|e| (x - e).abs() <= cell * (1.0 + 1e-9));
    let mut holds = vec![];
    let mut expected = vec![];
    let mut mismatches = vec![];
    let mut min_gap_outside = f64::INFINITY;
    let mut max_abs_gap: f64 = 0.0;
    for i in 0..h.len() {
        let gap = ts[i] - sigma[i];
        let ok = gap.abs() <= opts.tol;
        let inside = set.contains(h[i], 0.0);
        max_abs_gap = max_abs_gap.max(gap.abs());
        if ok != inside && !near_edge(h[i]) {
            mismatches.push(h[i]);
        }
        if !inside && !near_edge(h[i]) {
            min_gap_outside = min_gap_outside.min(gap);
        }
        holds.push(ok);
        expected.push(inside);
    }
    Ok(FormalismReport {
        h,
        sigma,
        tau_star: ts,
        holds,
        expected,
        tol: opts.tol,
        formalism_set: set,
        mismatches,
        min_gap_outside,
        max_abs_gap,
    })
}
