//! Order statistics across seeds.
//!
//! Values may be `-∞` (empty cubes or bins), which off-the-shelf quantile
//! routines turn into NaN when interpolating.

/// Linear-interpolation quantile (type 7) of unsorted data; `-∞` absorbs
/// any interpolation that touches it.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let t = pos - lo as f64;
    if t == 0.0 || lo + 1 == v.len() {
        return v[lo];
    }
    let (a, b) = (v[lo], v[lo + 1]);
    if a == b || a == f64::NEG_INFINITY {
        a
    } else {
        a + (b - a) * t
    }
}

/// Median with the quartiles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spread {
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

pub fn spread(values: &[f64]) -> Spread {
    Spread {
        median: quantile(values, 0.5),
        q25: quantile(values, 0.25),
        q75: quantile(values, 0.75),
    }
}
