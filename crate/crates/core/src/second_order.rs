//! Resolution of the second-order parameter `rho < 0` fed to the regression fits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimators::wls_path_values;
use crate::spacings::{check_rho, log_spacings, OrderedTail};

/// Grid scanned by [`RhoMethod::MinVariance`] unless another is given.
pub const DEFAULT_RHO_GRID: [f64; 7] = [-0.25, -0.5, -0.75, -1.0, -1.5, -2.0, -3.0];
pub const DEFAULT_K_FRACTION: f64 = 0.9;

/// Bounds applied to the moment-type estimate.
pub const MOMENT_RHO_MIN: f64 = -8.0;
pub const MOMENT_RHO_MAX: f64 = -0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum RhoMethod {
    /// A known value.
    Fixed(f64),
    /// Moment-ratio estimator on the top `floor(n^0.995)` observations.
    MomentType { tau: f64 },
    /// The grid value whose WLS path over `k` has the smallest sample variance.
    MinVariance { grid: Vec<f64>, k_fraction: f64 },
}

impl RhoMethod {
    pub fn moment() -> Self {
        RhoMethod::MomentType { tau: 0.0 }
    }

    pub fn min_variance() -> Self {
        RhoMethod::MinVariance { grid: DEFAULT_RHO_GRID.to_vec(), k_fraction: DEFAULT_K_FRACTION }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RhoMethod::Fixed(v) => check_rho(*v),
            RhoMethod::MomentType { tau } if !tau.is_finite() => {
                Err(Error::InvalidConfig(format!("moment tau must be finite, got {tau}")))
            }
            RhoMethod::MomentType { .. } => Ok(()),
            RhoMethod::MinVariance { grid, k_fraction } => {
                if grid.is_empty() || grid.iter().any(|r| !(r.is_finite() && *r < 0.0)) {
                    return Err(Error::GridEmpty);
                }
                if !(*k_fraction > 0.0 && *k_fraction <= 1.0) {
                    return Err(Error::InvalidConfig(format!("k_fraction must lie in (0, 1], got {k_fraction}")));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for RhoMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhoMethod::Fixed(v) => write!(f, "fixed:{v}"),
            RhoMethod::MomentType { tau } if *tau == 0.0 => f.write_str("moment"),
            RhoMethod::MomentType { tau } => write!(f, "moment:{tau}"),
            RhoMethod::MinVariance { grid, k_fraction } => {
                if grid.as_slice() == DEFAULT_RHO_GRID && *k_fraction == DEFAULT_K_FRACTION {
                    f.write_str("minvar")
                } else {
                    let g: Vec<String> = grid.iter().map(f64::to_string).collect();
                    write!(f, "minvar[{}]@{k_fraction}", g.join(";"))
                }
            }
        }
    }
}

impl FromStr for RhoMethod {
    type Err = String;

    /// Accepts `fixed:<v>`, `moment`, `moment:<tau>` and `minvar`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let parsed = if let Some(v) = s.strip_prefix("fixed:") {
            let v: f64 = v.trim().parse().map_err(|_| format!("bad fixed rho value '{v}'"))?;
            RhoMethod::Fixed(v)
        } else if s == "moment" {
            RhoMethod::moment()
        } else if let Some(t) = s.strip_prefix("moment:") {
            let tau: f64 = t.trim().parse().map_err(|_| format!("bad moment tau '{t}'"))?;
            RhoMethod::MomentType { tau }
        } else if s == "minvar" {
            RhoMethod::min_variance()
        } else {
            return Err(format!("unknown rho method '{s}' (expected fixed:<v>, moment or minvar)"));
        };
        parsed.validate().map_err(|e| e.to_string())?;
        Ok(parsed)
    }
}

/// Resolves `rho` for the given tail. None of the supported methods depend on
/// `k`; it is accepted so callers can resolve per tail fraction uniformly.
pub fn resolve_rho(tail: &OrderedTail, method: &RhoMethod, _k: usize) -> Result<f64> {
    method.validate()?;
    match method {
        RhoMethod::Fixed(v) => Ok(*v),
        RhoMethod::MomentType { tau } => moment_rho(tail, *tau),
        RhoMethod::MinVariance { grid, k_fraction } => min_variance_rho(tail, grid, *k_fraction),
    }
}

/// Number of top order statistics used by the moment-type estimator.
pub fn moment_k1(n: usize) -> usize {
    ((n as f64).powf(0.995).floor() as usize).clamp(1, n - 1)
}

fn moment_rho(tail: &OrderedTail, tau: f64) -> Result<f64> {
    let v = tail.values();
    let k1 = moment_k1(tail.n());
    let anchor = v[k1].ln();
    let (mut m1, mut m2, mut m3) = (0.0, 0.0, 0.0);
    for x in &v[..k1] {
        let d = x.ln() - anchor;
        m1 += d;
        m2 += d * d;
        m3 += d * d * d;
    }
    let k = k1 as f64;
    let (m1, m2, m3) = (m1 / k, m2 / k, m3 / k);
    if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0) {
        return Err(Error::DegenerateTail);
    }
    let t = if tau == 0.0 {
        let a = m1.ln();
        let b = 0.5 * (m2 / 2.0).ln();
        let c = (m3 / 6.0).ln() / 3.0;
        (a - b) / (b - c)
    } else {
        let a = m1.powf(tau);
        let b = (m2 / 2.0).powf(tau / 2.0);
        let c = (m3 / 6.0).powf(tau / 3.0);
        (a - b) / (b - c)
    };
    let rho = -(3.0 * (t - 1.0) / (t - 3.0)).abs();
    if rho.is_nan() {
        return Err(Error::DegenerateTail);
    }
    Ok(rho.clamp(MOMENT_RHO_MIN, MOMENT_RHO_MAX))
}

/// The `k` window scanned by the minimum-variance selector.
pub fn min_variance_window(n: usize, k_fraction: f64) -> Result<(usize, usize)> {
    let lo = ((0.1 * n as f64).ceil() as usize).max(2);
    let hi = (k_fraction * (n - 1) as f64).floor() as usize;
    if hi < lo {
        return Err(Error::WindowTooSmall { lo, hi, n });
    }
    Ok((lo, hi))
}

fn min_variance_rho(tail: &OrderedTail, grid: &[f64], k_fraction: f64) -> Result<f64> {
    let (lo, hi) = min_variance_window(tail.n(), k_fraction)?;
    let full = log_spacings(tail, hi)?;
    let mut best: Option<(f64, f64)> = None;
    for &rho in grid {
        let path = wls_path_values(&full, rho, lo, hi)?;
        let var = sample_variance(&path);
        best = match best {
            Some((br, bv)) if bv < var || (bv == var && br <= rho) => Some((br, bv)),
            _ => Some((rho, var)),
        };
    }
    best.map(|(r, _)| r).ok_or(Error::GridEmpty)
}

fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}
