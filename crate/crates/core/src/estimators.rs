//! Extreme value index estimators built on the weighted log-spacings.
//!
//! All regression estimators fit `Z_j = gamma + b * C_j(rho) + eps_j`. They
//! differ only in how the residuals are weighted (or penalised):
//!
//! | id     | fit                                                     |
//! |--------|---------------------------------------------------------|
//! | HILL   | mean of `Z_j`                                           |
//! | BCHILL | Hill scaled by `1 - b/(1-rho) (n/k)^rho`, `b` from WLS  |
//! | LS     | ordinary least squares, uniform weights                 |
//! | RR     | ridge penalty on the slope, penalty tuned on a grid     |
//! | WLS    | least squares with weights `W_j = 1 - j/(k+1)`          |

use std::fmt;
use std::str::FromStr;

use crate::asymptotics::ridge_amse_proxy;
use crate::error::{Error, Result};
use crate::second_order::{resolve_rho, RhoMethod};
use crate::spacings::{check_rho, covariates, log_spacings, weights, LogSpacings, OrderedTail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorId {
    Hill,
    BcHill,
    Ls,
    Rr,
    Wls,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 5] =
        [EstimatorId::Hill, EstimatorId::BcHill, EstimatorId::Ls, EstimatorId::Rr, EstimatorId::Wls];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::Hill => "HILL",
            EstimatorId::BcHill => "BCHILL",
            EstimatorId::Ls => "LS",
            EstimatorId::Rr => "RR",
            EstimatorId::Wls => "WLS",
        }
    }

    /// Whether the estimator consumes a second-order parameter.
    pub fn needs_rho(self) -> bool {
        self != EstimatorId::Hill
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HILL" => Ok(EstimatorId::Hill),
            "BCHILL" => Ok(EstimatorId::BcHill),
            "LS" => Ok(EstimatorId::Ls),
            "RR" => Ok(EstimatorId::Rr),
            "WLS" => Ok(EstimatorId::Wls),
            other => Err(format!("unknown estimator '{other}' (expected HILL, BCHILL, LS, RR or WLS)")),
        }
    }
}

/// A fitted regression of the log-spacings on the covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub gamma_hat: f64,
    pub b_hat: f64,
    pub rho_used: f64,
    pub k: usize,
    pub fitted_means: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl RegressionFit {
    fn new(z: &[f64], c: &[f64], gamma_hat: f64, b_hat: f64, rho: f64) -> Self {
        let fitted_means: Vec<f64> = c.iter().map(|cj| gamma_hat + b_hat * cj).collect();
        let residuals = z.iter().zip(&fitted_means).map(|(zj, mj)| zj - mj).collect();
        Self { gamma_hat, b_hat, rho_used: rho, k: z.len(), fitted_means, residuals }
    }
}

/// Estimates of the index over a range of tail fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct EviPath {
    pub estimator: EstimatorId,
    pub k_values: Vec<usize>,
    pub estimates: Vec<f64>,
    /// Second-order parameter used at each k; `None` for estimators that ignore it.
    pub rho_used: Vec<Option<f64>>,
    pub rho_method: RhoMethod,
    pub n: usize,
}

pub fn hill(z: &LogSpacings) -> f64 {
    z.z().iter().sum::<f64>() / z.k() as f64
}

fn check_regression_k(k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::KTooSmall { k })
    } else {
        Ok(())
    }
}

/// Weighted least squares fit with weights `W_j = 1 - j/(k+1)`.
pub fn wls_fit(z: &LogSpacings, rho: f64) -> Result<RegressionFit> {
    check_rho(rho)?;
    check_regression_k(z.k())?;
    let w = weights(z.k())?.normalized;
    let c = covariates(z.k(), rho)?.c;
    Ok(weighted_fit(z.z(), &c, &w, rho))
}

/// Closed-form weighted fit; `w` must sum to one.
fn weighted_fit(z: &[f64], c: &[f64], w: &[f64], rho: f64) -> RegressionFit {
    let s1: f64 = w.iter().zip(c).map(|(wj, cj)| wj * cj).sum();
    let s2: f64 = w.iter().zip(c).map(|(wj, cj)| wj * (cj - s1) * (cj - s1)).sum();
    let cross: f64 = w.iter().zip(c).zip(z).map(|((wj, cj), zj)| wj * (cj - s1) * zj).sum();
    let z_bar: f64 = w.iter().zip(z).map(|(wj, zj)| wj * zj).sum();
    let b_hat = cross / s2;
    let gamma_hat = z_bar - b_hat * s1;
    RegressionFit::new(z, c, gamma_hat, b_hat, rho)
}

/// Ordinary least squares fit (uniform weights). Identical to `ridge_fit` with zero penalty.
pub fn ls_fit(z: &LogSpacings, rho: f64) -> Result<RegressionFit> {
    ridge_fit(z, rho, 0.0)
}

/// Least squares with an L2 penalty on the slope only.
pub fn ridge_fit(z: &LogSpacings, rho: f64, penalty: f64) -> Result<RegressionFit> {
    check_rho(rho)?;
    check_regression_k(z.k())?;
    if penalty.is_nan() || penalty < 0.0 {
        return Err(Error::NegativePenalty(penalty));
    }
    let c = covariates(z.k(), rho)?.c;
    Ok(penalized_fit(z.z(), &c, penalty, rho))
}

fn penalized_fit(z: &[f64], c: &[f64], penalty: f64, rho: f64) -> RegressionFit {
    let k = z.len() as f64;
    let c_bar = c.iter().sum::<f64>() / k;
    let z_bar = z.iter().sum::<f64>() / k;
    let sxx: f64 = c.iter().map(|cj| (cj - c_bar) * (cj - c_bar)).sum();
    let sxy: f64 = c.iter().zip(z).map(|(cj, zj)| (cj - c_bar) * (zj - z_bar)).sum();
    let b_hat = if penalty.is_infinite() { 0.0 } else { sxy / (sxx + penalty) };
    let gamma_hat = z_bar - b_hat * c_bar;
    RegressionFit::new(z, c, gamma_hat, b_hat, rho)
}

/// Ridge penalties tried by [`ridge_fit_tuned`], as multiples of `k`.
pub const RIDGE_PENALTY_MULTIPLIERS: [f64; 7] = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];

/// Ridge fit with the penalty picked from `RIDGE_PENALTY_MULTIPLIERS * k` by
/// minimising the plug-in AMSE, using the unpenalised fit for `gamma` and `b`.
///
/// Returns the fit and the chosen penalty. Ties go to the smaller penalty.
pub fn ridge_fit_tuned(z: &LogSpacings, rho: f64) -> Result<(RegressionFit, f64)> {
    check_rho(rho)?;
    check_regression_k(z.k())?;
    let c = covariates(z.k(), rho)?.c;
    let pilot = penalized_fit(z.z(), &c, 0.0, rho);
    let k = z.k() as f64;
    let mut best = (f64::INFINITY, 0.0);
    for m in RIDGE_PENALTY_MULTIPLIERS {
        let penalty = m * k;
        let score = ridge_amse_proxy(pilot.gamma_hat, pilot.b_hat, &c, penalty);
        if score < best.0 {
            best = (score, penalty);
        }
    }
    Ok((penalized_fit(z.z(), &c, best.1, rho), best.1))
}

/// Bias-corrected Hill: `hill(z) * (1 - b_hat/(1-rho) * (n/k)^rho)`.
pub fn bchill(z: &LogSpacings, rho: f64, b_hat: f64, n: usize) -> Result<f64> {
    check_rho(rho)?;
    let k = z.k();
    if n < k + 1 {
        return Err(Error::KOutOfRange { k, min: 1, max: n.saturating_sub(1) });
    }
    let ratio = n as f64 / k as f64;
    Ok(hill(z) * (1.0 - b_hat / (1.0 - rho) * ratio.powf(rho)))
}

/// Evaluates several estimators on one set of spacings, sharing the WLS fit
/// between WLS and BCHILL. Output order follows `ids`.
pub fn estimate_set(z: &LogSpacings, rho: Option<f64>, ids: &[EstimatorId]) -> Vec<Result<f64>> {
    let mut wls: Option<Result<RegressionFit>> = None;
    let mut wls_once = |rho: f64| wls.get_or_insert_with(|| wls_fit(z, rho)).clone();
    ids.iter()
        .map(|&id| {
            let need = || rho.ok_or(Error::InvalidConfig(format!("{id} requires a second-order parameter")));
            match id {
                EstimatorId::Hill => Ok(hill(z)),
                EstimatorId::Wls => Ok(wls_once(need()?)?.gamma_hat),
                EstimatorId::BcHill => {
                    let r = need()?;
                    let fit = wls_once(r)?;
                    bchill(z, r, fit.b_hat, z.n())
                }
                EstimatorId::Ls => Ok(ls_fit(z, need()?)?.gamma_hat),
                EstimatorId::Rr => Ok(ridge_fit_tuned(z, need()?)?.0.gamma_hat),
            }
        })
        .collect()
}

/// Single estimate of the index at the tail fraction carried by `z`.
pub fn estimate(id: EstimatorId, z: &LogSpacings, rho: Option<f64>) -> Result<f64> {
    estimate_set(z, rho, &[id]).pop().expect("one estimate per id")
}

pub(crate) fn check_k_range(k_min: usize, k_max: usize, n: usize) -> Result<()> {
    if k_min < 2 || k_min > k_max || k_max + 1 > n {
        return Err(Error::InvalidConfig(format!(
            "need 2 <= k_min <= k_max <= n-1, got k_min={k_min}, k_max={k_max}, n={n}"
        )));
    }
    Ok(())
}

/// Estimates of one estimator for every `k` in `k_min..=k_max`.
///
/// The supported `rho` methods do not depend on `k`, so `rho` is resolved once
/// and recorded against every `k`.
pub fn evi_path(
    tail: &OrderedTail,
    estimator: EstimatorId,
    rho_method: &RhoMethod,
    k_min: usize,
    k_max: usize,
) -> Result<EviPath> {
    check_k_range(k_min, k_max, tail.n())?;
    let rho = if estimator.needs_rho() { Some(resolve_rho(tail, rho_method, k_max)?) } else { None };
    let full = log_spacings(tail, k_max)?;
    let mut estimates = Vec::with_capacity(k_max - k_min + 1);
    for k in k_min..=k_max {
        let z = full.truncated(k)?;
        estimates.push(estimate(estimator, &z, rho).map_err(|e| e.at_k(k))?);
    }
    Ok(EviPath {
        estimator,
        k_values: (k_min..=k_max).collect(),
        estimates,
        rho_used: vec![rho; k_max - k_min + 1],
        rho_method: rho_method.clone(),
        n: tail.n(),
    })
}

/// WLS estimates over `k_lo..=k_hi` from precomputed spacings of length >= `k_hi`.
pub(crate) fn wls_path_values(full: &LogSpacings, rho: f64, k_lo: usize, k_hi: usize) -> Result<Vec<f64>> {
    (k_lo..=k_hi)
        .map(|k| {
            let w = weights(k)?.normalized;
            let c = covariates(k, rho)?.c;
            Ok(weighted_fit(&full.z()[..k], &c, &w, rho).gamma_hat)
        })
        .collect()
}

/// The `k` attaining the smallest MSE; ties go to the smallest `k`.
pub fn optimal_k(mse_by_k: &[(usize, f64)]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &(k, mse) in mse_by_k {
        if !(mse.is_finite() && mse >= 0.0) {
            return Err(Error::InvalidMse { k, mse });
        }
        best = match best {
            Some((bk, bm)) if bm < mse || (bm == mse && bk <= k) => Some((bk, bm)),
            _ => Some((k, mse)),
        };
    }
    best.map(|(k, _)| k).ok_or(Error::EmptyInput)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacings::validate_and_sort;

    fn spacings(z: &[f64]) -> LogSpacings {
        LogSpacings::new(z.to_vec(), z.len() + 1).unwrap()
    }

    #[test]
    fn hill_examples() {
        assert_eq!(hill(&spacings(&[1.0, 2.0])), 1.5);
        assert_eq!(hill(&spacings(&[0.5, 0.5, 0.5])), 0.5);
    }

    #[test]
    fn noise_free_recovery() {
        let z = spacings(&[0.55, 0.60, 0.65]);
        for fit in [wls_fit(&z, -1.0).unwrap(), ls_fit(&z, -1.0).unwrap(), ridge_fit(&z, -1.0, 0.0).unwrap()] {
            assert!((fit.gamma_hat - 0.5).abs() < 1e-12, "{fit:?}");
            assert!((fit.b_hat - 0.2).abs() < 1e-12, "{fit:?}");
            assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
        }
    }

    #[test]
    fn constant_spacings() {
        let z = spacings(&[0.8; 7]);
        for fit in [wls_fit(&z, -0.7).unwrap(), ls_fit(&z, -0.7).unwrap(), ridge_fit(&z, -0.7, 3.0).unwrap()] {
            assert!((fit.gamma_hat - 0.8).abs() < 1e-12);
            assert!(fit.b_hat.abs() < 1e-12);
        }
    }

    #[test]
    fn regression_preconditions() {
        let z1 = spacings(&[1.0]);
        assert_eq!(wls_fit(&z1, -1.0), Err(Error::KTooSmall { k: 1 }));
        assert_eq!(ls_fit(&z1, -1.0), Err(Error::KTooSmall { k: 1 }));
        let z = spacings(&[1.0, 2.0]);
        assert_eq!(wls_fit(&z, 0.0), Err(Error::InvalidRho(0.0)));
        assert_eq!(ridge_fit(&z, -1.0, -1.0), Err(Error::NegativePenalty(-1.0)));
        assert_eq!(bchill(&z, 0.5, 0.1, 10), Err(Error::InvalidRho(0.5)));
    }

    #[test]
    fn ridge_shrinks_to_mean() {
        let z = spacings(&[0.3, 0.9, 0.4, 1.3, 0.8]);
        let fit = ridge_fit(&z, -1.0, f64::INFINITY).unwrap();
        assert_eq!(fit.b_hat, 0.0);
        assert!((fit.gamma_hat - hill(&z)).abs() < 1e-15);
        let big = ridge_fit(&z, -1.0, 1e12).unwrap();
        assert!(big.b_hat.abs() < 1e-9 && (big.gamma_hat - hill(&z)).abs() < 1e-9);
    }

    #[test]
    fn bchill_examples() {
        let z = spacings(&[1.0, 2.0]);
        assert!((bchill(&z, -1.0, 0.2, 10).unwrap() - 1.47).abs() < 1e-12);
        assert_eq!(bchill(&z, -1.0, 0.0, 10).unwrap(), hill(&z));
        assert!((bchill(&z, -60.0, 0.2, 10).unwrap() - hill(&z)).abs() < 1e-12);
        assert!((bchill(&z, -1.0, 0.2, 1usize << 50).unwrap() - hill(&z)).abs() < 1e-12);
    }

    #[test]
    fn optimal_k_examples() {
        assert_eq!(optimal_k(&[(10, 0.5), (20, 0.2), (30, 0.3)]), Ok(20));
        assert_eq!(optimal_k(&[(10, 0.2), (20, 0.2)]), Ok(10));
        assert_eq!(optimal_k(&[(20, 0.2), (10, 0.2)]), Ok(10));
        assert_eq!(optimal_k(&[]), Err(Error::EmptyInput));
        assert!(matches!(optimal_k(&[(5, -0.1)]), Err(Error::InvalidMse { .. })));
    }

    #[test]
    fn path_shape_and_errors() {
        let raw: Vec<f64> = (1..=60).map(|i| (i as f64 / 61.0).powf(-0.5)).collect();
        let tail = validate_and_sort(&raw).unwrap();
        let p = evi_path(&tail, EstimatorId::Wls, &RhoMethod::Fixed(-1.0), 2, 40).unwrap();
        assert_eq!(p.k_values.len(), 39);
        assert_eq!(p.estimates.len(), 39);
        assert!(p.estimates.iter().all(|g| g.is_finite()));
        assert!(p.rho_used.iter().all(|r| *r == Some(-1.0)));
        let h = evi_path(&tail, EstimatorId::Hill, &RhoMethod::Fixed(-1.0), 2, 40).unwrap();
        assert!(h.rho_used.iter().all(Option::is_none));
        assert!(evi_path(&tail, EstimatorId::Wls, &RhoMethod::Fixed(-1.0), 30, 20).is_err());
        assert!(evi_path(&tail, EstimatorId::Wls, &RhoMethod::Fixed(-1.0), 1, 20).is_err());
        assert!(evi_path(&tail, EstimatorId::Wls, &RhoMethod::Fixed(-1.0), 2, 60).is_err());
    }

    #[test]
    fn path_rejects_invalid_fixed_rho() {
        let tail = validate_and_sort(&[4.0, 3.0, 2.0, 1.0]).unwrap();
        let p = evi_path(&tail, EstimatorId::Wls, &RhoMethod::Fixed(0.5), 2, 3);
        assert_eq!(p, Err(Error::InvalidRho(0.5)));
    }

    #[test]
    fn estimator_names_round_trip() {
        for id in EstimatorId::ALL {
            assert_eq!(id.as_str().parse::<EstimatorId>(), Ok(id));
        }
        assert_eq!("wls".parse::<EstimatorId>(), Ok(EstimatorId::Wls));
        assert!("moment".parse::<EstimatorId>().is_err());
    }
}
