//! Finite-k weight/covariate moment sums, AMSE of the WLS estimator and
//! Monte Carlo diagnostics for the standardized statistic
//! `sqrt(3k) (gamma_hat - gamma) / (2 gamma)`.
//!
//! The WLS intercept is linear in the spacings,
//! `gamma_hat = sum_j a_j Z_j` with `a_j = W~_j (1 + S1 (S1 - C_j) / S2)`,
//! so under independent exponential spacings with common scale `gamma` its
//! exact variance is `gamma^2 sum_j a_j^2`. Expanding the square gives
//! `gamma^2 (sum W~_j^2 + 2 S1 S' / S2 + S1^2 S'' / S2^2)`, where the three
//! sums are all of order `1/k`. [`wls_variance_factor`] and
//! [`wls_asymptotic_variance_factor`] return `k * Var / gamma^2` exactly and
//! in the limit respectively.

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimators::wls_fit;
use crate::montecarlo::{moments, sample_model_spacings};
use crate::rng::replication_seed;
use crate::second_order::{resolve_rho, RhoMethod};
use crate::spacings::{check_rho, covariates, log_spacings, validate_and_sort, weights};

/// Weighted covariate sums at a finite tail fraction together with their limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SMoments {
    pub k: usize,
    pub rho: f64,
    /// `sum W~_j C_j`
    pub s1: f64,
    /// `sum W~_j C_j^2 - s1^2`
    pub s2: f64,
    /// `sum W~_j^2 (s1 - C_j)`
    pub s_dot: f64,
    /// `sum W~_j^2 (s1 - C_j)^2`
    pub s_ddot: f64,
    /// `sum W~_j^2`
    pub w2: f64,
    pub s1_limit: f64,
    pub s2_limit: f64,
}

impl SMoments {
    /// `1 / s2_limit`.
    pub fn s_constant(&self) -> f64 {
        1.0 / self.s2_limit
    }
}

pub fn s1_limit(rho: f64) -> f64 {
    2.0 / ((1.0 - rho) * (2.0 - rho))
}

pub fn s2_limit(rho: f64) -> f64 {
    rho * rho * (5.0 - rho) / ((1.0 - 2.0 * rho) * (1.0 - rho).powi(2) * (2.0 - rho).powi(2))
}

fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        Err(Error::KTooSmall { k })
    } else {
        Ok(())
    }
}

pub fn s_moments(k: usize, rho: f64) -> Result<SMoments> {
    check_rho(rho)?;
    check_k(k)?;
    let w = weights(k)?.normalized;
    let c = covariates(k, rho)?.c;
    let s1: f64 = w.iter().zip(&c).map(|(wj, cj)| wj * cj).sum();
    let s2: f64 = w.iter().zip(&c).map(|(wj, cj)| wj * (cj - s1) * (cj - s1)).sum();
    let (mut s_dot, mut s_ddot, mut w2) = (0.0, 0.0, 0.0);
    for (wj, cj) in w.iter().zip(&c) {
        let w_sq = wj * wj;
        let d = s1 - cj;
        s_dot += w_sq * d;
        s_ddot += w_sq * d * d;
        w2 += w_sq;
    }
    Ok(SMoments { k, rho, s1, s2, s_dot, s_ddot, w2, s1_limit: s1_limit(rho), s2_limit: s2_limit(rho) })
}

/// Coefficient on the `S1 S' / S2` term of the AMSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmseVariant {
    /// Coefficient 2, as obtained by expanding the variance of the linear form.
    #[default]
    Derivation,
    /// Coefficient 4.
    Displayed,
}

impl AmseVariant {
    fn coefficient(self) -> f64 {
        match self {
            AmseVariant::Derivation => 2.0,
            AmseVariant::Displayed => 4.0,
        }
    }
}

/// `gamma^2 (4/(3k) + 2 S1 S'/S2 + S1^2 S''/S2^2)` at finite `k`.
pub fn amse(gamma: f64, k: usize, rho: f64) -> Result<f64> {
    amse_with(gamma, k, rho, AmseVariant::Derivation)
}

pub fn amse_with(gamma: f64, k: usize, rho: f64, variant: AmseVariant) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::NonPositiveTrueGamma(gamma));
    }
    let s = s_moments(k, rho)?;
    let lead = 4.0 / (3.0 * k as f64);
    let corr = variant.coefficient() * s.s1 * s.s_dot / s.s2 + s.s1 * s.s1 * s.s_ddot / (s.s2 * s.s2);
    Ok(gamma * gamma * (lead + corr))
}

/// `k * Var(gamma_hat_wls) / gamma^2` for independent exponential spacings with
/// common mean `gamma`, computed exactly as `k * sum a_j^2`.
pub fn wls_variance_factor(k: usize, rho: f64) -> Result<f64> {
    let s = s_moments(k, rho)?;
    Ok(k as f64 * (s.w2 + 2.0 * s.s1 * s.s_dot / s.s2 + s.s1 * s.s1 * s.s_ddot / (s.s2 * s.s2)))
}

/// Limit of [`wls_variance_factor`] as `k -> infinity`.
pub fn wls_asymptotic_variance_factor(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let a = -rho;
    let s1 = s1_limit(rho);
    let s2 = s2_limit(rho);
    // integrals of (1-u)^2 u^a and (1-u)^2 u^{2a} over (0, 1)
    let i1 = 2.0 / ((a + 1.0) * (a + 2.0) * (a + 3.0));
    let i2 = 2.0 / ((2.0 * a + 1.0) * (2.0 * a + 2.0) * (2.0 * a + 3.0));
    let k_dot = 4.0 * (s1 / 3.0 - i1);
    let k_ddot = 4.0 * (s1 * s1 / 3.0 - 2.0 * s1 * i1 + i2);
    Ok(4.0 / 3.0 + 2.0 * s1 * k_dot / s2 + s1 * s1 * k_ddot / (s2 * s2))
}

/// Plug-in AMSE of the uniform-weight ridge intercept for covariates `c` and
/// slope penalty `penalty`: `gamma^2 sum a_j^2 + (b c_bar penalty/(Sxx + penalty))^2`.
pub fn ridge_amse_proxy(gamma: f64, b: f64, c: &[f64], penalty: f64) -> f64 {
    let k = c.len() as f64;
    let c_bar = c.iter().sum::<f64>() / k;
    let sxx: f64 = c.iter().map(|cj| (cj - c_bar) * (cj - c_bar)).sum();
    let denom = sxx + penalty;
    let var: f64 = c.iter().map(|cj| (1.0 / k - c_bar * (cj - c_bar) / denom).powi(2)).sum();
    let bias = b * c_bar * penalty / denom;
    gamma * gamma * var + bias * bias
}

pub fn standardized_statistic(gamma_hat: f64, gamma_true: f64, k: usize) -> Result<f64> {
    if !(gamma_true.is_finite() && gamma_true > 0.0) {
        return Err(Error::NonPositiveTrueGamma(gamma_true));
    }
    if k == 0 {
        return Err(Error::KOutOfRange { k, min: 1, max: usize::MAX });
    }
    Ok((3.0 * k as f64).sqrt() * (gamma_hat - gamma_true) / (2.0 * gamma_true))
}

/// Where the WLS estimates behind a normality report come from.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalitySource {
    /// Spacings drawn directly from the exponential regression model; the
    /// estimator is given the true `rho`.
    Model { gamma: f64, b: f64, rho: f64, k: usize },
    /// Spacings from sorted samples of `spec`.
    Sampling { spec: DistributionSpec, n: usize, k: usize, rho_method: RhoMethod },
}

impl NormalitySource {
    fn k(&self) -> usize {
        match self {
            NormalitySource::Model { k, .. } | NormalitySource::Sampling { k, .. } => *k,
        }
    }

    fn true_gamma(&self) -> f64 {
        match self {
            NormalitySource::Model { gamma, .. } => *gamma,
            NormalitySource::Sampling { spec, .. } => spec.true_gamma(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub source: NormalitySource,
    pub reps: usize,
    pub k: usize,
    pub master_seed: u64,
    pub sample_mean: f64,
    /// Divisor `reps - 1`.
    pub sample_variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// The standardized statistic of every replication, in replication order.
    pub statistics: Vec<f64>,
}

pub const MIN_NORMALITY_REPS: usize = 100;

pub fn normality_report(source: &NormalitySource, reps: usize, master_seed: u64) -> Result<NormalityReport> {
    use rayon::prelude::*;

    if reps < MIN_NORMALITY_REPS {
        return Err(Error::TooFewReps { reps, min: MIN_NORMALITY_REPS });
    }
    let gamma_true = source.true_gamma();
    if !(gamma_true.is_finite() && gamma_true > 0.0) {
        return Err(Error::NonPositiveTrueGamma(gamma_true));
    }
    let k = source.k();
    let statistics = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let seed = replication_seed(master_seed, r);
            let gamma_hat = match source {
                NormalitySource::Model { gamma, b, rho, k } => {
                    let z = sample_model_spacings(*gamma, *b, *rho, *k, seed)?;
                    wls_fit(&z, *rho)?.gamma_hat
                }
                NormalitySource::Sampling { spec, n, k, rho_method } => {
                    let tail = validate_and_sort(&spec.sample(*n, seed))?;
                    let rho = resolve_rho(&tail, rho_method, *k)?;
                    wls_fit(&log_spacings(&tail, *k)?, rho)?.gamma_hat
                }
            };
            standardized_statistic(gamma_hat, gamma_true, k)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = moments(&statistics);
    Ok(NormalityReport {
        source: source.clone(),
        reps,
        k,
        master_seed,
        sample_mean: m.mean,
        sample_variance: m.variance * reps as f64 / (reps - 1) as f64,
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        statistics,
    })
}
