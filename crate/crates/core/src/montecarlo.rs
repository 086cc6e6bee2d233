//! Replicated estimation studies: bias, variance and MSE of each estimator as
//! a function of the tail fraction.
//!
//! Replication `r` draws its sample from seed `master_seed ^ splitmix64(r)`.
//! Replications run in parallel; results are collected by replication index
//! and reduced sequentially, so a configuration always yields bit-identical
//! summaries.

use rayon::prelude::*;

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::estimators::{check_k_range, estimate_set, EstimatorId};
use crate::rng::{open_uniform, replication_seed, uniform_rng, GENERATOR_ID, SEED_MIX_ID};
use crate::second_order::{resolve_rho, RhoMethod};
use crate::spacings::{check_rho, covariates, log_spacings, validate_and_sort, LogSpacings};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub spec: DistributionSpec,
    pub n: usize,
    pub reps: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Evaluate every `k_step`-th tail fraction starting at `k_min`.
    pub k_step: usize,
    pub estimators: Vec<EstimatorId>,
    pub rho_method: RhoMethod,
    pub master_seed: u64,
}

impl SimulationConfig {
    /// All five estimators, `rho` by minimum variance, `k` over `[5, n-1]`.
    pub fn new(spec: DistributionSpec, n: usize, reps: usize, master_seed: u64) -> Self {
        Self {
            spec,
            n,
            reps,
            k_min: 5.min(n.saturating_sub(1)).max(2),
            k_max: n.saturating_sub(1),
            k_step: 1,
            estimators: EstimatorId::ALL.to_vec(),
            rho_method: RhoMethod::min_variance(),
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::TooFewReps { reps: 0, min: 1 });
        }
        if self.estimators.is_empty() {
            return Err(Error::EmptyEstimatorSet);
        }
        if self.k_step == 0 {
            return Err(Error::InvalidConfig("k_step must be >= 1".into()));
        }
        check_k_range(self.k_min, self.k_max, self.n)?;
        self.rho_method.validate()
    }

    pub fn k_grid(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).step_by(self.k_step.max(1)).collect()
    }
}

/// Replications of the exponential regression model itself, bypassing order statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSimulationConfig {
    pub gamma: f64,
    pub b: f64,
    /// True second-order parameter; also handed to the estimators.
    pub rho: f64,
    pub k: usize,
    pub reps: usize,
    pub estimators: Vec<EstimatorId>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimulationSource {
    Sampling(SimulationConfig),
    Model(ModelSimulationConfig),
}

/// Aggregate of one estimator at one tail fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub estimator: EstimatorId,
    pub k: usize,
    pub mean: f64,
    /// `mean - true_gamma`
    pub bias: f64,
    pub mse: f64,
    pub variance: f64,
    /// Replications where the estimate could not be computed.
    pub missing: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub source: SimulationSource,
    pub true_gamma: f64,
    pub generator: &'static str,
    pub seed_mix: &'static str,
    /// Cells ordered by estimator (as configured), then by increasing `k`.
    pub cells: Vec<CellStats>,
    /// Second-order parameter resolved in each replication, if any.
    pub rho_per_rep: Vec<Option<f64>>,
}

impl SimulationSummary {
    pub fn cell(&self, estimator: EstimatorId, k: usize) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.estimator == estimator && c.k == k)
    }

    /// `(k, mse)` pairs of one estimator, for optimal-k selection.
    pub fn mse_by_k(&self, estimator: EstimatorId) -> Vec<(usize, f64)> {
        self.cells.iter().filter(|c| c.estimator == estimator && c.mse.is_finite()).map(|c| (c.k, c.mse)).collect()
    }
}

/// `Z_j = (gamma + b C_j) f_j` for given unit-mean noise `f_j`.
pub fn model_spacings_from_noise(gamma: f64, b: f64, rho: f64, noise: &[f64]) -> Result<LogSpacings> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter { name: "gamma", value: gamma });
    }
    if !b.is_finite() {
        return Err(Error::InvalidParameter { name: "b", value: b });
    }
    check_rho(rho)?;
    let k = noise.len();
    let c = covariates(k, rho)?.c;
    let mut z = Vec::with_capacity(k);
    for (j, (cj, fj)) in c.iter().zip(noise).enumerate() {
        let mean = gamma + b * cj;
        if mean.is_nan() || mean <= 0.0 {
            return Err(Error::NonPositiveMean { j: j + 1, mean });
        }
        z.push(mean * fj);
    }
    // the model has no sample behind it; k + 1 is the smallest consistent n
    LogSpacings::new(z, k + 1)
}

/// Draws `Z_j = (gamma + b C_j) f_j` with `f_j = -ln U_j` from a seeded stream.
pub fn sample_model_spacings(gamma: f64, b: f64, rho: f64, k: usize, seed: u64) -> Result<LogSpacings> {
    let mut rng = uniform_rng(seed);
    let noise: Vec<f64> = (0..k).map(|_| -open_uniform(&mut rng).ln()).collect();
    model_spacings_from_noise(gamma, b, rho, &noise)
}

pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationSummary> {
    config.validate()?;
    let grid = config.k_grid();
    let ests = &config.estimators;
    let need_rho = ests.iter().any(|e| e.needs_rho());
    let per_rep: Vec<(Vec<Option<f64>>, Option<f64>)> = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| {
            let seed = replication_seed(config.master_seed, r);
            let mut out = vec![None; ests.len() * grid.len()];
            let Ok(tail) = validate_and_sort(&config.spec.sample(config.n, seed)) else {
                return (out, None);
            };
            let rho = if need_rho { resolve_rho(&tail, &config.rho_method, config.k_max).ok() } else { None };
            let Ok(full) = log_spacings(&tail, config.k_max) else {
                return (out, rho);
            };
            for (ki, &k) in grid.iter().enumerate() {
                let z = full.truncated(k).expect("k within k_max");
                for (ei, res) in estimate_set(&z, rho, ests).into_iter().enumerate() {
                    out[ei * grid.len() + ki] = res.ok().filter(|g| g.is_finite());
                }
            }
            (out, rho)
        })
        .collect();
    let (values, rho_per_rep): (Vec<_>, Vec<_>) = per_rep.into_iter().unzip();
    let true_gamma = config.spec.true_gamma();
    Ok(SimulationSummary {
        source: SimulationSource::Sampling(config.clone()),
        true_gamma,
        generator: GENERATOR_ID,
        seed_mix: SEED_MIX_ID,
        cells: aggregate(&values, ests, &grid, true_gamma),
        rho_per_rep,
    })
}

pub fn run_model_simulation(config: &ModelSimulationConfig) -> Result<SimulationSummary> {
    if config.estimators.is_empty() {
        return Err(Error::EmptyEstimatorSet);
    }
    if config.reps == 0 {
        return Err(Error::TooFewReps { reps: 0, min: 1 });
    }
    if config.k < 2 {
        return Err(Error::KTooSmall { k: config.k });
    }
    // surfaces parameter errors (including non-positive means) up front
    model_spacings_from_noise(config.gamma, config.b, config.rho, &vec![1.0; config.k])?;
    let ests = &config.estimators;
    let values: Vec<Vec<Option<f64>>> = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| {
            let seed = replication_seed(config.master_seed, r);
            match sample_model_spacings(config.gamma, config.b, config.rho, config.k, seed) {
                Ok(z) => estimate_set(&z, Some(config.rho), ests)
                    .into_iter()
                    .map(|res| res.ok().filter(|g| g.is_finite()))
                    .collect(),
                Err(_) => vec![None; ests.len()],
            }
        })
        .collect();
    Ok(SimulationSummary {
        source: SimulationSource::Model(config.clone()),
        true_gamma: config.gamma,
        generator: GENERATOR_ID,
        seed_mix: SEED_MIX_ID,
        cells: aggregate(&values, ests, &[config.k], config.gamma),
        rho_per_rep: vec![Some(config.rho); config.reps],
    })
}

/// Reduces per-replication estimates (layout `estimator * grid.len() + k_index`)
/// in replication order. Divisors are the number of non-missing replications.
fn aggregate(values: &[Vec<Option<f64>>], ests: &[EstimatorId], grid: &[usize], true_gamma: f64) -> Vec<CellStats> {
    let mut cells = Vec::with_capacity(ests.len() * grid.len());
    let mut column = Vec::with_capacity(values.len());
    for (ei, &estimator) in ests.iter().enumerate() {
        for (ki, &k) in grid.iter().enumerate() {
            column.clear();
            column.extend(values.iter().filter_map(|rep| rep[ei * grid.len() + ki]));
            let missing = values.len() - column.len();
            let m = column.len() as f64;
            let mean = column.iter().sum::<f64>() / m;
            let mse = column.iter().map(|g| (g - true_gamma) * (g - true_gamma)).sum::<f64>() / m;
            let variance = column.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / m;
            cells.push(CellStats { estimator, k, mean, bias: mean - true_gamma, mse, variance, missing });
        }
    }
    cells
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Moments {
    pub mean: f64,
    /// Divisor `n`.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub(crate) fn moments(x: &[f64]) -> Moments {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    Moments { mean, variance: m2, skewness: m3 / m2.powf(1.5), excess_kurtosis: m4 / (m2 * m2) - 3.0 }
}
