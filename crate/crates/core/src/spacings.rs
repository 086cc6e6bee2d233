//! Order statistics, weighted log-spacings, regression weights and covariates.
//!
//! Samples are stored in descending order, so `values()[0]` is the sample
//! maximum `X_{n,n}` and `Z_j` pairs `values()[j-1]` with `values()[j]`.

use crate::error::{Error, Result};

/// A validated sample of strictly positive values sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedTail {
    values: Vec<f64>,
}

impl OrderedTail {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Largest admissible tail fraction, `n - 1`.
    pub fn max_k(&self) -> usize {
        self.values.len() - 1
    }

    /// Multiplies every value by `factor > 0`; ordering is preserved.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidParameter { name: "factor", value: factor });
        }
        Ok(Self { values: self.values.iter().map(|v| v * factor).collect() })
    }
}

/// Weighted log-spacings `Z_1..Z_k` taken from a sample of size `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSpacings {
    z: Vec<f64>,
    n: usize,
}

impl LogSpacings {
    /// Builds spacings directly, e.g. from a model generator.
    pub fn new(z: Vec<f64>, n: usize) -> Result<Self> {
        let k = z.len();
        if k == 0 || k + 1 > n {
            return Err(Error::KOutOfRange { k, min: 1, max: n.saturating_sub(1) });
        }
        if let Some((index, &value)) = z.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidSpacing { index, value });
        }
        Ok(Self { z, n })
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn k(&self) -> usize {
        self.z.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Spacings for a smaller tail fraction. `Z_j` does not depend on `k`,
    /// so this is a prefix.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::KOutOfRange { k, min: 1, max: self.k() });
        }
        Ok(Self { z: self.z[..k].to_vec(), n: self.n })
    }
}

/// Raw weights `W_j = 1 - j/(k+1)` and their normalisation to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
}

/// Covariates `C_j = (j/(k+1))^{-rho}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariates {
    pub c: Vec<f64>,
    pub rho: f64,
}

pub fn validate_and_sort(raw: &[f64]) -> Result<OrderedTail> {
    if raw.len() < 2 {
        return Err(Error::EmptyOrTiny { n: raw.len() });
    }
    for (index, &value) in raw.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index });
        }
        if value <= 0.0 {
            return Err(Error::NonPositive { index, value });
        }
    }
    let mut values = raw.to_vec();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(OrderedTail { values })
}

pub fn log_spacings(tail: &OrderedTail, k: usize) -> Result<LogSpacings> {
    if k == 0 || k > tail.max_k() {
        return Err(Error::KOutOfRange { k, min: 1, max: tail.max_k() });
    }
    let v = tail.values();
    let z = (1..=k).map(|j| j as f64 * (v[j - 1] / v[j]).ln()).collect();
    Ok(LogSpacings { z, n: tail.n() })
}

pub fn weights(k: usize) -> Result<WeightScheme> {
    if k == 0 {
        return Err(Error::KOutOfRange { k, min: 1, max: usize::MAX });
    }
    let denom = (k + 1) as f64;
    let raw: Vec<f64> = (1..=k).map(|j| 1.0 - j as f64 / denom).collect();
    // sum_j (1 - j/(k+1)) = k - k/2 = k/2
    let total = k as f64 / 2.0;
    let normalized = raw.iter().map(|w| w / total).collect();
    Ok(WeightScheme { raw, normalized })
}

pub fn covariates(k: usize, rho: f64) -> Result<Covariates> {
    check_rho(rho)?;
    if k == 0 {
        return Err(Error::KOutOfRange { k, min: 1, max: usize::MAX });
    }
    let denom = (k + 1) as f64;
    let c = (1..=k).map(|j| (j as f64 / denom).powf(-rho)).collect();
    Ok(Covariates { c, rho })
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho < 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidRho(rho))
    }
}
