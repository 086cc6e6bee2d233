//! Pareto-type test distributions: quantile functions, CDFs and seeded samplers.
//!
//! | family    | 1 - F(x)                          | gamma          | rho       |
//! |-----------|-----------------------------------|----------------|-----------|
//! | Pareto    | x^{-1/gamma}, x >= 1              | gamma          | (b = 0)   |
//! | Burr      | (1 + (x/eta)^tau)^{-lambda}       | 1/(lambda tau) | -1/lambda |
//! | Frechet   | 1 - exp(-x^{-alpha})              | 1/alpha        | -1        |
//! | Log-Gamma | log X ~ Gamma(alpha, rate lambda) | 1/lambda       | 0         |

use std::fmt;

use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::rng::{open_uniform, uniform_rng};

/// Absolute tolerance on `log x` when inverting the Log-Gamma CDF.
pub const LOG_GAMMA_QUANTILE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Pareto { gamma: f64 },
    Burr { eta: f64, tau: f64, lambda: f64 },
    Frechet { alpha: f64 },
    LogGamma { lambda: f64, alpha: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Pareto { .. } => "pareto",
            Family::Burr { .. } => "burr",
            Family::Frechet { .. } => "frechet",
            Family::LogGamma { .. } => "loggamma",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Pareto { gamma } => write!(f, "pareto(gamma={gamma})"),
            Family::Burr { eta, tau, lambda } => write!(f, "burr(eta={eta}, tau={tau}, lambda={lambda})"),
            Family::Frechet { alpha } => write!(f, "frechet(alpha={alpha})"),
            Family::LogGamma { lambda, alpha } => write!(f, "loggamma(lambda={lambda}, alpha={alpha})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSpec {
    family: Family,
    true_gamma: f64,
    true_rho: f64,
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value })
    }
}

impl DistributionSpec {
    pub fn new(family: Family) -> Result<Self> {
        let (true_gamma, true_rho) = match family {
            Family::Pareto { gamma } => {
                positive("gamma", gamma)?;
                // no second-order term; any rho < 0 describes it with b = 0
                (gamma, -1.0)
            }
            Family::Burr { eta, tau, lambda } => {
                positive("eta", eta)?;
                positive("tau", tau)?;
                positive("lambda", lambda)?;
                (1.0 / (lambda * tau), -1.0 / lambda)
            }
            Family::Frechet { alpha } => {
                positive("alpha", alpha)?;
                (1.0 / alpha, -1.0)
            }
            Family::LogGamma { lambda, alpha } => {
                positive("lambda", lambda)?;
                positive("alpha", alpha)?;
                (1.0 / lambda, 0.0)
            }
        };
        Ok(Self { family, true_gamma, true_rho })
    }

    pub fn pareto(gamma: f64) -> Result<Self> {
        Self::new(Family::Pareto { gamma })
    }

    pub fn burr(eta: f64, tau: f64, lambda: f64) -> Result<Self> {
        Self::new(Family::Burr { eta, tau, lambda })
    }

    pub fn frechet(alpha: f64) -> Result<Self> {
        Self::new(Family::Frechet { alpha })
    }

    pub fn log_gamma(lambda: f64, alpha: f64) -> Result<Self> {
        Self::new(Family::LogGamma { lambda, alpha })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn true_gamma(&self) -> f64 {
        self.true_gamma
    }

    /// Second-order parameter of the tail. Zero for Log-Gamma, whose slowly
    /// varying part decays only logarithmically.
    pub fn true_rho(&self) -> f64 {
        self.true_rho
    }

    /// Inverse CDF on `[0, 1)`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::UOutOfRange(u));
        }
        Ok(match self.family {
            Family::Pareto { gamma } => (-gamma * (-u).ln_1p()).exp(),
            Family::Burr { eta, tau, lambda } => eta * (-(-u).ln_1p() / lambda).exp_m1().powf(1.0 / tau),
            Family::Frechet { alpha } => {
                if u == 0.0 {
                    0.0
                } else {
                    (-u.ln()).powf(-1.0 / alpha)
                }
            }
            Family::LogGamma { lambda, alpha } => gamma_quantile(u, alpha, lambda).exp(),
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            Family::Pareto { gamma } => {
                if x <= 1.0 {
                    0.0
                } else {
                    -(-x.ln() / gamma).exp_m1()
                }
            }
            Family::Burr { eta, tau, lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * (x / eta).powf(tau).ln_1p()).exp_m1()
                }
            }
            Family::Frechet { alpha } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-alpha)).exp()
                }
            }
            Family::LogGamma { lambda, alpha } => {
                if x <= 1.0 {
                    0.0
                } else {
                    gamma_lr(alpha, lambda * x.ln())
                }
            }
        }
    }

    /// `n` independent draws, one uniform per draw, reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = uniform_rng(seed);
        (0..n).map(|_| self.quantile(open_uniform(&mut rng)).expect("open uniform lies in [0, 1)")).collect()
    }
}

/// Quantile of Gamma(shape, rate) by bisection on the regularised lower
/// incomplete gamma function.
fn gamma_quantile(u: f64, shape: f64, rate: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    let cdf = |y: f64| gamma_lr(shape, rate * y);
    let mut lo = 0.0;
    let mut hi = (shape / rate).max(1.0);
    while cdf(hi) < u {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > LOG_GAMMA_QUANTILE_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
