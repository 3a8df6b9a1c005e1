//! Confidence intervals for Monte Carlo frequencies.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A point estimate with a 95% confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub half_width: f64,
}

impl Estimate {
    pub fn lo(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.value + self.half_width
    }

    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.lo() <= other.hi() && other.lo() <= self.hi()
    }
}

/// Wilson score interval for `p_hat` observed over `n` Bernoulli trials.
pub fn wilson_interval(p_hat: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p_hat + z2 / (2.0 * n)) / denom;
    let spread = Z95
        * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n))
            .max(0.0)
            .sqrt()
        / denom;
    ((centre - spread).max(0.0), (centre + spread).min(1.0))
}

fn near_boundary(value: f64, n: usize) -> bool {
    let slack = 2.0 / n as f64;
    value <= slack || value >= 1.0 - slack
}

fn wilson_half_width(value: f64, n: usize) -> f64 {
    let (lo, hi) = wilson_interval(value, n);
    (value - lo).max(hi - value)
}

/// Mean of per-trial values with a Student-t interval across trials.
///
/// Meant for values that are themselves averages over many voters, so the
/// between-trial spread is the relevant error. Identical samples give a zero
/// half-width; a single sample gives an infinite one.
pub fn mean_estimate(samples: &[f64]) -> Estimate {
    let n = samples.len();
    if n == 0 {
        return Estimate {
            value: f64::NAN,
            half_width: f64::NAN,
        };
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return Estimate {
            value: mean,
            half_width: f64::INFINITY,
        };
    }
    let df = (n - 1) as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / df;
    let t = StudentsT::new(0.0, 1.0, df)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    Estimate {
        value: mean,
        half_width: t * (var / n as f64).sqrt(),
    }
}

/// Running sums for a ratio estimator `Σx / Σy` over independent trials.
///
/// Each trial contributes a numerator `x` (weighted event count) and a
/// denominator `y` (weighted population). The interval uses the delta method
/// on the per-trial residuals `x − R·y`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioSums {
    pub trials: usize,
    pub x: f64,
    pub y: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl RatioSums {
    pub fn push(&mut self, x: f64, y: f64) {
        self.trials += 1;
        self.x += x;
        self.y += y;
        self.xx += x * x;
        self.xy += x * y;
        self.yy += y * y;
    }

    /// Adds another numerator whose trials are disjoint from this one's
    /// non-zero trials; the denominator sums are left untouched.
    pub fn add_disjoint_numerator(&mut self, other: &RatioSums) {
        self.x += other.x;
        self.xx += other.xx;
        self.xy += other.xy;
    }

    pub fn estimate(&self) -> Option<Estimate> {
        if self.trials == 0 || self.y <= 0.0 {
            return None;
        }
        let t = self.trials as f64;
        let ratio = self.x / self.y;
        if self.trials < 2 || near_boundary(ratio, self.trials) {
            return Some(Estimate {
                value: ratio,
                half_width: wilson_half_width(ratio.clamp(0.0, 1.0), self.trials),
            });
        }
        let resid = (self.xx - 2.0 * ratio * self.xy + ratio * ratio * self.yy).max(0.0);
        let y_bar = self.y / t;
        let var = resid / (t * (t - 1.0) * y_bar * y_bar);
        Some(Estimate {
            value: ratio,
            half_width: Z95 * var.sqrt(),
        })
    }
}
