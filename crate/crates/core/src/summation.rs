//! Deterministic reductions over grid samples.
//!
//! Every integral and norm in the crate goes through [`Summation::sum`], so
//! the summation order is fixed for a given grid and reports are
//! reproducible bit for bit on a given platform.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Summation {
    /// Recursive halving; error grows like log N.
    #[default]
    Pairwise,
    /// Kahan–Neumaier compensated running sum.
    Compensated,
    /// Plain left-to-right accumulation.
    Naive,
}

const PAIRWISE_BLOCK: usize = 16;

impl Summation {
    pub fn sum(self, values: &[Complex64]) -> Complex64 {
        match self {
            Summation::Pairwise => pairwise(values),
            Summation::Compensated => Complex64::new(
                neumaier(values.iter().map(|z| z.re)),
                neumaier(values.iter().map(|z| z.im)),
            ),
            Summation::Naive => values.iter().sum(),
        }
    }

    pub fn sum_real(self, values: &[f64]) -> f64 {
        match self {
            Summation::Pairwise => pairwise_real(values),
            Summation::Compensated => neumaier(values.iter().copied()),
            Summation::Naive => values.iter().sum(),
        }
    }
}

fn pairwise(values: &[Complex64]) -> Complex64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise(&values[..mid]) + pairwise(&values[mid..])
}

fn pairwise_real(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_real(&values[..mid]) + pairwise_real(&values[mid..])
}

fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
