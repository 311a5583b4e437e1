//! Log-domain arithmetic helpers and geometric sampling grids.
//!
//! Every asymptotic quantity in this crate is computed in the coordinates
//! `x = log t`, `y = log value`, so arguments such as `t = exp(10^4)` never
//! have to be materialized as floats.

use serde::{Deserialize, Serialize};

/// `log(exp(a) + exp(b))` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(sum exp(v_i))` over a slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !hi.is_finite() {
        return hi;
    }
    let s: f64 = values.iter().map(|v| (v - hi).exp()).sum();
    hi + s.ln()
}

/// Neumaier compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Default sampling density, points per decade of `t`.
pub const DEFAULT_DENSITY: f64 = 64.0;

/// Uniform grid in `x = log t`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LogGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Self {
        Self {
            x_min,
            x_max,
            points: points.max(2),
        }
    }

    /// Grid with `density` points per decade of `t` (at least two points).
    pub fn with_density(x_min: f64, x_max: f64, density: f64) -> Self {
        let decades = (x_max - x_min) / std::f64::consts::LN_10;
        let points = (decades * density).ceil() as usize + 1;
        Self::new(x_min, x_max, points)
    }

    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.x_max
                } else {
                    self.x_min + h * i as f64
                }
            })
            .collect()
    }
}
