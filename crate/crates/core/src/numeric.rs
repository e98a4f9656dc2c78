//! Small numerical helpers shared by the series and quadrature code.

use std::f64::consts::PI;

/// `sin(pi * k / n)` with exact argument reduction on the integer numerator.
/// Returns exactly `0.0` when `n` divides `k`.
pub fn sin_pi_frac(k: i64, n: i64) -> f64 {
    debug_assert!(n > 0);
    let period = 2 * n;
    let mut k = k.rem_euclid(period);
    let mut sign = 1.0;
    if k >= n {
        k -= n;
        sign = -1.0;
    }
    // sin(pi - x) = sin(x)
    if 2 * k > n {
        k = n - k;
    }
    if k == 0 {
        return 0.0;
    }
    sign * (PI * k as f64 / n as f64).sin()
}

/// `cos(pi * k / n)`, exactly `0.0` when `2k/n` is an odd integer.
pub fn cos_pi_frac(k: i64, n: i64) -> f64 {
    sin_pi_frac(n - 2 * k, 2 * n)
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
