//! Solutions of the dispersion relation `c * cosh(beta) = 1` and the
//! hyperbolic term ratios built on them.
//!
//! `c` is a cosine or a product of cosines in `[-1, 1]`. For `c > 0` the
//! decay rate `beta` is real. For `c < 0` it is `beta' + i*pi`, and every
//! ratio the series need stays real: `sinh(k*beta) = (-1)^k sinh(k*beta')`
//! while `tanh(beta) = tanh(beta')`. At `c = 0` the rate is infinite and the
//! ratios are replaced by their limits.
//!
//! Each ratio is split into a decaying exponential `exp(-k * beta')`, factors
//! `1 - exp(-2j * beta')` in `(0, 1]` and `coth(beta')`, with the sign tracked
//! separately. Exponents such as `(n + 1) * beta` are never formed as growing
//! exponentials, so nothing overflows.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BranchKind {
    /// `c > 0`, real `beta`.
    Real,
    /// `c < 0`, `beta = beta' + i*pi`.
    Shifted,
    /// `c = 0`, `beta` infinite.
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionBranch {
    kind: BranchKind,
    beta_prime: f64,
}

impl DispersionBranch {
    /// A finite branch with the given real part. `beta_prime` must be finite
    /// and nonnegative.
    pub fn new(kind: BranchKind, beta_prime: f64) -> Result<Self> {
        if kind == BranchKind::Infinite {
            return Ok(Self::INFINITE);
        }
        if !(beta_prime.is_finite() && beta_prime >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "beta' must be finite and nonnegative, got {beta_prime}"
            )));
        }
        Ok(DispersionBranch { kind, beta_prime })
    }

    pub const INFINITE: DispersionBranch = DispersionBranch {
        kind: BranchKind::Infinite,
        beta_prime: 0.0,
    };

    pub fn kind(&self) -> BranchKind {
        self.kind
    }

    /// Real part of `beta`; `None` on the infinite branch.
    pub fn beta_prime(&self) -> Option<f64> {
        match self.kind {
            BranchKind::Infinite => None,
            _ => Some(self.beta_prime),
        }
    }

    /// Branch for a cosine product given as `negative` sign flag and
    /// `ln|c| <= 0`. Working from the log-magnitude keeps `beta'` accurate
    /// both when `|c|` is within rounding of 1 and when it underflows.
    pub fn from_log_abs(negative: bool, log_abs: f64) -> Self {
        if log_abs == f64::NEG_INFINITY {
            return Self::INFINITE;
        }
        let log_abs = log_abs.min(0.0);
        // cosh(beta') = 1/|c| = 1 + t
        let t = (-log_abs).exp_m1();
        let beta_prime = if t > 1e15 {
            LN_2 - log_abs
        } else {
            arccosh_1p(t)
        };
        DispersionBranch {
            kind: if negative { BranchKind::Shifted } else { BranchKind::Real },
            beta_prime,
        }
    }

    /// Sign applied to a term whose hyperbolic exponents add up to an odd or
    /// even multiple of `beta`.
    #[inline]
    fn sign(&self, odd: bool) -> f64 {
        if self.kind == BranchKind::Shifted && odd {
            -1.0
        } else {
            1.0
        }
    }
}

/// `arccosh(1 + t)` for `t >= 0`, accurate to full relative precision as
/// `t -> 0`.
pub fn arccosh_1p(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t > 1e150 {
        return LN_2 + t.ln();
    }
    (t + (t * (t + 2.0)).sqrt()).ln_1p()
}

/// Solves `c * cosh(beta) = 1` for `c` in `[-1, 1]`.
pub fn solve_branch(c: f64) -> Result<DispersionBranch> {
    if !c.is_finite() || c.abs() > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(c));
    }
    if c == 0.0 {
        return Ok(DispersionBranch::INFINITE);
    }
    let a = c.abs().min(1.0);
    // 1 - a is exact for a in [0.5, 1], which is where it matters.
    let t = (1.0 - a) / a;
    Ok(DispersionBranch {
        kind: if c > 0.0 { BranchKind::Real } else { BranchKind::Shifted },
        beta_prime: arccosh_1p(t),
    })
}

/// `1 - exp(-k * beta)`, accurate for small arguments.
#[inline]
fn neg_expm1(k: i64, beta: f64) -> f64 {
    -(-(k as f64) * beta).exp_m1()
}

/// `exp(-k * beta)`.
#[inline]
fn decay(k: i64, beta: f64) -> f64 {
    (-(k as f64) * beta).exp()
}

/// `1 / tanh(beta)` for `beta > 0`.
#[inline]
fn coth(beta: f64) -> f64 {
    let e = (-2.0 * beta).exp();
    (1.0 + e) / -(-2.0 * beta).exp_m1()
}

/// Rectangle term `sinh(lo*beta) sinh((n+1-hi)*beta) / (tanh(beta) sinh((n+1)*beta))`
/// with `lo = min(q, b)` and `hi = max(q, b)`. This is the `F1` factor for
/// `q <= b` and the `F2` factor for `q >= b`, so the result is symmetric in
/// `q` and `b`. Positions outside `1..=n` give 0.
pub fn term_rect(br: DispersionBranch, q: i64, b: i64, n: i64) -> f64 {
    let (lo, hi) = (q.min(b), q.max(b));
    if lo < 1 || hi > n {
        return 0.0;
    }
    match br.kind {
        BranchKind::Infinite => {
            if q == b {
                0.5
            } else {
                0.0
            }
        }
        _ if br.beta_prime == 0.0 => (lo * (n + 1 - hi)) as f64 / (n + 1) as f64,
        _ => {
            // e^{-(hi-lo) beta} / 2 carries the magnitude; the rest is in (0, 1]
            // apart from the bounded coth factor, so nothing overflows
            let beta = br.beta_prime;
            let shape = neg_expm1(2 * lo, beta) * neg_expm1(2 * (n + 1 - hi), beta)
                / neg_expm1(2 * (n + 1), beta);
            br.sign((hi - lo) % 2 != 0) * 0.5 * decay(hi - lo, beta) * shape * coth(beta)
        }
    }
}

/// Semi-strip term `sinh(lo*beta) exp(-hi*beta) / tanh(beta)`, the
/// `n -> infinity` limit of [`term_rect`].
pub fn term_semistrip(br: DispersionBranch, q: i64, b: i64) -> f64 {
    let (lo, hi) = (q.min(b), q.max(b));
    if lo < 1 {
        return 0.0;
    }
    match br.kind {
        BranchKind::Infinite => {
            if q == b {
                0.5
            } else {
                0.0
            }
        }
        _ if br.beta_prime == 0.0 => lo as f64,
        _ => {
            let beta = br.beta_prime;
            let shape = neg_expm1(2 * lo, beta);
            br.sign((hi - lo) % 2 != 0) * 0.5 * decay(hi - lo, beta) * shape * coth(beta)
        }
    }
}

/// Strip term `exp(-k*beta) / tanh(beta)` for `k >= 0`.
pub fn term_strip(br: DispersionBranch, k: u64) -> f64 {
    match br.kind {
        BranchKind::Infinite => {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        }
        _ if br.beta_prime == 0.0 => f64::INFINITY,
        _ => {
            let beta = br.beta_prime;
            br.sign(k % 2 == 1) * (-(k as f64) * beta).exp() * coth(beta)
        }
    }
}
