//! Globally adaptive 21-point Gauss-Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |value|)` or the subdivision budget
//! runs out. The subdivision order depends only on the integrand values, so
//! results are bitwise reproducible; node evaluations may run on the rayon
//! pool without changing that.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_subdivisions: 100_000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same absolute and relative tolerance.
    pub fn with_tol(tol: f64) -> Result<Self> {
        Self::new(tol, tol, QuadratureSpec::default().max_subdivisions)
    }

    /// Default tolerance for a `d`-dimensional lattice integral. Nesting cost
    /// grows geometrically with `d`, so `d >= 5` defaults to `1e-5`.
    pub fn default_for_dim(d: usize) -> Self {
        if d >= 5 {
            QuadratureSpec {
                abs_tol: 1e-5,
                rel_tol: 1e-5,
                ..Default::default()
            }
        } else {
            Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |t: f64| t.is_finite() && t > 0.0;
        if !ok(self.abs_tol) || !ok(self.rel_tol) {
            return Err(Error::InvalidConfig(format!(
                "tolerances must be positive and finite, got abs={} rel={}",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig("max_subdivisions must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
}

impl QuadratureResult {
    pub(crate) fn exact(value: f64) -> Self {
        QuadratureResult {
            value,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208323396544,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Kronrod estimate of the integral of the integrand's own error bound.
    carried: f64,
}

/// Heap key: largest error first, earliest segment index on ties.
#[derive(Debug, PartialEq)]
struct ByError(f64, usize);

impl Eq for ByError {}

impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Abscissae of the 21-point rule on `[a, b]`: centre first, then the
/// `(center - h*x, center + h*x)` pairs in `XGK` order.
fn nodes(a: f64, b: f64) -> [f64; 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [c; 21];
    for j in 0..10 {
        x[1 + 2 * j] = c - h * XGK[j];
        x[2 + 2 * j] = c + h * XGK[j];
    }
    x
}

fn gk21<F>(f: &F, a: f64, b: f64, parallel: bool) -> Segment
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    let x = nodes(a, b);
    let mut pairs = [(0.0, 0.0); 21];
    if parallel {
        pairs.par_iter_mut().zip(x.par_iter()).for_each(|(y, &xi)| *y = f(xi));
    } else {
        for (y, &xi) in pairs.iter_mut().zip(&x) {
            *y = f(xi);
        }
    }
    let fv = pairs.map(|p| p.0);
    let mut carried = WGK[10] * pairs[0].1.abs();
    for j in 0..10 {
        carried += WGK[j] * (pairs[1 + 2 * j].1.abs() + pairs[2 + 2 * j].1.abs());
    }

    let h = 0.5 * (b - a);
    let fc = fv[0];
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    for j in 0..10 {
        let (f1, f2) = (fv[1 + 2 * j], fv[2 + 2 * j]);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        // Gauss nodes sit at the odd positions of XGK.
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv[1 + 2 * j] - mean).abs() + (fv[2 + 2 * j] - mean).abs());
    }

    let value = res_k * h;
    let res_abs = res_abs * h.abs();
    let res_asc = res_asc * h.abs();
    let mut err = ((res_k - res_g) * h).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (1.0f64).min((200.0 * err / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value,
        error: err,
        carried: carried * h.abs(),
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> QuadratureResult
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_with_breakpoints(&f, &[a, b], spec)
}

/// Integrates `f` over `[points[0], points[last]]`, with the initial
/// partition given by `points` (strictly increasing, at least two entries).
pub fn integrate_with_breakpoints<F>(f: &F, points: &[f64], spec: &QuadratureSpec) -> QuadratureResult
where
    F: Fn(f64) -> f64 + Sync,
{
    run(&|x| (f(x), 0.0), points, spec, false).0
}

/// As [`integrate_with_breakpoints`], evaluating the 21 nodes of each rule on
/// the rayon pool. Meant for expensive integrands such as inner integrals.
pub fn integrate_with_breakpoints_par<F>(
    f: &F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> QuadratureResult
where
    F: Fn(f64) -> f64 + Sync,
{
    run(&|x| (f(x), 0.0), points, spec, rayon::current_num_threads() > 1).0
}

/// Integrates an integrand that returns `(value, error bound)` at each node,
/// such as an inner integral. Subdivision follows the values only. Returns
/// the result for the values and the integral of the carried error bounds.
pub(crate) fn integrate_carrying_error<F>(
    f: &F,
    points: &[f64],
    spec: &QuadratureSpec,
    parallel: bool,
) -> (QuadratureResult, f64)
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    run(f, points, spec, parallel && rayon::current_num_threads() > 1)
}

fn run<F>(f: &F, points: &[f64], spec: &QuadratureSpec, parallel: bool) -> (QuadratureResult, f64)
where
    F: Fn(f64) -> (f64, f64) + Sync,
{
    assert!(points.len() >= 2, "need at least one interval");
    debug_assert!(points.windows(2).all(|w| w[0] < w[1]));

    let mut segments: Vec<Segment> = points
        .windows(2)
        .map(|w| gk21(f, w[0], w[1], parallel))
        .collect();
    let mut evaluations = 21 * segments.len() as u64;
    let mut heap: BinaryHeap<ByError> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| ByError(s.error, i))
        .collect();

    let totals = |segs: &[Segment]| {
        let v: CompensatedSum = segs.iter().map(|s| s.value).collect();
        let e: CompensatedSum = segs.iter().map(|s| s.error).collect();
        (v.value(), e.value())
    };
    let (mut value, mut error) = totals(&segments);
    let mut subdivisions = 0usize;
    let mut frozen_error = 0.0;

    let converged = loop {
        if error <= spec.target(value) {
            break true;
        }
        if subdivisions >= spec.max_subdivisions {
            break false;
        }
        let Some(ByError(_, idx)) = heap.pop() else {
            break false;
        };
        let seg = segments[idx];
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // too narrow to split; its error is final
            frozen_error += seg.error;
            if frozen_error > spec.target(value) {
                break false;
            }
            continue;
        }
        let left = gk21(f, seg.a, mid, parallel);
        let right = gk21(f, mid, seg.b, parallel);
        evaluations += 42;
        subdivisions += 1;

        value += left.value + right.value - seg.value;
        error += left.error + right.error - seg.error;
        segments[idx] = left;
        heap.push(ByError(left.error, idx));
        segments.push(right);
        heap.push(ByError(right.error, segments.len() - 1));

        if subdivisions % 64 == 0 {
            (value, error) = totals(&segments);
        }
    };

    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let (value, error) = totals(&segments);
    let carried: CompensatedSum = segments.iter().map(|s| s.carried).collect();
    let result = QuadratureResult {
        value,
        error_estimate: error,
        evaluations,
        converged: converged || error <= spec.target(value),
    };
    (result, carried.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sin_squared() {
        let r = integrate_adaptive(|x: f64| x.sin().powi(2), 0.0, PI, &QuadratureSpec::default());
        assert!(r.converged);
        assert!((r.value - PI / 2.0).abs() < 1e-10);
        assert!(r.error_estimate <= 1e-8);
    }

    #[test]
    fn inverse_sqrt_endpoint_singularity() {
        let spec = QuadratureSpec::with_tol(1e-9).unwrap();
        let r = integrate_adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &spec);
        assert!(r.converged, "{r:?}");
        assert!((r.value - 2.0).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn log_endpoint_singularity() {
        let r = integrate_adaptive(|x: f64| x.ln(), 0.0, 1.0, &QuadratureSpec::default());
        assert!(r.converged);
        assert!((r.value + 1.0).abs() < 1e-8);
    }

    #[test]
    fn polynomial_exact_in_one_rule() {
        let r = integrate_adaptive(|x: f64| 3.0 * x * x - x, -1.0, 2.0, &QuadratureSpec::default());
        assert_eq!(r.evaluations, 21);
        assert!((r.value - 7.5).abs() < 1e-13);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let spec = QuadratureSpec::new(1e-14, 1e-14, 3).unwrap();
        let r = integrate_adaptive(|x: f64| (50.0 * x).sin().abs(), 0.0, 10.0, &spec);
        assert!(!r.converged);
        assert!(r.value.is_finite());
    }

    #[test]
    fn breakpoints_and_parallel_agree_bitwise() {
        let f = |x: f64| (x * 3.0).cos().abs() + x.sqrt();
        let pts = [0.0, PI / 6.0, PI / 2.0, PI];
        let spec = QuadratureSpec::default();
        let a = integrate_with_breakpoints(&f, &pts, &spec);
        let b = integrate_with_breakpoints_par(&f, &pts, &spec);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(QuadratureSpec::new(0.0, 1e-8, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, f64::NAN, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 1e-8, 0).is_err());
        assert_eq!(QuadratureSpec::default_for_dim(5).abs_tol, 1e-5);
        assert_eq!(QuadratureSpec::default_for_dim(3).abs_tol, 1e-8);
    }
}
