//! Integral-form Green's functions: the half-plane, the full diagonal
//! lattice in `d >= 3` dimensions, and the return-probability constants.
//!
//! The hyperbolic decay `theta` solves `cosh(theta) * prod(cos) = 1`. Where
//! the cosine product is negative the integrands use the shifted branch
//! `theta' + i*pi`, which keeps them real: `tanh` is unchanged and
//! `exp(-k*theta)` picks up `(-1)^k`. Every axis is split at `pi/2`, where
//! the product changes sign.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::dispersion::{term_strip, DispersionBranch};
use crate::error::{Error, Result};
use crate::lattice::{parity_compatible, LatticePoint};
use crate::quadrature::{
    integrate_carrying_error, integrate_with_breakpoints, QuadratureResult, QuadratureSpec,
};

/// Largest dimension accepted by [`lattice_green_nd`]. Nested quadrature cost
/// grows geometrically with the dimension.
pub const MAX_LATTICE_DIM: usize = 8;

const AXIS_SPLIT: [f64; 3] = [0.0, FRAC_PI_2, PI];

/// Extra breakpoints on the outermost axis, close to the singular corners.
const OUTER_SPLIT: [f64; 7] = [
    0.0,
    PI / 64.0,
    PI / 8.0,
    FRAC_PI_2,
    PI - PI / 8.0,
    PI - PI / 64.0,
    PI,
];

/// `(ln|cos x|, cos x < 0)` for `x` in `[0, pi]`, accurate near `0` and `pi`
/// where `|cos x| -> 1`.
#[inline]
fn ln_abs_cos(x: f64) -> (f64, bool) {
    if x < 0.25 * PI {
        let s = (0.5 * x).sin();
        ((-2.0 * s * s).ln_1p(), false)
    } else if x > 0.75 * PI {
        let s = (0.5 * (PI - x)).sin();
        ((-2.0 * s * s).ln_1p(), true)
    } else {
        let c = x.cos();
        (c.abs().ln(), c < 0.0)
    }
}

/// Branch of `cosh(theta) * prod(cos x_k) = 1`.
#[inline]
fn product_branch(angles: &[f64]) -> DispersionBranch {
    let mut log_abs = 0.0;
    let mut negative = false;
    for &x in angles {
        let (l, neg) = ln_abs_cos(x);
        log_abs += l;
        negative ^= neg;
    }
    DispersionBranch::from_log_abs(negative, log_abs)
}

/// Half-plane Green's function from `(a, 0)` to `(p, s)`:
/// `(2/pi) * integral over [0, pi] of sin(a x) sin(p x) exp(-|s| mu) / tanh(mu)`
/// with `cos(x) cosh(mu) = 1`. Targets on the wall `p = 0` give 0.
pub fn halfplane_green(a: i64, p: i64, s: i64, spec: &QuadratureSpec) -> Result<QuadratureResult> {
    spec.validate()?;
    if a < 1 {
        return Err(Error::NotInterior(LatticePoint::from([a, 0])));
    }
    // the wall p = 0 is the boundary, where F vanishes
    if p < 0 {
        return Err(Error::NotInterior(LatticePoint::from([p, s])));
    }
    if p == 0 || (a - p + s).rem_euclid(2) != 0 {
        return Ok(QuadratureResult::exact(0.0));
    }
    let k = s.unsigned_abs();
    let (af, pf) = (a as f64, p as f64);
    let integrand = |x: f64| (af * x).sin() * (pf * x).sin() * term_strip(product_branch(&[x]), k);
    let scaled = QuadratureSpec {
        abs_tol: spec.abs_tol * PI / 2.0,
        ..*spec
    };
    let r = integrate_with_breakpoints(&integrand, &AXIS_SPLIT, &scaled);
    Ok(QuadratureResult {
        value: 2.0 / PI * r.value,
        error_estimate: 2.0 / PI * r.error_estimate,
        ..r
    })
}

/// Nested average `(1/pi)^levels * integral over [0, pi]^levels of g`.
/// Each level gets an even share of the tolerance; averages keep every level
/// on the same scale so the shares add up. The reported error is the outer
/// estimate plus the average of the inner estimates, integrated alongside
/// the values.
struct NestedAverage<'g, G> {
    integrand: &'g G,
    levels: usize,
    spec: QuadratureSpec,
    level_spec: QuadratureSpec,
    evaluations: AtomicU64,
    all_converged: AtomicBool,
}

impl<'g, G> NestedAverage<'g, G>
where
    G: Fn(&[f64]) -> f64 + Sync,
{
    fn new(integrand: &'g G, levels: usize, spec: &QuadratureSpec) -> Self {
        let share = levels as f64;
        NestedAverage {
            integrand,
            levels,
            spec: *spec,
            level_spec: QuadratureSpec {
                abs_tol: spec.abs_tol / share,
                rel_tol: spec.rel_tol / share,
                max_subdivisions: spec.max_subdivisions,
            },
            evaluations: AtomicU64::new(0),
            all_converged: AtomicBool::new(true),
        }
    }

    /// Average over axes `depth..levels` with the leading coordinates fixed.
    fn level(&self, prefix: [f64; MAX_LATTICE_DIM], depth: usize) -> QuadratureResult {
        let spec = QuadratureSpec {
            abs_tol: self.level_spec.abs_tol * PI,
            ..self.level_spec
        };
        let (raw, carried) = if depth + 1 == self.levels {
            let f = |x: f64| {
                let mut pt = prefix;
                pt[depth] = x;
                (self.integrand)(&pt[..self.levels])
            };
            let r = integrate_with_breakpoints(&f, &AXIS_SPLIT, &spec);
            self.evaluations.fetch_add(r.evaluations, Ordering::Relaxed);
            (r, 0.0)
        } else {
            let f = |x: f64| {
                let mut pt = prefix;
                pt[depth] = x;
                let inner = self.level(pt, depth + 1);
                (inner.value, inner.error_estimate)
            };
            let points: &[f64] = if depth == 0 { &OUTER_SPLIT } else { &AXIS_SPLIT };
            integrate_carrying_error(&f, points, &spec, depth == 0)
        };
        if !raw.converged {
            self.all_converged.store(false, Ordering::Relaxed);
        }
        QuadratureResult {
            value: raw.value / PI,
            error_estimate: (raw.error_estimate + carried) / PI,
            ..raw
        }
    }

    fn run(&self) -> QuadratureResult {
        let outer = self.level([0.0; MAX_LATTICE_DIM], 0);
        let outer_evals = if self.levels == 1 { 0 } else { outer.evaluations };
        QuadratureResult {
            value: outer.value,
            error_estimate: outer.error_estimate,
            evaluations: self.evaluations.load(Ordering::Relaxed) + outer_evals,
            converged: self.all_converged.load(Ordering::Relaxed)
                && outer.error_estimate <= self.spec.target(outer.value),
        }
    }
}

/// Green's function of the full `d`-dimensional diagonal lattice at
/// displacement `u` from the source, `d >= 3`:
/// `(1/pi)^(d-1) * integral of prod_k cos(u_k x_k) * exp(-|u_d| theta) / tanh(theta)`
/// with `cosh(theta) * prod_k cos(x_k) = 1`.
pub fn lattice_green_nd(u: &LatticePoint, spec: &QuadratureSpec) -> Result<QuadratureResult> {
    spec.validate()?;
    let d = u.dim();
    if d <= 2 {
        return Err(Error::RecurrentLattice(d));
    }
    if d > MAX_LATTICE_DIM {
        return Err(Error::InvalidConfig(format!(
            "lattice dimension {d} exceeds the supported maximum {MAX_LATTICE_DIM}"
        )));
    }
    if !parity_compatible(u, &LatticePoint::origin(d)) {
        return Ok(QuadratureResult::exact(0.0));
    }
    let (transverse, last) = u.coords().split_at(d - 1);
    let freqs: Vec<f64> = transverse.iter().map(|&k| k as f64).collect();
    let k = last[0].unsigned_abs();
    let integrand = |x: &[f64]| {
        let modes: f64 = freqs
            .iter()
            .zip(x)
            .map(|(&w, &xi)| if w == 0.0 { 1.0 } else { (w * xi).cos() })
            .product();
        modes * term_strip(product_branch(x), k)
    };
    Ok(NestedAverage::new(&integrand, d - 1, spec).run())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReturnStyle {
    /// Diagonal walk on the full `d`-dimensional lattice.
    Diagonal(usize),
    /// Axis-parallel walk on the simple cubic lattice.
    Regular3D,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnConstant {
    /// Expected visits to the start, counting the initial one.
    pub constant: QuadratureResult,
    /// `1 - 1/constant`.
    pub p_return: f64,
    /// Error estimate propagated to `p_return`.
    pub p_error_estimate: f64,
}

/// Expected number of visits to the origin and the return probability.
pub fn return_constant(style: ReturnStyle, spec: &QuadratureSpec) -> Result<ReturnConstant> {
    spec.validate()?;
    let constant = match style {
        ReturnStyle::Diagonal(d) => lattice_green_nd(&LatticePoint::origin(d), spec)?,
        ReturnStyle::Regular3D => regular_cubic_constant(spec),
    };
    let g = constant.value;
    Ok(ReturnConstant {
        constant,
        p_return: 1.0 - 1.0 / g,
        p_error_estimate: constant.error_estimate / (g * g),
    })
}

/// `(3/pi^2) * integral over [0, pi]^2 of 1/sinh(theta)` with
/// `cosh(theta) = 3 - cos(x) - cos(y)`.
fn regular_cubic_constant(spec: &QuadratureSpec) -> QuadratureResult {
    // cosh(theta) - 1 = 2 sin^2(x/2) + 2 sin^2(y/2), no cancellation
    let integrand = |x: &[f64]| {
        let t: f64 = x.iter().map(|&xi| 2.0 * (0.5 * xi).sin().powi(2)).sum();
        3.0 / (t * (t + 2.0)).sqrt()
    };
    let scaled = QuadratureSpec {
        abs_tol: spec.abs_tol / 3.0,
        rel_tol: spec.rel_tol,
        ..*spec
    };
    NestedAverage::new(&integrand, 2, &scaled).run()
}
