//! Invariant suite: difference-equation residuals, reciprocity, parity
//! zeros, the sine orthogonality identity, absorption totals and agreement
//! with the linear-solve oracle.
//!
//! The series checks use the raw mode sums, without the parity shortcut
//! that the public functions take, so that the zeros and residuals are
//! properties of the formulas themselves.

use std::fmt;

use crate::error::{Error, Result};
use crate::integral::{halfplane_green, lattice_green_nd};
use crate::lattice::{diagonal_neighbors, parity_compatible, DomainSpec, LatticePoint};
use crate::numeric::{sin_pi_frac, CompensatedSum};
use crate::oracles::{fundamental_matrix_green, mc_expected_departures, McConfig};
use crate::quadrature::QuadratureSpec;
use crate::series::{absorption_probs, block_sum, rect_sum, semistrip_sum, strip_sum};

pub const RESIDUAL_TOL: f64 = 1e-9;
pub const RECIPROCITY_TOL: f64 = 1e-10;
pub const PARITY_TOL: f64 = 1e-12;
pub const ORTHOGONALITY_TOL: f64 = 1e-12;
pub const ABSORPTION_TOL: f64 = 1e-10;
pub const ORACLE_TOL: f64 = 1e-10;
/// Residual tolerance for the quadrature-based domains.
pub const INTEGRAL_RESIDUAL_TOL: f64 = 1e-5;

/// Largest width for the orthogonality identity.
pub const ORTHOGONALITY_MAX_M: usize = 50;

const ORACLE_MAX_STATES: usize = 500;
/// Half-height of the target window on strip-like domains.
const WINDOW: i64 = 6;
const PARITY_MC: McConfig = McConfig {
    trials: 2000,
    seed: 0,
    max_steps: 10_000,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// Largest deviation from the expected value over all cases.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub cases: usize,
}

impl CheckOutcome {
    fn new(name: &str, tolerance: f64, deviations: impl IntoIterator<Item = f64>) -> Self {
        let mut max_deviation: f64 = 0.0;
        let mut cases = 0;
        let mut finite = true;
        for d in deviations {
            finite &= d.is_finite();
            max_deviation = max_deviation.max(d.abs());
            cases += 1;
        }
        CheckOutcome {
            name: name.to_string(),
            passed: finite && max_deviation <= tolerance,
            max_deviation: if finite { max_deviation } else { f64::NAN },
            tolerance,
            cases,
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} (max deviation {:.3e}, tolerance {:.0e}, {} cases)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_deviation,
            self.tolerance,
            self.cases
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    /// Domain label, or `"general"` for domain-free checks.
    pub subject: String,
    pub checks: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Domains used by [`run_builtin`].
pub fn builtin_sample() -> Vec<DomainSpec> {
    vec![
        DomainSpec::Rectangle2D { m: 1, n: 1 },
        DomainSpec::Rectangle2D { m: 1, n: 5 },
        DomainSpec::Rectangle2D { m: 2, n: 2 },
        DomainSpec::Rectangle2D { m: 3, n: 5 },
        DomainSpec::Rectangle2D { m: 5, n: 4 },
        DomainSpec::Rectangle2D { m: 7, n: 6 },
        DomainSpec::Rectangle2D { m: 4, n: 12 },
        DomainSpec::Block3D { l: 1, m: 1, n: 5 },
        DomainSpec::Block3D { l: 2, m: 2, n: 2 },
        DomainSpec::Block3D { l: 2, m: 3, n: 4 },
        DomainSpec::Block3D { l: 3, m: 3, n: 3 },
        DomainSpec::SemiStrip2D { m: 1 },
        DomainSpec::SemiStrip2D { m: 3 },
        DomainSpec::SemiStrip2D { m: 4 },
        DomainSpec::InfiniteStrip2D { m: 1 },
        DomainSpec::InfiniteStrip2D { m: 2 },
        DomainSpec::InfiniteStrip2D { m: 5 },
    ]
}

/// Runs the domain-free checks and then every domain of [`builtin_sample`].
pub fn run_builtin() -> Result<Vec<CheckReport>> {
    let mut reports = vec![CheckReport {
        subject: "general".to_string(),
        checks: vec![orthogonality(ORTHOGONALITY_MAX_M)],
    }];
    for dom in builtin_sample() {
        reports.push(run_checks(&dom)?);
    }
    Ok(reports)
}

/// Checks that apply to one domain. The half-plane and the full lattice go
/// through quadrature and only get a residual and a parity check.
pub fn run_checks(dom: &DomainSpec) -> Result<CheckReport> {
    dom.validate()?;
    let checks = match *dom {
        DomainSpec::HalfPlane2D => halfplane_checks()?,
        DomainSpec::FullLattice { d } => lattice_checks(d)?,
        _ => series_checks(dom)?,
    };
    Ok(CheckReport {
        subject: dom.to_string(),
        checks,
    })
}

/// `(2/(m+1)) * sum_r sin(a r pi/(m+1)) sin(p r pi/(m+1)) == [a == p]` for
/// every width up to `max_m`.
pub fn orthogonality(max_m: usize) -> CheckOutcome {
    let mut devs = Vec::new();
    for m in 1..=max_m {
        let w = m as i64 + 1;
        for a in 1..=m as i64 {
            for p in 1..=m as i64 {
                let sum: CompensatedSum = (1..=m as i64)
                    .map(|r| sin_pi_frac(a * r, w) * sin_pi_frac(p * r, w))
                    .collect();
                let delta = if a == p { 1.0 } else { 0.0 };
                devs.push(2.0 / w as f64 * sum.value() - delta);
            }
        }
    }
    CheckOutcome::new("orthogonality", ORTHOGONALITY_TOL, devs)
}

/// Raw mode sum for an interior `tgt`, zero elsewhere.
fn raw_green(dom: &DomainSpec, src: &[i64], tgt: &[i64]) -> f64 {
    if !dom.contains(tgt) {
        return 0.0;
    }
    match *dom {
        DomainSpec::Rectangle2D { m, n } => rect_sum(m, n, src[0], src[1], tgt[0], tgt[1]),
        DomainSpec::SemiStrip2D { m } => semistrip_sum(m, src[0], src[1], tgt[0], tgt[1]),
        DomainSpec::InfiniteStrip2D { m } => strip_sum(m, src[0], tgt[0], tgt[1] - src[1]),
        DomainSpec::Block3D { l, m, n } => block_sum([l, m, n], src, tgt),
        DomainSpec::HalfPlane2D | DomainSpec::FullLattice { .. } => {
            unreachable!("no finite sum for {dom}")
        }
    }
}

/// Sources and targets to test. Finite domains use every interior point as
/// a target; strip-like domains use a window around a few sources.
fn sample_pairs(dom: &DomainSpec) -> Result<(Vec<LatticePoint>, Vec<LatticePoint>)> {
    if dom.is_finite() {
        let pts = dom.interior_points()?;
        let srcs = if pts.len() <= 64 {
            pts.clone()
        } else {
            vec![pts[0].clone(), pts[pts.len() / 2].clone(), pts[pts.len() - 1].clone()]
        };
        return Ok((srcs, pts));
    }
    let m = match *dom {
        DomainSpec::SemiStrip2D { m } | DomainSpec::InfiniteStrip2D { m } => m as i64,
        _ => return Err(dom.unsupported("the series checks")),
    };
    let semi = matches!(dom, DomainSpec::SemiStrip2D { .. });
    let rows: Vec<i64> = if semi { vec![1, 2, 5] } else { vec![0] };
    let mut srcs = Vec::new();
    for &b in &rows {
        for a in [1, (m + 1) / 2, m] {
            let s = LatticePoint::from([a, b]);
            if !srcs.contains(&s) {
                srcs.push(s);
            }
        }
    }
    let lo = if semi { 1 } else { -WINDOW };
    let hi = rows[rows.len() - 1] + WINDOW;
    let mut tgts = Vec::new();
    for p in 1..=m {
        for q in lo..=hi {
            tgts.push(LatticePoint::from([p, q]));
        }
    }
    Ok((srcs, tgts))
}

fn series_checks(dom: &DomainSpec) -> Result<Vec<CheckOutcome>> {
    let (srcs, tgts) = sample_pairs(dom)?;
    let weight = 1.0 / (1u64 << dom.dim()) as f64;

    let mut residual = Vec::new();
    let mut parity = Vec::new();
    for s in &srcs {
        for t in &tgts {
            let f = raw_green(dom, s.coords(), t.coords());
            let around: CompensatedSum = diagonal_neighbors(t)
                .iter()
                .map(|y| raw_green(dom, s.coords(), y.coords()))
                .collect();
            let delta = if s == t { 1.0 } else { 0.0 };
            residual.push(f - weight * around.value() - delta);
            if !parity_compatible(s, t) {
                parity.push(f);
            }
        }
    }

    // reciprocity over pairs where both points serve as sources
    let mut recip = Vec::new();
    for s in &srcs {
        for t in &srcs {
            recip.push(raw_green(dom, s.coords(), t.coords()) - raw_green(dom, t.coords(), s.coords()));
        }
    }

    let mut out = vec![
        CheckOutcome::new("residual", RESIDUAL_TOL, residual),
        CheckOutcome::new("reciprocity", RECIPROCITY_TOL, recip),
        CheckOutcome::new("parity zeros (series)", PARITY_TOL, parity),
        mc_parity(dom, &srcs[0], &tgts)?,
    ];
    if dom.is_finite() {
        let mut totals = Vec::new();
        for s in &srcs {
            totals.push(absorption_probs(dom, s)?.total() - 1.0);
        }
        out.push(CheckOutcome::new("absorption sums to 1", ABSORPTION_TOL, totals));
        let states = tgts.len();
        if states <= ORACLE_MAX_STATES {
            let mut devs = Vec::new();
            for s in &srcs {
                for (x, v) in fundamental_matrix_green(dom, s)? {
                    devs.push(raw_green(dom, s.coords(), x.coords()) - v);
                }
            }
            out.push(CheckOutcome::new("linear-solve oracle", ORACLE_TOL, devs));
        }
    }
    Ok(out)
}

/// Monte Carlo departures from an off-parity target must be exactly zero.
fn mc_parity(dom: &DomainSpec, src: &LatticePoint, tgts: &[LatticePoint]) -> Result<CheckOutcome> {
    let off = tgts.iter().find(|t| !parity_compatible(src, t));
    let devs = match off {
        Some(t) => vec![mc_expected_departures(dom, src, t, &PARITY_MC)?.mean],
        None => Vec::new(),
    };
    // exact: any departure at all is a failure
    Ok(CheckOutcome::new("parity zeros (Monte Carlo)", 0.0, devs))
}

fn halfplane_checks() -> Result<Vec<CheckOutcome>> {
    let spec = QuadratureSpec::default();
    let f = |a, p, s| halfplane_green(a, p, s, &spec).map(|r| r.value);
    let mut devs = Vec::new();
    for (a, p) in [(3, 3), (3, 5), (2, 2)] {
        let around = f(a, p + 1, 1)? + f(a, p + 1, -1)? + f(a, p - 1, 1)? + f(a, p - 1, -1)?;
        let delta = if a == p { 4.0 } else { 0.0 };
        devs.push(4.0 * f(a, p, 0)? - around - delta);
    }
    let parity = vec![f(1, 2, 0)?, f(2, 3, 2)?];
    let dom = DomainSpec::HalfPlane2D;
    let src = LatticePoint::from([2, 0]);
    Ok(vec![
        CheckOutcome::new("residual", INTEGRAL_RESIDUAL_TOL, devs),
        CheckOutcome::new("parity zeros (series)", PARITY_TOL, parity),
        mc_parity(&dom, &src, &[LatticePoint::from([3, 0])])?,
    ])
}

fn lattice_checks(d: usize) -> Result<Vec<CheckOutcome>> {
    if d <= 2 {
        return Err(Error::RecurrentLattice(d));
    }
    // 2^d F(0) - sum of the 2^d neighbours, all equal to F(1,...,1) by symmetry
    let spec = QuadratureSpec::default_for_dim(d);
    let f0 = lattice_green_nd(&LatticePoint::origin(d), &spec)?.value;
    let f1 = lattice_green_nd(&LatticePoint::new(vec![1; d]), &spec)?.value;
    let residual = f0 - f1 - 1.0;
    let mut off = vec![0i64; d];
    off[0] = 1;
    let parity = lattice_green_nd(&LatticePoint::new(off.clone()), &spec)?.value;
    let dom = DomainSpec::FullLattice { d };
    Ok(vec![
        CheckOutcome::new("residual", INTEGRAL_RESIDUAL_TOL, [residual]),
        CheckOutcome::new("parity zeros (series)", PARITY_TOL, [parity]),
        mc_parity(&dom, &LatticePoint::origin(d), &[LatticePoint::new(off)])?,
    ])
}
