//! Exact finite-sum Green's functions on bounded and strip-like domains.
//!
//! `F_src(tgt)` is the expected number of departures from `tgt` for a walk
//! started at `src` and stopped on the absorbing boundary. Each domain is
//! expanded in the sine eigenmodes of its bounded directions; the remaining
//! direction contributes a hyperbolic factor from [`crate::dispersion`].
//! Sums run over ascending mode index with compensated accumulation, so the
//! results are deterministic.

use crate::dispersion::{solve_branch, term_rect, term_semistrip, term_strip};
use crate::error::{Error, Result};
use crate::lattice::{
    boundary_set, classify_point, diagonal_neighbors, parity_compatible, DomainSpec,
    LatticePoint, PointClass,
};
use crate::numeric::{cos_pi_frac, sin_pi_frac, CompensatedSum};

/// Boundary point -> absorption probability, in boundary-set order.
#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionMap {
    entries: Vec<(LatticePoint, f64)>,
}

impl AbsorptionMap {
    pub fn entries(&self) -> &[(LatticePoint, f64)] {
        &self.entries
    }

    pub fn get(&self, x: &LatticePoint) -> Option<f64> {
        self.entries.iter().find(|(p, _)| p == x).map(|&(_, v)| v)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).collect::<CompensatedSum>().value()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Checks `src` is interior and classifies `tgt`. Returns `Ok(false)` for a
/// boundary target, where F is 0 by definition.
fn check_pair(dom: &DomainSpec, src: &LatticePoint, tgt: &LatticePoint) -> Result<bool> {
    dom.require_interior(src)?;
    match classify_point(dom, tgt)? {
        PointClass::Interior => Ok(true),
        PointClass::Boundary => Ok(false),
        PointClass::Exterior => Err(Error::NotInterior(tgt.clone())),
    }
}

/// Mode sum for the rectangle without the parity shortcut.
pub(crate) fn rect_sum(m: usize, n: usize, a: i64, b: i64, p: i64, q: i64) -> f64 {
    let width = m as i64 + 1;
    let mut acc = CompensatedSum::new();
    for r in 1..=m as i64 {
        let br = solve_branch(cos_pi_frac(r, width)).expect("cosine within [-1, 1]");
        let modes = sin_pi_frac(a * r, width) * sin_pi_frac(p * r, width);
        acc.add(modes * term_rect(br, q, b, n as i64));
    }
    4.0 * acc.value() / width as f64
}

/// Green's function of the `m x n` rectangle.
pub fn rect_green(m: usize, n: usize, src: &LatticePoint, tgt: &LatticePoint) -> Result<f64> {
    let dom = DomainSpec::rectangle(m, n)?;
    if !check_pair(&dom, src, tgt)? || !parity_compatible(src, tgt) {
        return Ok(0.0);
    }
    let (s, t) = (src.coords(), tgt.coords());
    Ok(rect_sum(m, n, s[0], s[1], t[0], t[1]))
}

pub(crate) fn semistrip_sum(m: usize, a: i64, b: i64, p: i64, q: i64) -> f64 {
    let width = m as i64 + 1;
    let mut acc = CompensatedSum::new();
    for r in 1..=m as i64 {
        let br = solve_branch(cos_pi_frac(r, width)).expect("cosine within [-1, 1]");
        let modes = sin_pi_frac(a * r, width) * sin_pi_frac(p * r, width);
        acc.add(modes * term_semistrip(br, q, b));
    }
    4.0 * acc.value() / width as f64
}

/// Green's function of the semi-infinite strip of width `m` (`q >= 1`).
pub fn semistrip_green(m: usize, src: &LatticePoint, tgt: &LatticePoint) -> Result<f64> {
    let dom = DomainSpec::semi_strip(m)?;
    if !check_pair(&dom, src, tgt)? || !parity_compatible(src, tgt) {
        return Ok(0.0);
    }
    let (s, t) = (src.coords(), tgt.coords());
    Ok(semistrip_sum(m, s[0], s[1], t[0], t[1]))
}

pub(crate) fn strip_sum(m: usize, a: i64, p: i64, s: i64) -> f64 {
    let width = m as i64 + 1;
    let k = s.unsigned_abs();
    let mut acc = CompensatedSum::new();
    for r in 1..=m as i64 {
        let br = solve_branch(cos_pi_frac(r, width)).expect("cosine within [-1, 1]");
        let modes = sin_pi_frac(a * r, width) * sin_pi_frac(p * r, width);
        acc.add(modes * term_strip(br, k));
    }
    2.0 * acc.value() / width as f64
}

/// Green's function of the infinite strip of width `m`, from `(a, 0)` to
/// `(p, s)`.
pub fn strip_green(m: usize, a: i64, p: i64, s: i64) -> Result<f64> {
    let dom = DomainSpec::infinite_strip(m)?;
    let src = LatticePoint::from([a, 0]);
    let tgt = LatticePoint::from([p, s]);
    if !check_pair(&dom, &src, &tgt)? || !parity_compatible(&src, &tgt) {
        return Ok(0.0);
    }
    Ok(strip_sum(m, a, p, s))
}

pub(crate) fn block_sum(dims: [usize; 3], src: &[i64], tgt: &[i64]) -> f64 {
    let [l, m, n] = dims;
    let (wl, wm) = (l as i64 + 1, m as i64 + 1);
    let mut acc = CompensatedSum::new();
    for s in 1..=l as i64 {
        let cs = cos_pi_frac(s, wl);
        let ms = sin_pi_frac(src[0] * s, wl) * sin_pi_frac(tgt[0] * s, wl);
        for t in 1..=m as i64 {
            let br = solve_branch(cs * cos_pi_frac(t, wm)).expect("cosine product within [-1, 1]");
            let mt = sin_pi_frac(src[1] * t, wm) * sin_pi_frac(tgt[1] * t, wm);
            acc.add(ms * mt * term_rect(br, tgt[2], src[2], n as i64));
        }
    }
    8.0 * acc.value() / (wl * wm) as f64
}

/// Green's function of the `l x m x n` block.
pub fn block_green(
    l: usize,
    m: usize,
    n: usize,
    src: &LatticePoint,
    tgt: &LatticePoint,
) -> Result<f64> {
    let dom = DomainSpec::block(l, m, n)?;
    if !check_pair(&dom, src, tgt)? || !parity_compatible(src, tgt) {
        return Ok(0.0);
    }
    Ok(block_sum([l, m, n], src.coords(), tgt.coords()))
}

/// Series Green's function on any domain that has one: rectangle,
/// semi-strip, strip (with the source row as `s = 0`) and block.
pub fn green(dom: &DomainSpec, src: &LatticePoint, tgt: &LatticePoint) -> Result<f64> {
    dom.validate()?;
    match *dom {
        DomainSpec::Rectangle2D { m, n } => rect_green(m, n, src, tgt),
        DomainSpec::SemiStrip2D { m } => semistrip_green(m, src, tgt),
        DomainSpec::InfiniteStrip2D { m } => {
            if !check_pair(dom, src, tgt)? {
                return Ok(0.0);
            }
            let (s, t) = (src.coords(), tgt.coords());
            strip_green(m, s[0], t[0], t[1] - s[1])
        }
        DomainSpec::Block3D { l, m, n } => block_green(l, m, n, src, tgt),
        DomainSpec::HalfPlane2D | DomainSpec::FullLattice { .. } => Err(Error::UnsupportedDomain(
            format!("{} has no finite-sum form; use the quadrature routines", dom.name()),
        )),
    }
}

/// `F_src(x)` for every interior `x` of a finite domain, in interior order.
pub fn green_row(dom: &DomainSpec, src: &LatticePoint) -> Result<Vec<(LatticePoint, f64)>> {
    if !dom.is_finite() {
        return Err(dom.unsupported("a full Green's function row"));
    }
    dom.require_interior(src)?;
    dom.interior_points()?
        .into_iter()
        .map(|x| green(dom, src, &x).map(|v| (x, v)))
        .collect()
}

/// Where the walk started at `src` is absorbed. Absorption at a boundary
/// point is a final departure from one of its interior diagonal neighbours,
/// so `P(beta) = 2^-d * sum of F_src over those neighbours`.
pub fn absorption_probs(dom: &DomainSpec, src: &LatticePoint) -> Result<AbsorptionMap> {
    dom.validate()?;
    if !dom.is_finite() {
        return Err(dom.unsupported("absorption probabilities"));
    }
    let row = green_row(dom, src)?;
    let ext = dom.extents().expect("finite domain");
    let index = |x: &LatticePoint| -> Option<usize> {
        let mut idx = 0usize;
        for (&c, &e) in x.coords().iter().zip(&ext) {
            if c < 1 || c > e as i64 {
                return None;
            }
            idx = idx * e + (c - 1) as usize;
        }
        Some(idx)
    };
    let weight = 1.0 / (1u64 << dom.dim()) as f64;
    let entries = boundary_set(dom)?
        .into_iter()
        .map(|b| {
            let total: CompensatedSum = diagonal_neighbors(&b)
                .iter()
                .filter_map(|y| index(y).map(|i| row[i].1))
                .collect();
            (b, weight * total.value())
        })
        .collect();
    Ok(AbsorptionMap { entries })
}

/// Probability of coming back to `src` at least once before absorption,
/// `1 - 1/F_src(src)`.
pub fn return_prob_finite(dom: &DomainSpec, src: &LatticePoint) -> Result<f64> {
    dom.validate()?;
    if !dom.is_finite() {
        return Err(dom.unsupported("finite-domain return probability"));
    }
    let f = green(dom, src, src)?;
    Ok(1.0 - 1.0 / f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec())
    }

    #[test]
    fn rect_hand_values() {
        assert_relative_eq!(rect_green(2, 2, &p(&[1, 1]), &p(&[1, 1])).unwrap(), 16.0 / 15.0, max_relative = 1e-13);
        assert_relative_eq!(rect_green(2, 2, &p(&[1, 1]), &p(&[2, 2])).unwrap(), 4.0 / 15.0, max_relative = 1e-13);
        assert_eq!(rect_green(2, 2, &p(&[1, 1]), &p(&[1, 2])).unwrap(), 0.0);
        // width-1 column, cos(pi/2) = 0 branch
        assert_relative_eq!(rect_green(1, 5, &p(&[1, 3]), &p(&[1, 3])).unwrap(), 1.0, max_relative = 1e-14);
        assert_eq!(rect_green(1, 5, &p(&[1, 3]), &p(&[1, 5])).unwrap(), 0.0);
    }

    #[test]
    fn rect_errors_and_boundary_targets() {
        assert_eq!(
            rect_green(2, 2, &p(&[0, 1]), &p(&[1, 1])),
            Err(Error::NotInterior(p(&[0, 1])))
        );
        assert_eq!(rect_green(2, 2, &p(&[1, 1]), &p(&[0, 0])).unwrap(), 0.0);
        assert_eq!(
            rect_green(2, 2, &p(&[1, 1]), &p(&[-1, 0])),
            Err(Error::NotInterior(p(&[-1, 0])))
        );
        assert!(matches!(
            rect_green(2, 2, &p(&[1, 1, 1]), &p(&[1, 1])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn explicit_f1_f2_agree_at_seam() {
        // Written out with plain sinh/tanh for a small rectangle.
        let (m, n, a, b, pp) = (4usize, 6i64, 2i64, 3i64, 2i64);
        let w = (m + 1) as f64;
        let pi = std::f64::consts::PI;
        let eval = |q: i64, second: bool| {
            let mut s = 0.0;
            for r in 1..=m {
                let x = r as f64 * pi / w;
                let c = x.cos();
                if c.abs() < 1e-12 {
                    continue;
                }
                let beta = (1.0 / c.abs()).acosh();
                let sg = |k: i64| if c < 0.0 && k % 2 != 0 { -1.0 } else { 1.0 };
                let sh = |k: i64| sg(k) * (k as f64 * beta).sinh();
                let num = if second { sh(b) * sh(n + 1 - q) } else { sh(q) * sh(n + 1 - b) };
                s += (a as f64 * x).sin() * (pp as f64 * x).sin() * num / (beta.tanh() * sh(n + 1));
            }
            4.0 / w * s
        };
        assert_relative_eq!(eval(b, false), eval(b, true), max_relative = 1e-12);
        let series = rect_green(m, n as usize, &p(&[a, b]), &p(&[pp, b])).unwrap();
        assert_relative_eq!(series, eval(b, false), max_relative = 1e-12);
        let below = rect_green(m, n as usize, &p(&[a, b]), &p(&[pp + 1, b - 1])).unwrap();
        assert!(below > 0.0);
    }

    #[test]
    fn semistrip_values() {
        assert_relative_eq!(semistrip_green(1, &p(&[1, 4]), &p(&[1, 4])).unwrap(), 1.0, max_relative = 1e-14);
        assert_eq!(semistrip_green(1, &p(&[1, 4]), &p(&[1, 2])).unwrap(), 0.0);
        let long = rect_green(2, 80, &p(&[1, 3]), &p(&[1, 3])).unwrap();
        let semi = semistrip_green(2, &p(&[1, 3]), &p(&[1, 3])).unwrap();
        assert!((long - semi).abs() < 1e-8);
    }

    #[test]
    fn strip_values() {
        assert_relative_eq!(strip_green(1, 1, 1, 0).unwrap(), 1.0, max_relative = 1e-14);
        assert_eq!(strip_green(1, 1, 1, 2).unwrap(), 0.0);
        assert_relative_eq!(strip_green(2, 1, 1, 0).unwrap(), 2.0 / 3f64.sqrt(), max_relative = 1e-13);
        assert_eq!(strip_green(2, 1, 2, 0).unwrap(), 0.0);
        assert!(matches!(strip_green(2, 3, 1, 0), Err(Error::NotInterior(_))));
        assert_eq!(strip_green(4, 2, 3, 5).unwrap(), strip_green(4, 2, 3, -5).unwrap());
    }

    #[test]
    fn block_hand_values() {
        let o = p(&[1, 1, 1]);
        assert_relative_eq!(block_green(2, 2, 2, &o, &o).unwrap(), 64.0 / 63.0, max_relative = 1e-13);
        assert_relative_eq!(block_green(2, 2, 2, &o, &p(&[2, 2, 2])).unwrap(), 8.0 / 63.0, max_relative = 1e-13);
        let c = p(&[1, 1, 3]);
        assert_relative_eq!(block_green(1, 1, 5, &c, &c).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn absorption_examples() {
        let unit = absorption_probs(&DomainSpec::rectangle(1, 1).unwrap(), &p(&[1, 1])).unwrap();
        assert_eq!(unit.len(), 4);
        for (_, v) in unit.entries() {
            assert_relative_eq!(*v, 0.25, max_relative = 1e-14);
        }

        let sq = absorption_probs(&DomainSpec::rectangle(2, 2).unwrap(), &p(&[1, 1])).unwrap();
        assert_eq!(sq.len(), 12);
        for x in [[0, 0], [0, 2], [2, 0]] {
            assert_relative_eq!(sq.get(&p(&x)).unwrap(), 4.0 / 15.0, max_relative = 1e-13);
        }
        for x in [[1, 3], [3, 1], [3, 3]] {
            assert_relative_eq!(sq.get(&p(&x)).unwrap(), 1.0 / 15.0, max_relative = 1e-13);
        }
        for x in [[0, 1], [0, 3], [1, 0], [2, 3], [3, 0], [3, 2]] {
            assert!(sq.get(&p(&x)).unwrap().abs() < 1e-15);
        }
        assert!((sq.total() - 1.0).abs() < 1e-12);

        let blk = absorption_probs(&DomainSpec::block(2, 2, 2).unwrap(), &p(&[1, 1, 1])).unwrap();
        let near = blk.entries().iter().filter(|(_, v)| (v - 8.0 / 63.0).abs() < 1e-13).count();
        let far = blk.entries().iter().filter(|(_, v)| (v - 1.0 / 63.0).abs() < 1e-13).count();
        assert_eq!((near, far), (7, 7));
        assert!((blk.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn absorption_rejects_infinite_domains() {
        assert!(matches!(
            absorption_probs(&DomainSpec::semi_strip(3).unwrap(), &p(&[1, 1])),
            Err(Error::UnsupportedDomain(_))
        ));
    }

    #[test]
    fn finite_return_probabilities() {
        let r = |dom: DomainSpec, s: &[i64]| return_prob_finite(&dom, &p(s)).unwrap();
        assert!(r(DomainSpec::rectangle(1, 1).unwrap(), &[1, 1]).abs() < 1e-15);
        assert_relative_eq!(r(DomainSpec::rectangle(2, 2).unwrap(), &[1, 1]), 1.0 / 16.0, max_relative = 1e-12);
        assert_relative_eq!(r(DomainSpec::block(2, 2, 2).unwrap(), &[1, 1, 1]), 1.0 / 64.0, max_relative = 1e-12);
        assert!(return_prob_finite(&DomainSpec::HalfPlane2D, &p(&[1, 0])).is_err());
    }

    #[test]
    fn orthogonality_of_sine_modes() {
        for m in 1..=50i64 {
            let w = m + 1;
            for a in 1..=m {
                for pp in 1..=m {
                    let s: CompensatedSum = (1..=m).map(|r| sin_pi_frac(a * r, w) * sin_pi_frac(pp * r, w)).collect();
                    let v = 2.0 / w as f64 * s.value();
                    let expect = if a == pp { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-12, "m={m} a={a} p={pp}: {v}");
                }
            }
        }
    }
}
