//! Lattice geometry for the diagonal walk.
//!
//! A diagonal step changes every coordinate by ±1 at once, so a walker in
//! `d` dimensions has `2^d` equally likely moves. Domains are described by
//! [`DomainSpec`]; the absorbing boundary of a domain is the set of
//! non-interior points reachable in one diagonal step from the interior.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Integer position of the walker. Coordinates are plain `i64` values with
/// no wraparound; every domain in this crate stays far inside `±2^62`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticePoint(coords)
    }

    pub fn origin(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<i64> {
        self.0
    }

    /// Componentwise `self - other`.
    pub fn displacement(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint(self.0.iter().zip(&other.0).map(|(x, y)| x - y).collect())
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint(v)
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        LatticePoint(v.to_vec())
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Parses comma-separated integers such as `1,-2,3`.
impl FromStr for LatticePoint {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        if trimmed.is_empty() {
            return Err("empty point".to_string());
        }
        trimmed
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|e| format!("bad coordinate {t:?}: {e}"))
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(LatticePoint)
    }
}

/// The six domain shapes with absorbing boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainSpec {
    /// Interior `1 <= p <= m`, `1 <= q <= n`.
    Rectangle2D { m: usize, n: usize },
    /// Interior `1 <= p <= m`, `q >= 1`.
    SemiStrip2D { m: usize },
    /// Interior `1 <= p <= m`, any `q`.
    InfiniteStrip2D { m: usize },
    /// Interior `p >= 1`, any `q`.
    HalfPlane2D,
    /// Interior `1 <= p <= l`, `1 <= q <= m`, `1 <= r <= n`.
    Block3D { l: usize, m: usize, n: usize },
    /// The whole lattice, no boundary.
    FullLattice { d: usize },
}

impl DomainSpec {
    pub fn rectangle(m: usize, n: usize) -> Result<Self> {
        check_positive(&[m, n])?;
        Ok(DomainSpec::Rectangle2D { m, n })
    }

    pub fn semi_strip(m: usize) -> Result<Self> {
        check_positive(&[m])?;
        Ok(DomainSpec::SemiStrip2D { m })
    }

    pub fn infinite_strip(m: usize) -> Result<Self> {
        check_positive(&[m])?;
        Ok(DomainSpec::InfiniteStrip2D { m })
    }

    pub fn block(l: usize, m: usize, n: usize) -> Result<Self> {
        check_positive(&[l, m, n])?;
        Ok(DomainSpec::Block3D { l, m, n })
    }

    pub fn full_lattice(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDomain(format!(
                "full lattice needs dimension >= 2, got {d}"
            )));
        }
        Ok(DomainSpec::FullLattice { d })
    }

    /// Rejects zero size parameters on values built without the checked
    /// constructors.
    pub fn validate(&self) -> Result<()> {
        match *self {
            DomainSpec::Rectangle2D { m, n } => check_positive(&[m, n]),
            DomainSpec::SemiStrip2D { m } | DomainSpec::InfiniteStrip2D { m } => {
                check_positive(&[m])
            }
            DomainSpec::HalfPlane2D => Ok(()),
            DomainSpec::Block3D { l, m, n } => check_positive(&[l, m, n]),
            DomainSpec::FullLattice { d } => DomainSpec::full_lattice(d).map(|_| ()),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            DomainSpec::Block3D { .. } => 3,
            DomainSpec::FullLattice { d } => d,
            _ => 2,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            DomainSpec::Rectangle2D { .. } | DomainSpec::Block3D { .. }
        )
    }

    /// Short name used in diagnostics and CLI output.
    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::Rectangle2D { .. } => "rect",
            DomainSpec::SemiStrip2D { .. } => "semistrip",
            DomainSpec::InfiniteStrip2D { .. } => "strip",
            DomainSpec::HalfPlane2D => "halfplane",
            DomainSpec::Block3D { .. } => "block",
            DomainSpec::FullLattice { .. } => "lattice",
        }
    }

    pub fn check_dim(&self, x: &LatticePoint) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// Interior membership without a dimension check.
    pub(crate) fn contains(&self, c: &[i64]) -> bool {
        let within = |x: i64, hi: usize| x >= 1 && x <= hi as i64;
        match *self {
            DomainSpec::Rectangle2D { m, n } => within(c[0], m) && within(c[1], n),
            DomainSpec::SemiStrip2D { m } => within(c[0], m) && c[1] >= 1,
            DomainSpec::InfiniteStrip2D { m } => within(c[0], m),
            DomainSpec::HalfPlane2D => c[0] >= 1,
            DomainSpec::Block3D { l, m, n } => within(c[0], l) && within(c[1], m) && within(c[2], n),
            DomainSpec::FullLattice { .. } => true,
        }
    }

    pub fn is_interior(&self, x: &LatticePoint) -> Result<bool> {
        self.check_dim(x)?;
        Ok(self.contains(x.coords()))
    }

    /// Errors with [`Error::NotInterior`] unless `x` is interior.
    pub fn require_interior(&self, x: &LatticePoint) -> Result<()> {
        if self.is_interior(x)? {
            Ok(())
        } else {
            Err(Error::NotInterior(x.clone()))
        }
    }

    /// Side lengths of a finite domain's interior box.
    pub fn extents(&self) -> Option<Vec<usize>> {
        match *self {
            DomainSpec::Rectangle2D { m, n } => Some(vec![m, n]),
            DomainSpec::Block3D { l, m, n } => Some(vec![l, m, n]),
            _ => None,
        }
    }

    /// Interior points of a finite domain in lexicographic order.
    pub fn interior_points(&self) -> Result<Vec<LatticePoint>> {
        let ext = self.extents().ok_or_else(|| self.unsupported("interior enumeration"))?;
        Ok(box_points(&ext.iter().map(|&e| (1, e as i64)).collect::<Vec<_>>()))
    }

    pub(crate) fn unsupported(&self, what: &str) -> Error {
        Error::UnsupportedDomain(format!(
            "{what} requires a finite domain (rect or block), got {}",
            self.name()
        ))
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DomainSpec::Rectangle2D { m, n } => write!(f, "rect(m={m}, n={n})"),
            DomainSpec::SemiStrip2D { m } => write!(f, "semistrip(m={m})"),
            DomainSpec::InfiniteStrip2D { m } => write!(f, "strip(m={m})"),
            DomainSpec::HalfPlane2D => write!(f, "halfplane"),
            DomainSpec::Block3D { l, m, n } => write!(f, "block(l={l}, m={m}, n={n})"),
            DomainSpec::FullLattice { d } => write!(f, "lattice(d={d})"),
        }
    }
}

fn check_positive(sizes: &[usize]) -> Result<()> {
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidDomain(format!(
            "size parameters must be positive, got {sizes:?}"
        )));
    }
    Ok(())
}

/// All integer points of the box `lo_i <= x_i <= hi_i`, lexicographic.
fn box_points(bounds: &[(i64, i64)]) -> Vec<LatticePoint> {
    let mut out = vec![Vec::with_capacity(bounds.len())];
    for &(lo, hi) in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(LatticePoint).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointClass {
    Interior,
    Boundary,
    Exterior,
}

/// Sign offset of the `k`-th diagonal move in `d` dimensions. Coordinate 0
/// reads the most significant bit, and a clear bit means `+1`, so index 0 is
/// `(+1, ..., +1)` and the last index is `(-1, ..., -1)`.
#[inline]
pub(crate) fn move_offset(k: usize, d: usize, i: usize) -> i64 {
    if (k >> (d - 1 - i)) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// The `2^d` diagonal neighbours of `x`, ordered lexicographically by sign
/// pattern with `+` before `-`.
pub fn diagonal_neighbors(x: &LatticePoint) -> Vec<LatticePoint> {
    let d = x.dim();
    (0..1usize << d)
        .map(|k| {
            LatticePoint(
                x.coords()
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| c + move_offset(k, d, i))
                    .collect(),
            )
        })
        .collect()
}

pub fn classify_point(dom: &DomainSpec, x: &LatticePoint) -> Result<PointClass> {
    dom.check_dim(x)?;
    if dom.contains(x.coords()) {
        return Ok(PointClass::Interior);
    }
    let touches_interior = diagonal_neighbors(x)
        .iter()
        .any(|y| dom.contains(y.coords()));
    Ok(if touches_interior {
        PointClass::Boundary
    } else {
        PointClass::Exterior
    })
}

/// Every boundary point of a finite domain, in lexicographic order.
pub fn boundary_set(dom: &DomainSpec) -> Result<Vec<LatticePoint>> {
    let ext = dom.extents().ok_or_else(|| dom.unsupported("boundary enumeration"))?;
    let frame: Vec<(i64, i64)> = ext.iter().map(|&e| (0, e as i64 + 1)).collect();
    let mut out = Vec::new();
    for x in box_points(&frame) {
        if classify_point(dom, &x)? == PointClass::Boundary {
            out.push(x);
        }
    }
    Ok(out)
}

/// Whether `x` is reachable from `src`: after `k` diagonal steps every
/// coordinate difference has parity `k mod 2`, so all differences must share
/// one parity. Mismatched dimensions are never compatible.
pub fn parity_compatible(x: &LatticePoint, src: &LatticePoint) -> bool {
    if x.dim() != src.dim() {
        return false;
    }
    let mut diffs = x.coords().iter().zip(src.coords()).map(|(a, b)| (a - b).rem_euclid(2));
    match diffs.next() {
        None => true,
        Some(first) => diffs.all(|p| p == first),
    }
}
