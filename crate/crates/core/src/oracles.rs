//! Independent ground truth for the series and integral formulas.
//!
//! * [`fundamental_matrix_green`] solves the absorbing-chain equations
//!   `F(x) - 2^-d * sum F(interior neighbours) = [x == src]` directly.
//! * The Monte Carlo estimators walk the chain. Trial `i` draws from a
//!   ChaCha8 stream keyed by `(seed, i)`: `ChaCha8Rng::seed_from_u64(seed)`
//!   followed by `set_stream(i)`. Per-trial tallies are integers, so the
//!   estimates do not depend on how trials are spread over threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{classify_point, move_offset, DomainSpec, LatticePoint, PointClass};

/// Interior-state cap for [`fundamental_matrix_green`].
pub const MAX_ORACLE_STATES: usize = 20_000;

const CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Step cutoff per trial.
    pub max_steps: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            trials: 100_000,
            seed: 0,
            max_steps: 1_000_000,
        }
    }
}

impl McConfig {
    pub fn new(trials: u64, seed: u64, max_steps: u64) -> Result<Self> {
        let cfg = McConfig {
            trials,
            seed,
            max_steps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.max_steps == 0 {
            return Err(Error::InvalidConfig(format!(
                "trials and max_steps must be >= 1, got {} and {}",
                self.trials, self.max_steps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`; 0 for a single trial.
    pub std_error: f64,
    pub trials: u64,
    /// Trials stopped by the step cutoff.
    pub truncated_trials: u64,
}

/// Exact integer tallies over a set of trials.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    sum: u128,
    sum_sq: u128,
    truncated: u64,
}

impl Tally {
    fn push(&mut self, x: u64, truncated: bool) {
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
        self.truncated += truncated as u64;
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.truncated += o.truncated;
        self
    }

    fn estimate(&self, trials: u64) -> McEstimate {
        let n = trials as f64;
        let mean = self.sum as f64 / n;
        let std_error = if trials > 1 {
            // sum (x - mean)^2 = sum_sq - sum^2 / n, formed in integers
            let scaled = (self.sum_sq * trials as u128).saturating_sub(self.sum * self.sum);
            let var = scaled as f64 / (n * (n - 1.0));
            (var / n).sqrt()
        } else {
            0.0
        };
        McEstimate {
            mean,
            std_error,
            trials,
            truncated_trials: self.truncated,
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trial(rng)` for every trial index and tallies `(count, truncated)`.
fn run_trials<T>(cfg: &McConfig, trial: T) -> McEstimate
where
    T: Fn(&mut ChaCha8Rng) -> (u64, bool) + Sync,
{
    let chunks = cfg.trials.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
                let mut rng = trial_rng(cfg.seed, i);
                let (x, truncated) = trial(&mut rng);
                t.push(x, truncated);
            }
            t
        })
        .reduce(Tally::default, Tally::merge);
    tally.estimate(cfg.trials)
}

/// Uniform random diagonal moves, `d` bits per move.
struct MoveSource<'r> {
    rng: &'r mut ChaCha8Rng,
    bits: u64,
    left: u32,
    d: u32,
}

impl<'r> MoveSource<'r> {
    fn new(rng: &'r mut ChaCha8Rng, d: usize) -> Self {
        MoveSource {
            rng,
            bits: 0,
            left: 0,
            d: d as u32,
        }
    }

    #[inline]
    fn next(&mut self) -> usize {
        if self.left < self.d {
            self.bits = self.rng.next_u64();
            self.left = 64;
        }
        let k = self.bits & ((1u64 << self.d) - 1);
        self.bits >>= self.d;
        self.left -= self.d;
        k as usize
    }
}

fn apply_move(x: &mut [i64], k: usize) {
    let d = x.len();
    for (i, c) in x.iter_mut().enumerate() {
        *c += move_offset(k, d, i);
    }
}

/// Expected departures `F_src(x)` for every interior `x` of a finite domain,
/// by direct elimination. Interior points are numbered with the longest
/// axis outermost, which keeps the system banded with half-width
/// `sum of the inner strides`; elimination stays inside the band and needs
/// no pivoting because the matrix is symmetric and diagonally dominant.
pub fn fundamental_matrix_green(
    dom: &DomainSpec,
    src: &LatticePoint,
) -> Result<Vec<(LatticePoint, f64)>> {
    dom.validate()?;
    let ext = dom.extents().ok_or_else(|| dom.unsupported("the fundamental-matrix oracle"))?;
    dom.require_interior(src)?;
    let states: usize = ext.iter().product();
    if states > MAX_ORACLE_STATES {
        return Err(Error::TooLarge {
            states,
            cap: MAX_ORACLE_STATES,
        });
    }
    let d = ext.len();

    // Axis order: longest first (outermost), ties by axis index.
    let mut axes: Vec<usize> = (0..d).collect();
    axes.sort_by(|&i, &j| ext[j].cmp(&ext[i]).then(i.cmp(&j)));
    let mut stride = vec![0usize; d];
    let mut s = 1;
    for &ax in axes.iter().rev() {
        stride[ax] = s;
        s *= ext[ax];
    }
    let index = |c: &[i64]| -> Option<usize> {
        let mut idx = 0;
        for k in 0..d {
            if c[k] < 1 || c[k] > ext[k] as i64 {
                return None;
            }
            idx += (c[k] - 1) as usize * stride[k];
        }
        Some(idx)
    };
    let half_width: usize = stride.iter().sum();

    let mut band = Banded::new(states, half_width);
    let w = 1.0 / (1u64 << d) as f64;
    let points = dom.interior_points()?;
    let mut nbr = vec![0i64; d];
    for x in &points {
        let i = index(x.coords()).expect("interior point");
        band.add(i, i, 1.0);
        for k in 0..1usize << d {
            nbr.copy_from_slice(x.coords());
            apply_move(&mut nbr, k);
            if let Some(j) = index(&nbr) {
                band.add(i, j, -w);
            }
        }
    }
    let mut rhs = vec![0.0; states];
    rhs[index(src.coords()).expect("interior source")] = 1.0;
    band.solve(&mut rhs);

    Ok(points
        .into_iter()
        .map(|x| {
            let v = rhs[index(x.coords()).expect("interior point")];
            (x, v)
        })
        .collect())
}

/// Square band matrix stored row-wise, `2w + 1` entries per row.
struct Banded {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl Banded {
    fn new(n: usize, w: usize) -> Self {
        Banded {
            n,
            w,
            data: vec![0.0; n * (2 * w + 1)],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * (2 * self.w + 1) + (j + self.w - i)
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.at(i, j);
        self.data[k] += v;
    }

    /// Gaussian elimination without pivoting, in place on `b`.
    fn solve(&mut self, b: &mut [f64]) {
        let (n, w) = (self.n, self.w);
        for k in 0..n {
            let pivot = self.data[self.at(k, k)];
            let end = (k + w + 1).min(n);
            for i in k + 1..end {
                let f = self.data[self.at(i, k)] / pivot;
                if f == 0.0 {
                    continue;
                }
                for j in k..end {
                    let kj = self.data[self.at(k, j)];
                    let ij = self.at(i, j);
                    self.data[ij] -= f * kj;
                }
                b[i] -= f * b[k];
            }
        }
        for k in (0..n).rev() {
            let end = (k + w + 1).min(n);
            let mut acc = b[k];
            for j in k + 1..end {
                acc -= self.data[self.at(k, j)] * b[j];
            }
            b[k] = acc / self.data[self.at(k, k)];
        }
    }
}

fn check_target(dom: &DomainSpec, tgt: &LatticePoint) -> Result<bool> {
    match classify_point(dom, tgt)? {
        PointClass::Interior => Ok(true),
        PointClass::Boundary => Ok(false),
        PointClass::Exterior => Err(Error::NotInterior(tgt.clone())),
    }
}

/// Walks from `src` until absorption or the cutoff, calling `visit` before
/// every departure. Returns `(steps, truncated)`.
fn walk<V: FnMut(&[i64])>(
    dom: &DomainSpec,
    src: &[i64],
    max_steps: u64,
    rng: &mut ChaCha8Rng,
    mut visit: V,
) -> (u64, bool) {
    let mut x = src.to_vec();
    let mut moves = MoveSource::new(rng, x.len());
    let mut steps = 0;
    loop {
        if !dom.contains(&x) {
            return (steps, false);
        }
        if steps == max_steps {
            return (steps, true);
        }
        visit(&x);
        apply_move(&mut x, moves.next());
        steps += 1;
    }
}

/// Monte Carlo estimate of `F_src(tgt)`: departures from `tgt` per trial.
/// Truncated trials keep their partial counts, so the mean is a lower bound
/// when any trial hits the cutoff.
pub fn mc_expected_departures(
    dom: &DomainSpec,
    src: &LatticePoint,
    tgt: &LatticePoint,
    cfg: &McConfig,
) -> Result<McEstimate> {
    dom.validate()?;
    cfg.validate()?;
    dom.require_interior(src)?;
    check_target(dom, tgt)?;
    let target = tgt.coords();
    Ok(run_trials(cfg, |rng| {
        let mut count = 0u64;
        let (_, truncated) = walk(dom, src.coords(), cfg.max_steps, rng, |x| {
            if x == target {
                count += 1;
            }
        });
        (count, truncated)
    }))
}

/// Monte Carlo estimate of the absorption time, the number of steps until
/// the walk leaves the interior.
pub fn mc_absorption_time(dom: &DomainSpec, src: &LatticePoint, cfg: &McConfig) -> Result<McEstimate> {
    dom.validate()?;
    cfg.validate()?;
    dom.require_interior(src)?;
    Ok(run_trials(cfg, |rng| walk(dom, src.coords(), cfg.max_steps, rng, |_| {})))
}

/// Number of heads in `s` fair coin flips.
fn fair_binomial(rng: &mut ChaCha8Rng, s: u64) -> u64 {
    if s > 1 << 14 {
        return Binomial::new(s, 0.5).expect("valid binomial").sample(rng);
    }
    let mut heads = 0u64;
    let mut left = s;
    while left >= 64 {
        heads += rng.next_u64().count_ones() as u64;
        left -= 64;
    }
    if left > 0 {
        heads += (rng.next_u64() & ((1u64 << left) - 1)).count_ones() as u64;
    }
    heads
}

/// One trial on the full lattice: does the walk revisit the origin within
/// `max_steps` steps? While the walker is at sup-norm distance `r >= 2` the
/// origin is out of reach for `r - 1` steps, so those are drawn at once as
/// independent binomial displacements per coordinate.
fn returns_to_origin(d: usize, max_steps: u64, rng: &mut ChaCha8Rng) -> bool {
    let mut x = vec![0i64; d];
    let mut t = 0u64;
    let mut bits = 0u64;
    let mut left = 0u32;
    loop {
        if t == max_steps {
            return false;
        }
        let r = x.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        if r >= 2 {
            let s = (r - 1).min(max_steps - t);
            for c in x.iter_mut() {
                *c += 2 * fair_binomial(rng, s) as i64 - s as i64;
            }
            t += s;
        } else {
            if left < d as u32 {
                bits = rng.next_u64();
                left = 64;
            }
            for c in x.iter_mut() {
                *c += if bits & 1 == 0 { 1 } else { -1 };
                bits >>= 1;
            }
            left -= d as u32;
            t += 1;
            if x.iter().all(|&c| c == 0) {
                return true;
            }
        }
    }
}

/// Fraction of walks on the full `d`-dimensional diagonal lattice that come
/// back to the origin within `max_steps`. A lower bound on the return
/// probability; the gap closes as the cutoff grows.
pub fn mc_return_prob(d: usize, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate()?;
    if d <= 2 {
        return Err(Error::RecurrentLattice(d));
    }
    if d > 63 {
        return Err(Error::InvalidConfig(format!("dimension {d} too large")));
    }
    Ok(run_trials(cfg, |rng| {
        let back = returns_to_origin(d, cfg.max_steps, rng);
        (back as u64, !back)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(c: &[i64]) -> LatticePoint {
        LatticePoint::new(c.to_vec())
    }

    fn lookup(row: &[(LatticePoint, f64)], x: &[i64]) -> f64 {
        row.iter().find(|(q, _)| q.coords() == x).unwrap().1
    }

    #[test]
    fn fundamental_single_state() {
        let row = fundamental_matrix_green(&DomainSpec::rectangle(1, 1).unwrap(), &p(&[1, 1])).unwrap();
        assert_eq!(row, vec![(p(&[1, 1]), 1.0)]);
    }

    #[test]
    fn fundamental_hand_values() {
        let row = fundamental_matrix_green(&DomainSpec::rectangle(2, 2).unwrap(), &p(&[1, 1])).unwrap();
        assert_relative_eq!(lookup(&row, &[1, 1]), 16.0 / 15.0, max_relative = 1e-14);
        assert_relative_eq!(lookup(&row, &[2, 2]), 4.0 / 15.0, max_relative = 1e-14);
        assert_eq!(lookup(&row, &[1, 2]), 0.0);
        assert_eq!(lookup(&row, &[2, 1]), 0.0);

        let row = fundamental_matrix_green(&DomainSpec::block(2, 2, 2).unwrap(), &p(&[1, 1, 1])).unwrap();
        assert_relative_eq!(lookup(&row, &[1, 1, 1]), 64.0 / 63.0, max_relative = 1e-14);
        assert_relative_eq!(lookup(&row, &[2, 2, 2]), 8.0 / 63.0, max_relative = 1e-14);
        let zeros = row.iter().filter(|(_, v)| *v == 0.0).count();
        assert_eq!(zeros, 6);
    }

    #[test]
    fn fundamental_reciprocity() {
        for dom in [DomainSpec::rectangle(4, 3).unwrap(), DomainSpec::block(2, 3, 2).unwrap()] {
            let pts = dom.interior_points().unwrap();
            let rows: Vec<_> = pts.iter().map(|s| fundamental_matrix_green(&dom, s).unwrap()).collect();
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    assert!((rows[i][j].1 - rows[j][i].1).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fundamental_axis_order_irrelevant() {
        let a = fundamental_matrix_green(&DomainSpec::rectangle(2, 7).unwrap(), &p(&[1, 3])).unwrap();
        let b = fundamental_matrix_green(&DomainSpec::rectangle(7, 2).unwrap(), &p(&[3, 1])).unwrap();
        for (x, v) in &a {
            let c = x.coords();
            assert_relative_eq!(*v, lookup(&b, &[c[1], c[0]]), max_relative = 1e-13, epsilon = 1e-15);
        }
    }

    #[test]
    fn fundamental_errors() {
        assert!(matches!(
            fundamental_matrix_green(&DomainSpec::rectangle(200, 200).unwrap(), &p(&[1, 1])),
            Err(Error::TooLarge { states: 40_000, cap: MAX_ORACLE_STATES })
        ));
        assert!(matches!(
            fundamental_matrix_green(&DomainSpec::HalfPlane2D, &p(&[1, 1])),
            Err(Error::UnsupportedDomain(_))
        ));
        assert!(matches!(
            fundamental_matrix_green(&DomainSpec::rectangle(2, 2).unwrap(), &p(&[3, 1])),
            Err(Error::NotInterior(_))
        ));
    }

    #[test]
    fn mc_parity_is_exact() {
        let dom = DomainSpec::rectangle(2, 2).unwrap();
        let cfg = McConfig::new(20_000, 3, 1000).unwrap();
        let est = mc_expected_departures(&dom, &p(&[1, 1]), &p(&[1, 2]), &cfg).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn mc_matches_hand_value() {
        let dom = DomainSpec::rectangle(2, 2).unwrap();
        let cfg = McConfig::new(200_000, 42, 1000).unwrap();
        let est = mc_expected_departures(&dom, &p(&[1, 1]), &p(&[1, 1]), &cfg).unwrap();
        assert!((est.mean - 16.0 / 15.0).abs() < 4.0 * est.std_error, "{est:?}");
        assert_eq!(est.truncated_trials, 0);
    }

    #[test]
    fn mc_strip() {
        let dom = DomainSpec::infinite_strip(2).unwrap();
        let cfg = McConfig::new(200_000, 5, 100_000).unwrap();
        let est = mc_expected_departures(&dom, &p(&[1, 0]), &p(&[1, 0]), &cfg).unwrap();
        assert!((est.mean - 2.0 / 3f64.sqrt()).abs() < 4.0 * est.std_error, "{est:?}");
    }

    #[test]
    fn mc_is_reproducible() {
        let dom = DomainSpec::rectangle(4, 5).unwrap();
        let cfg = McConfig::new(5_000, 99, 10_000).unwrap();
        let a = mc_expected_departures(&dom, &p(&[2, 2]), &p(&[3, 3]), &cfg).unwrap();
        let b = mc_expected_departures(&dom, &p(&[2, 2]), &p(&[3, 3]), &cfg).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let c = pool.install(|| mc_expected_departures(&dom, &p(&[2, 2]), &p(&[3, 3]), &cfg).unwrap());
        assert_eq!(a, c);
        let other = McConfig { seed: 100, ..cfg };
        assert_ne!(a, mc_expected_departures(&dom, &p(&[2, 2]), &p(&[3, 3]), &other).unwrap());
    }

    #[test]
    fn mc_truncation_is_reported() {
        let cfg = McConfig::new(100, 1, 5).unwrap();
        let est = mc_expected_departures(&DomainSpec::HalfPlane2D, &p(&[50, 0]), &p(&[50, 0]), &cfg).unwrap();
        assert_eq!(est.truncated_trials, 100);
        // departures at steps 0, 2 and 4 at most
        assert!(est.mean >= 1.0 && est.mean <= 3.0);
    }

    #[test]
    fn single_trial_has_zero_std_error() {
        let cfg = McConfig::new(1, 7, 1000).unwrap();
        let est = mc_return_prob(3, &cfg).unwrap();
        assert!(est.mean == 0.0 || est.mean == 1.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn return_prob_rejects_recurrent() {
        assert_eq!(mc_return_prob(2, &McConfig::default()), Err(Error::RecurrentLattice(2)));
        assert!(McConfig::new(0, 1, 1).is_err());
    }

    #[test]
    fn jumping_walk_matches_step_by_step() {
        // Same process simulated plainly: compare return frequencies.
        let (d, max_steps, trials) = (3usize, 400u64, 40_000u64);
        let cfg = McConfig::new(trials, 17, max_steps).unwrap();
        let fast = mc_return_prob(d, &cfg).unwrap();
        let dom = DomainSpec::full_lattice(d).unwrap();
        let plain = run_trials(&cfg, |rng| {
            let mut back = false;
            let mut first = true;
            walk(&dom, &[0, 0, 0], max_steps, rng, |x| {
                if !first && !back && x.iter().all(|&c| c == 0) {
                    back = true;
                }
                first = false;
            });
            (back as u64, !back)
        });
        let se = (fast.std_error.powi(2) + plain.std_error.powi(2)).sqrt();
        assert!((fast.mean - plain.mean).abs() < 4.0 * se, "{fast:?} {plain:?}");
    }

    #[test]
    fn fair_binomial_moments() {
        let mut rng = trial_rng(1, 0);
        let s = 100u64;
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| fair_binomial(&mut rng, s) as f64).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 50.0).abs() < 0.1, "{mean}");
        assert!((var - 25.0).abs() < 1.0, "{var}");
        assert!(fair_binomial(&mut rng, 1 << 20) <= 1 << 20);
    }
}
