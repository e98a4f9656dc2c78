//! Full-lattice integrals against frozen reference values. The references
//! are the lattice sums `sum_n prod_k P(u_k, n)` of one-dimensional walk
//! probabilities, evaluated in extended precision with an Euler-Maclaurin
//! tail, and Watson's closed form `Gamma(1/4)^4 / (4 pi^3)` at the origin.

use diagwalk_core::*;

fn p(c: &[i64]) -> LatticePoint {
    LatticePoint::new(c.to_vec())
}

fn spec(tol: f64) -> QuadratureSpec {
    QuadratureSpec::with_tol(tol).unwrap()
}

const F3: [([i64; 3], f64); 5] = [
    ([0, 0, 0], 1.393_203_929_685_676_9),
    ([1, 1, 1], 0.393_203_929_685_676_86),
    ([2, 0, 0], 0.290_901_228_408_670_99),
    ([2, 2, 0], 0.229_599_016_050_992_89),
    ([3, 1, 1], 0.188_598_527_131_665_13),
];

#[test]
fn three_dimensional_values() {
    for (u, reference) in F3 {
        let r = lattice_green_nd(&p(&u), &spec(1e-8)).unwrap();
        assert!(r.converged, "{u:?}: {r:?}");
        assert!((r.value - reference).abs() < 1e-7, "{u:?}: {} vs {reference}", r.value);
        assert!((r.value - reference).abs() <= 5.0 * r.error_estimate, "{u:?}: {r:?}");
    }
}

#[test]
fn return_constants_and_honest_error_estimates() {
    let diag = return_constant(ReturnStyle::Diagonal(3), &QuadratureSpec::default()).unwrap();
    assert!((diag.constant.value - 1.3932039297).abs() < 1e-6);
    assert!((diag.p_return - 0.282229985).abs() < 1e-6);
    assert!((diag.constant.value - F3[0].1).abs() <= 5.0 * diag.constant.error_estimate);

    let reg = return_constant(ReturnStyle::Regular3D, &QuadratureSpec::default()).unwrap();
    let watson = 1.516_386_059_151_978;
    assert!((reg.constant.value - 1.5163860591).abs() < 1e-5);
    assert!((reg.p_return - 0.340537330).abs() < 1e-5);
    assert!((reg.constant.value - watson).abs() <= 5.0 * reg.constant.error_estimate);
    assert!(reg.constant.converged && diag.constant.converged);
}

#[test]
fn four_and_five_dimensional_values() {
    let r = lattice_green_nd(&p(&[0, 0, 0, 0]), &QuadratureSpec::default_for_dim(4)).unwrap();
    assert!((r.value - 1.118_636_387_164_187_1).abs() < 1e-7, "{r:?}");
    let r = lattice_green_nd(&p(&[1, 1, 1, 1]), &spec(1e-6)).unwrap();
    assert!((r.value - 0.118_636_387_164_187_07).abs() < 1e-5, "{r:?}");
    let r = lattice_green_nd(&p(&[2, 0, 0, 0]), &spec(1e-6)).unwrap();
    assert!((r.value - 0.075_281_197_829_867_18).abs() < 1e-5, "{r:?}");
    let r = lattice_green_nd(&p(&[0, 0, 0, 0, 0]), &QuadratureSpec::default_for_dim(5)).unwrap();
    assert!((r.value - 1.046_825_549_833_500).abs() < 1e-5, "{r:?}");
}

#[test]
fn monotone_transience() {
    let c: Vec<f64> = (3..=5)
        .map(|d| {
            return_constant(ReturnStyle::Diagonal(d), &QuadratureSpec::default_for_dim(d))
                .unwrap()
                .constant
                .value
        })
        .collect();
    assert!(c[0] > c[1] && c[1] > c[2] && c[2] > 1.0, "{c:?}");
}

#[test]
fn residual_in_three_dimensions() {
    let s = spec(1e-7);
    let f = |u: &[i64]| lattice_green_nd(&p(u), &s).unwrap().value;
    // by symmetry every neighbour of these points is one of the tabulated values
    let origin = 8.0 * f(&[0, 0, 0]) - 8.0 * f(&[1, 1, 1]);
    assert!((origin - 8.0).abs() < 1e-5, "{origin}");
    let diag = 8.0 * f(&[1, 1, 1]) - f(&[0, 0, 0]) - f(&[2, 2, 2]) - 3.0 * f(&[2, 0, 0]) - 3.0 * f(&[2, 2, 0]);
    assert!(diag.abs() < 1e-5, "{diag}");
    let axis = 8.0 * f(&[2, 0, 0]) - 4.0 * f(&[1, 1, 1]) - 4.0 * f(&[3, 1, 1]);
    assert!(axis.abs() < 1e-5, "{axis}");
}

#[test]
fn symmetric_under_permutations_and_sign_flips() {
    let s = spec(1e-7);
    let base = lattice_green_nd(&p(&[3, 1, 0]), &s).unwrap().value;
    for u in [[1, 3, 0], [0, 1, 3], [-3, 1, 0], [3, 0, -1], [0, -3, -1]] {
        let v = lattice_green_nd(&p(&u), &s).unwrap().value;
        assert!((v - base).abs() < 1e-6, "{u:?}: {v} vs {base}");
    }
}

#[test]
fn parity_and_recurrence() {
    let r = lattice_green_nd(&p(&[1, 0, 0]), &QuadratureSpec::default()).unwrap();
    assert_eq!(r.value, 0.0);
    assert_eq!(
        return_constant(ReturnStyle::Diagonal(2), &QuadratureSpec::default()),
        Err(Error::RecurrentLattice(2))
    );
}

#[test]
fn quadrature_is_bitwise_reproducible_across_pools() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| lattice_green_nd(&p(&[2, 0, 0]), &spec(1e-6)).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a, b);
}

#[test]
fn engine_examples() {
    let pi = std::f64::consts::PI;
    let r = integrate_adaptive(|x: f64| x.sin().powi(2), 0.0, pi, &QuadratureSpec::default());
    assert!((r.value - pi / 2.0).abs() < 1e-10);
    let r = integrate_adaptive(|x: f64| x.powf(-0.5), 0.0, 1.0, &spec(1e-9));
    assert!((r.value - 2.0).abs() < 1e-7, "{r:?}");
}
