use diagwalk_core::*;

fn p(c: &[i64]) -> LatticePoint {
    LatticePoint::new(c.to_vec())
}

#[test]
fn tall_rectangles_approach_the_semistrip() {
    let v = semistrip_green(2, &p(&[1, 3]), &p(&[1, 3])).unwrap();
    let r = rect_green(2, 80, &p(&[1, 3]), &p(&[1, 3])).unwrap();
    assert!((v - r).abs() < 1e-8, "{v} vs {r}");

    let dom = DomainSpec::rectangle(3, 120).unwrap();
    let row = fundamental_matrix_green(&dom, &p(&[2, 2])).unwrap();
    let oracle = row.iter().find(|(x, _)| x.coords() == [1, 1]).unwrap().1;
    let v = semistrip_green(3, &p(&[2, 2]), &p(&[1, 1])).unwrap();
    assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
}

#[test]
fn rectangle_values_grow_with_height() {
    for (src, tgt) in [([1, 1], [1, 1]), ([2, 2], [3, 5]), ([3, 4], [1, 2])] {
        let mut last = 0.0;
        for n in 5..40 {
            let v = rect_green(4, n, &p(&src), &p(&tgt)).unwrap();
            assert!(v >= last * (1.0 - 1e-13), "n={n}: {v} < {last}");
            last = v;
        }
        let limit = semistrip_green(4, &p(&src), &p(&tgt)).unwrap();
        assert!(last <= limit + 1e-12 && limit - last < 1e-8);
    }
}

#[test]
fn deep_semistrip_rows_match_the_strip() {
    for m in [1usize, 4, 7] {
        for a in 1..=m as i64 {
            for q in 1..=m as i64 {
                for s in -5..=5 {
                    let v = semistrip_green(m, &p(&[a, 60]), &p(&[q, 60 + s])).unwrap();
                    let w = strip_green(m, a, q, s).unwrap();
                    assert!((v - w).abs() < 1e-8, "m={m} a={a} q={q} s={s}: {v} vs {w}");
                }
            }
        }
    }
}

#[test]
fn wide_strips_approach_the_halfplane() {
    // the strip sum is a trapezoid rule in the mode angle, so the gap
    // closes like 1/m^2; check both the trend and the extrapolated limit
    let spec = QuadratureSpec::with_tol(1e-11).unwrap();
    for (a, q, s) in [(1, 1, 0), (2, 2, 0), (1, 3, 2)] {
        let hp = halfplane_green(a, q, s, &spec).unwrap().value;
        let gaps: Vec<f64> = [100usize, 200, 401]
            .iter()
            .map(|&m| (strip_green(m, a, q, s).unwrap() - hp).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 1e-4);
        let (g1, g2) = (strip_green(400, a, q, s).unwrap(), strip_green(800, a, q, s).unwrap());
        let (h1, h2) = (401f64.recip().powi(2), 801f64.recip().powi(2));
        let limit = (g2 * h1 - g1 * h2) / (h1 - h2);
        assert!((limit - hp).abs() < 1e-8, "({a},{q},{s}): {limit} vs {hp}");
    }
}

#[test]
fn halfplane_residual_away_from_the_source() {
    let spec = QuadratureSpec::default();
    let f = |a, p, s| halfplane_green(a, p, s, &spec).unwrap().value;
    for (a, q, s) in [(1, 1, 0), (2, 4, 2), (3, 1, -2), (4, 4, 0)] {
        let around = f(a, q + 1, s + 1) + f(a, q + 1, s - 1) + f(a, q - 1, s + 1) + f(a, q - 1, s - 1);
        let delta = if a == q && s == 0 { 4.0 } else { 0.0 };
        let residual = 4.0 * f(a, q, s) - around - delta;
        assert!(residual.abs() < 1e-6, "({a},{q},{s}): {residual}");
    }
}

#[test]
fn width_one_columns_absorb_immediately() {
    assert_eq!(rect_green(1, 5, &p(&[1, 3]), &p(&[1, 3])).unwrap(), 1.0);
    assert_eq!(semistrip_green(1, &p(&[1, 4]), &p(&[1, 4])).unwrap(), 1.0);
    assert_eq!(semistrip_green(1, &p(&[1, 4]), &p(&[1, 2])).unwrap(), 0.0);
    assert_eq!(strip_green(1, 1, 1, 0).unwrap(), 1.0);
    assert_eq!(strip_green(1, 1, 1, 2).unwrap(), 0.0);
    assert_eq!(block_green(1, 1, 5, &p(&[1, 1, 3]), &p(&[1, 1, 3])).unwrap(), 1.0);
}

#[test]
fn absorption_examples() {
    let map = absorption_probs(&DomainSpec::rectangle(2, 2).unwrap(), &p(&[1, 1])).unwrap();
    assert_eq!(map.len(), 12);
    for (x, v) in map.entries() {
        let expected = match x.coords() {
            [0, 0] | [0, 2] | [2, 0] => 4.0 / 15.0,
            [1, 3] | [3, 1] | [3, 3] => 1.0 / 15.0,
            _ => 0.0,
        };
        assert!((v - expected).abs() < 1e-14, "{x}: {v}");
    }
    let map = absorption_probs(&DomainSpec::block(2, 2, 2).unwrap(), &p(&[1, 1, 1])).unwrap();
    let mut big = 0;
    let mut small = 0;
    for (_, v) in map.entries() {
        if (v - 8.0 / 63.0).abs() < 1e-14 {
            big += 1;
        } else if (v - 1.0 / 63.0).abs() < 1e-14 {
            small += 1;
        } else {
            assert!(v.abs() < 1e-15);
        }
    }
    assert_eq!((big, small), (7, 7));
}
