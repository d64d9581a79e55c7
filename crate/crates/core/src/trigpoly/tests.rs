use super::*;
use crate::rng;
use rand::Rng;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn k(v: &[i64]) -> Frequency {
    Frequency::from(v)
}

fn spec(dim: usize, terms: &[(&[i64], Complex64)]) -> SparseSpectrum {
    SparseSpectrum::from_terms(dim, terms.iter().map(|(f, v)| (k(f), *v))).unwrap()
}

fn random_spectrum(rng: &mut impl Rng, dim: usize, support: usize, n: i64) -> SparseSpectrum {
    let mut t = SparseSpectrum::new(dim);
    assert!(support <= (2 * n as usize + 1).pow(dim as u32));
    while t.len() < support {
        let f: Vec<i64> = (0..dim).map(|_| rng.gen_range(-n..=n)).collect();
        let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        t.insert(Frequency::new(f), v).unwrap();
    }
    t
}

#[test]
fn evaluate_examples() {
    let one = spec(1, &[(&[0], c(1.0, 0.0))]);
    assert_eq!(evaluate(&one, &[0.37]).unwrap(), c(1.0, 0.0));

    let e1 = spec(1, &[(&[1], c(1.0, 0.0))]);
    let v = evaluate(&e1, &[0.25]).unwrap();
    assert!((v - c(0.0, 1.0)).norm() < 1e-15);

    let cos2 = spec(1, &[(&[1], c(1.0, 0.0)), (&[-1], c(1.0, 0.0))]);
    assert!((evaluate(&cos2, &[0.0]).unwrap() - c(2.0, 0.0)).norm() < 1e-15);

    assert!(matches!(
        evaluate(&cos2, &[0.0, 0.1]),
        Err(Error::DimensionMismatch { expected: 1, found: 2 })
    ));
}

#[test]
fn grid_values_examples() {
    let cst = spec(1, &[(&[0], c(2.0, -1.0))]);
    let g = grid_values(&cst, &[4]).unwrap();
    assert_eq!(g.values(), &[c(2.0, -1.0); 4]);

    let e1 = spec(1, &[(&[1], c(1.0, 0.0))]);
    let g = grid_values(&e1, &[4]).unwrap();
    let want = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
    for (a, b) in g.values().iter().zip(want) {
        assert!((a - b).norm() < 1e-15, "{a} vs {b}");
    }

    let e10 = spec(2, &[(&[1, 0], c(1.0, 0.0))]);
    let g = grid_values(&e10, &[2, 2]).unwrap();
    let want = [[1.0, 1.0], [-1.0, -1.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((g.get(&[i, j]) - c(want[i][j], 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn grid_cap_is_enforced() {
    let t = spec(2, &[(&[1, 1], c(1.0, 0.0))]);
    assert!(matches!(
        grid_values_capped(&t, &[100, 100], 9_999),
        Err(Error::GridTooLarge { requested: 10_000, cap: 9_999 })
    ));
    assert!(grid_values_capped(&t, &[100, 100], 10_000).is_ok());
    assert!(matches!(lq_norm_capped(&t, 4.0, 8, 4), Err(Error::GridTooLarge { .. })));
}

#[test]
fn grid_matches_pointwise_evaluation() {
    let mut r = rng::stream(11, 0);
    for trial in 0..50 {
        let dim = 1 + trial % 3;
        let support = r.gen_range(1..=120);
        let n = r.gen_range(1..=8);
        let t = random_spectrum(&mut r, dim, support.min((2 * n as usize + 1).pow(dim as u32)), n);
        let shape: Vec<usize> = (0..dim).map(|_| r.gen_range(1..=12)).collect();
        let g = grid_values(&t, &shape).unwrap();
        let scale: f64 = t.iter().map(|(_, v)| v.norm()).sum();
        for flat in 0..g.values().len() {
            let idx = g.unflatten(flat);
            let direct = evaluate(&t, &g.point(&idx)).unwrap();
            let err = (g.values()[flat] - direct).norm() / scale;
            assert!(err <= 1e-12, "trial {trial}: rel err {err:e}");
        }
    }
}

#[test]
fn lq_norm_examples() {
    let single = spec(1, &[(&[3], c(1.0, 0.0))]);
    let n = lq_norm(&single, 2.0, 8).unwrap();
    assert_eq!(n.value, 1.0);
    assert_eq!(n.method, NormMethod::ParsevalExact);
    assert!(n.grid_points_per_axis.is_empty());

    // closed form: int_0^1 16 cos^4(2 pi x) dx = 6
    let cos2 = spec(1, &[(&[1], c(1.0, 0.0)), (&[-1], c(1.0, 0.0))]);
    let n4 = lq_norm(&cos2, 4.0, 8).unwrap();
    assert_eq!(n4.method, NormMethod::EvenQQuadrature);
    assert_eq!(n4.est_rel_error, 0.0);
    assert_eq!(n4.grid_points_per_axis, vec![5]);
    assert!((n4.value - 6f64.powf(0.25)).abs() < 1e-14, "{}", n4.value);

    let ninf = lq_norm(&cos2, f64::INFINITY, 16).unwrap();
    assert_eq!(ninf.method, NormMethod::OversampledGrid);
    assert!((ninf.value - 2.0).abs() < 1e-2);
    assert!(ninf.value <= 2.0 + 1e-15);
}

#[test]
fn lq_norm_non_even_q() {
    // int_0^1 |2 cos 2 pi x|^3 dx = 8 * 4 / (3 pi)
    let cos2 = spec(1, &[(&[1], c(1.0, 0.0)), (&[-1], c(1.0, 0.0))]);
    let exact = (32.0 / (3.0 * PI)).powf(1.0 / 3.0);
    let n = lq_norm(&cos2, 3.0, 8).unwrap();
    assert_eq!(n.method, NormMethod::OversampledGrid);
    assert_eq!(n.grid_points_per_axis, vec![24]);
    assert_eq!(n.est_rel_error, 1.0 / 64.0);
    assert!((n.value - exact).abs() / exact <= n.est_rel_error);

    assert!(lq_norm(&cos2, 3.0, 1).is_err());
    assert!(lq_norm(&cos2, 0.5, 8).is_err());
    assert!(lq_norm(&cos2, f64::NAN, 8).is_err());
}

#[test]
fn lq_norm_of_empty_is_zero() {
    let t = SparseSpectrum::new(3);
    for q in [1.0, 2.0, 3.5, 4.0, f64::INFINITY] {
        assert_eq!(lq_norm(&t, q, 8).unwrap().value, 0.0);
    }
}

#[test]
fn parseval_agrees_with_quadrature() {
    let mut r = rng::stream(12, 0);
    for trial in 0..100 {
        let dim = 1 + trial % 4;
        let n = r.gen_range(1..=16);
        let cap = (2 * n as usize + 1).pow(dim as u32);
        let support = r.gen_range(1..=200).min(cap);
        let t = random_spectrum(&mut r, dim, support, n);
        let p = lq_norm(&t, 2.0, 8).unwrap().value;
        let g = even_q_norm(&t, 2).unwrap().value;
        assert!((p - g).abs() <= 1e-10 * p, "trial {trial}: {p} vs {g}");
    }
}

#[test]
fn norms_are_monotone_in_q() {
    let mut r = rng::stream(13, 0);
    for trial in 0..40 {
        let dim = 1 + trial % 2;
        let t = random_spectrum(&mut r, dim, 8, 4);
        let vals: Vec<f64> = [2.0, 4.0, 6.0, 8.0].iter().map(|&q| lq_norm(&t, q, 8).unwrap().value).collect();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] * (1.0 + 1e-8), "{vals:?}");
        }
        let inf = lq_norm(&t, f64::INFINITY, 16).unwrap().value;
        assert!(vals[0] <= inf * (1.0 + 1e-8));
    }
}

#[test]
fn a_theta_examples() {
    let t = spec(2, &[(&[1, 1], c(0.0, 5.0))]);
    for theta in [0.3, 1.0, 2.0, f64::INFINITY] {
        assert!((a_theta_norm(&t, theta).unwrap() - 5.0).abs() < 1e-14);
    }
    let t = spec(1, &[(&[0], c(3.0, 0.0)), (&[1], c(4.0, 0.0))]);
    assert_eq!(a_theta_norm(&t, 2.0).unwrap(), 5.0);
    assert_eq!(a_theta_norm(&t, f64::INFINITY).unwrap(), 4.0);
    let t = spec(1, &[(&[0], c(1.0, 0.0)), (&[1], c(1.0, 0.0)), (&[2], c(1.0, 0.0))]);
    assert_eq!(a_theta_norm(&t, 0.5).unwrap(), 9.0);
    assert!(a_theta_norm(&t, 0.0).is_err());
}

#[test]
fn rank_examples() {
    let t = spec(1, &[(&[0], c(0.5, 0.0)), (&[1], c(1.0, 0.0))]);
    let r = rank(&t);
    assert_eq!(r.order.iter().map(|(f, _)| f.clone()).collect::<Vec<_>>(), vec![k(&[1]), k(&[0])]);

    let t = spec(2, &[(&[1, 0], c(1.0, 0.0)), (&[0, 1], c(0.0, 1.0))]);
    let r = rank(&t);
    assert_eq!(r.order[0].0, k(&[0, 1]));
    assert_eq!(r.order[1].0, k(&[1, 0]));

    assert!(rank(&SparseSpectrum::new(3)).is_empty());
}

#[test]
fn recenter_examples() {
    let t = spec(1, &[(&[4], c(1.0, 2.0))]);
    let q = Cuboid::new(vec![4], vec![4]).unwrap();
    let (s, shift) = recenter(&t, &q).unwrap();
    assert_eq!(shift, k(&[-4]));
    assert_eq!(s.get(&k(&[0])), Some(c(1.0, 2.0)));

    let full: Vec<(&[i64], Complex64)> =
        vec![(&[0], c(1.0, 0.0)), (&[1], c(1.0, 0.0)), (&[2], c(1.0, 0.0))];
    let (s, shift) = recenter(&spec(1, &full), &Cuboid::new(vec![0], vec![2]).unwrap()).unwrap();
    assert_eq!(shift, k(&[-1]));
    assert!(s.frequencies().all(|f| f.max_abs() <= 1));

    // Q = [0,3]: floor(3/2) = 1, so {0,1,2,3} -> {-1,0,1,2} within [-2,2]
    let q = Cuboid::new(vec![0], vec![3]).unwrap();
    assert_eq!(q.half_widths(), vec![2]);
    let t = spec(1, &[(&[0], c(1.0, 0.0)), (&[1], c(2.0, 0.0)), (&[2], c(3.0, 0.0)), (&[3], c(4.0, 0.0))]);
    let (s, shift) = recenter(&t, &q).unwrap();
    assert_eq!(shift, k(&[-1]));
    let got: Vec<i64> = s.frequencies().map(|f| f.components()[0]).collect();
    assert_eq!(got, vec![-1, 0, 1, 2]);

    // negative odd sum rounds toward -inf: [-3, 0] -> floor(-1.5) = -2
    let q = Cuboid::new(vec![-3], vec![0]).unwrap();
    assert_eq!(q.midpoint(), k(&[-2]));

    let outside = spec(1, &[(&[9], c(1.0, 0.0))]);
    assert!(matches!(recenter(&outside, &q), Err(Error::OutsideCuboid(_))));
}

#[test]
fn recentered_support_fits_half_widths() {
    for a in -6i64..=6 {
        for b in a..=a + 9 {
            let q = Cuboid::new(vec![a], vec![b]).unwrap();
            let t = SparseSpectrum::from_terms(1, (a..=b).map(|x| (k(&[x]), c(1.0, 0.0)))).unwrap();
            let (s, _) = recenter(&t, &q).unwrap();
            let n = q.half_widths()[0];
            assert!(s.frequencies().all(|f| f.max_abs() <= n), "Q = [{a},{b}]");
        }
    }
}

#[test]
fn cuboid_cardinality() {
    let q = Cuboid::symmetric(&[8, 8]).unwrap();
    assert_eq!(q.cardinality(), Some(289));
    assert!((q.log_cardinality() - 289f64.ln()).abs() < 1e-12);
    assert!(Cuboid::new(vec![1], vec![0]).is_err());
    assert!(Cuboid::new(vec![0, 0], vec![1]).is_err());
}

#[test]
fn spectrum_arithmetic_prunes_zeros() {
    let a = spec(1, &[(&[0], c(1.0, 0.0)), (&[1], c(2.0, 0.0))]);
    let b = spec(1, &[(&[1], c(2.0, 0.0))]);
    let d = a.sub(&b).unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d.add(&b).unwrap(), a);
    assert!(SparseSpectrum::from_terms(1, vec![(k(&[1]), c(1.0, 0.0)), (k(&[1]), c(2.0, 0.0))]).is_err());
    assert!(SparseSpectrum::from_terms(2, vec![(k(&[1]), c(1.0, 0.0))]).is_err());
    let mut e = SparseSpectrum::new(1);
    e.insert(k(&[2]), c(0.0, 0.0)).unwrap();
    assert!(e.is_empty());
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_spectrum() -> impl Strategy<Value = SparseSpectrum> {
        (1usize..=3).prop_flat_map(|dim| {
            prop::collection::vec(
                (prop::collection::vec(-6i64..=6, dim), -2.0f64..2.0, -2.0f64..2.0),
                0..30,
            )
            .prop_map(move |raw| {
                let mut t = SparseSpectrum::new(dim);
                for (f, re, im) in raw {
                    t.insert(Frequency::new(f), Complex64::new(re, im)).unwrap();
                }
                t
            })
        })
    }

    proptest! {
        #[test]
        fn rank_round_trips(t in arb_spectrum()) {
            let r = rank(&t);
            prop_assert_eq!(r.to_spectrum(), t.clone());
            let m: Vec<f64> = r.moduli().collect();
            for w in r.order.windows(2) {
                let (a, b) = (w[0].1.norm(), w[1].1.norm());
                prop_assert!(a > b || (a == b && w[0].0 < w[1].0));
            }
            prop_assert_eq!(m.len(), t.len());
        }

        #[test]
        fn recenter_preserves_a_theta(t in arb_spectrum(), lo in -3i64..=0, width in 15i64..=18) {
            let q = Cuboid::new(vec![lo - 6; t.dim()], vec![lo - 6 + width; t.dim()]).unwrap();
            let (s, _) = recenter(&t, &q).unwrap();
            for theta in [0.5, 1.0, 2.0] {
                prop_assert_eq!(a_theta_norm(&s, theta).unwrap(), a_theta_norm(&t, theta).unwrap());
            }
        }

        #[test]
        fn spectrum_file_round_trips(t in arb_spectrum()) {
            prop_assert_eq!(io::parse_spectrum(&io::format_spectrum(&t)).unwrap(), t);
        }
    }
}
