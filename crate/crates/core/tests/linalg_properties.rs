use proptest::prelude::*;
use qigeom::linalg::{frobenius_norm, operator_norm, rotation_matrix, sphere_geodesic};
use qigeom::MatrixN;

fn matrix() -> impl Strategy<Value = MatrixN> {
    (1usize..=8).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |d| MatrixN::new(n, d).unwrap())
    })
}

fn unit_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..=5).prop_flat_map(|n| {
        let v = prop::collection::vec(-1.0f64..1.0, n)
            .prop_filter("nonzero", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-6)
            .prop_map(|v| {
                let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                v.into_iter().map(|c| c / r).collect::<Vec<_>>()
            });
        (v.clone(), v)
    })
}

fn chord(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #[test]
    fn operator_below_frobenius_below_sqrt_n_operator(m in matrix()) {
        let (op, fro) = (operator_norm(&m).unwrap(), frobenius_norm(&m).unwrap());
        let slack = 1e-12 * fro.max(1e-300);
        prop_assert!(op <= fro + slack, "{op} > {fro}");
        prop_assert!(fro <= (m.dim() as f64).sqrt() * op + slack);
    }

    #[test]
    fn operator_norm_bounds_every_image(m in matrix(), seed in prop::collection::vec(-5.0f64..5.0, 8)) {
        let x = &seed[..m.dim()];
        let op = operator_norm(&m).unwrap();
        let mx = m.mul_vec(x);
        let (lhs, rhs) = (chord(&mx, &vec![0.0; x.len()]), op * chord(x, &vec![0.0; x.len()]));
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn sphere_geodesic_between_chord_and_pi_over_two_chord((x, y) in unit_pair()) {
        let (g, d) = (sphere_geodesic(&x, &y).unwrap(), chord(&x, &y));
        prop_assert!(g >= d * (1.0 - 1e-12));
        prop_assert!(g <= std::f64::consts::FRAC_PI_2 * d * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn rotations_compose_additively(n in 2usize..=6, a in -7.0f64..7.0, b in -7.0f64..7.0, i in 0usize..6, j in 0usize..6) {
        prop_assume!(i < j && j < n);
        let ra = rotation_matrix(i, j, a, n).unwrap();
        let rb = rotation_matrix(i, j, b, n).unwrap();
        let rab = rotation_matrix(i, j, a + b, n).unwrap();
        let prod = ra.matmul(&rb);
        for (p, q) in prod.entries().iter().zip(rab.entries()) {
            prop_assert!((p - q).abs() <= 1e-12, "{p} vs {q}");
        }
    }
}
