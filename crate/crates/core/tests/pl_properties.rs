use proptest::prelude::*;
use qigeom::linalg::operator_norm;
use qigeom::pl::{kuhn_triangulation, pl_affine, pl_random_displacement, PLMap};
use qigeom::{MatrixN, VectorN};

fn unit(v: &[f64]) -> Vec<f64> {
    let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter().map(|c| c / r).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simplices_tile_the_box(n in 1usize..=4, res in 1usize..=4, lo in -3.0f64..0.0, w in 0.5f64..4.0) {
        let t = kuhn_triangulation(n, lo, lo + w, res).unwrap();
        let factorial: usize = (1..=n).product();
        prop_assert_eq!(t.simplex_count(), res.pow(n as u32) * factorial);
        prop_assert_eq!(t.vertex_count(), (res + 1).pow(n as u32));
        let total = t.simplex_volume() * t.simplex_count() as f64;
        prop_assert!((total / w.powi(n as i32) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn evaluation_is_continuous_across_faces(
        n in 2usize..=3, seed in any::<u64>(), x in prop::collection::vec(-0.99f64..0.99, 3),
        u in prop::collection::vec(-1.0f64..1.0, 3),
    ) {
        let f = pl_random_displacement(n, 6, 0.2, seed).unwrap();
        let (x, u) = (&x[..n], &u[..n]);
        prop_assume!(u.iter().map(|c| c * c).sum::<f64>() > 1e-4);
        let u = unit(u);
        let h = 1e-9;
        let a: Vec<f64> = x.iter().zip(&u).map(|(p, d)| p + h * d).collect();
        let b: Vec<f64> = x.iter().zip(&u).map(|(p, d)| p - h * d).collect();
        let (fa, fb) = (f.eval(&a).unwrap(), f.eval(&b).unwrap());
        let gap: f64 = fa.iter().zip(&fb).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        let (norm, _) = f.differential_norm().unwrap();
        prop_assert!(gap <= 2.0 * h * norm * (1.0 + 1e-6) + 1e-12);
    }

    #[test]
    fn affine_maps_have_exact_norms(
        n in 1usize..=4, entries in prop::collection::vec(-3.0f64..3.0, 16), b in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let m = MatrixN::new(n, entries[..n * n].to_vec()).unwrap();
        let t = kuhn_triangulation(n, -1.0, 1.0, 3).unwrap();
        let f = pl_affine(t, &m, &VectorN::new(b[..n].to_vec()).unwrap()).unwrap();
        let (norm, _) = f.differential_norm().unwrap();
        let op = operator_norm(&m).unwrap();
        prop_assert!((norm - op).abs() <= 1e-10 * op.max(1.0));
    }

    #[test]
    fn random_displacements_fix_the_boundary_and_keep_orientation(n in 1usize..=3, res in 2usize..=8, seed in any::<u64>()) {
        let f = pl_random_displacement(n, res, 0.2, seed).unwrap();
        let t = f.triangulation();
        for v in (0..t.vertex_count()).filter(|&v| t.is_boundary_vertex(v)) {
            prop_assert_eq!(f.vertex_image(v), &t.vertex_position(v)[..]);
        }
        prop_assert!(f.validate().passes());
    }

    #[test]
    fn csv_round_trip(n in 1usize..=3, seed in any::<u64>()) {
        let f = pl_random_displacement(n, 4, 0.2, seed).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = PLMap::read_csv(&buf[..]).unwrap();
        for v in 0..f.triangulation().vertex_count() {
            prop_assert_eq!(f.vertex_image(v), g.vertex_image(v));
        }
    }

    #[test]
    fn bilipschitz_certificate_is_sound(seed in any::<u64>(), pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 200)) {
        let f = pl_random_displacement(2, 6, 0.2, seed).unwrap();
        let lambda = f.bilip_constant().unwrap();
        for (a, b, c, d) in pts {
            let (x, y) = ([a, b], [c, d]);
            let dxy = ((a - c).powi(2) + (b - d).powi(2)).sqrt();
            prop_assume!(dxy > 1e-9);
            let (fx, fy) = (f.eval(&x).unwrap(), f.eval(&y).unwrap());
            let r = ((fx[0] - fy[0]).powi(2) + (fx[1] - fy[1]).powi(2)).sqrt() / dxy;
            prop_assert!(r.max(1.0 / r) <= lambda * (1.0 + 1e-6), "{r} vs {lambda}");
        }
    }
}
