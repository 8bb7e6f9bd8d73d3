use proptest::prelude::*;
use qigeom::estimators::psi_drift_witnesses;
use qigeom::maps::{
    compose, disk_replication, from_text, locate_replication_disk, locate_translated_disk,
    make_latitude_sphere_map, make_twist_disk_map, product_map, radial_extension, spiral_map,
    to_text, translated_replication, AngleProfile, Knot, Replicas,
};
use qigeom::pl::pl_twist_example;
use qigeom::{DiskMap, MapExpr, SpiralProfile, VectorN};

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// C¹ piecewise-cubic angle profiles vanishing to first order at r = 1.
fn profile() -> impl Strategy<Value = AngleProfile> {
    (-3.0f64..3.0, 0.1f64..0.9, -3.0f64..3.0, -5.0f64..5.0).prop_map(|(v0, rm, vm, sm)| {
        AngleProfile::new(vec![
            Knot {
                r: 0.0,
                value: v0,
                slope: 0.0,
            },
            Knot {
                r: rm,
                value: vm,
                slope: sm,
            },
            Knot {
                r: 1.0,
                value: 0.0,
                slope: 0.0,
            },
        ])
        .unwrap()
    })
}

fn twist(n: usize) -> impl Strategy<Value = DiskMap> {
    (profile(), 0..n, 1..n).prop_map(move |(p, i, d)| {
        let j = (i + d) % n;
        make_twist_disk_map(p, i.min(j), i.max(j), n).unwrap()
    })
}

fn point(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, n)
}

/// Builtin constructors of every node kind in dimension `n`.
fn builtins(n: usize, g: DiskMap, beta: f64, c: f64) -> Vec<MapExpr> {
    let phi = make_latitude_sphere_map(beta, VectorN::basis(n, 0)).unwrap();
    let spiral = SpiralProfile::log_spiral(c, 0, 1, n).unwrap();
    vec![
        radial_extension(phi.clone()),
        disk_replication(g.clone()),
        translated_replication(Replicas::Uniform(g.clone())).unwrap(),
        spiral_map(spiral.clone()),
        compose(radial_extension(phi), spiral_map(spiral)).unwrap(),
        MapExpr::pl(pl_twist_example(n, 4, 0.5).unwrap()).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radial_and_spiral_preserve_norm(
        beta in -0.9f64..0.9, c in -3.0f64..3.0, n in 2usize..=4,
        x in point(4, 1e4),
    ) {
        let x = &x[..n];
        let phi = make_latitude_sphere_map(beta, VectorN::basis(n, n - 1)).unwrap();
        for m in [radial_extension(phi), spiral_map(SpiralProfile::log_spiral(c, 0, n - 1, n).unwrap())] {
            let y = m.eval_slice(x).unwrap();
            prop_assert!((norm(&y) - norm(x)).abs() <= 1e-9 * norm(x).max(1.0));
        }
    }

    #[test]
    fn replications_fix_points_off_their_disks(g in twist(2), x in point(2, 5e3)) {
        let psi = disk_replication(g.clone());
        if locate_replication_disk(&x).is_none() {
            prop_assert_eq!(psi.eval_slice(&x).unwrap(), x.clone());
        }
        let phi = translated_replication(Replicas::Uniform(g)).unwrap();
        if locate_translated_disk(&x).is_none() {
            prop_assert_eq!(phi.eval_slice(&x).unwrap(), x);
        }
    }

    #[test]
    fn psi_is_a_homomorphism(g in twist(3), h in twist(3), x in point(3, 300.0)) {
        let gh = DiskMap::composed(vec![g.clone(), h.clone()]).unwrap();
        let lhs = disk_replication(gh).eval_slice(&x).unwrap();
        let rhs = compose(disk_replication(g), disk_replication(h)).unwrap().eval_slice(&x).unwrap();
        prop_assert!(dist(&lhs, &rhs) <= 1e-9 * norm(&x).max(1.0));
    }

    #[test]
    fn inverse_round_trips(
        g in twist(2), beta in -0.9f64..0.9, c in -2.0f64..2.0, x in point(2, 60.0),
    ) {
        for m in builtins(2, g, beta, c) {
            let v = VectorN::new(x.clone()).unwrap();
            let back = m.eval_inverse(&m.eval(&v).unwrap()).unwrap();
            prop_assert!(back.dist(&v) <= 1e-9 * v.norm().max(1.0), "{}: {:?}", to_text(&m), back);
        }
    }

    #[test]
    fn text_round_trip_is_exact(g in twist(2), beta in -0.9f64..0.9, c in -2.0f64..2.0, x in point(4, 40.0)) {
        let mut maps = builtins(2, g.clone(), beta, c);
        maps.push(product_map(disk_replication(g), spiral_map(SpiralProfile::log_spiral(c, 0, 1, 2).unwrap())));
        for m in maps {
            let text = to_text(&m);
            let back = from_text(&text).unwrap();
            prop_assert_eq!(&to_text(&back), &text);
            let x = &x[..m.dim()];
            prop_assert_eq!(back.eval_slice(x).unwrap(), m.eval_slice(x).unwrap());
        }
    }

    #[test]
    fn radial_drift_grows_without_bound(beta in prop_oneof![-0.9f64..-0.05, 0.05f64..0.9]) {
        let phi = make_latitude_sphere_map(beta, VectorN::basis(2, 0)).unwrap();
        let m = radial_extension(phi.clone());
        // a point the sphere map moves the most, sampled on a fine circle
        let u = (0..720)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 360.0;
                vec![t.cos(), t.sin()]
            })
            .max_by(|a, b| dist(&phi.apply(a), a).total_cmp(&dist(&phi.apply(b), b)))
            .unwrap();
        let drifts: Vec<f64> = (1..=40)
            .map(|k| {
                let x: Vec<f64> = u.iter().map(|c| c * 2f64.powi(k)).collect();
                dist(&m.eval_slice(&x).unwrap(), &x)
            })
            .collect();
        prop_assert!(drifts.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(drifts[39] > 1e6);
    }

    #[test]
    fn psi_drift_doubles_exactly(g in twist(2), x0 in point(2, 0.7)) {
        prop_assume!(norm(&x0) < 0.95);
        let w = psi_drift_witnesses(&g, &VectorN::new(x0).unwrap(), 40);
        prop_assume!(w.is_ok());
        let w = w.unwrap();
        prop_assume!(w.base_drift > 1e-6);
        let psi = disk_replication(g);
        // eval(p) − p would round 4ᵏ + 2ᵏ·g(x₀)₀ to ulp(4ᵏ); the structural
        // displacement stays exact at every k
        for (k, p) in w.points.iter().enumerate() {
            let d = norm(&psi.displacement(p.as_slice()));
            let expect = 2f64.powi(k as i32 + 1) * w.base_drift;
            prop_assert!((d - expect).abs() <= 1e-12 * expect, "k={} {d} vs {expect}", k + 1);
        }
    }
}
