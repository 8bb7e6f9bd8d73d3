//! Shared fixtures for the criterion benches.

use qigeom::estimators::{circle_cloud, PointCloud, Region, SamplerConfig};
use qigeom::maps::{
    disk_replication, make_latitude_sphere_map, make_twist_disk_map, radial_extension, spiral_map,
    AngleProfile,
};
use qigeom::pl::{pl_random_displacement, PLMap};
use qigeom::{MapExpr, SpiralProfile, VectorN};

pub const SEED: u64 = 20240917;

/// One representative map per construction, with the region it is sampled on.
pub fn constructions(n: usize) -> Vec<(&'static str, MapExpr, Region)> {
    let phi = make_latitude_sphere_map(0.5, VectorN::basis(n, 0)).expect("valid beta");
    let g = make_twist_disk_map(AngleProfile::bump(1.0), 0, 1, n).expect("valid plane");
    let p = SpiralProfile::log_spiral(1.0, 0, 1, n).expect("valid plane");
    vec![
        ("radial", radial_extension(phi), Region::ball(n, 100.0)),
        ("psi", disk_replication(g), Region::ball(n, 300.0)),
        ("spiral", spiral_map(p), Region::shell(n, 1e-3, 1e4)),
    ]
}

pub fn sampler(region: Region, pairs: usize) -> SamplerConfig {
    SamplerConfig::new(SEED, region, pairs).expect("valid sampler")
}

pub fn pl_map(n: usize, resolution: usize) -> PLMap {
    pl_random_displacement(n, resolution, 0.2, SEED).expect("amplitude keeps orientation")
}

pub fn circle(points: usize) -> PointCloud {
    circle_cloud(points, 1.0, SEED).expect("valid cloud")
}

/// Deterministic query points in [-1, 1]ⁿ.
pub fn grid_queries(n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            (0..n)
                .map(|k| ((i * (2 * k + 3) * 7919) % 2000) as f64 / 1000.0 - 0.9995)
                .collect()
        })
        .collect()
}
