//! Sampling configuration and the seeded pair stream shared by the
//! estimators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stream::{chunk_rng, unit_ball, unit_vector, CHUNK};
use crate::error::{GeomError, Result};
use crate::linalg::norm;
use crate::maps::{replication_disk, MapExpr, MapNode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// `r_min <= |x − center| <= r_max`, radius drawn log-uniformly.
    Shell {
        center: Vec<f64>,
        r_min: f64,
        r_max: f64,
    },
}

impl Region {
    /// The ball of radius `radius` about the origin.
    pub fn ball(n: usize, radius: f64) -> Self {
        Region::Ball {
            center: vec![0.0; n],
            radius,
        }
    }

    pub fn cube(n: usize, half_width: f64) -> Self {
        Region::Box {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
        }
    }

    pub fn shell(n: usize, r_min: f64, r_max: f64) -> Self {
        Region::Shell {
            center: vec![0.0; n],
            r_min,
            r_max,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } | Region::Shell { center, .. } => center.len(),
            Region::Box { lo, .. } => lo.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|c| c.is_finite());
        let ok = match self {
            Region::Ball { center, radius } => {
                !center.is_empty() && finite(center) && radius.is_finite() && *radius > 0.0
            }
            Region::Box { lo, hi } => {
                !lo.is_empty()
                    && lo.len() == hi.len()
                    && finite(lo)
                    && finite(hi)
                    && lo.iter().zip(hi).all(|(a, b)| a < b)
            }
            Region::Shell {
                center,
                r_min,
                r_max,
            } => {
                !center.is_empty()
                    && finite(center)
                    && *r_min > 0.0
                    && r_max.is_finite()
                    && r_min < r_max
            }
        };
        if ok {
            Ok(())
        } else {
            Err(GeomError::EmptyRegion)
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let off = |c: &[f64]| norm(&crate::linalg::sub(x, c));
        match self {
            Region::Ball { center, radius } => off(center) <= *radius,
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (a, b))| v >= a && v <= b),
            Region::Shell {
                center,
                r_min,
                r_max,
            } => {
                let r = off(center);
                r >= *r_min && r <= *r_max
            }
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Region::Ball { center, radius: r }
            | Region::Shell {
                center, r_max: r, ..
            } => (
                center.iter().map(|c| c - r).collect(),
                center.iter().map(|c| c + r).collect(),
            ),
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    /// Largest |x| over the region.
    pub fn extent(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        match self {
            Region::Ball { center, radius: r }
            | Region::Shell {
                center, r_max: r, ..
            } => norm(center) + r,
            Region::Box { .. } => norm(
                &lo.iter()
                    .zip(&hi)
                    .map(|(a, b)| a.abs().max(b.abs()))
                    .collect::<Vec<_>>(),
            ),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Region::Ball { center, radius } => unit_ball(rng, center.len())
                .into_iter()
                .zip(center)
                .map(|(u, c)| c + radius * u)
                .collect(),
            Region::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(a, b)| rng.gen_range(*a..=*b))
                .collect(),
            Region::Shell {
                center,
                r_min,
                r_max,
            } => {
                let r = rng.gen_range(r_min.ln()..=r_max.ln()).exp();
                unit_vector(rng, center.len())
                    .into_iter()
                    .zip(center)
                    .map(|(u, c)| c + r * u)
                    .collect()
            }
        }
    }
}

/// Fractions of global, local and construction-aware witness pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMix {
    pub global: f64,
    pub local: f64,
    pub witness: f64,
}

impl PairMix {
    pub fn new(global: f64, local: f64, witness: f64) -> Result<Self> {
        let parts = [global, local, witness];
        if parts.iter().any(|p| !(0.0..=1.0).contains(p))
            || ((global + local + witness) - 1.0).abs() > 1e-9
        {
            return Err(GeomError::InvalidSampler(format!(
                "pair mix ({global}, {local}, {witness}) must be fractions summing to 1"
            )));
        }
        Ok(Self {
            global,
            local,
            witness,
        })
    }

    pub fn global_only() -> Self {
        Self {
            global: 1.0,
            local: 0.0,
            witness: 0.0,
        }
    }
}

impl Default for PairMix {
    fn default() -> Self {
        Self {
            global: 0.4,
            local: 0.3,
            witness: 0.3,
        }
    }
}

/// Local pairs are `(x, x + h·u)` with `h = local_scale·max(1, |x|)`.
pub const DEFAULT_LOCAL_SCALE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub region: Region,
    pub n_pairs: usize,
    pub mix: PairMix,
    pub local_scale: f64,
}

impl SamplerConfig {
    pub fn new(seed: u64, region: Region, n_pairs: usize) -> Result<Self> {
        let cfg = Self {
            seed,
            region,
            n_pairs,
            mix: PairMix::default(),
            local_scale: DEFAULT_LOCAL_SCALE,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mix(mut self, mix: PairMix) -> Result<Self> {
        self.mix = mix;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        PairMix::new(self.mix.global, self.mix.local, self.mix.witness)?;
        if self.n_pairs == 0 {
            return Err(GeomError::InvalidSampler(
                "n_pairs must be at least 1".into(),
            ));
        }
        if !(self.local_scale > 0.0 && self.local_scale.is_finite()) {
            return Err(GeomError::InvalidSampler(
                "local scale must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A sample pair and its position in the stream.
#[derive(Clone, Debug)]
pub struct SamplePair {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// The pairs of chunk `chunk` of the stream `op` for map `m`.
pub fn pair_chunk(m: &MapExpr, cfg: &SamplerConfig, op: &str, chunk: usize) -> Vec<SamplePair> {
    let mut rng = chunk_rng(cfg.seed, op, chunk as u64);
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(cfg.n_pairs);
    (start..end)
        .map(|index| {
            let u: f64 = rng.gen();
            let (x, y) = if u < cfg.mix.global {
                (cfg.region.sample(&mut rng), cfg.region.sample(&mut rng))
            } else if u < cfg.mix.global + cfg.mix.local {
                local_pair(&cfg.region, cfg.local_scale, &mut rng)
            } else {
                witness_pair(m, cfg, &mut rng)
            };
            SamplePair { index, x, y }
        })
        .collect()
}

/// Points of chunk `chunk` of the point stream `op`.
pub fn point_chunk(
    region: &Region,
    seed: u64,
    op: &str,
    chunk: usize,
    total: usize,
) -> Vec<Vec<f64>> {
    let mut rng = chunk_rng(seed, op, chunk as u64);
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(total);
    (start..end).map(|_| region.sample(&mut rng)).collect()
}

/// The first `total` points of the stream `op`.
pub fn sample_points(region: &Region, seed: u64, op: &str, total: usize) -> Vec<Vec<f64>> {
    (0..super::stream::chunk_count(total))
        .flat_map(|c| point_chunk(region, seed, op, c, total))
        .collect()
}

fn offset<R: Rng>(x: &[f64], h: f64, rng: &mut R) -> Vec<f64> {
    unit_vector(rng, x.len())
        .into_iter()
        .zip(x)
        .map(|(u, c)| c + h * u)
        .collect()
}

fn local_pair<R: Rng>(region: &Region, scale: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let x = region.sample(rng);
    let h = scale * norm(&x).max(1.0);
    let y = offset(&x, h, rng);
    (x, y)
}

/// Log-uniform in [lo, hi].
fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// Pair (x, y) inside a disk of centre `c·e_1` and radius `rad` at a
/// log-uniform separation, so every scale of the disk is exercised.
fn in_disk_pair<R: Rng>(n: usize, c: f64, rad: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut x: Vec<f64> = unit_ball(rng, n).into_iter().map(|v| v * rad).collect();
    x[0] += c;
    let y = offset(&x, rad * log_uniform(rng, 1e-6, 0.5), rng);
    (x, y)
}

fn point_in_disk<R: Rng>(n: usize, c: f64, rad: f64, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = unit_ball(rng, n).into_iter().map(|v| v * rad).collect();
    x[0] += c;
    x
}

/// x just inside, y just outside the sphere of radius `rad` about `c·e_1`.
fn straddle_pair<R: Rng>(n: usize, c: f64, rad: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let u = unit_vector(rng, n);
    let (a, b) = (
        1.0 - log_uniform(rng, 1e-6, 0.2),
        1.0 + log_uniform(rng, 1e-6, 0.2),
    );
    let mut x: Vec<f64> = u.iter().map(|v| v * rad * a).collect();
    let mut y: Vec<f64> = u.iter().map(|v| v * rad * b).collect();
    x[0] += c;
    y[0] += c;
    (x, y)
}

/// A unit vector orthogonal to `x` (any unit vector if x = 0). Offsets
/// along it keep their length when projected back onto the sphere
/// through x, so equal-radius pairs never collapse to rounding scale.
pub(crate) fn tangent<R: Rng>(rng: &mut R, x: &[f64]) -> Vec<f64> {
    let r = norm(x);
    loop {
        let u = unit_vector(rng, x.len());
        if r == 0.0 {
            return u;
        }
        let along: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / r;
        let t: Vec<f64> = u.iter().zip(x).map(|(a, b)| a - along * b / r).collect();
        let nt = norm(&t);
        if nt > 1e-3 {
            return t.into_iter().map(|c| c / nt).collect();
        }
    }
}

/// Ray pairs (x, t·x) and equal-radius pairs for maps that commute with
/// dilation or preserve spheres about the origin.
fn radial_pair<R: Rng>(region: &Region, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let x = region.sample(rng);
    let r = norm(&x);
    if rng.gen::<bool>() {
        let t = log_uniform(rng, 0.5, 2.0);
        (x.clone(), x.iter().map(|c| c * t).collect())
    } else {
        let sigma = log_uniform(rng, 1e-4, 1.0);
        let u = tangent(rng, &x);
        let mut y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + sigma * r * b).collect();
        let ry = norm(&y);
        y.iter_mut().for_each(|c| *c *= r / ry);
        (x, y)
    }
}

fn witness_pair<R: Rng>(m: &MapExpr, cfg: &SamplerConfig, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let n = m.dim();
    let region = &cfg.region;
    let extent = region.extent();
    let candidate = match m.node() {
        MapNode::Psi(_) => {
            let disks: Vec<u32> = (0..40u32)
                .take_while(|&j| {
                    let (c, rad) = replication_disk(j);
                    c + rad <= extent
                })
                .collect();
            if disks.is_empty() {
                None
            } else {
                let j = disks[rng.gen_range(0..disks.len())];
                let (c, rad) = replication_disk(j);
                Some(match rng.gen_range(0..3) {
                    0 => in_disk_pair(n, c, rad, rng),
                    1 => {
                        let k = disks[rng.gen_range(0..disks.len())];
                        let (c2, rad2) = replication_disk(k);
                        (
                            point_in_disk(n, c, rad, rng),
                            point_in_disk(n, c2, rad2, rng),
                        )
                    }
                    _ => straddle_pair(n, c, rad, rng),
                })
            }
        }
        MapNode::Translated(_) => {
            let count = ((extent - 1.0) / 2.0).floor();
            if count < 0.0 {
                None
            } else {
                let j = rng.gen_range(0..=count as usize);
                let c = 2.0 * j as f64;
                Some(match rng.gen_range(0..3) {
                    0 => in_disk_pair(n, c, 1.0, rng),
                    1 => {
                        let k = rng.gen_range(0..=count as usize);
                        (
                            point_in_disk(n, c, 1.0, rng),
                            point_in_disk(n, 2.0 * k as f64, 1.0, rng),
                        )
                    }
                    _ => straddle_pair(n, c, 1.0, rng),
                })
            }
        }
        MapNode::RadialExt(_) | MapNode::Spiral(_) => Some(radial_pair(region, rng)),
        _ => None,
    };
    match candidate {
        Some((x, y)) if region.contains(&x) && region.contains(&y) => (x, y),
        _ => {
            let x = region.sample(rng);
            let h = norm(&x).max(1.0) * log_uniform(rng, 1e-4, 1e-1);
            let y = offset(&x, h, rng);
            (x, y)
        }
    }
}
