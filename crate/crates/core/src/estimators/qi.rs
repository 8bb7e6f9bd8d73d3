//! Quasi-isometry checks and covering-radius (C-density) estimates.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bilip::CLAIM_TOLERANCE;
use super::sampler::{pair_chunk, Region, SamplerConfig};
use super::stream::chunk_count;
use crate::error::{GeomError, Result};
use crate::linalg::{norm, VectorN};
use crate::maps::MapExpr;

/// Metric on the sampled space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    /// `|(a, b)|₁ = |a| + |b|` with Euclidean blocks `a = x[..split]`,
    /// `b = x[split..]`.
    ProductL1 {
        split: usize,
    },
}

impl Metric {
    pub fn length(&self, v: &[f64]) -> f64 {
        match *self {
            Metric::Euclidean => norm(v),
            Metric::ProductL1 { split } => norm(&v[..split]) + norm(&v[split..]),
        }
    }

    pub fn dist(&self, x: &[f64], y: &[f64]) -> f64 {
        self.length(&crate::linalg::sub(x, y))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiParams {
    pub lambda: f64,
    pub eps: f64,
    pub metric: Metric,
    pub c_density: Option<f64>,
}

impl QiParams {
    pub fn new(lambda: f64, eps: f64, metric: Metric) -> Result<Self> {
        if !(lambda >= 1.0 && eps >= 0.0 && lambda.is_finite() && eps.is_finite()) {
            return Err(GeomError::InvalidSampler(format!(
                "invalid QI parameters ({lambda}, {eps})"
            )));
        }
        Ok(Self {
            lambda,
            eps,
            metric,
            c_density: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QiCheck {
    pub pass: bool,
    pub params: QiParams,
    /// Largest `max(d_f − (λd + ε), (d/λ − ε) − d_f)` seen; <= 0 when every
    /// pair satisfies both inequalities outright.
    pub worst_margin: f64,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
    pub violations: usize,
    pub n_pairs: usize,
}

/// `f(x) − f(y)` formed from structural displacements.
pub(crate) fn image_diff(m: &MapExpr, x: &[f64], y: &[f64]) -> Vec<f64> {
    let (px, py) = (m.displacement(x), m.displacement(y));
    x.iter()
        .zip(y)
        .zip(px.iter().zip(&py))
        .map(|((a, b), (c, d))| (a - b) + (c - d))
        .collect()
}

struct ChunkQi {
    worst: f64,
    pair: Option<(Vec<f64>, Vec<f64>)>,
    violations: usize,
}

/// Checks `(1/λ)d(x,y) − ε <= d(f(x),f(y)) <= λ·d(x,y) + ε` on every
/// sampled pair. A pair violates when it misses a bound by more than
/// `1e-6·(λd + ε)`.
pub fn qi_embedding_check(
    m: &MapExpr,
    lambda: f64,
    eps: f64,
    metric: Metric,
    cfg: &SamplerConfig,
) -> Result<QiCheck> {
    let params = QiParams::new(lambda, eps, metric)?;
    cfg.validate()?;
    if let Metric::ProductL1 { split } = metric {
        if split == 0 || split >= m.dim() {
            return Err(GeomError::InvalidSampler(format!(
                "product split {split} out of range"
            )));
        }
    }
    let chunks: Vec<ChunkQi> = (0..chunk_count(cfg.n_pairs))
        .into_par_iter()
        .map(|c| {
            let mut out = ChunkQi {
                worst: f64::NEG_INFINITY,
                pair: None,
                violations: 0,
            };
            for p in pair_chunk(m, cfg, "qi", c) {
                let d = metric.dist(&p.x, &p.y);
                let df = metric.length(&image_diff(m, &p.x, &p.y));
                let upper = lambda * d + eps;
                let margin = (df - upper).max((d / lambda - eps) - df);
                if margin > CLAIM_TOLERANCE * upper {
                    out.violations += 1;
                }
                if margin > out.worst {
                    out.worst = margin;
                    out.pair = Some((p.x, p.y));
                }
            }
            out
        })
        .collect();
    let mut check = QiCheck {
        pass: true,
        params,
        worst_margin: f64::NEG_INFINITY,
        worst_pair: None,
        violations: 0,
        n_pairs: cfg.n_pairs,
    };
    for c in chunks {
        check.violations += c.violations;
        if c.worst > check.worst_margin {
            check.worst_margin = c.worst;
            check.worst_pair = c.pair;
        }
    }
    check.pass = check.violations == 0;
    Ok(check)
}

/// Lattice points `lo + k·step` of the region's bounding box that lie in
/// the region.
pub fn grid_points(region: &Region, step: f64) -> Result<Vec<Vec<f64>>> {
    region.validate()?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(GeomError::InvalidSampler(
            "grid step must be positive".into(),
        ));
    }
    let (lo, hi) = region.bounding_box();
    let counts: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| ((b - a) / step).floor() as usize + 1)
        .collect();
    let total: usize = counts.iter().product();
    let mut out = Vec::new();
    for code in 0..total {
        let mut rem = code;
        let p: Vec<f64> = counts
            .iter()
            .zip(&lo)
            .map(|(&c, &a)| {
                let k = rem % c;
                rem /= c;
                a + k as f64 * step
            })
            .collect();
        if region.contains(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(GeomError::EmptyRegion);
    }
    Ok(out)
}

struct HashGrid {
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<Vec<f64>>,
    key_lo: Vec<i64>,
    key_hi: Vec<i64>,
}

impl HashGrid {
    fn new(points: Vec<Vec<f64>>, cell: f64) -> Self {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        let n = points[0].len();
        let (mut lo, mut hi) = (vec![i64::MAX; n], vec![i64::MIN; n]);
        for (i, p) in points.iter().enumerate() {
            let key: Vec<i64> = p.iter().map(|c| (c / cell).floor() as i64).collect();
            for k in 0..n {
                lo[k] = lo[k].min(key[k]);
                hi[k] = hi[k].max(key[k]);
            }
            cells.entry(key).or_default().push(i);
        }
        Self {
            cell,
            cells,
            points,
            key_lo: lo,
            key_hi: hi,
        }
    }

    fn nearest(&self, q: &[f64]) -> f64 {
        let n = q.len();
        let centre: Vec<i64> = q.iter().map(|c| (c / self.cell).floor() as i64).collect();
        // Chebyshev distance to the farthest occupied cell
        let last_ring = centre
            .iter()
            .zip(self.key_lo.iter().zip(&self.key_hi))
            .map(|(c, (a, b))| (c - a).abs().max((b - c).abs()))
            .max()
            .unwrap_or(0);
        let mut best = f64::INFINITY;
        let mut ring = 0i64;
        loop {
            let span = 2 * ring + 1;
            let total = span.pow(n as u32);
            for code in 0..total {
                let mut rem = code;
                let mut key = Vec::with_capacity(n);
                let mut on_ring = false;
                for &c in &centre {
                    let off = rem % span - ring;
                    rem /= span;
                    on_ring |= off.abs() == ring;
                    key.push(c + off);
                }
                if !on_ring {
                    continue;
                }
                if let Some(ids) = self.cells.get(&key) {
                    for &i in ids {
                        best = best.min(crate::linalg::dist(q, &self.points[i]));
                    }
                }
            }
            // cells beyond this ring are at least ring·cell away
            if best <= ring as f64 * self.cell || ring >= last_ring {
                return best;
            }
            ring += 1;
        }
    }
}

/// Covering radius of `f(domain grid)` over the target grid: the largest
/// distance from a target lattice point to the nearest image point.
pub fn c_density_on(m: &MapExpr, target: &Region, domain: &Region, grid_step: f64) -> Result<f64> {
    let targets = grid_points(target, grid_step)?;
    let images: Vec<Vec<f64>> = grid_points(domain, grid_step)?
        .par_iter()
        .map(|x| m.apply(x))
        .collect();
    let grid = HashGrid::new(images, grid_step);
    Ok(targets
        .par_iter()
        .map(|q| grid.nearest(q))
        .reduce(|| 0.0, f64::max))
}

/// [`c_density_on`] with the domain grown from the target box by the
/// largest displacement of f⁻¹ (or f, if not invertible) seen on the
/// target grid, on the same lattice.
pub fn c_density(m: &MapExpr, region: &Region, grid_step: f64) -> Result<f64> {
    let targets = grid_points(region, grid_step)?;
    let invertible = m.is_invertible();
    let margin = targets
        .par_iter()
        .map(|y| {
            if invertible {
                let v = VectorN::new(y.clone()).expect("finite grid point");
                let x = m.eval_inverse(&v).expect("invertible");
                crate::linalg::dist(&x, y)
            } else {
                norm(&m.displacement(y))
            }
        })
        .reduce(|| 0.0, f64::max);
    let pad = ((margin / grid_step).ceil() + 2.0) * grid_step;
    let (lo, hi) = region.bounding_box();
    let domain = Region::Box {
        lo: lo.iter().map(|c| c - pad).collect(),
        hi: hi.iter().map(|c| c + pad).collect(),
    };
    c_density_on(m, region, &domain, grid_step)
}
