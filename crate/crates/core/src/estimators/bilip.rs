//! Sampled lower bounds on bi-Lipschitz constants and refutation of
//! claimed upper bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampler::{pair_chunk, SamplePair, SamplerConfig};
use super::stream::chunk_count;
use crate::error::{GeomError, Result};
use crate::linalg::norm;
use crate::maps::MapExpr;

/// Pairs closer than this are skipped.
pub const MIN_SEPARATION: f64 = 1e-12;

/// Relative slack a sampled ratio must exceed a claim by to refute it.
pub const CLAIM_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `|f(x) − f(y)| / |x − y|`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilipEstimate {
    /// Max over sampled pairs of `max(r, 1/r)`.
    pub lambda_lower: f64,
    pub worst_pair: Option<WorstPair>,
    pub n_pairs_used: usize,
    pub seed: u64,
}

/// `|f(x) − f(y)| / |x − y|`, or `None` for coincident points.
///
/// The image difference is formed as `(x − y) + (d(x) − d(y))` with
/// `d = f − id` evaluated structurally, which keeps full precision when
/// the displacement is small next to |x|.
pub fn pair_ratio(m: &MapExpr, x: &[f64], y: &[f64]) -> Option<f64> {
    let dx: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let d = norm(&dx);
    if d < MIN_SEPARATION {
        return None;
    }
    let (px, py) = (m.displacement(x), m.displacement(y));
    let img: Vec<f64> = dx
        .iter()
        .zip(px.iter().zip(&py))
        .map(|(v, (a, b))| v + (a - b))
        .collect();
    Some(norm(&img) / d)
}

fn distortion(ratio: f64) -> f64 {
    ratio.max(1.0 / ratio)
}

struct ChunkBest {
    lambda: f64,
    pair: Option<(SamplePair, f64)>,
    used: usize,
}

fn scan_chunk(m: &MapExpr, cfg: &SamplerConfig, op: &str, chunk: usize) -> ChunkBest {
    let mut best = ChunkBest {
        lambda: 1.0,
        pair: None,
        used: 0,
    };
    for p in pair_chunk(m, cfg, op, chunk) {
        if let Some(r) = pair_ratio(m, &p.x, &p.y) {
            best.used += 1;
            let l = distortion(r);
            if best.pair.is_none() || l > best.lambda {
                best.lambda = l;
                best.pair = Some((p, r));
            }
        }
    }
    best
}

/// Sampled lower bound on every valid bi-Lipschitz constant of `m` on the
/// sampler region. Chunks are evaluated in parallel and reduced in stream
/// order, so the result is independent of thread count.
pub fn bilip_lower_bound(m: &MapExpr, cfg: &SamplerConfig) -> Result<BilipEstimate> {
    cfg.validate()?;
    if cfg.region.dim() != m.dim() {
        return Err(GeomError::DimMismatch {
            expected: m.dim(),
            got: cfg.region.dim(),
        });
    }
    let chunks: Vec<ChunkBest> = (0..chunk_count(cfg.n_pairs))
        .into_par_iter()
        .map(|c| scan_chunk(m, cfg, "bilip", c))
        .collect();
    let mut out = BilipEstimate {
        lambda_lower: 1.0,
        worst_pair: None,
        n_pairs_used: 0,
        seed: cfg.seed,
    };
    for c in chunks {
        out.n_pairs_used += c.used;
        if let Some((p, r)) = c.pair {
            if out.worst_pair.is_none() || c.lambda > out.lambda_lower {
                out.lambda_lower = c.lambda;
                out.worst_pair = Some(WorstPair {
                    x: p.x,
                    y: p.y,
                    ratio: r,
                });
            }
        }
    }
    if out.n_pairs_used == 0 {
        return Err(GeomError::InsufficientSamples);
    }
    Ok(out)
}

/// The first sampled pair whose distortion exceeds
/// `lambda_claim·(1 + 1e-6)`. `None` is absence of refutation, not proof.
pub fn falsify_bilip_bound(
    m: &MapExpr,
    lambda_claim: f64,
    cfg: &SamplerConfig,
) -> Result<Option<WorstPair>> {
    cfg.validate()?;
    if !(lambda_claim >= 1.0) {
        return Err(GeomError::InvalidSampler(format!(
            "claim {lambda_claim} below 1"
        )));
    }
    let limit = lambda_claim * (1.0 + CLAIM_TOLERANCE);
    let found: Vec<Option<WorstPair>> = (0..chunk_count(cfg.n_pairs))
        .into_par_iter()
        .map(|c| {
            pair_chunk(m, cfg, "bilip", c).into_iter().find_map(|p| {
                pair_ratio(m, &p.x, &p.y)
                    .filter(|&r| distortion(r) > limit)
                    .map(|ratio| WorstPair {
                        x: p.x,
                        y: p.y,
                        ratio,
                    })
            })
        })
        .collect();
    Ok(found.into_iter().flatten().next())
}
