//! Drift `|f(x) − x|` along explicit witness sequences.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::linalg::{norm, symmetric_eigen, MatrixN, VectorN};
use crate::maps::{replication_disk, DiskMap, MapExpr, SpiralKind, SpiralProfile};

/// Trailing entries that must increase strictly for an "exceeds" verdict.
pub const GROWTH_WINDOW: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftVerdict {
    BoundedBelowThreshold,
    ExceedsThresholdWithGrowth,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub witnesses: Vec<Vec<f64>>,
    pub drifts: Vec<f64>,
    pub threshold: f64,
    pub verdict: DriftVerdict,
}

/// "Exceeds" iff the last drift is above `threshold` and the final
/// [`GROWTH_WINDOW`] drifts increase strictly.
pub fn drift_verdict(drifts: &[f64], threshold: f64) -> DriftVerdict {
    let n = drifts.len();
    let growing = n >= GROWTH_WINDOW && drifts[n - GROWTH_WINDOW..].windows(2).all(|w| w[1] > w[0]);
    if growing && drifts[n - 1] > threshold {
        DriftVerdict::ExceedsThresholdWithGrowth
    } else {
        DriftVerdict::BoundedBelowThreshold
    }
}

pub fn drift_profile(m: &MapExpr, witnesses: &[VectorN], threshold: f64) -> Result<DriftReport> {
    if witnesses.is_empty() {
        return Err(GeomError::NoWitness);
    }
    let mut drifts = Vec::with_capacity(witnesses.len());
    for w in witnesses {
        if w.dim() != m.dim() {
            return Err(GeomError::DimMismatch {
                expected: m.dim(),
                got: w.dim(),
            });
        }
        drifts.push(norm(&m.displacement(w)));
    }
    Ok(DriftReport {
        witnesses: witnesses.iter().map(|w| w.to_vec()).collect(),
        verdict: drift_verdict(&drifts, threshold),
        drifts,
        threshold,
    })
}

/// Witnesses `4^k e_1 + 2^k x₀` for the disk-replication map.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiWitnesses {
    /// The base point actually used: x₀ with its first coordinate rounded
    /// to a multiple of 2^(K−52), so every witness is exactly representable.
    pub base: Vec<f64>,
    /// `g(base) − base`.
    pub base_drift: f64,
    pub points: Vec<VectorN>,
}

pub fn psi_drift_witnesses(g: &DiskMap, x0: &VectorN, k_max: u32) -> Result<PsiWitnesses> {
    if x0.dim() != g.dim() {
        return Err(GeomError::DimMismatch {
            expected: g.dim(),
            got: x0.dim(),
        });
    }
    if x0.norm() > 1.0 {
        return Err(GeomError::InvalidPoint(
            "base point outside the unit disk".into(),
        ));
    }
    let mut base = x0.to_vec();
    let quantum = 2f64.powi(k_max.min(52) as i32 - 52);
    base[0] = (base[0] / quantum).round() * quantum;
    let gx = g.apply(&base);
    let base_drift = crate::linalg::dist(&gx, &base);
    if base_drift == 0.0 {
        return Err(GeomError::TrivialWitness);
    }
    let points = (1..=k_max)
        .map(|k| {
            let (c, rad) = replication_disk(k);
            let mut p: Vec<f64> = base.iter().map(|v| v * rad).collect();
            p[0] += c;
            VectorN::new(p)
        })
        .collect::<Result<_>>()?;
    Ok(PsiWitnesses {
        base,
        base_drift,
        points,
    })
}

/// Dilates of a direction: `2^k x` for k = 1..K.
pub fn ray_witnesses(x: &VectorN, k_max: u32) -> Vec<VectorN> {
    (1..=k_max)
        .map(|k| VectorN::from_vec_unchecked(x.iter().map(|c| c * 2f64.powi(k as i32)).collect()))
        .collect()
}

/// Witnesses for a spiral map with a non-identity limit.
#[derive(Clone, Debug, PartialEq)]
pub struct SpiralWitnesses {
    pub points: Vec<VectorN>,
    /// Closed-form drift at each point: `2·sin(θ/2)·|x_k|`.
    pub predicted: Vec<f64>,
}

/// Largest rotation angle of `a` in SO(n), with a unit vector attaining
/// it: the top eigenpair of `2I − A − Aᵀ`, whose eigenvalue is
/// `|Av − v|² = 4 sin²(θ/2)`.
pub fn max_rotation(a: &MatrixN) -> (f64, Vec<f64>) {
    let n = a.dim();
    let s = MatrixN::identity(n).scale(2.0).sub(a).sub(&a.transpose());
    let (vals, vecs) = symmetric_eigen(&s);
    let top = vals[0].clamp(0.0, 4.0);
    let v: Vec<f64> = (0..n).map(|i| vecs.get(i, 0)).collect();
    (2.0 * (top.sqrt() / 2.0).asin(), v)
}

/// Points `x_k` of growing norm on which the spiral map rotates by an
/// angle bounded away from zero.
///
/// * constant A: `x_k = 2^k v` with v on the widest rotation plane of A;
/// * log spiral R(c·ln t): `|x_k| = exp((π + 2πk)/c)`, where the rotation
///   angle is exactly π;
/// * cutoff profiles are the identity far out and have no witnesses.
pub fn spiral_drift_witnesses(p: &SpiralProfile, k_max: u32) -> Result<SpiralWitnesses> {
    let n = p.dim();
    match p.kind() {
        SpiralKind::Constant(a) => {
            let (theta, v) = max_rotation(a);
            if theta < 1e-6 {
                return Err(GeomError::NoWitness);
            }
            let chord = 2.0 * (theta / 2.0).sin();
            let (points, predicted) = (1..=k_max)
                .map(|k| {
                    let r = 2f64.powi(k as i32);
                    (
                        VectorN::from_vec_unchecked(v.iter().map(|c| c * r).collect()),
                        chord * r,
                    )
                })
                .unzip();
            Ok(SpiralWitnesses { points, predicted })
        }
        SpiralKind::LogSpiral { c, plane } => {
            if c.abs() < 1e-6 {
                return Err(GeomError::NoWitness);
            }
            let mut points = Vec::new();
            let mut predicted = Vec::new();
            for k in 1..=k_max {
                let r = ((std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64) / c.abs())
                    .exp();
                if !r.is_finite() || r > 1e300 {
                    break;
                }
                let mut x = vec![0.0; n];
                x[plane.0] = r;
                points.push(VectorN::from_vec_unchecked(x));
                predicted.push(2.0 * r);
            }
            if points.is_empty() {
                return Err(GeomError::NoWitness);
            }
            Ok(SpiralWitnesses { points, predicted })
        }
        SpiralKind::Cutoff { .. } => Err(GeomError::NoWitness),
    }
}
