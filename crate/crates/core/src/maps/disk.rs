//! Homeomorphisms of the closed unit disk fixing its boundary sphere,
//! extended by the identity outside the open unit ball.

use std::sync::Arc;

use super::profile::AngleProfile;
use crate::error::{GeomError, Result};
use crate::linalg::{check_plane, norm, rotate_in_plane, VectorN};
use crate::pl::PLMap;

#[derive(Clone, Debug, PartialEq)]
pub enum DiskKind {
    /// x ↦ R_ij(θ(|x|))·x.
    Twist {
        profile: AngleProfile,
        plane: (usize, usize),
    },
    /// x ↦ s·f(x/s) on the box scaled into the disk by `scale` = s.
    Pl {
        map: Arc<PLMap>,
        scale: f64,
    },
    /// Applies the last map first; empty means the identity.
    Composed(Vec<DiskMap>),
    Inverse(Box<DiskMap>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiskMap {
    kind: DiskKind,
    dim: usize,
    lambda: Option<f64>,
}

/// Builds the twist g(x) = R_ij(θ(|x|))·x. The declared constant is
/// `1 + sup_r |r·θ′(r)|`, which dominates the exact differential norm
/// `(s + √(s² + 4))/2` with `s = sup_r |r·θ′(r)|`.
pub fn make_twist_disk_map(profile: AngleProfile, i: usize, j: usize, n: usize) -> Result<DiskMap> {
    check_plane(i, j, n)?;
    let end = profile.value(1.0);
    if end.abs() > 1e-15 {
        return Err(GeomError::SupportViolation(end));
    }
    let lambda = 1.0 + profile.sup_abs_r_derivative();
    Ok(DiskMap {
        kind: DiskKind::Twist {
            profile,
            plane: (i, j),
        },
        dim: n,
        lambda: Some(lambda),
    })
}

impl DiskMap {
    pub fn identity(n: usize) -> Self {
        Self {
            kind: DiskKind::Composed(Vec::new()),
            dim: n,
            lambda: Some(1.0),
        }
    }

    /// Wraps a boundary-fixing PL map on a box, scaled so the box lies in
    /// the closed unit disk.
    pub fn from_pl(map: PLMap) -> Result<Self> {
        if !map.boundary_fixed() {
            return Err(GeomError::InvalidTriangulation(
                "disk maps need a PL map that fixes the box boundary".into(),
            ));
        }
        let report = map.validate();
        if !report.passes() {
            let s = report
                .negative
                .first()
                .or(report.degenerate.first())
                .copied()
                .unwrap_or(0);
            return Err(GeomError::NotHomeomorphism {
                simplex: s,
                det: report.min_det,
            });
        }
        let (lo, hi) = map.triangulation().bounds();
        let n = map.dim();
        let scale = 1.0 / (lo.abs().max(hi.abs()) * (n as f64).sqrt());
        let lambda = map.bilip_constant()?;
        Ok(Self {
            kind: DiskKind::Pl {
                map: Arc::new(map),
                scale,
            },
            dim: n,
            lambda: Some(lambda),
        })
    }

    /// `maps[0] ∘ maps[1] ∘ …`.
    pub fn composed(maps: Vec<DiskMap>) -> Result<Self> {
        let dim = maps
            .first()
            .ok_or_else(|| GeomError::InvalidPoint("empty composition".into()))?
            .dim;
        if let Some(bad) = maps.iter().find(|m| m.dim != dim) {
            return Err(GeomError::DimMismatch {
                expected: dim,
                got: bad.dim,
            });
        }
        let lambda = maps
            .iter()
            .try_fold(1.0, |acc, m| m.lambda.map(|l| acc * l));
        Ok(Self {
            kind: DiskKind::Composed(maps),
            dim,
            lambda,
        })
    }

    pub fn inverse(&self) -> Self {
        let kind = match &self.kind {
            DiskKind::Twist { profile, plane } => DiskKind::Twist {
                profile: profile.negated(),
                plane: *plane,
            },
            DiskKind::Inverse(inner) => return (**inner).clone(),
            _ => DiskKind::Inverse(Box::new(self.clone())),
        };
        Self {
            kind,
            dim: self.dim,
            lambda: self.lambda,
        }
    }

    pub fn kind(&self) -> &DiskKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda_theoretical(&self) -> Option<f64> {
        self.lambda
    }

    /// Evaluates g; the identity for |x| >= 1.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_dir(x, false)
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        self.apply_dir(x, true)
    }

    fn apply_dir(&self, x: &[f64], inverse: bool) -> Vec<f64> {
        if norm(x) >= 1.0 {
            return x.to_vec();
        }
        match &self.kind {
            DiskKind::Twist { profile, plane } => {
                let theta = profile.value(norm(x));
                let mut y = x.to_vec();
                rotate_in_plane(
                    &mut y,
                    plane.0,
                    plane.1,
                    if inverse { -theta } else { theta },
                );
                y
            }
            DiskKind::Pl { map, scale } => {
                let u: Vec<f64> = x.iter().map(|c| c / scale).collect();
                if !map.triangulation().contains(&u) {
                    return x.to_vec();
                }
                let v = if inverse {
                    map.eval_inverse(&u)
                } else {
                    map.eval(&u)
                }
                .expect("point lies in the box of a valid PL map");
                v.iter().map(|c| c * scale).collect()
            }
            DiskKind::Composed(maps) => {
                let mut y = x.to_vec();
                if inverse {
                    for m in maps {
                        y = m.apply_dir(&y, true);
                    }
                } else {
                    for m in maps.iter().rev() {
                        y = m.apply_dir(&y, false);
                    }
                }
                y
            }
            DiskKind::Inverse(inner) => inner.apply_dir(x, !inverse),
        }
    }

    pub fn eval(&self, x: &VectorN) -> Result<VectorN> {
        if x.dim() != self.dim {
            return Err(GeomError::DimMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(VectorN::from_vec_unchecked(self.apply(x)))
    }

    /// The largest displacement |g(x) − x| over a grid of the disk, and
    /// where it occurs.
    pub fn max_displacement_on_grid(&self, per_axis: usize) -> (f64, Vec<f64>) {
        let n = self.dim;
        let mut best = (0.0, vec![0.0; n]);
        let total = per_axis.pow(n as u32);
        for code in 0..total {
            let mut rem = code;
            let x: Vec<f64> = (0..n)
                .map(|_| {
                    let k = rem % per_axis;
                    rem /= per_axis;
                    -1.0 + (2 * k + 1) as f64 / per_axis as f64
                })
                .collect();
            if norm(&x) >= 1.0 {
                continue;
            }
            let d = crate::linalg::dist(&self.apply(&x), &x);
            if d > best.0 {
                best = (d, x);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;
    use crate::maps::profile::Knot;
    use crate::pl::pl_twist_example;

    #[test]
    fn zero_profile_is_identity() {
        let g = make_twist_disk_map(AngleProfile::zero(), 0, 1, 2).unwrap();
        assert_eq!(g.apply(&[0.3, 0.4]), vec![0.3, 0.4]);
    }

    #[test]
    fn origin_fixed_and_norm_preserved() {
        let g = make_twist_disk_map(AngleProfile::bump(2.0), 0, 2, 3).unwrap();
        assert_eq!(g.apply(&[0.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0]);
        for k in 0..10_000 {
            let t = k as f64 * 0.001;
            let x = [0.6 * t.sin(), 0.5 * (2.0 * t).cos(), 0.4 * (0.7 * t).sin()];
            let y = g.apply(&x);
            assert!((norm(&y) - norm(&x)).abs() < 1e-15);
            assert!(dist(&g.apply_inverse(&y), &x) < 1e-15);
        }
        assert_eq!(g.apply(&[1.0, 0.5, 0.0]), vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn support_violation() {
        let p = AngleProfile::new(vec![
            Knot {
                r: 0.0,
                value: 1.0,
                slope: 0.0,
            },
            Knot {
                r: 1.0,
                value: 0.5,
                slope: 0.0,
            },
        ])
        .unwrap();
        assert!(matches!(
            make_twist_disk_map(p, 0, 1, 2),
            Err(GeomError::SupportViolation(_))
        ));
    }

    #[test]
    fn declared_constant() {
        let g = make_twist_disk_map(AngleProfile::bump(1.5), 0, 1, 2).unwrap();
        assert!((g.lambda_theoretical().unwrap() - (1.0 + 1.5 * 8.0 / 9.0)).abs() < 1e-14);
    }

    #[test]
    fn pl_disk_map() {
        let f = pl_twist_example(2, 6, 0.7).unwrap();
        let lambda = f.bilip_constant().unwrap();
        let g = DiskMap::from_pl(f).unwrap();
        assert_eq!(g.lambda_theoretical(), Some(lambda));
        let x = [0.2, -0.3];
        let y = g.apply(&x);
        assert!(dist(&y, &x) > 1e-3);
        assert!(dist(&g.apply_inverse(&y), &x) < 1e-10);
        assert_eq!(g.apply(&[0.9, 0.0]), vec![0.9, 0.0]);
    }

    #[test]
    fn composed_and_inverse() {
        let g = make_twist_disk_map(AngleProfile::bump(1.0), 0, 1, 2).unwrap();
        let h = make_twist_disk_map(AngleProfile::bump(-0.4), 0, 1, 2).unwrap();
        let gh = DiskMap::composed(vec![g.clone(), h.clone()]).unwrap();
        let x = [0.1, 0.5];
        assert!(dist(&gh.apply(&x), &g.apply(&h.apply(&x))) < 1e-16);
        let ginv = g.inverse();
        assert!(dist(&ginv.apply(&g.apply(&x)), &x) < 1e-15);
        let ghinv = gh.inverse();
        assert!(dist(&ghinv.apply(&gh.apply(&x)), &x) < 1e-15);
    }
}
