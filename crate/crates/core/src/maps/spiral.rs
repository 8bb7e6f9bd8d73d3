//! Rotation-valued profiles `f: (0, ∞) → SO(n)` driving the spiral maps
//! `x ↦ f(|x|)·x`.

use super::profile::AngleProfile;
use crate::error::{GeomError, Result};
use crate::linalg::{check_plane, orthogonality_defect, rotate_in_plane, rotation_matrix, MatrixN};

#[derive(Clone, Debug, PartialEq)]
pub enum SpiralKind {
    Constant(MatrixN),
    /// f(t) = R_ij(c·ln t).
    LogSpiral {
        c: f64,
        plane: (usize, usize),
    },
    /// f(t) = R_ij(θ(t/b)), the identity for t >= b.
    Cutoff {
        profile: AngleProfile,
        b: f64,
        plane: (usize, usize),
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpiralProfile {
    kind: SpiralKind,
    dim: usize,
    c_bound: f64,
}

impl SpiralProfile {
    /// A constant profile; `a` must lie in SO(n).
    pub fn constant(a: MatrixN) -> Result<Self> {
        if orthogonality_defect(&a) > 1e-9 || (a.det() - 1.0).abs() > 1e-9 {
            return Err(GeomError::InvalidMatrix(
                "constant profile must lie in SO(n)".into(),
            ));
        }
        Ok(Self {
            dim: a.dim(),
            kind: SpiralKind::Constant(a),
            c_bound: 0.0,
        })
    }

    pub fn log_spiral(c: f64, i: usize, j: usize, n: usize) -> Result<Self> {
        check_plane(i, j, n)?;
        if !c.is_finite() {
            return Err(GeomError::InvalidProfile("non-finite spiral rate".into()));
        }
        Ok(Self {
            kind: SpiralKind::LogSpiral { c, plane: (i, j) },
            dim: n,
            c_bound: c.abs(),
        })
    }

    /// Rotation by `profile(t/b)` for t < b, the identity beyond. The
    /// bound is `sup_u |u·θ′(u)|`, invariant under the rescaling by b.
    pub fn cutoff(profile: AngleProfile, b: f64, i: usize, j: usize, n: usize) -> Result<Self> {
        check_plane(i, j, n)?;
        if !(b > 0.0 && b.is_finite()) {
            return Err(GeomError::InvalidProfile(
                "cutoff radius must be positive".into(),
            ));
        }
        let end = profile.value(1.0);
        if end.abs() > 1e-15 {
            return Err(GeomError::SupportViolation(end));
        }
        let c_bound = profile.sup_abs_r_derivative();
        Ok(Self {
            kind: SpiralKind::Cutoff {
                profile,
                b,
                plane: (i, j),
            },
            dim: n,
            c_bound,
        })
    }

    pub fn kind(&self) -> &SpiralKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Certified C with |f′_ij(t)| <= C/t.
    pub fn c_bound(&self) -> f64 {
        self.c_bound
    }

    /// The rotation f(t) as a matrix.
    pub fn at(&self, t: f64) -> MatrixN {
        match &self.kind {
            SpiralKind::Constant(a) => a.clone(),
            SpiralKind::LogSpiral { c, plane } => {
                rotation_matrix(plane.0, plane.1, c * t.ln(), self.dim).expect("plane checked")
            }
            SpiralKind::Cutoff { profile, b, plane } => {
                rotation_matrix(plane.0, plane.1, profile.value(t / b), self.dim)
                    .expect("plane checked")
            }
        }
    }

    /// Applies f(t) (or f(t)⁻¹ = f(t)ᵀ) to x.
    pub(crate) fn rotate(&self, t: f64, x: &[f64], inverse: bool) -> Vec<f64> {
        let sign = if inverse { -1.0 } else { 1.0 };
        match &self.kind {
            SpiralKind::Constant(a) => {
                if inverse {
                    a.mul_vec_transposed(x)
                } else {
                    a.mul_vec(x)
                }
            }
            SpiralKind::LogSpiral { c, plane } => {
                let mut y = x.to_vec();
                rotate_in_plane(&mut y, plane.0, plane.1, sign * c * t.ln());
                y
            }
            SpiralKind::Cutoff { profile, b, plane } => {
                let mut y = x.to_vec();
                if t < *b {
                    rotate_in_plane(&mut y, plane.0, plane.1, sign * profile.value(t / b));
                }
                y
            }
        }
    }

    /// Largest `t·|f′_ij(t)|` seen by central differences on a log-spaced
    /// grid over [1e-3, 1e6]; a numerical check of [`Self::c_bound`].
    pub fn max_scaled_derivative(&self, grid_points: usize) -> f64 {
        let (lo, hi) = (1e-3f64.ln(), 1e6f64.ln());
        let mut worst: f64 = 0.0;
        for k in 0..grid_points {
            let t = (lo + (hi - lo) * k as f64 / (grid_points - 1) as f64).exp();
            let h = 1e-6 * t;
            let (fp, fm) = (self.at(t + h), self.at(t - h));
            for (p, m) in fp.entries().iter().zip(fm.entries()) {
                worst = worst.max(t * ((p - m) / (2.0 * h)).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_by_kind() {
        let a = rotation_matrix(0, 1, 1.0, 3).unwrap();
        assert_eq!(SpiralProfile::constant(a).unwrap().c_bound(), 0.0);
        assert_eq!(
            SpiralProfile::log_spiral(-0.7, 0, 1, 2).unwrap().c_bound(),
            0.7
        );
        assert!(SpiralProfile::constant(MatrixN::diagonal(&[1.0, -1.0])).is_err());
    }

    #[test]
    fn certified_bound_holds_on_log_grid() {
        for p in [
            SpiralProfile::log_spiral(1.0, 0, 1, 2).unwrap(),
            SpiralProfile::log_spiral(2.0, 1, 2, 3).unwrap(),
            SpiralProfile::cutoff(AngleProfile::bump(1.3), 5.0, 0, 1, 2).unwrap(),
        ] {
            let observed = p.max_scaled_derivative(2000);
            assert!(
                observed <= p.c_bound() * (1.0 + 1e-6),
                "{observed} > {}",
                p.c_bound()
            );
            assert!(observed >= 0.9 * p.c_bound());
        }
    }

    #[test]
    fn values_in_so_n() {
        let p = SpiralProfile::log_spiral(0.5, 0, 2, 4).unwrap();
        for t in [1e-3, 0.7, 1.0, 55.0, 1e6] {
            let f = p.at(t);
            assert!(orthogonality_defect(&f) <= 1e-12);
            assert!((f.det() - 1.0).abs() <= 1e-12);
        }
        let cut = SpiralProfile::cutoff(AngleProfile::bump(1.0), 2.0, 0, 1, 2).unwrap();
        assert_eq!(cut.at(3.0), MatrixN::identity(2));
    }
}
