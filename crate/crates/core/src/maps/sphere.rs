//! Bi-Lipschitz self-maps of the unit sphere S^{n-1}.

use crate::error::{GeomError, Result};
use crate::linalg::{dot, norm, orthogonality_defect, scaled, MatrixN, VectorN};

/// Largest admissible |β| for the latitude map; keeps α ↦ α + β·sin α
/// strictly increasing on [0, π].
pub const MAX_LATITUDE_BETA: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub enum SphereKind {
    Orthogonal(MatrixN),
    /// Polar angle α from `axis` reparametrised as α ↦ α + β·sin α.
    Latitude {
        beta: f64,
        axis: VectorN,
    },
    /// x ↦ R·inner(Rᵀx).
    Conjugated {
        rotation: MatrixN,
        inner: Box<SphereMap>,
    },
    /// Applies the last map first.
    Composed(Vec<SphereMap>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereMap {
    kind: SphereKind,
    dim: usize,
    lambda: Option<f64>,
}

fn check_orthogonal(m: &MatrixN) -> Result<()> {
    let defect = orthogonality_defect(m);
    if defect > 1e-9 {
        return Err(GeomError::InvalidMatrix(format!(
            "matrix is not orthogonal (defect {defect:e})"
        )));
    }
    Ok(())
}

impl SphereMap {
    pub fn identity(n: usize) -> Self {
        Self::orthogonal(MatrixN::identity(n)).expect("identity is orthogonal")
    }

    pub fn orthogonal(m: MatrixN) -> Result<Self> {
        check_orthogonal(&m)?;
        Ok(Self {
            dim: m.dim(),
            kind: SphereKind::Orthogonal(m),
            lambda: Some(1.0),
        })
    }

    pub fn conjugated(rotation: MatrixN, inner: SphereMap) -> Result<Self> {
        check_orthogonal(&rotation)?;
        if rotation.dim() != inner.dim {
            return Err(GeomError::DimMismatch {
                expected: inner.dim,
                got: rotation.dim(),
            });
        }
        Ok(Self {
            dim: inner.dim,
            lambda: inner.lambda,
            kind: SphereKind::Conjugated {
                rotation,
                inner: Box::new(inner),
            },
        })
    }

    /// `maps[0] ∘ maps[1] ∘ …`.
    pub fn composed(maps: Vec<SphereMap>) -> Result<Self> {
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
            dim,
            lambda,
            kind: SphereKind::Composed(maps),
        })
    }

    pub fn kind(&self) -> &SphereKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared bi-Lipschitz constant. A claim to be tested, not a fact.
    pub fn lambda_theoretical(&self) -> Option<f64> {
        self.lambda
    }

    /// Evaluates on a unit vector; the output is renormalised to the sphere.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.apply_raw(x, false);
        let nz = norm(&z);
        debug_assert!(
            (nz - 1.0).abs() <= 1e-9,
            "sphere map drifted off the sphere"
        );
        z.iter_mut().for_each(|c| *c /= nz);
        z
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        let mut z = self.apply_raw(x, true);
        let nz = norm(&z);
        z.iter_mut().for_each(|c| *c /= nz);
        z
    }

    fn apply_raw(&self, x: &[f64], inverse: bool) -> Vec<f64> {
        match &self.kind {
            SphereKind::Orthogonal(m) => {
                if inverse {
                    m.mul_vec_transposed(x)
                } else {
                    m.mul_vec(x)
                }
            }
            SphereKind::Latitude { beta, axis } => latitude(x, *beta, axis, inverse),
            SphereKind::Conjugated { rotation, inner } => {
                let y = rotation.mul_vec_transposed(x);
                let z = inner.apply_raw(&y, inverse);
                rotation.mul_vec(&z)
            }
            SphereKind::Composed(maps) => {
                let mut y = x.to_vec();
                if inverse {
                    for m in maps {
                        y = m.apply_raw(&y, true);
                    }
                } else {
                    for m in maps.iter().rev() {
                        y = m.apply_raw(&y, false);
                    }
                }
                y
            }
        }
    }

    /// Checked evaluation at a point of the sphere.
    pub fn eval(&self, x: &VectorN) -> Result<VectorN> {
        if x.dim() != self.dim {
            return Err(GeomError::DimMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        let d = (x.norm() - 1.0).abs();
        if !(d <= crate::linalg::SPHERE_TOL) {
            return Err(GeomError::OffSphere(d));
        }
        let xu = scaled(x, 1.0 / x.norm());
        Ok(VectorN::from_vec_unchecked(self.apply(&xu)))
    }
}

/// Latitude reparametrisation of the polar angle from `axis`.
pub fn make_latitude_sphere_map(beta: f64, axis: VectorN) -> Result<SphereMap> {
    if !(beta.abs() <= MAX_LATITUDE_BETA) {
        return Err(GeomError::Monotonicity(beta.abs()));
    }
    let n = axis.dim();
    if n < 2 {
        return Err(GeomError::InvalidPoint("latitude maps need n >= 2".into()));
    }
    let na = axis.norm();
    if na == 0.0 {
        return Err(GeomError::InvalidPoint("zero axis".into()));
    }
    let axis = VectorN::from_vec_unchecked(scaled(&axis, 1.0 / na));
    let b = beta.abs();
    Ok(SphereMap {
        dim: n,
        lambda: Some((1.0 + b).max(1.0 / (1.0 - b))),
        kind: SphereKind::Latitude { beta, axis },
    })
}

fn latitude(x: &[f64], beta: f64, axis: &[f64], inverse: bool) -> Vec<f64> {
    let ca = dot(x, axis);
    let perp: Vec<f64> = x.iter().zip(axis).map(|(xi, ai)| xi - ca * ai).collect();
    let sp = norm(&perp);
    if sp == 0.0 || beta == 0.0 {
        return x.to_vec();
    }
    let alpha = sp.atan2(ca);
    let mapped = if inverse {
        solve_latitude(alpha, beta)
    } else {
        alpha + beta * alpha.sin()
    };
    let (s, c) = mapped.sin_cos();
    axis.iter()
        .zip(&perp)
        .map(|(a, p)| c * a + s * p / sp)
        .collect()
}

/// Solves α + β·sin α = target on [0, π] by safeguarded Newton iteration.
fn solve_latitude(target: f64, beta: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
    let mut a = target;
    for _ in 0..100 {
        let f = a + beta * a.sin() - target;
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            hi = a;
        } else {
            lo = a;
        }
        let step = f / (1.0 + beta * a.cos());
        let mut next = a - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - a).abs() <= 1e-17 * a.abs().max(1.0) {
            a = next;
            break;
        }
        a = next;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, rotation_matrix};

    fn circle(theta: f64) -> Vec<f64> {
        vec![theta.cos(), theta.sin()]
    }

    #[test]
    fn beta_zero_is_identity_and_poles_fixed() {
        let axis = VectorN::basis(3, 2);
        let id = make_latitude_sphere_map(0.0, axis.clone()).unwrap();
        let x = [0.6, 0.0, 0.8];
        assert_eq!(id.apply(&x), x.to_vec());
        let m = make_latitude_sphere_map(0.5, axis).unwrap();
        assert_eq!(m.apply(&[0.0, 0.0, 1.0]), vec![0.0, 0.0, 1.0]);
        assert_eq!(m.apply(&[0.0, 0.0, -1.0]), vec![0.0, 0.0, -1.0]);
    }

    #[test]
    fn beta_out_of_range() {
        let r = make_latitude_sphere_map(0.95, VectorN::basis(2, 0));
        assert!(matches!(r, Err(GeomError::Monotonicity(_))));
    }

    #[test]
    fn latitude_inverse_round_trip() {
        let m = make_latitude_sphere_map(-0.75, VectorN::basis(2, 0)).unwrap();
        for k in 0..1000 {
            let x = circle(k as f64 * 0.00628 * 1.0001);
            let y = m.apply(&x);
            let back = m.apply_inverse(&y);
            assert!(dist(&x, &back) < 1e-13, "{x:?} {back:?}");
        }
    }

    #[test]
    fn dense_circle_ratio_within_claim() {
        // chordal constant <= geodesic constant · π/2
        let m = make_latitude_sphere_map(0.5, VectorN::basis(2, 0)).unwrap();
        let claim = m.lambda_theoretical().unwrap();
        assert_eq!(claim, 2.0);
        let pts: Vec<Vec<f64>> = (0..2000)
            .map(|k| circle(k as f64 * std::f64::consts::TAU / 2000.0))
            .collect();
        let imgs: Vec<Vec<f64>> = pts.iter().map(|p| m.apply(p)).collect();
        let mut worst: f64 = 1.0;
        for i in 0..pts.len() {
            for j in (i + 1..pts.len()).step_by(7) {
                let r = dist(&imgs[i], &imgs[j]) / dist(&pts[i], &pts[j]);
                worst = worst.max(r).max(1.0 / r);
            }
        }
        assert!(worst <= claim * std::f64::consts::FRAC_PI_2);
        assert!(worst > 1.5);
    }

    #[test]
    fn conjugated_and_composed() {
        let r = rotation_matrix(0, 1, 0.7, 2).unwrap();
        let inner = make_latitude_sphere_map(0.3, VectorN::basis(2, 0)).unwrap();
        let conj = SphereMap::conjugated(r.clone(), inner.clone()).unwrap();
        let x = circle(1.1);
        let expected = r.mul_vec(&inner.apply(&r.mul_vec_transposed(&x)));
        assert!(dist(&conj.apply(&x), &expected) < 1e-15);
        let comp = SphereMap::composed(vec![conj.clone(), inner.clone()]).unwrap();
        let expected = conj.apply(&inner.apply(&x));
        assert!(dist(&comp.apply(&x), &expected) < 1e-15);
        assert!(dist(&comp.apply_inverse(&comp.apply(&x)), &x) < 1e-14);
        assert!(
            (comp.lambda_theoretical().unwrap() - inner.lambda_theoretical().unwrap().powi(2))
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn non_orthogonal_rejected() {
        let m = MatrixN::diagonal(&[2.0, 1.0]);
        assert!(SphereMap::orthogonal(m).is_err());
    }
}
