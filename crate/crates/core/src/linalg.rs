//! Small dense linear algebra: vectors, square matrices, norms and the
//! intrinsic metric of the unit sphere.
//!
//! Everything here is sized for n <= 16 and works in `f64`.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// A point of R^n with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VectorN(Vec<f64>);

impl VectorN {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(GeomError::InvalidPoint(
                "dimension must be at least 1".into(),
            ));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(GeomError::InvalidPoint(format!(
                "non-finite coordinate {bad}"
            )));
        }
        Ok(Self(coords))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self(vec![0.0; n])
    }

    /// The standard basis vector e_i (0-based).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty());
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn dist(&self, other: &VectorN) -> f64 {
        dist(&self.0, &other.0)
    }
}

impl Deref for VectorN {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Display for VectorN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// Rotates coordinates (i, j) of `x` in place by `angle`.
pub(crate) fn rotate_in_plane(x: &mut [f64], i: usize, j: usize, angle: f64) {
    let (s, c) = angle.sin_cos();
    let (xi, xj) = (x[i], x[j]);
    x[i] = c * xi - s * xj;
    x[j] = s * xi + c * xj;
}

/// A square real matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixN {
    n: usize,
    data: Vec<f64>,
}

impl MatrixN {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(GeomError::InvalidMatrix(
                "dimension must be at least 1".into(),
            ));
        }
        if data.len() != n * n {
            return Err(GeomError::InvalidMatrix(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GeomError::InvalidMatrix("matrix is not square".into()));
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (k, v) in d.iter().enumerate() {
            data[k * n + k] = *v;
        }
        Self { n, data }
    }

    /// Builds a matrix from its columns (each of length n).
    pub(crate) fn from_columns(cols: &[Vec<f64>]) -> Self {
        let n = cols.len();
        let mut data = vec![0.0; n * n];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                data[i * n + j] = *v;
            }
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.data
            .chunks_exact(self.n)
            .map(|row| dot(row, x))
            .collect()
    }

    /// Computes Aᵀx.
    pub fn mul_vec_transposed(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (i, xi) in x.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.data[i * n + j] * xi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &MatrixN) -> MatrixN {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        MatrixN { n, data }
    }

    pub fn transpose(&self) -> MatrixN {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        MatrixN { n, data }
    }

    pub fn sub(&self, other: &MatrixN) -> MatrixN {
        assert_eq!(self.n, other.n);
        MatrixN {
            n: self.n,
            data: sub(&self.data, &other.data),
        }
    }

    pub fn scale(&self, s: f64) -> MatrixN {
        MatrixN {
            n: self.n,
            data: scaled(&self.data, s),
        }
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
                .unwrap_or(col);
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let f = a[row * n + col] / p;
                if f != 0.0 {
                    for j in col..n {
                        a[row * n + j] -= f * a[col * n + j];
                    }
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<MatrixN> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut inv = MatrixN::identity(n).data;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
                .unwrap_or(col);
            let p = a[pivot * n + col];
            if p.abs() <= f64::EPSILON * scale * n as f64 || p == 0.0 {
                return Err(GeomError::NotInvertible("singular matrix".into()));
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                    inv.swap(pivot * n + j, col * n + j);
                }
            }
            for j in 0..n {
                a[col * n + j] /= p;
                inv[col * n + j] /= p;
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let f = a[row * n + col];
                if f != 0.0 {
                    for j in 0..n {
                        a[row * n + j] -= f * a[col * n + j];
                        inv[row * n + j] -= f * inv[col * n + j];
                    }
                }
            }
        }
        Ok(MatrixN { n, data: inv })
    }

    /// Solves `self * x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        Ok(self.inverse()?.mul_vec(b))
    }
}

impl fmt::Display for MatrixN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.data.chunks_exact(self.n) {
            writeln!(f, "{row:?}")?;
        }
        Ok(())
    }
}

fn check_finite(m: &MatrixN) -> Result<()> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(GeomError::InvalidMatrix("non-finite entry".into()))
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns the eigenvalues in descending order and the matching unit
/// eigenvectors as the columns of the second component.
pub fn symmetric_eigen(a: &MatrixN) -> (Vec<f64>, MatrixN) {
    let n = a.n;
    let mut m = a.data.clone();
    let mut v = MatrixN::identity(n).data;
    let frob = norm(&m);
    if frob == 0.0 {
        return (vec![0.0; n], MatrixN::identity(n));
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].total_cmp(&m[i * n + i]));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = v[row * n + old_col];
        }
    }
    (values, MatrixN { n, data: vectors })
}

/// Largest singular value `sup_{|x|=1} |Mx|`.
///
/// Computed as the square root of the top eigenvalue of MᵀM via Jacobi
/// rotations, which is exact to a few ulps for the small sizes used here.
pub fn operator_norm(m: &MatrixN) -> Result<f64> {
    check_finite(m)?;
    let gram = m.transpose().matmul(m);
    let (values, _) = symmetric_eigen(&gram);
    Ok(values[0].max(0.0).sqrt())
}

/// Smallest singular value of `m`.
pub fn min_singular_value(m: &MatrixN) -> Result<f64> {
    check_finite(m)?;
    let gram = m.transpose().matmul(m);
    let (values, _) = symmetric_eigen(&gram);
    Ok(values[m.n - 1].max(0.0).sqrt())
}

/// `(sum a_ij^2)^(1/2)`.
pub fn frobenius_norm(m: &MatrixN) -> Result<f64> {
    check_finite(m)?;
    Ok(norm(&m.data))
}

/// Off-sphere tolerance accepted by [`sphere_geodesic`] before renormalising.
pub const SPHERE_TOL: f64 = 1e-9;

/// Intrinsic (great-circle) distance between two unit vectors.
///
/// Evaluated as `2·atan2(|x−y|, |x+y|)`, which agrees with the clamped
/// arccos of the inner product but keeps full precision for nearly equal
/// and nearly antipodal points. The result is never below the chord.
pub fn sphere_geodesic(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(GeomError::DimMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let (nx, ny) = (norm(x), norm(y));
    for d in [(nx - 1.0).abs(), (ny - 1.0).abs()] {
        if !(d <= SPHERE_TOL) {
            return Err(GeomError::OffSphere(d));
        }
    }
    let xu = scaled(x, 1.0 / nx);
    let yu = scaled(y, 1.0 / ny);
    let chord = dist(&xu, &yu);
    let sum: Vec<f64> = xu.iter().zip(&yu).map(|(a, b)| a + b).collect();
    let angle = 2.0 * chord.atan2(norm(&sum));
    Ok(angle.clamp(chord, std::f64::consts::PI))
}

/// Rotation by `angle` in the coordinate plane (i, j), 0-based with i < j.
///
/// Maps e_i to cos(angle)·e_i + sin(angle)·e_j.
pub fn rotation_matrix(i: usize, j: usize, angle: f64, n: usize) -> Result<MatrixN> {
    check_plane(i, j, n)?;
    if !angle.is_finite() {
        return Err(GeomError::InvalidMatrix("non-finite rotation angle".into()));
    }
    let mut r = MatrixN::identity(n);
    let (s, c) = angle.sin_cos();
    r.set(i, i, c);
    r.set(i, j, -s);
    r.set(j, i, s);
    r.set(j, j, c);
    Ok(r)
}

pub(crate) fn check_plane(i: usize, j: usize, n: usize) -> Result<()> {
    if i >= j || j >= n {
        Err(GeomError::InvalidPlane { i, j, n })
    } else {
        Ok(())
    }
}

/// `‖MᵀM − I‖_E`, the orthogonality defect of a matrix.
pub fn orthogonality_defect(m: &MatrixN) -> f64 {
    norm(&m.transpose().matmul(m).sub(&MatrixN::identity(m.n)).data)
}
