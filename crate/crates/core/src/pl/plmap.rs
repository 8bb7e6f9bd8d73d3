use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::triangulation::Triangulation;
use crate::error::{GeomError, Result};
use crate::linalg::{operator_norm, rotate_in_plane, MatrixN, VectorN};

/// A simplex-wise affine map given by the images of the vertices of a
/// Kuhn triangulation.
#[derive(Clone, Debug, PartialEq)]
pub struct PLMap {
    tri: Triangulation,
    images: Vec<f64>,
    boundary_fixed: bool,
}

/// Outcome of [`PLMap::validate`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlValidation {
    pub simplex_count: usize,
    /// Simplices whose differential has negative determinant.
    pub negative: Vec<usize>,
    /// Simplices whose image is (numerically) flat.
    pub degenerate: Vec<usize>,
    /// Boundary vertices that moved although the map claims a fixed boundary.
    pub fixity_violations: Vec<usize>,
    pub min_det: f64,
}

impl PlValidation {
    pub fn passes(&self) -> bool {
        self.negative.is_empty() && self.degenerate.is_empty() && self.fixity_violations.is_empty()
    }
}

const DEGENERATE_REL: f64 = 1e-12;

impl PLMap {
    pub fn new(tri: Triangulation, images: Vec<Vec<f64>>, boundary_fixed: bool) -> Result<Self> {
        if images.len() != tri.vertex_count() {
            return Err(GeomError::InvalidTriangulation(format!(
                "expected {} vertex images, got {}",
                tri.vertex_count(),
                images.len()
            )));
        }
        let n = tri.dim();
        let mut flat = Vec::with_capacity(n * images.len());
        for img in &images {
            if img.len() != n {
                return Err(GeomError::DimMismatch {
                    expected: n,
                    got: img.len(),
                });
            }
            if img.iter().any(|c| !c.is_finite()) {
                return Err(GeomError::InvalidPoint("non-finite vertex image".into()));
            }
            flat.extend_from_slice(img);
        }
        Ok(Self {
            tri,
            images: flat,
            boundary_fixed,
        })
    }

    pub fn from_fn(
        tri: Triangulation,
        boundary_fixed: bool,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let images = (0..tri.vertex_count())
            .map(|v| f(&tri.vertex_position(v)))
            .collect();
        Self::new(tri, images, boundary_fixed)
    }

    pub fn identity(tri: Triangulation, boundary_fixed: bool) -> Self {
        Self::from_fn(tri, boundary_fixed, |x| x.to_vec()).expect("identity images are valid")
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn boundary_fixed(&self) -> bool {
        self.boundary_fixed
    }

    pub fn dim(&self) -> usize {
        self.tri.dim()
    }

    pub fn vertex_image(&self, v: usize) -> &[f64] {
        let n = self.tri.dim();
        &self.images[v * n..(v + 1) * n]
    }

    /// Evaluates at `x`; outside the box the map is the identity when the
    /// boundary is fixed and undefined otherwise.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(GeomError::DimMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        match self.tri.locate(x) {
            Some(loc) => {
                let mut y = vec![0.0; self.dim()];
                for (v, w) in loc.vertices.iter().zip(&loc.weights) {
                    for (yi, ci) in y.iter_mut().zip(self.vertex_image(*v)) {
                        *yi += w * ci;
                    }
                }
                Ok(y)
            }
            None if self.boundary_fixed => Ok(x.to_vec()),
            None => Err(GeomError::OutOfDomain),
        }
    }

    /// The constant differential `T_σ f` of simplex `s`.
    pub fn differential(&self, s: usize) -> MatrixN {
        let n = self.dim();
        let h = self.tri.cell_size();
        let vs = self.tri.simplex_vertices(s);
        let perm = self.tri.simplex_permutation(s).to_vec();
        let mut cols = vec![vec![0.0; n]; n];
        for (m, &axis) in perm.iter().enumerate() {
            let a = self.vertex_image(vs[m]);
            let b = self.vertex_image(vs[m + 1]);
            cols[axis] = b.iter().zip(a).map(|(p, q)| (p - q) / h).collect();
        }
        MatrixN::from_columns(&cols)
    }

    fn is_degenerate(a: &MatrixN, det: f64) -> Result<bool> {
        let scale = operator_norm(a)?.powi(a.dim() as i32);
        Ok(det.abs() <= DEGENERATE_REL * scale || scale == 0.0)
    }

    /// `sup_σ ‖T_σ f‖` and the simplex attaining it.
    pub fn differential_norm(&self) -> Result<(f64, usize)> {
        let mut best = (f64::NEG_INFINITY, 0);
        for s in 0..self.tri.simplex_count() {
            let a = self.differential(s);
            if Self::is_degenerate(&a, a.det())? {
                return Err(GeomError::DegenerateSimplex(s));
            }
            let norm = operator_norm(&a)?;
            if norm > best.0 {
                best = (norm, s);
            }
        }
        Ok(best)
    }

    /// `sup_σ ‖(T_σ f)⁻¹‖`, the differential norm of the inverse map.
    pub fn inverse_differential_norm(&self) -> Result<(f64, usize)> {
        let mut best = (f64::NEG_INFINITY, 0);
        for s in 0..self.tri.simplex_count() {
            let a = self.differential(s);
            let det = a.det();
            if det <= 0.0 || Self::is_degenerate(&a, det)? {
                return Err(GeomError::NotHomeomorphism { simplex: s, det });
            }
            let norm = operator_norm(&a.inverse()?)?;
            if norm > best.0 {
                best = (norm, s);
            }
        }
        Ok(best)
    }

    /// A bi-Lipschitz constant valid on the whole (convex) box:
    /// `max(‖f‖, ‖f⁻¹‖)`, and at least 1 when the map extends by the
    /// identity.
    pub fn bilip_constant(&self) -> Result<f64> {
        let (inv, _) = self.inverse_differential_norm()?;
        let (fwd, _) = self.differential_norm()?;
        let lambda = fwd.max(inv);
        Ok(if self.boundary_fixed {
            lambda.max(1.0)
        } else {
            lambda
        })
    }

    pub fn validate(&self) -> PlValidation {
        let mut report = PlValidation {
            simplex_count: self.tri.simplex_count(),
            negative: Vec::new(),
            degenerate: Vec::new(),
            fixity_violations: Vec::new(),
            min_det: f64::INFINITY,
        };
        for s in 0..self.tri.simplex_count() {
            let a = self.differential(s);
            let det = a.det();
            report.min_det = report.min_det.min(det);
            if Self::is_degenerate(&a, det).unwrap_or(true) {
                report.degenerate.push(s);
            } else if det < 0.0 {
                report.negative.push(s);
            }
        }
        if self.boundary_fixed {
            for v in 0..self.tri.vertex_count() {
                if self.tri.is_boundary_vertex(v)
                    && self.vertex_image(v) != self.tri.vertex_position(v)
                {
                    report.fixity_violations.push(v);
                }
            }
        }
        report
    }

    /// Barycentric coordinates of `y` in the image of simplex `s`, if the
    /// image is non-degenerate.
    fn image_barycentric(&self, s: usize, y: &[f64]) -> Option<(Vec<usize>, Vec<f64>)> {
        let vs = self.tri.simplex_vertices(s);
        let w0 = self.vertex_image(vs[0]);
        let cols: Vec<Vec<f64>> = vs[1..]
            .iter()
            .map(|&v| {
                self.vertex_image(v)
                    .iter()
                    .zip(w0)
                    .map(|(a, b)| a - b)
                    .collect()
            })
            .collect();
        let m = MatrixN::from_columns(&cols);
        let rhs: Vec<f64> = y.iter().zip(w0).map(|(a, b)| a - b).collect();
        let mu = m.solve(&rhs).ok()?;
        let mut weights = Vec::with_capacity(mu.len() + 1);
        weights.push(1.0 - mu.iter().sum::<f64>());
        weights.extend(mu);
        Some((vs, weights))
    }

    /// Evaluates the inverse map by searching image simplices outward from
    /// the cube containing `y`.
    pub fn eval_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(GeomError::DimMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        if !self.tri.contains(y) {
            return if self.boundary_fixed {
                Ok(y.to_vec())
            } else {
                Err(GeomError::OutOfDomain)
            };
        }
        let tol = 1e-10;
        for ring in 0..=self.tri.resolution() {
            let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
            for s in self.tri.simplices_in_ring(y, ring) {
                if let Some((vs, w)) = self.image_barycentric(s, y) {
                    let worst = w.iter().copied().fold(f64::INFINITY, f64::min);
                    if worst >= -tol && best.as_ref().map_or(true, |b| worst > b.0) {
                        best = Some((worst, vs, w));
                    }
                }
            }
            if let Some((_, vs, w)) = best {
                let mut x = vec![0.0; self.dim()];
                for (v, wt) in vs.iter().zip(&w) {
                    for (xi, pi) in x.iter_mut().zip(self.tri.vertex_position(*v)) {
                        *xi += wt.max(0.0) * pi;
                    }
                }
                let total: f64 = w.iter().map(|v| v.max(0.0)).sum();
                x.iter_mut().for_each(|c| *c /= total);
                return Ok(x);
            }
        }
        Err(GeomError::NotInvertible(
            "no image simplex contains the point".into(),
        ))
    }

    /// Writes the CSV exchange format: a header row, one parameter row,
    /// a column-name row and one row per vertex image (17 significant digits).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
        let (lo, hi) = self.tri.bounds();
        let csv_err = |e: csv::Error| GeomError::Io(e.to_string());
        wr.write_record(["n", "box_lo", "box_hi", "resolution", "boundary_fixed"])
            .map_err(csv_err)?;
        wr.write_record([
            self.dim().to_string(),
            fmt17(lo),
            fmt17(hi),
            self.tri.resolution().to_string(),
            self.boundary_fixed.to_string(),
        ])
        .map_err(csv_err)?;
        let mut names = vec!["index".to_string()];
        names.extend((1..=self.dim()).map(|k| format!("y{k}")));
        wr.write_record(&names).map_err(csv_err)?;
        for v in 0..self.tri.vertex_count() {
            let mut row = vec![v.to_string()];
            row.extend(self.vertex_image(v).iter().map(|c| fmt17(*c)));
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(r);
        let perr = |m: &str| GeomError::Parse(format!("plmap csv: {m}"));
        let mut records = rd.records();
        let mut next = || -> Result<csv::StringRecord> {
            records
                .next()
                .ok_or_else(|| perr("unexpected end of file"))?
                .map_err(|e| GeomError::Parse(e.to_string()))
        };
        let header = next()?;
        if header.get(0) != Some("n") {
            return Err(perr("missing header row"));
        }
        let params = next()?;
        let field = |k: usize| params.get(k).ok_or_else(|| perr("short parameter row"));
        let n: usize = field(0)?.parse().map_err(|_| perr("bad n"))?;
        let lo: f64 = field(1)?.parse().map_err(|_| perr("bad box_lo"))?;
        let hi: f64 = field(2)?.parse().map_err(|_| perr("bad box_hi"))?;
        let res: usize = field(3)?.parse().map_err(|_| perr("bad resolution"))?;
        let fixed = match field(4)? {
            "true" | "1" => true,
            "false" | "0" => false,
            _ => return Err(perr("bad boundary_fixed")),
        };
        let tri = Triangulation::new(n, lo, hi, res)?;
        let _names = next()?;
        let mut images = vec![None; tri.vertex_count()];
        for rec in rd.records() {
            let rec = rec.map_err(|e| GeomError::Parse(e.to_string()))?;
            if rec.len() != n + 1 {
                return Err(perr("vertex row has wrong length"));
            }
            let idx: usize = rec[0].parse().map_err(|_| perr("bad vertex index"))?;
            let coords = rec
                .iter()
                .skip(1)
                .map(|c| c.parse::<f64>().map_err(|_| perr("bad coordinate")))
                .collect::<Result<Vec<_>>>()?;
            let slot = images
                .get_mut(idx)
                .ok_or_else(|| perr("vertex index out of range"))?;
            *slot = Some(coords);
        }
        let images = images
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| perr("missing vertex rows"))?;
        Self::new(tri, images, fixed)
    }
}

pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Boundary-fixing PL map on `[-1, 1]^n` that rotates each interior vertex
/// v in the (0, 1) plane by `d · Π_k (1 − v_k²)`.
pub fn pl_twist_example(n: usize, resolution: usize, d: f64) -> Result<PLMap> {
    if n < 2 {
        return Err(GeomError::InvalidTriangulation("twist needs n >= 2".into()));
    }
    let tri = Triangulation::new(n, -1.0, 1.0, resolution)?;
    let f = PLMap::from_fn(tri, true, |v| {
        let w: f64 = v.iter().map(|c| 1.0 - c * c).product();
        let mut y = v.to_vec();
        rotate_in_plane(&mut y, 0, 1, d * w);
        y
    })?;
    // boundary vertices have weight exactly 0 and stay put
    let report = f.validate();
    if let Some(&s) = report.negative.first().or(report.degenerate.first()) {
        return Err(GeomError::DisplacementTooLarge { simplex: s });
    }
    Ok(f)
}

/// Boundary-fixing PL map on `[-1, 1]^n` whose interior vertices are moved
/// by independent uniform offsets in `[-a·h, a·h]^n` (h = cell size).
pub fn pl_random_displacement(
    n: usize,
    resolution: usize,
    amplitude: f64,
    seed: u64,
) -> Result<PLMap> {
    let tri = Triangulation::new(n, -1.0, 1.0, resolution)?;
    let h = tri.cell_size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = (0..tri.vertex_count())
        .map(|v| {
            let p = tri.vertex_position(v);
            if tri.is_boundary_vertex(v) {
                p
            } else {
                p.iter()
                    .map(|c| c + amplitude * h * rng.gen_range(-1.0..1.0))
                    .collect()
            }
        })
        .collect();
    let f = PLMap::new(tri, images, true)?;
    let report = f.validate();
    if let Some(&s) = report.negative.first().or(report.degenerate.first()) {
        return Err(GeomError::DisplacementTooLarge { simplex: s });
    }
    Ok(f)
}

/// The affine map `x ↦ Mx + b` sampled on the vertices of `tri`.
pub fn pl_affine(tri: Triangulation, m: &MatrixN, b: &VectorN) -> Result<PLMap> {
    if m.dim() != tri.dim() || b.dim() != tri.dim() {
        return Err(GeomError::DimMismatch {
            expected: tri.dim(),
            got: m.dim(),
        });
    }
    PLMap::from_fn(tri, false, |x| {
        m.mul_vec(x)
            .iter()
            .zip(b.iter())
            .map(|(p, q)| p + q)
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    #[test]
    fn identity_evaluation_and_norms() {
        let tri = Triangulation::new(2, -1.0, 1.0, 4).unwrap();
        let f = PLMap::identity(tri, true);
        let x = [0.123, -0.77];
        assert_eq!(f.eval(&x).unwrap(), x.to_vec());
        assert!((f.differential_norm().unwrap().0 - 1.0).abs() < 1e-14);
        assert!((f.bilip_constant().unwrap() - 1.0).abs() < 1e-14);
        assert!(f.validate().passes());
        assert_eq!(f.eval(&[3.0, 0.0]).unwrap(), vec![3.0, 0.0]);
    }

    #[test]
    fn out_of_domain_without_fixed_boundary() {
        let tri = Triangulation::new(2, 0.0, 1.0, 2).unwrap();
        let f = PLMap::identity(tri, false);
        assert_eq!(f.eval(&[1.5, 0.0]), Err(GeomError::OutOfDomain));
    }

    #[test]
    fn vertex_and_edge_midpoint_values() {
        let f = pl_random_displacement(2, 4, 0.3, 11).unwrap();
        let tri = f.triangulation().clone();
        for v in 0..tri.vertex_count() {
            let y = f.eval(&tri.vertex_position(v)).unwrap();
            assert!(dist(&y, f.vertex_image(v)) < 1e-14);
        }
        // an edge of simplex 5: midpoint maps to midpoint of image edge
        let vs = tri.simplex_vertices(5);
        let (a, b) = (tri.vertex_position(vs[0]), tri.vertex_position(vs[1]));
        let mid: Vec<f64> = a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect();
        let expected: Vec<f64> = f
            .vertex_image(vs[0])
            .iter()
            .zip(f.vertex_image(vs[1]))
            .map(|(p, q)| 0.5 * (p + q))
            .collect();
        assert!(dist(&f.eval(&mid).unwrap(), &expected) < 1e-14);
    }

    #[test]
    fn scaling_and_diagonal_norms() {
        let tri = Triangulation::new(2, -1.0, 1.0, 3).unwrap();
        let f = pl_affine(
            tri.clone(),
            &MatrixN::diagonal(&[2.0, 2.0]),
            &VectorN::zeros(2),
        )
        .unwrap();
        assert!((f.differential_norm().unwrap().0 - 2.0).abs() < 1e-10);
        let f = pl_affine(tri, &MatrixN::diagonal(&[3.0, 1.0]), &VectorN::zeros(2)).unwrap();
        assert!((f.bilip_constant().unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn validation_flags() {
        let tri = Triangulation::new(2, 0.0, 1.0, 1).unwrap();
        // vertex 3 = (1,1) pushed through the opposite face of both triangles
        let mut images: Vec<Vec<f64>> = (0..4).map(|v| tri.vertex_position(v)).collect();
        images[3] = vec![-0.5, -0.5];
        let f = PLMap::new(tri.clone(), images, false).unwrap();
        let rep = f.validate();
        assert!(!rep.negative.is_empty());
        assert!(matches!(
            f.bilip_constant(),
            Err(GeomError::NotHomeomorphism { .. })
        ));

        let tri = Triangulation::new(2, 0.0, 1.0, 2).unwrap();
        let mut images: Vec<Vec<f64>> = (0..9).map(|v| tri.vertex_position(v)).collect();
        images[1] = vec![0.5, 0.01];
        let f = PLMap::new(tri, images, true).unwrap();
        assert_eq!(f.validate().fixity_violations, vec![1]);
    }

    #[test]
    fn twist_example() {
        let id = pl_twist_example(2, 4, 0.0).unwrap();
        assert!((id.bilip_constant().unwrap() - 1.0).abs() < 1e-14);
        let f = pl_twist_example(3, 4, 0.8).unwrap();
        assert!(f.validate().passes());
        assert!(f.bilip_constant().unwrap() > 1.0);
        assert!(matches!(
            pl_twist_example(2, 8, 40.0),
            Err(GeomError::DisplacementTooLarge { .. })
        ));
    }

    #[test]
    fn inverse_round_trip() {
        let f = pl_random_displacement(3, 4, 0.3, 5).unwrap();
        for k in 0..200 {
            let t = k as f64 * 0.0137;
            let x = [
                (3.1 * t).sin() * 0.99,
                (1.7 * t).cos() * 0.99,
                (0.3 + t).sin() * 0.99,
            ];
            let y = f.eval(&x).unwrap();
            let back = f.eval_inverse(&y).unwrap();
            assert!(dist(&back, &x) < 1e-10, "{x:?} {back:?}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let f = pl_random_displacement(2, 3, 0.25, 9).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = PLMap::read_csv(buf.as_slice()).unwrap();
        assert_eq!(f, g);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,box_lo,box_hi,resolution,boundary_fixed\n"));
        assert!(PLMap::read_csv("garbage\n".as_bytes()).is_err());
    }
}
