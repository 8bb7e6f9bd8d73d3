use std::sync::Arc;

use super::disk::DiskMap;
use super::sphere::SphereMap;
use super::spiral::SpiralProfile;
use crate::error::{GeomError, Result};
use crate::linalg::{norm, operator_norm, scaled, MatrixN, VectorN};
use crate::pl::PLMap;

/// Upper limit on explicit replica lists.
pub const MAX_REPLICAS: usize = 1_000_000;

/// The family of disk maps placed on the translated disks D_{2j}.
#[derive(Clone, Debug, PartialEq)]
pub enum Replicas {
    /// The same map on every disk D_{2j}, j >= 0.
    Uniform(DiskMap),
    /// g_j on D_{2j} for j < len; the identity elsewhere.
    List(Vec<DiskMap>),
}

impl Replicas {
    fn dim(&self) -> Option<usize> {
        match self {
            Replicas::Uniform(g) => Some(g.dim()),
            Replicas::List(gs) => gs.first().map(DiskMap::dim),
        }
    }

    fn get(&self, j: usize) -> Option<&DiskMap> {
        match self {
            Replicas::Uniform(g) => Some(g),
            Replicas::List(gs) => gs.get(j),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapNode {
    Identity,
    Affine {
        matrix: MatrixN,
        offset: VectorN,
        inverse: Option<MatrixN>,
    },
    /// v ↦ |v|·φ(v/|v|), 0 ↦ 0.
    RadialExt(SphereMap),
    /// The product of the conjugates ρ_j g ρ_j⁻¹, ρ_j(v) = 4^j e_1 + 2^j v.
    Psi(DiskMap),
    /// The product of the translates τ_{2j} g_j τ_{2j}⁻¹.
    Translated(Replicas),
    Product(Box<MapExpr>, Box<MapExpr>),
    /// x ↦ f(|x|)·x.
    Spiral(SpiralProfile),
    Pl(Arc<PLMap>),
    /// `maps[0] ∘ maps[1] ∘ …`.
    Compose(Vec<MapExpr>),
    Inverse(Box<MapExpr>),
}

/// An exactly evaluable self-map of R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct MapExpr {
    node: MapNode,
    dim: usize,
    lambda: Option<f64>,
}

/// Centre offset and radius of the replication disk C_j: `(4^j, 2^j)` for
/// j >= 1, and C_0 is the unit disk itself (ρ_0 = id).
pub fn replication_disk(j: u32) -> (f64, f64) {
    if j == 0 {
        (0.0, 1.0)
    } else {
        (4f64.powi(j as i32), 2f64.powi(j as i32))
    }
}

/// The unique j with v ∈ C_j, if any.
pub fn locate_replication_disk(v: &[f64]) -> Option<u32> {
    let r = norm(v);
    let top = ((r + 2.0).ln() / 4f64.ln()).ceil() as u32 + 1;
    (0..=top).find(|&j| {
        let (c, rad) = replication_disk(j);
        let d2: f64 = v
            .iter()
            .enumerate()
            .map(|(k, x)| if k == 0 { (x - c) * (x - c) } else { x * x })
            .sum();
        d2.sqrt() <= rad
    })
}

/// The j with |v − 2j·e_1| <= 1, if any (touching disks resolve to the
/// lower index).
pub fn locate_translated_disk(v: &[f64]) -> Option<usize> {
    let first = v[0];
    if first < -1.0 {
        return None;
    }
    let base = (first / 2.0).floor().max(0.0) as usize;
    (base..=base + 1).find(|&j| {
        let c = 2.0 * j as f64;
        let d2: f64 = v
            .iter()
            .enumerate()
            .map(|(k, x)| if k == 0 { (x - c) * (x - c) } else { x * x })
            .sum();
        d2 <= 1.0
    })
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(GeomError::DimMismatch { expected, got })
    }
}

impl MapExpr {
    pub fn identity(n: usize) -> Self {
        Self {
            node: MapNode::Identity,
            dim: n,
            lambda: Some(1.0),
        }
    }

    pub fn affine(matrix: MatrixN, offset: VectorN) -> Result<Self> {
        check_dim(matrix.dim(), offset.dim())?;
        let inverse = matrix.inverse().ok();
        let lambda = match &inverse {
            Some(inv) => Some(operator_norm(&matrix)?.max(operator_norm(inv)?)),
            None => None,
        };
        Ok(Self {
            dim: matrix.dim(),
            node: MapNode::Affine {
                matrix,
                offset,
                inverse,
            },
            lambda,
        })
    }

    /// Wraps a PL map; the box boundary must be fixed so the map extends
    /// by the identity to all of R^n.
    pub fn pl(map: PLMap) -> Result<Self> {
        if !map.boundary_fixed() {
            return Err(GeomError::InvalidTriangulation(
                "a PL map expression must fix the box boundary".into(),
            ));
        }
        let lambda = map.bilip_constant()?;
        Ok(Self {
            dim: map.dim(),
            node: MapNode::Pl(Arc::new(map)),
            lambda: Some(lambda),
        })
    }

    pub fn compose_all(maps: Vec<MapExpr>) -> Result<Self> {
        let dim = maps
            .first()
            .ok_or_else(|| GeomError::InvalidPoint("empty composition".into()))?
            .dim;
        for m in &maps {
            check_dim(dim, m.dim)?;
        }
        let lambda = maps
            .iter()
            .try_fold(1.0, |acc, m| m.lambda.map(|l| acc * l));
        Ok(Self {
            node: MapNode::Compose(maps),
            dim,
            lambda,
        })
    }

    pub fn inverse(self) -> Self {
        let (dim, lambda) = (self.dim, self.lambda);
        if let MapNode::Inverse(inner) = self.node {
            return *inner;
        }
        Self {
            node: MapNode::Inverse(Box::new(self)),
            dim,
            lambda,
        }
    }

    pub fn node(&self) -> &MapNode {
        &self.node
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Theoretical bi-Lipschitz constant propagated by the constructors.
    pub fn lambda_theoretical(&self) -> Option<f64> {
        self.lambda
    }

    pub fn is_invertible(&self) -> bool {
        match &self.node {
            MapNode::Affine { inverse, .. } => inverse.is_some(),
            MapNode::Product(f, g) => f.is_invertible() && g.is_invertible(),
            MapNode::Compose(maps) => maps.iter().all(MapExpr::is_invertible),
            MapNode::Inverse(inner) => inner.is_invertible(),
            _ => true,
        }
    }

    pub fn eval(&self, v: &VectorN) -> Result<VectorN> {
        check_dim(self.dim, v.dim())?;
        Ok(VectorN::from_vec_unchecked(self.apply(v)))
    }

    pub fn eval_slice(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        if x.iter().any(|c| !c.is_finite()) {
            return Err(GeomError::InvalidPoint("non-finite coordinate".into()));
        }
        Ok(self.apply(x))
    }

    pub fn eval_inverse(&self, v: &VectorN) -> Result<VectorN> {
        check_dim(self.dim, v.dim())?;
        if !self.is_invertible() {
            return Err(GeomError::NotInvertible("singular affine component".into()));
        }
        Ok(VectorN::from_vec_unchecked(self.apply_dir(v, true)))
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.apply_dir(x, false)
    }

    pub(crate) fn apply_dir(&self, x: &[f64], inverse: bool) -> Vec<f64> {
        match &self.node {
            MapNode::Identity => x.to_vec(),
            MapNode::Affine {
                matrix,
                offset,
                inverse: inv,
            } => {
                if inverse {
                    let shifted: Vec<f64> =
                        x.iter().zip(offset.iter()).map(|(a, b)| a - b).collect();
                    inv.as_ref()
                        .expect("invertibility checked")
                        .mul_vec(&shifted)
                } else {
                    let mut y = matrix.mul_vec(x);
                    y.iter_mut().zip(offset.iter()).for_each(|(a, b)| *a += b);
                    y
                }
            }
            MapNode::RadialExt(phi) => {
                let r = norm(x);
                if r == 0.0 {
                    return x.to_vec();
                }
                let u = scaled(x, 1.0 / r);
                let z = if inverse {
                    phi.apply_inverse(&u)
                } else {
                    phi.apply(&u)
                };
                scaled(&z, r)
            }
            MapNode::Psi(g) => match locate_replication_disk(x) {
                Some(j) => {
                    let (c, rad) = replication_disk(j);
                    let mut u: Vec<f64> = x.iter().map(|v| v / rad).collect();
                    u[0] = (x[0] - c) / rad;
                    let mut z = if inverse {
                        g.apply_inverse(&u)
                    } else {
                        g.apply(&u)
                    };
                    z.iter_mut().for_each(|v| *v *= rad);
                    z[0] += c;
                    z
                }
                None => x.to_vec(),
            },
            MapNode::Translated(reps) => {
                match locate_translated_disk(x).and_then(|j| reps.get(j).map(|g| (j, g))) {
                    Some((j, g)) => {
                        let c = 2.0 * j as f64;
                        let mut u = x.to_vec();
                        u[0] -= c;
                        let mut z = if inverse {
                            g.apply_inverse(&u)
                        } else {
                            g.apply(&u)
                        };
                        z[0] += c;
                        z
                    }
                    None => x.to_vec(),
                }
            }
            MapNode::Product(f, g) => {
                let (a, b) = x.split_at(f.dim);
                let mut out = f.apply_dir(a, inverse);
                out.extend(g.apply_dir(b, inverse));
                out
            }
            MapNode::Spiral(p) => {
                let r = norm(x);
                if r == 0.0 {
                    x.to_vec()
                } else {
                    p.rotate(r, x, inverse)
                }
            }
            MapNode::Pl(map) => if inverse {
                map.eval_inverse(x)
            } else {
                map.eval(x)
            }
            .expect("boundary-fixed PL maps are defined everywhere"),
            MapNode::Compose(maps) => {
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
            MapNode::Inverse(inner) => inner.apply_dir(x, !inverse),
        }
    }

    /// f(x) − x, evaluated through the structure of the map so that the
    /// result keeps its relative precision far from the origin.
    pub fn displacement(&self, x: &[f64]) -> Vec<f64> {
        let diff = |y: Vec<f64>| -> Vec<f64> { y.iter().zip(x).map(|(a, b)| a - b).collect() };
        match &self.node {
            MapNode::Identity => vec![0.0; x.len()],
            MapNode::RadialExt(phi) => {
                let r = norm(x);
                if r == 0.0 {
                    return vec![0.0; x.len()];
                }
                let u = scaled(x, 1.0 / r);
                let z = phi.apply(&u);
                z.iter().zip(&u).map(|(a, b)| r * (a - b)).collect()
            }
            MapNode::Psi(g) => match locate_replication_disk(x) {
                Some(j) => {
                    let (c, rad) = replication_disk(j);
                    let mut u: Vec<f64> = x.iter().map(|v| v / rad).collect();
                    u[0] = (x[0] - c) / rad;
                    let z = g.apply(&u);
                    z.iter().zip(&u).map(|(a, b)| rad * (a - b)).collect()
                }
                None => vec![0.0; x.len()],
            },
            MapNode::Translated(reps) => {
                match locate_translated_disk(x).and_then(|j| reps.get(j).map(|g| (j, g))) {
                    Some((j, g)) => {
                        let mut u = x.to_vec();
                        u[0] -= 2.0 * j as f64;
                        let z = g.apply(&u);
                        z.iter().zip(&u).map(|(a, b)| a - b).collect()
                    }
                    None => vec![0.0; x.len()],
                }
            }
            MapNode::Product(f, g) => {
                let (a, b) = x.split_at(f.dim);
                let mut out = f.displacement(a);
                out.extend(g.displacement(b));
                out
            }
            MapNode::Compose(maps) => {
                let mut y = x.to_vec();
                let mut total = vec![0.0; x.len()];
                for m in maps.iter().rev() {
                    let d = m.displacement(&y);
                    total.iter_mut().zip(&d).for_each(|(t, v)| *t += v);
                    y = m.apply(&y);
                }
                total
            }
            _ => diff(self.apply(x)),
        }
    }
}

/// `φ̃(v) = |v|·φ(v/|v|)`, with declared constant 1 + λ(φ).
pub fn radial_extension(phi: SphereMap) -> MapExpr {
    MapExpr {
        dim: phi.dim(),
        lambda: phi.lambda_theoretical().map(|l| 1.0 + l),
        node: MapNode::RadialExt(phi),
    }
}

/// Ψ(g): ρ_j g ρ_j⁻¹ on every disk C_j, the identity elsewhere. The
/// declared constant is that of g.
pub fn disk_replication(g: DiskMap) -> MapExpr {
    MapExpr {
        dim: g.dim(),
        lambda: g.lambda_theoretical(),
        node: MapNode::Psi(g),
    }
}

/// Φ((g_j)): τ_{2j} g_j τ_{2j}⁻¹ on every disk D_{2j}.
pub fn translated_replication(reps: Replicas) -> Result<MapExpr> {
    let dim = reps
        .dim()
        .ok_or_else(|| GeomError::InvalidPoint("empty replica list".into()))?;
    let lambda = match &reps {
        Replicas::Uniform(g) => g.lambda_theoretical(),
        Replicas::List(gs) => {
            if gs.len() > MAX_REPLICAS {
                return Err(GeomError::Config(format!(
                    "replica list longer than {MAX_REPLICAS}"
                )));
            }
            for g in gs {
                check_dim(dim, g.dim())?;
            }
            gs.iter()
                .try_fold(1.0f64, |acc, g| g.lambda_theoretical().map(|l| acc.max(l)))
        }
    };
    Ok(MapExpr {
        dim,
        lambda,
        node: MapNode::Translated(reps),
    })
}

/// f × g on R^{k+l}.
pub fn product_map(f: MapExpr, g: MapExpr) -> MapExpr {
    let lambda = match (f.lambda, g.lambda) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };
    MapExpr {
        dim: f.dim + g.dim,
        lambda,
        node: MapNode::Product(Box::new(f), Box::new(g)),
    }
}

/// φ_f(x) = f(|x|)·x, with declared constant n·C + 1.
pub fn spiral_map(p: SpiralProfile) -> MapExpr {
    MapExpr {
        dim: p.dim(),
        lambda: Some(p.dim() as f64 * p.c_bound() + 1.0),
        node: MapNode::Spiral(p),
    }
}

/// `f ∘ g`.
pub fn compose(f: MapExpr, g: MapExpr) -> Result<MapExpr> {
    MapExpr::compose_all(vec![f, g])
}

/// Central-difference Jacobian; the default step is 1e-5·max(1, |x|).
pub fn jacobian_fd(m: &MapExpr, x: &[f64], h: Option<f64>) -> Result<MatrixN> {
    check_dim(m.dim, x.len())?;
    let n = x.len();
    let h = h.unwrap_or(1e-5 * norm(x).max(1.0));
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let (fp, fm) = (m.apply(&xp), m.apply(&xm));
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
        );
    }
    Ok(MatrixN::from_columns(&cols))
}
