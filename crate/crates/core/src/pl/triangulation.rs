//! Kuhn (coordinate-ordering) triangulation of a cubical grid on `[a, b]^n`.
//!
//! The cube with lower corner `c` is split into n! simplices, one per
//! permutation π of the axes: vertices `c, c + e_{π(1)}, c + e_{π(1)} +
//! e_{π(2)}, …`. Simplex ids are `cube_index · n! + permutation_rank` with
//! permutations ranked lexicographically.

use crate::error::{GeomError, Result};

pub const MAX_DIM: usize = 6;
pub const MAX_RESOLUTION: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Triangulation {
    dim: usize,
    lo: f64,
    hi: f64,
    resolution: usize,
    perms: Vec<Vec<usize>>,
}

/// The simplex containing a point together with its barycentric weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Location {
    pub simplex: usize,
    /// Vertex indices v_0..v_n along the Kuhn path.
    pub vertices: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Barycentric tolerance for containment.
pub const BARY_TOL: f64 = 1e-12;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Kuhn triangulation of `[lo, hi]^n` with `resolution` cells per axis.
pub fn kuhn_triangulation(n: usize, lo: f64, hi: f64, resolution: usize) -> Result<Triangulation> {
    Triangulation::new(n, lo, hi, resolution)
}

impl Triangulation {
    pub fn new(dim: usize, lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(GeomError::EmptyGrid);
        }
        if dim == 0 || dim > MAX_DIM {
            return Err(GeomError::InvalidTriangulation(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if resolution > MAX_RESOLUTION {
            return Err(GeomError::InvalidTriangulation(format!(
                "resolution {resolution} exceeds {MAX_RESOLUTION}"
            )));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(GeomError::InvalidTriangulation(format!(
                "bad box [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            dim,
            lo,
            hi,
            resolution,
            perms: permutations(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn cell_size(&self) -> f64 {
        (self.hi - self.lo) / self.resolution as f64
    }

    pub fn vertex_count(&self) -> usize {
        (self.resolution + 1).pow(self.dim as u32)
    }

    pub fn cube_count(&self) -> usize {
        self.resolution.pow(self.dim as u32)
    }

    pub fn simplices_per_cube(&self) -> usize {
        factorial(self.dim)
    }

    pub fn simplex_count(&self) -> usize {
        self.cube_count() * self.simplices_per_cube()
    }

    /// Lattice multi-index of a vertex.
    pub fn vertex_lattice(&self, v: usize) -> Vec<usize> {
        let base = self.resolution + 1;
        let mut rem = v;
        (0..self.dim)
            .map(|_| {
                let d = rem % base;
                rem /= base;
                d
            })
            .collect()
    }

    pub fn vertex_index(&self, lattice: &[usize]) -> usize {
        let base = self.resolution + 1;
        lattice.iter().rev().fold(0, |acc, &d| acc * base + d)
    }

    pub fn vertex_position(&self, v: usize) -> Vec<f64> {
        let h = self.cell_size();
        self.vertex_lattice(v)
            .into_iter()
            .map(|d| {
                if d == self.resolution {
                    self.hi
                } else {
                    self.lo + d as f64 * h
                }
            })
            .collect()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_lattice(v)
            .iter()
            .any(|&d| d == 0 || d == self.resolution)
    }

    fn cube_lattice(&self, cube: usize) -> Vec<usize> {
        let mut rem = cube;
        (0..self.dim)
            .map(|_| {
                let d = rem % self.resolution;
                rem /= self.resolution;
                d
            })
            .collect()
    }

    fn cube_index(&self, lattice: &[usize]) -> usize {
        lattice
            .iter()
            .rev()
            .fold(0, |acc, &d| acc * self.resolution + d)
    }

    /// Permutation of axes defining simplex `s` within its cube.
    pub fn simplex_permutation(&self, s: usize) -> &[usize] {
        &self.perms[s % self.simplices_per_cube()]
    }

    /// Vertex indices v_0..v_n of simplex `s` along its Kuhn path.
    pub fn simplex_vertices(&self, s: usize) -> Vec<usize> {
        let cube = s / self.simplices_per_cube();
        let perm = self.simplex_permutation(s);
        let mut lattice = self.cube_lattice(cube);
        let mut out = Vec::with_capacity(self.dim + 1);
        out.push(self.vertex_index(&lattice));
        for &axis in perm {
            lattice[axis] += 1;
            out.push(self.vertex_index(&lattice));
        }
        out
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().all(|&c| c >= self.lo && c <= self.hi)
    }

    /// Locates the simplex containing `x`; ties on shared faces go to the
    /// lexicographically smallest axis ordering.
    pub fn locate(&self, x: &[f64]) -> Option<Location> {
        if x.len() != self.dim || !self.contains(x) {
            return None;
        }
        let h = self.cell_size();
        let mut cube = Vec::with_capacity(self.dim);
        let mut local = Vec::with_capacity(self.dim);
        for &c in x {
            let t = (c - self.lo) / h;
            let k = (t.floor() as usize).min(self.resolution - 1);
            cube.push(k);
            local.push((t - k as f64).clamp(0.0, 1.0));
        }
        let mut perm: Vec<usize> = (0..self.dim).collect();
        // descending local coordinate, ascending axis on ties
        perm.sort_by(|&a, &b| local[b].total_cmp(&local[a]).then(a.cmp(&b)));
        let rank = self
            .perms
            .binary_search(&perm)
            .expect("every ordering is a Kuhn simplex");
        let simplex = self.cube_index(&cube) * self.simplices_per_cube() + rank;
        let mut weights = Vec::with_capacity(self.dim + 1);
        weights.push(1.0 - local[perm[0]]);
        for m in 1..self.dim {
            weights.push(local[perm[m - 1]] - local[perm[m]]);
        }
        weights.push(local[perm[self.dim - 1]]);
        let mut vertices = Vec::with_capacity(self.dim + 1);
        let mut lattice = cube;
        vertices.push(self.vertex_index(&lattice));
        for &axis in &perm {
            lattice[axis] += 1;
            vertices.push(self.vertex_index(&lattice));
        }
        Some(Location {
            simplex,
            vertices,
            weights,
        })
    }

    /// Simplex ids of all cubes at Chebyshev distance exactly `ring` from
    /// the cube containing `x` (clamped into the grid).
    pub(crate) fn simplices_in_ring(&self, x: &[f64], ring: usize) -> Vec<usize> {
        let h = self.cell_size();
        let centre: Vec<i64> = x
            .iter()
            .map(|&c| (((c - self.lo) / h).floor() as i64).clamp(0, self.resolution as i64 - 1))
            .collect();
        let r = ring as i64;
        let span = 2 * r + 1;
        let mut out = Vec::new();
        let total = span.pow(self.dim as u32);
        for code in 0..total {
            let mut rem = code;
            let mut lattice = Vec::with_capacity(self.dim);
            let mut on_ring = false;
            let mut inside = true;
            for &c in &centre {
                let off = rem % span - r;
                rem /= span;
                if off.abs() == r {
                    on_ring = true;
                }
                let k = c + off;
                if k < 0 || k >= self.resolution as i64 {
                    inside = false;
                }
                lattice.push(k as usize);
            }
            if on_ring && inside {
                let base = self.cube_index(&lattice) * self.simplices_per_cube();
                out.extend(base..base + self.simplices_per_cube());
            }
        }
        out
    }

    /// Volume of a source simplex: `h^n / n!`.
    pub fn simplex_volume(&self) -> f64 {
        self.cell_size().powi(self.dim as i32) / self.simplices_per_cube() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::MatrixN;

    #[test]
    fn counts() {
        let t = kuhn_triangulation(2, 0.0, 1.0, 1).unwrap();
        assert_eq!(t.simplex_count(), 2);
        assert_eq!(t.vertex_count(), 4);
        let t = kuhn_triangulation(3, 0.0, 1.0, 1).unwrap();
        assert_eq!(t.simplex_count(), 6);
        let t = kuhn_triangulation(3, -1.0, 1.0, 5).unwrap();
        assert_eq!(t.vertex_count(), 216);
        assert!(matches!(
            kuhn_triangulation(2, 0.0, 1.0, 0),
            Err(GeomError::EmptyGrid)
        ));
    }

    #[test]
    fn simplices_nondegenerate_and_tile() {
        for n in 1..=4 {
            let t = kuhn_triangulation(n, -1.0, 2.0, 3).unwrap();
            let mut total = 0.0;
            for s in 0..t.simplex_count() {
                let vs = t.simplex_vertices(s);
                let p0 = t.vertex_position(vs[0]);
                let cols: Vec<Vec<f64>> = vs[1..]
                    .iter()
                    .map(|&v| {
                        t.vertex_position(v)
                            .iter()
                            .zip(&p0)
                            .map(|(a, b)| a - b)
                            .collect()
                    })
                    .collect();
                let det = MatrixN::from_columns(&cols).det().abs();
                assert!(det > 0.0);
                total += det / (1..=n).product::<usize>() as f64;
            }
            let box_vol = 3f64.powi(n as i32);
            assert!((total - box_vol).abs() <= 1e-9 * box_vol);
        }
    }

    #[test]
    fn locate_reproduces_point() {
        let t = kuhn_triangulation(3, -1.0, 1.0, 4).unwrap();
        for x in [
            [0.1, -0.3, 0.77],
            [-1.0, -1.0, -1.0],
            [1.0, 0.5, 0.5],
            [0.0, 0.0, 0.0],
        ] {
            let loc = t.locate(&x).unwrap();
            assert!(loc.weights.iter().all(|&w| w >= -BARY_TOL));
            assert!((loc.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert_eq!(loc.vertices, t.simplex_vertices(loc.simplex));
            let mut y = [0.0; 3];
            for (v, w) in loc.vertices.iter().zip(&loc.weights) {
                for (yi, pi) in y.iter_mut().zip(t.vertex_position(*v)) {
                    *yi += w * pi;
                }
            }
            for k in 0..3 {
                assert!((y[k] - x[k]).abs() < 1e-14);
            }
        }
        assert!(t.locate(&[1.5, 0.0, 0.0]).is_none());
    }

    #[test]
    fn ties_pick_smallest_ordering() {
        let t = kuhn_triangulation(2, 0.0, 1.0, 1).unwrap();
        // on the diagonal both orderings contain the point
        let loc = t.locate(&[0.5, 0.5]).unwrap();
        assert_eq!(t.simplex_permutation(loc.simplex), &[0, 1]);
    }
}
