//! Piecewise-linear homeomorphisms on Kuhn-triangulated boxes.
//!
//! A [`PLMap`] stores one image point per lattice vertex; on each simplex
//! it is the affine interpolation of those images, so its differential is
//! constant per simplex and its norm `sup_σ ‖T_σ f‖` is computed exactly.

mod plmap;
mod triangulation;

pub use plmap::{pl_affine, pl_random_displacement, pl_twist_example, PLMap, PlValidation};
pub use triangulation::{
    kuhn_triangulation, Location, Triangulation, BARY_TOL, MAX_DIM, MAX_RESOLUTION,
};

pub(crate) use plmap::fmt17;

use crate::error::Result;

pub fn pl_eval(f: &PLMap, x: &[f64]) -> Result<Vec<f64>> {
    f.eval(x)
}

/// `(sup_σ ‖T_σ f‖, arg-max simplex)`.
pub fn pl_differential_norm(f: &PLMap) -> Result<(f64, usize)> {
    f.differential_norm()
}

pub fn pl_bilip_constant(f: &PLMap) -> Result<f64> {
    f.bilip_constant()
}

pub fn pl_validate(f: &PLMap) -> PlValidation {
    f.validate()
}
