//! Piecewise-cubic angle profiles `θ: [0, 1] → ℝ` with continuous
//! derivative, stored as Hermite knots.

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// One Hermite knot: position, value and slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub r: f64,
    pub value: f64,
    pub slope: f64,
}

/// A C¹ piecewise-cubic function on [0, 1].
///
/// Outside [0, 1] the profile is extended by its end values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleProfile {
    knots: Vec<Knot>,
}

impl AngleProfile {
    pub fn new(knots: Vec<Knot>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(GeomError::InvalidProfile("need at least two knots".into()));
        }
        if knots[0].r != 0.0 || knots[knots.len() - 1].r != 1.0 {
            return Err(GeomError::InvalidProfile(
                "knots must start at r = 0 and end at r = 1".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1].r <= w[0].r) {
            return Err(GeomError::InvalidProfile(
                "knot positions must increase".into(),
            ));
        }
        if knots
            .iter()
            .any(|k| !(k.r.is_finite() && k.value.is_finite() && k.slope.is_finite()))
        {
            return Err(GeomError::InvalidProfile("non-finite knot".into()));
        }
        Ok(Self { knots })
    }

    /// `amplitude·(1 − 3r² + 2r³)`: equal to `amplitude` at 0, zero at 1,
    /// flat at both ends.
    pub fn bump(amplitude: f64) -> Self {
        Self {
            knots: vec![
                Knot {
                    r: 0.0,
                    value: amplitude,
                    slope: 0.0,
                },
                Knot {
                    r: 1.0,
                    value: 0.0,
                    slope: 0.0,
                },
            ],
        }
    }

    pub fn zero() -> Self {
        Self::bump(0.0)
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn is_zero(&self) -> bool {
        self.knots.iter().all(|k| k.value == 0.0 && k.slope == 0.0)
    }

    pub fn negated(&self) -> Self {
        Self {
            knots: self
                .knots
                .iter()
                .map(|k| Knot {
                    r: k.r,
                    value: -k.value,
                    slope: -k.slope,
                })
                .collect(),
        }
    }

    /// Cubic coefficients (a0..a3) in the local variable t ∈ [0, 1] of
    /// piece `p`, together with the piece start and width.
    fn piece(&self, p: usize) -> ([f64; 4], f64, f64) {
        let (k0, k1) = (self.knots[p], self.knots[p + 1]);
        let h = k1.r - k0.r;
        let (p0, p1, m0, m1) = (k0.value, k1.value, k0.slope * h, k1.slope * h);
        let a = [
            p0,
            m0,
            -3.0 * p0 - 2.0 * m0 + 3.0 * p1 - m1,
            2.0 * p0 + m0 - 2.0 * p1 + m1,
        ];
        (a, k0.r, h)
    }

    fn locate(&self, r: f64) -> (usize, f64) {
        let last = self.knots.len() - 2;
        let p = match self.knots.binary_search_by(|k| k.r.total_cmp(&r)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        };
        let (_, r0, h) = self.piece(p);
        (p, ((r - r0) / h).clamp(0.0, 1.0))
    }

    pub fn value(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.knots[0].value;
        }
        if r >= 1.0 {
            return self.knots[self.knots.len() - 1].value;
        }
        let (p, t) = self.locate(r);
        let (a, _, _) = self.piece(p);
        ((a[3] * t + a[2]) * t + a[1]) * t + a[0]
    }

    pub fn derivative(&self, r: f64) -> f64 {
        if !(0.0..=1.0).contains(&r) {
            return 0.0;
        }
        let (p, t) = self.locate(r);
        let (a, _, h) = self.piece(p);
        ((3.0 * a[3] * t + 2.0 * a[2]) * t + a[1]) / h
    }

    /// `sup_r |θ′(r)|`, from the closed-form extrema of each quadratic piece.
    pub fn sup_abs_derivative(&self) -> f64 {
        (0..self.knots.len() - 1)
            .map(|p| {
                let (a, _, h) = self.piece(p);
                let d = [a[1] / h, 2.0 * a[2] / h, 3.0 * a[3] / h];
                sup_abs_poly_unit(&d)
            })
            .fold(0.0, f64::max)
    }

    /// `sup_r |r·θ′(r)|` over [0, 1]; each piece is a cubic in t.
    pub fn sup_abs_r_derivative(&self) -> f64 {
        (0..self.knots.len() - 1)
            .map(|p| {
                let (a, r0, h) = self.piece(p);
                // θ′ = (a1 + 2a2 t + 3a3 t²)/h, r = r0 + h t
                let d = [a[1] / h, 2.0 * a[2] / h, 3.0 * a[3] / h];
                let c = [
                    r0 * d[0],
                    r0 * d[1] + h * d[0],
                    r0 * d[2] + h * d[1],
                    h * d[2],
                ];
                sup_abs_poly_unit(&c)
            })
            .fold(0.0, f64::max)
    }
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

/// `sup_{t∈[0,1]} |p(t)|` for a polynomial of degree <= 3 (ascending
/// coefficients), from endpoints and the real roots of p′.
fn sup_abs_poly_unit(c: &[f64]) -> f64 {
    let mut candidates = vec![0.0, 1.0];
    let dc: Vec<f64> = c
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| k as f64 * v)
        .collect();
    match dc.len() {
        2 if dc[1] != 0.0 => candidates.push(-dc[0] / dc[1]),
        3 => {
            let (qa, qb, qc) = (dc[2], dc[1], dc[0]);
            if qa == 0.0 {
                if qb != 0.0 {
                    candidates.push(-qc / qb);
                }
            } else {
                let disc = qb * qb - 4.0 * qa * qc;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    candidates.push((-qb + s) / (2.0 * qa));
                    candidates.push((-qb - s) / (2.0 * qa));
                }
            }
        }
        _ => {}
    }
    candidates
        .into_iter()
        .filter(|t| (0.0..=1.0).contains(t))
        .map(|t| poly_eval(c, t).abs())
        .fold(0.0, f64::max)
}
