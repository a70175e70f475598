//! Dense real vectors and the metric projection onto a closed ball.
//!
//! Vectors carry plain coordinates; the Euclidean inner product defined here
//! is the default geometry. Problems that live in a weighted space (for
//! instance piecewise-linear functions with an L² Gram matrix) supply their
//! own inner product through [`crate::operator::ForwardProblem`].

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// A finite-dimensional real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(index) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Vector(coords))
    }

    /// Wraps coordinates without validation. Used internally on hot paths
    /// where finiteness is checked separately.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Self {
        Vector((0..len).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::Dimension {
                expected,
                got: self.len(),
            });
        }
        Ok(())
    }

    /// `self + a * other`
    pub fn add_scaled(&self, a: f64, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| x + a * y)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(&other.0).map(|(x, y)| x - y).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(&other.0).map(|(x, y)| x + y).collect())
    }

    pub fn scale(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|x| a * x).collect())
    }

    /// Componentwise product.
    pub fn hadamard(&self, other: &Vector) -> Vector {
        debug_assert_eq!(self.len(), other.len());
        Vector(self.0.iter().zip(&other.0).map(|(x, y)| x * y).collect())
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Vector::new(v)
    }
}

/// Euclidean inner product.
pub fn inner(a: &Vector, b: &Vector) -> Result<f64> {
    b.check_len(a.len())?;
    Ok(a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum())
}

/// Euclidean norm, scaled to avoid underflow and overflow.
pub fn norm(v: &Vector) -> f64 {
    let m = v.0.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * v.0.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
}

/// Closed ball `{x : ‖x − center‖ ≤ radius}` used as the feasible set of the
/// proximal step. When `enabled` is false the projection is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct BallConstraint {
    center: Vector,
    radius: f64,
    enabled: bool,
}

impl BallConstraint {
    pub fn new(center: Vector, radius: f64, enabled: bool) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(BallConstraint {
            center,
            radius,
            enabled,
        })
    }

    /// A ball that never constrains anything.
    pub fn disabled(center: Vector) -> Self {
        BallConstraint {
            center,
            radius: f64::INFINITY,
            enabled: false,
        }
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    /// Membership test under a caller-supplied distance.
    pub fn contains_with(&self, v: &Vector, dist: impl Fn(&Vector) -> f64) -> bool {
        !self.enabled || dist(&v.sub(&self.center)) <= self.radius
    }
}

/// Metric projection onto the ball in the Euclidean geometry.
pub fn project_ball(ball: &BallConstraint, v: &Vector) -> Result<Vector> {
    project_ball_with(ball, v, norm)
}

/// Metric projection onto the ball where distances are measured by `norm_fn`.
///
/// `norm_fn` must be a norm induced by an inner product; radial scaling is
/// then the exact projection.
pub fn project_ball_with(
    ball: &BallConstraint,
    v: &Vector,
    norm_fn: impl Fn(&Vector) -> f64,
) -> Result<Vector> {
    v.check_len(ball.center.len())?;
    if let Some(index) = v.0.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if !ball.enabled {
        return Ok(v.clone());
    }
    let offset = v.sub(&ball.center);
    let dist = norm_fn(&offset);
    // boundary points are returned as-is
    if dist <= ball.radius {
        return Ok(v.clone());
    }
    Ok(ball.center.add_scaled(ball.radius / dist, &offset))
}
