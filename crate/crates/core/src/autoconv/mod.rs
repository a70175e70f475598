//! Periodic auto-convolution `F(x)(s) = ∫₀¹ x(s − t) x(t) dt` on `[0, 1)`.
//!
//! Functions are continuous piecewise-linear on the uniform grid `j/N` and
//! stored as `N + 1` nodal values with `x[0] = x[N]`. The data `F(x)` is
//! represented by its nodal values `f_i = ∫₀¹ x(i/N − t) x(t) dt`, computed
//! with a Gauss–Legendre rule on every subinterval. Both spaces carry the L²
//! inner product of the hat-function basis, whose Gram matrix is the
//! circulant `h/6 · [1, 4, 1]`.

mod fourier;
mod quadrature;

pub use fourier::{
    basis, conv_convexity_radius, fourier_analyze, fourier_synthesize, nodal_l2_norm_sq,
    FourierCoeffs,
};
pub use quadrature::GaussRule;

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::operator::ForwardProblem;

#[derive(Debug, Clone, PartialEq)]
pub struct AutoconvProblem {
    n: usize,
    rule: GaussRule,
    /// First column of the inverse Gram matrix (circulant).
    gram_inv: Vec<f64>,
}

const PERIODIC_TOL: f64 = 1e-12;

impl AutoconvProblem {
    /// `n` subintervals, `quad_order` Gauss points on each.
    pub fn new(n: usize, quad_order: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Config(format!("need at least 3 subintervals, got {n}")));
        }
        let rule = GaussRule::new(quad_order)?;
        let h = 1.0 / n as f64;
        let nf = n as f64;
        let eig: Vec<f64> = (0..n)
            .map(|k| h * (4.0 + 2.0 * (2.0 * PI * k as f64 / nf).cos()) / 6.0)
            .collect();
        let gram_inv = (0..n)
            .map(|m| {
                (0..n)
                    .map(|k| (2.0 * PI * (k * m) as f64 / nf).cos() / eig[k])
                    .sum::<f64>()
                    / nf
            })
            .collect();
        Ok(AutoconvProblem { n, rule, gram_inv })
    }

    pub fn subintervals(&self) -> usize {
        self.n
    }

    pub fn quad_order(&self) -> usize {
        self.rule.points()
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Samples `f` at the `N + 1` grid nodes, forcing `x[N] = x[0]`.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vector {
        let nf = self.n as f64;
        let mut v = Vector::from_fn(self.n + 1, |j| f(j as f64 / nf));
        v[self.n] = v[0];
        v
    }

    /// Validates length and the periodic identification `x[0] = x[N]`.
    pub fn check_periodic(&self, x: &Vector) -> Result<()> {
        x.check_len(self.n + 1)?;
        let (first, last) = (x[0], x[self.n]);
        if (first - last).abs() > PERIODIC_TOL * (1.0 + first.abs()) {
            return Err(Error::Periodicity { first, last });
        }
        Ok(())
    }

    fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.n as isize) as usize
    }

    fn extend(&self, mut v: Vec<f64>) -> Vector {
        v.push(v[0]);
        Vector::from_vec_unchecked(v)
    }

    /// Symmetric bilinear form `B(a, b)_i = ∫₀¹ a(i/N − t) b(t) dt` on the
    /// first `N` nodal values.
    fn bilinear(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let h = self.step();
        let mut out = vec![0.0; n];
        for (&theta, &w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            // b at t = (j + θ)h, a at (m − θ)h for m = i − j
            let bq: Vec<f64> = (0..n)
                .map(|j| (1.0 - theta) * b[j] + theta * b[(j + 1) % n])
                .collect();
            let aq: Vec<f64> = (0..n)
                .map(|m| theta * a[self.wrap(m as isize - 1)] + (1.0 - theta) * a[m])
                .collect();
            for (i, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for (j, &bj) in bq.iter().enumerate() {
                    s += aq[self.wrap(i as isize - j as isize)] * bj;
                }
                *o += w * s;
            }
        }
        out.iter_mut().for_each(|o| *o *= h);
        out
    }

    /// Euclidean transpose of `h ↦ 2B(x, h)` applied to `r`.
    fn deriv_transpose(&self, x: &[f64], r: &[f64]) -> Vec<f64> {
        let n = self.n;
        let h = self.step();
        let mut g = vec![0.0; n];
        for (&theta, &w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            let aq: Vec<f64> = (0..n)
                .map(|m| theta * x[self.wrap(m as isize - 1)] + (1.0 - theta) * x[m])
                .collect();
            for j in 0..n {
                let s: f64 = (0..n)
                    .map(|i| r[i] * aq[self.wrap(i as isize - j as isize)])
                    .sum();
                let c = 2.0 * h * w * s;
                g[j] += (1.0 - theta) * c;
                g[(j + 1) % n] += theta * c;
            }
        }
        g
    }

    /// Gram matrix product `M v`.
    fn gram(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let h = self.step();
        (0..n)
            .map(|i| h * (v[(i + n - 1) % n] + 4.0 * v[i] + v[(i + 1) % n]) / 6.0)
            .collect()
    }

    fn gram_solve(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.gram_inv[(i + n - j) % n] * v[j])
                    .sum()
            })
            .collect()
    }

    fn periodic_inner(&self, a: &Vector, b: &Vector) -> f64 {
        let n = self.n;
        let mb = self.gram(&b.as_slice()[..n]);
        a.as_slice()[..n].iter().zip(&mb).map(|(x, y)| x * y).sum()
    }

    /// Evaluates a nodal vector as a periodic piecewise-linear function.
    pub fn interpolate(&self, x: &Vector, s: f64) -> f64 {
        let nf = self.n as f64;
        let u = s.rem_euclid(1.0) * nf;
        let j = (u.floor() as usize).min(self.n - 1);
        let theta = u - j as f64;
        (1.0 - theta) * x[j] + theta * x[j + 1]
    }
}

impl ForwardProblem for AutoconvProblem {
    fn domain_dim(&self) -> usize {
        self.n + 1
    }

    fn range_dim(&self) -> usize {
        self.n + 1
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        self.check_periodic(x)?;
        let xs = &x.as_slice()[..self.n];
        Ok(self.extend(self.bilinear(xs, xs)))
    }

    fn deriv_apply(&self, x: &Vector, h: &Vector) -> Result<Vector> {
        self.check_periodic(x)?;
        self.check_periodic(h)?;
        let f = self.bilinear(&x.as_slice()[..self.n], &h.as_slice()[..self.n]);
        Ok(self.extend(f.into_iter().map(|v| 2.0 * v).collect()))
    }

    fn adjoint_apply(&self, x: &Vector, r: &Vector) -> Result<Vector> {
        self.check_periodic(x)?;
        self.check_periodic(r)?;
        let mr = self.gram(&r.as_slice()[..self.n]);
        let g = self.deriv_transpose(&x.as_slice()[..self.n], &mr);
        Ok(self.extend(self.gram_solve(&g)))
    }

    fn second_deriv_apply(&self, x: &Vector, h: &Vector, w: &Vector) -> Result<Vector> {
        self.check_periodic(x)?;
        self.check_periodic(h)?;
        self.check_periodic(w)?;
        let f = self.bilinear(&h.as_slice()[..self.n], &w.as_slice()[..self.n]);
        Ok(self.extend(f.into_iter().map(|v| 2.0 * v).collect()))
    }

    fn has_second_derivative(&self) -> bool {
        true
    }

    fn domain_inner(&self, a: &Vector, b: &Vector) -> f64 {
        self.periodic_inner(a, b)
    }

    fn range_inner(&self, a: &Vector, b: &Vector) -> f64 {
        self.periodic_inner(a, b)
    }

    fn admissible_domain(&self, mut v: Vector) -> Vector {
        v[self.n] = v[0];
        v
    }

    fn admissible_range(&self, mut v: Vector) -> Vector {
        v[self.n] = v[0];
        v
    }
}
