//! Real Fourier basis on `[0, 1)`: `e⁽⁰⁾ = 1`, `e⁽ᵏ⁾ = √2 sin(2πks)` and
//! `e⁽⁻ᵏ⁾ = √2 cos(2πks)` for `k ≥ 1`.
//!
//! Coefficients are computed from nodal values `x_j = x(j/N)` by the
//! discrete inner product `(1/N) Σ_j x_j e⁽ᵏ⁾(j/N)`, which is exact for
//! trigonometric polynomials of degree below `N/2`.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use crate::diagonal::ConvexityRadius;
use crate::error::{Error, Result};
use crate::hilbert::Vector;

/// Sparse set of real Fourier coefficients keyed by signed mode index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierCoeffs {
    pub coeffs: BTreeMap<i64, f64>,
}

impl FourierCoeffs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, f64)>) -> Self {
        FourierCoeffs {
            coeffs: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, k: i64) -> f64 {
        self.coeffs.get(&k).copied().unwrap_or(0.0)
    }

    /// Drops coefficients with `|c| ≤ tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        FourierCoeffs {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(&k, &c)| (k, c))
                .collect(),
        }
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }

    pub fn max_mode(&self) -> u64 {
        self.coeffs.keys().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    /// Evaluates `Σ c_k e⁽ᵏ⁾(s)`.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().map(|(&k, &c)| c * basis(k, s)).sum()
    }
}

/// `e⁽ᵏ⁾(s)`
pub fn basis(k: i64, s: f64) -> f64 {
    let arg = 2.0 * PI * k.unsigned_abs() as f64 * s;
    match k {
        0 => 1.0,
        k if k > 0 => SQRT_2 * arg.sin(),
        _ => SQRT_2 * arg.cos(),
    }
}

fn grid_size(x: &Vector) -> Result<usize> {
    if x.len() < 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: x.len(),
        });
    }
    Ok(x.len() - 1)
}

/// Coefficients of modes `−kmax..=kmax` from `N + 1` periodic nodal values.
pub fn fourier_analyze(x: &Vector, kmax: usize) -> Result<FourierCoeffs> {
    let n = grid_size(x)?;
    if 2 * kmax > n {
        return Err(Error::Aliasing {
            requested: kmax,
            resolvable: n / 2,
        });
    }
    let nf = n as f64;
    let mut out = BTreeMap::new();
    for k in -(kmax as i64)..=(kmax as i64) {
        let mut c: f64 = (0..n).map(|j| x[j] * basis(k, j as f64 / nf)).sum::<f64>() / nf;
        // Nyquist cosine has discrete norm 2 instead of 1
        if k != 0 && 2 * k.unsigned_abs() as usize == n {
            c *= 0.5;
        }
        out.insert(k, c);
    }
    Ok(FourierCoeffs { coeffs: out })
}

/// Nodal values `x(j/N)`, `j = 0..=N`, of the trigonometric polynomial `c`.
pub fn fourier_synthesize(c: &FourierCoeffs, n: usize) -> Result<Vector> {
    if n == 0 {
        return Err(Error::Config("grid size must be positive".into()));
    }
    let kmax = c.max_mode() as usize;
    if 2 * kmax > n {
        return Err(Error::Aliasing {
            requested: kmax,
            resolvable: n / 2,
        });
    }
    let mut v = Vector::from_fn(n + 1, |j| c.eval(j as f64 / n as f64));
    v[n] = v[0];
    Ok(v)
}

/// `(1/N) Σ_{j<N} x_j²`, the nodal L² norm squared matching [`fourier_analyze`].
pub fn nodal_l2_norm_sq(x: &Vector) -> Result<f64> {
    let n = grid_size(x)?;
    Ok((0..n).map(|j| x[j] * x[j]).sum::<f64>() / n as f64)
}

/// Largest `ρ` with `c_k² ≥ 28|c_k|ρ + δ̄(2ȳ + δ̄)` for every mode in the
/// support of `xdag`.
pub fn conv_convexity_radius(xdag: &FourierCoeffs, ybar: f64, deltabar: f64) -> ConvexityRadius {
    if xdag.coeffs.is_empty() {
        return ConvexityRadius::infeasible();
    }
    let slack = deltabar * (2.0 * ybar + deltabar);
    let mut rho = f64::INFINITY;
    for &c in xdag.coeffs.values() {
        let a = c.abs();
        if a == 0.0 {
            return ConvexityRadius::infeasible();
        }
        rho = rho.min((a * a - slack) / (28.0 * a));
    }
    if rho <= 0.0 {
        return ConvexityRadius::infeasible();
    }
    ConvexityRadius {
        rho,
        feasible: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyzes_offset_sine() {
        let c = FourierCoeffs::from_pairs([(0, 10.0), (1, 1.0)]);
        let x = fourier_synthesize(&c, 32).unwrap();
        let got = fourier_analyze(&x, 16).unwrap();
        for (k, v) in &got.coeffs {
            let want = c.get(*k);
            assert!((v - want).abs() <= 1e-10, "mode {k}: {v}");
        }
    }

    #[test]
    fn zero_function_has_zero_coefficients() {
        let got = fourier_analyze(&Vector::zeros(33), 16).unwrap();
        assert!(got.coeffs.values().all(|&c| c == 0.0));
    }

    #[test]
    fn nyquist_round_trip() {
        let c = FourierCoeffs::from_pairs([(-4, 0.7), (2, -1.5)]);
        let x = fourier_synthesize(&c, 8).unwrap();
        let back = fourier_analyze(&x, 4).unwrap();
        assert!((back.get(-4) - 0.7).abs() < 1e-12);
        assert!((back.get(2) + 1.5).abs() < 1e-12);
    }

    #[test]
    fn aliasing_rejected() {
        assert!(matches!(
            fourier_analyze(&Vector::zeros(33), 17),
            Err(Error::Aliasing { requested: 17, resolvable: 16 })
        ));
        let c = FourierCoeffs::from_pairs([(9, 1.0)]);
        assert!(fourier_synthesize(&c, 16).is_err());
    }

    #[test]
    fn radius_examples() {
        let r = conv_convexity_radius(&FourierCoeffs::from_pairs([(0, 10.0), (1, 1.0)]), 0.0, 0.0);
        assert!(r.feasible && (r.rho - 1.0 / 28.0).abs() < 1e-15);
        let r = conv_convexity_radius(&FourierCoeffs::from_pairs([(0, 3.0)]), 0.0, 0.0);
        assert!((r.rho - 3.0 / 28.0).abs() < 1e-15);
        let r = conv_convexity_radius(&FourierCoeffs::from_pairs([(0, 3.0), (2, 0.0)]), 0.0, 0.0);
        assert!(!r.feasible && r.rho == 0.0);
    }
}
