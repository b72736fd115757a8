//! Dense complex linear algebra and polynomial utilities for the small
//! (2N x 2N, N up to ~16) matrices that show up in oscillator analysis.

pub(crate) mod dense;
mod poly;

pub(crate) use dense::rank_with_scale as dense_rank_with_scale;

pub use dense::{
    eigenvalues, frobenius_norm, matrix_power, numeric_rank_and_nullspace, op_norm, smallest_singular_vector, solve_affine,
    AffineSolution, RankInfo,
};
pub use poly::{
    char_poly, poly_roots, poly_roots_with, refine_multiple_root, ComplexPolynomial, RootMethod, RootReport};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Numerical thresholds used for structure detection and verification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// singular-value cutoff relative to the largest singular value
    pub rank_tol: f64,
    /// root-clustering radius
    pub cluster_tol: f64,
    /// verification threshold
    pub residual_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            cluster_tol: 1e-6,
            residual_tol: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn new(rank_tol: f64, cluster_tol: f64, residual_tol: f64) -> Result<Self> {
        let t = Self {
            rank_tol,
            cluster_tol,
            residual_tol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.rank_tol, self.cluster_tol, self.residual_tol];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput(
                "tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.cluster_tol < self.rank_tol {
            return Err(Error::InvalidInput(
                "cluster_tol must be at least rank_tol".into(),
            ));
        }
        Ok(())
    }
}

/// Rejects matrices holding NaN or infinite entries.
pub fn ensure_finite(m: &ComplexMatrix, what: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Plain (non-conjugating) dot product `a^T b`.
pub fn dotu(a: &ComplexVector, b: &ComplexVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Conjugating pairing `<a|b> = a^H b`.
pub fn dotc(a: &ComplexVector, b: &ComplexVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Outer product `a b^T` (no conjugation).
pub fn outer(a: &ComplexVector, b: &ComplexVector) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
}

pub fn vec_norm(v: &ComplexVector) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Principal complex `n`-th root.
pub fn principal_root(z: Complex64, n: usize) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return z;
    }
    Complex64::from_polar(z.norm().powf(1.0 / n as f64), z.arg() / n as f64)
}

/// Least-squares line through `(ln x, ln y)`: returns the slope and the RMS
/// residual of the fit.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidInput("log-log fit needs at least two paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("log-log fit needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rms = (lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok((slope, rms))
}
