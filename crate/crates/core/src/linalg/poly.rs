use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{eigenvalues, ComplexMatrix, ToleranceConfig};
use crate::error::{Error, Result};

/// Polynomial with complex coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    /// Builds a polynomial, trimming exactly-zero leading coefficients.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    /// Monic polynomial `prod (w - r)` over the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
    }

    /// `sum |a_k| |z|^k`, the natural scale for the rounding error of `eval`.
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * r + a.norm())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::new(vec![Complex64::new(0.0, 0.0)]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, a)| a * k as f64)
                .collect(),
        )
    }

    pub fn max_coeff(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference after padding to equal length.
    pub fn distance(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(zero);
                let b = other.coeffs.get(k).copied().unwrap_or(zero);
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Characteristic polynomial `det(M - w I)` by the Faddeev-LeVerrier recursion.
pub fn char_poly(m: &ComplexMatrix) -> Result<ComplexPolynomial> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    // c[k] is the coefficient of w^k in det(w I - M)
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    let ident = ComplexMatrix::identity(n, n);
    let mut mk = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        mk = m * &mk + &ident * c[n - k + 1];
        let amk = m * &mk;
        c[n - k] = -amk.trace() / k as f64;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(ComplexPolynomial::new(c.into_iter().map(|a| a * sign).collect()))
}

/// Polishes the centre of an `m`-fold root cluster with Newton steps on
/// `p^(m-1)`, for which the cluster centre is a simple root.
pub fn refine_multiple_root(p: &ComplexPolynomial, z0: Complex64, m: usize) -> Complex64 {
    let mut q = p.clone();
    for _ in 1..m {
        q = q.derivative();
    }
    let dq = q.derivative();
    let mut z = z0;
    for _ in 0..8 {
        let d = dq.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = q.eval(z) / d;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        z -= step;
        if step.norm() <= f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    z
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootMethod {
    Aberth { iterations: u32 },
    Companion,
}

#[derive(Clone, Debug)]
pub struct RootReport {
    pub roots: Vec<Complex64>,
    pub method: RootMethod,
    /// largest `|p(r)| / sum |a_k||r|^k` over the returned roots
    pub max_backward_error: f64,
}

const MAX_ABERTH_ITERATIONS: u32 = 200;

/// All roots with multiplicity (Aberth-Ehrlich, companion-matrix fallback).
pub fn poly_roots(p: &ComplexPolynomial, tol: &ToleranceConfig) -> Result<Vec<Complex64>> {
    poly_roots_with(p, tol).map(|r| r.roots)
}

pub fn poly_roots_with(p: &ComplexPolynomial, tol: &ToleranceConfig) -> Result<RootReport> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.degree() == 0 {
        return Err(Error::InvalidInput("polynomial of degree 0 has no roots".into()));
    }
    let (roots, method) = match aberth(p) {
        Some((roots, iterations)) => (roots, RootMethod::Aberth { iterations }),
        None => {
            log::debug!("Aberth iteration did not converge; using companion matrix");
            (companion_roots(p)?, RootMethod::Companion)
        }
    };
    let max_backward_error = roots
        .iter()
        .map(|r| p.eval(*r).norm() / p.eval_scale(*r).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if max_backward_error > tol.residual_tol {
        return Err(Error::Convergence(format!(
            "root backward error {max_backward_error:.3e} above tolerance"
        )));
    }
    Ok(RootReport {
        roots,
        method,
        max_backward_error,
    })
}

fn aberth(p: &ComplexPolynomial) -> Option<(Vec<Complex64>, u32)> {
    let n = p.degree();
    let lead = p.leading();
    let dp = p.derivative();
    let radius = 1.0
        + p.coeffs()[..n]
            .iter()
            .map(|a| (a / lead).norm())
            .fold(0.0, f64::max);
    let center = -p.coeffs()[n - 1] / (lead * n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            center + Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; n];
    let eps = 4.0 * f64::EPSILON * n as f64;
    for it in 1..=MAX_ABERTH_ITERATIONS {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let pz = p.eval(z[k]);
            if pz.norm() <= eps * p.eval_scale(z[k]) {
                done[k] = true;
                continue;
            }
            let ratio = pz / dp.eval(z[k]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !(w.re.is_finite() && w.im.is_finite()) {
                return None;
            }
            z[k] -= w;
            if w.norm() <= f64::EPSILON * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|d| *d) {
            return Some((z, it));
        }
    }
    None
}

fn companion_roots(p: &ComplexPolynomial) -> Result<Vec<Complex64>> {
    let n = p.degree();
    let lead = p.leading();
    let mut comp = ComplexMatrix::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -p.coeffs()[i] / lead;
    }
    eigenvalues(&comp)
}
