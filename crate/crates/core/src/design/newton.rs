use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{char_poly, ComplexPolynomial};
use crate::model::OscillatorSystem;

/// Result of the iterative designer.
#[derive(Clone, Debug)]
pub struct NewtonDesign {
    pub system: OscillatorSystem,
    /// largest coefficient difference to the target polynomial
    pub residual: f64,
    pub iterations: usize,
}

const PENALTY: f64 = 10.0;

fn unpack(n: usize, v: &DVector<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut k = DMatrix::zeros(n, n);
    let mut g = DMatrix::zeros(n, n);
    let mut idx = 0;
    for m in [&mut k, &mut g] {
        for i in 0..n {
            for j in i..n {
                m[(i, j)] = v[idx];
                m[(j, i)] = v[idx];
                idx += 1;
            }
        }
    }
    (k, g)
}

fn pack(sys: &OscillatorSystem) -> DVector<f64> {
    let n = sys.n();
    let mut out = Vec::new();
    for m in [sys.stiffness(), sys.damping()] {
        for i in 0..n {
            for j in i..n {
                out.push(m[(i, j)]);
            }
        }
    }
    DVector::from_vec(out)
}

fn residual(n: usize, v: &DVector<f64>, target: &ComplexPolynomial) -> DVector<f64> {
    let (k, g) = unpack(n, v);
    let mut out = Vec::with_capacity(4 * n + 2 * n);
    match OscillatorSystem::new(k.clone(), g.clone()).and_then(|sys| char_poly(&sys.evolution_operator())) {
        Ok(p) => {
            for d in 0..2 * n {
                let diff: Complex64 = p.coeffs()[d] - target.coeffs()[d];
                out.push(diff.re);
                out.push(diff.im);
            }
        }
        Err(_) => out.extend(std::iter::repeat(f64::NAN).take(4 * n)),
    }
    for m in [&g, &k] {
        let ev = SymmetricEigen::new(m.clone()).eigenvalues;
        for e in ev.iter() {
            out.push(PENALTY * e.min(0.0));
        }
    }
    DVector::from_vec(out)
}

/// Adjusts `K` and `Gamma` of `start` by damped Gauss-Newton steps until
/// `det(H - w)` matches the monic polynomial with roots `target_roots`,
/// penalizing negative eigenvalues of `K` and `Gamma`.
///
/// Gives no guarantee about which solution is reached; the block structure
/// of the result has to be checked separately.
pub fn design_newton(
    start: &OscillatorSystem,
    target_roots: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> Result<NewtonDesign> {
    let n = start.n();
    if target_roots.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            found: target_roots.len(),
        });
    }
    let target = ComplexPolynomial::from_roots(target_roots);
    let mut v = pack(start);
    let mut r = residual(n, &v, &target);
    let mut mu = 1e-3;
    let cost = |r: &DVector<f64>| r.iter().map(|x| x * x).sum::<f64>();
    for it in 0..max_iter {
        let coeff_res = r.rows(0, 4 * n).amax();
        if coeff_res <= tol && r.rows(4 * n, r.len() - 4 * n).amax() <= tol {
            let (k, g) = unpack(n, &v);
            return Ok(NewtonDesign {
                system: OscillatorSystem::new(k, g)?,
                residual: coeff_res,
                iterations: it,
            });
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(r.len(), v.len());
        for c in 0..v.len() {
            let mut vp = v.clone();
            let step = h * (1.0 + v[c].abs());
            vp[c] += step;
            let rp = residual(n, &vp, &target);
            jac.set_column(c, &((rp - &r) / step));
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let grad = &jt * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += mu * (1.0 + jtj[(d, d)]);
            }
            let Some(step) = a.lu().solve(&(-&grad)) else {
                mu *= 10.0;
                continue;
            };
            let vn = &v + step;
            let rn = residual(n, &vn, &target);
            if cost(&rn).is_finite() && cost(&rn) < cost(&r) {
                v = vn;
                r = rn;
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Err(Error::Convergence(format!(
        "designer stalled with coefficient residual {:.3e}",
        r.rows(0, 4 * n).amax()
    )))
}
