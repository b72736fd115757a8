//! Constructors for critical two-mode systems, a b-family joining one
//! fourth-order block to two second-order blocks, and a fixture catalog.
//!
//! The closed-form constructors take damping parameters as `gamma_ij`, half
//! the entries of the physical damping matrix (`Gamma = 2 gamma`).

mod catalog;
mod newton;

pub use catalog::{catalog, catalog_entry, CATALOG_NAMES, BlockFixture, CatalogEntry, CatalogExport, ExactVector, NamedPerturbation};
pub use newton::{design_newton, NewtonDesign};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{char_poly, ComplexPolynomial, I};
use crate::model::OscillatorSystem;

fn two_mode(k: [f64; 3], g: [f64; 3], label: &str) -> Result<OscillatorSystem> {
    let km = DMatrix::from_row_slice(2, 2, &[k[0], k[1], k[1], k[2]]);
    let gm = DMatrix::from_row_slice(2, 2, &[2.0 * g[0], 2.0 * g[1], 2.0 * g[1], 2.0 * g[2]]);
    Ok(OscillatorSystem::new(km, gm)?.with_label(label))
}

/// Right-hand sides `(det K, tr gamma, tr K + 4 det gamma, mixed)` of the
/// four coefficient conditions for an `N = 2` system whose characteristic
/// polynomial is `(w + i)^4`.
pub fn quartic_targets() -> [f64; 4] {
    [1.0, 2.0, 6.0, 2.0]
}

/// Same for `(w + i)^3 (w + i b)`.
pub fn cubic_targets(b: f64) -> [f64; 4] {
    [b, (3.0 + b) / 2.0, 3.0 * (1.0 + b), (1.0 + 3.0 * b) / 2.0]
}

/// Same for `(w + i - b)^2 (w + i + b)^2`.
pub fn double2_targets(b: f64) -> [f64; 4] {
    let s = 1.0 + b * b;
    [s * s, 2.0, 6.0 + 2.0 * b * b, 2.0 * s]
}

/// Residuals of the four coefficient conditions of a two-mode system.
pub fn constraint_residuals(sys: &OscillatorSystem, targets: [f64; 4]) -> Result<[f64; 4]> {
    if sys.n() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: sys.n(),
        });
    }
    let k = sys.stiffness();
    let g = sys.damping() * 0.5;
    let (k11, k12, k22) = (k[(0, 0)], k[(0, 1)], k[(1, 1)]);
    let (g11, g12, g22) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
    Ok([
        k11 * k22 - k12 * k12 - targets[0],
        g11 + g22 - targets[1],
        k11 + k22 + 4.0 * (g11 * g22 - g12 * g12) - targets[2],
        k11 * g22 + k22 * g11 - 2.0 * k12 * g12 - targets[3],
    ])
}

/// Largest coefficient difference between `det(H - w)` and the monic
/// polynomial with the given roots.
pub fn char_poly_defect(sys: &OscillatorSystem, roots: &[Complex64]) -> f64 {
    char_poly(&sys.evolution_operator())
        .map(|p| p.distance(&ComplexPolynomial::from_roots(roots)))
        .unwrap_or(f64::INFINITY)
}

/// Stiffness of the two-parameter family solving `det K = 1`.
pub fn quartic_stiffness(x: f64, y: f64) -> [f64; 3] {
    [y.exp() * x.cosh(), x.sinh(), (-y).exp() * x.cosh()]
}

/// Two-mode system with a single fourth-order block at `-i`.
///
/// Of the two damping solutions the one with the larger `gamma_11` is taken;
/// it gives `K = [[5,-2],[-2,1]]`, `Gamma = diag(4,0)` at `sinh x = -2`,
/// `e^(2y) = 5`. At `x = y = 0` the solution is unique (`Gamma = 2I`) and
/// the spectrum has two second-order blocks instead.
pub fn quartic_critical(x: f64, y: f64) -> Result<OscillatorSystem> {
    quartic_critical_branch(x, y, true)
}

/// As [`quartic_critical`], choosing the larger (`upper = true`) or smaller
/// root for `gamma_11`.
pub fn quartic_critical_branch(x: f64, y: f64, upper: bool) -> Result<OscillatorSystem> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::NonFinite("design parameters"));
    }
    if x.cosh() * y.cosh() > 3.0 + 1e-12 {
        log::warn!("cosh x cosh y = {} > 3: damping will not be positive semidefinite", x.cosh() * y.cosh());
    }
    let k = quartic_stiffness(x, y);
    let (k11, k12, k22) = (k[0], k[1], k[2]);
    // with d = gamma_11 - 1 the conditions are the circle d^2 + gamma_12^2 = r2
    // and the line c d + e gamma_12 = -4 r2
    let r2 = (k11 + k22 - 2.0) / 4.0;
    let (c, e) = (k22 - k11, -2.0 * k12);
    let len = c.hypot(e);
    let scale = 1.0 + k11.abs() + k22.abs();
    let (d, g12) = if len > 1e-14 * scale {
        let (nd, ng) = (c / len, e / len);
        let h = -4.0 * r2 / len;
        let sq = r2 - h * h;
        if sq < -1e-12 * scale {
            return Err(Error::NoRealSolution(format!("damping circle misses the line by {sq:.3e}")));
        }
        let s = sq.max(0.0).sqrt();
        // tangent (-ng, nd), oriented so that `upper` gives the larger gamma_11
        let sign = if -ng > 0.0 || (ng == 0.0 && nd > 0.0) { 1.0 } else { -1.0 };
        let s = if upper { s * sign } else { -s * sign };
        (h * nd - s * ng, h * ng + s * nd)
    } else {
        (0.0, 0.0)
    };
    let g11 = 1.0 + d;
    two_mode(k, [g11, g12, 2.0 - g11], "quartic")
}

/// Two-mode system with blocks `(-i, 3)` and `(-i b, 1)`, diagonal damping.
///
/// `gamma11` is half the first damping entry. The positive root is taken for
/// `k_12`; `b = 4`, `gamma11 = 3` gives `K = [[41,8],[8,4]]/5`,
/// `Gamma = diag(6,1)`.
pub fn cubic_critical(b: f64, gamma11: f64) -> Result<OscillatorSystem> {
    if !(b.is_finite() && gamma11.is_finite()) {
        return Err(Error::NonFinite("design parameters"));
    }
    if (b - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidInput("b = 1 merges the simple root into the block".into()));
    }
    let g11 = gamma11;
    let g22 = (3.0 + b) / 2.0 - g11;
    if (g22 - g11).abs() < 1e-12 {
        return Err(Error::NoRealSolution("equal damping entries leave K underdetermined".into()));
    }
    let s = 3.0 * (1.0 + b) - 4.0 * g11 * g22;
    let t = (1.0 + 3.0 * b) / 2.0;
    let k11 = (t - g11 * s) / (g22 - g11);
    let k22 = s - k11;
    let sq = k11 * k22 - b;
    if sq < -1e-12 * (1.0 + b.abs()) {
        return Err(Error::NoRealSolution(format!("k_12^2 = {sq:.3e} < 0")));
    }
    two_mode([k11, sq.max(0.0).sqrt(), k22], [g11, 0.0, g22], "cubic")
}

/// Two-mode system with two second-order blocks at `-i +- b`,
/// `Gamma = diag(4, 0)` and `k_12 < 0`. Tends to the quartic fixture as
/// `b -> 0`.
pub fn double2_critical(b: f64) -> Result<OscillatorSystem> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidInput(format!("b must be positive, got {b}")));
    }
    let s = 1.0 + b * b;
    two_mode([4.0 + s, -2.0 * s.sqrt(), s], [2.0, 0.0, 0.0], "double")
}

/// `K -> a^2 K`, `Gamma -> a Gamma`; eigenvalues scale by `a`.
pub fn scale_system(sys: &OscillatorSystem, a: f64) -> Result<OscillatorSystem> {
    sys.scaled(a)
}

pub fn quartic_roots() -> Vec<Complex64> {
    vec![-I; 4]
}

pub fn cubic_roots(b: f64) -> Vec<Complex64> {
    vec![-I, -I, -I, -I * b]
}

pub fn double2_roots(b: f64) -> Vec<Complex64> {
    let p = Complex64::new(b, -1.0);
    let m = Complex64::new(-b, -1.0);
    vec![p, p, m, m]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(sys: &OscillatorSystem, k: [f64; 3], g: [f64; 3]) {
        let km = sys.stiffness();
        let gm = sys.damping();
        let got = [km[(0, 0)], km[(0, 1)], km[(1, 1)], gm[(0, 0)], gm[(0, 1)], gm[(1, 1)]];
        let want = [k[0], k[1], k[2], g[0], g[1], g[2]];
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn quartic_simple_choice() {
        let x = (-2.0f64).asinh();
        let y = 0.5 * 5f64.ln();
        close(&quartic_critical(x, y).unwrap(), [5.0, -2.0, 1.0], [4.0, 0.0, 0.0]);
        let other = quartic_critical_branch(x, y, false).unwrap();
        close(&other, [5.0, -2.0, 1.0], [2.0, -2.0, 2.0]);
        assert!(char_poly_defect(&other, &quartic_roots()) < 1e-12);
    }

    #[test]
    fn quartic_identical_oscillators() {
        close(&quartic_critical(0.0, 0.0).unwrap(), [1.0, 0.0, 1.0], [2.0, 0.0, 2.0]);
    }

    #[test]
    fn cubic_rational_instance() {
        let s = cubic_critical(4.0, 3.0).unwrap();
        close(&s, [41.0 / 5.0, 8.0 / 5.0, 4.0 / 5.0], [6.0, 0.0, 1.0]);
        assert!(cubic_critical(1.0, 0.3).is_err());
    }

    #[test]
    fn double2_rational_instance() {
        let s = double2_critical(4.0 / 3.0).unwrap();
        close(&s, [61.0 / 9.0, -30.0 / 9.0, 25.0 / 9.0], [4.0, 0.0, 0.0]);
        assert!(double2_critical(0.0).is_err());
    }

    #[test]
    fn constraints_hold() {
        let s = double2_critical(0.7).unwrap();
        let r = constraint_residuals(&s, double2_targets(0.7)).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        let s = cubic_critical(2.5, 0.2).unwrap();
        let r = constraint_residuals(&s, cubic_targets(2.5)).unwrap();
        assert!(r.iter().all(|v| v.abs() < 1e-12));
    }
}
