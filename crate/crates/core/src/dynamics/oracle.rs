//! Fixed-step RK4 on `x'' + Gamma x' + K x = 0`, written against `K` and
//! `Gamma` directly. Real and imaginary parts evolve independently, so a
//! complex phase vector becomes a real state of length `4N`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::model::{OscillatorSystem, PhaseVector};

fn rhs(k: &DMatrix<f64>, g: &DMatrix<f64>, n: usize, y: &DVector<f64>) -> DVector<f64> {
    let mut dy = DVector::zeros(y.len());
    for part in 0..2 {
        let off = 2 * n * part;
        let x = y.rows(off, n);
        let v = y.rows(off + n, n);
        dy.rows_mut(off, n).copy_from(&v);
        let acc = -(k * x) - g * v;
        dy.rows_mut(off + n, n).copy_from(&acc);
    }
    dy
}

fn pack(phi: &PhaseVector) -> DVector<f64> {
    let m = phi.len();
    DVector::from_fn(2 * m, |i, _| if i < m { phi[i].re } else { phi[i - m].im })
}

fn unpack(y: &DVector<f64>) -> PhaseVector {
    let m = y.len() / 2;
    PhaseVector::from_fn(m, |i, _| Complex64::new(y[i], y[i + m]))
}

/// State at each requested time (ascending, `>= 0`), integrating with steps
/// no larger than `step`.
pub fn rk4_trajectory(sys: &OscillatorSystem, phi: &PhaseVector, times: &[f64], step: f64) -> Vec<PhaseVector> {
    let (k, g, n) = (sys.stiffness(), sys.damping(), sys.n());
    let mut y = pack(phi);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / step).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = rhs(k, g, n, &y);
                let k2 = rhs(k, g, n, &(&y + &k1 * (h / 2.0)));
                let k3 = rhs(k, g, n, &(&y + &k2 * (h / 2.0)));
                let k4 = rhs(k, g, n, &(&y + &k3 * h));
                y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            }
            t = target;
        }
        out.push(unpack(&y));
    }
    out
}

pub fn rk4_evolve(sys: &OscillatorSystem, phi: &PhaseVector, t: f64, step: f64) -> PhaseVector {
    rk4_trajectory(sys, phi, &[t], step).pop().unwrap()
}

/// `E = (v.v + x.K x) / 2` for a real state (imaginary parts ignored).
pub fn energy(sys: &OscillatorSystem, state: &PhaseVector) -> f64 {
    let n = sys.n();
    let x = DVector::from_fn(n, |i, _| state[i].re);
    let v = DVector::from_fn(n, |i, _| state[n + i].re);
    0.5 * (v.dot(&v) + x.dot(&(sys.stiffness() * &x)))
}
