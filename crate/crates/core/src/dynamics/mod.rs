//! Time evolution in the Jordan basis, Green's functions, coordinate sum
//! rules and the near-critical modal-sum experiment.

mod cancellation;
mod oracle;
mod sum_rules;

pub use cancellation::{cluster_cancellation_experiment, CancellationReport};
pub use oracle::{energy, rk4_evolve, rk4_trajectory};
pub use sum_rules::{check_sum_rules, SumRuleReport};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jordan::{JordanBlock, Spectrum};
use crate::linalg::{max_abs, ComplexMatrix, I};
use crate::model::PhaseVector;

/// `C_l(w, t) = (-i t)^l / l! e^(-i w t)`, with the magnitude assembled in
/// log space.
pub fn evolution_coefficient(l: usize, omega: Complex64, t: f64) -> Complex64 {
    if l == 0 {
        return (-I * omega * t).exp();
    }
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let log_fact: f64 = (2..=l).map(|k| (k as f64).ln()).sum();
    let log_mag = l as f64 * t.abs().ln() - log_fact + omega.im * t;
    // (-i sgn t)^l carries the phase l * (-pi/2) * sgn t
    let phase = -(l as f64) * std::f64::consts::FRAC_PI_2 * t.signum() - omega.re * t;
    Complex64::from_polar(log_mag.exp(), phase)
}

/// `f_(j,n)(t) = sum_l C_l(w_j, t) f_(j,n-l)`.
pub fn evolve_basis_vector(block: &JordanBlock, n: usize, t: f64) -> Result<PhaseVector> {
    if n >= block.size() {
        return Err(Error::InvalidInput(format!(
            "chain index {n} out of range for block of size {}",
            block.size()
        )));
    }
    let mut out = PhaseVector::zeros(block.chain[0].len());
    for l in 0..=n {
        out += &block.chain[n - l] * evolution_coefficient(l, block.omega, t);
    }
    Ok(out)
}

/// Contribution of one block: `sum_n f_(j,n)(t) <f^(j,n)|phi>`.
pub fn evolve_in_block(block: &JordanBlock, phi: &PhaseVector, t: f64) -> PhaseVector {
    let mut out = PhaseVector::zeros(phi.len());
    for n in 0..block.size() {
        let coef = block.duals[n].dotc(phi);
        for l in 0..=n {
            out += &block.chain[n - l] * (evolution_coefficient(l, block.omega, t) * coef);
        }
    }
    out
}

fn check_dim(spectrum: &Spectrum, found: usize) -> Result<()> {
    let expected = spectrum.system().dim();
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// State at time `t` from the initial state `phi`.
pub fn evolve_state(spectrum: &Spectrum, phi: &PhaseVector, t: f64) -> Result<PhaseVector> {
    check_dim(spectrum, phi.len())?;
    let mut out = PhaseVector::zeros(phi.len());
    for b in spectrum.blocks() {
        out += evolve_in_block(b, phi, t);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GreensDomain {
    Time,
    Frequency,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreensFunctionSample {
    pub domain: GreensDomain,
    /// `t` (real part only) or `w`
    pub argument: Complex64,
    pub matrix: ComplexMatrix,
}

/// Retarded propagator `theta(t) sum f_(j,n)(t) <f^(j,n)|`; `t = 0` is taken
/// as `0+`.
pub fn greens_time(spectrum: &Spectrum, t: f64) -> GreensFunctionSample {
    let dim = spectrum.system().dim();
    let mut g = ComplexMatrix::zeros(dim, dim);
    if t >= 0.0 {
        for b in spectrum.blocks() {
            for n in 0..b.size() {
                let ft = evolve_basis_vector(b, n, t).expect("index in range");
                g += ft * b.duals[n].adjoint();
            }
        }
    }
    GreensFunctionSample {
        domain: GreensDomain::Time,
        argument: Complex64::new(t, 0.0),
        matrix: g,
    }
}

/// Pole expansion `sum_(j,n,l) f_(j,n-l) i/(w - w_j)^(l+1) <f^(j,n)|`.
pub fn greens_freq(spectrum: &Spectrum, omega: Complex64) -> Result<GreensFunctionSample> {
    let dim = spectrum.system().dim();
    let scale = spectrum.blocks().iter().map(|b| b.omega.norm()).fold(1.0, f64::max);
    let guard = spectrum.tolerances().cluster_tol * scale;
    let mut g = ComplexMatrix::zeros(dim, dim);
    for b in spectrum.blocks() {
        let d = omega - b.omega;
        if d.norm() <= guard {
            return Err(Error::AtPole { omega, pole: b.omega });
        }
        for n in 0..b.size() {
            let mut col = PhaseVector::zeros(dim);
            let mut pow = d;
            for l in 0..=n {
                col += &b.chain[n - l] * (I / pow);
                pow *= d;
            }
            g += col * b.duals[n].adjoint();
        }
    }
    Ok(GreensFunctionSample {
        domain: GreensDomain::Frequency,
        argument: omega,
        matrix: g,
    })
}

/// `max |(H - w) G(w) + i I|`.
pub fn resolvent_defect(spectrum: &Spectrum, sample: &GreensFunctionSample) -> f64 {
    let h = spectrum.system().evolution_operator();
    let dim = h.nrows();
    let id = ComplexMatrix::identity(dim, dim);
    let lhs = (&h - &id * sample.argument) * &sample.matrix + id * I;
    max_abs(&lhs)
}

/// Trajectory sampled on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseVector>,
}

pub fn trajectory(spectrum: &Spectrum, phi: &PhaseVector, times: &[f64]) -> Result<Trajectory> {
    let states = times
        .iter()
        .map(|&t| evolve_state(spectrum, phi, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}
