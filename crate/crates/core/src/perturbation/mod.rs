//! Perturbation theory around a Jordan block of the evolution operator for
//! stiffness perturbations `K -> K + eps dK`.

mod figures;
mod numeric;

pub use figures::{decade_grid, figure_spec, reproduce_figure, ExponentFit, FigureData, FigurePanel, FigureSpec, FIGURE_IDS};
pub use numeric::{
    cluster_shifts, deltah_prime_matrix, exact_perturbed_spectrum, fit_exponents_by_rank, fit_splitting_exponent,
    jordan_basis_elements, match_eigenvalues, second_order_prediction, sweep_rows, SweepRow,
};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jordan::JordanBlock;
use crate::linalg::{principal_root, ComplexMatrix};
use crate::model::{OscillatorSystem, PhaseVector};

const SYMMETRY_TOL: f64 = 1e-12;
const GENERICITY_TOL: f64 = 1e-8;

/// Symmetric stiffness direction and its signed magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    delta_k: DMatrix<f64>,
    epsilon: f64,
}

impl Perturbation {
    pub fn new(delta_k: DMatrix<f64>, epsilon: f64) -> Result<Self> {
        check_direction(&delta_k)?;
        if !epsilon.is_finite() {
            return Err(Error::NonFinite("epsilon"));
        }
        Ok(Self { delta_k, epsilon })
    }

    pub fn delta_k(&self) -> &DMatrix<f64> {
        &self.delta_k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn apply(&self, sys: &OscillatorSystem) -> Result<OscillatorSystem> {
        sys.perturbed(&self.delta_k, self.epsilon)
    }
}

fn check_direction(dk: &DMatrix<f64>) -> Result<()> {
    if !dk.is_square() {
        return Err(Error::NonSquare {
            rows: dk.nrows(),
            cols: dk.ncols(),
        });
    }
    if dk.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("DeltaK"));
    }
    let defect = (dk - dk.transpose()).amax();
    if defect > SYMMETRY_TOL * dk.amax().max(1.0) {
        return Err(Error::Asymmetric {
            which: "DeltaK",
            defect,
        });
    }
    Ok(())
}

fn check_sizes(sys: &OscillatorSystem, dk: &DMatrix<f64>) -> Result<()> {
    check_direction(dk)?;
    if dk.nrows() != sys.n() {
        return Err(Error::DimensionMismatch {
            expected: sys.n(),
            found: dk.nrows(),
        });
    }
    Ok(())
}

/// `|xi|` below which a perturbation counts as non-generic.
pub fn genericity_threshold(block: &JordanBlock, dk: &DMatrix<f64>) -> f64 {
    GENERICITY_TOL * dk.amax().max(f64::MIN_POSITIVE) * block.chain[0].norm_squared()
}

/// `xi = x_0 . dK x_0` from the coordinate part of `f_(j,0)`.
pub fn xi_generic(sys: &OscillatorSystem, block: &JordanBlock, dk: &DMatrix<f64>) -> Result<Complex64> {
    check_sizes(sys, dk)?;
    Ok(sys.coordinate_form(&block.chain[0], dk, &block.chain[0]))
}

/// `xi = (f_(j,0), dH f_(j,0))` through the full phase-space operator.
pub fn xi_phase_space(sys: &OscillatorSystem, block: &JordanBlock, dk: &DMatrix<f64>) -> Result<Complex64> {
    check_sizes(sys, dk)?;
    let dh = sys.stiffness_perturbation_operator(dk);
    sys.bilinear(&block.chain[0], &(dh * &block.chain[0]))
}

/// `xi' = x_1 . dK x_0`.
pub fn xi_prime(sys: &OscillatorSystem, block: &JordanBlock, dk: &DMatrix<f64>) -> Result<Complex64> {
    check_sizes(sys, dk)?;
    if block.size() < 2 {
        return Err(Error::InvalidInput("xi' needs a block of size at least 2".into()));
    }
    Ok(sys.coordinate_form(&block.chain[1], dk, &block.chain[0]))
}

pub(crate) fn roots_of_unity(m: usize) -> Vec<Complex64> {
    (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect()
}

/// Leading-order splitting of a block.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPrediction {
    pub omega: Complex64,
    pub epsilon: f64,
    pub xi: Complex64,
    /// principal root of `eps xi`
    pub lambda: Complex64,
    pub shifts: Vec<Complex64>,
    /// `f_k = sum_n f_(j,n) (lambda zeta_k)^n`
    pub split_vectors: Vec<PhaseVector>,
    /// `(f_k, f_k) = M (lambda zeta_k)^(M-1)`
    pub norms: Vec<Complex64>,
}

impl SplitPrediction {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.shifts.iter().map(|d| self.omega + d).collect()
    }
}

/// Shifts `lambda zeta_k` with `lambda = (eps xi)^(1/M)`; fails for
/// non-generic directions.
pub fn predict_splitting(
    sys: &OscillatorSystem,
    block: &JordanBlock,
    dk: &DMatrix<f64>,
    epsilon: f64,
) -> Result<SplitPrediction> {
    let xi = xi_generic(sys, block, dk)?;
    if xi.norm() <= genericity_threshold(block, dk) {
        return Err(Error::NonGeneric { xi_abs: xi.norm() });
    }
    let m = block.size();
    let lambda = principal_root(xi * epsilon, m);
    let shifts: Vec<Complex64> = roots_of_unity(m).into_iter().map(|z| lambda * z).collect();
    let split_vectors = shifts
        .iter()
        .map(|d| {
            let mut v = PhaseVector::zeros(block.chain[0].len());
            let mut pow = Complex64::new(1.0, 0.0);
            for f in &block.chain {
                v += f * pow;
                pow *= d;
            }
            v
        })
        .collect();
    let norms = shifts.iter().map(|d| d.powu(m as u32 - 1) * m as f64).collect();
    Ok(SplitPrediction {
        omega: block.omega,
        epsilon,
        xi,
        lambda,
        shifts,
        split_vectors,
        norms,
    })
}

/// Leading-order splitting when `xi` vanishes: one mode stays put, the
/// other `M - 1` solve `dw^(M-1) = 2 eps xi'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonGenericPrediction {
    pub xi: Complex64,
    pub xi_prime: Complex64,
    pub block_size: usize,
    pub unshifted_count: usize,
    /// for `M = 2` the `eps^2 J_2` term is of the same order and the
    /// prediction only gives the order of magnitude
    pub second_order_same_order: bool,
}

impl NonGenericPrediction {
    /// `[0, mu zeta'_0, ..., mu zeta'_(M-2)]` with `mu = (2 eps xi')^(1/(M-1))`.
    pub fn shifts(&self, epsilon: f64) -> Vec<Complex64> {
        let r = self.block_size - 1;
        let mu = principal_root(self.xi_prime * (2.0 * epsilon), r);
        let mut out = vec![Complex64::new(0.0, 0.0)];
        out.extend(roots_of_unity(r).into_iter().map(|z| mu * z));
        out
    }

    pub fn lambda(&self, epsilon: f64) -> f64 {
        (2.0 * epsilon * self.xi_prime.norm()).abs().powf(1.0 / (self.block_size - 1) as f64)
    }
}

pub fn xi_nongeneric(sys: &OscillatorSystem, block: &JordanBlock, dk: &DMatrix<f64>) -> Result<NonGenericPrediction> {
    let m = block.size();
    if m < 2 {
        return Err(Error::InvalidInput("non-generic analysis needs a block of size at least 2".into()));
    }
    let xi = xi_generic(sys, block, dk)?;
    let threshold = genericity_threshold(block, dk);
    if xi.norm() > threshold {
        return Err(Error::Generic { xi_abs: xi.norm() });
    }
    let xp = xi_prime(sys, block, dk)?;
    if xp.norm() <= threshold {
        return Err(Error::HigherOrderNonGeneric);
    }
    if m == 2 {
        log::warn!("block of size 2: eps^2 J_2 is of the same order; non-generic prediction is order-of-magnitude only");
    }
    Ok(NonGenericPrediction {
        xi,
        xi_prime: xp,
        block_size: m,
        unshifted_count: 1,
        second_order_same_order: m == 2,
    })
}

/// First-order coefficient of the characteristic polynomial at the block
/// eigenvalue, normalized so the block's own factor is `(w - w_j)^M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct J1Report {
    pub omega: Complex64,
    /// from the explicit two-mode cofactor expansion (`N = 2` only)
    pub closed_form: Option<Complex64>,
    /// Richardson-extrapolated central difference in `eps`
    pub finite_difference: Complex64,
    pub difference: Option<f64>,
    pub xi: Complex64,
    /// `|J_1 + xi|`
    pub xi_relation_defect: f64,
}

fn det_at(sys: &OscillatorSystem, dk: &DMatrix<f64>, eps: f64, omega: Complex64) -> Result<Complex64> {
    let h = sys.perturbed(dk, eps)?.evolution_operator();
    let dim = h.nrows();
    Ok((h - ComplexMatrix::identity(dim, dim) * omega).determinant())
}

/// `J_1(w_j)` two ways, checked against `J_1 = -xi`.
pub fn j1_coefficient(
    sys: &OscillatorSystem,
    block: &JordanBlock,
    others: &[Complex64],
    dk: &DMatrix<f64>,
) -> Result<J1Report> {
    check_sizes(sys, dk)?;
    let w = block.omega;
    let h = sys.evolution_operator();
    let dim = h.nrows();
    let smin = crate::linalg::smallest_singular_vector(&(&h - ComplexMatrix::identity(dim, dim) * w)).1;
    if smin > 1e-6 * crate::linalg::op_norm(&h).max(1.0) {
        return Err(Error::NotCritical(w));
    }
    // remaining factor of det(H - w) = (w - w_j)^M prod (w - w_o)
    let r: Complex64 = others.iter().map(|o| w - o).product();

    let closed_form = (sys.n() == 2).then(|| {
        let k = sys.stiffness();
        let g = sys.damping();
        let a = |i: usize, j: usize| {
            Complex64::new(k[(i, j)], 0.0) - crate::linalg::I * w * g[(i, j)]
                - if i == j { w * w } else { Complex64::new(0.0, 0.0) }
        };
        let raw = a(1, 1) * dk[(0, 0)] + a(0, 0) * dk[(1, 1)] - a(0, 1) * (2.0 * dk[(0, 1)]);
        raw / r
    });

    let step = 1e-3;
    let central = |h: f64| -> Result<Complex64> { Ok((det_at(sys, dk, h, w)? - det_at(sys, dk, -h, w)?) / (2.0 * h)) };
    let d1 = central(step)?;
    let d2 = central(step / 2.0)?;
    let finite_difference = (d2 * 4.0 - d1) / 3.0 / r;

    let xi = xi_generic(sys, block, dk)?;
    let best = closed_form.unwrap_or(finite_difference);
    Ok(J1Report {
        omega: w,
        closed_form,
        finite_difference,
        difference: closed_form.map(|c| (c - finite_difference).norm()),
        xi,
        xi_relation_defect: (best + xi).norm(),
    })
}
