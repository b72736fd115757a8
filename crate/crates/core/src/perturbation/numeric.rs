//! Exact perturbed spectra and their comparison with the perturbative
//! predictions.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::roots_of_unity;
use crate::error::{Error, Result};
use crate::extended::{extended_modes, to_c64};
use crate::jordan::JordanBlock;
use crate::linalg::{eigenvalues, loglog_fit, ComplexMatrix};
use crate::model::OscillatorSystem;

const MAX_ASSIGNMENT: usize = 8;

/// Eigenvalues of the full evolution operator of `K + eps dK`. With
/// `polish` every eigenvalue is refined by Newton steps on the
/// determinant in double-double arithmetic.
pub fn exact_perturbed_spectrum(
    sys: &OscillatorSystem,
    dk: &DMatrix<f64>,
    eps: f64,
    polish: bool,
) -> Result<Vec<Complex64>> {
    let h = sys.perturbed(dk, eps)?.evolution_operator();
    let raw = eigenvalues(&h)?;
    if !polish || eps == 0.0 {
        return Ok(raw);
    }
    let modes = extended_modes(sys, dk, eps, &raw)?;
    let out: Vec<Complex64> = modes.iter().map(|m| to_c64(m.omega)).collect();
    let scale = out.iter().map(|w| w.norm()).fold(1.0, f64::max);
    for [a, b] in out.iter().array_combinations() {
        if (a - b).norm() <= 1e-14 * scale {
            return Err(Error::Convergence(format!(
                "two eigenvalues refined onto the same root near {a}"
            )));
        }
    }
    Ok(out)
}

/// Shifts `w - w_j` of the `m` eigenvalues closest to `w_j`, failing when
/// the largest shift exceeds half the distance to the rest of the spectrum.
pub fn cluster_shifts(eigs: &[Complex64], omega: Complex64, m: usize) -> Result<Vec<Complex64>> {
    if m > eigs.len() {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: eigs.len(),
        });
    }
    let mut shifts: Vec<Complex64> = eigs.iter().map(|w| w - omega).collect();
    shifts.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
    let rest = shifts.split_off(m);
    let shift = shifts.last().map_or(0.0, |d| d.norm());
    if let Some(d) = rest.first() {
        let gap = d.norm();
        if shift > 0.5 * gap {
            return Err(Error::AmbiguousMatching { shift, gap });
        }
    }
    Ok(shifts)
}

/// Assignment of `numerical` to `predicted` minimizing the total distance:
/// `perm[i]` is the index into `numerical` paired with `predicted[i]`.
pub fn match_eigenvalues(numerical: &[Complex64], predicted: &[Complex64]) -> Result<Vec<usize>> {
    let m = predicted.len();
    if numerical.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: numerical.len(),
        });
    }
    if m > MAX_ASSIGNMENT {
        return Err(Error::InvalidInput(format!("cannot match more than {MAX_ASSIGNMENT} eigenvalues")));
    }
    let cost = |p: &Vec<usize>| -> f64 { p.iter().enumerate().map(|(i, &j)| (numerical[j] - predicted[i]).norm()).sum() };
    let best = (0..m)
        .permutations(m)
        .min_by(|a, b| cost(a).partial_cmp(&cost(b)).unwrap())
        .unwrap_or_default();
    Ok(best)
}

/// Refined cluster shifts of `block` at `eps`; zero shifts at `eps = 0`.
pub(crate) fn numerical_cluster(
    sys: &OscillatorSystem,
    block: &JordanBlock,
    dk: &DMatrix<f64>,
    eps: f64,
) -> Result<Vec<Complex64>> {
    if eps == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); block.size()]);
    }
    let eigs = exact_perturbed_spectrum(sys, dk, eps, true)?;
    cluster_shifts(&eigs, block.omega, block.size())
}

/// Slope and RMS residual of `log mean|dw|` against `log|eps|` for the
/// shifts sorted by magnitude and cut into consecutive groups of the
/// given sizes.
pub fn fit_exponents_by_rank(
    sys: &OscillatorSystem,
    block: &JordanBlock,
    dk: &DMatrix<f64>,
    eps_grid: &[f64],
    groups: &[usize],
) -> Result<Vec<(f64, f64)>> {
    if groups.iter().sum::<usize>() != block.size() {
        return Err(Error::InvalidInput("group sizes must add up to the block size".into()));
    }
    check_grid(eps_grid)?;
    let mut means = vec![Vec::with_capacity(eps_grid.len()); groups.len()];
    for &eps in eps_grid {
        let shifts = numerical_cluster(sys, block, dk, eps)?;
        let mut start = 0;
        for (g, &size) in groups.iter().enumerate() {
            let mean = shifts[start..start + size].iter().map(|d| d.norm()).sum::<f64>() / size as f64;
            means[g].push(mean);
            start += size;
        }
    }
    let x: Vec<f64> = eps_grid.iter().map(|e| e.abs()).collect();
    means.iter().map(|y| loglog_fit(&x, y)).collect()
}

/// Exponent of the mean cluster shift against `|eps|`.
pub fn fit_splitting_exponent(
    sys: &OscillatorSystem,
    block: &JordanBlock,
    dk: &DMatrix<f64>,
    eps_grid: &[f64],
) -> Result<(f64, f64)> {
    Ok(fit_exponents_by_rank(sys, block, dk, eps_grid, &[block.size()])?[0])
}

fn check_grid(eps_grid: &[f64]) -> Result<()> {
    let nonzero = eps_grid.iter().all(|e| *e != 0.0 && e.is_finite());
    let same_sign = eps_grid.iter().all(|e| e.signum() == eps_grid[0].signum());
    if eps_grid.len() < 2 || !nonzero || !same_sign {
        return Err(Error::InvalidInput("epsilon grid must be nonzero and of one sign".into()));
    }
    let (lo, hi) = eps_grid
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), e| (lo.min(e.abs()), hi.max(e.abs())));
    if (hi / lo).log10() < 3.0 - 1e-9 {
        return Err(Error::InvalidInput("epsilon grid must span at least three decades".into()));
    }
    Ok(())
}

/// `D[n][n'] = (f_(j,M-1-n), dH f_(j,n'))`, the perturbation in the Jordan
/// basis, with the `(M-1, 0)` element moved into the unperturbed part.
pub fn jordan_basis_elements(sys: &OscillatorSystem, block: &JordanBlock, dk: &DMatrix<f64>) -> ComplexMatrix {
    let m = block.size();
    let mut d = ComplexMatrix::from_fn(m, m, |n, np| sys.coordinate_form(&block.chain[m - 1 - n], dk, &block.chain[np]));
    d[(m - 1, 0)] = Complex64::new(0.0, 0.0);
    d
}

/// Remaining perturbation in the split basis `f_k`.
pub fn deltah_prime_matrix(
    sys: &OscillatorSystem,
    block: &JordanBlock,
    dk: &DMatrix<f64>,
    lambda: Complex64,
) -> Result<ComplexMatrix> {
    if lambda.norm() == 0.0 {
        return Err(Error::InvalidInput("split basis needs lambda != 0".into()));
    }
    let m = block.size();
    let d = jordan_basis_elements(sys, block, dk);
    let zeta = roots_of_unity(m);
    Ok(ComplexMatrix::from_fn(m, m, |k, kp| {
        let mut s = Complex64::new(0.0, 0.0);
        for n in 0..m {
            for np in 0..m {
                let w = (lambda * zeta[kp]).powi(np as i32) / (lambda * zeta[k]).powi(n as i32);
                s += w * d[(n, np)];
            }
        }
        s / m as f64
    }))
}

/// Shifts `lambda zeta_k + eps (dH')_kk`, in the order of the first-order
/// shifts.
pub fn second_order_prediction(
    sys: &OscillatorSystem,
    block: &JordanBlock,
    dk: &DMatrix<f64>,
    eps: f64,
) -> Result<Vec<Complex64>> {
    let first = super::predict_splitting(sys, block, dk, eps)?;
    let dhp = deltah_prime_matrix(sys, block, dk, first.lambda)?;
    Ok(first
        .shifts
        .iter()
        .enumerate()
        .map(|(k, d)| d + dhp[(k, k)] * eps)
        .collect())
}

/// One line of a sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub k: usize,
    pub numerical: Complex64,
    pub predicted: Complex64,
    pub abs_error: f64,
}

/// Matched numerical and predicted shifts for every `eps`. `predict`
/// returns the predicted shifts in label order.
pub fn sweep_rows<F>(
    sys: &OscillatorSystem,
    block: &JordanBlock,
    dk: &DMatrix<f64>,
    eps_list: &[f64],
    mut predict: F,
) -> Result<Vec<SweepRow>>
where
    F: FnMut(f64) -> Result<Vec<Complex64>>,
{
    let mut rows = Vec::with_capacity(eps_list.len() * block.size());
    for &eps in eps_list {
        let numerical = numerical_cluster(sys, block, dk, eps)?;
        let predicted = predict(eps)?;
        let perm = match_eigenvalues(&numerical, &predicted)?;
        for (k, p) in predicted.iter().enumerate() {
            let n = numerical[perm[k]];
            rows.push(SweepRow {
                epsilon: eps,
                k,
                numerical: n,
                predicted: *p,
                abs_error: (n - p).norm(),
            });
        }
    }
    Ok(rows)
}
