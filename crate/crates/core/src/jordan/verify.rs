use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Spectrum;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, op_norm, ComplexMatrix};

/// Per-block representation matrices and their deviation from the expected
/// shapes: anti-identity metric, Jordan form with mixed indices, and the
/// symmetric anti-triangular form with both indices lowered.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BlockShapes {
    pub label: i32,
    pub omega: Complex64,
    pub size: usize,
    pub metric: Vec<Vec<Complex64>>,
    pub h_mixed: Vec<Vec<Complex64>>,
    pub h_lowered: Vec<Vec<Complex64>>,
    pub metric_deviation: f64,
    pub h_mixed_deviation: f64,
    pub h_lowered_deviation: f64,
    pub h_lowered_asymmetry: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    /// `max ||(H - w) f_n - f_(n-1)|| / (||H|| ||f_n||)`
    pub chain_residual: f64,
    /// `max |(f_(j,n), f_(j',n')) - delta delta|` over the full basis
    pub pairing_defect: f64,
    /// `max |<f^(j,n)|f_(j',n')> - delta delta|`
    pub biorthogonality_defect: f64,
    /// `max |sum f_(j,n) <f^(j,n)| - I|`
    pub completeness_defect: f64,
    /// largest pairing between different blocks
    pub cross_block_pairing: f64,
    pub blocks: Vec<BlockShapes>,
}

impl VerificationReport {
    pub fn max_shape_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                b.metric_deviation
                    .max(b.h_mixed_deviation)
                    .max(b.h_lowered_deviation)
                    .max(b.h_lowered_asymmetry)
            })
            .fold(0.0, f64::max)
    }

    pub fn worst(&self) -> (&'static str, f64) {
        [
            ("chain relation", self.chain_residual),
            ("bilinear pairing", self.pairing_defect),
            ("biorthogonality", self.biorthogonality_defect),
            ("completeness", self.completeness_defect),
            ("representation shape", self.max_shape_deviation()),
        ]
        .into_iter()
        .fold(("none", 0.0), |acc, x| if x.1 > acc.1 || x.1.is_nan() { x } else { acc })
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let (what, residual) = self.worst();
        if residual > tol || residual.is_nan() {
            return Err(Error::Verification {
                what: what.to_string(),
                residual,
                tolerance: tol,
            });
        }
        Ok(())
    }
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Assembles the per-block metric and operator representations and all
/// global invariants of a spectrum.
pub fn verify_representations(s: &Spectrum) -> VerificationReport {
    let sys = s.system();
    let h = sys.evolution_operator();
    let hn = op_norm(&h).max(1.0);
    let dim = h.nrows();

    let mut chain_residual: f64 = 0.0;
    let mut blocks = Vec::new();
    for b in s.blocks() {
        let m = b.size();
        let a = &h - ComplexMatrix::identity(dim, dim) * b.omega;
        for n in 0..m {
            let mut r = &a * &b.chain[n];
            if n > 0 {
                r -= &b.chain[n - 1];
            }
            chain_residual = chain_residual.max(r.norm() / (hn * b.chain[n].norm()).max(f64::MIN_POSITIVE));
        }
        let metric = ComplexMatrix::from_fn(m, m, |n, np| sys.bilinear_unchecked(&b.chain[n], &b.chain[np]));
        let hf: Vec<_> = b.chain.iter().map(|f| &h * f).collect();
        let h_mixed = ComplexMatrix::from_fn(m, m, |n, np| b.duals[n].dotc(&hf[np]));
        let h_lowered = ComplexMatrix::from_fn(m, m, |n, np| sys.bilinear_unchecked(&b.chain[n], &hf[np]));
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let g_expected = ComplexMatrix::from_fn(m, m, |n, np| if n + np + 1 == m { one } else { zero });
        let hm_expected = ComplexMatrix::from_fn(m, m, |n, np| {
            if n == np {
                b.omega
            } else if np == n + 1 {
                one
            } else {
                zero
            }
        });
        let hl_expected = ComplexMatrix::from_fn(m, m, |n, np| {
            if n + np + 1 == m {
                b.omega
            } else if n + np == m {
                one
            } else {
                zero
            }
        });
        blocks.push(BlockShapes {
            label: b.label,
            omega: b.omega,
            size: m,
            metric_deviation: max_abs(&(&metric - g_expected)),
            h_mixed_deviation: max_abs(&(&h_mixed - hm_expected)),
            h_lowered_deviation: max_abs(&(&h_lowered - hl_expected)),
            h_lowered_asymmetry: max_abs(&(&h_lowered - h_lowered.transpose())),
            metric: rows(&metric),
            h_mixed: rows(&h_mixed),
            h_lowered: rows(&h_lowered),
        });
    }

    let basis = s.basis_matrix();
    let duals = s.dual_matrix();
    let g = sys.metric();
    let pairing = basis.transpose() * &g * &basis;
    let mut expected = ComplexMatrix::zeros(dim, dim);
    let mut owner = vec![0usize; dim];
    let mut off = 0;
    for (bi, b) in s.blocks().iter().enumerate() {
        let m = b.size();
        for n in 0..m {
            expected[(off + n, off + m - 1 - n)] = Complex64::new(1.0, 0.0);
            owner[off + n] = bi;
        }
        off += m;
    }
    let pairing_defect = max_abs(&(&pairing - &expected));
    let mut cross_block_pairing: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            if owner[r] != owner[c] {
                cross_block_pairing = cross_block_pairing.max(pairing[(r, c)].norm());
            }
        }
    }
    let ident = ComplexMatrix::identity(dim, dim);
    let biorthogonality_defect = max_abs(&(duals.adjoint() * &basis - &ident));
    let completeness_defect = max_abs(&(&basis * duals.adjoint() - &ident));

    VerificationReport {
        chain_residual,
        pairing_defect,
        biorthogonality_defect,
        completeness_defect,
        cross_block_pairing,
        blocks,
    }
}
