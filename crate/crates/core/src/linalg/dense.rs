use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector, ToleranceConfig};
use crate::error::{Error, Result};

/// Rank, singular values and an orthonormal nullspace basis.
#[derive(Clone, Debug)]
pub struct RankInfo {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub nullspace: Vec<ComplexVector>,
}

impl RankInfo {
    pub fn nullity(&self) -> usize {
        self.nullspace.len()
    }
}

/// Minimum-norm particular solution together with the nullspace of `A`.
#[derive(Clone, Debug)]
pub struct AffineSolution {
    pub x: ComplexVector,
    pub nullspace: Vec<ComplexVector>,
    pub residual: f64,
}

/// Full SVD `M = U diag(s) V^H` with `U`, `V` square and `s` sorted
/// descending, of length `min(rows, cols)`.
pub(crate) struct FullSvd {
    pub s: Vec<f64>,
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
}

impl FullSvd {
    /// `s_i` for every column of `V`, zero beyond `min(rows, cols)`.
    pub fn padded_values(&self) -> Vec<f64> {
        let mut s = self.s.clone();
        s.resize(self.v.ncols(), 0.0);
        s
    }
}

// nalgebra's complex SVD can return factors that do not reconstruct
// rank-deficient inputs, so the decomposition goes through faer.
pub(crate) fn full_svd(m: &ComplexMatrix) -> FullSvd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return FullSvd {
            s: vec![],
            u: ComplexMatrix::identity(r, r),
            v: ComplexMatrix::identity(c, c),
        };
    }
    let fm = faer::Mat::<Complex64>::from_fn(r, c, |i, j| m[(i, j)]);
    let svd = fm.svd().expect("SVD of a finite matrix converges");
    let (u, v, sd) = (svd.U(), svd.V(), svd.S());
    FullSvd {
        s: (0..r.min(c)).map(|i| sd[i].re).collect(),
        u: ComplexMatrix::from_fn(r, r, |i, j| u[(i, j)]),
        v: ComplexMatrix::from_fn(c, c, |i, j| v[(i, j)]),
    }
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    full_svd(m).s.first().copied().unwrap_or(0.0)
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn matrix_power(m: &ComplexMatrix, k: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Rank with singular values compared against `rel_tol * scale`.
pub(crate) fn rank_with_scale(m: &ComplexMatrix, rel_tol: f64, scale: f64) -> RankInfo {
    let ncols = m.ncols();
    if m.is_empty() {
        return RankInfo {
            rank: 0,
            singular_values: vec![],
            nullspace: (0..ncols)
                .map(|i| ComplexVector::from_fn(ncols, |k, _| if k == i { 1.0.into() } else { 0.0.into() }))
                .collect(),
        };
    }
    let svd = full_svd(m);
    let threshold = rel_tol * scale;
    let mut rank = 0;
    let mut nullspace = Vec::new();
    for (i, s) in svd.padded_values().iter().enumerate() {
        if *s > threshold && *s > 0.0 {
            rank += 1;
        } else {
            nullspace.push(svd.v.column(i).into_owned());
        }
    }
    RankInfo {
        rank,
        singular_values: svd.s,
        nullspace,
    }
}

/// Right singular vector of the smallest singular value, with that value.
/// For `A = H - w` at an approximate simple eigenvalue `w` this is the
/// eigenvector, without any rank decision.
pub fn smallest_singular_vector(m: &ComplexMatrix) -> (ComplexVector, f64) {
    let svd = full_svd(m);
    let s = svd.padded_values();
    let i = s.len() - 1;
    (svd.v.column(i).into_owned(), s[i])
}

/// Numerical rank (singular values above `rank_tol * sigma_max`) and an
/// orthonormal nullspace basis.
pub fn numeric_rank_and_nullspace(m: &ComplexMatrix, tol: &ToleranceConfig) -> RankInfo {
    let smax = op_norm(m);
    rank_with_scale(m, tol.rank_tol, smax)
}

/// Minimum-norm solution of `A x = b`, failing when `b` is outside the
/// numerical column space of `A`.
pub fn solve_affine(
    a: &ComplexMatrix,
    b: &ComplexVector,
    tol: &ToleranceConfig,
) -> Result<AffineSolution> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let c = a.ncols();
    let svd = full_svd(a);
    let sv = svd.padded_values();
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let threshold = tol.rank_tol * smax;

    let mut x = ComplexVector::zeros(c);
    let mut nullspace = Vec::new();
    for (i, s) in sv.iter().enumerate() {
        let vi = svd.v.column(i).into_owned();
        if *s > threshold && *s > 0.0 {
            let coeff = svd.u.column(i).dotc(b) / *s;
            x += vi * coeff;
        } else {
            nullspace.push(vi);
        }
    }
    let residual = (a * &x - b).norm();
    let bound = tol.residual_tol * (smax * x.norm() + b.norm());
    if residual > bound {
        return Err(Error::Inconsistent { residual });
    }
    Ok(AffineSolution {
        x,
        nullspace,
        residual,
    })
}

/// Eigenvalues of a square matrix from its complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.is_empty() {
        return Ok(vec![]);
    }
    let schur = m.clone().try_schur(f64::EPSILON, 10_000).ok_or_else(|| {
        Error::Convergence("Schur decomposition did not converge".into())
    })?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    #[test]
    fn zero_matrix_has_full_nullspace() {
        let z = ComplexMatrix::zeros(3, 3);
        let info = numeric_rank_and_nullspace(&z, &ToleranceConfig::default());
        assert_eq!(info.rank, 0);
        assert_eq!(info.nullspace.len(), 3);
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let a = ComplexMatrix::identity(3, 3);
        let b = ComplexVector::from_vec(vec![c(1.0, 2.0), re(-3.0), c(0.0, 0.5)]);
        let sol = solve_affine(&a, &b, &ToleranceConfig::default()).unwrap();
        assert!((sol.x - &b).norm() < 1e-14);
        assert!(sol.nullspace.is_empty());
    }

    #[test]
    fn inconsistent_system_is_reported() {
        let mut a = ComplexMatrix::zeros(2, 2);
        a[(0, 0)] = re(1.0);
        let b = ComplexVector::from_vec(vec![re(1.0), re(1.0)]);
        assert!(matches!(
            solve_affine(&a, &b, &ToleranceConfig::default()),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn wide_matrix_nullspace_is_complete() {
        let a = ComplexMatrix::from_row_slice(1, 3, &[re(1.0), re(1.0), re(0.0)]);
        let info = numeric_rank_and_nullspace(&a, &ToleranceConfig::default());
        assert_eq!(info.rank, 1);
        assert_eq!(info.nullspace.len(), 2);
        for v in &info.nullspace {
            assert!((&a * v).norm() < 1e-14);
        }
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 1.0), re(3.0), re(0.0), c(-2.0, 0.0)],
        );
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((ev[0] - re(-2.0)).norm() < 1e-12);
        assert!((ev[1] - c(1.0, 1.0)).norm() < 1e-12);
    }
}
