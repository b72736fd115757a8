//! Eigenvalue clustering and block-size detection from the rank sequence of
//! `(H - w)^k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    char_poly, op_norm, poly_roots, refine_multiple_root, ComplexMatrix, ComplexPolynomial,
    ComplexVector, ToleranceConfig,
};

/// One distinct eigenvalue with its Jordan structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCluster {
    pub omega: Complex64,
    pub algebraic_multiplicity: usize,
    /// block sizes in descending order
    pub block_sizes: Vec<usize>,
    /// `rank((H - w)^k)` for `k = 0..=max block size`
    pub rank_sequence: Vec<usize>,
}

/// Distinct eigenvalues that sit closer together than `10 * cluster_tol`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearCriticalCluster {
    pub eigenvalues: Vec<Complex64>,
    pub diameter: f64,
}

/// Orthonormal bases of the nested kernels `ker (H - w)^k`, `k = 1, 2, ...`.
#[derive(Clone, Debug)]
pub(crate) struct KernelFlag {
    pub levels: Vec<ComplexMatrix>,
}

impl KernelFlag {
    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(|q| q.ncols()).collect()
    }
}

fn orthonormal_columns(vs: &[ComplexVector], dim: usize) -> ComplexMatrix {
    let mut cols: Vec<ComplexVector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&w);
                w -= q * proj;
            }
        }
        let nrm = w.norm();
        if nrm > 1e-12 * v.norm().max(f64::MIN_POSITIVE) {
            cols.push(w / Complex64::new(nrm, 0.0));
        }
    }
    if cols.is_empty() {
        ComplexMatrix::zeros(dim, 0)
    } else {
        ComplexMatrix::from_columns(&cols)
    }
}

pub(crate) fn orthonormalize(vs: &[ComplexVector], dim: usize) -> ComplexMatrix {
    orthonormal_columns(vs, dim)
}

/// Nested kernels of `a`, computed level by level as
/// `ker((I - Q Q^H) a)` so that every level uses the same singular-value
/// scale as `a` itself.
pub(crate) fn kernel_flag(a: &ComplexMatrix, max_levels: usize, tol: &ToleranceConfig) -> KernelFlag {
    let dim = a.nrows();
    let scale = op_norm(a);
    let mut levels: Vec<ComplexMatrix> = Vec::new();
    let mut q = ComplexMatrix::zeros(dim, 0);
    for _ in 0..max_levels {
        let b = if q.ncols() == 0 {
            a.clone()
        } else {
            let proj = ComplexMatrix::identity(dim, dim) - &q * q.adjoint();
            proj * a
        };
        let info = crate::linalg::dense_rank_with_scale(&b, tol.rank_tol, scale);
        let next = orthonormal_columns(&info.nullspace, dim);
        let grew = next.ncols() > q.ncols();
        levels.push(next.clone());
        q = next;
        if !grew || q.ncols() == dim {
            break;
        }
    }
    KernelFlag { levels }
}

/// Block sizes (descending) from kernel dimensions `d_1 <= d_2 <= ...`.
pub(crate) fn block_sizes_from_kernel_dims(dims: &[usize]) -> Vec<usize> {
    let mut at_least = Vec::new();
    let mut prev = 0;
    for &d in dims {
        at_least.push(d.saturating_sub(prev));
        prev = d;
    }
    let mut sizes = Vec::new();
    for k in 0..at_least.len() {
        let next = at_least.get(k + 1).copied().unwrap_or(0);
        let exactly = at_least[k].saturating_sub(next);
        for _ in 0..exactly {
            sizes.push(k + 1);
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

fn single_linkage(points: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut group = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if group[start] != usize::MAX {
            continue;
        }
        let gid = groups.len();
        let mut members = vec![start];
        group[start] = gid;
        let mut head = 0;
        while head < members.len() {
            let cur = members[head];
            head += 1;
            for other in 0..n {
                if group[other] == usize::MAX && (points[cur] - points[other]).norm() <= radius {
                    group[other] = gid;
                    members.push(other);
                }
            }
        }
        groups.push(members);
    }
    groups
}

struct Detector<'a> {
    h: &'a ComplexMatrix,
    p: &'a ComplexPolynomial,
    tol: &'a ToleranceConfig,
    scale: f64,
    out: Vec<EigenCluster>,
}

impl Detector<'_> {
    fn analyse(&self, omega: Complex64, max_levels: usize) -> (KernelFlag, Vec<usize>) {
        let dim = self.h.nrows();
        let a = self.h - ComplexMatrix::identity(dim, dim) * omega;
        let flag = kernel_flag(&a, max_levels, self.tol);
        let dims = flag.dims();
        (flag, dims)
    }

    fn accept(&mut self, omega: Complex64, dims: &[usize]) {
        let dim = self.h.nrows();
        let sizes = block_sizes_from_kernel_dims(dims);
        let mut ranks = vec![dim];
        ranks.extend(dims.iter().map(|d| dim - d));
        self.out.push(EigenCluster {
            omega,
            algebraic_multiplicity: sizes.iter().sum(),
            block_sizes: sizes,
            rank_sequence: ranks,
        });
    }

    fn resolve(&mut self, roots: &[Complex64], radius: f64) -> Result<()> {
        for members in single_linkage(roots, radius) {
            let pts: Vec<Complex64> = members.iter().map(|&i| roots[i]).collect();
            let m = pts.len();
            let mean = pts.iter().sum::<Complex64>() / m as f64;
            let mut center = refine_multiple_root(self.p, mean, m);
            if !((center - mean).norm() <= radius.max(self.tol.cluster_tol * self.scale)) {
                center = mean;
            }
            let (_, dims) = self.analyse(center, m + 1);
            let algebraic = dims.last().copied().unwrap_or(0);
            if algebraic == m {
                self.accept(center, &dims);
                continue;
            }
            if m > 1 && radius > self.tol.cluster_tol * self.scale {
                self.resolve(&pts, radius / 10.0)?;
                continue;
            }
            if m > 1 {
                // roots no closer than cluster_tol yet not confirmed by rank:
                // treat each as its own eigenvalue
                for r in pts {
                    self.resolve(&[r], radius)?;
                }
                continue;
            }
            let residual = dims.first().copied().unwrap_or(0);
            if residual == 0 {
                return Err(Error::Verification {
                    what: format!("root {center} is not a numerical eigenvalue (H - w has full rank)"),
                    residual: f64::NAN,
                    tolerance: self.tol.rank_tol,
                });
            }
            self.accept(center, &dims);
        }
        Ok(())
    }
}

/// Distinct eigenvalues of `h` with their block structure.
pub fn detect_structure(
    h: &ComplexMatrix,
    tol: &ToleranceConfig,
) -> Result<(Vec<EigenCluster>, Vec<NearCriticalCluster>)> {
    let p = char_poly(h)?;
    let roots = poly_roots(&p, tol)?;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let mut det = Detector {
        h,
        p: &p,
        tol,
        scale,
        out: Vec::new(),
    };
    det.resolve(&roots, 1e-2 * scale)?;
    let total: usize = det.out.iter().map(|c| c.algebraic_multiplicity).sum();
    if total != h.nrows() {
        return Err(Error::Verification {
            what: format!(
                "detected algebraic multiplicities sum to {total}, expected {}",
                h.nrows()
            ),
            residual: (total as f64 - h.nrows() as f64).abs(),
            tolerance: 0.0,
        });
    }
    let clusters = det.out;
    let omegas: Vec<Complex64> = clusters.iter().map(|c| c.omega).collect();
    let near = single_linkage(&omegas, 10.0 * tol.cluster_tol * scale)
        .into_iter()
        .filter(|g| g.len() > 1)
        .map(|g| {
            let eigenvalues: Vec<Complex64> = g.iter().map(|&i| omegas[i]).collect();
            let mut diameter: f64 = 0.0;
            for a in &eigenvalues {
                for b in &eigenvalues {
                    diameter = diameter.max((a - b).norm());
                }
            }
            NearCriticalCluster {
                eigenvalues,
                diameter,
            }
        })
        .collect();
    Ok((clusters, near))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_from_dims() {
        assert_eq!(block_sizes_from_kernel_dims(&[1, 2, 3, 4]), vec![4]);
        assert_eq!(block_sizes_from_kernel_dims(&[2, 4]), vec![2, 2]);
        assert_eq!(block_sizes_from_kernel_dims(&[2, 3, 4]), vec![3, 1]);
        assert_eq!(block_sizes_from_kernel_dims(&[1]), vec![1]);
        assert_eq!(block_sizes_from_kernel_dims(&[3, 5, 6]), vec![3, 2, 1]);
    }
}
