//! Jordan chains: construction from the defining relation
//! `(H - w) f_n = f_(n-1)` and normalization under the bilinear map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::structure::{kernel_flag, orthonormalize};
use crate::error::{Error, Result};
use crate::linalg::{
    numeric_rank_and_nullspace, principal_root, solve_affine, ComplexMatrix, ComplexVector,
    ToleranceConfig,
};
use crate::model::{OscillatorSystem, PhaseVector};

/// Audit trail of one block normalization.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalizationLedger {
    /// `A_n = (f_a, f_b)` with `a + b = n`, `n = 0..=2M-2`, before normalization
    pub a_before: Vec<Complex64>,
    /// the same sequence after normalization
    pub a_after: Vec<Complex64>,
    /// transform coefficients: `c[0]` is the rescale, `c[n]` mixes `f_(m-n)` into `f_m`
    pub c: Vec<Complex64>,
    /// true when the final sign convention flipped the chain
    pub sign_flipped: bool,
}

fn shifted(h: &ComplexMatrix, omega: Complex64) -> ComplexMatrix {
    let d = h.nrows();
    h - ComplexMatrix::identity(d, d) * omega
}

/// Pairing sequence `A_n` of a chain. Only meaningful when the chain obeys
/// the defining relation, in which case `(f_a, f_b)` depends on `a + b` only.
pub fn pairing_sequence(sys: &OscillatorSystem, chain: &[PhaseVector]) -> Vec<Complex64> {
    let m = chain.len();
    (0..(2 * m - 1))
        .map(|n| {
            let a = n.saturating_sub(m - 1);
            sys.bilinear_unchecked(&chain[a], &chain[n - a])
        })
        .collect()
}

/// Raw (unnormalized) chain of length `m` at `omega`, built upward from the
/// eigenvector with minimum-norm solutions of the defining relation.
pub fn build_chain(
    h: &ComplexMatrix,
    omega: Complex64,
    m: usize,
    tol: &ToleranceConfig,
) -> Result<Vec<PhaseVector>> {
    if m == 0 {
        return Err(Error::InvalidInput("chain length must be positive".into()));
    }
    let a = shifted(h, omega);
    let ker = numeric_rank_and_nullspace(&a, tol);
    let f0 = match ker.nullspace.len() {
        0 => {
            return Err(Error::Verification {
                what: format!("{omega} is not an eigenvalue"),
                residual: ker.singular_values.iter().cloned().fold(f64::INFINITY, f64::min),
                tolerance: tol.rank_tol,
            })
        }
        1 => ker.nullspace[0].clone(),
        _ => eigenvector_in_range(&a, &ker.nullspace, m, tol)?,
    };
    let mut chain = vec![f0];
    for _ in 1..m {
        let prev = chain.last().unwrap();
        let sol = solve_affine(&a, prev, tol)?;
        chain.push(sol.x);
    }
    // the top vector must not admit a further extension
    if solve_affine(&a, chain.last().unwrap(), tol).is_ok() {
        return Err(Error::Verification {
            what: format!("chain at {omega} extends beyond length {m}"),
            residual: 0.0,
            tolerance: tol.residual_tol,
        });
    }
    Ok(chain)
}

/// With several eigenvectors, pick one in `range(A^(m-1))` so that a chain
/// of length `m` exists above it.
fn eigenvector_in_range(
    a: &ComplexMatrix,
    kernel: &[ComplexVector],
    m: usize,
    tol: &ToleranceConfig,
) -> Result<ComplexVector> {
    let mut power = ComplexMatrix::identity(a.nrows(), a.ncols());
    for _ in 1..m {
        power = &power * a;
    }
    let q = orthonormalize(kernel, a.nrows());
    // component of range(A^(m-1)) inside ker(A): largest left singular vector
    let proj = q.adjoint() * &power;
    let svd = crate::linalg::dense::full_svd(&proj);
    let u = svd.u;
    let (idx, smax) = (0, svd.s.first().copied().unwrap_or(0.0));
    if smax <= tol.rank_tol * crate::linalg::op_norm(&power).max(f64::MIN_POSITIVE) {
        return Err(Error::Inconsistent { residual: smax });
    }
    Ok(&q * u.column(idx))
}

/// Chains for every block at one eigenvalue, built downward from top vectors
/// chosen in `ker A^k` modulo what longer chains and `ker A^(k-1)` already
/// span. Returned in descending size order.
pub fn top_down_chains(
    h: &ComplexMatrix,
    omega: Complex64,
    sizes: &[usize],
    tol: &ToleranceConfig,
) -> Result<Vec<Vec<PhaseVector>>> {
    let a = shifted(h, omega);
    let dim = a.nrows();
    let kmax = sizes.iter().copied().max().unwrap_or(0);
    let flag = kernel_flag(&a, kmax, tol);
    if flag.levels.len() < kmax {
        return Err(Error::Verification {
            what: format!("generalized kernel at {omega} shorter than block size {kmax}"),
            residual: 0.0,
            tolerance: tol.rank_tol,
        });
    }
    let mut tops: Vec<(usize, ComplexVector)> = Vec::new();
    for k in (1..=kmax).rev() {
        let needed = sizes.iter().filter(|&&s| s == k).count();
        if needed == 0 {
            continue;
        }
        let mut existing: Vec<ComplexVector> = Vec::new();
        if k >= 2 {
            let q = &flag.levels[k - 2];
            existing.extend(q.column_iter().map(|c| c.into_owned()));
        }
        for (len, t) in &tops {
            let mut v = t.clone();
            for _ in 0..(len - k) {
                v = &a * v;
            }
            existing.push(v);
        }
        let e = orthonormalize(&existing, dim);
        let qk = &flag.levels[k - 1];
        let residual = if e.ncols() == 0 {
            qk.clone()
        } else {
            qk - &e * (e.adjoint() * qk)
        };
        let svd = crate::linalg::dense::full_svd(&residual);
        if svd.s.len() < needed || svd.s[needed - 1] <= 1e-8 {
            return Err(Error::Verification {
                what: format!("cannot find {needed} independent top vectors of length {k} at {omega}"),
                residual: 0.0,
                tolerance: tol.rank_tol,
            });
        }
        for i in 0..needed {
            let w = svd.v.column(i).into_owned();
            tops.push((k, qk * w));
        }
    }
    Ok(tops
        .into_iter()
        .map(|(len, t)| chain_from_top(&a, &t, len))
        .collect())
}

/// `f_n = A^(M-1-n) t` for `n = 0..M`.
pub(crate) fn chain_from_top(a: &ComplexMatrix, top: &ComplexVector, m: usize) -> Vec<PhaseVector> {
    let mut chain = vec![top.clone()];
    for _ in 1..m {
        let next = a * chain.last().unwrap();
        chain.push(next);
    }
    chain.reverse();
    chain
}

/// Brings a raw chain to `A_(M-1) = 1`, `A_n = 0` otherwise, using only the
/// admissible transforms `f_n -> sum_k c_k f_(n-k)`.
pub fn normalize_block(
    chain: &[PhaseVector],
    sys: &OscillatorSystem,
    tol: &ToleranceConfig,
) -> Result<(Vec<PhaseVector>, NormalizationLedger)> {
    let m = chain.len();
    if m == 0 {
        return Err(Error::InvalidInput("empty chain".into()));
    }
    let a_before = pairing_sequence(sys, chain);
    let top = a_before[m - 1];
    let g_scale = crate::linalg::op_norm(&sys.metric()).max(1.0);
    let floor = tol.residual_tol * chain[0].norm() * chain[m - 1].norm() * g_scale;
    if top.norm() <= floor {
        return Err(Error::ImpossibleNormalization { value: top.norm() });
    }
    let c0 = principal_root(top, 2).inv();
    let mut f: Vec<PhaseVector> = chain.iter().map(|v| v * c0).collect();
    let mut coeffs = vec![c0];
    for n in 1..m {
        let a_n = sys.bilinear_unchecked(&f[n], &f[m - 1]);
        let cn = -a_n / 2.0;
        for k in (n..m).rev() {
            let lower = f[k - n].clone();
            f[k] += lower * cn;
        }
        coeffs.push(cn);
    }
    let flip = needs_sign_flip(&f[0]);
    if flip {
        for v in f.iter_mut() {
            *v = -v.clone();
        }
    }
    let a_after = pairing_sequence(sys, &f);
    Ok((
        f,
        NormalizationLedger {
            a_before,
            a_after,
            c: coeffs,
            sign_flipped: flip,
        },
    ))
}

/// Sign convention: the first entry of largest magnitude gets its argument
/// in `(-pi/2, pi/2]`.
pub(crate) fn needs_sign_flip(v: &PhaseVector) -> bool {
    let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let Some(lead) = v.iter().find(|z| z.norm() >= (1.0 - 1e-6) * vmax) else {
        return false;
    };
    let tiny = 1e-9 * lead.norm();
    if lead.re.abs() > tiny {
        lead.re < 0.0
    } else {
        lead.im < 0.0
    }
}
