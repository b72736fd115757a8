//! Biorthogonalization of several Jordan blocks sharing one eigenvalue.

use num_complex::Complex64;

use super::chain::{chain_from_top, normalize_block, NormalizationLedger};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ToleranceConfig};
use crate::model::{OscillatorSystem, PhaseVector};

/// Blocks at one shared eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingGroup {
    pub omega: Complex64,
    /// chains sorted by descending length
    pub chains: Vec<Vec<PhaseVector>>,
    pub ledgers: Vec<NormalizationLedger>,
}

impl CrossingGroup {
    pub fn new(omega: Complex64, mut chains: Vec<Vec<PhaseVector>>) -> Self {
        chains.sort_by(|a, b| b.len().cmp(&a.len()));
        let ledgers = vec![NormalizationLedger::default(); chains.len()];
        Self {
            omega,
            chains,
            ledgers,
        }
    }

    pub fn len(&self) -> usize {
        self.chains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty()
    }

    /// Largest `|(f_(j,n), f_(j',n')) - delta_jj' delta_(n+n', M_j - 1)|`.
    pub fn orthogonality_defect(&self, sys: &OscillatorSystem) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, cj) in self.chains.iter().enumerate() {
            for (jp, cjp) in self.chains.iter().enumerate() {
                for (n, a) in cj.iter().enumerate() {
                    for (np, b) in cjp.iter().enumerate() {
                        let target = if j == jp && n + np + 1 == cj.len() { 1.0 } else { 0.0 };
                        let v = sys.bilinear_unchecked(a, b);
                        worst = worst.max((v - Complex64::new(target, 0.0)).norm());
                    }
                }
            }
        }
        worst
    }
}

/// Makes every pairing across and within the group's blocks equal
/// `delta_jj' delta_(n+n', M_j - 1)`.
///
/// Each round takes the longest remaining blocks, finds a top vector on
/// which `(phi, A^(M-1) phi)` is nonzero, normalizes that block, and strips
/// its components from the other blocks' top vectors. Only mixings that
/// keep the block structure are used.
pub fn biorthogonalize_crossing(
    group: CrossingGroup,
    sys: &OscillatorSystem,
    tol: &ToleranceConfig,
) -> Result<CrossingGroup> {
    if group.len() <= 1 {
        return Ok(group);
    }
    let omega = group.omega;
    let h = sys.evolution_operator();
    let a = &h - ComplexMatrix::identity(h.nrows(), h.ncols()) * omega;

    // (size, top vector)
    let mut pending: Vec<(usize, PhaseVector)> = group
        .chains
        .iter()
        .map(|c| (c.len(), c.last().unwrap().clone()))
        .collect();
    let mut done: Vec<(Vec<PhaseVector>, NormalizationLedger)> = Vec::new();

    while !pending.is_empty() {
        pending.sort_by(|x, y| y.0.cmp(&x.0));
        let m1 = pending[0].0;
        let largest: Vec<usize> = (0..pending.len()).filter(|&i| pending[i].0 == m1).collect();

        // quadratic form Q_ab = (t_a, A^(M1-1) t_b) = (t_a, f_(b,0))
        let bottoms: Vec<PhaseVector> = largest
            .iter()
            .map(|&i| chain_from_top(&a, &pending[i].1, m1)[0].clone())
            .collect();
        let r = largest.len();
        let q = ComplexMatrix::from_fn(r, r, |x, y| {
            sys.bilinear_unchecked(&pending[largest[x]].1, &bottoms[y])
        });
        let mut best = (0usize, 0usize, 0.0f64);
        for x in 0..r {
            let v = q[(x, x)].norm();
            if v > best.2 {
                best = (x, x, v);
            }
        }
        let scale = largest
            .iter()
            .zip(&bottoms)
            .map(|(&i, b)| pending[i].1.norm() * b.norm())
            .fold(0.0, f64::max)
            * crate::linalg::op_norm(&sys.metric()).max(1.0);
        let floor = tol.residual_tol * scale;
        let new_top = if best.2 > floor {
            pending[largest[best.0]].1.clone()
        } else {
            // all diagonal entries vanish: use t_x + t_y, with form value 2 Q_xy
            for x in 0..r {
                for y in (x + 1)..r {
                    let v = q[(x, y)].norm();
                    if v > best.2 {
                        best = (x, y, v);
                    }
                }
            }
            if best.2 <= floor {
                return Err(Error::QuadraticFormVanishes { omega });
            }
            &pending[largest[best.0]].1 + &pending[largest[best.1]].1
        };
        // replace the first selected member; the span is unchanged
        let slot = largest[best.0];
        pending[slot].1 = new_top;
        let (_, top) = pending.remove(slot);

        let raw = chain_from_top(&a, &top, m1);
        let (chain, ledger) = normalize_block(&raw, sys, tol)?;

        for (mj, tj) in pending.iter_mut() {
            let shift = m1 - *mj;
            let mut t = tj.clone();
            for n in shift..m1 {
                let coef = sys.bilinear_unchecked(tj, &chain[n]);
                t -= &chain[m1 - 1 - n] * coef;
            }
            *tj = t;
        }
        done.push((chain, ledger));
    }

    let (chains, ledgers) = done.into_iter().unzip();
    Ok(CrossingGroup {
        omega,
        chains,
        ledgers,
    })
}
