use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::JordanBlock;
use crate::error::{Error, Result};
use crate::model::PhaseVector;

/// How a block relates to its conjugate under `f_(-j,n) = s i^M (-1)^n f_(j,n)^*`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conjugation {
    /// not yet processed
    Unpaired,
    /// eigenvalue on the imaginary axis; `sign` is the realized `s` for the
    /// block mapped onto itself, if any
    ZeroMode { sign: Option<i8> },
    /// member of a `(j, -j)` pair, related with sign `s`
    Paired { partner: i32, sign: i8 },
}

/// `s i^M (-1)^n f_n^*` for the whole chain.
pub fn conjugate_chain(chain: &[PhaseVector], sign: i8) -> Vec<PhaseVector> {
    let m = chain.len();
    let i_pow = Complex64::new(0.0, 1.0).powu(m as u32) * f64::from(sign);
    chain
        .iter()
        .enumerate()
        .map(|(n, f)| {
            let s = if n % 2 == 0 { i_pow } else { -i_pow };
            f.map(|z| z.conj()) * s
        })
        .collect()
}

fn realized_sign(chain: &[PhaseVector]) -> Option<i8> {
    let scale = chain.iter().map(|f| f.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for sign in [1i8, -1] {
        let image = conjugate_chain(chain, sign);
        let d = chain
            .iter()
            .zip(&image)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if d <= 1e-8 * scale {
            return Some(sign);
        }
    }
    None
}

/// Pairs blocks at `w` and `-w^*`, rebuilding each negative-frequency chain
/// from its partner with the `+` sign, and records the realized sign of
/// zero-modes. Blocks come back ordered: zero-modes first (by decreasing
/// imaginary part), then pairs `(+k, -k)` by increasing real part.
pub fn enforce_conjugation(blocks: Vec<JordanBlock>, pair_tol: f64) -> Result<Vec<JordanBlock>> {
    let mut zero = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for mut b in blocks {
        if b.omega.re.abs() <= pair_tol {
            b.omega.re = 0.0;
            zero.push(b);
        } else if b.omega.re > 0.0 {
            pos.push(b);
        } else {
            neg.push(b);
        }
    }
    zero.sort_by(|a, b| b.omega.im.partial_cmp(&a.omega.im).unwrap().then(b.size().cmp(&a.size())));
    pos.sort_by(|a, b| {
        (a.omega.re, -a.omega.im)
            .partial_cmp(&(b.omega.re, -b.omega.im))
            .unwrap()
            .then(b.size().cmp(&a.size()))
    });

    let mut out = Vec::new();
    for mut b in zero {
        b.label = 0;
        b.conjugation = Conjugation::ZeroMode {
            sign: realized_sign(&b.chain),
        };
        out.push(b);
    }
    let mut used = vec![false; neg.len()];
    for (k, mut b) in pos.into_iter().enumerate() {
        let target = -b.omega.conj();
        let partner = (0..neg.len())
            .filter(|&i| !used[i] && neg[i].size() == b.size())
            .min_by(|&x, &y| {
                (neg[x].omega - target)
                    .norm()
                    .partial_cmp(&(neg[y].omega - target).norm())
                    .unwrap()
            })
            .filter(|&i| (neg[i].omega - target).norm() <= pair_tol)
            .ok_or(Error::PairingFailure { omega: b.omega })?;
        used[partner] = true;
        let label = k as i32 + 1;
        b.label = label;
        b.conjugation = Conjugation::Paired {
            partner: -label,
            sign: 1,
        };
        let mut p = neg[partner].clone();
        p.label = -label;
        p.omega = target;
        p.chain = conjugate_chain(&b.chain, 1);
        p.conjugation = Conjugation::Paired {
            partner: label,
            sign: 1,
        };
        out.push(b);
        out.push(p);
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(Error::PairingFailure { omega: neg[i].omega });
    }
    Ok(out)
}
