use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::evolve_in_block;
use crate::extended::{bilinear, cdiv, extended_modes, from_phase, norm, small_phase_factor, to_c64, Cdd};
use crate::linalg::I;
use crate::error::{Error, Result};
use crate::jordan::Spectrum;
use crate::linalg::{eigenvalues, principal_root};
use crate::model::PhaseVector;

/// Modal sum over the split cluster of a perturbed critical system against
/// the Jordan-basis evolution at the critical point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationReport {
    pub epsilon: f64,
    /// `|eps xi|^(1/M)`
    pub lambda_predicted: f64,
    /// mean distance of the cluster eigenvalues from the critical one
    pub lambda_measured: f64,
    pub cluster: Vec<(f64, f64)>,
    /// `|| f_k (f_k, phi) / (f_k, f_k) ||` per mode, independent of how
    /// `f_k` is scaled
    pub per_mode_weights: Vec<f64>,
    pub max_weight: f64,
    pub times: Vec<f64>,
    /// `|| cluster sum - Jordan evolution ||` per time
    pub differences: Vec<f64>,
    pub max_difference: f64,
}

/// Runs the comparison for one `eps`. The critical spectrum must contain
/// exactly one nontrivial block.
///
/// The perturbed cluster modes are located in double precision and then
/// polished, normalized and summed in double-double arithmetic, so the
/// reported difference is not swamped by cancellation between the large
/// per-mode terms.
pub fn cluster_cancellation_experiment(
    critical: &Spectrum,
    delta_k: &DMatrix<f64>,
    epsilon: f64,
    phi: &PhaseVector,
    times: &[f64],
) -> Result<CancellationReport> {
    let nontrivial: Vec<_> = critical.nontrivial_blocks().collect();
    if nontrivial.len() != 1 {
        return Err(Error::NotSingleBlock(nontrivial.len()));
    }
    let block = nontrivial[0];
    let m = block.size();
    let sys = critical.system();
    if phi.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            found: phi.len(),
        });
    }
    let pert = sys.perturbed(delta_k, epsilon)?;
    let mut ev = eigenvalues(&pert.evolution_operator())?;
    ev.sort_by(|a, b| (a - block.omega).norm().total_cmp(&(b - block.omega).norm()));
    ev.truncate(m);

    let modes = extended_modes(sys, delta_k, epsilon, &ev)?;
    let omegas: Vec<_> = modes.iter().map(|md| to_c64(md.omega)).collect();
    let scale = block.omega.norm().max(1.0);
    for a in 0..m {
        for b in 0..a {
            if (omegas[a] - omegas[b]).norm() <= 1e-12 * scale {
                return Err(Error::StillDefective(epsilon));
            }
        }
    }

    let xi = sys.coordinate_form(&block.chain[0], delta_k, &block.chain[0]);
    let lambda_predicted = principal_root(xi * epsilon, m).norm();
    let lambda_measured = omegas.iter().map(|w| (w - block.omega).norm()).sum::<f64>() / m as f64;

    let phi_x = from_phase(phi);
    let mut coefs: Vec<Cdd> = Vec::with_capacity(m);
    let mut per_mode_weights = Vec::with_capacity(m);
    for md in &modes {
        let nn = bilinear(sys, &md.f, &md.f);
        if to_c64(nn).norm() == 0.0 {
            return Err(Error::StillDefective(epsilon));
        }
        let c = cdiv(bilinear(sys, &md.f, &phi_x), nn);
        per_mode_weights.push((norm(&md.f) * (c.re * c.re + c.im * c.im).sqrt()).hi());
        coefs.push(c);
    }

    let dim = phi.len();
    let mut differences = Vec::with_capacity(times.len());
    for &t in times {
        // e^(-i w_k t) = e^(-i w_j t) e^(-i (w_k - w_j) t); only the small
        // factor needs extended precision
        let centre = Cdd::new(block.omega.re.into(), block.omega.im.into());
        let mut sum = vec![Cdd::new(0.0.into(), 0.0.into()); dim];
        for (md, c) in modes.iter().zip(&coefs) {
            let w = small_phase_factor(md.omega - centre, t) * *c;
            for (s, f) in sum.iter_mut().zip(&md.f) {
                *s = *s + *f * w;
            }
        }
        let common = (-I * block.omega * t).exp();
        let jordan = evolve_in_block(block, phi, t);
        let diff: f64 = sum
            .iter()
            .zip(jordan.iter())
            .map(|(s, j)| (to_c64(*s) * common - j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        differences.push(diff);
    }
    Ok(CancellationReport {
        epsilon,
        lambda_predicted,
        lambda_measured,
        cluster: omegas.iter().map(|w| (w.re, w.im)).collect(),
        max_weight: per_mode_weights.iter().cloned().fold(0.0, f64::max),
        per_mode_weights,
        times: times.to_vec(),
        max_difference: differences.iter().cloned().fold(0.0, f64::max),
        differences,
    })
}
