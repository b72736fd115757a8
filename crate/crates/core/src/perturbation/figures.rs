//! Eigenvalue tracks of the five catalog splitting experiments.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::numeric::{fit_exponents_by_rank, numerical_cluster, sweep_rows, SweepRow};
use super::{predict_splitting, xi_nongeneric};
use crate::design::catalog_entry;
use crate::error::{Error, Result};
use crate::jordan::{compute_spectrum, JordanBlock};
use crate::linalg::{loglog_fit, ToleranceConfig};
use crate::model::OscillatorSystem;

pub const FIGURE_IDS: [u8; 5] = [1, 2, 3, 4, 5];

/// What one figure perturbs and what it should show.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureSpec {
    pub id: u8,
    pub system: &'static str,
    pub perturbation: &'static str,
    /// grid `eps = n^power eps0`
    pub power: u32,
    pub nongeneric: bool,
    /// shift groups in order of increasing magnitude, with the exponent
    /// each group should follow
    pub groups: Vec<(usize, f64)>,
    /// only the block with positive real part
    pub right_half_plane: bool,
}

pub fn figure_spec(id: u8) -> Result<FigureSpec> {
    let (system, perturbation, power, nongeneric, groups, right) = match id {
        1 => ("quartic-jb4", "e11", 4, false, vec![(4, 0.25)], false),
        2 => ("quartic-jb4", "nongeneric", 3, true, vec![(1, 1.0), (3, 1.0 / 3.0)], false),
        3 => ("cubic-jb3", "e11", 3, false, vec![(3, 1.0 / 3.0)], false),
        4 => ("cubic-jb3", "nongeneric", 2, true, vec![(1, 1.0), (2, 0.5)], false),
        5 => ("double-jb2", "e11", 2, false, vec![(2, 0.5)], true),
        _ => return Err(Error::InvalidInput(format!("no figure {id}; expected 1 to 5"))),
    };
    Ok(FigureSpec {
        id,
        system,
        perturbation,
        power,
        nongeneric,
        groups,
        right_half_plane: right,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub group_size: usize,
    pub exponent: f64,
    pub residual: f64,
    pub expected: f64,
}

/// One sign of `eps0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigurePanel {
    pub eps0: f64,
    pub omega: Complex64,
    /// tracks on the figure grid
    pub rows: Vec<SweepRow>,
    /// fits over the decade grid
    pub fit_grid: Vec<f64>,
    pub fits: Vec<ExponentFit>,
    /// largest distance of a pairwise argument difference from a multiple
    /// of `2 pi / r` among the `r` equiangular shifts at the smallest fit
    /// epsilon
    pub equiangular_defect: f64,
    /// `5 |lambda|` at that epsilon
    pub equiangular_bound: f64,
    /// slope of the first-order error against `|lambda|` over the fit grid
    pub error_slope: f64,
    /// `max |(|dw_n| / n |dw_1|) - 1|` on the figure grid for the
    /// equiangular shifts
    pub spacing_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub id: u8,
    pub system: String,
    pub perturbation: String,
    pub power: u32,
    pub panels: Vec<FigurePanel>,
}

/// Decade grid `1e-8 .. 1e-4` carrying the sign of `eps0`.
/// `sign 10^-8 .. sign 10^-4`, one point per decade; the grid used for
/// exponent fits.
pub fn decade_grid(sign: f64) -> Vec<f64> {
    (0..=4).map(|p| sign * 10f64.powi(p - 8)).collect()
}

fn select_block<'a>(blocks: &'a [JordanBlock], right_half_plane: bool) -> Result<&'a JordanBlock> {
    blocks
        .iter()
        .filter(|b| !right_half_plane || b.omega.re > 0.0)
        .max_by_key(|b| b.size())
        .filter(|b| !b.is_trivial())
        .ok_or(Error::NotSingleBlock(0))
}

fn predictor<'a>(
    sys: &'a OscillatorSystem,
    block: &'a JordanBlock,
    dk: &'a DMatrix<f64>,
    nongeneric: bool,
) -> Result<Box<dyn Fn(f64) -> Result<Vec<Complex64>> + 'a>> {
    if nongeneric {
        let ng = xi_nongeneric(sys, block, dk)?;
        Ok(Box::new(move |eps| Ok(ng.shifts(eps))))
    } else {
        Ok(Box::new(move |eps| {
            if eps == 0.0 {
                return Ok(vec![Complex64::new(0.0, 0.0); block.size()]);
            }
            Ok(predict_splitting(sys, block, dk, eps)?.shifts)
        }))
    }
}

fn equiangular_defect(shifts: &[Complex64]) -> f64 {
    let r = shifts.len();
    if r < 2 {
        return 0.0;
    }
    let step = 2.0 * std::f64::consts::PI / r as f64;
    let mut worst = 0.0_f64;
    for a in 0..r {
        for b in a + 1..r {
            let d = (shifts[b] / shifts[a]).arg();
            let off = d - step * (d / step).round();
            worst = worst.max(off.abs());
        }
    }
    worst
}

/// Numerical and perturbative tracks, exponent fits and shape checks for
/// figure `id`, once per entry of `eps0`.
pub fn reproduce_figure(id: u8, eps0: &[f64], count: usize, power: Option<u32>, tol: &ToleranceConfig) -> Result<FigureData> {
    let spec = figure_spec(id)?;
    let power = power.unwrap_or(spec.power);
    if count == 0 || eps0.is_empty() || eps0.iter().any(|e| *e == 0.0 || !e.is_finite()) {
        return Err(Error::InvalidInput("figure grid needs a nonzero eps0 and at least one point".into()));
    }
    let entry = catalog_entry(spec.system)?;
    let dk = entry
        .perturbation(spec.perturbation)
        .ok_or_else(|| Error::UnknownCatalog(format!("{}:{}", spec.system, spec.perturbation)))?
        .delta_k
        .clone();
    let spectrum = compute_spectrum(&entry.system, tol)?;
    let sys = spectrum.system();
    let block = select_block(spectrum.blocks(), spec.right_half_plane)?;
    let predict = predictor(sys, block, &dk, spec.nongeneric)?;
    let lead = spec.groups.last().unwrap().0;
    let group_sizes: Vec<usize> = spec.groups.iter().map(|g| g.0).collect();

    let mut panels = Vec::with_capacity(eps0.len());
    for &e0 in eps0 {
        let grid: Vec<f64> = (0..count).map(|n| (n as f64).powi(power as i32) * e0).collect();
        let rows = sweep_rows(sys, block, &dk, &grid, &predict)?;

        let fit_grid = decade_grid(e0.signum());
        let fits = fit_exponents_by_rank(sys, block, &dk, &fit_grid, &group_sizes)?
            .into_iter()
            .zip(&spec.groups)
            .map(|((exponent, residual), &(size, expected))| ExponentFit {
                group_size: size,
                exponent,
                residual,
                expected,
            })
            .collect();

        let smallest = numerical_cluster(sys, block, &dk, fit_grid[0])?;
        let leading = &smallest[smallest.len() - lead..];
        let lambda = leading.iter().map(|d| d.norm()).sum::<f64>() / lead as f64;

        let fit_rows = sweep_rows(sys, block, &dk, &fit_grid, &predict)?;
        let m = block.size();
        let mut lambdas = Vec::new();
        let mut errors = Vec::new();
        for chunk in fit_rows.chunks(m) {
            let mut pred: Vec<f64> = chunk.iter().map(|r| r.predicted.norm()).collect();
            pred.sort_by(|a, b| b.partial_cmp(a).unwrap());
            lambdas.push(pred[0]);
            errors.push(chunk.iter().map(|r| r.abs_error).fold(0.0, f64::max));
        }
        let (error_slope, _) = loglog_fit(&lambdas, &errors)?;

        let mut spacing_defect = 0.0_f64;
        let mean_lead = |chunk: &[SweepRow]| {
            let mut mags: Vec<f64> = chunk.iter().map(|r| r.numerical.norm()).collect();
            mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
            mags[..lead].iter().sum::<f64>() / lead as f64
        };
        if rows.len() >= 2 * m {
            let unit = mean_lead(&rows[m..2 * m]);
            for (n, chunk) in rows.chunks(m).enumerate().skip(1) {
                let rate = 1.0 / spec.groups.last().unwrap().1;
                let expected = (n as f64).powf(power as f64 / rate) * unit;
                spacing_defect = spacing_defect.max((mean_lead(chunk) / expected - 1.0).abs());
            }
        }

        panels.push(FigurePanel {
            eps0: e0,
            omega: block.omega,
            rows,
            fit_grid,
            fits,
            equiangular_defect: equiangular_defect(leading),
            equiangular_bound: 5.0 * lambda,
            error_slope,
            spacing_defect,
        });
    }
    Ok(FigureData {
        id,
        system: spec.system.into(),
        perturbation: spec.perturbation.into(),
        power,
        panels,
    })
}
