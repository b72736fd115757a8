//! Damped oscillator systems `x'' + Gamma x' + K x = 0`, their evolution
//! operator `H` and the symmetric bilinear map under which `H` is symmetric.
//!
//! Phase-space vectors are stacked as `(x, p)` with `p = x'`, so the length
//! is `2N`. `Gamma` is the full physical damping matrix (some texts write
//! it as `2 gamma`).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dotu, ComplexMatrix, ComplexVector, I};

/// Phase-space vector `(x, p)` of length `2N`.
pub type PhaseVector = ComplexVector;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorSystem {
    n: usize,
    k: DMatrix<f64>,
    gamma: DMatrix<f64>,
    label: Option<String>,
    symmetry_defect: f64,
    warnings: Vec<String>,
    rational: Option<RationalEntries>,
}

/// Exact entries `K = stiffness / denominator`, `Gamma = damping /
/// denominator` (row-major), for systems whose matrices are rational but
/// not exactly representable in binary. Extended-precision solvers use
/// them instead of the rounded doubles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalEntries {
    pub denominator: i64,
    pub stiffness: Vec<i64>,
    pub damping: Vec<i64>,
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..i {
            d = d.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    d
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

impl OscillatorSystem {
    /// Validates and builds a system from stiffness `k` and damping `gamma`.
    pub fn new(k: DMatrix<f64>, gamma: DMatrix<f64>) -> Result<Self> {
        for (m, name) in [(&k, "K"), (&gamma, "Gamma")] {
            if !m.is_square() {
                return Err(Error::NonSquare {
                    rows: m.nrows(),
                    cols: m.ncols(),
                });
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(name));
            }
        }
        if k.nrows() != gamma.nrows() {
            return Err(Error::DimensionMismatch {
                expected: k.nrows(),
                found: gamma.nrows(),
            });
        }
        if k.nrows() == 0 {
            return Err(Error::InvalidInput("system must have at least one oscillator".into()));
        }
        let dk = asymmetry(&k);
        if dk > SYMMETRY_TOL {
            return Err(Error::Asymmetric { which: "K", defect: dk });
        }
        let dg = asymmetry(&gamma);
        if dg > SYMMETRY_TOL {
            return Err(Error::Asymmetric {
                which: "Gamma",
                defect: dg,
            });
        }
        let n = k.nrows();
        let mut sys = Self {
            n,
            k: symmetrized(&k),
            gamma: symmetrized(&gamma),
            label: None,
            symmetry_defect: dk.max(dg),
            warnings: Vec::new(),
            rational: None,
        };
        let min_gamma = sys.min_damping_eigenvalue();
        let scale = sys.gamma.amax().max(1.0);
        if min_gamma < -1e-12 * scale {
            let msg = format!("Gamma is not positive semidefinite (min eigenvalue {min_gamma:.3e})");
            log::warn!("{msg}");
            sys.warnings.push(msg);
        }
        Ok(sys)
    }

    pub fn from_rows(k: &[&[f64]], gamma: &[&[f64]]) -> Result<Self> {
        Self::new(rows_to_matrix(k)?, rows_to_matrix(gamma)?)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Attaches exact rational entries, which must round to the stored
    /// matrices.
    pub fn with_rational_entries(mut self, denominator: i64, stiffness: &[i64], damping: &[i64]) -> Result<Self> {
        let n = self.n;
        if denominator <= 0 || stiffness.len() != n * n || damping.len() != n * n {
            return Err(Error::InvalidInput("rational entries need a positive denominator and N*N numerators".into()));
        }
        for (m, nums) in [(&self.k, stiffness), (&self.gamma, damping)] {
            for i in 0..n {
                for j in 0..n {
                    let exact = nums[i * n + j] as f64 / denominator as f64;
                    if (m[(i, j)] - exact).abs() > 1e-14 * exact.abs().max(1.0) {
                        return Err(Error::InvalidInput(format!(
                            "rational entry ({i},{j}) = {exact} does not match {}",
                            m[(i, j)]
                        )));
                    }
                }
            }
        }
        self.k = DMatrix::from_fn(n, n, |i, j| stiffness[i * n + j] as f64 / denominator as f64);
        self.gamma = DMatrix::from_fn(n, n, |i, j| damping[i * n + j] as f64 / denominator as f64);
        self.rational = Some(RationalEntries {
            denominator,
            stiffness: stiffness.to_vec(),
            damping: damping.to_vec(),
        });
        Ok(self)
    }

    pub fn rational_entries(&self) -> Option<&RationalEntries> {
        self.rational.as_ref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn damping(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.symmetry_defect
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn min_damping_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.gamma.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_stiffness_positive_definite(&self) -> bool {
        SymmetricEigen::new(self.k.clone())
            .eigenvalues
            .iter()
            .all(|v| *v > 0.0)
    }

    /// Same damping, stiffness `K + eps * dk`.
    pub fn perturbed(&self, dk: &DMatrix<f64>, eps: f64) -> Result<Self> {
        let mut out = Self::new(&self.k + dk * eps, self.gamma.clone())?;
        out.label = self.label.clone();
        Ok(out)
    }

    /// `H = i [[0, I], [-K, -Gamma]]`, so that `i d/dt (x, p) = H (x, p)`.
    pub fn evolution_operator(&self) -> ComplexMatrix {
        let n = self.n;
        let mut h = ComplexMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            h[(a, n + a)] = I;
            for b in 0..n {
                h[(n + a, b)] = -I * self.k[(a, b)];
                h[(n + a, n + b)] = -I * self.gamma[(a, b)];
            }
        }
        h
    }

    /// Metric `g = i [[Gamma, I], [I, 0]]` with `(psi, phi) = psi^T g phi`.
    pub fn metric(&self) -> ComplexMatrix {
        let n = self.n;
        let mut g = ComplexMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            g[(a, n + a)] = I;
            g[(n + a, a)] = I;
            for b in 0..n {
                g[(a, b)] = I * self.gamma[(a, b)];
            }
        }
        g
    }

    /// Perturbation of `H` induced by a stiffness change `dk`.
    pub fn stiffness_perturbation_operator(&self, dk: &DMatrix<f64>) -> ComplexMatrix {
        let n = self.n;
        let mut dh = ComplexMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            for b in 0..n {
                dh[(n + a, b)] = -I * dk[(a, b)];
            }
        }
        dh
    }

    fn check_len(&self, v: &PhaseVector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    /// The symmetric, non-conjugating bilinear map
    /// `(psi, phi) = i [x_psi . Gamma x_phi + x_psi . p_phi + p_psi . x_phi]`.
    pub fn bilinear(&self, psi: &PhaseVector, phi: &PhaseVector) -> Result<Complex64> {
        self.check_len(psi)?;
        self.check_len(phi)?;
        Ok(self.bilinear_unchecked(psi, phi))
    }

    pub(crate) fn bilinear_unchecked(&self, psi: &PhaseVector, phi: &PhaseVector) -> Complex64 {
        let n = self.n;
        let (xa, pa) = (psi.rows(0, n), psi.rows(n, n));
        let (xb, pb) = (phi.rows(0, n), phi.rows(n, n));
        let gx = self.gamma.map(|v| Complex64::new(v, 0.0)) * xb;
        let s: Complex64 = xa.iter().zip(gx.iter()).map(|(a, b)| a * b).sum::<Complex64>()
            + xa.iter().zip(pb.iter()).map(|(a, b)| a * b).sum::<Complex64>()
            + pa.iter().zip(xb.iter()).map(|(a, b)| a * b).sum::<Complex64>();
        I * s
    }

    /// `[g phi]^*`: the covector whose conjugating pairing reproduces
    /// `(phi, .)`, i.e. `<result|chi> = (phi, chi)`.
    pub fn metric_conjugate(&self, phi: &PhaseVector) -> Result<PhaseVector> {
        self.check_len(phi)?;
        Ok((self.metric() * phi).map(|z| z.conj()))
    }

    /// Position part of a phase vector.
    pub fn positions(&self, v: &PhaseVector) -> ComplexVector {
        v.rows(0, self.n).into_owned()
    }

    /// Momentum part of a phase vector.
    pub fn momenta(&self, v: &PhaseVector) -> ComplexVector {
        v.rows(self.n, self.n).into_owned()
    }

    /// Generalized "stiffness" matrix element `a^T dk b` on position parts.
    pub fn coordinate_form(&self, a: &PhaseVector, dk: &DMatrix<f64>, b: &PhaseVector) -> Complex64 {
        let xa = self.positions(a);
        let xb = self.positions(b);
        let dkc = dk.map(|v| Complex64::new(v, 0.0));
        dotu(&xa, &(dkc * xb))
    }

    /// Scaled copy `K -> a^2 K`, `Gamma -> a Gamma`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor must be positive, got {a}")));
        }
        let mut out = Self::new(&self.k * (a * a), &self.gamma * a)?;
        out.label = self.label.clone();
        Ok(out)
    }
}

/// Builds a phase vector from position and momentum parts.
pub fn phase_vector(x: &[Complex64], p: &[Complex64]) -> PhaseVector {
    PhaseVector::from_iterator(x.len() + p.len(), x.iter().chain(p.iter()).copied())
}

pub(crate) fn rows_to_matrix(rows: &[&[f64]]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map(|row| row.len()).unwrap_or(0);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::InvalidInput("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// On-disk system description.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SystemFile {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    #[serde(rename = "Gamma")]
    pub gamma: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl SystemFile {
    pub fn from_system(sys: &OscillatorSystem) -> Self {
        let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect()
        };
        Self {
            n: sys.n(),
            k: rows(sys.stiffness()),
            gamma: rows(sys.damping()),
            label: sys.label().map(str::to_owned),
        }
    }

    pub fn into_system(self) -> Result<OscillatorSystem> {
        let k: Vec<&[f64]> = self.k.iter().map(Vec::as_slice).collect();
        let g: Vec<&[f64]> = self.gamma.iter().map(Vec::as_slice).collect();
        let km = rows_to_matrix(&k)?;
        let gm = rows_to_matrix(&g)?;
        if km.nrows() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: km.nrows(),
            });
        }
        let sys = OscillatorSystem::new(km, gm)?;
        Ok(match self.label {
            Some(l) => sys.with_label(l),
            None => sys,
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
