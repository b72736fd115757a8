//! Jordan normal basis of the evolution operator, normalized under the
//! bilinear map, with dual basis and conjugate-block pairing.

mod chain;
mod conjugation;
mod crossing;
mod structure;
mod verify;

pub use chain::{build_chain, normalize_block, pairing_sequence, top_down_chains, NormalizationLedger};
pub use conjugation::{enforce_conjugation, Conjugation};
pub use crossing::{biorthogonalize_crossing, CrossingGroup};
pub use structure::{detect_structure, EigenCluster, NearCriticalCluster};
pub use verify::{verify_representations, BlockShapes, VerificationReport};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ToleranceConfig};
use crate::model::{OscillatorSystem, PhaseVector};

/// One Jordan block: eigenvalue, normalized chain and dual chain.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanBlock {
    /// `+k`/`-k` for conjugate partners, `0` for self-conjugate zero-modes
    pub label: i32,
    pub omega: Complex64,
    pub chain: Vec<PhaseVector>,
    pub duals: Vec<PhaseVector>,
    pub ledger: NormalizationLedger,
    pub conjugation: Conjugation,
}

impl JordanBlock {
    pub fn size(&self) -> usize {
        self.chain.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.chain.len() == 1
    }

    /// Top vector `f_(j, M-1)`.
    pub fn top(&self) -> &PhaseVector {
        self.chain.last().unwrap()
    }
}

/// Complete Jordan normal basis of one system.
#[derive(Clone, Debug)]
pub struct Spectrum {
    system: OscillatorSystem,
    blocks: Vec<JordanBlock>,
    clusters: Vec<EigenCluster>,
    near_critical: Vec<NearCriticalCluster>,
    tolerances: ToleranceConfig,
}

impl Spectrum {
    pub fn system(&self) -> &OscillatorSystem {
        &self.system
    }

    pub fn blocks(&self) -> &[JordanBlock] {
        &self.blocks
    }

    pub fn clusters(&self) -> &[EigenCluster] {
        &self.clusters
    }

    pub fn near_critical(&self) -> &[NearCriticalCluster] {
        &self.near_critical
    }

    pub fn tolerances(&self) -> &ToleranceConfig {
        &self.tolerances
    }

    /// Number of blocks (the count of independent eigenvectors).
    pub fn nu(&self) -> usize {
        self.blocks.len()
    }

    pub fn nontrivial_blocks(&self) -> impl Iterator<Item = &JordanBlock> {
        self.blocks.iter().filter(|b| !b.is_trivial())
    }

    /// Columns `f_(j,n)` in block order.
    pub fn basis_matrix(&self) -> ComplexMatrix {
        let cols: Vec<PhaseVector> = self.blocks.iter().flat_map(|b| b.chain.iter().cloned()).collect();
        ComplexMatrix::from_columns(&cols)
    }

    /// Columns `f^(j,n)` in the same order as [`Spectrum::basis_matrix`].
    pub fn dual_matrix(&self) -> ComplexMatrix {
        let cols: Vec<PhaseVector> = self.blocks.iter().flat_map(|b| b.duals.iter().cloned()).collect();
        ComplexMatrix::from_columns(&cols)
    }

    /// Block with eigenvalue closest to `omega`.
    pub fn block_near(&self, omega: Complex64) -> Option<&JordanBlock> {
        self.blocks.iter().min_by(|a, b| {
            (a.omega - omega)
                .norm()
                .partial_cmp(&(b.omega - omega).norm())
                .unwrap()
        })
    }

    /// Largest nontrivial block (ties broken by order).
    pub fn largest_block(&self) -> &JordanBlock {
        self.blocks.iter().fold(&self.blocks[0], |acc, b| if b.size() > acc.size() { b } else { acc })
    }

    /// `sum_(j,n) f_(j,n) (f_(j,M-1-n), phi)`.
    pub fn reconstruct(&self, phi: &PhaseVector) -> Result<PhaseVector> {
        let sys = &self.system;
        let mut out = PhaseVector::zeros(sys.dim());
        for b in &self.blocks {
            let m = b.size();
            for n in 0..m {
                let coef = sys.bilinear(&b.chain[m - 1 - n], phi)?;
                out += &b.chain[n] * coef;
            }
        }
        Ok(out)
    }

    pub fn verify(&self) -> VerificationReport {
        verify_representations(self)
    }

    pub fn to_export(&self) -> SpectrumExport {
        SpectrumExport::from_spectrum(self)
    }
}

/// Full pipeline: structure detection, chain construction, normalization,
/// crossing treatment, conjugate pairing, duals and verification.
pub fn compute_spectrum(sys: &OscillatorSystem, tol: &ToleranceConfig) -> Result<Spectrum> {
    tol.validate()?;
    let h = sys.evolution_operator();
    let (clusters, near_critical) = detect_structure(&h, tol)?;

    let mut raw_blocks: Vec<(Complex64, Vec<PhaseVector>, NormalizationLedger)> = Vec::new();
    for cl in &clusters {
        if cl.block_sizes.len() == 1 {
            let raw = build_chain(&h, cl.omega, cl.block_sizes[0], tol)?;
            let (chain, ledger) = normalize_block(&raw, sys, tol)?;
            raw_blocks.push((cl.omega, chain, ledger));
        } else {
            let chains = top_down_chains(&h, cl.omega, &cl.block_sizes, tol)?;
            let group = biorthogonalize_crossing(CrossingGroup::new(cl.omega, chains), sys, tol)?;
            for (chain, ledger) in group.chains.into_iter().zip(group.ledgers) {
                raw_blocks.push((cl.omega, chain, ledger));
            }
        }
    }

    let blocks = raw_blocks
        .into_iter()
        .map(|(omega, chain, ledger)| JordanBlock {
            label: 0,
            omega,
            duals: Vec::new(),
            chain,
            ledger,
            conjugation: Conjugation::Unpaired,
        })
        .collect();
    let scale = clusters.iter().map(|c| c.omega.norm()).fold(1.0, f64::max);
    let mut blocks = enforce_conjugation(blocks, tol.cluster_tol * scale)?;
    dual_basis(sys, &mut blocks);

    let spectrum = Spectrum {
        system: sys.clone(),
        blocks,
        clusters,
        near_critical,
        tolerances: *tol,
    };
    let report = spectrum.verify();
    report.check(tol.residual_tol)?;
    Ok(spectrum)
}

/// Attaches `f^(j,n) = [g f_(j, M-1-n)]^*` to every block.
pub fn dual_basis(sys: &OscillatorSystem, blocks: &mut [JordanBlock]) {
    let g = sys.metric();
    for b in blocks.iter_mut() {
        let m = b.size();
        b.duals = (0..m)
            .map(|n| (&g * &b.chain[m - 1 - n]).map(|z| z.conj()))
            .collect();
    }
}

/// Normalized chain of the only nontrivial block, built without solving the
/// chain relation upward: the top vector is `[g f_j]^*` with every other
/// eigenvector projected out, and the lower members follow by applying
/// `H - w_j`.
pub fn single_block_shortcut(spectrum: &Spectrum) -> Result<Vec<PhaseVector>> {
    let nontrivial: Vec<&JordanBlock> = spectrum.nontrivial_blocks().collect();
    if nontrivial.len() != 1 {
        return Err(Error::NotSingleBlock(nontrivial.len()));
    }
    let sys = spectrum.system();
    let tol = spectrum.tolerances();
    let target = nontrivial[0];
    let h = sys.evolution_operator();
    let dim = h.nrows();

    let eig = |omega: Complex64| -> Result<PhaseVector> {
        let a = &h - ComplexMatrix::identity(dim, dim) * omega;
        let info = crate::linalg::numeric_rank_and_nullspace(&a, tol);
        info.nullspace.into_iter().next().ok_or(Error::NotCritical(omega))
    };

    let fj = eig(target.omega)?;
    let mut psi = sys.metric_conjugate(&fj)?;
    for b in spectrum.blocks().iter().filter(|b| b.is_trivial()) {
        let f = eig(b.omega)?;
        let norm = sys.bilinear(&f, &f)?;
        let coef = sys.bilinear(&f, &psi)? / norm;
        psi -= f * coef;
    }
    let a = &h - ComplexMatrix::identity(dim, dim) * target.omega;
    let raw = chain::chain_from_top(&a, &psi, target.size());
    let (chain, _) = normalize_block(&raw, sys, tol)?;
    Ok(chain)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComplexPair {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexPair {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BlockExport {
    pub label: i32,
    pub omega: ComplexPair,
    #[serde(rename = "M")]
    pub size: usize,
    /// each vector as `[re0, im0, re1, im1, ...]`
    pub chain: Vec<Vec<f64>>,
    pub duals: Vec<Vec<f64>>,
    pub conjugation: Conjugation,
    pub ledger: NormalizationLedger,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumExport {
    #[serde(rename = "N")]
    pub n: usize,
    pub label: Option<String>,
    pub tolerances: ToleranceConfig,
    pub blocks: Vec<BlockExport>,
    pub near_critical: Vec<NearCriticalCluster>,
}

fn interleave(v: &PhaseVector) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

impl SpectrumExport {
    pub fn from_spectrum(s: &Spectrum) -> Self {
        Self {
            n: s.system.n(),
            label: s.system.label().map(str::to_owned),
            tolerances: s.tolerances,
            blocks: s
                .blocks
                .iter()
                .map(|b| BlockExport {
                    label: b.label,
                    omega: b.omega.into(),
                    size: b.size(),
                    chain: b.chain.iter().map(interleave).collect(),
                    duals: b.duals.iter().map(interleave).collect(),
                    conjugation: b.conjugation,
                    ledger: b.ledger.clone(),
                })
                .collect(),
            near_critical: s.near_critical.clone(),
        }
    }
}
