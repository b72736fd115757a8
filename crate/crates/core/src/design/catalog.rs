use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{cubic_critical, double2_critical, quartic_critical};
use crate::error::{Error, Result};
use crate::jordan::ComplexPair;
use crate::linalg::{ComplexVector, I};
use crate::model::{OscillatorSystem, PhaseVector, SystemFile};

/// `(num/den) sqrt(radicand) e^(i pi phase/4) (entries)` with Gaussian
/// integer entries `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactVector {
    pub num: i64,
    pub den: i64,
    pub radicand: u32,
    pub phase_quarter_pi: i32,
    pub entries: Vec<[i64; 2]>,
}

impl ExactVector {
    fn new(num: i64, den: i64, radicand: u32, phase_quarter_pi: i32, entries: &[[i64; 2]]) -> Self {
        Self {
            num,
            den,
            radicand,
            phase_quarter_pi,
            entries: entries.to_vec(),
        }
    }

    fn real(num: i64, den: i64, radicand: u32, phase_quarter_pi: i32, entries: &[i64]) -> Self {
        let e: Vec<[i64; 2]> = entries.iter().map(|&v| [v, 0]).collect();
        Self::new(num, den, radicand, phase_quarter_pi, &e)
    }

    pub fn prefactor(&self) -> Complex64 {
        let mag = self.num as f64 / self.den as f64 * (self.radicand as f64).sqrt();
        Complex64::from_polar(mag, std::f64::consts::FRAC_PI_4 * self.phase_quarter_pi as f64)
    }

    pub fn to_vector(&self) -> PhaseVector {
        let p = self.prefactor();
        ComplexVector::from_iterator(
            self.entries.len(),
            self.entries.iter().map(|e| p * Complex64::new(e[0] as f64, e[1] as f64)),
        )
    }
}

/// Expected chain and duals of one block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockFixture {
    pub omega: ComplexPair,
    pub chain: Vec<ExactVector>,
    pub duals: Vec<ExactVector>,
}

impl BlockFixture {
    pub fn omega(&self) -> Complex64 {
        Complex64::new(self.omega.re, self.omega.im)
    }
}

/// A stiffness perturbation direction with its expected coupling numbers on
/// the block at `omega`.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedPerturbation {
    pub name: String,
    pub delta_k: DMatrix<f64>,
    pub omega: Complex64,
    pub xi: Complex64,
    pub xi_prime: Option<Complex64>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub system: OscillatorSystem,
    /// `(eigenvalue, block size)`, one entry per block
    pub expected_blocks: Vec<(Complex64, usize)>,
    pub fixtures: Vec<BlockFixture>,
    pub perturbations: Vec<NamedPerturbation>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PerturbationExport {
    pub name: String,
    #[serde(rename = "DeltaK")]
    pub delta_k: Vec<Vec<f64>>,
    pub omega: ComplexPair,
    pub xi: ComplexPair,
    pub xi_prime: Option<ComplexPair>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogExport {
    pub name: String,
    pub system: SystemFile,
    pub expected_blocks: Vec<(ComplexPair, usize)>,
    pub fixtures: Vec<BlockFixture>,
    pub perturbations: Vec<PerturbationExport>,
}

impl CatalogEntry {
    pub fn perturbation(&self, name: &str) -> Option<&NamedPerturbation> {
        self.perturbations.iter().find(|p| p.name == name)
    }

    pub fn export(&self) -> CatalogExport {
        let rows = |m: &DMatrix<f64>| (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
        CatalogExport {
            name: self.name.to_string(),
            system: SystemFile::from_system(&self.system),
            expected_blocks: self.expected_blocks.iter().map(|(w, m)| ((*w).into(), *m)).collect(),
            fixtures: self.fixtures.clone(),
            perturbations: self
                .perturbations
                .iter()
                .map(|p| PerturbationExport {
                    name: p.name.clone(),
                    delta_k: rows(&p.delta_k),
                    omega: p.omega.into(),
                    xi: p.xi.into(),
                    xi_prime: p.xi_prime.map(Into::into),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.export())?)
    }
}

fn sym(a: f64, b: f64, c: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a, b, b, c])
}

fn fixture(omega: Complex64, chain: Vec<ExactVector>, duals: Vec<ExactVector>) -> BlockFixture {
    BlockFixture {
        omega: omega.into(),
        chain,
        duals,
    }
}

fn single_critical() -> Result<CatalogEntry> {
    let system = OscillatorSystem::from_rows(&[&[1.0]], &[&[2.0]])?
        .with_rational_entries(1, &[1], &[2])?
        .with_label("single-critical");
    let ev = ExactVector::new;
    Ok(CatalogEntry {
        name: "single-critical",
        system,
        expected_blocks: vec![(-I, 2)],
        fixtures: vec![fixture(
            -I,
            vec![ev(1, 1, 1, 0, &[[1, 0], [-1, 0]]), ev(1, 1, 1, 0, &[[0, 0], [0, -1]])],
            vec![ev(1, 1, 1, 0, &[[1, 0], [0, 0]]), ev(1, 1, 1, 0, &[[0, -1], [0, -1]])],
        )],
        perturbations: vec![NamedPerturbation {
            name: "e11".into(),
            delta_k: DMatrix::from_element(1, 1, 1.0),
            omega: -I,
            xi: Complex64::new(1.0, 0.0),
            xi_prime: None,
        }],
    })
}

fn quartic_jb4() -> Result<CatalogEntry> {
    let system = quartic_critical((-2.0f64).asinh(), 0.5 * 5f64.ln())?
        .with_rational_entries(1, &[5, -2, -2, 1], &[4, 0, 0, 0])?
        .with_label("quartic-jb4");
    let r = ExactVector::real;
    Ok(CatalogEntry {
        name: "quartic-jb4",
        system,
        expected_blocks: vec![(-I, 4)],
        fixtures: vec![fixture(
            -I,
            vec![
                r(1, 1, 2, 2, &[1, 1, -1, -1]),
                r(1, 2, 2, 0, &[-1, 1, 3, 1]),
                r(1, 8, 2, 2, &[-1, -1, 5, -3]),
                r(1, 16, 2, 0, &[-1, 1, -1, -3]),
            ],
            vec![
                r(1, 16, 2, 2, &[5, 3, 1, -1]),
                r(1, 8, 2, 0, &[-1, 3, 1, 1]),
                r(1, 2, 2, 2, &[1, -1, 1, -1]),
                r(1, 1, 2, 0, &[-3, 1, -1, -1]),
            ],
        )],
        perturbations: vec![
            NamedPerturbation {
                name: "e11".into(),
                delta_k: sym(1.0, 0.0, 0.0),
                omega: -I,
                xi: Complex64::new(-2.0, 0.0),
                xi_prime: None,
            },
            NamedPerturbation {
                name: "nongeneric".into(),
                delta_k: sym(1.0, -1.5, 2.0),
                omega: -I,
                xi: Complex64::new(0.0, 0.0),
                xi_prime: Some(I),
            },
        ],
    })
}

fn cubic_jb3() -> Result<CatalogEntry> {
    let system = cubic_critical(4.0, 3.0)?
        .with_rational_entries(5, &[41, 8, 8, 4], &[30, 0, 0, 5])?
        .with_label("cubic-jb3");
    let r = ExactVector::real;
    Ok(CatalogEntry {
        name: "cubic-jb3",
        system,
        expected_blocks: vec![(-I, 3), (-4.0 * I, 1)],
        fixtures: vec![
            fixture(
                -I,
                vec![
                    r(1, 15, 15, 1, &[2, -4, -2, 4]),
                    r(1, 180, 15, -1, &[-19, -22, 43, -26]),
                    r(1, 2880, 15, 1, &[-221, -78, 525, 430]),
                ],
                vec![
                    r(1, 2880, 15, 1, &[801, -352, 221, 78]),
                    r(1, 180, 15, -1, &[-71, -48, -19, -22]),
                    r(1, 15, 15, 1, &[-10, 0, -2, 4]),
                ],
            ),
            fixture(
                -4.0 * I,
                vec![r(1, 45, 15, 1, &[8, -1, -32, 4])],
                vec![r(1, 45, 15, 1, &[-16, -3, -8, 1])],
            ),
        ],
        perturbations: vec![
            NamedPerturbation {
                name: "e11".into(),
                delta_k: sym(1.0, 0.0, 0.0),
                omega: -I,
                xi: Complex64::new(0.0, 4.0 / 15.0),
                xi_prime: None,
            },
            NamedPerturbation {
                name: "nongeneric".into(),
                delta_k: sym(-2.0, 0.5, 1.0),
                omega: -I,
                xi: Complex64::new(0.0, 0.0),
                xi_prime: Some(Complex64::new(1.0, 0.0)),
            },
        ],
    })
}

fn double_jb2() -> Result<CatalogEntry> {
    let b = 4.0 / 3.0;
    let system = double2_critical(b)?
        .with_rational_entries(9, &[61, -30, -30, 25], &[36, 0, 0, 0])?
        .with_label("double-jb2");
    let ev = ExactVector::new;
    let wp = Complex64::new(b, -1.0);
    Ok(CatalogEntry {
        name: "double-jb2",
        system,
        expected_blocks: vec![(wp, 2), (Complex64::new(-b, -1.0), 2)],
        fixtures: vec![fixture(
            wp,
            vec![
                ev(1, 24, 6, 0, &[[3, -6], [-3, -6], [-11, 2], [-5, 10]]),
                ev(1, 192, 6, 0, &[[15, 30], [-15, 30], [-23, -74], [7, 14]]),
            ],
            vec![
                ev(1, 192, 6, 0, &[[-46, -37], [-14, -7], [-30, -15], [-30, 15]]),
                ev(1, 24, 6, 0, &[[22, -1], [-10, 5], [6, -3], [6, 3]]),
            ],
        )],
        perturbations: vec![NamedPerturbation {
            name: "e11".into(),
            delta_k: sym(1.0, 0.0, 0.0),
            omega: wp,
            xi: Complex64::new(-9.0 / 32.0, -12.0 / 32.0),
            xi_prime: None,
        }],
    })
}

fn crossed_pair() -> Result<CatalogEntry> {
    let system = quartic_critical(0.0, 0.0)?.with_label("crossed-pair");
    Ok(CatalogEntry {
        name: "crossed-pair",
        system,
        expected_blocks: vec![(-I, 2), (-I, 2)],
        fixtures: Vec::new(),
        perturbations: Vec::new(),
    })
}

pub const CATALOG_NAMES: [&str; 5] = ["single-critical", "quartic-jb4", "cubic-jb3", "double-jb2", "crossed-pair"];

/// All fixture systems.
pub fn catalog() -> Vec<CatalogEntry> {
    CATALOG_NAMES.iter().map(|n| catalog_entry(n).expect("catalog entries are valid")).collect()
}

pub fn catalog_entry(name: &str) -> Result<CatalogEntry> {
    match name {
        "single-critical" => single_critical(),
        "quartic-jb4" => quartic_jb4(),
        "cubic-jb3" => cubic_jb3(),
        "double-jb2" => double_jb2(),
        "crossed-pair" => crossed_pair(),
        other => Err(Error::UnknownCatalog(other.to_string())),
    }
}
