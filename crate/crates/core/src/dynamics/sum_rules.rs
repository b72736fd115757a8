use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::jordan::Spectrum;
use crate::linalg::{max_abs, ComplexMatrix, ComplexVector, I};

/// Residuals of the four coordinate sum rules (the second with the identity
/// subtracted) and their largest entries.
#[derive(Clone, Debug)]
pub struct SumRuleReport {
    pub residuals: [ComplexMatrix; 4],
    pub max_abs: [f64; 4],
}

impl SumRuleReport {
    pub fn worst(&self) -> f64 {
        self.max_abs.iter().cloned().fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

fn outer(a: &ComplexVector, b: &ComplexVector) -> ComplexMatrix {
    a * b.transpose()
}

/// Evaluates the coordinate-only forms of completeness with
/// `n' = M - 1 - n` and `f_(j,-1) = f_(j,-2) = 0`.
pub fn check_sum_rules(spectrum: &Spectrum) -> SumRuleReport {
    let sys = spectrum.system();
    let n = sys.n();
    let gamma: ComplexMatrix = sys.damping().map(|v| Complex64::new(v, 0.0));
    let zero = ComplexVector::zeros(n);
    let mut r: [ComplexMatrix; 4] = std::array::from_fn(|_| DMatrix::zeros(n, n));
    for b in spectrum.blocks() {
        let m = b.size();
        let w = b.omega;
        let x: Vec<ComplexVector> = b.chain.iter().map(|f| sys.positions(f)).collect();
        let at = |k: isize| if k < 0 { &zero } else { &x[k as usize] };
        for k in 0..m {
            let kk = k as isize;
            let xp = &x[m - 1 - k];
            let gxp = &gamma * xp;
            let first = at(kk) * w + at(kk - 1);
            let second = at(kk) * (w * w) + at(kk - 1) * (w * 2.0) + at(kk - 2);
            r[0] += outer(at(kk), xp);
            r[1] += outer(&first, xp);
            r[2] += outer(&second, xp) + outer(&first, &gxp) * I;
            r[3] += outer(at(kk), &gxp);
        }
    }
    r[1] -= ComplexMatrix::identity(n, n);
    let max_abs = [max_abs(&r[0]), max_abs(&r[1]), max_abs(&r[2]), max_abs(&r[3])];
    SumRuleReport { residuals: r, max_abs }
}
