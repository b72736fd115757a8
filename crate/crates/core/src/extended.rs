//! Eigenpairs of a perturbed system near a critical point in double-double
//! arithmetic. Near merging, `(f_k, f_k)` is a small difference of order-one
//! terms and double precision loses most of its digits there.

use nalgebra::DMatrix;
use num_complex::Complex;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::model::{OscillatorSystem, PhaseVector};

pub(crate) type Dd = TwoFloat;
pub(crate) type Cdd = Complex<TwoFloat>;

fn dd(v: f64) -> Dd {
    Dd::from(v)
}

fn cdd(z: num_complex::Complex64) -> Cdd {
    Cdd::new(dd(z.re), dd(z.im))
}

pub(crate) fn to_c64(z: Cdd) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

/// `1/x` with one Newton correction; the library division is only
/// accurate to double precision.
fn recip(x: Dd) -> Dd {
    let r = dd(1.0 / (x.hi() + x.lo()));
    r + r * (dd(1.0) - x * r)
}

pub(crate) fn cdiv(a: Cdd, b: Cdd) -> Cdd {
    let inv = recip(b.re * b.re + b.im * b.im);
    let num = a * b.conj();
    Cdd::new(num.re * inv, num.im * inv)
}

fn abs2(z: &Cdd) -> f64 {
    let r = z.re.hi();
    let i = z.im.hi();
    r * r + i * i
}

/// `K + eps dK - i w Gamma - w^2` in extended precision.
struct Pencil {
    n: usize,
    k: Vec<Dd>,
    g: Vec<Dd>,
}

impl Pencil {
    fn new(sys: &OscillatorSystem, dk: &DMatrix<f64>, eps: f64) -> Self {
        let n = sys.n();
        let mut k = Vec::with_capacity(n * n);
        let mut g = Vec::with_capacity(n * n);
        let exact = sys.rational_entries();
        let inv = exact.map(|r| recip(dd(r.denominator as f64)));
        for i in 0..n {
            for j in 0..n {
                let (k0, g0) = match (exact, inv) {
                    (Some(r), Some(inv)) => (
                        dd(r.stiffness[i * n + j] as f64) * inv,
                        dd(r.damping[i * n + j] as f64) * inv,
                    ),
                    _ => (dd(sys.stiffness()[(i, j)]), dd(sys.damping()[(i, j)])),
                };
                k.push(k0 + Dd::new_mul(eps, dk[(i, j)]));
                g.push(g0);
            }
        }
        Self { n, k, g }
    }

    fn at(&self, w: Cdd) -> Vec<Cdd> {
        let n = self.n;
        let iw = Cdd::new(-w.im, w.re);
        let w2 = w * w;
        (0..n * n)
            .map(|idx| {
                let mut a = Cdd::new(self.k[idx], dd(0.0)) - iw * Cdd::new(self.g[idx], dd(0.0));
                if idx / n == idx % n {
                    a = a - w2;
                }
                a
            })
            .collect()
    }
}

/// Gaussian elimination with complete pivoting. Returns the determinant and
/// a null vector taken from the last pivot.
fn eliminate(mut a: Vec<Cdd>, n: usize) -> (Cdd, Vec<Cdd>) {
    let zero = Cdd::new(dd(0.0), dd(0.0));
    let one = Cdd::new(dd(1.0), dd(0.0));
    let mut cols: Vec<usize> = (0..n).collect();
    let mut det = one;
    for step in 0..n {
        let (mut pr, mut pc, mut best) = (step, step, -1.0);
        for r in step..n {
            for c in step..n {
                let v = abs2(&a[r * n + c]);
                if v > best {
                    best = v;
                    pr = r;
                    pc = c;
                }
            }
        }
        if pr != step {
            for c in 0..n {
                a.swap(pr * n + c, step * n + c);
            }
            det = -det;
        }
        if pc != step {
            for r in 0..n {
                a.swap(r * n + pc, r * n + step);
            }
            cols.swap(pc, step);
            det = -det;
        }
        let piv = a[step * n + step];
        det = det * piv;
        if best == 0.0 {
            continue;
        }
        for r in step + 1..n {
            let f = cdiv(a[r * n + step], piv);
            for c in step..n {
                let v = a[step * n + c];
                a[r * n + c] = a[r * n + c] - f * v;
            }
        }
    }
    // back-substitute with the last unknown set to one
    let mut y = vec![zero; n];
    y[n - 1] = one;
    for r in (0..n - 1).rev() {
        let mut s = zero;
        for c in r + 1..n {
            s = s + a[r * n + c] * y[c];
        }
        y[r] = -cdiv(s, a[r * n + r]);
    }
    let mut x = vec![zero; n];
    for (pos, &col) in cols.iter().enumerate() {
        x[col] = y[pos];
    }
    (det, x)
}

/// One mode of the perturbed system in extended precision.
pub(crate) struct ExtendedMode {
    pub omega: Cdd,
    /// `(x, p)` with `p = -i w x`
    pub f: Vec<Cdd>,
}

/// Polishes approximate eigenvalues by Newton steps on the determinant and
/// attaches null vectors.
pub(crate) fn extended_modes(
    sys: &OscillatorSystem,
    dk: &DMatrix<f64>,
    eps: f64,
    guesses: &[num_complex::Complex64],
) -> Result<Vec<ExtendedMode>> {
    let pencil = Pencil::new(sys, dk, eps);
    let n = pencil.n;
    let det = |w: Cdd| eliminate(pencil.at(w), n).0;
    let mut out = Vec::with_capacity(guesses.len());
    for g in guesses {
        let mut w = cdd(*g);
        let h = Cdd::new(dd(1e-12 * g.norm().max(1.0)), dd(0.0));
        let two_h = h + h;
        // the root is only determined to about u_dd / |q'(w)|, so stop once
        // steps are small and no longer shrinking
        let mut converged = false;
        let mut last = f64::INFINITY;
        for _ in 0..60 {
            let d0 = det(w);
            let slope = cdiv(det(w + h) - det(w - h), two_h);
            let step = cdiv(d0, slope);
            w = w - step;
            let size = abs2(&step).sqrt() / g.norm().max(1.0);
            if size <= 1e-20 && size >= 0.5 * last || size == 0.0 {
                converged = true;
                break;
            }
            last = size;
        }
        if !converged || !(w.re.hi().is_finite() && w.im.hi().is_finite()) {
            return Err(Error::Convergence(format!("extended-precision refinement near {g}")));
        }
        let (_, x) = eliminate(pencil.at(w), n);
        let miw = Cdd::new(w.im, -w.re);
        let mut f = x.clone();
        f.extend(x.iter().map(|v| miw * *v));
        out.push(ExtendedMode { omega: w, f });
    }
    Ok(out)
}

/// `(a, b) = i [x_a.Gamma x_b + x_a.p_b + p_a.x_b]` in extended precision.
pub(crate) fn bilinear(sys: &OscillatorSystem, a: &[Cdd], b: &[Cdd]) -> Cdd {
    let n = sys.n();
    let zero = Cdd::new(dd(0.0), dd(0.0));
    let mut s = zero;
    for i in 0..n {
        let mut gx = zero;
        for j in 0..n {
            gx = gx + Cdd::new(damping_entry(sys, i, j), dd(0.0)) * b[j];
        }
        s = s + a[i] * gx + a[i] * b[n + i] + a[n + i] * b[i];
    }
    Cdd::new(-s.im, s.re)
}

fn damping_entry(sys: &OscillatorSystem, i: usize, j: usize) -> Dd {
    match sys.rational_entries() {
        Some(r) => dd(r.damping[i * sys.n() + j] as f64) * recip(dd(r.denominator as f64)),
        None => dd(sys.damping()[(i, j)]),
    }
}

pub(crate) fn from_phase(v: &PhaseVector) -> Vec<Cdd> {
    v.iter().map(|z| cdd(*z)).collect()
}

/// `e^(-i d t)` by its Taylor series, for small `|d t|`.
pub(crate) fn small_phase_factor(d: Cdd, t: f64) -> Cdd {
    let z = Cdd::new(d.im * dd(t), -(d.re * dd(t)));
    let mut term = Cdd::new(dd(1.0), dd(0.0));
    let mut sum = term;
    for k in 1..200 {
        term = term * z;
        let inv = recip(dd(k as f64));
        term = Cdd::new(term.re * inv, term.im * inv);
        sum = sum + term;
        if abs2(&term) < 1e-70 * abs2(&sum) {
            break;
        }
    }
    sum
}

pub(crate) fn norm(v: &[Cdd]) -> Dd {
    let mut s = dd(0.0);
    for z in v {
        s = s + z.re * z.re + z.im * z.im;
    }
    s.sqrt()
}

