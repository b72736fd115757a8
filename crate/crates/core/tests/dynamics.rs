use critmode::design::{catalog, catalog_entry};
use critmode::dynamics::*;
use critmode::jordan::{compute_spectrum, Spectrum};
use critmode::linalg::{ComplexMatrix, ToleranceConfig, I};
use critmode::model::{OscillatorSystem, PhaseVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn spectrum_of(sys: &OscillatorSystem) -> Spectrum {
    compute_spectrum(sys, &ToleranceConfig::default()).unwrap()
}

fn random_real_state(rng: &mut StdRng, dim: usize) -> PhaseVector {
    PhaseVector::from_fn(dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
}

fn random_system(rng: &mut StdRng) -> OscillatorSystem {
    let n = rng.gen_range(1..=4);
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    OscillatorSystem::new(&a * a.transpose() + DMatrix::identity(n, n) * 0.5, &b * b.transpose() * 0.5).unwrap()
}

fn rel_err(a: &PhaseVector, b: &PhaseVector) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn coefficient_matches_derivative_definition() {
    // C_l = (1/l!) d^l/dw^l e^(-iwt): compare with the explicit power
    let w = Complex64::new(0.3, -0.7);
    for l in 0..6 {
        for &t in &[-2.0, 0.0, 0.4, 3.0] {
            let fact: f64 = (1..=l).map(|k| k as f64).product();
            let direct = (-I * t).powu(l as u32) / fact * (-I * w * t).exp();
            assert!((evolution_coefficient(l, w, t) - direct).norm() < 1e-14);
        }
    }
}

#[test]
fn single_oscillator_matches_critical_damping() {
    // x'' + 2x' + x = 0: x(t) = (x0 + (v0 + x0) t) e^(-t)
    let e = catalog_entry("single-critical").unwrap();
    let s = spectrum_of(&e.system);
    let b = &s.blocks()[0];
    let f1 = evolve_basis_vector(b, 1, 1.5).unwrap();
    let expect = (&b.chain[1] - &b.chain[0] * (I * 1.5)) * Complex64::new((-1.5f64).exp(), 0.0);
    assert!((f1 - expect).norm() < 1e-14);
    let phi = PhaseVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
    for &t in &[0.0, 0.5, 2.0, 5.0] {
        let st = evolve_state(&s, &phi, t).unwrap();
        let x = (1.0 + t) * (-t as f64).exp();
        let v = -t * (-t as f64).exp();
        assert!((st[0] - x).norm() < 1e-13 && (st[1] - v).norm() < 1e-13);
    }
}

#[test]
fn basis_vectors_solve_chain_equation() {
    let h = 1e-4;
    for e in catalog() {
        let s = spectrum_of(&e.system);
        for b in s.blocks() {
            for n in 0..b.size() {
                let t = 0.7;
                let d = (evolve_basis_vector(b, n, t + h).unwrap() - evolve_basis_vector(b, n, t - h).unwrap()) / Complex64::new(2.0 * h, 0.0);
                let mut r = d * I - evolve_basis_vector(b, n, t).unwrap() * b.omega;
                if n > 0 {
                    r -= evolve_basis_vector(b, n - 1, t).unwrap();
                }
                assert!(r.norm() < 1e-6, "{} n={n}: {}", e.name, r.norm());
            }
        }
    }
}

#[test]
fn evolution_matches_rk_oracle() {
    let mut rng = StdRng::seed_from_u64(11);
    let times = [0.5, 1.0, 2.0, 5.0];
    let mut systems: Vec<OscillatorSystem> = catalog().into_iter().map(|e| e.system).collect();
    systems.extend((0..20).map(|_| random_system(&mut rng)));
    for sys in &systems {
        let s = spectrum_of(sys);
        let phi = random_real_state(&mut rng, sys.dim());
        let rk = rk4_trajectory(sys, &phi, &times, 1e-4);
        for (t, r) in times.iter().zip(&rk) {
            let j = evolve_state(&s, &phi, *t).unwrap();
            assert!(rel_err(&j, r) <= 1e-8, "t={t}: {}", rel_err(&j, r));
        }
    }
}

#[test]
fn identity_at_time_zero_and_semigroup() {
    let mut rng = StdRng::seed_from_u64(3);
    for e in catalog() {
        let s = spectrum_of(&e.system);
        for _ in 0..20 {
            let phi = random_real_state(&mut rng, e.system.dim());
            assert!((evolve_state(&s, &phi, 0.0).unwrap() - &phi).norm() <= 1e-9);
            let (t1, t2) = (rng.gen_range(0.0..2.5), rng.gen_range(0.0..2.5));
            let two = evolve_state(&s, &evolve_state(&s, &phi, t1).unwrap(), t2).unwrap();
            let one = evolve_state(&s, &phi, t1 + t2).unwrap();
            assert!((two - one).norm() <= 1e-8);
        }
    }
}

#[test]
fn energy_does_not_increase() {
    let mut rng = StdRng::seed_from_u64(5);
    for e in catalog() {
        let s = spectrum_of(&e.system);
        let phi = random_real_state(&mut rng, e.system.dim());
        let mut last = f64::INFINITY;
        for k in 0..50 {
            let st = evolve_state(&s, &phi, 0.1 * k as f64).unwrap();
            let en = energy(&e.system, &st);
            assert!(en <= last + 1e-10);
            last = en;
        }
    }
}

#[test]
fn retarded_propagator() {
    let e = catalog_entry("quartic-jb4").unwrap();
    let s = spectrum_of(&e.system);
    assert_eq!(greens_time(&s, -1.0).matrix, ComplexMatrix::zeros(4, 4));
    let id = ComplexMatrix::identity(4, 4);
    assert!(critmode::linalg::max_abs(&(greens_time(&s, 0.0).matrix - id)) < 1e-9);
    let phi = PhaseVector::from_vec(vec![1.0.into(), (-0.5).into(), 0.2.into(), 0.0.into()]);
    let g = greens_time(&s, 1.3).matrix;
    assert!((g * &phi - evolve_state(&s, &phi, 1.3).unwrap()).norm() < 1e-12);
}

#[test]
fn frequency_propagator_solves_resolvent_equation() {
    let mut rng = StdRng::seed_from_u64(9);
    for e in catalog() {
        let s = spectrum_of(&e.system);
        let h = e.system.evolution_operator();
        let dim = h.nrows();
        for _ in 0..20 {
            let w = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let g = greens_freq(&s, w).unwrap();
            assert!(resolvent_defect(&s, &g) <= 1e-9, "{}", e.name);
            // direct resolvent -i (H - w)^-1
            let direct = (&h - ComplexMatrix::identity(dim, dim) * w).try_inverse().unwrap() * (-I);
            let scale = critmode::linalg::max_abs(&direct);
            assert!(critmode::linalg::max_abs(&(&g.matrix - direct)) <= 1e-9 * scale.max(1.0));
        }
        assert!(greens_freq(&s, s.blocks()[0].omega).is_err());
    }
}

#[test]
fn pole_order_equals_block_size() {
    let e = catalog_entry("quartic-jb4").unwrap();
    let s = spectrum_of(&e.system);
    let deltas = [1e-2, 1e-3, 1e-4];
    let pts: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| {
            let g = greens_freq(&s, -I + d).unwrap();
            (d.ln(), critmode::linalg::max_abs(&g.matrix).ln())
        })
        .collect();
    let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
    assert!((slope + 4.0).abs() < 0.05, "slope {slope}");
}

#[test]
fn frequency_propagator_is_fourier_transform() {
    // G(w) = int_0^inf e^(i w t) G(t) dt, evaluated at Im w = 0.5 on [0, 40]
    let e = catalog_entry("double-jb2").unwrap();
    let s = spectrum_of(&e.system);
    let w = Complex64::new(0.7, 0.5);
    let n = 8000;
    let h = 40.0 / n as f64;
    let mut acc = ComplexMatrix::zeros(4, 4);
    for k in 0..=n {
        let t = k as f64 * h;
        let wgt = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += greens_time(&s, t).matrix * ((I * w * t).exp() * (wgt * h / 3.0));
    }
    let g = greens_freq(&s, w).unwrap().matrix;
    assert!(critmode::linalg::max_abs(&(acc - g)) < 1e-4);
}

#[test]
fn sum_rules_hold() {
    let mut rng = StdRng::seed_from_u64(21);
    let mut systems: Vec<OscillatorSystem> = catalog().into_iter().map(|e| e.system).collect();
    systems.extend((0..20).map(|_| random_system(&mut rng)));
    for sys in &systems {
        let r = check_sum_rules(&spectrum_of(sys));
        assert!(r.passes(1e-9), "{:?}", r.max_abs);
    }
}

fn cancellation_sweep(name: &str, decades: (f64, f64)) -> Vec<CancellationReport> {
    let e = catalog_entry(name).unwrap();
    let s = spectrum_of(&e.system);
    let dk = &e.perturbation("e11").unwrap().delta_k;
    let phi = PhaseVector::from_vec(vec![1.0.into(), 0.5.into(), (-0.3).into(), 0.2.into()]);
    let times = [0.0, 0.5, 1.0, 2.0];
    (0..=8)
        .map(|k| {
            let eps = 10f64.powf(decades.0 + (decades.1 - decades.0) * k as f64 / 8.0);
            cluster_cancellation_experiment(&s, dk, eps, &phi, &times).unwrap()
        })
        .collect()
}

#[test]
fn per_mode_weights_grow_with_block_order() {
    for (name, m) in [("quartic-jb4", 4.0), ("cubic-jb3", 3.0)] {
        let reps = cancellation_sweep(name, (-10.0, -6.0));
        let lam: Vec<f64> = reps.iter().map(|r| r.lambda_measured).collect();
        let w: Vec<f64> = reps.iter().map(|r| r.max_weight).collect();
        let (slope, _) = critmode::linalg::loglog_fit(&lam, &w).unwrap();
        assert!((slope - (1.0 - m)).abs() < 0.2, "{name}: slope {slope}");
        for r in &reps {
            assert!((r.lambda_measured / r.lambda_predicted - 1.0).abs() < 0.05);
        }
    }
}

#[test]
fn cluster_sum_stays_finite() {
    // the modal terms are huge, their sum agrees with the Jordan evolution
    // to within the (analytic, first order in eps) parameter dependence
    let reps = cancellation_sweep("quartic-jb4", (-10.0, -6.0));
    for r in &reps {
        assert!(r.max_difference <= r.lambda_measured, "{r:?}");
        assert!(r.max_difference * 1e6 < r.max_weight);
    }
    let eps: Vec<f64> = reps.iter().map(|r| r.epsilon).collect();
    let d: Vec<f64> = reps.iter().map(|r| r.max_difference).collect();
    let (slope, _) = critmode::linalg::loglog_fit(&eps, &d).unwrap();
    assert!((slope - 1.0).abs() < 0.05, "difference vs eps slope {slope}");
}

#[test]
fn experiment_requires_a_nontrivial_block() {
    let sys = OscillatorSystem::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]], &[&[0.4, 0.0], &[0.0, 0.2]]).unwrap();
    let s = spectrum_of(&sys);
    assert!(cluster_cancellation_experiment(&s, &DMatrix::identity(2, 2), 1e-6, &PhaseVector::zeros(4), &[0.0]).is_err());
}
