use critmode::jordan::compute_spectrum;
use critmode::linalg::ToleranceConfig;
use critmode::model::OscillatorSystem;
use nalgebra::DMatrix;
use rand::{rngs::StdRng, Rng, SeedableRng};

/// Random system with `K > 0`, `Gamma >= 0`, `N` between 1 and 4.
pub fn random_system(rng: &mut StdRng) -> OscillatorSystem {
    let n = rng.gen_range(1..=4);
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let b = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let k = &a * a.transpose() + DMatrix::identity(n, n) * 0.5;
    let g = &b * b.transpose() * 0.5;
    OscillatorSystem::new(k, g).unwrap()
}

#[test]
fn random_systems_verify() {
    let mut rng = StdRng::seed_from_u64(7);
    for i in 0..50 {
        let sys = random_system(&mut rng);
        let s = compute_spectrum(&sys, &ToleranceConfig::default())
            .unwrap_or_else(|e| panic!("system {i}: {e}"));
        assert!(s.blocks().iter().all(|b| b.size() == 1), "system {i} unexpectedly defective");
        let r = s.verify();
        assert!(r.worst().1 <= 1e-9, "system {i}: {r:?}");
    }
}
