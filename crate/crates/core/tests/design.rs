use critmode::design::*;
use critmode::jordan::compute_spectrum;
use critmode::linalg::{numeric_rank_and_nullspace, ComplexMatrix, ToleranceConfig};
use critmode::Error;
use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn residual_max(r: [f64; 4]) -> f64 {
    r.iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn quartic_samples(count: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let x: f64 = rng.gen_range(-1.8..1.8);
        let y: f64 = rng.gen_range(-1.8..1.8);
        if x.cosh() * y.cosh() <= 3.0 && x.abs() + y.abs() > 1e-3 {
            out.push((x, y));
        }
    }
    out
}

#[test]
fn quartic_family_hits_its_target() {
    for (x, y) in quartic_samples(50, 1) {
        let sys = quartic_critical(x, y).unwrap();
        assert!(char_poly_defect(&sys, &quartic_roots()) <= 1e-10, "x={x} y={y}");
        // rounding scale: the products k11 k22 and k gamma
        let scale = sys.stiffness().amax().powi(2);
        let r = residual_max(constraint_residuals(&sys, quartic_targets()).unwrap());
        assert!(r <= 1e-14 * scale, "x={x} y={y} r={r:e} scale={scale}");
        assert!(sys.warnings().is_empty(), "x={x} y={y}: {:?}", sys.warnings());
        // a single eigenvector at -i
        let a = sys.evolution_operator() + ComplexMatrix::identity(4, 4) * c(0.0, 1.0);
        let info = numeric_rank_and_nullspace(&a, &ToleranceConfig::default());
        assert_eq!(info.nullity(), 1, "x={x} y={y}");
        let other = quartic_critical_branch(x, y, false).unwrap();
        assert!(char_poly_defect(&other, &quartic_roots()) <= 1e-10);
    }
}

#[test]
fn quartic_examples() {
    let sys = quartic_critical((-2.0f64).asinh(), 0.5 * 5f64.ln()).unwrap();
    let k = sys.stiffness();
    let g = sys.damping();
    for (got, want) in [k[(0, 0)], k[(0, 1)], k[(1, 1)], g[(0, 0)], g[(0, 1)], g[(1, 1)]]
        .iter()
        .zip([5.0, -2.0, 1.0, 4.0, 0.0, 0.0])
    {
        assert!((got - want).abs() < 1e-12);
    }
    let trivial = quartic_critical(0.0, 0.0).unwrap();
    assert_eq!(trivial.stiffness(), &nalgebra::DMatrix::identity(2, 2));
    assert!((trivial.damping() - nalgebra::DMatrix::identity(2, 2) * 2.0).amax() < 1e-15);
    let s = compute_spectrum(&trivial, &ToleranceConfig::default()).unwrap();
    let sizes: Vec<usize> = s.blocks().iter().map(|b| b.size()).collect();
    assert_eq!(sizes, vec![2, 2]);
}

#[test]
fn quartic_outside_region_warns() {
    let sys = quartic_critical(1.5, 1.5).unwrap();
    assert!(!sys.warnings().is_empty() || sys.min_damping_eigenvalue() < 0.0);
}

#[test]
fn cubic_family_hits_its_target() {
    let mut rng = StdRng::seed_from_u64(2);
    let mut accepted = 0;
    for _ in 0..400 {
        let b: f64 = rng.gen_range(0.2..6.0);
        let g11: f64 = rng.gen_range(0.0..5.0);
        if (b - 1.0).abs() < 0.05 {
            continue;
        }
        match cubic_critical(b, g11) {
            Ok(sys) => {
                accepted += 1;
                assert!(char_poly_defect(&sys, &cubic_roots(b)) <= 1e-10, "b={b} g11={g11}");
                assert!(residual_max(constraint_residuals(&sys, cubic_targets(b)).unwrap()) <= 1e-12 * (1.0 + b));
            }
            Err(Error::NoRealSolution(_)) => {}
            Err(e) => panic!("b={b} g11={g11}: {e}"),
        }
    }
    assert!(accepted >= 50, "only {accepted} valid samples");
}

#[test]
fn cubic_examples() {
    let sys = cubic_critical(4.0, 3.0).unwrap();
    let k = sys.stiffness();
    for (got, want) in [k[(0, 0)], k[(0, 1)], k[(1, 1)]].iter().zip([41.0 / 5.0, 8.0 / 5.0, 4.0 / 5.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    assert_eq!(sys.damping()[(0, 0)], 6.0);
    assert_eq!(sys.damping()[(1, 1)], 1.0);
    assert!(cubic_critical(1.0, 1.0).is_err());
    let s = compute_spectrum(&sys, &ToleranceConfig::default()).unwrap();
    let mut blocks: Vec<(usize, f64)> = s.blocks().iter().map(|b| (b.size(), b.omega.im)).collect();
    blocks.sort_by(|a, b| b.0.cmp(&a.0));
    assert_eq!(blocks[0].0, 3);
    assert!((blocks[0].1 + 1.0).abs() < 1e-9 && (blocks[1].1 + 4.0).abs() < 1e-9);
}

#[test]
fn double_family_hits_its_target_and_has_two_blocks() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..30 {
        let b: f64 = rng.gen_range(0.1..=2.0);
        let sys = double2_critical(b).unwrap();
        assert!(char_poly_defect(&sys, &double2_roots(b)) <= 1e-10);
        assert!(residual_max(constraint_residuals(&sys, double2_targets(b)).unwrap()) <= 1e-12 * (1.0 + b * b).powi(2));
        assert!(sys.stiffness()[(0, 1)] < 0.0);
        let s = compute_spectrum(&sys, &ToleranceConfig::default()).unwrap();
        let mut blocks: Vec<(usize, Complex64)> = s.blocks().iter().map(|bl| (bl.size(), bl.omega)).collect();
        blocks.sort_by(|a, b| a.1.re.partial_cmp(&b.1.re).unwrap());
        assert_eq!(blocks.len(), 2, "b={b}");
        assert!(blocks.iter().all(|bl| bl.0 == 2));
        assert!((blocks[1].1 - c(b, -1.0)).norm() < 1e-8);
    }
    // the two blocks merge as b -> 0 and the basis loses conditioning
    let close = double2_critical(0.05).unwrap();
    assert!(matches!(
        compute_spectrum(&close, &ToleranceConfig::default()),
        Err(Error::Verification { .. })
    ));
    assert!(double2_critical(0.0).is_err());
    assert!(double2_critical(-1.0).is_err());
}

#[test]
fn double_examples() {
    let sys = double2_critical(4.0 / 3.0).unwrap();
    let k = sys.stiffness();
    for (got, want) in [k[(0, 0)], k[(0, 1)], k[(1, 1)]].iter().zip([61.0 / 9.0, -30.0 / 9.0, 25.0 / 9.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    let near = double2_critical(1e-3).unwrap();
    let quartic = nalgebra::DMatrix::from_row_slice(2, 2, &[5.0, -2.0, -2.0, 1.0]);
    assert!((near.stiffness() - quartic).amax() < 1e-2);
    assert!((near.damping() - nalgebra::DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.0])).amax() < 1e-12);
}

#[test]
fn scaling_moves_the_block() {
    let base = catalog_entry("quartic-jb4").unwrap().system;
    let same = scale_system(&base, 1.0).unwrap();
    assert_eq!(same.stiffness(), base.stiffness());
    assert_eq!(same.damping(), base.damping());
    assert!(scale_system(&base, 0.0).is_err());
    assert!(scale_system(&base, -2.0).is_err());

    let tol = ToleranceConfig::default();
    let a = 3.0;
    let scaled = scale_system(&base, a).unwrap();
    let s = compute_spectrum(&scaled, &tol).unwrap();
    assert_eq!(s.blocks().len(), 1);
    assert_eq!(s.blocks()[0].size(), 4);
    assert!((s.blocks()[0].omega - c(0.0, -3.0)).norm() < 1e-9);

    // span{f_n} of the scaled block equals D span{f_n} with D = diag(I, a I)
    let orig = compute_spectrum(&base, &tol).unwrap();
    let mut cols: Vec<_> = s.blocks()[0].chain.clone();
    for f in &orig.blocks()[0].chain {
        let mut g = f.clone();
        for i in 2..4 {
            g[i] *= a;
        }
        cols.push(g);
    }
    let stacked = ComplexMatrix::from_columns(&cols);
    let info = numeric_rank_and_nullspace(&stacked, &tol);
    assert_eq!(info.rank, 4);

    let cubic = catalog_entry("cubic-jb3").unwrap().system;
    let s = compute_spectrum(&scale_system(&cubic, 0.5).unwrap(), &tol).unwrap();
    let mut chain_pairs: Vec<_> = s.blocks().iter().map(|b| (b.size(), b.omega)).collect();
    chain_pairs.sort_by(|a, b| b.0.cmp(&a.0));
    assert_eq!(chain_pairs[0].0, 3);
    assert!((chain_pairs[0].1 - c(0.0, -0.5)).norm() < 1e-9);
    assert!((chain_pairs[1].1 - c(0.0, -2.0)).norm() < 1e-9);
}

#[test]
fn scaled_chain_lies_in_the_mapped_subspace() {
    // for a block of size 4 the rank check above is vacuous; use the cubic
    // block inside a 4-dimensional space instead
    let tol = ToleranceConfig::default();
    let a = 2.0;
    let base = catalog_entry("cubic-jb3").unwrap().system;
    let orig = compute_spectrum(&base, &tol).unwrap();
    let scaled = compute_spectrum(&scale_system(&base, a).unwrap(), &tol).unwrap();
    let b0 = orig.largest_block();
    let b1 = scaled.largest_block();
    let mut cols = b1.chain.clone();
    for f in &b0.chain {
        let mut g = f.clone();
        for i in 2..4 {
            g[i] *= a;
        }
        cols.push(g);
    }
    let info = numeric_rank_and_nullspace(&ComplexMatrix::from_columns(&cols), &tol);
    assert_eq!(info.rank, 3);
}

#[test]
fn catalog_systems_meet_constraints_exactly() {
    let quartic = catalog_entry("quartic-jb4").unwrap().system;
    assert!(residual_max(constraint_residuals(&quartic, quartic_targets()).unwrap()) <= 1e-12);
    let cubic = catalog_entry("cubic-jb3").unwrap().system;
    assert!(residual_max(constraint_residuals(&cubic, cubic_targets(4.0)).unwrap()) <= 1e-12);
    let double = catalog_entry("double-jb2").unwrap().system;
    assert!(residual_max(constraint_residuals(&double, double2_targets(4.0 / 3.0)).unwrap()) <= 1e-12);
}

#[test]
fn catalog_contents() {
    assert_eq!(catalog().len(), 5);
    let q = catalog_entry("quartic-jb4").unwrap();
    assert_eq!(q.perturbation("e11").unwrap().xi, c(-2.0, 0.0));
    let cb = catalog_entry("cubic-jb3").unwrap();
    assert_eq!(cb.expected_blocks, vec![(c(0.0, -1.0), 3), (c(0.0, -4.0), 1)]);
    let d = catalog_entry("double-jb2").unwrap();
    assert_eq!(d.perturbation("e11").unwrap().xi, c(-9.0 / 32.0, -12.0 / 32.0));
    assert!(matches!(catalog_entry("nope"), Err(Error::UnknownCatalog(_))));
    for entry in catalog() {
        let json = entry.to_json().unwrap();
        assert!(json.contains(entry.name));
    }
}

#[test]
fn newton_designer_reaches_the_double_target() {
    let start = double2_critical(0.9).unwrap();
    let target = double2_roots(1.0);
    let d = design_newton(&start, &target, 1e-10, 200).unwrap();
    assert!(char_poly_defect(&d.system, &target) <= 1e-9);
    assert!(d.system.min_damping_eigenvalue() >= -1e-9);
}
