use critmode::design::{catalog, catalog_entry, BlockFixture};
use critmode::jordan::{compute_spectrum, JordanBlock, Spectrum};
use critmode::linalg::ToleranceConfig;
use critmode::model::PhaseVector;
use num_complex::Complex64;

fn inf_norm(v: &PhaseVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_diff(a: &[PhaseVector], b: &[PhaseVector], sign: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| inf_norm(&(x - y * Complex64::new(sign, 0.0))))
        .fold(0.0, f64::max)
}

/// Deviation of a block from a fixture, minimized over one overall sign.
fn fixture_deviation(block: &JordanBlock, fx: &BlockFixture) -> f64 {
    let chain: Vec<_> = fx.chain.iter().map(|v| v.to_vector()).collect();
    let duals: Vec<_> = fx.duals.iter().map(|v| v.to_vector()).collect();
    [1.0, -1.0]
        .into_iter()
        .map(|s| max_diff(&block.chain, &chain, s).max(max_diff(&block.duals, &duals, s)))
        .fold(f64::INFINITY, f64::min)
}

fn spectrum(name: &str) -> Spectrum {
    let e = catalog_entry(name).unwrap();
    compute_spectrum(&e.system, &ToleranceConfig::default()).unwrap()
}

#[test]
fn catalog_block_structures() {
    for e in catalog() {
        let s = compute_spectrum(&e.system, &ToleranceConfig::default()).unwrap();
        let mut got: Vec<_> = s.blocks().iter().map(|b| (b.omega, b.size())).collect();
        for (w, m) in &e.expected_blocks {
            let pos = got
                .iter()
                .position(|(g, gm)| gm == m && (g - w).norm() < 1e-6)
                .unwrap_or_else(|| panic!("{}: missing block ({w}, {m}) in {got:?}", e.name));
            got.remove(pos);
        }
        for (_, m) in &got {
            assert_eq!(*m, 1, "{}: unexpected nontrivial block", e.name);
        }
        assert_eq!(s.blocks().iter().map(|b| b.size()).sum::<usize>(), 2 * e.system.n());
    }
}

#[test]
fn catalog_vectors_reproduce() {
    for e in catalog() {
        let s = compute_spectrum(&e.system, &ToleranceConfig::default()).unwrap();
        for fx in &e.fixtures {
            let block = s
                .blocks()
                .iter()
                .find(|b| (b.omega - fx.omega()).norm() < 1e-6 && b.size() == fx.chain.len())
                .unwrap();
            let dev = fixture_deviation(block, fx);
            assert!(dev <= 1e-10, "{} block at {}: deviation {dev:e}", e.name, fx.omega());
        }
    }
}

#[test]
fn conjugate_partner_of_double_block() {
    let s = spectrum("double-jb2");
    let pos = s.blocks().iter().find(|b| b.label == 1).unwrap();
    let neg = s.blocks().iter().find(|b| b.label == -1).unwrap();
    assert!((neg.omega + pos.omega.conj()).norm() < 1e-12);
    // f_(-j,n) = i^M (-1)^n f_(j,n)^* with M = 2
    for n in 0..2 {
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        let expect = pos.chain[n].map(|z| z.conj() * sign);
        assert!(inf_norm(&(&neg.chain[n] - expect)) < 1e-12);
    }
}

#[test]
fn crossing_pair_is_biorthogonal() {
    let s = spectrum("crossed-pair");
    let r = s.verify();
    assert!(r.cross_block_pairing < 1e-9, "{r:?}");
    assert!(r.pairing_defect < 1e-9);
    assert_eq!(s.blocks().iter().filter(|b| b.size() == 2).count(), 2);
}

#[test]
fn verification_passes_on_catalog() {
    for e in catalog() {
        let s = compute_spectrum(&e.system, &ToleranceConfig::default()).unwrap();
        let r = s.verify();
        r.check(1e-9).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        assert!(r.completeness_defect < 1e-9);
    }
}

#[test]
fn representation_shapes_single_critical() {
    let s = spectrum("single-critical");
    let shapes = &s.verify().blocks[0];
    assert_eq!(shapes.size, 2);
    assert!(shapes.metric_deviation < 1e-14);
    assert!(shapes.h_lowered_asymmetry < 1e-14);
}
