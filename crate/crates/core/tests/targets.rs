use rand::Rng;
use sparsenet::rng::rng_from;
use sparsenet::targets::{verify_lipschitz, TargetKind, TargetSpec};
use sparsenet::Evaluable;

fn spec(kind: TargetKind, n: usize, d: usize, s: usize, r: f64) -> TargetSpec {
    TargetSpec { kind, n, d, s, n_star: Some(4 * n), r, c0: None, seed: 21 }
}

#[test]
fn zero_outside_support() {
    for kind in [TargetKind::RademacherBump, TargetKind::CellwisePolynomialBump] {
        let f = spec(kind, 3, 2, 2, 1.5).build().unwrap();
        let mut rng = rng_from(1, &[]);
        let mut seen = 0;
        while seen < 10_000 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            if !f.support().contains(&x) {
                assert_eq!(f.value(&x), 0.0);
                seen += 1;
            }
        }
    }
}

#[test]
fn rademacher_sup_on_grid() {
    let f = spec(TargetKind::RademacherBump, 2, 2, 3, 1.0).build().unwrap();
    let bound = (8f64).powf(-1.0);
    let n = 161;
    for i in 0..n {
        for j in 0..n {
            let x = [i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64];
            assert!(f.value(&x).abs() <= bound + 1e-15);
        }
    }
}

#[test]
fn zero_target_has_no_violations() {
    let f = spec(TargetKind::CellwisePolynomialBump, 2, 1, 1, 1.0).build().unwrap().scaled(0.0);
    let rep = verify_lipschitz(&f, 1.0, 1.0, 2000, 3, 0.05).unwrap();
    assert_eq!((rep.max_ratio, rep.violations), (0.0, 0));
}

#[test]
fn cellwise_family_membership() {
    let f = spec(TargetKind::CellwisePolynomialBump, 2, 1, 2, 1.0).build().unwrap();
    let rep = verify_lipschitz(&f, 1.0, f.c0(), 5000, 4, 0.05).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let bad = verify_lipschitz(&f.scaled(2.0), 1.0, f.c0(), 5000, 4, 0.05).unwrap();
    assert!(!bad.passed());
}
