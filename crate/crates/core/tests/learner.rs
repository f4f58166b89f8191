use rand::Rng;
use sparsenet::constructors::{sparse_approx_net, AssemblyParams, PartitionIndex};
use sparsenet::learner::{erm_fit, l2_error, sample_dataset, truncate, Dataset, Hyperparams, NoiseModel};
use sparsenet::poly::Polynomial;
use sparsenet::rng::rng_from;
use sparsenet::targets::{SparseSmoothTarget, TargetKind, TargetSpec};
use sparsenet::Evaluable;

fn cellwise(n: usize, d: usize, s: usize, r: f64, seed: u64) -> SparseSmoothTarget {
    TargetSpec { kind: TargetKind::CellwisePolynomialBump, n, d, s, n_star: None, r, c0: None, seed }.build().unwrap()
}

#[test]
fn global_polynomial_matches_oracle() {
    // Degree-one polynomial with full support: every cell fit is exact.
    let p = Polynomial::at_origin(1, vec![(vec![0], 0.3), (vec![1], 0.5)]).unwrap();
    let (n, ns, r) = (1, 8, 2.0);
    let hp = Hyperparams::new(n, 1, 1, r, 2.0, ns).unwrap();
    let mut rng = rng_from(3, &[]);
    let points = (0..4000)
        .map(|_| {
            let x = vec![rng.gen::<f64>()];
            let y = p.value(&x);
            (x, y)
        })
        .collect();
    let data = Dataset { dim: 1, points, noise_model: NoiseModel::None, seed: 3, label_bound: 0.8 };
    let fit = erm_fit(&data, &hp).unwrap();
    assert_eq!(fit.clipped, 0);
    let oracle = sparse_approx_net(&p, &PartitionIndex::new(n, ns, 1).unwrap(), &AssemblyParams::new(r, 1)).unwrap();
    let fit_err = l2_error(&fit.net, &p, 20_000, 1).unwrap().estimate;
    let oracle_err = l2_error(&oracle.net, &p, 20_000, 1).unwrap().estimate;
    assert!(fit_err <= 2.0 * oracle_err + 1e-20, "{fit_err} vs oracle {oracle_err}");
    for (k, q) in &fit.polynomials {
        let c = PartitionIndex::new(n, ns, 1).unwrap().fine.center(*k);
        assert!((q.eval(&c) - p.eval(&c)).abs() < 1e-9);
    }
}

#[test]
fn truncation_never_hurts() {
    for seed in 0..4 {
        let f = cellwise(2, 1, 1, 1.0, seed);
        let data = sample_dataset(&f, 300, NoiseModel::BoundedUniform { sigma_b: 1.0 }, seed).unwrap();
        let hp = Hyperparams::new(2, 1, 1, 1.0, 2.0, 16).unwrap();
        let fit = erm_fit(&data, &hp).unwrap();
        let raw = l2_error(&fit.net, &f, 10_000, seed).unwrap();
        let cut = l2_error(&truncate(&fit.net, data.label_bound).unwrap(), &f, 10_000, seed).unwrap();
        assert!(cut.estimate <= raw.estimate + 3.0 * (raw.std_error + cut.std_error));
    }
}

#[test]
fn noiseless_error_decreases_with_m() {
    let f = cellwise(2, 1, 2, 1.0, 4);
    let mut prev: Option<(f64, f64)> = None;
    for m in [1usize << 10, 1 << 12, 1 << 14] {
        let data = sample_dataset(&f, m, NoiseModel::None, 4).unwrap();
        let (hp, _) = Hyperparams::for_sample(m, 2, 2, 1, 1.0, 2.0).unwrap();
        let fit = erm_fit(&data, &hp).unwrap();
        let e = l2_error(&fit.net, &f, 20_000, 5).unwrap();
        if let Some((p, pse)) = prev {
            assert!(e.estimate <= p + 2.0 * (e.std_error + pse), "m = {m}: {} after {p}", e.estimate);
        }
        prev = Some((e.estimate, e.std_error));
    }
}

#[test]
fn empirical_risk_tracks_resolution() {
    // Labels are noiseless, so the training risk is pure approximation error
    // and shrinks as the resolution grows with m.
    let f = cellwise(2, 1, 2, 1.0, 7);
    let mut prev = f64::INFINITY;
    for m in [1usize << 10, 1 << 12, 1 << 14] {
        let data = sample_dataset(&f, m, NoiseModel::None, 7).unwrap();
        let (hp, _) = Hyperparams::for_sample(m, 2, 2, 1, 1.0, 2.0).unwrap();
        let risk = erm_fit(&data, &hp).unwrap().empirical_risk;
        assert!(risk <= prev * 1.05, "m = {m}: {risk} after {prev}");
        prev = risk;
    }
}

#[test]
fn silent_outside_support() {
    let f = cellwise(4, 2, 2, 1.0, 8);
    let m = 20_000;
    let data = sample_dataset(&f, m, NoiseModel::None, 8).unwrap();
    let (hp, _) = Hyperparams::for_sample(m, 4, 2, 2, 1.0, 2.0).unwrap();
    let fit = erm_fit(&data, &hp).unwrap();
    assert_eq!(fit.clipped, 0);
    assert!(fit.net.inspect().max_abs_weight <= hp.weight_bound);
    let eps = (hp.n_star as f64).powf(-3.0);
    let mut rng = rng_from(9, &[]);
    let (mut total, mut count) = (0.0, 0);
    while count < 10_000 {
        let x = [rng.gen::<f64>(), rng.gen::<f64>()];
        if f.support().contains(&x) {
            continue;
        }
        total += fit.net.eval(&x).unwrap().abs();
        count += 1;
    }
    // Cells straddling the support edge see only localization leakage.
    assert!(total / count as f64 <= eps + 1e-3, "mean |f_hat| outside S = {}", total / count as f64);
}

#[test]
fn gaussian_noise_pipeline_runs() {
    let f = cellwise(2, 1, 1, 1.0, 2);
    let data = sample_dataset(&f, 2048, NoiseModel::GaussianUnit, 2).unwrap();
    let (hp, res) = Hyperparams::for_sample(2048, 2, 1, 1, 1.0, 2.0).unwrap();
    assert!(res.floored);
    let fit = erm_fit(&data, &hp).unwrap();
    assert_eq!(fit.clipped, 0);
    assert!(fit.empirical_risk > 0.5 && fit.empirical_risk < 1.5);
    let est = truncate(&fit.net, data.label_bound).unwrap();
    assert!(l2_error(&est, &f, 5000, 3).unwrap().estimate.is_finite());
}
