use sparsenet::experiments::{fit_loglog_slope, run_sweep, SweepSpec};

#[test]
fn fitter_recovers_synthetic_rates() {
    let r = 1.5;
    let by_res: Vec<(f64, f64)> = [8.0f64, 16.0, 32.0, 64.0].iter().map(|&n| (n, n.powf(-r))).collect();
    assert!((fit_loglog_slope(&by_res).unwrap().slope + r).abs() < 1e-12);
    let by_s: Vec<(f64, f64)> = [2.0f64, 4.0, 8.0, 16.0].iter().map(|&s| (s, 0.3 * s.sqrt())).collect();
    assert!((fit_loglog_slope(&by_s).unwrap().slope - 0.5).abs() < 1e-12);
    let by_m: Vec<(f64, f64)> = (10..=16)
        .map(|k| {
            let m = 2f64.powi(k);
            let x = m / m.ln();
            (x, x.powf(-2.0 / 3.0))
        })
        .collect();
    assert!((fit_loglog_slope(&by_m).unwrap().slope + 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn spec_file_drives_a_sweep() {
    let text = r#"{
        "axis": "N_star",
        "grid": [8, 16, 32],
        "target": {"kind": "cellwise_polynomial_bump", "N": 2, "d": 1, "s": 1, "r": 1.0, "seed": 2},
        "n_mc": 20000,
        "seed": 2
    }"#;
    let spec: SweepSpec = serde_json::from_str(text).unwrap();
    let table = run_sweep(&spec).unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.pass, "{table:?}");
    assert_eq!(run_sweep(&spec).unwrap(), table);

    let along_n = r#"{
        "axis": "N",
        "grid": [1, 2, 4],
        "target": {"kind": "rademacher_bump", "N": 1, "d": 1, "s": 1, "N_star": 16, "r": 1.0, "seed": 2},
        "N_star": 16,
        "n_mc": 20000,
        "seed": 2
    }"#;
    let spec: SweepSpec = serde_json::from_str(along_n).unwrap();
    let t = run_sweep(&spec).unwrap();
    assert!((t.fitted_slope.unwrap() + 0.5).abs() < 0.1, "{t:?}");
}
