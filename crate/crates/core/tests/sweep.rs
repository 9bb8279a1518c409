use pvlab::harness::{run_sweep, summarize, write_records_csv, SweepConfig, Task};

fn csv(cfg: &SweepConfig) -> Vec<u8> {
    let mut out = Vec::new();
    write_records_csv(&mut out, &run_sweep(cfg).unwrap()).unwrap();
    out
}

#[test]
fn record_count_matches_grid() {
    let cfg = SweepConfig::from_json(
        r#"{"Ns": [200, 300], "ns": [3, 5], "rhos": [0.1, 0.3, 0.6], "trials": 2, "model": "gaussian",
            "tasks": ["recover", "advantage"], "D": 8, "seed": 11, "out": null}"#,
    )
    .unwrap();
    let recs = run_sweep(&cfg).unwrap();
    assert_eq!(recs.len(), 2 * 2 * 3 * 2 * 2);
    let adv: Vec<_> = recs.iter().filter(|r| r.task == Task::Advantage).collect();
    assert!(adv.iter().all(|r| r.adv.is_some() && r.l2_error.is_none()));
    // Cells appear in N, n, rho order.
    let keys: Vec<(usize, usize)> = recs.iter().map(|r| (r.ambient_dim, r.subspace_dim)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn same_config_same_bytes() {
    let cfg = SweepConfig::from_json(
        r#"{"Ns": [500], "ns": [6], "rhos": [0.05, 0.5], "trials": 4, "model": "orth",
            "tasks": ["recover", "detect_spectral", "detect_l1l2"], "D": 8, "seed": 3, "out": null}"#,
    )
    .unwrap();
    let a = csv(&cfg);
    assert_eq!(a, csv(&cfg));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("N,n,rho,trial,task,success,l2_error,entrywise_err,statistic,adv,elapsed_ms\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 4 * 3);
}

#[test]
fn editing_the_grid_keeps_other_cells() {
    let small = SweepConfig::from_json(
        r#"{"Ns": [400], "ns": [5], "rhos": [0.1], "trials": 3, "model": "gaussian",
            "tasks": ["recover"], "D": 8, "seed": 9, "out": null}"#,
    )
    .unwrap();
    let big = SweepConfig::from_json(
        r#"{"Ns": [300, 400], "ns": [5, 7], "rhos": [0.1], "trials": 3, "model": "gaussian",
            "tasks": ["recover"], "D": 8, "seed": 9, "out": null}"#,
    )
    .unwrap();
    let a = run_sweep(&small).unwrap();
    let b: Vec<_> = run_sweep(&big)
        .unwrap()
        .into_iter()
        .filter(|r| r.ambient_dim == 400 && r.subspace_dim == 5)
        .collect();
    assert_eq!(a, b);
}

#[test]
fn recovery_rate_collapses_across_the_threshold() {
    let cfg = SweepConfig::from_json(
        r#"{"Ns": [2500], "ns": [20, 250], "rhos": [0.02, 1.0], "trials": 50, "model": "gaussian",
            "tasks": ["recover"], "D": 4, "seed": 2500, "out": null}"#,
    )
    .unwrap();
    let summary = summarize(&run_sweep(&cfg).unwrap());
    let rate = |n: usize, rho: f64| {
        summary
            .iter()
            .find(|s| s.subspace_dim == n && s.rho == rho)
            .unwrap()
            .rate
    };
    assert!(rate(20, 0.02) >= 0.9, "sparse cell rate {}", rate(20, 0.02));
    assert!(rate(250, 1.0) <= 0.2, "dense cell rate {}", rate(250, 1.0));
}
