use kronsketch::bench::{
    emit_table, gen_gaussian_instance, read_csv, relative_error_pct, run_experiment, sig3, write_csv, Example,
    ExperimentConfig, ExperimentResult, TrialRow,
};

fn small(example: Example) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(example);
    match example {
        Example::Pspline => {
            cfg.row_dims = vec![20, 20];
            cfg.knots = 4;
            cfg.sketch_rows = vec![150, 400];
            cfg.lambdas = vec![1.0, 0.1];
        }
        _ => {
            cfg.row_dims = vec![12, 10];
            cfg.col_dims = vec![2, 3];
            cfg.sketch_rows = vec![60, 120];
            cfg.heights = None;
            cfg.rows_per_block = None;
            cfg.boost = None;
        }
    }
    cfg.trials = 2;
    cfg
}

#[test]
fn instances_are_reproducible_per_trial() {
    let cfg = small(Example::L2);
    let (f1, b1) = gen_gaussian_instance(&cfg, 3).unwrap();
    let (f2, b2) = gen_gaussian_instance(&cfg, 3).unwrap();
    assert_eq!(f1, f2);
    assert_eq!(b1, b2);
    let (f3, b3) = gen_gaussian_instance(&cfg, 4).unwrap();
    assert_ne!(f1.factors()[0][(0, 0)], f3.factors()[0][(0, 0)]);
    assert_ne!(b1[0], b3[0]);
}

#[test]
fn instance_entries_are_standard_normal() {
    let mut cfg = small(Example::L2);
    cfg.row_dims = vec![1000, 100];
    cfg.col_dims = vec![1, 1];
    let (_, b) = gen_gaussian_instance(&cfg, 0).unwrap();
    assert_eq!(b.len(), 100_000);
    let mean = b.iter().sum::<f64>() / b.len() as f64;
    let var = b.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / b.len() as f64;
    assert!(mean.abs() <= 0.02, "{mean}");
    assert!((var - 1.0).abs() <= 0.05, "{var}");
}

#[test]
fn pspline_instance_rows_partition_unity() {
    let cfg = small(Example::Pspline);
    let (f, _) = gen_gaussian_instance(&cfg, 0).unwrap();
    assert_eq!(f.col_dims(), &[6, 6]);
    for a in f.factors() {
        for i in 0..a.nrows() {
            assert!((a.row(i).sum() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn full_size_l2_sketch_has_zero_error() {
    let mut cfg = small(Example::L2);
    cfg.sketch_rows = vec![120];
    let res = run_experiment(&cfg).unwrap();
    assert_eq!(res.rows.len(), 2);
    for r in &res.rows {
        assert!(r.r_e_pct <= 1e-8, "{}", r.r_e_pct);
        assert!(r.t1_s > 0.0 && r.t2_s > 0.0);
    }
}

#[test]
fn every_example_produces_a_full_table() {
    for ex in [Example::L2, Example::L1, Example::Pspline] {
        let cfg = small(ex);
        let res = run_experiment(&cfg).unwrap();
        let per_trial = cfg.sketch_rows.len() * cfg.lambdas.len().max(1);
        assert_eq!(res.rows.len(), per_trial * cfg.trials, "{ex}");
        assert_eq!(res.means().len(), per_trial);
        assert!(res.rows.iter().all(|r| r.r_e_pct >= 0.0 && r.r_e_pct.is_finite()));
    }
}

#[test]
fn parallel_trials_give_the_same_errors() {
    let cfg = small(Example::L1);
    let seq = run_experiment(&cfg).unwrap();
    let par = run_experiment(&ExperimentConfig {
        parallel_trials: true,
        ..cfg
    })
    .unwrap();
    let errs = |r: &ExperimentResult| r.rows.iter().map(|x| x.r_e_pct).collect::<Vec<_>>();
    assert_eq!(errs(&seq), errs(&par));
}

#[test]
fn oracle_cap_is_enforced() {
    let mut cfg = small(Example::L2);
    cfg.oracle_cap = 10;
    let err = run_experiment(&cfg).unwrap_err();
    assert!(err.is_infeasible(), "{err}");
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = small(Example::L2);
    cfg.trials = 0;
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = small(Example::L2);
    cfg.col_dims = vec![20, 1];
    assert!(run_experiment(&cfg).is_err());
    let mut cfg = small(Example::Pspline);
    cfg.lambdas.clear();
    assert!(run_experiment(&cfg).is_err());
}

#[test]
fn relative_error_is_scale_invariant() {
    let base = relative_error_pct(10.3, 10.0);
    assert!((base - 3.0).abs() < 1e-9);
    assert!((relative_error_pct(10.3 * 7.5, 10.0 * 7.5) - base).abs() < 1e-9);
}

fn row(m: usize, lambda: Option<f64>, trial: Option<usize>, r_e: f64) -> TrialRow {
    TrialRow {
        example: Example::Pspline,
        m,
        lambda,
        trial,
        r_e_pct: r_e,
        t1_s: 0.1 + r_e,
        t2_s: 1.0 / 3.0,
        r_t: (1.0 / 3.0) / (0.1 + r_e),
    }
}

#[test]
fn csv_empty_single_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let empty = ExperimentResult {
        example: Example::L2,
        rows: Vec::new(),
        notes: Vec::new(),
    };
    let mut buf = Vec::new();
    write_csv(&empty, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "example,m,lambda,trial,r_e_pct,T1_s,T2_s,r_t\n");

    let single = ExperimentResult {
        example: Example::Pspline,
        rows: vec![row(10, Some(0.1), Some(0), 0.123456789012345)],
        notes: Vec::new(),
    };
    let mut buf = Vec::new();
    write_csv(&single, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    // one data line plus its mean line
    assert_eq!(text.lines().count(), 3);

    let res = ExperimentResult {
        example: Example::Pspline,
        rows: vec![
            row(10, Some(0.1), Some(0), 1.0 / 7.0),
            row(10, Some(0.1), Some(1), 2.0 / 7.0),
            row(20, None, Some(0), 1e-17),
        ],
        notes: vec!["note".into()],
    };
    let p = dir.path().join("t.csv");
    let mut console = Vec::new();
    emit_table(&res, Some(&p), &mut console).unwrap();
    let back = read_csv(&p).unwrap();
    let mut expect = res.rows.clone();
    expect.extend(res.means());
    assert_eq!(back, expect);
    let console = String::from_utf8(console).unwrap();
    assert!(console.contains("# note"));
    assert!(console.contains("0.214"), "{console}");
}

#[test]
fn three_significant_digits() {
    assert_eq!(sig3(1.01234), "1.01");
    assert_eq!(sig3(0.0297), "0.0297");
    assert_eq!(sig3(123.456), "123");
    assert_eq!(sig3(1234.5), "1234");
    assert_eq!(sig3(2.97e-7), "2.97e-7");
    assert_eq!(sig3(0.0), "0");
}
