mod common;

use cosvr_experiments::cv::{assign_folds, run_cv, CvOptions};
use cosvr_experiments::io::ExternalDataset;
use cosvr_experiments::spec::{GwoOverrides, ModelKind};
use cosvr_experiments::ExpError;

fn quick(folds: usize) -> CvOptions {
    CvOptions {
        gwo: GwoOverrides {
            population: Some(8),
            iterations: Some(15),
        },
        ..CvOptions::new(folds, 21)
    }
}

#[test]
fn five_folds_of_twenty_hold_four_each() {
    let data = common::currin_tables(20, 20, 0.25, 1);
    let folds = assign_folds(&data.hf, 5, 0).unwrap();
    assert_eq!(folds.iter().map(Vec::len).collect::<Vec<_>>(), vec![4; 5]);
    let result = run_cv(&data, &quick(5)).unwrap();
    assert_eq!(result.rows.len(), 2);
    for row in &result.rows {
        assert_eq!(row.summary.n_repeats, 5);
        assert_eq!(row.m, None);
        assert!(row.summary.mean_r2 <= 1.0);
    }
    assert_eq!(result.meta.kind, "cv");
}

#[test]
fn shuffled_rows_give_the_same_study() {
    let data = common::currin_tables(20, 20, 0.25, 2);
    let rev: Vec<usize> = (0..20).rev().collect();
    let rot: Vec<usize> = (0..20).map(|i| (i * 7 + 3) % 20).collect();
    let shuffled = ExternalDataset::new(data.lf.select(&rot), data.hf.select(&rev)).unwrap();

    let a = run_cv(&data, &quick(5)).unwrap();
    let b = run_cv(&shuffled, &quick(5)).unwrap();
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert!((ra.summary.mean_r2 - rb.summary.mean_r2).abs() <= 1e-10);
        for (x, y) in ra.summary.per_repeat.iter().zip(&rb.summary.per_repeat) {
            assert!((x - y).abs() <= 1e-10);
        }
    }
    assert_eq!(a.meta.spec_hash, b.meta.spec_hash);
}

#[test]
fn separate_test_table_is_used() {
    let data = common::currin_tables(10, 20, 0.0, 3);
    let test = common::currin_tables(20, 2, 0.0, 4).hf;
    let opts = CvOptions {
        test: Some(test),
        models: vec![ModelKind::Cosvr],
        ..quick(5)
    };
    let result = run_cv(&data, &opts).unwrap();
    assert_eq!(result.meta.test_points, Some(20));
    assert_eq!(result.rows.len(), 1);
}

#[test]
fn fold_limits_are_config_errors() {
    let data = common::currin_tables(6, 10, 0.0, 5);
    assert!(matches!(run_cv(&data, &quick(7)), Err(ExpError::Config(_))));
    assert!(matches!(run_cv(&data, &quick(1)), Err(ExpError::Config(_))));
    // Three folds of two cannot train the three-sample LS-SVR baseline.
    assert!(matches!(run_cv(&data, &quick(3)), Err(ExpError::Config(_))));
    let folds = assign_folds(&data.hf, 6, 0).unwrap();
    assert!(folds.iter().all(|f| f.len() == 1));
}
