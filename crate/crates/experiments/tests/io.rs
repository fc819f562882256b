use std::path::Path;

use cosvr_experiments::io::{load_dataset, load_table, parse_table, table_to_csv, write_table, SampleTable};
use cosvr_experiments::ExpError;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn valve_style_table_infers_two_inputs() {
    let mut text = String::from("# stroke in mm, pressure in MPa, flow in L/min\nstroke,pressure,flow\n");
    for i in 0..20 {
        text += &format!("{},{},{}\n", i as f64 * 0.5, 1.0 + i as f64 * 0.1, 30.0 + (i as f64).sqrt());
    }
    let t = parse_table(&text, Path::new("valve.csv")).unwrap();
    assert_eq!(t.dim(), 2);
    assert_eq!(t.len(), 20);
    assert_eq!(t.notes, vec!["stroke in mm, pressure in MPa, flow in L/min"]);
}

#[test]
fn files_round_trip_and_headers_must_match() {
    let dir = tempfile::tempdir().unwrap();
    let cols = SampleTable::default_columns(2);
    let t = SampleTable::new(cols, DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4]), vec![1.5, -2.5]).unwrap();
    let lf = dir.path().join("lf.csv");
    let hf = dir.path().join("hf.csv");
    write_table(&t, &lf).unwrap();
    std::fs::write(&hf, "a,b,y\n1,2,3\n").unwrap();
    assert_eq!(load_table(&lf).unwrap(), t);
    assert!(matches!(load_dataset(&lf, &hf), Err(ExpError::Data(_))));
    let missing = dir.path().join("missing.csv");
    assert_eq!(load_table(&missing).unwrap_err().exit_code(), 3);
}

#[test]
fn empty_body_is_line_two() {
    match parse_table("x1,x2,y\n", Path::new("e.csv")) {
        Err(ExpError::Parse { line, .. }) => assert_eq!(line, 2),
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #[test]
    fn write_then_load_is_lossless(
        rows in prop::collection::vec(prop::collection::vec(-1e12f64..1e12, 4), 1..15),
        scale in -300i32..300,
    ) {
        let f = 10f64.powi(scale);
        let n = rows.len();
        let points = DMatrix::from_fn(n, 3, |i, k| rows[i][k] * f);
        let y: Vec<f64> = rows.iter().map(|r| r[3] * f).collect();
        prop_assume!(points.iter().chain(&y).all(|v| v.is_finite()));
        let t = SampleTable::new(SampleTable::default_columns(3), points, y).unwrap();
        let back = parse_table(&table_to_csv(&t), Path::new("p.csv")).unwrap();
        prop_assert_eq!(back, t);
    }
}
