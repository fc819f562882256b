#![allow(dead_code)]

use cosvr_core::benchmarks;
use cosvr_core::doe::make_mf_doe;
use cosvr_experiments::io::{ExternalDataset, SampleTable};

/// Currin LF/HF tables drawn from one multi-fidelity design.
pub fn currin_tables(hf_n: usize, lf_n: usize, m: f64, seed: u64) -> ExternalDataset {
    let f = benchmarks::family("currin").unwrap();
    let (hf, lf) = make_mf_doe(&f.domain(), hf_n, lf_n, seed);
    let y_h = f.eval_hf_rows(&hf).unwrap().as_slice().to_vec();
    let y_l = f.eval_lf_rows(&lf, m).unwrap().as_slice().to_vec();
    let cols = SampleTable::default_columns(2);
    ExternalDataset::new(
        SampleTable::new(cols.clone(), lf, y_l).unwrap(),
        SampleTable::new(cols, hf, y_h).unwrap(),
    )
    .unwrap()
}
