use std::fs;

use cosvr_experiments::io::{sidecar, write_result, META_SUFFIX, REPEATS_SUFFIX, TIMING_SUFFIX};
use cosvr_experiments::spec::{ExperimentSpec, ModelKind};
use cosvr_experiments::{run_sweep, ExpError};

fn spec(text: &str) -> ExperimentSpec {
    ExperimentSpec::from_toml(text).unwrap()
}

const PARK2: &str = r#"
family = "park2"
m_grid = [0.0]
hf_budget = 8
lf_budget = 40
repeats = 1
test_points = 200
models = ["cosvr", "lssvr_hf"]
gwo = { population = 8, iterations = 15 }
"#;

#[test]
fn park2_single_repeat_shape() {
    let result = run_sweep(&spec(PARK2)).unwrap();
    assert_eq!(result.rows.len(), 2);
    for (row, model) in result.rows.iter().zip([ModelKind::Cosvr, ModelKind::LssvrHf]) {
        assert_eq!(row.model, model);
        assert_eq!(row.m, Some(0.0));
        assert!(row.summary.mean_r2 <= 1.0);
        assert_eq!(row.summary.n_repeats, 1);
        assert!(row.wall_time_s > 0.0);
    }
    assert_eq!(result.meta.hf_budget, 8);
    assert_eq!(result.meta.lf_budget, Some(40));
}

#[test]
fn reruns_are_byte_identical() {
    let text = r#"
family = "currin"
m_grid = [0.0, 0.5]
hf_budget = "2s"
lf_budget = "10s"
repeats = 3
test_points = 100
seed = 42
models = ["cosvr", "lssvr_hf"]
gwo = { population = 8, iterations = 10 }
"#;
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    write_result(&run_sweep(&spec(text)).unwrap(), &a).unwrap();
    write_result(&run_sweep(&spec(text)).unwrap(), &b).unwrap();
    for suffix in ["", REPEATS_SUFFIX, META_SUFFIX] {
        let fa = fs::read(sidecar(&a, suffix)).unwrap();
        let fb = fs::read(sidecar(&b, suffix)).unwrap();
        assert_eq!(fa, fb, "file with suffix {suffix:?} differs");
    }
    assert!(sidecar(&a, TIMING_SUFFIX).exists());
    let csv = fs::read_to_string(&a).unwrap();
    assert!(csv.starts_with("family,m,model,mean_r2,std_r2,pearson_r2,n_repeats,seed\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn correlation_column_ignores_the_models() {
    let base = r#"
family = "currin"
m_grid = [0.25, 0.75]
hf_budget = 4
lf_budget = 20
repeats = 1
test_points = 300
gwo = { population = 6, iterations = 5 }
"#;
    let both = run_sweep(&spec(&format!("{base}models = [\"cosvr\", \"lssvr_hf\"]\n"))).unwrap();
    let one = run_sweep(&spec(&format!("{base}models = [\"lssvr_hf\"]\n"))).unwrap();
    for m in [0.25, 0.75] {
        let a = both.row(Some(m), ModelKind::Cosvr).unwrap().pearson_r2;
        let b = both.row(Some(m), ModelKind::LssvrHf).unwrap().pearson_r2;
        let c = one.row(Some(m), ModelKind::LssvrHf).unwrap().pearson_r2;
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}

#[test]
fn budget_rules_expand_with_dimension() {
    let text = r#"
family = "park1"
m_grid = [0.0]
hf_budget = "2s"
lf_budget = "10s"
"#;
    let r = spec(text).resolve().unwrap();
    assert_eq!((r.hf_n, r.lf_n), (8, 40));
}

#[test]
fn invalid_specs_fail_before_computing() {
    let cases = [
        r#"family = "nope"
m_grid = [0.0]
hf_budget = 4
lf_budget = 20"#,
        r#"family = "currin"
m_grid = [0.5, 0.25]
hf_budget = 4
lf_budget = 20"#,
        r#"family = "currin"
m_grid = [0.0]
hf_budget = 4
lf_budget = 20
repeats = 0"#,
        r#"family = "external"
m_grid = [0.0]
hf_budget = 4
lf_budget = 20"#,
    ];
    for text in cases {
        assert!(matches!(run_sweep(&spec(text)), Err(ExpError::Config(_))), "{text}");
    }
    assert!(matches!(
        ExperimentSpec::from_toml("family = \"currin\"\nm_grid = [0.0]\nhf_budget = 4\nlf_budget = 20\nextra = 1\n"),
        Err(ExpError::Config(_))
    ));
}
