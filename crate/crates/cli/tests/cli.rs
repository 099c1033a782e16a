//! End-to-end runs of the `pairvol` binary on the shipped graphs.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn graphs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn pairvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pairvol")).args(args).current_dir(graphs()).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(o: &Output, key: &str) -> Option<String> {
    stdout(o).lines().find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
}

#[test]
fn worked_examples_reproduce_quickly() {
    let cases = [
        (vec!["volume", "graphs/v237.graph"], "volume", "1/42"),
        (vec!["volume", "graphs/ex82_X.graph"], "volume", "1/1764"),
        (vec!["volume", "graphs/ex82_Y.graph"], "volume", "1/3528"),
        (vec!["volume", "graphs/ex88_m7.graph"], "volume", "242/21"),
        (vec!["lct", "graphs/cusp.graph"], "lct", "5/6"),
        (vec!["pcp", "graphs/cusp.graph"], "pcp", "1/6"),
        (vec!["star", "graphs/cusp.graph"], "chi", "-5/6"),
        (vec!["star", "graphs/v237.graph"], "epsilon", "1/42"),
    ];
    for (args, key, expected) in cases {
        let t = Instant::now();
        let o = pairvol(&args);
        assert!(t.elapsed() < Duration::from_secs(1), "{args:?} took {:?}", t.elapsed());
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(value(&o, key).as_deref(), Some(expected), "{args:?}");
    }
}

#[test]
fn orbifold_weights_are_echoed() {
    let o = pairvol(&["volume", "graphs/ex82_Y.graph"]);
    assert_eq!(value(&o, "arrow.C3.n").as_deref(), Some("7"));
    assert_eq!(value(&o, "arrow.C3.cbar").as_deref(), Some("6/7"));
}

#[test]
fn singular_lattice_is_a_domain_error() {
    let o = pairvol(&["validate", "graphs/affine_E8.graph"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("not negative definite (witness minor index 9)"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(pairvol(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(pairvol(&["volume"]).status.code(), Some(64));
    assert_eq!(pairvol(&["search-min", "--bounds", "q=3"]).status.code(), Some(64));
    assert_eq!(pairvol(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_file_and_zero_coefficient() {
    assert_eq!(pairvol(&["volume", "graphs/nope.graph"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.graph");
    std::fs::write(&path, "vertex a e=-2 g=0\nvertex b e=-3 g=0\nedge a b\narrow z at=b c=0\n").unwrap();
    let p = path.to_str().unwrap();
    let o = pairvol(&["volume", p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coefficient 0"));
    let o = pairvol(&["volume", p, "--drop-zero-arrows"]);
    assert!(o.status.success());
}

#[test]
fn raw_and_normalized_agree_under_check() {
    for f in ["graphs/cusp.graph", "fixtures/vol_half/members/y2-x5.graph"] {
        for mode in ["--raw", "--normalize"] {
            let o = pairvol(&["pcp", f, mode, "--check"]);
            assert!(o.status.success(), "{f} {mode}");
            assert_eq!(value(&o, "check").as_deref(), Some("agree"));
        }
    }
}

#[test]
fn output_is_byte_deterministic() {
    for args in [
        vec!["classify", "graphs/cusp.graph"],
        vec!["star", "graphs/ex82_X.graph"],
        vec!["search-min", "--bounds", "m=3,n=3,nprime=7,d=5"],
        vec!["invariance", "--seed", "11", "--cases", "50"],
    ] {
        let (a, b) = (pairvol(&args), pairvol(&args));
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn vol0_cases() {
    let o = pairvol(&["vol0", "fixtures/vol_half/members/y2-x3.graph"]);
    assert_eq!(value(&o, "volume").as_deref(), Some("0"));
    assert_eq!(value(&o, "case").as_deref(), Some("star3"));
    let o = pairvol(&["vol0", "graphs/ex82_Y.graph"]);
    assert_eq!(value(&o, "volume").as_deref(), Some("1/3528"));
    assert_eq!(value(&o, "case").as_deref(), Some("none"));
    // coefficient arrows are not orbifold weights
    assert_eq!(pairvol(&["vol0", "graphs/cusp.graph"]).status.code(), Some(2));
}

#[test]
fn small_search_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("search.csv");
    let o = pairvol(&["search-min", "--bounds", "m=3,n=3,nprime=7,d=5", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(value(&o, "min_volume").as_deref(), Some("1/3528"));
    assert!(value(&o, "argmin.1").is_some());
    assert_eq!(value(&o, "min_chi_bar").as_deref(), Some("1/42"));
    let rows: usize = value(&o, "csv_rows").unwrap().parse().unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), rows + 1);
    assert!(text.starts_with("r,s,m_spec,n_spec,nprime_spec,d,chi_bar,epsilon,volume,flag"));
}

#[test]
fn small_census_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("census.csv");
    let o = pairvol(&["census", "--max-k", "7", "--bounds", "m=4,n=4,d=6", "--csv", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        value(&o, "star3_types").as_deref(),
        Some("(2,2,2) (2,2,3) (2,2,4) (2,2,5) (2,2,6) (2,2,7) (2,3,3) (2,3,4) (2,3,5) (2,3,6) (2,4,4) (3,3,3)")
    );
    let zero: usize = value(&o, "volume_zero").unwrap().parse().unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), zero + 1);
}
