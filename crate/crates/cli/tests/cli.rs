use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bvdet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvdet")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn pfaffian_of_block_form_is_product_of_blocks() {
    let out = bvdet(&["pfaffian", "--matrix", r#"[[0,2,0,0],[-2,0,0,0],[0,0,0,"3/2"],[0,0,"-3/2",0]]"#]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["pf"], "3");
    assert_eq!(r["det"], "9");
}

#[test]
fn pfaffian_reads_matrix_file_in_numeric_mode() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    std::fs::write(&path, "[[0, 0.5], [-0.5, 0]]").unwrap();
    let out = bvdet(&["--mode", "numeric", "pfaffian", "--matrix", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["passed"], true);
}

#[test]
fn malformed_input_exits_two() {
    assert_eq!(bvdet(&["pfaffian", "--matrix", "[[1,0],[0,1]]"]).status.code(), Some(2));
    assert_eq!(bvdet(&["pfaffian", "--matrix", "[[0,1,2]]"]).status.code(), Some(2));
    assert_eq!(bvdet(&["pfaffian", "--matrix", "[[0,"]).status.code(), Some(2));
    assert_eq!(bvdet(&["--tol=-1", "pfaffian", "--matrix", "[[0,1],[-1,0]]"]).status.code(), Some(2));
    assert_eq!(bvdet(&["hpl-check", "--input", "/nonexistent/input.json"]).status.code(), Some(2));
}

#[test]
fn bv_cohomology_of_nondegenerate_form() {
    let out = bvdet(&["bv-cohomology", "--matrix", "[[0,1],[-1,0]]", "--truncation", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["pf"], "1");
    for variant in ["classical", "quantum", "trivial_quantum"] {
        assert_eq!(r["cohomology"][variant]["0"], 1, "{variant}");
        assert_eq!(r["cohomology"][variant]["-1"], 0, "{variant}");
    }
}

#[test]
fn bv_cohomology_below_dimension_skips_retractions() {
    let out = bvdet(&["bv-cohomology", "--matrix", "[[0,1,0],[-1,0,0],[0,0,0]]", "--truncation", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out)["retractions"].is_null());
}

#[test]
fn hpl_check_passes_and_flags_large_perturbation() {
    let ok = bvdet(&["hpl-check", "--input", data("contraction.json").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["passed"], true);
    // 1 − δη vanishes here
    let bad = bvdet(&["hpl-check", "--input", data("singular.json").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(report(&bad)["passed"], false);
}

#[test]
fn det_bundle_on_lattice_writes_report_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bundle.json");
    let out = bvdet(&[
        "det-bundle",
        "--family",
        data("lattice_dirac.json").to_str().unwrap(),
        "--emit-plot",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(r["cocycle"]["max_residual"].as_f64().unwrap() <= 1e-9);
    assert!(r["cocycle"]["triple_overlaps"].as_u64().unwrap() > 0);
    assert_eq!(r["section"]["winding"], 1);
    assert_eq!(r["spectral_flow"], 1);
    let csv = std::fs::read_to_string(out_path.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("theta,re_s,im_s,sigma_min"));
    assert_eq!(lines.count(), 256);
}

#[test]
fn det_bundle_with_nonzero_index_has_no_section() {
    let out = bvdet(&["det-bundle", "--family", data("index_one.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["section"].is_null());
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["name"] == "section_defined"));
}

#[test]
fn plot_without_out_is_rejected() {
    let out = bvdet(&["det-bundle", "--family", data("lattice_dirac.json").to_str().unwrap(), "--emit-plot", "csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_all_is_deterministic() {
    let first = bvdet(&["--seed", "7", "verify-all"]);
    let second = bvdet(&["--seed", "7", "verify-all"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    assert_eq!(first.stdout, second.stdout);
    let r = report(&first);
    assert_eq!(r["criteria"].as_array().unwrap().len(), 11);
}
