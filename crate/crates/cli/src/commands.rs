use std::path::Path;

use bvdet_core::bv::{build_bv, pfaffian_composite, quantum_retraction, Variant};
use bvdet_core::complexes::{perturb, to_numeric, verify_retraction, GradedMapJson, HplInput, Retraction, RetractionJson};
use bvdet_core::complexes::GradedMap;
use bvdet_core::family::{det_line_bundle, det_section, spectral_flow, FamilyConfig, FamilySpectra, GridSpec, OperatorFamily};
use bvdet_core::pfaffian::{kernel_top_form, pfaffian, pfaffian_hom, SkewForm, Splitting};
use bvdet_core::scalar::rational_from_json;
use bvdet_core::suite::{run_all, Check};
use bvdet_core::{Error, Matrix, Rational, Scalar};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::{Cli, Command, Mode};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or unusable input.
    #[error("{0}")]
    Input(String),
    /// The computation itself failed.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Check(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::Json(_)
            | Error::Io(_)
            | Error::Invalid(_)
            | Error::Structure(_)
            | Error::TruncationTooLow { .. } => CliError::Input(e.to_string()),
            _ => CliError::Check(e.to_string()),
        }
    }
}

pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

impl Outcome {
    fn from_checks(mut report: Value, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        report["checks"] = serde_json::to_value(&checks).expect("checks serialize");
        report["passed"] = json!(passed);
        Self { report, passed }
    }
}

fn check(name: &str, passed: bool, residual: f64, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, residual, detail: detail.into() }
}

/// Exact scalars must agree exactly; floating ones to `tol`.
fn agrees<S: Scalar>(a: &S, b: &S, tol: f64) -> (bool, f64) {
    let r = (a.to_complex() - b.to_complex()).norm();
    (if S::EXACT { a == b } else { r <= tol }, r)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::Input(format!("--tol must be positive, got {}", cli.tol)));
    }
    match &cli.command {
        Command::Pfaffian { matrix } => {
            let m = load_matrix(matrix)?;
            match cli.mode {
                Mode::Exact => pfaffian_report(m, cli.tol),
                Mode::Numeric => pfaffian_report(numeric(&m), cli.tol),
            }
        }
        Command::BvCohomology { matrix, truncation } => {
            let m = load_matrix(matrix)?;
            match cli.mode {
                Mode::Exact => bv_report(m, *truncation, cli.tol),
                Mode::Numeric => bv_report(numeric(&m), *truncation, cli.tol),
            }
        }
        Command::HplCheck { input } => {
            let input: HplInput = serde_json::from_str(&read(input)?).map_err(|e| CliError::Input(e.to_string()))?;
            let (r, delta) = input.parse()?;
            match cli.mode {
                Mode::Exact => Ok(hpl_report(&r, &delta, cli.tol)),
                Mode::Numeric => Ok(hpl_report(&to_numeric(&r), &delta.map_scalars(|q| q.to_complex()), cli.tol)),
            }
        }
        Command::DetBundle { family, emit_plot } => {
            let cfg = FamilyConfig::from_json(&read(family)?)?;
            let plot = match (emit_plot, &cli.out) {
                (None, _) => None,
                (Some(_), Some(out)) => Some(out.with_extension("csv")),
                (Some(_), None) => return Err(CliError::Input("--emit-plot needs --out".into())),
            };
            det_bundle_report(&cfg, plot.as_deref(), cli.tol)
        }
        Command::VerifyAll => {
            let report = run_all(cli.seed)?;
            let passed = report.passed;
            Ok(Outcome { report: serde_json::to_value(&report).expect("report serializes"), passed })
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Rows of numbers or `"p/q"` strings, given inline or as a file path.
fn load_matrix(arg: &str) -> Result<Matrix<Rational>, CliError> {
    let text = if arg.trim_start().starts_with('[') { arg.to_string() } else { read(Path::new(arg))? };
    let rows: Vec<Vec<Value>> = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("matrix: {e}")))?;
    let parsed = rows
        .iter()
        .map(|row| row.iter().map(rational_from_json).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let n = parsed.len();
    if parsed.iter().any(|r| r.len() != n) {
        return Err(CliError::Input(format!("matrix must be square, got {n} rows of lengths {:?}", parsed.iter().map(Vec::len).collect::<Vec<_>>())));
    }
    Ok(Matrix::from_rows(parsed))
}

fn numeric(m: &Matrix<Rational>) -> Matrix<Complex64> {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].to_complex())
}

fn mode_name<S: Scalar>() -> &'static str {
    if S::EXACT {
        "exact"
    } else {
        "numeric"
    }
}

fn pfaffian_report<S: Scalar>(m: Matrix<S>, tol: f64) -> Result<Outcome, CliError> {
    let a = SkewForm::new(m)?;
    let pf = pfaffian(&a);
    let det = a.matrix().det();
    let (ok, r) = agrees(&(pf.clone() * pf.clone()), &det, tol * det.to_complex().norm().max(1.0));
    let report = json!({ "mode": mode_name::<S>(), "n": a.dim(), "pf": pf.to_repr(), "det": det.to_repr() });
    Ok(Outcome::from_checks(report, vec![check("pfaffian_squared_equals_determinant", ok, r, "")]))
}

fn degrees(dims: &std::collections::BTreeMap<i32, usize>) -> Value {
    dims.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>().into()
}

/// Axioms of `r`, in degrees above `floor` when given.
fn retraction_summary<S: Scalar>(name: &str, r: &Retraction<S>, tol: f64, floor: Option<i32>, checks: &mut Vec<Check>) -> Value {
    let mut rep = verify_retraction(r, tol);
    if let Some(f) = floor {
        rep.checks.retain(|c| c.degree > f);
    }
    let mut detail: Vec<String> = rep.failures().iter().map(|c| format!("{} in degree {}", c.axiom, c.degree)).collect();
    if let Some(f) = floor {
        detail.push(format!("checked above degree {f}"));
    }
    checks.push(check(&format!("{name}_retraction_axioms"), rep.passed(), rep.max_residual(), detail.join(", ")));
    json!({ "max_residual": rep.max_residual(), "passed": rep.passed(), "exempt": rep.exempt, "above_degree": floor })
}

fn bv_report<S: Scalar>(m: Matrix<S>, truncation: usize, tol: f64) -> Result<Outcome, CliError> {
    let a = SkewForm::new(m)?;
    let n = a.dim();
    let mut cohomology = serde_json::Map::new();
    let mut quantum_dims = Default::default();
    for (name, v) in [("classical", Variant::Classical), ("quantum", Variant::Quantum), ("trivial_quantum", Variant::TrivialQuantum)] {
        let dims = build_bv(&a, truncation, v)?.reliable_cohomology();
        cohomology.insert(name.into(), degrees(&dims));
        if v == Variant::Quantum {
            quantum_dims = dims;
        }
    }
    let mut checks = vec![check(
        "quantum_cohomology_is_one_dimensional_in_degree_zero",
        quantum_dims.get(&0) == Some(&1) && quantum_dims.iter().all(|(&k, &v)| k == 0 || v == 0),
        0.0,
        "",
    )];
    let pf = pfaffian(&a);
    let mut report = json!({
        "mode": mode_name::<S>(),
        "n": n,
        "truncation": truncation,
        "kernel_dim": n - a.rank(),
        "pf": pf.to_repr(),
        "cohomology": cohomology,
    });
    if truncation >= n {
        let q = quantum_retraction(&a, truncation, None)?;
        let retractions = json!({
            "classical": retraction_summary("classical", &q.classical.retraction, tol, None, &mut checks),
            "perturbed": retraction_summary("perturbed", &q.perturbed, tol, Some(-(truncation as i32)), &mut checks),
            "composite": retraction_summary("composite", &q.composite, tol, None, &mut checks),
        });
        let composite = pfaffian_composite(&q, &a)?;
        let split = Splitting::new(&a, q.kernel.kernel.clone(), q.kernel.coframe.null_space())?;
        let hom = pfaffian_hom(&a, &split, &kernel_top_form(&split))?;
        let (ok, r) = agrees(&composite, &hom, tol);
        checks.push(check("composite_equals_pfaffian_hom", ok, r, ""));
        let nonzero = composite.to_complex().norm() > if S::EXACT { 0.0 } else { tol };
        checks.push(check("pfaffian_hom_nonzero", nonzero, composite.to_complex().norm(), ""));
        report["retractions"] = retractions;
        report["pfaffian_hom"] = json!(composite.to_repr());
    } else {
        report["retractions"] = Value::Null;
        report["note"] = json!(format!("retractions need truncation ≥ {n}"));
    }
    Ok(Outcome::from_checks(report, checks))
}

fn hpl_report<S: Scalar>(r: &Retraction<S>, delta: &GradedMap<S>, tol: f64) -> Outcome {
    let mut checks = Vec::new();
    let input = retraction_summary("input", r, tol, None, &mut checks);
    let side: serde_json::Map<String, Value> = r.side_conditions().iter().map(|(k, v)| ((*k).to_string(), json!(v))).collect();
    let mut report = json!({ "mode": mode_name::<S>(), "input": input, "side_conditions": side });
    match perturb(r, delta) {
        Ok(p) => {
            report["perturbed"] = retraction_summary("perturbed", &p, tol, None, &mut checks);
            let transferred = p.small.differential().sub(&r.small.differential());
            report["transferred_differential"] = serde_json::to_value(GradedMapJson::from_map(&transferred)).expect("serializes");
            report["perturbed_data"] = serde_json::to_value(RetractionJson::from_retraction(&p)).expect("serializes");
        }
        Err(e) => checks.push(check("perturbation_is_small", false, f64::NAN, e.to_string())),
    }
    Outcome::from_checks(report, checks)
}

fn det_bundle_report(cfg: &FamilyConfig, plot: Option<&Path>, tol: f64) -> Result<Outcome, CliError> {
    let family = OperatorFamily::from_config(cfg)?;
    let spectra = FamilySpectra::new(&family)?;
    let bundle = det_line_bundle(&family, &spectra, &cfg.thresholds)?;
    let mut checks = vec![check(
        "cocycle_on_triple_overlaps",
        bundle.cocycle.max_residual <= tol,
        bundle.cocycle.max_residual,
        format!("{} triple overlaps", bundle.cocycle.triple_overlaps),
    )];

    let charts: Vec<Value> = bundle
        .charts
        .iter()
        .map(|c| {
            let components: Vec<Value> = c
                .components
                .iter()
                .zip(c.component_ranks())
                .map(|(comp, (rp, rm))| json!({ "first_sample": comp[0], "size": comp.len(), "ranks": [rp, rm] }))
                .collect();
            json!({
                "threshold": c.threshold,
                "samples": c.frames.iter().filter(|f| f.is_some()).count(),
                "components": components,
                "projector_residual": c.projector_residual,
                "frame_defect": c.frame_defect,
                "rank_jumps": c.rank_jumps,
            })
        })
        .collect();
    let transitions: Vec<Value> = bundle
        .transitions
        .iter()
        .map(|t| {
            let values: Vec<Value> = t
                .values
                .iter()
                .enumerate()
                .filter_map(|(b, g)| g.map(|g| json!({ "sample": b, "re": g.re, "im": g.im })))
                .collect();
            json!({ "low": bundle.thresholds[t.low], "high": bundle.thresholds[t.high], "values": values })
        })
        .collect();

    let flow = spectral_flow(&family)?;
    let section = match det_section(&family, &spectra, &bundle) {
        Ok(s) => {
            checks.push(check("section_equivariance", s.equivariance_residual <= tol, s.equivariance_residual, ""));
            checks.push(check(
                "section_zeros_match_kernel_samples",
                s.zeros_match(),
                0.0,
                format!("{} zeros, {} kernel samples", s.zeros.len(), s.kernel_samples.len()),
            ));
            if matches!(family.grid.spec, GridSpec::Circle { .. }) {
                let ok = (s.winding.is_none() && !s.zeros.is_empty()) || s.winding == flow;
                checks.push(check(
                    "winding_equals_spectral_flow",
                    ok,
                    0.0,
                    format!("winding {:?}, spectral flow {flow:?}", s.winding),
                ));
            }
            Some(s)
        }
        Err(e @ Error::NonzeroIndex { .. }) => {
            checks.push(check("section_defined", true, 0.0, format!("no section: {e}")));
            None
        }
        Err(e) => return Err(e.into()),
    };

    if let Some(path) = plot {
        write_plot(path, &family, &spectra, section.as_ref().map(|s| s.global.as_slice()))?;
    }

    let (p, q) = family.dims();
    let report = json!({
        "samples": family.len(),
        "dims": [p, q],
        "thresholds": bundle.thresholds,
        "charts": charts,
        "transitions": transitions,
        "cocycle": bundle.cocycle,
        "min_transition_modulus": bundle.min_transition_modulus,
        "section": section.as_ref().map(|s| json!({
            "values": s.global.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "equivariance_residual": s.equivariance_residual,
            "zeros": s.zeros,
            "kernel_samples": s.kernel_samples,
            "winding": s.winding,
        })),
        "spectral_flow": flow,
    });
    Ok(Outcome::from_checks(report, checks))
}

fn write_plot(path: &Path, family: &OperatorFamily, spectra: &FamilySpectra, section: Option<&[Complex64]>) -> Result<(), CliError> {
    let fail = |e: csv::Error| CliError::Check(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record(["theta", "re_s", "im_s", "sigma_min"]).map_err(fail)?;
    for b in 0..family.len() {
        let (re, im) = section.map_or((String::new(), String::new()), |s| (s[b].re.to_string(), s[b].im.to_string()));
        w.write_record([family.grid.point(b)[0].to_string(), re, im, spectra.sigma_min[b].to_string()]).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::Check(e.to_string()))
}
