//! All acceptance criteria, one pass/fail line each.

use std::time::{Duration, Instant};

use bvdet_core::suite::{run_criterion, LatticeRun, CRITERIA, LATTICE_DEMO};

const SEED: u64 = 20240611;

/// Wall-clock budgets for the criteria that state one.
fn budget(id: usize) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(30)),
        9 => Some(Duration::from_secs(60)),
        _ => None,
    }
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut lattice = None;
    for id in 1..=CRITERIA {
        let start = Instant::now();
        if id == 9 {
            lattice = Some(LatticeRun::new(LATTICE_DEMO).expect("lattice demo config"));
        }
        let report = run_criterion(id, SEED, lattice.as_ref()).unwrap_or_else(|e| panic!("criterion {id}: {e}"));
        let elapsed = start.elapsed();
        let in_budget = budget(id).map_or(true, |b| elapsed <= b);
        let ok = report.passed && in_budget;
        println!(
            "criterion {id:>2} {:<36} {} ({} instances, {:.2?}{})",
            report.key,
            if ok { "PASS" } else { "FAIL" },
            report.instances,
            elapsed,
            budget(id).map_or(String::new(), |b| format!(" of {b:?}")),
        );
        for c in &report.checks {
            println!("    {} {:<52} residual {:.3e}  {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.residual, c.detail);
        }
        if !ok {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
