//! Runs every acceptance criterion once with the default seed and prints the
//! pass/fail matrix.

use qeilab_cli::acceptance::{run_acceptance, AcceptanceConfig};

#[test]
fn acceptance_suite() {
    let report = run_acceptance(&AcceptanceConfig::default()).expect("default selection is valid");
    for line in report.matrix() {
        println!("{line}");
    }
    for c in report.criteria.iter().filter(|c| !c.pass) {
        println!("criterion {} details: {}", c.id, serde_json::to_string_pretty(c).unwrap());
    }
    let mut timings: Vec<_> = report.timings.iter().collect();
    timings.sort_by(|a, b| a.0.cmp(b.0));
    for (k, v) in timings {
        println!("timing {k}: {v:.2} s");
    }
    assert_eq!(report.criteria.len(), 14);
    assert!(report.pass, "acceptance suite has failing criteria");
}
