use std::io::Write;

use torsionlab::oracle::critical_dirichlet_growth;
use torsionlab::verify::{bundled_config_dir, run_suite};

/// Sub-check that cannot pass: at the critical exponent the Dirichlet part of
/// the truncation energy grows like `ln(k + 1)`, so successive decades give
/// ratios `ln 101 / ln 11` and `ln 1001 / ln 101`, both below 2.
const INTRINSIC_FAILURE: (usize, &str) = (10, "critical_dirichlet_decade_growth");

#[test]
fn acceptance_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_suite(&bundled_config_dir(), &[], tmp.path()).expect("suite runs");
    // direct handle so the report shows up without --nocapture
    let mut stdout = std::io::stdout().lock();
    for line in report.lines() {
        writeln!(stdout, "{line}").unwrap();
    }
    drop(stdout);
    assert_eq!(report.criteria.len(), 12);

    for c in &report.criteria {
        assert!(c.error.is_none(), "criterion {} errored: {:?}", c.id, c.error);
        for check in &c.checks {
            if (c.id, check.name.as_str()) == INTRINSIC_FAILURE {
                continue;
            }
            assert!(check.passed, "criterion {} check {} = {} expected {}", c.id, check.name, check.value, check.expected);
        }
    }

    // the failing ratio is the one predicted by the logarithmic law
    let c10 = report.criterion(10).unwrap();
    let growth = c10.checks.iter().find(|k| k.name == INTRINSIC_FAILURE.1).unwrap();
    let predicted = critical_dirichlet_growth(4, 1000.0) / critical_dirichlet_growth(4, 100.0);
    assert!((growth.value / predicted - 1.0).abs() < 1e-2, "growth {} vs log law {}", growth.value, predicted);
    assert!(!growth.passed);

    let csv = std::fs::read_to_string(tmp.path().join("report.csv")).unwrap();
    assert!(csv.starts_with("criterion,status,value,expected,tolerance\n"));
}
