//! One PASS/FAIL line per acceptance criterion.

use std::collections::BTreeMap;
use std::time::Instant;

use boolclone::definability::qfpp_definable;
use boolclone::families::{catalog_entry, r02, LAMBDA_FAMILY, LE_FAMILY};
use boolclone::intervals::compute_interval;
use boolclone::verify::{run_checks, Section, Verdict};
use boolclone::Budget;

/// Wall-clock limits in milliseconds, by criterion.
const LIMITS_MS: [(u8, u128); 9] = [
    (1, 1_000),
    (2, 1_000),
    (3, 60_000),
    (4, 300_000),
    (5, 900_000),
    (6, 900_000),
    (7, 1_200_000),
    (8, 120_000),
    (9, 1_000),
];

/// Recomputes a few headline numbers without going through the check registry.
fn direct_checks(budget: &Budget) -> BTreeMap<u8, Vec<String>> {
    let mut failures: BTreeMap<u8, Vec<String>> = BTreeMap::new();
    for (key, family, up, exact) in [
        ("MT0T1", &LE_FAMILY, 25, 13),
        ("ST0T1", &LAMBDA_FAMILY, 33, 25),
    ] {
        let c = catalog_entry(key).unwrap();
        let r = compute_interval(&c, family, budget).unwrap();
        if (r.up_count, r.exact_count) != (up, exact)
            || r.report.export_dot().matches("[label=").count() != up
        {
            failures
                .entry(7)
                .or_default()
                .push(format!("{key}: {} / {}", r.up_count, r.exact_count));
        }
    }
    let (a, b) = (r02(3).unwrap(), r02(5).unwrap());
    let start = Instant::now();
    let v = qfpp_definable(&a, &[b], budget).unwrap();
    let ms = start.elapsed().as_millis();
    if v.definable || ms > 900_000 {
        failures.entry(5).or_default().push(format!(
            "R02_3 from R02_5: definable {}, {ms} ms",
            v.definable
        ));
    }
    failures
}

fn main() {
    let budget = Budget::default();
    let report = run_checks(&Section::ALL, &budget, true);
    let direct = direct_checks(&budget);
    let mut all_ok = true;
    for (crit, limit) in LIMITS_MS {
        let checks: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.criterion == crit)
            .collect();
        let mut ms: u128 = checks.iter().map(|c| c.runtime_ms.unwrap_or(0)).sum();
        if crit == 5 || crit == 6 {
            ms = report
                .checks
                .iter()
                .filter(|c| c.criterion == 5 || c.criterion == 6)
                .map(|c| c.runtime_ms.unwrap_or(0))
                .sum();
        }
        let mut problems: Vec<String> = checks
            .iter()
            .filter(|c| c.verdict != Verdict::Pass)
            .map(|c| format!("{} {:?}: {}", c.id, c.verdict, c.detail))
            .collect();
        if checks.is_empty() {
            problems.push("no checks registered".into());
        }
        if ms > limit {
            problems.push(format!("{ms} ms exceeds {limit} ms"));
        }
        problems.extend(direct.get(&crit).cloned().unwrap_or_default());
        let ids: Vec<&str> = checks.iter().map(|c| c.id).collect();
        if problems.is_empty() {
            println!("PASS criterion {crit} ({} ms): {}", ms, ids.join(", "));
        } else {
            all_ok = false;
            println!("FAIL criterion {crit} ({} ms): {}", ms, problems.join("; "));
        }
    }
    if !all_ok {
        eprintln!("some acceptance criteria failed");
        std::process::exit(1);
    }
}
