//! Acceptance suite: one PASS/FAIL line per criterion with its runtime
//! against a pinned limit. Exits non-zero when any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

#[path = "../common/mod.rs"]
mod common;
#[path = "../../../core/tests/support/report_oracle.rs"]
mod report_oracle;

mod checks;

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion { name: "merge arithmetic", limit: Duration::from_secs(5), run: checks::merge_arithmetic },
    Criterion { name: "fifth assignment", limit: Duration::from_secs(5), run: checks::fifth_assignment },
    Criterion { name: "affinity", limit: Duration::from_secs(5), run: checks::affinity },
    Criterion { name: "lda", limit: Duration::from_secs(60), run: checks::lda },
    Criterion { name: "relevance, jsd and mds", limit: Duration::from_secs(30), run: checks::relevance_maps },
    Criterion { name: "reports oracle", limit: Duration::from_secs(10), run: checks::reports_oracle },
    Criterion { name: "decision tree and log replay", limit: Duration::from_secs(10), run: checks::decision_tree },
    Criterion { name: "end-to-end pipeline", limit: Duration::from_secs(120), run: checks::end_to_end },
];

fn main() -> ExitCode {
    // failures are reported on the result line, not as panic backtraces
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in CRITERIA {
        let started = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panicked".into());
                Err(msg)
            });
        let elapsed = started.elapsed();
        let result = match result {
            Ok(detail) if elapsed > c.limit => Err(format!("too slow; {detail}")),
            other => other,
        };
        let (status, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(result.is_err());
        println!(
            "{status} {:<30} {:>7.2}s / {:>3}s  {detail}",
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
