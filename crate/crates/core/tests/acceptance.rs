//! Reference checklist: one line per criterion.
//!
//! Runs without the test harness so the lines are always printed:
//! `cargo test -p bargain-core --test acceptance`.

use bargain_core::rational::q;
use bargain_core::reproduce::{criterion_ids, run_criterion, Expectations};

/// Criteria that cannot hold as stated. The computed value is pinned instead
/// so that any change in behavior is still caught.
const KNOWN_FAILURES: [(&str, &str); 1] =
    [("partial-value", "the stated 55/72 does not follow from its own inputs: 1/3 * 13/24 + 2/3 * 11/12 = 57/72")];

fn main() {
    let pinned = known_failure_is_pinned();
    if !pinned {
        println!("FAIL partial-value is no longer 57/72");
    }
    let exp = Expectations::default();
    let mut unexpected = Vec::new();
    for id in criterion_ids() {
        let r = run_criterion(id, &exp).expect("listed criterion");
        let in_time = r.within_budget();
        let ok = r.pass && in_time;
        let budget = r.budget_seconds.map_or(String::new(), |b| format!(" budget {b:.0}s"));
        println!("{} {id} ({:.2}s{budget}): {}", if ok { "PASS" } else { "FAIL" }, r.seconds, r.title);
        for c in r.failures() {
            println!("     {}: computed {} expected {}", c.name, c.computed, c.expected);
        }
        if !in_time {
            println!("     runtime over budget");
        }
        match KNOWN_FAILURES.iter().find(|(k, _)| *k == id) {
            Some((_, why)) => {
                println!("     known: {why}");
                assert!(!r.pass, "{id} now passes; drop it from KNOWN_FAILURES");
            }
            None if !ok => unexpected.push(id),
            None => {}
        }
    }
    if !unexpected.is_empty() || !pinned {
        eprintln!("failing criteria: {unexpected:?}");
        std::process::exit(1);
    }
}

fn known_failure_is_pinned() -> bool {
    let sol = bargain_core::spe::solve(&bargain_core::presets::treatment("3-partial").unwrap()).unwrap();
    let v = bargain_core::spe::predicted_first_share(&sol, bargain_core::spe::Condition::Unconditional).unwrap();
    v == q(57, 72)
}
