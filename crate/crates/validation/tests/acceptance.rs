//! Acceptance gate: one line per criterion, non-zero exit if any fails.

use std::time::{Duration, Instant};

use bellsim_validation::CRITERIA;

fn limit_check(elapsed: Duration, limit: Option<Duration>) -> (bool, String) {
    match limit {
        Some(l) if elapsed > l => (false, format!(", over the {} s limit", l.as_secs())),
        _ => (true, String::new()),
    }
}

fn main() {
    let mut failed = 0;
    for (k, (name, run, limit)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(run);
        let elapsed = start.elapsed();
        let (in_time, time_note) = limit_check(elapsed, limit.map(Duration::from_secs));
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} ({:.2} s{time_note})",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
