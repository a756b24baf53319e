use pplab::acceptance::{criterion_12, run, CriterionResult};
use std::time::Instant;

#[test]
fn acceptance_criteria() {
    let mut results: Vec<CriterionResult> = Vec::new();
    for id in 1..=11 {
        let start = Instant::now();
        let r = run(id).expect("criterion id in range");
        println!("{} [{:.1} s]", r.line(), start.elapsed().as_secs_f64());
        results.push(r);
    }
    let start = Instant::now();
    let det = criterion_12(&results);
    println!("{} [{:.1} s]", det.line(), start.elapsed().as_secs_f64());
    results.push(det);
    let failed: Vec<u8> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
