//! Acceptance suite: one line per criterion. Fails on any criterion that is
//! not a documented known failure.

use fractal_hh::selftest::run_all;

fn main() {
    let results = run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let unexpected: Vec<_> = results
        .iter()
        .filter(|r| !r.pass && r.known_failure().is_none())
        .collect();
    let passed = results.iter().filter(|r| r.pass).count();
    println!(
        "acceptance: {passed}/{} criteria pass, {} unexpected failures",
        results.len(),
        unexpected.len()
    );
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
