//! Release gate: runs every acceptance criterion and prints one pass/fail
//! line per criterion. Run with `cargo test --test acceptance -- --nocapture`
//! to see the table.

#[test]
fn acceptance_suite() {
    let results = halfline::verify::run_all(0xACCE97);
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
    assert!(
        failed.is_empty(),
        "{} acceptance criteria failed:\n{}",
        failed.len(),
        failed
            .iter()
            .map(|r| r.line())
            .collect::<Vec<_>>()
            .join("\n")
    );
}
