//! Criteria 1 to 10 on the default desk-scale profile.
//!
//! One line per criterion goes to stdout (run with `--nocapture` to see it live). Every
//! comparison is exact: integer distances against integer bounds, rationals compared as
//! rationals. The only floats are the logged ratios.

use ftlabels::harness::{validate_suite, Profile, SuiteOptions};

#[test]
fn acceptance() {
    let profile = Profile::default();
    assert_eq!(profile.stretch(), 20000);
    let opts = SuiteOptions::default();
    assert_eq!((opts.graphs, opts.euler, opts.tz_graphs, opts.tz_max_n, opts.pack), (200, 1000, 20, 50, 50));

    let t = std::time::Instant::now();
    let report = validate_suite(&profile, &opts);
    println!("profile: {}", serde_json::to_string(&profile).unwrap());
    println!("tolerance: exact for every asserted check; s = {}, fast-query bound (2·s·k + 2k − 1)", profile.stretch());
    for c in &report.checks {
        println!("criterion {:>2} [{}] {}: {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let s = &report.sweep;
    println!(
        "diagnostics: {} scales with nonzero cuts, {} P-constraints, {} Q-constraints, max D/dist {:.3}",
        s.scales_with_cuts, s.p_constraints, s.q_constraints, s.max_ratio
    );
    for e in &report.errors {
        println!("error: {e}");
    }
    if let Some(f) = &s.first_failure {
        println!("first failure: {f}");
    }
    println!("elapsed: {:.1}s", t.elapsed().as_secs_f64());

    assert_eq!(report.checks.len(), 10);
    let failed: Vec<u32> = report.checks.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    assert!(report.pass, "failed criteria {failed:?}, errors {:?}", report.errors);
}
