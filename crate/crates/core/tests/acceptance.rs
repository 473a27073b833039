//! The twelve acceptance criteria at their stated sizes and tolerances.
//!
//! Each criterion prints one `criterion N PASS|FAIL ...` line straight to
//! stdout, so the verdicts show up even without `--nocapture`.

use std::io::Write;
use std::sync::OnceLock;

use fpp_core::acceptance::{CriterionReport, Profile, Suite, CRITERIA, DEFAULT_SEED};
use fpp_core::stats::{ks_critical_one_sample, normal_cdf};

fn suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| Suite::new(Profile::Quick, DEFAULT_SEED))
}

/// Runs a criterion once per process and prints its verdict line.
fn report(id: u8) -> &'static CriterionReport {
    static DONE: [OnceLock<CriterionReport>; CRITERIA] = [const { OnceLock::new() }; CRITERIA];
    DONE[id as usize - 1].get_or_init(|| {
        let report = suite()
            .run(id)
            .unwrap_or_else(|e| panic!("criterion {id} errored: {e}"));
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{}  [{:.1}s]", report.line(), report.wall_seconds);
        for note in &report.notes {
            let _ = writeln!(out, "    note: {note}");
        }
        let _ = out.flush();
        report
    })
}

fn criterion(id: u8) {
    let report = report(id);
    assert!(report.passed, "{report}");
}

/// KS distance between the exact law of `(H - log n) / sqrt(log n)` and N(0,1),
/// where `H` is the depth of a uniform non-root vertex of a random recursive
/// tree on `n` vertices (the shape of the smallest-weight tree).
fn exact_hopcount_ks(n: usize) -> f64 {
    // depth of vertex k is a sum of independent Bernoulli(1/j), j < k
    let mut depth = vec![1.0];
    let mut mixture = vec![0.0; n];
    for k in 2..=n {
        let p = 1.0 / (k - 1) as f64;
        let mut next = vec![0.0; depth.len() + 1];
        for (d, &v) in depth.iter().enumerate() {
            next[d] += v * (1.0 - p);
            next[d + 1] += v * p;
        }
        while next.len() > 1 && *next.last().unwrap() < 1e-300 {
            next.pop();
        }
        depth = next;
        for (d, &v) in depth.iter().enumerate() {
            mixture[d] += v / (n - 1) as f64;
        }
    }
    let log_n = (n as f64).ln();
    let mut cdf = 0.0;
    let mut ks: f64 = 0.0;
    for (h, &mass) in mixture.iter().enumerate() {
        let phi = normal_cdf((h as f64 - log_n) / log_n.sqrt());
        ks = ks.max((phi - cdf).abs());
        cdf += mass;
        ks = ks.max((phi - cdf).abs());
    }
    ks
}

#[test]
fn criterion_01_expected_slow_count() {
    criterion(1);
}

#[test]
fn criterion_02_tree_vs_reference() {
    criterion(2);
}

#[test]
fn criterion_03_set_distance_law() {
    criterion(3);
}

#[test]
fn criterion_04_two_point() {
    criterion(4);
}

#[test]
fn criterion_05_flooding() {
    criterion(5);
}

#[test]
fn criterion_06_poisson_slow_vertices() {
    criterion(6);
}

#[test]
fn criterion_07_diameter_limit() {
    criterion(7);
}

#[test]
fn criterion_08_q_xi_duality() {
    criterion(8);
}

#[test]
fn criterion_09_xi_alpha_convergence() {
    criterion(9);
}

#[test]
fn criterion_10_bad_pairs() {
    criterion(10);
}

#[test]
#[ignore = "unattainable at n=5000: the exact finite-n KS distance to N(0,1) is 0.150 > 0.10"]
fn criterion_11_hopcount_clt() {
    criterion(11);
}

/// Criterion 11 fails for a correct simulator; this pins the measured
/// statistic to the exact finite-n value instead.
#[test]
fn criterion_11_hopcount_matches_exact_finite_n_law() {
    let report = report(11);
    let exact = exact_hopcount_ks(5000);
    assert!((exact - 0.150).abs() < 1e-3, "exact {exact}");
    let measured = report.checks[0].value;
    assert!(
        (measured - exact).abs() <= ks_critical_one_sample(2000, 0.01),
        "measured {measured}, exact {exact}"
    );
    assert!(report.checks[1].passed, "{report}");
}

#[test]
fn criterion_12_moment_stability() {
    criterion(12);
}
