//! The acceptance gate: runs every numbered criterion and prints one
//! PASS/FAIL line per criterion, then fails if any criterion failed.
//!
//! Two criteria are expected to fail honestly (see README for the full
//! numerics):
//!
//! * Criterion 3 compares the twin prime constant against a reference
//!   digit string whose fourth decimal disagrees with the convergent
//!   product itself. The companion test below pins the same computation
//!   to the classical constant, demonstrating the computation rather
//!   than the tolerance is sound.
//! * Criterion 11 expects the normalized quadratic correlation at
//!   N = 10^6 to land in [3.0, 4.5]. The true value is 2.98666 (verified
//!   independently by a factorization-based brute force in-repo and by
//!   an external reimplementation): the window was derived from the
//!   count-table ratio ~3.5, which carries a finite-size correction of
//!   roughly (1 + 2/log N) that the Lambda-weighted sum does not.

use primecorr::acceptance::run_all;
use primecorr::spectral::a_k_constant_corrected;

#[test]
fn acceptance_criteria() {
    let outcomes = run_all();
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<String> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.to_string())
        .collect();
    assert!(
        failed.is_empty(),
        "{} of {} criteria failed:\n{}",
        failed.len(),
        outcomes.len(),
        failed.join("\n")
    );
}

/// The corrected product at P = 10^8 lands on the classical twin prime
/// constant 2 * 0.6601618158... to within 1e-9. The acceptance criterion
/// above runs the identical computation against the embedded reference
/// string 1.32058148001344 and reports the 2.6e-4 gap as a failure; this
/// test is the evidence that the product converges to the mathematically
/// correct value.
#[test]
fn twin_prime_constant_matches_classical_value() {
    let e = a_k_constant_corrected(1, 100_000_000).unwrap();
    let classical = 1.320_323_631_693_739;
    assert!(
        (e.value - classical).abs() <= 1e-9,
        "computed {:.15}, classical {classical:.15}",
        e.value
    );
}
