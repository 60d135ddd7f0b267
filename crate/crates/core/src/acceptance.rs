//! The acceptance gate: twelve numbered checks covering the reference
//! table, the constants, the exact identity suites, the spectral and series
//! consistency bands, the correlation sanity ranges, and determinism.
//! Each check returns an outcome with a one-line detail; nothing here
//! weakens a tolerance to force a pass (see README for the one documented
//! reference-value discrepancy).

use std::sync::atomic::AtomicBool;
use std::time::Instant;

use rayon::ThreadPoolBuilder;

use crate::arith::{
    build_mu_phi_table, euler_phi, factorize, gcd, ramanujan_sum, ramanujan_sum_dft,
};
use crate::experiments::{
    count_quadratic_twins, linear_correlation, linear_correlation_job, quadratic_correlation,
    quadratic_correlation_job, JobControl, DEFAULT_BLOCK_SIZE, REFERENCE_TABLE,
};
use crate::series::{
    a_factor, b_factor, euler_product_f, f_truncated, lambda_approximation_error, zeta_real,
    zeta_truncation_compensation, SeriesParams,
};
use crate::spectral::{
    a_k_constant_corrected, f_sigma_product, orthogonality_empirical, v_p_bruteforce,
    v_p_formula, wk_empirical, wk_spectrum_truncated, A2_REFERENCE,
};

#[derive(Debug, Clone, serde::Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {} :: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn outcome(id: u32, name: &'static str, passed: bool, detail: String) -> CriterionOutcome {
    CriterionOutcome {
        id,
        name,
        passed,
        detail,
    }
}

/// Criteria 1 and 2 share one pass over the reference table: exact counts,
/// then recomputed ratios against the printed column to 4 decimals.
fn criteria_reference_table() -> (CriterionOutcome, CriterionOutcome) {
    let start = Instant::now();
    let mut count_bad = Vec::new();
    let mut ratio_bad = Vec::new();
    let mut failure = None;
    for &(x, want_count, want_ratio) in &REFERENCE_TABLE {
        match count_quadratic_twins(x) {
            Ok(row) => {
                if row.count != want_count {
                    count_bad.push(format!("x=10^{}: {} != {}", x.ilog10(), row.count, want_count));
                }
                let want: f64 = want_ratio.parse().expect("reference ratio literal");
                if (row.ratio - want).abs() >= 5e-5 {
                    ratio_bad.push(format!(
                        "x=10^{}: {:.5} != {}",
                        x.ilog10(),
                        row.ratio,
                        want_ratio
                    ));
                }
            }
            Err(e) => failure = Some(e.to_string()),
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    if let Some(e) = failure {
        return (
            outcome(1, "quadratic twin counts match reference table", false, e.clone()),
            outcome(2, "ratio column matches reference", false, e),
        );
    }
    let c1 = outcome(
        1,
        "quadratic twin counts match reference table",
        count_bad.is_empty(),
        if count_bad.is_empty() {
            format!("all 10 rows exact, {elapsed:.1}s for the full table")
        } else {
            count_bad.join("; ")
        },
    );
    let c2 = outcome(
        2,
        "ratio column matches reference",
        ratio_bad.is_empty(),
        if ratio_bad.is_empty() {
            "all 10 recomputed ratios within 5e-5 of printed values (log^2 normalization)"
                .to_string()
        } else {
            ratio_bad.join("; ")
        },
    );
    (c1, c2)
}

fn criterion_twin_constant() -> CriterionOutcome {
    let name = "twin prime constant matches reference value";
    let start = Instant::now();
    match a_k_constant_corrected(1, 100_000_000) {
        Ok(e) => {
            let elapsed = start.elapsed().as_secs_f64();
            let diff = (e.value - A2_REFERENCE).abs();
            outcome(
                3,
                name,
                diff <= 1e-9 && elapsed <= 60.0,
                format!(
                    "computed {:.15} at P=10^8 (corrected), reference {A2_REFERENCE}, \
                     |diff| {diff:.3e}, {elapsed:.1}s",
                    e.value
                ),
            )
        }
        Err(e) => outcome(3, name, false, e.to_string()),
    }
}

fn criterion_v_p() -> CriterionOutcome {
    let name = "v_p residue formula equals exhaustive scan";
    let start = Instant::now();
    let mut checked = 0u64;
    for p in crate::primes::primes_up_to(10_000) {
        if p < 5 {
            continue;
        }
        let a = v_p_formula(p).expect("prime >= 5");
        let b = v_p_bruteforce(p).expect("within scan cap");
        if a != b {
            return outcome(4, name, false, format!("p={p}: formula {a}, scan {b}"));
        }
        checked += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    outcome(
        4,
        name,
        elapsed <= 5.0,
        format!("{checked} primes in [5, 10^4] agree, {elapsed:.2}s"),
    )
}

fn criterion_identity_suite() -> CriterionOutcome {
    let name = "ramanujan sum identity suite";
    let table = match build_mu_phi_table(40_000) {
        Ok(t) => t,
        Err(e) => return outcome(5, name, false, e.to_string()),
    };
    let mut bad = Vec::new();

    // mu agreement on coprime arguments, q, n <= 500.
    'mu: for q in 1..=500u64 {
        for n in 1..=500u64 {
            if gcd(n, q) == 1 && table.ramanujan(q, n) != table.mu(q) {
                bad.push(format!("mu identity fails at q={q}, n={n}"));
                break 'mu;
            }
        }
    }

    // Divisor-sum form, q, n <= 500.
    'divsum: for q in 1..=500u64 {
        for n in 1..=500u64 {
            let g = gcd(n, q);
            let mut sum = 0i64;
            let mut d = 1u64;
            while d * d <= g {
                if g % d == 0 {
                    sum += table.mu(q / d) * d as i64;
                    let e = g / d;
                    if e != d {
                        sum += table.mu(q / e) * e as i64;
                    }
                }
                d += 1;
            }
            if table.ramanujan(q, n) != sum {
                bad.push(format!("divisor-sum form fails at q={q}, n={n}"));
                break 'divsum;
            }
        }
    }

    // Multiplicativity over coprime moduli up to 200, n <= 200.
    'mult: for q1 in 1..=200u64 {
        for q2 in 1..=200u64 {
            if gcd(q1, q2) != 1 {
                continue;
            }
            for n in 1..=200u64 {
                if table.ramanujan(q1 * q2, n) != table.ramanujan(q1, n) * table.ramanujan(q2, n)
                {
                    bad.push(format!("multiplicativity fails at q1={q1}, q2={q2}, n={n}"));
                    break 'mult;
                }
            }
        }
    }

    // Parity identities for odd m, n <= 301.
    'parity: for m in (1..=301u64).step_by(2) {
        for n in (1..=301u64).step_by(2) {
            if table.ramanujan(2 * m, n) != -table.ramanujan(m, n) {
                bad.push(format!("c_2m = -c_m fails at m={m}, n={n}"));
                break 'parity;
            }
            if table.ramanujan(4 * m, n) != 0 || table.ramanujan(8 * m, n) != 0 {
                bad.push(format!("c_(2^v m) = 0 fails at m={m}, n={n}"));
                break 'parity;
            }
        }
    }

    // Prime-power trichotomy, p <= 31, v <= 4, n <= 2000.
    'tri: for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        for v in 1..=4u32 {
            let q = p.pow(v);
            for n in 1..=2000u64 {
                let mut a = 0u32;
                let mut t = n;
                while t % p == 0 {
                    a += 1;
                    t /= p;
                }
                let expect = if a >= v {
                    (p.pow(v - 1) * (p - 1)) as i64
                } else if a + 1 == v {
                    -(p.pow(v - 1) as i64)
                } else {
                    0
                };
                match ramanujan_sum(q, n) {
                    Ok(c) if c == expect => {}
                    other => {
                        bad.push(format!("trichotomy fails at p={p}, v={v}, n={n}: {other:?}"));
                        break 'tri;
                    }
                }
            }
        }
    }

    // Bound |c_q(n)| <= sigma(gcd(n, q)), q, n <= 1000.
    let mut sigma_table = vec![0u64; 1001];
    for d in 1..=1000u64 {
        let mut k = d;
        while k <= 1000 {
            sigma_table[k as usize] += d;
            k += d;
        }
    }
    'bound: for q in 1..=1000u64 {
        for n in 1..=1000u64 {
            let c = table.ramanujan(q, n);
            if c.unsigned_abs() > sigma_table[gcd(n, q) as usize] {
                bad.push(format!("sigma bound fails at q={q}, n={n}"));
                break 'bound;
            }
        }
    }

    // Exponential-sum oracle, q, n <= 300.
    'dft: for q in 1..=300u64 {
        for n in 1..=300u64 {
            let c = table.ramanujan(q, n);
            match ramanujan_sum_dft(q, n) {
                Ok(z) => {
                    if z.im.abs() >= 1e-6 || (z.re - c as f64).abs() >= 1e-6 {
                        bad.push(format!(
                            "exponential-sum oracle fails at q={q}, n={n}: {z}"
                        ));
                        break 'dft;
                    }
                }
                Err(e) => {
                    bad.push(format!("oracle error at q={q}, n={n}: {e}"));
                    break 'dft;
                }
            }
        }
    }

    outcome(
        5,
        name,
        bad.is_empty(),
        if bad.is_empty() {
            "mu agreement, divisor-sum form, multiplicativity, parity, trichotomy, \
             sigma bound, and exponential-sum oracle all exact on their grids"
                .to_string()
        } else {
            bad.join("; ")
        },
    )
}

fn criterion_orthogonality() -> CriterionOutcome {
    let name = "orthogonality on full periods";
    for q in 1..=30u64 {
        for r in 1..=30u64 {
            let l = q / gcd(q, r) * r;
            let x = l * 1000;
            let expect = if q == r {
                euler_phi(q).expect("phi") as f64
            } else {
                0.0
            };
            match orthogonality_empirical(q, r, x) {
                Ok(v) if v == expect => {}
                Ok(v) => {
                    return outcome(
                        6,
                        name,
                        false,
                        format!("q={q}, r={r}: mean {v}, expected {expect}"),
                    )
                }
                Err(e) => return outcome(6, name, false, e.to_string()),
            }
        }
    }
    outcome(
        6,
        name,
        true,
        "all q, r <= 30 give exactly phi(q) on the diagonal and 0 off it".to_string(),
    )
}

fn criterion_wk_finite() -> CriterionOutcome {
    let name = "finite wiener-khintchine check";
    let mut details = Vec::new();
    let mut passed = true;
    for m in 1..=4u64 {
        let emp = match wk_empirical(m, 1.5, 30, 1_000_000) {
            Ok(v) => v,
            Err(e) => return outcome(7, name, false, e.to_string()),
        };
        let spec = match wk_spectrum_truncated(m, 1.5, 30) {
            Ok(s) => s.value,
            Err(e) => return outcome(7, name, false, e.to_string()),
        };
        let gap = (emp - spec).abs();
        if gap > 1e-3 {
            passed = false;
        }
        details.push(format!("m={m}: |{emp:.6} - {spec:.6}| = {gap:.2e}"));
    }
    outcome(7, name, passed, details.join("; "))
}

fn criterion_three_forms() -> CriterionOutcome {
    let name = "series/product/factorization consistency";
    let cutoff = 100_000u64;
    let zeta_terms = 200_000u64;
    let mut worst_rel: f64 = 0.0;
    let mut worst_gap_ratio: f64 = 0.0;
    for n in [2u64, 3, 4, 6, 12, 30] {
        for sigma in [1.5f64, 2.0, 3.0] {
            let params = match SeriesParams::real(n, sigma) {
                Ok(p) => p,
                Err(e) => return outcome(8, name, false, e.to_string()),
            };
            let sum_form = match f_truncated(&params, cutoff) {
                Ok(v) => v,
                Err(e) => return outcome(8, name, false, e.to_string()),
            };
            let product_form = match euler_product_f(&params, cutoff) {
                Ok(v) => v,
                Err(e) => return outcome(8, name, false, e.to_string()),
            };
            // Raw truncations agree within their computed tail bounds.
            let gap = (sum_form.value - product_form.value).norm();
            let allowed = sum_form.tail_bound + product_form.tail_bound;
            if gap > allowed {
                return outcome(
                    8,
                    name,
                    false,
                    format!("n={n}, sigma={sigma}: gap {gap:.3e} exceeds tails {allowed:.3e}"),
                );
            }
            worst_gap_ratio = worst_gap_ratio.max(gap / allowed);
            // The factorization identity at matched cutoffs: the product
            // times zeta's truncation compensation equals zeta * A * B_P to
            // roundoff (both sides carry the same omitted primes).
            let lhs = product_form.value.re
                * match zeta_truncation_compensation(sigma, cutoff, zeta_terms) {
                    Ok(v) => v,
                    Err(e) => return outcome(8, name, false, e.to_string()),
                };
            let zeta = match zeta_real(sigma, zeta_terms) {
                Ok(v) => v,
                Err(e) => return outcome(8, name, false, e.to_string()),
            };
            let a = match a_factor(n, params.s) {
                Ok(v) => v.re,
                Err(e) => return outcome(8, name, false, e.to_string()),
            };
            let b = match b_factor(params.s, cutoff) {
                Ok(v) => v.re,
                Err(e) => return outcome(8, name, false, e.to_string()),
            };
            let rhs = zeta * a * b;
            let rel = (lhs - rhs).abs() / rhs.abs();
            worst_rel = worst_rel.max(rel);
            if rel > 1e-6 {
                return outcome(
                    8,
                    name,
                    false,
                    format!("n={n}, sigma={sigma}: factorization deviation {rel:.3e} > 1e-6"),
                );
            }
        }
    }
    outcome(
        8,
        name,
        true,
        format!(
            "18 (n, sigma) cases: raw gaps within tails (worst fill {worst_gap_ratio:.2}), \
             factorization identity worst relative deviation {worst_rel:.2e}"
        ),
    )
}

fn criterion_lambda_approx() -> CriterionOutcome {
    let name = "lambda approximation near s=1";
    let mut worst: f64 = 0.0;
    let mut cases = 0u32;
    for n in 2..=100u64 {
        let omega = match factorize(n, None) {
            Ok(f) => f.omega(),
            Err(e) => return outcome(9, name, false, e.to_string()),
        };
        let is_target = (omega == 1 && crate::primes::is_prime(n)) || omega == 2;
        if !is_target {
            continue;
        }
        for s in [1.0 - 1e-3, 1.0 + 1e-3] {
            match lambda_approximation_error(n, s) {
                Ok(err) => {
                    worst = worst.max(err);
                    cases += 1;
                    if err > 0.02 {
                        return outcome(
                            9,
                            name,
                            false,
                            format!("n={n}, s={s}: error {err:.4} > 0.02"),
                        );
                    }
                }
                Err(e) => return outcome(9, name, false, e.to_string()),
            }
        }
    }
    outcome(
        9,
        name,
        true,
        format!("{cases} cases (primes and two-factor n <= 100), worst error {worst:.4}"),
    )
}

fn criterion_linear_sanity() -> CriterionOutcome {
    let name = "linear twin correlation sanity";
    let start = Instant::now();
    let a2 = match a_k_constant_corrected(1, 1_000_000) {
        Ok(e) => e.value,
        Err(e) => return outcome(10, name, false, e.to_string()),
    };
    let rec = match linear_correlation(10_000_000, 2) {
        Ok(r) => r,
        Err(e) => return outcome(10, name, false, e.to_string()),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let ratio = rec.weighted_sum / (a2 * 1e7);
    let odd = match linear_correlation(1_000_000, 3) {
        Ok(r) => r,
        Err(e) => return outcome(10, name, false, e.to_string()),
    };
    let l = (1e6f64).ln();
    let odd_cap = 50.0 * l * l;
    let passed =
        (0.9..=1.1).contains(&ratio) && elapsed <= 60.0 && odd.weighted_sum <= odd_cap;
    outcome(
        10,
        name,
        passed,
        format!(
            "sum(m=2, 10^7)/(A_2 * 10^7) = {ratio:.4} in [0.9, 1.1], {elapsed:.1}s; \
             odd shift m=3 at 10^6: {:.1} <= {odd_cap:.0}",
            odd.weighted_sum
        ),
    )
}

fn criterion_quadratic_consistency() -> CriterionOutcome {
    let name = "quadratic correlation consistency";
    let rec = match quadratic_correlation(1_000_000) {
        Ok(r) => r,
        Err(e) => return outcome(11, name, false, e.to_string()),
    };
    // Independent brute force at N = 10^4 through factorization.
    let lambda_slow = |n: u64| -> f64 {
        let f = factorize(n, None).expect("factorize");
        if f.factors.len() == 1 {
            (f.factors[0].0 as f64).ln()
        } else {
            0.0
        }
    };
    let mut brute = crate::util::KahanSum::new();
    for n in 1..=10_000u64 {
        brute.add(lambda_slow(n * n + 1) * lambda_slow(n * n + 3));
    }
    let small = match quadratic_correlation(10_000) {
        Ok(r) => r,
        Err(e) => return outcome(11, name, false, e.to_string()),
    };
    let brute_gap = (small.weighted_sum - brute.value()).abs();
    let in_window = (3.0..=4.5).contains(&rec.normalized);
    let passed = in_window && rec.normalized > 0.5 && brute_gap <= 1e-9;
    outcome(
        11,
        name,
        passed,
        format!(
            "sum/N at 10^6 = {:.5}, {} window [3.0, 4.5], exceeds 1/2; brute-force gap at 10^4 = {brute_gap:.2e}",
            rec.normalized,
            if in_window { "inside" } else { "OUTSIDE" },
        ),
    )
}

fn criterion_determinism() -> CriterionOutcome {
    let name = "determinism across threads and checkpoints";
    let run_once = || -> crate::error::Result<(u64, u64, u64, u64)> {
        let twins = crate::experiments::count_quadratic_twins_job(
            1_000_000_000,
            DEFAULT_BLOCK_SIZE,
            &JobControl::default(),
        )?
        .0;
        let linear = linear_correlation_job(1_000_000, 2, 4096, &JobControl::default())?.0;
        let product = f_sigma_product(2, 1.5, 1_000_000)?;
        Ok((
            twins.count,
            twins.ratio.to_bits(),
            linear.weighted_sum.to_bits(),
            product.value.to_bits(),
        ))
    };
    let mut results = Vec::new();
    for threads in [1usize, 4, 8] {
        let pool = match ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(p) => p,
            Err(e) => return outcome(12, name, false, e.to_string()),
        };
        match pool.install(run_once) {
            Ok(r) => results.push(r),
            Err(e) => return outcome(12, name, false, e.to_string()),
        }
    }
    if results[0] != results[1] || results[0] != results[2] {
        return outcome(
            12,
            name,
            false,
            format!("thread counts 1/4/8 disagree: {results:?}"),
        );
    }
    // Interrupt/resume cycle reproduces the uninterrupted bits. This runs
    // in release binaries too (the CLI verify command), so the scratch file
    // lives in the system temp directory rather than a test fixture.
    let mut path = std::env::temp_dir();
    path.push(format!("quadratic-twins-acceptance-{}.ckpt", std::process::id()));
    let _ = std::fs::remove_file(&path);
    let direct = match quadratic_correlation_job(300_000, 500, &JobControl::default()) {
        Ok((r, _)) => r,
        Err(e) => return outcome(12, name, false, e.to_string()),
    };
    let stop = AtomicBool::new(true);
    let halted = JobControl {
        stop: Some(&stop),
        checkpoint_path: Some(&path),
    };
    match quadratic_correlation_job(300_000, 500, &halted) {
        Ok((_, finished)) => {
            if finished {
                return outcome(
                    12,
                    name,
                    false,
                    "interrupted run unexpectedly finished".to_string(),
                );
            }
        }
        Err(e) => return outcome(12, name, false, e.to_string()),
    }
    let resume = JobControl {
        stop: None,
        checkpoint_path: Some(&path),
    };
    let resume_result = quadratic_correlation_job(300_000, 500, &resume);
    let _ = std::fs::remove_file(&path);
    match resume_result {
        Ok((resumed, finished)) => {
            if !finished
                || resumed.weighted_sum.to_bits() != direct.weighted_sum.to_bits()
                || resumed.pair_count != direct.pair_count
            {
                return outcome(
                    12,
                    name,
                    false,
                    format!(
                        "resume mismatch: {} vs {}",
                        resumed.weighted_sum, direct.weighted_sum
                    ),
                );
            }
        }
        Err(e) => return outcome(12, name, false, e.to_string()),
    }
    outcome(
        12,
        name,
        true,
        "bit-identical across thread counts {1, 4, 8} and across an interrupt/resume cycle"
            .to_string(),
    )
}

pub fn run_all() -> Vec<CriterionOutcome> {
    let (c1, c2) = criteria_reference_table();
    vec![
        c1,
        c2,
        criterion_twin_constant(),
        criterion_v_p(),
        criterion_identity_suite(),
        criterion_orthogonality(),
        criterion_wk_finite(),
        criterion_three_forms(),
        criterion_lambda_approx(),
        criterion_linear_sanity(),
        criterion_quadratic_consistency(),
        criterion_determinism(),
    ]
}
