//! Randomized invariants. Each test states an identity that must hold for
//! every input in its domain; proptest hunts for counterexamples and shrinks
//! any it finds. These complement the fixed-grid checks in the acceptance
//! suite by sampling far outside the grids.

use std::collections::BTreeMap;

use proptest::prelude::*;

use primecorr::arith::{factorize, gcd, ramanujan_sum, ramanujan_sum_dft, sigma_divisors};
use primecorr::checkpoint::Checkpoint;
use primecorr::primes::{integer_kth_root, is_prime, sieve_segment, von_mangoldt_u64};
use primecorr::util::{kahan_sum, round_sig};

/// r^k with saturation above u64::MAX, so bracket checks cannot overflow.
fn pow_capped(r: u128, k: u32) -> u128 {
    let cap = u64::MAX as u128 + 1;
    let mut acc: u128 = 1;
    for _ in 0..k {
        acc = acc.saturating_mul(r);
        if acc >= cap {
            return cap;
        }
    }
    acc
}

proptest! {
    // c_q(n) is a function of gcd(n, q) alone: reducing n mod q (with the
    // residue 0 mapped back to q) or replacing n by the gcd outright leaves
    // the value unchanged, and sigma(gcd(n, q)) bounds the magnitude.
    #[test]
    fn ramanujan_sum_depends_only_on_gcd(q in 1u64..3000, n in 1u64..1_000_000_000_000u64) {
        let c = ramanujan_sum(q, n).unwrap();
        let residue = (n - 1) % q + 1;
        prop_assert_eq!(c, ramanujan_sum(q, residue).unwrap());
        let g = gcd(n, q);
        prop_assert_eq!(c, ramanujan_sum(q, g).unwrap());
        prop_assert!(c.unsigned_abs() <= sigma_divisors(g).unwrap());
    }

    #[test]
    fn ramanujan_sum_multiplicative_in_coprime_moduli(
        q1 in 1u64..500,
        q2 in 1u64..500,
        n in 1u64..1_000_000u64,
    ) {
        prop_assume!(gcd(q1, q2) == 1);
        let combined = ramanujan_sum(q1 * q2, n).unwrap();
        let split = ramanujan_sum(q1, n).unwrap() * ramanujan_sum(q2, n).unwrap();
        prop_assert_eq!(combined, split);
    }

    // For odd m and odd n: doubling the modulus flips the sign, and any
    // higher power of two kills the sum.
    #[test]
    fn even_modulus_parity_relations(
        m_half in 1u64..2000,
        n_half in 1u64..500_000u64,
    ) {
        let m = 2 * m_half - 1;
        let n = 2 * n_half - 1;
        let base = ramanujan_sum(m, n).unwrap();
        prop_assert_eq!(ramanujan_sum(2 * m, n).unwrap(), -base);
        prop_assert_eq!(ramanujan_sum(4 * m, n).unwrap(), 0);
        prop_assert_eq!(ramanujan_sum(8 * m, n).unwrap(), 0);
    }

    // The closed form matches the defining exponential sum. The DFT path
    // reduces k*n mod q before taking angles, so huge n costs no precision.
    #[test]
    fn dft_oracle_matches_closed_form(q in 1u64..400, n in 1u64..1_000_000_000_000u64) {
        let exact = ramanujan_sum(q, n).unwrap() as f64;
        let z = ramanujan_sum_dft(q, n).unwrap();
        let tol = 1e-7 * q as f64;
        prop_assert!((z.re - exact).abs() <= tol, "re {} vs {}", z.re, exact);
        prop_assert!(z.im.abs() <= tol, "im {}", z.im);
    }

    #[test]
    fn factorization_round_trips(n in 1u64..1_000_000_000_000u64) {
        let f = factorize(n, None).unwrap();
        let mut product: u64 = 1;
        let mut prev = 0u64;
        for &(p, a) in &f.factors {
            prop_assert!(p > prev, "factors out of order: {:?}", f.factors);
            prop_assert!(is_prime(p), "non-prime factor {p}");
            prop_assert!(a >= 1);
            prop_assert_eq!(f.valuation(p), a);
            for _ in 0..a {
                product *= p;
            }
            prev = p;
        }
        prop_assert_eq!(product, n);
    }

    #[test]
    fn kth_root_brackets_its_argument(n in any::<u64>(), k in 1u32..=64) {
        let r = integer_kth_root(n, k);
        prop_assert!(pow_capped(r as u128, k) <= n as u128);
        prop_assert!(pow_capped(r as u128 + 1, k) > n as u128);
    }

    // The direct prime-power test and the full factorization agree bit for
    // bit: both end in (p as f64).ln() on the same p.
    #[test]
    fn von_mangoldt_paths_agree(n in 2u64..10_000_000_000u64) {
        let fast = von_mangoldt_u64(n);
        let slow = primecorr::arith::von_mangoldt(n).unwrap();
        prop_assert_eq!(fast.to_bits(), slow.to_bits());
    }

    // Sieving [a, c) in one shot or as [a, b) then [b, c) yields the same
    // primes: segment boundaries are invisible.
    #[test]
    fn sieve_segments_split_invariantly(
        base in 100_000_000u64..1_000_000_000u64,
        w1 in 1u64..8000,
        w2 in 1u64..8000,
    ) {
        let (a, b, c) = (base, base + w1, base + w1 + w2);
        let whole: Vec<u64> = sieve_segment(a, c).unwrap().iter_primes().collect();
        let mut parts: Vec<u64> = sieve_segment(a, b).unwrap().iter_primes().collect();
        parts.extend(sieve_segment(b, c).unwrap().iter_primes());
        prop_assert_eq!(whole, parts);
    }

    // Integer-valued inputs with sums below 2^53 leave no room for rounding:
    // compensated summation must reproduce the integer total exactly.
    #[test]
    fn kahan_sum_exact_on_integers(xs in prop::collection::vec(-1_000_000i64..1_000_000i64, 0..300)) {
        let total: i64 = xs.iter().sum();
        let computed = kahan_sum(xs.iter().map(|&v| v as f64));
        prop_assert_eq!(computed, total as f64);
    }

    #[test]
    fn round_sig_stays_close_and_finite(x in prop::num::f64::NORMAL, digits in 1u32..=15) {
        let r = round_sig(x, digits);
        prop_assert!(r.is_finite(), "rounded {x} to {r}");
        let tol = 10f64.powi(1 - digits as i32) * x.abs();
        prop_assert!((r - x).abs() <= tol, "digits={digits} x={x} r={r}");
    }

    #[test]
    fn checkpoint_save_load_preserves_bits(
        job in "[a-z]{1,12}",
        keys in prop::collection::btree_map("[a-z]{1,8}", "[a-z0-9]{1,8}", 0..4),
        block_size in 1u64..1_000_000u64,
        completed in 0u64..1_000_000u64,
        count in 0u64..u64::MAX / 2,
        sum_bits in any::<u64>(),
    ) {
        let sum = f64::from_bits(sum_bits);
        prop_assume!(sum.is_finite());
        let params: BTreeMap<String, String> = keys;
        let mut ck = Checkpoint::new(&job, params.clone(), block_size);
        ck.completed_blocks = completed;
        ck.partial_count = count;
        ck.partial_sum = sum;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.ckpt");
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        prop_assert_eq!(&back.job_type, &job);
        prop_assert_eq!(&back.params, &params);
        prop_assert_eq!(back.block_size, block_size);
        prop_assert_eq!(back.completed_blocks, completed);
        prop_assert_eq!(back.partial_count, count);
        prop_assert_eq!(back.partial_sum.to_bits(), sum.to_bits());
        back.ensure_matches(&ck.job_type, &ck.params, block_size).unwrap();
    }
}
