//! Ramanujan-sum spectral analysis of prime correlations.
//!
//! The crate computes, with explicit truncation bookkeeping:
//! exact Ramanujan sums c_q(n) and their identity suite; the kernel series
//! f(n, s) = sum_q mu(q) c_q(n) / (q^(s-1) phi(q)) in sum, Euler-product,
//! and zeta-factorized forms with rigorous tail bounds; Wiener-Khintchine
//! correlation spectra and their sigma = 1 limit constants (twin prime
//! constant included); the Hardy-Littlewood singular series of the
//! quadratic pair (n^2+1, n^2+3); segmented sieving and deterministic
//! 64-bit primality; and the correlation experiments that confront all of
//! the above with actual prime data, runnable as checkpointed,
//! thread-count-independent block jobs.

pub mod acceptance;
pub mod arith;
pub mod checkpoint;
pub mod error;
pub mod experiments;
pub mod primes;
pub mod series;
pub mod spectral;
pub mod util;

pub use error::{Error, Result};
