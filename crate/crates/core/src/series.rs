//! The kernel series f(n,s) = sum_{q>=1} mu(q) c_q(n) / (q^(s-1) phi(q)) in
//! its three computable forms: truncated sum over q, finite Euler product
//! over primes, and the factorized zeta(s) * A(n,s) * B(s) representation.
//! Also the Taylor data around s = 1: coefficients a1, a2 and the Stieltjes
//! constants, plus the von Mangoldt approximation check that ties f(n,s)
//! near s = 1 to (phi(n)/n) * lambda(n).

use crate::arith::{self, build_mu_phi_table, factorize};
use crate::error::{Error, Result};
use crate::primes::primes_up_to;
use crate::util::KahanSum;
use num_complex::Complex64;

/// Imaginary-part band accepted for complex s. The interesting behavior all
/// happens on and near the real axis; values far off it are out of scope.
pub const IM_BAND: f64 = 10.0;

/// Stieltjes constants gamma_0..gamma_2 to f64 precision (re-derived from
/// their limit definitions in the test suite).
pub const STIELTJES: [f64; 3] = [
    0.5772156649015329,
    -0.07281584548367672,
    -0.009690363192872318,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMethod {
    RamanujanSumForm,
    EulerProductForm,
}

/// A truncated series or product value with its truncation point and a
/// rigorous bound on everything left out.
#[derive(Debug, Clone, Copy)]
pub struct SeriesEvaluation {
    pub value: Complex64,
    pub truncation: u64,
    pub tail_bound: f64,
    pub method: SeriesMethod,
    /// Set when a single product factor vanished exactly (the s = 1 zero
    /// coming from primes dividing n); the value is then exactly 0 and the
    /// tail bound does not apply multiplicatively.
    pub exact_zero: bool,
}

/// Validated (n, s) pair for series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct SeriesParams {
    pub n: u64,
    pub s: Complex64,
}

impl SeriesParams {
    pub fn new(n: u64, s: Complex64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("series defined for n >= 2, got {n}")));
        }
        if s.im.abs() > IM_BAND {
            return Err(Error::domain(format!(
                "imaginary part {} outside the supported band |Im s| <= {IM_BAND}",
                s.im
            )));
        }
        Ok(SeriesParams { n, s })
    }

    pub fn real(n: u64, sigma: f64) -> Result<Self> {
        Self::new(n, Complex64::new(sigma, 0.0))
    }
}

/// Taylor expansion data of f(n,s) at s = 1.
#[derive(Debug, Clone)]
pub struct TaylorData {
    pub n: u64,
    pub omega: u32,
    pub a1: f64,
    pub a2: f64,
    pub stieltjes: Vec<f64>,
}

#[inline]
fn powc(p: f64, s: Complex64) -> Complex64 {
    // p^s = exp(s ln p); for real s the imaginary part stays exactly zero.
    (s * p.ln()).exp()
}

// ---------------------------------------------------------------------------
// truncated Ramanujan-sum form

/// Upper bound for sum_{q>Q} log(max(q,3)) / q^sigma. Terms for q <= 33 are
/// summed literally; the rest is majorized by the integral of log(t)/t^sigma,
/// legitimate because the integrand decreases for t >= 3 when sigma > 1.
/// The cutoff at 33 matters for soundness of the full tail bound: the
/// termwise domination q/phi(q) <= log q behind the log-form bound holds for
/// every q > 30 (worst cases are primorials: 2*3*5*7*11 = 2310 gives 4.81
/// against log 2310 = 7.75, and the gap only widens), so below that the
/// literal terms are kept.
fn log_tail_sum(sigma: f64, q_trunc: u64) -> f64 {
    let explicit_end = q_trunc.max(33);
    let mut acc = KahanSum::new();
    for q in q_trunc + 1..=explicit_end {
        let l = (q.max(3) as f64).ln();
        acc.add(l / (q as f64).powf(sigma));
    }
    let e = explicit_end as f64;
    let sm1 = sigma - 1.0;
    // integral_E^inf log t * t^(-sigma) dt = E^(1-sigma) (log E / (s-1) + 1/(s-1)^2)
    acc.add(e.powf(1.0 - sigma) * (e.ln() / sm1 + 1.0 / (sm1 * sm1)));
    acc.value()
}

/// Partial sum over q <= Q of mu(q) c_q(n) / (q^(s-1) phi(q)), for
/// Re(s) > 1 where the full series converges absolutely. The tail bound is
/// sigma(n) * sum_{q>Q} log(max(q,3)) / q^sigma.
pub fn f_truncated(params: &SeriesParams, q_trunc: u64) -> Result<SeriesEvaluation> {
    let SeriesParams { n, s } = *params;
    if s.re <= 1.0 {
        return Err(Error::domain(format!(
            "series form requires Re(s) > 1, got {}",
            s.re
        )));
    }
    if q_trunc == 0 {
        return Err(Error::domain("truncation Q must be >= 1"));
    }
    let table = build_mu_phi_table(q_trunc)?;
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for q in 1..=q_trunc {
        let mu = table.mu(q);
        if mu == 0 {
            continue;
        }
        let c = table.ramanujan(q, n);
        if c == 0 {
            continue;
        }
        let denom = powc(q as f64, s - Complex64::new(1.0, 0.0)) * table.phi(q) as f64;
        let term = Complex64::new((mu * c) as f64, 0.0) / denom;
        re.add(term.re);
        im.add(term.im);
    }
    let sigma_n = factorize(n, None)?.sigma()? as f64;
    Ok(SeriesEvaluation {
        value: Complex64::new(re.value(), im.value()),
        truncation: q_trunc,
        tail_bound: sigma_n * log_tail_sum(s.re, q_trunc),
        method: SeriesMethod::RamanujanSumForm,
        exact_zero: false,
    })
}

// ---------------------------------------------------------------------------
// Euler product form

/// Finite Euler product prod_{p <= P} (1 - c_p(n) / (p^(s-1) (p-1))) with
/// c_p(n) = p-1 when p | n and -1 otherwise. Valid for Re(s) > 1; s = 1
/// exactly is also accepted and always yields the exact zero coming from the
/// first prime dividing n.
pub fn euler_product_f(params: &SeriesParams, p_cutoff: u64) -> Result<SeriesEvaluation> {
    let SeriesParams { n, s } = *params;
    let sigma = s.re;
    let at_one = s == Complex64::new(1.0, 0.0);
    if !at_one && sigma <= 1.0 {
        return Err(Error::domain(format!(
            "euler product requires Re(s) > 1 or s = 1 exactly, got {s}"
        )));
    }
    if p_cutoff < 2 {
        return Err(Error::domain("prime cutoff P must be >= 2"));
    }
    let mut value = Complex64::new(1.0, 0.0);
    let mut exact_zero = false;
    for &p in primes_up_to(p_cutoff).iter() {
        let pm1 = (p - 1) as f64;
        let denom = powc(p as f64, s - Complex64::new(1.0, 0.0)) * pm1;
        let c_p = if n % p == 0 { pm1 } else { -1.0 };
        let factor = Complex64::new(1.0, 0.0) - c_p / denom;
        if factor.norm() == 0.0 {
            exact_zero = true;
            value = Complex64::new(0.0, 0.0);
            break;
        }
        value *= factor;
    }
    let tail_bound = if exact_zero {
        0.0
    } else {
        // Omitted factors: 1 + 1/(p^(s-1)(p-1)) for p not dividing n plus
        // 1 - p^(1-s) for primes of n above the cutoff. Their log sum is at
        // most S = 2 P^(1-sigma)/(sigma-1) + sum_{p|n, p>P} p^(1-sigma);
        // |log(1-x)| <= 2|x| for |x| <= 1/2 absorbs into the doubling below.
        let mut s_bound = 2.0 * (p_cutoff as f64).powf(1.0 - sigma) / (sigma - 1.0);
        for &(p, _) in &factorize(n, None)?.factors {
            if p > p_cutoff {
                s_bound += (p as f64).powf(1.0 - sigma);
            }
        }
        value.norm() * ((2.0 * s_bound).exp() - 1.0)
    };
    Ok(SeriesEvaluation {
        value,
        truncation: p_cutoff,
        tail_bound,
        method: SeriesMethod::EulerProductForm,
        exact_zero,
    })
}

/// A(n,s) = prod_{p | n} (p-1)(p^(s-1) - 1) / (p^s - p^(s-1) + 1). Vanishes
/// identically at s = 1. The denominator cannot vanish for real s > 0 since
/// p^s - p^(s-1) + 1 = p^(s-1)(p-1) + 1 >= 1; for complex s it is checked
/// numerically.
pub fn a_factor(n: u64, s: Complex64) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::domain(format!("a_factor defined for n >= 2, got {n}")));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for &(p, _) in &factorize(n, None)?.factors {
        let pm1 = (p - 1) as f64;
        let ps1 = powc(p as f64, s - Complex64::new(1.0, 0.0));
        let denom = ps1 * pm1 + 1.0;
        if denom.norm() < 1e-12 {
            return Err(Error::domain(format!(
                "a_factor denominator vanishes numerically at p={p}, s={s}"
            )));
        }
        acc *= pm1 * (ps1 - 1.0) / denom;
    }
    Ok(acc)
}

/// B(s) truncated at P: prod_{p <= P} (1 + 1/(p^(s-1)(p-1)))(1 - p^(-s)).
/// Each combined factor is computed as 1 + (p^(-s) - p^(1-2s))/(p-1), which
/// is exactly 1 at s = 1 (both powers reduce to the same expression) and
/// positive for real s, and whose deviation from 1 decays like p^(-2 Re s),
/// giving convergence for Re(s) > 1/2. Analyticity beyond that is not
/// assumed; convergence is monitored numerically by the Cauchy tests.
pub fn b_factor(s: Complex64, p_cutoff: u64) -> Result<Complex64> {
    if s.re <= 0.5 {
        return Err(Error::domain(format!(
            "b_factor evaluated only for Re(s) > 0.5, got {}",
            s.re
        )));
    }
    if p_cutoff < 2 {
        return Err(Error::domain("prime cutoff P must be >= 2"));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut acc = one;
    for &p in primes_up_to(p_cutoff).iter() {
        let pf = p as f64;
        let e1 = powc(pf, -s);
        let e2 = powc(pf, one - s * 2.0);
        acc *= one + (e1 - e2) / (pf - 1.0);
    }
    Ok(acc)
}

pub fn b_factor_real(sigma: f64, p_cutoff: u64) -> Result<f64> {
    Ok(b_factor(Complex64::new(sigma, 0.0), p_cutoff)?.re)
}

// ---------------------------------------------------------------------------
// zeta

fn zeta_em_core(s: f64, terms: u64) -> f64 {
    let n = terms as f64;
    let mut acc = KahanSum::new();
    // Ascending magnitude: small terms first.
    for k in (1..=terms).rev() {
        acc.add((k as f64).powf(-s));
    }
    acc.add(n.powf(1.0 - s) / (s - 1.0));
    acc.add(-0.5 * n.powf(-s));
    acc.add(s / 12.0 * n.powf(-s - 1.0));
    acc.add(-s * (s + 1.0) * (s + 2.0) / 720.0 * n.powf(-s - 3.0));
    acc.value()
}

/// Euler-Maclaurin zeta for real s > 1. Absolute error below 1e-12 for
/// s >= 1.001 once terms >= 10^6 (the first dropped correction is of order
/// terms^(-s-5)).
pub fn zeta_real(s: f64, terms: u64) -> Result<f64> {
    if s <= 1.0 {
        return Err(Error::domain(format!("zeta_real requires s > 1, got {s}")));
    }
    if terms < 10 {
        return Err(Error::domain("zeta_real needs at least 10 terms"));
    }
    Ok(zeta_em_core(s, terms))
}

/// Same Euler-Maclaurin development on the real window s in (0.5, 1): the
/// correction terms continue the sum across s = 1 (pole excluded). Used only
/// to evaluate the factorized form at small real perturbations below 1;
/// nothing here extends zeta off that window.
pub(crate) fn zeta_em_window(s: f64, terms: u64) -> Result<f64> {
    if s <= 0.5 || s == 1.0 {
        return Err(Error::domain(format!(
            "zeta window evaluation requires s > 0.5, s != 1, got {s}"
        )));
    }
    if terms < 10 {
        return Err(Error::domain("zeta window evaluation needs at least 10 terms"));
    }
    Ok(zeta_em_core(s, terms))
}

/// zeta(s) * prod_{p <= P} (1 - p^(-s)) for real s > 1: the exact factor by
/// which the P-truncated Euler product of zeta falls short of zeta itself,
/// equal to prod_{p > P} (1 - p^(-s))^(-1). Multiplying a truncated
/// c_p-product by this restores the factorized zeta * A * B identity at
/// finite P exactly, which is what the consistency tests check.
pub fn zeta_truncation_compensation(s: f64, p_cutoff: u64, terms: u64) -> Result<f64> {
    let z = zeta_real(s, terms)?;
    let mut log_acc = KahanSum::new();
    for &p in primes_up_to(p_cutoff).iter() {
        log_acc.add((1.0 - (p as f64).powf(-s)).ln());
    }
    Ok(z * log_acc.value().exp())
}

pub fn stieltjes_gamma(k: usize) -> Result<f64> {
    STIELTJES
        .get(k)
        .copied()
        .ok_or_else(|| Error::domain(format!("stieltjes constant {k} unsupported (k <= 2)")))
}

// ---------------------------------------------------------------------------
// Taylor coefficients at s = 1

/// a1 = A'(1) = prod_{p | n} ((p-1)/p) log p. For prime powers this equals
/// (phi(n)/n) lambda(n); for omega(n) >= 2 it does not (lambda vanishes
/// there while a1 stays positive).
pub fn a1_coefficient(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("a1 defined for n >= 2, got {n}")));
    }
    let mut acc = 1.0f64;
    for &(p, _) in &factorize(n, None)?.factors {
        let pf = p as f64;
        acc *= (pf - 1.0) / pf * pf.ln();
    }
    Ok(acc)
}

/// a2 = prod_{p | n} ((p-1)/p^2) log^2 p, transcribed as a closed product.
/// Note this is a formula transcription only: for omega(n) >= 2 a genuine
/// second derivative of A would carry mixed cross terms that this product
/// does not contain, so nothing downstream treats a2 as A''(1).
pub fn a2_coefficient(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!("a2 defined for n >= 2, got {n}")));
    }
    let mut acc = 1.0f64;
    for &(p, _) in &factorize(n, None)?.factors {
        let pf = p as f64;
        let l = pf.ln();
        acc *= (pf - 1.0) / (pf * pf) * l * l;
    }
    Ok(acc)
}

pub fn taylor_data(n: u64) -> Result<TaylorData> {
    let omega = factorize(n, None)?.omega();
    Ok(TaylorData {
        n,
        omega,
        a1: a1_coefficient(n)?,
        a2: a2_coefficient(n)?,
        stieltjes: STIELTJES.to_vec(),
    })
}

/// First two derivatives of B at s = 1 by central finite differences. B's
/// coefficients have no closed form worth trusting; these are exposed for
/// diagnostics only.
pub fn b_coefficients_fd(p_cutoff: u64) -> Result<(f64, f64)> {
    let h = 1e-4;
    let plus = b_factor_real(1.0 + h, p_cutoff)?;
    let minus = b_factor_real(1.0 - h, p_cutoff)?;
    // B(1) = 1 exactly.
    let b1 = (plus - minus) / (2.0 * h);
    let b2 = (plus - 2.0 + minus) / (h * h);
    Ok((b1, b2))
}

/// |zeta(s) A(n,s) B(s,P) - (phi(n)/n) lambda(n)| for real s near 1, the
/// quantity the von Mangoldt approximation bounds. At s = 1 exactly the
/// product form degenerates and the limit value applies: a1 when n is a
/// prime power, 0 otherwise.
pub fn lambda_approximation_error(n: u64, s: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(format!(
            "lambda approximation defined for n >= 2, got {n}"
        )));
    }
    let f = factorize(n, None)?;
    let target = f.phi() as f64 / n as f64 * arith::von_mangoldt(n)?;
    if s == 1.0 {
        let limit = if f.omega() == 1 { a1_coefficient(n)? } else { 0.0 };
        return Ok((limit - target).abs());
    }
    if !(s - 1.0).abs().is_finite() || (s - 1.0).abs() >= 0.1 {
        return Err(Error::domain(format!(
            "approximation window is 0 < |s-1| < 0.1, got s={s}"
        )));
    }
    // P = 10^6 puts the B tail near 1e-7, well under the 1e-6 requirement.
    let p_cutoff = 1_000_000;
    let z = if s > 1.0 {
        zeta_real(s, 1_000_000)?
    } else {
        zeta_em_window(s, 1_000_000)?
    };
    let a = a_factor(n, Complex64::new(s, 0.0))?.re;
    let b = b_factor_real(s, p_cutoff)?;
    Ok((z * a * b - target).abs())
}

/// Partial sums of the s = 1 kernel series sum_q mu(q) c_q(n) / phi(q),
/// sampled at round truncation points. Diagnostic output: for n = 1 the sums
/// grow without settling (every term is mu(q)^2/phi(q) >= 0), for n >= 2
/// they oscillate inside a slowly shrinking envelope. Nothing here asserts a
/// limit.
pub fn kernel_partial_sums(n: u64, q_max: u64) -> Result<Vec<(u64, f64)>> {
    if n == 0 || q_max == 0 {
        return Err(Error::domain("kernel_partial_sums requires n >= 1, q_max >= 1"));
    }
    let table = build_mu_phi_table(q_max)?;
    let mut samples = Vec::new();
    let mut acc = KahanSum::new();
    let mut next_sample = 1u64;
    for q in 1..=q_max {
        let mu = table.mu(q);
        if mu != 0 {
            let c = table.ramanujan(q, n);
            if c != 0 {
                acc.add((mu * c) as f64 / table.phi(q) as f64);
            }
        }
        if q == next_sample || q == q_max {
            samples.push((q, acc.value()));
            // 1, 2, ..., 10, 20, 30, ... 100, 200, ...
            let step = 10u64.pow(q.ilog10());
            next_sample = q + step;
        }
    }
    Ok(samples)
}
