//! Small numeric helpers used across the crate: compensated summation,
//! adaptive quadrature, and significant-digit rounding for serialization.

/// Kahan-Babuska compensated accumulator. Long series of small terms (zeta
/// tails, log sums over primes) lose several digits under naive f64 addition;
/// the running compensation keeps the error near one ulp of the total.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        // Neumaier's variant: compensate whichever operand lost low bits.
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum an iterator of f64 terms with compensation.
pub fn kahan_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// Adaptive Simpson quadrature on [a, b] with relative tolerance `rel_tol`.
/// Used for integral comparison bounds on series tails, where the integrand
/// is smooth and monotone; 50 levels of bisection is far beyond what those
/// need and acts as a recursion safety stop.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, frm, 0.5 * tol, depth - 1)
        }
    }

    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    let tol = rel_tol * whole.abs().max(1e-300);
    let first = recurse(f, a, fa, b, fb, whole, fm, tol, 50);
    // The three-point starting estimate can overshoot a decaying integrand
    // by orders of magnitude, which would silently loosen the relative
    // tolerance. Rerun with the tolerance anchored to the refined value
    // when the two disagree badly.
    let scale = first.abs().max(1e-300);
    if whole.abs() > 4.0 * scale {
        recurse(f, a, fa, b, fb, whole, fm, rel_tol * scale, 50)
    } else {
        first
    }
}

/// Round to `digits` significant decimal digits. Serialization rounds before
/// emitting so that a JSON value re-parsed from text equals the emitted one.
pub fn round_sig(x: f64, digits: u32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let d = digits as i32;
    let mag = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(d - 1 - mag);
    // Extreme magnitudes push the scale factor outside the normal range
    // (overflow for tiny x, underflow for huge x); rounding there would
    // produce NaN or 0. Such values carry no printable precision anyway.
    if !factor.is_normal() {
        return x;
    }
    (x * factor).round() / factor
}

/// Floor of sqrt(n) computed exactly in integers. f64 sqrt alone misrounds
/// near 2^52; one correction step fixes every u64 input.
pub fn integer_sqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |rr| rr > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |rr| rr <= n) {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_digits_lost_by_naive_sum() {
        // 1 + 1e16 * 1e-16 summed naively drifts; compensated stays exact
        // to one ulp.
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000_000 {
            acc.add(1e-16);
        }
        let expect = 1.0 + 1e-9;
        assert!((acc.value() - expect).abs() < 1e-15);
    }

    #[test]
    fn simpson_matches_closed_forms() {
        let v = integrate(&|t: f64| t.ln() / (t * t), 2.0, 1e6, 1e-10);
        // Antiderivative of ln t / t^2 is -(ln t + 1)/t.
        let exact = (2.0f64.ln() + 1.0) / 2.0 - ((1e6f64).ln() + 1.0) / 1e6;
        assert!((v - exact).abs() < 1e-9 * exact);

        let v = integrate(&|t: f64| (-t).exp(), 0.0, 30.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn round_sig_fixed_points() {
        assert_eq!(round_sig(1.23456789, 3), 1.23);
        assert_eq!(round_sig(0.000123456, 2), 0.00012);
        assert_eq!(round_sig(-98765.4, 4), -98770.0);
        assert_eq!(round_sig(0.0, 5), 0.0);
    }

    #[test]
    fn integer_sqrt_exact_at_boundaries() {
        for n in 0u64..1000 {
            let r = integer_sqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "n={n}");
        }
        assert_eq!(integer_sqrt(u64::MAX), 4294967295);
        assert_eq!(integer_sqrt((1u64 << 62) - 1), 2147483647);
        assert_eq!(integer_sqrt(1 << 62), 1 << 31);
        // Perfect squares round-trip.
        for r in [3u64, 1_000_003, 4_294_967_295] {
            assert_eq!(integer_sqrt(r * r), r);
        }
    }
}
