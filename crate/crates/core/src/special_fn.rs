//! Modified Bessel functions `I_n` and `K_n` of integer order on the positive
//! real axis, with first derivatives.
//!
//! `I_n` uses the ascending power series for small arguments and Miller's
//! backward recurrence (normalised by `e^x = I_0 + 2 sum I_k`) otherwise.
//! `K_0`/`K_1` come from the logarithmic series for `x <= 2` and Steed's
//! continued fraction for `x > 2`; higher orders follow by forward recurrence,
//! which is stable for `K_n`.

use crate::error::{Error, Result};

/// Largest order accepted by default.
pub const DEFAULT_MAX_ORDER: u32 = 64;

/// Beyond this argument `I_0` overflows an `f64`.
const I_ARG_LIMIT: f64 = 700.0;

const SERIES_SWITCH: f64 = 1.0;
const K_SERIES_SWITCH: f64 = 2.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;

/// Integer order of a modified Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BesselOrder(u32);

impl BesselOrder {
    pub fn new(n: u32) -> Result<Self> {
        Self::with_max(n, DEFAULT_MAX_ORDER)
    }

    pub fn with_max(n: u32, max: u32) -> Result<Self> {
        if n > max {
            return Err(Error::OrderTooLarge(n, max));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for BesselOrder {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

/// `I_n(x)` for `x >= 0`.
pub fn bessel_i(n: BesselOrder, x: f64) -> Result<f64> {
    i_unchecked(n.get(), x)
}

/// `K_n(x)` for `x > 0`.
pub fn bessel_k(n: BesselOrder, x: f64) -> Result<f64> {
    k_unchecked(n.get(), x)
}

/// `I_n'(x) = (n/x) I_n(x) + I_{n+1}(x)`.
pub fn bessel_i_prime(n: BesselOrder, x: f64) -> Result<f64> {
    let n = n.get();
    if n == 0 {
        return i_unchecked(1, x);
    }
    if !(x > 0.0) {
        return Err(Error::Domain {
            func: "bessel_i_prime",
            arg: x,
        });
    }
    Ok(n as f64 / x * i_unchecked(n, x)? + i_unchecked(n + 1, x)?)
}

/// `K_n'(x) = (n/x) K_n(x) - K_{n+1}(x)`.
pub fn bessel_k_prime(n: BesselOrder, x: f64) -> Result<f64> {
    let n = n.get();
    let (kn, kn1) = k_pair(n, x)?;
    Ok(n as f64 / x * kn - kn1)
}

/// `I_n` without the order cap; used internally where `n + 1` is needed.
pub(crate) fn i_unchecked(n: u32, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain {
            func: "bessel_i",
            arg: x,
        });
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if x > I_ARG_LIMIT {
        return Err(Error::Range {
            func: "bessel_i",
            arg: x,
        });
    }
    let v = if x <= SERIES_SWITCH {
        i_series(n, x)
    } else {
        i_miller(n, x)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range {
            func: "bessel_i",
            arg: x,
        })
    }
}

pub(crate) fn k_unchecked(n: u32, x: f64) -> Result<f64> {
    k_pair(n, x).map(|(k, _)| k)
}

/// Returns `(K_n(x), K_{n+1}(x))`.
fn k_pair(n: u32, x: f64) -> Result<(f64, f64)> {
    if x.is_nan() || x <= 0.0 {
        return Err(Error::Domain {
            func: "bessel_k",
            arg: x,
        });
    }
    let (mut km, mut k) = if x <= K_SERIES_SWITCH {
        k01_series(x)
    } else {
        k01_steed(x)
    };
    for j in 1..=n {
        let next = km + 2.0 * j as f64 / x * k;
        km = k;
        k = next;
    }
    if km.is_finite() && k.is_finite() && km > 0.0 {
        Ok((km, k))
    } else {
        Err(Error::Range {
            func: "bessel_k",
            arg: x,
        })
    }
}

fn i_series(n: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    for j in 1..=n {
        term *= 0.5 * x / j as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    while term > f64::EPSILON * 1e-3 * sum {
        term *= q / (k * (k + n as f64));
        sum += term;
        k += 1.0;
    }
    sum
}

fn i_miller(n: u32, x: f64) -> f64 {
    let start = (n as f64).max(x) + (80.0 * (x + n as f64)).sqrt() + 30.0;
    let start = start.ceil() as u32;
    let two_over_x = 2.0 / x;
    let mut above = 0.0;
    let mut current = 1e-300_f64;
    let mut wanted = 0.0;
    let mut sum = 0.0;
    for j in (1..=start).rev() {
        let below = above + j as f64 * two_over_x * current;
        above = current;
        current = below;
        if current.abs() > RESCALE_ABOVE {
            current *= RESCALE_BY;
            above *= RESCALE_BY;
            wanted *= RESCALE_BY;
            sum *= RESCALE_BY;
        }
        // `above` now holds the unnormalised I_j.
        sum += 2.0 * above;
        if j == n {
            wanted = above;
        }
    }
    // `current` holds I_0.
    if n == 0 {
        wanted = current;
    }
    sum += current;
    let scale = x.exp() / sum;
    wanted * scale
}

fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln();
    let i0 = i_series(0, x);
    let i1 = i_series(1, x);

    // K_0 = -(ln(x/2) + gamma) I_0 + sum_k q^k/(k!)^2 H_k
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum0 = 0.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * k);
        harmonic += 1.0 / k;
        let add = term * harmonic;
        sum0 += add;
        if add < f64::EPSILON * 1e-2 * sum0.abs().max(1e-300) {
            break;
        }
        k += 1.0;
    }
    let k0 = -(log_term + EULER_GAMMA) * i0 + sum0;

    // K_1 = 1/x + ln(x/2) I_1 - (x/4) sum_k (psi(k+1) + psi(k+2)) q^k / (k!(k+1)!)
    let mut term = 1.0;
    let mut psi_a = -EULER_GAMMA;
    let mut psi_b = 1.0 - EULER_GAMMA;
    let mut sum1 = psi_a + psi_b;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + 1.0));
        psi_a += 1.0 / k;
        psi_b += 1.0 / (k + 1.0);
        let add = term * (psi_a + psi_b);
        sum1 += add;
        if add.abs() < f64::EPSILON * 1e-2 * sum1.abs().max(1e-300) {
            break;
        }
        k += 1.0;
    }
    let k1 = 1.0 / x + log_term * i1 - 0.25 * x * sum1;
    (k0, k1)
}

/// Steed's method for the second continued fraction (Temme's normalisation),
/// specialised to order zero.
fn k01_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..100_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON * 0.5 {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn ord(n: u32) -> BesselOrder {
        BesselOrder::new(n).unwrap()
    }

    /// Direct ascending series `sum (x/2)^(2k+n) / (k! (k+n)!)`, each term
    /// built from its predecessor.
    fn series_oracle(n: u32, x: f64, terms: usize) -> f64 {
        let mut t = 1.0;
        for j in 1..=n {
            t *= 0.5 * x / j as f64;
        }
        let mut total = t;
        for k in 1..terms {
            t *= 0.25 * x * x / (k as f64 * (k as f64 + n as f64));
            total += t;
        }
        total
    }

    /// Trapezoid rule for `K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt`;
    /// exponentially convergent for this analytic, rapidly decaying integrand.
    fn quadrature_oracle(n: u32, x: f64) -> f64 {
        let step: f64 = 1e-3;
        let mut total = 0.5 * (-x).exp();
        let mut t = step;
        loop {
            let v = (-x * t.cosh()).exp() * (n as f64 * t).cosh();
            total += v;
            if v < 1e-300 || t > 50.0 {
                break;
            }
            t += step;
        }
        total * step
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_i(ord(0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(ord(1), 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(ord(5), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn i_matches_series_oracle() {
        for &n in &[0u32, 1, 2, 3, 5, 10, 20] {
            for &x in &[0.3, 1.0, 1.7, 2.5, 3.4641, 7.0, 15.0, 30.0, 50.0] {
                let terms = 60 + (4.0 * x) as usize;
                let expect = series_oracle(n, x, terms);
                let got = bessel_i(ord(n), x).unwrap();
                assert_relative_eq!(got, expect, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn k0_matches_quadrature_oracle() {
        for &x in &[1e-3, 0.1, 1.0, 1.9, 2.1, 3.4641, 10.0, 50.0] {
            let expect = quadrature_oracle(0, x);
            let got = bessel_k(ord(0), x).unwrap();
            assert_relative_eq!(got, expect, max_relative = 1e-10);
        }
        for &n in &[1u32, 2, 4, 7] {
            for &x in &[0.5, 2.0, 3.0, 20.0] {
                let expect = quadrature_oracle(n, x);
                let got = bessel_k(ord(n), x).unwrap();
                assert_relative_eq!(got, expect, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn k0_decays_monotonically() {
        let mut prev = f64::INFINITY;
        for k in 1..200 {
            let v = bessel_k(ord(0), 0.25 * k as f64).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn wronskian_at_reference_point() {
        let (x, n) = (2.0, ord(3));
        let w = bessel_i(n, x).unwrap() * bessel_k_prime(n, x).unwrap()
            - bessel_i_prime(n, x).unwrap() * bessel_k(n, x).unwrap();
        assert!((w + 1.0 / x).abs() < 1e-10);
    }

    #[test]
    fn derivative_identities_of_order_zero() {
        for &x in &[0.5, 1.0, 2.0] {
            assert_eq!(
                bessel_i_prime(ord(0), x).unwrap(),
                bessel_i(ord(1), x).unwrap()
            );
            assert_relative_eq!(
                bessel_k_prime(ord(0), x).unwrap(),
                -bessel_k(ord(1), x).unwrap(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let h = 1e-6;
        for &n in &[0u32, 1, 2, 5] {
            for &x in &[0.7, 2.0, 4.5] {
                let fd_i = (bessel_i(ord(n), x + h).unwrap() - bessel_i(ord(n), x - h).unwrap())
                    / (2.0 * h);
                let fd_k = (bessel_k(ord(n), x + h).unwrap() - bessel_k(ord(n), x - h).unwrap())
                    / (2.0 * h);
                let di = bessel_i_prime(ord(n), x).unwrap();
                let dk = bessel_k_prime(ord(n), x).unwrap();
                assert!((fd_i - di).abs() < 1e-6 * di.abs().max(1.0));
                assert!((fd_k - dk).abs() < 1e-6 * dk.abs().max(1.0));
            }
        }
    }

    #[test]
    fn error_paths() {
        assert!(matches!(
            bessel_k(ord(0), 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            bessel_k(ord(0), -1.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            bessel_i(ord(0), -0.5),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            bessel_i(ord(0), 1000.0),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            bessel_i_prime(ord(2), 0.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            BesselOrder::new(65),
            Err(Error::OrderTooLarge(65, 64))
        ));
        assert!(matches!(
            bessel_k(ord(64), 1e-4),
            Err(Error::Range { .. })
        ));
    }

    proptest! {
        #[test]
        fn recurrence_consistency(n in 1u32..=10, x in 0.5f64..20.0) {
            let lhs = bessel_i(ord(n + 1), x).unwrap();
            let rhs = bessel_i(ord(n - 1), x).unwrap()
                - 2.0 * n as f64 / x * bessel_i(ord(n), x).unwrap();
            let scale = bessel_i(ord(n - 1), x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * scale.max(1.0));
        }

        #[test]
        fn wronskian_identity(n in 0u32..=10, x in 0.5f64..20.0) {
            let o = ord(n);
            let w = bessel_i(o, x).unwrap() * bessel_k_prime(o, x).unwrap()
                - bessel_i_prime(o, x).unwrap() * bessel_k(o, x).unwrap();
            prop_assert!((w + 1.0 / x).abs() <= 1e-10 * (1.0 / x).max(1.0));
        }

        #[test]
        fn positivity(n in 0u32..=20, x in 1e-3f64..50.0) {
            prop_assert!(bessel_i(ord(n), x).unwrap() > 0.0);
            prop_assert!(bessel_k(ord(n), x).unwrap() > 0.0);
        }
    }
}
