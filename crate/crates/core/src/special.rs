//! Log-domain helpers: log-gamma, log-binomials and log-sum-exp.

use std::f64::consts::{LN_2, PI};

/// Above this size binomial coefficients go through log-gamma.
pub const EXACT_BINOMIAL_LIMIT: u64 = 60;

/// `ln Gamma(x)` for `x > 0`.
///
/// Upward recurrence to `x >= 10`, then the Stirling series through the
/// `x^-11` term.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma needs a positive argument, got {x}");
    let mut shift = 0.0;
    let mut z = x;
    if z < 10.0 {
        let mut prod = 1.0;
        while z < 10.0 {
            prod *= z;
            z += 1.0;
        }
        shift = prod.ln();
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0 - inv2 * 691.0 / 360360.0)))));
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

/// `log2 Gamma(x)`.
pub fn log2_gamma(x: f64) -> f64 {
    ln_gamma(x) / LN_2
}

fn exact_binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= EXACT_BINOMIAL_LIMIT {
        return (exact_binomial(n, k) as f64).ln();
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln(e^a + e^b)` without overflow.
#[inline]
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn ln_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(f64::NEG_INFINITY, ln_add_exp)
}

/// Natural log of the `Binomial(n, p)` probability mass at `a`.
pub fn ln_binomial_pmf(n: u64, a: u64, p: f64) -> f64 {
    if a > n {
        return f64::NEG_INFINITY;
    }
    let term = |count: u64, q: f64| {
        if count == 0 {
            0.0
        } else if q <= 0.0 {
            f64::NEG_INFINITY
        } else {
            count as f64 * q.ln()
        }
    };
    ln_binomial(n, a) + term(a, p) + term(n - a, 1.0 - p)
}

/// `ln(1 - e^x)` for `x <= 0`.
pub fn ln_one_minus_exp(x: f64) -> f64 {
    if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_factorial_direct(n: u64) -> f64 {
        (1..=n).map(|i| (i as f64).ln()).sum()
    }

    #[test]
    fn gamma_at_integers() {
        for n in 1..200u64 {
            let want = ln_factorial_direct(n - 1);
            let got = ln_gamma(n as f64);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn gamma_at_half_integers() {
        // Gamma(1/2) = sqrt(pi), Gamma(m + 1/2) = (2m)! sqrt(pi) / (4^m m!)
        assert!((ln_gamma(0.5) - 0.5 * PI.ln()).abs() < 1e-14);
        for m in 1..80u64 {
            let want = ln_factorial_direct(2 * m) + 0.5 * PI.ln() - m as f64 * 4f64.ln() - ln_factorial_direct(m);
            let got = ln_gamma(m as f64 + 0.5);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "m={m}");
        }
    }

    #[test]
    fn gamma_small_arguments() {
        // Gamma(0.1) = 9.513507698668731836...
        assert!((ln_gamma(0.1) - 9.513_507_698_668_732f64.ln()).abs() < 1e-14);
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!(ln_gamma(2.0).abs() < 1e-14);
    }

    #[test]
    fn binomials_exact_and_large() {
        assert_eq!(ln_binomial(10, 3), 120f64.ln());
        assert_eq!(ln_binomial(60, 30), (118_264_581_564_861_424u64 as f64).ln());
        assert_eq!(ln_binomial(5, 6), f64::NEG_INFINITY);
        // C(100, 50) = 100891344545564193334812497256
        let want = 1.008_913_445_455_641_9e29f64.ln();
        assert!((ln_binomial(100, 50) - want).abs() < 1e-12 * want);
        // continuity across the exact/log-gamma switch
        let a = ln_binomial(61, 20);
        let b = ln_binomial(60, 20) + (61f64 / 41.0).ln();
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn pmf_sums_to_one() {
        for &(n, p) in &[(10u64, 0.3), (200, 0.05), (5000, 0.001), (40, 0.0), (40, 0.5)] {
            let total = ln_sum_exp((0..=n).map(|a| ln_binomial_pmf(n, a, p))).exp();
            assert!((total - 1.0).abs() < 1e-10, "n={n} p={p}: {total}");
        }
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(ln_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((ln_add_exp(1000.0, 1000.0) - (1000.0 + LN_2)).abs() < 1e-12);
        assert!((ln_one_minus_exp(-1e-20) - (1e-20f64).ln()).abs() < 1e-9);
        assert!((ln_one_minus_exp(-50.0) + (-50f64).exp()).abs() < 1e-30);
    }
}
