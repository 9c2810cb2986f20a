//! Log-Gamma helpers.
//!
//! Differences of log-Gamma values at large arguments cancel catastrophically
//! when each term is evaluated separately, so [`ln_gamma_ratio`] switches to a
//! Stirling-series difference once the argument is large enough.

use statrs::function::gamma::ln_gamma;

/// Threshold above which the Stirling difference is used.
const STIRLING_MIN: f64 = 20.0;

/// `ln Γ(x) - ln Γ(x + a)` for `x >= 1`, `a >= 0`.
pub fn ln_gamma_ratio(x: f64, a: f64) -> f64 {
    debug_assert!(x > 0.0 && a >= 0.0);
    if a == 0.0 {
        return 0.0;
    }
    if x < STIRLING_MIN {
        // shift both arguments past the threshold:
        // lnΓ(x) - lnΓ(x+a) = lnΓ(x+k) - lnΓ(x+k+a) + ln Π_{i<k} (x+a+i)/(x+i)
        let k = (STIRLING_MIN - x).ceil();
        let mut prod = 1.0;
        let mut i = 0.0;
        while i < k {
            prod *= (x + a + i) / (x + i);
            i += 1.0;
        }
        return ln_gamma_ratio(x + k, a) + prod.ln();
    }
    // (x - 1/2) ln x - (x + a - 1/2) ln(x + a) + a + S(x) - S(x + a)
    //   = -a ln x - (x + a - 1/2) ln(1 + a/x) + a + S(x) - S(x + a)
    let lead = -a * x.ln() - (x + a - 0.5) * (a / x).ln_1p() + a;
    lead + stirling_tail(x) - stirling_tail(x + a)
}

/// `Γ(x) / Γ(x + a)` for `x >= 1`, `a >= 0`.
///
/// Exponentiating [`ln_gamma_ratio`] loses `|ln|·ε` of relative accuracy deep in
/// the tail; here the dominant `x^-a` goes through `powf` and only the small
/// remainder is exponentiated.
pub fn gamma_ratio(x: f64, a: f64) -> f64 {
    debug_assert!(x > 0.0 && a >= 0.0);
    if a == 0.0 {
        return 1.0;
    }
    if x < STIRLING_MIN {
        let k = (STIRLING_MIN - x).ceil();
        let mut prod = 1.0;
        let mut i = 0.0;
        while i < k {
            prod *= (x + a + i) / (x + i);
            i += 1.0;
        }
        return gamma_ratio(x + k, a) * prod;
    }
    let rest = -(x + a - 0.5) * (a / x).ln_1p() + a + stirling_tail(x) - stirling_tail(x + a);
    x.powf(-a) * rest.exp()
}

/// Asymptotic correction `ln Γ(z) - [(z - 1/2) ln z - z + ln(2π)/2]`.
fn stirling_tail(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

pub fn ln_gamma_fn(x: f64) -> f64 {
    ln_gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact `ln Γ(x) - ln Γ(x + k)` for integer shift via a product.
    fn ratio_by_product(x: f64, k: u32) -> f64 {
        -(0..k).map(|i| (x + i as f64).ln()).sum::<f64>()
    }

    #[test]
    fn matches_product_for_integer_shifts() {
        for &x in &[1.0, 2.0, 7.5, 19.0, 20.0, 21.0, 200.0, 1.0e4, 1.0e6] {
            for k in 1..6 {
                let got = ln_gamma_ratio(x, k as f64);
                let want = ratio_by_product(x, k);
                assert!(
                    (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                    "x={x} k={k} got={got} want={want}"
                );
            }
        }
    }

    #[test]
    fn ratio_matches_product() {
        for &x in &[1.0, 2.5, 19.0, 20.0, 300.0, 1.0e4] {
            for k in 1..7u32 {
                let got = gamma_ratio(x, k as f64);
                let want = 1.0 / (0..k).map(|i| x + i as f64).product::<f64>();
                assert!((got / want - 1.0).abs() < 1e-14, "x={x} k={k}");
            }
        }
        assert!((gamma_ratio(5.0, 1.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn agrees_with_log_gamma_differences() {
        for &x in &[1.0, 3.5, 19.9, 20.0, 45.0] {
            for &a in &[0.3, 3.7, 51.0] {
                let direct = ln_gamma(x) - ln_gamma(x + a);
                assert!((direct - ln_gamma_ratio(x, a)).abs() < 1e-12 * direct.abs().max(1.0), "x={x} a={a}");
            }
        }
    }
}
