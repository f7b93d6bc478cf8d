//! Closed-form constants: factorials, unit-ball volumes and the Mahler
//! product of centered simplices.

use std::f64::consts::PI;

/// `ln(n!)` by direct summation (exact to rounding for the small n used here).
pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn factorial(n: usize) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `ln vol(B₂ⁿ) = (n/2)·ln π − ln Γ(n/2 + 1)`, with Γ at half-integers
/// expanded into finite products.
pub fn ln_unit_ball_volume(n: usize) -> f64 {
    // vol_n = vol_{n-2} · 2π/n, vol_0 = 1, vol_1 = 2
    let mut acc = if n % 2 == 0 { 0.0 } else { 2f64.ln() };
    let mut k = if n % 2 == 0 { 2 } else { 3 };
    while k <= n {
        acc += (2.0 * PI / k as f64).ln();
        k += 2;
    }
    acc
}

pub fn unit_ball_volume(n: usize) -> f64 {
    ln_unit_ball_volume(n).exp()
}

/// Mahler product `(n+1)^(n+1) / (n!)²` of any simplex whose barycenter is
/// the origin. Evaluated in the log domain above n = 20.
pub fn mahler_centered_simplex(n: usize) -> f64 {
    assert!(n >= 1, "dimension must be positive");
    if n <= 20 {
        let f = factorial(n);
        ((n + 1) as f64).powi(n as i32 + 1) / (f * f)
    } else {
        ((n + 1) as f64 * ((n + 1) as f64).ln() - 2.0 * ln_factorial(n)).exp()
    }
}

/// Empirical quantile by inverse CDF: the smallest order statistic whose
/// empirical CDF reaches `p`. `sorted` must be ascending and non-empty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    let k = (p * n as f64).ceil() as usize;
    sorted[k.clamp(1, n) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn mahler_values() {
        assert_eq!(mahler_centered_simplex(1), 4.0);
        assert_eq!(mahler_centered_simplex(2), 6.75);
        assert!((mahler_centered_simplex(3) - 256.0 / 36.0).abs() < 1e-14);
        // both evaluation routes agree near the switch-over
        let direct = 22f64.powi(22) / factorial(21).powi(2);
        assert!((mahler_centered_simplex(21) / direct - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 0.25), 1.0);
        assert_eq!(quantile_sorted(&v, 0.26), 2.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
    }
}
