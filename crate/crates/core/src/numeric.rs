//! Small numeric helpers shared across the crate.

/// Natural log of `m!`.
///
/// Exact cumulative product below 256; Stirling's series with three
/// correction terms above, where its truncation error is below 1e-19.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 256 {
        let mut acc = 0.0;
        for k in 2..=m {
            acc += (k as f64).ln();
        }
        acc
    } else {
        let x = m as f64;
        x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}

/// `a` and `b` agree to within `tol` absolutely.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Greatest common divisor.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Least common multiple, saturating at `u64::MAX` on overflow.
pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b)).saturating_mul(b)
}
