//! Special functions used by the integral reductions.
//!
//! Gamma and Beta come from `statrs`; the Riemann zeta function is evaluated
//! here by Euler–Maclaurin summation because only real arguments `s > 1` are
//! needed and the error term is easy to control.

use std::f64::consts::PI;

use crate::error::QuadError;

/// Surface measure of the unit sphere `S^{d-1}` in `R^d`, i.e. `2 π^{d/2} / Γ(d/2)`.
///
/// `sphere_area(2) = 2π`, `sphere_area(3) = 4π`, `sphere_area(4) = 2π²`.
pub fn sphere_area(d: usize) -> f64 {
    assert!(d >= 1, "sphere_area needs d >= 1");
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / statrs::function::gamma::gamma(h)
}

/// Volume of the unit ball in `R^d`, `π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / statrs::function::gamma::gamma(h + 1.0)
}

/// Euler Beta function `B(a, b)`.
pub fn beta(a: f64, b: f64) -> f64 {
    statrs::function::beta::beta(a, b)
}

// B_{2j} / (2j)! for j = 1..=10
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
];

/// Riemann zeta function for real `s > 1`.
///
/// Direct sum of the first `M - 1` terms followed by the Euler–Maclaurin tail
/// with ten Bernoulli corrections; for `s >= 2` the truncation error is far
/// below one ulp.
pub fn zeta(s: f64) -> Result<f64, QuadError> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(QuadError::DomainError(format!("zeta needs s > 1, got {s}")));
    }
    const M: usize = 16;
    let head: f64 = (1..M).rev().map(|n| (n as f64).powf(-s)).sum();
    let m = M as f64;
    let mut tail = m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times M^{-s-2j+1}
    let mut rising = s;
    let mut mpow = m.powf(-s - 1.0);
    for (j, coef) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let a = s + (2 * j - 1) as f64;
            rising *= a * (a + 1.0);
            mpow /= m * m;
        }
        tail += coef * rising * mpow;
    }
    Ok(head + tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, max_relative = 1e-14);
        for d in 2..12 {
            // |S^{d-1}| = d * |B^d|
            assert_relative_eq!(sphere_area(d), d as f64 * unit_ball_volume(d), max_relative = 1e-13);
        }
    }

    #[test]
    fn zeta_known_values() {
        assert_relative_eq!(zeta(2.0).unwrap(), PI * PI / 6.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(4.0).unwrap(), PI.powi(4) / 90.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(6.0).unwrap(), PI.powi(6) / 945.0, max_relative = 1e-14);
    }

    #[test]
    fn zeta_three_against_direct_sum() {
        // direct partial sum with the integral tail bracket
        let n = 200_000usize;
        let partial: f64 = (1..=n).rev().map(|k| (k as f64).powi(-3)).sum();
        let nf = n as f64;
        let lo = partial + 1.0 / (2.0 * (nf + 1.0) * (nf + 1.0));
        let hi = partial + 1.0 / (2.0 * nf * nf);
        let z = zeta(3.0).unwrap();
        assert!(z >= lo - 1e-15 && z <= hi + 1e-15);
        assert_relative_eq!(z, 1.2020569031595942, max_relative = 1e-15);
    }

    #[test]
    fn zeta_domain() {
        assert!(zeta(1.0).is_err());
        assert!(zeta(0.5).is_err());
        assert!(zeta(f64::NAN).is_err());
    }
}
