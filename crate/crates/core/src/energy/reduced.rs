//! The leading-order reduced functional `F_j(r, Lambda)` and its derivatives.

use crate::coeffs::{lambda0, ExpansionConstants};
use crate::error::EnergyError;
use crate::model::mu;
use crate::solver::BoxDj;

/// `F_j` for a fixed `k`, with everything that does not depend on
/// `(r, Lambda)` precomputed.
///
/// ```text
/// F = k [ A + (A1 / L^j - B1 / (L^{N-2} r0^{N-2})) / mu^j
///           + A2 (mu r0 - r)^2 / (L^{j-2} mu^j) ]
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedFunctional {
    pub k: usize,
    pub mu: f64,
    pub j: f64,
    pub lambda0: f64,
    pub domain: BoxDj,
    a: f64,
    a1: f64,
    a2: f64,
    b1: f64,
    nf: f64,
    r0n: f64,
    r_star: f64,
}

impl ReducedFunctional {
    pub fn new(k: usize, c: &ExpansionConstants) -> Result<Self, EnergyError> {
        let params = &c.params;
        let l0 = lambda0(&c.regime, c, params)?;
        let m = mu(k, params);
        let domain = BoxDj::new(k, l0, params);
        let nf = params.nf();
        Ok(ReducedFunctional {
            k,
            mu: m,
            j: c.j(),
            lambda0: l0,
            domain,
            a: c.a,
            a1: c.a1,
            a2: c.a2,
            b1: c.b1,
            nf,
            r0n: params.r0.powf(nf - 2.0),
            r_star: m * params.r0,
        })
    }

    /// Error unless `(r, lambda)` lies in the closed box `D_j`.
    pub fn check(&self, r: f64, lambda: f64) -> Result<(), EnergyError> {
        if self.domain.contains(r, lambda) {
            Ok(())
        } else {
            Err(EnergyError::OutsideBox { r, lambda })
        }
    }

    /// `k mu^{-j} (|A1| Lambda_0^{-j} + |B1| Lambda_0^{2-N} / r0^{N-2})`, the
    /// size of the two terms balanced at `Lambda_0`.
    pub fn profile_scale(&self) -> f64 {
        let l0 = self.lambda0;
        self.k as f64 * self.mu.powf(-self.j)
            * (self.a1.abs() * l0.powf(-self.j) + self.b1.abs() * l0.powf(2.0 - self.nf) / self.r0n)
    }

    /// Value without the box check.
    pub fn value(&self, r: f64, lambda: f64) -> f64 {
        let (j, nf) = (self.j, self.nf);
        let muj = self.mu.powf(j);
        let dr = self.r_star - r;
        let bracket = self.a
            + (self.a1 * lambda.powf(-j) - self.b1 * lambda.powf(2.0 - nf) / self.r0n) / muj
            + self.a2 * dr * dr * lambda.powf(2.0 - j) / muj;
        self.k as f64 * bracket
    }

    /// `(dF/dr, dF/dLambda)` without the box check.
    pub fn gradient(&self, r: f64, lambda: f64) -> [f64; 2] {
        let (j, nf) = (self.j, self.nf);
        let kf = self.k as f64;
        let muj = self.mu.powf(j);
        let dr = self.r_star - r;
        let f_r = -2.0 * kf * self.a2 * dr * lambda.powf(2.0 - j) / muj;
        let f_l = kf
            * ((-j * self.a1 * lambda.powf(-j - 1.0) + (nf - 2.0) * self.b1 * lambda.powf(1.0 - nf) / self.r0n) / muj
                - (j - 2.0) * self.a2 * dr * dr * lambda.powf(1.0 - j) / muj);
        [f_r, f_l]
    }

    /// Second derivatives `[[F_rr, F_rL], [F_Lr, F_LL]]`.
    pub fn hessian(&self, r: f64, lambda: f64) -> [[f64; 2]; 2] {
        let (j, nf) = (self.j, self.nf);
        let kf = self.k as f64;
        let muj = self.mu.powf(j);
        let dr = self.r_star - r;
        let f_rr = 2.0 * kf * self.a2 * lambda.powf(2.0 - j) / muj;
        let f_rl = -2.0 * kf * self.a2 * dr * (2.0 - j) * lambda.powf(1.0 - j) / muj;
        let f_ll = kf
            * ((j * (j + 1.0) * self.a1 * lambda.powf(-j - 2.0)
                - (nf - 2.0) * (nf - 1.0) * self.b1 * lambda.powf(-nf) / self.r0n)
                / muj
                + (j - 2.0) * (j - 1.0) * self.a2 * dr * dr * lambda.powf(-j) / muj);
        [[f_rr, f_rl], [f_rl, f_ll]]
    }
}

/// Leading-order reduced energy at `(r, lambda)`; errors outside `D_j`.
#[allow(non_snake_case)]
pub fn F_reduced(r: f64, lambda: f64, k: usize, c: &ExpansionConstants) -> Result<f64, EnergyError> {
    let f = ReducedFunctional::new(k, c)?;
    f.check(r, lambda)?;
    Ok(f.value(r, lambda))
}

/// `(dF/dr, dF/dLambda)` of [`F_reduced`]; errors outside `D_j`.
#[allow(non_snake_case)]
pub fn F_reduced_grad(r: f64, lambda: f64, k: usize, c: &ExpansionConstants) -> Result<(f64, f64), EnergyError> {
    let f = ReducedFunctional::new(k, c)?;
    f.check(r, lambda)?;
    let [a, b] = f.gradient(r, lambda);
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::test_support::reference_constants;
    use approx::assert_relative_eq;

    #[test]
    fn value_at_center() {
        let c = reference_constants();
        let f = ReducedFunctional::new(6, &c).unwrap();
        let (r, l) = (f.mu * c.params.r0, f.lambda0);
        let j = f.j;
        let expect = 6.0 * (c.a + (c.a1 / l.powf(j) - c.b1 / l.powi(3)) / f.mu.powf(j));
        assert_relative_eq!(F_reduced(r, l, 6, &c).unwrap(), expect, max_relative = 1e-14);
    }

    #[test]
    fn even_in_r_about_center() {
        let c = reference_constants();
        let f = ReducedFunctional::new(8, &c).unwrap();
        let rc = f.mu * c.params.r0;
        for h in [0.01, 0.1, 0.3] {
            let l = f.lambda0 * 1.01;
            assert_relative_eq!(f.value(rc + h, l), f.value(rc - h, l), max_relative = 1e-14);
        }
    }

    #[test]
    fn gradient_vanishes_at_center() {
        let c = reference_constants();
        for k in [6, 8, 10, 16] {
            let f = ReducedFunctional::new(k, &c).unwrap();
            let rc = f.mu * c.params.r0;
            let [gr, gl] = f.gradient(rc, f.lambda0);
            assert_eq!(gr, 0.0);
            // relative to the size of the two cancelling terms
            let scale = k as f64 * f.j * c.a1 * f.lambda0.powf(-f.j - 1.0) / f.mu.powf(f.j);
            assert!(gl.abs() <= 1e-12 * scale, "k={k}: {gl} vs {scale}");
            // dF/dr vanishes on the whole line r = mu r0
            for l in [f.domain.l_lo, f.lambda0 * 1.1, f.domain.l_hi] {
                assert_eq!(f.gradient(rc, l)[0], 0.0);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = reference_constants();
        let f = ReducedFunctional::new(6, &c).unwrap();
        let rc = f.mu * c.params.r0;
        let pts = [(rc + 0.3, f.lambda0 * 1.2), (rc - 0.5, f.lambda0 * 0.8), (rc + 0.1, f.lambda0 * 1.5)];
        for (r, l) in pts {
            let [gr, gl] = f.gradient(r, l);
            let h = 1e-4;
            let fr = (f.value(r + h, l) - f.value(r - h, l)) / (2.0 * h);
            let hl = 1e-5 * l;
            let fl = (f.value(r, l + hl) - f.value(r, l - hl)) / (2.0 * hl);
            assert_relative_eq!(gr, fr, max_relative = 1e-6);
            assert_relative_eq!(gl, fl, max_relative = 1e-6);
        }
    }

    #[test]
    fn hessian_matches_gradient_differences() {
        let c = reference_constants();
        let f = ReducedFunctional::new(8, &c).unwrap();
        let (r, l) = (f.mu * c.params.r0 + 0.2, f.lambda0 * 1.1);
        let h = f.hessian(r, l);
        let (dr, dl) = (1e-4, 1e-6);
        let gr = |r, l| f.gradient(r, l);
        let col_r = [(gr(r + dr, l)[0] - gr(r - dr, l)[0]) / (2.0 * dr), (gr(r + dr, l)[1] - gr(r - dr, l)[1]) / (2.0 * dr)];
        let col_l = [(gr(r, l + dl)[0] - gr(r, l - dl)[0]) / (2.0 * dl), (gr(r, l + dl)[1] - gr(r, l - dl)[1]) / (2.0 * dl)];
        assert_relative_eq!(h[0][0], col_r[0], max_relative = 1e-6);
        assert_relative_eq!(h[1][0], col_r[1], max_relative = 1e-5);
        assert_relative_eq!(h[0][1], col_l[0], max_relative = 1e-5);
        assert_relative_eq!(h[1][1], col_l[1], max_relative = 1e-6);
    }

    #[test]
    fn outside_box_is_rejected() {
        let c = reference_constants();
        let f = ReducedFunctional::new(6, &c).unwrap();
        let rc = f.mu * c.params.r0;
        let err = F_reduced(rc + 10.0, f.lambda0, 6, &c).unwrap_err();
        assert!(matches!(err, EnergyError::OutsideBox { .. }));
        assert!(F_reduced_grad(rc, f.domain.l_hi * 1.01, 6, &c).is_err());
    }

    #[test]
    fn profile_term_follows_mu_law() {
        // at fixed (r / mu, Lambda) = (r0, Lambda) the per-bubble mu^{-j} part
        // scales by mu(4k)^{-j} / mu(k)^{-j} = 4^{-j (N-2)/(N-2-frak_m)}
        let c = reference_constants();
        let f1 = ReducedFunctional::new(6, &c).unwrap();
        let f4 = ReducedFunctional::new(24, &c).unwrap();
        let l = f1.lambda0;
        let per1 = f1.value(f1.mu * c.params.r0, l) / 6.0 - c.a;
        let per4 = f4.value(f4.mu * c.params.r0, l) / 24.0 - c.a;
        let nf = c.params.nf();
        let law = 4f64.powf(-f1.j * (nf - 2.0) / (nf - 2.0 - c.params.frak_m()));
        assert_relative_eq!(per4 / per1, law, max_relative = 1e-9);
    }
}
