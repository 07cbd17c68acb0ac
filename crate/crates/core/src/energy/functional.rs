//! The energy functional `J` on the ring ansatz, the pairing with the
//! kernel directions and the expansion check.
//!
//! `J(u) = c_N/2 int |grad u|^2 + 1/2* int K(|y|/mu) u^{2*}
//!        - (N-2) int_bd H(|y'|/mu) u^{2#}`.
//!
//! [`J_full`] never differentiates numerically. Green's identity with the
//! exact bubble equations turns the gradient term into
//! `-1/2 int W sum_j U_j^p + (N-1) H(r0) int_bd W sum_j U_j^q`, after which
//!
//! ```text
//! J(W) = k [(1/2* - 1/2) a_N + H(r0) b_N]                  closed form
//!      + k/2* int (K - 1) U_1^{2*}                          axial quadrature
//!      - k (N-2) int_bd (H - H(r0)) U_1^{2#}                axial quadrature
//!      + k int_{Omega_1} R_in + k int_{bd Omega_1} R_bd     Monte Carlo
//! ```
//!
//! with the interaction remainders
//! `R_in = -1/2 sum_j U_j^p (W - U_j) + K [W^{2*} - sum U_j^{2*}] / 2*` and
//! `R_bd = (N-1) H(r0) sum_j U_j^q (W - U_j) - (N-2) H [W^{2#} - sum U_j^{2#}]`.
//! Only the remainders are sampled, so the Monte Carlo error is relative to
//! the interaction energy rather than to `J`.

use serde::{Deserialize, Serialize};

use crate::bubble::{bubble_derivatives, c_n, crit_exp, sector_index, trace_exp, RingConfig, Shape};
use crate::coeffs::{bubble_closed_forms, ring_sum, ExpansionConstants};
use crate::error::{CoeffError, EnergyError};
use crate::model::{mu, Profiles};
use crate::quad::{integrate_mc_halfspace, integrate_reduced, IntegralResult, Integrand, McDomain, MixtureSampler};
use crate::quad::{QuadratureSpec, Reduction, Symmetry};

use super::fields::power_excess;

/// Sample budget and seed of a Monte Carlo integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSpec {
    pub samples: usize,
    pub seed: u64,
}

/// Tail exponent of the boundary sampler; the boundary remainder decays like
/// `|y|^{-N}` on `R^{N-1}`, which needs `kappa < 2` for finite variance.
const BOUNDARY_KAPPA: f64 = 1.0;

/// The pieces of [`J_full`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JParts {
    /// `k A` with the curvatures frozen at `r0`.
    pub single: f64,
    pub profile_in: IntegralResult,
    pub profile_bd: IntegralResult,
    pub interaction_in: IntegralResult,
    pub interaction_bd: IntegralResult,
    pub total: IntegralResult,
}

fn sector_weight(y: &[f64], ring: &RingConfig) -> f64 {
    match sector_index(y, ring) {
        Ok(1) => ring.k as f64,
        _ => 0.0,
    }
}

/// Prefix/suffix sums give `W - U_j` without cancellation.
fn others(values: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.resize(values.len(), 0.0);
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        out[i] = acc;
        acc += v;
    }
    acc = 0.0;
    for (i, v) in values.iter().enumerate().rev() {
        out[i] += acc;
        acc += v;
    }
}

/// Every term of `J(W_{r, Lambda})`.
#[allow(non_snake_case)]
pub fn J_full_parts(ring: &RingConfig, spec: &QuadratureSpec, mc: &McSpec) -> Result<JParts, EnergyError> {
    let params = &ring.params;
    let dim = ring.dim();
    let nf = params.nf();
    let kf = ring.k as f64;
    let profiles = Profiles::new(params)?;
    let m = mu(ring.k, params);
    let shape = Shape::new(dim, params.dfrak);
    let lambda = ring.lambda;
    let (two_star, two_sharp) = (crit_exp(dim), trace_exp(dim));
    let (p, q) = (two_star - 1.0, two_sharp - 1.0);
    let h0 = params.h0();
    let r = ring.r;

    let cf = bubble_closed_forms(dim, params.dfrak).map_err(CoeffError::from)?;
    let single = kf * ((1.0 / two_star - 0.5) * cf.a_n + h0 * cf.b_n);

    // single-bubble profile terms, in coordinates z = y - x_1
    let kprof = profiles.k;
    let f_in = move |z: &[f64]| {
        let (z1, s, t) = (z[0], z[1], z[dim - 1]);
        let y = ((r + z1) * (r + z1) + s * s + t * t).sqrt();
        let dev = kprof.deviation(y / m);
        if dev == 0.0 {
            return 0.0;
        }
        dev * shape.value(z1 * z1 + s * s, t, lambda).powf(two_star)
    };
    let ig = Integrand::new(dim, Symmetry::Axial, 2.0 * nf, &f_in).with_scale(1.0 / lambda);
    let profile_in = if params.c0 == 0.0 {
        IntegralResult::zero()
    } else {
        integrate_reduced(&ig, Reduction::Axial3, spec).map_err(CoeffError::from)?.scale(kf / two_star)
    };
    let hprof = profiles.h;
    let f_bd = move |z: &[f64]| {
        let (z1, s) = (z[0], z[1]);
        let y = ((r + z1) * (r + z1) + s * s).sqrt();
        let dev = hprof.deviation(y / m);
        if dev == 0.0 {
            return 0.0;
        }
        dev * shape.value(z1 * z1 + s * s, 0.0, lambda).powf(two_sharp)
    };
    let ig = Integrand::new(dim, Symmetry::Axial, 2.0 * (nf - 1.0), &f_bd).with_scale(1.0 / lambda);
    let profile_bd = if params.d0 == 0.0 {
        IntegralResult::zero()
    } else {
        integrate_reduced(&ig, Reduction::BoundaryAxial2, spec).map_err(CoeffError::from)?.scale(-kf * (nf - 2.0))
    };

    let (interaction_in, interaction_bd) = if ring.k == 1 {
        (IntegralResult::zero(), IntegralResult::zero())
    } else {
        let mut x1 = vec![0.0; dim];
        x1[0] = r;
        let r_in = |y: &[f64]| {
            let w = sector_weight(y, ring);
            if w == 0.0 {
                return 0.0;
            }
            let mut u = Vec::with_capacity(ring.k);
            let mut rest = Vec::with_capacity(ring.k);
            ring.bubble_values(y, &mut u);
            others(&u, &mut rest);
            let ylen = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let kval = kprof.eval(ylen / m);
            let green: f64 = u.iter().zip(&rest).map(|(a, b)| a.powf(p) * b).sum();
            w * (-0.5 * green + kval * power_excess(&u, two_star) / two_star)
        };
        let r_bd = |y: &[f64]| {
            let w = sector_weight(y, ring);
            if w == 0.0 {
                return 0.0;
            }
            let mut u = Vec::with_capacity(ring.k);
            let mut rest = Vec::with_capacity(ring.k);
            ring.bubble_values(y, &mut u);
            others(&u, &mut rest);
            let ylen = y[..dim - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
            let hval = hprof.eval(ylen / m);
            let green: f64 = u.iter().zip(&rest).map(|(a, b)| a.powf(q) * b).sum();
            w * ((nf - 1.0) * h0 * green - (nf - 2.0) * hval * power_excess(&u, two_sharp))
        };
        let s_in = MixtureSampler::new(dim, McDomain::HalfSpace, vec![x1.clone()], 1.0 / lambda);
        let mut s_bd = MixtureSampler::new(dim, McDomain::Boundary, vec![x1], 1.0 / lambda);
        s_bd.kappa = BOUNDARY_KAPPA;
        let a = integrate_mc_halfspace(r_in, &s_in, mc.samples, mc.seed);
        let b = integrate_mc_halfspace(r_bd, &s_bd, mc.samples, mc.seed.wrapping_add(1));
        (a, b)
    };

    let mut total = profile_in.combine(1.0, &profile_bd, 1.0);
    total = total.combine(1.0, &interaction_in, 1.0).combine(1.0, &interaction_bd, 1.0);
    // MC and quadrature errors are independent: add MC parts in quadrature
    let quad_err = profile_in.error_estimate + profile_bd.error_estimate;
    let mc_err = interaction_in.error_estimate.hypot(interaction_bd.error_estimate);
    total.value += single;
    total.error_estimate = quad_err + mc_err;
    Ok(JParts { single, profile_in, profile_bd, interaction_in, interaction_bd, total })
}

/// `J(W_{r, Lambda})` with its combined error estimate.
#[allow(non_snake_case)]
pub fn J_full(ring: &RingConfig, spec: &QuadratureSpec, mc: &McSpec) -> Result<IntegralResult, EnergyError> {
    Ok(J_full_parts(ring, spec, mc)?.total)
}

/// Brute-force Monte Carlo of the defining integrals of `J`, gradient term
/// from the analytic bubble gradients; an independent check of
/// [`J_full`] with a much larger error bar.
#[allow(non_snake_case)]
pub fn J_direct_mc(ring: &RingConfig, mc: &McSpec) -> Result<IntegralResult, EnergyError> {
    let params = &ring.params;
    let dim = ring.dim();
    let nf = params.nf();
    let profiles = Profiles::new(params)?;
    let m = mu(ring.k, params);
    let cn = c_n(dim);
    let (two_star, two_sharp) = (crit_exp(dim), trace_exp(dim));
    let bubbles: Vec<_> = (0..ring.k).map(|j| ring.bubble(j)).collect();
    let f_in = |y: &[f64]| {
        let w = sector_weight(y, ring);
        if w == 0.0 {
            return 0.0;
        }
        let mut grad = vec![0.0; dim];
        let mut val = 0.0;
        for b in &bubbles {
            let d = bubble_derivatives(y, b);
            val += d.value;
            for (g, dg) in grad.iter_mut().zip(&d.gradient) {
                *g += dg;
            }
        }
        let g2: f64 = grad.iter().map(|v| v * v).sum();
        let ylen = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        w * (0.5 * cn * g2 + profiles.k.eval(ylen / m) * val.powf(two_star) / two_star)
    };
    let f_bd = |y: &[f64]| {
        let w = sector_weight(y, ring);
        if w == 0.0 {
            return 0.0;
        }
        let ylen = y[..dim - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
        -w * (nf - 2.0) * profiles.h.eval(ylen / m) * ring_value(ring, y).powf(two_sharp)
    };
    let mut x1 = vec![0.0; dim];
    x1[0] = ring.r;
    let s_in = MixtureSampler::new(dim, McDomain::HalfSpace, vec![x1.clone()], 1.0 / ring.lambda);
    let mut s_bd = MixtureSampler::new(dim, McDomain::Boundary, vec![x1], 1.0 / ring.lambda);
    s_bd.kappa = BOUNDARY_KAPPA;
    let a = integrate_mc_halfspace(f_in, &s_in, mc.samples, mc.seed);
    let b = integrate_mc_halfspace(f_bd, &s_bd, mc.samples, mc.seed.wrapping_add(1));
    let mut total = a.combine(1.0, &b, 1.0);
    total.error_estimate = a.error_estimate.hypot(b.error_estimate);
    Ok(total)
}

fn ring_value(ring: &RingConfig, y: &[f64]) -> f64 {
    crate::bubble::w_eval(y, ring)
}

/// Which kernel direction `Z_{i, l}` of the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    /// `l = 1`: `Z_{i,1} = dU_{x_i, Lambda}/dr`
    Radius,
    /// `l = 2`: `Z_{i,2} = dU_{x_i, Lambda}/dLambda`
    Scale,
}

/// Symmetry information about the test function of [`pairing_Z`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiSymmetry {
    /// Invariant under rotations fixing the line through `x_i` parallel to
    /// `e_1` after rotating `x_i` onto the `y_1` axis, with
    /// `|phi(y)| <= C |y|^{-decay}`; integrated by axial quadrature.
    Axial { decay: f64 },
    /// No structure; Monte Carlo.
    General,
}

/// `<Z_{i,l}, phi> = -2 sqrt(N(N-1)) Dfrak int_bd U_i^{2/(N-2)} Z_{i,l} phi
///                  + (N+2) int U_i^{4/(N-2)} Z_{i,l} phi`
/// with `i` 1-based.
#[allow(non_snake_case)]
pub fn pairing_Z(
    phi: &(dyn Fn(&[f64]) -> f64 + Sync),
    symmetry: PhiSymmetry,
    i: usize,
    mode: KernelMode,
    ring: &RingConfig,
    spec: &QuadratureSpec,
    mc: &McSpec,
) -> Result<IntegralResult, EnergyError> {
    assert!(i >= 1 && i <= ring.k, "pairing index {i} outside 1..={}", ring.k);
    let params = &ring.params;
    let dim = ring.dim();
    let nf = params.nf();
    let bubble = ring.bubble(i - 1);
    let theta = 2.0 * std::f64::consts::PI * (i - 1) as f64 / ring.k as f64;
    let (ct, st) = (theta.cos(), theta.sin());
    let w_bd = -2.0 * (nf * (nf - 1.0)).sqrt() * params.dfrak;
    let w_in = nf + 2.0;
    let z_of = |y: &[f64]| {
        let d = bubble_derivatives(y, &bubble);
        let z = match mode {
            KernelMode::Radius => d.d_r.unwrap_or(0.0),
            KernelMode::Scale => d.d_lambda,
        };
        (d.value, z)
    };
    let interior = |y: &[f64]| {
        let (u, z) = z_of(y);
        w_in * u.powf(4.0 / (nf - 2.0)) * z * phi(y)
    };
    let boundary = |y: &[f64]| {
        let (u, z) = z_of(y);
        w_bd * u.powf(2.0 / (nf - 2.0)) * z * phi(y)
    };
    match symmetry {
        PhiSymmetry::Axial { decay } => {
            // rotate x_i onto the positive y_1 axis
            let rotate = |b: &[f64]| {
                let mut y = b.to_vec();
                y[0] = ct * b[0] - st * b[1];
                y[1] = st * b[0] + ct * b[1];
                y
            };
            let fi = |b: &[f64]| interior(&rotate(b));
            let fb = |b: &[f64]| boundary(&rotate(b));
            let z_decay = nf - 2.0;
            let ig_in = Integrand::new(dim, Symmetry::Axial, 4.0 + z_decay + decay, &fi)
                .with_centers(vec![ring.r])
                .with_scale(ring.r + 1.0 / ring.lambda);
            let ig_bd = Integrand::new(dim, Symmetry::Axial, 2.0 + z_decay + decay, &fb)
                .with_centers(vec![ring.r])
                .with_scale(ring.r + 1.0 / ring.lambda);
            let a = integrate_reduced(&ig_in, Reduction::Axial3, spec).map_err(CoeffError::from)?;
            let b = integrate_reduced(&ig_bd, Reduction::BoundaryAxial2, spec).map_err(CoeffError::from)?;
            Ok(a.combine(1.0, &b, 1.0))
        }
        PhiSymmetry::General => {
            let mut xi = vec![0.0; dim];
            xi[0] = ring.r * ct;
            xi[1] = ring.r * st;
            let s_in = MixtureSampler::new(dim, McDomain::HalfSpace, vec![xi.clone()], 1.0 / ring.lambda);
            let mut s_bd = MixtureSampler::new(dim, McDomain::Boundary, vec![xi], 1.0 / ring.lambda);
            s_bd.kappa = BOUNDARY_KAPPA;
            let a = integrate_mc_halfspace(interior, &s_in, mc.samples, mc.seed);
            let b = integrate_mc_halfspace(boundary, &s_bd, mc.samples, mc.seed.wrapping_add(1));
            let mut out = a.combine(1.0, &b, 1.0);
            out.error_estimate = a.error_estimate.hypot(b.error_estimate);
            Ok(out)
        }
    }
}

/// Relative tolerance applied to `k mu^{-frak_m}` in [`expansion_check`].
pub const DEFAULT_EXPANSION_TOLERANCE: f64 = 0.05;

/// Both sides of the energy expansion at one `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCheck {
    pub k: usize,
    pub mu: f64,
    pub r: f64,
    pub lambda: f64,
    pub j_full: f64,
    pub j_err: f64,
    /// `k` times the bracket with the exact finite ring sum.
    pub leading: f64,
    pub residual: f64,
    /// `max(3 * j_err, tolerance * k * mu^{-frak_m})`
    pub bound: f64,
    /// `k mu^{-(frak_m + sigma)}`, the size of the neglected terms.
    pub residual_bound_prediction: f64,
    /// `leading - k A`: the part of the bracket the check is meant to resolve.
    pub resolved_part: f64,
    pub pass: bool,
}

/// `J(W)` against `k [A - B sum 1/(L|x_i - x_1|)^{N-2} - c0 d3 / (2* L^m mu^m)
/// + (N-2) d0 d5 / (L^n mu^n)]` at `r = mu r0`.
pub fn expansion_check(
    k: usize,
    c: &ExpansionConstants,
    lambda: f64,
    tolerance: f64,
    spec: &QuadratureSpec,
    mc: &McSpec,
) -> Result<ExpansionCheck, EnergyError> {
    let params = &c.params;
    let nf = params.nf();
    let kf = k as f64;
    let m = mu(k, params);
    let r = m * params.r0;
    let ring = RingConfig::new(k, r, lambda, params.clone());
    let j = J_full(&ring, spec, mc)?;
    let interaction = if k >= 2 { ring_sum(k, r, nf - 2.0) * lambda.powf(2.0 - nf) } else { 0.0 };
    let two_star = crit_exp(params.dim);
    let bracket = c.a - c.b * interaction - params.c0 * c.d3 / (two_star * (lambda * m).powf(params.m))
        + (nf - 2.0) * params.d0 * c.d5 / (lambda * m).powf(params.n);
    let leading = kf * bracket;
    let residual = j.value - leading;
    let fm = params.frak_m();
    let bound = (3.0 * j.error_estimate).max(tolerance * kf * m.powf(-fm));
    Ok(ExpansionCheck {
        k,
        mu: m,
        r,
        lambda,
        j_full: j.value,
        j_err: j.error_estimate,
        leading,
        residual,
        bound,
        residual_bound_prediction: kf * m.powf(-(fm + params.sigma)),
        resolved_part: leading - kf * c.a,
        pass: residual.abs() <= bound,
    })
}

/// `(sum over the sector grid)`: nothing; kept private to the module tests.
#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::{BubbleParams, Field};
    use crate::energy::test_support::reference_constants;
    use crate::model::ProblemParams;
    use approx::assert_relative_eq;

    fn flat(dfrak: f64) -> ProblemParams {
        let mut p = ProblemParams::reference();
        p.c0 = 0.0;
        p.d0 = 0.0;
        p.dfrak = dfrak;
        p
    }

    fn quick() -> QuadratureSpec {
        QuadratureSpec::default().with_rel_tol(1e-7)
    }

    #[test]
    fn single_bubble_energy_is_a() {
        for dfrak in [1.5, 2.0] {
            let ring = RingConfig::new(1, 2.0, 0.8, flat(dfrak));
            let mc = McSpec { samples: 1000, seed: 1 };
            let j = J_full(&ring, &quick(), &mc).unwrap();
            let c = crate::coeffs::compute_constants(&flat(dfrak), &quick()).unwrap();
            assert_relative_eq!(j.value, c.a, max_relative = 1e-6);
        }
    }

    #[test]
    fn direct_mc_agrees_with_decomposition() {
        let p = ProblemParams::reference();
        let ring = RingConfig::new(3, 27.0, 0.6, p);
        let mc = McSpec { samples: 400_000, seed: 11 };
        let a = J_full(&ring, &quick(), &mc).unwrap();
        let b = J_direct_mc(&ring, &mc).unwrap();
        let tol = 4.0 * (a.error_estimate + b.error_estimate);
        assert!((a.value - b.value).abs() <= tol, "{} vs {} (tol {tol})", a.value, b.value);
        // the decomposition is far more precise
        assert!(a.error_estimate < 0.1 * b.error_estimate);
    }

    #[test]
    fn more_samples_shrink_the_error() {
        let ring = RingConfig::new(4, 3.0, 1.0, ProblemParams::reference());
        let e1 = J_full(&ring, &quick(), &McSpec { samples: 200_000, seed: 5 }).unwrap();
        let e2 = J_full(&ring, &quick(), &McSpec { samples: 400_000, seed: 5 }).unwrap();
        let ratio = e2.error_estimate / e1.error_estimate;
        assert!((ratio - std::f64::consts::FRAC_1_SQRT_2).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let ring = RingConfig::new(5, 6.0, 0.5, ProblemParams::reference());
        let mc = McSpec { samples: 50_000, seed: 99 };
        let a = J_full_parts(&ring, &quick(), &mc).unwrap();
        let b = J_full_parts(&ring, &quick(), &mc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pairing_with_zero_and_odd_test_functions() {
        let ring = RingConfig::new(4, 10.0, 1.0, ProblemParams::reference());
        let mc = McSpec { samples: 100_000, seed: 3 };
        let zero = |_: &[f64]| 0.0;
        let z = pairing_Z(&zero, PhiSymmetry::General, 1, KernelMode::Scale, &ring, &quick(), &mc).unwrap();
        assert_eq!(z.value, 0.0);
        let odd = |y: &[f64]| y[1] / (1.0 + y.iter().map(|v| v * v).sum::<f64>());
        for mode in [KernelMode::Radius, KernelMode::Scale] {
            let v = pairing_Z(&odd, PhiSymmetry::General, 1, mode, &ring, &quick(), &mc).unwrap();
            assert!(v.value.abs() <= 4.0 * v.error_estimate + 1e-12, "{mode:?}: {v:?}");
        }
    }

    #[test]
    fn diagonal_pairing_reduced_matches_mc() {
        let ring = RingConfig::new(4, 10.0, 1.0, ProblemParams::reference());
        let b: BubbleParams = ring.bubble(0);
        let z = move |y: &[f64]| bubble_derivatives(y, &b).d_lambda;
        let red = pairing_Z(&z, PhiSymmetry::Axial { decay: 3.0 }, 1, KernelMode::Scale, &ring, &quick(), &McSpec { samples: 0, seed: 0 })
            .unwrap();
        let mc = pairing_Z(&z, PhiSymmetry::General, 1, KernelMode::Scale, &ring, &quick(), &McSpec { samples: 400_000, seed: 8 })
            .unwrap();
        assert!((red.value - mc.value).abs() <= 4.0 * mc.error_estimate, "{red:?} vs {mc:?}");
        // the same value at every bubble of the ring
        let b3 = ring.bubble(2);
        let z3 = move |y: &[f64]| bubble_derivatives(y, &b3).d_lambda;
        let red3 = pairing_Z(&z3, PhiSymmetry::Axial { decay: 3.0 }, 3, KernelMode::Scale, &ring, &quick(), &McSpec { samples: 0, seed: 0 })
            .unwrap();
        assert_relative_eq!(red.value, red3.value, max_relative = 1e-6);
        let _ = ring.value(&[0.0; 5]);
    }

    #[test]
    fn diagonal_pairing_is_minus_the_dirichlet_energy() {
        // with the linearized bubble equations Green's identity gives
        // <Z, Z> = -(N-2) c_N int |grad Z|^2
        let ring = RingConfig::new(4, 10.0, 0.7, ProblemParams::reference());
        let b = ring.bubble(0);
        let z = move |y: &[f64]| bubble_derivatives(y, &b).d_lambda;
        let pairing =
            pairing_Z(&z, PhiSymmetry::Axial { decay: 3.0 }, 1, KernelMode::Scale, &ring, &quick(), &McSpec { samples: 0, seed: 0 })
                .unwrap();
        let h = 1e-4;
        let (bp, bm) = (
            BubbleParams::new(vec![10.0, 0.0, 0.0, 0.0], 0.7 + h, 2.0, 5).unwrap(),
            BubbleParams::new(vec![10.0, 0.0, 0.0, 0.0], 0.7 - h, 2.0, 5).unwrap(),
        );
        let grad_sq = move |y: &[f64]| {
            let (gp, gm) = (bubble_derivatives(y, &bp).gradient, bubble_derivatives(y, &bm).gradient);
            gp.iter().zip(&gm).map(|(a, b)| ((a - b) / (2.0 * h)).powi(2)).sum::<f64>()
        };
        let ig = Integrand::new(5, Symmetry::Axial, 8.0, &grad_sq).with_centers(vec![10.0]).with_scale(10.0 + 1.0 / 0.7);
        let dirichlet = integrate_reduced(&ig, Reduction::Axial3, &quick()).unwrap();
        assert!(pairing.value < 0.0);
        assert_relative_eq!(pairing.value, -3.0 * c_n(5) * dirichlet.value, max_relative = 1e-5);
    }

    #[test]
    fn expansion_check_single_bubble() {
        let c = reference_constants();
        let mc = McSpec { samples: 1000, seed: 2 };
        let ck = expansion_check(1, c, 20.0, DEFAULT_EXPANSION_TOLERANCE, &quick(), &mc).unwrap();
        assert!(ck.residual_bound_prediction > 0.0);
        assert_eq!(ck.mu, 1.0);
        // no interaction term; residual is the higher-order profile remainder
        assert!(ck.residual.abs() < 0.05 * ck.resolved_part.abs(), "{ck:?}");
    }
}
