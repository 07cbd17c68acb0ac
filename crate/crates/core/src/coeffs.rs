//! Constants of the reduced energy expansion.
//!
//! Every bubble integral is computed by reduced quadrature; the closed forms
//! in terms of `I_m^alpha` and `phi_m` are kept alongside as independent
//! cross-checks.
//!
//! Note on `alpha_N` bookkeeping: `d1 = alpha_N * int U^{2*-1}` and
//! `d2 = alpha_N * int_bd U^{2#-1}` carry one extra factor `alpha_N` compared
//! with the other integrals, because the interaction integral
//! `int U_1^{2*-1} U_2` is asymptotically `d1 / (Lambda |x_1 - x_2|)^{N-2}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bubble::{alpha_n, crit_exp, trace_exp, Shape};
use crate::error::{CoeffError, QuadError};
use crate::model::{regime, ProblemParams, Regime, RegimeTag};
use crate::quad::{integrate_reduced, sphere_area, IntegralResult, Integrand, QuadratureSpec, Reduction, Symmetry};
use crate::quad::{phi_integral, I_integral};
use crate::special::zeta;

/// How a constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Quadrature,
    ClosedForm,
    RingSum,
}

/// All constants of the expansion together with their provenance and the
/// quadrature error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConstants {
    pub a_n: f64,
    pub b_n: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d5: f64,
    pub d6: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "B0")]
    pub b0: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    #[serde(rename = "B3")]
    pub b3: f64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    pub provenance: BTreeMap<String, Provenance>,
    /// Absolute error estimates of the quadrature constants.
    pub errors: BTreeMap<String, f64>,
    pub regime: Regime,
    pub params: ProblemParams,
}

impl ExpansionConstants {
    /// The active exponent `j` of the reduced functional.
    pub fn j(&self) -> f64 {
        self.regime.j()
    }
}

/// Default `k` values for the ring-sum extrapolation.
pub const DEFAULT_B0_KS: [usize; 4] = [64, 128, 256, 512];

fn radial_power<'a>(dim: usize, dfrak: f64, power: f64, weight_exp: f64) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    let shape = Shape::new(dim, dfrak);
    move |y: &[f64]| {
        let t: f64 = y[..dim - 1].iter().map(|v| v * v).sum();
        let u = shape.value(t, y[dim - 1], 1.0).powf(power);
        if weight_exp == 0.0 {
            u
        } else {
            y[0].abs().powf(weight_exp) * u
        }
    }
}

/// `int_{R^N_+} |y_1|^w U_{0,1}^power` (interior) or the boundary analogue.
pub fn bubble_moment(
    dim: usize,
    dfrak: f64,
    power: f64,
    weight_exp: f64,
    boundary: bool,
    spec: &QuadratureSpec,
) -> Result<IntegralResult, QuadError> {
    let f = radial_power(dim, dfrak, power, weight_exp);
    let decay = power * (dim as f64 - 2.0) - weight_exp;
    let symmetry = if weight_exp == 0.0 { Symmetry::Radial } else { Symmetry::Axial };
    let ig = Integrand::new(dim, symmetry, decay, &f);
    let reduction = match (boundary, weight_exp == 0.0) {
        (false, true) => Reduction::Radial2,
        (false, false) => Reduction::Axial3,
        (true, true) => Reduction::BoundaryRadial1,
        (true, false) => Reduction::BoundaryAxial2,
    };
    integrate_reduced(&ig, reduction, spec)
}

/// Compute every constant of the expansion by quadrature.
pub fn compute_constants(params: &ProblemParams, spec: &QuadratureSpec) -> Result<ExpansionConstants, CoeffError> {
    let n = params.dim;
    let nf = n as f64;
    let dd = params.dfrak;
    let alpha = alpha_n(n);
    let two_star = crit_exp(n);
    let two_sharp = trace_exp(n);
    let h0 = params.h0();

    let a_n = bubble_moment(n, dd, two_star, 0.0, false, spec)?;
    let b_n = bubble_moment(n, dd, two_sharp, 0.0, true, spec)?;
    let d1 = bubble_moment(n, dd, two_star - 1.0, 0.0, false, spec)?.scale(alpha);
    let d2 = bubble_moment(n, dd, two_sharp - 1.0, 0.0, true, spec)?.scale(alpha);
    // |y_1|^0 still goes through the axial reduction so the degenerate case
    // stays an independent computation
    let axial = |power: f64, w: f64, boundary: bool| -> Result<IntegralResult, QuadError> {
        let f = radial_power(n, dd, power, w);
        let decay = power * (nf - 2.0) - w;
        let ig = Integrand::new(n, Symmetry::Axial, decay, &f);
        let red = if boundary { Reduction::BoundaryAxial2 } else { Reduction::Axial3 };
        integrate_reduced(&ig, red, spec)
    };
    let d3 = axial(two_star, params.m, false)?;
    let d4 = axial(two_star, params.m - 2.0, false)?;
    let d5 = axial(two_sharp, params.n, true)?;
    let d6 = axial(two_sharp, params.n - 2.0, true)?;

    let a = (1.0 / two_star - 0.5) * a_n.value + h0 * b_n.value;
    let b = -0.5 * d1.value + (nf - 1.0) * h0 * d2.value;
    let b0 = b0_extrapolate(&DEFAULT_B0_KS, 1.0, n)?.b0;
    let b1 = b * b0;
    let (c0, d0) = (params.c0, params.d0);
    let fm = params.frak_m();
    let b2 = -c0 / two_star * d3.value + d0 * (nf - 2.0) * d5.value;
    let b3 = -fm * (fm - 1.0) * c0 / (2.0 * two_star) * d4.value + fm * (fm - 1.0) * d0 * (nf - 2.0) / 2.0 * d6.value;
    let reg = regime(params);
    let (a1, a2) = match reg.tag {
        RegimeTag::MDominant => {
            let m = params.m;
            (-c0 / two_star * d3.value, -m * (m - 1.0) * c0 / (2.0 * two_star) * d4.value)
        }
        RegimeTag::NDominant => {
            let nn = params.n;
            ((nf - 2.0) * d0 * d5.value, nn * (nn - 1.0) * (nf - 2.0) * d0 / 2.0 * d6.value)
        }
        RegimeTag::Balanced => (b2, b3),
    };

    let mut provenance = BTreeMap::new();
    for key in ["a_n", "b_n", "d1", "d2", "d3", "d4", "d5", "d6", "A", "B", "B2", "B3", "A1", "A2"] {
        provenance.insert(key.to_string(), Provenance::Quadrature);
    }
    provenance.insert("B0".into(), Provenance::RingSum);
    provenance.insert("B1".into(), Provenance::RingSum);
    let mut errors = BTreeMap::new();
    for (key, r) in [("a_n", a_n), ("b_n", b_n), ("d1", d1), ("d2", d2), ("d3", d3), ("d4", d4), ("d5", d5), ("d6", d6)] {
        errors.insert(key.to_string(), r.error_estimate);
    }

    Ok(ExpansionConstants {
        a_n: a_n.value,
        b_n: b_n.value,
        d1: d1.value,
        d2: d2.value,
        d3: d3.value,
        d4: d4.value,
        d5: d5.value,
        d6: d6.value,
        a,
        b,
        b0,
        b1,
        b2,
        b3,
        a1,
        a2,
        provenance,
        errors,
        regime: reg,
        params: params.clone(),
    })
}

/// `B = alpha_N^{2*}/2 * |S^{N-2}| * I^{N-2}_{N/2+1}`, which does not depend
/// on `Dfrak`.
#[allow(non_snake_case)]
pub fn B_closed_form(params: &ProblemParams) -> f64 {
    let n = params.dim;
    let nf = n as f64;
    let i = I_integral(nf - 2.0, nf / 2.0 + 1.0).expect("convergent for every N >= 3");
    alpha_n(n).powf(crit_exp(n)) / 2.0 * sphere_area(n - 1) * i
}

/// Closed forms of the four basic bubble integrals in terms of `I_m^alpha`
/// and `phi_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubbleClosedForms {
    pub a_n: f64,
    pub b_n: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn bubble_closed_forms(dim: usize, dfrak: f64) -> Result<BubbleClosedForms, QuadError> {
    let nf = dim as f64;
    let s = sphere_area(dim - 1);
    let a2s = alpha_n(dim).powf(crit_exp(dim));
    let a2h = alpha_n(dim).powf(trace_exp(dim));
    let g = dfrak * dfrak - 1.0;
    Ok(BubbleClosedForms {
        a_n: a2s * s * I_integral(nf - 2.0, nf)? * phi_integral((nf + 1.0) / 2.0, dfrak)?,
        b_n: a2h * s * I_integral(nf - 2.0, nf - 1.0)? * g.powf(-(nf - 1.0) / 2.0),
        d1: a2s * s * I_integral(nf - 2.0, (nf + 2.0) / 2.0)? * phi_integral(1.5, dfrak)?,
        d2: a2h * s * I_integral(nf - 2.0, nf / 2.0)? / g.sqrt(),
    })
}

/// `sum_{j=2}^k |x_j - x_1|^{-beta0}` for the regular `k`-gon of radius `r`.
pub fn ring_sum(k: usize, r: f64, beta0: f64) -> f64 {
    assert!(k >= 2, "ring_sum needs k >= 2");
    let kf = k as f64;
    let mut acc = 0.0;
    for j in 1..k {
        let d = 2.0 * r * (std::f64::consts::PI * j as f64 / kf).sin();
        acc += d.powf(-beta0);
    }
    acc
}

/// Result of the ring-sum extrapolation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct B0Fit {
    pub b0: f64,
    /// Coefficient of the `k^{-(N-3)}` correction.
    pub slope: f64,
    /// Root-mean-square fit residual.
    pub residual: f64,
    /// `2 zeta(N-2) / (2 pi)^{N-2}`, recorded for comparison only.
    pub zeta_hypothesis: f64,
}

/// Fit `ring_sum(k, r, N-2) r^{N-2} / k^{N-2} = B0 + c / k^{N-3}` by least
/// squares and return the extrapolated `B0`.
#[allow(non_snake_case)]
pub fn B0_extrapolate(k_list: &[usize], r: f64, dim: usize) -> Result<B0Fit, CoeffError> {
    b0_extrapolate(k_list, r, dim)
}

fn b0_extrapolate(k_list: &[usize], r: f64, dim: usize) -> Result<B0Fit, CoeffError> {
    if k_list.len() < 4 || k_list.windows(2).any(|w| w[1] <= w[0]) || k_list[0] < 2 {
        return Err(CoeffError::FitIllConditioned("need at least four increasing k >= 2".into()));
    }
    let beta = dim as f64 - 2.0;
    let xs: Vec<f64> = k_list.iter().map(|&k| (k as f64).powf(-(beta - 1.0))).collect();
    let ys: Vec<f64> = k_list
        .iter()
        .map(|&k| ring_sum(k, r, beta) * (r / k as f64).powf(beta))
        .collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-300) {
        return Err(CoeffError::FitIllConditioned("k values too close".into()));
    }
    let slope = sxy / sxx;
    let b0 = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - b0 - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    let zeta_hypothesis = 2.0 * zeta(beta)? / (2.0 * std::f64::consts::PI).powf(beta);
    Ok(B0Fit { b0, slope, residual, zeta_hypothesis })
}

/// Critical scale `Lambda_0` of the active regime, the root of
/// `-j A1 / Lambda^{j+1} + (N-2) B1 / (Lambda^{N-1} r0^{N-2}) = 0`.
pub fn lambda0(reg: &Regime, c: &ExpansionConstants, params: &ProblemParams) -> Result<f64, CoeffError> {
    if !reg.admissible {
        return Err(CoeffError::InadmissibleRegime);
    }
    let nf = params.nf();
    let rn = params.r0.powf(nf - 2.0);
    let two_star = crit_exp(params.dim);
    let (radicand, j) = match reg.tag {
        RegimeTag::MDominant => {
            let m = params.m;
            (two_star * c.b1 * (nf - 2.0) / (-params.c0 * m * c.d3 * rn), m)
        }
        RegimeTag::NDominant => {
            let n = params.n;
            (c.b1 / (params.d0 * n * c.d5 * rn), n)
        }
        RegimeTag::Balanced => {
            let fm = params.frak_m();
            (c.b1 * (nf - 2.0) / (c.b2 * fm * rn), fm)
        }
    };
    if !(radicand > 0.0) || !radicand.is_finite() {
        return Err(CoeffError::InadmissibleRegime);
    }
    Ok(radicand.powf(1.0 / (nf - 2.0 - j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ring_sum_examples() {
        let expect = 2.0 / 2f64.sqrt().powi(3) + 1.0 / 8.0;
        assert_relative_eq!(ring_sum(4, 1.0, 3.0), expect, max_relative = 1e-14);
        assert_relative_eq!(ring_sum(4, 1.0, 3.0), 0.832107, max_relative = 1e-6);
        assert_relative_eq!(ring_sum(2, 1.0, 3.0), 0.125, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn ring_sum_homogeneous(k in 2usize..200, r in 0.1f64..50.0, beta in 0.5f64..4.0) {
            let a = ring_sum(k, 2.0 * r, beta);
            let b = 2f64.powf(-beta) * ring_sum(k, r, beta);
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn b0_fit() {
        let fit = B0_extrapolate(&DEFAULT_B0_KS, 1.0, 5).unwrap();
        let far = B0_extrapolate(&[256, 512, 1024, 2048], 1.0, 5).unwrap();
        assert!((fit.b0 - far.b0).abs() < 1e-3 * far.b0);
        let r10 = B0_extrapolate(&DEFAULT_B0_KS, 10.0, 5).unwrap();
        assert!((fit.b0 - r10.b0).abs() <= 1e-12 * fit.b0);
        // brute-force check of the zeta hypothesis: the extrapolation error
        // shrinks towards it as k grows
        assert!((far.b0 - far.zeta_hypothesis).abs() < (fit.b0 - fit.zeta_hypothesis).abs());
        assert!((far.b0 - far.zeta_hypothesis).abs() < 1e-4 * far.b0);
        assert!(B0_extrapolate(&[64, 128, 256], 1.0, 5).is_err());
        assert!(B0_extrapolate(&[64, 32, 256, 512], 1.0, 5).is_err());
    }

    #[test]
    fn b_closed_form_values() {
        let p = ProblemParams::reference();
        let b = B_closed_form(&p);
        let expect = 80f64.powf(2.5) / 2.0 * 2.0 * std::f64::consts::PI.powi(2) * (2.0 / 15.0);
        assert_relative_eq!(b, expect, max_relative = 1e-13);
        assert_relative_eq!(b, 7.533e4, max_relative = 1e-3);
        for n in 5..=10 {
            let mut q = p.clone();
            q.dim = n;
            assert!(B_closed_form(&q) > 0.0);
        }
    }

    #[test]
    fn closed_forms_assemble_b() {
        for n in [5usize, 6, 7] {
            for dd in [1.5, 2.0, 3.0] {
                let cf = bubble_closed_forms(n, dd).unwrap();
                let h0 = crate::model::h_at_r0(n, dd);
                let b = -0.5 * cf.d1 + (n as f64 - 1.0) * h0 * cf.d2;
                let mut p = ProblemParams::reference();
                p.dim = n;
                assert_relative_eq!(b, B_closed_form(&p), max_relative = 1e-12);
            }
        }
        let cf = bubble_closed_forms(5, 2.0).unwrap();
        assert_relative_eq!(cf.d1, 2.3307e4, max_relative = 1e-4);
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let spec = QuadratureSpec::default().with_rel_tol(1e-10);
        for dd in [1.5, 2.0] {
            let cf = bubble_closed_forms(5, dd).unwrap();
            let a = bubble_moment(5, dd, crit_exp(5), 0.0, false, &spec).unwrap();
            assert_relative_eq!(a.value, cf.a_n, max_relative = 1e-9);
            let b = bubble_moment(5, dd, trace_exp(5), 0.0, true, &spec).unwrap();
            assert_relative_eq!(b.value, cf.b_n, max_relative = 1e-9);
        }
    }

    #[test]
    fn lambda0_regimes() {
        let mut c = compute_constants(&ProblemParams::reference(), &QuadratureSpec::default().with_rel_tol(1e-8)).unwrap();
        let p = ProblemParams::reference();
        let reg = regime(&p);
        let l0 = lambda0(&reg, &c, &p).unwrap();
        // root of the bracket
        let nf = 5.0;
        let j = reg.j();
        let bracket = -j * c.a1 / l0.powf(j + 1.0) + (nf - 2.0) * c.b1 / (l0.powf(nf - 1.0) * p.r0.powf(nf - 2.0));
        assert!(bracket.abs() <= 1e-12 * (j * c.a1 / l0.powf(j + 1.0)));

        // N-dominant homogeneity in d0
        let mut q = ProblemParams::new(7, 3.0, 2.0, 0.5, 1.0, 1.0, 2.0);
        let rq = regime(&q);
        c.params = q.clone();
        c.d5 = 3.0;
        c.b1 = 5.0;
        let l1 = lambda0(&rq, &c, &q).unwrap();
        q.d0 *= 4.0;
        let l2 = lambda0(&rq, &c, &q).unwrap();
        assert_relative_eq!(l2 / l1, 4f64.powf(-1.0 / (7.0 - 2.0 - 2.0)), max_relative = 1e-13);

        let bad = ProblemParams::new(5, 2.0, 2.5, 1.0, 1.0, 1.0, 2.0);
        assert_eq!(lambda0(&regime(&bad), &c, &bad), Err(CoeffError::InadmissibleRegime));
    }
}
