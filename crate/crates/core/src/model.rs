//! Problem parameters, local curvature profiles, the scaling law and the
//! sign table deciding which regimes carry ring solutions.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_DELTA_FRACTION: f64 = 0.5;
pub const DEFAULT_THETA_BAR: f64 = 0.05;
pub const DEFAULT_SIGMA: f64 = 0.1;

/// Parameters of the curvature problem.
///
/// `K(r) = 1 - c0 |r - r0|^m` and `H(r) = Dfrak / sqrt(N(N-1)) - d0 |r - r0|^n`
/// near `r0`; the JSON form uses the field names `N, m, n, c0, d0, r0, Dfrak,
/// theta, delta, theta_bar, sigma` and rejects anything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawParams")]
pub struct ProblemParams {
    #[serde(rename = "N")]
    pub dim: usize,
    pub m: f64,
    pub n: f64,
    pub c0: f64,
    pub d0: f64,
    pub r0: f64,
    #[serde(rename = "Dfrak")]
    pub dfrak: f64,
    pub theta: f64,
    pub delta: f64,
    pub theta_bar: f64,
    pub sigma: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "N")]
    dim: usize,
    m: f64,
    n: f64,
    c0: f64,
    d0: f64,
    r0: f64,
    #[serde(rename = "Dfrak")]
    dfrak: f64,
    theta: Option<f64>,
    delta: Option<f64>,
    theta_bar: Option<f64>,
    sigma: Option<f64>,
}

impl From<RawParams> for ProblemParams {
    fn from(raw: RawParams) -> Self {
        ProblemParams {
            dim: raw.dim,
            m: raw.m,
            n: raw.n,
            c0: raw.c0,
            d0: raw.d0,
            r0: raw.r0,
            dfrak: raw.dfrak,
            theta: raw.theta.unwrap_or(DEFAULT_THETA),
            delta: raw.delta.unwrap_or(DEFAULT_DELTA_FRACTION * raw.r0),
            theta_bar: raw.theta_bar.unwrap_or(DEFAULT_THETA_BAR),
            sigma: raw.sigma.unwrap_or(DEFAULT_SIGMA),
        }
    }
}

impl ProblemParams {
    /// Parameters with the default smallness constants filled in.
    pub fn new(dim: usize, m: f64, n: f64, c0: f64, d0: f64, r0: f64, dfrak: f64) -> Self {
        ProblemParams {
            dim,
            m,
            n,
            c0,
            d0,
            r0,
            dfrak,
            theta: DEFAULT_THETA,
            delta: DEFAULT_DELTA_FRACTION * r0,
            theta_bar: DEFAULT_THETA_BAR,
            sigma: DEFAULT_SIGMA,
        }
    }

    /// The reference configuration used throughout the tests and the guide:
    /// `N = 5, m = n = 2, c0 = -1, d0 = 1, r0 = 1, Dfrak = 2`.
    pub fn reference() -> Self {
        Self::new(5, 2.0, 2.0, -1.0, 1.0, 1.0, 2.0)
    }

    pub fn nf(&self) -> f64 {
        self.dim as f64
    }

    /// `min(m, n)`.
    pub fn frak_m(&self) -> f64 {
        self.m.min(self.n)
    }

    /// Boundary mean curvature at `r0`, `Dfrak / sqrt(N(N-1))`.
    pub fn h0(&self) -> f64 {
        h_at_r0(self.dim, self.dfrak)
    }
}

/// `H(r0) = Dfrak / sqrt(N (N-1))`.
pub fn h_at_r0(dim: usize, dfrak: f64) -> f64 {
    let nf = dim as f64;
    dfrak / (nf * (nf - 1.0)).sqrt()
}

/// Parameters that passed [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedParams(ProblemParams);

impl Deref for ValidatedParams {
    type Target = ProblemParams;
    fn deref(&self) -> &ProblemParams {
        &self.0
    }
}

impl ValidatedParams {
    pub fn into_inner(self) -> ProblemParams {
        self.0
    }
}

pub fn validate(params: ProblemParams) -> Result<ValidatedParams, ModelError> {
    if params.dim < 5 {
        return Err(ModelError::DimensionTooSmall(params.dim));
    }
    let upper = params.nf() - 2.0;
    for (name, value) in [("m", params.m), ("n", params.n)] {
        if !(value >= 2.0 && value < upper) {
            return Err(ModelError::ExponentOutOfRange { name, value, upper });
        }
    }
    if !(params.dfrak > 1.0) || !params.dfrak.is_finite() {
        return Err(ModelError::NonPhysicalD(params.dfrak));
    }
    let positive: [(&'static str, f64); 4] = [
        ("r0", params.r0),
        ("delta", params.delta),
        ("theta", params.theta),
        ("theta_bar", params.theta_bar),
    ];
    for (name, value) in positive {
        if !(value > 0.0) || !value.is_finite() {
            return Err(ModelError::InvalidParameter { name, value, reason: "must be positive" });
        }
    }
    for (name, value) in [("theta_bar", params.theta_bar), ("sigma", params.sigma)] {
        if !(value > 0.0 && value < 1.0) {
            return Err(ModelError::InvalidParameter { name, value, reason: "must lie in (0, 1)" });
        }
    }
    for (name, value) in [("c0", params.c0), ("d0", params.d0)] {
        if !value.is_finite() {
            return Err(ModelError::InvalidParameter { name, value, reason: "must be finite" });
        }
    }
    Ok(ValidatedParams(params))
}

/// Radial profile of the form `base - amp |r - r0|^exp`, clamped at the
/// window edge `|r - r0| = delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub base: f64,
    pub amp: f64,
    pub exp: f64,
    pub r0: f64,
    pub delta: f64,
}

impl PowerProfile {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let h = (r - self.r0).abs().min(self.delta);
        self.base - self.amp * h.powf(self.exp)
    }

    /// `eval(r) - base`, without the cancellation.
    #[inline]
    pub fn deviation(&self, r: f64) -> f64 {
        let h = (r - self.r0).abs().min(self.delta);
        if h == 0.0 {
            return 0.0;
        }
        -self.amp * h.powf(self.exp)
    }

    /// Smallest value over the window; attained at the centre or the edge.
    pub fn min_value(&self) -> f64 {
        self.base.min(self.base - self.amp * self.delta.powf(self.exp))
    }
}

/// The pair of curvature profiles `(K, H)` checked for positivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profiles {
    pub k: PowerProfile,
    pub h: PowerProfile,
}

impl Profiles {
    pub fn new(params: &ProblemParams) -> Result<Self, ModelError> {
        let Profiles { k, h } = Self::unchecked(params);
        if !(k.min_value() > 0.0) {
            return Err(ModelError::ProfileNotPositive { profile: "K", min: k.min_value() });
        }
        if !(h.min_value() > 0.0) {
            return Err(ModelError::ProfileNotPositive { profile: "H", min: h.min_value() });
        }
        Ok(Profiles { k, h })
    }

    /// Profiles without the positivity check.
    pub fn unchecked(params: &ProblemParams) -> Self {
        let k = PowerProfile { base: 1.0, amp: params.c0, exp: params.m, r0: params.r0, delta: params.delta };
        let h = PowerProfile { base: params.h0(), amp: params.d0, exp: params.n, r0: params.r0, delta: params.delta };
        Profiles { k, h }
    }

    /// Profiles frozen at their values at `r0` (`K = 1`, `H = H(r0)`).
    pub fn flat(params: &ProblemParams) -> Self {
        let k = PowerProfile { base: 1.0, amp: 0.0, exp: params.m, r0: params.r0, delta: params.delta };
        let h = PowerProfile { base: params.h0(), amp: 0.0, exp: params.n, r0: params.r0, delta: params.delta };
        Profiles { k, h }
    }
}

/// Scalar curvature profile `K(r)`.
pub fn curvature_k(r: f64, params: &ProblemParams) -> Result<f64, ModelError> {
    if !(r > 0.0) {
        return Err(ModelError::NonPositiveRadius(r));
    }
    Ok(Profiles::new(params)?.k.eval(r))
}

/// Boundary mean curvature profile `H(r)`.
pub fn curvature_h(r: f64, params: &ProblemParams) -> Result<f64, ModelError> {
    if !(r >= 0.0) {
        return Err(ModelError::NonPositiveRadius(r));
    }
    Ok(Profiles::new(params)?.h.eval(r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeTag {
    /// `m < n`: the scalar curvature drives the reduced energy.
    MDominant,
    /// `m = n`: both profiles compete.
    Balanced,
    /// `m > n`: the boundary mean curvature drives the reduced energy.
    NDominant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub tag: RegimeTag,
    pub frak_m: f64,
    pub admissible: bool,
}

impl Regime {
    /// The exponent `j` of the active reduced functional (always `min(m, n)`).
    pub fn j(&self) -> f64 {
        self.frak_m
    }
}

pub fn regime(params: &ProblemParams) -> Regime {
    let (m, n, c0, d0) = (params.m, params.n, params.c0, params.d0);
    let (tag, admissible) = if m < n {
        (RegimeTag::MDominant, c0 < 0.0)
    } else if m > n {
        (RegimeTag::NDominant, d0 > 0.0)
    } else {
        (RegimeTag::Balanced, c0 < 0.0 && d0 > 0.0)
    };
    Regime { tag, frak_m: m.min(n), admissible }
}

/// Scaling parameter `mu = k^{(N-2)/(N-2-frak_m)}`.
pub fn mu(k: usize, params: &ProblemParams) -> f64 {
    assert!(k >= 1, "mu needs k >= 1");
    let nm2 = params.nf() - 2.0;
    (k as f64).powf(nm2 / (nm2 - params.frak_m()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn base() -> ProblemParams {
        ProblemParams::new(5, 2.0, 2.0, -1.0, 1.0, 1.0, 2.0)
    }

    #[test]
    fn validate_accepts_and_rejects() {
        assert!(validate(base()).is_ok());
        let mut p = base();
        p.dim = 4;
        assert_eq!(validate(p), Err(ModelError::DimensionTooSmall(4)));
        let mut p = base();
        p.m = 3.0;
        assert!(matches!(validate(p), Err(ModelError::ExponentOutOfRange { name: "m", .. })));
        let mut p = base();
        p.n = 1.5;
        assert!(matches!(validate(p), Err(ModelError::ExponentOutOfRange { name: "n", .. })));
        let mut p = base();
        p.dfrak = 1.0;
        assert_eq!(validate(p), Err(ModelError::NonPhysicalD(1.0)));
        let mut p = base();
        p.sigma = 1.0;
        assert!(matches!(validate(p), Err(ModelError::InvalidParameter { name: "sigma", .. })));
    }

    #[test]
    fn k_profile_values() {
        let p = base();
        assert_eq!(curvature_k(1.0, &p).unwrap(), 1.0);
        let h = 0.3;
        assert_relative_eq!(curvature_k(1.0 + h, &p).unwrap(), 1.0 + h * h, max_relative = 1e-15);
        // clamped at the window edge delta = 0.5
        assert_relative_eq!(curvature_k(1.0 + 2.0 * p.delta, &p).unwrap(), 1.0 + p.delta * p.delta, max_relative = 1e-15);
        assert!(curvature_k(0.0, &p).is_err());
    }

    #[test]
    fn h_profile_values() {
        let p = base();
        assert_relative_eq!(curvature_h(1.0, &p).unwrap(), 2.0 / 20f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(curvature_h(1.2, &p).unwrap(), 2.0 / 20f64.sqrt() - 0.04, max_relative = 1e-14);
        let mut p = base();
        p.d0 = 10.0;
        assert!(matches!(curvature_h(1.0, &p), Err(ModelError::ProfileNotPositive { profile: "H", .. })));
        let mut p = base();
        p.c0 = 5.0;
        assert!(matches!(curvature_k(1.0, &p), Err(ModelError::ProfileNotPositive { profile: "K", .. })));
    }

    #[test]
    fn regime_table() {
        let mut p = base();
        p.n = 2.5;
        p.d0 = 0.0;
        let r = regime(&p);
        assert_eq!(r.tag, RegimeTag::MDominant);
        assert_eq!(r.frak_m, 2.0);
        assert!(r.admissible);
        let r = regime(&base());
        assert_eq!(r.tag, RegimeTag::Balanced);
        assert!(r.admissible);
        let mut p = base();
        p.m = 2.5;
        p.c0 = 1.0;
        p.d0 = -1.0;
        let r = regime(&p);
        assert_eq!(r.tag, RegimeTag::NDominant);
        assert!(!r.admissible);
    }

    #[test]
    fn mu_values() {
        assert_relative_eq!(mu(10, &base()), 1000.0, max_relative = 1e-13);
        assert_eq!(mu(1, &base()), 1.0);
        let p = ProblemParams::new(6, 2.0, 2.0, -1.0, 1.0, 1.0, 2.0);
        assert_relative_eq!(mu(8, &p), 64.0, max_relative = 1e-13);
    }

    #[test]
    fn json_field_names() {
        let json = r#"{"N":5,"m":2,"n":2,"c0":-1,"d0":1,"r0":1,"Dfrak":2}"#;
        let p: ProblemParams = serde_json::from_str(json).unwrap();
        assert_eq!(p, base());
        let back = serde_json::to_value(&p).unwrap();
        for key in ["N", "m", "n", "c0", "d0", "r0", "Dfrak", "theta", "delta", "theta_bar", "sigma"] {
            assert!(back.get(key).is_some(), "missing {key}");
        }
        let bad = r#"{"N":5,"m":2,"n":2,"c0":-1,"d0":1,"r0":1,"Dfrak":2,"extra":3}"#;
        assert!(serde_json::from_str::<ProblemParams>(bad).is_err());
    }

    proptest! {
        #[test]
        fn profiles_even_about_r0(h in 0.0f64..0.49) {
            let p = base();
            let pr = Profiles::new(&p).unwrap();
            prop_assert!((pr.k.eval(1.0 + h) - pr.k.eval(1.0 - h)).abs() < 1e-15);
            prop_assert!((pr.h.eval(1.0 + h) - pr.h.eval(1.0 - h)).abs() < 1e-15);
        }

        #[test]
        fn mu_strictly_increasing(k in 1usize..500) {
            let p = base();
            prop_assert!(mu(k + 1, &p) > mu(k, &p));
            prop_assert!(mu(k + 1, &p) / (k + 1) as f64 >= mu(k, &p) / k as f64);
        }

        #[test]
        fn admissibility_scale_invariant(c0 in -3.0f64..3.0, d0 in -3.0f64..3.0, lam in 0.01f64..100.0, mi in 0usize..3) {
            let (m, n) = [(2.0, 2.5), (2.0, 2.0), (2.5, 2.0)][mi];
            let p = ProblemParams::new(5, m, n, c0, d0, 1.0, 2.0);
            let q = ProblemParams::new(5, m, n, lam * c0, lam * d0, 1.0, 2.0);
            prop_assert_eq!(regime(&p).admissible, regime(&q).admissible);
        }
    }
}
