//! Critical points of the reduced functional and the end-to-end existence
//! report.

use serde::{Deserialize, Serialize};

use crate::coeffs::{compute_constants, lambda0, ExpansionConstants};
use crate::energy::{
    decay_fit, expansion_check, DecayFit, ExpansionCheck, McSpec, ReducedFunctional, Which, WeightedNormSpec,
    DEFAULT_EXPANSION_TOLERANCE,
};
use crate::error::{CoeffError, SolverError};
use crate::model::{mu, regime, validate, ProblemParams, Regime};
use crate::quad::QuadratureSpec;

/// Smallest `k` for which a report attempts a solve.
pub const DEFAULT_K0: usize = 6;

/// The a-priori scale range is `[Lambda_0 / LAMBDA_RANGE, LAMBDA_RANGE * Lambda_0]`.
pub const LAMBDA_RANGE: f64 = 4.0;

/// The box `D_j` around `(mu r0, Lambda_0)`.
///
/// `r` ranges over `mu r0 -+ mu^{-theta_bar}`. The scale interval
/// `Lambda_0 -+ mu^{-3 theta_bar / 2}` is intersected with the a-priori range
/// `[L0, L1]`; for desk-sized `k` the raw interval would reach negative
/// scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDj {
    pub r_lo: f64,
    pub r_hi: f64,
    pub l_lo: f64,
    pub l_hi: f64,
    pub j: f64,
    pub lambda0: f64,
    pub mu: f64,
}

impl BoxDj {
    pub fn new(k: usize, lambda0: f64, params: &ProblemParams) -> Self {
        let m = mu(k, params);
        let hr = m.powf(-params.theta_bar);
        let hl = m.powf(-1.5 * params.theta_bar);
        let rc = m * params.r0;
        BoxDj {
            r_lo: rc - hr,
            r_hi: rc + hr,
            l_lo: (lambda0 - hl).max(lambda0 / LAMBDA_RANGE),
            l_hi: (lambda0 + hl).min(lambda0 * LAMBDA_RANGE),
            j: params.frak_m(),
            lambda0,
            mu: m,
        }
    }

    pub fn r_center(&self) -> f64 {
        0.5 * (self.r_lo + self.r_hi)
    }

    /// Closed-box membership.
    pub fn contains(&self, r: f64, lambda: f64) -> bool {
        (self.r_lo..=self.r_hi).contains(&r) && (self.l_lo..=self.l_hi).contains(&lambda)
    }

    /// Open-box membership.
    pub fn strictly_contains(&self, r: f64, lambda: f64) -> bool {
        r > self.r_lo && r < self.r_hi && lambda > self.l_lo && lambda < self.l_hi
    }

    pub fn project(&self, r: f64, lambda: f64) -> (f64, f64) {
        (r.clamp(self.r_lo, self.r_hi), lambda.clamp(self.l_lo, self.l_hi))
    }
}

/// What the solver differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Objective {
    /// The leading-order `F_j`.
    Reduced,
    /// `F_j + P` with a synthetic smooth perturbation of the size of the
    /// neglected terms,
    /// `P = eps k mu^{-(j+sigma)} [(L - L0)/L0 + (r - mu r0) + ((L - L0)/L0)^2 / 2]`.
    ReducedPlusModeledError { amplitude: f64 },
}

/// Inertia of the 2x2 Hessian at the reported point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HessianSignature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl HessianSignature {
    fn of(h: &[[f64; 2]; 2]) -> Self {
        let tr = h[0][0] + h[1][1];
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        let eig = [0.5 * tr + disc, 0.5 * tr - disc];
        let scale = h[0][0].abs().max(h[1][1].abs()).max(h[0][1].abs());
        let tiny = 1e-12 * scale;
        let mut s = HessianSignature { positive: 0, negative: 0, zero: 0 };
        for e in eig {
            if e > tiny {
                s.positive += 1;
            } else if e < -tiny {
                s.negative += 1;
            } else {
                s.zero += 1;
            }
        }
        s
    }

    pub fn classification(&self) -> &'static str {
        match (self.positive, self.negative) {
            (2, 0) => "local minimum",
            (0, 2) => "local maximum",
            (1, 1) => "saddle",
            _ => "degenerate",
        }
    }
}

/// Constants behind a report, in a compact form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsSummary {
    pub a: f64,
    pub b: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b0: f64,
    pub j: f64,
    pub lambda0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub params: ProblemParams,
    pub regime: Regime,
    pub constants: Option<ConstantsSummary>,
    pub k: usize,
    pub mu: f64,
    pub objective: Objective,
    #[serde(rename = "box")]
    pub domain: Option<BoxDj>,
    /// `(r*, Lambda*)`.
    pub critical_point: Option<[f64; 2]>,
    /// `|(dF/dr, Lambda_0 dF/dLambda)|` at the solution, relative to the size
    /// of the balanced profile and interaction terms.
    pub gradient_norm: Option<f64>,
    pub hessian: Option<[[f64; 2]; 2]>,
    pub hessian_signature: Option<HessianSignature>,
    pub classification: Option<String>,
    pub converged: bool,
    /// Scaled gradient norm after each Newton step.
    pub iterations: Vec<f64>,
    pub notes: Vec<String>,
    pub expansion: Option<ExpansionCheck>,
    pub decay_in: Option<DecayFit>,
    pub decay_bd: Option<DecayFit>,
}

struct Problem<'a> {
    f: &'a ReducedFunctional,
    objective: Objective,
    sigma: f64,
}

impl Problem<'_> {
    fn pert_scale(&self, amplitude: f64) -> f64 {
        amplitude * self.f.k as f64 * self.f.mu.powf(-(self.f.j + self.sigma))
    }

    #[cfg(test)]
    fn value(&self, r: f64, l: f64) -> f64 {
        let base = self.f.value(r, l);
        match self.objective {
            Objective::Reduced => base,
            Objective::ReducedPlusModeledError { amplitude } => {
                let l0 = self.f.lambda0;
                let x = (l - l0) / l0;
                base + self.pert_scale(amplitude) * (x + (r - self.f.domain.r_center()) + 0.5 * x * x)
            }
        }
    }

    fn gradient(&self, r: f64, l: f64) -> [f64; 2] {
        let [gr, gl] = self.f.gradient(r, l);
        match self.objective {
            Objective::Reduced => [gr, gl],
            Objective::ReducedPlusModeledError { amplitude } => {
                let s = self.pert_scale(amplitude);
                let l0 = self.f.lambda0;
                [gr + s, gl + s * (1.0 + (l - l0) / l0) / l0]
            }
        }
    }

    fn hessian(&self, r: f64, l: f64) -> [[f64; 2]; 2] {
        let mut h = self.f.hessian(r, l);
        if let Objective::ReducedPlusModeledError { amplitude } = self.objective {
            let l0 = self.f.lambda0;
            h[1][1] += self.pert_scale(amplitude) / (l0 * l0);
        }
        h
    }

    /// Gradient in the variables `(r, Lambda / Lambda_0)`, relative to the
    /// size of the balanced terms.
    fn scaled_norm(&self, g: [f64; 2]) -> f64 {
        let unit = self.f.profile_scale();
        (g[0] / unit).hypot(g[1] * self.f.lambda0 / unit)
    }
}

/// Outcome of one damped Newton run.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonRun {
    pub point: (f64, f64),
    pub history: Vec<f64>,
    pub converged: bool,
}

fn newton(p: &Problem<'_>, start: (f64, f64), tol: f64, max_iter: usize) -> NewtonRun {
    let dom = &p.f.domain;
    let (mut r, mut l) = dom.project(start.0, start.1);
    let mut g = p.gradient(r, l);
    let mut norm = p.scaled_norm(g);
    let mut history = vec![norm];
    for _ in 0..max_iter {
        if norm <= tol {
            return NewtonRun { point: (r, l), history, converged: true };
        }
        let h = p.hessian(r, l);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dr = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dl = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        // backtracking on the gradient norm, which is the merit function of
        // a stationary-point search
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-6 {
            let (rn, ln) = dom.project(r + t * dr, l + t * dl);
            let gn = p.gradient(rn, ln);
            let nn = p.scaled_norm(gn);
            if nn < norm {
                accepted = Some((rn, ln, gn, nn));
                break;
            }
            t *= 0.5;
        }
        let Some((rn, ln, gn, nn)) = accepted else { break };
        (r, l, g, norm) = (rn, ln, gn, nn);
        history.push(norm);
    }
    NewtonRun { point: (r, l), history, converged: norm <= tol }
}

/// Damped Newton from an arbitrary start, exposed for convergence studies.
pub fn newton_from(
    k: usize,
    c: &ExpansionConstants,
    objective: Objective,
    start: (f64, f64),
    tol: f64,
) -> Result<NewtonRun, SolverError> {
    let f = ReducedFunctional::new(k, c)?;
    let p = Problem { f: &f, objective, sigma: c.params.sigma };
    Ok(newton(&p, start, tol, 100))
}

fn base_report(k: usize, params: &ProblemParams, reg: Regime, objective: Objective) -> ExistenceReport {
    ExistenceReport {
        params: params.clone(),
        regime: reg,
        constants: None,
        k,
        mu: mu(k.max(1), params),
        objective,
        domain: None,
        critical_point: None,
        gradient_norm: None,
        hessian: None,
        hessian_signature: None,
        classification: None,
        converged: false,
        iterations: Vec::new(),
        notes: Vec::new(),
        expansion: None,
        decay_in: None,
        decay_bd: None,
    }
}

/// Locate a stationary point of the objective inside `D_j`.
///
/// Damped Newton seeded at `(mu r0, Lambda_0)`; if it stalls, the best point
/// of a 21 x 21 grid over the box seeds a second run. A solution on the box
/// boundary is reported as [`SolverError::NoInteriorCriticalPoint`].
pub fn find_critical_point(
    k: usize,
    c: &ExpansionConstants,
    objective: Objective,
    tol: f64,
) -> Result<ExistenceReport, SolverError> {
    let params = &c.params;
    let reg = regime(params);
    if !reg.admissible {
        return Err(SolverError::NotAdmissible);
    }
    let f = ReducedFunctional::new(k, c).map_err(|e| match e {
        crate::error::EnergyError::Coeff(CoeffError::InadmissibleRegime) => SolverError::NotAdmissible,
        other => other.into(),
    })?;
    let p = Problem { f: &f, objective, sigma: params.sigma };
    let dom = f.domain.clone();
    let seed = (dom.r_center(), f.lambda0);
    let mut run = newton(&p, seed, tol, 100);
    let mut notes = Vec::new();
    if !run.converged {
        notes.push("Newton stalled from the seed; restarted from the best grid point".to_string());
        let mut best = (f64::INFINITY, seed);
        for i in 0..=20 {
            for jj in 0..=20 {
                let r = dom.r_lo + (dom.r_hi - dom.r_lo) * i as f64 / 20.0;
                let l = dom.l_lo + (dom.l_hi - dom.l_lo) * jj as f64 / 20.0;
                let n = p.scaled_norm(p.gradient(r, l));
                if n < best.0 {
                    best = (n, (r, l));
                }
            }
        }
        let second = newton(&p, best.1, tol, 100);
        run.history.extend(second.history);
        run.point = second.point;
        run.converged = second.converged;
    }
    let (r, l) = run.point;
    if !run.converged {
        return Err(SolverError::NoInteriorCriticalPoint(format!(
            "gradient norm {:.3e} > {tol:.1e} at (r, Lambda) = ({r}, {l})",
            run.history.last().copied().unwrap_or(f64::NAN)
        )));
    }
    if !dom.strictly_contains(r, l) {
        return Err(SolverError::NoInteriorCriticalPoint(format!(
            "stationary point (r, Lambda) = ({r}, {l}) lies on the box boundary"
        )));
    }
    let h = p.hessian(r, l);
    let sig = HessianSignature::of(&h);
    let mut report = base_report(k, params, reg, objective);
    report.constants = Some(ConstantsSummary {
        a: c.a,
        b: c.b,
        a1: c.a1,
        a2: c.a2,
        b1: c.b1,
        b0: c.b0,
        j: c.j(),
        lambda0: f.lambda0,
    });
    report.mu = f.mu;
    report.domain = Some(dom);
    report.critical_point = Some([r, l]);
    report.gradient_norm = run.history.last().copied();
    report.hessian = Some(h);
    report.hessian_signature = Some(sig);
    report.classification = Some(sig.classification().to_string());
    report.converged = true;
    report.iterations = run.history;
    report.notes = notes;
    Ok(report)
}

/// Settings of [`construct_report`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub k0: usize,
    pub tol: f64,
    pub objective: Objective,
    pub quad: QuadratureSpec,
    pub mc: McSpec,
    pub norm: WeightedNormSpec,
    /// `k` values of the decay fits attached by a full report.
    pub decay_k_list: Vec<usize>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            k0: DEFAULT_K0,
            tol: 1e-10,
            objective: Objective::Reduced,
            quad: QuadratureSpec::default(),
            mc: McSpec { samples: 200_000, seed: 0 },
            norm: WeightedNormSpec::default(),
            decay_k_list: vec![6, 8, 12, 16],
        }
    }
}

/// Validate, compute constants, solve and optionally attach the expansion
/// check and the error decay fits.
pub fn construct_report(
    k: usize,
    params: &ProblemParams,
    full: bool,
    opts: &ReportOptions,
) -> Result<ExistenceReport, SolverError> {
    let params = validate(params.clone())?.into_inner();
    let reg = regime(&params);
    if !reg.admissible {
        return Err(SolverError::NotAdmissible);
    }
    if k < opts.k0 {
        let mut report = base_report(k, &params, reg, opts.objective);
        report.notes.push(format!("k = {k} is below k0 = {}; no solve attempted", opts.k0));
        return Ok(report);
    }
    let c = compute_constants(&params, &opts.quad)?;
    let mut report = find_critical_point(k, &c, opts.objective, opts.tol)?;
    if full {
        let l0 = lambda0(&reg, &c, &params)?;
        let check = expansion_check(k, &c, l0, DEFAULT_EXPANSION_TOLERANCE, &opts.quad, &opts.mc)?;
        report.expansion = Some(check);
        report.decay_in = Some(decay_fit(&opts.decay_k_list, &params, l0, Which::In, &opts.norm)?);
        report.decay_bd = Some(decay_fit(&opts.decay_k_list, &params, l0, Which::Bd, &opts.norm)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::test_support::reference_constants;
    use approx::assert_relative_eq;

    #[test]
    fn box_contains_its_center() {
        let p = ProblemParams::reference();
        for k in [6, 10, 40] {
            let b = BoxDj::new(k, 0.2, &p);
            assert!(b.r_lo < b.r_hi && b.l_lo < b.l_hi);
            assert!(b.strictly_contains(b.r_center(), 0.2));
            assert!(b.l_lo >= 0.05 && b.l_hi <= 0.8);
            assert_relative_eq!(b.r_center(), b.mu * p.r0, max_relative = 1e-15);
        }
    }

    #[test]
    fn reduced_objective_returns_the_center() {
        let c = reference_constants();
        for k in [6, 8, 12] {
            let rep = find_critical_point(k, c, Objective::Reduced, 1e-12).unwrap();
            let [r, l] = rep.critical_point.unwrap();
            let l0 = rep.constants.as_ref().unwrap().lambda0;
            assert!((r - rep.mu).abs() <= 1e-6 * rep.mu);
            assert!((l - l0).abs() <= 1e-6 * l0);
            assert!(rep.converged);
        }
    }

    #[test]
    fn signature_is_stable_across_k() {
        let c = reference_constants();
        let sigs: Vec<_> = [6, 8, 10, 16, 32]
            .iter()
            .map(|&k| find_critical_point(k, c, Objective::Reduced, 1e-12).unwrap().hessian_signature.unwrap())
            .collect();
        assert!(sigs.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(sigs[0].zero, 0);
    }

    #[test]
    fn newton_converges_quadratically() {
        let c = reference_constants();
        let f = ReducedFunctional::new(8, c).unwrap();
        let start = (f.domain.r_center() + 0.3 * (f.domain.r_hi - f.domain.r_center()), f.lambda0 * 1.15);
        let run = newton_from(8, c, Objective::Reduced, start, 1e-13).unwrap();
        assert!(run.converged);
        let h = &run.history;
        // once in the asymptotic range e_{n+1} <= C e_n^2
        let tail: Vec<_> = h.windows(2).filter(|w| w[0] < 1e-2 && w[1] > 1e-14).collect();
        assert!(!tail.is_empty(), "{h:?}");
        for w in tail {
            assert!(w[1] <= 50.0 * w[0] * w[0], "{h:?}");
        }
    }

    #[test]
    fn modeled_error_keeps_the_solution_in_the_box() {
        let c = reference_constants();
        for k in [6, 8, 12] {
            for amp in [-1.0, 1.0] {
                let rep = find_critical_point(k, c, Objective::ReducedPlusModeledError { amplitude: amp }, 1e-11).unwrap();
                let [r, l] = rep.critical_point.unwrap();
                let m = rep.mu;
                let l0 = rep.constants.as_ref().unwrap().lambda0;
                assert!((r - m).abs() <= m.powf(-c.params.theta_bar), "k={k}");
                assert!((l - l0).abs() <= m.powf(-1.5 * c.params.theta_bar), "k={k}");
                assert!(rep.domain.as_ref().unwrap().strictly_contains(r, l));
            }
        }
    }

    #[test]
    fn modeled_error_derivatives_match_differences() {
        let c = reference_constants();
        let f = ReducedFunctional::new(8, c).unwrap();
        let p = Problem { f: &f, objective: Objective::ReducedPlusModeledError { amplitude: 0.7 }, sigma: c.params.sigma };
        let (r, l) = (f.domain.r_center() + 0.05, f.lambda0 * 1.05);
        let g = p.gradient(r, l);
        let (hr, hl) = (1e-4, 1e-6);
        assert_relative_eq!(g[0], (p.value(r + hr, l) - p.value(r - hr, l)) / (2.0 * hr), max_relative = 1e-6);
        assert_relative_eq!(g[1], (p.value(r, l + hl) - p.value(r, l - hl)) / (2.0 * hl), max_relative = 1e-6);
        let h = p.hessian(r, l);
        let d = (p.gradient(r, l + hl)[1] - p.gradient(r, l - hl)[1]) / (2.0 * hl);
        assert_relative_eq!(h[1][1], d, max_relative = 1e-5);
    }

    #[test]
    fn inadmissible_and_small_k() {
        let mut p = ProblemParams::reference();
        p.m = 2.0;
        p.n = 2.5;
        p.c0 = 1.0;
        assert!(matches!(construct_report(8, &p, false, &ReportOptions::default()), Err(SolverError::NotAdmissible)));
        let rep = construct_report(1, &ProblemParams::reference(), false, &ReportOptions::default()).unwrap();
        assert!(!rep.converged);
        assert!(rep.critical_point.is_none());
        assert!(rep.notes[0].contains("k0"));
    }

    #[test]
    fn n_dominant_with_any_c0_is_solvable() {
        for c0 in [-2.0, 0.0, 3.0] {
            let mut p = ProblemParams::reference();
            p.m = 2.5;
            p.n = 2.0;
            p.c0 = c0;
            let opts = ReportOptions { quad: QuadratureSpec::default().with_rel_tol(1e-7), ..Default::default() };
            let rep = construct_report(8, &p, false, &opts).unwrap();
            assert!(rep.converged, "c0={c0}");
        }
    }

    #[test]
    fn report_json_is_deterministic() {
        let c = reference_constants();
        let a = serde_json::to_string(&find_critical_point(8, c, Objective::Reduced, 1e-12).unwrap()).unwrap();
        let b = serde_json::to_string(&find_critical_point(8, c, Objective::Reduced, 1e-12).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
