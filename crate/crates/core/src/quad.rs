//! Quadrature engines.
//!
//! Integrals over the half-space `R^N_+` or its boundary are reduced to one,
//! two or three dimensions using the symmetry of the integrand and then
//! computed by a globally adaptive tensor Gauss–Kronrod (7/15) cubature. A
//! bubble-centred importance-sampled Monte Carlo estimator covers integrands
//! without such symmetry.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::QuadError;
pub use crate::special::sphere_area;
use crate::special::beta;

/// Tolerances and budgets of the adaptive cubature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    /// Truncation radius in units of the integrand's length scale.
    pub truncation_radius: f64,
    /// Maximum number of live cells.
    pub subdivision_limit: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_evals: 400_000_000,
            truncation_radius: 50.0,
            subdivision_limit: 200_000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(QuadError::InvalidSpec("tolerances must be positive".into()));
        }
        if !(self.truncation_radius > 0.0) || self.max_evals == 0 || self.subdivision_limit == 0 {
            return Err(QuadError::InvalidSpec("truncation radius and budgets must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of any quadrature or Monte Carlo computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult {
    pub value: f64,
    /// Covers both the discretisation and the truncation contributions
    /// (one standard error for Monte Carlo).
    pub error_estimate: f64,
    pub evals: usize,
    pub truncation_tail_bound: f64,
}

impl IntegralResult {
    pub fn zero() -> Self {
        IntegralResult { value: 0.0, error_estimate: 0.0, evals: 0, truncation_tail_bound: 0.0 }
    }

    /// `a * self + b * other` with errors added in absolute value.
    pub fn combine(&self, a: f64, other: &IntegralResult, b: f64) -> IntegralResult {
        IntegralResult {
            value: a * self.value + b * other.value,
            error_estimate: a.abs() * self.error_estimate + b.abs() * other.error_estimate,
            evals: self.evals + other.evals,
            truncation_tail_bound: a.abs() * self.truncation_tail_bound + b.abs() * other.truncation_tail_bound,
        }
    }

    pub fn scale(&self, a: f64) -> IntegralResult {
        self.combine(a, &IntegralResult::zero(), 0.0)
    }
}

// Kronrod 15-point nodes on [-1, 1] (non-negative half, descending) with the
// Kronrod weights and the weights of the embedded 7-point Gauss rule, which
// uses the odd-numbered Kronrod nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// The 15 nodes on `[-1, 1]` in ascending order with Kronrod and Gauss
/// weights (Gauss weight zero for the Kronrod-only nodes).
fn rule() -> ([f64; 15], [f64; 15], [f64; 15]) {
    let mut x = [0.0; 15];
    let mut wk = [0.0; 15];
    let mut wg = [0.0; 15];
    for i in 0..8 {
        let g = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        x[i] = -XGK[i];
        x[14 - i] = XGK[i];
        wk[i] = WGK[i];
        wk[14 - i] = WGK[i];
        wg[i] = g;
        wg[14 - i] = g;
    }
    (x, wk, wg)
}

#[derive(Debug, Clone)]
struct Cell<const D: usize> {
    lo: [f64; D],
    hi: [f64; D],
    value: f64,
    err: f64,
    err_axis: [f64; D],
    seq: u64,
}

impl<const D: usize> PartialEq for Cell<D> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const D: usize> Eq for Cell<D> {}
impl<const D: usize> PartialOrd for Cell<D> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const D: usize> Ord for Cell<D> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err).then(other.seq.cmp(&self.seq))
    }
}

fn eval_cell<const D: usize, F: Fn(&[f64; D]) -> f64>(f: &F, lo: [f64; D], hi: [f64; D], seq: u64) -> Cell<D> {
    let (x, wk, wg) = rule();
    let mut half = [0.0; D];
    let mut mid = [0.0; D];
    for d in 0..D {
        half[d] = 0.5 * (hi[d] - lo[d]);
        mid[d] = 0.5 * (hi[d] + lo[d]);
    }
    let mut kron = 0.0;
    // per axis: Gauss in that axis, Kronrod in the others
    let mut gauss = [0.0; D];
    let mut idx = [0usize; D];
    let mut p = [0.0; D];
    let total = 15usize.pow(D as u32);
    for lin in 0..total {
        let mut rem = lin;
        for d in 0..D {
            idx[d] = rem % 15;
            rem /= 15;
            p[d] = mid[d] + half[d] * x[idx[d]];
        }
        let v = f(&p);
        let mut wprod = 1.0;
        for d in 0..D {
            wprod *= wk[idx[d]];
        }
        kron += wprod * v;
        for d in 0..D {
            let g = wg[idx[d]];
            if g != 0.0 {
                gauss[d] += wprod / wk[idx[d]] * g * v;
            }
        }
    }
    let vol: f64 = half.iter().product();
    let mut err_axis = [0.0; D];
    for d in 0..D {
        err_axis[d] = ((kron - gauss[d]) * vol).abs();
    }
    let value = kron * vol;
    let err = err_axis.iter().sum::<f64>();
    Cell { lo, hi, value, err, err_axis, seq }
}

struct Adaptive {
    value: f64,
    err: f64,
    evals: usize,
}

/// Globally adaptive tensor Gauss–Kronrod cubature over a union of boxes.
fn adaptive<const D: usize, F>(f: &F, init: Vec<([f64; D], [f64; D])>, spec: &QuadratureSpec) -> Result<Adaptive, QuadError>
where
    F: Fn(&[f64; D]) -> f64 + Sync,
{
    let per_cell = 15usize.pow(D as u32);
    let mut seq = 0u64;
    let cells: Vec<Cell<D>> = init
        .par_iter()
        .enumerate()
        .map(|(i, (lo, hi))| eval_cell(f, *lo, *hi, i as u64))
        .collect();
    seq += cells.len() as u64;
    let mut evals = cells.len() * per_cell;
    let mut heap: BinaryHeap<Cell<D>> = cells.into_iter().collect();
    loop {
        // deterministic summation order: sort by sequence number
        let mut parts: Vec<(u64, f64, f64)> = heap.iter().map(|c| (c.seq, c.value, c.err)).collect();
        parts.sort_unstable_by_key(|p| p.0);
        let value: f64 = parts.iter().map(|p| p.1).sum();
        let err: f64 = parts.iter().map(|p| p.2).sum();
        let target = spec.abs_tol.max(spec.rel_tol * value.abs());
        if err <= target {
            return Ok(Adaptive { value, err, evals });
        }
        if evals >= spec.max_evals || heap.len() >= spec.subdivision_limit {
            return Err(QuadError::ToleranceNotMet { estimate: err, target, evals });
        }
        let batch = (heap.len() / 16).clamp(1, 64);
        let mut todo = Vec::with_capacity(2 * batch);
        for _ in 0..batch {
            let Some(c) = heap.pop() else { break };
            let axis = (0..D).max_by(|a, b| c.err_axis[*a].total_cmp(&c.err_axis[*b])).unwrap_or(0);
            let m = 0.5 * (c.lo[axis] + c.hi[axis]);
            let mut hi1 = c.hi;
            hi1[axis] = m;
            let mut lo2 = c.lo;
            lo2[axis] = m;
            todo.push((c.lo, hi1, seq));
            todo.push((lo2, c.hi, seq + 1));
            seq += 2;
        }
        let children: Vec<Cell<D>> = todo.par_iter().map(|(lo, hi, s)| eval_cell(f, *lo, *hi, *s)).collect();
        evals += children.len() * per_cell;
        heap.extend(children);
    }
}

/// Integrate `f` over `[a, b]` with the adaptive Gauss–Kronrod rule.
pub fn integrate_1d<F: Fn(f64) -> f64 + Sync>(f: F, breaks: &[f64], spec: &QuadratureSpec) -> Result<IntegralResult, QuadError> {
    let init: Vec<([f64; 1], [f64; 1])> = breaks.windows(2).map(|w| ([w[0]], [w[1]])).collect();
    let r = adaptive(&|p: &[f64; 1]| f(p[0]), init, spec)?;
    Ok(IntegralResult { value: r.value, error_estimate: r.err, evals: r.evals, truncation_tail_bound: 0.0 })
}

/// Symmetry class of an integrand on the half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Symmetry {
    /// Depends on `(|y'|, y_N)` only.
    Radial,
    /// Depends on `(y_1, |y''|, y_N)` with `y''` the remaining tangential
    /// coordinates.
    Axial,
    /// Depends on the distances to two boundary centres on the `y_1` axis and
    /// on `y_N`.
    Bipolar,
}

impl Symmetry {
    fn name(&self) -> &'static str {
        match self {
            Symmetry::Radial => "radial",
            Symmetry::Axial => "axial",
            Symmetry::Bipolar => "bipolar",
        }
    }
}

/// Dimension reduction used by [`integrate_reduced`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reduction {
    Radial2,
    Axial3,
    BoundaryRadial1,
    BoundaryAxial2,
    Bipolar3,
}

impl Reduction {
    fn name(&self) -> &'static str {
        match self {
            Reduction::Radial2 => "radial2",
            Reduction::Axial3 => "axial3",
            Reduction::BoundaryRadial1 => "boundary_radial1",
            Reduction::BoundaryAxial2 => "boundary_axial2",
            Reduction::Bipolar3 => "bipolar3",
        }
    }

    fn admits(&self, s: Symmetry) -> bool {
        match self {
            Reduction::Radial2 | Reduction::BoundaryRadial1 => s == Symmetry::Radial,
            Reduction::Axial3 | Reduction::BoundaryAxial2 | Reduction::Bipolar3 => true,
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, Reduction::BoundaryRadial1 | Reduction::BoundaryAxial2)
    }
}

/// A scalar function on the half-space together with the metadata the
/// reductions need.
pub struct Integrand<'a> {
    pub dim: usize,
    pub symmetry: Symmetry,
    pub f: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    /// `|f(y)| <= C |y|^{-decay}` far away.
    pub decay: f64,
    /// Characteristic length; the truncation radius is measured in it.
    pub scale: f64,
    /// `y_1` positions of the peaks (bubble centres).
    pub centers: Vec<f64>,
    /// Known support radius; when set no tail is added.
    pub support: Option<f64>,
}

impl<'a> Integrand<'a> {
    pub fn new(dim: usize, symmetry: Symmetry, decay: f64, f: &'a (dyn Fn(&[f64]) -> f64 + Sync)) -> Self {
        Integrand { dim, symmetry, f, decay, scale: 1.0, centers: vec![0.0], support: None }
    }

    pub fn with_centers(mut self, centers: Vec<f64>) -> Self {
        let extent = centers.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        self.scale = self.scale.max(extent);
        self.centers = centers;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_support(mut self, radius: f64) -> Self {
        self.support = Some(radius);
        self
    }
}

const MAX_DIM: usize = 16;

/// Breakpoints on `[0, r]` graded geometrically away from `0`.
fn graded_from_zero(r: f64, h0: f64, ratio: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    let mut h = h0;
    while h < r {
        b.push(h);
        h *= ratio;
    }
    b.push(r);
    b
}

/// Breakpoints on `[lo, hi]` graded geometrically around each centre.
fn graded_around(lo: f64, hi: f64, centers: &[f64], h0: f64, ratio: f64) -> Vec<f64> {
    let mut b = vec![lo, hi];
    for &c in centers {
        if c > lo && c < hi {
            b.push(c);
        }
        let mut h = h0;
        while h < hi - lo {
            for v in [c - h, c + h] {
                if v > lo && v < hi {
                    b.push(v);
                }
            }
            h *= ratio;
        }
    }
    b.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(b.len());
    for v in b {
        if out.last().is_none_or(|l| v - *l > 0.25 * h0) {
            out.push(v);
        }
    }
    if *out.last().unwrap() < hi {
        out.push(hi);
    } else {
        *out.last_mut().unwrap() = hi;
    }
    out
}

fn tensor<const D: usize>(axes: [&[f64]; D]) -> Vec<([f64; D], [f64; D])> {
    let mut out = vec![([0.0; D], [0.0; D])];
    for (d, axis) in axes.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for (lo, hi) in &out {
            for w in axis.windows(2) {
                let (mut l, mut h) = (*lo, *hi);
                l[d] = w[0];
                h[d] = w[1];
                next.push((l, h));
            }
        }
        out = next;
    }
    out
}

struct Reduced {
    value: f64,
    err: f64,
    evals: usize,
}

fn run_reduction(ig: &Integrand<'_>, reduction: Reduction, radius: f64, spec: &QuadratureSpec) -> Result<Reduced, QuadError> {
    let n = ig.dim;
    let f = ig.f;
    let h0 = 0.25 * ig.scale.min(1.0);
    let out = match reduction {
        Reduction::Radial2 => {
            let w = sphere_area(n - 1);
            let radial = graded_from_zero(radius, h0, 4.0);
            let angle = [0.0, FRAC_PI_2 / 4.0, FRAC_PI_2 / 2.0, FRAC_PI_2];
            let g = |q: &[f64; 2]| {
                let (s, phi) = (q[0], q[1]);
                let (c, sn) = (phi.cos(), phi.sin());
                let mut buf = [0.0; MAX_DIM];
                buf[0] = s * c;
                buf[n - 1] = s * sn;
                w * s.powi(n as i32 - 1) * c.powi(n as i32 - 2) * f(&buf[..n])
            };
            let r = adaptive(&g, tensor([&radial, &angle]), spec)?;
            Reduced { value: r.value, err: r.err, evals: r.evals }
        }
        Reduction::BoundaryRadial1 => {
            let w = sphere_area(n - 1);
            let radial = graded_from_zero(radius, h0, 4.0);
            let g = |q: &[f64; 1]| {
                let mut buf = [0.0; MAX_DIM];
                buf[0] = q[0];
                w * q[0].powi(n as i32 - 2) * f(&buf[..n])
            };
            let r = adaptive(&g, tensor([&radial]), spec)?;
            Reduced { value: r.value, err: r.err, evals: r.evals }
        }
        Reduction::Axial3 | Reduction::Bipolar3 => {
            let w = sphere_area(n - 2);
            let lo = ig.centers.iter().fold(0.0f64, |a, c| a.min(*c)) - radius;
            let hi = ig.centers.iter().fold(0.0f64, |a, c| a.max(*c)) + radius;
            let y1 = graded_around(lo, hi, &ig.centers, h0, 4.0);
            let s_axis = graded_from_zero(radius, h0, 4.0);
            let t_axis = graded_from_zero(radius, h0, 4.0);
            let g = |q: &[f64; 3]| {
                let mut buf = [0.0; MAX_DIM];
                buf[0] = q[0];
                buf[1] = q[1];
                buf[n - 1] = q[2];
                w * q[1].powi(n as i32 - 3) * f(&buf[..n])
            };
            let r = adaptive(&g, tensor([&y1, &s_axis, &t_axis]), spec)?;
            Reduced { value: r.value, err: r.err, evals: r.evals }
        }
        Reduction::BoundaryAxial2 => {
            let w = sphere_area(n - 2);
            let lo = ig.centers.iter().fold(0.0f64, |a, c| a.min(*c)) - radius;
            let hi = ig.centers.iter().fold(0.0f64, |a, c| a.max(*c)) + radius;
            let y1 = graded_around(lo, hi, &ig.centers, h0, 4.0);
            let s_axis = graded_from_zero(radius, h0, 4.0);
            let g = |q: &[f64; 2]| {
                let mut buf = [0.0; MAX_DIM];
                buf[0] = q[0];
                buf[1] = q[1];
                w * q[1].powi(n as i32 - 3) * f(&buf[..n])
            };
            let r = adaptive(&g, tensor([&y1, &s_axis]), spec)?;
            Reduced { value: r.value, err: r.err, evals: r.evals }
        }
    };
    Ok(out)
}

/// Upper bound for the part of the integral outside the truncation radius,
/// from the largest sampled value on the truncation sphere and the decay
/// exponent.
fn tail_bound(ig: &Integrand<'_>, reduction: Reduction, radius: f64) -> Result<f64, QuadError> {
    let n = ig.dim;
    let d = if reduction.is_boundary() { n - 1 } else { n };
    if ig.decay <= d as f64 {
        return Err(QuadError::DivergentIntegral(format!(
            "decay exponent {} does not exceed the dimension {d}",
            ig.decay
        )));
    }
    let center = ig.centers.iter().sum::<f64>() / ig.centers.len().max(1) as f64;
    let mut sup = 0.0f64;
    let mut buf = [0.0; MAX_DIM];
    let m = 24;
    for i in 0..=m {
        let a = std::f64::consts::PI * i as f64 / m as f64;
        for j in 0..=m / 2 {
            let b = FRAC_PI_2 * j as f64 / (m / 2) as f64;
            buf[..n].fill(0.0);
            match reduction {
                Reduction::Radial2 => {
                    if i > m / 2 {
                        continue;
                    }
                    buf[0] = radius * (a).cos();
                    buf[n - 1] = radius * a.sin();
                }
                Reduction::BoundaryRadial1 => buf[0] = radius,
                Reduction::BoundaryAxial2 => {
                    buf[0] = center + radius * a.cos();
                    buf[1] = radius * a.sin();
                }
                Reduction::Axial3 | Reduction::Bipolar3 => {
                    buf[0] = center + radius * a.cos();
                    buf[1] = radius * a.sin() * b.cos();
                    buf[n - 1] = radius * a.sin() * b.sin();
                }
            }
            sup = sup.max((ig.f)(&buf[..n]).abs());
        }
    }
    let area = if reduction.is_boundary() { sphere_area(d) } else { 0.5 * sphere_area(d) };
    Ok(sup * radius.powi(d as i32) * area / (ig.decay - d as f64))
}

/// Integrate over `R^N_+` (or its boundary for the boundary reductions) a
/// function whose symmetry admits `reduction`.
///
/// The domain is truncated at `truncation_radius * scale` around the
/// centres and the radius is enlarged until the analytic tail bound is below
/// a tenth of the requested relative tolerance.
pub fn integrate_reduced(ig: &Integrand<'_>, reduction: Reduction, spec: &QuadratureSpec) -> Result<IntegralResult, QuadError> {
    spec.validate()?;
    if !reduction.admits(ig.symmetry) {
        return Err(QuadError::SymmetryMismatch { integrand: ig.symmetry.name(), reduction: reduction.name() });
    }
    if ig.dim < 3 || ig.dim > MAX_DIM {
        return Err(QuadError::InvalidSpec(format!("dimension {} not supported", ig.dim)));
    }
    if let Some(radius) = ig.support {
        let r = run_reduction(ig, reduction, radius, spec)?;
        return Ok(IntegralResult { value: r.value, error_estimate: r.err, evals: r.evals, truncation_tail_bound: 0.0 });
    }
    let d = if reduction.is_boundary() { ig.dim - 1 } else { ig.dim } as f64;
    let mut radius = spec.truncation_radius * ig.scale;
    let mut evals = 0;
    for _ in 0..4 {
        let r = run_reduction(ig, reduction, radius, spec)?;
        evals += r.evals;
        let tail = tail_bound(ig, reduction, radius)?;
        let target = (0.1 * spec.rel_tol * r.value.abs()).max(spec.abs_tol);
        if tail <= target {
            return Ok(IntegralResult {
                value: r.value,
                error_estimate: r.err + tail,
                evals,
                truncation_tail_bound: tail,
            });
        }
        // tail ~ R^{d - decay}: jump straight to the radius that meets the target
        let factor = (tail / target).powf(1.0 / (ig.decay - d)) * 1.2;
        radius *= factor.clamp(1.5, 1e6);
    }
    Err(QuadError::ToleranceNotMet { estimate: f64::NAN, target: spec.rel_tol, evals })
}

/// `I_m^alpha = int_0^inf rho^alpha / (1 + rho^2)^m d rho`, from the Beta
/// function identity.
#[allow(non_snake_case)]
pub fn I_integral(alpha: f64, mexp: f64) -> Result<f64, QuadError> {
    check_i_domain(alpha, mexp)?;
    let a = 0.5 * (alpha + 1.0);
    Ok(0.5 * beta(a, mexp - a))
}

fn check_i_domain(alpha: f64, mexp: f64) -> Result<(), QuadError> {
    if !(alpha > -1.0) {
        return Err(QuadError::DivergentIntegral(format!("alpha = {alpha} <= -1 diverges at 0")));
    }
    if !(alpha + 1.0 < 2.0 * mexp) {
        return Err(QuadError::DivergentIntegral(format!("alpha + 1 = {} >= 2m = {}", alpha + 1.0, 2.0 * mexp)));
    }
    Ok(())
}

/// `I_m^alpha` by adaptive quadrature: `[0, 1]` directly and `[1, inf)` after
/// `rho = 1/u`.
#[allow(non_snake_case)]
pub fn I_integral_numeric(alpha: f64, mexp: f64, spec: &QuadratureSpec) -> Result<IntegralResult, QuadError> {
    check_i_domain(alpha, mexp)?;
    let breaks = zero_graded_unit();
    let near = integrate_1d(|x| x.powf(alpha) * (1.0 + x * x).powf(-mexp), &breaks, spec)?;
    let e = 2.0 * mexp - alpha - 2.0;
    let far = integrate_1d(|u| u.powf(e) * (1.0 + u * u).powf(-mexp), &breaks, spec)?;
    Ok(near.combine(1.0, &far, 1.0))
}

fn zero_graded_unit() -> Vec<f64> {
    let mut b: Vec<f64> = (0..40).rev().map(|i| 0.5f64.powi(i)).collect();
    b.insert(0, 0.0);
    b
}

/// `phi_m = int_Dfrak^inf (t^2 - 1)^{-m} dt`; closed form for `m = 3/2`.
pub fn phi_integral(mexp: f64, dfrak: f64) -> Result<f64, QuadError> {
    check_phi_domain(mexp, dfrak)?;
    if mexp == 1.5 {
        return Ok(dfrak / (dfrak * dfrak - 1.0).sqrt() - 1.0);
    }
    Ok(phi_integral_numeric(mexp, dfrak, &QuadratureSpec::default().with_rel_tol(1e-13))?.value)
}

fn check_phi_domain(mexp: f64, dfrak: f64) -> Result<(), QuadError> {
    if !(dfrak > 1.0) {
        return Err(QuadError::DomainError(format!("phi needs Dfrak > 1, got {dfrak}")));
    }
    if !(mexp > 0.5) {
        return Err(QuadError::DivergentIntegral(format!("phi needs m > 1/2, got {mexp}")));
    }
    Ok(())
}

/// `phi_m` by quadrature after `t = Dfrak / u`.
pub fn phi_integral_numeric(mexp: f64, dfrak: f64, spec: &QuadratureSpec) -> Result<IntegralResult, QuadError> {
    check_phi_domain(mexp, dfrak)?;
    let dd = dfrak * dfrak;
    integrate_1d(|u| dfrak * u.powf(2.0 * mexp - 2.0) * (dd - u * u).powf(-mexp), &zero_graded_unit(), spec)
}

/// Where Monte Carlo samples live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McDomain {
    HalfSpace,
    Boundary,
}

/// Equal-weight mixture of heavy-tailed, spherically symmetric densities
/// centred on boundary points, folded onto the half-space.
///
/// The radial law of each component is
/// `P(|Y - c| > rho) = (1 + (rho/s)^d)^{-kappa/d}` in dimension `d`, so the
/// density decays like `rho^{-(d + kappa)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSampler {
    pub dim: usize,
    pub domain: McDomain,
    pub centers: Vec<Vec<f64>>,
    pub scale: f64,
    pub kappa: f64,
}

impl MixtureSampler {
    pub fn new(dim: usize, domain: McDomain, centers: Vec<Vec<f64>>, scale: f64) -> Self {
        let d = match domain {
            McDomain::HalfSpace => dim,
            McDomain::Boundary => dim - 1,
        };
        MixtureSampler { dim, domain, centers, scale, kappa: 0.5 * d as f64 }
    }

    fn sample_dim(&self) -> usize {
        match self.domain {
            McDomain::HalfSpace => self.dim,
            McDomain::Boundary => self.dim - 1,
        }
    }

    /// Density of the mixture at `y` with respect to the measure of the
    /// domain.
    pub fn density(&self, y: &[f64]) -> f64 {
        let d = self.sample_dim();
        let df = d as f64;
        let norm = self.kappa / (self.scale.powi(d as i32) * sphere_area(d));
        let fold = if self.domain == McDomain::HalfSpace { 2.0 } else { 1.0 };
        let mut acc = 0.0;
        for c in &self.centers {
            let r2: f64 = (0..d).map(|i| (y[i] - c[i]) * (y[i] - c[i])).sum();
            let rs = r2.sqrt() / self.scale;
            acc += (1.0 + rs.powi(d as i32)).powf(-(self.kappa + df) / df);
        }
        fold * norm * acc / self.centers.len() as f64
    }

    /// Draw one point into `out` (length `dim`); returns its density.
    pub fn sample<R: Rng>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        let d = self.sample_dim();
        let df = d as f64;
        let c = &self.centers[rng.random_range(0..self.centers.len())];
        let mut norm2 = 0.0;
        for v in out[..d].iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v = g;
            norm2 += g * g;
        }
        let u: f64 = rng.random();
        let rho = self.scale * ((1.0 - u).powf(-df / self.kappa) - 1.0).powf(1.0 / df);
        let k = rho / norm2.sqrt();
        for i in 0..d {
            out[i] = c[i] + k * out[i];
        }
        match self.domain {
            McDomain::HalfSpace => out[d - 1] = out[d - 1].abs(),
            McDomain::Boundary => out[self.dim - 1] = 0.0,
        }
        self.density(out)
    }
}

const MC_CHUNK: usize = 8192;

/// Importance-sampled Monte Carlo estimate of `int f` over the sampler's
/// domain.
///
/// Samples are drawn in fixed-size chunks, chunk `i` from a ChaCha stream
/// `i` of the seed, and the chunk statistics are merged in chunk order, so
/// the result is bit-identical for any thread count.
pub fn integrate_mc_halfspace<F>(f: F, sampler: &MixtureSampler, n_samples: usize, seed: u64) -> IntegralResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if n_samples == 0 {
        return IntegralResult::zero();
    }
    let n_chunks = n_samples.div_ceil(MC_CHUNK);
    let stats: Vec<(f64, f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = MC_CHUNK.min(n_samples - chunk * MC_CHUNK);
            let mut buf = vec![0.0; sampler.dim];
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..count {
                let q = sampler.sample(&mut rng, &mut buf);
                let v = f(&buf) / q;
                let delta = v - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (v - mean);
            }
            (count as f64, mean, m2)
        })
        .collect();
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for (nb, mb, m2b) in stats {
        let tot = n + nb;
        let delta = mb - mean;
        mean += delta * nb / tot;
        m2 += m2b + delta * delta * n * nb / tot;
        n = tot;
    }
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    IntegralResult { value: mean, error_estimate: (var / n).sqrt(), evals: n_samples, truncation_tail_bound: 0.0 }
}
