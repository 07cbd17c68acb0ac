//! Boundary bubbles on the half-space, their derivatives, the nondegeneracy
//! kernel, the ring ansatz, sectors, the Neumann Green's function and the
//! inversion onto the unit ball.
//!
//! Points are plain slices `&[f64]` of length `N` whose last entry is the
//! normal coordinate `y_N >= 0`.

use std::f64::consts::PI;

use crate::error::BubbleError;
use crate::model::{h_at_r0, ProblemParams, Profiles};
use crate::special::{sphere_area, unit_ball_volume};

/// `alpha_N = (4N(N-1))^{(N-2)/4}`.
pub fn alpha_n(dim: usize) -> f64 {
    let nf = dim as f64;
    (4.0 * nf * (nf - 1.0)).powf((nf - 2.0) / 4.0)
}

/// `c_N = 4(N-1)/(N-2)`.
pub fn c_n(dim: usize) -> f64 {
    let nf = dim as f64;
    4.0 * (nf - 1.0) / (nf - 2.0)
}

/// Critical Sobolev exponent `2* = 2N/(N-2)`.
pub fn crit_exp(dim: usize) -> f64 {
    let nf = dim as f64;
    2.0 * nf / (nf - 2.0)
}

/// Critical trace exponent `2# = 2(N-1)/(N-2)`.
pub fn trace_exp(dim: usize) -> f64 {
    let nf = dim as f64;
    2.0 * (nf - 1.0) / (nf - 2.0)
}

/// A single bubble `U_{z, Lambda}` with boundary centre `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleParams {
    /// The `N - 1` tangential coordinates of the centre.
    pub center: Vec<f64>,
    pub lambda: f64,
    pub dfrak: f64,
    pub dim: usize,
}

impl BubbleParams {
    pub fn new(center: Vec<f64>, lambda: f64, dfrak: f64, dim: usize) -> Result<Self, BubbleError> {
        if center.len() + 1 != dim {
            return Err(BubbleError::DimensionMismatch { expected: dim - 1, got: center.len() });
        }
        assert!(lambda > 0.0 && dfrak > 1.0, "bubble needs Lambda > 0 and Dfrak > 1");
        Ok(BubbleParams { center, lambda, dfrak, dim })
    }

    /// The standard bubble `U_{0,1}`.
    pub fn standard(dfrak: f64, dim: usize) -> Self {
        BubbleParams { center: vec![0.0; dim - 1], lambda: 1.0, dfrak, dim }
    }
}

/// Analytic derivatives of a bubble at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BubbleDerivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub laplacian: f64,
    /// Derivative along the radial direction of the centre; `None` when the
    /// centre sits at the origin.
    pub d_r: Option<f64>,
    pub d_lambda: f64,
}

/// Precomputed shape constants shared by every bubble in a computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shape {
    pub dim: usize,
    pub dfrak: f64,
    pub alpha: f64,
    /// `(N - 2) / 2`
    pub half: f64,
}

impl Shape {
    pub fn new(dim: usize, dfrak: f64) -> Self {
        Shape { dim, dfrak, alpha: alpha_n(dim), half: (dim as f64 - 2.0) / 2.0 }
    }

    /// Denominator `Lambda^2 |y' - z|^2 + (Lambda y_N + Dfrak)^2 - 1` where
    /// `tangential_sq = |y' - z|^2`.
    #[inline]
    pub fn denom(&self, tangential_sq: f64, yn: f64, lambda: f64) -> f64 {
        let t = lambda * yn + self.dfrak;
        // (t^2 - 1) written as (t - 1)(t + 1) keeps precision near the boundary
        lambda * lambda * tangential_sq + (t - 1.0) * (t + 1.0)
    }

    #[inline]
    pub fn value(&self, tangential_sq: f64, yn: f64, lambda: f64) -> f64 {
        let d = self.denom(tangential_sq, yn, lambda);
        self.alpha * (lambda / d).powf(self.half)
    }
}

#[inline]
fn tangential_sq(p: &[f64], center: &[f64]) -> f64 {
    center.iter().zip(p).map(|(z, y)| (y - z) * (y - z)).sum()
}

/// `U_{z,Lambda}(p)`.
pub fn bubble_eval(p: &[f64], b: &BubbleParams) -> f64 {
    debug_assert_eq!(p.len(), b.dim);
    let shape = Shape::new(b.dim, b.dfrak);
    shape.value(tangential_sq(p, &b.center), p[b.dim - 1], b.lambda)
}

/// Value, gradient, Laplacian and the centre/scale derivatives of a bubble.
pub fn bubble_derivatives(p: &[f64], b: &BubbleParams) -> BubbleDerivatives {
    let dim = b.dim;
    let shape = Shape::new(dim, b.dfrak);
    let lam = b.lambda;
    let yn = p[dim - 1];
    let tsq = tangential_sq(p, &b.center);
    let d = shape.denom(tsq, yn, lam);
    let u = shape.alpha * (lam / d).powf(shape.half);
    let h = shape.half;
    // grad U = -h U / D * grad D
    let mut gradient = Vec::with_capacity(dim);
    for i in 0..dim - 1 {
        gradient.push(-h * u / d * 2.0 * lam * lam * (p[i] - b.center[i]));
    }
    gradient.push(-h * u / d * 2.0 * lam * (lam * yn + b.dfrak));
    let nf = dim as f64;
    let laplacian = shape.alpha * (nf - 2.0) * nf * lam.powf(h + 2.0) * d.powf(-h - 2.0);
    let rnorm = b.center.iter().map(|c| c * c).sum::<f64>().sqrt();
    let d_r = (rnorm > 0.0).then(|| {
        let proj: f64 = b.center.iter().zip(p).map(|(z, y)| (y - z) * z / rnorm).sum();
        (nf - 2.0) * lam * lam * u * proj / d
    });
    let dd2 = b.dfrak * b.dfrak - 1.0;
    let d_lambda = u * h / (lam * d) * (dd2 - lam * lam * (yn * yn + tsq));
    BubbleDerivatives { value: u, gradient, laplacian, d_r, d_lambda }
}

/// Radial derivative `Z_{i,1}`; fails when the centre is the origin.
pub fn bubble_d_r(p: &[f64], b: &BubbleParams) -> Result<f64, BubbleError> {
    bubble_derivatives(p, b).d_r.ok_or(BubbleError::CenterAtOrigin)
}

/// Nondegeneracy kernel of the standard bubble: index `0` is the scaling
/// mode, `1..N-1` are the tangential translations.
pub fn kernel_eval(p: &[f64], index: usize, dfrak: f64, dim: usize) -> Result<f64, BubbleError> {
    Ok(Kernel::new(index, dfrak, dim)?.value(p))
}

/// Anything with a value, a gradient and a Laplacian on the half-space.
pub trait Field: Sync {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> f64;
    fn gradient(&self, y: &[f64]) -> Vec<f64>;
    fn laplacian(&self, y: &[f64]) -> f64;
}

impl Field for BubbleParams {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        bubble_eval(y, self)
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        bubble_derivatives(y, self).gradient
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        bubble_derivatives(y, self).laplacian
    }
}

/// One kernel function as a [`Field`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    pub index: usize,
    shape: Shape,
}

impl Kernel {
    pub fn new(index: usize, dfrak: f64, dim: usize) -> Result<Self, BubbleError> {
        if index >= dim {
            return Err(BubbleError::IndexOutOfRange { index, dim });
        }
        Ok(Kernel { index, shape: Shape::new(dim, dfrak) })
    }

    fn parts(&self, y: &[f64]) -> (f64, f64, f64) {
        let dim = self.shape.dim;
        let sq: f64 = y.iter().map(|v| v * v).sum();
        let tsq = sq - y[dim - 1] * y[dim - 1];
        let d = self.shape.denom(tsq, y[dim - 1], 1.0);
        let dd = self.shape.dfrak;
        // polynomial factor P and its constant prefactor
        let (c, poly) = if self.index == 0 {
            (self.shape.alpha * self.shape.half, sq + 1.0 - dd * dd)
        } else {
            (self.shape.alpha * (2.0 - dim as f64), y[self.index - 1])
        };
        (c, poly, d)
    }
}

impl Field for Kernel {
    fn dim(&self) -> usize {
        self.shape.dim
    }

    fn value(&self, y: &[f64]) -> f64 {
        let (c, poly, d) = self.parts(y);
        c * poly * d.powf(-(self.shape.dim as f64) / 2.0)
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let dim = self.shape.dim;
        let a = dim as f64 / 2.0;
        let (c, poly, d) = self.parts(y);
        let g = d.powf(-a);
        let mut out = Vec::with_capacity(dim);
        for j in 0..dim {
            let dd_j = if j + 1 < dim { 2.0 * y[j] } else { 2.0 * (y[j] + self.shape.dfrak) };
            let dpoly = if self.index == 0 {
                2.0 * y[j]
            } else if j + 1 == self.index {
                1.0
            } else {
                0.0
            };
            out.push(c * (dpoly * g - poly * a * g / d * dd_j));
        }
        out
    }

    fn laplacian(&self, y: &[f64]) -> f64 {
        let dim = self.shape.dim;
        let nf = dim as f64;
        let (c, poly, d) = self.parts(y);
        c * nf * (nf + 2.0) * poly * d.powf(-nf / 2.0 - 2.0)
    }
}

/// Finite linear combination of fields.
pub struct Combination<'a> {
    pub terms: Vec<(f64, &'a dyn Field)>,
}

impl Field for Combination<'_> {
    fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(y)).sum()
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (c, f) in &self.terms {
            for (o, g) in out.iter_mut().zip(f.gradient(y)) {
                *o += c * g;
            }
        }
        out
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.laplacian(y)).sum()
    }
}

/// Which equation a residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// `-c_N Lap u + K(|y|/mu) u^{(N+2)/(N-2)}`
    Interior,
    /// `-(2/(N-2)) d_N u - H(|y'|/mu) u^{N/(N-2)}` on `y_N = 0`
    Boundary,
    /// Linearisation around `U_{0,1}` in the interior.
    LinearizedInterior,
    /// Linearisation around `U_{0,1}` on the boundary.
    LinearizedBoundary,
}

/// Curvature data seen by a residual: either the frozen constants or the
/// profiles evaluated at `|y|/mu`.
#[derive(Debug, Clone, Copy)]
pub enum Curvatures<'a> {
    Frozen,
    Profiles { params: &'a ProblemParams, mu: f64 },
}

/// Residual of `field` together with a natural scale of the terms that
/// cancel, so callers can form a relative residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub value: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.value.abs()
        } else {
            self.value.abs() / self.scale
        }
    }
}

pub fn residual(
    p: &[f64],
    field: &dyn Field,
    kind: ResidualKind,
    dfrak: f64,
    curv: Curvatures<'_>,
) -> Result<Residual, BubbleError> {
    let dim = field.dim();
    let nf = dim as f64;
    let yn = p[dim - 1];
    let (k_val, h_val) = match curv {
        Curvatures::Frozen => (1.0, h_at_r0(dim, dfrak)),
        Curvatures::Profiles { params, mu } => {
            let pr = Profiles::unchecked(params);
            let full: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            let tang = (full * full - yn * yn).max(0.0).sqrt();
            (pr.k.eval(full / mu), pr.h.eval(tang / mu))
        }
    };
    let needs_boundary = matches!(kind, ResidualKind::Boundary | ResidualKind::LinearizedBoundary);
    if needs_boundary && yn != 0.0 {
        return Err(BubbleError::NotOnBoundary(yn));
    }
    let cn = c_n(dim);
    let pexp = (nf + 2.0) / (nf - 2.0);
    let qexp = nf / (nf - 2.0);
    let r = match kind {
        ResidualKind::Interior => {
            let u = field.value(p);
            let a = -cn * field.laplacian(p);
            let b = k_val * u.powf(pexp);
            Residual { value: a + b, scale: a.abs().max(b.abs()) }
        }
        ResidualKind::Boundary => {
            let u = field.value(p);
            let a = -2.0 / (nf - 2.0) * field.gradient(p)[dim - 1];
            let b = h_val * u.powf(qexp);
            Residual { value: a - b, scale: a.abs().max(b.abs()) }
        }
        ResidualKind::LinearizedInterior => {
            let u0 = BubbleParams::standard(dfrak, dim).value(p);
            let v = field.value(p);
            let a = -cn * field.laplacian(p);
            let b = pexp * u0.powf(pexp - 1.0) * v;
            Residual { value: a + b, scale: a.abs().max(b.abs()) }
        }
        ResidualKind::LinearizedBoundary => {
            let u0 = BubbleParams::standard(dfrak, dim).value(p);
            let v = field.value(p);
            let a = -2.0 / (nf - 2.0) * field.gradient(p)[dim - 1];
            let b = qexp * h_val * u0.powf(qexp - 1.0) * v;
            Residual { value: a - b, scale: a.abs().max(b.abs()) }
        }
    };
    Ok(r)
}

/// The ring ansatz `W_{r,Lambda}`: `k` equal bubbles at the vertices of a
/// regular polygon of radius `r` in the `(y_1, y_2)` plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RingConfig {
    pub k: usize,
    pub r: f64,
    pub lambda: f64,
    pub params: ProblemParams,
    centers: Vec<[f64; 2]>,
}

impl RingConfig {
    pub fn new(k: usize, r: f64, lambda: f64, params: ProblemParams) -> Self {
        assert!(k >= 1 && r > 0.0 && lambda > 0.0, "ring needs k >= 1, r > 0, Lambda > 0");
        let centers = ring_points_2d(k, r);
        RingConfig { k, r, lambda, params, centers }
    }

    pub fn dim(&self) -> usize {
        self.params.dim
    }

    pub fn shape(&self) -> Shape {
        Shape::new(self.params.dim, self.params.dfrak)
    }

    /// Planar coordinates of the centres.
    pub fn centers(&self) -> &[[f64; 2]] {
        &self.centers
    }

    /// Centre `j` (0-based) as a bubble.
    pub fn bubble(&self, j: usize) -> BubbleParams {
        let mut c = vec![0.0; self.dim() - 1];
        c[0] = self.centers[j][0];
        c[1] = self.centers[j][1];
        BubbleParams { center: c, lambda: self.lambda, dfrak: self.params.dfrak, dim: self.dim() }
    }

    /// `|y' - x_j|^2` over all tangential coordinates.
    #[inline]
    pub fn tangential_sq(&self, p: &[f64], j: usize) -> f64 {
        let dim = self.dim();
        let [cx, cy] = self.centers[j];
        let mut s = (p[0] - cx) * (p[0] - cx) + (p[1] - cy) * (p[1] - cy);
        for v in &p[2..dim - 1] {
            s += v * v;
        }
        s
    }

    /// Individual bubble values `U_{x_j, Lambda}(p)`.
    pub fn bubble_values(&self, p: &[f64], out: &mut Vec<f64>) {
        let shape = self.shape();
        let yn = p[self.dim() - 1];
        out.clear();
        out.extend((0..self.k).map(|j| shape.value(self.tangential_sq(p, j), yn, self.lambda)));
    }
}

fn ring_points_2d(k: usize, r: f64) -> Vec<[f64; 2]> {
    (0..k)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / k as f64;
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

/// The ring points `x_j` as full `N`-vectors on the boundary.
pub fn ring_points(k: usize, r: f64, dim: usize) -> Vec<Vec<f64>> {
    assert!(k >= 1 && r > 0.0);
    ring_points_2d(k, r)
        .into_iter()
        .map(|[x, y]| {
            let mut p = vec![0.0; dim];
            p[0] = x;
            p[1] = y;
            p
        })
        .collect()
}

/// `W_{r,Lambda}(p)`.
pub fn w_eval(p: &[f64], ring: &RingConfig) -> f64 {
    let shape = ring.shape();
    let yn = p[ring.dim() - 1];
    (0..ring.k).map(|j| shape.value(ring.tangential_sq(p, j), yn, ring.lambda)).sum()
}

impl Field for RingConfig {
    fn dim(&self) -> usize {
        self.params.dim
    }
    fn value(&self, y: &[f64]) -> f64 {
        w_eval(y, self)
    }
    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for j in 0..self.k {
            for (o, g) in out.iter_mut().zip(bubble_derivatives(y, &self.bubble(j)).gradient) {
                *o += g;
            }
        }
        out
    }
    fn laplacian(&self, y: &[f64]) -> f64 {
        (0..self.k).map(|j| bubble_derivatives(y, &self.bubble(j)).laplacian).sum()
    }
}

/// 1-based index of the sector `Omega_l` containing `p`; ties go to the
/// lower index.
pub fn sector_index(p: &[f64], ring: &RingConfig) -> Result<usize, BubbleError> {
    let (y1, y2) = (p[0], p[1]);
    if y1 == 0.0 && y2 == 0.0 {
        return Err(BubbleError::DegenerateAxis);
    }
    let k = ring.k;
    if k == 1 {
        return Ok(1);
    }
    let step = 2.0 * PI / k as f64;
    let t = y2.atan2(y1).rem_euclid(2.0 * PI) / step;
    let frac = t - t.floor();
    let lower = t.floor() as usize % k;
    let idx = if (frac - 0.5).abs() < 1e-12 {
        // on a bisector: pick the smaller of the two neighbouring indices
        lower.min((lower + 1) % k)
    } else {
        (t + 0.5).floor() as usize % k
    };
    Ok(idx + 1)
}

/// Neumann Green's function of the half-space,
/// `(|x-y|^{2-N} + |x-y*|^{2-N}) / (N (N-2) omega_N)` with `omega_N` the unit
/// ball volume and `y*` the mirror image of `y`.
pub fn greens_function(x: &[f64], y: &[f64]) -> Result<f64, BubbleError> {
    let dim = x.len();
    if y.len() != dim {
        return Err(BubbleError::DimensionMismatch { expected: dim, got: y.len() });
    }
    let nf = dim as f64;
    let mut d2 = 0.0;
    let mut m2 = 0.0;
    for i in 0..dim {
        let a = x[i] - y[i];
        d2 += a * a;
        let b = if i + 1 == dim { x[i] + y[i] } else { a };
        m2 += b * b;
    }
    if d2 == 0.0 {
        return Err(BubbleError::CoincidentPoints);
    }
    let e = -(nf - 2.0) / 2.0;
    Ok((d2.powf(e) + m2.powf(e)) / (nf * (nf - 2.0) * unit_ball_volume(dim)))
}

/// The inversion `I(x', x_N) = (2x', 1 - |x|^2) / |x + e_N|^2`, which maps the
/// closed half-space onto the closed unit ball and is its own inverse.
pub fn inversion_map(x: &[f64]) -> Vec<f64> {
    let dim = x.len();
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let den = sq + 2.0 * x[dim - 1] + 1.0;
    let mut out: Vec<f64> = x[..dim - 1].iter().map(|v| 2.0 * v / den).collect();
    out.push((1.0 - sq) / den);
    out
}

/// Weight of a Dirac mass used by the flux test of the Green's function:
/// surface area of the unit sphere in `R^N`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    sphere_area(dim)
}
