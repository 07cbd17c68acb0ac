//! Weighted sup norms on a graded sector grid and the decay-rate fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bubble::{sector_index, RingConfig};
use crate::error::EnergyError;
use crate::model::{mu, ProblemParams};

use super::fields::{ErrorField, Which};

/// Resolution of the sector grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Number of geometric shells around `x_1`.
    pub radial: usize,
    /// Number of polar angles measured from `e_N` (interior grid only).
    pub polar: usize,
    /// Number of tangential directions per polar angle.
    pub azimuthal: usize,
    /// Innermost shell radius in units of the bubble width `1/Lambda`.
    pub inner_radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { radial: 48, polar: 7, azimuthal: 96, inner_radius: 1e-2 }
    }
}

/// Parameters of the weighted norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightedNormSpec {
    pub tau: f64,
    pub grid: GridSpec,
    /// Outer radius of the grid around `x_1`, in units of `r + 1/Lambda`.
    pub cutoff_radius: f64,
}

impl Default for WeightedNormSpec {
    fn default() -> Self {
        WeightedNormSpec { tau: 0.2, grid: GridSpec::default(), cutoff_radius: 2.0 }
    }
}

impl WeightedNormSpec {
    pub fn validate(&self, dim: usize) -> Result<(), EnergyError> {
        let cap = (dim as f64 - 2.0) / 2.0;
        if !(self.tau > 0.0 && self.tau < cap) {
            return Err(EnergyError::FitIllConditioned(format!("tau = {} must lie in (0, {cap})", self.tau)));
        }
        if !(self.cutoff_radius > 0.0) || !(self.grid.inner_radius > 0.0) {
            return Err(EnergyError::FitIllConditioned("grid radii must be positive".into()));
        }
        if self.grid.radial == 0 || self.grid.azimuthal == 0 || self.grid.polar == 0 {
            return Err(EnergyError::EmptyGrid);
        }
        Ok(())
    }
}

/// Which of the three norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// exponent `(N-2)/2 + tau`
    Star,
    /// exponent `(N+2)/2 + tau`
    DoubleStar,
    /// exponent `N/2 + tau`, boundary grid
    TripleStar,
}

impl NormKind {
    pub fn exponent(&self, dim: usize, tau: f64) -> f64 {
        let nf = dim as f64;
        match self {
            NormKind::Star => (nf - 2.0) / 2.0 + tau,
            NormKind::DoubleStar => (nf + 2.0) / 2.0 + tau,
            NormKind::TripleStar => nf / 2.0 + tau,
        }
    }

    pub fn on_boundary(&self) -> bool {
        matches!(self, NormKind::TripleStar)
    }
}

/// `sum_j (1 + |y - x_j|)^{-a}`.
pub fn weight(y: &[f64], ring: &RingConfig, a: f64) -> f64 {
    let yn = y[ring.dim() - 1];
    (0..ring.k).map(|j| (1.0 + (ring.tangential_sq(y, j) + yn * yn).sqrt()).powf(-a)).sum()
}

/// Grid-sup estimate of a weighted norm; a lower bound of the true sup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub grid_points: usize,
    /// Ratio between consecutive shell radii.
    pub shell_ratio: f64,
    pub outer_radius: f64,
}

/// Unit directions on the half sphere `{e_3 >= 0}` of the tangential space
/// spanned by `e_1, e_2, e_3`; the ansatz depends on `y_3..y_{N-1}` only
/// through `|y''|`, so `e_3` stands for all of them.
fn tangential_directions(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            // Fibonacci lattice restricted to z in [0, 1]
            let z = (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .chain([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]])
        .collect()
}

/// Graded grid over the sector `Omega_1`, dense near `x_1` and geometric in
/// the distance to it.
pub fn sector_grid(ring: &RingConfig, spec: &WeightedNormSpec, boundary: bool) -> Vec<Vec<f64>> {
    let dim = ring.dim();
    let width = 1.0 / ring.lambda;
    let inner = spec.grid.inner_radius * width;
    let outer = spec.cutoff_radius * (ring.r + width);
    let nr = spec.grid.radial.max(2);
    let ratio = (outer / inner).powf(1.0 / (nr - 1) as f64);
    let mut shells = vec![0.0];
    shells.extend((0..nr).map(|i| inner * ratio.powi(i as i32)));
    let tang = tangential_directions(spec.grid.azimuthal);
    let polar: Vec<f64> = if boundary {
        vec![std::f64::consts::FRAC_PI_2]
    } else {
        let np = spec.grid.polar.max(1);
        (0..=np).map(|i| std::f64::consts::FRAC_PI_2 * i as f64 / np as f64).collect()
    };
    let x1 = ring.r;
    let mut out = Vec::new();
    for &rho in &shells {
        for &th in &polar {
            // th is the angle from e_N
            let (st, ct) = (th.sin(), th.cos());
            let dirs: &[[f64; 3]] = if st == 0.0 || rho == 0.0 { &tang[..1] } else { &tang };
            for d in dirs {
                let mut p = vec![0.0; dim];
                p[0] = x1 + rho * st * d[0];
                p[1] = rho * st * d[1];
                p[2] = rho * st * d[2];
                p[dim - 1] = if boundary { 0.0 } else { rho * ct };
                if rho == 0.0 || st == 0.0 {
                    p[0] = x1;
                    p[1] = 0.0;
                    p[2] = 0.0;
                }
                let keep = matches!(sector_index(&p, ring), Ok(1) | Err(_));
                if keep {
                    out.push(p);
                }
            }
            if rho == 0.0 {
                break;
            }
        }
    }
    out
}

/// Grid-sup of `|field| / weight` over the sector grid.
pub fn weighted_norm(
    field: &(dyn Fn(&[f64]) -> f64 + Sync),
    ring: &RingConfig,
    kind: NormKind,
    spec: &WeightedNormSpec,
) -> Result<NormEstimate, EnergyError> {
    spec.validate(ring.dim())?;
    let grid = sector_grid(ring, spec, kind.on_boundary());
    norm_on_grid(field, ring, kind, spec, &grid)
}

/// [`weighted_norm`] over a caller-supplied grid.
pub fn norm_on_grid(
    field: &(dyn Fn(&[f64]) -> f64 + Sync),
    ring: &RingConfig,
    kind: NormKind,
    spec: &WeightedNormSpec,
    grid: &[Vec<f64>],
) -> Result<NormEstimate, EnergyError> {
    if grid.is_empty() {
        return Err(EnergyError::EmptyGrid);
    }
    let a = kind.exponent(ring.dim(), spec.tau);
    let ratios: Vec<f64> = grid.par_iter().map(|y| field(y).abs() / weight(y, ring, a)).collect();
    let (imax, value) = ratios
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let width = 1.0 / ring.lambda;
    let outer = spec.cutoff_radius * (ring.r + width);
    let nr = spec.grid.radial.max(2);
    Ok(NormEstimate {
        value,
        argmax: grid[imax].clone(),
        grid_points: grid.len(),
        shell_ratio: (outer / (spec.grid.inner_radius * width)).powf(1.0 / (nr - 1) as f64),
        outer_radius: outer,
    })
}

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub mu: Vec<f64>,
    pub norm: Vec<f64>,
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<DecayFit, EnergyError> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(EnergyError::FitIllConditioned(format!("need at least two points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(EnergyError::FitIllConditioned("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-12 * n {
        return Err(EnergyError::FitIllConditioned("abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(DecayFit { slope, intercept, r2, mu: xs.to_vec(), norm: ys.to_vec() })
}

/// Fit `log ||f_k|| ~ slope * log mu(k)` for an arbitrary field built on the
/// ring `(k, mu r0, lambda)`.
pub fn decay_fit_with<F>(
    k_list: &[usize],
    params: &ProblemParams,
    lambda: f64,
    kind: NormKind,
    spec: &WeightedNormSpec,
    field: F,
) -> Result<DecayFit, EnergyError>
where
    F: Fn(&RingConfig, &[f64]) -> f64 + Sync,
{
    if k_list.len() < 4 {
        return Err(EnergyError::FitIllConditioned(format!("need at least 4 values of k, got {}", k_list.len())));
    }
    let mut mus = Vec::with_capacity(k_list.len());
    let mut norms = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let m = mu(k, params);
        let ring = RingConfig::new(k, m * params.r0, lambda, params.clone());
        let f = |y: &[f64]| field(&ring, y);
        norms.push(weighted_norm(&f, &ring, kind, spec)?.value);
        mus.push(m);
    }
    loglog_fit(&mus, &norms)
}

/// Decay of `||E_in||_**` (`which = in`) or `||E_bd||_***` (`which = bd`)
/// against `mu`, at `r = mu r0` and fixed `lambda`.
pub fn decay_fit(
    k_list: &[usize],
    params: &ProblemParams,
    lambda: f64,
    which: Which,
    spec: &WeightedNormSpec,
) -> Result<DecayFit, EnergyError> {
    // fail early on non-positive profiles
    crate::model::Profiles::new(params)?;
    let kind = match which {
        Which::In => NormKind::DoubleStar,
        Which::Bd => NormKind::TripleStar,
    };
    decay_fit_with(k_list, params, lambda, kind, spec, |ring, y| {
        let ef = ErrorField::new(ring).expect("profiles checked above");
        match which {
            Which::In => ef.interior(y),
            Which::Bd => ef.boundary(y).unwrap_or(0.0),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_spec() -> WeightedNormSpec {
        WeightedNormSpec { grid: GridSpec { radial: 20, polar: 3, azimuthal: 24, inner_radius: 1e-2 }, ..Default::default() }
    }

    #[test]
    fn weight_over_weight_is_one() {
        let ring = RingConfig::new(6, 20.0, 1.0, ProblemParams::reference());
        let spec = small_spec();
        for kind in [NormKind::Star, NormKind::DoubleStar, NormKind::TripleStar] {
            let a = kind.exponent(5, spec.tau);
            let w = |y: &[f64]| weight(y, &ring, a);
            let w2 = |y: &[f64]| 2.0 * weight(y, &ring, a);
            assert_relative_eq!(weighted_norm(&w, &ring, kind, &spec).unwrap().value, 1.0, max_relative = 1e-14);
            assert_relative_eq!(weighted_norm(&w2, &ring, kind, &spec).unwrap().value, 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn zero_field_for_exact_single_bubble() {
        let mut p = ProblemParams::reference();
        p.c0 = 0.0;
        p.d0 = 0.0;
        let ring = RingConfig::new(1, 5.0, 1.0, p);
        let ef = ErrorField::new(&ring).unwrap();
        let spec = small_spec();
        let f = |y: &[f64]| ef.interior(y);
        assert!(weighted_norm(&f, &ring, NormKind::DoubleStar, &spec).unwrap().value < 1e-10);
    }

    #[test]
    fn subadditive_and_homogeneous() {
        let ring = RingConfig::new(4, 10.0, 1.0, ProblemParams::reference());
        let spec = small_spec();
        let f = |y: &[f64]| (y[0] - 3.0).sin() / (1.0 + y.iter().map(|v| v * v).sum::<f64>());
        let g = |y: &[f64]| (0.3 * y[1]).cos() * (-0.1 * y[4]).exp();
        let fg = |y: &[f64]| f(y) + g(y);
        let m3 = |y: &[f64]| -3.0 * f(y);
        let nf = weighted_norm(&f, &ring, NormKind::Star, &spec).unwrap().value;
        let ng = weighted_norm(&g, &ring, NormKind::Star, &spec).unwrap().value;
        let nfg = weighted_norm(&fg, &ring, NormKind::Star, &spec).unwrap().value;
        assert!(nfg <= nf + ng + 1e-12);
        let n3 = weighted_norm(&m3, &ring, NormKind::Star, &spec).unwrap().value;
        assert_relative_eq!(n3, 3.0 * nf, max_relative = 1e-14);
    }

    #[test]
    fn grid_stays_in_first_sector() {
        let ring = RingConfig::new(8, 30.0, 0.5, ProblemParams::reference());
        let spec = small_spec();
        let g = sector_grid(&ring, &spec, false);
        assert!(g.len() > 100);
        for p in &g {
            assert!(p[4] >= 0.0);
            assert_eq!(sector_index(p, &ring).unwrap_or(1), 1);
        }
        let b = sector_grid(&ring, &spec, true);
        assert!(b.iter().all(|p| p[4] == 0.0));
        let empty: Vec<Vec<f64>> = vec![];
        let f = |_: &[f64]| 1.0;
        assert_eq!(norm_on_grid(&f, &ring, NormKind::Star, &spec, &empty).unwrap_err(), EnergyError::EmptyGrid);
    }

    #[test]
    fn tau_bound_enforced() {
        let spec = WeightedNormSpec { tau: 1.5, ..Default::default() };
        assert!(spec.validate(5).is_err());
        assert!(WeightedNormSpec::default().validate(5).is_ok());
    }

    #[test]
    fn fit_controls() {
        let mus = [10.0, 20.0, 40.0, 80.0];
        let flat = loglog_fit(&mus, &[3.0; 4]).unwrap();
        assert!(flat.slope.abs() < 1e-14);
        let pow: Vec<f64> = mus.iter().map(|m| 5.0 * m.powf(-1.7)).collect();
        let fit = loglog_fit(&mus, &pow).unwrap();
        assert_relative_eq!(fit.slope, -1.7, max_relative = 1e-12);
        assert_relative_eq!(fit.r2, 1.0, max_relative = 1e-12);
        assert!(loglog_fit(&[1.0], &[1.0]).is_err());
        assert!(loglog_fit(&[2.0, 2.0], &[1.0, 3.0]).is_err());
    }

    #[test]
    fn injected_weight_field_has_zero_slope() {
        let p = ProblemParams::reference();
        let spec = small_spec();
        let a = NormKind::DoubleStar.exponent(5, spec.tau);
        let fit = decay_fit_with(&[6, 8, 12, 16], &p, 0.2, NormKind::DoubleStar, &spec, |ring, y| 0.5 * weight(y, ring, a)).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!(decay_fit(&[6, 8, 12], &p, 0.2, Which::In, &spec).is_err());
    }
}
