//! Error terms of the ring ansatz.

use serde::{Deserialize, Serialize};

use crate::bubble::{RingConfig, Shape};
use crate::error::{BubbleError, EnergyError};
use crate::model::{mu, Profiles};

/// Interior or boundary error term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    In,
    Bd,
}

/// `(sum v)^p - sum v^p`, computed around the largest entry so that the
/// small cross terms survive when one bubble dominates.
pub fn power_excess(values: &[f64], p: f64) -> f64 {
    let Some((imax, &top)) = values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) else {
        return 0.0;
    };
    if top <= 0.0 {
        return 0.0;
    }
    let mut rest = 0.0;
    let mut rest_pow = 0.0;
    for (i, &v) in values.iter().enumerate() {
        if i != imax {
            rest += v;
            rest_pow += v.powf(p);
        }
    }
    top.powf(p) * (p * (rest / top).ln_1p()).exp_m1() - rest_pow
}

/// Evaluator for `E_in` and `E_bd` on a fixed ring.
///
/// With `c_N Lap U_j = U_j^p` and `(2/(N-2)) d_N U_j = -H(r0) U_j^q` on the
/// boundary (both exact for each bubble),
///
/// ```text
/// E_in = K W^p - sum_j U_j^p          = K [W^p - sum U_j^p] + (K - 1) sum U_j^p
/// E_bd = H W^q - H(r0) sum_j U_j^q    = H [W^q - sum U_j^q] + (H - H(r0)) sum U_j^q
/// ```
#[derive(Debug, Clone)]
pub struct ErrorField<'a> {
    ring: &'a RingConfig,
    profiles: Profiles,
    shape: Shape,
    mu: f64,
    p: f64,
    q: f64,
}

impl<'a> ErrorField<'a> {
    pub fn new(ring: &'a RingConfig) -> Result<Self, EnergyError> {
        let params = &ring.params;
        let profiles = Profiles::new(params)?;
        let nf = params.nf();
        Ok(ErrorField {
            ring,
            profiles,
            shape: ring.shape(),
            mu: mu(ring.k, params),
            p: (nf + 2.0) / (nf - 2.0),
            q: nf / (nf - 2.0),
        })
    }

    /// Same evaluator with a caller-chosen `mu` (the ring's own `k` is kept).
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn values(&self, y: &[f64], buf: &mut Vec<f64>) {
        let yn = y[self.ring.dim() - 1];
        buf.clear();
        buf.extend((0..self.ring.k).map(|j| self.shape.value(self.ring.tangential_sq(y, j), yn, self.ring.lambda)));
    }

    /// `E_in(y)`.
    pub fn interior(&self, y: &[f64]) -> f64 {
        let mut buf = Vec::with_capacity(self.ring.k);
        self.values(y, &mut buf);
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let k = self.profiles.k.eval(r / self.mu);
        let dev = self.profiles.k.deviation(r / self.mu);
        let sum_p: f64 = buf.iter().map(|u| u.powf(self.p)).sum();
        k * power_excess(&buf, self.p) + dev * sum_p
    }

    /// `E_bd(y)` for a boundary point.
    pub fn boundary(&self, y: &[f64]) -> Result<f64, BubbleError> {
        let dim = self.ring.dim();
        if y[dim - 1] != 0.0 {
            return Err(BubbleError::NotOnBoundary(y[dim - 1]));
        }
        let mut buf = Vec::with_capacity(self.ring.k);
        self.values(y, &mut buf);
        let r = y[..dim - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = self.profiles.h.eval(r / self.mu);
        let dev = self.profiles.h.deviation(r / self.mu);
        let sum_q: f64 = buf.iter().map(|u| u.powf(self.q)).sum();
        Ok(h * power_excess(&buf, self.q) + dev * sum_q)
    }

    pub fn eval(&self, y: &[f64], which: Which) -> Result<f64, BubbleError> {
        match which {
            Which::In => Ok(self.interior(y)),
            Which::Bd => self.boundary(y),
        }
    }
}

/// Pointwise `E_in` or `E_bd` of the ring ansatz with `mu = mu(k)`.
pub fn error_field(p: &[f64], ring: &RingConfig, which: Which) -> Result<f64, EnergyError> {
    Ok(ErrorField::new(ring)?.eval(p, which)?)
}
