//! Space-time test functions for the capacity method.
//!
//! Two separable families are built here:
//!
//! ```text
//! phi(t, eta) = (1 - t/T)^l * Phi(|eta|_H^2 / R^2)
//! psi(t, eta) = (1 - t/T)^l * Psi(ln(|eta|_H / sqrt R) / ln sqrt R)^kappa
//! ```
//!
//! Both cutoffs are built from the C^2 smoothstep complement
//! `theta(s) = 1 - s^3 (10 - 15 s + 6 s^2)` on `[0, 1]`; `Phi = theta^m`
//! rescaled to `[1/2, 1]` and `Psi = theta`. Spatial sub-Laplacians use the
//! radial formula, so every value returned is exact up to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::group::{anisotropy_weight, gauge_norm, GroupPoint};
use crate::quadrature::{adaptive, Tolerance};

fn theta(s: f64) -> (f64, f64, f64) {
    if s < 0.0 {
        (1.0, 0.0, 0.0)
    } else if s > 1.0 {
        (0.0, 0.0, 0.0)
    } else {
        let u = 1.0 - s;
        (
            1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s),
            -30.0 * s * s * u * u,
            -60.0 * s * u * (1.0 - 2.0 * s),
        )
    }
}

/// Which cutoff family and its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffSpec {
    /// `Phi = theta^m`, transition on `[1/2, 1]`.
    Power { m: u32 },
    /// `Psi = theta`, transition on `[0, 1]`; `kappa` is applied in [`psi_eval`].
    Logarithmic { kappa: f64 },
}

impl CutoffSpec {
    /// `m = ceil((q+1)/(3(q-1))) + 1`.
    pub fn default_power(q: f64) -> Self {
        let m = ((q + 1.0) / (3.0 * (q - 1.0))).ceil() as u32 + 1;
        CutoffSpec::Power { m }
    }

    /// `kappa = 2q/(q-1) + 1`.
    pub fn default_logarithmic(q: f64) -> Self {
        CutoffSpec::Logarithmic {
            kappa: 2.0 * q / (q - 1.0) + 1.0,
        }
    }

    /// Checks the shape parameter against the exponent `q`.
    pub fn validate_for(&self, q: f64) -> Result<()> {
        if !(q > 1.0) {
            return Err(LabError::param("q must exceed 1"));
        }
        match *self {
            CutoffSpec::Power { m } => {
                let bound = (q + 1.0) / (3.0 * (q - 1.0));
                if !(m as f64 > bound) {
                    return Err(LabError::param(format!(
                        "cutoff power m must exceed (q+1)/(3(q-1)) = {bound}, got {m}"
                    )));
                }
            }
            CutoffSpec::Logarithmic { kappa } => {
                let bound = 2.0 * q / (q - 1.0);
                if !(kappa > bound) {
                    return Err(LabError::param(format!(
                        "kappa must exceed 2q/(q-1) = {bound}, got {kappa}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Value and first two derivatives of the cutoff at `z`.
///
/// For the logarithmic family this is the base cutoff `Psi`, without the
/// `kappa` power.
pub fn cutoff_eval(spec: CutoffSpec, z: f64) -> (f64, f64, f64) {
    match spec {
        CutoffSpec::Power { m } => {
            let (t, t1, t2) = theta(2.0 * z - 1.0);
            if m == 1 {
                return (t, 2.0 * t1, 4.0 * t2);
            }
            let mf = m as f64;
            let tm2 = t.powi(m as i32 - 2);
            let tm1 = tm2 * t;
            (
                tm1 * t,
                2.0 * mf * tm1 * t1,
                4.0 * (mf * (mf - 1.0) * tm2 * t1 * t1 + mf * tm1 * t2),
            )
        }
        CutoffSpec::Logarithmic { .. } => theta(z),
    }
}

/// `(1 - t/T)^l` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalFactor {
    pub horizon: f64,
    pub ell: f64,
}

impl TemporalFactor {
    pub fn new(horizon: f64, ell: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(LabError::param(format!(
                "T must be positive, got {horizon}"
            )));
        }
        if !(ell > 0.0) {
            return Err(LabError::param(format!("l must be positive, got {ell}")));
        }
        Ok(Self { horizon, ell })
    }

    /// `l = (q+1)/(q-1) + 1`.
    pub fn default_ell(q: f64) -> f64 {
        (q + 1.0) / (q - 1.0) + 1.0
    }

    pub fn validate_for(&self, q: f64) -> Result<()> {
        let bound = (q + 1.0) / (q - 1.0);
        if !(self.ell > bound) {
            return Err(LabError::param(format!(
                "l must exceed (q+1)/(q-1) = {bound}, got {}",
                self.ell
            )));
        }
        Ok(())
    }

    /// Derivative of order `order` (0, 1 or 2) at `t`.
    pub fn eval(&self, t: f64, order: u8) -> Result<f64> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(LabError::domain(format!(
                "t = {t} lies outside [0, {}]",
                self.horizon
            )));
        }
        let (big_t, l) = (self.horizon, self.ell);
        let s = 1.0 - t / big_t;
        match order {
            0 => Ok(s.powf(l)),
            1 => Ok(-(l / big_t) * s.powf(l - 1.0)),
            2 => Ok(l * (l - 1.0) / (big_t * big_t) * s.powf(l - 2.0)),
            _ => Err(LabError::param(
                "only time derivatives up to order 2 are available",
            )),
        }
    }
}

/// A separable test function and its sub-Laplacians at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TestFnEval {
    pub value: f64,
    pub dt: f64,
    pub dtt: f64,
    pub lap: f64,
    pub lap_t: f64,
    pub lap_tt: f64,
}

impl TestFnEval {
    fn separable(time: [f64; 3], space: f64, space_lap: f64) -> Self {
        Self {
            value: time[0] * space,
            dt: time[1] * space,
            dtt: time[2] * space,
            lap: time[0] * space_lap,
            lap_t: time[1] * space_lap,
            lap_tt: time[2] * space_lap,
        }
    }
}

fn time_triplet(tf: &TemporalFactor, t: f64) -> Result<[f64; 3]> {
    Ok([tf.eval(t, 0)?, tf.eval(t, 1)?, tf.eval(t, 2)?])
}

/// Spatial part `Phi(r^2/R^2)` and its sub-Laplacian.
pub fn phi_spatial(spec: CutoffSpec, r_scale: f64, p: &GroupPoint) -> Result<(f64, f64)> {
    let CutoffSpec::Power { .. } = spec else {
        return Err(LabError::param(
            "phi test function needs the power cutoff family",
        ));
    };
    if !(r_scale > 0.0) {
        return Err(LabError::param("R must be positive"));
    }
    let s = p.horizontal_norm_sq();
    let r2 = (s * s + p.tau * p.tau).sqrt();
    let r4 = r_scale.powi(4);
    let z = r2 / (r_scale * r_scale);
    let (v, d1, d2) = cutoff_eval(spec, z);
    if z <= 0.5 || z >= 1.0 {
        return Ok((v, 0.0));
    }
    let w = anisotropy_weight(p)?;
    let q = p.params().homogeneous_dim() as f64;
    let lap = w * (4.0 * r2 / r4 * d2 + 2.0 * q / (r_scale * r_scale) * d1);
    Ok((v, lap))
}

/// Evaluates `phi(t, p)` and its derivatives.
pub fn phi_eval(
    tf: &TemporalFactor,
    spec: CutoffSpec,
    r_scale: f64,
    t: f64,
    p: &GroupPoint,
) -> Result<TestFnEval> {
    let (v, lap) = phi_spatial(spec, r_scale, p)?;
    Ok(TestFnEval::separable(time_triplet(tf, t)?, v, lap))
}

/// Radial profile of `Psi^kappa(ln(r/sqrt R)/ln sqrt R)`: returns
/// `(value, g'' + (Q-1)/r g')` at radius `r`.
pub fn psi_radial(kappa: f64, r_scale: f64, q_dim: f64, r: f64) -> (f64, f64) {
    let l = 0.5 * r_scale.ln();
    let w = (r.ln() - l) / l;
    let (ps, p1, p2) = theta(w);
    let value = ps.powf(kappa);
    if w <= 0.0 || w >= 1.0 {
        return (value, 0.0);
    }
    let r2 = r * r;
    let radial = kappa * (kappa - 1.0) * ps.powf(kappa - 2.0) * p1 * p1 / (r2 * l * l)
        + kappa * ps.powf(kappa - 1.0) * p2 / (r2 * l * l)
        + kappa * (q_dim - 2.0) * ps.powf(kappa - 1.0) * p1 / (r2 * l);
    (value, radial)
}

/// Spatial part `Psi^kappa(...)` and its sub-Laplacian.
pub fn psi_spatial(spec: CutoffSpec, r_scale: f64, p: &GroupPoint) -> Result<(f64, f64)> {
    let CutoffSpec::Logarithmic { kappa } = spec else {
        return Err(LabError::param(
            "psi test function needs the logarithmic cutoff family",
        ));
    };
    if !(r_scale > 1.0) {
        return Err(LabError::param(format!("R must exceed 1, got {r_scale}")));
    }
    let r = gauge_norm(p);
    if !(r > 0.0) {
        return Err(LabError::domain(
            "psi is evaluated away from the origin only",
        ));
    }
    let q = p.params().homogeneous_dim() as f64;
    let (v, radial) = psi_radial(kappa, r_scale, q, r);
    if radial == 0.0 {
        return Ok((v, 0.0));
    }
    Ok((v, anisotropy_weight(p)? * radial))
}

/// Evaluates `psi(t, p)` and its derivatives.
pub fn psi_eval(
    tf: &TemporalFactor,
    spec: CutoffSpec,
    r_scale: f64,
    t: f64,
    p: &GroupPoint,
) -> Result<TestFnEval> {
    let (v, lap) = psi_spatial(spec, r_scale, p)?;
    Ok(TestFnEval::separable(time_triplet(tf, t)?, v, lap))
}

/// `v^(-1/(q-1)) |g|^q'`, evaluated through logarithms so that a vanishing
/// cutoff and a vanishing derivative do not meet as `inf * 0`. Zero when
/// `v <= 0` or `g == 0`.
pub fn capacity_density(v: f64, g: f64, q: f64) -> f64 {
    if !(v > 0.0) || g == 0.0 {
        return 0.0;
    }
    let qc = q / (q - 1.0);
    (qc * g.abs().ln() - v.ln() / (q - 1.0)).exp()
}

/// Checks that `Phi^(-1/(q-1)) |Phi''|^q'` is integrable over the transition.
///
/// The integral is computed at two tolerances; it must be finite and the two
/// values must agree to `1e-6` relative. Returns the finer value.
pub fn integrability_guard(spec: CutoffSpec, q: f64) -> Result<f64> {
    spec.validate_for(q)?;
    let integrand = |z: f64| {
        let (v, _, d2) = cutoff_eval(spec, z);
        capacity_density(v, d2, q)
    };
    let (a, b) = match spec {
        CutoffSpec::Power { .. } => (0.5, 1.0),
        CutoffSpec::Logarithmic { .. } => (0.0, 1.0),
    };
    let coarse = adaptive(
        integrand,
        a,
        b,
        Tolerance {
            rel: 1e-6,
            ..Default::default()
        },
    );
    let fine = adaptive(
        integrand,
        a,
        b,
        Tolerance {
            rel: 1e-11,
            ..Default::default()
        },
    );
    let stable = (fine.value - coarse.value).abs() <= 1e-6 * fine.value.abs().max(1e-300);
    if !fine.value.is_finite() || !stable {
        return Err(LabError::param(format!(
            "cutoff integrability guard failed for q = {q} (values {} / {})",
            coarse.value, fine.value
        )));
    }
    Ok(fine.value)
}

/// A space-time test function with known support.
pub trait SpaceTimeTest: Send + Sync {
    fn n(&self) -> usize;
    fn horizon(&self) -> f64;
    /// Gauge radius outside which the function vanishes for every `t`.
    fn support_radius(&self) -> f64;
    fn eval(&self, t: f64, p: &GroupPoint) -> Result<TestFnEval>;
}

/// `phi(t, eta) = (1 - t/T)^l Phi(|eta|^2/R^2)`.
#[derive(Debug, Clone, Copy)]
pub struct PhiTest {
    pub n: usize,
    pub temporal: TemporalFactor,
    pub cutoff: CutoffSpec,
    pub r_scale: f64,
}

impl SpaceTimeTest for PhiTest {
    fn n(&self) -> usize {
        self.n
    }
    fn horizon(&self) -> f64 {
        self.temporal.horizon
    }
    fn support_radius(&self) -> f64 {
        self.r_scale
    }
    fn eval(&self, t: f64, p: &GroupPoint) -> Result<TestFnEval> {
        phi_eval(&self.temporal, self.cutoff, self.r_scale, t, p)
    }
}

/// `psi(t, eta) = (1 - t/T)^l Psi^kappa(...)`.
#[derive(Debug, Clone, Copy)]
pub struct PsiTest {
    pub n: usize,
    pub temporal: TemporalFactor,
    pub cutoff: CutoffSpec,
    pub r_scale: f64,
}

impl SpaceTimeTest for PsiTest {
    fn n(&self) -> usize {
        self.n
    }
    fn horizon(&self) -> f64 {
        self.temporal.horizon
    }
    fn support_radius(&self) -> f64 {
        self.r_scale
    }
    fn eval(&self, t: f64, p: &GroupPoint) -> Result<TestFnEval> {
        psi_eval(&self.temporal, self.cutoff, self.r_scale, t, p)
    }
}

/// `t -> T - t` applied to another test function.
pub struct TimeReversed<F>(pub F);

impl<F: SpaceTimeTest> SpaceTimeTest for TimeReversed<F> {
    fn n(&self) -> usize {
        self.0.n()
    }
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }
    fn support_radius(&self) -> f64 {
        self.0.support_radius()
    }
    fn eval(&self, t: f64, p: &GroupPoint) -> Result<TestFnEval> {
        let e = self.0.eval(self.horizon() - t, p)?;
        Ok(TestFnEval {
            dt: -e.dt,
            lap_t: -e.lap_t,
            ..e
        })
    }
}
