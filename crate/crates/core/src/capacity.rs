//! Capacity integrals, a-priori bounds and the critical-exponent verdict.
//!
//! Time integrals `int_0^T phi1^(-1/(q-1)) |d^k phi1|^q' dt` are computed after
//! mapping `t = T(1 - s)` and `s = v^(1/(a+1))`, where `a` is the exponent of
//! the endpoint singularity; Gauss-Legendre then sees a smooth integrand.
//!
//! Spatial integrals use the gauge-polar factorization
//!
//! ```text
//! int_{H^n} F(|eta|_H) omega(eta)^s d eta = S_omega(s) * int_0^inf F(r) r^(Q-1) dr
//! ```
//!
//! with the sphere constant `S_omega(s)` estimated once by Monte Carlo and the
//! radial integral by adaptive Gauss-Kronrod quadrature.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::group::GroupPoint;
use crate::montecarlo::{integrate_box, McConfig, McEstimate};
use crate::quadrature::{adaptive, gauss_legendre_pair, QuadratureEstimate, Tolerance};
use crate::test_functions::{
    capacity_density, cutoff_eval, integrability_guard, phi_spatial, psi_radial, CutoffSpec,
    TemporalFactor,
};

/// Tolerance used to decide `q == Q/(Q-2)` in floating point.
pub const CRITICAL_TOL: f64 = 1e-12;

const RADIAL_TOL: Tolerance = Tolerance {
    abs: 0.0,
    rel: 1e-12,
    max_intervals: 4000,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub q: f64,
    pub q_conj: f64,
    pub ell: f64,
    pub kappa: f64,
    pub m: u32,
    pub n: usize,
}

impl Exponents {
    /// Builds and validates an exponent set; missing `ell`/`kappa` take the
    /// defaults derived from `q`.
    pub fn new(q: f64, n: usize, ell: Option<f64>, kappa: Option<f64>) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(LabError::param(format!("q must exceed 1, got {q}")));
        }
        if n == 0 {
            return Err(LabError::param("n must be at least 1"));
        }
        let CutoffSpec::Power { m } = CutoffSpec::default_power(q) else {
            unreachable!()
        };
        let CutoffSpec::Logarithmic {
            kappa: default_kappa,
        } = CutoffSpec::default_logarithmic(q)
        else {
            unreachable!()
        };
        let e = Self {
            q,
            q_conj: q / (q - 1.0),
            ell: ell.unwrap_or_else(|| TemporalFactor::default_ell(q)),
            kappa: kappa.unwrap_or(default_kappa),
            m,
            n,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn with_power(mut self, m: u32) -> Result<Self> {
        self.m = m;
        CutoffSpec::Power { m }.validate_for(self.q)?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bound = (self.q + 1.0) / (self.q - 1.0);
        if !(self.ell > bound) {
            return Err(LabError::param(format!(
                "l must exceed (q+1)/(q-1) = {bound}, got {}",
                self.ell
            )));
        }
        self.log_cutoff().validate_for(self.q)?;
        self.power_cutoff().validate_for(self.q)
    }

    pub fn homogeneous_dim(&self) -> f64 {
        (2 * self.n + 2) as f64
    }

    pub fn critical_exponent(&self) -> f64 {
        let q = self.homogeneous_dim();
        q / (q - 2.0)
    }

    pub fn is_critical(&self) -> bool {
        (self.q - self.critical_exponent()).abs() <= CRITICAL_TOL
    }

    /// `Q - 2q'`, the power of `R` carried by the subcritical capacity integral.
    pub fn spatial_power(&self) -> f64 {
        self.homogeneous_dim() - 2.0 * self.q_conj
    }

    pub fn power_cutoff(&self) -> CutoffSpec {
        CutoffSpec::Power { m: self.m }
    }

    pub fn log_cutoff(&self) -> CutoffSpec {
        CutoffSpec::Logarithmic { kappa: self.kappa }
    }
}

/// Power of `T` in the `k`-th time integral: `1`, `1 - q'`, `1 - 2q'`.
pub fn time_power(e: &Exponents, k: u8) -> f64 {
    1.0 - k as f64 * e.q_conj
}

fn check_order(e: &Exponents, k: u8) -> Result<f64> {
    let a = match k {
        0 => e.ell,
        1 => e.ell - e.q_conj,
        2 => e.ell - 2.0 * e.q_conj,
        _ => return Err(LabError::param("time derivative order must be 0, 1 or 2")),
    };
    if !(a > -1.0) {
        let msg = match k {
            1 => format!("l must exceed 1/(q-1) = {}", 1.0 / (e.q - 1.0)),
            2 => format!("l must exceed (q+1)/(q-1) = {}", (e.q + 1.0) / (e.q - 1.0)),
            _ => "l must be positive".to_string(),
        };
        return Err(LabError::param(msg));
    }
    Ok(a)
}

/// `int_0^T phi1^(-1/(q-1)) |d^k/dt^k phi1|^q' dt` by quadrature.
pub fn time_integral(e: &Exponents, horizon: f64, k: u8) -> Result<QuadratureEstimate> {
    let a = check_order(e, k)?;
    TemporalFactor::new(horizon, e.ell)?;
    let (q, qc, l) = (e.q, e.q_conj, e.ell);
    let coef = match k {
        0 => 1.0,
        1 => l / horizon,
        _ => l * (l - 1.0) / (horizon * horizon),
    };
    // s = v^(1/(a+1)) underflows for small a + 1, so work with logarithms
    let integrand = |v: f64| {
        let ln_s = v.ln() / (a + 1.0);
        let ln_base = l * ln_s;
        let ln_deriv = coef.ln() + (l - k as f64) * ln_s;
        let ln_f = -ln_base / (q - 1.0) + qc * ln_deriv;
        (ln_f + (horizon / (a + 1.0)).ln() - a * ln_s).exp()
    };
    Ok(gauss_legendre_pair(integrand, 0.0, 1.0, 64))
}

/// Closed-form constants `C_1`, `C_2`, `C_3` of the time integrals.
pub fn time_integral_constant(e: &Exponents, k: u8) -> Result<f64> {
    let (q, l) = (e.q, e.ell);
    let qc = e.q_conj;
    match k {
        0 => {
            if !(l + 1.0 > 0.0) {
                return Err(LabError::param("l + 1 must be positive"));
            }
            Ok(1.0 / (l + 1.0))
        }
        1 => {
            let den = l * (q - 1.0) - 1.0;
            if !(den > 0.0) {
                return Err(LabError::param(format!(
                    "l(q-1) - 1 must be positive, got {den}"
                )));
            }
            Ok((q - 1.0) * l.powf(qc) / den)
        }
        2 => {
            let den = l * (q - 1.0) - q - 1.0;
            if !(den > 0.0) {
                return Err(LabError::param(format!(
                    "l(q-1) - q - 1 must be positive, got {den}"
                )));
            }
            Ok((q - 1.0) * (l * (l - 1.0)).powf(qc) / den)
        }
        _ => Err(LabError::param("time derivative order must be 0, 1 or 2")),
    }
}

type SphereKey = (usize, u64, McConfig);

fn sphere_cache() -> &'static Mutex<HashMap<SphereKey, McEstimate>> {
    static CACHE: OnceLock<Mutex<HashMap<SphereKey, McEstimate>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `S_omega(s) = int_{|eta|_H = 1} omega^s d sigma`, estimated from the gauge
/// annulus `1/2 <= |eta|_H <= 1` and cached per `(n, s, mc)`.
pub fn sphere_weight_constant(n: usize, s: f64, mc: McConfig) -> Result<McEstimate> {
    if n == 0 {
        return Err(LabError::param("n must be at least 1"));
    }
    if !(s >= 0.0) {
        return Err(LabError::param(format!(
            "weight power must be nonnegative, got {s}"
        )));
    }
    if mc.samples == 0 {
        return Err(LabError::param(
            "Monte Carlo sample budget must be positive",
        ));
    }
    let key = (n, s.to_bits(), mc);
    if let Some(hit) = sphere_cache().lock().expect("cache poisoned").get(&key) {
        return Ok(*hit);
    }
    let d = 2 * n + 1;
    let q = (2 * n + 2) as f64;
    let lo = vec![-1.0; d];
    let hi = vec![1.0; d];
    let est = integrate_box(&lo, &hi, mc, |c| {
        let h: f64 = c[..d - 1].iter().map(|v| v * v).sum();
        let r2 = (h * h + c[d - 1] * c[d - 1]).sqrt();
        if !(0.25..=1.0).contains(&r2) {
            return 0.0;
        }
        (h / r2).powf(s)
    })?;
    let est = est.scaled(q / (1.0 - 2f64.powf(-q)));
    // first writer wins; every writer computes the same value
    Ok(*sphere_cache()
        .lock()
        .expect("cache poisoned")
        .entry(key)
        .or_insert(est))
}

/// Radial quadrature times a Monte Carlo sphere constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizedEstimate {
    pub value: f64,
    /// One-sigma uncertainty combining sphere stderr and quadrature error.
    pub stderr: f64,
    pub radial: QuadratureEstimate,
    pub sphere: McEstimate,
}

impl FactorizedEstimate {
    fn new(radial: QuadratureEstimate, sphere: McEstimate) -> Self {
        let value = radial.value * sphere.value;
        let stderr = (sphere.stderr * radial.value).hypot(sphere.value * radial.abs_error);
        Self {
            value,
            stderr,
            radial,
            sphere,
        }
    }
}

fn phi_radial_parts(e: &Exponents, spec: CutoffSpec, r_scale: f64, r: f64) -> (f64, f64) {
    let z = r * r / (r_scale * r_scale);
    let (v, d1, d2) = cutoff_eval(spec, z);
    let q_dim = e.homogeneous_dim();
    let g = 4.0 * r * r / r_scale.powi(4) * d2 + 2.0 * q_dim / (r_scale * r_scale) * d1;
    (v, g)
}

fn check_power_spec(e: &Exponents, spec: CutoffSpec, r_scale: f64) -> Result<()> {
    if !matches!(spec, CutoffSpec::Power { .. }) {
        return Err(LabError::param(
            "the subcritical integral needs the power cutoff",
        ));
    }
    if !(r_scale > 0.0) || !r_scale.is_finite() {
        return Err(LabError::param(format!(
            "R must be positive, got {r_scale}"
        )));
    }
    integrability_guard(spec, e.q).map(|_| ())
}

/// `I_4 = int phi2^(-1/(q-1)) |Delta_H phi2|^q' d eta` by gauge-polar factorization.
pub fn spatial_integral_subcritical(
    e: &Exponents,
    spec: CutoffSpec,
    r_scale: f64,
    mc: McConfig,
) -> Result<FactorizedEstimate> {
    check_power_spec(e, spec, r_scale)?;
    let (q, qc, q_dim) = (e.q, e.q_conj, e.homogeneous_dim());
    let radial = adaptive(
        |r| {
            let (v, g) = phi_radial_parts(e, spec, r_scale, r);
            capacity_density(v, g, q) * r.powf(q_dim - 1.0)
        },
        r_scale / 2f64.sqrt(),
        r_scale,
        RADIAL_TOL,
    );
    let sphere = sphere_weight_constant(e.n, qc, mc)?;
    Ok(FactorizedEstimate::new(radial, sphere))
}

/// `int |Delta_H phi2|^q' d eta`, the integral that controls the data terms.
pub fn data_integral_subcritical(
    e: &Exponents,
    spec: CutoffSpec,
    r_scale: f64,
    mc: McConfig,
) -> Result<FactorizedEstimate> {
    check_power_spec(e, spec, r_scale)?;
    let (qc, q_dim) = (e.q_conj, e.homogeneous_dim());
    let radial = adaptive(
        |r| {
            let (_, g) = phi_radial_parts(e, spec, r_scale, r);
            g.abs().powf(qc) * r.powf(q_dim - 1.0)
        },
        r_scale / 2f64.sqrt(),
        r_scale,
        RADIAL_TOL,
    );
    let sphere = sphere_weight_constant(e.n, qc, mc)?;
    Ok(FactorizedEstimate::new(radial, sphere))
}

/// Direct Monte Carlo of `I_4` over the box enclosing the gauge ball of radius `R`.
///
/// Use a seed different from the one behind the sphere constant when the two
/// estimates are compared; equal seeds produce dilated copies of the same
/// sample points.
pub fn mc_spatial_integral(
    e: &Exponents,
    spec: CutoffSpec,
    r_scale: f64,
    mc: McConfig,
) -> Result<McEstimate> {
    check_power_spec(e, spec, r_scale)?;
    let n = e.n;
    let d = 2 * n + 1;
    let q = e.q;
    let mut lo = vec![-r_scale; d];
    let mut hi = vec![r_scale; d];
    lo[d - 1] = -r_scale * r_scale;
    hi[d - 1] = r_scale * r_scale;
    integrate_box(&lo, &hi, mc, |c| {
        let p = GroupPoint {
            x: c[..n].to_vec(),
            y: c[n..2 * n].to_vec(),
            tau: c[d - 1],
        };
        match phi_spatial(spec, r_scale, &p) {
            Ok((v, lap)) => capacity_density(v, lap, q),
            _ => 0.0,
        }
    })
}

/// Spatial factor of the critical-case capacity integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalSpatial {
    /// `int psi2^(-1/(q-1)) |Delta_H psi2|^q' d eta`.
    pub factor: FactorizedEstimate,
    /// Majorant with the `Psi^(kappa-2) / (r^2 ln^2 sqrt R)` term (sphere constant at `s = 0`).
    pub bound_first: FactorizedEstimate,
    /// Majorant with the `Psi^(kappa-1) / (r^2 ln sqrt R)` term.
    pub bound_second: FactorizedEstimate,
    /// `(ln R)^(-Q) + (ln R)^(-Q/2)`.
    pub envelope: f64,
    /// `factor / envelope`.
    pub quotient: f64,
}

fn check_critical(e: &Exponents, r_scale: f64) -> Result<()> {
    if !e.is_critical() {
        return Err(LabError::param(format!(
            "critical integral needs q = Q/(Q-2) = {}, got {}",
            e.critical_exponent(),
            e.q
        )));
    }
    if !(r_scale > 1.0) || !r_scale.is_finite() {
        return Err(LabError::param(format!("R must exceed 1, got {r_scale}")));
    }
    e.log_cutoff().validate_for(e.q)
}

/// Integrates `f(r)` over `sqrt R <= r <= R` in the variable
/// `w = ln(r / sqrt R) / ln sqrt R`, i.e. `r = exp((1 + w) ln sqrt R)`.
fn log_radial(r_scale: f64, f: impl Fn(f64, f64) -> f64) -> QuadratureEstimate {
    let l = 0.5 * r_scale.ln();
    adaptive(
        |w| {
            let r = ((1.0 + w) * l).exp();
            f(w, r) * r * l
        },
        0.0,
        1.0,
        RADIAL_TOL,
    )
}

/// Critical-case spatial integral and the two majorants used to bound it.
pub fn spatial_integral_critical(
    e: &Exponents,
    spec: CutoffSpec,
    r_scale: f64,
    mc: McConfig,
) -> Result<CriticalSpatial> {
    check_critical(e, r_scale)?;
    let CutoffSpec::Logarithmic { kappa } = spec else {
        return Err(LabError::param(
            "the critical integral needs the logarithmic cutoff",
        ));
    };
    spec.validate_for(e.q)?;
    let (q, qc, q_dim) = (e.q, e.q_conj, e.homogeneous_dim());
    let l = 0.5 * r_scale.ln();

    let radial = log_radial(r_scale, |_, r| {
        let (v, g) = psi_radial(kappa, r_scale, q_dim, r);
        capacity_density(v, g, q) * r.powf(q_dim - 1.0)
    });
    let first = log_radial(r_scale, |w, r| {
        let (base, _, _) = cutoff_eval(spec, w);
        if base <= 0.0 {
            return 0.0;
        }
        capacity_density(
            base.powf(kappa),
            base.powf(kappa - 2.0) / (r * r * l * l),
            q,
        ) * r.powf(q_dim - 1.0)
    });
    let second = log_radial(r_scale, |w, r| {
        let (base, _, _) = cutoff_eval(spec, w);
        if base <= 0.0 {
            return 0.0;
        }
        capacity_density(base.powf(kappa), base.powf(kappa - 1.0) / (r * r * l), q)
            * r.powf(q_dim - 1.0)
    });

    let s_q = sphere_weight_constant(e.n, qc, mc)?;
    let s_0 = sphere_weight_constant(e.n, 0.0, mc)?;
    let factor = FactorizedEstimate::new(radial, s_q);
    let ln_r = r_scale.ln();
    let envelope = ln_r.powf(-q_dim) + ln_r.powf(-q_dim / 2.0);
    Ok(CriticalSpatial {
        factor,
        bound_first: FactorizedEstimate::new(first, s_0),
        bound_second: FactorizedEstimate::new(second, s_0),
        envelope,
        quotient: factor.value / envelope,
    })
}

/// `int |Delta_H psi2|^q' d eta` in the critical case.
pub fn data_integral_critical(
    e: &Exponents,
    spec: CutoffSpec,
    r_scale: f64,
    mc: McConfig,
) -> Result<FactorizedEstimate> {
    check_critical(e, r_scale)?;
    let CutoffSpec::Logarithmic { kappa } = spec else {
        return Err(LabError::param(
            "the critical integral needs the logarithmic cutoff",
        ));
    };
    let (qc, q_dim) = (e.q_conj, e.homogeneous_dim());
    let radial = log_radial(r_scale, |_, r| {
        let (_, g) = psi_radial(kappa, r_scale, q_dim, r);
        g.abs().powf(qc) * r.powf(q_dim - 1.0)
    });
    Ok(FactorizedEstimate::new(
        radial,
        sphere_weight_constant(e.n, qc, mc)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Abscissa {
    LogT,
    LogR,
    LogLogR,
}

/// Least-squares power law `value ~ exp(intercept) * x^slope` in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// `max |fitted / value - 1|` over the samples.
    pub max_rel_residual: f64,
    pub kind: Abscissa,
    pub points: usize,
}

pub fn scaling_fit(samples: &[(f64, f64)], kind: Abscissa) -> Result<ScalingFit> {
    if samples.len() < 4 {
        return Err(LabError::param(format!(
            "a scaling fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for &(a, v) in samples {
        if !(v > 0.0) {
            return Err(LabError::param(format!(
                "scaling fit needs positive values, got {v}"
            )));
        }
        let x = match kind {
            Abscissa::LogT | Abscissa::LogR if a > 0.0 => a.ln(),
            Abscissa::LogLogR if a > 1.0 => a.ln().ln(),
            _ => {
                return Err(LabError::param(format!(
                    "abscissa {a} is outside the domain of {kind:?}"
                )))
            }
        };
        xs.push(x);
        ys.push(v.ln());
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(LabError::param("scaling fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_rel_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| ((intercept + slope * x - y).exp() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ScalingFit {
        slope,
        intercept,
        max_rel_residual,
        kind,
        points: samples.len(),
    })
}

/// Constant of the epsilon-Young inequality with `epsilon = q/4`:
/// `C(q) = (q/4)^(1-q') / q'`.
pub fn young_constant(q: f64) -> Result<f64> {
    if !(q > 1.0) {
        return Err(LabError::param(format!("q must exceed 1, got {q}")));
    }
    let qc = q / (q - 1.0);
    Ok((q / 4.0).powf(1.0 - qc) / qc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTerm {
    pub name: String,
    pub value: f64,
}

/// A-priori bound on `int int |u|^q phi` and its additive breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub bound: f64,
    pub terms: Vec<BoundTerm>,
    pub exponents: Exponents,
    pub horizon: f64,
    pub r_scale: f64,
    pub u0_norm: f64,
    pub u1_norm: f64,
    pub critical: bool,
    /// Grouped `T`/`R` envelope of the bound.
    pub envelope: f64,
    /// `bound / envelope`.
    pub measured_constant: f64,
}

impl CapacityReport {
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.name == name).map(|t| t.value)
    }
}

struct SpatialParts {
    capacity: f64,
    data: f64,
}

fn spatial_parts(e: &Exponents, r_scale: f64, mc: McConfig) -> Result<SpatialParts> {
    if e.is_critical() {
        let spec = e.log_cutoff();
        Ok(SpatialParts {
            capacity: spatial_integral_critical(e, spec, r_scale, mc)?
                .factor
                .value,
            data: data_integral_critical(e, spec, r_scale, mc)?.value,
        })
    } else {
        let spec = e.power_cutoff();
        Ok(SpatialParts {
            capacity: spatial_integral_subcritical(e, spec, r_scale, mc)?.value,
            data: data_integral_subcritical(e, spec, r_scale, mc)?.value,
        })
    }
}

fn check_norms(norms: &[f64]) -> Result<()> {
    if norms.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(LabError::param("data norms must be finite and nonnegative"));
    }
    Ok(())
}

fn r_envelope(e: &Exponents, r_scale: f64) -> f64 {
    if e.is_critical() {
        let l = r_scale.ln();
        let q_dim = e.homogeneous_dim();
        l.powf(-q_dim) + l.powf(-q_dim / 2.0)
    } else {
        r_scale.powf(e.spatial_power())
    }
}

fn assemble(
    e: &Exponents,
    horizon: f64,
    r_scale: f64,
    norms: (f64, f64),
    terms: Vec<BoundTerm>,
    envelope: f64,
) -> CapacityReport {
    let bound = terms.iter().map(|t| t.value).sum();
    CapacityReport {
        bound,
        terms,
        exponents: *e,
        horizon,
        r_scale,
        u0_norm: norms.0,
        u1_norm: norms.1,
        critical: e.is_critical(),
        envelope,
        measured_constant: bound / envelope,
    }
}

/// Bound for the first-order-in-time equation:
/// `2C(q)(I_2 I_4 + I_1 I_4) + 2 ||u0||_q (int |Delta_H phi2|^q')^(1/q')`.
///
/// At `q = Q/(Q-2)` the logarithmic test function is used instead.
pub fn capacity_bound_parabolic(
    e: &Exponents,
    horizon: f64,
    r_scale: f64,
    u0_norm: f64,
    mc: McConfig,
) -> Result<CapacityReport> {
    e.validate()?;
    check_norms(&[u0_norm])?;
    let c = young_constant(e.q)?;
    let i1 = time_integral(e, horizon, 0)?.value;
    let i2 = time_integral(e, horizon, 1)?.value;
    let sp = spatial_parts(e, r_scale, mc)?;
    let terms = vec![
        BoundTerm {
            name: "dt_term".into(),
            value: 2.0 * c * i2 * sp.capacity,
        },
        BoundTerm {
            name: "lap_term".into(),
            value: 2.0 * c * i1 * sp.capacity,
        },
        BoundTerm {
            name: "u0_term".into(),
            value: 2.0 * u0_norm * sp.data.powf(1.0 / e.q_conj),
        },
    ];
    let t_part = if e.is_critical() {
        horizon.powf((2.0 - e.homogeneous_dim()) / 2.0) + horizon + 1.0
    } else {
        horizon.powf(1.0 - e.q_conj) + horizon + 1.0
    };
    let env = t_part * r_envelope(e, r_scale);
    Ok(assemble(e, horizon, r_scale, (u0_norm, 0.0), terms, env))
}

/// Bound for the second-order-in-time equation:
/// `2C(q)(I_3 I_4 + I_1 I_4) + 2(||u1||_q + (l/T)||u0||_q)(int |Delta_H phi2|^q')^(1/q')`.
pub fn capacity_bound_hyperbolic(
    e: &Exponents,
    horizon: f64,
    r_scale: f64,
    u0_norm: f64,
    u1_norm: f64,
    mc: McConfig,
) -> Result<CapacityReport> {
    e.validate()?;
    check_norms(&[u0_norm, u1_norm])?;
    let c = young_constant(e.q)?;
    let i1 = time_integral(e, horizon, 0)?.value;
    let i3 = time_integral(e, horizon, 2)?.value;
    let sp = spatial_parts(e, r_scale, mc)?;
    let data = sp.data.powf(1.0 / e.q_conj);
    let terms = vec![
        BoundTerm {
            name: "dtt_term".into(),
            value: 2.0 * c * i3 * sp.capacity,
        },
        BoundTerm {
            name: "lap_term".into(),
            value: 2.0 * c * i1 * sp.capacity,
        },
        BoundTerm {
            name: "u1_term".into(),
            value: 2.0 * u1_norm * data,
        },
        BoundTerm {
            name: "u0_term".into(),
            value: 2.0 * (e.ell / horizon) * u0_norm * data,
        },
    ];
    let first = if e.is_critical() {
        horizon.powf(1.0 - e.homogeneous_dim())
    } else {
        horizon.powf(1.0 - 2.0 * e.q_conj)
    };
    let env = (first + horizon + 1.0 + 1.0 / horizon) * r_envelope(e, r_scale);
    Ok(assemble(
        e,
        horizon,
        r_scale,
        (u0_norm, u1_norm),
        terms,
        env,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    SubcriticalBlowup,
    CriticalBlowup,
    SupercriticalNoConclusion,
}

impl Verdict {
    pub fn note(&self) -> &'static str {
        match self {
            Verdict::SubcriticalBlowup => "no nontrivial local weak solution (subcritical)",
            Verdict::CriticalBlowup => "no nontrivial local weak solution (critical)",
            Verdict::SupercriticalNoConclusion => {
                "no conclusion from capacity bounds; stationary supersolutions exist"
            }
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerdictReport {
    pub n: usize,
    pub q: Ratio<i64>,
    pub critical: Ratio<i64>,
    pub verdict: Verdict,
}

/// Classifies `q` against `q_c = Q/(Q-2) = (n+1)/n` in exact rational arithmetic.
pub fn verdict(n: usize, q: Ratio<i64>) -> Result<VerdictReport> {
    if n == 0 {
        return Err(LabError::param("n must be at least 1"));
    }
    if q <= Ratio::from_integer(1) {
        return Err(LabError::param(format!("q must exceed 1, got {q}")));
    }
    let n_i = n as i64;
    let critical = Ratio::new(n_i + 1, n_i);
    let verdict = match q.cmp(&critical) {
        std::cmp::Ordering::Less => Verdict::SubcriticalBlowup,
        std::cmp::Ordering::Equal => Verdict::CriticalBlowup,
        std::cmp::Ordering::Greater => Verdict::SupercriticalNoConclusion,
    };
    Ok(VerdictReport {
        n,
        q,
        critical,
        verdict,
    })
}

/// Parses `"3/2"`, `"1.5"` or `"2"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let bad = || LabError::param(format!("cannot parse {s:?} as a rational number"));
    if let Some((a, b)) = s.split_once('/') {
        let num: i64 = a.trim().parse().map_err(|_| bad())?;
        let den: i64 = b.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
        || frac_part.len() > 15
    {
        return Err(bad());
    }
    let den = 10i64.pow(frac_part.len() as u32);
    let int_v: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| bad())?
    };
    let frac_v: i64 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().map_err(|_| bad())?
    };
    let num = int_v
        .checked_mul(den)
        .and_then(|v| v.checked_add(frac_v))
        .ok_or_else(bad)?;
    Ok(Ratio::new(if neg { -num } else { num }, den))
}

pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(q: f64, ell: f64) -> Exponents {
        Exponents::new(q, 1, Some(ell), None).unwrap()
    }

    #[test]
    fn closed_form_constants() {
        let e = ex(2.0, 4.0);
        assert!((time_integral_constant(&e, 0).unwrap() - 0.2).abs() < 1e-15);
        assert!((time_integral_constant(&e, 1).unwrap() - 16.0 / 3.0).abs() < 1e-13);
        assert!((time_integral_constant(&e, 2).unwrap() - 144.0).abs() < 1e-11);
        let e = ex(1.5, 6.0);
        assert!((time_integral_constant(&e, 0).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        assert!((time_integral_constant(&e, 1).unwrap() - 54.0).abs() < 1e-11);
        assert!((time_integral_constant(&e, 2).unwrap() - 27000.0).abs() < 1e-8);
        let big = ex(2.0, 1e9);
        assert!(time_integral_constant(&big, 0).unwrap() < 1e-8);
    }

    #[test]
    fn time_integrals_hit_closed_forms() {
        let e = ex(2.0, 4.0);
        let want = [2.0, 16.0 / 30.0, 0.144];
        for k in 0..3u8 {
            let got = time_integral(&e, 10.0, k).unwrap();
            assert!(
                (got.value - want[k as usize]).abs() < 1e-12 * want[k as usize],
                "k={k}"
            );
            assert!(got.abs_error < 1e-10);
        }
    }

    #[test]
    fn time_integral_order_constraints() {
        // l = 1.5 with q = 2 passes k = 1 (l > 1) but fails k = 2 (l > 3)
        let e = Exponents {
            q: 2.0,
            q_conj: 2.0,
            ell: 1.5,
            kappa: 5.0,
            m: 2,
            n: 1,
        };
        assert!(time_integral(&e, 1.0, 1).is_ok());
        let err = time_integral(&e, 1.0, 2).unwrap_err().to_string();
        assert!(err.contains("(q+1)/(q-1)"), "{err}");
        let e = Exponents { ell: 0.5, ..e };
        assert!(time_integral(&e, 1.0, 1).is_err());
        assert!(time_integral_constant(&e, 1).is_err());
    }

    #[test]
    fn exponent_validation_names_constraint() {
        let err = Exponents::new(2.0, 1, Some(2.0), None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("l must exceed (q+1)/(q-1)"));
        assert!(Exponents::new(2.0, 1, None, Some(3.0)).is_err());
        assert!(Exponents::new(1.0, 1, None, None).is_err());
        let e = Exponents::new(1.5, 1, None, None).unwrap();
        assert_eq!(e.m, 3);
        assert!((e.ell - 6.0).abs() < 1e-15);
        assert!((e.kappa - 7.0).abs() < 1e-15);
        assert!(!e.is_critical());
        assert!(Exponents::new(2.0, 1, None, None).unwrap().is_critical());
    }

    #[test]
    fn young_constant_values() {
        assert!((young_constant(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((young_constant(1.5).unwrap() - 2.370_370_370_370_37).abs() < 1e-12);
        assert!((young_constant(1e9).unwrap() - 1.0).abs() < 1e-6);
        assert!(young_constant(1.0).is_err());
    }

    #[test]
    fn young_inequality_holds() {
        for q in [1.2, 1.5, 2.0, 3.5] {
            let c = young_constant(q).unwrap();
            for &(x, y) in &[(0.3, 2.0), (5.0, 0.1), (1.0, 1.0), (2.5, 7.0)] {
                let lhs: f64 = x * y;
                let rhs = 0.25 * f64::powf(x, q) + c * f64::powf(y, q / (q - 1.0));
                assert!(lhs <= rhs * (1.0 + 1e-12), "q={q} x={x} y={y}");
            }
        }
    }

    #[test]
    fn verdict_table() {
        let v = |n, s: &str| verdict(n, parse_rational(s).unwrap()).unwrap().verdict;
        assert_eq!(v(1, "1.5"), Verdict::SubcriticalBlowup);
        assert_eq!(v(1, "2"), Verdict::CriticalBlowup);
        assert_eq!(v(2, "2"), Verdict::SupercriticalNoConclusion);
        assert_eq!(v(2, "3/2"), Verdict::CriticalBlowup);
        assert_eq!(v(3, "4/3"), Verdict::CriticalBlowup);
        assert_eq!(v(3, "1.3333"), Verdict::SubcriticalBlowup);
        assert_eq!(
            verdict(3, Ratio::new(4, 3)).unwrap().critical,
            Ratio::new(4, 3)
        );
        assert!(verdict(1, Ratio::from_integer(1)).is_err());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1.5").unwrap(), Ratio::new(3, 2));
        assert_eq!(parse_rational(" 4/3 ").unwrap(), Ratio::new(4, 3));
        assert_eq!(parse_rational("2").unwrap(), Ratio::from_integer(2));
        assert_eq!(parse_rational(".25").unwrap(), Ratio::new(1, 4));
        for bad in ["", "abc", "1/0", "1.2.3", "1e5"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn scaling_fit_recovers_power_law() {
        let s: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0]
            .iter()
            .map(|&t: &f64| (t, 3.0 * t.powf(-1.5)))
            .collect();
        let fit = scaling_fit(&s, Abscissa::LogT).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit.max_rel_residual < 1e-12);
        assert!(scaling_fit(&s[..3], Abscissa::LogT).is_err());
        let mut neg = s.clone();
        neg[0].1 = -1.0;
        assert!(scaling_fit(&neg, Abscissa::LogT).is_err());
        assert!(scaling_fit(
            &[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)],
            Abscissa::LogLogR
        )
        .is_err());
    }

    #[test]
    fn critical_requires_critical_q() {
        let e = Exponents::new(1.5, 1, None, None).unwrap();
        let mc = McConfig {
            samples: 1000,
            seed: 1,
        };
        assert!(spatial_integral_critical(&e, e.log_cutoff(), 100.0, mc).is_err());
        let e = Exponents::new(2.0, 1, None, None).unwrap();
        assert!(spatial_integral_critical(&e, e.log_cutoff(), 1.0, mc).is_err());
        assert!(spatial_integral_critical(&e, e.power_cutoff(), 100.0, mc).is_err());
    }

    #[test]
    fn sphere_constant_monotone_in_power() {
        let mc = McConfig {
            samples: 100_000,
            seed: 5,
        };
        let s1 = sphere_weight_constant(1, 1.0, mc).unwrap();
        let s2 = sphere_weight_constant(1, 2.0, mc).unwrap();
        // same samples, pointwise omega^2 <= omega
        assert!(s1.value >= s2.value);
        assert!(sphere_weight_constant(
            1,
            1.0,
            McConfig {
                samples: 0,
                seed: 5
            }
        )
        .is_err());
    }

    #[test]
    fn bound_is_sum_of_terms() {
        let e = Exponents::new(1.5, 1, None, None).unwrap();
        let mc = McConfig {
            samples: 20_000,
            seed: 9,
        };
        let r = capacity_bound_hyperbolic(&e, 2.0, 8.0, 0.7, 0.3, mc).unwrap();
        let sum: f64 = r.terms.iter().map(|t| t.value).sum();
        assert_eq!(r.bound, sum);
        assert_eq!(r.terms.len(), 4);
        assert!(capacity_bound_parabolic(&e, 2.0, 8.0, -1.0, mc).is_err());
    }
}
