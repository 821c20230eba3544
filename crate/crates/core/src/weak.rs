//! Weak-formulation residuals and the self-adjointness identity.
//!
//! For the first-order equation the residual is
//!
//! ```text
//! int_0^T int (|u|^q phi + u Delta_H phi - u Delta_H phi_t) - int u0 Delta_H phi(0)
//! ```
//!
//! and for the second-order equation
//!
//! ```text
//! int_0^T int (|u|^q phi + u Delta_H phi + u Delta_H phi_tt)
//!     - int u1 Delta_H phi(0) + int u0 Delta_H phi_t(0)
//! ```
//!
//! Space is sampled by seeded Monte Carlo over the box enclosing the test
//! function support, time by Gauss-Legendre. Each spatial sample carries its
//! full time integral, so `lhs`, `rhs` and the residual share samples and the
//! residual gets its own standard error.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::calculus::sublaplacian;
use crate::error::{LabError, Result};
use crate::field::SmoothField;
use crate::group::GroupPoint;
use crate::montecarlo::{integrate_box_multi, McConfig};
use crate::quadrature::gauss_legendre;
use crate::test_functions::SpaceTimeTest;

pub type SpaceTimeFn = Arc<dyn Fn(f64, &GroupPoint) -> f64 + Send + Sync>;

/// A candidate `u(t, eta)` together with its initial data.
#[derive(Clone)]
pub struct CandidateSolution {
    pub n: usize,
    pub u: SpaceTimeFn,
    pub u0: Arc<dyn SmoothField>,
    pub u1: Option<Arc<dyn SmoothField>>,
}

struct ZeroField(usize);

impl SmoothField for ZeroField {
    fn n(&self) -> usize {
        self.0
    }
    fn value(&self, _: &GroupPoint) -> f64 {
        0.0
    }
    fn d1(&self, _: &GroupPoint, _: usize) -> f64 {
        0.0
    }
    fn d2(&self, _: &GroupPoint, _: usize, _: usize) -> f64 {
        0.0
    }
}

impl CandidateSolution {
    pub fn new(
        u: impl Fn(f64, &GroupPoint) -> f64 + Send + Sync + 'static,
        u0: Arc<dyn SmoothField>,
    ) -> Self {
        Self {
            n: u0.n(),
            u: Arc::new(u),
            u0,
            u1: None,
        }
    }

    pub fn with_velocity(mut self, u1: Arc<dyn SmoothField>) -> Self {
        self.u1 = Some(u1);
        self
    }

    /// `u = 0` with zero data (and zero velocity).
    pub fn zero(n: usize) -> Self {
        Self::new(|_, _| 0.0, Arc::new(ZeroField(n))).with_velocity(Arc::new(ZeroField(n)))
    }

    /// Largest `|u(0, p) - u0(p)|` over `points`.
    pub fn initial_mismatch(&self, points: &[GroupPoint]) -> f64 {
        points
            .iter()
            .map(|p| ((self.u)(0.0, p) - self.u0.value(p)).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakConfig {
    /// Exponent of the nonlinearity `|u|^q`.
    pub q: f64,
    pub mc: McConfig,
    pub time_nodes: usize,
}

impl WeakConfig {
    pub fn new(q: f64, mc: McConfig) -> Self {
        Self {
            q,
            mc,
            time_nodes: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    /// Standard error of the residual from per-sample differences.
    pub stderr: f64,
    pub samples: u64,
    pub time_nodes: usize,
}

fn probe_points(n: usize, radius: f64) -> Vec<GroupPoint> {
    let mut out = Vec::new();
    for k in 1..=8 {
        let r = radius * k as f64 / 9.0;
        let mut p = GroupPoint::origin(n);
        p.x[0] = r;
        out.push(p);
        let mut p = GroupPoint::origin(n);
        p.y[n - 1] = 0.6 * r;
        p.tau = 0.5 * r * r;
        out.push(p);
    }
    out
}

fn check_terminal(testfn: &dyn SpaceTimeTest, with_velocity: bool) -> Result<()> {
    let t = testfn.horizon();
    for p in probe_points(testfn.n(), testfn.support_radius()) {
        let e = testfn.eval(t, &p)?;
        if e.value.abs() > 1e-12 {
            return Err(LabError::TerminalCondition(format!(
                "phi(T, .) = {} at {:?}",
                e.value,
                p.to_flat()
            )));
        }
        if with_velocity && e.dt.abs() > 1e-12 {
            return Err(LabError::TerminalCondition(format!(
                "phi_t(T, .) = {} at {:?}",
                e.dt,
                p.to_flat()
            )));
        }
    }
    Ok(())
}

fn check_setup(c: &CandidateSolution, testfn: &dyn SpaceTimeTest, cfg: &WeakConfig) -> Result<()> {
    if c.n != testfn.n() {
        return Err(LabError::DimensionMismatch {
            expected: testfn.n(),
            found: c.n,
        });
    }
    if !(cfg.q > 1.0) {
        return Err(LabError::param(format!("q must exceed 1, got {}", cfg.q)));
    }
    if cfg.time_nodes == 0 {
        return Err(LabError::param("time quadrature needs at least one node"));
    }
    Ok(())
}

fn support_box(n: usize, radius: f64) -> (Vec<f64>, Vec<f64>) {
    let d = 2 * n + 1;
    let mut lo = vec![-radius; d];
    let mut hi = vec![radius; d];
    lo[d - 1] = -radius * radius;
    hi[d - 1] = radius * radius;
    (lo, hi)
}

#[derive(Clone, Copy)]
enum Kind {
    Parabolic,
    Hyperbolic,
}

fn residual(
    c: &CandidateSolution,
    testfn: &dyn SpaceTimeTest,
    cfg: &WeakConfig,
    kind: Kind,
) -> Result<ResidualReport> {
    check_setup(c, testfn, cfg)?;
    check_terminal(testfn, matches!(kind, Kind::Hyperbolic))?;
    let u1 = match kind {
        Kind::Hyperbolic => Some(
            c.u1.as_ref()
                .ok_or_else(|| LabError::param("second-order residual needs u1"))?,
        ),
        Kind::Parabolic => None,
    };
    let n = c.n;
    let horizon = testfn.horizon();
    let (nodes, weights) = gauss_legendre(cfg.time_nodes);
    let times: Vec<(f64, f64)> = nodes
        .iter()
        .zip(&weights)
        .map(|(x, w)| (0.5 * horizon * (x + 1.0), 0.5 * horizon * w))
        .collect();
    let (lo, hi) = support_box(n, testfn.support_radius());
    let failure = std::sync::Mutex::new(None::<LabError>);
    let q = cfg.q;

    let est = integrate_box_multi(&lo, &hi, cfg.mc, 3, |flat, out| {
        let p = GroupPoint::from_flat(flat).expect("sample dimension matches");
        let run = || -> Result<(f64, f64)> {
            let e0 = testfn.eval(0.0, &p)?;
            if e0.value == 0.0 && e0.lap == 0.0 && e0.lap_t == 0.0 {
                return Ok((0.0, 0.0));
            }
            let mut lhs = 0.0;
            for &(t, w) in &times {
                let e = testfn.eval(t, &p)?;
                let u = (c.u)(t, &p);
                let time_term = match kind {
                    Kind::Parabolic => -u * e.lap_t,
                    Kind::Hyperbolic => u * e.lap_tt,
                };
                lhs += w * (u.abs().powf(q) * e.value + u * e.lap + time_term);
            }
            let rhs = match (kind, u1) {
                (Kind::Hyperbolic, Some(u1)) => u1.value(&p) * e0.lap - c.u0.value(&p) * e0.lap_t,
                _ => c.u0.value(&p) * e0.lap,
            };
            Ok((lhs, rhs))
        };
        match run() {
            Ok((l, r)) => {
                out[0] = l;
                out[1] = r;
                out[2] = l - r;
            }
            Err(err) => {
                failure.lock().expect("poisoned").get_or_insert(err);
            }
        }
    })?;
    if let Some(err) = failure.into_inner().expect("poisoned") {
        return Err(err);
    }
    let report = ResidualReport {
        lhs: est[0].value,
        rhs: est[1].value,
        residual: est[2].value,
        lhs_stderr: est[0].stderr,
        rhs_stderr: est[1].stderr,
        stderr: est[2].stderr,
        samples: cfg.mc.samples,
        time_nodes: cfg.time_nodes,
    };
    if !report.residual.is_finite() {
        return Err(LabError::domain("weak residual is not finite"));
    }
    Ok(report)
}

/// Residual of the weak form of `d/dt Delta_H u + Delta_H u + |u|^q = 0`.
pub fn weak_residual_parabolic(
    c: &CandidateSolution,
    testfn: &dyn SpaceTimeTest,
    cfg: &WeakConfig,
) -> Result<ResidualReport> {
    residual(c, testfn, cfg, Kind::Parabolic)
}

/// Residual of the weak form of `d2/dt2 Delta_H u + Delta_H u + |u|^q = 0`.
pub fn weak_residual_hyperbolic(
    c: &CandidateSolution,
    testfn: &dyn SpaceTimeTest,
    cfg: &WeakConfig,
) -> Result<ResidualReport> {
    residual(c, testfn, cfg, Kind::Hyperbolic)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfAdjointReport {
    /// `int (-Delta_H f) g`.
    pub left: f64,
    /// `int f (-Delta_H g)`.
    pub right: f64,
    /// `|left - right|`.
    pub residual: f64,
    /// Standard error of `left - right` from common samples.
    pub error: f64,
    pub left_stderr: f64,
    pub right_stderr: f64,
}

const FACE_GRID: usize = 24;

fn check_faces<F: SmoothField + ?Sized>(f: &F, lo: &[f64], hi: &[f64]) -> Result<()> {
    let d = lo.len();
    let mut coords = vec![0.0; d];
    for axis in 0..d {
        for side in [lo[axis], hi[axis]] {
            let others: Vec<usize> = (0..d).filter(|&k| k != axis).collect();
            let total = FACE_GRID.pow(others.len() as u32);
            for idx in 0..total {
                let mut rem = idx;
                for &k in &others {
                    let j = rem % FACE_GRID;
                    rem /= FACE_GRID;
                    coords[k] = lo[k] + (hi[k] - lo[k]) * j as f64 / (FACE_GRID - 1) as f64;
                }
                coords[axis] = side;
                let p = GroupPoint::from_flat(&coords)?;
                if f.value(&p) != 0.0 {
                    return Err(LabError::SupportTouchesBoundary);
                }
            }
        }
    }
    Ok(())
}

/// `|int (-Delta_H f) g - int f (-Delta_H g)|` over the box `[lo, hi]`.
pub fn selfadjointness_residual<F, G>(
    f: &F,
    g: &G,
    lo: &[f64],
    hi: &[f64],
    mc: McConfig,
) -> Result<SelfAdjointReport>
where
    F: SmoothField + ?Sized,
    G: SmoothField + ?Sized,
{
    if f.n() != g.n() {
        return Err(LabError::DimensionMismatch {
            expected: f.n(),
            found: g.n(),
        });
    }
    let n = f.n();
    if lo.len() != 2 * n + 1 || hi.len() != 2 * n + 1 {
        return Err(LabError::DimensionMismatch {
            expected: 2 * n + 1,
            found: lo.len(),
        });
    }
    check_faces(f, lo, hi)?;
    check_faces(g, lo, hi)?;
    let est = integrate_box_multi(lo, hi, mc, 3, |flat, out| {
        let p = GroupPoint::from_flat(flat).expect("sample dimension matches");
        let (fv, gv) = (f.value(&p), g.value(&p));
        let a = -sublaplacian(f, &p) * gv;
        let b = -fv * sublaplacian(g, &p);
        out[0] = a;
        out[1] = b;
        out[2] = a - b;
    })?;
    Ok(SelfAdjointReport {
        left: est[0].value,
        right: est[1].value,
        residual: est[2].value.abs(),
        error: est[2].stderr,
        left_stderr: est[0].stderr,
        right_stderr: est[1].stderr,
    })
}
