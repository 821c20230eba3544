//! Finite-difference simulation of
//!
//! ```text
//! d/dt Delta_H u + Delta_H u + |u|^q = 0      (parabolic)
//! d2/dt2 Delta_H u + Delta_H u + |u|^q = 0    (hyperbolic)
//! ```
//!
//! on `H^1` truncated to a box with zero Dirichlet data. Every step solves
//! `L_h w = -L_h u - |u|^q` for `w = u_t` (or `u_tt`), then advances with
//! explicit Euler or leapfrog.

pub mod grid;
pub mod operator;

use serde::{Deserialize, Serialize};

pub use grid::{Grid, GridField};
pub use operator::{
    assemble_sublaplacian, solve_linear, solve_linear_from, SolveStats, SparseOperator,
};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    Parabolic,
    Hyperbolic,
}

/// `amplitude * exp(-|p - center|^2 / width^2)` in flat coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianBump {
    pub center: [f64; 3],
    pub width: f64,
    pub amplitude: f64,
}

impl GaussianBump {
    pub fn eval(&self, p: [f64; 3]) -> f64 {
        let d2: f64 = p
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum();
        self.amplitude * (-d2 / (self.width * self.width)).exp()
    }
}

fn default_n() -> usize {
    1
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub equation: Equation,
    pub q: f64,
    pub nonlinear: bool,
    pub dt: f64,
    pub steps: usize,
    pub half_widths: [f64; 3],
    pub counts: [usize; 3],
    pub initial: GaussianBump,
    /// Initial velocity for the hyperbolic equation; zero when absent.
    #[serde(default)]
    pub velocity: Option<GaussianBump>,
    #[serde(default = "default_tol")]
    pub solver_tol: f64,
    /// Defaults to ten times the number of unknowns.
    #[serde(default)]
    pub max_iter: Option<usize>,
    pub blowup_threshold: f64,
    #[serde(default)]
    pub tau_regularization: f64,
    #[serde(default = "default_n")]
    pub n: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<Grid> {
        if self.n != 1 {
            return Err(LabError::param(format!(
                "the simulator supports n = 1 only, got n = {}",
                self.n
            )));
        }
        if !(self.q > 1.0) {
            return Err(LabError::param(format!("q must exceed 1, got {}", self.q)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(LabError::param(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(LabError::param("blow-up threshold M must be positive"));
        }
        if !(self.solver_tol > 0.0) {
            return Err(LabError::param("solver tolerance must be positive"));
        }
        if !(self.initial.width > 0.0) || self.velocity.is_some_and(|v| !(v.width > 0.0)) {
            return Err(LabError::param("bump widths must be positive"));
        }
        Grid::new(self.half_widths, self.counts)
    }

    pub fn max_iter_for(&self, grid: &Grid) -> usize {
        self.max_iter.unwrap_or(10 * grid.dim())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimStatus {
    Completed,
    BlowUp { step: usize, time: f64 },
    SolverFailure { step: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub max_norm: f64,
    pub lq_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub rows: Vec<TraceRow>,
    pub status: SimStatus,
    pub tau_regularization: f64,
    pub unknowns: usize,
}

struct Stepper<'a> {
    op: &'a SparseOperator,
    q: f64,
    nonlinear: bool,
    tol: f64,
    max_iter: usize,
}

impl Stepper<'_> {
    /// Solves `L w = -L u - |u|^q`, i.e. `(-L) w = L u + |u|^q`.
    fn rate(&self, u: &GridField, guess: Option<&GridField>) -> Result<(GridField, usize)> {
        let mut rhs = self.op.apply(&u.values);
        if self.nonlinear {
            rhs.iter_mut()
                .zip(&u.values)
                .for_each(|(r, v)| *r += v.abs().powf(self.q));
        }
        let rhs = GridField {
            grid: u.grid,
            values: rhs,
        };
        let (w, st) = solve_linear_from(self.op, &rhs, guess, self.tol, self.max_iter)?;
        Ok((w, st.iterations))
    }
}

fn stepper<'a>(op: &'a SparseOperator, cfg: &SimConfig, grid: &Grid) -> Stepper<'a> {
    Stepper {
        op,
        q: cfg.q,
        nonlinear: cfg.nonlinear,
        tol: cfg.solver_tol,
        max_iter: cfg.max_iter_for(grid),
    }
}

/// One explicit Euler step `u + dt w` of the parabolic equation. Returns the
/// new state, the rate `w` and the solver iteration count.
pub fn step_parabolic(
    u: &GridField,
    op: &SparseOperator,
    cfg: &SimConfig,
    guess: Option<&GridField>,
) -> Result<(GridField, GridField, usize)> {
    let st = stepper(op, cfg, &u.grid);
    let (w, it) = st.rate(u, guess)?;
    let next = GridField {
        grid: u.grid,
        values: u
            .values
            .iter()
            .zip(&w.values)
            .map(|(a, b)| a + cfg.dt * b)
            .collect(),
    };
    Ok((next, w, it))
}

/// Two consecutive levels of the leapfrog scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicState {
    pub prev: GridField,
    pub cur: GridField,
}

/// Taylor start `u^1 = u^0 + dt u1 + dt^2/2 a^0`.
pub fn hyperbolic_start(
    u0: &GridField,
    u1: &GridField,
    op: &SparseOperator,
    cfg: &SimConfig,
) -> Result<(HyperbolicState, usize)> {
    let st = stepper(op, cfg, &u0.grid);
    let (a, it) = st.rate(u0, None)?;
    let dt = cfg.dt;
    let cur = GridField {
        grid: u0.grid,
        values: (0..u0.values.len())
            .map(|i| u0.values[i] + dt * u1.values[i] + 0.5 * dt * dt * a.values[i])
            .collect(),
    };
    Ok((
        HyperbolicState {
            prev: u0.clone(),
            cur,
        },
        it,
    ))
}

/// Leapfrog step `u^{k+1} = 2u^k - u^{k-1} + dt^2 a^k`.
pub fn step_hyperbolic(
    s: &HyperbolicState,
    op: &SparseOperator,
    cfg: &SimConfig,
) -> Result<(HyperbolicState, usize)> {
    let st = stepper(op, cfg, &s.cur.grid);
    let (a, it) = st.rate(&s.cur, None)?;
    let dt2 = cfg.dt * cfg.dt;
    let next = GridField {
        grid: s.cur.grid,
        values: (0..s.cur.values.len())
            .map(|i| 2.0 * s.cur.values[i] - s.prev.values[i] + dt2 * a.values[i])
            .collect(),
    };
    Ok((
        HyperbolicState {
            prev: s.cur.clone(),
            cur: next,
        },
        it,
    ))
}

fn row(step: usize, time: f64, u: &GridField, q: f64, iterations: usize) -> TraceRow {
    TraceRow {
        step,
        time,
        max_norm: u.max_norm(),
        lq_norm: u.lq_norm(q),
        iterations,
    }
}

/// Runs the configured simulation until the step budget, the blow-up
/// threshold or a solver failure.
pub fn run(cfg: &SimConfig) -> Result<SimTrace> {
    let grid = cfg.validate()?;
    let op = assemble_sublaplacian(&grid, cfg.tau_regularization)?;
    let u0 = grid.sample(|p| cfg.initial.eval(p));
    let mut rows = vec![row(0, 0.0, &u0, cfg.q, 0)];
    let threshold = cfg.blowup_threshold;
    let blown = |u: &GridField| !(u.max_norm() <= threshold);
    let mut trace = SimTrace {
        rows: Vec::new(),
        status: SimStatus::Completed,
        tau_regularization: cfg.tau_regularization,
        unknowns: grid.dim(),
    };
    let fail = |step: usize, e: LabError| match e {
        LabError::SolverFailure { .. } | LabError::Indefinite(_) => Ok(SimStatus::SolverFailure {
            step,
            message: e.to_string(),
        }),
        other => Err(other),
    };

    if blown(&u0) {
        trace.status = SimStatus::BlowUp { step: 0, time: 0.0 };
        trace.rows = rows;
        return Ok(trace);
    }

    match cfg.equation {
        Equation::Parabolic => {
            let mut u = u0;
            let mut w_prev: Option<GridField> = None;
            for k in 1..=cfg.steps {
                match step_parabolic(&u, &op, cfg, w_prev.as_ref()) {
                    Ok((next, w, it)) => {
                        u = next;
                        w_prev = Some(w);
                        let t = k as f64 * cfg.dt;
                        rows.push(row(k, t, &u, cfg.q, it));
                        if blown(&u) {
                            trace.status = SimStatus::BlowUp { step: k, time: t };
                            break;
                        }
                    }
                    Err(e) => {
                        trace.status = fail(k, e)?;
                        break;
                    }
                }
            }
        }
        Equation::Hyperbolic => {
            let u1 = match &cfg.velocity {
                Some(b) => grid.sample(|p| b.eval(p)),
                None => GridField::zeros(grid),
            };
            if cfg.steps > 0 {
                let mut state = match hyperbolic_start(&u0, &u1, &op, cfg) {
                    Ok((s, it)) => {
                        rows.push(row(1, cfg.dt, &s.cur, cfg.q, it));
                        Some(s)
                    }
                    Err(e) => {
                        trace.status = fail(1, e)?;
                        None
                    }
                };
                if state.as_ref().is_some_and(|s| blown(&s.cur)) {
                    trace.status = SimStatus::BlowUp {
                        step: 1,
                        time: cfg.dt,
                    };
                    state = None;
                }
                if let Some(mut s) = state {
                    for k in 2..=cfg.steps {
                        match step_hyperbolic(&s, &op, cfg) {
                            Ok((next, it)) => {
                                s = next;
                                let t = k as f64 * cfg.dt;
                                rows.push(row(k, t, &s.cur, cfg.q, it));
                                if blown(&s.cur) {
                                    trace.status = SimStatus::BlowUp { step: k, time: t };
                                    break;
                                }
                            }
                            Err(e) => {
                                trace.status = fail(k, e)?;
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    trace.rows = rows;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn config(equation: Equation, nonlinear: bool) -> SimConfig {
        SimConfig {
            equation,
            q: 1.5,
            nonlinear,
            dt: 1e-2,
            steps: 20,
            half_widths: [2.0, 2.0, 2.0],
            counts: [9, 9, 9],
            initial: GaussianBump {
                center: [0.0; 3],
                width: 0.7,
                amplitude: 1.0,
            },
            velocity: None,
            solver_tol: 1e-12,
            max_iter: None,
            blowup_threshold: 1e6,
            tau_regularization: 0.0,
            n: 1,
        }
    }

    #[test]
    fn linear_parabolic_step_is_scalar_decay() {
        let cfg = config(Equation::Parabolic, false);
        let g = cfg.validate().unwrap();
        let op = assemble_sublaplacian(&g, 0.0).unwrap();
        let u = g.sample(|p| cfg.initial.eval(p));
        let (next, _, _) = step_parabolic(&u, &op, &cfg, None).unwrap();
        for (a, b) in next.values.iter().zip(&u.values) {
            assert!((a - (1.0 - cfg.dt) * b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let cfg = config(Equation::Parabolic, true);
        let g = cfg.validate().unwrap();
        let op = assemble_sublaplacian(&g, 0.0).unwrap();
        let (next, _, it) = step_parabolic(&GridField::zeros(g), &op, &cfg, None).unwrap();
        assert_eq!(it, 0);
        assert!(next.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn leapfrog_is_time_reversible() {
        let cfg = config(Equation::Hyperbolic, false);
        let g = cfg.validate().unwrap();
        let op = assemble_sublaplacian(&g, 0.0).unwrap();
        let u0 = g.sample(|p| cfg.initial.eval(p));
        let (mut s, _) = hyperbolic_start(&u0, &GridField::zeros(g), &op, &cfg).unwrap();
        let first = s.clone();
        for _ in 0..10 {
            s = step_hyperbolic(&s, &op, &cfg).unwrap().0;
        }
        let mut back = HyperbolicState {
            prev: s.cur,
            cur: s.prev,
        };
        for _ in 0..10 {
            back = step_hyperbolic(&back, &op, &cfg).unwrap().0;
        }
        for (a, b) in back.cur.values.iter().zip(&first.prev.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_data_stays_zero_hyperbolic() {
        let mut cfg = config(Equation::Hyperbolic, true);
        cfg.initial.amplitude = 0.0;
        let tr = run(&cfg).unwrap();
        assert!(tr.rows.iter().all(|r| r.max_norm == 0.0));
        assert_eq!(tr.status, SimStatus::Completed);
    }

    #[test]
    fn times_strictly_increase() {
        let tr = run(&config(Equation::Parabolic, true)).unwrap();
        assert_eq!(tr.rows.len(), 21);
        assert!(tr.rows.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn threshold_stops_run() {
        let mut cfg = config(Equation::Parabolic, true);
        cfg.blowup_threshold = 0.5;
        let tr = run(&cfg).unwrap();
        assert_eq!(tr.status, SimStatus::BlowUp { step: 0, time: 0.0 });
        assert_eq!(tr.rows.len(), 1);
    }

    #[test]
    fn higher_dimension_rejected() {
        let mut cfg = config(Equation::Parabolic, true);
        cfg.n = 2;
        assert!(run(&cfg).is_err());
    }

    #[test]
    fn config_json_uses_snake_case() {
        let cfg = config(Equation::Hyperbolic, true);
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"blowup_threshold\""));
        assert!(s.contains("\"hyperbolic\""));
        let back: SimConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cfg);
    }
}
