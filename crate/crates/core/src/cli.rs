//! Command-line front end: argument parsing, dispatch and exit codes.
//!
//! Exit codes: `0` success (a simulation reaching the blow-up threshold is a
//! success), `1` I/O failure, `2` parameter error, `3` solver failure.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::capacity::{
    capacity_bound_hyperbolic, capacity_bound_parabolic, mc_spatial_integral, parse_rational,
    ratio_to_f64, scaling_fit, spatial_integral_critical, spatial_integral_subcritical,
    time_integral, time_integral_constant, time_power, verdict, Abscissa, CapacityReport,
    Exponents,
};
use crate::error::{LabError, Result};
use crate::field::{Bump, SmoothField};
use crate::group::GroupPoint;
use crate::identities::run_identity_checks;
use crate::montecarlo::McConfig;
use crate::report::{Cell, Format, Report};
use crate::sim::{self, SimConfig, SimStatus};
use crate::test_functions::{PhiTest, TemporalFactor};
use crate::weak::{
    selfadjointness_residual, weak_residual_hyperbolic, weak_residual_parabolic, CandidateSolution,
    WeakConfig,
};

#[derive(Debug, Parser)]
#[command(
    name = "heislab",
    version,
    about = "Capacity-method laboratory for Sobolev-type equations on the Heisenberg group"
)]
pub struct RunSpec {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Seed of the Monte Carlo streams.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo sample budget.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Output {
    fn mc(&self) -> McConfig {
        McConfig {
            samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Params {
    /// Exponent q (decimal or rational such as 3/2); comma list for `verdict`.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<String>,
    /// Dimension n of H^n; comma list for `verdict` and `identities`.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub n: Vec<usize>,
    /// Time exponent l; defaults to (q+1)/(q-1) + 1.
    #[arg(long)]
    pub ell: Option<f64>,
    /// Logarithmic cutoff power; defaults to 2q/(q-1) + 1.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Time horizons (comma list).
    #[arg(long = "T", value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Spatial scales (comma list).
    #[arg(long = "R", value_delimiter = ',')]
    pub r: Vec<f64>,
    /// L^q norm of u0.
    #[arg(long, default_value_t = 0.0)]
    pub u0: f64,
    /// L^q norm of u1.
    #[arg(long, default_value_t = 0.0)]
    pub u1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    I1,
    I2,
    I3,
    I4,
    #[value(name = "i4-mc")]
    I4Mc,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResidualKind {
    Parabolic,
    Hyperbolic,
    Selfadjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CandidateKind {
    Zero,
    Bump,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time integrals I1, I2, I3 against their closed forms.
    Lemma1 {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// Critical-case spatial factor against the (ln R) envelope.
    Lemma2 {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// Power-law fit of one integral over a T or R grid.
    Scaling {
        #[arg(long, value_enum)]
        target: Target,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// A-priori bound for the first-order-in-time equation.
    BoundParabolic {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// A-priori bound for the second-order-in-time equation.
    BoundHyperbolic {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// Subcritical / critical / supercritical classification.
    Verdict {
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// Weak-formulation and self-adjointness residuals.
    Residual {
        #[arg(long, value_enum, default_value_t = ResidualKind::Parabolic)]
        kind: ResidualKind,
        #[arg(long, value_enum, default_value_t = CandidateKind::Bump)]
        candidate: CandidateKind,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
    /// Finite-difference simulation driven by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Randomized group-calculus identity checks.
    Identities {
        #[arg(long, default_value_t = 100)]
        points: usize,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        output: Output,
    },
}

impl Command {
    pub fn output(&self) -> &Output {
        match self {
            Command::Lemma1 { output, .. }
            | Command::Lemma2 { output, .. }
            | Command::Scaling { output, .. }
            | Command::BoundParabolic { output, .. }
            | Command::BoundHyperbolic { output, .. }
            | Command::Verdict { output, .. }
            | Command::Residual { output, .. }
            | Command::Simulate { output, .. }
            | Command::Identities { output, .. } => output,
        }
    }
}

fn single_n(p: &Params) -> Result<usize> {
    match p.n.as_slice() {
        [n] if *n >= 1 => Ok(*n),
        [_] => Err(LabError::param("n must be at least 1")),
        _ => Err(LabError::param("this subcommand takes a single --n")),
    }
}

fn single_q(p: &Params) -> Result<Option<f64>> {
    match p.q.as_slice() {
        [] => Ok(None),
        [q] => Ok(Some(ratio_to_f64(parse_rational(q)?))),
        _ => Err(LabError::param("this subcommand takes a single --q")),
    }
}

fn required_q(p: &Params) -> Result<f64> {
    single_q(p)?.ok_or_else(|| LabError::param("--q is required"))
}

fn exponents(p: &Params) -> Result<Exponents> {
    Exponents::new(required_q(p)?, single_n(p)?, p.ell, p.kappa)
}

fn grid(values: &[f64], default: &[f64], name: &str) -> Result<Vec<f64>> {
    let v = if values.is_empty() {
        default.to_vec()
    } else {
        values.to_vec()
    };
    if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(LabError::param(format!("{name} values must be positive")));
    }
    Ok(v)
}

const CRITICAL_R: [f64; 7] = [1e3, 1e4, 1e5, 1e6, 1e7, 1e8, 1e9];

fn num(v: f64) -> Cell {
    Cell::from(v)
}

fn lemma1(p: &Params) -> Result<Report> {
    let e = exponents(p)?;
    let ts = grid(&p.t, &[10.0], "T")?;
    let mut rep = Report::new(
        "lemma1",
        None,
        &["integral", "name", "T", "value", "closed_form", "rel_err"],
    );
    let names = [("I1", "phi1"), ("I2", "dt_phi1"), ("I3", "dtt_phi1")];
    let mut worst = 0.0f64;
    let mut series: [Vec<(f64, f64)>; 3] = Default::default();
    for &t in &ts {
        for k in 0..3u8 {
            let got = time_integral(&e, t, k)?;
            let want = time_integral_constant(&e, k)? * t.powf(time_power(&e, k));
            let rel = (got.value - want).abs() / want.abs();
            worst = worst.max(rel);
            series[k as usize].push((t, got.value));
            let (a, b) = names[k as usize];
            rep.push(vec![
                a.into(),
                b.into(),
                num(t),
                num(got.value),
                num(want),
                num(rel),
            ]);
        }
    }
    rep.set("q", e.q);
    rep.set("ell", e.ell);
    rep.set_f64("max_rel_err", worst);
    rep.set("pass", worst <= 1e-8);
    if ts.len() >= 4 {
        for (k, s) in series.iter().enumerate() {
            let fit = scaling_fit(s, Abscissa::LogT)?;
            rep.set_f64(&format!("slope_{}", names[k].0), fit.slope);
            rep.set_f64(
                &format!("expected_slope_{}", names[k].0),
                time_power(&e, k as u8),
            );
            rep.set_f64(
                &format!("max_rel_residual_{}", names[k].0),
                fit.max_rel_residual,
            );
        }
    }
    Ok(rep)
}

fn critical_exponents(p: &Params) -> Result<Exponents> {
    let n = single_n(p)?;
    let qc = (n as f64 + 1.0) / n as f64;
    if let Some(q) = single_q(p)? {
        if (q - qc).abs() > crate::capacity::CRITICAL_TOL {
            return Err(LabError::param(format!(
                "q must equal Q/(Q-2) = {qc}, got {q}"
            )));
        }
    }
    Exponents::new(qc, n, p.ell, p.kappa)
}

fn lemma2(p: &Params, o: &Output) -> Result<Report> {
    let e = critical_exponents(p)?;
    let rs = grid(&p.r, &CRITICAL_R, "R")?;
    let mut rep = Report::new(
        "lemma2",
        Some(o.seed),
        &[
            "R",
            "value",
            "stderr",
            "bound_first",
            "bound_second",
            "envelope",
            "quotient",
            "scaled_value",
        ],
    );
    let q_dim = e.homogeneous_dim();
    let mut quotients = Vec::new();
    let mut series = Vec::new();
    for &r in &rs {
        let c = spatial_integral_critical(&e, e.log_cutoff(), r, o.mc())?;
        let scaled = c.factor.value * r.ln().powf(q_dim / 2.0 - 1.0);
        quotients.push(c.quotient);
        series.push((r, c.quotient));
        rep.push(vec![
            num(r),
            num(c.factor.value),
            num(c.factor.stderr),
            num(c.bound_first.value),
            num(c.bound_second.value),
            num(c.envelope),
            num(c.quotient),
            num(scaled),
        ]);
    }
    let max = quotients.iter().copied().fold(f64::MIN, f64::max);
    let min = quotients.iter().copied().fold(f64::MAX, f64::min);
    rep.set("n", e.n);
    rep.set("q", e.q);
    rep.set("kappa", e.kappa);
    rep.set_f64("quotient_max", max);
    rep.set_f64("quotient_min", min);
    rep.set_f64("quotient_ratio", max / min);
    rep.set_f64("measured_constant", max);
    rep.set("pass", max / min <= 10.0);
    if rs.len() >= 4 && rs.iter().all(|r| *r > 1.0) {
        let fit = scaling_fit(&series, Abscissa::LogLogR)?;
        rep.set_f64("quotient_loglog_slope", fit.slope);
    }
    Ok(rep)
}

fn scaling(target: Target, p: &Params, o: &Output) -> Result<Report> {
    let mut rep = Report::new(
        "scaling",
        Some(o.seed),
        &["abscissa", "value", "error", "fitted", "rel_residual"],
    );
    let (kind, expected, points): (Abscissa, Option<f64>, Vec<(f64, f64, f64)>) = match target {
        Target::I1 | Target::I2 | Target::I3 => {
            let e = exponents(p)?;
            let k = match target {
                Target::I1 => 0,
                Target::I2 => 1,
                _ => 2,
            };
            let ts = grid(&p.t, &[10.0, 20.0, 40.0, 80.0], "T")?;
            let pts = ts
                .iter()
                .map(|&t| time_integral(&e, t, k).map(|v| (t, v.value, v.abs_error)))
                .collect::<Result<_>>()?;
            (Abscissa::LogT, Some(time_power(&e, k)), pts)
        }
        Target::I4 | Target::I4Mc => {
            let e = exponents(p)?;
            let rs = grid(&p.r, &[8.0, 16.0, 32.0, 64.0], "R")?;
            let spec = e.power_cutoff();
            let pts = rs
                .iter()
                .map(|&r| {
                    if target == Target::I4 {
                        spatial_integral_subcritical(&e, spec, r, o.mc())
                            .map(|v| (r, v.value, v.stderr))
                    } else {
                        mc_spatial_integral(&e, spec, r, o.mc()).map(|v| (r, v.value, v.stderr))
                    }
                })
                .collect::<Result<_>>()?;
            (Abscissa::LogR, Some(e.spatial_power()), pts)
        }
        Target::Critical => {
            let e = critical_exponents(p)?;
            let rs = grid(&p.r, &CRITICAL_R, "R")?;
            let pts = rs
                .iter()
                .map(|&r| {
                    spatial_integral_critical(&e, e.log_cutoff(), r, o.mc())
                        .map(|c| (r, c.factor.value, c.factor.stderr))
                })
                .collect::<Result<_>>()?;
            (Abscissa::LogLogR, None, pts)
        }
    };
    let samples: Vec<(f64, f64)> = points.iter().map(|&(a, v, _)| (a, v)).collect();
    let fit = scaling_fit(&samples, kind)?;
    for &(a, v, err) in &points {
        let x = match kind {
            Abscissa::LogLogR => a.ln().ln(),
            _ => a.ln(),
        };
        let fitted = (fit.intercept + fit.slope * x).exp();
        rep.push(vec![
            num(a),
            num(v),
            num(err),
            num(fitted),
            num(fitted / v - 1.0),
        ]);
    }
    rep.set("target", format!("{target:?}"));
    rep.set("kind", serde_json::to_value(kind)?);
    rep.set_f64("slope", fit.slope);
    rep.set_f64("intercept", fit.intercept);
    rep.set_f64("max_rel_residual", fit.max_rel_residual);
    match expected {
        Some(s) => {
            rep.set_f64("expected_slope", s);
            rep.set_f64("slope_error", (fit.slope - s).abs());
        }
        None => {
            rep.set("expected_slope", Value::Null);
        }
    }
    Ok(rep)
}

fn bounds(p: &Params, o: &Output, hyperbolic: bool) -> Result<Report> {
    let n = single_n(p)?;
    let q = required_q(p)?;
    let e = Exponents::new(q, n, p.ell, p.kappa)?;
    let ts = grid(&p.t, &[1.0], "T")?;
    let default_r: &[f64] = if e.is_critical() {
        &CRITICAL_R
    } else {
        &[8.0, 16.0, 32.0, 64.0]
    };
    let rs = grid(&p.r, default_r, "R")?;
    let name = if hyperbolic {
        "bound-hyperbolic"
    } else {
        "bound-parabolic"
    };
    let terms: &[&str] = if hyperbolic {
        &["dtt_term", "lap_term", "u1_term", "u0_term"]
    } else {
        &["dt_term", "lap_term", "u0_term"]
    };
    let mut cols = vec!["T", "R", "bound"];
    cols.extend_from_slice(terms);
    cols.extend_from_slice(&["envelope", "measured_constant"]);
    let mut rep = Report::new(name, Some(o.seed), &cols);
    let mut max_c = 0.0f64;
    for &t in &ts {
        let mut series = Vec::new();
        for &r in &rs {
            let cr: CapacityReport = if hyperbolic {
                capacity_bound_hyperbolic(&e, t, r, p.u0, p.u1, o.mc())?
            } else {
                capacity_bound_parabolic(&e, t, r, p.u0, o.mc())?
            };
            max_c = max_c.max(cr.measured_constant);
            series.push((r, cr.bound));
            let mut row = vec![num(t), num(r), num(cr.bound)];
            row.extend(terms.iter().map(|k| num(cr.term(k).unwrap_or(f64::NAN))));
            row.push(num(cr.envelope));
            row.push(num(cr.measured_constant));
            rep.push(row);
        }
        if !e.is_critical() && rs.len() >= 4 && series.iter().all(|s| s.1 > 0.0) {
            let fit = scaling_fit(&series, Abscissa::LogR)?;
            rep.set_f64(&format!("slope_R_at_T={t}"), fit.slope);
        }
    }
    rep.set("critical", e.is_critical());
    rep.set("q", e.q);
    rep.set("n", e.n);
    rep.set_f64("spatial_power", e.spatial_power());
    rep.set_f64("max_measured_constant", max_c);
    Ok(rep)
}

fn verdicts(p: &Params) -> Result<Report> {
    if p.q.is_empty() {
        return Err(LabError::param("--q is required"));
    }
    let mut rep = Report::new("verdict", None, &["n", "q", "q_c", "verdict", "note"]);
    let mut messages = Vec::new();
    for &n in &p.n {
        for qs in &p.q {
            let v = verdict(n, parse_rational(qs)?)?;
            messages.push(format!("{}, q_c = {}", v.verdict, v.critical));
            rep.push(vec![
                n.into(),
                v.q.to_string().into(),
                v.critical.to_string().into(),
                v.verdict.to_string().into(),
                v.verdict.note().into(),
            ]);
        }
    }
    if messages.len() == 1 {
        rep.set("message", messages.remove(0));
    }
    Ok(rep)
}

fn demo_bump(center: GroupPoint, radii: [f64; 3]) -> Result<Bump> {
    Bump::new(&center, radii.to_vec(), 4)
}

fn residual(kind: ResidualKind, cand: CandidateKind, p: &Params, o: &Output) -> Result<Report> {
    if single_n(p)? != 1 {
        return Err(LabError::param("residual checks run for n = 1"));
    }
    if kind == ResidualKind::Selfadjoint {
        let f = demo_bump(GroupPoint::h1(0.2, 0.0, 0.0), [1.0, 1.0, 1.0])?;
        let g = demo_bump(GroupPoint::h1(-0.3, 0.2, 0.1), [1.2, 0.8, 1.0])?;
        let r = selfadjointness_residual(&f, &g, &[-2.0; 3], &[2.0; 3], o.mc())?;
        let mut rep = Report::new(
            "residual",
            Some(o.seed),
            &["kind", "left", "right", "residual", "error"],
        );
        rep.push(vec![
            "selfadjoint".into(),
            num(r.left),
            num(r.right),
            num(r.residual),
            num(r.error),
        ]);
        rep.set_f64("residual_over_error", r.residual / r.error);
        return Ok(rep);
    }
    let q = single_q(p)?.unwrap_or(2.0);
    let horizon = *grid(&p.t, &[1.0], "T")?.first().expect("nonempty");
    let r_scale = *grid(&p.r, &[1.2], "R")?.first().expect("nonempty");
    let e = Exponents::new(q, 1, p.ell, p.kappa)?;
    let testfn = PhiTest {
        n: 1,
        temporal: TemporalFactor::new(horizon, e.ell)?,
        cutoff: e.power_cutoff(),
        r_scale,
    };
    let candidate = match cand {
        CandidateKind::Zero => CandidateSolution::zero(1),
        CandidateKind::Bump => {
            let b: Arc<dyn SmoothField> =
                Arc::new(demo_bump(GroupPoint::h1(0.1, -0.1, 0.0), [1.0, 1.0, 1.0])?);
            let bu = b.clone();
            match kind {
                ResidualKind::Parabolic => {
                    CandidateSolution::new(move |t, x| (-t).exp() * bu.value(x), b)
                }
                _ => {
                    let zero: Arc<dyn SmoothField> = Arc::new(crate::field::Polynomial::zero(1));
                    CandidateSolution::new(move |_, x| bu.value(x), b).with_velocity(zero)
                }
            }
        }
    };
    let cfg = WeakConfig::new(q, o.mc());
    let r = match kind {
        ResidualKind::Parabolic => weak_residual_parabolic(&candidate, &testfn, &cfg)?,
        _ => weak_residual_hyperbolic(&candidate, &testfn, &cfg)?,
    };
    let mut rep = Report::new(
        "residual",
        Some(o.seed),
        &[
            "kind",
            "candidate",
            "lhs",
            "rhs",
            "residual",
            "stderr",
            "samples",
        ],
    );
    let kname = if kind == ResidualKind::Parabolic {
        "parabolic"
    } else {
        "hyperbolic"
    };
    let cname = if cand == CandidateKind::Zero {
        "zero"
    } else {
        "bump"
    };
    rep.push(vec![
        kname.into(),
        cname.into(),
        num(r.lhs),
        num(r.rhs),
        num(r.residual),
        num(r.stderr),
        r.samples.into(),
    ]);
    rep.set("q", q);
    rep.set("T", horizon);
    rep.set("R", r_scale);
    rep.set("time_nodes", r.time_nodes);
    Ok(rep)
}

fn simulate(path: &PathBuf) -> Result<Report> {
    let text = std::fs::read_to_string(path)?;
    let cfg: SimConfig = serde_json::from_str(&text)
        .map_err(|e| LabError::param(format!("invalid simulation config: {e}")))?;
    let trace = sim::run(&cfg)?;
    let mut rep = Report::new(
        "simulate",
        None,
        &["step", "time", "max_norm", "lq_norm", "iterations"],
    );
    for r in &trace.rows {
        rep.push(vec![
            r.step.into(),
            num(r.time),
            num(r.max_norm),
            num(r.lq_norm),
            r.iterations.into(),
        ]);
    }
    match &trace.status {
        SimStatus::Completed => rep.set("status", "completed"),
        SimStatus::BlowUp { step, time } => {
            rep.set("status", "blow_up");
            rep.set("status_step", *step);
            rep.set_f64("hit_time", *time);
        }
        SimStatus::SolverFailure { step, message } => {
            rep.set("status", "solver_failure");
            rep.set("status_step", *step);
            rep.set("message", message.clone());
        }
    }
    rep.set("equation", serde_json::to_value(cfg.equation)?);
    rep.set("q", cfg.q);
    rep.set("nonlinear", cfg.nonlinear);
    rep.set("blowup_threshold", cfg.blowup_threshold);
    rep.set("tau_regularization", trace.tau_regularization);
    rep.set("unknowns", trace.unknowns);
    rep.set(
        "note",
        "illustrative simulation on a truncated box with zero Dirichlet data",
    );
    Ok(rep)
}

fn identities(points: usize, p: &Params, o: &Output) -> Result<Report> {
    let mut rep = Report::new(
        "identities",
        Some(o.seed),
        &["identity", "n", "points", "max_error", "tolerance", "pass"],
    );
    let mut all = true;
    for &n in &p.n {
        for c in run_identity_checks(n, points, o.seed)? {
            all &= c.pass;
            rep.push(vec![
                c.name.into(),
                c.n.into(),
                c.points.into(),
                num(c.max_error),
                num(c.tolerance),
                c.pass.into(),
            ]);
        }
    }
    rep.set("pass", all);
    Ok(rep)
}

/// Runs the engine behind one subcommand and collects its report.
pub fn dispatch(spec: &RunSpec) -> Result<Report> {
    if spec.command.output().samples == 0 {
        return Err(LabError::param(
            "Monte Carlo sample budget must be positive",
        ));
    }
    match &spec.command {
        Command::Lemma1 { params, .. } => lemma1(params),
        Command::Lemma2 { params, output } => lemma2(params, output),
        Command::Scaling {
            target,
            params,
            output,
        } => scaling(*target, params, output),
        Command::BoundParabolic { params, output } => bounds(params, output, false),
        Command::BoundHyperbolic { params, output } => bounds(params, output, true),
        Command::Verdict { params, .. } => verdicts(params),
        Command::Residual {
            kind,
            candidate,
            params,
            output,
        } => residual(*kind, *candidate, params, output),
        Command::Simulate { config, .. } => simulate(config),
        Command::Identities {
            points,
            params,
            output,
        } => identities(*points, params, output),
    }
}

pub fn exit_code_for_error(e: &LabError) -> i32 {
    match e {
        LabError::SolverFailure { .. } | LabError::Indefinite(_) => 3,
        LabError::Io(_) => 1,
        _ => 2,
    }
}

/// Exit code for a completed report: `3` when a simulation stopped on a
/// solver failure, `0` otherwise.
pub fn exit_code_for_report(r: &Report) -> i32 {
    match r.summary.get("status").and_then(Value::as_str) {
        Some("solver_failure") => 3,
        _ => 0,
    }
}

/// Parses, dispatches, writes the report and returns the process exit code.
pub fn run(spec: &RunSpec) -> i32 {
    let out = spec.command.output();
    match dispatch(spec) {
        Ok(report) => match report.write(out.format, out.out.as_deref()) {
            Ok(()) => exit_code_for_report(&report),
            Err(e) => {
                eprintln!("error: {e}");
                exit_code_for_error(&e)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for_error(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunSpec {
        RunSpec::try_parse_from(std::iter::once("heislab").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn time_integral_rows() {
        let r = dispatch(&parse(&["lemma1", "--q", "2", "--ell", "4", "--T", "10"])).unwrap();
        assert_eq!(r.rows.len(), 3);
        let vals: Vec<f64> = r
            .column("value")
            .unwrap()
            .iter()
            .map(|c| c.as_f64().unwrap())
            .collect();
        assert!((vals[0] - 2.0).abs() < 1e-12);
        assert!((vals[1] - 16.0 / 30.0).abs() < 1e-12);
        assert!((vals[2] - 0.144).abs() < 1e-12);
    }

    #[test]
    fn verdict_message() {
        let r = dispatch(&parse(&["verdict", "--n", "1", "--q", "1.5"])).unwrap();
        assert_eq!(r.summary["message"], "SubcriticalBlowup, q_c = 2");
    }

    #[test]
    fn ell_violation_names_constraint() {
        let err = dispatch(&parse(&["lemma1", "--q", "2", "--ell", "2"])).unwrap_err();
        assert_eq!(exit_code_for_error(&err), 2);
        assert!(err.to_string().contains("(q+1)/(q-1)"));
    }

    #[test]
    fn grids_parse() {
        let spec = parse(&[
            "scaling",
            "--target",
            "i4",
            "--q",
            "1.5",
            "--R",
            "8,16,32,64",
            "--samples",
            "1000",
        ]);
        let r = dispatch(&spec).unwrap();
        assert_eq!(r.rows.len(), 4);
        let slope = r.summary["slope"].as_f64().unwrap();
        assert!((slope + 2.0).abs() < 1e-4, "{slope}");
    }
}
