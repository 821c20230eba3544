use heislab::calculus::sublaplacian;
use heislab::field::{Bump, SmoothField};
use heislab::sim::{
    assemble_sublaplacian, run, Equation, GaussianBump, Grid, SimConfig, SimStatus,
};
use heislab::GroupPoint;

fn consistency_error(f: &Bump, count: usize) -> f64 {
    let grid = Grid::new([1.5, 1.5, 1.5], [count; 3]).unwrap();
    let op = assemble_sublaplacian(&grid, 0.0).unwrap();
    let u = grid.sample(|p| f.value(&GroupPoint::h1(p[0], p[1], p[2])));
    let lu = op.apply(&u.values);
    (0..op.dim)
        .map(|i| {
            let p = grid.point(i);
            (lu[i] - sublaplacian(f, &GroupPoint::h1(p[0], p[1], p[2]))).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn discrete_operator_is_consistent() {
    let f = Bump::new(&GroupPoint::h1(0.1, -0.05, 0.0), vec![0.9, 0.9, 0.9], 6).unwrap();
    let errs: Vec<f64> = [16usize, 32, 64]
        .iter()
        .map(|&c| consistency_error(&f, c))
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(
            (0.9..=2.2).contains(&order),
            "errors {errs:?}, order {order}"
        );
    }
}

fn config(equation: Equation) -> SimConfig {
    SimConfig {
        equation,
        q: 2.0,
        nonlinear: true,
        dt: 0.01,
        steps: 500,
        half_widths: [6.0, 6.0, 6.0],
        counts: [17, 17, 17],
        initial: GaussianBump {
            center: [0.0, 0.0, 0.0],
            width: 2.0,
            amplitude: 20.0,
        },
        velocity: None,
        solver_tol: 1e-10,
        max_iter: None,
        blowup_threshold: 1000.0,
        tau_regularization: 0.0,
        n: 1,
    }
}

#[test]
fn large_data_reaches_threshold() {
    for eq in [Equation::Parabolic, Equation::Hyperbolic] {
        let trace = run(&config(eq)).unwrap();
        assert!(
            matches!(trace.status, SimStatus::BlowUp { .. }),
            "{eq:?}: {:?}",
            trace.status
        );
        let last = trace.rows.last().unwrap();
        assert!(last.max_norm >= 1000.0 || !last.max_norm.is_finite());
    }
}

#[test]
fn tiny_iteration_budget_is_a_solver_failure() {
    let mut cfg = config(Equation::Parabolic);
    cfg.max_iter = Some(1);
    let trace = run(&cfg).unwrap();
    assert!(
        matches!(trace.status, SimStatus::SolverFailure { step: 1, .. }),
        "{:?}",
        trace.status
    );
}

#[test]
fn tau_regularization_is_reported() {
    let mut cfg = config(Equation::Parabolic);
    cfg.steps = 2;
    cfg.tau_regularization = 1e-3;
    assert_eq!(run(&cfg).unwrap().tau_regularization, 1e-3);
}
