//! Randomized checks of the group-calculus identities on polynomial fields.
//!
//! Every check compares two analytic evaluations at seeded random points and
//! reports the worst relative discrepancy `|a - b| / max(1, |a|, |b|)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{
    commutator, sublaplacian, sublaplacian_radial, sublaplacian_sum_of_squares, Horizontal,
};
use crate::error::{LabError, Result};
use crate::field::{Polynomial, Pullback, RadialField, RadialProfile, SmoothField};
use crate::group::{compose, dilate, GroupPoint};

pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub n: usize,
    pub points: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> GroupPoint {
    let flat: Vec<f64> = (0..2 * n + 1).map(|_| rng.gen_range(-half..half)).collect();
    GroupPoint::from_flat(&flat).expect("odd length")
}

/// Random polynomial of total degree `<= degree` with `terms` monomials.
pub fn random_polynomial(rng: &mut ChaCha8Rng, n: usize, degree: u32, terms: usize) -> Polynomial {
    let d = 2 * n + 1;
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut exps = vec![0u32; d];
        let total = rng.gen_range(0..=degree);
        for _ in 0..total {
            exps[rng.gen_range(0..d)] += 1;
        }
        out.push((rng.gen_range(-1.0..1.0), exps));
    }
    Polynomial::new(n, out).expect("exponent vectors have length 2n+1")
}

fn profile() -> RadialProfile {
    RadialProfile::new(
        |r| (-r * r).exp() + r.powi(3),
        |r| -2.0 * r * (-r * r).exp() + 3.0 * r * r,
        |r| (4.0 * r * r - 2.0) * (-r * r).exp() + 6.0 * r,
    )
}

fn check(name: &str, n: usize, errors: impl Iterator<Item = f64>) -> IdentityCheck {
    let errs: Vec<f64> = errors.collect();
    let max_error = errs
        .iter()
        .copied()
        .fold(0.0, |m, e| if e.is_nan() || e > m { e } else { m });
    IdentityCheck {
        name: name.to_string(),
        n,
        points: errs.len(),
        max_error,
        tolerance: IDENTITY_TOL,
        pass: max_error <= IDENTITY_TOL,
    }
}

/// Runs all identity checks in dimension `n` on `points` random points.
///
/// Bracket checks for `i != j` need `n >= 2` and are skipped for `n = 1`.
pub fn run_identity_checks(n: usize, points: usize, seed: u64) -> Result<Vec<IdentityCheck>> {
    if n == 0 {
        return Err(LabError::param("n must be at least 1"));
    }
    if points == 0 {
        return Err(LabError::param("need at least one sample point"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_polynomial(&mut rng, n, 4, 12);
    let tau_d = |p: &GroupPoint| f.d1(p, 2 * n);
    let pts: Vec<GroupPoint> = (0..points)
        .map(|_| random_point(&mut rng, n, 2.0))
        .collect();
    let shifts: Vec<GroupPoint> = (0..points)
        .map(|_| random_point(&mut rng, n, 1.5))
        .collect();
    let lambdas: Vec<f64> = (0..points).map(|_| rng.gen_range(0.3..3.0)).collect();
    let mut out = Vec::new();

    out.push(check(
        "commutator",
        n,
        pts.iter().flat_map(|p| {
            (0..n).map(|i| {
                let c =
                    commutator(&f, Horizontal::x(i), Horizontal::y(i), p).expect("index in range");
                rel(c, -4.0 * tau_d(p))
            })
        }),
    ));

    if n >= 2 {
        out.push(check(
            "brackets_vanish",
            n,
            pts.iter().flat_map(|p| {
                let f = &f;
                (0..n).flat_map(move |i| {
                    (0..n).filter(move |&j| j != i).flat_map(move |j| {
                        [
                            (Horizontal::x(i), Horizontal::y(j)),
                            (Horizontal::x(i), Horizontal::x(j)),
                            (Horizontal::y(i), Horizontal::y(j)),
                        ]
                        .into_iter()
                        .map(move |(a, b)| commutator(f, a, b, p).expect("index in range").abs())
                    })
                })
            }),
        ));
    }

    out.push(check(
        "sum_of_squares",
        n,
        pts.iter()
            .map(|p| rel(sublaplacian(&f, p), sublaplacian_sum_of_squares(&f, p))),
    ));

    let mut left = Vec::with_capacity(points);
    for (p, a) in pts.iter().zip(&shifts) {
        let g = Pullback::left_translation(&f, a)?;
        left.push(rel(sublaplacian(&g, p), sublaplacian(&f, &compose(a, p)?)));
    }
    out.push(check("left_invariance", n, left.into_iter()));

    let mut homog = Vec::with_capacity(points);
    for (p, &l) in pts.iter().zip(&lambdas) {
        let g = Pullback::dilation(&f, l)?;
        homog.push(rel(
            sublaplacian(&g, p),
            l * l * sublaplacian(&f, &dilate(l, p)?),
        ));
    }
    out.push(check("homogeneity", n, homog.into_iter()));

    let radial = RadialField::new(n, profile());
    let prof = profile();
    let mut rad = Vec::with_capacity(points);
    for p in &pts {
        rad.push(rel(
            sublaplacian(&radial, p),
            sublaplacian_radial(&prof, p)?,
        ));
    }
    out.push(check("radial_formula", n, rad.into_iter()));
    Ok(out)
}
