//! Scalar fields on `H^n` with first and second derivative oracles.
//!
//! Derivative indices use the flat order `x_1..x_n, y_1..y_n, tau`
//! (see [`crate::group`]).

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::group::{gauge_norm, GroupPoint};

/// How a field produces its derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleKind {
    Analytic,
    CentralDifference { h: f64 },
}

/// A scalar function on `H^n` with derivative oracles.
///
/// `d2` must be symmetric in its index pair. Implementations must be
/// re-entrant; they are evaluated from several threads at once.
pub trait SmoothField: Send + Sync {
    fn n(&self) -> usize;
    fn value(&self, p: &GroupPoint) -> f64;
    fn d1(&self, p: &GroupPoint, i: usize) -> f64;
    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64;

    fn oracle(&self) -> OracleKind {
        OracleKind::Analytic
    }
}

impl<F: SmoothField + ?Sized> SmoothField for Arc<F> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn value(&self, p: &GroupPoint) -> f64 {
        (**self).value(p)
    }
    fn d1(&self, p: &GroupPoint, i: usize) -> f64 {
        (**self).d1(p, i)
    }
    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64 {
        (**self).d2(p, i, j)
    }
    fn oracle(&self) -> OracleKind {
        (**self).oracle()
    }
}

impl<F: SmoothField + ?Sized> SmoothField for &F {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn value(&self, p: &GroupPoint) -> f64 {
        (**self).value(p)
    }
    fn d1(&self, p: &GroupPoint, i: usize) -> f64 {
        (**self).d1(p, i)
    }
    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64 {
        (**self).d2(p, i, j)
    }
    fn oracle(&self) -> OracleKind {
        (**self).oracle()
    }
}

type PointFn = dyn Fn(&GroupPoint) -> f64 + Send + Sync;
type D1Fn = dyn Fn(&GroupPoint, usize) -> f64 + Send + Sync;
type D2Fn = dyn Fn(&GroupPoint, usize, usize) -> f64 + Send + Sync;

/// Field given by user closures for the value and both derivative orders.
pub struct FnField {
    n: usize,
    value: Box<PointFn>,
    d1: Box<D1Fn>,
    d2: Box<D2Fn>,
}

impl FnField {
    pub fn new(
        n: usize,
        value: impl Fn(&GroupPoint) -> f64 + Send + Sync + 'static,
        d1: impl Fn(&GroupPoint, usize) -> f64 + Send + Sync + 'static,
        d2: impl Fn(&GroupPoint, usize, usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            n,
            value: Box::new(value),
            d1: Box::new(d1),
            d2: Box::new(d2),
        }
    }
}

impl SmoothField for FnField {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, p: &GroupPoint) -> f64 {
        (self.value)(p)
    }
    fn d1(&self, p: &GroupPoint, i: usize) -> f64 {
        (self.d1)(p, i)
    }
    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64 {
        (self.d2)(p, i, j)
    }
}

/// Central-difference derivatives of a plain function.
///
/// Second mixed derivatives use the 4-point cross stencil.
pub struct FiniteDifference<F> {
    n: usize,
    h: f64,
    f: F,
}

impl<F> FiniteDifference<F>
where
    F: Fn(&GroupPoint) -> f64 + Send + Sync,
{
    pub const DEFAULT_STEP: f64 = 1e-4;

    pub fn new(n: usize, h: f64, f: F) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(LabError::param(format!(
                "difference step must be positive, got {h}"
            )));
        }
        Ok(Self { n, h, f })
    }

    pub fn with_default_step(n: usize, f: F) -> Self {
        Self {
            n,
            h: Self::DEFAULT_STEP,
            f,
        }
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    fn shifted(&self, p: &GroupPoint, moves: &[(usize, f64)]) -> f64 {
        let mut c = p.to_flat();
        for &(i, d) in moves {
            c[i] += d;
        }
        (self.f)(&GroupPoint::from_flat(&c).expect("shifted point keeps its dimension"))
    }
}

impl<F> SmoothField for FiniteDifference<F>
where
    F: Fn(&GroupPoint) -> f64 + Send + Sync,
{
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, p: &GroupPoint) -> f64 {
        (self.f)(p)
    }

    fn d1(&self, p: &GroupPoint, i: usize) -> f64 {
        let h = self.h;
        (self.shifted(p, &[(i, h)]) - self.shifted(p, &[(i, -h)])) / (2.0 * h)
    }

    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64 {
        let h = self.h;
        if i == j {
            let c = (self.f)(p);
            (self.shifted(p, &[(i, h)]) - 2.0 * c + self.shifted(p, &[(i, -h)])) / (h * h)
        } else {
            // order the pair so that d2(i, j) and d2(j, i) are bitwise equal
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            (self.shifted(p, &[(a, h), (b, h)])
                - self.shifted(p, &[(a, h), (b, -h)])
                - self.shifted(p, &[(a, -h), (b, h)])
                + self.shifted(p, &[(a, -h), (b, -h)]))
                / (4.0 * h * h)
        }
    }

    fn oracle(&self) -> OracleKind {
        OracleKind::CentralDifference { h: self.h }
    }
}

/// Sparse multivariate polynomial in the flat coordinates of `H^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        let d = 2 * n + 1;
        if let Some((_, e)) = terms.iter().find(|(_, e)| e.len() != d) {
            return Err(LabError::param(format!(
                "monomial exponent vector has length {}, expected {d}",
                e.len()
            )));
        }
        Ok(Self { n, terms })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: Vec::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            n,
            terms: vec![(c, vec![0; 2 * n + 1])],
        }
    }

    /// The flat coordinate `i` as a polynomial.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut e = vec![0; 2 * n + 1];
        e[i] = 1;
        Self {
            n,
            terms: vec![(1.0, e)],
        }
    }

    pub fn terms(&self) -> &[(f64, Vec<u32>)] {
        &self.terms
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { n: self.n, terms }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(a, e)| (a * c, e.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, ea) in &self.terms {
            for (b, eb) in &other.terms {
                terms.push((a * b, ea.iter().zip(eb).map(|(u, v)| u + v).collect()));
            }
        }
        Self { n: self.n, terms }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Self::constant(self.n, 1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Evaluates the mixed partial derivative over `idx` (may be empty).
    pub fn eval_derivative(&self, p: &GroupPoint, idx: &[usize]) -> f64 {
        let c = p.to_flat();
        let mut total = 0.0;
        'terms: for (coef, exps) in &self.terms {
            let mut e = exps.clone();
            let mut k = *coef;
            for &i in idx {
                if e[i] == 0 {
                    continue 'terms;
                }
                k *= e[i] as f64;
                e[i] -= 1;
            }
            let mut v = k;
            for (ci, &ei) in c.iter().zip(&e) {
                if ei > 0 {
                    v *= ci.powi(ei as i32);
                }
            }
            total += v;
        }
        total
    }
}

impl SmoothField for Polynomial {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&self, p: &GroupPoint) -> f64 {
        self.eval_derivative(p, &[])
    }
    fn d1(&self, p: &GroupPoint, i: usize) -> f64 {
        self.eval_derivative(p, &[i])
    }
    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.eval_derivative(p, &[a, b])
    }
}

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A profile `phi(r)` on `r >= 0` together with its first two derivatives.
#[derive(Clone)]
pub struct RadialProfile {
    value: Arc<ScalarFn>,
    d1: Arc<ScalarFn>,
    d2: Arc<ScalarFn>,
}

impl RadialProfile {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    /// `phi(r) = r^k`.
    pub fn power(k: f64) -> Self {
        Self::new(
            move |r| r.powf(k),
            move |r| k * r.powf(k - 1.0),
            move |r| k * (k - 1.0) * r.powf(k - 2.0),
        )
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0, |_| 0.0)
    }

    pub fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }
    pub fn d1(&self, r: f64) -> f64 {
        (self.d1)(r)
    }
    pub fn d2(&self, r: f64) -> f64 {
        (self.d2)(r)
    }

    /// Checks `d1`, `d2` against central differences of `value` and `d1`.
    ///
    /// Returns the largest relative discrepancy seen.
    pub fn check_consistency(&self, samples: &[f64], h: f64, tol: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &r in samples {
            let fd1 = (self.value(r + h) - self.value(r - h)) / (2.0 * h);
            let fd2 = (self.d1(r + h) - self.d1(r - h)) / (2.0 * h);
            let e1 = (fd1 - self.d1(r)).abs() / (1.0 + self.d1(r).abs());
            let e2 = (fd2 - self.d2(r)).abs() / (1.0 + self.d2(r).abs());
            worst = worst.max(e1).max(e2);
        }
        if worst > tol {
            return Err(LabError::domain(format!(
                "radial profile derivatives inconsistent (relative error {worst:e} > {tol:e})"
            )));
        }
        Ok(worst)
    }
}

/// `f(eta) = phi(|eta|_H)` with derivatives by the chain rule through the gauge.
///
/// Derivatives are undefined at the origin (they come out as NaN there).
pub struct RadialField {
    n: usize,
    profile: RadialProfile,
}

impl RadialField {
    pub fn new(n: usize, profile: RadialProfile) -> Self {
        Self { n, profile }
    }

    /// Gradient and Hessian of `rho = r^4 = (|z|^2)^2 + tau^2`.
    fn rho_derivs(&self, p: &GroupPoint, i: usize, j: Option<usize>) -> (f64, f64, f64) {
        let c = p.to_flat();
        let d = c.len();
        let s = p.horizontal_norm_sq();
        let grad = |k: usize| {
            if k == d - 1 {
                2.0 * c[k]
            } else {
                4.0 * s * c[k]
            }
        };
        let gi = grad(i);
        match j {
            None => (gi, 0.0, 0.0),
            Some(j) => {
                let gj = grad(j);
                let hij = if i == d - 1 || j == d - 1 {
                    if i == j {
                        2.0
                    } else {
                        0.0
                    }
                } else {
                    8.0 * c[i] * c[j] + if i == j { 4.0 * s } else { 0.0 }
                };
                (gi, gj, hij)
            }
        }
    }
}

impl SmoothField for RadialField {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, p: &GroupPoint) -> f64 {
        self.profile.value(gauge_norm(p))
    }

    fn d1(&self, p: &GroupPoint, i: usize) -> f64 {
        let r = gauge_norm(p);
        let rho = r.powi(4);
        let (gi, _, _) = self.rho_derivs(p, i, None);
        let dr = 0.25 * rho.powf(-0.75) * gi;
        self.profile.d1(r) * dr
    }

    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64 {
        let r = gauge_norm(p);
        let rho = r.powi(4);
        let (gi, gj, hij) = self.rho_derivs(p, i, Some(j));
        let dri = 0.25 * rho.powf(-0.75) * gi;
        let drj = 0.25 * rho.powf(-0.75) * gj;
        let drij = 0.25 * rho.powf(-0.75) * hij - 0.1875 * rho.powf(-1.75) * gi * gj;
        self.profile.d2(r) * dri * drj + self.profile.d1(r) * drij
    }
}

/// `g(p) = f(A p + b)` for an affine map of the flat coordinates.
pub struct Pullback<F> {
    inner: F,
    matrix: Vec<f64>,
    offset: Vec<f64>,
}

impl<F: SmoothField> Pullback<F> {
    pub fn new(inner: F, matrix: Vec<f64>, offset: Vec<f64>) -> Result<Self> {
        let d = 2 * inner.n() + 1;
        if matrix.len() != d * d || offset.len() != d {
            return Err(LabError::param("affine map has the wrong shape"));
        }
        Ok(Self {
            inner,
            matrix,
            offset,
        })
    }

    /// `f o L_a`, where `L_a(p) = a o p`.
    pub fn left_translation(inner: F, a: &GroupPoint) -> Result<Self> {
        let n = inner.n();
        if a.n() != n {
            return Err(LabError::DimensionMismatch {
                expected: n,
                found: a.n(),
            });
        }
        let d = 2 * n + 1;
        let mut m = vec![0.0; d * d];
        for k in 0..d {
            m[k * d + k] = 1.0;
        }
        for i in 0..n {
            m[(d - 1) * d + i] = 2.0 * a.y[i];
            m[(d - 1) * d + n + i] = -2.0 * a.x[i];
        }
        Self::new(inner, m, a.to_flat())
    }

    /// `f o delta_lambda`.
    pub fn dilation(inner: F, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(LabError::param("dilation factor must be positive"));
        }
        let d = 2 * inner.n() + 1;
        let mut m = vec![0.0; d * d];
        for k in 0..d - 1 {
            m[k * d + k] = lambda;
        }
        m[d * d - 1] = lambda * lambda;
        Self::new(inner, m, vec![0.0; d])
    }

    fn image(&self, p: &GroupPoint) -> GroupPoint {
        let c = p.to_flat();
        let d = c.len();
        let out: Vec<f64> = (0..d)
            .map(|k| self.offset[k] + (0..d).map(|l| self.matrix[k * d + l] * c[l]).sum::<f64>())
            .collect();
        GroupPoint::from_flat(&out).expect("image has the same dimension")
    }
}

impl<F: SmoothField> SmoothField for Pullback<F> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn value(&self, p: &GroupPoint) -> f64 {
        self.inner.value(&self.image(p))
    }

    fn d1(&self, p: &GroupPoint, i: usize) -> f64 {
        let q = self.image(p);
        let d = 2 * self.n() + 1;
        (0..d)
            .filter(|&k| self.matrix[k * d + i] != 0.0)
            .map(|k| self.matrix[k * d + i] * self.inner.d1(&q, k))
            .sum()
    }

    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64 {
        let q = self.image(p);
        let d = 2 * self.n() + 1;
        let mut s = 0.0;
        for k in 0..d {
            let aki = self.matrix[k * d + i];
            if aki == 0.0 {
                continue;
            }
            for l in 0..d {
                let alj = self.matrix[l * d + j];
                if alj != 0.0 {
                    s += aki * alj * self.inner.d2(&q, k, l);
                }
            }
        }
        s
    }

    fn oracle(&self) -> OracleKind {
        self.inner.oracle()
    }
}

/// Compactly supported bump `(1 - sum_k ((p_k - c_k)/rho_k)^2)_+^k` in flat
/// coordinates. `C^(k-1)` across the boundary of its ellipsoidal support.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    n: usize,
    center: Vec<f64>,
    radii: Vec<f64>,
    power: u32,
}

impl Bump {
    pub fn new(center: &GroupPoint, radii: Vec<f64>, power: u32) -> Result<Self> {
        let n = center.n();
        if radii.len() != 2 * n + 1 {
            return Err(LabError::DimensionMismatch {
                expected: 2 * n + 1,
                found: radii.len(),
            });
        }
        if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(LabError::param("bump radii must be positive"));
        }
        if power < 3 {
            return Err(LabError::param("bump power must be at least 3"));
        }
        Ok(Self {
            n,
            center: center.to_flat(),
            radii,
            power,
        })
    }

    pub fn center(&self) -> GroupPoint {
        GroupPoint::from_flat(&self.center).expect("stored center is valid")
    }

    /// Flat-coordinate bounding box of the support.
    pub fn support_box(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = self
            .center
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| c - r)
            .collect();
        let hi = self
            .center
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| c + r)
            .collect();
        (lo, hi)
    }

    fn parts(&self, p: &GroupPoint) -> (Vec<f64>, f64) {
        let flat = p.to_flat();
        let a: Vec<f64> = flat
            .iter()
            .zip(&self.center)
            .zip(&self.radii)
            .map(|((x, c), r)| (x - c) / r)
            .collect();
        let s = 1.0 - a.iter().map(|v| v * v).sum::<f64>();
        (a, s)
    }
}

impl SmoothField for Bump {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, p: &GroupPoint) -> f64 {
        let (_, s) = self.parts(p);
        if s <= 0.0 {
            0.0
        } else {
            s.powi(self.power as i32)
        }
    }

    fn d1(&self, p: &GroupPoint, i: usize) -> f64 {
        let (a, s) = self.parts(p);
        if s <= 0.0 {
            return 0.0;
        }
        let k = self.power as f64;
        -2.0 * k * s.powi(self.power as i32 - 1) * a[i] / self.radii[i]
    }

    fn d2(&self, p: &GroupPoint, i: usize, j: usize) -> f64 {
        let (a, s) = self.parts(p);
        if s <= 0.0 {
            return 0.0;
        }
        let k = self.power as f64;
        let (ri, rj) = (self.radii[i], self.radii[j]);
        let mut v = 4.0 * k * (k - 1.0) * s.powi(self.power as i32 - 2) * a[i] * a[j] / (ri * rj);
        if i == j {
            v -= 2.0 * k * s.powi(self.power as i32 - 1) / (ri * ri);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic() -> Polynomial {
        // (x^2 + y^2)^2 + tau^2 on H^1
        let x = Polynomial::coordinate(1, 0);
        let y = Polynomial::coordinate(1, 1);
        let t = Polynomial::coordinate(1, 2);
        let s = x.mul(&x).add(&y.mul(&y));
        s.mul(&s).add(&t.mul(&t))
    }

    #[test]
    fn polynomial_derivatives() {
        let f = quartic();
        let p = GroupPoint::h1(1.0, 2.0, 3.0);
        assert_eq!(f.value(&p), 25.0 + 9.0);
        // d/dx = 4x(x^2+y^2)
        assert_eq!(f.d1(&p, 0), 20.0);
        assert_eq!(f.d1(&p, 2), 6.0);
        // d2/dxdy = 8xy
        assert_eq!(f.d2(&p, 0, 1), 16.0);
        assert_eq!(f.d2(&p, 1, 0), 16.0);
        assert_eq!(f.d2(&p, 2, 2), 2.0);
        assert_eq!(f.d2(&p, 0, 2), 0.0);
    }

    #[test]
    fn radial_matches_polynomial() {
        // r^4 is exactly the quartic polynomial
        let f = quartic();
        let g = RadialField::new(1, RadialProfile::power(4.0));
        let p = GroupPoint::h1(0.7, -0.4, 1.3);
        for i in 0..3 {
            assert!((f.d1(&p, i) - g.d1(&p, i)).abs() < 1e-12);
            for j in 0..3 {
                assert!((f.d2(&p, i, j) - g.d2(&p, i, j)).abs() < 1e-11, "{i}{j}");
            }
        }
    }

    #[test]
    fn finite_difference_symmetry_and_step() {
        let f = FiniteDifference::with_default_step(1, |p: &GroupPoint| {
            (p.x[0] * p.tau).sin() + p.y[0].powi(3)
        });
        let p = GroupPoint::h1(0.3, 0.2, 0.9);
        assert_eq!(f.d2(&p, 0, 2), f.d2(&p, 2, 0));
        assert_eq!(f.oracle(), OracleKind::CentralDifference { h: 1e-4 });
        assert!(FiniteDifference::new(1, 0.0, |_: &GroupPoint| 0.0).is_err());
    }

    #[test]
    fn central_difference_is_second_order() {
        let exact = |p: &GroupPoint| -> f64 { (p.x[0] * p.tau).sin() * (0.5 * p.y[0]).exp() };
        let p = GroupPoint::h1(0.4, -0.3, 0.8);
        // exact second derivatives of sin(x t) e^(y/2)
        let (x, y, t) = (0.4f64, -0.3f64, 0.8f64);
        let e = (0.5 * y).exp();
        let dxx = -t * t * (x * t).sin() * e;
        let dxt = ((x * t).cos() - x * t * (x * t).sin()) * e;
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let errs = |i: usize, j: usize, want: f64| -> Vec<f64> {
            hs.iter()
                .map(|&h| (FiniteDifference::new(1, h, exact).unwrap().d2(&p, i, j) - want).abs())
                .collect()
        };
        for errs in [errs(0, 0, dxx), errs(0, 2, dxt)] {
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!((1.8..=2.2).contains(&order), "order {order}");
            }
        }
    }

    #[test]
    fn profile_consistency() {
        let p = RadialProfile::power(3.0);
        assert!(p.check_consistency(&[0.5, 1.0, 2.0], 1e-5, 1e-6).is_ok());
        let bad = RadialProfile::new(|r| r * r, |r| 3.0 * r, |_| 2.0);
        assert!(bad.check_consistency(&[1.0], 1e-5, 1e-6).is_err());
    }

    #[test]
    fn pullback_shapes() {
        let f = Polynomial::coordinate(1, 2);
        let a = GroupPoint::h1(1.0, 0.0, 0.0);
        let g = Pullback::left_translation(f, &a).unwrap();
        // tau o L_a at (0,1,0) is the tau of (1,0,0) o (0,1,0) = -2
        assert_eq!(g.value(&GroupPoint::h1(0.0, 1.0, 0.0)), -2.0);
        assert!(Pullback::left_translation(Polynomial::zero(1), &GroupPoint::origin(2)).is_err());
    }

    #[test]
    fn bump_matches_finite_differences() {
        let c = GroupPoint::h1(0.2, -0.1, 0.3);
        let b = Bump::new(&c, vec![1.0, 0.8, 1.5], 4).unwrap();
        let fd = FiniteDifference::new(1, 1e-4, |p: &GroupPoint| b.value(p)).unwrap();
        let p = GroupPoint::h1(0.5, 0.1, -0.2);
        for i in 0..3 {
            assert!((b.d1(&p, i) - fd.d1(&p, i)).abs() < 1e-7);
            for j in 0..3 {
                assert!((b.d2(&p, i, j) - fd.d2(&p, i, j)).abs() < 1e-5);
            }
        }
        assert_eq!(b.value(&GroupPoint::h1(1.3, -0.1, 0.3)), 0.0);
        assert!(Bump::new(&c, vec![1.0, 1.0], 4).is_err());
        assert!(Bump::new(&c, vec![1.0, 1.0, 1.0], 2).is_err());
    }
}
