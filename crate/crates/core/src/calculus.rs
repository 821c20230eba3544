//! Horizontal vector fields and the sub-Laplacian.
//!
//! ```text
//! X_i = d/dx_i + 2 y_i d/dtau
//! Y_i = d/dy_i - 2 x_i d/dtau
//! Delta_H = sum_i (X_i^2 + Y_i^2)
//!         = Delta_(x,y) + 4 |(x,y)|^2 d2/dtau2 + 4 sum_i (y_i d2/dx_i dtau - x_i d2/dy_i dtau)
//! ```
//!
//! Vector-field indices `i` are zero based here (`0..n`).

use crate::error::{LabError, Result};
use crate::field::{RadialProfile, SmoothField};
use crate::group::{anisotropy_weight, gauge_norm, GroupPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    X,
    Y,
}

/// One of the horizontal generators `X_i` or `Y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Horizontal {
    pub dir: Direction,
    pub index: usize,
}

impl Horizontal {
    pub fn x(index: usize) -> Self {
        Self {
            dir: Direction::X,
            index,
        }
    }

    pub fn y(index: usize) -> Self {
        Self {
            dir: Direction::Y,
            index,
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.index >= n {
            return Err(LabError::param(format!(
                "vector field index {} out of range for n = {n}",
                self.index
            )));
        }
        Ok(())
    }

    /// Flat coordinate this field differentiates along (besides tau).
    fn axis(&self, n: usize) -> usize {
        match self.dir {
            Direction::X => self.index,
            Direction::Y => n + self.index,
        }
    }

    /// Coefficient of d/dtau at `p`.
    fn tau_coef(&self, p: &GroupPoint) -> f64 {
        match self.dir {
            Direction::X => 2.0 * p.y[self.index],
            Direction::Y => -2.0 * p.x[self.index],
        }
    }

    /// Derivative of `other`'s tau coefficient along this field's own axis.
    fn coef_derivative(&self, other: &Horizontal) -> f64 {
        if self.index != other.index {
            return 0.0;
        }
        match (self.dir, other.dir) {
            (Direction::X, Direction::Y) => -2.0,
            (Direction::Y, Direction::X) => 2.0,
            _ => 0.0,
        }
    }
}

/// Applies `X_i` or `Y_i` to `f` at `p`.
pub fn horizontal_derivative<F: SmoothField + ?Sized>(
    f: &F,
    v: Horizontal,
    p: &GroupPoint,
) -> Result<f64> {
    let n = p.n();
    v.check(n)?;
    let tau = 2 * n;
    Ok(f.d1(p, v.axis(n)) + v.tau_coef(p) * f.d1(p, tau))
}

/// Second-order horizontal derivative `A(B f)` at `p`.
pub fn horizontal_second<F: SmoothField + ?Sized>(
    f: &F,
    a: Horizontal,
    b: Horizontal,
    p: &GroupPoint,
) -> Result<f64> {
    let n = p.n();
    a.check(n)?;
    b.check(n)?;
    let tau = 2 * n;
    let (ca, cb) = (a.axis(n), b.axis(n));
    let (ba, bb) = (a.tau_coef(p), b.tau_coef(p));
    Ok(f.d2(p, ca, cb)
        + a.coef_derivative(&b) * f.d1(p, tau)
        + bb * f.d2(p, ca, tau)
        + ba * f.d2(p, cb, tau)
        + ba * bb * f.d2(p, tau, tau))
}

/// Commutator `[A, B] f = A(B f) - B(A f)`.
pub fn commutator<F: SmoothField + ?Sized>(
    f: &F,
    a: Horizontal,
    b: Horizontal,
    p: &GroupPoint,
) -> Result<f64> {
    Ok(horizontal_second(f, a, b, p)? - horizontal_second(f, b, a, p)?)
}

/// Sub-Laplacian from the expanded coordinate expression.
pub fn sublaplacian<F: SmoothField + ?Sized>(f: &F, p: &GroupPoint) -> f64 {
    let n = p.n();
    let tau = 2 * n;
    let mut lap = 0.0;
    let mut cross = 0.0;
    for i in 0..n {
        lap += f.d2(p, i, i) + f.d2(p, n + i, n + i);
        cross += p.y[i] * f.d2(p, i, tau) - p.x[i] * f.d2(p, n + i, tau);
    }
    lap + 4.0 * p.horizontal_norm_sq() * f.d2(p, tau, tau) + 4.0 * cross
}

/// Sub-Laplacian as the sum of squares `sum_i (X_i^2 + Y_i^2)`.
pub fn sublaplacian_sum_of_squares<F: SmoothField + ?Sized>(f: &F, p: &GroupPoint) -> f64 {
    (0..p.n())
        .map(|i| {
            horizontal_second(f, Horizontal::x(i), Horizontal::x(i), p).unwrap()
                + horizontal_second(f, Horizontal::y(i), Horizontal::y(i), p).unwrap()
        })
        .sum()
}

/// Sub-Laplacian of `phi(|eta|_H)` via the radial formula
/// `omega(p) (phi'' + (Q - 1)/r phi')`.
pub fn sublaplacian_radial(profile: &RadialProfile, p: &GroupPoint) -> Result<f64> {
    let r = gauge_norm(p);
    if r == 0.0 {
        return Err(LabError::domain(
            "radial sub-Laplacian is undefined at the origin",
        ));
    }
    let w = anisotropy_weight(p)?;
    let q = p.params().homogeneous_dim() as f64;
    Ok(w * (profile.d2(r) + (q - 1.0) / r * profile.d1(r)))
}
