//! Points of the Heisenberg group `H^n` and the group structure on them.
//!
//! A point is `(x, y, tau)` with `x, y` in `R^n`. The product is
//!
//! ```text
//! (x, y, tau) o (x', y', tau') = (x + x', y + y', tau + tau' + 2(<x, y'> - <x', y>))
//! ```
//!
//! and the Koranyi gauge `((|x|^2 + |y|^2)^2 + tau^2)^(1/4)` is homogeneous of
//! degree one under the dilations `(x, y, tau) -> (l x, l y, l^2 tau)`.
//!
//! Flat coordinate order used by every derivative oracle in the crate is
//! `x_1..x_n, y_1..y_n, tau`, so a point of `H^n` has `2n + 1` coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Dimension parameters of `H^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupParams {
    n: usize,
}

impl GroupParams {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LabError::param("n must be at least 1"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Homogeneous dimension `Q = 2n + 2`.
    pub fn homogeneous_dim(&self) -> usize {
        2 * self.n + 2
    }

    /// Number of flat coordinates, `2n + 1`.
    pub fn coords(&self) -> usize {
        2 * self.n + 1
    }

    /// Critical exponent `Q / (Q - 2)`.
    pub fn critical_exponent(&self) -> f64 {
        let q = self.homogeneous_dim() as f64;
        q / (q - 2.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub tau: f64,
}

impl GroupPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>, tau: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(LabError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        if x.is_empty() {
            return Err(LabError::param("a group point needs n >= 1"));
        }
        Ok(Self { x, y, tau })
    }

    pub fn origin(n: usize) -> Self {
        Self {
            x: vec![0.0; n],
            y: vec![0.0; n],
            tau: 0.0,
        }
    }

    /// Convenience constructor for `H^1`.
    pub fn h1(x: f64, y: f64, tau: f64) -> Self {
        Self {
            x: vec![x],
            y: vec![y],
            tau,
        }
    }

    /// Builds a point from flat coordinates `x_1..x_n, y_1..y_n, tau`.
    pub fn from_flat(coords: &[f64]) -> Result<Self> {
        if coords.len() < 3 || coords.len() % 2 == 0 {
            return Err(LabError::param(format!(
                "flat coordinates must have odd length 2n+1 >= 3, got {}",
                coords.len()
            )));
        }
        let n = (coords.len() - 1) / 2;
        Ok(Self {
            x: coords[..n].to_vec(),
            y: coords[n..2 * n].to_vec(),
            tau: coords[2 * n],
        })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.n() + 1);
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v.push(self.tau);
        v
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn params(&self) -> GroupParams {
        GroupParams { n: self.n() }
    }

    /// `|x|^2 + |y|^2`.
    pub fn horizontal_norm_sq(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|v| v * v).sum()
    }

    pub fn is_origin(&self) -> bool {
        self.tau == 0.0 && self.x.iter().chain(&self.y).all(|&v| v == 0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Group product `a o b` with `tau = tau_a + tau_b + 2(<x_b, y_a> - <x_a, y_b>)`.
///
/// This sign makes `X_i = d/dx_i + 2 y_i d/dtau` and `Y_i = d/dy_i - 2 x_i d/dtau`
/// left-invariant.
pub fn compose(a: &GroupPoint, b: &GroupPoint) -> Result<GroupPoint> {
    if a.n() != b.n() {
        return Err(LabError::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        });
    }
    let x = a.x.iter().zip(&b.x).map(|(u, v)| u + v).collect();
    let y = a.y.iter().zip(&b.y).map(|(u, v)| u + v).collect();
    let tau = a.tau + b.tau + 2.0 * (dot(&b.x, &a.y) - dot(&a.x, &b.y));
    Ok(GroupPoint { x, y, tau })
}

pub fn inverse(a: &GroupPoint) -> GroupPoint {
    GroupPoint {
        x: a.x.iter().map(|v| -v).collect(),
        y: a.y.iter().map(|v| -v).collect(),
        tau: -a.tau,
    }
}

/// Koranyi gauge `|a|_H`.
pub fn gauge_norm(a: &GroupPoint) -> f64 {
    let s = a.horizontal_norm_sq();
    (s * s + a.tau * a.tau).sqrt().sqrt()
}

/// Anisotropic dilation `(l x, l y, l^2 tau)`.
pub fn dilate(lambda: f64, a: &GroupPoint) -> Result<GroupPoint> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(LabError::param(format!(
            "dilation factor must be positive, got {lambda}"
        )));
    }
    Ok(GroupPoint {
        x: a.x.iter().map(|v| lambda * v).collect(),
        y: a.y.iter().map(|v| lambda * v).collect(),
        tau: lambda * lambda * a.tau,
    })
}

/// `(|x|^2 + |y|^2) / |a|_H^2`, which lies in `[0, 1]`.
///
/// Undefined at the origin; that case is reported as a domain error.
pub fn anisotropy_weight(a: &GroupPoint) -> Result<f64> {
    let s = a.horizontal_norm_sq();
    let r2 = (s * s + a.tau * a.tau).sqrt();
    if r2 == 0.0 {
        return Err(LabError::domain(
            "anisotropy weight is undefined at the origin",
        ));
    }
    Ok((s / r2).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64, t: f64) -> GroupPoint {
        GroupPoint::h1(x, y, t)
    }

    #[test]
    fn compose_hand_example() {
        let p = compose(&pt(1.0, 0.0, 0.0), &pt(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(p, pt(1.0, 1.0, -2.0));
        assert_eq!(inverse(&p), pt(-1.0, -1.0, 2.0));
    }

    #[test]
    fn identity_and_inverse() {
        let a = pt(0.3, -1.2, 4.0);
        let e = GroupPoint::origin(1);
        assert_eq!(compose(&e, &a).unwrap(), a);
        assert_eq!(compose(&a, &inverse(&a)).unwrap(), e);
        assert_eq!(inverse(&inverse(&a)), a);
        assert_eq!(inverse(&e), e);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = pt(1.0, 1.0, 1.0);
        let b = GroupPoint::origin(2);
        assert!(matches!(
            compose(&a, &b),
            Err(LabError::DimensionMismatch { .. })
        ));
        assert!(GroupPoint::new(vec![1.0], vec![1.0, 2.0], 0.0).is_err());
    }

    #[test]
    fn gauge_norm_examples() {
        assert!((gauge_norm(&pt(0.0, 0.0, 9.0)) - 3.0).abs() < 1e-15);
        assert!((gauge_norm(&pt(3.0, 4.0, 0.0)) - 5.0).abs() < 1e-14);
        assert!((gauge_norm(&pt(1.0, 1.0, 2.0)) - 1.681_792_830_507_429).abs() < 1e-14);
        let d = dilate(2.0, &pt(1.0, 1.0, 2.0)).unwrap();
        assert!((gauge_norm(&d) - 2.0 * 8f64.powf(0.25)).abs() < 1e-14);
    }

    #[test]
    fn dilation_rejects_nonpositive() {
        assert!(dilate(0.0, &pt(1.0, 1.0, 1.0)).is_err());
        assert!(dilate(-1.0, &pt(1.0, 1.0, 1.0)).is_err());
        assert_eq!(dilate(1.0, &pt(1.0, 2.0, 3.0)).unwrap(), pt(1.0, 2.0, 3.0));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(anisotropy_weight(&pt(0.5, 2.0, 0.0)).unwrap(), 1.0);
        assert_eq!(anisotropy_weight(&pt(0.0, 0.0, -2.0)).unwrap(), 0.0);
        let w = anisotropy_weight(&pt(1.0, 1.0, 2.0)).unwrap();
        assert!((w - 2.0 / 8f64.sqrt()).abs() < 1e-15);
        assert!(anisotropy_weight(&GroupPoint::origin(1)).is_err());
    }

    #[test]
    fn flat_roundtrip() {
        let p = GroupPoint::new(vec![1.0, 2.0], vec![3.0, 4.0], 5.0).unwrap();
        assert_eq!(p.to_flat(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(GroupPoint::from_flat(&p.to_flat()).unwrap(), p);
        assert!(GroupPoint::from_flat(&[1.0, 2.0]).is_err());
    }

    fn arb_point(n: usize) -> impl Strategy<Value = GroupPoint> {
        (
            prop::collection::vec(-3.0..3.0f64, n),
            prop::collection::vec(-3.0..3.0f64, n),
            -5.0..5.0f64,
        )
            .prop_map(|(x, y, t)| GroupPoint { x, y, tau: t })
    }

    proptest! {
        #[test]
        fn associativity(a in arb_point(2), b in arb_point(2), c in arb_point(2)) {
            let l = compose(&compose(&a, &b).unwrap(), &c).unwrap();
            let r = compose(&a, &compose(&b, &c).unwrap()).unwrap();
            for (u, v) in l.to_flat().iter().zip(r.to_flat()) {
                prop_assert!((u - v).abs() <= 1e-12 * (1.0 + u.abs()));
            }
        }

        #[test]
        fn norm_homogeneity(a in arb_point(2), lambda in 0.01..50.0f64) {
            let d = dilate(lambda, &a).unwrap();
            let lhs = gauge_norm(&d);
            let rhs = lambda * gauge_norm(&a);
            prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + rhs));
        }

        #[test]
        fn weight_in_unit_interval(a in arb_point(3)) {
            prop_assume!(!a.is_origin());
            let w = anisotropy_weight(&a).unwrap();
            prop_assert!((0.0..=1.0).contains(&w));
        }

        #[test]
        fn inverse_is_two_sided(a in arb_point(1)) {
            let e = GroupPoint::origin(1);
            prop_assert_eq!(compose(&inverse(&a), &a).unwrap(), e.clone());
            prop_assert_eq!(compose(&a, &inverse(&a)).unwrap(), e);
        }
    }
}
