//! The Euclidean motion group M(2) = R² ⋊ SO(2).

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Counter-clockwise rotation by `alpha`, row major.
pub fn rotation_matrix(alpha: f64) -> [[f64; 2]; 2] {
    let (s, c) = alpha.sin_cos();
    [[c, -s], [s, c]]
}

pub fn rotate(alpha: f64, v: [f64; 2]) -> [f64; 2] {
    let (s, c) = alpha.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// A motion `y ↦ x + A(alpha) y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub x: [f64; 2],
    pub alpha: f64,
}

impl Motion {
    pub fn new(x: [f64; 2], alpha: f64) -> Self {
        Motion { x, alpha: wrap_angle(alpha) }
    }

    pub fn identity() -> Self {
        Motion { x: [0.0, 0.0], alpha: 0.0 }
    }

    pub fn rotation(&self) -> [[f64; 2]; 2] {
        rotation_matrix(self.alpha)
    }

    pub fn apply(&self, y: [f64; 2]) -> [f64; 2] {
        let r = rotate(self.alpha, y);
        [self.x[0] + r[0], self.x[1] + r[1]]
    }
}

/// `(x, A)(y, B) = (x + Ay, AB)`.
pub fn compose(g: &Motion, h: &Motion) -> Motion {
    Motion::new(g.apply(h.x), g.alpha + h.alpha)
}

/// `(x, A)⁻¹ = (−A⁻¹x, A⁻¹)`.
pub fn invert(g: &Motion) -> Motion {
    let r = rotate(-g.alpha, g.x);
    Motion::new([-r[0], -r[1]], -g.alpha)
}

/// Polar coordinates `(ρ, θ, α)` of a motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPoint {
    pub rho: f64,
    pub theta: f64,
    pub alpha: f64,
}

impl MotionPoint {
    pub fn new(rho: f64, theta: f64, alpha: f64) -> Result<Self> {
        if !(rho >= 0.0) {
            return Err(Error::NegativeRadius(rho));
        }
        let theta = if rho == 0.0 { 0.0 } else { wrap_angle(theta) };
        Ok(MotionPoint { rho, theta, alpha: wrap_angle(alpha) })
    }

    pub fn origin() -> Self {
        MotionPoint { rho: 0.0, theta: 0.0, alpha: 0.0 }
    }

    pub fn cartesian(&self) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [self.rho * c, self.rho * s]
    }
}

pub fn from_polar(p: &MotionPoint) -> Result<Motion> {
    if !(p.rho >= 0.0) {
        return Err(Error::NegativeRadius(p.rho));
    }
    let (s, c) = p.theta.sin_cos();
    Ok(Motion::new([p.rho * c, p.rho * s], p.alpha))
}

pub fn to_polar(m: &Motion) -> MotionPoint {
    let rho = m.x[0].hypot(m.x[1]);
    let theta = if rho == 0.0 { 0.0 } else { wrap_angle(m.x[1].atan2(m.x[0])) };
    MotionPoint { rho, theta, alpha: wrap_angle(m.alpha) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn invert_quarter_turn() {
        let g = invert(&Motion::new([1.0, 0.0], PI / 2.0));
        assert!((g.x[0]).abs() < 1e-15 && (g.x[1] - 1.0).abs() < 1e-15);
        assert!((g.alpha - 3.0 * PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn polar_rejects_negative_radius() {
        assert!(MotionPoint::new(-1.0, 0.0, 0.0).is_err());
        let p = MotionPoint { rho: -0.5, theta: 0.0, alpha: 0.0 };
        assert!(from_polar(&p).is_err());
    }

    #[test]
    fn theta_canonical_at_origin() {
        let p = MotionPoint::new(0.0, 2.0, 1.0).unwrap();
        assert_eq!(p.theta, 0.0);
        let m = from_polar(&p).unwrap();
        assert_eq!(m.x, [0.0, 0.0]);
    }

    #[test]
    fn wrap_handles_tiny_negative() {
        let a = wrap_angle(-1e-18);
        assert!((0.0..TAU).contains(&a));
    }
}
