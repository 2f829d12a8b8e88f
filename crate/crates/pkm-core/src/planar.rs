//! Exact-size 2D vector and 2x2 matrix arithmetic.
//!
//! Everything the toolkit needs from linear algebra fits in a 2x2 matrix,
//! so determinants, singular values, and condition numbers are computed in
//! closed form instead of through a general-purpose decomposition. The
//! singular values use the stable two-hypot form: for
//! `M = [[a, b], [c, d]]`,
//!
//! ```text
//! y1 = hypot(a - d, b + c)      y2 = hypot(a + d, b - c)
//! sigma_max = (y1 + y2) / 2     sigma_min = |y2 - y1| / 2
//! ```
//!
//! which avoids the cancellation of the naive `trace^2 - 4 det^2`
//! discriminant near isotropic matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2D point, displacement, or velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle, used for grid extents and trace regions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn from_bounds(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Rect::new(Vec2::new(x_min, y_min), Vec2::new(x_max, y_max))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Smallest rectangle containing both `self` and `p`.
    pub fn expanded_to(&self, p: Vec2) -> Rect {
        Rect::from_bounds(
            self.min.x.min(p.x),
            self.min.y.min(p.y),
            self.max.x.max(p.x),
            self.max.y.max(p.y),
        )
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub const fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub const fn diagonal(d1: f64, d2: f64) -> Self {
        Mat2::new(d1, 0.0, 0.0, d2)
    }

    pub fn from_rows(r1: Vec2, r2: Vec2) -> Self {
        Mat2::new(r1.x, r1.y, r2.x, r2.y)
    }

    pub fn det(&self) -> f64 {
        det2(self)
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.a11 * v.x + self.a12 * v.y,
            self.a21 * v.x + self.a22 * v.y,
        )
    }

    pub fn mul_mat(&self, m: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * m.a11 + self.a12 * m.a21,
            self.a11 * m.a12 + self.a12 * m.a22,
            self.a21 * m.a11 + self.a22 * m.a21,
            self.a21 * m.a12 + self.a22 * m.a22,
        )
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn scale(&self, k: f64) -> Mat2 {
        Mat2::new(self.a11 * k, self.a12 * k, self.a21 * k, self.a22 * k)
    }

    pub fn try_inverse(&self) -> Result<Mat2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return Err(Error::SingularMatrix);
        }
        Ok(Mat2::new(
            self.a22 / d,
            -self.a12 / d,
            -self.a21 / d,
            self.a11 / d,
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }
}

/// Determinant by cofactor expansion.
pub fn det2(m: &Mat2) -> f64 {
    m.a11 * m.a22 - m.a12 * m.a21
}

/// Singular values of `m`, returned `(sigma_min, sigma_max)` with both
/// values nonnegative and `sigma_min <= sigma_max`. Every downstream
/// consumer relies on this ascending order.
pub fn singular_values2(m: &Mat2) -> (f64, f64) {
    let y1 = (m.a11 - m.a22).hypot(m.a12 + m.a21);
    let y2 = (m.a11 + m.a22).hypot(m.a12 - m.a21);
    let s_max = 0.5 * (y1 + y2);
    let s_min = 0.5 * (y2 - y1).abs();
    (s_min, s_max)
}

/// Spectral condition number `sigma_max / sigma_min`.
///
/// Fails with [`Error::SingularMatrix`] when `sigma_min` is zero to
/// working precision relative to `sigma_max`.
pub fn cond2(m: &Mat2) -> Result<f64> {
    let (s_min, s_max) = singular_values2(m);
    if s_max == 0.0 || s_min <= s_max * f64::EPSILON {
        return Err(Error::SingularMatrix);
    }
    Ok(s_max / s_min)
}

/// Principal axes of `m`: unit right-singular vectors paired with their
/// singular values, minor axis first. Used for manipulability ellipse
/// glyphs.
pub fn singular_axes2(m: &Mat2) -> ((f64, Vec2), (f64, Vec2)) {
    let (s_min, s_max) = singular_values2(m);
    // Eigenvectors of the Gram matrix M^T M.
    let p = m.a11 * m.a11 + m.a21 * m.a21;
    let q = m.a12 * m.a12 + m.a22 * m.a22;
    let r = m.a11 * m.a12 + m.a21 * m.a22;
    let theta = 0.5 * (2.0 * r).atan2(p - q);
    let v_max = Vec2::new(theta.cos(), theta.sin());
    ((s_min, v_max.perp()), (s_max, v_max))
}
