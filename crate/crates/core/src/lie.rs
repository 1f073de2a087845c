//! SO(3) and SE(3) for calibration work.
//!
//! Tangent vectors are ordered translation first, `[δx, δy, δz, φx, φy, φz]`,
//! everywhere in the crate: twists, Jacobians, information matrices.
//! Updates use right perturbation, `P ← P · exp(ξ)`.

use core::f64::consts::PI;
use core::fmt;
use core::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Matrix6, Quaternion, UnitQuaternion, Vector3, Vector6};
// Unused whenever another dependency links std, whose inherent float methods win.
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Below this angle the trigonometric coefficients switch to their series.
const SMALL_ANGLE: f64 = 1e-4;

/// `log` refuses rotations closer than this to pi.
pub const BRANCH_MARGIN: f64 = 1e-9;

/// Skew-symmetric matrix with `skew(a) * b == a.cross(&b)`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// An element of SO(3), stored as a unit quaternion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(UnitQuaternion<f64>);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(UnitQuaternion::identity())
    }

    /// Builds a rotation from quaternion components (scalar last), normalizing them.
    pub fn from_quaternion(x: f64, y: f64, z: f64, w: f64) -> Result<Self> {
        let q = Quaternion::new(w, x, y, z);
        let n = q.norm();
        if !n.is_finite() || n < 1e-12 {
            return Err(Error::invalid("quaternion must be finite and nonzero"));
        }
        // unit to rounding: keep as given so that printed quaternions read back exactly
        if (n - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Rotation(UnitQuaternion::new_unchecked(q)));
        }
        Ok(Rotation(UnitQuaternion::new_normalize(q)))
    }

    pub fn from_unit_quaternion(q: UnitQuaternion<f64>) -> Self {
        Rotation(q)
    }

    /// Projects an (approximately) orthonormal matrix onto SO(3).
    pub fn from_matrix(m: &Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("rotation matrix must be finite"));
        }
        let r = nalgebra::Rotation3::from_matrix_eps(m, 1e-15, 100, nalgebra::Rotation3::identity());
        Ok(Rotation(UnitQuaternion::from_rotation_matrix(&r)))
    }

    /// Rotation by `angle` radians about `axis` (any nonzero length).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Result<Self> {
        let n = axis.norm();
        if !(n > 0.0) || !n.is_finite() || !angle.is_finite() {
            return Err(Error::invalid("axis must be nonzero and finite"));
        }
        Ok(Self::exp(&(axis * (angle / n))))
    }

    /// Rodrigues exponential of an angle-axis vector.
    pub fn exp(phi: &Vector3<f64>) -> Self {
        let theta = phi.norm();
        let (w, k) = if theta < SMALL_ANGLE {
            let t2 = theta * theta;
            (1.0 - t2 / 8.0 + t2 * t2 / 384.0, 0.5 - t2 / 48.0 + t2 * t2 / 3840.0)
        } else {
            let half = 0.5 * theta;
            (half.cos(), half.sin() / theta)
        };
        let v = phi * k;
        Rotation(UnitQuaternion::new_normalize(Quaternion::new(w, v.x, v.y, v.z)))
    }

    /// Angle-axis vector of the rotation, angle in `[0, pi]`.
    pub fn log(&self) -> Vector3<f64> {
        let q = self.0.quaternion();
        let (w, v) = if q.w < 0.0 {
            (-q.w, -q.imag())
        } else {
            (q.w, q.imag())
        };
        let n = v.norm();
        // n = sin(θ/2), w = cos(θ/2)
        if n < 0.5 * SMALL_ANGLE {
            let r = n / w;
            v * ((2.0 / w) * (1.0 - r * r / 3.0))
        } else {
            v * (2.0 * n.atan2(w) / n)
        }
    }

    /// Rotation angle in `[0, pi]`.
    pub fn angle(&self) -> f64 {
        let q = self.0.quaternion();
        2.0 * q.imag().norm().atan2(q.w.abs())
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        self.0.to_rotation_matrix().into_inner()
    }

    pub fn quaternion(&self) -> &UnitQuaternion<f64> {
        &self.0
    }

    /// Quaternion components `[x, y, z, w]` with `w >= 0`.
    pub fn xyzw(&self) -> [f64; 4] {
        let q = self.0.quaternion();
        let s = if q.w < 0.0 { -1.0 } else { 1.0 };
        [s * q.i, s * q.j, s * q.k, s * q.w]
    }

    pub fn inverse(&self) -> Self {
        Rotation(self.0.inverse())
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }
}

impl Mul for Rotation {
    type Output = Rotation;

    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(UnitQuaternion::new_normalize(self.0.into_inner() * rhs.0.into_inner()))
    }
}

/// A tangent vector of SE(3), `[δx, δy, δz, φx, φy, φz]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Twist(pub Vector6<f64>);

impl Twist {
    pub fn zero() -> Self {
        Twist(Vector6::zeros())
    }

    pub fn new(translation: Vector3<f64>, rotation: Vector3<f64>) -> Self {
        Twist(Vector6::new(
            translation.x,
            translation.y,
            translation.z,
            rotation.x,
            rotation.y,
            rotation.z,
        ))
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Twist(Vector6::from(v))
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into_owned()
    }

    pub fn rotation(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into_owned()
    }

    pub fn vector(&self) -> &Vector6<f64> {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// The 6×6 matrix of the Lie bracket, `ad(ξ) η = [ξ, η]`.
    pub fn ad(&self) -> Matrix6<f64> {
        let rho = skew(&self.translation());
        let phi = skew(&self.rotation());
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&phi);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&rho);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&phi);
        m
    }
}

impl From<Vector6<f64>> for Twist {
    fn from(v: Vector6<f64>) -> Self {
        Twist(v)
    }
}

/// A rigid transform: `x ↦ R x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Rotation, translation: Vector3<f64>) -> Self {
        Pose {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Pose::new(Rotation::identity(), Vector3::zeros())
    }

    pub fn from_translation(t: Vector3<f64>) -> Self {
        Pose::new(Rotation::identity(), t)
    }

    pub fn from_rotation(r: Rotation) -> Self {
        Pose::new(r, Vector3::zeros())
    }

    /// SE(3) exponential: rotation `exp(φ)`, translation `V(φ) δ`.
    pub fn exp(xi: &Twist) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::invalid("twist has non-finite components"));
        }
        let phi = xi.rotation();
        Ok(Pose::new(
            Rotation::exp(&phi),
            so3_left_jacobian(&phi) * xi.translation(),
        ))
    }

    /// SE(3) logarithm on the principal branch.
    pub fn log(&self) -> Result<Twist> {
        let angle = self.rotation.angle();
        if angle > PI - BRANCH_MARGIN {
            return Err(Error::AmbiguousBranch { angle });
        }
        let phi = self.rotation.log();
        Ok(Twist::new(so3_left_jacobian_inv(&phi) * self.translation, phi))
    }

    pub fn inverse(&self) -> Self {
        let r = self.rotation.inverse();
        let t = -r.rotate(&self.translation);
        Pose::new(r, t)
    }

    /// Applies the transform to a point.
    pub fn act(&self, point: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.rotate(point) + self.translation
    }

    /// Homogeneous 4×4 matrix; last row is exactly `(0, 0, 0, 1)`.
    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation.matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Adjoint, `P exp(ξ) P⁻¹ = exp(Ad(P) ξ)`.
    pub fn adjoint(&self) -> Matrix6<f64> {
        let r = self.rotation.matrix();
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(skew(&self.translation) * r));
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&r);
        m
    }

    /// `self · exp(xi)`.
    pub fn retract(&self, xi: &Twist) -> Result<Self> {
        Ok(*self * Pose::exp(xi)?)
    }

    /// Rotation angle and translation distance from `other`.
    pub fn distance(&self, other: &Pose) -> (f64, f64) {
        let d = self.inverse() * *other;
        (d.rotation.angle(), (other.translation - self.translation).norm())
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        Pose::new(
            self.rotation * rhs.rotation,
            self.rotation.rotate(&rhs.translation) + self.translation,
        )
    }
}

impl fmt::Display for Pose {
    /// `tx ty tz qx qy qz qw` at 17 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.translation;
        let [qx, qy, qz, qw] = self.rotation.xyzw();
        write!(
            f,
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            t.x, t.y, t.z, qx, qy, qz, qw
        )
    }
}

/// Left Jacobian of SO(3), also the `V` matrix of the SE(3) exponential.
pub fn so3_left_jacobian(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let (b, c) = if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0)
    } else {
        let s = (0.5 * theta).sin();
        let t2 = theta * theta;
        (2.0 * s * s / t2, (theta - theta.sin()) / (t2 * theta))
    };
    let k = skew(phi);
    Matrix3::identity() + k * b + k * k * c
}

pub fn so3_left_jacobian_inv(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let d = if theta < SMALL_ANGLE {
        1.0 / 12.0 + theta * theta / 720.0
    } else {
        let half = 0.5 * theta;
        (1.0 - half * half.cos() / half.sin()) / (theta * theta)
    };
    let k = skew(phi);
    Matrix3::identity() - k * 0.5 + k * k * d
}

/// Off-diagonal block `Q(δ, φ)` of the SE(3) left Jacobian.
fn se3_q_block(rho: &Vector3<f64>, phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta = phi.norm();
    let t2 = theta * theta;
    let (c1, c2, c3) = if theta < 1e-2 {
        let t4 = t2 * t2;
        (
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0,
            1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0,
            1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0,
        )
    } else {
        let (s, c) = (theta.sin(), theta.cos());
        let t3 = t2 * theta;
        (
            (theta - s) / t3,
            (t2 + 2.0 * c - 2.0) / (2.0 * t2 * t2),
            (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t2 * t3),
        )
    };
    let p = skew(phi);
    let r = skew(rho);
    let pr = p * r;
    let rp = r * p;
    let prp = pr * p;
    let pp = p * p;
    r * 0.5 + (pr + rp + prp) * c1 + (pp * r + rp * p - prp * 3.0) * c2 + (prp * p + p * prp) * c3
}

/// Left Jacobian of SE(3).
pub fn se3_left_jacobian(xi: &Twist) -> Matrix6<f64> {
    let phi = xi.rotation();
    let j = so3_left_jacobian(&phi);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&j);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&se3_q_block(&xi.translation(), &phi));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&j);
    m
}

pub fn se3_left_jacobian_inv(xi: &Twist) -> Matrix6<f64> {
    let phi = xi.rotation();
    let j_inv = so3_left_jacobian_inv(&phi);
    let q = se3_q_block(&xi.translation(), &phi);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&j_inv);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(-j_inv * q * j_inv));
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&j_inv);
    m
}

/// Inverse right Jacobian: `log(exp(ξ) exp(δ)) ≈ ξ + Jr⁻¹(ξ) δ`.
pub fn se3_right_jacobian_inv(xi: &Twist) -> Matrix6<f64> {
    se3_left_jacobian_inv(&Twist(-xi.0))
}

/// Draws a twist with independent `N(0, sigma_k²)` components.
pub fn sample_perturbation<R: Rng + ?Sized>(sigma: &Vector6<f64>, rng: &mut R) -> Result<Twist> {
    if sigma.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::invalid("standard deviations must be finite and non-negative"));
    }
    let mut v = Vector6::zeros();
    for (out, s) in v.iter_mut().zip(sigma.iter()) {
        let z: f64 = rng.sample(StandardNormal);
        *out = z * s;
    }
    Ok(Twist(v))
}

/// Rotation drawn uniformly from SO(3).
pub fn sample_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    loop {
        let q = Quaternion::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if q.norm() > 1e-6 {
            return Rotation(UnitQuaternion::new_normalize(q));
        }
    }
}
