//! `AX = XB` for two rigidly mounted frames.
//!
//! `A` is a motion of the first frame (the "eye"), `B` the simultaneous motion
//! of the second (the "hand"), and `X` the pose of the hand frame in the eye
//! frame. Rotation and translation are solved in sequence:
//!
//! * `R_a R_x = R_x R_b`, so the angle-axis vectors satisfy `α = R_x β` and
//!   `R_x` follows from an orthogonal Procrustes fit.
//! * `R_a t_x + t_a = R_x t_b + t_x`, a linear least-squares problem in `t_x`.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lie::{Pose, Rotation};

/// Rotations smaller than this carry no usable axis.
pub const MIN_ROTATION_ANGLE: f64 = 1e-3;
/// Axes closer than this (radians, either sign) count as parallel.
pub const MIN_AXIS_SEPARATION: f64 = 1e-3;
/// `|angle(A) - angle(B)|` above this is logged as a suspicious pair.
pub const ANGLE_MISMATCH_WARNING: f64 = 0.05;
/// Smallest-to-largest singular value ratio below which translation is unobservable.
const UNOBSERVABLE_RATIO: f64 = 1e-6;

/// One corresponding pair of relative motions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionPair {
    pub a: Pose,
    pub b: Pose,
}

impl MotionPair {
    pub fn new(a: Pose, b: Pose) -> Self {
        MotionPair { a, b }
    }

    /// Difference of the two rotation angles; zero for a perfectly rigid pair.
    pub fn angle_mismatch(&self) -> f64 {
        (self.a.rotation.angle() - self.b.rotation.angle()).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandEyeResult {
    pub x: Pose,
    /// RMS rotation angle of `(A X)(X B)⁻¹` over all pairs, radians.
    pub rotation_residual_rms: f64,
    /// RMS translational part of the same discrepancy, meters.
    pub translation_residual_rms: f64,
    /// Smallest singular value of the stacked translation system.
    pub condition_indicator: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslationSolution {
    pub translation: Vector3<f64>,
    pub condition_indicator: f64,
}

fn check_motion(pairs: &[MotionPair]) -> Result<()> {
    if pairs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: pairs.len(),
        });
    }
    for (k, p) in pairs.iter().enumerate() {
        if p.angle_mismatch() > ANGLE_MISMATCH_WARNING {
            log::warn!(
                "motion pair {k}: rotation angles differ by {:.4} rad",
                p.angle_mismatch()
            );
        }
    }
    let axes: Vec<Vector3<f64>> = pairs
        .iter()
        .filter(|p| {
            p.a.rotation.angle() > MIN_ROTATION_ANGLE && p.b.rotation.angle() > MIN_ROTATION_ANGLE
        })
        .map(|p| p.a.rotation.log().normalize())
        .collect();
    if axes.len() < 2 {
        return Err(Error::InsufficientMotion(format!(
            "{} of {} motions rotate by more than {MIN_ROTATION_ANGLE} rad",
            axes.len(),
            pairs.len()
        )));
    }
    let min_sin = MIN_AXIS_SEPARATION.sin();
    let first = axes[0];
    if axes[1..].iter().all(|a| first.cross(a).norm() <= min_sin) {
        return Err(Error::InsufficientMotion(
            "all rotation axes are parallel".into(),
        ));
    }
    Ok(())
}

/// `R_x` minimizing `Σ ‖α_i − R_x β_i‖²`.
pub fn solve_rotation(pairs: &[MotionPair]) -> Result<Rotation> {
    check_motion(pairs)?;
    let m = pairs.iter().fold(Matrix3::zeros(), |acc, p| {
        acc + p.a.rotation.log() * p.b.rotation.log().transpose()
    });
    let svd = m.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut d = Matrix3::identity();
    if (u * v_t).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    Rotation::from_matrix(&(u * d * v_t))
}

/// Least-squares `t_x` from `(R_a − I) t_x = R_x t_b − t_a` stacked over all pairs.
pub fn solve_translation(pairs: &[MotionPair], r_x: &Rotation) -> Result<TranslationSolution> {
    if pairs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: pairs.len(),
        });
    }
    let mut normal = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for p in pairs {
        let c = p.a.rotation.matrix() - Matrix3::identity();
        let d = r_x.rotate(&p.b.translation) - p.a.translation;
        normal += c.transpose() * c;
        rhs += c.transpose() * d;
    }
    let eig = SymmetricEigen::new(normal);
    let (min_k, max_k) = (eig.eigenvalues.imin(), eig.eigenvalues.imax());
    let sigma_min = eig.eigenvalues[min_k].max(0.0).sqrt();
    let sigma_max = eig.eigenvalues[max_k].max(0.0).sqrt();
    if !(sigma_min > UNOBSERVABLE_RATIO * sigma_max) {
        let v = eig.eigenvectors.column(min_k);
        let s = if v[v.iamax()] < 0.0 { -1.0 } else { 1.0 };
        return Err(Error::UnderConstrained {
            null_direction: [s * v[0], s * v[1], s * v[2]],
        });
    }
    let translation = (0..3).fold(Vector3::zeros(), |acc, k| {
        let v = eig.eigenvectors.column(k);
        acc + v * (v.dot(&rhs) / eig.eigenvalues[k])
    });
    Ok(TranslationSolution {
        translation,
        condition_indicator: sigma_min,
    })
}

pub fn solve(pairs: &[MotionPair]) -> Result<HandEyeResult> {
    let rotation = solve_rotation(pairs)?;
    let t = solve_translation(pairs, &rotation)?;
    let x = Pose::new(rotation, t.translation);
    let (rot_rms, trans_rms) = residual_rms(pairs, &x)?;
    Ok(HandEyeResult {
        x,
        rotation_residual_rms: rot_rms,
        translation_residual_rms: trans_rms,
        condition_indicator: t.condition_indicator,
    })
}

/// RMS of the rotation and translation parts of `log((A X)(X B)⁻¹)`.
pub fn residual_rms(pairs: &[MotionPair], x: &Pose) -> Result<(f64, f64)> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("motion pairs"));
    }
    let (mut rot, mut trans) = (0.0, 0.0);
    for p in pairs {
        let d = (p.a * *x * (*x * p.b).inverse()).log()?;
        rot += d.rotation().norm_squared();
        trans += d.translation().norm_squared();
    }
    let n = pairs.len() as f64;
    Ok(((rot / n).sqrt(), (trans / n).sqrt()))
}

/// Consecutive relative motions `P_k⁻¹ P_{k+1}` of an absolute pose sequence.
pub fn relative_motions(absolute: &[Pose]) -> Result<Vec<Pose>> {
    if absolute.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: absolute.len(),
        });
    }
    Ok(absolute.windows(2).map(|w| w[0].inverse() * w[1]).collect())
}

/// Pairs up the relative motions of two synchronized absolute pose streams.
pub fn motion_pairs(eye: &[Pose], hand: &[Pose]) -> Result<Vec<MotionPair>> {
    if eye.len() != hand.len() {
        return Err(Error::invalid(format!(
            "pose streams differ in length ({} vs {})",
            eye.len(),
            hand.len()
        )));
    }
    let a = relative_motions(eye)?;
    let b = relative_motions(hand)?;
    Ok(a.into_iter().zip(b).map(|(a, b)| MotionPair::new(a, b)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::sample_rotation;
    use crate::synth::generate_motion_pairs;
    use alloc::vec;
    use nalgebra::Vector6;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_pose(rng: &mut ChaCha8Rng) -> Pose {
        let t = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        Pose::new(sample_rotation(rng), t)
    }

    fn about(axis: Vector3<f64>, angle: f64, t: Vector3<f64>) -> Pose {
        Pose::new(Rotation::from_axis_angle(&axis, angle).unwrap(), t)
    }

    #[test]
    fn identity_x_from_equal_motions() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let pairs: Vec<MotionPair> = (0..5)
            .map(|_| {
                let m = random_pose(&mut rng);
                MotionPair::new(m, m)
            })
            .collect();
        let r = solve(&pairs).unwrap();
        assert!(r.x.rotation.angle() < 1e-10);
        assert!(r.x.translation.norm() < 1e-10);
    }

    #[test]
    fn three_orthogonal_axes_recover_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let x = random_pose(&mut rng);
        let bs = [
            about(Vector3::x(), 0.8, Vector3::new(0.1, 0.5, -0.3)),
            about(Vector3::y(), -0.6, Vector3::new(-0.4, 0.2, 0.7)),
            about(Vector3::z(), 1.1, Vector3::new(0.3, -0.6, 0.2)),
        ];
        let pairs: Vec<MotionPair> = bs.iter().map(|b| MotionPair::new(x * *b * x.inverse(), *b)).collect();
        let r = solve(&pairs).unwrap();
        let (angle, dist) = r.x.distance(&x);
        assert!(angle < 1e-9 && dist < 1e-9, "{angle} {dist}");
        assert!(r.rotation_residual_rms < 1e-9 && r.translation_residual_rms < 1e-9);
        // each hand axis maps onto its eye axis
        for p in &pairs {
            let mapped = r.x.rotation.rotate(&p.b.rotation.log());
            assert!((mapped - p.a.rotation.log()).norm() < 1e-9);
        }
    }

    #[test]
    fn parallel_axes_are_insufficient() {
        let pairs: Vec<MotionPair> = [0.3, 0.7, -1.0]
            .iter()
            .map(|&a| {
                let m = about(Vector3::z(), a, Vector3::new(a, 1.0, 0.0));
                MotionPair::new(m, m)
            })
            .collect();
        assert!(matches!(solve_rotation(&pairs), Err(Error::InsufficientMotion(_))));
    }

    #[test]
    fn tiny_rotations_are_insufficient() {
        let pairs = vec![
            MotionPair::new(about(Vector3::x(), 1e-4, Vector3::x()), about(Vector3::x(), 1e-4, Vector3::x())),
            MotionPair::new(about(Vector3::y(), 0.5, Vector3::y()), about(Vector3::y(), 0.5, Vector3::y())),
        ];
        assert!(matches!(solve(&pairs), Err(Error::InsufficientMotion(_))));
    }

    #[test]
    fn one_pair_is_too_few() {
        let m = about(Vector3::x(), 0.5, Vector3::zeros());
        assert_eq!(
            solve(&[MotionPair::new(m, m)]).unwrap_err(),
            Error::TooFewSamples { needed: 2, got: 1 }
        );
    }

    #[test]
    fn z_only_rotations_leave_z_unobservable() {
        let pairs: Vec<MotionPair> = [0.3, 0.7, -1.0]
            .iter()
            .map(|&a| {
                let m = about(Vector3::z(), a, Vector3::new(a, 1.0, 0.5));
                MotionPair::new(m, m)
            })
            .collect();
        match solve_translation(&pairs, &Rotation::identity()) {
            Err(Error::UnderConstrained { null_direction }) => {
                let n = Vector3::from(null_direction);
                assert!((n - Vector3::z()).norm() < 1e-9, "{n:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn noise_free_generated_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let x = random_pose(&mut rng);
            let pairs = generate_motion_pairs(&x, 10, &Vector6::zeros(), &mut rng).unwrap();
            let r = solve(&pairs).unwrap();
            let (angle, dist) = r.x.distance(&x);
            assert!(angle < 1e-9 && dist < 1e-9);
            assert!(r.rotation_residual_rms < 1e-9 && r.translation_residual_rms < 1e-9);
            assert!(r.condition_indicator > 0.0);
        }
    }

    #[test]
    fn noisy_pairs_stay_close() {
        let sigma = Vector6::repeat(0.005);
        let mut rot_err = Vec::new();
        let mut trans_err = Vec::new();
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let x = random_pose(&mut rng);
            let pairs = generate_motion_pairs(&x, 20, &sigma, &mut rng).unwrap();
            let (angle, dist) = solve(&pairs).unwrap().x.distance(&x);
            rot_err.push(angle);
            trans_err.push(dist);
        }
        rot_err.sort_by(f64::total_cmp);
        trans_err.sort_by(f64::total_cmp);
        assert!(rot_err[25] < 0.01, "{}", rot_err[25]);
        assert!(trans_err[25] < 0.02, "{}", trans_err[25]);
    }

    #[test]
    fn rotating_the_eye_frame_rotates_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let x = random_pose(&mut rng);
        let pairs = generate_motion_pairs(&x, 8, &Vector6::repeat(0.002), &mut rng).unwrap();
        let c = Pose::from_rotation(sample_rotation(&mut rng));
        let moved: Vec<MotionPair> = pairs
            .iter()
            .map(|p| MotionPair::new(c * p.a * c.inverse(), p.b))
            .collect();
        let x0 = solve(&pairs).unwrap().x;
        let x1 = solve(&moved).unwrap().x;
        let (angle, dist) = x1.distance(&(c * x0));
        assert!(angle < 1e-9 && dist < 1e-9, "{angle} {dist}");
    }

    #[test]
    fn relative_motion_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let p = random_pose(&mut rng);
        for m in relative_motions(&[p, p, p]).unwrap() {
            let (angle, dist) = m.distance(&Pose::identity());
            assert!(angle < 1e-15 && dist < 1e-15);
        }
        let q = random_pose(&mut rng);
        assert_eq!(relative_motions(&[p, q]).unwrap(), vec![p.inverse() * q]);
        let seq: Vec<Pose> = (0..12).map(|_| random_pose(&mut rng)).collect();
        let chained = relative_motions(&seq)
            .unwrap()
            .into_iter()
            .fold(Pose::identity(), |acc, m| acc * m);
        let (angle, dist) = chained.distance(&(seq[0].inverse() * seq[11]));
        assert!(angle < 1e-12 && dist < 1e-12);
        assert!(relative_motions(&[p]).is_err());
    }

    #[test]
    fn pairs_from_absolute_streams() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let x = random_pose(&mut rng);
        // hand poses in a world frame; the eye is rigidly attached at x
        let hand: Vec<Pose> = (0..6).map(|_| random_pose(&mut rng)).collect();
        let eye: Vec<Pose> = hand.iter().map(|h| *h * x.inverse()).collect();
        let pairs = motion_pairs(&eye, &hand).unwrap();
        let r = solve(&pairs).unwrap();
        let (angle, dist) = r.x.distance(&x);
        assert!(angle < 1e-9 && dist < 1e-9);
    }
}
