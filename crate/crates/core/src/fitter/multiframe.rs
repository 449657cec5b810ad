//! Multi-frame energies: one body observed in several frames, each with its
//! own camera orientation (pitch, roll, yaw) and camera-frame translation.
//! The body itself carries no global orientation or translation here; all
//! placement freedom lives in the per-frame cameras.

use super::energy::backproject_residual;
use super::{FitConfig, FitError, MultiFrameProblem};
use crate::bodykin::{body_height_with_grad, fk_local_with_jacobians, LocalKinematicsJac};
use crate::camgeom::{project_camera_point, rot_x, rot_y, rot_z, Mat3, Vec3};

/// Derivatives of `R = R_x(pitch) R_z(roll) R_y(yaw)` w.r.t. each angle.
fn rotation_and_derivatives(pitch: f64, roll: f64, yaw: f64) -> (Mat3, [Mat3; 3]) {
    let rx = rot_x(pitch);
    let ry = rot_y(yaw);
    let rz = rot_z(roll);
    let (sp, cp) = pitch.sin_cos();
    let (sr, cr) = roll.sin_cos();
    let (sy, cy) = yaw.sin_cos();
    let drx = Mat3::new(0.0, 0.0, 0.0, 0.0, -sp, -cp, 0.0, cp, -sp);
    let drz = Mat3::new(-sr, -cr, 0.0, cr, -sr, 0.0, 0.0, 0.0, 0.0);
    let dry = Mat3::new(-sy, 0.0, cy, 0.0, 0.0, 0.0, -cy, 0.0, -sy);
    let r = rx * rz * ry;
    (r, [drx * rz * ry, rx * drz * ry, rx * rz * dry])
}

/// Per-frame reprojection pass. Accumulates dE/d(local joint position) into
/// `g_local` and returns the frame energy plus camera gradients.
#[allow(clippy::too_many_arguments)]
fn frame_reprojection(
    jac: &LocalKinematicsJac,
    frame_index: usize,
    problem: &MultiFrameProblem,
    angles: &Vec3,
    tc: &Vec3,
    gamma: f64,
    g_local: &mut [Vec3],
) -> Result<(f64, Vec3, Vec3), FitError> {
    let obs = &problem.frames[frame_index].observed;
    let (r, dr) = rotation_and_derivatives(angles.x, angles.y, angles.z);
    let r_t = r.transpose();
    let mut energy = 0.0;
    let mut g_angles = Vec3::zeros();
    let mut g_tc = Vec3::zeros();
    for (j, p) in jac.kin.positions.iter().enumerate() {
        let weight = obs.confidence[j] * gamma;
        let c = weight * weight;
        if c == 0.0 {
            continue;
        }
        let cam = r * p + tc;
        if cam.z <= 0.0 {
            return Err(FitError::BehindCamera {
                joint: j,
                frame: Some(frame_index),
                z: cam.z,
            });
        }
        let px = project_camera_point(&cam, &problem.intrinsics);
        let r_u = px.x - obs.points[j].x;
        let r_v = px.y - obs.points[j].y;
        energy += c * (r_u * r_u + r_v * r_v);

        let g_cam = backproject_residual(&cam, &problem.intrinsics, r_u, r_v) * (2.0 * c);
        g_tc += g_cam;
        for (axis, d) in dr.iter().enumerate() {
            g_angles[axis] += g_cam.dot(&(d * p));
        }
        g_local[j] += r_t * g_cam;
    }
    Ok((energy, g_angles, g_tc))
}

pub(super) struct MultiEnergy {
    pub reprojection: f64,
    /// Unweighted height term `(height(beta) - target)^2`; zero in the
    /// refinement stages.
    pub height: f64,
    /// Unweighted reference-pose term; zero in the shape stage.
    pub ref_pose: f64,
    pub total: f64,
    pub grad: Vec<f64>,
}

/// Shape-stage energy: the pose is pinned to the reference, and the free
/// variables are `[beta | per frame (pitch, roll, yaw, tc_xyz)]`.
/// `total = lambda_height * (height(beta) - target)^2 + sum_i E_frame_i`.
pub(super) fn stage1_energy(
    beta: &[f64],
    cam_angles: &[Vec3],
    tc: &[Vec3],
    problem: &MultiFrameProblem,
    config: &FitConfig,
) -> Result<MultiEnergy, FitError> {
    problem.check_consistent()?;
    let nb = problem.template.bone_count();
    let jac = fk_local_with_jacobians(&problem.template, &problem.reference_theta, beta)
        .map_err(FitError::Body)?;
    let k = problem.template.joint_count();
    let f = problem.frames.len();

    let mut g_local = vec![Vec3::zeros(); k];
    let mut reprojection = 0.0;
    let mut grad = vec![0.0; nb + 6 * f];
    for i in 0..f {
        let (e, g_angles, g_tc) =
            frame_reprojection(&jac, i, problem, &cam_angles[i], &tc[i], config.gamma, &mut g_local)?;
        reprojection += e;
        let base = nb + 6 * i;
        grad[base] = g_angles.x;
        grad[base + 1] = g_angles.y;
        grad[base + 2] = g_angles.z;
        grad[base + 3] = g_tc.x;
        grad[base + 4] = g_tc.y;
        grad[base + 5] = g_tc.z;
    }
    for (j, g) in g_local.iter().enumerate() {
        if *g == Vec3::zeros() {
            continue;
        }
        for (b, slot) in grad.iter_mut().enumerate().take(nb) {
            *slot += jac.dp_dbeta[j][b].dot(g);
        }
    }

    let (h, dh) = body_height_with_grad(&problem.template, beta).map_err(FitError::Body)?;
    let dh_err = h - problem.target_height;
    let height = dh_err * dh_err;
    for (b, slot) in grad.iter_mut().enumerate().take(nb) {
        *slot += config.lambda_height * 2.0 * dh_err * dh[b];
    }

    Ok(MultiEnergy {
        reprojection,
        height,
        ref_pose: 0.0,
        total: config.lambda_height * height + reprojection,
        grad,
    })
}

/// Refinement-stage energy: the shape is frozen and the free variables are
/// `[theta (3K) | per frame (pitch, roll, yaw, tc_xyz)]`.
/// `total = lambda_ref * |theta - reference|^2 + sum_i E_frame_i`.
pub(super) fn refine_energy(
    theta: &[Vec3],
    beta: &[f64],
    cam_angles: &[Vec3],
    tc: &[Vec3],
    problem: &MultiFrameProblem,
    config: &FitConfig,
    lambda_ref: f64,
) -> Result<MultiEnergy, FitError> {
    problem.check_consistent()?;
    let jac =
        fk_local_with_jacobians(&problem.template, theta, beta).map_err(FitError::Body)?;
    let k = problem.template.joint_count();
    let nt = 3 * k;
    let f = problem.frames.len();

    let mut g_local = vec![Vec3::zeros(); k];
    let mut reprojection = 0.0;
    let mut grad = vec![0.0; nt + 6 * f];
    for i in 0..f {
        let (e, g_angles, g_tc) =
            frame_reprojection(&jac, i, problem, &cam_angles[i], &tc[i], config.gamma, &mut g_local)?;
        reprojection += e;
        let base = nt + 6 * i;
        grad[base] = g_angles.x;
        grad[base + 1] = g_angles.y;
        grad[base + 2] = g_angles.z;
        grad[base + 3] = g_tc.x;
        grad[base + 4] = g_tc.y;
        grad[base + 5] = g_tc.z;
    }
    for (j, g) in g_local.iter().enumerate() {
        if *g == Vec3::zeros() {
            continue;
        }
        for (t, slot) in grad.iter_mut().enumerate().take(nt) {
            *slot += jac.dp_dtheta[j][t].dot(g);
        }
    }

    let mut ref_pose = 0.0;
    for (jj, (t, r)) in theta.iter().zip(&problem.reference_theta).enumerate() {
        let d = t - r;
        ref_pose += d.norm_squared();
        for i in 0..3 {
            grad[3 * jj + i] += 2.0 * lambda_ref * d[i];
        }
    }

    Ok(MultiEnergy {
        reprojection,
        height: 0.0,
        ref_pose,
        total: lambda_ref * ref_pose + reprojection,
        grad,
    })
}
