//! Single-frame energies: weighted 2D reprojection and the quadratic pose,
//! shape and reference-pose priors, all with exact analytic gradients.

use super::{FitConfig, FitError, FitProblem};
use crate::bodykin::{fk_local_with_jacobians, skew, BodyParams};
use crate::camgeom::{project_camera_point, Intrinsics, Mat3, Vec3};

/// Gradient of an energy with respect to the full body parameterization.
///
/// `rb` is the gradient in the left-increment chart of the global
/// orientation: for a perturbation `Rb <- exp([w]x) Rb`, `rb = dE/dw` at
/// `w = 0`. The flat layout is `[theta (3K) | beta (K-1) | rb (3) | tb (3)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrad {
    pub theta: Vec<Vec3>,
    pub beta: Vec<f64>,
    pub rb: Vec3,
    pub tb: Vec3,
}

impl ParamGrad {
    pub fn zeros(joints: usize, bones: usize) -> Self {
        Self {
            theta: vec![Vec3::zeros(); joints],
            beta: vec![0.0; bones],
            rb: Vec3::zeros(),
            tb: Vec3::zeros(),
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.theta.len() + self.beta.len() + 6);
        for t in &self.theta {
            out.extend_from_slice(&[t.x, t.y, t.z]);
        }
        out.extend_from_slice(&self.beta);
        out.extend_from_slice(&[self.rb.x, self.rb.y, self.rb.z]);
        out.extend_from_slice(&[self.tb.x, self.tb.y, self.tb.z]);
        out
    }

    pub fn add_scaled(&mut self, other: &ParamGrad, factor: f64) {
        for (a, b) in self.theta.iter_mut().zip(&other.theta) {
            *a += b * factor;
        }
        for (a, b) in self.beta.iter_mut().zip(&other.beta) {
            *a += b * factor;
        }
        self.rb += other.rb * factor;
        self.tb += other.tb * factor;
    }
}

/// Derivative of the pinhole projection w.r.t. the camera-frame point,
/// transposed and applied to a pixel residual: `J_pi^T r`.
pub(super) fn backproject_residual(cam: &Vec3, k: &Intrinsics, r_u: f64, r_v: f64) -> Vec3 {
    let inv_z = 1.0 / cam.z;
    Vec3::new(
        k.fx * inv_z * r_u,
        k.fy * inv_z * r_v,
        -(k.fx * cam.x * inv_z * inv_z * r_u + k.fy * cam.y * inv_z * inv_z * r_v),
    )
}

/// Weighted squared 2D reprojection error
/// `sum_j | w_j gamma (proj(R^c (Rb chain_j) + tb) - obs_j) |^2`
/// with its exact gradient w.r.t. all body parameters.
///
/// Joints with zero confidence are skipped entirely, including the
/// in-front-of-camera requirement.
pub fn reprojection_energy(
    params: &BodyParams,
    problem: &FitProblem,
    gamma: f64,
) -> Result<(f64, ParamGrad), FitError> {
    problem.check_consistent()?;
    params
        .check_dims(&problem.template)
        .map_err(FitError::Body)?;
    let jac = fk_local_with_jacobians(&problem.template, &params.theta, &params.beta)
        .map_err(FitError::Body)?;
    let k = problem.template.joint_count();
    let nb = problem.template.bone_count();
    let rc = &problem.rc;
    let rc_t = rc.transpose();
    let rb_t = params.rb.transpose();

    let mut energy = 0.0;
    let mut grad = ParamGrad::zeros(k, nb);
    // dE/d(local position) per joint, accumulated before the chain backward.
    let mut g_local = vec![Vec3::zeros(); k];

    for (j, g_slot) in g_local.iter_mut().enumerate() {
        let weight = problem.observed.confidence[j] * gamma;
        let c = weight * weight;
        if c == 0.0 {
            continue;
        }
        let body = params.rb * jac.kin.positions[j];
        let cam = rc * body + params.tb;
        if cam.z <= 0.0 {
            return Err(FitError::BehindCamera {
                joint: j,
                frame: None,
                z: cam.z,
            });
        }
        let px = project_camera_point(&cam, &problem.intrinsics);
        let r_u = px.x - problem.observed.points[j].x;
        let r_v = px.y - problem.observed.points[j].y;
        energy += c * (r_u * r_u + r_v * r_v);

        let g_cam = backproject_residual(&cam, &problem.intrinsics, r_u, r_v) * (2.0 * c);
        grad.tb += g_cam;
        let g_body = rc_t * g_cam;
        // Left-increment of the global orientation moves body points by
        // w x body, so dE/dw = body x g_body.
        grad.rb += body.cross(&g_body);
        *g_slot = rb_t * g_body;
    }

    for (j, g) in g_local.iter().enumerate() {
        if *g == Vec3::zeros() {
            continue;
        }
        for t in 0..3 * k {
            grad.theta[t / 3][t % 3] += jac.dp_dtheta[j][t].dot(g);
        }
        for b in 0..nb {
            grad.beta[b] += jac.dp_dbeta[j][b].dot(g);
        }
    }

    Ok((energy, grad))
}

/// Unweighted prior energies: `|theta|^2`, `|beta|^2`, and `|theta - ref|^2`
/// when a reference pose is given (0 otherwise).
pub fn prior_energies(
    params: &BodyParams,
    _config: &FitConfig,
    reference_theta: Option<&[Vec3]>,
) -> (f64, f64, f64) {
    let e_theta: f64 = params.theta.iter().map(|t| t.norm_squared()).sum();
    let e_beta: f64 = params.beta.iter().map(|b| b * b).sum();
    let e_ref = match reference_theta {
        Some(reference) => params
            .theta
            .iter()
            .zip(reference)
            .map(|(t, r)| (t - r).norm_squared())
            .sum(),
        None => 0.0,
    };
    (e_theta, e_beta, e_ref)
}

/// Gradient contributions of the weighted priors, added onto `grad`.
pub(super) fn add_prior_gradients(
    grad: &mut ParamGrad,
    params: &BodyParams,
    config: &FitConfig,
    reference_theta: Option<&[Vec3]>,
    lambda_ref: f64,
) {
    for (g, t) in grad.theta.iter_mut().zip(&params.theta) {
        *g += t * (2.0 * config.lambda_theta);
    }
    for (g, b) in grad.beta.iter_mut().zip(&params.beta) {
        *g += 2.0 * config.lambda_beta * b;
    }
    if let Some(reference) = reference_theta {
        for ((g, t), r) in grad.theta.iter_mut().zip(&params.theta).zip(reference) {
            *g += (t - r) * (2.0 * lambda_ref);
        }
    }
}

/// Apply a left-increment rotation to `rb` and re-orthonormalize through the
/// polar factor, so repeated updates cannot drift off the rotation manifold.
pub(super) fn apply_rotation_increment(rb: &Mat3, w: &Vec3) -> Mat3 {
    let updated = crate::bodykin::rotation_from_axis_angle(w) * rb;
    nearest_rotation(&updated)
}

pub(super) fn nearest_rotation(m: &Mat3) -> Mat3 {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd of 3x3 always yields u");
    let v_t = svd.v_t.expect("svd of 3x3 always yields v_t");
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        // Flip the axis of the smallest singular value.
        let mut u_fix = u;
        u_fix.column_mut(2).neg_mut();
        r = u_fix * v_t;
    }
    r
}

#[allow(dead_code)]
pub(super) fn skew_of(v: &Vec3) -> Mat3 {
    skew(v)
}
