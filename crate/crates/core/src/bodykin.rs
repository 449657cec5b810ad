//! A simplified parametric articulated skeleton standing in for a full body
//! mesh model: a fixed kinematic tree posed by per-joint axis-angle rotations
//! (exponential map / Rodrigues), shaped by per-bone log-scales, and placed
//! by a global orientation and translation.

use crate::camgeom::{Mat3, Vec2, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BodyKinError {
    #[error("{what}: expected {expected} entries, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid skeleton template: {0}")]
    InvalidTemplate(String),
    #[error("invalid body parameters: {0}")]
    InvalidParams(String),
}

/// Rotation matrix for an axis-angle vector via the Rodrigues formula,
/// with a series fallback near zero.
pub fn rotation_from_axis_angle(aa: &Vec3) -> Mat3 {
    let theta2 = aa.norm_squared();
    let k = skew(aa);
    if theta2 < 1e-16 {
        // sin(t)/t ~ 1 - t^2/6, (1-cos(t))/t^2 ~ 1/2 - t^2/24
        return Mat3::identity() + k * (1.0 - theta2 / 6.0) + k * k * (0.5 - theta2 / 24.0);
    }
    let theta = theta2.sqrt();
    Mat3::identity() + k * (theta.sin() / theta) + k * k * ((1.0 - theta.cos()) / theta2)
}

/// Left Jacobian of SO(3): `R(aa + d) ~ exp([J_l(aa) d]x) R(aa)`, so the
/// exact derivative of the exponential map is `dR/daa_i = [J_l e_i]x R`.
pub fn so3_left_jacobian(aa: &Vec3) -> Mat3 {
    let theta2 = aa.norm_squared();
    let k = skew(aa);
    if theta2 < 1e-16 {
        return Mat3::identity() + k * (0.5 - theta2 / 24.0) + k * k * (1.0 / 6.0 - theta2 / 120.0);
    }
    let theta = theta2.sqrt();
    let a = (1.0 - theta.cos()) / theta2;
    let b = (theta - theta.sin()) / (theta2 * theta);
    Mat3::identity() + k * a + k * k * b
}

pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Fixed kinematic tree: per-joint parent (root has none) and rest offsets
/// from the parent, in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonTemplate {
    parents: Vec<Option<usize>>,
    rest_offsets: Vec<Vec3>,
    /// Joint evaluation order with parents before children.
    topo_order: Vec<usize>,
}

/// Joint names of the default 17-joint template, in index order.
pub const JOINT_NAMES: [&str; 17] = [
    "pelvis",
    "spine",
    "thorax",
    "neck",
    "head",
    "left_hip",
    "left_knee",
    "left_ankle",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
];

impl SkeletonTemplate {
    /// Validates that the parent indices form a tree rooted at joint 0 and
    /// that the root rest offset is the origin.
    pub fn new(parents: Vec<Option<usize>>, rest_offsets: Vec<Vec3>) -> Result<Self, BodyKinError> {
        let k = parents.len();
        if k == 0 {
            return Err(BodyKinError::InvalidTemplate("no joints".into()));
        }
        if rest_offsets.len() != k {
            return Err(BodyKinError::DimensionMismatch {
                what: "rest offsets",
                expected: k,
                got: rest_offsets.len(),
            });
        }
        if parents[0].is_some() {
            return Err(BodyKinError::InvalidTemplate(
                "joint 0 must be the root (no parent)".into(),
            ));
        }
        if rest_offsets[0] != Vec3::zeros() {
            return Err(BodyKinError::InvalidTemplate(
                "root rest offset must be the origin".into(),
            ));
        }
        for (j, p) in parents.iter().enumerate().skip(1) {
            match p {
                None => {
                    return Err(BodyKinError::InvalidTemplate(format!(
                        "joint {j} is a second root; only joint 0 may have no parent"
                    )))
                }
                Some(pi) if *pi >= k => {
                    return Err(BodyKinError::InvalidTemplate(format!(
                        "joint {j} has out-of-range parent {pi}"
                    )))
                }
                _ => {}
            }
        }
        // Children-of lists give a topological order and detect cycles.
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
        for (j, p) in parents.iter().enumerate().skip(1) {
            children[p.unwrap()].push(j);
        }
        let mut topo_order = Vec::with_capacity(k);
        let mut stack = vec![0usize];
        while let Some(j) = stack.pop() {
            topo_order.push(j);
            for &c in children[j].iter().rev() {
                stack.push(c);
            }
        }
        if topo_order.len() != k {
            return Err(BodyKinError::InvalidTemplate(
                "parent indices contain a cycle or a disconnected joint".into(),
            ));
        }
        Ok(Self {
            parents,
            rest_offsets,
            topo_order,
        })
    }

    pub fn joint_count(&self) -> usize {
        self.parents.len()
    }

    /// Number of bones, i.e. shape parameters: one per non-root joint.
    pub fn bone_count(&self) -> usize {
        self.parents.len() - 1
    }

    pub fn parent(&self, joint: usize) -> Option<usize> {
        self.parents[joint]
    }

    pub fn rest_offset(&self, joint: usize) -> &Vec3 {
        &self.rest_offsets[joint]
    }

    /// Rest-pose joint positions (theta = 0, beta = 0, identity orientation).
    pub fn rest_joints(&self) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); self.joint_count()];
        for &j in &self.topo_order {
            if let Some(p) = self.parents[j] {
                out[j] = out[p] + self.rest_offsets[j];
            }
        }
        out
    }

    pub fn to_json(&self) -> TemplateJson {
        TemplateJson {
            parents: self
                .parents
                .iter()
                .map(|p| p.map(|x| x as i64).unwrap_or(-1))
                .collect(),
            offsets: self.rest_offsets.iter().map(|o| [o.x, o.y, o.z]).collect(),
        }
    }
}

/// The default 17-joint human-like tree: pelvis root with a spine chain up
/// to the head, hip-knee-ankle legs and shoulder-elbow-wrist arms hanging
/// off the thorax. Rest pose is a T-pose, 1.70 m tall, facing +z with +y up.
pub fn default_template() -> SkeletonTemplate {
    let parents: Vec<Option<usize>> = vec![
        None,     // pelvis
        Some(0),  // spine
        Some(1),  // thorax
        Some(2),  // neck
        Some(3),  // head
        Some(0),  // left_hip
        Some(5),  // left_knee
        Some(6),  // left_ankle
        Some(0),  // right_hip
        Some(8),  // right_knee
        Some(9),  // right_ankle
        Some(2),  // left_shoulder
        Some(11), // left_elbow
        Some(12), // left_wrist
        Some(2),  // right_shoulder
        Some(14), // right_elbow
        Some(15), // right_wrist
    ];
    let offsets = vec![
        Vec3::new(0.0, 0.0, 0.0),
        Vec3::new(0.0, 0.20, 0.0),
        Vec3::new(0.0, 0.30, 0.0),
        Vec3::new(0.0, 0.12, 0.0),
        Vec3::new(0.0, 0.13, 0.0),
        Vec3::new(0.10, -0.05, 0.0),
        Vec3::new(0.0, -0.43, 0.0),
        Vec3::new(0.0, -0.47, 0.0),
        Vec3::new(-0.10, -0.05, 0.0),
        Vec3::new(0.0, -0.43, 0.0),
        Vec3::new(0.0, -0.47, 0.0),
        Vec3::new(0.18, 0.0, 0.0),
        Vec3::new(0.28, 0.0, 0.0),
        Vec3::new(0.24, 0.0, 0.0),
        Vec3::new(-0.18, 0.0, 0.0),
        Vec3::new(-0.28, 0.0, 0.0),
        Vec3::new(-0.24, 0.0, 0.0),
    ];
    SkeletonTemplate::new(parents, offsets).expect("default template is valid")
}

/// Pose, shape and placement of a body.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyParams {
    /// Per-joint axis-angle rotations, radians.
    pub theta: Vec<Vec3>,
    /// Per-bone log-scales; zero is the rest body.
    pub beta: Vec<f64>,
    /// Global orientation.
    pub rb: Mat3,
    /// Translation. In fitting contexts this is expressed in the camera
    /// frame (the translation applied after the camera rotation).
    pub tb: Vec3,
}

impl BodyParams {
    /// Rest parameters for a template: zero pose and shape, identity
    /// orientation, zero translation.
    pub fn rest(template: &SkeletonTemplate) -> Self {
        Self {
            theta: vec![Vec3::zeros(); template.joint_count()],
            beta: vec![0.0; template.bone_count()],
            rb: Mat3::identity(),
            tb: Vec3::zeros(),
        }
    }

    pub fn check_dims(&self, template: &SkeletonTemplate) -> Result<(), BodyKinError> {
        if self.theta.len() != template.joint_count() {
            return Err(BodyKinError::DimensionMismatch {
                what: "theta",
                expected: template.joint_count(),
                got: self.theta.len(),
            });
        }
        if self.beta.len() != template.bone_count() {
            return Err(BodyKinError::DimensionMismatch {
                what: "beta",
                expected: template.bone_count(),
                got: self.beta.len(),
            });
        }
        Ok(())
    }
}

/// 3D joint positions, meters.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSet3D {
    pub points: Vec<Vec3>,
}

/// Observed 2D joints in pixels with per-joint confidences in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSet2D {
    pub points: Vec<Vec2>,
    pub confidence: Vec<f64>,
}

impl JointSet2D {
    pub fn new(points: Vec<Vec2>, confidence: Vec<f64>) -> Result<Self, BodyKinError> {
        if points.len() != confidence.len() {
            return Err(BodyKinError::DimensionMismatch {
                what: "confidence",
                expected: points.len(),
                got: confidence.len(),
            });
        }
        if confidence.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(BodyKinError::InvalidParams(
                "confidences must lie in [0, 1]".into(),
            ));
        }
        if points.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(BodyKinError::InvalidParams(
                "2D joints must be finite".into(),
            ));
        }
        Ok(Self { points, confidence })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Body-local kinematics: joint positions and accumulated rotations of the
/// posed chain, before the global orientation and translation are applied.
#[derive(Debug, Clone)]
pub struct LocalKinematics {
    pub positions: Vec<Vec3>,
    pub rotations: Vec<Mat3>,
}

/// Evaluate the posed chain: each bone offset is scaled by `exp(beta)` and
/// rotated by the accumulated rotations of all ancestor joints.
pub fn fk_local(
    template: &SkeletonTemplate,
    theta: &[Vec3],
    beta: &[f64],
) -> Result<LocalKinematics, BodyKinError> {
    check_theta_beta(template, theta, beta)?;
    let k = template.joint_count();
    let mut positions = vec![Vec3::zeros(); k];
    let mut rotations = vec![Mat3::identity(); k];
    for &j in &template.topo_order {
        match template.parents[j] {
            None => {
                rotations[j] = rotation_from_axis_angle(&theta[j]);
            }
            Some(p) => {
                let off = template.rest_offsets[j] * beta[j - 1].exp();
                positions[j] = positions[p] + rotations[p] * off;
                rotations[j] = rotations[p] * rotation_from_axis_angle(&theta[j]);
            }
        }
    }
    Ok(LocalKinematics {
        positions,
        rotations,
    })
}

/// Forward kinematics: `joint_j = rb * chain_j(theta, beta) + tb`.
/// The root sits exactly at `tb`.
pub fn forward_kinematics(
    template: &SkeletonTemplate,
    params: &BodyParams,
) -> Result<JointSet3D, BodyKinError> {
    let local = fk_local(template, &params.theta, &params.beta)?;
    Ok(JointSet3D {
        points: local
            .positions
            .iter()
            .map(|p| params.rb * p + params.tb)
            .collect(),
    })
}

/// [`fk_local`] plus exact derivatives of every joint position with respect
/// to all pose and shape parameters.
///
/// Layouts: `dp_dtheta[j][3 * k + i]` is the derivative of joint `j` w.r.t.
/// component `i` of `theta[k]`; `dp_dbeta[j][b]` w.r.t. `beta[b]`.
pub struct LocalKinematicsJac {
    pub kin: LocalKinematics,
    pub dp_dtheta: Vec<Vec<Vec3>>,
    pub dp_dbeta: Vec<Vec<Vec3>>,
}

// Parent rows are read while child rows are written and parent indices may
// exceed child indices, so plain index loops are the clearest borrow-safe
// form here.
#[allow(clippy::needless_range_loop)]
pub fn fk_local_with_jacobians(
    template: &SkeletonTemplate,
    theta: &[Vec3],
    beta: &[f64],
) -> Result<LocalKinematicsJac, BodyKinError> {
    check_theta_beta(template, theta, beta)?;
    let k = template.joint_count();
    let nb = template.bone_count();
    let nt = 3 * k;

    let mut positions = vec![Vec3::zeros(); k];
    let mut rotations = vec![Mat3::identity(); k];
    // dQ[j] laid out as [theta component] -> Mat3.
    let mut drot: Vec<Vec<Mat3>> = vec![vec![Mat3::zeros(); nt]; k];
    let mut dp_dtheta: Vec<Vec<Vec3>> = vec![vec![Vec3::zeros(); nt]; k];
    let mut dp_dbeta: Vec<Vec<Vec3>> = vec![vec![Vec3::zeros(); nb]; k];

    for &j in &template.topo_order {
        let local_rot = rotation_from_axis_angle(&theta[j]);
        let jl = so3_left_jacobian(&theta[j]);
        match template.parents[j] {
            None => {
                rotations[j] = local_rot;
                for i in 0..3 {
                    // dR/dtheta_i = [J_l e_i]x R
                    drot[j][3 * j + i] = skew(&jl.column(i).into()) * local_rot;
                }
            }
            Some(p) => {
                let scale = beta[j - 1].exp();
                let off = template.rest_offsets[j] * scale;
                positions[j] = positions[p] + rotations[p] * off;
                rotations[j] = rotations[p] * local_rot;

                // Ancestor theta components propagate; only ancestors of the
                // parent can have non-zero dQ[p], so iterate all and rely on
                // zero blocks staying zero.
                for t in 0..nt {
                    let dqp = &drot[p][t];
                    dp_dtheta[j][t] = dp_dtheta[p][t] + dqp * off;
                    drot[j][t] = dqp * local_rot;
                }
                for i in 0..3 {
                    drot[j][3 * j + i] += rotations[p] * (skew(&jl.column(i).into()) * local_rot);
                }
                for b in 0..nb {
                    dp_dbeta[j][b] = dp_dbeta[p][b];
                }
                dp_dbeta[j][j - 1] += rotations[p] * off; // d(exp(beta) off)/dbeta = exp(beta) off
            }
        }
    }
    Ok(LocalKinematicsJac {
        kin: LocalKinematics {
            positions,
            rotations,
        },
        dp_dtheta,
        dp_dbeta,
    })
}

fn check_theta_beta(
    template: &SkeletonTemplate,
    theta: &[Vec3],
    beta: &[f64],
) -> Result<(), BodyKinError> {
    if theta.len() != template.joint_count() {
        return Err(BodyKinError::DimensionMismatch {
            what: "theta",
            expected: template.joint_count(),
            got: theta.len(),
        });
    }
    if beta.len() != template.bone_count() {
        return Err(BodyKinError::DimensionMismatch {
            what: "beta",
            expected: template.bone_count(),
            got: beta.len(),
        });
    }
    Ok(())
}

/// Standing height of the shaped body: vertical extent of the rest pose
/// under the given shape.
pub fn body_height(template: &SkeletonTemplate, beta: &[f64]) -> Result<f64, BodyKinError> {
    let zero = vec![Vec3::zeros(); template.joint_count()];
    let local = fk_local(template, &zero, beta)?;
    let (min, max) = y_extent(&local.positions);
    Ok(max - min)
}

/// [`body_height`] plus its gradient w.r.t. beta (subgradient at ties of the
/// extremal joints).
pub fn body_height_with_grad(
    template: &SkeletonTemplate,
    beta: &[f64],
) -> Result<(f64, Vec<f64>), BodyKinError> {
    let zero = vec![Vec3::zeros(); template.joint_count()];
    let jac = fk_local_with_jacobians(template, &zero, beta)?;
    let positions = &jac.kin.positions;
    let jmax = argmax_y(positions);
    let jmin = argmin_y(positions);
    let grad = (0..template.bone_count())
        .map(|b| jac.dp_dbeta[jmax][b].y - jac.dp_dbeta[jmin][b].y)
        .collect();
    let (min, max) = y_extent(positions);
    Ok((max - min, grad))
}

fn y_extent(points: &[Vec3]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for p in points {
        min = min.min(p.y);
        max = max.max(p.y);
    }
    (min, max)
}

fn argmax_y(points: &[Vec3]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.y > points[best].y {
            best = i;
        }
    }
    best
}

fn argmin_y(points: &[Vec3]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.y < points[best].y {
            best = i;
        }
    }
    best
}

/// Template as stored in JSON: `{"parents": [...], "offsets": [[x,y,z],...]}`
/// with `-1` marking the root.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateJson {
    pub parents: Vec<i64>,
    pub offsets: Vec<[f64; 3]>,
}

impl TemplateJson {
    pub fn to_template(&self) -> Result<SkeletonTemplate, BodyKinError> {
        let parents = self
            .parents
            .iter()
            .map(|&p| if p < 0 { None } else { Some(p as usize) })
            .collect();
        let offsets = self
            .offsets
            .iter()
            .map(|o| Vec3::new(o[0], o[1], o[2]))
            .collect();
        SkeletonTemplate::new(parents, offsets)
    }
}

/// Body parameters as stored in JSON:
/// `{"theta": [flat 3K], "beta": [...], "rb_angles_deg": [pitch, roll, yaw], "tb": [x,y,z]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BodyParamsJson {
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub rb_angles_deg: [f64; 3],
    pub tb: [f64; 3],
}

impl BodyParamsJson {
    pub fn to_params(&self) -> Result<BodyParams, BodyKinError> {
        if !self.theta.len().is_multiple_of(3) {
            return Err(BodyKinError::InvalidParams(format!(
                "theta length {} is not a multiple of 3",
                self.theta.len()
            )));
        }
        if self
            .theta
            .iter()
            .chain(self.beta.iter())
            .any(|x| !x.is_finite())
        {
            return Err(BodyKinError::InvalidParams(
                "theta and beta must be finite".into(),
            ));
        }
        let theta = self
            .theta
            .chunks_exact(3)
            .map(|c| Vec3::new(c[0], c[1], c[2]))
            .collect();
        let angles = crate::camgeom::CameraAngles::from_degrees(
            self.rb_angles_deg[0],
            self.rb_angles_deg[1],
            self.rb_angles_deg[2],
            90.0, // placeholder vfov; only the orientation is used
        )
        .map_err(|e| BodyKinError::InvalidParams(e.to_string()))?;
        Ok(BodyParams {
            theta,
            beta: self.beta.clone(),
            rb: crate::camgeom::angles_to_rotation(&angles),
            tb: Vec3::new(self.tb[0], self.tb[1], self.tb[2]),
        })
    }

    pub fn from_params(params: &BodyParams) -> Self {
        let rec = crate::camgeom::rotation_to_angles(&params.rb)
            .expect("body orientation is a rotation");
        Self {
            theta: params
                .theta
                .iter()
                .flat_map(|v| [v.x, v.y, v.z])
                .collect(),
            beta: params.beta.clone(),
            rb_angles_deg: [
                rec.pitch.to_degrees(),
                rec.roll.to_degrees(),
                rec.yaw.to_degrees(),
            ],
            tb: [params.tb.x, params.tb.y, params.tb.z],
        }
    }
}
