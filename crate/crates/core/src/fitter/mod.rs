//! Optimization-based body estimation: a two-stage single-frame fit and a
//! three-stage multi-frame fit, both minimizing weighted 2D reprojection
//! error plus quadratic priors with Adam and exact analytic gradients.
//!
//! Fits are deterministic given their inputs: fixed iteration order, no
//! randomness, and a monotone-improvement guard that always returns the
//! best-energy iterate.

mod adam;
mod energy;
mod fdcheck;
mod multiframe;

pub use adam::Adam;
pub use energy::{prior_energies, reprojection_energy, ParamGrad};
pub use fdcheck::{finite_difference_check, max_relative_grad_error};

use crate::bodykin::{BodyParams, BodyParamsJson, JointSet2D, SkeletonTemplate};
use crate::camgeom::{CamGeomError, CameraJson, Intrinsics, Mat3, ResolvedCamera, Vec2, Vec3};
use crate::bodykin::BodyKinError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("joint {joint}{} is behind the camera (camera-frame z = {z:.6})",
            .frame.map(|f| format!(" of frame {f}")).unwrap_or_default())]
    BehindCamera {
        joint: usize,
        frame: Option<usize>,
        z: f64,
    },
    #[error("observed joints ({observed}) do not match the template ({template})")]
    JointCountMismatch { observed: usize, template: usize },
    #[error("a multi-frame problem needs at least one frame")]
    NoFrames,
    #[error("reference pose: expected {expected} joints, got {got}")]
    ReferencePoseMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Body(#[from] BodyKinError),
    #[error(transparent)]
    Camera(#[from] CamGeomError),
}

/// Optimizer and energy weights. The defaults run each stage for 100 Adam
/// steps at step size 1e-2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub steps_per_stage: usize,
    pub step_size: f64,
    /// Weight of the quadratic pose prior `|theta|^2`.
    pub lambda_theta: f64,
    /// Weight of the quadratic shape prior `|beta|^2`.
    pub lambda_beta: f64,
    /// Weight of the target-height term in the multi-frame shape stage.
    pub lambda_height: f64,
    /// Weight of the reference-pose prior in the multi-frame refinement
    /// stages (halved in the final stage).
    pub lambda_ref_pose: f64,
    /// Global joint weight multiplied into every per-joint confidence.
    pub gamma: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            steps_per_stage: 100,
            step_size: 1e-2,
            lambda_theta: 1e-3,
            lambda_beta: 1e-2,
            lambda_height: 1e3,
            lambda_ref_pose: 1e-1,
            gamma: 1.0,
        }
    }
}

/// A single-frame fitting problem: observed 2D joints under a known or
/// assumed camera, an initial body, and the template to pose.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub observed: JointSet2D,
    pub intrinsics: Intrinsics,
    pub rc: Mat3,
    pub template: SkeletonTemplate,
    pub init: BodyParams,
}

impl FitProblem {
    pub fn check_consistent(&self) -> Result<(), FitError> {
        if self.observed.len() != self.template.joint_count() {
            return Err(FitError::JointCountMismatch {
                observed: self.observed.len(),
                template: self.template.joint_count(),
            });
        }
        Ok(())
    }
}

/// One frame of a multi-frame problem: observations plus the current camera
/// orientation `(pitch, roll, yaw)` and camera-frame translation, which act
/// as the starting point for camera refinement.
#[derive(Debug, Clone)]
pub struct FrameObservation {
    pub observed: JointSet2D,
    pub cam_angles: Vec3,
    pub tc: Vec3,
}

/// A body observed from several viewpoints while holding one pose, with a
/// reference pose and a target standing height constraining the fit.
#[derive(Debug, Clone)]
pub struct MultiFrameProblem {
    pub frames: Vec<FrameObservation>,
    pub template: SkeletonTemplate,
    pub intrinsics: Intrinsics,
    pub reference_theta: Vec<Vec3>,
    pub target_height: f64,
}

impl MultiFrameProblem {
    pub fn check_consistent(&self) -> Result<(), FitError> {
        if self.frames.is_empty() {
            return Err(FitError::NoFrames);
        }
        for frame in &self.frames {
            if frame.observed.len() != self.template.joint_count() {
                return Err(FitError::JointCountMismatch {
                    observed: frame.observed.len(),
                    template: self.template.joint_count(),
                });
            }
        }
        if self.reference_theta.len() != self.template.joint_count() {
            return Err(FitError::ReferencePoseMismatch {
                expected: self.template.joint_count(),
                got: self.reference_theta.len(),
            });
        }
        Ok(())
    }
}

/// Unweighted per-term energies plus the weighted total a stage optimized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub reprojection: f64,
    pub theta_prior: f64,
    pub beta_prior: f64,
    pub ref_pose_prior: f64,
    pub height: f64,
    pub total: f64,
}

/// Final energies and the best-so-far trace of one optimization stage. The
/// trace is non-increasing by construction: it tracks the best total energy
/// seen up to each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub name: &'static str,
    pub energies: EnergyBreakdown,
    pub trace: Vec<f64>,
}

/// Refined camera of one frame after a multi-frame fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCamera {
    /// (pitch, roll, yaw) in radians.
    pub angles: Vec3,
    pub tc: Vec3,
}

/// Outcome of a fit: best-energy parameters, per-stage energies and traces,
/// and, for multi-frame fits, the refined per-frame cameras.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: BodyParams,
    pub stages: Vec<StageReport>,
    pub frame_cameras: Vec<FrameCamera>,
}

impl FitResult {
    /// Total energy at the end of the last stage.
    pub fn final_energy(&self) -> f64 {
        self.stages
            .last()
            .map(|s| s.energies.total)
            .unwrap_or(f64::NAN)
    }
}

// ---------------------------------------------------------------------------
// Generic Adam stage driver.

struct StageOutcome {
    energies: EnergyBreakdown,
    trace: Vec<f64>,
}

/// Runs one Adam stage over a cloneable state. `eval` returns the breakdown
/// and a flat gradient; `apply` adds a flat delta onto the state;
/// `halve_translation` rescales only the translation block of a delta, used
/// as the single retry when a step pushes joints behind the camera.
fn optimize_stage<S: Clone>(
    state: &mut S,
    steps: usize,
    step_size: f64,
    eval: impl Fn(&S) -> Result<(EnergyBreakdown, Vec<f64>), FitError>,
    apply: impl Fn(&mut S, &[f64]),
    halve_translation: impl Fn(&[f64]) -> Vec<f64>,
) -> Result<StageOutcome, FitError> {
    let (mut best, mut grad) = eval(state)?;
    let mut best_state = state.clone();
    let mut adam = Adam::new(grad.len(), step_size);
    let mut trace = Vec::with_capacity(steps + 1);
    trace.push(best.total);

    for _ in 0..steps {
        let delta = adam.update(&grad);
        let before = state.clone();
        apply(state, &delta);
        let evaluated = match eval(state) {
            Ok(ok) => ok,
            Err(FitError::BehindCamera { .. }) => {
                // Retry once with the translation component halved.
                *state = before;
                let gentler = halve_translation(&delta);
                apply(state, &gentler);
                eval(state)?
            }
            Err(other) => return Err(other),
        };
        let (breakdown, new_grad) = evaluated;
        if breakdown.total < best.total {
            best = breakdown;
            best_state = state.clone();
        }
        trace.push(best.total);
        grad = new_grad;
    }

    *state = best_state;
    Ok(StageOutcome {
        energies: best,
        trace,
    })
}

// ---------------------------------------------------------------------------
// Single-frame fit.

#[derive(Clone, Copy)]
struct FreeVars {
    theta: bool,
    beta: bool,
    rb: bool,
    tb: bool,
}

fn pack_grad(grad: &ParamGrad, vars: FreeVars) -> Vec<f64> {
    let mut out = Vec::new();
    if vars.theta {
        for t in &grad.theta {
            out.extend_from_slice(&[t.x, t.y, t.z]);
        }
    }
    if vars.beta {
        out.extend_from_slice(&grad.beta);
    }
    if vars.rb {
        out.extend_from_slice(&[grad.rb.x, grad.rb.y, grad.rb.z]);
    }
    if vars.tb {
        out.extend_from_slice(&[grad.tb.x, grad.tb.y, grad.tb.z]);
    }
    out
}

fn apply_delta(params: &mut BodyParams, delta: &[f64], vars: FreeVars) {
    let mut i = 0;
    if vars.theta {
        for t in &mut params.theta {
            t.x += delta[i];
            t.y += delta[i + 1];
            t.z += delta[i + 2];
            i += 3;
        }
    }
    if vars.beta {
        for b in &mut params.beta {
            *b += delta[i];
            i += 1;
        }
    }
    if vars.rb {
        let w = Vec3::new(delta[i], delta[i + 1], delta[i + 2]);
        params.rb = energy::apply_rotation_increment(&params.rb, &w);
        i += 3;
    }
    if vars.tb {
        params.tb.x += delta[i];
        params.tb.y += delta[i + 1];
        params.tb.z += delta[i + 2];
    }
}

fn halve_tb_block(delta: &[f64], vars: FreeVars) -> Vec<f64> {
    let mut out = delta.to_vec();
    if vars.tb {
        let n = out.len();
        for slot in &mut out[n - 3..] {
            *slot *= 0.5;
        }
    }
    out
}

fn single_frame_eval(
    params: &BodyParams,
    problem: &FitProblem,
    config: &FitConfig,
    vars: FreeVars,
) -> Result<(EnergyBreakdown, Vec<f64>), FitError> {
    let (e_j, mut grad) = reprojection_energy(params, problem, config.gamma)?;
    let (e_theta, e_beta, _) = prior_energies(params, config, None);
    energy::add_prior_gradients(&mut grad, params, config, None, 0.0);
    let breakdown = EnergyBreakdown {
        reprojection: e_j,
        theta_prior: e_theta,
        beta_prior: e_beta,
        ref_pose_prior: 0.0,
        height: 0.0,
        total: e_j + config.lambda_theta * e_theta + config.lambda_beta * e_beta,
    };
    Ok((breakdown, pack_grad(&grad, vars)))
}

/// Two-stage single-frame fit: stage 1 optimizes shape and translation with
/// the pose and orientation frozen; stage 2 frees everything. Returns the
/// best-energy iterate; the reported traces never increase.
pub fn fit_single(problem: &FitProblem, config: &FitConfig) -> Result<FitResult, FitError> {
    problem.check_consistent()?;
    let mut params = problem.init.clone();
    let mut stages = Vec::with_capacity(2);

    for (name, vars) in [
        (
            "shape_translation",
            FreeVars {
                theta: false,
                beta: true,
                rb: false,
                tb: true,
            },
        ),
        (
            "full",
            FreeVars {
                theta: true,
                beta: true,
                rb: true,
                tb: true,
            },
        ),
    ] {
        let outcome = optimize_stage(
            &mut params,
            config.steps_per_stage,
            config.step_size,
            |p| single_frame_eval(p, problem, config, vars),
            |p, d| apply_delta(p, d, vars),
            |d| halve_tb_block(d, vars),
        )?;
        stages.push(StageReport {
            name,
            energies: outcome.energies,
            trace: outcome.trace,
        });
    }

    Ok(FitResult {
        params,
        stages,
        frame_cameras: Vec::new(),
    })
}

/// Fit a batch of independent problems. With the `parallel` feature the
/// problems run on rayon; results keep the input order either way.
pub fn fit_batch(problems: &[FitProblem], config: &FitConfig) -> Vec<Result<FitResult, FitError>> {
    #[cfg(feature = "parallel")]
    {
        problems
            .par_iter()
            .map(|p| fit_single(p, config))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        problems.iter().map(|p| fit_single(p, config)).collect()
    }
}

// ---------------------------------------------------------------------------
// Multi-frame fit.

/// Shape-stage energy of a multi-frame problem, with the gradient laid out
/// as `[beta | per frame (pitch, roll, yaw, tc_x, tc_y, tc_z)]`. The pose is
/// pinned to the problem's reference pose.
pub fn multiframe_stage1_energy(
    beta: &[f64],
    cam_angles: &[Vec3],
    tc: &[Vec3],
    problem: &MultiFrameProblem,
    config: &FitConfig,
) -> Result<(f64, Vec<f64>), FitError> {
    let e = multiframe::stage1_energy(beta, cam_angles, tc, problem, config)?;
    Ok((e.total, e.grad))
}

/// Refinement-stage energy with the shape frozen, gradient laid out as
/// `[theta (3K) | per frame (pitch, roll, yaw, tc_x, tc_y, tc_z)]`.
pub fn multiframe_refine_energy(
    theta: &[Vec3],
    beta: &[f64],
    cam_angles: &[Vec3],
    tc: &[Vec3],
    problem: &MultiFrameProblem,
    config: &FitConfig,
    lambda_ref: f64,
) -> Result<(f64, Vec<f64>), FitError> {
    let e = multiframe::refine_energy(theta, beta, cam_angles, tc, problem, config, lambda_ref)?;
    Ok((e.total, e.grad))
}

#[derive(Clone)]
struct MultiState {
    theta: Vec<Vec3>,
    beta: Vec<f64>,
    cam_angles: Vec<Vec3>,
    tc: Vec<Vec3>,
}

fn apply_multi_delta(state: &mut MultiState, delta: &[f64], free_theta: bool) {
    let mut i = 0;
    if free_theta {
        for t in &mut state.theta {
            t.x += delta[i];
            t.y += delta[i + 1];
            t.z += delta[i + 2];
            i += 3;
        }
    } else {
        for b in &mut state.beta {
            *b += delta[i];
            i += 1;
        }
    }
    for f in 0..state.cam_angles.len() {
        state.cam_angles[f].x += delta[i];
        state.cam_angles[f].y += delta[i + 1];
        state.cam_angles[f].z += delta[i + 2];
        state.tc[f].x += delta[i + 3];
        state.tc[f].y += delta[i + 4];
        state.tc[f].z += delta[i + 5];
        i += 6;
    }
}

fn halve_tc_blocks(delta: &[f64], body_dim: usize) -> Vec<f64> {
    let mut out = delta.to_vec();
    let frames = (delta.len() - body_dim) / 6;
    for f in 0..frames {
        let base = body_dim + 6 * f;
        for slot in &mut out[base + 3..base + 6] {
            *slot *= 0.5;
        }
    }
    out
}

/// Three-stage multi-frame fit. Stage 1 solves for shape and per-frame
/// cameras with the pose pinned to the reference; stages 2 and 3 freeze the
/// shape and refine pose plus cameras, the final stage with the
/// reference-pose weight halved.
pub fn fit_multiframe(
    problem: &MultiFrameProblem,
    config: &FitConfig,
) -> Result<FitResult, FitError> {
    problem.check_consistent()?;
    let nb = problem.template.bone_count();
    let nt = 3 * problem.template.joint_count();

    let mut state = MultiState {
        theta: problem.reference_theta.clone(),
        beta: vec![0.0; nb],
        cam_angles: problem.frames.iter().map(|f| f.cam_angles).collect(),
        tc: problem.frames.iter().map(|f| f.tc).collect(),
    };
    let mut stages = Vec::with_capacity(3);

    // Stage 1: shape + cameras.
    let outcome = optimize_stage(
        &mut state,
        config.steps_per_stage,
        config.step_size,
        |s| {
            let e = multiframe::stage1_energy(&s.beta, &s.cam_angles, &s.tc, problem, config)?;
            Ok((
                EnergyBreakdown {
                    reprojection: e.reprojection,
                    theta_prior: 0.0,
                    beta_prior: 0.0,
                    ref_pose_prior: 0.0,
                    height: e.height,
                    total: e.total,
                },
                e.grad,
            ))
        },
        |s, d| apply_multi_delta(s, d, false),
        |d| halve_tc_blocks(d, nb),
    )?;
    stages.push(StageReport {
        name: "shape_cameras",
        energies: outcome.energies,
        trace: outcome.trace,
    });

    // Stages 2 and 3: pose + cameras with frozen shape.
    for (name, lambda_ref) in [
        ("pose_cameras", config.lambda_ref_pose),
        ("pose_cameras_relaxed", config.lambda_ref_pose * 0.5),
    ] {
        let outcome = optimize_stage(
            &mut state,
            config.steps_per_stage,
            config.step_size,
            |s| {
                let e = multiframe::refine_energy(
                    &s.theta,
                    &s.beta,
                    &s.cam_angles,
                    &s.tc,
                    problem,
                    config,
                    lambda_ref,
                )?;
                Ok((
                    EnergyBreakdown {
                        reprojection: e.reprojection,
                        theta_prior: 0.0,
                        beta_prior: 0.0,
                        ref_pose_prior: e.ref_pose,
                        height: 0.0,
                        total: e.total,
                    },
                    e.grad,
                ))
            },
            |s, d| apply_multi_delta(s, d, true),
            |d| halve_tc_blocks(d, nt),
        )?;
        stages.push(StageReport {
            name,
            energies: outcome.energies,
            trace: outcome.trace,
        });
    }

    Ok(FitResult {
        params: BodyParams {
            theta: state.theta,
            beta: state.beta,
            rb: Mat3::identity(),
            tb: Vec3::zeros(),
        },
        stages,
        frame_cameras: state
            .cam_angles
            .iter()
            .zip(&state.tc)
            .map(|(angles, tc)| FrameCamera {
                angles: *angles,
                tc: *tc,
            })
            .collect(),
    })
}

// ---------------------------------------------------------------------------
// Initialization heuristic and JSON schemas.

/// Camera-aware translation initialization: the body depth follows from the
/// pixel height of the observed keypoints by similar triangles, and the
/// in-plane translation back-projects the keypoint centroid to that depth.
/// Pose and shape start at rest, orientation at identity.
pub fn heuristic_init(
    template: &SkeletonTemplate,
    observed: &JointSet2D,
    intrinsics: &Intrinsics,
) -> BodyParams {
    let mut params = BodyParams::rest(template);
    let visible: Vec<&Vec2> = observed
        .points
        .iter()
        .zip(&observed.confidence)
        .filter(|(_, w)| **w > 0.0)
        .map(|(p, _)| p)
        .collect();
    if visible.is_empty() {
        params.tb = Vec3::new(0.0, 0.0, 5.0);
        return params;
    }
    let (mut min_v, mut max_v) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut centroid = Vec2::zeros();
    for p in &visible {
        min_v = min_v.min(p.y);
        max_v = max_v.max(p.y);
        centroid += **p;
    }
    centroid /= visible.len() as f64;
    let height_px = (max_v - min_v).max(1.0);
    let height_m = crate::bodykin::body_height(template, &vec![0.0; template.bone_count()])
        .expect("rest shape is valid");
    let depth = intrinsics.fy * height_m / height_px;
    params.tb = Vec3::new(
        (centroid.x - intrinsics.ox) / intrinsics.fx * depth,
        (centroid.y - intrinsics.oy) / intrinsics.fy * depth,
        depth,
    );
    params
}

/// Single-frame problem as stored in JSON: a camera object, per-joint
/// keypoints `[u, v, confidence]`, and an optional initial body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitProblemJson {
    pub camera: CameraJson,
    pub keypoints: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<BodyParamsJson>,
}

impl FitProblemJson {
    pub fn resolve(
        &self,
    ) -> Result<(JointSet2D, ResolvedCamera, Option<BodyParams>), Box<dyn std::error::Error>> {
        let camera = self.camera.resolve()?;
        let points = self
            .keypoints
            .iter()
            .map(|k| Vec2::new(k[0], k[1]))
            .collect();
        let confidence = self.keypoints.iter().map(|k| k[2]).collect();
        let observed = JointSet2D::new(points, confidence)?;
        let init = match &self.init {
            Some(json) => Some(json.to_params()?),
            None => None,
        };
        Ok((observed, camera, init))
    }

    pub fn from_problem(problem: &FitProblem, camera: CameraJson) -> Self {
        Self {
            camera,
            keypoints: problem
                .observed
                .points
                .iter()
                .zip(&problem.observed.confidence)
                .map(|(p, w)| [p.x, p.y, *w])
                .collect(),
            init: Some(BodyParamsJson::from_params(&problem.init)),
        }
    }
}

/// One frame of a multi-frame problem in JSON: camera angles in degrees
/// `(pitch, roll, yaw)`, camera-frame translation, and keypoints.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameJson {
    pub angles_deg: [f64; 3],
    pub tc: [f64; 3],
    pub keypoints: Vec<[f64; 3]>,
}

/// Multi-frame problem as stored in JSON. The camera object provides the
/// shared intrinsics; per-frame extrinsics live in `frames`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiProblemJson {
    pub camera: CameraJson,
    pub frames: Vec<FrameJson>,
    /// Reference pose, flat `3K` axis-angle components.
    pub reference_theta: Vec<f64>,
    pub target_height: f64,
}

impl MultiProblemJson {
    pub fn resolve(
        &self,
        template: &SkeletonTemplate,
    ) -> Result<MultiFrameProblem, Box<dyn std::error::Error>> {
        let camera = self.camera.resolve()?;
        if self.reference_theta.len() != 3 * template.joint_count() {
            return Err(format!(
                "reference_theta must have {} components, got {}",
                3 * template.joint_count(),
                self.reference_theta.len()
            )
            .into());
        }
        let reference_theta = self
            .reference_theta
            .chunks_exact(3)
            .map(|c| Vec3::new(c[0], c[1], c[2]))
            .collect();
        let frames = self
            .frames
            .iter()
            .map(|f| -> Result<FrameObservation, Box<dyn std::error::Error>> {
                let points = f.keypoints.iter().map(|k| Vec2::new(k[0], k[1])).collect();
                let confidence = f.keypoints.iter().map(|k| k[2]).collect();
                Ok(FrameObservation {
                    observed: JointSet2D::new(points, confidence)?,
                    cam_angles: Vec3::new(
                        f.angles_deg[0].to_radians(),
                        f.angles_deg[1].to_radians(),
                        f.angles_deg[2].to_radians(),
                    ),
                    tc: Vec3::new(f.tc[0], f.tc[1], f.tc[2]),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MultiFrameProblem {
            frames,
            template: template.clone(),
            intrinsics: camera.intrinsics,
            reference_theta,
            target_height: self.target_height,
        })
    }
}

/// Serialized fit outcome, including per-stage energy arrays for regression
/// testing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResultJson {
    pub params: BodyParamsJson,
    pub stages: Vec<StageReportJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frame_cameras: Vec<FrameCameraJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageReportJson {
    pub name: String,
    pub energies: EnergyBreakdown,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameCameraJson {
    pub angles_deg: [f64; 3],
    pub tc: [f64; 3],
}

impl FitResultJson {
    pub fn from_result(result: &FitResult) -> Self {
        Self {
            params: BodyParamsJson::from_params(&result.params),
            stages: result
                .stages
                .iter()
                .map(|s| StageReportJson {
                    name: s.name.to_string(),
                    energies: s.energies,
                    trace: s.trace.clone(),
                })
                .collect(),
            frame_cameras: result
                .frame_cameras
                .iter()
                .map(|c| FrameCameraJson {
                    angles_deg: [
                        c.angles.x.to_degrees(),
                        c.angles.y.to_degrees(),
                        c.angles.z.to_degrees(),
                    ],
                    tc: [c.tc.x, c.tc.y, c.tc.z],
                })
                .collect(),
        }
    }
}
