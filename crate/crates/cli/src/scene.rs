//! Synthetic fitting experiments: random bodies observed under cameras drawn
//! from the synthetic-scene distributions, refit under different camera
//! assumptions and scored with world-frame metrics. Shared by the
//! `sensitivity` command and the acceptance suite.

use crate::CmdError;
use cambody::bodykin::{
    default_template, fk_local, rotation_from_axis_angle, BodyParams, JointSet2D, SkeletonTemplate,
};
use cambody::camgeom::{
    angles_to_rotation, CameraAngles, ImageFrame, Intrinsics, Mat3, Vec3,
};
use cambody::fitter::{fit_batch, heuristic_init, FitConfig, FitProblem, FitResult};
use cambody::metrics::{mean_joint_error, pa_mpjpe};
use cambody::panosample::sample_specsyn_camera;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One synthetic body observed by one camera: the ground-truth parameters,
/// the camera that produced the observations, the 2D joints rendered by the
/// forward path (kinematics + projection), and the world-frame joints.
///
/// `init_theta`/`init_rb` are a fixed small perturbation of the ground
/// truth, standing in for a regressor output that fits are initialized
/// from; the initial translation is re-derived per fit from the keypoints
/// under whatever intrinsics the fit assumes.
#[derive(Debug, Clone)]
pub struct Scene {
    pub gt: BodyParams,
    pub angles: CameraAngles,
    pub intrinsics: Intrinsics,
    pub rc: Mat3,
    pub observed: JointSet2D,
    pub world_gt: Vec<Vec3>,
    pub frame: ImageFrame,
    pub init_theta: Vec<Vec3>,
    pub init_rb: Mat3,
}

/// Draw a scene: camera per the synthetic-scene distributions, a body with a
/// small random pose at a few meters camera-frame depth, facing the camera
/// up to a modest yaw. `shape_spread` bounds the per-bone log-scales; the
/// focal-sensitivity experiment uses 0 so the monocular scale ambiguity
/// does not mask the focal effect.
pub fn random_scene<R: Rng>(
    rng: &mut R,
    template: &SkeletonTemplate,
    frame: ImageFrame,
    shape_spread: f64,
) -> Result<Scene, CmdError> {
    let angles = sample_specsyn_camera(rng);
    let intrinsics = Intrinsics::from_vfov(angles.vfov, frame).map_err(CmdError::internal)?;
    let rc = angles_to_rotation(&angles);

    let mut gt = BodyParams::rest(template);
    for t in &mut gt.theta {
        *t = Vec3::new(
            rng.random_range(-0.25..0.25),
            rng.random_range(-0.25..0.25),
            rng.random_range(-0.25..0.25),
        );
    }
    for b in &mut gt.beta {
        *b = rng.random_range(-shape_spread..shape_spread.max(1e-12));
    }
    let body_yaw = rng.random_range(-20f64.to_radians()..20f64.to_radians());
    gt.rb = rotation_from_axis_angle(&Vec3::new(0.0, body_yaw, 0.0));
    // Desk-scale depths put the body close enough that perspective
    // foreshortening inside the body is clearly observable.
    gt.tb = Vec3::new(
        rng.random_range(-0.3..0.3),
        rng.random_range(-0.2..0.2),
        rng.random_range(2.5..3.5),
    );

    let local = fk_local(template, &gt.theta, &gt.beta).map_err(CmdError::internal)?;
    let body: Vec<Vec3> = local.positions.iter().map(|p| gt.rb * p).collect();
    let px = cambody::camgeom::project(&body, &intrinsics, &rc, &gt.tb)
        .map_err(CmdError::internal)?;
    let n = px.len();
    let observed = JointSet2D::new(px, vec![1.0; n]).map_err(CmdError::internal)?;

    // The camera sits at the world origin, so world joints are the oriented
    // body plus the camera-frame translation rotated back into the world.
    let t_world = rc.transpose() * gt.tb;
    let world_gt = body.iter().map(|p| p + t_world).collect();

    let two_deg = 1f64.to_radians();
    let init_theta = gt
        .theta
        .iter()
        .map(|t| {
            t + Vec3::new(
                rng.random_range(-two_deg..two_deg),
                rng.random_range(-two_deg..two_deg),
                rng.random_range(-two_deg..two_deg),
            )
        })
        .collect();
    let init_rb = rotation_from_axis_angle(&Vec3::new(
        rng.random_range(-two_deg..two_deg),
        rng.random_range(-two_deg..two_deg),
        rng.random_range(-two_deg..two_deg),
    )) * gt.rb;

    Ok(Scene {
        gt,
        angles,
        intrinsics,
        rc,
        observed,
        world_gt,
        frame,
        init_theta,
        init_rb,
    })
}

/// World-frame joints implied by fitted parameters under the camera
/// assumption the fit was run with.
pub fn fitted_world_joints(
    template: &SkeletonTemplate,
    result: &FitResult,
    rc_assumed: &Mat3,
) -> Result<Vec<Vec3>, CmdError> {
    let local = fk_local(template, &result.params.theta, &result.params.beta)
        .map_err(CmdError::internal)?;
    let t_world = rc_assumed.transpose() * result.params.tb;
    Ok(local
        .positions
        .iter()
        .map(|p| result.params.rb * p + t_world)
        .collect())
}

/// Per-scene world metrics of a batch of fits run under per-scene camera
/// assumptions. W-MPJPE is root-aligned.
pub fn batch_world_metrics(
    template: &SkeletonTemplate,
    scenes: &[Scene],
    assumed: &[(Intrinsics, Mat3)],
    config: &FitConfig,
) -> Result<Vec<(f64, f64)>, CmdError> {
    let problems: Vec<FitProblem> = scenes
        .iter()
        .zip(assumed)
        .map(|(scene, (intrinsics, rc))| {
            // Regressor-style init: perturbed ground-truth pose and
            // orientation, translation from the keypoints under the
            // intrinsics this fit assumes.
            let mut init = heuristic_init(template, &scene.observed, intrinsics);
            init.theta = scene.init_theta.clone();
            init.rb = scene.init_rb;
            FitProblem {
                observed: scene.observed.clone(),
                intrinsics: *intrinsics,
                rc: *rc,
                template: template.clone(),
                init,
            }
        })
        .collect();
    let results = fit_batch(&problems, config);
    scenes
        .iter()
        .zip(assumed)
        .zip(results)
        .map(|((scene, (_, rc)), result)| {
            let result = result.map_err(CmdError::internal)?;
            let world = fitted_world_joints(template, &result, rc)?;
            let w = mean_joint_error(&world, &scene.world_gt, true).map_err(CmdError::internal)?;
            let pa = pa_mpjpe(&world, &scene.world_gt).map_err(CmdError::internal)?;
            Ok((w, pa))
        })
        .collect()
}

/// Mean W-MPJPE and PA-MPJPE (millimeters) of fits with the ground-truth
/// camera versus fits with the fixed `f = 5000`, identity-rotation camera,
/// over `bodies` synthetic scenes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraComparison {
    pub wmpjpe_gt_cam: f64,
    pub pa_gt_cam: f64,
    pub wmpjpe_fixed: f64,
    pub pa_fixed: f64,
}

pub fn camera_comparison(
    seed: u64,
    bodies: usize,
    config: &FitConfig,
) -> Result<CameraComparison, CmdError> {
    let template = default_template();
    let frame = ImageFrame::new(640, 480).map_err(CmdError::internal)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenes: Vec<Scene> = (0..bodies)
        .map(|_| random_scene(&mut rng, &template, frame, 0.08))
        .collect::<Result<_, _>>()?;

    let gt_assumed: Vec<(Intrinsics, Mat3)> =
        scenes.iter().map(|s| (s.intrinsics, s.rc)).collect();
    let center = frame.center();
    let fixed_intrinsics =
        Intrinsics::with_focal(5000.0, center.x, center.y).map_err(CmdError::internal)?;
    let fixed_assumed: Vec<(Intrinsics, Mat3)> = scenes
        .iter()
        .map(|_| (fixed_intrinsics, Mat3::identity()))
        .collect();

    let gt_metrics = batch_world_metrics(&template, &scenes, &gt_assumed, config)?;
    let fixed_metrics = batch_world_metrics(&template, &scenes, &fixed_assumed, config)?;

    let mean = |values: &[(f64, f64)], pick: fn(&(f64, f64)) -> f64| -> f64 {
        values.iter().map(pick).sum::<f64>() / values.len() as f64
    };
    Ok(CameraComparison {
        wmpjpe_gt_cam: mean(&gt_metrics, |m| m.0),
        pa_gt_cam: mean(&gt_metrics, |m| m.1),
        wmpjpe_fixed: mean(&fixed_metrics, |m| m.0),
        pa_fixed: mean(&fixed_metrics, |m| m.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityRow {
    pub factor: f64,
    pub mean_wmpjpe_mm: f64,
    pub trials: usize,
}

/// Refit the same scenes with the true camera rotation but the focal length
/// scaled by each factor; report the mean root-aligned W-MPJPE per factor.
pub fn focal_sensitivity(
    seed: u64,
    trials: usize,
    factors: &[f64],
    config: &FitConfig,
) -> Result<Vec<SensitivityRow>, CmdError> {
    if let Some(bad) = factors.iter().find(|f| **f <= 0.0 || !f.is_finite()) {
        return Err(CmdError::user(format!(
            "focal factors must be positive, got {bad}"
        )));
    }
    let template = default_template();
    let frame = ImageFrame::new(640, 480).map_err(CmdError::internal)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scenes: Vec<Scene> = (0..trials)
        .map(|_| random_scene(&mut rng, &template, frame, 0.0))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(factors.len());
    for &factor in factors {
        let assumed: Vec<(Intrinsics, Mat3)> = scenes
            .iter()
            .map(|s| {
                let k = Intrinsics {
                    fx: s.intrinsics.fx * factor,
                    fy: s.intrinsics.fy * factor,
                    ox: s.intrinsics.ox,
                    oy: s.intrinsics.oy,
                };
                (k, s.rc)
            })
            .collect();
        let metrics = batch_world_metrics(&template, &scenes, &assumed, config)?;
        let mean = metrics.iter().map(|m| m.0).sum::<f64>() / metrics.len().max(1) as f64;
        rows.push(SensitivityRow {
            factor,
            mean_wmpjpe_mm: mean,
            trials,
        });
    }
    Ok(rows)
}

/// Multi-frame experiment scenario: one body holding (approximately) a
/// reference pose, observed from `frames` viewpoints around it. Returns the
/// problem plus the ground-truth shape for recovery scoring.
pub fn random_multiframe<R: Rng>(
    rng: &mut R,
    template: &SkeletonTemplate,
    frames: usize,
    pose_noise: f64,
) -> Result<(cambody::fitter::MultiFrameProblem, Vec<f64>), CmdError> {
    use cambody::fitter::{FrameObservation, MultiFrameProblem};

    let frame = ImageFrame::new(640, 480).map_err(CmdError::internal)?;
    let vfov = 70f64.to_radians();
    let intrinsics = Intrinsics::from_vfov(vfov, frame).map_err(CmdError::internal)?;

    let reference_theta: Vec<Vec3> = (0..template.joint_count())
        .map(|_| {
            Vec3::new(
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.2..0.2),
                rng.random_range(-0.2..0.2),
            )
        })
        .collect();
    let gt_theta: Vec<Vec3> = reference_theta
        .iter()
        .map(|t| {
            t + Vec3::new(
                rng.random_range(-pose_noise..pose_noise.max(1e-12)),
                rng.random_range(-pose_noise..pose_noise.max(1e-12)),
                rng.random_range(-pose_noise..pose_noise.max(1e-12)),
            )
        })
        .collect();
    let gt_beta: Vec<f64> = (0..template.bone_count())
        .map(|_| rng.random_range(-0.1..0.1))
        .collect();

    let local = fk_local(template, &gt_theta, &gt_beta).map_err(CmdError::internal)?;
    let mut observations = Vec::with_capacity(frames);
    for i in 0..frames {
        let yaw = (i as f64) * (std::f64::consts::TAU / frames as f64);
        let cam_angles = Vec3::new(
            rng.random_range(-10f64.to_radians()..10f64.to_radians()),
            rng.random_range(-2f64.to_radians()..2f64.to_radians()),
            cambody::camgeom::wrap_angle(yaw),
        );
        let tc = Vec3::new(
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
            rng.random_range(3.5..4.5),
        );
        let r = angles_to_rotation(&CameraAngles {
            pitch: cam_angles.x,
            roll: cam_angles.y,
            yaw: cam_angles.z,
            vfov,
        });
        let px = cambody::camgeom::project(&local.positions, &intrinsics, &r, &tc)
            .map_err(CmdError::internal)?;
        let n = px.len();
        observations.push(FrameObservation {
            observed: JointSet2D::new(px, vec![1.0; n]).map_err(CmdError::internal)?,
            cam_angles,
            tc,
        });
    }

    let target_height =
        cambody::bodykin::body_height(template, &gt_beta).map_err(CmdError::internal)?;
    Ok((
        MultiFrameProblem {
            frames: observations,
            template: template.clone(),
            intrinsics,
            reference_theta,
            target_height,
        },
        gt_beta,
    ))
}
