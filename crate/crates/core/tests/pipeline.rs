//! Cross-module flow: pose a body, render observations through the camera
//! model, fit from a perturbed start, and score the result with the
//! world-frame metrics.

use cambody::bodykin::{default_template, fk_local, BodyParams, JointSet2D};
use cambody::camgeom::{angles_to_rotation, project, CameraAngles, ImageFrame, Intrinsics, Vec3};
use cambody::fitter::{fit_single, FitConfig, FitProblem};
use cambody::metrics::{mean_joint_error, pa_mpjpe};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fit_then_evaluate_round_trip() {
    let template = default_template();
    let frame = ImageFrame::new(640, 480).unwrap();
    let angles = CameraAngles::from_degrees(-12.0, 2.0, 40.0, 80.0).unwrap();
    let intrinsics = Intrinsics::from_vfov(angles.vfov, frame).unwrap();
    let rc = angles_to_rotation(&angles);

    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let mut gt = BodyParams::rest(&template);
    for t in &mut gt.theta {
        *t = Vec3::new(
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
        );
    }
    gt.tb = Vec3::new(0.2, -0.1, 3.0);

    let local = fk_local(&template, &gt.theta, &gt.beta).unwrap();
    let body: Vec<Vec3> = local.positions.iter().map(|p| gt.rb * p).collect();
    let px = project(&body, &intrinsics, &rc, &gt.tb).unwrap();
    let n = px.len();
    let observed = JointSet2D::new(px, vec![1.0; n]).unwrap();

    let mut init = gt.clone();
    for t in &mut init.theta {
        *t += Vec3::new(0.04, -0.03, 0.05);
    }
    init.tb.z += 0.1;

    let config = FitConfig {
        steps_per_stage: 500,
        ..FitConfig::default()
    };
    let result = fit_single(
        &FitProblem {
            observed,
            intrinsics,
            rc,
            template: template.clone(),
            init,
        },
        &config,
    )
    .unwrap();

    // Score in world coordinates: camera at the origin, so world points are
    // the oriented chain plus the back-rotated camera-frame translation.
    let world = |params: &BodyParams| -> Vec<Vec3> {
        let local = fk_local(&template, &params.theta, &params.beta).unwrap();
        let t_world = rc.transpose() * params.tb;
        local
            .positions
            .iter()
            .map(|p| params.rb * p + t_world)
            .collect()
    };
    let gt_world = world(&gt);
    let fit_world = world(&result.params);

    let w = mean_joint_error(&fit_world, &gt_world, true).unwrap();
    let pa = pa_mpjpe(&fit_world, &gt_world).unwrap();
    // The reprojection converges to a fraction of a pixel; the remaining
    // world error is the monocular depth-scale ambiguity, bounded here at
    // the sub-decimeter level the quadratic priors deliver.
    assert!(
        result.stages.last().unwrap().energies.reprojection < 1e-1,
        "reprojection {} px^2",
        result.stages.last().unwrap().energies.reprojection
    );
    assert!(w < 80.0, "world error {w} mm");
    assert!(pa <= w + 1e-9, "alignment must not increase the error");
    assert!(
        result.final_energy() < result.stages[0].trace[0],
        "fit must improve on its start"
    );
}
