//! `gradcheck`: verify every gradient-returning operation against central
//! finite differences on seeded random cases, one report row per op.
//!
//! Evaluation points are drawn in numerically well-conditioned regimes:
//! calibration ground truths sit near the current expectation and fitting
//! problems are evaluated near consistency, so the finite-difference oracle
//! measures the gradients rather than its own f64 cancellation noise.

use crate::args::GradcheckArgs;
use crate::scene::{random_multiframe, random_scene};
use crate::CmdError;
use cambody::bodykin::{default_template, rotation_from_axis_angle, BodyParams};
use cambody::camgeom::{ImageFrame, Vec3};
use cambody::fitter::{
    max_relative_grad_error, multiframe_refine_energy, multiframe_stage1_energy,
    reprojection_energy, FitConfig,
};
use cambody::losses::{
    kl_loss, smoothed_target, softargmax_biased_l2, softargmax_expectation, softargmax_l2,
    softmax_normalize, BinGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TOLERANCE: f64 = 1e-4;
const CASES: usize = 100;
const EPSILON: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: &'static str,
    pub max_err: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        self.max_err < TOLERANCE
    }
}

/// Makes any gradient fail the check, for the negative-control test hook.
fn corrupt_grad(grad: &mut [f64]) {
    for g in grad.iter_mut() {
        *g += 1.0 + 0.5 * g.abs();
    }
}

/// One check case: evaluation point, value function, analytic gradient.
type Case = (Vec<f64>, ValueFn, Vec<f64>);
type ValueFn = Box<dyn Fn(&[f64]) -> f64>;

fn check_op(name: &'static str, corrupt: bool, cases: impl Iterator<Item = Case>) -> CheckRow {
    let mut max_err: f64 = 0.0;
    for (x0, value_fn, mut analytic) in cases {
        if corrupt {
            corrupt_grad(&mut analytic);
        }
        let err = max_relative_grad_error(|x| value_fn(x), &x0, &analytic, EPSILON);
        max_err = max_err.max(err);
    }
    CheckRow { name, max_err }
}

fn loss_cases(seed: u64, grid: BinGrid, op: &'static str) -> impl Iterator<Item = Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::from_fn(move || {
        loop {
            let logits: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let e = softargmax_expectation(&softmax_normalize(&logits), &grid).unwrap();
            let gt = (e + rng.random_range(-0.005..0.005)).clamp(grid.lo(), grid.hi());
            if op == "softargmax_biased_l2" && (e - gt).abs() < 1e-6 {
                continue; // stay away from the branch point
            }
            let grid_c = grid.clone();
            let (value_fn, analytic): (ValueFn, _) = match op {
                "softargmax_l2" => (
                    Box::new(move |z: &[f64]| softargmax_l2(z, &grid_c, gt).unwrap().value),
                    softargmax_l2(&logits, &grid, gt).unwrap().grad,
                ),
                "softargmax_biased_l2" => (
                    Box::new(move |z: &[f64]| softargmax_biased_l2(z, &grid_c, gt).unwrap().value),
                    softargmax_biased_l2(&logits, &grid, gt).unwrap().grad,
                ),
                "kl_loss" => {
                    let target = smoothed_target(gt, &grid, 2.0 * grid.bin_width()).unwrap();
                    let target_c = target.clone();
                    (
                        Box::new(move |z: &[f64]| kl_loss(z, &target_c).unwrap().value),
                        kl_loss(&logits, &target).unwrap().grad,
                    )
                }
                _ => unreachable!(),
            };
            return Some((logits, value_fn, analytic));
        }
    })
    .take(CASES)
}

fn losses_suite(seed: u64, corrupt: Option<&str>) -> Vec<CheckRow> {
    let is = |name: &str| corrupt == Some(name);
    vec![
        check_op(
            "softargmax_l2",
            is("softargmax_l2"),
            loss_cases(seed ^ 0x11, BinGrid::default_pitch(), "softargmax_l2"),
        ),
        check_op(
            "softargmax_biased_l2",
            is("softargmax_biased_l2"),
            loss_cases(seed ^ 0x22, BinGrid::default_vfov(), "softargmax_biased_l2"),
        ),
        check_op(
            "kl_loss",
            is("kl_loss"),
            loss_cases(seed ^ 0x33, BinGrid::default_roll(), "kl_loss"),
        ),
    ]
}

fn perturbed(rng: &mut ChaCha8Rng, params: &BodyParams, pose: f64, shape: f64) -> BodyParams {
    let mut p = params.clone();
    for t in &mut p.theta {
        *t += Vec3::new(
            rng.random_range(-pose..pose),
            rng.random_range(-pose..pose),
            rng.random_range(-pose..pose),
        );
    }
    for b in &mut p.beta {
        *b += rng.random_range(-shape..shape);
    }
    p.tb += Vec3::new(
        rng.random_range(-0.05..0.05),
        rng.random_range(-0.05..0.05),
        rng.random_range(-0.05..0.05),
    );
    p
}

fn reprojection_check(seed: u64, corrupt: bool) -> Result<CheckRow, CmdError> {
    let template = default_template();
    let frame = ImageFrame::new(640, 480).map_err(CmdError::internal)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = template.joint_count();
    let nb = template.bone_count();
    let mut max_err: f64 = 0.0;

    for _ in 0..CASES {
        let scene = random_scene(&mut rng, &template, frame, 0.08)?;
        let base = perturbed(&mut rng, &scene.gt, 0.05, 0.02);
        let problem = cambody::fitter::FitProblem {
            observed: scene.observed.clone(),
            intrinsics: scene.intrinsics,
            rc: scene.rc,
            template: template.clone(),
            init: base.clone(),
        };
        let (_, grad) =
            reprojection_energy(&base, &problem, 1.0).map_err(CmdError::internal)?;
        let mut analytic = grad.to_flat();
        if corrupt {
            corrupt_grad(&mut analytic);
        }
        let mut x0: Vec<f64> = base.theta.iter().flat_map(|t| [t.x, t.y, t.z]).collect();
        x0.extend_from_slice(&base.beta);
        x0.extend_from_slice(&[0.0, 0.0, 0.0]);
        x0.extend_from_slice(&[base.tb.x, base.tb.y, base.tb.z]);
        let err = max_relative_grad_error(
            |x| {
                let mut p = base.clone();
                for j in 0..k {
                    p.theta[j] = Vec3::new(x[3 * j], x[3 * j + 1], x[3 * j + 2]);
                }
                p.beta = x[3 * k..3 * k + nb].to_vec();
                let w = Vec3::new(x[3 * k + nb], x[3 * k + nb + 1], x[3 * k + nb + 2]);
                p.rb = rotation_from_axis_angle(&w) * base.rb;
                p.tb = Vec3::new(x[3 * k + nb + 3], x[3 * k + nb + 4], x[3 * k + nb + 5]);
                reprojection_energy(&p, &problem, 1.0).unwrap().0
            },
            &x0,
            &analytic,
            EPSILON,
        );
        max_err = max_err.max(err);
    }
    Ok(CheckRow {
        name: "reprojection_energy",
        max_err,
    })
}

fn multiframe_checks(seed: u64, corrupt: Option<&str>) -> Result<Vec<CheckRow>, CmdError> {
    let template = default_template();
    let config = FitConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nb = template.bone_count();
    let k = template.joint_count();
    let mut stage1_err: f64 = 0.0;
    let mut refine_err: f64 = 0.0;

    for _ in 0..CASES {
        let (problem, gt_beta) = random_multiframe(&mut rng, &template, 3, 0.01)?;
        let f = problem.frames.len();
        let beta: Vec<f64> = gt_beta
            .iter()
            .map(|b| b + rng.random_range(-0.02..0.02))
            .collect();
        let mut cams: Vec<f64> = Vec::with_capacity(6 * f);
        for frame_obs in &problem.frames {
            cams.extend_from_slice(&[
                frame_obs.cam_angles.x + rng.random_range(-0.005..0.005),
                frame_obs.cam_angles.y + rng.random_range(-0.005..0.005),
                frame_obs.cam_angles.z + rng.random_range(-0.005..0.005),
                frame_obs.tc.x + rng.random_range(-0.01..0.01),
                frame_obs.tc.y + rng.random_range(-0.01..0.01),
                frame_obs.tc.z + rng.random_range(-0.01..0.01),
            ]);
        }
        let unpack_cams = |x: &[f64], offset: usize| {
            let mut angles = Vec::with_capacity(f);
            let mut tcs = Vec::with_capacity(f);
            for i in 0..f {
                let b = offset + 6 * i;
                angles.push(Vec3::new(x[b], x[b + 1], x[b + 2]));
                tcs.push(Vec3::new(x[b + 3], x[b + 4], x[b + 5]));
            }
            (angles, tcs)
        };

        // Stage-1 packing: [beta | cams].
        let mut x0 = beta.clone();
        x0.extend_from_slice(&cams);
        let (angles0, tcs0) = unpack_cams(&x0, nb);
        let (_, mut analytic) =
            multiframe_stage1_energy(&beta, &angles0, &tcs0, &problem, &config)
                .map_err(CmdError::internal)?;
        if corrupt == Some("multiframe_stage1_energy") {
            corrupt_grad(&mut analytic);
        }
        let problem_ref = &problem;
        let config_ref = &config;
        let err = max_relative_grad_error(
            |x| {
                let (angles, tcs) = unpack_cams(x, nb);
                multiframe_stage1_energy(&x[..nb], &angles, &tcs, problem_ref, config_ref)
                    .unwrap()
                    .0
            },
            &x0,
            &analytic,
            EPSILON,
        );
        stage1_err = stage1_err.max(err);

        // Refinement packing: [theta | cams]. A healthy reference-pose
        // weight keeps the leaf joints' prior-only gradients above the
        // data-term rounding noise.
        let lambda_ref = 10.0;
        let theta: Vec<Vec3> = problem
            .reference_theta
            .iter()
            .map(|t| {
                t + Vec3::new(
                    rng.random_range(-0.02..0.02),
                    rng.random_range(-0.02..0.02),
                    rng.random_range(-0.02..0.02),
                )
            })
            .collect();
        let mut x0: Vec<f64> = theta.iter().flat_map(|t| [t.x, t.y, t.z]).collect();
        x0.extend_from_slice(&cams);
        let (angles0, tcs0) = unpack_cams(&x0, 3 * k);
        let (_, mut analytic) = multiframe_refine_energy(
            &theta, &gt_beta, &angles0, &tcs0, &problem, &config, lambda_ref,
        )
        .map_err(CmdError::internal)?;
        if corrupt == Some("multiframe_refine_energy") {
            corrupt_grad(&mut analytic);
        }
        let gt_beta_ref = &gt_beta;
        let err = max_relative_grad_error(
            |x| {
                let theta: Vec<Vec3> = x[..3 * k]
                    .chunks_exact(3)
                    .map(|c| Vec3::new(c[0], c[1], c[2]))
                    .collect();
                let (angles, tcs) = unpack_cams(x, 3 * k);
                multiframe_refine_energy(
                    &theta, gt_beta_ref, &angles, &tcs, problem_ref, config_ref, lambda_ref,
                )
                .unwrap()
                .0
            },
            &x0,
            &analytic,
            EPSILON,
        );
        refine_err = refine_err.max(err);
    }
    Ok(vec![
        CheckRow {
            name: "multiframe_stage1_energy",
            max_err: stage1_err,
        },
        CheckRow {
            name: "multiframe_refine_energy",
            max_err: refine_err,
        },
    ])
}

/// Runs the selected suites and returns one row per registered op.
pub fn run_checks(
    suite: &str,
    seed: u64,
    corrupt: Option<&str>,
) -> Result<Vec<CheckRow>, CmdError> {
    let mut rows = Vec::new();
    match suite {
        "losses" => rows.extend(losses_suite(seed, corrupt)),
        "fitter" => {
            rows.push(reprojection_check(
                seed ^ 0x44,
                corrupt == Some("reprojection_energy"),
            )?);
            rows.extend(multiframe_checks(seed ^ 0x55, corrupt)?);
        }
        "all" => {
            rows.extend(losses_suite(seed, corrupt));
            rows.push(reprojection_check(
                seed ^ 0x44,
                corrupt == Some("reprojection_energy"),
            )?);
            rows.extend(multiframe_checks(seed ^ 0x55, corrupt)?);
        }
        other => {
            return Err(CmdError::user(format!(
                "unknown suite '{other}' (expected losses, fitter or all)"
            )))
        }
    }
    Ok(rows)
}

pub fn run(args: &GradcheckArgs, _quiet: bool) -> Result<(), CmdError> {
    let rows = run_checks(&args.suite, args.seed, args.corrupt.as_deref())?;
    let mut failing = Vec::new();
    for row in &rows {
        println!(
            "{:<26} max_rel_err={:<12.3e} {}",
            row.name,
            row.max_err,
            if row.pass() { "PASS" } else { "FAIL" }
        );
        if !row.pass() {
            failing.push(row.name);
        }
    }
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CmdError::user(format!(
            "gradient checks failed: {}",
            failing.join(", ")
        )))
    }
}
