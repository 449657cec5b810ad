//! Acceptance suite: one test per release criterion, each printing a PASS
//! line with its measured numbers. Run with
//! `cargo test -p cambody-cli --test acceptance -- --nocapture` (release
//! recommended for the optimization-heavy criteria).

use cambody::bodykin::{default_template, rotation_from_axis_angle};
use cambody::camgeom::{
    horizon_line, vfov_to_focal, CameraAngles, HorizonLine, ImageFrame, Mat3, Vec3,
};
use cambody::fitter::{fit_multiframe, FitConfig};
use cambody::losses::biased_l2;
use cambody::metrics::{pa_mpjpe, w_mpjpe, CameraMeta, EvalSample, PredFrame};
use cambody::panosample::{
    crop_from_pano, procedural_pano, sample_specsyn_camera, CropSpec, PanoImage,
};
use cambody_cli::commands::gradcheck::{run_checks, TOLERANCE};
use cambody_cli::scene::{camera_comparison, focal_sensitivity, random_multiframe};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const DEG: f64 = std::f64::consts::PI / 180.0;

fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
    rotation_from_axis_angle(&Vec3::new(
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    ))
}

fn random_points(rng: &mut ChaCha8Rng, k: usize) -> Vec<Vec3> {
    (0..k)
        .map(|_| {
            Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect()
}

#[test]
fn criterion_1_formula_fidelity() {
    let t0 = Instant::now();

    let f = vfov_to_focal(90.0 * DEG, 480).unwrap();
    assert!((f - 240.0).abs() < 1e-9, "vfov_to_focal(90deg, 480) = {f}");

    assert!((biased_l2(4.0, 3.0) - 1.0).abs() < 1e-9);
    assert!((biased_l2(2.0, 3.0) - 0.5).abs() < 1e-9);

    let frame = ImageFrame::new(1000, 1000).unwrap();
    let cam = cambody::camgeom::WeakPerspectiveCam {
        scale: 1.0,
        tx: 0.0,
        ty: 0.0,
    };
    let bbox = cambody::camgeom::BBox {
        cx: 500.0,
        cy: 500.0,
        wbox: 224.0,
        hbox: 224.0,
    };
    let tb = cambody::camgeom::weak_to_full_translation(&cam, &bbox, &frame, 5000.0).unwrap();
    assert!((tb.z - 2.0 * 5000.0 / 224.0).abs() < 1e-9, "t_z = {}", tb.z);

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("criterion 1 (formula fidelity): PASS in {elapsed:?}");
}

#[test]
fn criterion_2_gradient_suite() {
    let t0 = Instant::now();
    let rows = run_checks("all", 0, None).unwrap();
    assert_eq!(rows.len(), 6, "six registered differentiable ops");
    for row in &rows {
        assert!(
            row.max_err < TOLERANCE,
            "{}: max relative error {} exceeds {TOLERANCE}",
            row.name,
            row.max_err
        );
    }
    let worst = rows.iter().map(|r| r.max_err).fold(0.0, f64::max);
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 2 (gradient suite): PASS, worst relative error {worst:.3e} over {} ops x 100 cases in {elapsed:?}",
        rows.len()
    );
}

#[test]
fn criterion_3_procrustes_metric_suite() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_pa: f64 = 0.0;
    let mut worst_v2: f64 = 0.0;
    for _ in 0..1000 {
        let gt = random_points(&mut rng, 17);
        let r = random_rotation(&mut rng);
        let s = rng.random_range(0.2..5.0);
        let t = Vec3::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-10.0..10.0),
        );
        let pred: Vec<Vec3> = gt.iter().map(|p| s * (r * p) + t).collect();
        worst_pa = worst_pa.max(pa_mpjpe(&pred, &gt).unwrap());

        let rc = random_rotation(&mut rng);
        let sample = EvalSample {
            pred: gt.iter().map(|p| rc * p).collect(),
            frame: PredFrame::Camera,
            gt: gt.clone(),
            est_rc: Some(rc),
            meta: CameraMeta {
                focal_px: 500.0,
                pitch_deg: 0.0,
            },
        };
        worst_v2 = worst_v2.max(w_mpjpe(&sample, false).unwrap());
    }
    assert!(worst_pa < 1e-9, "PA-MPJPE under similarity: {worst_pa} mm");
    assert!(worst_v2 < 1e-9, "variant-2 equivalence: {worst_v2} mm");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "criterion 3 (procrustes/metric suite): PASS, worst PA {worst_pa:.2e} mm, worst variant-2 {worst_v2:.2e} mm over 1000 cases in {elapsed:?}"
    );
}

#[test]
fn criterion_4_estimated_camera_ordering() {
    let t0 = Instant::now();
    let config = FitConfig::default();
    let seeds = 100u64;
    let bodies = 200;
    let mut holds = 0u32;
    for seed in 0..seeds {
        let c = camera_comparison(seed, bodies, &config).unwrap();
        if c.wmpjpe_gt_cam < c.wmpjpe_fixed && c.pa_gt_cam <= c.pa_fixed {
            holds += 1;
        }
    }
    assert!(
        holds >= 95,
        "ordering held for only {holds}/{seeds} seeds"
    );
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 4 (ground-truth camera beats f=5000 identity): PASS, ordering held for {holds}/{seeds} seeds ({bodies} bodies each) in {elapsed:?}"
    );
}

#[test]
fn criterion_5_focal_sensitivity_asymmetry() {
    let t0 = Instant::now();
    // The default grid plus 0.5 for the explicit under/over comparison.
    let factors = [0.4, 0.5, 0.6, 0.8, 1.0, 1.3, 1.6, 2.0];
    let config = FitConfig {
        steps_per_stage: 800,
        ..FitConfig::default()
    };
    let rows = focal_sensitivity(0, 100, &factors, &config).unwrap();
    let err = |f: f64| -> f64 {
        rows.iter()
            .find(|r| r.factor == f)
            .expect("factor present")
            .mean_wmpjpe_mm
    };
    assert!(
        err(0.5) > err(2.0),
        "underestimate 0.5 ({}) must exceed overestimate 2.0 ({})",
        err(0.5),
        err(2.0)
    );
    assert!(
        err(0.4) > err(2.0),
        "underestimate 0.4 ({}) must exceed overestimate 2.0 ({})",
        err(0.4),
        err(2.0)
    );
    assert_eq!(rows.len(), factors.len(), "one row per factor");
    // Minimum over the default grid.
    let default_grid = [0.4, 0.6, 0.8, 1.0, 1.3, 1.6, 2.0];
    let min_factor = default_grid
        .iter()
        .copied()
        .min_by(|a, b| err(*a).total_cmp(&err(*b)))
        .unwrap();
    assert_eq!(min_factor, 1.0, "minimum must sit at the true focal");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 5 (focal-sensitivity asymmetry): PASS, err(0.5) = {:.1} mm > err(2.0) = {:.1} mm, minimum at factor 1.0 ({:.1} mm) in {elapsed:?}",
        err(0.5),
        err(2.0),
        err(1.0)
    );
}

#[test]
fn criterion_6_panorama_pipeline() {
    let t0 = Instant::now();

    // Yaw-shift equivalence on a checker panorama, integer-pixel shifts.
    let pano = procedural_pano("checker", 256).unwrap();
    let w = pano.width() as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_gray = 0i16;
    for _ in 0..12 {
        let shift = rng.random_range(1..w);
        let yaw_deg = 360.0 * shift as f64 / w as f64;
        let pitch = rng.random_range(-20.0..20.0);
        let roll = rng.random_range(-10.0..10.0);
        let vfov = rng.random_range(50.0..110.0);
        let out = ImageFrame::new(64, 48).unwrap();

        let mut shifted = vec![0u8; pano.raster().rgb.len()];
        for y in 0..pano.height() as i64 {
            for x in 0..w {
                let src = (x - shift).rem_euclid(w);
                let di = 3 * (y * w + x) as usize;
                let si = 3 * (y * w + src) as usize;
                shifted[di..di + 3].copy_from_slice(&pano.raster().rgb[si..si + 3]);
            }
        }
        let shifted = PanoImage::new(pano.width(), pano.height(), shifted).unwrap();

        let a = crop_from_pano(
            &pano,
            &CropSpec {
                angles: CameraAngles::from_degrees(pitch, roll, yaw_deg, vfov).unwrap(),
                out,
            },
        )
        .unwrap();
        let b = crop_from_pano(
            &shifted,
            &CropSpec {
                angles: CameraAngles::from_degrees(pitch, roll, 0.0, vfov).unwrap(),
                out,
            },
        )
        .unwrap();
        for (pa, pb) in a.rgb.iter().zip(&b.rgb) {
            worst_gray = worst_gray.max((*pa as i16 - *pb as i16).abs());
        }
    }
    assert!(worst_gray <= 1, "yaw-shift differed by {worst_gray} gray levels");

    // Horizon row agreement on hemisphere panoramas over 50 random specs.
    let hemi = procedural_pano("hemisphere", 2048).unwrap();
    let out = ImageFrame::new(201, 201).unwrap();
    let mut worst_row: f64 = 0.0;
    let mut checked = 0;
    while checked < 50 {
        let vfov = rng.random_range(50.0..100.0);
        let pitch = rng.random_range(-0.35 * vfov..0.35 * vfov);
        let roll = rng.random_range(-8.0..8.0);
        let yaw = rng.random_range(-180.0..180.0);
        let spec = CropSpec {
            angles: CameraAngles::from_degrees(pitch, roll, yaw, vfov).unwrap(),
            out,
        };
        let v_mid = match horizon_line(&spec.angles, &out).unwrap() {
            HorizonLine::Visible { start, end } => (start.y + end.y) / 2.0,
            HorizonLine::OffScreen => continue,
        };
        if !(2.0..199.0).contains(&v_mid) {
            continue; // keep the transition strictly inside the crop
        }
        let crop = crop_from_pano(&hemi, &spec).unwrap();
        let x = out.width / 2;
        let mut detected = None;
        for y in 0..out.height {
            if crop.pixel(x, y)[0] < 128 {
                detected = Some(y as f64);
                break;
            }
        }
        let detected = detected.expect("transition inside the crop");
        worst_row = worst_row.max((detected - v_mid).abs());
        checked += 1;
    }
    assert!(worst_row <= 1.0, "horizon row error {worst_row} px");

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 6 (panorama pipeline): PASS, yaw-shift within {worst_gray} gray level(s), horizon row within {worst_row:.2} px over 50 specs in {elapsed:?}"
    );
}

#[test]
fn criterion_7_sampling_distributions() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let n = 10_000;
    let mut rolls = Vec::with_capacity(n);
    let mut vfov_sum = 0.0;
    for _ in 0..n {
        let a = sample_specsyn_camera(&mut rng);
        let pitch = a.pitch.to_degrees();
        assert!(
            (-30.0..=15.0).contains(&pitch),
            "pitch {pitch} outside [-30, 15]"
        );
        rolls.push(a.roll.to_degrees());
        vfov_sum += a.vfov.to_degrees();
    }
    let mean_roll = rolls.iter().sum::<f64>() / n as f64;
    let roll_std = (rolls
        .iter()
        .map(|r| (r - mean_roll) * (r - mean_roll))
        .sum::<f64>()
        / (n - 1) as f64)
        .sqrt();
    let vfov_mean = vfov_sum / n as f64;
    assert!(
        (roll_std - 2.8).abs() < 0.15,
        "roll std {roll_std} not within 0.15 of 2.8"
    );
    assert!(
        (vfov_mean - 100.0).abs() < 0.7,
        "vfov mean {vfov_mean} not within 0.7 of 100"
    );
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 7 (sampling distributions): PASS, roll std {roll_std:.3} deg, vfov mean {vfov_mean:.2} deg over {n} draws in {elapsed:?}"
    );
}

#[test]
fn criterion_8_multiframe_fitting() {
    let t0 = Instant::now();
    let template = default_template();
    let config = FitConfig::default();
    let seeds = 20u64;
    let mut multi_errs = Vec::new();
    let mut single_errs = Vec::new();
    for seed in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(808 + seed);
        let (problem5, beta_gt) = random_multiframe(&mut rng, &template, 5, 0.01).unwrap();
        let problem1 = cambody::fitter::MultiFrameProblem {
            frames: problem5.frames[..1].to_vec(),
            ..problem5.clone()
        };

        let beta_err = |result: &cambody::fitter::FitResult| -> f64 {
            result
                .params
                .beta
                .iter()
                .zip(&beta_gt)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / beta_gt.len() as f64
        };

        for (problem, errs) in [(&problem5, &mut multi_errs), (&problem1, &mut single_errs)] {
            let result = fit_multiframe(problem, &config).unwrap();
            errs.push(beta_err(&result));

            // Per-stage best-energy traces never increase, and the shared
            // data term never increases from one stage to the next.
            for stage in &result.stages {
                for pair in stage.trace.windows(2) {
                    assert!(pair[1] <= pair[0] + 1e-15, "trace increased");
                }
            }
            for pair in result.stages.windows(2) {
                assert!(
                    pair[1].energies.reprojection <= pair[0].energies.reprojection + 1e-9,
                    "stage data term increased: {} -> {}",
                    pair[0].energies.reprojection,
                    pair[1].energies.reprojection
                );
            }
        }
    }
    let mean_multi = multi_errs.iter().sum::<f64>() / seeds as f64;
    let mean_single = single_errs.iter().sum::<f64>() / seeds as f64;
    assert!(
        mean_multi <= mean_single,
        "5-view shape error {mean_multi} exceeds single-view {mean_single}"
    );
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "criterion 8 (multi-frame fitting): PASS, mean shape error {mean_multi:.4} (5 views) <= {mean_single:.4} (1 view) over {seeds} seeds in {elapsed:?}"
    );
}

#[test]
fn criterion_9_command_determinism() {
    let t0 = Instant::now();
    let bin = env!("CARGO_BIN_EXE_cambody");
    let dir = tempfile::tempdir().unwrap();

    let run = |args: &[&str]| {
        let output = std::process::Command::new(bin)
            .args(args)
            .output()
            .expect("command runs");
        assert!(
            output.status.success(),
            "command failed: {:?}\n{}",
            args,
            String::from_utf8_lossy(&output.stderr)
        );
    };

    // synth twice into separate directories.
    let synth_a = dir.path().join("synth_a");
    let synth_b = dir.path().join("synth_b");
    for out in [&synth_a, &synth_b] {
        run(&[
            "synth",
            "--pano",
            "procedural:checker",
            "--count",
            "6",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
            "--dist",
            "specsyn",
            "--width",
            "96",
            "--height",
            "72",
            "--quiet",
        ]);
    }
    let manifest_a = std::fs::read(synth_a.join("manifest.jsonl")).unwrap();
    let manifest_b = std::fs::read(synth_b.join("manifest.jsonl")).unwrap();
    assert_eq!(manifest_a, manifest_b, "manifests differ between reruns");
    for i in 0..6 {
        let name = format!("crop_{i:05}.ppm");
        let a = std::fs::read(synth_a.join(&name)).unwrap();
        let b = std::fs::read(synth_b.join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }

    // fit twice on the same problem file.
    let problem = make_problem_json();
    let problem_path = dir.path().join("problem.json");
    std::fs::write(&problem_path, problem).unwrap();
    let fit_a = dir.path().join("fit_a.json");
    let fit_b = dir.path().join("fit_b.json");
    for out in [&fit_a, &fit_b] {
        run(&[
            "fit",
            "--problem",
            problem_path.to_str().unwrap(),
            "--camera",
            "gt",
            "--out",
            out.to_str().unwrap(),
            "--quiet",
        ]);
    }
    let a = std::fs::read(&fit_a).unwrap();
    let b = std::fs::read(&fit_b).unwrap();
    assert_eq!(a, b, "fit outputs differ between reruns");

    let elapsed = t0.elapsed();
    println!("criterion 9 (command determinism): PASS, synth and fit outputs bitwise identical in {elapsed:?}");
}

/// A small single-frame problem rendered by the forward path.
fn make_problem_json() -> String {
    use cambody::camgeom::{angles_to_rotation, project, CameraJson, Intrinsics};

    let template = default_template();
    let frame = ImageFrame::new(640, 480).unwrap();
    let angles = CameraAngles::from_degrees(8.0, 1.5, 0.0, 70.0).unwrap();
    let intrinsics = Intrinsics::from_vfov(angles.vfov, frame).unwrap();
    let rc = angles_to_rotation(&angles);
    let mut gt = cambody::bodykin::BodyParams::rest(&template);
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for t in &mut gt.theta {
        *t = Vec3::new(
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.2..0.2),
        );
    }
    gt.tb = Vec3::new(0.1, -0.1, 3.0);
    let local = cambody::bodykin::fk_local(&template, &gt.theta, &gt.beta).unwrap();
    let body: Vec<Vec3> = local.positions.iter().map(|p| gt.rb * p).collect();
    let px = project(&body, &intrinsics, &rc, &gt.tb).unwrap();

    let json = cambody::fitter::FitProblemJson {
        camera: CameraJson::from_angles(&angles, frame),
        keypoints: px.iter().map(|p| [p.x, p.y, 1.0]).collect(),
        init: None,
    };
    serde_json::to_string_pretty(&json).unwrap()
}
