//! Compares the rayon-backed batch entry points against sequential
//! baselines. Batch fitting and metric evaluation have natural sequential
//! counterparts (mapping the single-item public functions); panorama
//! cropping is parallel per scanline, so its baseline runs the same code
//! inside a single-threaded rayon pool.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use cambody::bodykin::{default_template, fk_local, forward_kinematics, BodyParams, JointSet2D};
use cambody::camgeom::{angles_to_rotation, project, CameraAngles, ImageFrame, Intrinsics, Vec3};
use cambody::fitter::{fit_batch, fit_single, FitConfig, FitProblem};
use cambody::metrics::{
    evaluate_samples, mean_joint_error, pa_mpjpe, w_mpjpe, CameraMeta, EvalSample, PredFrame,
};
use cambody::panosample::{crop_from_pano, procedural_pano, CropSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single_thread_pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
}

fn crop_specs(n: usize) -> Vec<CropSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n)
        .map(|_| CropSpec {
            angles: CameraAngles::from_degrees(
                rng.random_range(-30.0..15.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-180.0..180.0),
                rng.random_range(70.0..130.0),
            )
            .unwrap(),
            out: ImageFrame::new(256, 256).unwrap(),
        })
        .collect()
}

fn bench_crops(c: &mut Criterion) {
    let pano = procedural_pano("checker", 512).unwrap();
    let specs = crop_specs(8);
    let pool = single_thread_pool();

    let mut group = c.benchmark_group("pano_crop_256px_x8");
    group.bench_function("parallel_scanlines", |b| {
        b.iter(|| {
            for spec in &specs {
                black_box(crop_from_pano(&pano, spec).unwrap());
            }
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            pool.install(|| {
                for spec in &specs {
                    black_box(crop_from_pano(&pano, spec).unwrap());
                }
            })
        })
    });
    group.finish();
}

fn synthetic_problems(n: usize) -> Vec<FitProblem> {
    let template = default_template();
    let frame = ImageFrame::new(640, 480).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..n)
        .map(|_| {
            let angles = CameraAngles::from_degrees(
                rng.random_range(-20.0..10.0),
                rng.random_range(-3.0..3.0),
                0.0,
                rng.random_range(70.0..110.0),
            )
            .unwrap();
            let intrinsics = Intrinsics::from_vfov(angles.vfov, frame).unwrap();
            let rc = angles_to_rotation(&angles);
            let mut gt = BodyParams::rest(&template);
            for t in &mut gt.theta {
                *t = Vec3::new(
                    rng.random_range(-0.2..0.2),
                    rng.random_range(-0.2..0.2),
                    rng.random_range(-0.2..0.2),
                );
            }
            gt.tb = Vec3::new(0.0, 0.0, rng.random_range(3.5..4.5));
            let local = fk_local(&template, &gt.theta, &gt.beta).unwrap();
            let px = project(&local.positions, &intrinsics, &rc, &gt.tb).unwrap();
            let observed = JointSet2D::new(px.clone(), vec![1.0; px.len()]).unwrap();
            let mut init = gt.clone();
            for t in &mut init.theta {
                *t += Vec3::new(0.05, -0.03, 0.02);
            }
            FitProblem {
                observed,
                intrinsics,
                rc,
                template: template.clone(),
                init,
            }
        })
        .collect()
}

fn bench_fits(c: &mut Criterion) {
    let problems = synthetic_problems(16);
    let config = FitConfig {
        steps_per_stage: 30,
        ..FitConfig::default()
    };

    let mut group = c.benchmark_group("body_fit_x16");
    group.sample_size(10);
    group.bench_function("fit_batch_parallel", |b| {
        b.iter(|| black_box(fit_batch(&problems, &config)))
    });
    group.bench_function("fit_single_sequential", |b| {
        b.iter(|| {
            let results: Vec<_> = problems.iter().map(|p| fit_single(p, &config)).collect();
            black_box(results)
        })
    });
    group.finish();
}

fn eval_samples(n: usize) -> Vec<EvalSample> {
    let template = default_template();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..n)
        .map(|_| {
            let mut params = BodyParams::rest(&template);
            for t in &mut params.theta {
                *t = Vec3::new(
                    rng.random_range(-0.3..0.3),
                    rng.random_range(-0.3..0.3),
                    rng.random_range(-0.3..0.3),
                );
            }
            let gt = forward_kinematics(&template, &params).unwrap().points;
            let pred = gt
                .iter()
                .map(|p| p + Vec3::new(rng.random_range(-0.02..0.02), 0.01, 0.0))
                .collect();
            EvalSample {
                pred,
                frame: PredFrame::World,
                gt,
                est_rc: None,
                meta: CameraMeta {
                    focal_px: 800.0,
                    pitch_deg: 0.0,
                },
            }
        })
        .collect()
}

fn bench_metrics(c: &mut Criterion) {
    let samples = eval_samples(512);

    let mut group = c.benchmark_group("metric_eval_x512");
    group.bench_function("evaluate_samples_parallel", |b| {
        b.iter_batched(
            || samples.clone(),
            |s| black_box(evaluate_samples(&s, true).unwrap()),
            BatchSize::LargeInput,
        )
    });
    group.bench_function("per_sample_sequential", |b| {
        b.iter_batched(
            || samples.clone(),
            |s| {
                let out: Vec<_> = s
                    .iter()
                    .map(|sample| {
                        (
                            mean_joint_error(&sample.pred, &sample.gt, false).unwrap(),
                            pa_mpjpe(&sample.pred, &sample.gt).unwrap(),
                            w_mpjpe(sample, true).unwrap(),
                        )
                    })
                    .collect();
                black_box(out)
            },
            BatchSize::LargeInput,
        )
    });
    group.finish();
}

criterion_group!(benches, bench_crops, bench_fits, bench_metrics);
criterion_main!(benches);
