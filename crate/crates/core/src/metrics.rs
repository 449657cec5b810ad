//! Evaluation metrics: similarity-Procrustes alignment, PA-MPJPE, the two
//! world-frame MPJPE variants (predictions taken as-is, or rotated into the
//! world by an estimated camera rotation), angular calibration errors, and
//! per-bucket breakdowns over focal length and pitch.
//!
//! Joint errors are computed on coordinates in meters and reported in
//! millimeters. The same operations serve per-vertex errors: every function
//! accepts arbitrary point sets, so a mesh model can slot in for the
//! skeleton without interface changes.

use crate::camgeom::{angles_to_rotation, CameraAngles, Mat3, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("need at least 3 points for similarity alignment, got {0}")]
    TooFewPoints(usize),
    #[error("point sets differ in length: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("degenerate input: points have rank < 2 after centering")]
    DegenerateInput,
    #[error("camera-frame prediction carries no estimated camera rotation")]
    MissingRotation,
    #[error("bucket edges must be strictly increasing with at least 2 entries")]
    InvalidBucketEdges,
    #[error("sample arrays differ in length: {a} vs {b}")]
    SampleLengthMismatch { a: usize, b: usize },
    #[error("invalid sample: {0}")]
    InvalidSample(String),
}

/// A similarity transform `x -> scale * rotation * x + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Similarity {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.scale * (self.rotation * p) + self.translation
    }
}

/// Closed-form similarity Procrustes: minimizes
/// `sum_i | s R x_i + t - y_i |^2` via centering, the cross-covariance SVD
/// with a determinant sign fix, and the trace-ratio scale.
pub fn procrustes_align(x: &[Vec3], y: &[Vec3]) -> Result<Similarity, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch {
            a: x.len(),
            b: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(MetricsError::TooFewPoints(x.len()));
    }
    let n = x.len() as f64;
    let x_mean: Vec3 = x.iter().sum::<Vec3>() / n;
    let y_mean: Vec3 = y.iter().sum::<Vec3>() / n;

    let mut cross = Mat3::zeros();
    let mut x_var = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let xc = xi - x_mean;
        let yc = yi - y_mean;
        cross += xc * yc.transpose();
        x_var += xc.norm_squared();
    }

    let svd = cross.svd(true, true);
    let u = svd.u.ok_or(MetricsError::DegenerateInput)?;
    let v = svd.v_t.ok_or(MetricsError::DegenerateInput)?.transpose();
    let sigma = svd.singular_values;

    // Rank of the centered x set: if the source points are (nearly)
    // collinear the similarity is not unique.
    if x_var <= 0.0 || second_moment_rank_deficient(x, &x_mean) {
        return Err(MetricsError::DegenerateInput);
    }

    // Reflection fix on the axis of the smallest singular value.
    let det_sign = (v * u.transpose()).determinant().signum();
    let min_idx = argmin3(&[sigma[0], sigma[1], sigma[2]]);
    let mut d = Vec3::new(1.0, 1.0, 1.0);
    d[min_idx] = det_sign;
    let rotation = v * Mat3::from_diagonal(&d) * u.transpose();
    let scale = (sigma[0] * d[0] + sigma[1] * d[1] + sigma[2] * d[2]) / x_var;
    let translation = y_mean - scale * (rotation * x_mean);
    Ok(Similarity {
        scale,
        rotation,
        translation,
    })
}

fn second_moment_rank_deficient(x: &[Vec3], mean: &Vec3) -> bool {
    let mut cov = Mat3::zeros();
    for xi in x {
        let c = xi - mean;
        cov += c * c.transpose();
    }
    let sv = cov.svd(false, false).singular_values;
    let largest = sv[0].max(sv[1]).max(sv[2]);
    let mut sorted = [sv[0], sv[1], sv[2]];
    sorted.sort_by(f64::total_cmp);
    // second-largest eigenvalue of the covariance
    sorted[1] <= largest * 1e-12
}

fn argmin3(v: &[f64; 3]) -> usize {
    let mut idx = 0;
    for i in 1..3 {
        if v[i] < v[idx] {
            idx = i;
        }
    }
    idx
}

/// Mean per-joint position error in millimeters after similarity alignment
/// of the prediction onto the ground truth.
pub fn pa_mpjpe(pred: &[Vec3], gt: &[Vec3]) -> Result<f64, MetricsError> {
    let align = procrustes_align(pred, gt)?;
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| (align.apply(p) - g).norm())
        .sum();
    Ok(sum / pred.len() as f64 * 1000.0)
}

/// Mean per-joint error in millimeters between point sets taken as-is,
/// optionally removing the root (joint 0) offset first.
pub fn mean_joint_error(pred: &[Vec3], gt: &[Vec3], root_align: bool) -> Result<f64, MetricsError> {
    if pred.len() != gt.len() {
        return Err(MetricsError::LengthMismatch {
            a: pred.len(),
            b: gt.len(),
        });
    }
    if pred.is_empty() {
        return Err(MetricsError::TooFewPoints(0));
    }
    let offset = if root_align {
        pred[0] - gt[0]
    } else {
        Vec3::zeros()
    };
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| (p - offset - g).norm())
        .sum();
    Ok(sum / pred.len() as f64 * 1000.0)
}

/// Coordinate frame a prediction lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredFrame {
    World,
    Camera,
}

/// Camera metadata used for bucketing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraMeta {
    pub focal_px: f64,
    pub pitch_deg: f64,
}

/// One evaluation sample: a predicted joint set (world- or camera-frame),
/// the world-frame ground truth, and, for camera-frame predictions, the
/// estimated camera rotation that maps world to camera.
#[derive(Debug, Clone)]
pub struct EvalSample {
    pub pred: Vec<Vec3>,
    pub frame: PredFrame,
    pub gt: Vec<Vec3>,
    pub est_rc: Option<Mat3>,
    pub meta: CameraMeta,
}

/// World-frame mean per-joint error in millimeters. World-frame predictions
/// are compared directly; camera-frame predictions are first rotated into
/// the world by the inverse of the estimated camera rotation.
pub fn w_mpjpe(sample: &EvalSample, root_align: bool) -> Result<f64, MetricsError> {
    let world_pred: Vec<Vec3> = match sample.frame {
        PredFrame::World => sample.pred.clone(),
        PredFrame::Camera => {
            let rc = sample.est_rc.as_ref().ok_or(MetricsError::MissingRotation)?;
            let rc_inv = rc.transpose();
            sample.pred.iter().map(|p| rc_inv * p).collect()
        }
    };
    mean_joint_error(&world_pred, &sample.gt, root_align)
}

/// Absolute angular difference in degrees, wrapped into `(-180, 180]`.
pub fn angular_error(pred_deg: f64, gt_deg: f64) -> f64 {
    let mut d = (pred_deg - gt_deg).rem_euclid(360.0);
    if d > 180.0 {
        d -= 360.0;
    }
    d.abs()
}

/// Bucket edges for the per-focal-length and per-pitch breakdowns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BucketSpec {
    pub focal_edges: Vec<f64>,
    pub pitch_edges: Vec<f64>,
}

impl BucketSpec {
    pub fn validate(&self) -> Result<(), MetricsError> {
        for edges in [&self.focal_edges, &self.pitch_edges] {
            if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
                return Err(MetricsError::InvalidBucketEdges);
            }
        }
        Ok(())
    }
}

/// One row of a breakdown table. Interior buckets are half-open `[lo, hi)`;
/// the underflow row has no `lo` and the overflow row no `hi`. Empty buckets
/// report no mean rather than zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub count: usize,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BreakdownTable {
    pub focal: Vec<BucketRow>,
    pub pitch: Vec<BucketRow>,
}

fn breakdown_axis(keys: &[f64], values: &[f64], edges: &[f64]) -> Vec<BucketRow> {
    // Rows: underflow, one per interval, overflow.
    let intervals = edges.len() - 1;
    let mut sums = vec![0.0; intervals + 2];
    let mut counts = vec![0usize; intervals + 2];
    for (key, value) in keys.iter().zip(values) {
        let slot = if *key < edges[0] {
            0
        } else if *key >= edges[intervals] {
            intervals + 1
        } else {
            // first interval [e_i, e_{i+1}) containing the key
            1 + edges[..intervals]
                .iter()
                .rposition(|e| *key >= *e)
                .unwrap_or(0)
        };
        sums[slot] += value;
        counts[slot] += 1;
    }
    (0..intervals + 2)
        .map(|slot| {
            let (lo, hi) = if slot == 0 {
                (None, Some(edges[0]))
            } else if slot == intervals + 1 {
                (Some(edges[intervals]), None)
            } else {
                (Some(edges[slot - 1]), Some(edges[slot]))
            };
            BucketRow {
                lo,
                hi,
                count: counts[slot],
                mean: if counts[slot] > 0 {
                    Some(sums[slot] / counts[slot] as f64)
                } else {
                    None
                },
            }
        })
        .collect()
}

/// Assign each sample's metric value to its focal and pitch buckets and
/// average per bucket. Out-of-range samples land in overflow rows, so
/// counts always sum to the sample count.
pub fn bucket_breakdown(
    metas: &[CameraMeta],
    values: &[f64],
    spec: &BucketSpec,
) -> Result<BreakdownTable, MetricsError> {
    spec.validate()?;
    if metas.len() != values.len() {
        return Err(MetricsError::SampleLengthMismatch {
            a: metas.len(),
            b: values.len(),
        });
    }
    let focals: Vec<f64> = metas.iter().map(|m| m.focal_px).collect();
    let pitches: Vec<f64> = metas.iter().map(|m| m.pitch_deg).collect();
    Ok(BreakdownTable {
        focal: breakdown_axis(&focals, values, &spec.focal_edges),
        pitch: breakdown_axis(&pitches, values, &spec.pitch_edges),
    })
}

/// Per-sample metric values in millimeters. `w_mpjpe_v1` treats the
/// prediction as-is; `w_mpjpe_v2` rotates camera-frame predictions into the
/// world (equal to v1 for world-frame predictions).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub mpjpe: f64,
    pub pa_mpjpe: f64,
    pub w_mpjpe_v1: f64,
    pub w_mpjpe_v2: f64,
}

/// Evaluate every sample; the error channel carries the index of the first
/// offending sample. Runs per-sample in parallel with the `parallel`
/// feature.
pub fn evaluate_samples(
    samples: &[EvalSample],
    root_align: bool,
) -> Result<Vec<SampleMetrics>, (usize, MetricsError)> {
    let eval_one = |(i, s): (usize, &EvalSample)| -> Result<SampleMetrics, (usize, MetricsError)> {
        let mpjpe = mean_joint_error(&s.pred, &s.gt, false).map_err(|e| (i, e))?;
        let pa = pa_mpjpe(&s.pred, &s.gt).map_err(|e| (i, e))?;
        let v1 = mean_joint_error(&s.pred, &s.gt, root_align).map_err(|e| (i, e))?;
        let v2 = w_mpjpe(s, root_align).map_err(|e| (i, e))?;
        Ok(SampleMetrics {
            mpjpe,
            pa_mpjpe: pa,
            w_mpjpe_v1: v1,
            w_mpjpe_v2: v2,
        })
    };
    #[cfg(feature = "parallel")]
    {
        samples.par_iter().enumerate().map(eval_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        samples.iter().enumerate().map(eval_one).collect()
    }
}

/// Evaluation sample as stored in JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalSampleJson {
    pub pred: Vec<[f64; 3]>,
    pub pred_frame: PredFrame,
    pub gt: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub est_rc_angles_deg: Option<[f64; 3]>,
    pub focal_px: f64,
    pub pitch_deg: f64,
}

impl EvalSampleJson {
    pub fn resolve(&self) -> Result<EvalSample, MetricsError> {
        let to_vec3 = |a: &[f64; 3]| Vec3::new(a[0], a[1], a[2]);
        let est_rc = match self.est_rc_angles_deg {
            Some([p, r, y]) => Some(angles_to_rotation(
                &CameraAngles::from_degrees(p, r, y, 90.0)
                    .map_err(|e| MetricsError::InvalidSample(e.to_string()))?,
            )),
            None => None,
        };
        if self.pred.len() != self.gt.len() {
            return Err(MetricsError::LengthMismatch {
                a: self.pred.len(),
                b: self.gt.len(),
            });
        }
        Ok(EvalSample {
            pred: self.pred.iter().map(to_vec3).collect(),
            frame: self.pred_frame,
            gt: self.gt.iter().map(to_vec3).collect(),
            est_rc,
            meta: CameraMeta {
                focal_px: self.focal_px,
                pitch_deg: self.pitch_deg,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodykin::rotation_from_axis_angle;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut ChaCha8Rng, k: usize, spread: f64) -> Vec<Vec3> {
        (0..k)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-spread..spread),
                    rng.random_range(-spread..spread),
                    rng.random_range(-spread..spread),
                )
            })
            .collect()
    }

    fn random_rotation(rng: &mut ChaCha8Rng) -> Mat3 {
        rotation_from_axis_angle(&Vec3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ))
    }

    #[test]
    fn procrustes_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let x = random_points(&mut rng, 17, 1.0);
        let s = procrustes_align(&x, &x).unwrap();
        assert_abs_diff_eq!(s.scale, 1.0, epsilon = 1e-12);
        assert!((s.rotation - Mat3::identity()).norm() < 1e-10);
        assert!(s.translation.norm() < 1e-12);
    }

    #[test]
    fn procrustes_recovers_known_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let x = random_points(&mut rng, 17, 1.0);
        let r0 = random_rotation(&mut rng);
        let t0 = Vec3::new(0.4, -1.2, 2.5);
        let y: Vec<Vec3> = x.iter().map(|p| 2.0 * (r0 * p) + t0).collect();
        let s = procrustes_align(&x, &y).unwrap();
        assert_abs_diff_eq!(s.scale, 2.0, epsilon = 1e-9);
        assert!((s.rotation - r0).norm() < 1e-9);
        assert!((s.translation - t0).norm() < 1e-9);
    }

    #[test]
    fn procrustes_beats_random_similarity_transforms() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let x = random_points(&mut rng, 12, 1.0);
        let y = random_points(&mut rng, 12, 1.0);
        let best = procrustes_align(&x, &y).unwrap();
        let residual = |s: &Similarity| -> f64 {
            x.iter()
                .zip(&y)
                .map(|(xi, yi)| (s.apply(xi) - yi).norm_squared())
                .sum()
        };
        let opt = residual(&best);
        for _ in 0..1000 {
            let candidate = Similarity {
                scale: rng.random_range(0.1..3.0),
                rotation: random_rotation(&mut rng),
                translation: Vec3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                ),
            };
            assert!(residual(&candidate) >= opt - 1e-9);
        }
    }

    #[test]
    fn procrustes_rejects_degenerate_inputs() {
        // collinear points: rank 1 after centering
        let x: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let y: Vec<Vec3> = (0..5).map(|i| Vec3::new(0.0, i as f64, 0.0)).collect();
        assert!(matches!(
            procrustes_align(&x, &y),
            Err(MetricsError::DegenerateInput)
        ));
        // coincident points
        let x = vec![Vec3::new(1.0, 2.0, 3.0); 4];
        assert!(procrustes_align(&x, &x).is_err());
        // too few
        let x = vec![Vec3::zeros(); 2];
        assert!(matches!(
            procrustes_align(&x, &x),
            Err(MetricsError::TooFewPoints(2))
        ));
    }

    #[test]
    fn pa_mpjpe_zero_under_similarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        for _ in 0..50 {
            let gt = random_points(&mut rng, 17, 1.0);
            let r = random_rotation(&mut rng);
            let s = rng.random_range(0.3..3.0);
            let t = Vec3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
            );
            let pred: Vec<Vec3> = gt.iter().map(|p| s * (r * p) + t).collect();
            assert!(pa_mpjpe(&pred, &gt).unwrap() < 1e-9);
        }
    }

    #[test]
    fn pa_mpjpe_displaced_joint_matches_alignment_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let gt = random_points(&mut rng, 17, 1.0);
        let mut pred = gt.clone();
        pred[5] += Vec3::new(0.010, 0.0, 0.0); // 10 mm
        let value = pa_mpjpe(&pred, &gt).unwrap();
        // Oracle: apply the closed-form alignment, then average by hand.
        let align = procrustes_align(&pred, &gt).unwrap();
        let mut sum = 0.0;
        for (p, g) in pred.iter().zip(&gt) {
            sum += (align.apply(p) - g).norm();
        }
        assert_abs_diff_eq!(value, sum / 17.0 * 1000.0, epsilon = 1e-12);
        // The 10 mm displacement spreads over all joints under alignment.
        assert!(value > 0.0 && value < 2.0);
    }

    #[test]
    fn w_mpjpe_world_and_camera_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        let gt = random_points(&mut rng, 17, 1.0);
        let meta = CameraMeta {
            focal_px: 500.0,
            pitch_deg: 5.0,
        };
        let exact = EvalSample {
            pred: gt.clone(),
            frame: PredFrame::World,
            gt: gt.clone(),
            est_rc: None,
            meta,
        };
        assert_abs_diff_eq!(w_mpjpe(&exact, false).unwrap(), 0.0, epsilon = 1e-12);

        let rc = random_rotation(&mut rng);
        let cam_sample = EvalSample {
            pred: gt.iter().map(|p| rc * p).collect(),
            frame: PredFrame::Camera,
            gt: gt.clone(),
            est_rc: Some(rc),
            meta,
        };
        assert!(w_mpjpe(&cam_sample, false).unwrap() < 1e-9);

        let missing = EvalSample {
            est_rc: None,
            ..cam_sample
        };
        assert!(matches!(
            w_mpjpe(&missing, false),
            Err(MetricsError::MissingRotation)
        ));
    }

    #[test]
    fn w_mpjpe_root_alignment_removes_uniform_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let gt = random_points(&mut rng, 17, 1.0);
        let pred: Vec<Vec3> = gt.iter().map(|p| p + Vec3::new(0.010, 0.0, 0.0)).collect();
        let sample = EvalSample {
            pred,
            frame: PredFrame::World,
            gt,
            est_rc: None,
            meta: CameraMeta {
                focal_px: 500.0,
                pitch_deg: 0.0,
            },
        };
        assert_abs_diff_eq!(w_mpjpe(&sample, true).unwrap(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(w_mpjpe(&sample, false).unwrap(), 10.0, epsilon = 1e-9);
    }

    #[test]
    fn alignment_hierarchy_on_offset_dominated_noise() {
        // Realistic world-frame errors: a global offset plus small per-joint
        // noise. Procrustes must not increase the error, nor must root
        // alignment relative to no alignment.
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..100 {
            let gt = random_points(&mut rng, 17, 0.8);
            let offset = Vec3::new(
                rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
                rng.random_range(0.1..0.5),
            );
            let pred: Vec<Vec3> = gt
                .iter()
                .map(|p| {
                    p + offset
                        + Vec3::new(
                            rng.random_range(-0.005..0.005),
                            rng.random_range(-0.005..0.005),
                            rng.random_range(-0.005..0.005),
                        )
                })
                .collect();
            let pa = pa_mpjpe(&pred, &gt).unwrap();
            let w_root = mean_joint_error(&pred, &gt, true).unwrap();
            let w_raw = mean_joint_error(&pred, &gt, false).unwrap();
            assert!(pa <= w_root + 1e-9, "pa {pa} > root-aligned {w_root}");
            assert!(w_root <= w_raw + 1e-9, "root {w_root} > raw {w_raw}");
        }
    }

    #[test]
    fn angular_error_wraps() {
        assert_abs_diff_eq!(angular_error(92.0, 90.0), 2.0);
        assert_abs_diff_eq!(angular_error(359.0, 1.0), 2.0);
        assert_abs_diff_eq!(angular_error(1.0, 359.0), 2.0);
        assert_abs_diff_eq!(angular_error(-180.0, 180.0), 0.0);
        let mean = (angular_error(1.0, 0.0) + angular_error(3.0, 0.0)) / 2.0;
        assert_abs_diff_eq!(mean, 2.0);
        // symmetric and bounded
        let mut rng = ChaCha8Rng::seed_from_u64(79);
        for _ in 0..500 {
            let a = rng.random_range(-720.0..720.0);
            let b = rng.random_range(-720.0..720.0);
            assert_abs_diff_eq!(angular_error(a, b), angular_error(b, a), epsilon = 1e-9);
            assert!(angular_error(a, b) <= 180.0);
        }
    }

    #[test]
    fn bucket_breakdown_means_and_overflow() {
        let spec = BucketSpec {
            focal_edges: vec![0.0, 100.0, 200.0],
            pitch_edges: vec![-10.0, 0.0, 10.0],
        };
        let metas = vec![
            CameraMeta {
                focal_px: 50.0,
                pitch_deg: -5.0,
            },
            CameraMeta {
                focal_px: 150.0,
                pitch_deg: 5.0,
            },
            CameraMeta {
                focal_px: 150.0,
                pitch_deg: 5.0,
            },
            CameraMeta {
                focal_px: 500.0,
                pitch_deg: 50.0,
            },
        ];
        let values = vec![10.0, 10.0, 30.0, 7.0];
        let table = bucket_breakdown(&metas, &values, &spec).unwrap();

        // focal rows: underflow, [0,100), [100,200), overflow
        assert_eq!(table.focal.len(), 4);
        assert_eq!(table.focal[0].count, 0);
        assert_eq!(table.focal[0].mean, None);
        assert_eq!(table.focal[1].count, 1);
        assert_abs_diff_eq!(table.focal[1].mean.unwrap(), 10.0);
        assert_eq!(table.focal[2].count, 2);
        assert_abs_diff_eq!(table.focal[2].mean.unwrap(), 20.0);
        assert_eq!(table.focal[3].count, 1);

        let total: usize = table.focal.iter().map(|r| r.count).sum();
        assert_eq!(total, metas.len());

        // Weighted mean over buckets reconstructs the overall mean.
        let weighted: f64 = table
            .focal
            .iter()
            .filter_map(|r| r.mean.map(|m| m * r.count as f64))
            .sum::<f64>()
            / metas.len() as f64;
        let overall: f64 = values.iter().sum::<f64>() / values.len() as f64;
        assert_abs_diff_eq!(weighted, overall, epsilon = 1e-12);
    }

    #[test]
    fn bucket_breakdown_single_bucket_equals_overall_mean() {
        let spec = BucketSpec {
            focal_edges: vec![0.0, 1e6],
            pitch_edges: vec![-90.0, 90.0],
        };
        let metas = vec![
            CameraMeta {
                focal_px: 10.0,
                pitch_deg: 1.0,
            };
            5
        ];
        let values = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let table = bucket_breakdown(&metas, &values, &spec).unwrap();
        assert_abs_diff_eq!(table.focal[1].mean.unwrap(), 3.0);
        assert_abs_diff_eq!(table.pitch[1].mean.unwrap(), 3.0);
    }

    #[test]
    fn bucket_breakdown_rejects_bad_edges() {
        let spec = BucketSpec {
            focal_edges: vec![10.0, 10.0],
            pitch_edges: vec![-10.0, 10.0],
        };
        assert!(matches!(
            bucket_breakdown(&[], &[], &spec),
            Err(MetricsError::InvalidBucketEdges)
        ));
    }

    #[test]
    fn evaluate_samples_reports_offending_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        let gt = random_points(&mut rng, 17, 1.0);
        let good = EvalSample {
            pred: gt.clone(),
            frame: PredFrame::World,
            gt: gt.clone(),
            est_rc: None,
            meta: CameraMeta {
                focal_px: 100.0,
                pitch_deg: 0.0,
            },
        };
        let bad = EvalSample {
            frame: PredFrame::Camera,
            est_rc: None,
            ..good.clone()
        };
        match evaluate_samples(&[good.clone(), bad], true) {
            Err((index, MetricsError::MissingRotation)) => assert_eq!(index, 1),
            other => panic!("expected missing-rotation at index 1, got {other:?}"),
        }
        let ok = evaluate_samples(&[good], true).unwrap();
        assert_abs_diff_eq!(ok[0].w_mpjpe_v2, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ok[0].mpjpe, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn eval_sample_json_resolves() {
        let json = r#"{
            "pred": [[0,0,0],[1,0,0],[0,1,0]],
            "pred_frame": "camera",
            "gt": [[0,0,0],[1,0,0],[0,1,0]],
            "est_rc_angles_deg": [0, 0, 0],
            "focal_px": 800,
            "pitch_deg": 3.5
        }"#;
        let sample: EvalSampleJson = serde_json::from_str(json).unwrap();
        let resolved = sample.resolve().unwrap();
        assert_eq!(resolved.frame, PredFrame::Camera);
        assert!(resolved.est_rc.is_some());
        assert_abs_diff_eq!(w_mpjpe(&resolved, false).unwrap(), 0.0, epsilon = 1e-12);
    }
}
