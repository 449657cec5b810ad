//! Calibration losses over a discretized parameter head (softargmax-L2, its
//! asymmetric biased variant, a KL baseline) and the body-regression training
//! losses. Every differentiable loss returns an analytic gradient computed by
//! chain rule; finite differences are used only as a test oracle.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LossError {
    #[error("length mismatch: expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("ground truth {gt} lies outside the bin range [{lo}, {hi}]")]
    GtOutOfRange { gt: f64, lo: f64, hi: f64 },
    #[error("smoothing sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("invalid bin grid: {0}")]
    InvalidBinGrid(String),
    #[error("invalid probability mass: {0}")]
    InvalidProbability(String),
    #[error("shape mismatch in term {term}: expected {expected}, got {got}")]
    ShapeMismatch {
        term: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Centers of the discretization bins for one camera parameter, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    centers: Vec<f64>,
    lo: f64,
    hi: f64,
}

/// Default bin count of the discretized heads.
pub const DEFAULT_BINS: usize = 256;

impl BinGrid {
    /// Centers at the midpoints of `bins` equal-width intervals over `[lo, hi]`.
    // `!(lo < hi)` also rejects NaN bounds, unlike `lo >= hi`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self, LossError> {
        if bins < 2 {
            return Err(LossError::InvalidBinGrid(format!(
                "need at least 2 bins, got {bins}"
            )));
        }
        if !(lo < hi) {
            return Err(LossError::InvalidBinGrid(format!(
                "empty range [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / bins as f64;
        let centers = (0..bins)
            .map(|i| lo + (i as f64 + 0.5) * width)
            .collect();
        Ok(Self { centers, lo, hi })
    }

    /// Pitch head: `[-45, 45]` degrees, 256 bins.
    pub fn default_pitch() -> Self {
        Self::uniform(-45f64.to_radians(), 45f64.to_radians(), DEFAULT_BINS).unwrap()
    }

    /// Roll head: `[-45, 45]` degrees, 256 bins.
    pub fn default_roll() -> Self {
        Self::default_pitch()
    }

    /// Vertical field-of-view head: `[15, 140]` degrees, 256 bins.
    pub fn default_vfov() -> Self {
        Self::uniform(15f64.to_radians(), 140f64.to_radians(), DEFAULT_BINS).unwrap()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.centers.len() as f64
    }

    fn check_gt(&self, gt: f64) -> Result<(), LossError> {
        if gt < self.lo || gt > self.hi {
            return Err(LossError::GtOutOfRange {
                gt,
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(())
    }
}

/// Bin grid as stored in JSON: `{"lo_deg", "hi_deg", "bins"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinGridJson {
    pub lo_deg: f64,
    pub hi_deg: f64,
    pub bins: usize,
}

impl BinGridJson {
    pub fn to_grid(&self) -> Result<BinGrid, LossError> {
        BinGrid::uniform(self.lo_deg.to_radians(), self.hi_deg.to_radians(), self.bins)
    }
}

/// A normalized probability mass over bins.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityMass {
    p: Vec<f64>,
}

impl ProbabilityMass {
    // `!(x >= 0.0)` also rejects NaN entries, unlike `x < 0.0`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(p: Vec<f64>) -> Result<Self, LossError> {
        if let Some(bad) = p.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(LossError::InvalidProbability(format!(
                "entries must be finite and non-negative, found {bad}"
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(LossError::InvalidProbability(format!(
                "mass sums to {sum}, expected 1"
            )));
        }
        Ok(Self { p })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

/// A loss value together with its exact gradient with respect to the
/// differentiated input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LossValueWithGrad {
    pub value: f64,
    pub grad: Vec<f64>,
}

/// Numerically stable softmax: `p_i = exp(z_i - max z) / sum`.
pub fn softmax_normalize(logits: &[f64]) -> ProbabilityMass {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = p.iter().sum();
    for x in &mut p {
        *x /= sum;
    }
    ProbabilityMass { p }
}

/// Differentiable expectation of bin centers under a probability mass.
pub fn softargmax_expectation(p: &ProbabilityMass, grid: &BinGrid) -> Result<f64, LossError> {
    if p.len() != grid.len() {
        return Err(LossError::LengthMismatch {
            expected: grid.len(),
            got: p.len(),
        });
    }
    Ok(p.values()
        .iter()
        .zip(grid.centers())
        .map(|(pi, ci)| pi * ci)
        .sum())
}

/// Expectation of the softmax of `logits`, plus its gradient w.r.t. logits:
/// `dE/dz_j = p_j (c_j - E)`.
fn expectation_with_grad(logits: &[f64], grid: &BinGrid) -> Result<(f64, Vec<f64>, Vec<f64>), LossError> {
    if logits.len() != grid.len() {
        return Err(LossError::LengthMismatch {
            expected: grid.len(),
            got: logits.len(),
        });
    }
    let p = softmax_normalize(logits);
    let e = softargmax_expectation(&p, grid)?;
    let grad = p
        .values()
        .iter()
        .zip(grid.centers())
        .map(|(pi, ci)| pi * (ci - e))
        .collect();
    Ok((e, grad, p.p))
}

/// Squared error between the softargmax expectation and the ground truth,
/// with the exact gradient w.r.t. the logits.
pub fn softargmax_l2(logits: &[f64], grid: &BinGrid, gt: f64) -> Result<LossValueWithGrad, LossError> {
    grid.check_gt(gt)?;
    let (e, de_dz, _) = expectation_with_grad(logits, grid)?;
    let diff = e - gt;
    let grad = de_dz.iter().map(|d| 2.0 * diff * d).collect();
    Ok(LossValueWithGrad {
        value: diff * diff,
        grad,
    })
}

/// Asymmetric penalty on a scalar prediction. Overestimates pay the full
/// squared error; underestimates saturate through a Geman-McClure bowl:
///
/// ```text
/// d = pred - gt
/// loss = d^2 / (d^2 + 1)   if pred <= gt
///        d^2               otherwise
/// ```
///
/// Both branches and their first derivatives agree at `d = 0`.
pub fn biased_l2(pred: f64, gt: f64) -> f64 {
    let d = pred - gt;
    let d2 = d * d;
    if pred <= gt {
        d2 / (d2 + 1.0)
    } else {
        d2
    }
}

fn biased_l2_derivative(pred: f64, gt: f64) -> f64 {
    let d = pred - gt;
    if pred <= gt {
        let b = d * d + 1.0;
        2.0 * d / (b * b)
    } else {
        2.0 * d
    }
}

/// [`biased_l2`] applied to the softargmax expectation, with the exact
/// gradient w.r.t. the logits.
pub fn softargmax_biased_l2(
    logits: &[f64],
    grid: &BinGrid,
    gt: f64,
) -> Result<LossValueWithGrad, LossError> {
    grid.check_gt(gt)?;
    let (e, de_dz, _) = expectation_with_grad(logits, grid)?;
    let dvalue_de = biased_l2_derivative(e, gt);
    let grad = de_dz.iter().map(|d| dvalue_de * d).collect();
    Ok(LossValueWithGrad {
        value: biased_l2(e, gt),
        grad,
    })
}

/// KL divergence from the softmax of `logits` to a target mass, the baseline
/// loss for discretized heads: `sum t_i (log t_i - log softmax(z)_i)` with
/// `0 log 0 = 0`. Gradient w.r.t. logits is `softmax(z) - t`.
pub fn kl_loss(logits: &[f64], target: &ProbabilityMass) -> Result<LossValueWithGrad, LossError> {
    if logits.len() != target.len() {
        return Err(LossError::LengthMismatch {
            expected: target.len(),
            got: logits.len(),
        });
    }
    // log softmax via the stable shift.
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum: f64 = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    let mut value = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (zi, ti) in logits.iter().zip(target.values()) {
        let log_qi = zi - max - log_sum;
        if *ti > 0.0 {
            value += ti * (ti.ln() - log_qi);
        }
        grad.push(log_qi.exp() - ti);
    }
    Ok(LossValueWithGrad { value, grad })
}

/// Gaussian-smoothed target distribution for the KL baseline: a bump
/// `exp(-(c_i - gt)^2 / (2 sigma^2))` renormalized to sum 1. Computed in
/// log space so that a vanishing sigma degenerates to a one-hot at the
/// nearest bin instead of underflowing.
pub fn smoothed_target(gt: f64, grid: &BinGrid, sigma: f64) -> Result<ProbabilityMass, LossError> {
    if sigma <= 0.0 {
        return Err(LossError::NonPositiveSigma(sigma));
    }
    let log_w: Vec<f64> = grid
        .centers()
        .iter()
        .map(|c| {
            let d = (c - gt) / sigma;
            -0.5 * d * d
        })
        .collect();
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = log_w.iter().map(|lw| (lw - max).exp()).collect();
    let sum: f64 = p.iter().sum();
    for x in &mut p {
        *x /= sum;
    }
    Ok(ProbabilityMass { p })
}

/// Per-term weights of the body-regression training loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpsLossWeights {
    pub lambda_3d: f64,
    pub lambda_2d: f64,
    pub lambda_params: f64,
}

/// Per-term values and the weighted total of the training loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpsLossBreakdown {
    pub l3d: f64,
    pub l2d: f64,
    pub l_params: f64,
    pub total: f64,
}

fn frobenius_sq3(pred: &[Vector3<f64>], gt: &[Vector3<f64>]) -> f64 {
    pred.iter().zip(gt).map(|(a, b)| (a - b).norm_squared()).sum()
}

fn frobenius_sq2(pred: &[Vector2<f64>], gt: &[Vector2<f64>]) -> f64 {
    pred.iter().zip(gt).map(|(a, b)| (a - b).norm_squared()).sum()
}

fn sq_diff(pred: &[f64], gt: &[f64]) -> f64 {
    pred.iter().zip(gt).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Training losses of the body regressor:
/// `L3D = |J3d_hat - J3d|_F^2`, `L2D = |J2d_hat - J2d|_F^2`,
/// `Lparams = |theta_hat - theta|^2 + |beta_hat - beta|^2`, combined as
/// `lambda_3d L3D + lambda_2d L2D + lambda_params Lparams`.
#[allow(clippy::too_many_arguments)]
pub fn hps_training_losses(
    pred_j3d: &[Vector3<f64>],
    gt_j3d: &[Vector3<f64>],
    pred_j2d: &[Vector2<f64>],
    gt_j2d: &[Vector2<f64>],
    pred_theta: &[f64],
    gt_theta: &[f64],
    pred_beta: &[f64],
    gt_beta: &[f64],
    weights: &HpsLossWeights,
) -> Result<HpsLossBreakdown, LossError> {
    let check = |term: &'static str, expected: usize, got: usize| {
        if expected != got {
            Err(LossError::ShapeMismatch {
                term,
                expected,
                got,
            })
        } else {
            Ok(())
        }
    };
    check("j3d", gt_j3d.len(), pred_j3d.len())?;
    check("j2d", gt_j2d.len(), pred_j2d.len())?;
    check("theta", gt_theta.len(), pred_theta.len())?;
    check("beta", gt_beta.len(), pred_beta.len())?;

    let l3d = frobenius_sq3(pred_j3d, gt_j3d);
    let l2d = frobenius_sq2(pred_j2d, gt_j2d);
    let l_params = sq_diff(pred_theta, gt_theta) + sq_diff(pred_beta, gt_beta);
    Ok(HpsLossBreakdown {
        l3d,
        l2d,
        l_params,
        total: weights.lambda_3d * l3d + weights.lambda_2d * l2d + weights.lambda_params * l_params,
    })
}
