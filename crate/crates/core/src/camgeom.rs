//! The camera model: intrinsics, rotations from pitch/roll/yaw angles,
//! perspective projection, weak-perspective translation conversion, horizon
//! geometry and the virtual ground plane.
//!
//! Conventions, used everywhere in this crate:
//! * World points map to the camera frame via `x_cam = R^c * x_world + t`,
//!   with `t` expressed in the camera frame.
//! * `R^c = R_x(pitch) * R_z(roll) * R_y(yaw)` with right-handed elementary
//!   rotations; yaw is the rightmost factor, so it pans about the world
//!   vertical axis. Positive pitch tilts the camera down, which places the
//!   horizon in the upper half of the image; roll tilts the horizon by the
//!   roll angle.
//! * Pixel coordinates: `u = fx * x/z + ox`, `v = fy * y/z + oy`, `v`
//!   growing downwards (row index).

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// Pitch/roll magnitude (radians) beyond which Euler recovery is flagged as
/// degenerate. Calibration sampling never approaches the +-90 deg poles.
pub const GIMBAL_PITCH_LIMIT: f64 = 89.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Error)]
pub enum CamGeomError {
    #[error("vertical field of view must lie in (0, pi) radians, got {0}")]
    VfovOutOfRange(f64),
    #[error("focal length must be positive, got {0}")]
    NonPositiveFocal(f64),
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    BadImageFrame { width: u32, height: u32 },
    #[error("point {index} is behind the camera (camera-frame z = {z})")]
    BehindCamera { index: usize, z: f64 },
    #[error("matrix is not a rotation (orthonormality deviation {deviation:.3e})")]
    NotARotation { deviation: f64 },
    #[error("weak-perspective scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("bounding box must have positive size, got {wbox}x{hbox}")]
    EmptyBBox { wbox: f64, hbox: f64 },
    #[error("ground plane of an empty joint set is undefined")]
    EmptyJointSet,
}

/// Wrap an angle in radians into `(-pi, pi]`. In-range values pass through
/// unchanged.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -std::f64::consts::PI && x <= std::f64::consts::PI {
        return x;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = x.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w - two_pi
    } else {
        w
    }
}

/// Image size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageFrame {
    pub width: u32,
    pub height: u32,
}

impl ImageFrame {
    pub fn new(width: u32, height: u32) -> Result<Self, CamGeomError> {
        if width == 0 || height == 0 {
            return Err(CamGeomError::BadImageFrame { width, height });
        }
        Ok(Self { width, height })
    }

    /// Image center, the default principal point.
    pub fn center(&self) -> Vec2 {
        Vec2::new(self.width as f64 / 2.0, self.height as f64 / 2.0)
    }
}

/// Camera orientation plus vertical field of view, all in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraAngles {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
    pub vfov: f64,
}

impl CameraAngles {
    /// Build from radians. Orientation angles are wrapped into `(-pi, pi]`;
    /// the vfov must lie in the open interval `(0, pi)`.
    pub fn new(pitch: f64, roll: f64, yaw: f64, vfov: f64) -> Result<Self, CamGeomError> {
        if !(vfov > 0.0 && vfov < std::f64::consts::PI) {
            return Err(CamGeomError::VfovOutOfRange(vfov));
        }
        Ok(Self {
            pitch: wrap_angle(pitch),
            roll: wrap_angle(roll),
            yaw: wrap_angle(yaw),
            vfov,
        })
    }

    pub fn from_degrees(
        pitch_deg: f64,
        roll_deg: f64,
        yaw_deg: f64,
        vfov_deg: f64,
    ) -> Result<Self, CamGeomError> {
        Self::new(
            pitch_deg.to_radians(),
            roll_deg.to_radians(),
            yaw_deg.to_radians(),
            vfov_deg.to_radians(),
        )
    }
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub ox: f64,
    pub oy: f64,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, ox: f64, oy: f64) -> Result<Self, CamGeomError> {
        if fx <= 0.0 {
            return Err(CamGeomError::NonPositiveFocal(fx));
        }
        if fy <= 0.0 {
            return Err(CamGeomError::NonPositiveFocal(fy));
        }
        Ok(Self { fx, fy, ox, oy })
    }

    /// Intrinsics implied by a vertical field of view: `fx = fy` derived via
    /// [`vfov_to_focal`], principal point at the image center.
    pub fn from_vfov(vfov: f64, frame: ImageFrame) -> Result<Self, CamGeomError> {
        let f = vfov_to_focal(vfov, frame.height)?;
        let c = frame.center();
        Ok(Self {
            fx: f,
            fy: f,
            ox: c.x,
            oy: c.y,
        })
    }

    /// Same focal in both axes with an arbitrary principal point.
    pub fn with_focal(f: f64, ox: f64, oy: f64) -> Result<Self, CamGeomError> {
        Self::new(f, f, ox, oy)
    }
}

/// A rigid camera pose: rotation (world to camera) and camera-frame translation.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidCamera {
    rotation: Mat3,
    translation: Vec3,
}

impl RigidCamera {
    /// Validates that `rotation` is orthonormal with determinant +1
    /// (deviation below 1e-9).
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, CamGeomError> {
        check_rotation(&rotation)?;
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }
}

fn check_rotation(r: &Mat3) -> Result<(), CamGeomError> {
    let deviation = (r.transpose() * r - Mat3::identity()).norm();
    let det_dev = (r.determinant() - 1.0).abs();
    if deviation > 1e-9 || det_dev > 1e-9 {
        return Err(CamGeomError::NotARotation {
            deviation: deviation.max(det_dev),
        });
    }
    Ok(())
}

/// The three-parameter weak-perspective camera predicted by crop-based
/// regressors: scale plus a bbox-normalized in-plane translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakPerspectiveCam {
    pub scale: f64,
    pub tx: f64,
    pub ty: f64,
}

/// Axis-aligned bounding box: center and size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub wbox: f64,
    pub hbox: f64,
}

/// Convert a vertical field of view (radians) to a focal length in pixels:
/// `f = (h/2) / tan(vfov/2)`.
pub fn vfov_to_focal(vfov: f64, image_height: u32) -> Result<f64, CamGeomError> {
    if !(vfov > 0.0 && vfov < std::f64::consts::PI) {
        return Err(CamGeomError::VfovOutOfRange(vfov));
    }
    if image_height == 0 {
        return Err(CamGeomError::BadImageFrame {
            width: 1,
            height: image_height,
        });
    }
    Ok(image_height as f64 / 2.0 / (vfov / 2.0).tan())
}

/// Exact inverse of [`vfov_to_focal`]: `vfov = 2 atan(h / (2 f))`.
pub fn focal_to_vfov(focal: f64, image_height: u32) -> Result<f64, CamGeomError> {
    if focal <= 0.0 {
        return Err(CamGeomError::NonPositiveFocal(focal));
    }
    if image_height == 0 {
        return Err(CamGeomError::BadImageFrame {
            width: 1,
            height: image_height,
        });
    }
    Ok(2.0 * (image_height as f64 / (2.0 * focal)).atan())
}

pub(crate) fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub(crate) fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub(crate) fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// World-to-camera rotation from camera angles:
/// `R^c = R_x(pitch) * R_z(roll) * R_y(yaw)`.
///
/// Yaw is the rightmost factor, so it pans the view about the world vertical
/// axis: the horizon position depends only on pitch and roll, and yawing a
/// panorama crop is exactly a longitude shift.
pub fn angles_to_rotation(angles: &CameraAngles) -> Mat3 {
    rot_x(angles.pitch) * rot_z(angles.roll) * rot_y(angles.yaw)
}

/// Euler angles recovered by [`rotation_to_angles`]. `degenerate` is set
/// when pitch or roll comes within one degree of the +-90 degree poles,
/// where the decomposition is ill-conditioned; calibration sampling never
/// approaches either pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveredAngles {
    pub pitch: f64,
    pub roll: f64,
    pub yaw: f64,
    pub degenerate: bool,
}

/// Invert [`angles_to_rotation`]. Fails on a non-rotation input.
///
/// Away from the degenerate poles the recovered angles reproduce the input
/// rotation to machine precision; roll is recovered in `[-90, 90]` degrees.
pub fn rotation_to_angles(r: &Mat3) -> Result<RecoveredAngles, CamGeomError> {
    check_rotation(r)?;
    // R = R_x(alpha) R_z(phi) R_y(psi):
    //   R[0][1] = -sin(phi)
    //   R[1][1] = cos(alpha) cos(phi),  R[2][1] = sin(alpha) cos(phi)
    //   R[0][0] = cos(phi) cos(psi),    R[0][2] = cos(phi) sin(psi)
    let roll = (-r[(0, 1)]).clamp(-1.0, 1.0).asin();
    let pitch = r[(2, 1)].atan2(r[(1, 1)]);
    let yaw = r[(0, 2)].atan2(r[(0, 0)]);
    Ok(RecoveredAngles {
        pitch,
        roll,
        yaw,
        degenerate: pitch.abs() >= GIMBAL_PITCH_LIMIT || roll.abs() >= GIMBAL_PITCH_LIMIT,
    })
}

/// Project world points through `x_cam = rc * x + tb`, then through the
/// pinhole. Errors on the first point with non-positive camera-frame depth.
pub fn project(
    points: &[Vec3],
    k: &Intrinsics,
    rc: &Mat3,
    tb: &Vec3,
) -> Result<Vec<Vec2>, CamGeomError> {
    points
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let cam = rc * p + tb;
            if cam.z <= 0.0 {
                return Err(CamGeomError::BehindCamera { index, z: cam.z });
            }
            Ok(project_camera_point(&cam, k))
        })
        .collect()
}

/// Pinhole projection of a point already in the camera frame (z > 0 assumed).
pub fn project_camera_point(cam: &Vec3, k: &Intrinsics) -> Vec2 {
    Vec2::new(
        k.fx * cam.x / cam.z + k.ox,
        k.fy * cam.y / cam.z + k.oy,
    )
}

/// Convert weak-perspective camera parameters, predicted relative to a crop
/// bounding box, into a full-image camera-frame body translation:
///
/// ```text
/// tb_x = tx + 2 (cx - w/2) / (s * wbox)
/// tb_y = ty + 2 (cy - h/2) / (s * hbox)
/// tb_z = 2 f / (hbox * s)
/// ```
pub fn weak_to_full_translation(
    cam: &WeakPerspectiveCam,
    bbox: &BBox,
    frame: &ImageFrame,
    focal: f64,
) -> Result<Vec3, CamGeomError> {
    if cam.scale <= 0.0 {
        return Err(CamGeomError::NonPositiveScale(cam.scale));
    }
    if bbox.wbox <= 0.0 || bbox.hbox <= 0.0 {
        return Err(CamGeomError::EmptyBBox {
            wbox: bbox.wbox,
            hbox: bbox.hbox,
        });
    }
    if focal <= 0.0 {
        return Err(CamGeomError::NonPositiveFocal(focal));
    }
    let c = frame.center();
    Ok(Vec3::new(
        cam.tx + 2.0 * (bbox.cx - c.x) / (cam.scale * bbox.wbox),
        cam.ty + 2.0 * (bbox.cy - c.y) / (cam.scale * bbox.hbox),
        2.0 * focal / (bbox.hbox * cam.scale),
    ))
}

/// Image-plane horizon: the locus of world-horizontal directions at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HorizonLine {
    /// Endpoints at `u = 0` and `u = width`.
    Visible { start: Vec2, end: Vec2 },
    /// The horizon does not intersect the image rectangle.
    OffScreen,
}

/// Horizon of the camera described by `angles` in an image of size `frame`.
///
/// A pixel lies on the horizon when its back-projected ray is orthogonal to
/// the world up axis expressed in the camera frame, `n = R^c * (0, 1, 0)`:
/// `n_x (u - ox) + n_y (v - oy) + n_z f = 0`. At zero pitch and roll this is
/// the horizontal line `v = h/2`; positive pitch moves it up, roll tilts it.
pub fn horizon_line(angles: &CameraAngles, frame: &ImageFrame) -> Result<HorizonLine, CamGeomError> {
    let f = vfov_to_focal(angles.vfov, frame.height)?;
    let c = frame.center();
    let n = angles_to_rotation(angles) * Vec3::new(0.0, 1.0, 0.0);
    if n.y.abs() < 1e-12 {
        // Horizon is vertical or undefined (camera pointing straight up/down).
        return Ok(HorizonLine::OffScreen);
    }
    let w = frame.width as f64;
    let h = frame.height as f64;
    let v_at = |u: f64| c.y - (n.x * (u - c.x) + n.z * f) / n.y;
    let (v0, v1) = (v_at(0.0), v_at(w));
    if v0.max(v1) < 0.0 || v0.min(v1) > h {
        return Ok(HorizonLine::OffScreen);
    }
    Ok(HorizonLine::Visible {
        start: Vec2::new(0.0, v0),
        end: Vec2::new(w, v1),
    })
}

/// Conditioning vector fed to camera-aware body regressors: the row-major
/// flattening of `R^c` followed by the vfov. Length is always 10.
pub fn camera_conditioning_vector(rc: &Mat3, vfov: f64) -> [f64; 10] {
    let mut out = [0.0; 10];
    for row in 0..3 {
        for col in 0..3 {
            out[row * 3 + col] = rc[(row, col)];
        }
    }
    out[9] = vfov;
    out
}

/// Height of the virtual ground plane `[0, y, 0]`: the minimum vertical
/// coordinate over the joints, placing the plane just below the body.
pub fn ground_plane_height(joints: &[Vec3]) -> Result<f64, CamGeomError> {
    joints
        .iter()
        .map(|p| p.y)
        .min_by(|a, b| a.total_cmp(b))
        .ok_or(CamGeomError::EmptyJointSet)
}

/// Camera description as stored in JSON files:
/// `{"pitch_deg", "roll_deg", "yaw_deg", "vfov_deg", "width", "height"}`
/// with optional `{"fx", "fy", "ox", "oy"}` overriding the vfov-derived
/// intrinsics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraJson {
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub yaw_deg: f64,
    pub vfov_deg: f64,
    pub width: u32,
    pub height: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ox: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oy: Option<f64>,
}

/// A [`CameraJson`] resolved into ready-to-use camera quantities.
#[derive(Debug, Clone)]
pub struct ResolvedCamera {
    pub angles: CameraAngles,
    pub frame: ImageFrame,
    pub intrinsics: Intrinsics,
    pub rotation: Mat3,
}

impl CameraJson {
    pub fn resolve(&self) -> Result<ResolvedCamera, CamGeomError> {
        let angles =
            CameraAngles::from_degrees(self.pitch_deg, self.roll_deg, self.yaw_deg, self.vfov_deg)?;
        let frame = ImageFrame::new(self.width, self.height)?;
        let base = Intrinsics::from_vfov(angles.vfov, frame)?;
        let intrinsics = Intrinsics::new(
            self.fx.unwrap_or(base.fx),
            self.fy.unwrap_or(base.fy),
            self.ox.unwrap_or(base.ox),
            self.oy.unwrap_or(base.oy),
        )?;
        Ok(ResolvedCamera {
            angles,
            frame,
            intrinsics,
            rotation: angles_to_rotation(&angles),
        })
    }

    pub fn from_angles(angles: &CameraAngles, frame: ImageFrame) -> Self {
        Self {
            pitch_deg: angles.pitch.to_degrees(),
            roll_deg: angles.roll.to_degrees(),
            yaw_deg: angles.yaw.to_degrees(),
            vfov_deg: angles.vfov.to_degrees(),
            width: frame.width,
            height: frame.height,
            fx: None,
            fy: None,
            ox: None,
            oy: None,
        }
    }
}
