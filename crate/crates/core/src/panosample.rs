//! Synthetic calibration data from equirectangular panoramas: perspective
//! crops with exact ground-truth camera labels, camera-distribution
//! samplers, and a PPM + JSONL-manifest store.
//!
//! Samplers are generic over `rand::Rng`; the tooling drives them with
//! `ChaCha8Rng`, a seedable generator with a published algorithm and a
//! platform-independent stream, and records the per-sample seed in the
//! manifest so every crop is reproducible anywhere.
//!
//! Equirectangular mapping: longitude `lon` in `[-pi, pi)` maps to
//! `u = (lon/2pi + 0.5) * W`, latitude `lat` in `[-pi/2, pi/2]` to
//! `v = (0.5 - lat/pi) * H` (north at the top). A back-projected camera ray
//! `d` (world frame) has `lon = atan2(d_x, d_z)` and `lat = atan2(-d_y,
//! sqrt(d_x^2 + d_z^2))`, so a camera pitched down looks at negative
//! latitudes and the horizon sits where the crop row crosses the equator.

use crate::camgeom::{
    angles_to_rotation, vfov_to_focal, CamGeomError, CameraAngles, ImageFrame, Vec3,
};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum PanoError {
    #[error("panorama must be a full sphere with width == 2 * height, got {width}x{height}")]
    NotEquirectangular { width: u32, height: u32 },
    #[error("pixel buffer holds {got} bytes, expected {expected}")]
    BufferSize { expected: usize, got: usize },
    #[error("invalid sampling range: {0}")]
    InvalidRange(String),
    #[error("unknown procedural panorama '{0}' (expected checker, hemisphere or gradient)")]
    UnknownProcedural(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: not a binary PPM (P6) file: {reason}")]
    BadPpm { path: PathBuf, reason: String },
    #[error("{path}: bad manifest line {line}: {reason}")]
    BadManifest {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Camera(#[from] CamGeomError),
}

fn io_err(path: &Path, source: std::io::Error) -> PanoError {
    PanoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Interleaved 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, rgb: Vec<u8>) -> Result<Self, PanoError> {
        let expected = 3 * width as usize * height as usize;
        if rgb.len() != expected {
            return Err(PanoError::BufferSize {
                expected,
                got: rgb.len(),
            });
        }
        Ok(Self { width, height, rgb })
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = 3 * (y as usize * self.width as usize + x as usize);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }
}

/// A full-sphere equirectangular panorama (width exactly twice the height).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanoImage {
    raster: Raster,
}

impl PanoImage {
    pub fn new(width: u32, height: u32, rgb: Vec<u8>) -> Result<Self, PanoError> {
        if width != 2 * height || height == 0 {
            return Err(PanoError::NotEquirectangular { width, height });
        }
        Ok(Self {
            raster: Raster::new(width, height, rgb)?,
        })
    }

    pub fn width(&self) -> u32 {
        self.raster.width
    }

    pub fn height(&self) -> u32 {
        self.raster.height
    }

    pub fn raster(&self) -> &Raster {
        &self.raster
    }

    /// Bilinear sample at continuous panorama coordinates, wrapping
    /// horizontally and clamping at the poles. Returns linear (unrounded)
    /// channel values.
    fn sample(&self, u: f64, v: f64) -> [f64; 3] {
        let w = self.raster.width as i64;
        let h = self.raster.height as i64;
        let uf = u - 0.5;
        let vf = v - 0.5;
        let i0 = uf.floor();
        let j0 = vf.floor();
        let a = uf - i0;
        let b = vf - j0;
        let x0 = (i0 as i64).rem_euclid(w);
        let x1 = (i0 as i64 + 1).rem_euclid(w);
        let y0 = (j0 as i64).clamp(0, h - 1);
        let y1 = (j0 as i64 + 1).clamp(0, h - 1);
        let p00 = self.raster.pixel(x0 as u32, y0 as u32);
        let p10 = self.raster.pixel(x1 as u32, y0 as u32);
        let p01 = self.raster.pixel(x0 as u32, y1 as u32);
        let p11 = self.raster.pixel(x1 as u32, y1 as u32);
        let mut out = [0.0; 3];
        for c in 0..3 {
            let top = (1.0 - a) * p00[c] as f64 + a * p10[c] as f64;
            let bottom = (1.0 - a) * p01[c] as f64 + a * p11[c] as f64;
            out[c] = (1.0 - b) * top + b * bottom;
        }
        out
    }
}

/// A perspective crop request: camera angles (the vfov fixes the focal
/// length) and the output raster size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropSpec {
    pub angles: CameraAngles,
    pub out: ImageFrame,
}

/// Render a perspective view out of a panorama. Each output pixel center is
/// back-projected through the pinhole (principal point at the crop center),
/// rotated camera-to-world, converted to longitude/latitude and sampled
/// bilinearly. Byte rounding is half-to-even, so identical specs produce
/// bitwise-identical crops.
pub fn crop_from_pano(pano: &PanoImage, spec: &CropSpec) -> Result<Raster, PanoError> {
    let focal = vfov_to_focal(spec.angles.vfov, spec.out.height)?;
    let center = spec.out.center();
    let cam_to_world = angles_to_rotation(&spec.angles).transpose();
    let out_w = spec.out.width as usize;
    let out_h = spec.out.height as usize;
    let pano_w = pano.width() as f64;
    let pano_h = pano.height() as f64;

    let render_row = |y: usize, row: &mut [u8]| {
        let ry = (y as f64 + 0.5 - center.y) / focal;
        for x in 0..out_w {
            let rx = (x as f64 + 0.5 - center.x) / focal;
            let dir = cam_to_world * Vec3::new(rx, ry, 1.0);
            let lon = dir.x.atan2(dir.z);
            let lat = (-dir.y).atan2((dir.x * dir.x + dir.z * dir.z).sqrt());
            let u = (lon / std::f64::consts::TAU + 0.5) * pano_w;
            let v = (0.5 - lat / std::f64::consts::PI) * pano_h;
            let rgb = pano.sample(u, v);
            for c in 0..3 {
                row[3 * x + c] = rgb[c].round_ties_even().clamp(0.0, 255.0) as u8;
            }
        }
    };

    let mut rgb = vec![0u8; 3 * out_w * out_h];
    #[cfg(feature = "parallel")]
    {
        rgb.par_chunks_mut(3 * out_w)
            .enumerate()
            .for_each(|(y, row)| render_row(y, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (y, row) in rgb.chunks_mut(3 * out_w).enumerate() {
            render_row(y, row);
        }
    }
    Raster::new(spec.out.width, spec.out.height, rgb)
}

/// Uniform sampling ranges (degrees) for panorama crop cameras, plus the
/// output size. Defaults cover the calibration bin ranges; yaw is always
/// uniform over the full circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRanges {
    pub pitch_deg: (f64, f64),
    pub roll_deg: (f64, f64),
    pub vfov_deg: (f64, f64),
    pub out: ImageFrame,
}

impl Default for SampleRanges {
    fn default() -> Self {
        Self {
            pitch_deg: (-45.0, 45.0),
            roll_deg: (-45.0, 45.0),
            vfov_deg: (15.0, 140.0),
            out: ImageFrame {
                width: 224,
                height: 224,
            },
        }
    }
}

impl SampleRanges {
    // `!(lo < hi)` also rejects NaN bounds, unlike `lo >= hi`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn validate(&self) -> Result<(), PanoError> {
        let check = |name: &str, (lo, hi): (f64, f64)| {
            if !(lo < hi) {
                return Err(PanoError::InvalidRange(format!("{name}: [{lo}, {hi}]")));
            }
            Ok(())
        };
        check("pitch_deg", self.pitch_deg)?;
        check("roll_deg", self.roll_deg)?;
        check("vfov_deg", self.vfov_deg)?;
        if self.vfov_deg.0 <= 0.0 || self.vfov_deg.1 >= 180.0 {
            return Err(PanoError::InvalidRange(format!(
                "vfov_deg must stay inside (0, 180), got [{}, {}]",
                self.vfov_deg.0, self.vfov_deg.1
            )));
        }
        if self.out.width == 0 || self.out.height == 0 {
            return Err(PanoError::InvalidRange("empty output frame".into()));
        }
        Ok(())
    }
}

/// Uniform over `(-pi, pi]`.
fn sample_full_yaw<R: Rng>(rng: &mut R) -> f64 {
    std::f64::consts::PI - rng.random::<f64>() * std::f64::consts::TAU
}

/// Draw a crop camera with uniform pitch, roll and vfov over the configured
/// ranges and yaw uniform over the full circle. Draw order is fixed
/// (pitch, roll, vfov, yaw), so a seeded generator reproduces specs exactly.
pub fn sample_pano360_camera<R: Rng>(
    rng: &mut R,
    ranges: &SampleRanges,
) -> Result<CropSpec, PanoError> {
    ranges.validate()?;
    let pitch = rng.random_range(ranges.pitch_deg.0..ranges.pitch_deg.1);
    let roll = rng.random_range(ranges.roll_deg.0..ranges.roll_deg.1);
    let vfov = rng.random_range(ranges.vfov_deg.0..ranges.vfov_deg.1);
    let yaw = sample_full_yaw(rng).to_degrees();
    Ok(CropSpec {
        angles: CameraAngles::from_degrees(pitch, roll, yaw, vfov)?,
        out: ranges.out,
    })
}

/// Draw camera angles from the synthetic-scene evaluation distributions:
/// pitch uniform over [-30, 15] degrees, roll normal with a 2.8 degree
/// standard deviation, vfov uniform over [70, 130] degrees, yaw uniform.
pub fn sample_specsyn_camera<R: Rng>(rng: &mut R) -> CameraAngles {
    let pitch = rng.random_range(-30.0f64..15.0);
    let roll = Normal::new(0.0f64, 2.8).expect("positive std dev").sample(rng);
    let vfov = rng.random_range(70.0f64..130.0);
    let yaw = sample_full_yaw(rng).to_degrees();
    CameraAngles::from_degrees(pitch, roll, yaw, vfov).expect("sampled vfov is valid")
}

/// Procedural test panoramas: "checker" (longitude/latitude checkerboard),
/// "hemisphere" (white above the equator, black below), and "gradient"
/// (red ramps with longitude, green with latitude).
pub fn procedural_pano(kind: &str, height: u32) -> Result<PanoImage, PanoError> {
    let width = 2 * height;
    let (w, h) = (width as usize, height as usize);
    let mut rgb = vec![0u8; 3 * w * h];
    match kind {
        "checker" => {
            let cell = (height / 8).max(1) as usize;
            for y in 0..h {
                for x in 0..w {
                    let on = (x / cell + y / cell).is_multiple_of(2);
                    let value = if on { 230 } else { 25 };
                    let i = 3 * (y * w + x);
                    rgb[i..i + 3].copy_from_slice(&[value, value, value]);
                }
            }
        }
        "hemisphere" => {
            for y in 0..h {
                let value = if y < h / 2 { 255 } else { 0 };
                for x in 0..w {
                    let i = 3 * (y * w + x);
                    rgb[i..i + 3].copy_from_slice(&[value, value, value]);
                }
            }
        }
        "gradient" => {
            for y in 0..h {
                let g = (y as f64 / (h - 1).max(1) as f64 * 255.0).round() as u8;
                for x in 0..w {
                    let r = (x as f64 / (w - 1) as f64 * 255.0).round() as u8;
                    let i = 3 * (y * w + x);
                    rgb[i..i + 3].copy_from_slice(&[r, g, 128]);
                }
            }
        }
        other => return Err(PanoError::UnknownProcedural(other.to_string())),
    }
    PanoImage::new(width, height, rgb)
}

/// One generated sample: the crop file name, its ground-truth camera labels
/// in degrees, the focal length implied by the vfov and crop height, and
/// the seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub file: String,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub yaw_deg: f64,
    pub vfov_deg: f64,
    pub focal_px: f64,
    pub seed: u64,
}

impl SampleRecord {
    pub fn new(file: String, spec: &CropSpec, seed: u64) -> Result<Self, PanoError> {
        let focal = vfov_to_focal(spec.angles.vfov, spec.out.height)?;
        Ok(Self {
            file,
            pitch_deg: spec.angles.pitch.to_degrees(),
            roll_deg: spec.angles.roll.to_degrees(),
            yaw_deg: spec.angles.yaw.to_degrees(),
            vfov_deg: spec.angles.vfov.to_degrees(),
            focal_px: focal,
            seed,
        })
    }
}

/// Name of the per-directory manifest file (one JSON record per line).
pub const MANIFEST_NAME: &str = "manifest.jsonl";

/// Write the crop as binary PPM under `dir` and append the record to the
/// manifest. Returns the manifest line that was written.
pub fn write_sample_record(
    record: &SampleRecord,
    raster: &Raster,
    dir: &Path,
) -> Result<String, PanoError> {
    write_ppm(raster, &dir.join(&record.file))?;
    let line = serde_json::to_string(record).expect("record serializes");
    let manifest = dir.join(MANIFEST_NAME);
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&manifest)
        .map_err(|e| io_err(&manifest, e))?;
    f.write_all(line.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|e| io_err(&manifest, e))?;
    Ok(line)
}

pub fn read_manifest(path: &Path) -> Result<Vec<SampleRecord>, PanoError> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| PanoError::BadManifest {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Binary PPM (P6, maxval 255). The header is exactly
/// `P6\n{width} {height}\n255\n`.
pub fn write_ppm(raster: &Raster, path: &Path) -> Result<(), PanoError> {
    let mut data = format!("P6\n{} {}\n255\n", raster.width, raster.height).into_bytes();
    data.extend_from_slice(&raster.rgb);
    std::fs::write(path, data).map_err(|e| io_err(path, e))
}

pub fn read_ppm(path: &Path) -> Result<Raster, PanoError> {
    let bad = |reason: &str| PanoError::BadPpm {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let data = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let mut cursor = std::io::Cursor::new(&data);
    let mut token = |what: &str| -> Result<String, PanoError> {
        // whitespace-separated tokens, '#' starts a comment to end of line
        let mut out = String::new();
        let mut byte = [0u8; 1];
        loop {
            if cursor.read(&mut byte).map_err(|e| io_err(path, e))? == 0 {
                if out.is_empty() {
                    return Err(bad(&format!("missing {what}")));
                }
                return Ok(out);
            }
            match byte[0] {
                b'#' if out.is_empty() => {
                    while cursor.read(&mut byte).map_err(|e| io_err(path, e))? == 1
                        && byte[0] != b'\n'
                    {}
                }
                c if c.is_ascii_whitespace() => {
                    if !out.is_empty() {
                        return Ok(out);
                    }
                }
                c => out.push(c as char),
            }
        }
    };
    if token("magic")? != "P6" {
        return Err(bad("magic number is not P6"));
    }
    let width: u32 = token("width")?.parse().map_err(|_| bad("bad width"))?;
    let height: u32 = token("height")?.parse().map_err(|_| bad("bad height"))?;
    let maxval: u32 = token("maxval")?.parse().map_err(|_| bad("bad maxval"))?;
    if maxval != 255 {
        return Err(bad("only maxval 255 is supported"));
    }
    let offset = cursor.position() as usize;
    let expected = 3 * width as usize * height as usize;
    if data.len() - offset < expected {
        return Err(bad("truncated pixel data"));
    }
    Raster::new(width, height, data[offset..offset + expected].to_vec())
}

/// Read an equirectangular panorama from a PPM file.
pub fn read_pano(path: &Path) -> Result<PanoImage, PanoError> {
    let raster = read_ppm(path)?;
    PanoImage::new(raster.width, raster.height, raster.rgb)
}
