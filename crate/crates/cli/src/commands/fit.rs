//! `fit`: estimate body parameters from observed 2D joints under a selected
//! camera model (the problem's own calibrated camera, a fixed-focal
//! identity-rotation camera, or a camera loaded from a file).

use crate::args::FitArgs;
use crate::output::write_json_atomic;
use crate::CmdError;
use cambody::bodykin::default_template;
use cambody::camgeom::{CameraJson, Intrinsics, Mat3};
use cambody::fitter::{
    fit_multiframe, fit_single, heuristic_init, FitConfig, FitProblem, FitProblemJson,
    FitResultJson, MultiProblemJson,
};
use serde::Serialize;

enum CameraMode {
    /// The calibrated camera carried by the problem file.
    Gt,
    /// Fixed focal length, identity rotation, principal point at the image
    /// center.
    Fixed(f64),
    /// Camera JSON loaded from a separate file.
    File(String),
}

impl CameraMode {
    fn parse(text: &str) -> Result<Self, CmdError> {
        match text {
            "gt" => Ok(Self::Gt),
            "f5000" => Ok(Self::Fixed(5000.0)),
            "f2200" => Ok(Self::Fixed(2200.0)),
            other => match other.strip_prefix("file:") {
                Some(path) => Ok(Self::File(path.to_string())),
                None => Err(CmdError::user(format!(
                    "unknown camera mode '{other}' (expected gt, f5000, f2200 or file:PATH)"
                ))),
            },
        }
    }

    /// Intrinsics and rotation implied by the mode, given the problem's own
    /// camera object.
    fn resolve(&self, problem_camera: &CameraJson) -> Result<(Intrinsics, Mat3), CmdError> {
        let own = problem_camera
            .resolve()
            .map_err(|e| CmdError::user(format!("problem camera: {e}")))?;
        match self {
            Self::Gt => Ok((own.intrinsics, own.rotation)),
            Self::Fixed(f) => {
                let c = own.frame.center();
                let k = Intrinsics::with_focal(*f, c.x, c.y).map_err(CmdError::internal)?;
                Ok((k, Mat3::identity()))
            }
            Self::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CmdError::user(format!("{path}: {e}")))?;
                let json: CameraJson = serde_json::from_str(&text)
                    .map_err(|e| CmdError::user(format!("{path}: {e}")))?;
                let resolved = json
                    .resolve()
                    .map_err(|e| CmdError::user(format!("{path}: {e}")))?;
                Ok((resolved.intrinsics, resolved.rotation))
            }
        }
    }
}

#[derive(Serialize)]
struct FitOutput {
    camera_mode: String,
    #[serde(flatten)]
    result: FitResultJson,
}

pub fn run(args: &FitArgs, quiet: bool) -> Result<(), CmdError> {
    let mode = CameraMode::parse(&args.camera)?;
    let text = std::fs::read_to_string(&args.problem)
        .map_err(|e| CmdError::user(format!("{}: {e}", args.problem.display())))?;
    let template = default_template();
    let config = FitConfig {
        steps_per_stage: args.steps,
        ..FitConfig::default()
    };

    let result = if args.multi {
        let json: MultiProblemJson = serde_json::from_str(&text)
            .map_err(|e| CmdError::user(format!("{}: {e}", args.problem.display())))?;
        let mut problem = json
            .resolve(&template)
            .map_err(|e| CmdError::user(e.to_string()))?;
        let (intrinsics, _) = mode.resolve(&json.camera)?;
        problem.intrinsics = intrinsics;
        fit_multiframe(&problem, &config).map_err(|e| CmdError::user(e.to_string()))?
    } else {
        let json: FitProblemJson = serde_json::from_str(&text)
            .map_err(|e| CmdError::user(format!("{}: {e}", args.problem.display())))?;
        let (observed, _, init) = json.resolve().map_err(|e| CmdError::user(e.to_string()))?;
        let (intrinsics, rc) = mode.resolve(&json.camera)?;
        let init = match init {
            Some(params) => params,
            None => heuristic_init(&template, &observed, &intrinsics),
        };
        let problem = FitProblem {
            observed,
            intrinsics,
            rc,
            template,
            init,
        };
        fit_single(&problem, &config).map_err(|e| CmdError::user(e.to_string()))?
    };

    let output = FitOutput {
        camera_mode: args.camera.clone(),
        result: FitResultJson::from_result(&result),
    };
    write_json_atomic(&args.out, &output)?;
    if !quiet {
        println!(
            "fit finished: final energy {:.6e}, result written to {}",
            result.final_energy(),
            args.out.display()
        );
    }
    Ok(())
}
