//! `synth`: sample crop cameras, render perspective crops out of a panorama,
//! and write PPM files plus a JSONL manifest with exact ground-truth labels.

use crate::args::{Distribution, SynthArgs};
use crate::CmdError;
use cambody::camgeom::ImageFrame;
use cambody::panosample::{
    crop_from_pano, procedural_pano, read_pano, sample_pano360_camera, sample_specsyn_camera,
    write_sample_record, CropSpec, PanoImage, SampleRanges, SampleRecord, MANIFEST_NAME,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Height of procedurally generated panoramas (width is twice that).
const PROCEDURAL_PANO_HEIGHT: u32 = 1024;

fn load_pano(source: &str) -> Result<PanoImage, CmdError> {
    if let Some(kind) = source.strip_prefix("procedural:") {
        procedural_pano(kind, PROCEDURAL_PANO_HEIGHT).map_err(|e| CmdError::user(e.to_string()))
    } else {
        read_pano(std::path::Path::new(source)).map_err(|e| CmdError::user(e.to_string()))
    }
}

pub fn run(args: &SynthArgs, quiet: bool) -> Result<(), CmdError> {
    let out_frame =
        ImageFrame::new(args.width, args.height).map_err(|e| CmdError::user(e.to_string()))?;
    let pano = load_pano(&args.pano)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CmdError::user(format!("{}: {e}", args.out.display())))?;

    // Start from a fresh manifest so reruns are reproducible byte for byte.
    let manifest = args.out.join(MANIFEST_NAME);
    std::fs::write(&manifest, b"")
        .map_err(|e| CmdError::user(format!("{}: {e}", manifest.display())))?;

    let ranges = SampleRanges {
        out: out_frame,
        ..SampleRanges::default()
    };
    for i in 0..args.count {
        // One independent, recorded seed per sample.
        let sample_seed = args.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let spec = match args.dist {
            Distribution::Pano360 => sample_pano360_camera(&mut rng, &ranges)
                .map_err(|e| CmdError::user(e.to_string()))?,
            Distribution::Specsyn => CropSpec {
                angles: sample_specsyn_camera(&mut rng),
                out: out_frame,
            },
        };
        let raster = crop_from_pano(&pano, &spec).map_err(CmdError::internal)?;
        let record = SampleRecord::new(format!("crop_{i:05}.ppm"), &spec, sample_seed)
            .map_err(CmdError::internal)?;
        write_sample_record(&record, &raster, &args.out)
            .map_err(|e| CmdError::user(e.to_string()))?;
    }

    if !quiet {
        println!(
            "wrote {} crop(s) and {} under {}",
            args.count,
            MANIFEST_NAME,
            args.out.display()
        );
    }
    Ok(())
}
