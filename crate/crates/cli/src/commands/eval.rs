//! `eval`: compute PA-MPJPE and the world-frame MPJPE variants over a sample
//! file, with an optional per-camera bucket breakdown.

use crate::args::EvalArgs;
use crate::output::write_json_atomic;
use crate::CmdError;
use cambody::metrics::{
    bucket_breakdown, evaluate_samples, BreakdownTable, BucketRow, BucketSpec, CameraMeta,
    EvalSample, EvalSampleJson, SampleMetrics,
};
use serde::Serialize;

#[derive(Serialize)]
struct EvalReport {
    root_align: bool,
    samples: usize,
    /// Means over samples, millimeters.
    aggregate: SampleMetrics,
    per_sample: Vec<SampleMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<BreakdownTable>,
}

pub fn run(args: &EvalArgs, quiet: bool) -> Result<(), CmdError> {
    let root_align = match args.root_align.as_str() {
        "on" => true,
        "off" => false,
        other => {
            return Err(CmdError::user(format!(
                "--root-align must be 'on' or 'off', got '{other}'"
            )))
        }
    };
    let text = std::fs::read_to_string(&args.samples)
        .map_err(|e| CmdError::user(format!("{}: {e}", args.samples.display())))?;
    let jsons: Vec<EvalSampleJson> = serde_json::from_str(&text)
        .map_err(|e| CmdError::user(format!("{}: {e}", args.samples.display())))?;
    let samples: Vec<EvalSample> = jsons
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.resolve()
                .map_err(|e| CmdError::user(format!("sample {i}: {e}")))
        })
        .collect::<Result<_, _>>()?;

    let per_sample = evaluate_samples(&samples, root_align)
        .map_err(|(i, e)| CmdError::user(format!("sample {i}: {e}")))?;

    let n = per_sample.len().max(1) as f64;
    let aggregate = SampleMetrics {
        mpjpe: per_sample.iter().map(|m| m.mpjpe).sum::<f64>() / n,
        pa_mpjpe: per_sample.iter().map(|m| m.pa_mpjpe).sum::<f64>() / n,
        w_mpjpe_v1: per_sample.iter().map(|m| m.w_mpjpe_v1).sum::<f64>() / n,
        w_mpjpe_v2: per_sample.iter().map(|m| m.w_mpjpe_v2).sum::<f64>() / n,
    };

    let breakdown = match &args.buckets {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CmdError::user(format!("{}: {e}", path.display())))?;
            let spec: BucketSpec = serde_json::from_str(&text)
                .map_err(|e| CmdError::user(format!("{}: {e}", path.display())))?;
            let metas: Vec<CameraMeta> = samples.iter().map(|s| s.meta).collect();
            let values: Vec<f64> = per_sample.iter().map(|m| m.w_mpjpe_v2).collect();
            Some(
                bucket_breakdown(&metas, &values, &spec)
                    .map_err(|e| CmdError::user(e.to_string()))?,
            )
        }
        None => None,
    };

    let report = EvalReport {
        root_align,
        samples: samples.len(),
        aggregate,
        per_sample,
        breakdown,
    };
    if let Some(out) = &args.out {
        write_json_atomic(out, &report)?;
    }
    if !quiet {
        print_text_report(&report);
    }
    Ok(())
}

fn print_text_report(report: &EvalReport) {
    println!(
        "samples: {}    root_align: {}",
        report.samples,
        if report.root_align { "on" } else { "off" }
    );
    println!("{:<14} {:>14}", "metric", "mean_mm");
    println!("{:<14} {:>14.6}", "mpjpe", report.aggregate.mpjpe);
    println!("{:<14} {:>14.6}", "pa_mpjpe", report.aggregate.pa_mpjpe);
    println!("{:<14} {:>14.6}", "w_mpjpe_v1", report.aggregate.w_mpjpe_v1);
    println!("{:<14} {:>14.6}", "w_mpjpe_v2", report.aggregate.w_mpjpe_v2);
    if let Some(table) = &report.breakdown {
        println!("\nw_mpjpe_v2 by focal length (px):");
        print_axis(&table.focal);
        println!("\nw_mpjpe_v2 by pitch (deg):");
        print_axis(&table.pitch);
    }
}

fn print_axis(rows: &[BucketRow]) {
    println!("{:<22} {:>7} {:>14}", "bucket", "count", "mean_mm");
    for row in rows {
        let bucket = match (row.lo, row.hi) {
            (None, Some(hi)) => format!("(-inf, {hi})"),
            (Some(lo), Some(hi)) => format!("[{lo}, {hi})"),
            (Some(lo), None) => format!("[{lo}, +inf)"),
            (None, None) => "(-inf, +inf)".to_string(),
        };
        match row.mean {
            Some(mean) => println!("{:<22} {:>7} {:>14.6}", bucket, row.count, mean),
            None => println!("{:<22} {:>7} {:>14}", bucket, row.count, "-"),
        }
    }
}
