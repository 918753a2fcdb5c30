//! CSV, image and depth-grid output for experiment reports.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use crate::error::{Error, Result};

use super::experiment::ExperimentReport;

const METRICS_HEADER: [&str; 16] = [
    "kind",
    "round",
    "index",
    "stage",
    "x",
    "y",
    "z",
    "perceived_mean",
    "perceived_std",
    "gt_mean",
    "gt_std",
    "w2",
    "max_w2",
    "eig",
    "eig_unmasked",
    "eig_masked",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Long-format metrics table: one `waypoint` row per waypoint, one
/// `aggregate` row (mean in `w2`, max in `max_w2`), then one `selection`
/// row per selected view.
pub fn metrics_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(METRICS_HEADER)?;
    let blank = String::new;
    for m in &report.waypoints {
        w.write_record([
            "waypoint".to_string(),
            blank(),
            m.waypoint.to_string(),
            blank(),
            m.position.x.to_string(),
            m.position.y.to_string(),
            m.position.z.to_string(),
            m.perceived.mean.to_string(),
            m.perceived.std.to_string(),
            m.ground_truth.mean.to_string(),
            m.ground_truth.std.to_string(),
            m.w2.to_string(),
            blank(),
            blank(),
            blank(),
            blank(),
        ])?;
    }
    let mut row = vec![blank(); METRICS_HEADER.len()];
    row[0] = "aggregate".into();
    row[11] = report.mean_w2.to_string();
    row[12] = report.max_w2.to_string();
    w.write_record(&row)?;
    for s in &report.selections {
        w.write_record([
            "selection".to_string(),
            s.round.to_string(),
            s.candidate.to_string(),
            s.stage.to_string(),
            s.position[0].to_string(),
            s.position[1].to_string(),
            s.position[2].to_string(),
            blank(),
            blank(),
            blank(),
            blank(),
            blank(),
            blank(),
            s.eig.to_string(),
            s.eig_unmasked.to_string(),
            opt(s.eig_masked),
        ])?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// `round,k,alpha,r_mask,argmin` for every round.
pub fn risk_history_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["round", "k", "alpha", "r_mask", "argmin"])?;
    for snap in &report.risk_history {
        for (k, e) in snap.entries.iter().enumerate() {
            w.write_record([
                snap.round.to_string(),
                k.to_string(),
                e.alpha.to_string(),
                e.r_mask.to_string(),
                e.argmin.map(|i| i.to_string()).unwrap_or_default(),
            ])?;
        }
    }
    finish(w)
}

/// `round,coordinates,mean_inverse_fisher`.
pub fn uncertainty_csv(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["round", "coordinates", "mean_inverse_fisher"])?;
    for u in &report.uncertainty {
        w.write_record([
            u.round.to_string(),
            u.coordinates.to_string(),
            u.mean_inverse_fisher.to_string(),
        ])?;
    }
    finish(w)
}

/// Evaluation values read back from a metrics table.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedMetrics {
    pub waypoint_w2: Vec<f64>,
    pub mean_w2: f64,
    pub max_w2: f64,
    pub selections: usize,
}

pub fn parse_metrics_csv(text: &str) -> Result<ParsedMetrics> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
    let mut out = ParsedMetrics {
        waypoint_w2: Vec::new(),
        mean_w2: f64::NAN,
        max_w2: f64::NAN,
        selections: 0,
    };
    let mut saw_aggregate = false;
    for rec in r.records() {
        let rec = rec?;
        match &rec[0] {
            "waypoint" => out.waypoint_w2.push(num(&rec[11])?),
            "aggregate" => {
                out.mean_w2 = num(&rec[11])?;
                out.max_w2 = num(&rec[12])?;
                saw_aggregate = true;
            }
            "selection" => out.selections += 1,
            other => return Err(Error::Parse(format!("unknown row kind {other:?}"))),
        }
    }
    if !saw_aggregate {
        return Err(Error::Parse("metrics table has no aggregate row".into()));
    }
    Ok(out)
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes `metrics.csv`, `risk_history.csv`, `uncertainty.csv`, `scene.json` and every
/// captured view (`views/view_NN.ppm` plus a depth grid) under `out_dir`.
/// Returns the written paths.
pub fn emit_report(report: &ExperimentReport, out_dir: &FsPath) -> Result<Vec<PathBuf>> {
    if !report.valid {
        return Err(Error::InvalidArgument(format!(
            "refusing to emit an invalid report: {}",
            report.failure.as_deref().unwrap_or("unknown failure")
        )));
    }
    let views_dir = out_dir.join("views");
    fs::create_dir_all(&views_dir).map_err(|e| Error::io(&views_dir, e))?;
    let mut written = vec![
        write(out_dir.join("metrics.csv"), &metrics_csv(report)?)?,
        write(out_dir.join("risk_history.csv"), &risk_history_csv(report)?)?,
        write(out_dir.join("uncertainty.csv"), &uncertainty_csv(report)?)?,
        write(out_dir.join("scene.json"), &report.scene.to_json())?,
    ];
    for (i, v) in report.views.iter().enumerate() {
        let ppm = views_dir.join(format!("view_{i:02}_stage{}.ppm", v.stage));
        v.image.write_ppm(&ppm)?;
        let depth = views_dir.join(format!("view_{i:02}_stage{}.depth.txt", v.stage));
        v.image.write_depth_grid(&depth)?;
        written.push(ppm);
        written.push(depth);
    }
    Ok(written)
}
