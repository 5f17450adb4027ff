use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::RunConfig;
use super::io::{load_dataset, load_regions, load_schedule, save_dataset, save_regions, DatasetMeta};
use super::svg;
use crate::bayes::{
    confusion, design_regions, generate_dataset, simulate_timeline, ConfusionMatrix,
    DecisionRegionGrid, Provenance, Sample, Timeline,
};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

pub const DATASET_FILE: &str = "dataset.csv";
pub const REGIONS_FILE: &str = "regions.json";
pub const REGIONS_SVG: &str = "regions.svg";
pub const CONFUSION_FILE: &str = "confusion.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const TRACE_FILE: &str = "trace.csv";
pub const TRACE_SVG: &str = "trace.svg";

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn check_matches(what: &str, detector: crate::DetectorKind, taps: usize, other: &DatasetMeta) -> Result<()> {
    if detector != other.detector || taps != other.taps {
        return Err(Error::AxisMismatch(format!(
            "{what} is for detector={detector} taps={taps}, dataset is detector={} taps={}",
            other.detector, other.taps
        )));
    }
    Ok(())
}

pub struct SimulateOutput {
    pub path: PathBuf,
    pub meta: DatasetMeta,
    pub samples: Vec<Sample>,
}

/// Generates the Monte-Carlo dataset and writes it as CSV.
pub fn cmd_simulate(config: &RunConfig) -> Result<SimulateOutput> {
    let detector = config.validate()?;
    let samples = generate_dataset(&config.priors, &config.mc, &detector, &config.power)?;
    let meta = DatasetMeta {
        detector: config.detector,
        taps: detector.grid().len(),
        config_hash: config.hash(),
        seed: config.mc.seed,
    };
    ensure_dir(&config.output_dir)?;
    let path = config.output_dir.join(DATASET_FILE);
    save_dataset(&path, &meta, &samples)?;
    Ok(SimulateOutput {
        path,
        meta,
        samples,
    })
}

pub struct DesignOutput {
    pub regions_path: PathBuf,
    pub svg_path: PathBuf,
    pub regions: DecisionRegionGrid,
}

/// Designs decision regions from a dataset file.
pub fn cmd_design(config: &RunConfig, dataset: &Path) -> Result<DesignOutput> {
    let detector = config.validate()?;
    let (meta, samples) = load_dataset(dataset)?;
    check_matches("config", config.detector, detector.grid().len(), &meta)?;
    let regions = design_regions(
        &samples,
        &config.grid_spec(),
        &config.cost,
        Provenance {
            config_hash: config.hash(),
            seed: meta.seed,
            detector: meta.detector,
            taps: meta.taps,
            clamped: 0,
        },
    )?;
    ensure_dir(&config.output_dir)?;
    let regions_path = config.output_dir.join(REGIONS_FILE);
    save_regions(&regions_path, &regions)?;
    let svg_path = config.output_dir.join(REGIONS_SVG);
    let title = format!("Decision regions ({}, {} taps)", meta.detector, meta.taps);
    write_file(&svg_path, &svg::render_regions(&regions, &title))?;
    Ok(DesignOutput {
        regions_path,
        svg_path,
        regions,
    })
}

pub struct EvalOutput {
    pub confusion_path: PathBuf,
    pub summary_path: PathBuf,
    pub matrix: ConfusionMatrix,
    pub summary: String,
}

pub fn confusion_csv(m: &ConfusionMatrix) -> String {
    let mut out = String::from("decision,H0,H1,H2,H3\n");
    let f = m.frequencies();
    for d in Hypothesis::ALL {
        let row: Vec<String> = f[d.index()].iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{d},{}", row.join(","));
    }
    out
}

pub fn summary_text(m: &ConfusionMatrix) -> String {
    let mut out = String::new();
    for t in Hypothesis::ALL {
        let n = m.truth_count(t);
        let correct = m.frequency(t, t);
        let alarm = m.alarm_rate(t);
        let kind = match t {
            Hypothesis::H0 | Hypothesis::H1 => "false_alarm",
            Hypothesis::H2 | Hypothesis::H3 => "detection",
        };
        let _ = writeln!(
            out,
            "{t} ({}): n={n} correct={correct:.4} {kind}={alarm:.4}",
            t.description()
        );
    }
    out
}

/// Classifies a dataset with saved regions and writes the confusion matrix.
pub fn cmd_eval(regions: &Path, dataset: &Path, out_dir: &Path) -> Result<EvalOutput> {
    let grid = load_regions(regions)?;
    let (meta, samples) = load_dataset(dataset)?;
    check_matches("regions file", grid.provenance.detector, grid.provenance.taps, &meta)?;
    let matrix = confusion(&samples, &grid)?;
    ensure_dir(out_dir)?;
    let confusion_path = out_dir.join(CONFUSION_FILE);
    write_file(&confusion_path, &confusion_csv(&matrix))?;
    let summary = summary_text(&matrix);
    let summary_path = out_dir.join(SUMMARY_FILE);
    write_file(&summary_path, &summary)?;
    Ok(EvalOutput {
        confusion_path,
        summary_path,
        matrix,
        summary,
    })
}

pub struct TraceOutput {
    pub trace_path: PathBuf,
    pub svg_path: PathBuf,
    pub timeline: Timeline,
}

pub fn trace_csv(t: &Timeline) -> String {
    let mut out = String::from("epoch,truth,power_db,distortion,decision,cum_h0,cum_h1,cum_h2,cum_h3\n");
    for (e, c) in t.epochs.iter().zip(&t.cumulative) {
        let m = &e.measurement;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            m.epoch, e.truth, m.power_db, m.distortion, e.decision, c[0], c[1], c[2], c[3]
        );
    }
    out
}

/// Runs a scripted schedule against saved regions.
pub fn cmd_trace(config: &RunConfig, schedule: &Path, regions: &Path) -> Result<TraceOutput> {
    let detector = config.validate()?;
    let schedule = load_schedule(schedule)?;
    let grid = load_regions(regions)?;
    let p = &grid.provenance;
    if p.detector != config.detector || p.taps != detector.grid().len() {
        return Err(Error::AxisMismatch(format!(
            "regions file is for detector={} taps={}, config is detector={} taps={}",
            p.detector,
            p.taps,
            config.detector,
            detector.grid().len()
        )));
    }
    let timeline = simulate_timeline(
        &schedule,
        &detector,
        &config.power,
        &config.priors.tracking,
        &grid,
        config.mc.seed,
    )?;
    ensure_dir(&config.output_dir)?;
    let trace_path = config.output_dir.join(TRACE_FILE);
    write_file(&trace_path, &trace_csv(&timeline))?;
    let svg_path = config.output_dir.join(TRACE_SVG);
    write_file(&svg_path, &svg::render_traces(&timeline.cumulative, "Cumulative decisions"))?;
    Ok(TraceOutput {
        trace_path,
        svg_path,
        timeline,
    })
}
