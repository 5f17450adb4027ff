use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bayes::{Axis, DecisionRegionGrid, GridSpec, Provenance, Sample, Schedule, Theta};
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::monitors::{DetectorKind, Measurement};

pub const DATASET_VERSION: u32 = 1;
pub const REGION_VERSION: u32 = 1;

pub const DATASET_HEADER: [&str; 11] = [
    "epoch",
    "truth",
    "power_db",
    "distortion",
    "eta",
    "dtau_i",
    "dtheta_i",
    "alpha",
    "delay",
    "jnr",
    "cn0_dbhz",
];

const DATASET_TAG: &str = "# pdml-dataset";

/// Provenance line written above the CSV header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetMeta {
    pub detector: DetectorKind,
    pub taps: usize,
    pub config_hash: String,
    pub seed: u64,
}

impl DatasetMeta {
    fn line(&self) -> String {
        format!(
            "{DATASET_TAG} v{DATASET_VERSION} detector={} taps={} config={} seed={}",
            self.detector, self.taps, self.config_hash, self.seed
        )
    }

    fn parse(path: &Path, line: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: m.to_string(),
        };
        let rest = line
            .strip_prefix(DATASET_TAG)
            .ok_or_else(|| bad("missing '# pdml-dataset v<N>' provenance line"))?;
        let mut words = rest.split_whitespace();
        let version = words.next().unwrap_or("");
        if version != format!("v{DATASET_VERSION}") {
            return Err(Error::Version {
                path: path.to_path_buf(),
                found: version.to_string(),
                expected: DATASET_VERSION,
            });
        }
        let (mut detector, mut taps, mut config_hash, mut seed) = (None, None, None, None);
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| bad(&format!("malformed provenance field '{w}'")))?;
            match k {
                "detector" => detector = Some(v.parse::<DetectorKind>().map_err(|e| bad(&e.to_string()))?),
                "taps" => taps = Some(v.parse::<usize>().map_err(|e| bad(&format!("taps: {e}")))?),
                "config" => config_hash = Some(v.to_string()),
                "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(&format!("seed: {e}")))?),
                _ => {}
            }
        }
        Ok(Self {
            detector: detector.ok_or_else(|| bad("provenance line lacks detector"))?,
            taps: taps.ok_or_else(|| bad("provenance line lacks taps"))?,
            config_hash: config_hash.unwrap_or_default(),
            seed: seed.unwrap_or(0),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct DatasetRow {
    epoch: u64,
    truth: Hypothesis,
    power_db: f64,
    distortion: f64,
    eta: f64,
    dtau_i: f64,
    dtheta_i: f64,
    alpha: f64,
    delay: f64,
    jnr: f64,
    cn0_dbhz: f64,
}

impl From<&Sample> for DatasetRow {
    fn from(s: &Sample) -> Self {
        let t = &s.theta;
        Self {
            epoch: s.measurement.epoch,
            truth: s.truth,
            power_db: s.measurement.power_db,
            distortion: s.measurement.distortion,
            eta: t.eta,
            dtau_i: t.dtau_i,
            dtheta_i: t.dtheta_i,
            alpha: t.alpha,
            delay: t.delay,
            jnr: t.jnr,
            cn0_dbhz: t.cn0_dbhz,
        }
    }
}

impl From<DatasetRow> for Sample {
    fn from(r: DatasetRow) -> Self {
        Sample {
            measurement: Measurement {
                power_db: r.power_db,
                distortion: r.distortion,
                epoch: r.epoch,
            },
            truth: r.truth,
            theta: Theta {
                eta: r.eta,
                dtau_i: r.dtau_i,
                dtheta_i: r.dtheta_i,
                alpha: r.alpha,
                delay: r.delay,
                jnr: r.jnr,
                cn0_dbhz: r.cn0_dbhz,
            },
        }
    }
}

pub fn write_dataset<W: Write>(mut w: W, meta: &DatasetMeta, samples: &[Sample]) -> Result<W> {
    let io = |e: std::io::Error| Error::io("<dataset>", e);
    writeln!(w, "{}", meta.line()).map_err(io)?;
    let mut csv = csv::Writer::from_writer(w);
    for s in samples {
        csv.serialize(DatasetRow::from(s))
            .map_err(|e| Error::io("<dataset>", std::io::Error::other(e)))?;
    }
    csv.into_inner()
        .map_err(|e| Error::io("<dataset>", std::io::Error::other(e.to_string())))
}

pub fn save_dataset(path: &Path, meta: &DatasetMeta, samples: &[Sample]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = write_dataset(BufWriter::new(f), meta, samples).map_err(|e| with_path(e, path))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

/// Reads a dataset. `path` is used only for error messages.
pub fn read_dataset<R: Read>(r: R, path: &Path) -> Result<(DatasetMeta, Vec<Sample>)> {
    let mut reader = BufReader::new(r);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Error::io(path, e))?;
    let meta = DatasetMeta::parse(path, first.trim_end())?;

    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = csv.headers().map_err(|e| parse_error(path, 2, e))?.clone();
    if header.iter().ne(DATASET_HEADER) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 2,
            message: format!(
                "expected header '{}', found '{}'",
                DATASET_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut samples = Vec::new();
    for rec in csv.deserialize::<DatasetRow>() {
        match rec {
            Ok(row) => {
                let s = Sample::from(row);
                if !(s.measurement.distortion >= 0.0 && s.measurement.power_db.is_finite()) {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: samples.len() as u64 + 3,
                        message: "power_db must be finite and distortion >= 0".into(),
                    });
                }
                samples.push(s);
            }
            Err(e) => {
                // The csv crate counts from its own first line; add the provenance line.
                let line = e.position().map_or(samples.len() as u64 + 2, |p| p.line()) + 1;
                return Err(parse_error(path, line, e));
            }
        }
    }
    Ok((meta, samples))
}

fn parse_error(path: &Path, line: u64, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

pub fn load_dataset(path: &Path) -> Result<(DatasetMeta, Vec<Sample>)> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(f, path)
}

/// On-disk form of a [`DecisionRegionGrid`]. Rows are power bins from low to
/// high; each row is a string of label digits from low to high distortion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFile {
    pub format: String,
    pub version: u32,
    pub power_axis: Axis,
    pub log_distortion_axis: Axis,
    pub rows: Vec<String>,
    pub provenance: RegionProvenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionProvenance {
    pub config_hash: String,
    pub seed: u64,
    pub detector: DetectorKind,
    pub taps: usize,
    pub clamped: u64,
    /// Unix seconds; `SOURCE_DATE_EPOCH` when set.
    pub created: u64,
}

pub const REGION_FORMAT: &str = "pdml-regions";

/// Creation time for provenance records.
pub fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        })
}

impl RegionFile {
    pub fn from_grid(g: &DecisionRegionGrid, created: u64) -> Self {
        let nd = g.spec.log_distortion.bins;
        let rows = g
            .labels
            .chunks(nd)
            .map(|row| row.iter().map(|h| char::from(b'0' + h.index() as u8)).collect())
            .collect();
        let p = &g.provenance;
        Self {
            format: REGION_FORMAT.to_string(),
            version: REGION_VERSION,
            power_axis: g.spec.power,
            log_distortion_axis: g.spec.log_distortion,
            rows,
            provenance: RegionProvenance {
                config_hash: p.config_hash.clone(),
                seed: p.seed,
                detector: p.detector,
                taps: p.taps,
                clamped: p.clamped,
                created,
            },
        }
    }

    pub fn into_grid(self, path: &Path) -> Result<DecisionRegionGrid> {
        let bad = |m: String| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: m,
        };
        let spec = GridSpec {
            power: self.power_axis,
            log_distortion: self.log_distortion_axis,
        };
        spec.validate()?;
        if self.rows.len() != spec.power.bins {
            return Err(bad(format!(
                "{} rows for {} power bins",
                self.rows.len(),
                spec.power.bins
            )));
        }
        let mut labels = Vec::with_capacity(spec.cells());
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != spec.log_distortion.bins {
                return Err(bad(format!(
                    "row {i} has {} cells, expected {}",
                    row.len(),
                    spec.log_distortion.bins
                )));
            }
            for c in row.bytes() {
                let h = c
                    .checked_sub(b'0')
                    .and_then(|d| Hypothesis::from_index(d as usize))
                    .ok_or_else(|| bad(format!("row {i} has invalid label '{}'", c as char)))?;
                labels.push(h);
            }
        }
        let p = self.provenance;
        DecisionRegionGrid::new(
            spec,
            labels,
            Provenance {
                config_hash: p.config_hash,
                seed: p.seed,
                detector: p.detector,
                taps: p.taps,
                clamped: p.clamped,
            },
        )
    }
}

pub fn save_regions(path: &Path, g: &DecisionRegionGrid) -> Result<()> {
    let file = RegionFile::from_grid(g, timestamp());
    let mut text = serde_json::to_string_pretty(&file).expect("region file serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_regions(text: &str, path: &Path) -> Result<(DecisionRegionGrid, u64)> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line() as u64,
        message: e.to_string(),
    })?;
    // Check the version before the shape so future layouts fail cleanly.
    let version = value.get("version").cloned().unwrap_or(serde_json::Value::Null);
    if version.as_u64() != Some(REGION_VERSION as u64) {
        return Err(Error::Version {
            path: path.to_path_buf(),
            found: version.to_string(),
            expected: REGION_VERSION,
        });
    }
    let file: RegionFile = serde_json::from_value(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })?;
    if file.format != REGION_FORMAT {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("format is '{}', expected '{REGION_FORMAT}'", file.format),
        });
    }
    let created = file.provenance.created;
    Ok((file.into_grid(path)?, created))
}

pub fn load_regions(path: &Path) -> Result<DecisionRegionGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_regions(&text, path).map(|(g, _)| g)
}

pub fn load_schedule(path: &Path) -> Result<Schedule> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: toml::Value = toml::from_str(&text)
        .map_err(|e| Error::Schedule(format!("{}: {e}", path.display())))?;
    let version = value.get("version").and_then(|v| v.as_integer());
    if version != Some(crate::bayes::timeline::SCHEDULE_VERSION as i64) {
        return Err(Error::Version {
            path: path.to_path_buf(),
            found: version.map_or("missing".into(), |v| v.to_string()),
            expected: crate::bayes::timeline::SCHEDULE_VERSION,
        });
    }
    let schedule: Schedule =
        toml::from_str(&text).map_err(|e| Error::Schedule(format!("{}: {e}", path.display())))?;
    schedule.validate()?;
    Ok(schedule)
}
