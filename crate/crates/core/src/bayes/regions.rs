use serde::{Deserialize, Serialize};

use super::cost::CostModel;
use super::dataset::Sample;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::monitors::{DetectorKind, Measurement};

/// Uniform binning of `[min, max]` into `bins` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub bins: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, bins: usize) -> Result<Self> {
        let a = Self { min, max, bins };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max && self.bins >= 1)
        {
            return Err(Error::InvalidParameter(format!(
                "axis [{}, {}] with {} bins is invalid",
                self.min, self.max, self.bins
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.bins as f64
    }

    /// Cell index of `v` and whether it had to be clamped to an edge cell.
    pub fn locate(&self, v: f64) -> (usize, bool) {
        if v.is_nan() || v < self.min {
            return (0, true);
        }
        if v >= self.max {
            // The upper bound itself belongs to the last cell.
            return (self.bins - 1, v > self.max);
        }
        let i = ((v - self.min) / self.width()) as usize;
        (i.min(self.bins - 1), false)
    }

    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }
}

/// Axes of the decision plane: power in dB and `log10` distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub power: Axis,
    pub log_distortion: Axis,
}

impl GridSpec {
    pub fn default_for(detector: DetectorKind) -> Self {
        let log_distortion = match detector {
            DetectorKind::Pdml => Axis {
                min: -1.0,
                max: 6.0,
                bins: 200,
            },
            DetectorKind::Sd => Axis {
                min: -3.0,
                max: 1.0,
                bins: 200,
            },
        };
        Self {
            power: Axis {
                min: -10.0,
                max: 25.0,
                bins: 200,
            },
            log_distortion,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.power.validate()?;
        self.log_distortion.validate()
    }

    pub fn cells(&self) -> usize {
        self.power.bins * self.log_distortion.bins
    }

    /// Smallest distortion the grid can represent; non-positive inputs are
    /// floored to it before taking the logarithm.
    pub fn distortion_floor(&self) -> f64 {
        10f64.powf(self.log_distortion.min)
    }

    /// Row-major cell index (rows are power bins) and a clamp flag.
    pub fn cell_of(&self, power_db: f64, distortion: f64) -> (usize, bool) {
        let d = if distortion > 0.0 {
            distortion
        } else {
            self.distortion_floor()
        };
        let (ip, cp) = self.power.locate(power_db);
        let (id, cd) = self.log_distortion.locate(d.log10());
        (ip * self.log_distortion.bins + id, cp || cd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub detector: DetectorKind,
    pub taps: usize,
    /// Training samples that fell outside the axes and were clamped to edge cells.
    pub clamped: u64,
}

/// Bayes decision map over the (power, log-distortion) plane.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRegionGrid {
    pub spec: GridSpec,
    /// Row-major labels, `labels[ip * d_bins + id]`.
    pub labels: Vec<Hypothesis>,
    pub provenance: Provenance,
}

impl DecisionRegionGrid {
    pub fn new(spec: GridSpec, labels: Vec<Hypothesis>, provenance: Provenance) -> Result<Self> {
        spec.validate()?;
        if labels.len() != spec.cells() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} cells",
                labels.len(),
                spec.cells()
            )));
        }
        Ok(Self {
            spec,
            labels,
            provenance,
        })
    }

    pub fn label_at(&self, ip: usize, id: usize) -> Hypothesis {
        self.labels[ip * self.spec.log_distortion.bins + id]
    }

    pub fn classify(&self, m: &Measurement) -> Hypothesis {
        classify(m, self)
    }

    /// Number of cells carrying each label.
    pub fn label_counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for l in &self.labels {
            c[l.index()] += 1;
        }
        c
    }
}

/// Label of the cell containing the measurement; out-of-range values use the
/// nearest edge cell.
pub fn classify(m: &Measurement, regions: &DecisionRegionGrid) -> Hypothesis {
    let (cell, _) = regions.spec.cell_of(m.power_db, m.distortion);
    regions.labels[cell]
}

/// Per-cell Monte-Carlo expected cost of each decision.
#[derive(Debug, Clone)]
pub struct CellCosts {
    pub counts: Vec<u64>,
    pub sums: Vec<[f64; 4]>,
    pub clamped: u64,
}

pub fn accumulate_costs(dataset: &[Sample], spec: &GridSpec, cost: &CostModel) -> CellCosts {
    let n = spec.cells();
    let mut counts = vec![0u64; n];
    let mut sums = vec![[0.0f64; 4]; n];
    let mut clamped = 0;
    for s in dataset {
        let (cell, c) = spec.cell_of(s.measurement.power_db, s.measurement.distortion);
        clamped += c as u64;
        counts[cell] += 1;
        for d in Hypothesis::ALL {
            sums[cell][d.index()] += cost.cost(d, s.truth, &s.theta);
        }
    }
    CellCosts {
        counts,
        sums,
        clamped,
    }
}

fn argmin_decision(sums: &[f64; 4]) -> Hypothesis {
    let mut best = Hypothesis::H0;
    for d in Hypothesis::ALL.into_iter().skip(1) {
        // Strict comparison keeps the lower index on ties.
        if sums[d.index()] < sums[best.index()] {
            best = d;
        }
    }
    best
}

/// Designs the Bayes decision map.
///
/// Each populated cell takes the decision with the smallest mean cost over
/// the samples inside it (ties go to the lower hypothesis index). Empty cells
/// copy the label of the nearest populated cell in normalized grid
/// coordinates, preferring lower distortion and then lower power on ties.
pub fn design_regions(
    dataset: &[Sample],
    spec: &GridSpec,
    cost: &CostModel,
    provenance: Provenance,
) -> Result<DecisionRegionGrid> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    spec.validate()?;
    cost.validate()?;
    let acc = accumulate_costs(dataset, spec, cost);
    let np = spec.power.bins;
    let nd = spec.log_distortion.bins;

    let mut labels: Vec<Option<Hypothesis>> = acc
        .counts
        .iter()
        .zip(&acc.sums)
        .map(|(&n, s)| (n > 0).then(|| argmin_decision(s)))
        .collect();
    fill_empty(&mut labels, np, nd);

    DecisionRegionGrid::new(
        *spec,
        labels.into_iter().map(|l| l.expect("filled")).collect(),
        Provenance {
            clamped: acc.clamped,
            ..provenance
        },
    )
}

/// Nearest-populated-cell fill. Searches square rings of growing Chebyshev
/// radius until no closer cell can exist.
fn fill_empty(labels: &mut [Option<Hypothesis>], np: usize, nd: usize) {
    let src: Vec<Option<Hypothesis>> = labels.to_vec();
    let sp = 1.0 / np as f64;
    let sd = 1.0 / nd as f64;
    let min_step = sp.min(sd);
    let max_r = np.max(nd) as i64;

    for ip in 0..np as i64 {
        for id in 0..nd as i64 {
            let cell = (ip as usize) * nd + id as usize;
            if src[cell].is_some() {
                continue;
            }
            // (distance², distortion index, power index, label)
            let mut best: Option<(f64, i64, i64, Hypothesis)> = None;
            for r in 1..=max_r {
                if let Some((d2, ..)) = best {
                    let lower = r as f64 * min_step;
                    if lower * lower > d2 {
                        break;
                    }
                }
                let mut visit = |jp: i64, jd: i64| {
                    if jp < 0 || jd < 0 || jp >= np as i64 || jd >= nd as i64 {
                        return;
                    }
                    if let Some(label) = src[(jp as usize) * nd + jd as usize] {
                        let dp = (jp - ip) as f64 * sp;
                        let dd = (jd - id) as f64 * sd;
                        let cand = (dp * dp + dd * dd, jd, jp, label);
                        let better = match best {
                            None => true,
                            Some(b) => {
                                cand.0 < b.0 || (cand.0 == b.0 && (cand.1, cand.2) < (b.1, b.2))
                            }
                        };
                        if better {
                            best = Some(cand);
                        }
                    }
                };
                for k in -r..=r {
                    visit(ip + k, id - r);
                    visit(ip + k, id + r);
                }
                for k in -r + 1..r {
                    visit(ip - r, id + k);
                    visit(ip + r, id + k);
                }
            }
            labels[cell] = best.map(|b| b.3);
        }
    }
}
