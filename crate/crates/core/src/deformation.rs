//! Force/strain curves of tissue candidates and selection of the tube
//! thickness whose curve is closest to a human reference.
//!
//! Curves are exchanged as comma-separated text with a `strain,force,label`
//! header (column order free, `#` starts a comment line). Strain is unitless,
//! force is in newtons.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_GRID_POINTS: usize = 100;

/// Synthetic curve family where the `sigma=0.4` candidate equals the human
/// reference. Not physiological data.
pub const SYNTHETIC_CURVES: &str = include_str!("../data/curves_synthetic.csv");

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeformationError {
    #[error("malformed table at line {line}: {message}")]
    MalformedTable { line: u64, message: String },
    #[error("curve '{label}' repeats strain {strain}")]
    NonMonotoneStrain { label: String, strain: f64 },
    #[error("invalid curve '{label}': {reason}")]
    InvalidCurve { label: String, reason: String },
    #[error("grid strain {strain} outside curve range [{min}, {max}]")]
    GridOutOfRange { strain: f64, min: f64, max: f64 },
    #[error("strain ranges of '{a}' and '{b}' do not overlap")]
    EmptyOverlap { a: String, b: String },
    #[error("candidate sigma = {sigma} does not overlap the reference curve")]
    CandidateOutOfRange { sigma: f64 },
    #[error("invalid candidate: {0}")]
    InvalidCandidate(String),
    #[error("no thickness candidates")]
    NoCandidates,
}

/// Piecewise-linear tensile response, strictly increasing in strain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformationCurve {
    label: String,
    /// `(strain, force)` pairs.
    samples: Vec<(f64, f64)>,
}

impl DeformationCurve {
    pub fn new(label: impl Into<String>, samples: Vec<(f64, f64)>) -> Result<Self, DeformationError> {
        let label = label.into();
        let invalid = |reason: String| DeformationError::InvalidCurve {
            label: label.clone(),
            reason,
        };
        if samples.len() < 2 {
            return Err(invalid(format!("{} samples, need at least 2", samples.len())));
        }
        for &(s, f) in &samples {
            if !s.is_finite() || !f.is_finite() {
                return Err(invalid(format!("non-finite sample ({s}, {f})")));
            }
            if f < 0.0 {
                return Err(invalid(format!("negative force {f} at strain {s}")));
            }
        }
        if samples[0].0 < 0.0 {
            return Err(invalid(format!("negative strain {}", samples[0].0)));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(DeformationError::NonMonotoneStrain {
                label,
                strain: w[1].0,
            });
        }
        Ok(DeformationCurve { label, samples })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn strain_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples[self.samples.len() - 1].0)
    }

    /// Force at `strain` by linear interpolation, `None` outside the range.
    pub fn force_at(&self, strain: f64) -> Option<f64> {
        let (lo, hi) = self.strain_range();
        if !(lo..=hi).contains(&strain) {
            return None;
        }
        let j = self.samples.partition_point(|&(s, _)| s < strain);
        let (s1, f1) = self.samples[j];
        if s1 == strain {
            return Some(f1);
        }
        let (s0, f0) = self.samples[j - 1];
        Some(f0 + (f1 - f0) * (strain - s0) / (s1 - s0))
    }

    /// Copy with every force multiplied by `factor`.
    pub fn scaled(&self, label: impl Into<String>, factor: f64) -> Result<Self, DeformationError> {
        DeformationCurve::new(
            label,
            self.samples.iter().map(|&(s, f)| (s, f * factor)).collect(),
        )
    }
}

/// Parses a `strain,force,label` table into one curve per label, in order of
/// first appearance. Rows may come in any order within a label.
pub fn load_curves(document: &str) -> Result<Vec<DeformationCurve>, DeformationError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(document.as_bytes());
    let malformed = |line: u64, message: String| DeformationError::MalformedTable { line, message };
    let headers = reader
        .headers()
        .map_err(|e| malformed(1, e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(malformed(1, "missing header row".into()));
    }
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| malformed(1, format!("missing column '{name}'")))
    };
    let (cs, cf, cl) = (column("strain")?, column("force")?, column("label")?);

    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or_default();
        let number = |i: usize, what: &str| {
            field(i)
                .parse::<f64>()
                .map_err(|_| malformed(line, format!("{what} '{}' is not a number", field(i))))
        };
        let (strain, force) = (number(cs, "strain")?, number(cf, "force")?);
        let label = field(cl);
        if label.is_empty() {
            return Err(malformed(line, "empty label".into()));
        }
        if !rows.contains_key(label) {
            order.push(label.to_string());
        }
        rows.entry(label.to_string()).or_default().push((strain, force));
    }
    if order.is_empty() {
        return Err(malformed(1, "no data rows".into()));
    }
    order
        .into_iter()
        .map(|label| {
            let mut samples = rows.remove(&label).unwrap_or_default();
            samples.sort_by(|a, b| a.0.total_cmp(&b.0));
            if let Some(w) = samples.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(DeformationError::NonMonotoneStrain {
                    label,
                    strain: w[0].0,
                });
            }
            DeformationCurve::new(label, samples)
        })
        .collect()
}

/// Writes curves back in the `strain,force,label` layout.
pub fn write_curves(curves: &[DeformationCurve]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["strain", "force", "label"]).expect("write to memory");
    for c in curves {
        for (s, f) in &c.samples {
            w.write_record([s.to_string(), f.to_string(), c.label.clone()])
                .expect("write to memory");
        }
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8 input")
}

/// Evaluates `curve` on `grid`, which must be strictly increasing and inside
/// the curve's strain range. Unlike [`DeformationCurve::new`], a one-point
/// grid is accepted.
pub fn resample_curve(curve: &DeformationCurve, grid: &[f64]) -> Result<DeformationCurve, DeformationError> {
    if grid.is_empty() {
        return Err(DeformationError::InvalidCurve {
            label: curve.label.clone(),
            reason: "empty resampling grid".into(),
        });
    }
    let (min, max) = curve.strain_range();
    let samples = grid
        .iter()
        .map(|&s| {
            curve
                .force_at(s)
                .map(|f| (s, f))
                .ok_or(DeformationError::GridOutOfRange { strain: s, min, max })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(DeformationError::NonMonotoneStrain {
            label: "grid".into(),
            strain: w[1],
        });
    }
    // A resampled curve may hold a single point.
    Ok(DeformationCurve {
        label: curve.label.clone(),
        samples,
    })
}

/// How two resampled curves are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    #[default]
    Rms,
    MaxAbs,
}

/// `n` uniform strains over the overlap of the two curves' ranges.
pub fn common_grid(a: &DeformationCurve, b: &DeformationCurve, n: usize) -> Result<Vec<f64>, DeformationError> {
    let lo = a.strain_range().0.max(b.strain_range().0);
    let hi = a.strain_range().1.min(b.strain_range().1);
    if lo >= hi {
        return Err(DeformationError::EmptyOverlap {
            a: a.label.clone(),
            b: b.label.clone(),
        });
    }
    let n = n.max(2);
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect())
}

/// Distance in newtons between two curves over `grid_points` uniform
/// strains of their common range.
pub fn curve_distance(
    a: &DeformationCurve,
    b: &DeformationCurve,
    metric: DistanceMetric,
    grid_points: usize,
) -> Result<f64, DeformationError> {
    let grid = common_grid(a, b, grid_points)?;
    let diffs = grid.iter().map(|&s| {
        let fa = a.force_at(s).expect("grid inside range");
        let fb = b.force_at(s).expect("grid inside range");
        (fa - fb).abs()
    });
    Ok(match metric {
        DistanceMetric::Rms => (diffs.map(|d| d * d).sum::<f64>() / grid.len() as f64).sqrt(),
        DistanceMetric::MaxAbs => diffs.fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThicknessCandidate {
    pub sigma: f64,
    pub curve: DeformationCurve,
}

impl ThicknessCandidate {
    pub fn new(sigma: f64, curve: DeformationCurve) -> Result<Self, DeformationError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(DeformationError::InvalidCandidate(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        Ok(ThicknessCandidate { sigma, curve })
    }
}

/// Splits loaded curves into the reference (label `human_label`) and
/// candidates labelled `sigma=<mm>`. Other labels are ignored with a warning.
pub fn split_candidates(
    curves: Vec<DeformationCurve>,
    human_label: &str,
) -> Result<(DeformationCurve, Vec<ThicknessCandidate>), DeformationError> {
    let mut human = None;
    let mut candidates = Vec::new();
    for c in curves {
        if c.label == human_label {
            human = Some(c);
        } else if let Some(v) = c.label.strip_prefix("sigma=") {
            let sigma = v.trim().parse::<f64>().map_err(|_| {
                DeformationError::InvalidCandidate(format!("cannot read sigma from '{}'", c.label))
            })?;
            candidates.push(ThicknessCandidate::new(sigma, c)?);
        } else {
            log::warn!("ignoring curve '{}'", c.label);
        }
    }
    let human = human.ok_or_else(|| {
        DeformationError::InvalidCandidate(format!("no reference curve labelled '{human_label}'"))
    })?;
    Ok((human, candidates))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    SmallerSigma,
    LargerSigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SelectionOptions {
    pub metric: DistanceMetric,
    pub grid_points: usize,
    pub tie_break: TieBreak,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions {
            metric: DistanceMetric::Rms,
            grid_points: DEFAULT_GRID_POINTS,
            tie_break: TieBreak::SmallerSigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub sigma_star: f64,
    pub distance: f64,
    /// `(sigma, distance)` in ascending sigma.
    pub distances: Vec<(f64, f64)>,
    pub options: SelectionOptions,
}

impl Selection {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("selection serializes")
    }
}

/// Picks the candidate whose curve is closest to `human`.
pub fn select_thickness(
    candidates: &[ThicknessCandidate],
    human: &DeformationCurve,
    options: &SelectionOptions,
) -> Result<Selection, DeformationError> {
    if candidates.is_empty() {
        return Err(DeformationError::NoCandidates);
    }
    let mut sorted: Vec<&ThicknessCandidate> = candidates.iter().collect();
    sorted.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    if let Some(w) = sorted.windows(2).find(|w| w[0].sigma == w[1].sigma) {
        return Err(DeformationError::InvalidCandidate(format!(
            "sigma = {} appears twice",
            w[0].sigma
        )));
    }
    let distances = sorted
        .iter()
        .map(|c| {
            curve_distance(&c.curve, human, options.metric, options.grid_points)
                .map(|d| (c.sigma, d))
                .map_err(|_| DeformationError::CandidateOutOfRange { sigma: c.sigma })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut order: Vec<&(f64, f64)> = distances.iter().collect();
    if options.tie_break == TieBreak::LargerSigma {
        order.reverse();
    }
    let best = order
        .into_iter()
        .fold(None::<&(f64, f64)>, |best, c| match best {
            Some(b) if b.1 <= c.1 => Some(b),
            _ => Some(c),
        })
        .expect("at least one candidate");
    Ok(Selection {
        sigma_star: best.0,
        distance: best.1,
        distances,
        options: *options,
    })
}

/// Plot table: the common grid of all curves and each curve's force on it.
pub fn plot_data_csv(
    human: &DeformationCurve,
    candidates: &[ThicknessCandidate],
    grid_points: usize,
) -> Result<String, DeformationError> {
    let mut lo = human.strain_range().0;
    let mut hi = human.strain_range().1;
    for c in candidates {
        let (a, b) = c.curve.strain_range();
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let envelope = DeformationCurve::new("envelope", vec![(lo.max(0.0), 0.0), (hi, 0.0)]).map_err(|_| {
        DeformationError::EmptyOverlap {
            a: human.label.clone(),
            b: "candidates".into(),
        }
    })?;
    let grid = common_grid(&envelope, human, grid_points)?;
    let mut sorted: Vec<&ThicknessCandidate> = candidates.iter().collect();
    sorted.sort_by(|a, b| a.sigma.total_cmp(&b.sigma));
    let mut out = format!("strain,{}", human.label);
    for c in &sorted {
        write!(out, ",{}", c.curve.label).expect("write to string");
    }
    out.push('\n');
    for s in grid {
        write!(out, "{s},{}", human.force_at(s).expect("inside")).expect("write to string");
        for c in &sorted {
            write!(out, ",{}", c.curve.force_at(s).expect("inside")).expect("write to string");
        }
        out.push('\n');
    }
    Ok(out)
}
