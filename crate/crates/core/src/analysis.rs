//! Session-level dynamics: ratio series, resampling, grand means and box
//! statistics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingestion::{Cohort, SessionRecord};

/// Values sampled on a strictly increasing time grid (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSeries {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadiusSeries {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Self { grid, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.len() != self.values.len() {
            return Err(Error::Series(format!(
                "grid has {} points but values {}",
                self.grid.len(),
                self.values.len()
            )));
        }
        if self.grid.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Series("grid is not strictly increasing".into()));
        }
        if self.grid.iter().chain(&self.values).any(|v| !v.is_finite()) {
            return Err(Error::Series("non-finite grid point or value".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

/// Per-frame quantity tracked over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Quantity {
    /// Mean pupil radius `(rx + ry) / 2`.
    #[default]
    Radius,
    /// Pupil over iris mean radius.
    Ratio,
}

/// How records enter a grand mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    /// Every record (subject, session, eye) is one observation.
    #[default]
    PerEye,
    /// Records of the same subject are averaged first.
    PerSubject,
}

fn series_of(rec: &SessionRecord, f: impl Fn(&crate::mask::FrameMeasurement) -> f64) -> Result<RadiusSeries> {
    if rec.frames.is_empty() {
        return Err(Error::Series(format!(
            "session {} s{} {} has no measured frames",
            rec.meta.subject_id, rec.meta.session, rec.meta.eye
        )));
    }
    RadiusSeries::new(
        rec.frames.iter().map(|f| f.t).collect(),
        rec.frames.iter().map(f).collect(),
    )
}

/// Pupil-iris ratio per measured frame.
pub fn ratio_series(rec: &SessionRecord) -> Result<RadiusSeries> {
    series_of(rec, |f| f.ratio)
}

/// Mean pupil radius per measured frame.
pub fn radius_series(rec: &SessionRecord) -> Result<RadiusSeries> {
    series_of(rec, |f| f.pupil.mean_radius())
}

pub fn quantity_series(rec: &SessionRecord, q: Quantity) -> Result<RadiusSeries> {
    match q {
        Quantity::Radius => radius_series(rec),
        Quantity::Ratio => ratio_series(rec),
    }
}

/// Linear interpolation onto `grid`. Grid points equal to source points
/// reproduce the source values exactly; points outside the source span are
/// an error.
pub fn resample(series: &RadiusSeries, grid: &[f64]) -> Result<RadiusSeries> {
    series.validate()?;
    if series.len() < 2 {
        return Err(Error::Series(format!(
            "resampling needs at least 2 points, got {}",
            series.len()
        )));
    }
    let (src, vals) = (&series.grid, &series.values);
    let (first, last) = (src[0], src[src.len() - 1]);
    let mut values = Vec::with_capacity(grid.len());
    let mut j = 0;
    for &t in grid {
        if !(t >= first && t <= last) {
            return Err(Error::Series(format!(
                "grid point {t} outside source span [{first}, {last}]"
            )));
        }
        if j > 0 && t < src[j] {
            j = 0;
        }
        while src[j + 1] < t {
            j += 1;
        }
        let (t0, t1) = (src[j], src[j + 1]);
        let v = if t == t0 {
            vals[j]
        } else if t == t1 {
            vals[j + 1]
        } else {
            let w = (t - t0) / (t1 - t0);
            vals[j] + w * (vals[j + 1] - vals[j])
        };
        values.push(v);
    }
    RadiusSeries::new(grid.to_vec(), values)
}

/// Pointwise mean of several series on one grid.
///
/// Values are sorted at each instant before an incremental mean, so the
/// result does not depend on input order, copies of one series average to
/// that series exactly, and each mean stays within the pointwise min and max.
fn pointwise_mean(series: &[RadiusSeries], grid: &[f64]) -> RadiusSeries {
    let mut column = Vec::with_capacity(series.len());
    let values = (0..grid.len())
        .map(|k| {
            column.clear();
            column.extend(series.iter().map(|s| s.values[k]));
            column.sort_by(f64::total_cmp);
            let mut mean = 0.0;
            for (i, v) in column.iter().enumerate() {
                mean += (v - mean) / (i + 1) as f64;
            }
            mean.clamp(column[0], column[column.len() - 1])
        })
        .collect();
    RadiusSeries {
        grid: grid.to_vec(),
        values,
    }
}

/// Grand mean of a quantity over records, together with the number of
/// pooled observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GrandMean {
    pub series: RadiusSeries,
    pub n: usize,
}

/// Pointwise arithmetic mean across records after resampling onto `grid`.
/// Records that cannot be resampled (too few frames, grid outside their
/// span) are skipped.
pub fn grand_mean(
    records: &[SessionRecord],
    grid: &[f64],
    quantity: Quantity,
    pooling: Pooling,
) -> Result<GrandMean> {
    if grid.is_empty() {
        return Err(Error::Series("empty grid".into()));
    }
    let resampled: Vec<(String, RadiusSeries)> = records
        .par_iter()
        .filter_map(|rec| {
            let s = quantity_series(rec, quantity).ok()?;
            Some((rec.meta.subject_id.clone(), resample(&s, grid).ok()?))
        })
        .collect();
    if resampled.is_empty() {
        return Err(Error::Series("no record could be resampled onto the grid".into()));
    }
    let observations: Vec<RadiusSeries> = match pooling {
        Pooling::PerEye => resampled.into_iter().map(|(_, s)| s).collect(),
        Pooling::PerSubject => {
            let mut by_subject: std::collections::BTreeMap<String, Vec<RadiusSeries>> =
                Default::default();
            for (id, s) in resampled {
                by_subject.entry(id).or_default().push(s);
            }
            by_subject
                .values()
                .map(|group| pointwise_mean(group, grid))
                .collect()
        }
    };
    Ok(GrandMean {
        series: pointwise_mean(&observations, grid),
        n: observations.len(),
    })
}

/// Number of points on the cohort grid.
pub const COHORT_GRID_POINTS: usize = 100;
/// Cohort grid rate: one point per frame at 20 fps.
pub const COHORT_GRID_RATE: f64 = 20.0;

/// `t_k = k / 20 s` for `k = 0..100`, the frame times of a 100-frame capture
/// at 20 fps (same arithmetic as frame timestamps, so points coincide).
pub fn cohort_grid() -> Vec<f64> {
    (0..COHORT_GRID_POINTS)
        .map(|k| k as f64 / COHORT_GRID_RATE)
        .collect()
}

/// Grand-mean pupil radius curves of both cohorts on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortCurves {
    pub alcohol: RadiusSeries,
    pub no_alcohol: RadiusSeries,
    pub n_alcohol: usize,
    pub n_no_alcohol: usize,
}

pub const CURVES_CSV_HEADER: &str = "t,alcohol,no_alcohol,n_alcohol,n_no_alcohol";

impl CohortCurves {
    /// One row per grid instant, values with six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CURVES_CSV_HEADER}\n");
        for k in 0..self.alcohol.len() {
            out.push_str(&format!(
                "{:.4},{:.6},{:.6},{},{}\n",
                self.alcohol.grid[k],
                self.alcohol.values[k],
                self.no_alcohol.values[k],
                self.n_alcohol,
                self.n_no_alcohol
            ));
        }
        out
    }

    /// Largest pointwise absolute difference `alcohol - no_alcohol - offset`.
    pub fn max_deviation_from(&self, offset: f64) -> f64 {
        self.alcohol
            .values
            .iter()
            .zip(&self.no_alcohol.values)
            .map(|(a, b)| (a - b - offset).abs())
            .fold(0.0, f64::max)
    }
}

pub fn cohort_curves(records: &[SessionRecord]) -> Result<CohortCurves> {
    cohort_curves_with(records, &cohort_grid(), Quantity::Radius, Pooling::PerEye)
}

pub fn cohort_curves_with(
    records: &[SessionRecord],
    grid: &[f64],
    quantity: Quantity,
    pooling: Pooling,
) -> Result<CohortCurves> {
    let pick = |c: Cohort| -> Result<GrandMean> {
        let recs: Vec<SessionRecord> = records.iter().filter(|r| r.meta.cohort == c).cloned().collect();
        if recs.is_empty() {
            return Err(Error::Series(format!("no records for cohort {c}")));
        }
        grand_mean(&recs, grid, quantity, pooling)
    };
    let alcohol = pick(Cohort::Alcohol)?;
    let no_alcohol = pick(Cohort::NoAlcohol)?;
    Ok(CohortCurves {
        alcohol: alcohol.series,
        no_alcohol: no_alcohol.series,
        n_alcohol: alcohol.n,
        n_no_alcohol: no_alcohol.n,
    })
}

/// Five-number summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub n: usize,
}

pub const BOXSTATS_CSV_HEADER: &str = "session,min,q1,median,q3,max,n";

impl BoxStats {
    /// Summary of `values`, quartiles interpolated linearly between order
    /// statistics at position `p * (n - 1)`.
    pub fn of(values: &[f64]) -> Result<BoxStats> {
        if values.is_empty() {
            return Err(Error::Series("box statistics of an empty sample".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Series("non-finite sample value".into()));
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(v.len() - 1);
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        };
        Ok(BoxStats {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
            n: v.len(),
        })
    }

    pub fn csv_row(&self, session: u8) -> String {
        format!(
            "{session},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            self.min, self.q1, self.median, self.q3, self.max, self.n
        )
    }
}

/// Box statistics of all per-frame ratios of one protocol session, pooled
/// across subjects and eyes.
pub fn session_boxstats(records: &[SessionRecord], session: u8) -> Result<BoxStats> {
    if session > 4 {
        return Err(Error::Series(format!("session {session} outside 0-4")));
    }
    let ratios: Vec<f64> = records
        .iter()
        .filter(|r| r.meta.session == session)
        .flat_map(|r| r.frames.iter().map(|f| f.ratio))
        .collect();
    if ratios.is_empty() {
        return Err(Error::Series(format!("no measured frames for session {session}")));
    }
    BoxStats::of(&ratios)
}
