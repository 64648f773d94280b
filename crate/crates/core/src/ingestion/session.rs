use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::localization::{localize, LocalizationConfig};
use crate::mask::{decode_mask, EllipseFit, FrameMeasurement, Method};

/// File name of the session manifest inside a session directory.
pub const MANIFEST_FILE: &str = "manifest.txt";

/// 100 frames over a 5 s capture.
pub const DEFAULT_FRAME_RATE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Eye {
    Left,
    Right,
}

impl fmt::Display for Eye {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eye::Left => "left",
            Eye::Right => "right",
        })
    }
}

impl FromStr for Eye {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Eye::Left),
            "right" => Ok(Eye::Right),
            other => Err(format!("unknown eye {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cohort {
    Alcohol,
    NoAlcohol,
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cohort::Alcohol => "alcohol",
            Cohort::NoAlcohol => "no_alcohol",
        })
    }
}

impl FromStr for Cohort {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "alcohol" => Ok(Cohort::Alcohol),
            "no_alcohol" => Ok(Cohort::NoAlcohol),
            other => Err(format!("unknown cohort {other:?}")),
        }
    }
}

/// Session metadata, as stored in a session manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionMeta {
    pub subject_id: String,
    /// Capture stage: 0 before drinking, then 15, 30, 45 and 60 minutes after.
    pub session: u8,
    pub eye: Eye,
    pub cohort: Cohort,
    pub frame_rate: f64,
}

impl SessionMeta {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.subject_id.is_empty()
            || self
                .subject_id
                .chars()
                .any(|c| c == ',' || c == '"' || c.is_control())
        {
            return Err(format!("invalid subject_id {:?}", self.subject_id));
        }
        if self.session > 4 {
            return Err(format!("session {} outside the protocol range 0-4", self.session));
        }
        if !(self.frame_rate > 0.0 && self.frame_rate.is_finite()) {
            return Err(format!("frame_rate must be positive, got {}", self.frame_rate));
        }
        Ok(())
    }

    /// Flat `key=value` manifest text.
    pub fn to_manifest(&self) -> String {
        format!(
            "subject_id={}\nsession={}\neye={}\ncohort={}\nframe_rate={}\n",
            self.subject_id, self.session, self.eye, self.cohort, self.frame_rate
        )
    }

    /// Parse manifest text. `path` is only used in error messages.
    pub fn parse_manifest(text: &str, path: &Path) -> Result<SessionMeta> {
        let err = |message: String| Error::Manifest {
            path: path.to_path_buf(),
            message,
        };
        let (mut subject_id, mut session, mut eye, mut cohort) = (None, None, None, None);
        let mut frame_rate = DEFAULT_FRAME_RATE;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("line {}: expected key=value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "subject_id" => subject_id = Some(value.to_string()),
                "session" => {
                    session = Some(
                        value
                            .parse::<u8>()
                            .map_err(|_| err(format!("invalid session {value:?}")))?,
                    )
                }
                "eye" => eye = Some(value.parse::<Eye>().map_err(err)?),
                "cohort" => cohort = Some(value.parse::<Cohort>().map_err(err)?),
                "frame_rate" => {
                    frame_rate = value
                        .parse()
                        .map_err(|_| err(format!("invalid frame_rate {value:?}")))?
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| err(format!("missing {k}"));
        let meta = SessionMeta {
            subject_id: subject_id.ok_or_else(|| missing("subject_id"))?,
            session: session.ok_or_else(|| missing("session"))?,
            eye: eye.ok_or_else(|| missing("eye"))?,
            cohort: cohort.ok_or_else(|| missing("cohort"))?,
            frame_rate,
        };
        meta.validate().map_err(err)?;
        Ok(meta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GapKind {
    /// No mask file for this index.
    Missing,
    /// The mask holds no iris or pupil.
    EmptyEye,
    /// Localization failed for another reason.
    FitFailed(String),
}

/// A frame index without a measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGap {
    pub frame_idx: u32,
    pub kind: GapKind,
}

/// Measurements of one subject, eye and session, ordered by frame index.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub meta: SessionMeta,
    pub frames: Vec<FrameMeasurement>,
    pub gaps: Vec<FrameGap>,
}

impl SessionRecord {
    pub fn new(meta: SessionMeta, frames: Vec<FrameMeasurement>) -> Result<Self> {
        let rec = Self {
            meta,
            frames,
            gaps: Vec::new(),
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Error::Series(format!("session {}: {m}", self.meta.subject_id));
        self.meta.validate().map_err(err)?;
        for pair in self.frames.windows(2) {
            if pair[1].frame_idx <= pair[0].frame_idx {
                return Err(err(format!(
                    "frame indices not increasing at {}",
                    pair[1].frame_idx
                )));
            }
        }
        if let Some(f) = self.frames.iter().find(|f| !(f.t >= 0.0)) {
            return Err(err(format!("frame {} has invalid time {}", f.frame_idx, f.t)));
        }
        Ok(())
    }
}

/// Index of a mask file named `<frame_idx>.pgm`.
fn frame_index(path: &Path) -> Option<u32> {
    if path.extension()? != "pgm" {
        return None;
    }
    let stem = path.file_stem()?.to_str()?;
    if stem.is_empty() || !stem.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    stem.parse().ok()
}

/// Mask files of a session directory, sorted by frame index.
pub fn list_frames(dir: &Path) -> Result<Vec<(u32, PathBuf)>> {
    let mut frames = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if let Some(idx) = frame_index(&path) {
            frames.push((idx, path));
        }
    }
    frames.sort();
    if let Some(pair) = frames.windows(2).find(|p| p[0].0 == p[1].0) {
        return Err(Error::Manifest {
            path: pair[1].1.clone(),
            message: format!("duplicate frame index {}", pair[1].0),
        });
    }
    Ok(frames)
}

pub fn read_manifest(dir: &Path) -> Result<SessionMeta> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    SessionMeta::parse_manifest(&text, &path)
}

/// Load a session directory and localize every frame.
///
/// Frames are fit in parallel with [`localize`]. Missing indices between 0
/// and the last frame, frames without an eye and frames the fit rejects are
/// recorded in `gaps`; unreadable or malformed mask files are errors.
pub fn load_session(dir: &Path, cfg: &LocalizationConfig) -> Result<SessionRecord> {
    cfg.validate()?;
    let meta = read_manifest(dir)?;
    let files = list_frames(dir)?;
    let raw = files
        .iter()
        .map(|(idx, path)| Ok((*idx, path, fs::read(path).map_err(|e| Error::io(path, e))?)))
        .collect::<Result<Vec<_>>>()?;

    let fits = raw
        .par_iter()
        .map(|(idx, path, bytes)| {
            let mask = decode_mask(bytes).map_err(|e| Error::in_file(path, e))?;
            let t = f64::from(*idx) / meta.frame_rate;
            Ok(match localize(&mask, cfg) {
                Ok(fm) => Ok(FrameMeasurement {
                    frame_idx: *idx,
                    t,
                    ..fm
                }),
                Err(Error::EmptyEye) => Err(GapKind::EmptyEye),
                Err(e) => Err(GapKind::FitFailed(e.to_string())),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut frames = Vec::new();
    let mut gaps = Vec::new();
    let mut expected = 0u32;
    for ((idx, _, _), fit) in raw.iter().zip(fits) {
        gaps.extend((expected..*idx).map(|frame_idx| FrameGap {
            frame_idx,
            kind: GapKind::Missing,
        }));
        expected = idx + 1;
        match fit {
            Ok(fm) => frames.push(fm),
            Err(kind) => gaps.push(FrameGap {
                frame_idx: *idx,
                kind,
            }),
        }
    }
    Ok(SessionRecord { meta, frames, gaps })
}

/// Column order of measurement CSV files.
pub const MEASUREMENT_COLUMNS: [&str; 17] = [
    "subject_id",
    "session",
    "eye",
    "cohort",
    "frame_idx",
    "t",
    "pupil_cx",
    "pupil_cy",
    "pupil_rx",
    "pupil_ry",
    "iris_cx",
    "iris_cy",
    "iris_rx",
    "iris_ry",
    "ratio",
    "openness",
    "method",
];

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn write_rows(w: &mut csv::Writer<Vec<u8>>, rec: &SessionRecord) -> Result<()> {
    let m = &rec.meta;
    for f in &rec.frames {
        let num = |v: f64| format!("{v:.4}");
        w.write_record([
            m.subject_id.clone(),
            m.session.to_string(),
            m.eye.to_string(),
            m.cohort.to_string(),
            f.frame_idx.to_string(),
            num(f.t),
            num(f.pupil.cx),
            num(f.pupil.cy),
            num(f.pupil.rx),
            num(f.pupil.ry),
            num(f.iris.cx),
            num(f.iris.cy),
            num(f.iris.rx),
            num(f.iris.ry),
            num(f.ratio),
            num(f.openness),
            f.method.to_string(),
        ])?;
    }
    Ok(())
}

/// Measurement CSV for one session: header plus one row per frame, numbers
/// with four decimals.
pub fn write_measurements_csv(rec: &SessionRecord) -> Vec<u8> {
    write_measurements_csv_many(std::slice::from_ref(rec))
}

/// Measurement CSV for several sessions under a single header.
pub fn write_measurements_csv_many(recs: &[SessionRecord]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(MEASUREMENT_COLUMNS).expect("in-memory write");
    for rec in recs {
        write_rows(&mut w, rec).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

/// Parse a measurement CSV back into session records, grouping consecutive
/// rows that share subject, session, eye and cohort.
pub fn parse_measurements_csv(bytes: &[u8]) -> Result<Vec<SessionRecord>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes);
    let header = reader.headers()?.clone();
    if header.iter().ne(MEASUREMENT_COLUMNS.iter().copied()) {
        return Err(Error::Csv(format!("unexpected header {:?}", header)));
    }
    let mut out: Vec<SessionRecord> = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |col: usize| Error::Csv(format!("row {}: invalid {}", line + 1, MEASUREMENT_COLUMNS[col]));
        let num = |col: usize| row[col].parse::<f64>().map_err(|_| bad(col));
        let meta = SessionMeta {
            subject_id: row[0].to_string(),
            session: row[1].parse().map_err(|_| bad(1))?,
            eye: row[2].parse().map_err(|_| bad(2))?,
            cohort: row[3].parse().map_err(|_| bad(3))?,
            frame_rate: DEFAULT_FRAME_RATE,
        };
        let pupil = EllipseFit::new(num(6)?, num(7)?, num(8)?, num(9)?);
        let iris = EllipseFit::new(num(10)?, num(11)?, num(12)?, num(13)?);
        let frame = FrameMeasurement {
            frame_idx: row[4].parse().map_err(|_| bad(4))?,
            t: num(5)?,
            pupil,
            iris,
            ratio: num(14)?,
            openness: num(15)?,
            method: row[16].parse::<Method>().map_err(|_| bad(16))?,
            inverted: pupil.mean_radius() > iris.mean_radius(),
        };
        let same = out.last().is_some_and(|r| {
            r.meta.subject_id == meta.subject_id
                && r.meta.session == meta.session
                && r.meta.eye == meta.eye
                && r.meta.cohort == meta.cohort
        });
        if !same {
            out.push(SessionRecord {
                meta,
                frames: Vec::new(),
                gaps: Vec::new(),
            });
        }
        out.last_mut().unwrap().frames.push(frame);
    }
    for rec in &out {
        rec.validate()?;
    }
    Ok(out)
}
