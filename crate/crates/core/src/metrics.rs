//! Detection, segmentation and localization metrics.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, BoundingBox, FrameMeasurement, Label, LabelMask};

/// Stabilizing constant added to the union in [`bitwise_iou`].
pub const DEFAULT_IOU_EPS: f64 = 1e-6;

/// Box intersection over union. Two empty boxes score 0.
pub fn box_iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection(b).map_or(0, |i| i.area());
    let union = a.area() + b.area() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Pixel-wise IoU `sum(a & b) / (sum(a | b) + c)`.
pub fn bitwise_iou(a: &BinaryMask, b: &BinaryMask, c: f64) -> Result<f64> {
    a.same_dims(b)?;
    let (mut and, mut or) = (0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        and += (x && y) as usize;
        or += (x || y) as usize;
    }
    Ok(and as f64 / (or as f64 + c))
}

/// Per-frame localization errors in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrameErrors {
    pub pupil_center: f64,
    pub iris_center: f64,
    pub pupil_rx: f64,
    pub pupil_ry: f64,
    pub iris_rx: f64,
    pub iris_ry: f64,
}

impl FrameErrors {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.pupil_center,
            self.iris_center,
            self.pupil_rx,
            self.pupil_ry,
            self.iris_rx,
            self.iris_ry,
        ]
    }
}

/// L2 center errors and L1 per-axis radius errors of `pred` against `gt`.
pub fn frame_error(pred: &FrameMeasurement, gt: &FrameMeasurement) -> FrameErrors {
    FrameErrors {
        pupil_center: (pred.pupil.cx - gt.pupil.cx).hypot(pred.pupil.cy - gt.pupil.cy),
        iris_center: (pred.iris.cx - gt.iris.cx).hypot(pred.iris.cy - gt.iris.cy),
        pupil_rx: (pred.pupil.rx - gt.pupil.rx).abs(),
        pupil_ry: (pred.pupil.ry - gt.pupil.ry).abs(),
        iris_rx: (pred.iris.rx - gt.iris.rx).abs(),
        iris_ry: (pred.iris.ry - gt.iris.ry).abs(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl MeanStd {
    /// Two-pass mean and population standard deviation. `None` when empty.
    pub fn of(values: impl IntoIterator<Item = f64> + Clone) -> Option<MeanStd> {
        let (sum, n) = values
            .clone()
            .into_iter()
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        if n == 0 {
            return None;
        }
        let mean = sum / n as f64;
        let var = values.into_iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        Some(MeanStd {
            mean,
            std: var.sqrt(),
        })
    }
}

/// Localization error summary over a set of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub pupil_center: MeanStd,
    pub iris_center: MeanStd,
    pub pupil_rx: MeanStd,
    pub pupil_ry: MeanStd,
    pub iris_rx: MeanStd,
    pub iris_ry: MeanStd,
    pub n: usize,
}

impl ErrorReport {
    pub const METRICS: [&'static str; 6] = [
        "pupil_center_l2",
        "iris_center_l2",
        "pupil_rx_l1",
        "pupil_ry_l1",
        "iris_rx_l1",
        "iris_ry_l1",
    ];

    pub fn rows(&self) -> [(&'static str, MeanStd); 6] {
        let v = [
            self.pupil_center,
            self.iris_center,
            self.pupil_rx,
            self.pupil_ry,
            self.iris_rx,
            self.iris_ry,
        ];
        std::array::from_fn(|i| (Self::METRICS[i], v[i]))
    }

    /// CSV rows `metric,mean,std,n` without a header.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (name, ms) in self.rows() {
            writeln!(out, "{name},{:.6},{:.6},{}", ms.mean, ms.std, self.n).unwrap();
        }
        out
    }
}

/// Mean and population standard deviation of each error metric.
pub fn aggregate(errors: &[FrameErrors]) -> Result<ErrorReport> {
    if errors.is_empty() {
        return Err(Error::Series("cannot aggregate an empty error list".into()));
    }
    let col = |i: usize| MeanStd::of(errors.iter().map(move |e| e.as_array()[i])).unwrap();
    Ok(ErrorReport {
        pupil_center: col(0),
        iris_center: col(1),
        pupil_rx: col(2),
        pupil_ry: col(3),
        iris_rx: col(4),
        iris_ry: col(5),
        n: errors.len(),
    })
}

/// Segmentation IoU summary over mask pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct IoUReport {
    pub pupil: MeanStd,
    pub iris: MeanStd,
    pub sclera: MeanStd,
    /// `mean` is the mean of the three class means; `std` is the spread of
    /// the per-pair class-averaged IoU.
    pub overall: MeanStd,
    pub n: usize,
}

impl IoUReport {
    pub fn rows(&self) -> [(&'static str, MeanStd); 4] {
        [
            ("pupil_iou", self.pupil),
            ("iris_iou", self.iris),
            ("sclera_iou", self.sclera),
            ("overall_iou", self.overall),
        ]
    }

    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for (name, ms) in self.rows() {
            writeln!(out, "{name},{:.6},{:.6},{}", ms.mean, ms.std, self.n).unwrap();
        }
        out
    }
}

/// Header shared by the report CSVs.
pub const REPORT_CSV_HEADER: &str = "metric,mean,std,n";

/// Per-class bitwise IoU averaged over `(pred, gt)` pairs.
pub fn segmentation_eval(preds: &[LabelMask], gts: &[LabelMask]) -> Result<IoUReport> {
    if preds.len() != gts.len() {
        return Err(Error::Series(format!(
            "{} predictions for {} ground-truth masks",
            preds.len(),
            gts.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Series("no mask pairs to evaluate".into()));
    }
    const CLASSES: [Label; 3] = [Label::Pupil, Label::Iris, Label::Sclera];
    let mut per_class = [Vec::new(), Vec::new(), Vec::new()];
    let mut per_pair = Vec::with_capacity(preds.len());
    for (p, g) in preds.iter().zip(gts) {
        let mut sum = 0.0;
        for (k, class) in CLASSES.into_iter().enumerate() {
            let iou = bitwise_iou(&p.class_plane(class), &g.class_plane(class), DEFAULT_IOU_EPS)?;
            per_class[k].push(iou);
            sum += iou;
        }
        per_pair.push(sum / 3.0);
    }
    let stat = |v: &Vec<f64>| MeanStd::of(v.iter().copied()).unwrap();
    let (pupil, iris, sclera) = (stat(&per_class[0]), stat(&per_class[1]), stat(&per_class[2]));
    Ok(IoUReport {
        pupil,
        iris,
        sclera,
        overall: MeanStd {
            mean: (pupil.mean + iris.mean + sclera.mean) / 3.0,
            std: stat(&per_pair).std,
        },
        n: preds.len(),
    })
}
