//! Pupil and iris localization from label masks.
//!
//! Four strategies are available: mass center (extremal extents of the
//! region), LMS (algebraic circle fit to the contour), Hough (voting over
//! centers and radii) and the mixed pipeline combining them. See
//! [`mixed_fit`].

mod hough;
mod lms;

pub use hough::{hough_circle_fit, hough_circle_fit_strided, MIN_SUPPORT};
pub use lms::{lms_circle_fit, mask_points};

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, EllipseFit, FrameMeasurement, Label, LabelMask, Method};
use crate::morphology::{contour, fill_holes, largest_component, suppress_horizontal_edges};

/// Closed radius interval in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRange {
    pub min: f64,
    pub max: f64,
}

impl RadiusRange {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        let r = Self { min, max };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.min < self.max && self.max.is_finite()) {
            return Err(Error::Config(format!(
                "radius range needs 0 < min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizationConfig {
    pub pupil_radius_range: RadiusRange,
    pub iris_radius_range: RadiusRange,
    /// Below this iris openness the eye counts as partially closed and the
    /// iris is refit with the Hough transform.
    pub openness_threshold: f64,
    pub hough_center_stride: usize,
    pub horiz_ratio: f64,
    /// Strategy used by [`localize`]. Defaults to the mixed pipeline.
    pub method: Method,
}

impl Default for LocalizationConfig {
    fn default() -> Self {
        Self {
            // sized for 320x320 crops with pupils of roughly 7 to 18 px
            pupil_radius_range: RadiusRange { min: 5.0, max: 25.0 },
            iris_radius_range: RadiusRange { min: 20.0, max: 80.0 },
            openness_threshold: 0.6,
            hough_center_stride: 1,
            horiz_ratio: crate::morphology::DEFAULT_HORIZ_RATIO,
            method: Method::Mixed,
        }
    }
}

impl LocalizationConfig {
    pub fn validate(&self) -> Result<()> {
        self.pupil_radius_range.validate()?;
        self.iris_radius_range.validate()?;
        if !(self.openness_threshold > 0.0 && self.openness_threshold <= 1.0) {
            return Err(Error::Config(format!(
                "openness_threshold must be in (0, 1], got {}",
                self.openness_threshold
            )));
        }
        if self.hough_center_stride == 0 {
            return Err(Error::Config("hough_center_stride must be at least 1".into()));
        }
        if !(self.horiz_ratio > 0.0 && self.horiz_ratio.is_finite()) {
            return Err(Error::Config(format!(
                "horiz_ratio must be positive, got {}",
                self.horiz_ratio
            )));
        }
        Ok(())
    }
}

/// Separate the pupil from the filled iris disk.
///
/// The iris and pupil planes are merged and reduced to their largest
/// component; filling its holes gives the iris disk. The pupil is the pupil
/// plane when the mask has one, otherwise the filled hole of the iris
/// annulus. The returned pupil is always a subset of the iris disk.
pub fn split_pupil_iris(mask: &LabelMask) -> Result<(BinaryMask, BinaryMask)> {
    let iris_plane = mask.class_plane(Label::Iris);
    let pupil_plane = mask.class_plane(Label::Pupil);
    let raw = largest_component(&iris_plane.or(&pupil_plane)?);
    if raw.is_empty() {
        return Err(Error::EmptyEye);
    }
    let iris_disk = fill_holes(&raw);
    let pupil = if pupil_plane.is_empty() {
        iris_disk.xor(&raw)?
    } else {
        pupil_plane.and(&iris_disk)?
    };
    Ok((pupil, iris_disk))
}

/// Centroid plus half the column and row extents of the set pixels.
pub fn mass_center_fit(region: &BinaryMask) -> Result<EllipseFit> {
    let (x0, x1, y0, y1) = region.extents().ok_or(Error::EmptyEye)?;
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in region.points() {
        sx += x as f64;
        sy += y as f64;
        n += 1;
    }
    Ok(EllipseFit::new(
        sx / n as f64,
        sy / n as f64,
        (x1 - x0 + 1) as f64 / 2.0,
        (y1 - y0 + 1) as f64 / 2.0,
    ))
}

/// Vertical over horizontal extent of the iris region. Close to 1 for an
/// open eye and smaller as the eyelid covers the iris.
pub fn openness_ratio(iris_disk: &BinaryMask) -> Result<f64> {
    let (x0, x1, y0, y1) = iris_disk.extents().ok_or(Error::EmptyEye)?;
    Ok((y1 - y0 + 1) as f64 / (x1 - x0 + 1) as f64)
}

/// Boundaries shared by all strategies.
struct Regions {
    pupil: BinaryMask,
    iris_disk: BinaryMask,
    /// Iris contour without near-horizontal edges (eyelids and lashes).
    iris_edges: BinaryMask,
    openness: f64,
}

fn regions(mask: &LabelMask, cfg: &LocalizationConfig) -> Result<Regions> {
    cfg.validate()?;
    let (pupil, iris_disk) = split_pupil_iris(mask)?;
    let pupil = fill_holes(&largest_component(&pupil));
    if pupil.is_empty() {
        return Err(Error::EmptyEye);
    }
    let iris_edges = suppress_horizontal_edges(&contour(&iris_disk), &iris_disk, cfg.horiz_ratio)?;
    let openness = openness_ratio(&iris_disk)?;
    Ok(Regions {
        pupil,
        iris_disk,
        iris_edges,
        openness,
    })
}

fn hough(edges: &BinaryMask, range: RadiusRange, cfg: &LocalizationConfig) -> Result<EllipseFit> {
    hough_circle_fit_strided(edges, range, cfg.hough_center_stride)
}

/// The mixed pipeline.
///
/// Boundaries come from erosion. The pupil is located by its mass center,
/// the iris by an LMS circle fit to its contour with horizontal edges
/// removed. When the iris openness drops below
/// `cfg.openness_threshold` the iris is refit with the Hough transform, as
/// is the pupil if its mass-center radius fell below the pupil range.
///
/// The returned measurement has `frame_idx` 0 and `t` 0.
pub fn mixed_fit(mask: &LabelMask, cfg: &LocalizationConfig) -> Result<FrameMeasurement> {
    let reg = regions(mask, cfg)?;
    let mut pupil = mass_center_fit(&reg.pupil)?;
    let lms = lms_circle_fit(&mask_points(&reg.iris_edges));
    let mut method = Method::Mixed;

    let iris = if reg.openness < cfg.openness_threshold || lms.is_err() {
        if pupil.mean_radius() < cfg.pupil_radius_range.min {
            if let Ok(p) = hough(&contour(&reg.pupil), cfg.pupil_radius_range, cfg) {
                pupil = p;
            }
        }
        match (hough(&reg.iris_edges, cfg.iris_radius_range, cfg), lms) {
            (Ok(fit), _) => {
                method = Method::Hough;
                fit
            }
            (Err(_), Ok(fit)) => fit,
            (Err(e), Err(_)) => return Err(e),
        }
    } else {
        lms?
    };
    Ok(FrameMeasurement::new(0, 0.0, pupil, iris, reg.openness, method))
}

/// Localize with the strategy selected by `cfg.method`.
///
/// `MassCenter`, `Lms` and `Hough` apply a single strategy to both the pupil
/// and the iris; `Mixed` runs [`mixed_fit`].
pub fn localize(mask: &LabelMask, cfg: &LocalizationConfig) -> Result<FrameMeasurement> {
    if cfg.method == Method::Mixed {
        return mixed_fit(mask, cfg);
    }
    let reg = regions(mask, cfg)?;
    let (pupil, iris) = match cfg.method {
        Method::MassCenter => (mass_center_fit(&reg.pupil)?, mass_center_fit(&reg.iris_disk)?),
        Method::Lms => (
            lms_circle_fit(&mask_points(&contour(&reg.pupil)))?,
            lms_circle_fit(&mask_points(&reg.iris_edges))?,
        ),
        Method::Hough => (
            hough(&contour(&reg.pupil), cfg.pupil_radius_range, cfg)?,
            hough(&reg.iris_edges, cfg.iris_radius_range, cfg)?,
        ),
        Method::Mixed => unreachable!(),
    };
    Ok(FrameMeasurement::new(0, 0.0, pupil, iris, reg.openness, cfg.method))
}
