use std::fmt;
use std::str::FromStr;

use super::BinaryMask;

/// Axis-aligned ellipse; circle fits store `rx == ry`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EllipseFit {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl EllipseFit {
    pub fn new(cx: f64, cy: f64, rx: f64, ry: f64) -> Self {
        debug_assert!(rx.is_finite() && ry.is_finite() && rx >= 0.0 && ry >= 0.0);
        Self { cx, cy, rx, ry }
    }

    pub fn circle(cx: f64, cy: f64, r: f64) -> Self {
        Self::new(cx, cy, r, r)
    }

    pub fn mean_radius(&self) -> f64 {
        0.5 * (self.rx + self.ry)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        if self.rx <= 0.0 || self.ry <= 0.0 {
            return false;
        }
        let u = (x - self.cx) / self.rx;
        let v = (y - self.cy) / self.ry;
        u * u + v * v <= 1.0
    }

    /// Rasterize by pixel-center sampling.
    pub fn to_mask(&self, width: usize, height: usize) -> BinaryMask {
        BinaryMask::from_fn(width, height, |x, y| self.contains(x as f64, y as f64))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }
}

/// Half-open pixel box `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl BoundingBox {
    /// Corners are reordered so that `x1 >= x0` and `y1 >= y0`.
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Self {
        Self {
            x0: x0.min(x1),
            y0: y0.min(y1),
            x1: x0.max(x1),
            y1: y0.max(y1),
        }
    }

    pub fn area(&self) -> i64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn intersection(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let x0 = self.x0.max(other.x0);
        let y0 = self.y0.max(other.y0);
        let x1 = self.x1.min(other.x1);
        let y1 = self.y1.min(other.y1);
        (x1 > x0 && y1 > y0).then_some(BoundingBox { x0, y0, x1, y1 })
    }
}

/// Which localization strategy produced a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MassCenter,
    Lms,
    Hough,
    Mixed,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MassCenter => "MassCenter",
            Method::Lms => "LMS",
            Method::Hough => "Hough",
            Method::Mixed => "Mixed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "MassCenter" => Ok(Method::MassCenter),
            "LMS" => Ok(Method::Lms),
            "Hough" => Ok(Method::Hough),
            "Mixed" => Ok(Method::Mixed),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// Pupil and iris geometry of a single frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMeasurement {
    pub frame_idx: u32,
    /// Seconds since the first frame of the session.
    pub t: f64,
    pub pupil: EllipseFit,
    pub iris: EllipseFit,
    /// Pupil mean radius over iris mean radius.
    pub ratio: f64,
    /// Vertical over horizontal extent of the iris region.
    pub openness: f64,
    pub method: Method,
    /// Set when the pupil came out larger than the iris. The frame is kept.
    pub inverted: bool,
}

impl FrameMeasurement {
    pub fn new(
        frame_idx: u32,
        t: f64,
        pupil: EllipseFit,
        iris: EllipseFit,
        openness: f64,
        method: Method,
    ) -> Self {
        let iris_r = iris.mean_radius();
        let pupil_r = pupil.mean_radius();
        let ratio = if iris_r > 0.0 { pupil_r / iris_r } else { 0.0 };
        Self {
            frame_idx,
            t,
            pupil,
            iris,
            ratio,
            openness,
            method,
            inverted: pupil_r > iris_r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_from_mean_radii() {
        let m = FrameMeasurement::new(
            0,
            0.0,
            EllipseFit::circle(0.0, 0.0, 9.0),
            EllipseFit::circle(0.0, 0.0, 40.0),
            1.0,
            Method::Mixed,
        );
        assert!((m.ratio - 0.225).abs() < 1e-12);
        assert!(!m.inverted);

        let inv = FrameMeasurement::new(
            0,
            0.0,
            EllipseFit::new(0.0, 0.0, 30.0, 20.0),
            EllipseFit::circle(0.0, 0.0, 10.0),
            1.0,
            Method::Mixed,
        );
        assert!(inv.inverted);
        assert!((inv.ratio - 2.5).abs() < 1e-12);
    }

    #[test]
    fn box_normalizes_corners() {
        let b = BoundingBox::new(10, 10, 0, 5);
        assert_eq!((b.x0, b.y0, b.x1, b.y1), (0, 5, 10, 10));
        assert_eq!(b.area(), 50);
    }

    #[test]
    fn method_names() {
        for m in [Method::MassCenter, Method::Lms, Method::Hough, Method::Mixed] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
    }
}
