//! Label and binary masks.
//!
//! Coordinates follow image convention: `x` is the column, `y` the row,
//! origin at the top-left, pixel centers at integer coordinates. Both mask
//! types store pixels row-major.

mod geometry;
mod pgm;

pub use geometry::{BoundingBox, EllipseFit, FrameMeasurement, Method};
pub use pgm::{decode_mask, encode_mask};

use crate::error::{Error, Result};

/// Per-pixel class of a segmented eye crop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Label {
    #[default]
    Background,
    Sclera,
    Iris,
    Pupil,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Background, Label::Sclera, Label::Iris, Label::Pupil];

    /// Gray level used for this class in PGM mask files.
    pub fn gray(self) -> u8 {
        match self {
            Label::Background => 0,
            Label::Sclera => 85,
            Label::Iris => 170,
            Label::Pupil => 255,
        }
    }

    pub fn from_gray(value: u8) -> Option<Label> {
        match value {
            0 => Some(Label::Background),
            85 => Some(Label::Sclera),
            170 => Some(Label::Iris),
            255 => Some(Label::Pupil),
            _ => None,
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidDimensions { width, height });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    labels: Vec<Label>,
}

impl LabelMask {
    pub fn new(width: usize, height: usize, labels: Vec<Label>) -> Result<Self> {
        check_dims(width, height, labels.len())?;
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    /// Mask with every pixel set to `label`.
    pub fn filled(width: usize, height: usize, label: Label) -> Result<Self> {
        let len = width
            .checked_mul(height)
            .ok_or(Error::InvalidDimensions { width, height })?;
        Self::new(width, height, vec![label; len])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> Label {
        self.labels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        self.labels[y * self.width + x] = label;
    }

    /// Binary plane of pixels carrying `class`.
    pub fn class_plane(&self, class: Label) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&l| l == class).collect(),
        }
    }

    /// Overwrite every pixel set in `plane` with `label`.
    pub fn paint(&mut self, plane: &BinaryMask, label: Label) -> Result<()> {
        self.check_same(plane)?;
        for (dst, &bit) in self.labels.iter_mut().zip(&plane.bits) {
            if bit {
                *dst = label;
            }
        }
        Ok(())
    }

    fn check_same(&self, other: &BinaryMask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            });
        }
        Ok(())
    }
}

/// Free-function form of [`LabelMask::class_plane`].
pub fn class_plane(mask: &LabelMask, class: Label) -> BinaryMask {
    mask.class_plane(class)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    /// Build a mask by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                m.bits[y * width + x] = f(x, y);
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Signed lookup; anything outside the image reads as `outside`.
    #[inline]
    pub fn get_or(&self, x: isize, y: isize, outside: bool) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            outside
        } else {
            self.bits[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn popcount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Coordinates `(x, y)` of set pixels in row-major order.
    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    pub fn same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::DimensionMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        self.same_dims(other)?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn xor(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a != b)
    }

    pub fn complement(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    /// True when every set pixel of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Inclusive column and row extents of the set pixels, as
    /// `(min_x, max_x, min_y, max_y)`.
    pub fn extents(&self) -> Option<(usize, usize, usize, usize)> {
        let mut ext: Option<(usize, usize, usize, usize)> = None;
        for (x, y) in self.points() {
            ext = Some(match ext {
                None => (x, x, y, y),
                Some((x0, x1, y0, y1)) => (x0.min(x), x1.max(x), y0.min(y), y1.max(y)),
            });
        }
        ext
    }

    /// Translate by `(dx, dy)`; pixels shifted out of the frame are dropped.
    pub fn shifted(&self, dx: isize, dy: isize) -> BinaryMask {
        let mut out = BinaryMask::empty(self.width, self.height);
        for (x, y) in self.points() {
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                out.set(nx as usize, ny as usize, true);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(w: usize, h: usize, v: &[Label]) -> LabelMask {
        LabelMask::new(w, h, v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(LabelMask::new(0, 1, vec![]).is_err());
        assert!(LabelMask::new(2, 2, vec![Label::Iris; 3]).is_err());
        assert!(BinaryMask::new(1, 0, vec![]).is_err());
    }

    #[test]
    fn class_plane_all_pupil() {
        let m = labels(2, 2, &[Label::Pupil; 4]);
        assert_eq!(m.class_plane(Label::Pupil).popcount(), 4);
        assert!(m.class_plane(Label::Iris).is_empty());
    }

    #[test]
    fn class_plane_checker() {
        use Label::*;
        let m = labels(2, 2, &[Iris, Pupil, Pupil, Iris]);
        assert_eq!(m.class_plane(Iris).bits(), &[true, false, false, true]);
        assert_eq!(m.class_plane(Pupil).bits(), &[false, true, true, false]);
    }

    #[test]
    fn gray_levels_round_trip() {
        for l in Label::ALL {
            assert_eq!(Label::from_gray(l.gray()), Some(l));
        }
        assert_eq!(Label::from_gray(17), None);
    }

    #[test]
    fn extents_and_shift() {
        let mut m = BinaryMask::empty(10, 10);
        m.set(2, 3, true);
        m.set(5, 7, true);
        assert_eq!(m.extents(), Some((2, 5, 3, 7)));
        let s = m.shifted(1, -1);
        assert_eq!(s.extents(), Some((3, 6, 2, 6)));
        assert_eq!(BinaryMask::empty(3, 3).extents(), None);
    }
}
