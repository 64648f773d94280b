//! VIA polygon annotations and their rasterization into label masks.
//!
//! The accepted JSON is the VIA project/export layout: an object keyed by
//! image, optionally wrapped in `_via_img_metadata`. Each image entry holds a
//! `filename` and a `regions` list (array, or object keyed by index as in
//! older exports). A region looks like
//!
//! ```json
//! {
//!   "shape_attributes": {"name": "polygon", "all_points_x": [..], "all_points_y": [..]},
//!   "region_attributes": {"class": "pupil", "eye": "left"}
//! }
//! ```
//!
//! `class` is one of `pupil`, `iris`, `sclera`; `eye` is `left` or `right`.

use serde_json::{Map, Value};

use super::Eye;
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, Label, LabelMask};

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub polygon: Vec<(f64, f64)>,
    /// One of `Sclera`, `Iris` or `Pupil`.
    pub class: Label,
    pub eye: Eye,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub image_id: String,
    pub regions: Vec<Region>,
}

fn ann_err(image_id: &str, message: impl Into<String>) -> Error {
    Error::Annotation {
        image_id: image_id.to_string(),
        message: message.into(),
    }
}

fn parse_class(s: &str) -> Option<Label> {
    match s.trim().to_ascii_lowercase().as_str() {
        "pupil" => Some(Label::Pupil),
        "iris" => Some(Label::Iris),
        "sclera" => Some(Label::Sclera),
        _ => None,
    }
}

fn coords(shape: &Map<String, Value>, key: &str) -> Option<Vec<f64>> {
    shape.get(key)?.as_array()?.iter().map(Value::as_f64).collect()
}

fn parse_region(image_id: &str, idx: usize, region: &Value) -> Result<Region> {
    let err = |m: String| ann_err(image_id, format!("region {idx}: {m}"));
    let shape = region
        .get("shape_attributes")
        .and_then(Value::as_object)
        .ok_or_else(|| err("missing shape_attributes".into()))?;
    match shape.get("name").and_then(Value::as_str) {
        Some("polygon") => {}
        other => return Err(err(format!("unsupported shape {other:?}, expected polygon"))),
    }
    let xs = coords(shape, "all_points_x").ok_or_else(|| err("bad all_points_x".into()))?;
    let ys = coords(shape, "all_points_y").ok_or_else(|| err("bad all_points_y".into()))?;
    if xs.len() != ys.len() {
        return Err(err(format!(
            "{} x coordinates but {} y coordinates",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 3 {
        return Err(err(format!("polygon has {} vertices, need at least 3", xs.len())));
    }
    let attrs = region.get("region_attributes").and_then(Value::as_object);
    let attr = |key: &str| attrs.and_then(|a| a.get(key)).and_then(Value::as_str);
    let class_name = attr("class").ok_or_else(|| err("missing class attribute".into()))?;
    let class = parse_class(class_name).ok_or_else(|| err(format!("unknown class {class_name:?}")))?;
    let eye_name = attr("eye").ok_or_else(|| err("missing eye attribute".into()))?;
    let eye = eye_name
        .parse::<Eye>()
        .map_err(|_| err(format!("unknown eye {eye_name:?}")))?;
    Ok(Region {
        polygon: xs.into_iter().zip(ys).collect(),
        class,
        eye,
    })
}

/// Parse VIA-style polygon annotations, one [`Annotation`] per image entry.
pub fn parse_annotations(bytes: &[u8]) -> Result<Vec<Annotation>> {
    let root: Value = serde_json::from_slice(bytes)?;
    let root = root.get("_via_img_metadata").unwrap_or(&root);
    let images = root
        .as_object()
        .ok_or_else(|| ann_err("<root>", "expected a JSON object keyed by image"))?;
    let mut out = Vec::with_capacity(images.len());
    for (key, entry) in images {
        let image_id = entry
            .get("filename")
            .and_then(Value::as_str)
            .filter(|s| !s.is_empty())
            .unwrap_or(key)
            .to_string();
        let regions: Vec<&Value> = match entry.get("regions") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::Array(a)) => a.iter().collect(),
            Some(Value::Object(o)) => o.values().collect(),
            Some(_) => return Err(ann_err(&image_id, "regions must be an array or object")),
        };
        let regions = regions
            .into_iter()
            .enumerate()
            .map(|(i, r)| parse_region(&image_id, i, r))
            .collect::<Result<Vec<_>>>()?;
        out.push(Annotation { image_id, regions });
    }
    Ok(out)
}

/// Even-odd scanline fill sampled at pixel centers. Pixels whose center
/// lies exactly on the polygon boundary are included. Geometry outside the
/// frame is clipped.
pub fn rasterize_polygon(polygon: &[(f64, f64)], width: usize, height: usize) -> BinaryMask {
    let mut m = BinaryMask::empty(width, height);
    if polygon.is_empty() {
        return m;
    }
    let fill_span = |m: &mut BinaryMask, y: usize, a: f64, b: f64| {
        let (a, b) = (a.min(b), a.max(b));
        let lo = a.ceil().max(0.0);
        let hi = b.floor().min(width as f64 - 1.0);
        if lo <= hi {
            for x in lo as usize..=hi as usize {
                m.set(x, y, true);
            }
        }
    };
    let n = polygon.len();
    let mut crossings = Vec::new();
    for y in 0..height {
        let yf = y as f64;
        crossings.clear();
        for i in 0..n {
            let (x0, y0) = polygon[i];
            let (x1, y1) = polygon[(i + 1) % n];
            if y0 == y1 {
                if y0 == yf {
                    fill_span(&mut m, y, x0, x1);
                }
            } else if (y0 <= yf && yf < y1) || (y1 <= yf && yf < y0) {
                crossings.push(x0 + (yf - y0) * (x1 - x0) / (y1 - y0));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for pair in crossings.chunks_exact(2) {
            fill_span(&mut m, y, pair[0], pair[1]);
        }
    }
    // vertices at local extremes are skipped by the half-open crossing rule
    for &(x, y) in polygon {
        if x.fract() == 0.0 && y.fract() == 0.0 && x >= 0.0 && y >= 0.0 {
            let (x, y) = (x as usize, y as usize);
            if x < width && y < height {
                m.set(x, y, true);
            }
        }
    }
    m
}

fn paint_rank(class: Label) -> u8 {
    match class {
        Label::Sclera => 0,
        Label::Iris => 1,
        Label::Pupil => 2,
        Label::Background => 3,
    }
}

fn rasterize_regions<'a>(
    regions: impl Iterator<Item = &'a Region>,
    width: usize,
    height: usize,
) -> Result<LabelMask> {
    let mut mask = LabelMask::filled(width, height, Label::Background)?;
    let mut ordered: Vec<&Region> = regions.collect();
    // stable: regions of one class keep their file order
    ordered.sort_by_key(|r| paint_rank(r.class));
    for r in ordered {
        mask.paint(&rasterize_polygon(&r.polygon, width, height), r.class)?;
    }
    Ok(mask)
}

/// Rasterize every region of `ann`. Sclera is painted first, then iris,
/// then pupil, so inner structures overwrite the ones around them.
pub fn rasterize(ann: &Annotation, width: usize, height: usize) -> Result<LabelMask> {
    rasterize_regions(ann.regions.iter(), width, height)
}

/// As [`rasterize`], keeping only the regions of one eye.
pub fn rasterize_eye(ann: &Annotation, eye: Eye, width: usize, height: usize) -> Result<LabelMask> {
    rasterize_regions(ann.regions.iter().filter(|r| r.eye == eye), width, height)
}
