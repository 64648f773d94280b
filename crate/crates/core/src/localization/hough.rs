use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, EllipseFit};

use super::RadiusRange;

/// Peaks supported by less than this fraction of the circumference are
/// rejected.
pub const MIN_SUPPORT: f64 = 0.2;

/// Integer offsets `(dx, dy)` at distance `d` from the origin with
/// `r - 1 < d <= r`. An edge pixel lying on the inner boundary of a disk of
/// radius `r` sits in this band relative to the disk center.
fn ring_offsets(r: u32) -> Vec<(isize, isize)> {
    let r = r as isize;
    let (outer, inner) = (r * r, (r - 1) * (r - 1));
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = dx * dx + dy * dy;
            if d2 > inner && d2 <= outer {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Circle Hough transform over integer centers and radii.
///
/// Every edge pixel votes for all centers at distance `r` for each integer
/// `r` in `range`. Votes are divided by the circumference `2 pi r` before
/// taking the argmax so that larger radii are not favored. Ties go to the
/// smaller radius, then to the first center in row-major order.
pub fn hough_circle_fit(edges: &BinaryMask, range: RadiusRange) -> Result<EllipseFit> {
    hough_circle_fit_strided(edges, range, 1)
}

/// As [`hough_circle_fit`], with candidate centers binned on a
/// `stride x stride` grid. The reported center is the middle of the bin.
pub fn hough_circle_fit_strided(
    edges: &BinaryMask,
    range: RadiusRange,
    stride: usize,
) -> Result<EllipseFit> {
    range.validate()?;
    if stride == 0 {
        return Err(Error::Config("hough center stride must be at least 1".into()));
    }
    let r_lo = range.min.ceil().max(1.0) as u32;
    let r_hi = range.max.floor() as u32;
    if r_lo > r_hi {
        return Err(Error::Config(format!(
            "radius range [{}, {}] holds no integer radius",
            range.min, range.max
        )));
    }

    let points: Vec<(isize, isize)> = edges
        .points()
        .map(|(x, y)| (x as isize, y as isize))
        .collect();
    let no_circle = |peak| Error::NoCircle {
        peak,
        threshold: MIN_SUPPORT,
    };
    if points.is_empty() {
        return Err(no_circle(0.0));
    }

    let (w, h) = (edges.width() as isize, edges.height() as isize);
    let s = stride as isize;
    let (bw, bh) = ((w + s - 1) / s, (h + s - 1) / s);
    let mut acc = vec![0u32; (bw * bh) as usize];

    // (votes, radius, bin index)
    let mut best: Option<(u32, u32, usize)> = None;
    for r in r_lo..=r_hi {
        acc.iter_mut().for_each(|v| *v = 0);
        let ring = ring_offsets(r);
        for &(ex, ey) in &points {
            for &(dx, dy) in &ring {
                let (cx, cy) = (ex + dx, ey + dy);
                if cx >= 0 && cy >= 0 && cx < w && cy < h {
                    acc[((cy / s) * bw + cx / s) as usize] += 1;
                }
            }
        }
        for (i, &votes) in acc.iter().enumerate() {
            // votes / r > best_votes / best_r, compared exactly
            let better = match best {
                None => votes > 0,
                Some((bv, br, _)) => u64::from(votes) * u64::from(br) > u64::from(bv) * u64::from(r),
            };
            if better {
                best = Some((votes, r, i));
            }
        }
    }

    let Some((votes, r, bin)) = best else {
        return Err(no_circle(0.0));
    };
    let support = f64::from(votes) / (TAU * f64::from(r));
    if support < MIN_SUPPORT {
        return Err(no_circle(support));
    }
    let (bx, by) = ((bin as isize % bw) as f64, (bin as isize / bw) as f64);
    let half = (stride as f64 - 1.0) / 2.0;
    Ok(EllipseFit::circle(
        bx * stride as f64 + half,
        by * stride as f64 + half,
        f64::from(r),
    ))
}
