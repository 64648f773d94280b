//! Binary morphology on [`BinaryMask`]s with a fixed 3x3 structuring element.
//!
//! Foreground connectivity is 8, background connectivity is 4.

use std::collections::VecDeque;

use crate::error::Result;
use crate::mask::BinaryMask;

/// Default `|Gy| / |Gx|` ratio above which a contour pixel counts as a
/// horizontal edge.
pub const DEFAULT_HORIZ_RATIO: f64 = 2.0;

const NEIGHBORS_8: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Separable 3x3 window: a row pass then a column pass. `all` selects
/// erosion (every pixel set) over dilation (any pixel set).
fn window(m: &BinaryMask, border: bool, all: bool) -> BinaryMask {
    let (w, h) = (m.width(), m.height());
    let bits = m.bits();
    let combine = |a: bool, b: bool| if all { a && b } else { a || b };
    let mut rows = vec![false; w * h];
    for y in 0..h {
        let row = &bits[y * w..(y + 1) * w];
        for x in 0..w {
            let left = if x > 0 { row[x - 1] } else { border };
            let right = if x + 1 < w { row[x + 1] } else { border };
            rows[y * w + x] = combine(combine(left, row[x]), right);
        }
    }
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let up = if y > 0 { rows[(y - 1) * w + x] } else { border };
            let down = if y + 1 < h { rows[(y + 1) * w + x] } else { border };
            out[y * w + x] = combine(combine(up, rows[y * w + x]), down);
        }
    }
    BinaryMask::new(w, h, out).expect("same dimensions")
}

/// Erosion; pixels outside the frame read as `border`.
pub fn erode_with_border(m: &BinaryMask, border: bool) -> BinaryMask {
    window(m, border, true)
}

/// Dilation; pixels outside the frame read as `border`.
pub fn dilate_with_border(m: &BinaryMask, border: bool) -> BinaryMask {
    window(m, border, false)
}

/// A pixel survives when its whole 3x3 neighborhood is set. Off-frame
/// pixels count as unset, so the image border always erodes.
pub fn erode(m: &BinaryMask) -> BinaryMask {
    erode_with_border(m, false)
}

pub fn dilate(m: &BinaryMask) -> BinaryMask {
    dilate_with_border(m, false)
}

/// Set every background pixel that cannot reach the image border through
/// 4-connected background.
///
/// Only the bounding box of the foreground grown by one pixel is searched:
/// everything outside it is background connected to the border.
pub fn fill_holes(m: &BinaryMask) -> BinaryMask {
    let Some((x0, x1, y0, y1)) = m.extents() else {
        return m.clone();
    };
    let (w, h) = (m.width(), m.height());
    let (x0, y0) = (x0.saturating_sub(1), y0.saturating_sub(1));
    let (x1, y1) = ((x1 + 1).min(w - 1), (y1 + 1).min(h - 1));
    let mut outside = vec![false; w * h];
    let mut queue = VecDeque::new();
    let seed = |x: usize, y: usize, outside: &mut Vec<bool>, queue: &mut VecDeque<(usize, usize)>| {
        let i = y * w + x;
        if !m.get(x, y) && !outside[i] {
            outside[i] = true;
            queue.push_back((x, y));
        }
    };
    for x in x0..=x1 {
        seed(x, y0, &mut outside, &mut queue);
        seed(x, y1, &mut outside, &mut queue);
    }
    for y in y0..=y1 {
        seed(x0, y, &mut outside, &mut queue);
        seed(x1, y, &mut outside, &mut queue);
    }
    while let Some((x, y)) = queue.pop_front() {
        if x > x0 {
            seed(x - 1, y, &mut outside, &mut queue);
        }
        if x < x1 {
            seed(x + 1, y, &mut outside, &mut queue);
        }
        if y > y0 {
            seed(x, y - 1, &mut outside, &mut queue);
        }
        if y < y1 {
            seed(x, y + 1, &mut outside, &mut queue);
        }
    }
    let mut out = m.clone();
    for y in y0..=y1 {
        for x in x0..=x1 {
            if !outside[y * w + x] {
                out.set(x, y, true);
            }
        }
    }
    out
}

/// One-pixel inner boundary: `m XOR erode(m)`.
pub fn contour(m: &BinaryMask) -> BinaryMask {
    m.xor(&erode(m)).expect("same dimensions")
}

/// 8-connected component labels of the set pixels.
///
/// Returns a per-pixel label (0 for background, components numbered from 1
/// in row-major order of their first pixel) and the size of each component,
/// indexed by `label - 1`.
pub fn label_components(m: &BinaryMask) -> (Vec<u32>, Vec<usize>) {
    let (w, h) = (m.width(), m.height());
    let mut labels = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !m.bits()[start] || labels[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        let mut size = 0;
        labels[start] = id;
        stack.push(start);
        while let Some(i) = stack.pop() {
            size += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for (dx, dy) in NEIGHBORS_8 {
                let (nx, ny) = (x + dx, y + dy);
                if m.get_or(nx, ny, false) {
                    let j = ny as usize * w + nx as usize;
                    if labels[j] == 0 {
                        labels[j] = id;
                        stack.push(j);
                    }
                }
            }
        }
        sizes.push(size);
    }
    (labels, sizes)
}

/// Keep only the largest 8-connected component. Ties go to the component
/// whose first pixel comes first in row-major order.
pub fn largest_component(m: &BinaryMask) -> BinaryMask {
    let (labels, sizes) = label_components(m);
    let Some(best) = sizes
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, usize)>, (i, &s)| match best {
            Some((_, bs)) if bs >= s => best,
            _ => Some((i, s)),
        })
        .map(|(i, _)| i as u32 + 1)
    else {
        return BinaryMask::empty(m.width(), m.height());
    };
    BinaryMask::new(
        m.width(),
        m.height(),
        labels.into_iter().map(|l| l == best).collect(),
    )
    .expect("same dimensions")
}

/// 3x3 Sobel gradient of `m` read as a 0/1 image with zero padding.
pub fn sobel_at(m: &BinaryMask, x: usize, y: usize) -> (i32, i32) {
    let p = |dx: isize, dy: isize| m.get_or(x as isize + dx, y as isize + dy, false) as i32;
    let gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
    let gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
    (gx, gy)
}

/// Drop contour pixels lying on near-horizontal edges of `source`, i.e.
/// where the Sobel response satisfies `|Gy| > horiz_ratio * |Gx|`.
pub fn suppress_horizontal_edges(
    contour: &BinaryMask,
    source: &BinaryMask,
    horiz_ratio: f64,
) -> Result<BinaryMask> {
    contour.same_dims(source)?;
    let mut out = contour.clone();
    for (x, y) in contour.points() {
        let (gx, gy) = sobel_at(source, x, y);
        if f64::from(gy.abs()) > horiz_ratio * f64::from(gx.abs()) {
            out.set(x, y, false);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn disk(w: usize, h: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            dx * dx + dy * dy <= r * r
        })
    }

    fn full(w: usize, h: usize) -> BinaryMask {
        BinaryMask::from_fn(w, h, |_, _| true)
    }

    /// Per-pixel neighborhood check written independently of `window`.
    fn erode_oracle(m: &BinaryMask) -> BinaryMask {
        let (w, h) = (m.width() as isize, m.height() as isize);
        BinaryMask::from_fn(m.width(), m.height(), |x, y| {
            let mut ok = true;
            for yy in y as isize - 1..=y as isize + 1 {
                for xx in x as isize - 1..=x as isize + 1 {
                    let inside = xx >= 0 && yy >= 0 && xx < w && yy < h;
                    ok &= inside && m.get(xx as usize, yy as usize);
                }
            }
            ok
        })
    }

    #[test]
    fn erode_basics() {
        assert!(erode(&BinaryMask::empty(5, 5)).is_empty());
        let e = erode(&full(3, 3));
        assert_eq!(e.popcount(), 1);
        assert!(e.get(1, 1));
    }

    #[test]
    fn erode_disk_matches_neighborhood_oracle() {
        let d = disk(32, 32, 16.0, 16.0, 5.0);
        let e = erode(&d);
        assert_eq!(e, erode_oracle(&d));
        // disk r=5 erodes to a 4-ish disk; every survivor is within r-1 of center
        for (x, y) in e.points() {
            let r = ((x as f64 - 16.0).powi(2) + (y as f64 - 16.0).powi(2)).sqrt();
            assert!(r <= 4.0 + 1e-9);
        }
        assert_eq!(e.popcount(), erode_oracle(&d).popcount());
    }

    #[test]
    fn dilate_basics() {
        assert!(dilate(&BinaryMask::empty(4, 4)).is_empty());
        let mut m = BinaryMask::empty(3, 3);
        m.set(1, 1, true);
        assert_eq!(dilate(&m), full(3, 3));
    }

    #[test]
    fn fill_annulus() {
        let outer = disk(40, 40, 20.0, 20.0, 10.0);
        let inner = disk(40, 40, 20.0, 20.0, 5.0);
        let annulus = outer.xor(&inner).unwrap();
        assert_eq!(fill_holes(&annulus), outer);
        assert_eq!(fill_holes(&outer), outer);
    }

    #[test]
    fn fill_keeps_border_connected_background() {
        // a C shape open to the right border is not a hole
        let m = BinaryMask::from_fn(7, 7, |x, y| {
            (y == 1 || y == 5) && x >= 1 || x == 1 && (1..=5).contains(&y)
        });
        assert_eq!(fill_holes(&m), m);
    }

    #[test]
    fn fill_uses_four_connected_background() {
        // background pixel at (2,2) touches the outside only diagonally
        let m = BinaryMask::from_fn(5, 5, |x, y| {
            let ring = (1..=3).contains(&x) && (1..=3).contains(&y) && !(x == 2 && y == 2);
            ring && !(x == 3 && y == 3)
        });
        // (3,3) is background and 4-adjacent to the outside; (2,2) is only
        // diagonally adjacent to (3,3), so it is a hole
        let f = fill_holes(&m);
        assert!(f.get(2, 2));
        assert!(!f.get(3, 3));
    }

    #[test]
    fn contour_basics() {
        assert!(contour(&BinaryMask::empty(4, 4)).is_empty());
        let c = contour(&full(3, 3));
        assert_eq!(c.popcount(), 8);
        assert!(!c.get(1, 1));
    }

    #[test]
    fn contour_of_disk_lies_on_radius() {
        let d = disk(40, 40, 20.0, 20.0, 9.0);
        let c = contour(&d);
        assert!(c.popcount() > 0);
        // an inner pixel is on the contour when some 8-neighbor lies outside,
        // so its distance is within sqrt(2) of the radius
        let mut sum = 0.0;
        for (x, y) in c.points() {
            let r = ((x as f64 - 20.0).powi(2) + (y as f64 - 20.0).powi(2)).sqrt();
            assert!(r > 9.0 - 2f64.sqrt() && r <= 9.0, "contour pixel at radius {r}");
            sum += r;
        }
        let mean = sum / c.popcount() as f64;
        assert!((mean - 9.0).abs() <= 1.0, "mean contour radius {mean}");
    }

    #[test]
    fn largest_component_cases() {
        assert!(largest_component(&BinaryMask::empty(5, 5)).is_empty());
        let blob = disk(20, 20, 10.0, 10.0, 4.0);
        assert_eq!(largest_component(&blob), blob);

        // 8x5 = 40 px block and a 7 px bar
        let m = BinaryMask::from_fn(20, 20, |x, y| {
            (2..10).contains(&x) && (2..7).contains(&y) || y == 15 && (5..12).contains(&x)
        });
        let big = largest_component(&m);
        assert_eq!(big.popcount(), 40);
        assert!(big.get(2, 2));
        assert!(!big.get(5, 15));
    }

    #[test]
    fn largest_component_tie_prefers_first_in_row_major() {
        let m = BinaryMask::from_fn(10, 10, |x, y| {
            (x == 7 && (1..4).contains(&y)) || (x == 1 && (5..8).contains(&y))
        });
        let keep = largest_component(&m);
        assert!(keep.get(7, 1));
        assert_eq!(keep.popcount(), 3);
    }

    #[test]
    fn diagonal_pixels_are_one_component() {
        let m = BinaryMask::from_fn(4, 4, |x, y| x == y);
        let (_, sizes) = label_components(&m);
        assert_eq!(sizes, vec![4]);
    }

    #[test]
    fn horizontal_bar_keeps_end_caps() {
        // full-width bar on rows 3..=6 of a 20x10 image
        let bar = BinaryMask::from_fn(20, 10, |_, y| (3..=6).contains(&y));
        let c = contour(&bar);
        let kept = suppress_horizontal_edges(&c, &bar, DEFAULT_HORIZ_RATIO).unwrap();
        let expected =
            BinaryMask::from_fn(20, 10, |x, y| (3..=6).contains(&y) && (x == 0 || x == 19));
        assert_eq!(kept, expected);
    }

    #[test]
    fn vertical_bar_keeps_sides() {
        let bar = BinaryMask::from_fn(10, 20, |x, _| (3..=6).contains(&x));
        let c = contour(&bar);
        let kept = suppress_horizontal_edges(&c, &bar, DEFAULT_HORIZ_RATIO).unwrap();
        let expected = BinaryMask::from_fn(10, 20, |x, y| {
            (x == 3 || x == 6) && (0..20).contains(&y)
        });
        assert_eq!(kept, expected);
    }

    #[test]
    fn suppress_empty_and_mismatch() {
        let src = disk(10, 10, 5.0, 5.0, 3.0);
        let e = BinaryMask::empty(10, 10);
        assert!(suppress_horizontal_edges(&e, &src, 2.0).unwrap().is_empty());
        assert!(suppress_horizontal_edges(&BinaryMask::empty(9, 10), &src, 2.0).is_err());
    }

    #[test]
    fn sobel_hand_values_on_bar_corner() {
        let bar = BinaryMask::from_fn(20, 10, |_, y| (3..=6).contains(&y));
        assert_eq!(sobel_at(&bar, 0, 3), (3, 3));
        assert_eq!(sobel_at(&bar, 1, 3), (0, 4));
        assert_eq!(sobel_at(&bar, 0, 4), (4, 0));
    }

    /// Reference labeling by recursive flood fill, independent of
    /// `label_components`.
    fn reference_sizes(m: &BinaryMask) -> Vec<usize> {
        fn flood(m: &BinaryMask, seen: &mut [bool], x: isize, y: isize) -> usize {
            if !m.get_or(x, y, false) {
                return 0;
            }
            let i = y as usize * m.width() + x as usize;
            if seen[i] {
                return 0;
            }
            seen[i] = true;
            let mut n = 1;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    n += flood(m, seen, x + dx, y + dy);
                }
            }
            n
        }
        let mut seen = vec![false; m.width() * m.height()];
        let mut sizes = vec![];
        for (x, y) in m.points().collect::<Vec<_>>() {
            let s = flood(m, &mut seen, x as isize, y as isize);
            if s > 0 {
                sizes.push(s);
            }
        }
        sizes
    }

    /// Whole-image border flood, written independently of `fill_holes`.
    fn fill_oracle(m: &BinaryMask) -> BinaryMask {
        let (w, h) = (m.width() as isize, m.height() as isize);
        let mut reach = vec![false; m.bits().len()];
        let mut stack: Vec<(isize, isize)> = (0..w)
            .flat_map(|x| [(x, 0), (x, h - 1)])
            .chain((0..h).flat_map(|y| [(0, y), (w - 1, y)]))
            .collect();
        while let Some((x, y)) = stack.pop() {
            if x < 0 || y < 0 || x >= w || y >= h {
                continue;
            }
            let i = (y * w + x) as usize;
            if reach[i] || m.bits()[i] {
                continue;
            }
            reach[i] = true;
            stack.extend([(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]);
        }
        BinaryMask::new(m.width(), m.height(), reach.iter().map(|r| !r).collect()).unwrap()
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (1usize..33, 1usize..33, 0.05f64..0.95).prop_flat_map(|(w, h, p)| {
            proptest::collection::vec(proptest::bool::weighted(p), w * h)
                .prop_map(move |bits| BinaryMask::new(w, h, bits).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn erode_dilate_duality(m in arb_mask()) {
            prop_assert_eq!(erode(&m), dilate_with_border(&m.complement(), true).complement());
            prop_assert_eq!(dilate(&m), erode_with_border(&m.complement(), true).complement());
        }

        #[test]
        fn open_close_sandwich(m in arb_mask()) {
            prop_assert!(dilate(&erode(&m)).is_subset_of(&m));
            prop_assert!(m.is_subset_of(&erode_with_border(&dilate(&m), true)));
        }

        #[test]
        fn fill_holes_idempotent_and_extensive(m in arb_mask()) {
            let f = fill_holes(&m);
            prop_assert!(m.is_subset_of(&f));
            prop_assert_eq!(fill_holes(&f), f);
        }

        #[test]
        fn erode_matches_oracle(m in arb_mask()) {
            prop_assert_eq!(erode(&m), erode_oracle(&m));
        }

        #[test]
        fn fill_holes_matches_whole_image_flood(m in arb_mask()) {
            prop_assert_eq!(fill_holes(&m), fill_oracle(&m));
        }

        #[test]
        fn contour_subset_and_nonempty(m in arb_mask()) {
            let c = contour(&m);
            prop_assert!(c.is_subset_of(&m));
            prop_assert_eq!(c.is_empty(), m.is_empty());
        }

        #[test]
        fn largest_component_matches_reference(m in arb_mask()) {
            let sizes = reference_sizes(&m);
            let kept = largest_component(&m);
            prop_assert!(kept.is_subset_of(&m));
            prop_assert_eq!(kept.popcount(), sizes.iter().copied().max().unwrap_or(0));
            let (_, ours) = label_components(&m);
            let mut a = ours.clone();
            let mut b = sizes.clone();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }
}
