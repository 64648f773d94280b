use crate::error::{Error, Result};
use crate::mask::{BinaryMask, EllipseFit};

/// Condition numbers above this are treated as collinear input.
const MAX_CONDITION: f64 = 1e12;

/// Algebraic (Kasa) least-squares circle through `points`.
///
/// Minimizes `sum (x^2 + y^2 + D x + E y + F)^2`. Coordinates are centered on
/// their mean first; the fit is unchanged by this but the normal equations
/// decouple into a 2x2 system for `D, E` and a closed form for `F`. The
/// result is exact for noise-free co-circular points.
pub fn lms_circle_fit(points: &[(f64, f64)]) -> Result<EllipseFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let (mx, my) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (mx, my) = (mx / n, my / n);

    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let (mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (u, v) = (x - mx, y - my);
        let z = u * u + v * v;
        sxx += u * u;
        sxy += u * v;
        syy += v * v;
        sxz += u * z;
        syz += v * z;
        sz += z;
    }

    // eigenvalues of the symmetric scatter matrix give the condition number
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    let (lmax, lmin) = (half_trace + disc, half_trace - disc);
    let cond = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if !(cond <= MAX_CONDITION) {
        return Err(Error::DegenerateFit(format!(
            "points are collinear (condition number {cond:.3e})"
        )));
    }

    let det = sxx * syy - sxy * sxy;
    let d = -(sxz * syy - syz * sxy) / det;
    let e = -(syz * sxx - sxz * sxy) / det;
    let f = -sz / n;

    let (cu, cv) = (-0.5 * d, -0.5 * e);
    let r = (cu * cu + cv * cv - f).sqrt();
    Ok(EllipseFit::circle(cu + mx, cv + my, r))
}

/// Pixel coordinates of the set pixels of `m`, for feeding the circle fit.
pub fn mask_points(m: &BinaryMask) -> Vec<(f64, f64)> {
    m.points().map(|(x, y)| (x as f64, y as f64)).collect()
}
