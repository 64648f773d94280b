//! Seeded synthetic eye masks and cohorts with exact ground truth.
//!
//! All randomness comes from `Xoshiro256PlusPlus::seed_from_u64`, so a seed
//! reproduces the same masks bit for bit on every platform.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingestion::{
    write_measurements_csv, Cohort, Eye, SessionMeta, SessionRecord, DEFAULT_FRAME_RATE,
    MANIFEST_FILE,
};
use crate::localization::{localize, LocalizationConfig};
use crate::mask::{encode_mask, EllipseFit, FrameMeasurement, Label, LabelMask, Method};

pub const DEFAULT_CANVAS: usize = 320;

/// Sclera half-axes relative to the iris half-axes.
const SCLERA_SCALE: (f64, f64) = (2.2, 1.25);

/// Harmonics used for boundary jitter. Starting at 2 keeps the region
/// centroid in place.
const JITTER_HARMONICS: std::ops::RangeInclusive<u32> = 2..=5;

/// One synthetic eye.
#[derive(Debug, Clone, PartialEq)]
pub struct EyeSpec {
    pub width: usize,
    pub height: usize,
    pub iris: EllipseFit,
    pub pupil: EllipseFit,
    /// Fraction of the iris diameter removed from the top by a horizontal
    /// eyelid chord.
    pub occlusion_fraction: f64,
    /// Maximum radial displacement of class boundaries, pixels.
    pub boundary_jitter: f64,
    pub seed: u64,
}

impl EyeSpec {
    /// Centered eye on the default canvas, no occlusion or jitter.
    pub fn centered(pupil_r: f64, iris_r: f64) -> Self {
        let c = DEFAULT_CANVAS as f64 / 2.0;
        Self {
            width: DEFAULT_CANVAS,
            height: DEFAULT_CANVAS,
            iris: EllipseFit::circle(c, c, iris_r),
            pupil: EllipseFit::circle(c, c, pupil_r),
            occlusion_fraction: 0.0,
            boundary_jitter: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Spec(m));
        if self.width == 0 || self.height == 0 {
            return err(format!("canvas {}x{} is empty", self.width, self.height));
        }
        for (name, e) in [("iris", &self.iris), ("pupil", &self.pupil)] {
            let ok = [e.cx, e.cy, e.rx, e.ry].iter().all(|v| v.is_finite()) && e.rx > 0.0 && e.ry > 0.0;
            if !ok {
                return err(format!("{name} ellipse {e:?} is invalid"));
            }
        }
        if !(self.boundary_jitter >= 0.0 && self.boundary_jitter.is_finite()) {
            return err(format!("boundary jitter {} must be >= 0", self.boundary_jitter));
        }
        if self.boundary_jitter > 0.5 * self.pupil.rx.min(self.pupil.ry) {
            return err(format!(
                "boundary jitter {} too large for pupil {:?}",
                self.boundary_jitter, self.pupil
            ));
        }
        if !(0.0..1.0).contains(&self.occlusion_fraction) {
            return err(format!(
                "occlusion fraction {} outside [0, 1)",
                self.occlusion_fraction
            ));
        }
        let d = (self.pupil.cx - self.iris.cx).hypot(self.pupil.cy - self.iris.cy);
        let reach = d + self.pupil.rx.max(self.pupil.ry) + 2.0 * self.boundary_jitter;
        if reach >= self.iris.rx.min(self.iris.ry) {
            return err(format!(
                "pupil {:?} exceeds iris {:?}",
                self.pupil, self.iris
            ));
        }
        Ok(())
    }

    /// Row of the eyelid chord; pixels above it are background.
    pub fn chord_y(&self) -> f64 {
        self.iris.cy - self.iris.ry + self.occlusion_fraction * 2.0 * self.iris.ry
    }

    /// Vertical over horizontal extent of the occluded iris ellipse.
    pub fn analytic_openness(&self) -> f64 {
        let ry = self.iris.ry;
        let below = self.chord_y() - self.iris.cy;
        let width = if below <= 0.0 {
            2.0 * self.iris.rx
        } else {
            2.0 * self.iris.rx * (1.0 - (below / ry).powi(2)).max(0.0).sqrt()
        };
        2.0 * ry * (1.0 - self.occlusion_fraction) / width
    }

    /// Ground truth: pre-jitter ellipses and analytic openness.
    pub fn truth(&self) -> FrameMeasurement {
        FrameMeasurement::new(0, 0.0, self.pupil, self.iris, self.analytic_openness(), Method::Mixed)
    }
}

/// Radial boundary perturbation `amp * sum a_k cos(k theta + phi_k)` with
/// `sum |a_k| = 1`.
#[derive(Debug, Clone)]
struct Jitter {
    amp: f64,
    terms: Vec<(f64, f64, f64)>,
}

impl Jitter {
    fn new(amp: f64, rng: &mut Xoshiro256PlusPlus) -> Self {
        let mut terms: Vec<(f64, f64, f64)> = JITTER_HARMONICS
            .map(|k| (f64::from(k), rng.random_range(-1.0..1.0), rng.random_range(0.0..TAU)))
            .collect();
        let norm: f64 = terms.iter().map(|t| t.1.abs()).sum();
        if norm > 0.0 {
            terms.iter_mut().for_each(|t| t.1 /= norm);
        }
        Self { amp, terms }
    }

    fn at(&self, theta: f64) -> f64 {
        self.amp
            * self
                .terms
                .iter()
                .map(|&(k, a, phi)| a * (k * theta + phi).cos())
                .sum::<f64>()
    }
}

struct Shape<'a> {
    e: &'a EllipseFit,
    jitter: Jitter,
    // Normalized radius bounds of the jittered boundary: scaling the ellipse
    // by `1 -+ amp / min(rx, ry)` moves it radially by at least `amp`.
    inner2: f64,
    outer2: f64,
}

impl<'a> Shape<'a> {
    fn new(e: &'a EllipseFit, jitter: Jitter) -> Self {
        let k = jitter.amp / e.rx.min(e.ry);
        let inner = (1.0 - k).max(0.0);
        Self {
            e,
            jitter,
            inner2: inner * inner,
            outer2: (1.0 + k) * (1.0 + k),
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.e.cx, y - self.e.cy);
        let (u, v) = (dx / self.e.rx, dy / self.e.ry);
        let rho2 = u * u + v * v;
        if self.jitter.amp == 0.0 {
            return rho2 <= 1.0;
        }
        if rho2 <= self.inner2 {
            return true;
        }
        if rho2 > self.outer2 {
            return false;
        }
        let theta = dy.atan2(dx);
        let (rx, ry) = (self.e.rx, self.e.ry);
        let boundary =
            rx * ry / ((ry * theta.cos()).powi(2) + (rx * theta.sin()).powi(2)).sqrt() + self.jitter.at(theta);
        dx * dx + dy * dy <= boundary * boundary
    }
}

/// Render a synthetic eye and return it with its ground truth.
///
/// The sclera ellipse contains the iris, which contains the pupil; all class
/// boundaries get independent seeded radial jitter, then everything above
/// the eyelid chord is set to background.
pub fn gen_eye(spec: &EyeSpec) -> Result<(LabelMask, FrameMeasurement)> {
    spec.validate()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(spec.seed);
    let j = spec.boundary_jitter;
    let sclera_e = EllipseFit::new(
        spec.iris.cx,
        spec.iris.cy,
        spec.iris.rx * SCLERA_SCALE.0,
        spec.iris.ry * SCLERA_SCALE.1,
    );
    let sclera = Shape::new(&sclera_e, Jitter::new(j, &mut rng));
    let iris = Shape::new(&spec.iris, Jitter::new(j, &mut rng));
    let pupil = Shape::new(&spec.pupil, Jitter::new(j, &mut rng));
    let chord = spec.chord_y();
    let occluded = spec.occlusion_fraction > 0.0;

    let mut labels = Vec::with_capacity(spec.width * spec.height);
    for y in 0..spec.height {
        let fy = y as f64;
        for x in 0..spec.width {
            let fx = x as f64;
            let label = if occluded && fy < chord {
                Label::Background
            } else if pupil.contains(fx, fy) {
                Label::Pupil
            } else if iris.contains(fx, fy) {
                Label::Iris
            } else if sclera.contains(fx, fy) {
                Label::Sclera
            } else {
                Label::Background
            };
            labels.push(label);
        }
    }
    Ok((LabelMask::new(spec.width, spec.height, labels)?, spec.truth()))
}

/// Pupil dynamics of a synthetic cohort.
///
/// Per frame the pupil radius is
/// `base + subject offset + dilation + amplitude * exp(-rate * t) + noise`,
/// an exponential light constriction toward the subject's base radius. The
/// dilation offset applies to the alcohol cohort only.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    pub base_radius: f64,
    pub dilation_offset: f64,
    pub constriction_amplitude: f64,
    /// Per second.
    pub constriction_rate: f64,
    /// Between-subject standard deviation of the base radius.
    pub subject_sd: f64,
    /// Frame-to-frame radius noise.
    pub frame_sd: f64,
    pub frames: u32,
    pub frame_rate: f64,
    pub boundary_jitter: f64,
    /// Per-session eyelid occlusion is drawn from `[0, max_occlusion]`.
    pub max_occlusion: f64,
}

impl Default for Dynamics {
    fn default() -> Self {
        Self {
            base_radius: 9.0,
            dilation_offset: 2.0,
            constriction_amplitude: 3.0,
            constriction_rate: 1.5,
            subject_sd: 0.3,
            frame_sd: 0.15,
            frames: 100,
            frame_rate: DEFAULT_FRAME_RATE,
            boundary_jitter: 0.5,
            max_occlusion: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortSpec {
    pub n_subjects: usize,
    pub cohort: Cohort,
    pub dynamics: Dynamics,
    pub seed: u64,
    pub sessions: Vec<u8>,
    pub eyes: Vec<Eye>,
    pub width: usize,
    pub height: usize,
}

impl CohortSpec {
    pub fn new(n_subjects: usize, cohort: Cohort, seed: u64) -> Self {
        Self {
            n_subjects,
            cohort,
            dynamics: Dynamics::default(),
            seed,
            sessions: vec![0],
            eyes: vec![Eye::Right],
            width: DEFAULT_CANVAS,
            height: DEFAULT_CANVAS,
        }
    }
}

/// A generated session. Masks are rendered on demand from `specs`.
#[derive(Debug, Clone)]
pub struct SyntheticSession {
    pub meta: SessionMeta,
    pub specs: Vec<EyeSpec>,
}

impl SyntheticSession {
    /// Directory name used by [`SyntheticSession::write_dir`] callers.
    pub fn dir_name(&self) -> String {
        format!("{}_s{}_{}", self.meta.subject_id, self.meta.session, self.meta.eye)
    }

    fn time(&self, idx: usize) -> f64 {
        idx as f64 / self.meta.frame_rate
    }

    pub fn render(&self, idx: usize) -> Result<LabelMask> {
        gen_eye(&self.specs[idx]).map(|(m, _)| m)
    }

    pub fn truth(&self) -> SessionRecord {
        let frames = self
            .specs
            .iter()
            .enumerate()
            .map(|(i, s)| FrameMeasurement {
                frame_idx: i as u32,
                t: self.time(i),
                ..s.truth()
            })
            .collect();
        SessionRecord {
            meta: self.meta.clone(),
            frames,
            gaps: Vec::new(),
        }
    }

    /// Write `NNNN.pgm` masks, the manifest and `truth.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        self.specs
            .par_iter()
            .enumerate()
            .try_for_each(|(i, spec)| {
                let (mask, _) = gen_eye(spec)?;
                let path = dir.join(format!("{i:04}.pgm"));
                fs::write(&path, encode_mask(&mask)).map_err(|e| Error::io(&path, e))
            })?;
        let manifest = dir.join(MANIFEST_FILE);
        fs::write(&manifest, self.meta.to_manifest()).map_err(|e| Error::io(&manifest, e))?;
        let truth = dir.join("truth.csv");
        fs::write(&truth, write_measurements_csv(&self.truth())).map_err(|e| Error::io(&truth, e))
    }

    /// Render and localize every frame in memory. Frames that fail to fit
    /// are skipped.
    pub fn measure(&self, cfg: &LocalizationConfig) -> Result<SessionRecord> {
        cfg.validate()?;
        let fits = self
            .specs
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let (mask, _) = gen_eye(spec)?;
                Ok(localize(&mask, cfg).ok().map(|fm| FrameMeasurement {
                    frame_idx: i as u32,
                    t: self.time(i),
                    ..fm
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SessionRecord {
            meta: self.meta.clone(),
            frames: fits.into_iter().flatten().collect(),
            gaps: Vec::new(),
        })
    }
}

fn normal(sd: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sd).map_err(|e| Error::Spec(format!("standard deviation {sd}: {e}")))
}

/// Generate a cohort of synthetic sessions, one per subject, session and eye.
///
/// The cohort is mixed into the seed so that alcohol and no-alcohol cohorts
/// drawn with the same seed are independent.
pub fn gen_cohort(spec: &CohortSpec) -> Result<Vec<SyntheticSession>> {
    let dy = &spec.dynamics;
    if spec.n_subjects == 0 {
        return Err(Error::Spec("cohort needs at least one subject".into()));
    }
    if dy.frames == 0 || !(dy.frame_rate > 0.0) {
        return Err(Error::Spec("dynamics need frames and a positive frame rate".into()));
    }
    if spec.sessions.is_empty() || spec.eyes.is_empty() {
        return Err(Error::Spec("cohort needs at least one session and eye".into()));
    }
    let subject_noise = normal(dy.subject_sd)?;
    let frame_noise = normal(dy.frame_sd)?;
    let center_noise = normal(0.3)?;
    let (prefix, dilation) = match spec.cohort {
        Cohort::Alcohol => ("alc", dy.dilation_offset),
        Cohort::NoAlcohol => ("ctl", 0.0),
    };
    let tag = match spec.cohort {
        Cohort::Alcohol => 1,
        Cohort::NoAlcohol => 2,
    };
    let mut master = Xoshiro256PlusPlus::seed_from_u64(spec.seed.wrapping_mul(4).wrapping_add(tag));
    let (w, h) = (spec.width as f64, spec.height as f64);

    let mut out = Vec::new();
    for s in 0..spec.n_subjects {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(master.next_u64());
        let subject_id = format!("{prefix}_{:03}", s + 1);
        let iris_r: f64 = rng.random_range(36.0..44.0);
        let base = dy.base_radius + subject_noise.sample(&mut rng) + dilation;
        for &session in &spec.sessions {
            for &eye in &spec.eyes {
                let center = (
                    w / 2.0 + rng.random_range(-8.0..8.0),
                    h / 2.0 + rng.random_range(-8.0..8.0),
                );
                let pupil_offset = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
                let occlusion = if dy.max_occlusion > 0.0 {
                    rng.random_range(0.0..=dy.max_occlusion)
                } else {
                    0.0
                };
                let specs = (0..dy.frames)
                    .map(|i| {
                        let t = f64::from(i) / dy.frame_rate;
                        let r = base
                            + dy.constriction_amplitude * (-dy.constriction_rate * t).exp()
                            + frame_noise.sample(&mut rng);
                        let max_r = iris_r - 2.0 * dy.boundary_jitter - 2.5;
                        let r = r.clamp(5.0, max_r);
                        let cx = center.0 + center_noise.sample(&mut rng);
                        let cy = center.1 + center_noise.sample(&mut rng);
                        EyeSpec {
                            width: spec.width,
                            height: spec.height,
                            iris: EllipseFit::circle(cx, cy, iris_r),
                            pupil: EllipseFit::circle(cx + pupil_offset.0, cy + pupil_offset.1, r),
                            occlusion_fraction: occlusion,
                            boundary_jitter: dy.boundary_jitter,
                            seed: rng.next_u64(),
                        }
                    })
                    .collect();
                out.push(SyntheticSession {
                    meta: SessionMeta {
                        subject_id: subject_id.clone(),
                        session,
                        eye,
                        cohort: spec.cohort,
                        frame_rate: dy.frame_rate,
                    },
                    specs,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localization::{openness_ratio, split_pupil_iris};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn clean_eye_areas() {
        let (mask, truth) = gen_eye(&EyeSpec::centered(9.0, 40.0)).unwrap();
        let pupil = mask.class_plane(Label::Pupil).popcount() as f64;
        let iris = mask.class_plane(Label::Iris).popcount() as f64;
        let pupil_area = PI * 81.0;
        let iris_area = PI * (1600.0 - 81.0);
        assert!((pupil - pupil_area).abs() / pupil_area < 0.03, "{pupil}");
        assert!((iris - iris_area).abs() / iris_area < 0.03, "{iris}");
        assert!((truth.ratio - 0.225).abs() < 1e-12);
        assert!((truth.openness - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_occluded_openness() {
        let spec = EyeSpec {
            occlusion_fraction: 0.5,
            ..EyeSpec::centered(9.0, 40.0)
        };
        let (mask, truth) = gen_eye(&spec).unwrap();
        let (_, iris_disk) = split_pupil_iris(&mask).unwrap();
        let measured = openness_ratio(&iris_disk).unwrap();
        assert!((measured - 0.5).abs() <= 0.05, "{measured}");
        assert!((truth.openness - 0.5).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_mask() {
        let spec = EyeSpec {
            boundary_jitter: 1.0,
            occlusion_fraction: 0.2,
            seed: 99,
            ..EyeSpec::centered(12.0, 40.0)
        };
        assert_eq!(gen_eye(&spec).unwrap().0, gen_eye(&spec).unwrap().0);
        let other = EyeSpec { seed: 100, ..spec.clone() };
        assert_ne!(gen_eye(&spec).unwrap().0, gen_eye(&other).unwrap().0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(gen_eye(&EyeSpec::centered(41.0, 40.0)).is_err());
        let off = EyeSpec {
            pupil: EllipseFit::circle(190.0, 160.0, 15.0),
            ..EyeSpec::centered(15.0, 40.0)
        };
        assert!(gen_eye(&off).is_err());
        let closed = EyeSpec {
            occlusion_fraction: 1.0,
            ..EyeSpec::centered(9.0, 40.0)
        };
        assert!(gen_eye(&closed).is_err());
        let negative = EyeSpec {
            boundary_jitter: -0.1,
            ..EyeSpec::centered(9.0, 40.0)
        };
        assert!(gen_eye(&negative).is_err());
    }

    #[test]
    fn jitter_stays_within_amplitude() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        for _ in 0..20 {
            let j = Jitter::new(1.0, &mut rng);
            for i in 0..360 {
                assert!(j.at(f64::from(i).to_radians()).abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn cohort_shape() {
        let spec = CohortSpec {
            sessions: vec![0, 4],
            eyes: vec![Eye::Left, Eye::Right],
            ..CohortSpec::new(2, Cohort::Alcohol, 3)
        };
        let sessions = gen_cohort(&spec).unwrap();
        assert_eq!(sessions.len(), 8);
        assert!(sessions.iter().all(|s| s.specs.len() == 100));
        assert_eq!(sessions[0].dir_name(), "alc_001_s0_left");
        let truth = sessions[0].truth();
        assert_eq!(truth.frames.len(), 100);
        assert!((truth.frames[99].t - 4.95).abs() < 1e-12);
        // constriction: early frames are wider than late ones
        let r = |i: usize| truth.frames[i].pupil.rx;
        assert!(r(0) > r(99) + 2.0);
        assert!(gen_cohort(&CohortSpec::new(0, Cohort::Alcohol, 3)).is_err());
    }

    #[test]
    fn cohort_is_deterministic_and_cohorts_differ() {
        let a = gen_cohort(&CohortSpec::new(2, Cohort::Alcohol, 7)).unwrap();
        let b = gen_cohort(&CohortSpec::new(2, Cohort::Alcohol, 7)).unwrap();
        let c = gen_cohort(&CohortSpec::new(2, Cohort::NoAlcohol, 7)).unwrap();
        assert_eq!(a[1].specs, b[1].specs);
        assert_ne!(a[0].specs[0].seed, c[0].specs[0].seed);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pupil_inside_iris_disk(
            pupil_r in 5.0f64..18.0,
            iris_r in 30.0f64..40.0,
            dx in -3.0f64..3.0,
            jitter in 0.0f64..1.0,
            occ in 0.0f64..0.4,
            seed in any::<u64>(),
        ) {
            let spec = EyeSpec {
                width: 120,
                height: 120,
                iris: EllipseFit::circle(60.0, 60.0, iris_r),
                pupil: EllipseFit::circle(60.0 + dx, 60.0, pupil_r),
                occlusion_fraction: occ,
                boundary_jitter: jitter,
                seed,
            };
            let (mask, _) = gen_eye(&spec).unwrap();
            let (pupil, iris_disk) = split_pupil_iris(&mask).unwrap();
            prop_assert!(pupil.is_subset_of(&iris_disk));
            prop_assert!(mask.class_plane(Label::Pupil).is_subset_of(&iris_disk));
        }
    }
}
