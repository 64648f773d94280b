//! Pupil and iris geometry from eye segmentation masks.
//!
//! The pipeline takes per-pixel label masks (background, sclera, iris,
//! pupil), localizes the pupil and iris with binary morphology and circle
//! fitting, scores the result against ground truth, and aggregates
//! per-frame measurements into session statistics and cohort curves.
//!
//! - [`mask`]: label/binary masks, geometry types and the PGM mask codec.
//! - [`morphology`]: erosion, dilation, hole filling, contours, components.
//! - [`localization`]: mass center, LMS, Hough and mixed localization.
//! - [`metrics`]: box and bitwise IoU, localization errors, reports.
//! - [`ingestion`]: polygon annotations, session directories, CSV output.
//! - [`analysis`]: ratio series, resampling, grand means, box statistics.
//! - [`synth`]: seeded synthetic eyes and cohorts with ground truth.

pub mod analysis;
pub mod error;
pub mod ingestion;
pub mod localization;
pub mod mask;
pub mod metrics;
pub mod morphology;
pub mod synth;

pub use analysis::{
    cohort_curves, grand_mean, ratio_series, resample, session_boxstats, BoxStats, CohortCurves,
    GrandMean, Pooling, Quantity, RadiusSeries,
};
pub use error::{Error, Result};
pub use localization::{
    hough_circle_fit, lms_circle_fit, localize, mass_center_fit, mixed_fit, openness_ratio,
    split_pupil_iris, LocalizationConfig, RadiusRange,
};
pub use mask::{
    class_plane, decode_mask, encode_mask, BinaryMask, BoundingBox, EllipseFit, FrameMeasurement,
    Label, LabelMask, Method,
};
pub use ingestion::{
    load_session, parse_annotations, parse_measurements_csv, rasterize, write_measurements_csv,
    Annotation, Cohort, Eye, FrameGap, GapKind, SessionMeta, SessionRecord,
};
pub use metrics::{
    aggregate, bitwise_iou, box_iou, frame_error, segmentation_eval, ErrorReport, FrameErrors,
    IoUReport, MeanStd,
};
pub use synth::{gen_cohort, gen_eye, CohortSpec, Dynamics, EyeSpec, SyntheticSession};
