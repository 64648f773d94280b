//! Annotation import and session directories.

mod annotation;
mod session;

pub use annotation::{
    parse_annotations, rasterize, rasterize_eye, rasterize_polygon, Annotation, Region,
};
pub use session::{
    list_frames, load_session, parse_measurements_csv, read_manifest, write_measurements_csv,
    write_measurements_csv_many, Cohort, Eye, FrameGap, GapKind, SessionMeta, SessionRecord,
    DEFAULT_FRAME_RATE, MANIFEST_FILE, MEASUREMENT_COLUMNS,
};
