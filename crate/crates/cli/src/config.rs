//! Flat `key=value` localization config files.

use std::path::Path;

use irisgauge_core::{LocalizationConfig, Method, RadiusRange};

use crate::CliError;

/// Keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 8] = [
    "pupil_radius_min",
    "pupil_radius_max",
    "iris_radius_min",
    "iris_radius_max",
    "openness_threshold",
    "hough_center_stride",
    "horiz_ratio",
    "method",
];

/// Apply `key=value` lines from `text` on top of `base`. Blank lines and
/// lines starting with `#` are skipped.
pub fn parse_config(text: &str, base: LocalizationConfig, path: &Path) -> Result<LocalizationConfig, CliError> {
    let err = |line: usize, msg: String| CliError::Data(format!("{}:{line}: {msg}", path.display()));
    let mut cfg = base;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(n + 1, "expected key=value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let num = || {
            value
                .parse::<f64>()
                .map_err(|_| err(n + 1, format!("{key}: not a number: {value:?}")))
        };
        match key {
            "pupil_radius_min" => cfg.pupil_radius_range.min = num()?,
            "pupil_radius_max" => cfg.pupil_radius_range.max = num()?,
            "iris_radius_min" => cfg.iris_radius_range.min = num()?,
            "iris_radius_max" => cfg.iris_radius_range.max = num()?,
            "openness_threshold" => cfg.openness_threshold = num()?,
            "horiz_ratio" => cfg.horiz_ratio = num()?,
            "hough_center_stride" => {
                cfg.hough_center_stride = value
                    .parse()
                    .map_err(|_| err(n + 1, format!("{key}: not a positive integer: {value:?}")))?
            }
            "method" => {
                cfg.method = value
                    .parse::<Method>()
                    .map_err(|e| err(n + 1, e.to_string()))?
            }
            other => {
                return Err(err(
                    n + 1,
                    format!("unknown key {other:?}; expected one of {}", CONFIG_KEYS.join(", ")),
                ))
            }
        }
    }
    cfg.validate()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(cfg)
}

/// Config text for `cfg`, readable by [`parse_config`].
pub fn format_config(cfg: &LocalizationConfig) -> String {
    let RadiusRange { min: pmin, max: pmax } = cfg.pupil_radius_range;
    let RadiusRange { min: imin, max: imax } = cfg.iris_radius_range;
    format!(
        "pupil_radius_min={pmin}\npupil_radius_max={pmax}\niris_radius_min={imin}\niris_radius_max={imax}\n\
         openness_threshold={}\nhough_center_stride={}\nhoriz_ratio={}\nmethod={}\n",
        cfg.openness_threshold, cfg.hough_center_stride, cfg.horiz_ratio, cfg.method
    )
}
