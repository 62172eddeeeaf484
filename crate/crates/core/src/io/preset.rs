use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transfer::{validate_points, ControlPoint, Rgb, TransferFunction};

pub const BUNDLED_PRESET_NAMES: [&str; 3] = ["grayscale-ramp", "soft-tissue", "bone-bright"];

/// A named transfer function together with the step length its opacities
/// are defined for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PresetFile")]
pub struct TfPreset {
    pub name: String,
    pub reference_step: f64,
    pub points: Vec<ControlPoint>,
}

impl TfPreset {
    pub fn new(name: impl Into<String>, reference_step: f64, points: Vec<ControlPoint>) -> Result<Self> {
        validate_points(&points)?;
        if !(reference_step > 0.0 && reference_step.is_finite()) {
            return Err(Error::InvalidPreset {
                index: 0,
                reason: format!("reference_step {reference_step} must be positive"),
            });
        }
        Ok(Self {
            name: name.into(),
            reference_step,
            points,
        })
    }

    pub fn to_tf(&self) -> TransferFunction {
        TransferFunction::new(self.name.clone(), self.points.clone()).expect("preset points were validated")
    }

    pub fn into_tf(self) -> TransferFunction {
        TransferFunction::new(self.name, self.points).expect("preset points were validated")
    }

    pub fn from_tf(tf: &TransferFunction, reference_step: f64) -> Result<Self> {
        Self::new(tf.name(), reference_step, tf.points().to_vec())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PresetFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("preset serializes")
    }
}

#[derive(Deserialize)]
struct ColorPoint {
    scalar: f64,
    color: Rgb,
}

#[derive(Deserialize)]
struct OpacityPoint {
    scalar: f64,
    opacity: f64,
}

/// On-disk shape: either one joint `points` table, or separate
/// `color_points` / `opacity_points` tables merged over the union of their
/// scalar positions.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PresetFile {
    name: String,
    #[serde(default = "default_reference_step")]
    reference_step: f64,
    #[serde(default)]
    points: Option<Vec<ControlPoint>>,
    #[serde(default)]
    color_points: Option<Vec<ColorPoint>>,
    #[serde(default)]
    opacity_points: Option<Vec<OpacityPoint>>,
}

fn default_reference_step() -> f64 {
    1.0
}

impl TryFrom<PresetFile> for TfPreset {
    type Error = Error;

    fn try_from(file: PresetFile) -> Result<TfPreset> {
        let points = match (file.points, file.color_points, file.opacity_points) {
            (Some(points), None, None) => points,
            (None, Some(colors), Some(opacities)) => merge_tables(&colors, &opacities)?,
            _ => {
                return Err(Error::InvalidPreset {
                    index: 0,
                    reason: "preset needs either 'points' or both 'color_points' and 'opacity_points'".into(),
                })
            }
        };
        TfPreset::new(file.name, file.reference_step, points)
    }
}

fn merge_tables(colors: &[ColorPoint], opacities: &[OpacityPoint]) -> Result<Vec<ControlPoint>> {
    // Validate each table on its own so errors name the right index.
    let color_tf = TransferFunction::new(
        "color",
        colors.iter().map(|c| ControlPoint::new(c.scalar, c.color, 0.0)).collect(),
    )?;
    let opacity_tf = TransferFunction::new(
        "opacity",
        opacities.iter().map(|o| ControlPoint::new(o.scalar, [0.0; 3], o.opacity)).collect(),
    )?;
    let mut positions: Vec<f64> = colors
        .iter()
        .map(|c| c.scalar)
        .chain(opacities.iter().map(|o| o.scalar))
        .collect();
    positions.sort_by(f64::total_cmp);
    positions.dedup();
    Ok(positions
        .into_iter()
        .map(|s| {
            ControlPoint::new(
                s,
                color_tf.classify_unchecked(s).color,
                opacity_tf.classify_unchecked(s).opacity,
            )
        })
        .collect())
}

pub fn load_tf_preset(path: impl AsRef<Path>) -> Result<TfPreset> {
    TfPreset::from_json(&fs::read_to_string(path)?)
}

pub fn save_tf_preset(preset: &TfPreset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, preset.to_json())?;
    Ok(())
}

/// One of the shipped presets. The names are descriptive labels only.
pub fn bundled_preset(name: &str) -> Option<TfPreset> {
    let p = ControlPoint::new;
    let points = match name {
        "grayscale-ramp" => vec![p(0.0, [0.0; 3], 0.0), p(1.0, [1.0; 3], 1.0)],
        "soft-tissue" => vec![
            p(0.0, [0.0; 3], 0.0),
            p(0.15, [0.55, 0.25, 0.15], 0.0),
            p(0.35, [0.85, 0.55, 0.45], 0.03),
            p(0.55, [0.95, 0.8, 0.7], 0.08),
            p(0.8, [1.0, 0.95, 0.9], 0.3),
            p(1.0, [1.0; 3], 0.6),
        ],
        "bone-bright" => vec![
            p(0.0, [0.0; 3], 0.0),
            p(0.6, [0.4, 0.35, 0.3], 0.0),
            p(0.8, [0.95, 0.9, 0.8], 0.4),
            p(1.0, [1.0; 3], 0.9),
        ],
        _ => return None,
    };
    Some(TfPreset::new(name, 1.0, points).expect("bundled presets are valid"))
}

pub fn bundled_presets() -> Vec<TfPreset> {
    BUNDLED_PRESET_NAMES
        .iter()
        .map(|n| bundled_preset(n).expect("listed preset exists"))
        .collect()
}
