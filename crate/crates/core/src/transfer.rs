//! Classification: scalar -> (color, opacity) through a piecewise-linear
//! control-point table, plus opacity correction for non-reference step
//! lengths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear-light RGB.
pub type Rgb = [f64; 3];

/// One row of the transfer-function table. `opacity` is the per-sample alpha
/// at the table's reference step length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlPoint {
    pub scalar: f64,
    pub color: Rgb,
    pub opacity: f64,
}

impl ControlPoint {
    pub fn new(scalar: f64, color: Rgb, opacity: f64) -> Self {
        Self {
            scalar,
            color,
            opacity,
        }
    }

    pub fn gray(scalar: f64, level: f64, opacity: f64) -> Self {
        Self::new(scalar, [level; 3], opacity)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classified {
    pub color: Rgb,
    pub opacity: f64,
}

/// Joint color/opacity table with strictly increasing scalar positions.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferFunction {
    name: String,
    points: Vec<ControlPoint>,
}

impl TransferFunction {
    /// Validates the table. Violations are reported as
    /// [`Error::InvalidPreset`] carrying the offending point index.
    pub fn new(name: impl Into<String>, points: Vec<ControlPoint>) -> Result<Self> {
        validate_points(&points)?;
        Ok(Self {
            name: name.into(),
            points,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> &[ControlPoint] {
        &self.points
    }

    pub fn classify(&self, s: f64) -> Result<Classified> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::invalid(format!("scalar {s} outside [0, 1]")));
        }
        Ok(self.classify_unchecked(s))
    }

    /// [`classify`](Self::classify) without the range check; out-of-range
    /// input clamps to the end points.
    #[inline]
    pub fn classify_unchecked(&self, s: f64) -> Classified {
        let pts = &self.points;
        let upper = pts.partition_point(|p| p.scalar <= s);
        if upper == 0 {
            return pts[0].into();
        }
        if upper == pts.len() {
            return pts[pts.len() - 1].into();
        }
        let a = &pts[upper - 1];
        let b = &pts[upper];
        let t = (s - a.scalar) / (b.scalar - a.scalar);
        Classified {
            color: [
                lerp(a.color[0], b.color[0], t),
                lerp(a.color[1], b.color[1], t),
                lerp(a.color[2], b.color[2], t),
            ],
            opacity: lerp(a.opacity, b.opacity, t),
        }
    }
}

impl From<ControlPoint> for Classified {
    fn from(p: ControlPoint) -> Self {
        Classified {
            color: p.color,
            opacity: p.opacity,
        }
    }
}

pub(crate) fn validate_points(points: &[ControlPoint]) -> Result<()> {
    let bad = |index: usize, reason: String| Err(Error::InvalidPreset { index, reason });
    if points.len() < 2 {
        return bad(
            points.len(),
            format!("need at least 2 control points, got {}", points.len()),
        );
    }
    for (i, p) in points.iter().enumerate() {
        if !(0.0..=1.0).contains(&p.scalar) {
            return bad(i, format!("scalar {} outside [0, 1]", p.scalar));
        }
        if !(0.0..=1.0).contains(&p.opacity) {
            return bad(i, format!("opacity {} outside [0, 1]", p.opacity));
        }
        if p.color.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad(i, format!("color {:?} outside [0, 1]", p.color));
        }
        if i > 0 && !(p.scalar > points[i - 1].scalar) {
            return bad(
                i,
                format!(
                    "scalar {} not greater than previous {}",
                    p.scalar,
                    points[i - 1].scalar
                ),
            );
        }
    }
    Ok(())
}

#[inline(always)]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Re-expresses `alpha`, defined for `reference_step`, for a sample spacing
/// of `step`: `1 - (1 - alpha)^(step / reference_step)`.
pub fn correct_opacity(alpha: f64, step: f64, reference_step: f64) -> Result<f64> {
    if !(step > 0.0) || !(reference_step > 0.0) {
        return Err(Error::invalid(format!(
            "step {step} and reference step {reference_step} must be positive"
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
    }
    Ok(correct_opacity_ratio(alpha, step / reference_step))
}

#[inline]
pub(crate) fn correct_opacity_ratio(alpha: f64, ratio: f64) -> f64 {
    if ratio == 1.0 || alpha >= 1.0 || alpha <= 0.0 {
        alpha
    } else {
        1.0 - (1.0 - alpha).powf(ratio)
    }
}
