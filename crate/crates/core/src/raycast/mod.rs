//! Per-ray work: sampling at even intervals along a clipped ray and the five
//! ray functions that reduce those samples to a pixel.
//!
//! Every ray function is a small accumulator fed one sample at a time. The
//! slice-based entry points ([`composite_ray`], [`mip_ray`], ...) and the
//! streaming path used by the frame renderer share these accumulators, so
//! both produce bit-identical results.

mod camera;

use std::ops::ControlFlow;
use std::str::FromStr;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

pub use camera::{generate_ray, Camera, Projection, RayGenerator};

use crate::error::{Error, Result};
use crate::transfer::{correct_opacity_ratio, Classified, Rgb, TransferFunction};
use crate::volume::{intersect_ray_aabb, ScalarVolume};

/// Ambient term of the headlight model.
pub const HEADLIGHT_AMBIENT: f64 = 0.1;
/// Diffuse term of the headlight model.
pub const HEADLIGHT_DIFFUSE: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Point3<f64>,
    pub direction: Vector3<f64>,
    pub t_near: f64,
    pub t_far: f64,
}

impl Ray {
    /// A ray with an unbounded `(0, +inf)` range. `direction` must be unit
    /// length.
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>) -> Self {
        debug_assert!((direction.norm() - 1.0).abs() < 1e-9, "non-unit direction {direction:?}");
        Self {
            origin,
            direction,
            t_near: 0.0,
            t_far: f64::INFINITY,
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t_near, self.t_far)
    }

    pub fn with_range(mut self, t_near: f64, t_far: f64) -> Self {
        self.t_near = t_near;
        self.t_far = t_far;
        self
    }

    /// This ray restricted to its overlap with the volume's bounding box, or
    /// `None` if it misses.
    pub fn clipped_to(&self, volume: &ScalarVolume) -> Option<Ray> {
        let (t0, t1) = intersect_ray_aabb(self, &volume.bounds())?;
        let (t0, t1) = (t0.max(self.t_near), t1.min(self.t_far));
        (t0 <= t1).then(|| self.with_range(t0, t1))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySample {
    pub t: f64,
    pub scalar: f64,
    pub classified: Classified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RayFunction {
    #[default]
    Composite,
    Mip,
    Average,
    #[serde(alias = "isosurface")]
    Iso,
    Threshold,
}

impl RayFunction {
    pub const ALL: [RayFunction; 5] = [
        RayFunction::Composite,
        RayFunction::Mip,
        RayFunction::Average,
        RayFunction::Iso,
        RayFunction::Threshold,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RayFunction::Composite => "composite",
            RayFunction::Mip => "mip",
            RayFunction::Average => "average",
            RayFunction::Iso => "iso",
            RayFunction::Threshold => "threshold",
        }
    }
}

impl FromStr for RayFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "composite" | "compositing" => Ok(RayFunction::Composite),
            "mip" => Ok(RayFunction::Mip),
            "average" => Ok(RayFunction::Average),
            "iso" | "isosurface" => Ok(RayFunction::Iso),
            "threshold" => Ok(RayFunction::Threshold),
            other => Err(Error::invalid(format!("unknown ray function '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Shading {
    None,
    #[default]
    HeadlightLambert,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaycastConfig {
    pub function: RayFunction,
    /// Sample spacing along the ray, mm.
    pub step: f64,
    /// Step length at which transfer-function opacities are defined, mm.
    pub reference_step: f64,
    /// Compositing stops once accumulated alpha reaches this; 1.0 disables it.
    pub early_termination_alpha: f64,
    pub background: Rgb,
    pub iso_value: f64,
    pub threshold_value: f64,
    pub bisection_iters: u32,
    pub shading: Shading,
}

impl Default for RaycastConfig {
    fn default() -> Self {
        Self {
            function: RayFunction::Composite,
            step: 1.0,
            reference_step: 1.0,
            early_termination_alpha: 0.999,
            background: [0.0; 3],
            iso_value: 0.5,
            threshold_value: 0.5,
            bisection_iters: 8,
            shading: Shading::HeadlightLambert,
        }
    }
}

impl RaycastConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid(format!("step {} must be positive", self.step)));
        }
        if !(self.reference_step > 0.0 && self.reference_step.is_finite()) {
            return Err(Error::invalid(format!(
                "reference step {} must be positive",
                self.reference_step
            )));
        }
        if !(self.early_termination_alpha > 0.0 && self.early_termination_alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "early termination alpha {} outside (0, 1]",
                self.early_termination_alpha
            )));
        }
        if self.background.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::invalid("background must be finite and non-negative"));
        }
        for (name, v) in [("iso value", self.iso_value), ("threshold", self.threshold_value)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    #[inline]
    fn opacity_ratio(&self) -> f64 {
        self.step / self.reference_step
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayResult {
    pub color: Rgb,
    pub alpha: f64,
    pub samples_taken: usize,
    pub terminated_early: bool,
    pub hit_t: Option<f64>,
}

impl RayResult {
    pub fn background(config: &RaycastConfig, samples_taken: usize) -> Self {
        Self {
            color: config.background,
            alpha: 0.0,
            samples_taken,
            terminated_early: false,
            hit_t: None,
        }
    }

    fn hit(color: Rgb, samples_taken: usize, hit_t: f64) -> Self {
        Self {
            color,
            alpha: 1.0,
            samples_taken,
            terminated_early: false,
            hit_t: Some(hit_t),
        }
    }
}

/// Visits in-volume scalar samples at `t_near + (k + 0.5) * step` while
/// `t <= t_far`. Positions where the volume has no value are skipped.
#[inline]
pub(crate) fn march_scalars(
    volume: &ScalarVolume,
    ray: &Ray,
    step: f64,
    mut visit: impl FnMut(f64, f64) -> ControlFlow<()>,
) {
    if !(ray.t_near <= ray.t_far) {
        return;
    }
    let mut k = 0u64;
    loop {
        let t = ray.t_near + (k as f64 + 0.5) * step;
        if !(t <= ray.t_far) {
            break;
        }
        if let Some(s) = volume.sample_trilinear(&ray.at(t)) {
            if visit(t, s).is_break() {
                break;
            }
        }
        k += 1;
    }
}

#[inline]
fn classify_sample(tf: &TransferFunction, s: f64, ratio: f64) -> Classified {
    let mut c = tf.classify_unchecked(s);
    c.opacity = correct_opacity_ratio(c.opacity, ratio);
    c
}

/// Evenly spaced, classified samples along a ray already clipped to the
/// volume, front to back.
pub fn sample_along_ray(
    volume: &ScalarVolume,
    tf: &TransferFunction,
    ray: &Ray,
    config: &RaycastConfig,
) -> Vec<RaySample> {
    let ratio = config.opacity_ratio();
    let mut out = Vec::new();
    march_scalars(volume, ray, config.step, |t, scalar| {
        out.push(RaySample {
            t,
            scalar,
            classified: classify_sample(tf, scalar, ratio),
        });
        ControlFlow::Continue(())
    });
    out
}

/// Front-to-back emission-absorption accumulation with associated colors.
#[derive(Clone, Copy, Debug)]
pub struct Compositor {
    color: Rgb,
    alpha: f64,
    taken: usize,
    terminated: bool,
    stop_at: f64,
}

impl Compositor {
    pub fn new(config: &RaycastConfig) -> Self {
        Self {
            color: [0.0; 3],
            alpha: 0.0,
            taken: 0,
            terminated: false,
            stop_at: config.early_termination_alpha,
        }
    }

    #[inline]
    pub fn push(&mut self, c: &Classified) -> ControlFlow<()> {
        let weight = (1.0 - self.alpha) * c.opacity;
        self.color[0] += weight * c.color[0];
        self.color[1] += weight * c.color[1];
        self.color[2] += weight * c.color[2];
        self.alpha += weight;
        self.taken += 1;
        if self.alpha >= self.stop_at {
            self.terminated = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn finish(self, background: &Rgb) -> RayResult {
        let rest = 1.0 - self.alpha;
        RayResult {
            color: [
                self.color[0] + rest * background[0],
                self.color[1] + rest * background[1],
                self.color[2] + rest * background[2],
            ],
            alpha: self.alpha,
            samples_taken: self.taken,
            terminated_early: self.terminated,
            hit_t: None,
        }
    }
}

pub fn composite_ray(samples: &[RaySample], config: &RaycastConfig) -> RayResult {
    let mut acc = Compositor::new(config);
    for s in samples {
        if acc.push(&s.classified).is_break() {
            break;
        }
    }
    acc.finish(&config.background)
}

#[derive(Clone, Copy, Debug, Default)]
struct MaxTracker {
    best: Option<(f64, f64)>,
    taken: usize,
}

impl MaxTracker {
    #[inline]
    fn push(&mut self, t: f64, s: f64) {
        self.taken += 1;
        match self.best {
            Some((_, m)) if s <= m => {}
            _ => self.best = Some((t, s)),
        }
    }
}

/// Maximum intensity projection. The result takes the classified color of
/// the largest scalar; `hit_t` is the first sample attaining it.
pub fn mip_ray(samples: &[RaySample], config: &RaycastConfig) -> RayResult {
    let mut best: Option<&RaySample> = None;
    for s in samples {
        if best.is_none_or(|b| s.scalar > b.scalar) {
            best = Some(s);
        }
    }
    match best {
        Some(b) => RayResult::hit(b.classified.color, samples.len(), b.t),
        None => RayResult::background(config, 0),
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct MeanTracker {
    sum: f64,
    taken: usize,
}

impl MeanTracker {
    #[inline]
    fn push(&mut self, s: f64) {
        self.sum += s;
        self.taken += 1;
    }

    fn mean(&self) -> Option<f64> {
        (self.taken > 0).then(|| (self.sum / self.taken as f64).clamp(0.0, 1.0))
    }
}

/// Average intensity projection: the mean scalar, classified.
pub fn average_ray(samples: &[RaySample], tf: &TransferFunction, config: &RaycastConfig) -> RayResult {
    let mut acc = MeanTracker::default();
    samples.iter().for_each(|s| acc.push(s.scalar));
    finish_average(&acc, tf, config)
}

fn finish_average(acc: &MeanTracker, tf: &TransferFunction, config: &RaycastConfig) -> RayResult {
    match acc.mean() {
        Some(m) => RayResult {
            color: tf.classify_unchecked(m).color,
            alpha: 1.0,
            samples_taken: acc.taken,
            terminated_early: false,
            hit_t: None,
        },
        None => RayResult::background(config, 0),
    }
}

/// First sample whose scalar reaches the threshold, in its own classified
/// color.
pub fn threshold_ray(samples: &[RaySample], config: &RaycastConfig) -> RayResult {
    match samples
        .iter()
        .position(|s| s.scalar >= config.threshold_value)
    {
        Some(i) => RayResult::hit(samples[i].classified.color, i + 1, samples[i].t),
        None => RayResult::background(config, samples.len()),
    }
}

/// Headlight Lambertian shading. The surface normal is the negated gradient;
/// lighting is two-sided so both faces of a shell are lit. A zero gradient
/// gets the full diffuse factor.
pub fn shade_headlight(base: &Rgb, gradient: &Vector3<f64>, view_dir: &Vector3<f64>) -> Rgb {
    let norm = gradient.norm();
    let factor = if norm > 0.0 && norm.is_finite() {
        let n = -gradient / norm;
        HEADLIGHT_AMBIENT + HEADLIGHT_DIFFUSE * n.dot(&-view_dir).abs().min(1.0)
    } else {
        1.0
    };
    [base[0] * factor, base[1] * factor, base[2] * factor]
}

/// First crossing of `iso_value`, refined by bisection on the interpolated
/// field. Sign changes are detected between consecutive samples only, so two
/// crossings within one step are missed.
pub fn isosurface_ray(
    volume: &ScalarVolume,
    tf: &TransferFunction,
    ray: &Ray,
    config: &RaycastConfig,
) -> RayResult {
    let iso = config.iso_value;
    let above = |s: f64| s >= iso;
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    let mut taken = 0usize;
    march_scalars(volume, ray, config.step, |t, s| {
        taken += 1;
        if let Some((tp, sp)) = prev {
            if above(sp) != above(s) {
                bracket = Some((tp, sp, t));
                return ControlFlow::Break(());
            }
        }
        prev = Some((t, s));
        ControlFlow::Continue(())
    });
    let Some((mut lo, s_lo, mut hi)) = bracket else {
        return RayResult::background(config, taken);
    };
    let side = above(s_lo);
    for _ in 0..config.bisection_iters {
        let mid = 0.5 * (lo + hi);
        match volume.sample_trilinear(&ray.at(mid)) {
            Some(s) if above(s) == side => lo = mid,
            Some(_) => hi = mid,
            None => break,
        }
    }
    let t_hit = 0.5 * (lo + hi);
    let base = tf.classify_unchecked(iso).color;
    let color = match config.shading {
        Shading::None => base,
        Shading::HeadlightLambert => {
            let g = volume
                .gradient_central(&ray.at(t_hit))
                .unwrap_or_else(Vector3::zeros);
            shade_headlight(&base, &g, &ray.direction)
        }
    };
    RayResult::hit(color, taken, t_hit)
}

/// Clips `ray` to the volume and applies the configured ray function,
/// streaming samples without materializing them.
pub fn cast_ray(
    volume: &ScalarVolume,
    tf: &TransferFunction,
    ray: &Ray,
    config: &RaycastConfig,
) -> RayResult {
    let Some(ray) = ray.clipped_to(volume) else {
        return RayResult::background(config, 0);
    };
    match config.function {
        RayFunction::Composite => {
            let ratio = config.opacity_ratio();
            let mut acc = Compositor::new(config);
            march_scalars(volume, &ray, config.step, |_, s| {
                acc.push(&classify_sample(tf, s, ratio))
            });
            acc.finish(&config.background)
        }
        RayFunction::Mip => {
            let mut acc = MaxTracker::default();
            march_scalars(volume, &ray, config.step, |t, s| {
                acc.push(t, s);
                ControlFlow::Continue(())
            });
            match acc.best {
                Some((t, s)) => RayResult::hit(tf.classify_unchecked(s).color, acc.taken, t),
                None => RayResult::background(config, 0),
            }
        }
        RayFunction::Average => {
            let mut acc = MeanTracker::default();
            march_scalars(volume, &ray, config.step, |_, s| {
                acc.push(s);
                ControlFlow::Continue(())
            });
            finish_average(&acc, tf, config)
        }
        RayFunction::Iso => isosurface_ray(volume, tf, &ray, config),
        RayFunction::Threshold => {
            let mut taken = 0;
            let mut hit = None;
            march_scalars(volume, &ray, config.step, |t, s| {
                taken += 1;
                if s >= config.threshold_value {
                    hit = Some((t, s));
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            });
            match hit {
                Some((t, s)) => RayResult::hit(tf.classify_unchecked(s).color, taken, t),
                None => RayResult::background(config, taken),
            }
        }
    }
}

#[cfg(test)]
mod tests;
