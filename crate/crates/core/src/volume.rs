//! Volumetric data model and the spatial queries the raycaster is built on.
//!
//! Scalars live at grid vertices (voxel `(i, j, k)` sits at
//! `origin + (i, j, k) * spacing`) and are stored normalized to `[0, 1]`
//! in x-fastest order. A cell is the cube spanned by eight neighboring
//! voxels; [`ScalarVolume::sample_trilinear`] blends those corners.

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::raycast::Ray;

/// Grid coordinates closer than this (in voxel units) to an integer are
/// snapped onto the grid so that world-space grid points reproduce the
/// stored sample exactly despite rounding in `(p - origin) / spacing`.
const GRID_SNAP: f64 = 1e-9;

/// A scalar field on a Cartesian grid with per-axis physical spacing.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarVolume {
    dims: [usize; 3],
    spacing: Vector3<f64>,
    origin: Point3<f64>,
    samples: Vec<f32>,
    source_range: (f64, f64),
}

impl ScalarVolume {
    pub fn new(
        dims: [usize; 3],
        spacing: Vector3<f64>,
        origin: Point3<f64>,
        samples: Vec<f32>,
        source_range: (f64, f64),
    ) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::invalid(format!(
                "volume dims must be >= 2 per axis, got {dims:?}"
            )));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::invalid(format!(
                "voxel spacing must be positive, got {spacing:?}"
            )));
        }
        if origin.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("volume origin must be finite"));
        }
        let expected = dims[0]
            .checked_mul(dims[1])
            .and_then(|n| n.checked_mul(dims[2]))
            .ok_or_else(|| Error::invalid("volume dims overflow"))?;
        if samples.len() != expected {
            return Err(Error::invalid(format!(
                "expected {expected} samples for dims {dims:?}, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::invalid(format!(
                "sample {i} = {} outside [0, 1]",
                samples[i]
            )));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            samples,
            source_range,
        })
    }

    /// Builds a volume by evaluating `f` at every voxel's world position.
    /// Values are clamped into `[0, 1]`; the source range is `(0, 1)`.
    pub fn from_fn(
        dims: [usize; 3],
        spacing: Vector3<f64>,
        origin: Point3<f64>,
        mut f: impl FnMut(Point3<f64>) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(dims.iter().product());
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let p = origin
                        + Vector3::new(i as f64, j as f64, k as f64).component_mul(&spacing);
                    let v = f(p);
                    let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
                    samples.push(v as f32);
                }
            }
        }
        Self::new(dims, spacing, origin, samples, (0.0, 1.0))
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> Vector3<f64> {
        self.spacing
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn source_range(&self) -> (f64, f64) {
        self.source_range
    }

    pub fn voxel_count(&self) -> usize {
        self.samples.len()
    }

    pub fn with_origin(mut self, origin: Point3<f64>) -> Self {
        self.origin = origin;
        self
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// Stored sample at voxel `(i, j, k)`. Panics when out of range.
    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> f64 {
        self.samples[self.index(i, j, k)] as f64
    }

    /// World-space position of voxel `(i, j, k)`.
    pub fn voxel_position(&self, i: usize, j: usize, k: usize) -> Point3<f64> {
        self.origin + Vector3::new(i as f64, j as f64, k as f64).component_mul(&self.spacing)
    }

    pub fn bounds(&self) -> Aabb {
        let extent = Vector3::new(
            (self.dims[0] - 1) as f64,
            (self.dims[1] - 1) as f64,
            (self.dims[2] - 1) as f64,
        )
        .component_mul(&self.spacing);
        Aabb {
            min: self.origin,
            max: self.origin + extent,
        }
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing.min()
    }

    /// Continuous grid coordinates of `p`, or `None` outside the grid.
    #[inline]
    fn grid_coords(&self, p: &Point3<f64>) -> Option<[f64; 3]> {
        let mut u = [0.0; 3];
        for axis in 0..3 {
            let mut c = (p[axis] - self.origin[axis]) / self.spacing[axis];
            let r = c.round();
            if (c - r).abs() < GRID_SNAP {
                c = r;
            }
            // Negated comparison also rejects NaN.
            if !(c >= 0.0 && c <= (self.dims[axis] - 1) as f64) {
                return None;
            }
            u[axis] = c;
        }
        Some(u)
    }

    /// Trilinear blend of the eight voxels enclosing `p`, or `None` when `p`
    /// lies outside the bounding box. Grid points return the stored value
    /// exactly.
    #[inline]
    pub fn sample_trilinear(&self, p: &Point3<f64>) -> Option<f64> {
        let u = self.grid_coords(p)?;
        Some(self.interpolate(u))
    }

    #[inline]
    fn interpolate(&self, u: [f64; 3]) -> f64 {
        let [nx, ny, _] = self.dims;
        let i = (u[0] as usize).min(nx - 2);
        let j = (u[1] as usize).min(ny - 2);
        let k = (u[2] as usize).min(self.dims[2] - 2);
        let fx = u[0] - i as f64;
        let fy = u[1] - j as f64;
        let fz = u[2] - k as f64;

        let base = i + nx * (j + ny * k);
        let slab = nx * ny;
        let s = &self.samples;
        let at = |idx: usize| s[idx] as f64;

        let c00 = lerp(at(base), at(base + 1), fx);
        let c10 = lerp(at(base + nx), at(base + nx + 1), fx);
        let c01 = lerp(at(base + slab), at(base + slab + 1), fx);
        let c11 = lerp(at(base + slab + nx), at(base + slab + nx + 1), fx);
        let c0 = lerp(c00, c10, fy);
        let c1 = lerp(c01, c11, fy);
        lerp(c0, c1, fz)
    }

    /// Gradient of the interpolated field at `p` in 1/mm.
    ///
    /// Central differences at one voxel spacing per axis; within one voxel
    /// of a face the stencil falls back to a one-sided difference.
    pub fn gradient_central(&self, p: &Point3<f64>) -> Option<Vector3<f64>> {
        let center = self.sample_trilinear(p)?;
        let bounds = self.bounds();
        let mut g = Vector3::zeros();
        for axis in 0..3 {
            let h = self.spacing[axis];
            let mut fwd = *p;
            fwd[axis] += h;
            let mut back = *p;
            back[axis] -= h;
            let f_fwd = self.sample_trilinear(&fwd);
            let f_back = self.sample_trilinear(&back);
            g[axis] = match (f_fwd, f_back) {
                (Some(a), Some(b)) => (a - b) / (2.0 * h),
                (None, Some(b)) => (center - b) / h,
                (Some(a), None) => (a - center) / h,
                (None, None) => {
                    // Axis only one cell wide: difference across the whole extent.
                    let mut hi = *p;
                    hi[axis] = bounds.max[axis];
                    let mut lo = *p;
                    lo[axis] = bounds.min[axis];
                    let a = self.sample_trilinear(&hi).unwrap_or(center);
                    let b = self.sample_trilinear(&lo).unwrap_or(center);
                    (a - b) / (bounds.max[axis] - bounds.min[axis])
                }
            };
        }
        Some(g)
    }

    pub fn histogram(&self, bin_count: usize) -> Result<Histogram> {
        compute_histogram(self, bin_count)
    }
}

#[inline(always)]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + t * (b - a)
}

/// Axis-aligned box in world millimeters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn new(min: Point3<f64>, max: Point3<f64>) -> Result<Self> {
        if (0..3).any(|a| !(min[a] <= max[a])) {
            return Err(Error::invalid(format!("aabb min {min:?} exceeds max {max:?}")));
        }
        Ok(Self { min, max })
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn extent(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }
}

/// Slab-method intersection of a ray with a box.
///
/// Returns `(t_near, t_far)` with `t_near` clamped to 0 when the origin is
/// inside the box, or `None` on a miss. The ray's own `t_range` is ignored.
pub fn intersect_ray_aabb(ray: &Ray, aabb: &Aabb) -> Option<(f64, f64)> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for axis in 0..3 {
        let o = ray.origin[axis];
        let d = ray.direction[axis];
        let (lo, hi) = (aabb.min[axis], aabb.max[axis]);
        if d == 0.0 {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let (mut t0, mut t1) = ((lo - o) * inv, (hi - o) * inv);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_near = t_near.max(t0);
        t_far = t_far.min(t1);
    }
    let t_near = t_near.max(0.0);
    (t_near <= t_far).then_some((t_near, t_far))
}

/// Voxel-value distribution over `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Bin `b` counts samples with `floor(s * bin_count) == b`; 1.0 lands in the
/// last bin.
pub fn compute_histogram(volume: &ScalarVolume, bin_count: usize) -> Result<Histogram> {
    if bin_count < 2 {
        return Err(Error::invalid(format!(
            "histogram needs at least 2 bins, got {bin_count}"
        )));
    }
    let mut counts = vec![0u64; bin_count];
    let scale = bin_count as f64;
    for &s in volume.samples() {
        let b = ((s as f64 * scale) as usize).min(bin_count - 1);
        counts[b] += 1;
    }
    Ok(Histogram { counts })
}

/// Maps raw element values into `[0, 1]`.
///
/// With a window `(lo, hi)` values are clamped to it and mapped linearly.
/// Without one the data's own min/max is used; a constant input maps to all
/// zeros with source range `(v, v + 1)`.
pub fn normalize_scalars(
    raw: &[f64],
    window: Option<(f64, f64)>,
) -> Result<(Vec<f32>, (f64, f64))> {
    if raw.is_empty() {
        return Err(Error::invalid("cannot normalize an empty sample set"));
    }
    let (lo, hi) = match window {
        Some((lo, hi)) => {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::invalid(format!(
                    "window ({lo}, {hi}) must satisfy lo < hi"
                )));
            }
            (lo, hi)
        }
        None => {
            let (min, max) = raw
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), &v| {
                    (mn.min(v), mx.max(v))
                });
            if !min.is_finite() || !max.is_finite() {
                return Err(Error::invalid("raw samples contain non-finite values"));
            }
            if min == max {
                return Ok((vec![0.0; raw.len()], (min, min + 1.0)));
            }
            (min, max)
        }
    };
    let width = hi - lo;
    let samples = raw
        .iter()
        .map(|&v| {
            let v = if v.is_nan() { lo } else { v.clamp(lo, hi) };
            ((v - lo) / width).clamp(0.0, 1.0) as f32
        })
        .collect();
    Ok((samples, (lo, hi)))
}
