//! Synthetic test volumes.

use nalgebra::{Point3, Vector3};

use crate::volume::ScalarVolume;

fn centered_origin(n: usize, spacing: f64) -> Point3<f64> {
    let half = 0.5 * (n - 1) as f64 * spacing;
    Point3::new(-half, -half, -half)
}

/// `n^3` volume centered on the world origin holding the radial field
/// `clamp(1 - |p| / radius, 0, 1)`. Its level set at `v` is the sphere of
/// radius `(1 - v) * radius`.
pub fn radial_sphere(n: usize, spacing: f64, radius: f64) -> ScalarVolume {
    ScalarVolume::from_fn(
        [n, n, n],
        Vector3::repeat(spacing),
        centered_origin(n, spacing),
        |p| 1.0 - p.coords.norm() / radius,
    )
    .expect("radial sphere parameters are valid")
}

fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn gaussian(x: f64, width: f64) -> f64 {
    (-(x / width) * (x / width)).exp()
}

/// Smooth head-like phantom in a unit-spaced `n^3` grid: a bright skull
/// shell around mid-gray tissue with two dark ventricles and one bright
/// lesion. Every feature is a smooth function of position.
pub fn head_phantom(n: usize) -> ScalarVolume {
    let scale = 0.5 * (n - 1) as f64;
    ScalarVolume::from_fn(
        [n, n, n],
        Vector3::repeat(1.0),
        centered_origin(n, 1.0),
        |p| {
            let q = p.coords / scale;
            // Head ellipsoid radius.
            let r = (q.x / 0.78).hypot(q.y / 0.92).hypot(q.z / 0.85);
            let skull = 0.95 * gaussian(r - 0.9, 0.045);
            let tissue = 0.42 * (1.0 - smoothstep(0.78, 0.86, r));
            let ventricle = |cx: f64| {
                let d = ((q.x - cx) / 0.09).hypot((q.y - 0.05) / 0.22).hypot(q.z / 0.3);
                0.3 * (1.0 - smoothstep(0.6, 1.2, d))
            };
            let lesion = {
                let d = (q - Vector3::new(-0.3, 0.32, 0.25)).norm();
                0.35 * gaussian(d, 0.09)
            };
            skull + tissue - ventricle(-0.14) - ventricle(0.14) + lesion
        },
    )
    .expect("phantom parameters are valid")
}
