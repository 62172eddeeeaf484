//! Software direct volume rendering.
//!
//! A [`ScalarVolume`] is classified through a [`TransferFunction`] and
//! raycast per pixel with one of five ray functions: emission-absorption
//! compositing, maximum intensity projection, average intensity, isosurface
//! and thresholding. Frames are rendered over tiles on a configurable number
//! of worker threads and come out byte-identical regardless of that number.
//!
//! ```
//! use volren::{io, render_frame, synth, Scene};
//!
//! let volume = synth::radial_sphere(32, 1.0, 14.0);
//! let tf = io::bundled_preset("soft-tissue").unwrap().into_tf();
//! let scene = Scene::framed(volume, tf).unwrap();
//! let (image, stats) = render_frame(&scene, 64, 64, 2).unwrap();
//! assert_eq!(stats.rays, 64 * 64);
//! assert_eq!(image.pixels().len(), 64 * 64 * 4);
//! ```

// Validation uses `!(x > 0.0)` style checks on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod engine;
pub mod error;
pub mod io;
pub mod raycast;
pub mod service;
pub mod synth;
pub mod transfer;
pub mod volume;

pub use engine::{render_frame, run_benchmark, BenchReport, FrameImage, RenderStats, Scene};
pub use error::{Error, Result};
pub use raycast::{
    average_ray, cast_ray, composite_ray, generate_ray, isosurface_ray, mip_ray, sample_along_ray,
    shade_headlight, threshold_ray, Camera, Projection, Ray, RayFunction, RayResult, RaySample,
    RaycastConfig, Shading,
};
pub use transfer::{correct_opacity, Classified, ControlPoint, TransferFunction};
pub use volume::{compute_histogram, intersect_ray_aabb, normalize_scalars, Aabb, Histogram, ScalarVolume};
