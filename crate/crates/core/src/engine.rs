//! Frame rendering over 32x32 tiles distributed across worker threads, plus
//! the benchmark harness.
//!
//! Each pixel depends only on the immutable scene, and every tile is written
//! to its own region of the output, so the image bytes do not depend on the
//! worker count or on the order tiles are picked up.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raycast::{cast_ray, Camera, RayGenerator, RaycastConfig, RayResult};
use crate::transfer::{Rgb, TransferFunction};
use crate::volume::ScalarVolume;

pub const TILE_SIZE: u32 = 32;

#[derive(Clone, Debug)]
pub struct Scene {
    pub volume: Arc<ScalarVolume>,
    pub tf: TransferFunction,
    pub camera: Camera,
    pub config: RaycastConfig,
}

impl Scene {
    pub fn new(
        volume: impl Into<Arc<ScalarVolume>>,
        tf: TransferFunction,
        camera: Camera,
        config: RaycastConfig,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            volume: volume.into(),
            tf,
            camera,
            config,
        })
    }

    /// Scene with a framing camera and default ray settings, stepping one
    /// minimum voxel spacing.
    pub fn framed(volume: impl Into<Arc<ScalarVolume>>, tf: TransferFunction) -> Result<Self> {
        let volume = volume.into();
        let camera = Camera::framing(&volume.bounds(), 30.0)?;
        let config = RaycastConfig {
            step: volume.min_spacing(),
            ..RaycastConfig::default()
        };
        Self::new(volume, tf, camera, config)
    }
}

/// 8-bit sRGB RGBA pixels, row-major from the top-left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl FrameImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("image dimensions must be nonzero"));
        }
        if pixels.len() != width as usize * height as usize * 4 {
            return Err(Error::invalid(format!(
                "{}x{} image needs {} bytes, got {}",
                width,
                height,
                width as usize * height as usize * 4,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// RGBA bytes, four per pixel.
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = 4 * (y as usize * self.width as usize + x as usize);
        self.pixels[i..i + 4].try_into().unwrap()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RenderStats {
    pub frame_ms: f64,
    pub rays: u64,
    pub samples: u64,
    pub early_terminated: u64,
    pub tiles: u64,
    pub workers: u64,
}

/// Linear-light RGBA render, before encoding.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFrame {
    pub width: u32,
    pub height: u32,
    /// `[r, g, b, a]` per pixel, row-major.
    pub pixels: Vec<[f64; 4]>,
}

impl LinearFrame {
    pub fn encode(&self) -> FrameImage {
        let pixels = self
            .pixels
            .iter()
            .flat_map(|p| {
                [
                    linear_to_srgb8(p[0]),
                    linear_to_srgb8(p[1]),
                    linear_to_srgb8(p[2]),
                    alpha_to_u8(p[3]),
                ]
            })
            .collect();
        FrameImage {
            width: self.width,
            height: self.height,
            pixels,
        }
    }
}

/// sRGB transfer curve on a clamped linear value.
pub fn srgb_gamma(linear: f64) -> f64 {
    let c = if linear.is_nan() { 0.0 } else { linear.clamp(0.0, 1.0) };
    if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

/// `round(255 * srgb(clamp(c, 0, 1)))`, halves rounding up.
pub fn linear_to_srgb8(linear: f64) -> u8 {
    (255.0 * srgb_gamma(linear) + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Alpha is stored linearly.
pub fn alpha_to_u8(alpha: f64) -> u8 {
    let a = if alpha.is_nan() { 0.0 } else { alpha.clamp(0.0, 1.0) };
    (255.0 * a + 0.5).floor() as u8
}

pub fn encode_pixel(color: &Rgb, alpha: f64) -> [u8; 4] {
    [
        linear_to_srgb8(color[0]),
        linear_to_srgb8(color[1]),
        linear_to_srgb8(color[2]),
        alpha_to_u8(alpha),
    ]
}

#[derive(Clone, Copy, Debug)]
struct Tile {
    x0: u32,
    y0: u32,
    w: u32,
    h: u32,
}

fn tiles(width: u32, height: u32) -> Vec<Tile> {
    let mut out = Vec::new();
    for y0 in (0..height).step_by(TILE_SIZE as usize) {
        for x0 in (0..width).step_by(TILE_SIZE as usize) {
            out.push(Tile {
                x0,
                y0,
                w: TILE_SIZE.min(width - x0),
                h: TILE_SIZE.min(height - y0),
            });
        }
    }
    out
}

#[derive(Default)]
struct TileCounters {
    samples: u64,
    early: u64,
}

fn render_tile(scene: &Scene, rays: &RayGenerator, tile: Tile, out: &mut Vec<[f64; 4]>) -> TileCounters {
    let mut counters = TileCounters::default();
    out.clear();
    for y in tile.y0..tile.y0 + tile.h {
        for x in tile.x0..tile.x0 + tile.w {
            let ray = rays.ray_unchecked(x, y);
            let r: RayResult = cast_ray(&scene.volume, &scene.tf, &ray, &scene.config);
            counters.samples += r.samples_taken as u64;
            counters.early += r.terminated_early as u64;
            out.push([r.color[0], r.color[1], r.color[2], r.alpha]);
        }
    }
    counters
}

/// Renders linear-light pixels without encoding. Same tiling and
/// determinism guarantees as [`render_frame`].
pub fn render_linear(scene: &Scene, width: u32, height: u32, workers: usize) -> Result<(LinearFrame, RenderStats)> {
    if workers == 0 {
        return Err(Error::invalid("worker count must be at least 1"));
    }
    scene.config.validate()?;
    let start = Instant::now();
    let rays = RayGenerator::new(&scene.camera, width, height)?;
    let tiles = tiles(width, height);
    let next = AtomicUsize::new(0);
    let threads = workers.min(tiles.len()).max(1);

    let work = || {
        let mut done = Vec::new();
        loop {
            let idx = next.fetch_add(1, Ordering::Relaxed);
            let Some(&tile) = tiles.get(idx) else { break };
            let mut buf = Vec::with_capacity((tile.w * tile.h) as usize);
            let counters = render_tile(scene, &rays, tile, &mut buf);
            done.push((idx, buf, counters));
        }
        done
    };

    let results: Vec<_> = if threads == 1 {
        work()
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..threads).map(|_| s.spawn(work)).collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("render worker panicked"))
                .collect()
        })
    };

    let mut pixels = vec![[0.0; 4]; width as usize * height as usize];
    let mut stats = RenderStats {
        rays: width as u64 * height as u64,
        tiles: tiles.len() as u64,
        workers: workers as u64,
        ..RenderStats::default()
    };
    for (idx, buf, counters) in results {
        let tile = tiles[idx];
        for row in 0..tile.h {
            let dst = ((tile.y0 + row) * width + tile.x0) as usize;
            let src = (row * tile.w) as usize;
            pixels[dst..dst + tile.w as usize].copy_from_slice(&buf[src..src + tile.w as usize]);
        }
        stats.samples += counters.samples;
        stats.early_terminated += counters.early;
    }
    stats.frame_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((
        LinearFrame {
            width,
            height,
            pixels,
        },
        stats,
    ))
}

/// Raycasts every pixel of a `width x height` frame using `workers` threads
/// and encodes the result as 8-bit sRGB RGBA. Output bytes are identical for
/// any worker count.
pub fn render_frame(scene: &Scene, width: u32, height: u32, workers: usize) -> Result<(FrameImage, RenderStats)> {
    let start = Instant::now();
    let (linear, mut stats) = render_linear(scene, width, height, workers)?;
    let image = linear.encode();
    stats.frame_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((image, stats))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub workers: usize,
    pub min_ms: f64,
    pub median_ms: f64,
    pub rays_per_s: f64,
    pub samples_per_s: f64,
    pub speedup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub width: u32,
    pub height: u32,
    pub repetitions: usize,
    pub rays: u64,
    pub samples: u64,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "workers,min_ms,median_ms,rays_per_s,samples_per_s,speedup";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.3},{:.3},{:.1},{:.1},{:.3}\n",
                r.workers, r.min_ms, r.median_ms, r.rays_per_s, r.samples_per_s, r.speedup
            ));
        }
        out
    }
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Times `repetitions` renders per worker count. Speedup is relative to the
/// single-worker median, measured separately when 1 is not in the list.
pub fn run_benchmark(
    scene: &Scene,
    width: u32,
    height: u32,
    workers_list: &[usize],
    repetitions: usize,
) -> Result<BenchReport> {
    if repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    if workers_list.is_empty() {
        return Err(Error::invalid("workers list is empty"));
    }
    let mut timings = Vec::new();
    let mut counters = None;
    let mut measure = |workers: usize| -> Result<Vec<f64>> {
        let mut times = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let (_, stats) = render_frame(scene, width, height, workers)?;
            times.push(stats.frame_ms);
            counters.get_or_insert((stats.rays, stats.samples));
        }
        times.sort_by(f64::total_cmp);
        Ok(times)
    };
    for &w in workers_list {
        timings.push((w, measure(w)?));
    }
    let baseline = match timings.iter().find(|(w, _)| *w == 1) {
        Some((_, t)) => median(t),
        None => median(&measure(1)?),
    };
    let (rays, samples) = counters.unwrap_or_default();
    let rows = timings
        .into_iter()
        .map(|(workers, t)| {
            let med = median(&t);
            let secs = (med / 1e3).max(f64::MIN_POSITIVE);
            BenchRow {
                workers,
                min_ms: t[0],
                median_ms: med,
                rays_per_s: rays as f64 / secs,
                samples_per_s: samples as f64 / secs,
                speedup: if workers == 1 { 1.0 } else { baseline / med },
            }
        })
        .collect();
    Ok(BenchReport {
        width,
        height,
        repetitions,
        rays,
        samples,
        rows,
    })
}
