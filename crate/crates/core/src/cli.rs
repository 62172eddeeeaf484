//! Command-line front end: `render`, `bench` and `serve`.
//!
//! [`run`] takes its output streams as arguments so the commands can be
//! driven in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nalgebra::{Point3, Vector3};

use crate::engine::{render_frame, run_benchmark, Scene};
use crate::error::{Error, Result};
use crate::io::{self, SliceOrder, TfPreset};
use crate::raycast::{Camera, RayFunction, RaycastConfig};
use crate::service::{serve, ServeOptions};
use crate::volume::ScalarVolume;

#[derive(Debug, Parser)]
#[command(name = "volren", version, about = "Software direct volume renderer")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render one frame to an image file.
    Render(RenderArgs),
    /// Time repeated renders across worker counts and emit CSV.
    Bench(BenchArgs),
    /// Stream frames to a browser viewer over WebSocket.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[group(skip)]
struct InputArgs {
    /// MetaImage-subset header (.mhd) of the volume.
    #[arg(long, required_unless_present = "slices", conflicts_with = "slices")]
    volume: Option<PathBuf>,
    /// Directory of 2-D slices, stacked in filename order.
    #[arg(long)]
    slices: Option<PathBuf>,
    /// Voxel spacing for --slices, "dx,dy,dz" in mm.
    #[arg(long, default_value = "1,1,1")]
    spacing: String,
    /// Order slices by embedded numbers (s2 before s10) instead of
    /// lexicographically.
    #[arg(long)]
    numeric_sort: bool,
}

#[derive(Debug, Args)]
struct SceneArgs {
    /// Bundled preset name or path to a preset JSON file.
    #[arg(long, default_value = "soft-tissue")]
    tf: String,
    /// Output size as WxH.
    #[arg(long, default_value = "512x512")]
    size: String,
    /// Sample step in mm; defaults to the smallest voxel spacing.
    #[arg(long)]
    step: Option<f64>,
    /// composite | mip | average | iso | threshold
    #[arg(long, default_value = "composite")]
    mode: String,
    #[arg(long)]
    iso: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    scene: SceneArgs,
    /// Worker threads; defaults to the host's parallelism.
    #[arg(long)]
    workers: Option<usize>,
    /// Output image (.png or .ppm).
    #[arg(long)]
    out: PathBuf,
    /// "px,py,pz;tx,ty,tz;ux,uy,uz;vfov"
    #[arg(long)]
    camera: Option<String>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    scene: SceneArgs,
    /// Comma-separated worker counts.
    #[arg(long, default_value = "1")]
    workers: String,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Also write the CSV report to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Render(args) => cmd_render(&args, stdout),
        Command::Bench(args) => cmd_bench(&args, stdout),
        Command::Serve(args) => cmd_serve(&args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn parse_list<const N: usize>(what: &str, text: &str, sep: char) -> Result<[f64; N]> {
    let values: Vec<f64> = text
        .split(sep)
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::invalid(format!("{what}: cannot parse '{text}'")))?;
    values
        .try_into()
        .map_err(|_| Error::invalid(format!("{what}: expected {N} values in '{text}'")))
}

fn parse_size(text: &str) -> Result<(u32, u32)> {
    let bad = || Error::invalid(format!("size '{text}' is not WxH"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: u32 = w.trim().parse().map_err(|_| bad())?;
    let h: u32 = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

fn parse_camera(text: &str) -> Result<Camera> {
    let parts: Vec<&str> = text.split(';').collect();
    let [pos, target, up, vfov] = parts[..] else {
        return Err(Error::invalid(format!(
            "camera '{text}' must be 'px,py,pz;tx,ty,tz;ux,uy,uz;vfov'"
        )));
    };
    let vfov: f64 = vfov
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("camera vfov '{vfov}' is not a number")))?;
    Camera::perspective(
        Point3::from(parse_list::<3>("camera position", pos, ',')?),
        Point3::from(parse_list::<3>("camera target", target, ',')?),
        Vector3::from(parse_list::<3>("camera up", up, ',')?),
        vfov,
    )
}

fn parse_workers(text: &str) -> Result<Vec<usize>> {
    let list: Vec<usize> = text
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::invalid(format!("workers list '{text}' is not comma-separated integers")))?;
    if list.is_empty() || list.contains(&0) {
        return Err(Error::invalid("worker counts must be at least 1"));
    }
    Ok(list)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load_input(input: &InputArgs) -> Result<ScalarVolume> {
    match (&input.volume, &input.slices) {
        (Some(path), _) => io::load_volume(path),
        (None, Some(dir)) => {
            let order = if input.numeric_sort {
                SliceOrder::Numeric
            } else {
                SliceOrder::Lexicographic
            };
            io::load_slice_stack(dir, parse_list::<3>("spacing", &input.spacing, ',')?, order)
        }
        (None, None) => Err(Error::invalid("one of --volume or --slices is required")),
    }
}

fn load_preset(name_or_path: &str) -> Result<TfPreset> {
    if let Some(p) = io::bundled_preset(name_or_path) {
        return Ok(p);
    }
    let path = Path::new(name_or_path);
    if path.exists() {
        return io::load_tf_preset(path);
    }
    Err(Error::invalid(format!(
        "'{name_or_path}' is neither a bundled preset ({}) nor a file",
        io::BUNDLED_PRESET_NAMES.join(", ")
    )))
}

fn build_scene(input: &InputArgs, args: &SceneArgs, camera: Option<&str>) -> Result<Scene> {
    let volume = Arc::new(load_input(input)?);
    let preset = load_preset(&args.tf)?;
    let defaults = RaycastConfig::default();
    let config = RaycastConfig {
        function: args.mode.parse::<RayFunction>()?,
        step: args.step.unwrap_or_else(|| volume.min_spacing()),
        reference_step: preset.reference_step,
        iso_value: args.iso.unwrap_or(defaults.iso_value),
        threshold_value: args.threshold.unwrap_or(defaults.threshold_value),
        ..defaults
    };
    let camera = match camera {
        Some(text) => parse_camera(text)?,
        None => Camera::framing(&volume.bounds(), 30.0)?,
    };
    Scene::new(volume, preset.into_tf(), camera, config)
}

fn cmd_render(args: &RenderArgs, stdout: &mut dyn Write) -> Result<()> {
    let (w, h) = parse_size(&args.scene.size)?;
    let scene = build_scene(&args.input, &args.scene, args.camera.as_deref())?;
    let (image, stats) = render_frame(&scene, w, h, args.workers.unwrap_or_else(default_workers))?;
    io::save_image(&image, &args.out)?;
    writeln!(stdout, "{}", serde_json::to_string(&stats)?)?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> Result<()> {
    if args.reps == 0 {
        return Err(Error::invalid("--reps must be at least 1"));
    }
    let workers = parse_workers(&args.workers)?;
    let (w, h) = parse_size(&args.scene.size)?;
    let scene = build_scene(&args.input, &args.scene, None)?;
    let report = run_benchmark(&scene, w, h, &workers, args.reps)?;
    let csv = report.to_csv();
    if let Some(path) = &args.out {
        std::fs::write(path, &csv)?;
    }
    write!(stdout, "{csv}")?;
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> Result<()> {
    let (width, height) = parse_size(&args.scene.size)?;
    let scene = build_scene(&args.input, &args.scene, None)?;
    let options = ServeOptions {
        width,
        height,
        workers: args.workers.unwrap_or_else(default_workers),
        ..ServeOptions::default()
    };
    serve(scene, args.port, options)
}
