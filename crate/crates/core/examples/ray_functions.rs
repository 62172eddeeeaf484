//! Renders the head phantom once per ray function and traces one ray by
//! hand to show the samples behind a composite pixel.
//!
//! cargo run --release --example ray_functions -- [out_dir]

use std::path::PathBuf;

use volren::{cast_ray, io, render_frame, sample_along_ray, synth, RayFunction, Scene};

fn main() -> volren::Result<()> {
    let out_dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "ray-functions".into()));
    std::fs::create_dir_all(&out_dir)?;

    let tf = io::bundled_preset("soft-tissue").expect("bundled preset").into_tf();
    let base = Scene::framed(synth::head_phantom(96), tf)?;

    for function in RayFunction::ALL {
        let mut scene = base.clone();
        scene.config.function = function;
        // Surface modes pick the skull; the iso level sits on its flank.
        scene.config.iso_value = 0.6;
        scene.config.threshold_value = 0.6;
        let (image, stats) = render_frame(&scene, 192, 192, 4)?;
        let path = out_dir.join(format!("{}.png", function.as_str()));
        io::save_image(&image, &path)?;
        println!("{:<10} {:>8} samples  {:6.1} ms  -> {}", function.as_str(), stats.samples, stats.frame_ms, path.display());
    }

    // One central ray, sample by sample.
    let ray = volren::generate_ray(&base.camera, 96, 96, 192, 192)?;
    let clipped = ray.clipped_to(&base.volume).expect("central ray hits the volume");
    let samples = sample_along_ray(&base.volume, &base.tf, &clipped, &base.config);
    let mut transmittance = 1.0;
    println!("\ncentral ray: {} samples", samples.len());
    for s in samples.iter().filter(|s| s.classified.opacity > 0.0).step_by(8) {
        transmittance *= 1.0 - s.classified.opacity;
        println!("  t={:7.2}  scalar={:.3}  alpha={:.4}", s.t, s.scalar, s.classified.opacity);
    }
    let r = cast_ray(&base.volume, &base.tf, &ray, &base.config);
    println!(
        "composite: color {:.3?}, alpha {:.4}, early stop {} (every 8th visible sample shown; partial T {:.3})",
        r.color, r.alpha, r.terminated_early, transmittance
    );
    Ok(())
}
