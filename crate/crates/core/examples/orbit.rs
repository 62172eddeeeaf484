//! Renders a full orbit about the vertical axis and checks that the last
//! frame reproduces the first byte for byte.
//!
//! cargo run --release --example orbit -- [out_dir] [frames]

use std::path::PathBuf;

use volren::{io, render_frame, synth, Scene};

fn main() -> volren::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out_dir = PathBuf::from(args.first().cloned().unwrap_or_else(|| "orbit".into()));
    let frames: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    std::fs::create_dir_all(&out_dir)?;

    let tf = io::bundled_preset("soft-tissue").expect("bundled preset").into_tf();
    let base = Scene::framed(synth::head_phantom(96), tf)?;

    let mut first = None;
    for k in 0..=frames {
        // Angles are absolute, so the last frame is exactly one full turn.
        let degrees = 360.0 * k as f64 / frames as f64;
        let scene = Scene {
            camera: base.camera.orbited_about_y(degrees)?,
            ..base.clone()
        };
        let (image, _) = render_frame(&scene, 160, 160, 4)?;
        io::save_image(&image, out_dir.join(format!("frame_{k:03}.png")))?;
        match &first {
            None => first = Some(image),
            Some(f) if k == frames => println!("full turn reproduces frame 0: {}", *f == image),
            Some(_) => {}
        }
    }
    println!("wrote {} frames to {}", frames + 1, out_dir.display());
    Ok(())
}
