//! Composite render of a synthetic radial-field sphere.
//!
//! cargo run --release --example render_sphere -- [out.png] [size]

use volren::{io, render_frame, synth, Scene};

fn main() -> volren::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.first().cloned().unwrap_or_else(|| "sphere.png".into());
    let size: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(256);

    // 64^3 grid at 1 mm; the field falls from 1 at the center to 0 at 28 mm.
    let volume = synth::radial_sphere(64, 1.0, 28.0);
    let tf = io::bundled_preset("soft-tissue").expect("bundled preset").into_tf();
    let scene = Scene::framed(volume, tf)?;

    let (image, stats) = render_frame(&scene, size, size, 4)?;
    io::save_image(&image, &out)?;
    println!("wrote {out}");
    println!(
        "{} rays, {} samples, {} terminated early, {:.1} ms",
        stats.rays, stats.samples, stats.early_terminated, stats.frame_ms
    );
    Ok(())
}
