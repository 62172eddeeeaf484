//! Exports a volume as a stack of 8-bit PNG slices, stacks them back and
//! renders the result.
//!
//! cargo run --release --example slice_stack -- [slice_dir]

use std::path::PathBuf;

use volren::io::{self, SliceOrder};
use volren::{render_frame, synth, Scene};

fn main() -> volren::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "slices".into()));
    let original = synth::head_phantom(64);
    let files = io::export_slice_stack(&original, &dir)?;
    println!("wrote {} slices to {}", files.len(), dir.display());

    // Slices 4 mm apart in z, 1 mm in-plane.
    let stacked = io::load_slice_stack(&dir, [1.0, 1.0, 4.0], SliceOrder::Lexicographic)?;
    // The stack is renormalized over its own min/max, so compare against
    // the source rescaled the same way.
    let (lo, hi) = original
        .samples()
        .iter()
        .fold((f32::MAX, f32::MIN), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let max_err = original
        .samples()
        .iter()
        .zip(stacked.samples())
        .map(|(a, b)| ((a - lo) / (hi - lo) - b).abs())
        .fold(0.0f32, f32::max);
    println!("dims {:?}, spacing {:?}", stacked.dims(), stacked.spacing().as_slice());
    println!("max difference from the rescaled source: {:.2}/255", max_err * 255.0);

    let tf = io::bundled_preset("soft-tissue").expect("bundled preset").into_tf();
    let scene = Scene::framed(stacked, tf)?;
    let (image, _) = render_frame(&scene, 256, 256, 4)?;
    io::save_image(&image, "slice_stack.png")?;
    println!("rendered slice_stack.png");
    Ok(())
}
