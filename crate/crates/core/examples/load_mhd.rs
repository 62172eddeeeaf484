//! Loads a MetaImage-subset volume and renders it. Without an argument a
//! 16-bit phantom is written first and loaded back.
//!
//! cargo run --release --example load_mhd -- [volume.mhd] [out.png]

use std::path::PathBuf;

use volren::io::{self, ElementType};
use volren::{render_frame, synth, Scene};

fn main() -> volren::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let header = match args.first() {
        Some(p) => PathBuf::from(p),
        None => {
            let path = PathBuf::from("phantom.mhd");
            io::save_volume(&synth::head_phantom(80), &path, ElementType::U16)?;
            println!("wrote {} and phantom.raw", path.display());
            path
        }
    };
    let out = args.get(1).cloned().unwrap_or_else(|| "mhd.png".into());

    let parsed = io::parse_header(&std::fs::read_to_string(&header)?, header.parent().unwrap_or(".".as_ref()))?;
    println!("{parsed:#?}");

    let volume = io::load_volume(&header)?;
    let hist = volume.histogram(16)?;
    println!("dims {:?}, spacing {:?}, raw range {:?}", volume.dims(), volume.spacing().as_slice(), volume.source_range());
    println!("histogram (16 bins): {:?}", hist.counts);

    let tf = io::bundled_preset("bone-bright").expect("bundled preset").into_tf();
    let scene = Scene::framed(volume, tf)?;
    let (image, stats) = render_frame(&scene, 256, 256, 4)?;
    io::save_image(&image, &out)?;
    println!("rendered {out} in {:.1} ms", stats.frame_ms);
    Ok(())
}
