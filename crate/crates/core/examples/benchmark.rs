//! Times composite renders of a synthetic head phantom across worker counts
//! and prints the CSV report.
//!
//! cargo run --release --example benchmark -- [grid] [size] [workers] [reps]
//! e.g. `-- 256 512 1,2,4,8 3`

use volren::{io, run_benchmark, synth, Scene};

fn main() -> volren::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let grid: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(128);
    let size: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(256);
    let workers: Vec<usize> = args
        .get(2)
        .map(|s| s.split(',').filter_map(|w| w.parse().ok()).collect())
        .unwrap_or_else(|| vec![1, 2, 4]);
    let reps: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(3);

    let t = std::time::Instant::now();
    let volume = synth::head_phantom(grid);
    eprintln!("built {grid}^3 phantom in {:.0} ms", t.elapsed().as_secs_f64() * 1e3);

    let tf = io::bundled_preset("soft-tissue").expect("bundled").into_tf();
    let scene = Scene::framed(volume, tf)?;
    let report = run_benchmark(&scene, size, size, &workers, reps)?;
    eprintln!("{} rays, {} samples per frame", report.rays, report.samples);
    print!("{}", report.to_csv());
    Ok(())
}
