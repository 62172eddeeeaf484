//! Transfer functions: bundled presets, classification, opacity correction
//! and the JSON preset file format.
//!
//! cargo run --example transfer_presets -- [preset.json]

use volren::io::{self, TfPreset};
use volren::{correct_opacity, ControlPoint};

fn main() -> volren::Result<()> {
    for preset in io::bundled_presets() {
        let tf = preset.to_tf();
        print!("{:<15}", preset.name);
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let c = tf.classify(s)?;
            print!("  {s:.2}:({:.2},{:.2},{:.2} a={:.2})", c.color[0], c.color[1], c.color[2], c.opacity);
        }
        println!();
    }

    // An opacity defined per 1 mm, re-expressed for other step lengths.
    println!("\nopacity 0.3 at reference step 1 mm:");
    for step in [0.25, 0.5, 1.0, 2.0] {
        println!("  step {step:4} mm -> {:.5}", correct_opacity(0.3, step, 1.0)?);
    }

    let path = std::env::args().nth(1).unwrap_or_else(|| "vessel.json".into());
    let custom = TfPreset::new(
        "vessel",
        0.5,
        vec![
            ControlPoint::new(0.0, [0.0, 0.0, 0.0], 0.0),
            ControlPoint::new(0.4, [0.6, 0.1, 0.1], 0.0),
            ControlPoint::new(0.7, [1.0, 0.3, 0.2], 0.5),
            ControlPoint::new(1.0, [1.0, 1.0, 0.9], 0.9),
        ],
    )?;
    io::save_tf_preset(&custom, &path)?;
    let reloaded = io::load_tf_preset(&path)?;
    assert_eq!(reloaded, custom);
    println!("\nsaved and reloaded {path}:\n{}", custom.to_json());

    // Invalid presets name the offending point.
    let bad = r#"{"name":"bad","reference_step":1,"points":[
        {"scalar":0.5,"color":[1,1,1],"opacity":1},
        {"scalar":0.2,"color":[1,1,1],"opacity":1}]}"#;
    println!("\nunsorted preset: {}", TfPreset::from_json(bad).unwrap_err());
    Ok(())
}
