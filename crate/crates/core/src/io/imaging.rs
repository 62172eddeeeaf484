use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::{ImageFormat, RgbaImage};

use crate::engine::FrameImage;
use crate::error::{Error, Result};

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Writes binary PPM (P6, alpha dropped) for `.ppm` or 8-bit RGBA PNG for
/// `.png`.
pub fn save_image(image: &FrameImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    match extension(path).as_str() {
        "ppm" => {
            let mut out = BufWriter::new(File::create(path)?);
            write!(out, "P6\n{} {}\n255\n", image.width(), image.height())?;
            for px in image.pixels().chunks_exact(4) {
                out.write_all(&px[..3])?;
            }
            out.flush()?;
            Ok(())
        }
        "png" => {
            let buf = RgbaImage::from_raw(image.width(), image.height(), image.pixels().to_vec())
                .expect("frame buffer matches its dimensions");
            buf.save_with_format(path, ImageFormat::Png)?;
            Ok(())
        }
        other => Err(Error::UnsupportedFormat(format!(
            "image extension '.{other}' (use .png or .ppm)"
        ))),
    }
}

/// Reads a PNG or PPM back into RGBA pixels.
pub fn load_image(path: impl AsRef<Path>) -> Result<FrameImage> {
    let img = image::open(path)?.to_rgba8();
    FrameImage::new(img.width(), img.height(), img.into_raw())
}

/// PNG bytes of `image`, as sent over the wire.
pub(crate) fn encode_png(image: &FrameImage) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    let buf = RgbaImage::from_raw(image.width(), image.height(), image.pixels().to_vec())
        .expect("frame buffer matches its dimensions");
    buf.write_to(&mut std::io::Cursor::new(&mut bytes), ImageFormat::Png)?;
    Ok(bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.ppm");
        save_image(&FrameImage::new(1, 1, vec![255, 255, 255, 255]).unwrap(), &path).unwrap();
        let mut expect = b"P6\n1 1\n255\n".to_vec();
        expect.extend([0xFF, 0xFF, 0xFF]);
        assert_eq!(std::fs::read(&path).unwrap(), expect);
    }

    #[test]
    fn unknown_extension() {
        let dir = tempfile::tempdir().unwrap();
        let img = FrameImage::new(1, 1, vec![1, 2, 3, 4]).unwrap();
        assert!(matches!(save_image(&img, dir.path().join("x.bmp")), Err(Error::UnsupportedFormat(_))));
        assert!(matches!(save_image(&img, dir.path().join("noext")), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pixels: Vec<u8> = (0..3 * 2 * 4).map(|i| (i * 11) as u8).collect();
        let img = FrameImage::new(3, 2, pixels).unwrap();
        let path = dir.path().join("rt.png");
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
        let decoded = image::load_from_memory(&encode_png(&img).unwrap()).unwrap().to_rgba8();
        assert_eq!(decoded.as_raw(), img.pixels());
    }
}
