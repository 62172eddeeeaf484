use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};
use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::volume::{normalize_scalars, ScalarVolume};

/// How slice files are ordered along z.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SliceOrder {
    /// Plain byte-wise filename order: `s10` sorts before `s2`.
    #[default]
    Lexicographic,
    /// Runs of digits compare by value: `s2` sorts before `s10`.
    Numeric,
}

fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut a, mut b) = (a, b);
    loop {
        match (a.chars().next(), b.chars().next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let da = a.len() - a.trim_start_matches(|c: char| c.is_ascii_digit()).len();
                let db = b.len() - b.trim_start_matches(|c: char| c.is_ascii_digit()).len();
                let (na, nb) = (a[..da].trim_start_matches('0'), b[..db].trim_start_matches('0'));
                let ord = na.len().cmp(&nb.len()).then_with(|| na.cmp(nb));
                if ord != Ordering::Equal {
                    return ord;
                }
                a = &a[da..];
                b = &b[db..];
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(&y);
                }
                a = &a[x.len_utf8()..];
                b = &b[y.len_utf8()..];
            }
        }
    }
}

fn slice_files(dir: &Path, order: SliceOrder) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && ImageFormat::from_path(p).is_ok())
        .collect();
    let name = |p: &PathBuf| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    match order {
        SliceOrder::Lexicographic => files.sort_by_key(|p| name(p)),
        SliceOrder::Numeric => files.sort_by(|a, b| natural_cmp(&name(a), &name(b)).then_with(|| name(a).cmp(&name(b)))),
    }
    Ok(files)
}

fn gray_values(img: &DynamicImage) -> Vec<f64> {
    match img {
        DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA16(_)
        | DynamicImage::ImageRgb16(_)
        | DynamicImage::ImageRgba16(_) => img.to_luma16().pixels().map(|p| p.0[0] as f64).collect(),
        _ => img.to_luma8().pixels().map(|p| p.0[0] as f64).collect(),
    }
}

/// Stacks the grayscale images in `dir` into a volume, slice `k` at z index
/// `k`, normalized over the global min/max of all slices.
///
/// The default ordering is lexicographic by filename, so `s10` precedes
/// `s2`; pass [`SliceOrder::Numeric`] for natural ordering.
pub fn load_slice_stack(dir: impl AsRef<Path>, spacing: [f64; 3], order: SliceOrder) -> Result<ScalarVolume> {
    let files = slice_files(dir.as_ref(), order)?;
    if files.len() < 2 {
        return Err(Error::invalid(format!(
            "slice stack in {} needs at least 2 images, found {}",
            dir.as_ref().display(),
            files.len()
        )));
    }
    let mut raw = Vec::new();
    let mut size = None;
    for path in &files {
        let img = image::open(path)?;
        let (w, h) = (img.width(), img.height());
        match size {
            None => size = Some((w, h)),
            Some((ew, eh)) if (ew, eh) != (w, h) => {
                return Err(Error::InconsistentStack {
                    file: path.clone(),
                    expected_w: ew,
                    expected_h: eh,
                    actual_w: w,
                    actual_h: h,
                })
            }
            _ => {}
        }
        raw.extend(gray_values(&img));
    }
    let (w, h) = size.expect("at least two slices");
    let (samples, range) = normalize_scalars(&raw, None)?;
    ScalarVolume::new(
        [w as usize, h as usize, files.len()],
        Vector3::from(spacing),
        Point3::origin(),
        samples,
        range,
    )
}

/// Writes each z plane as an 8-bit grayscale PNG named `slice_0000.png`,
/// `slice_0001.png`, ...; returns the written paths.
pub fn export_slice_stack(volume: &ScalarVolume, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let [nx, ny, nz] = volume.dims();
    let mut out = Vec::with_capacity(nz);
    for k in 0..nz {
        let plane = &volume.samples()[k * nx * ny..(k + 1) * nx * ny];
        let bytes = plane.iter().map(|&s| (s as f64 * 255.0).round() as u8).collect();
        let img = image::GrayImage::from_raw(nx as u32, ny as u32, bytes).expect("plane size matches");
        let path = dir.join(format!("slice_{k:04}.png"));
        img.save(&path)?;
        out.push(path);
    }
    Ok(out)
}
