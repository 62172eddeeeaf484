use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};
use crate::volume::{normalize_scalars, ScalarVolume};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementType {
    U8,
    U16,
    F32,
}

impl ElementType {
    pub fn size(&self) -> usize {
        match self {
            ElementType::U8 => 1,
            ElementType::U16 => 2,
            ElementType::F32 => 4,
        }
    }

    pub fn meta_name(&self) -> &'static str {
        match self {
            ElementType::U8 => "MET_UCHAR",
            ElementType::U16 => "MET_USHORT",
            ElementType::F32 => "MET_FLOAT",
        }
    }

    fn from_meta(name: &str) -> Result<Self> {
        match name {
            "MET_UCHAR" => Ok(ElementType::U8),
            "MET_USHORT" => Ok(ElementType::U16),
            "MET_FLOAT" => Ok(ElementType::F32),
            other => Err(Error::UnsupportedFormat(format!("element type {other}"))),
        }
    }

    fn full_scale(&self) -> f64 {
        match self {
            ElementType::U8 => u8::MAX as f64,
            ElementType::U16 => u16::MAX as f64,
            ElementType::F32 => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ByteOrder {
    #[default]
    Little,
    Big,
}

/// Parsed MetaImage-subset header.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub element_type: ElementType,
    pub byte_order: ByteOrder,
    /// Relative paths resolve against the header's directory.
    pub data_file: PathBuf,
    pub window: Option<(f64, f64)>,
}

fn parse_numbers<const N: usize>(key: &str, value: &str) -> Result<[f64; N]> {
    let nums: Vec<f64> = value
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidHeader(format!("{key}: cannot parse '{value}'")))?;
    nums.try_into()
        .map_err(|v: Vec<f64>| Error::InvalidHeader(format!("{key}: expected {N} values, got {}", v.len())))
}

/// Parses header text. `base_dir` resolves a relative `ElementDataFile`.
pub fn parse_header(text: &str, base_dir: &Path) -> Result<VolumeHeader> {
    let mut ndims = None;
    let mut dims = None;
    let mut spacing = None;
    let mut origin = [0.0; 3];
    let mut element_type = None;
    let mut byte_order = ByteOrder::Little;
    let mut data_file = None;
    let mut window = None;

    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::InvalidHeader(format!(
                "line {}: expected 'Key = value'",
                lineno + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "NDims" => {
                ndims = Some(value.parse::<u32>().map_err(|_| {
                    Error::InvalidHeader(format!("NDims: cannot parse '{value}'"))
                })?)
            }
            "DimSize" => {
                let d = parse_numbers::<3>(key, value)?;
                if d.iter().any(|&x| x.fract() != 0.0 || x < 0.0) {
                    return Err(Error::InvalidHeader(format!("DimSize must be integers, got '{value}'")));
                }
                dims = Some(d.map(|x| x as usize));
            }
            "ElementSpacing" => spacing = Some(parse_numbers::<3>(key, value)?),
            "Offset" => origin = parse_numbers::<3>(key, value)?,
            "ElementType" => element_type = Some(ElementType::from_meta(value)?),
            "ElementByteOrderMSB" => {
                byte_order = match value.to_ascii_lowercase().as_str() {
                    "true" => ByteOrder::Big,
                    "false" => ByteOrder::Little,
                    _ => {
                        return Err(Error::InvalidHeader(format!(
                            "ElementByteOrderMSB must be True or False, got '{value}'"
                        )))
                    }
                }
            }
            "ElementDataFile" => {
                if value.is_empty() {
                    return Err(Error::InvalidHeader("ElementDataFile is empty".into()));
                }
                if value == "LOCAL" || value == "LIST" {
                    return Err(Error::UnsupportedFormat(format!("ElementDataFile {value}")));
                }
                data_file = Some(base_dir.join(value));
            }
            "Window" => {
                let [lo, hi] = parse_numbers::<2>(key, value)?;
                if !(lo < hi) {
                    return Err(Error::InvalidHeader(format!("Window {lo} {hi}: lo must be below hi")));
                }
                window = Some((lo, hi));
            }
            other => warn!("ignoring unknown header key '{other}'"),
        }
    }

    match ndims {
        Some(3) => {}
        Some(n) => return Err(Error::InvalidHeader(format!("NDims must be 3, got {n}"))),
        None => return Err(Error::InvalidHeader("missing NDims".into())),
    }
    let dims = dims.ok_or_else(|| Error::InvalidHeader("missing DimSize".into()))?;
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::InvalidHeader(format!("DimSize must be >= 2 per axis, got {dims:?}")));
    }
    let spacing = spacing.unwrap_or([1.0; 3]);
    if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidHeader(format!("ElementSpacing must be positive, got {spacing:?}")));
    }
    Ok(VolumeHeader {
        dims,
        spacing,
        origin,
        element_type: element_type.ok_or_else(|| Error::InvalidHeader("missing ElementType".into()))?,
        byte_order,
        data_file: data_file.ok_or_else(|| Error::InvalidHeader("missing ElementDataFile".into()))?,
        window,
    })
}

fn decode(bytes: &[u8], element: ElementType, order: ByteOrder) -> Vec<f64> {
    match (element, order) {
        (ElementType::U8, _) => bytes.iter().map(|&b| b as f64).collect(),
        (ElementType::U16, ByteOrder::Little) => bytes
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as f64)
            .collect(),
        (ElementType::U16, ByteOrder::Big) => bytes
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect(),
        (ElementType::F32, ByteOrder::Little) => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        (ElementType::F32, ByteOrder::Big) => bytes
            .chunks_exact(4)
            .map(|c| f32::from_be_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
    }
}

/// Loads a volume from a MetaImage-subset header and its raw payload. The
/// payload must hold exactly `nx * ny * nz` elements; anything else is
/// rejected, never truncated.
pub fn load_volume(header_path: impl AsRef<Path>) -> Result<ScalarVolume> {
    let header_path = header_path.as_ref();
    let text = fs::read_to_string(header_path)?;
    let base = header_path.parent().unwrap_or(Path::new("."));
    let header = parse_header(&text, base)?;

    let count = header.dims.iter().product::<usize>();
    let expected = (count * header.element_type.size()) as u64;
    let bytes = match fs::read(&header.data_file) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(Error::CorruptData {
                path: header.data_file,
                expected,
                actual: 0,
            })
        }
        Err(e) => return Err(e.into()),
    };
    if bytes.len() as u64 != expected {
        return Err(Error::CorruptData {
            path: header.data_file,
            expected,
            actual: bytes.len() as u64,
        });
    }
    let raw = decode(&bytes, header.element_type, header.byte_order);
    let (samples, range) = normalize_scalars(&raw, header.window)?;
    ScalarVolume::new(
        header.dims,
        Vector3::from(header.spacing),
        Point3::from(header.origin),
        samples,
        range,
    )
}

/// Writes `volume` as `<header_path>` plus a sibling `.raw` payload.
///
/// Samples are quantized to the element type's full scale and the header
/// carries a `Window = 0 <full scale>`, so reloading a `U8` volume whose
/// samples are multiples of 1/255 is exact.
pub fn save_volume(volume: &ScalarVolume, header_path: impl AsRef<Path>, element: ElementType) -> Result<()> {
    let header_path = header_path.as_ref();
    let raw_path = header_path.with_extension("raw");
    let raw_name = raw_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::invalid(format!("bad header path {}", header_path.display())))?
        .to_owned();

    let scale = element.full_scale();
    let mut bytes = Vec::with_capacity(volume.voxel_count() * element.size());
    for &s in volume.samples() {
        let v = s as f64 * scale;
        match element {
            ElementType::U8 => bytes.push(v.round() as u8),
            ElementType::U16 => bytes.extend_from_slice(&(v.round() as u16).to_le_bytes()),
            ElementType::F32 => bytes.extend_from_slice(&(v as f32).to_le_bytes()),
        }
    }
    let [nx, ny, nz] = volume.dims();
    let sp = volume.spacing();
    let o = volume.origin();
    let header = format!(
        "NDims = 3\nDimSize = {nx} {ny} {nz}\nElementSpacing = {} {} {}\nOffset = {} {} {}\n\
         ElementType = {}\nElementByteOrderMSB = False\nWindow = 0 {}\nElementDataFile = {raw_name}\n",
        sp.x,
        sp.y,
        sp.z,
        o.x,
        o.y,
        o.z,
        element.meta_name(),
        scale,
    );
    fs::write(&raw_path, bytes)?;
    fs::write(header_path, header)?;
    Ok(())
}
