//! Ingestion and persistence: MetaImage-subset raw volumes, 2-D slice
//! stacks, rendered images and transfer-function presets.

pub(crate) mod imaging;
mod mhd;
mod preset;
mod slices;

pub use imaging::{load_image, save_image};
pub use mhd::{load_volume, parse_header, save_volume, ByteOrder, ElementType, VolumeHeader};
pub use preset::{bundled_preset, bundled_presets, load_tf_preset, save_tf_preset, TfPreset, BUNDLED_PRESET_NAMES};
pub use slices::{export_slice_stack, load_slice_stack, SliceOrder};
