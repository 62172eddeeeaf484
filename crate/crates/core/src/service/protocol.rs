//! JSON messages exchanged over the session WebSocket.
//!
//! Client to server: `{"type":"update", "camera":{..}, "tf":{..}, "config":{..}}`
//! with every section and every field optional. Server to client: `hello`,
//! `frame` (followed by one binary message holding the PNG) and `error`.

use serde::{Deserialize, Serialize};

use crate::engine::RenderStats;
use crate::io::TfPreset;
use crate::raycast::RayFunction;
use crate::transfer::{ControlPoint, Rgb};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ClientMessage {
    Update(Update),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Update {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<CameraUpdate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf: Option<TfUpdate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigUpdate>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraUpdate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vfov: Option<f64>,
    /// `"perspective"` or `"orthographic"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ortho_height: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TfUpdate {
    pub points: Vec<ControlPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_step: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigUpdate {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<RayFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iso_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub early_termination_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<Rgb>,
}

fn newer<T>(old: Option<T>, new: Option<T>) -> Option<T> {
    new.or(old)
}

impl Update {
    /// Folds a newer update into this one; fields present in `later` win.
    pub fn merge(self, later: Update) -> Update {
        Update {
            camera: match (self.camera, later.camera) {
                (Some(a), Some(b)) => Some(CameraUpdate {
                    position: newer(a.position, b.position),
                    target: newer(a.target, b.target),
                    up: newer(a.up, b.up),
                    vfov: newer(a.vfov, b.vfov),
                    projection: newer(a.projection, b.projection),
                    ortho_height: newer(a.ortho_height, b.ortho_height),
                }),
                (a, b) => b.or(a),
            },
            tf: match (self.tf, later.tf) {
                (Some(a), Some(b)) => Some(TfUpdate {
                    points: b.points,
                    name: newer(a.name, b.name),
                    reference_step: newer(a.reference_step, b.reference_step),
                }),
                (a, b) => b.or(a),
            },
            config: match (self.config, later.config) {
                (Some(a), Some(b)) => Some(ConfigUpdate {
                    mode: newer(a.mode, b.mode),
                    step: newer(a.step, b.step),
                    iso_value: newer(a.iso_value, b.iso_value),
                    threshold_value: newer(a.threshold_value, b.threshold_value),
                    early_termination_alpha: newer(a.early_termination_alpha, b.early_termination_alpha),
                    background: newer(a.background, b.background),
                }),
                (a, b) => b.or(a),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerMessage {
    Hello {
        dims: [usize; 3],
        spacing: [f64; 3],
        histogram: Vec<u64>,
        presets: Vec<TfPreset>,
        width: u32,
        height: u32,
    },
    Frame {
        seq: u64,
        width: u32,
        height: u32,
        stats: RenderStats,
    },
    Error {
        message: String,
    },
}

impl ServerMessage {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server messages serialize")
    }
}
