use nalgebra::{Point3, Vector3};

use super::protocol::Update;
use crate::engine::Scene;
use crate::error::{Error, Result};
use crate::raycast::{Camera, Projection};
use crate::transfer::TransferFunction;

/// Per-connection state. At most one pending update is retained; updates
/// that arrive before it is applied are folded into it, newest fields
/// winning.
#[derive(Clone, Debug)]
pub struct SessionState {
    scene: Scene,
    frame_seq: u64,
    pending: Option<Update>,
}

impl SessionState {
    pub fn new(scene: Scene) -> Self {
        Self {
            scene,
            frame_seq: 0,
            pending: None,
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn frame_seq(&self) -> u64 {
        self.frame_seq
    }

    pub fn pending(&self) -> Option<&Update> {
        self.pending.as_ref()
    }

    pub fn receive(&mut self, update: Update) {
        self.pending = Some(match self.pending.take() {
            Some(old) => old.merge(update),
            None => update,
        });
    }

    /// Applies the pending update, if any. On error the scene is left
    /// untouched and the update is dropped. Returns whether anything was
    /// applied.
    pub fn apply_pending(&mut self) -> Result<bool> {
        let Some(update) = self.pending.take() else {
            return Ok(false);
        };
        self.scene = apply_update(&self.scene, &update)?;
        Ok(true)
    }

    /// Sequence number for the next frame to send.
    pub fn next_seq(&mut self) -> u64 {
        self.frame_seq += 1;
        self.frame_seq
    }
}

/// `scene` with `update` merged in; fails without partial effects.
pub fn apply_update(scene: &Scene, update: &Update) -> Result<Scene> {
    let mut next = scene.clone();
    if let Some(cam) = &update.camera {
        let old = scene.camera;
        let projection = match cam.projection.as_deref() {
            None => match old.projection() {
                Projection::Perspective { vfov } => Projection::Perspective {
                    vfov: cam.vfov.unwrap_or(vfov),
                },
                Projection::Orthographic { height } => Projection::Orthographic {
                    height: cam.ortho_height.unwrap_or(height),
                },
            },
            Some("perspective") => Projection::Perspective {
                vfov: cam.vfov.unwrap_or(match old.projection() {
                    Projection::Perspective { vfov } => vfov,
                    Projection::Orthographic { .. } => 30.0,
                }),
            },
            Some("orthographic") => Projection::Orthographic {
                height: cam.ortho_height.unwrap_or(match old.projection() {
                    Projection::Orthographic { height } => height,
                    Projection::Perspective { .. } => scene.volume.bounds().extent().norm(),
                }),
            },
            Some(other) => return Err(Error::invalid(format!("unknown projection '{other}'"))),
        };
        next.camera = Camera::new(
            cam.position.map(Point3::from).unwrap_or(old.position()),
            cam.target.map(Point3::from).unwrap_or(old.target()),
            cam.up.map(Vector3::from).unwrap_or(old.up()),
            projection,
        )?;
    }
    if let Some(tf) = &update.tf {
        let name = tf.name.clone().unwrap_or_else(|| "custom".into());
        next.tf = TransferFunction::new(name, tf.points.clone())?;
        if let Some(r) = tf.reference_step {
            next.config.reference_step = r;
        }
    }
    if let Some(c) = &update.config {
        let cfg = &mut next.config;
        cfg.function = c.mode.unwrap_or(cfg.function);
        cfg.step = c.step.unwrap_or(cfg.step);
        cfg.iso_value = c.iso_value.unwrap_or(cfg.iso_value);
        cfg.threshold_value = c.threshold_value.unwrap_or(cfg.threshold_value);
        cfg.early_termination_alpha = c.early_termination_alpha.unwrap_or(cfg.early_termination_alpha);
        cfg.background = c.background.unwrap_or(cfg.background);
    }
    next.config.validate()?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::bundled_preset;
    use crate::raycast::RayFunction;
    use crate::service::protocol::{CameraUpdate, ConfigUpdate, TfUpdate};
    use crate::synth;
    use crate::transfer::ControlPoint;

    fn state() -> SessionState {
        let scene = Scene::framed(synth::radial_sphere(8, 1.0, 3.0), bundled_preset("grayscale-ramp").unwrap().into_tf()).unwrap();
        SessionState::new(scene)
    }

    fn camera_at(x: f64) -> Update {
        Update {
            camera: Some(CameraUpdate {
                position: Some([x, 0.0, 40.0]),
                ..Default::default()
            }),
            ..Default::default()
        }
    }

    #[test]
    fn latest_camera_wins() {
        let mut s = state();
        for i in 0..10 {
            s.receive(camera_at(i as f64));
        }
        assert!(s.apply_pending().unwrap());
        assert_eq!(s.scene().camera.position(), Point3::new(9.0, 0.0, 40.0));
        assert!(!s.apply_pending().unwrap());
    }

    #[test]
    fn partial_sections_accumulate() {
        let mut s = state();
        s.receive(camera_at(1.0));
        s.receive(Update {
            config: Some(ConfigUpdate {
                mode: Some(RayFunction::Mip),
                ..Default::default()
            }),
            ..Default::default()
        });
        s.apply_pending().unwrap();
        assert_eq!(s.scene().camera.position().x, 1.0);
        assert_eq!(s.scene().config.function, RayFunction::Mip);
    }

    #[test]
    fn invalid_update_leaves_scene() {
        let mut s = state();
        let before = s.scene().clone();
        s.receive(Update {
            tf: Some(TfUpdate {
                points: vec![ControlPoint::gray(0.6, 0.0, 0.0), ControlPoint::gray(0.1, 1.0, 1.0)],
                name: None,
                reference_step: None,
            }),
            config: Some(ConfigUpdate {
                mode: Some(RayFunction::Average),
                ..Default::default()
            }),
            ..Default::default()
        });
        assert!(s.apply_pending().is_err());
        assert_eq!(s.scene().config, before.config);
        assert_eq!(s.scene().tf, before.tf);
        assert!(s.pending().is_none());

        s.receive(Update {
            config: Some(ConfigUpdate {
                step: Some(-1.0),
                ..Default::default()
            }),
            ..Default::default()
        });
        assert!(s.apply_pending().is_err());
        s.receive(Update {
            camera: Some(CameraUpdate {
                projection: Some("fisheye".into()),
                ..Default::default()
            }),
            ..Default::default()
        });
        assert!(s.apply_pending().is_err());
    }

    #[test]
    fn sequence_is_monotone() {
        let mut s = state();
        let a = s.next_seq();
        let b = s.next_seq();
        assert!(b > a);
        assert_eq!(s.frame_seq(), b);
    }
}
