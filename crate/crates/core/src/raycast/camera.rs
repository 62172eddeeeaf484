use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::Ray;
use crate::error::{Error, Result};
use crate::volume::Aabb;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Projection {
    /// Vertical field of view in degrees.
    Perspective { vfov: f64 },
    /// Height of the view volume in millimeters.
    Orthographic { height: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    position: Point3<f64>,
    target: Point3<f64>,
    up: Vector3<f64>,
    projection: Projection,
}

impl Camera {
    pub fn new(
        position: Point3<f64>,
        target: Point3<f64>,
        up: Vector3<f64>,
        projection: Projection,
    ) -> Result<Self> {
        let axis = target - position;
        if !(axis.norm() > 0.0) || position.iter().chain(target.iter()).any(|c| !c.is_finite()) {
            return Err(Error::invalid("camera position must differ from target"));
        }
        if !(axis.normalize().cross(&up).norm() > 1e-9) {
            return Err(Error::invalid("camera up vector is parallel to the view axis"));
        }
        match projection {
            Projection::Perspective { vfov } if !(vfov > 0.0 && vfov < 180.0) => {
                return Err(Error::invalid(format!("vfov {vfov} outside (0, 180)")));
            }
            Projection::Orthographic { height } if !(height > 0.0 && height.is_finite()) => {
                return Err(Error::invalid(format!("ortho height {height} must be positive")));
            }
            _ => {}
        }
        Ok(Self {
            position,
            target,
            up,
            projection,
        })
    }

    pub fn perspective(position: Point3<f64>, target: Point3<f64>, up: Vector3<f64>, vfov: f64) -> Result<Self> {
        Self::new(position, target, up, Projection::Perspective { vfov })
    }

    /// Perspective view looking down -z at the box center, far enough back
    /// that the bounding sphere fits the vertical field of view.
    pub fn framing(aabb: &Aabb, vfov: f64) -> Result<Self> {
        let center = aabb.center();
        let radius = 0.5 * aabb.extent().norm();
        let half = (0.5 * vfov).to_radians();
        let distance = 1.05 * radius / half.sin();
        Self::perspective(
            center + Vector3::new(0.0, 0.0, distance),
            center,
            Vector3::y(),
            vfov,
        )
    }

    pub fn position(&self) -> Point3<f64> {
        self.position
    }

    pub fn target(&self) -> Point3<f64> {
        self.target
    }

    pub fn up(&self) -> Vector3<f64> {
        self.up
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    /// The camera rotated by `degrees` about the world +y axis through its
    /// target. Angles are reduced modulo 360 first, so a full turn returns
    /// exactly the original camera.
    pub fn orbited_about_y(&self, degrees: f64) -> Result<Self> {
        let deg = degrees.rem_euclid(360.0);
        if deg == 0.0 {
            return Ok(*self);
        }
        let (s, c) = deg.to_radians().sin_cos();
        let rot = |v: Vector3<f64>| Vector3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z);
        Self::new(
            self.target + rot(self.position - self.target),
            self.target,
            rot(self.up),
            self.projection,
        )
    }
}

/// Per-frame precomputation of the camera basis and image-plane extents.
#[derive(Clone, Copy, Debug)]
pub struct RayGenerator {
    position: Point3<f64>,
    forward: Vector3<f64>,
    right: Vector3<f64>,
    up: Vector3<f64>,
    half_w: f64,
    half_h: f64,
    orthographic: bool,
    width: u32,
    height: u32,
}

impl RayGenerator {
    pub fn new(camera: &Camera, width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("image size {width}x{height} must be nonzero")));
        }
        let forward = (camera.target - camera.position).normalize();
        let right = forward.cross(&camera.up).normalize();
        let up = right.cross(&forward);
        let (half_h, orthographic) = match camera.projection {
            Projection::Perspective { vfov } => ((0.5 * vfov).to_radians().tan(), false),
            Projection::Orthographic { height } => (0.5 * height, true),
        };
        let half_w = half_h * width as f64 / height as f64;
        Ok(Self {
            position: camera.position,
            forward,
            right,
            up,
            half_w,
            half_h,
            orthographic,
            width,
            height,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Ray through the center of pixel `(px, py)`; `(0, 0)` is top-left.
    pub fn ray(&self, px: u32, py: u32) -> Result<Ray> {
        if px >= self.width || py >= self.height {
            return Err(Error::invalid(format!(
                "pixel ({px}, {py}) outside {}x{} image",
                self.width, self.height
            )));
        }
        Ok(self.ray_unchecked(px, py))
    }

    #[inline]
    pub(crate) fn ray_unchecked(&self, px: u32, py: u32) -> Ray {
        let x = ((px as f64 + 0.5) / self.width as f64 * 2.0 - 1.0) * self.half_w;
        let y = (1.0 - (py as f64 + 0.5) / self.height as f64 * 2.0) * self.half_h;
        let offset = self.right * x + self.up * y;
        if self.orthographic {
            Ray::new(self.position + offset, self.forward)
        } else {
            Ray::new(self.position, (self.forward + offset).normalize())
        }
    }
}

pub fn generate_ray(camera: &Camera, px: u32, py: u32, width: u32, height: u32) -> Result<Ray> {
    RayGenerator::new(camera, width, height)?.ray(px, py)
}
