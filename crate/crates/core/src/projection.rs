//! View-oriented hemisphere geometry: builds the camera frame from an
//! eye/target pair, maps fisheye pixels to unit directions, and casts
//! pixel-corner rays onto the facade plane.
//!
//! The fisheye model is equidistant (angular): distance from the image
//! center is proportional to the angle from the optical axis, so the rim
//! of the image circle sits at half the field of view. Image coordinates
//! are (u, v) in [0, 1]² with u rightward and v upward; loaders are
//! responsible for flipping row-0-at-top rasters into this convention.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use crate::facade::FacadePlane;
use crate::math;
use crate::raster::BinaryMask;

const PI: f64 = core::f64::consts::PI;

/// World-space position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Unitless direction or displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.dot(self))
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        Vec3 { x: self.x / n, y: self.y / n, z: self.z / n }
    }
}

impl Sub for Point3 {
    type Output = Vec3;
    fn sub(self, rhs: Point3) -> Vec3 {
        Vec3 { x: self.x - rhs.x, y: self.y - rhs.y, z: self.z - rhs.z }
    }
}

impl Add<Vec3> for Point3 {
    type Output = Point3;
    fn add(self, rhs: Vec3) -> Point3 {
        Point3 { x: self.x + rhs.x, y: self.y + rhs.y, z: self.z + rhs.z }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3 { x: self.x + rhs.x, y: self.y + rhs.y, z: self.z + rhs.z }
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3 { x: self.x - rhs.x, y: self.y - rhs.y, z: self.z - rhs.z }
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3 { x: self.x * s, y: self.y * s, z: self.z * s }
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3 { x: -self.x, y: -self.y, z: -self.z }
    }
}

/// Eye-level point, screen-center target point, and field of view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewSpec {
    pub eye: Point3,
    pub target: Point3,
    pub fov_deg: f64,
}

impl ViewSpec {
    /// View with the default 180° field of view.
    pub fn new(eye: Point3, target: Point3) -> Self {
        Self { eye, target, fov_deg: 180.0 }
    }

    pub fn validate(&self) -> Result<(), ProjectionError> {
        if (self.target - self.eye).norm() == 0.0 {
            return Err(ProjectionError::DegenerateView);
        }
        if !(self.fov_deg > 0.0) || self.fov_deg > 180.0 {
            return Err(ProjectionError::InvalidFov(self.fov_deg));
        }
        Ok(())
    }
}

/// Orthonormal viewing frame anchored at the eye point.
///
/// `forward` points at the target, `up` is the world-vertical component
/// orthogonal to it, and `right = forward × up`, so the image's right
/// edge maps to the viewer's right-hand side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraFrame {
    pub origin: Point3,
    pub forward: Vec3,
    pub up: Vec3,
    pub right: Vec3,
}

/// Direction on the view hemisphere: `polar` is the angle from the
/// forward axis (the angle multiplying sin in the hemisphere equations),
/// `azimuth` the angle around it measured from `right` toward `up`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalDirection {
    pub polar: f64,
    pub azimuth: f64,
    pub radius: f64,
}

impl SphericalDirection {
    /// Cartesian direction in the given frame:
    /// `sin(polar)·(cos(azimuth)·right + sin(azimuth)·up) + cos(polar)·forward`.
    pub fn to_direction(self, frame: &CameraFrame) -> Vec3 {
        let sp = math::sin(self.polar) * self.radius;
        let cp = math::cos(self.polar) * self.radius;
        frame.right * (sp * math::cos(self.azimuth))
            + frame.up * (sp * math::sin(self.azimuth))
            + frame.forward * cp
    }
}

/// Projected facade-local footprint of one flagged pixel.
///
/// Corners are (u, v) meters on the facade, ordered counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FootprintQuad {
    pub corners: [(f64, f64); 4],
}

impl FootprintQuad {
    /// Builds a quad from corners in pixel order, reversing them if the
    /// projection flipped orientation.
    pub fn from_corners(mut corners: [(f64, f64); 4]) -> Self {
        if signed_area(&corners) < 0.0 {
            corners.reverse();
        }
        Self { corners }
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.corners)
    }
}

fn signed_area(corners: &[(f64, f64); 4]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let (x0, y0) = corners[i];
        let (x1, y1) = corners[(i + 1) % 4];
        acc += x0 * y1 - x1 * y0;
    }
    acc / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionError {
    DegenerateView,
    InvalidFov(f64),
    PixelOutOfRange { row: u32, col: u32, width: u32, height: u32 },
}

impl fmt::Display for ProjectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DegenerateView => write!(f, "eye and target points coincide"),
            Self::InvalidFov(fov) => write!(f, "field of view {fov} outside (0, 180]"),
            Self::PixelOutOfRange { row, col, width, height } => {
                write!(f, "pixel ({row}, {col}) outside {width}x{height} image")
            }
        }
    }
}

impl core::error::Error for ProjectionError {}

/// Builds the orthonormal viewing frame from an eye/target pair.
///
/// The up seed is world-Z unless the view is near-vertical
/// (|forward·Z| > 0.999), in which case world-Y is used.
pub fn build_frame(view: &ViewSpec) -> Result<CameraFrame, ProjectionError> {
    view.validate()?;
    let forward = (view.target - view.eye).normalized();
    let seed = if math::abs(forward.z) > 0.999 {
        Vec3::new(0.0, 1.0, 0.0)
    } else {
        Vec3::new(0.0, 0.0, 1.0)
    };
    let up = (seed - forward * seed.dot(forward)).normalized();
    let right = forward.cross(up);
    Ok(CameraFrame { origin: view.eye, forward, up, right })
}

/// Spherical coordinates of an image point under the equidistant model,
/// or `None` outside the image circle.
pub fn pixel_to_spherical(u: f64, v: f64, fov_deg: f64) -> Option<SphericalDirection> {
    let du = 2.0 * u - 1.0;
    let dv = 2.0 * v - 1.0;
    let rho = math::sqrt(du * du + dv * dv);
    if rho > 1.0 {
        return None;
    }
    let half_fov = fov_deg * PI / 360.0;
    Some(SphericalDirection {
        polar: rho * half_fov,
        azimuth: math::atan2(dv, du),
        radius: 1.0,
    })
}

/// Unit direction for an image point (u rightward, v upward in [0,1]²),
/// or `None` outside the image circle.
pub fn pixel_to_direction(u: f64, v: f64, frame: &CameraFrame, fov_deg: f64) -> Option<Vec3> {
    pixel_to_spherical(u, v, fov_deg).map(|s| s.to_direction(frame))
}

/// Directions through the four corners of a pixel, in counter-clockwise
/// image order starting at the bottom-left corner; `None` if any corner
/// falls outside the image circle.
pub fn pixel_footprint(
    row: u32,
    col: u32,
    width: u32,
    height: u32,
    frame: &CameraFrame,
    fov_deg: f64,
) -> Result<Option<[Vec3; 4]>, ProjectionError> {
    if row >= height || col >= width {
        return Err(ProjectionError::PixelOutOfRange { row, col, width, height });
    }
    let u0 = col as f64 / width as f64;
    let u1 = (col + 1) as f64 / width as f64;
    // row 0 is the top of the raster; v runs upward
    let v1 = 1.0 - row as f64 / height as f64;
    let v0 = 1.0 - (row + 1) as f64 / height as f64;
    let corners = [(u0, v0), (u1, v0), (u1, v1), (u0, v1)];
    let mut dirs = [Vec3::new(0.0, 0.0, 0.0); 4];
    for (dir, &(u, v)) in dirs.iter_mut().zip(&corners) {
        match pixel_to_direction(u, v, frame, fov_deg) {
            Some(d) => *dir = d,
            None => return Ok(None),
        }
    }
    Ok(Some(dirs))
}

/// Ray/plane intersection point, or `None` for parallel, behind-origin,
/// or grazing rays.
pub fn intersect_plane(
    origin: Point3,
    dir: Vec3,
    plane_point: Point3,
    plane_normal: Vec3,
) -> Option<Point3> {
    let denom = dir.dot(plane_normal);
    if math::abs(denom) <= 1e-12 {
        return None;
    }
    let t = (plane_point - origin).dot(plane_normal) / denom;
    if t > 1e-9 {
        Some(origin + dir * t)
    } else {
        None
    }
}

/// Projects every flagged pixel of a mask onto the facade plane.
///
/// A pixel contributes a quad only when all four corner rays intersect
/// the plane inside the facade rectangle; partially hitting pixels are
/// dropped. Quads are emitted in row-major pixel order.
pub fn project_mask(
    mask: &BinaryMask,
    frame: &CameraFrame,
    facade: &FacadePlane,
    fov_deg: f64,
) -> Vec<FootprintQuad> {
    let normal = facade.normal();
    let mut quads = Vec::new();
    for row in 0..mask.height {
        for col in 0..mask.width {
            if !mask.flag(row, col) {
                continue;
            }
            let dirs = match pixel_footprint(row, col, mask.width, mask.height, frame, fov_deg) {
                Ok(Some(dirs)) => dirs,
                _ => continue,
            };
            let mut corners = [(0.0, 0.0); 4];
            let mut ok = true;
            for (corner, dir) in corners.iter_mut().zip(dirs) {
                match intersect_plane(frame.origin, dir, facade.corner, normal) {
                    Some(p) => {
                        let (u, v) = facade.plane_uv(p);
                        if u < 0.0 || u > facade.width || v < 0.0 || v > facade.height {
                            ok = false;
                            break;
                        }
                        *corner = (u, v);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                quads.push(FootprintQuad::from_corners(corners));
            }
        }
    }
    quads
}
