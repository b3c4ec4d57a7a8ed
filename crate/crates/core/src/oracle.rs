//! Synthetic fisheye renderer used as the round-trip test oracle, plus
//! seeded Gaussian noise injection.
//!
//! The renderer is the inverse of the projection pipeline: it paints
//! known bright rectangles on the facade as seen through the view
//! hemisphere. The fisheye math and the ray/plane solve are written here
//! from the defining formulas, on raw components, without calling into
//! [`crate::projection`] — round-trip tests compare two codepaths, not
//! one code path with itself.

use alloc::vec::Vec;
use core::fmt;

use rand_core::{RngCore, SeedableRng};

use crate::facade::FacadePlane;
use crate::math;
use crate::projection::CameraFrame;
use crate::raster::LuminanceImage;

const PI: f64 = core::f64::consts::PI;

/// Axis-aligned facade-local rectangle, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvRect {
    pub u_min: f64,
    pub v_min: f64,
    pub u_max: f64,
    pub v_max: f64,
}

impl UvRect {
    pub fn new(u_min: f64, v_min: f64, u_max: f64, v_max: f64) -> Self {
        Self { u_min, v_min, u_max, v_max }
    }

    #[inline]
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }

    pub fn area(&self) -> f64 {
        (self.u_max - self.u_min) * (self.v_max - self.v_min)
    }
}

/// Ground-truth scene: bright rectangles on an otherwise uniform facade.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub frame: CameraFrame,
    pub facade: FacadePlane,
    pub bright_rects: Vec<UvRect>,
    pub bright_level: f64,
    pub background_level: f64,
    pub cap: f64,
    pub fov_deg: f64,
}

impl SyntheticScene {
    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.background_level >= 0.0)
            || !(self.background_level < self.bright_level)
            || !(self.bright_level <= self.cap)
        {
            return Err(OracleError::InvalidLevels {
                background: self.background_level,
                bright: self.bright_level,
                cap: self.cap,
            });
        }
        for rect in &self.bright_rects {
            if rect.u_min < 0.0
                || rect.v_min < 0.0
                || rect.u_max > self.facade.width
                || rect.v_max > self.facade.height
                || rect.u_min >= rect.u_max
                || rect.v_min >= rect.v_max
            {
                return Err(OracleError::RectOutOfBounds(*rect));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    InvalidLevels { background: f64, bright: f64, cap: f64 },
    RectOutOfBounds(UvRect),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidLevels { background, bright, cap } => write!(
                f,
                "levels must satisfy 0 <= background ({background}) < bright ({bright}) <= cap ({cap})"
            ),
            Self::RectOutOfBounds(rect) => {
                write!(f, "bright rect {rect:?} outside facade bounds")
            }
        }
    }
}

impl core::error::Error for OracleError {}

#[inline]
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Fisheye ray for an image point, from the defining equidistant model:
/// the hemisphere point at polar angle rho·fov/2 and azimuth (du, dv).
fn fisheye_ray(u: f64, v: f64, half_fov: f64, frame: &CameraFrame) -> Option<[f64; 3]> {
    let du = 2.0 * u - 1.0;
    let dv = 2.0 * v - 1.0;
    let r2 = du * du + dv * dv;
    if r2 > 1.0 {
        return None;
    }
    let rho = math::sqrt(r2);
    // cos/sin of the azimuth straight from the offsets
    let (ca, sa) = if rho == 0.0 { (1.0, 0.0) } else { (du / rho, dv / rho) };
    let angle = rho * half_fov;
    let sp = math::sin(angle);
    let cp = math::cos(angle);
    let r = [frame.right.x, frame.right.y, frame.right.z];
    let up = [frame.up.x, frame.up.y, frame.up.z];
    let fw = [frame.forward.x, frame.forward.y, frame.forward.z];
    Some([
        sp * ca * r[0] + sp * sa * up[0] + cp * fw[0],
        sp * ca * r[1] + sp * sa * up[1] + cp * fw[1],
        sp * ca * r[2] + sp * sa * up[2] + cp * fw[2],
    ])
}

/// Facade-local coordinates where the ray meets the facade plane, if it
/// does so in front of the eye.
fn facade_hit(scene: &SyntheticScene, dir: [f64; 3]) -> Option<(f64, f64)> {
    let ua = [scene.facade.u_axis.x, scene.facade.u_axis.y, scene.facade.u_axis.z];
    let va = [scene.facade.v_axis.x, scene.facade.v_axis.y, scene.facade.v_axis.z];
    let n = [
        ua[1] * va[2] - ua[2] * va[1],
        ua[2] * va[0] - ua[0] * va[2],
        ua[0] * va[1] - ua[1] * va[0],
    ];
    let denom = dot(dir, n);
    if math::abs(denom) <= 1e-12 {
        return None;
    }
    let origin = [scene.frame.origin.x, scene.frame.origin.y, scene.frame.origin.z];
    let corner = [scene.facade.corner.x, scene.facade.corner.y, scene.facade.corner.z];
    let to_plane = [corner[0] - origin[0], corner[1] - origin[1], corner[2] - origin[2]];
    let t = dot(to_plane, n) / denom;
    if t <= 1e-9 {
        return None;
    }
    let rel = [
        origin[0] + t * dir[0] - corner[0],
        origin[1] + t * dir[1] - corner[1],
        origin[2] + t * dir[2] - corner[2],
    ];
    Some((dot(rel, ua), dot(rel, va)))
}

/// Renders the scene through an equidistant fisheye at the given
/// resolution.
///
/// Pixel centers outside the image circle render as 0; center rays that
/// hit a bright rectangle render at the calibrated bright value and
/// everything else at the background value.
pub fn render_synthetic(
    scene: &SyntheticScene,
    width: u32,
    height: u32,
) -> Result<LuminanceImage, OracleError> {
    scene.validate()?;
    let bright = math::round(scene.bright_level / scene.cap * 255.0) as u8;
    let background = math::round(scene.background_level / scene.cap * 255.0) as u8;
    let half_fov = scene.fov_deg * PI / 360.0;
    let mut pixels = Vec::with_capacity((width as usize) * (height as usize));
    for row in 0..height {
        // raster row 0 is the top of the image; v runs upward
        let v = 1.0 - (row as f64 + 0.5) / height as f64;
        for col in 0..width {
            let u = (col as f64 + 0.5) / width as f64;
            let value = match fisheye_ray(u, v, half_fov, &scene.frame) {
                None => 0,
                Some(dir) => match facade_hit(scene, dir) {
                    Some((hu, hv)) if scene.bright_rects.iter().any(|r| r.contains(hu, hv)) => {
                        bright
                    }
                    _ => background,
                },
            };
            pixels.push(value);
        }
    }
    LuminanceImage::new(width, height, pixels, scene.cap)
        .map_err(|_| OracleError::InvalidLevels {
            background: scene.background_level,
            bright: scene.bright_level,
            cap: scene.cap,
        })
}

/// One standard-normal sample: Box-Muller (cosine branch) over two
/// 53-bit uniforms, the first shifted into (0, 1] so the log is finite.
fn standard_normal(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / 9007199254740992.0; // 2^-53
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * SCALE;
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * PI * u2)
}

/// Adds zero-mean Gaussian noise, clamped to the 8-bit range.
///
/// The generator is ChaCha8 seeded with `seed`; samples are drawn in
/// row-major pixel order, so identical inputs give identical outputs
/// regardless of how callers schedule the surrounding work.
pub fn add_noise(img: &LuminanceImage, stddev: f64, seed: u64) -> LuminanceImage {
    assert!(stddev >= 0.0, "noise stddev must be non-negative");
    if stddev == 0.0 {
        return img.clone();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pixels = img
        .pixels
        .iter()
        .map(|&p| {
            let noisy = p as f64 + stddev * standard_normal(&mut rng);
            math::round(noisy).clamp(0.0, 255.0) as u8
        })
        .collect();
    LuminanceImage {
        width: img.width,
        height: img.height,
        pixels,
        luminance_cap: img.luminance_cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{build_frame, intersect_plane, pixel_to_direction, Point3, Vec3, ViewSpec};
    use crate::raster::binarize;

    fn office_facade() -> FacadePlane {
        FacadePlane::new(
            Point3::new(-5.0, 3.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            10.0,
            3.7,
        )
        .unwrap()
    }

    fn office_scene(rects: Vec<UvRect>) -> SyntheticScene {
        let frame = build_frame(&ViewSpec::new(
            Point3::new(0.0, 0.0, 1.85),
            Point3::new(0.0, 3.0, 1.85),
        ))
        .unwrap();
        SyntheticScene {
            frame,
            facade: office_facade(),
            bright_rects: rects,
            bright_level: 2600.0,
            background_level: 500.0,
            cap: 3000.0,
            fov_deg: 180.0,
        }
    }

    #[test]
    fn empty_scene_renders_background_inside_circle() {
        let scene = office_scene(Vec::new());
        let img = render_synthetic(&scene, 41, 41).unwrap();
        let background = (500.0f64 / 3000.0 * 255.0).round() as u8;
        for row in 0..41u32 {
            for col in 0..41u32 {
                let du = 2.0 * ((col as f64 + 0.5) / 41.0) - 1.0;
                let dv = 2.0 * (1.0 - (row as f64 + 0.5) / 41.0) - 1.0;
                let expected = if du * du + dv * dv > 1.0 { 0 } else { background };
                assert_eq!(img.pixel(row, col), expected, "pixel ({row}, {col})");
            }
        }
    }

    #[test]
    fn full_facade_rect_brightens_every_facade_hit() {
        // facade large enough to catch every forward-hemisphere ray that
        // can reach the plane
        let facade = FacadePlane::new(
            Point3::new(-5e5, 3.0, -5e5),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
            1e6,
            1e6,
        )
        .unwrap();
        let frame = build_frame(&ViewSpec::new(
            Point3::new(0.0, 0.0, 1.85),
            Point3::new(0.0, 3.0, 1.85),
        ))
        .unwrap();
        let scene = SyntheticScene {
            frame,
            facade,
            bright_rects: vec![UvRect::new(0.0, 0.0, 1e6, 1e6)],
            bright_level: 2600.0,
            background_level: 500.0,
            cap: 3000.0,
            fov_deg: 180.0,
        };
        let img = render_synthetic(&scene, 33, 33).unwrap();
        let bright = (2600.0f64 / 3000.0 * 255.0).round() as u8;
        for row in 0..33u32 {
            for col in 0..33u32 {
                let u = (col as f64 + 0.5) / 33.0;
                let v = 1.0 - (row as f64 + 0.5) / 33.0;
                // cross-check with the projection pipeline's own ray cast
                if let Some(dir) = pixel_to_direction(u, v, &scene.frame, 180.0) {
                    if intersect_plane(scene.frame.origin, dir, scene.facade.corner, scene.facade.normal())
                        .is_some()
                    {
                        assert_eq!(img.pixel(row, col), bright, "pixel ({row}, {col})");
                    }
                }
            }
        }
    }

    #[test]
    fn binarized_render_matches_projection_ray_cast() {
        let rect = UvRect::new(3.5, 1.05, 6.5, 2.65);
        let scene = office_scene(vec![rect]);
        let (w, h) = (160u32, 160u32);
        let img = render_synthetic(&scene, w, h).unwrap();
        let mask = binarize(&img, 2000.0).unwrap();

        // expected flags via the projection module (the other code path)
        let mut expected = vec![false; (w * h) as usize];
        for row in 0..h {
            for col in 0..w {
                let u = (col as f64 + 0.5) / w as f64;
                let v = 1.0 - (row as f64 + 0.5) / h as f64;
                if let Some(dir) = pixel_to_direction(u, v, &scene.frame, 180.0) {
                    if let Some(p) =
                        intersect_plane(scene.frame.origin, dir, scene.facade.corner, scene.facade.normal())
                    {
                        let (hu, hv) = scene.facade.plane_uv(p);
                        expected[(row * w + col) as usize] = rect.contains(hu, hv);
                    }
                }
            }
        }

        let is_expected_boundary = |row: i64, col: i64| -> bool {
            let at = |r: i64, c: i64| {
                r >= 0 && c >= 0 && r < h as i64 && c < w as i64 && expected[(r * w as i64 + c) as usize]
            };
            let own = at(row, col);
            for dr in -1..=1i64 {
                for dc in -1..=1i64 {
                    if at(row + dr, col + dc) != own {
                        return true;
                    }
                }
            }
            false
        };

        let mut mismatches = 0usize;
        for row in 0..h as i64 {
            for col in 0..w as i64 {
                let idx = (row * w as i64 + col) as usize;
                if mask.flags[idx] != expected[idx] {
                    mismatches += 1;
                    assert!(
                        is_expected_boundary(row, col),
                        "interior mismatch at ({row}, {col})"
                    );
                }
            }
        }
        // discrepancies are allowed only in the one-pixel rim band
        assert!(mismatches <= 2 * (w + h) as usize, "{mismatches} mismatches");
    }

    #[test]
    fn flagged_count_scales_with_resolution_squared() {
        let rect = UvRect::new(3.5, 1.05, 6.5, 2.65); // 4.8 m² of 37 m²
        let scene = office_scene(vec![rect]);
        let count = |n: u32| -> f64 {
            let img = render_synthetic(&scene, n, n).unwrap();
            binarize(&img, 2000.0).unwrap().count_flagged() as f64
        };
        let ratio = count(400) / count(200);
        assert!((ratio - 4.0).abs() / 4.0 <= 0.05, "ratio {ratio}");
    }

    #[test]
    fn zero_stddev_is_identity() {
        let scene = office_scene(Vec::new());
        let img = render_synthetic(&scene, 20, 20).unwrap();
        assert_eq!(add_noise(&img, 0.0, 1234), img);
    }

    #[test]
    fn same_seed_reproduces_noise() {
        let img = LuminanceImage::filled(50, 50, 100, 3000.0).unwrap();
        let a = add_noise(&img, 10.0, 42);
        let b = add_noise(&img, 10.0, 42);
        assert_eq!(a, b);
        let c = add_noise(&img, 10.0, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_preserves_mean_of_constant_image() {
        let img = LuminanceImage::filled(400, 400, 128, 3000.0).unwrap();
        let noisy = add_noise(&img, 10.0, 7);
        let mean = noisy.pixels.iter().map(|&p| p as f64).sum::<f64>() / noisy.pixels.len() as f64;
        assert!((mean - 128.0).abs() <= 0.5, "mean {mean}");
    }

    #[test]
    fn invalid_levels_rejected() {
        let mut scene = office_scene(Vec::new());
        scene.bright_level = 3200.0;
        assert!(matches!(
            render_synthetic(&scene, 8, 8),
            Err(OracleError::InvalidLevels { .. })
        ));
        let mut scene = office_scene(Vec::new());
        scene.background_level = 2700.0;
        assert!(render_synthetic(&scene, 8, 8).is_err());
    }

    #[test]
    fn out_of_bounds_rect_rejected() {
        let scene = office_scene(vec![UvRect::new(8.0, 3.0, 11.0, 3.5)]);
        assert!(matches!(
            render_synthetic(&scene, 8, 8),
            Err(OracleError::RectOutOfBounds(_))
        ));
    }
}
