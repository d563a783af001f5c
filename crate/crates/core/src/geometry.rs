//! Oriented rectangles in the ground plane.
//!
//! Yaw is counter-clockwise positive with zero along +x and is always kept
//! in `(-π, π]`. Corners are ordered front-left, front-right, rear-right,
//! rear-left, where "front" points along the heading.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Intersections smaller than this (m²) are clipping slivers and count as zero.
pub const IOU_AREA_EPSILON: f64 = 1e-12;

/// A 2D vector: a position in meters or a velocity in meters per second.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Rotates counter-clockwise by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(theta: f64) -> Result<f64> {
    if !theta.is_finite() {
        return Err(Error::InvalidInput(format!("angle {theta} is not finite")));
    }
    Ok(wrap_finite(theta))
}

fn wrap_finite(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// An oriented rectangle in bird's-eye view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxBev {
    center: Vec2,
    length: f64,
    width: f64,
    yaw: f64,
}

impl BoxBev {
    /// Builds a box, wrapping `yaw` into `(-π, π]`.
    pub fn new(center: Vec2, length: f64, width: f64, yaw: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidInput("box center is not finite".into()));
        }
        if !(length.is_finite() && length > 0.0) || !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidInput(format!(
                "box extents must be positive, got length {length} width {width}"
            )));
        }
        Ok(BoxBev {
            center,
            length,
            width,
            yaw: wrap_angle(yaw)?,
        })
    }

    /// `[cx, cy, length, width, yaw]`, the on-disk layout.
    pub fn from_array(a: [f64; 5]) -> Result<Self> {
        BoxBev::new(Vec2::new(a[0], a[1]), a[2], a[3], a[4])
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.center.x, self.center.y, self.length, self.width, self.yaw]
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn area(&self) -> f64 {
        self.length * self.width
    }

    pub fn with_center(self, center: Vec2) -> Result<Self> {
        BoxBev::new(center, self.length, self.width, self.yaw)
    }

    pub fn with_yaw(self, yaw: f64) -> Result<Self> {
        BoxBev::new(self.center, self.length, self.width, yaw)
    }

    pub fn translated(self, offset: Vec2) -> Result<Self> {
        self.with_center(self.center + offset)
    }

    /// Expresses a world point in the box frame (x along heading).
    fn to_local(self, p: Vec2) -> Vec2 {
        (p - self.center).rotated(-self.yaw)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        let l = self.to_local(p);
        l.x.abs() <= self.length / 2.0 && l.y.abs() <= self.width / 2.0
    }

    /// Closest point of the filled rectangle to `p` (`p` itself when inside).
    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        let l = self.to_local(p);
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        let clamped = Vec2::new(l.x.clamp(-hl, hl), l.y.clamp(-hw, hw));
        clamped.rotated(self.yaw) + self.center
    }
}

/// Corners in semantic order: front-left, front-right, rear-right, rear-left.
pub fn box_corners(b: &BoxBev) -> [Vec2; 4] {
    let hl = b.length / 2.0;
    let hw = b.width / 2.0;
    [
        Vec2::new(hl, hw),
        Vec2::new(hl, -hw),
        Vec2::new(-hl, -hw),
        Vec2::new(-hl, hw),
    ]
    .map(|v| v.rotated(b.yaw) + b.center)
}

pub fn center_distance(a: &BoxBev, b: &BoxBev) -> f64 {
    a.center.distance(b.center)
}

/// Mean displacement of the four corners, paired by semantic index.
///
/// Corners are never re-paired to the closest permutation, so a heading
/// error always moves them.
pub fn corner_distance(a: &BoxBev, b: &BoxBev) -> f64 {
    let ca = box_corners(a);
    let cb = box_corners(b);
    ca.iter().zip(&cb).map(|(p, q)| p.distance(*q)).sum::<f64>() / 4.0
}

/// Rotated-rectangle IoU via convex clipping and the shoelace formula.
pub fn bev_iou(a: &BoxBev, b: &BoxBev) -> f64 {
    // Semantic order runs clockwise; clipping wants counter-clockwise.
    let mut subject: Vec<Vec2> = box_corners(a).into_iter().rev().collect();
    let clip: Vec<Vec2> = box_corners(b).into_iter().rev().collect();

    for i in 0..clip.len() {
        if subject.is_empty() {
            break;
        }
        let e0 = clip[i];
        let e1 = clip[(i + 1) % clip.len()];
        subject = clip_half_plane(&subject, e0, e1);
    }

    let inter = polygon_area(&subject);
    if inter < IOU_AREA_EPSILON {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Keeps the part of `poly` on the left of the directed edge `e0 -> e1`.
fn clip_half_plane(poly: &[Vec2], e0: Vec2, e1: Vec2) -> Vec<Vec2> {
    let edge = e1 - e0;
    let side = |p: Vec2| edge.cross(p - e0);
    let mut out = Vec::with_capacity(poly.len() + 2);
    for (k, &cur) in poly.iter().enumerate() {
        let prev = poly[(k + poly.len() - 1) % poly.len()];
        let (sc, sp) = (side(cur), side(prev));
        if sc >= 0.0 {
            if sp < 0.0 {
                out.push(segment_intersection(prev, cur, sp, sc));
            }
            out.push(cur);
        } else if sp >= 0.0 {
            out.push(segment_intersection(prev, cur, sp, sc));
        }
    }
    out
}

fn segment_intersection(p: Vec2, q: Vec2, sp: f64, sq: f64) -> Vec2 {
    let t = sp / (sp - sq);
    p + (q - p) * t
}

fn polygon_area(poly: &[Vec2]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let twice: f64 = poly
        .iter()
        .zip(poly.iter().cycle().skip(1))
        .map(|(p, q)| p.cross(*q))
        .sum();
    (twice / 2.0).abs()
}

/// Distance from `origin` to the nearest point of the box; zero inside.
pub fn nearest_surface_distance(b: &BoxBev, origin: Vec2) -> f64 {
    let l = b.to_local(origin);
    let dx = (l.x.abs() - b.length / 2.0).max(0.0);
    let dy = (l.y.abs() - b.width / 2.0).max(0.0);
    dx.hypot(dy)
}

/// `1 - |Δψ|/π` with `Δψ` taken on the circle.
pub fn heading_similarity(psi_a: f64, psi_b: f64) -> f64 {
    let d = wrap_finite(psi_a - psi_b).abs();
    (1.0 - d.min(TAU - d) / PI).clamp(0.0, 1.0)
}
