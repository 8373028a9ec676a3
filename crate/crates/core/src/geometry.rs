//! Points, rectangles and axis-aligned building boxes.

use core::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 0.0 {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    /// Same point with the z component replaced.
    pub fn with_z(self, z: f64) -> Vec3 {
        Vec3::new(self.x, self.y, z)
    }

    /// Elevation and azimuth of a direction vector.
    ///
    /// Elevation is measured from the horizontal plane, azimuth from the +y
    /// axis towards +x, so the direction is
    /// `(cos el * sin az, cos el * cos az, sin el)`.
    pub fn to_angles(self) -> (f64, f64) {
        let n = self.norm();
        let el = libm::asin((self.z / n).clamp(-1.0, 1.0));
        let az = libm::atan2(self.x, self.y);
        (el, az)
    }

    /// Inverse of [`Vec3::to_angles`].
    pub fn from_angles(elevation: f64, azimuth: f64) -> Vec3 {
        let c = libm::cos(elevation);
        Vec3::new(
            c * libm::sin(azimuth),
            c * libm::cos(azimuth),
            libm::sin(elevation),
        )
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned rectangle in the ground plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// Closed containment test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Strict (open) containment test.
    pub fn contains_strictly(&self, x: f64, y: f64) -> bool {
        x > self.x_min && x < self.x_max && y > self.y_min && y < self.y_max
    }
}

/// Which face of a building a wall is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallSide {
    XMin,
    XMax,
    YMin,
    YMax,
}

/// A vertical wall: the plane `axis = offset`, bounded in the other ground
/// axis by `[lo, hi]` and in z by `[0, top]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wall {
    pub side: WallSide,
    pub offset: f64,
    pub lo: f64,
    pub hi: f64,
    pub top: f64,
}

impl Wall {
    /// Signed distance of a point from the wall plane, positive on the
    /// exterior side.
    pub fn exterior_distance(&self, p: Vec3) -> f64 {
        match self.side {
            WallSide::XMin => self.offset - p.x,
            WallSide::XMax => p.x - self.offset,
            WallSide::YMin => self.offset - p.y,
            WallSide::YMax => p.y - self.offset,
        }
    }

    /// Mirror image of a point across the wall plane.
    pub fn mirror(&self, p: Vec3) -> Vec3 {
        match self.side {
            WallSide::XMin | WallSide::XMax => Vec3::new(2.0 * self.offset - p.x, p.y, p.z),
            WallSide::YMin | WallSide::YMax => Vec3::new(p.x, 2.0 * self.offset - p.y, p.z),
        }
    }

    /// Intersection of segment `a -> b` with the wall plane, if the segment
    /// crosses it and the crossing lies on the wall face (closed bounds).
    pub fn hit_point(&self, a: Vec3, b: Vec3) -> Option<Vec3> {
        let (pa, pb) = match self.side {
            WallSide::XMin | WallSide::XMax => (a.x, b.x),
            WallSide::YMin | WallSide::YMax => (a.y, b.y),
        };
        let denom = pb - pa;
        if denom == 0.0 {
            return None;
        }
        let t = (self.offset - pa) / denom;
        if !(0.0..=1.0).contains(&t) {
            return None;
        }
        let mut p = a + (b - a) * t;
        let along = match self.side {
            WallSide::XMin | WallSide::XMax => {
                p.x = self.offset;
                p.y
            }
            WallSide::YMin | WallSide::YMax => {
                p.y = self.offset;
                p.x
            }
        };
        if along < self.lo || along > self.hi || p.z < 0.0 || p.z > self.top {
            return None;
        }
        Some(p)
    }
}

/// A building: rectangular footprint extruded from the ground to `height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Building {
    pub footprint: Rect,
    pub height: f64,
}

impl Building {
    pub const fn new(footprint: Rect, height: f64) -> Self {
        Self { footprint, height }
    }

    pub fn walls(&self) -> [Wall; 4] {
        let f = &self.footprint;
        let top = self.height;
        [
            Wall {
                side: WallSide::XMin,
                offset: f.x_min,
                lo: f.y_min,
                hi: f.y_max,
                top,
            },
            Wall {
                side: WallSide::XMax,
                offset: f.x_max,
                lo: f.y_min,
                hi: f.y_max,
                top,
            },
            Wall {
                side: WallSide::YMin,
                offset: f.y_min,
                lo: f.x_min,
                hi: f.x_max,
                top,
            },
            Wall {
                side: WallSide::YMax,
                offset: f.y_max,
                lo: f.x_min,
                hi: f.x_max,
                top,
            },
        ]
    }

    /// True iff the segment `a -> b` passes through the open interior of the
    /// box. Segments that only touch a face, edge or corner are not blocked.
    pub fn blocks_segment(&self, a: Vec3, b: Vec3) -> bool {
        let f = &self.footprint;
        let d = b - a;
        let mut enter = 0.0f64;
        let mut exit = 1.0f64;
        let slabs = [
            (a.x, d.x, f.x_min, f.x_max),
            (a.y, d.y, f.y_min, f.y_max),
            (a.z, d.z, 0.0, self.height),
        ];
        for (origin, dir, lo, hi) in slabs {
            if dir == 0.0 {
                if !(origin > lo && origin < hi) {
                    return false;
                }
            } else {
                let t1 = (lo - origin) / dir;
                let t2 = (hi - origin) / dir;
                let (near, far) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
                if near > enter {
                    enter = near;
                }
                if far < exit {
                    exit = far;
                }
                if enter >= exit {
                    return false;
                }
            }
        }
        enter < exit
    }
}
