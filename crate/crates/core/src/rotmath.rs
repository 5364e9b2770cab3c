//! Rotation and sphere geometry.
//!
//! Conventions: right-handed coordinates with +Y up. Positive angles follow the
//! right-hand rule, so a +90° yaw carries +X to −Z. Orientations are unit
//! quaternions stored as `(w, x, y, z)`; `compose(a, b)` applies `b` first.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A free 3-vector (positions, velocities, offsets).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
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

/// A unit-length 3-vector: a point on the unit sphere or a direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct UnitVec3(Vec3);

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3(Vec3::new(1.0, 0.0, 0.0));
    pub const Y: UnitVec3 = UnitVec3(Vec3::new(0.0, 1.0, 0.0));
    pub const Z: UnitVec3 = UnitVec3(Vec3::new(0.0, 0.0, 1.0));

    /// Normalizes `v`. Returns `None` for zero or non-finite input.
    pub fn try_new(v: Vec3) -> Option<Self> {
        let n = v.norm();
        if n.is_finite() && n > 0.0 {
            Some(UnitVec3(v * (1.0 / n)).renormalized())
        } else {
            None
        }
    }

    /// Normalizes `(x, y, z)`; panics on the zero vector.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self::try_new(Vec3::new(x, y, z)).expect("cannot normalize a zero vector")
    }

    fn renormalized(self) -> Self {
        let n = self.0.norm();
        if n == 1.0 {
            self
        } else {
            UnitVec3(self.0 * (1.0 / n))
        }
    }

    pub fn x(self) -> f64 {
        self.0.x
    }
    pub fn y(self) -> f64 {
        self.0.y
    }
    pub fn z(self) -> f64 {
        self.0.z
    }

    pub fn as_vec(self) -> Vec3 {
        self.0
    }

    pub fn dot(self, o: UnitVec3) -> f64 {
        self.0.dot(o.0)
    }

    pub fn to_array(self) -> [f64; 3] {
        self.0.to_array()
    }

    /// Picks the member of the antipodal pair `{v, −v}` with `y > 0`, falling
    /// back to `x > 0` and then `z ≥ 0` when earlier components vanish.
    pub fn canonical_antipode(self) -> UnitVec3 {
        let v = self.0;
        let flip = if v.y != 0.0 {
            v.y < 0.0
        } else if v.x != 0.0 {
            v.x < 0.0
        } else {
            v.z < 0.0
        };
        if flip {
            -self
        } else {
            self
        }
    }
}

impl Neg for UnitVec3 {
    type Output = UnitVec3;
    fn neg(self) -> UnitVec3 {
        UnitVec3(-self.0)
    }
}

impl From<UnitVec3> for [f64; 3] {
    fn from(v: UnitVec3) -> Self {
        v.to_array()
    }
}

impl TryFrom<[f64; 3]> for UnitVec3 {
    type Error = &'static str;
    fn try_from(a: [f64; 3]) -> Result<Self, Self::Error> {
        UnitVec3::try_new(Vec3::new(a[0], a[1], a[2])).ok_or("zero-length direction")
    }
}

impl fmt::Display for UnitVec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = f.precision().unwrap_or(6);
        write!(f, "({:.p$}, {:.p$}, {:.p$})", self.0.x, self.0.y, self.0.z)
    }
}

/// A rotation in SO(3), stored as a unit quaternion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for Orientation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Orientation {
    pub const IDENTITY: Orientation = Orientation {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Builds a normalized quaternion from raw components.
    ///
    /// Panics if all components are zero.
    pub fn from_wxyz(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        assert!(n > 0.0 && n.is_finite(), "degenerate quaternion");
        Orientation {
            w: w / n,
            x: x / n,
            y: y / n,
            z: z / n,
        }
    }

    pub fn from_axis_angle(axis: UnitVec3, angle: f64) -> Self {
        let (s, c) = (0.5 * angle).sin_cos();
        Self::from_wxyz(c, axis.x() * s, axis.y() * s, axis.z() * s)
    }

    /// Rotation about the vertical axis.
    pub fn yaw(angle: f64) -> Self {
        Self::from_axis_angle(UnitVec3::Y, angle)
    }

    pub fn about_x(angle: f64) -> Self {
        Self::from_axis_angle(UnitVec3::X, angle)
    }

    pub fn about_z(angle: f64) -> Self {
        Self::from_axis_angle(UnitVec3::Z, angle)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn inverse(self) -> Self {
        Orientation {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    pub fn dot(self, o: Orientation) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    /// The same rotation with all four components negated.
    pub fn negated(self) -> Self {
        Orientation {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Returns `self` or its negation, whichever lies in the hemisphere of `reference`.
    pub fn aligned_to(self, reference: Orientation) -> Self {
        if self.dot(reference) < 0.0 {
            self.negated()
        } else {
            self
        }
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w.abs())
    }

    /// Angle of the relative rotation between two orientations, in `[0, π]`.
    pub fn angle_to(self, other: Orientation) -> f64 {
        compose(self, other.inverse()).angle()
    }

    pub fn rotate_vec(self, v: Vec3) -> Vec3 {
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v) * 2.0;
        v + t * self.w + u.cross(t)
    }

    /// Row-major 3×3 rotation matrix.
    pub fn to_matrix(self) -> [[f64; 3]; 3] {
        let Orientation { w, x, y, z } = self;
        [
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]
    }

    /// Intrinsic Euler angles (radians) for the given axis order, such that
    /// `from_euler(order, angles)` reproduces `self`.
    ///
    /// Only Tait-Bryan orders (three distinct axes) are supported.
    pub fn to_euler(self, order: [Axis; 3]) -> [f64; 3] {
        let [i, j, k] = order.map(Axis::index);
        assert!(i != j && j != k && i != k, "Euler order must use three distinct axes");
        let m = self.to_matrix();
        // Cyclic orders (XYZ, YZX, ZXY) are even permutations.
        let even = (j + 3 - i) % 3 == 1;
        let s = if even { 1.0 } else { -1.0 };
        let cos_b = m[i][i].hypot(m[i][j]);
        let b = (s * m[i][k]).atan2(cos_b);
        let a = (-s * m[j][k]).atan2(m[k][k]);
        let c = (-s * m[i][j]).atan2(m[i][i]);
        [a, b, c]
    }

    /// Composes elementary rotations `R_order[0](a) R_order[1](b) R_order[2](c)`.
    pub fn from_euler(order: [Axis; 3], angles: [f64; 3]) -> Self {
        order
            .iter()
            .zip(angles)
            .fold(Orientation::IDENTITY, |acc, (axis, angle)| {
                compose(acc, Orientation::from_axis_angle(axis.unit(), angle))
            })
    }
}

impl Mul for Orientation {
    type Output = Orientation;
    fn mul(self, rhs: Orientation) -> Orientation {
        compose(self, rhs)
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = f.precision().unwrap_or(6);
        write!(
            f,
            "[{:.p$}, {:.p$}, {:.p$}, {:.p$}]",
            self.w, self.x, self.y, self.z
        )
    }
}

/// A coordinate axis, used for Euler channel orders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn unit(self) -> UnitVec3 {
        match self {
            Axis::X => UnitVec3::X,
            Axis::Y => UnitVec3::Y,
            Axis::Z => UnitVec3::Z,
        }
    }
}

/// Rotation `angle` about a unit `axis`, angle in `(−π, π]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    pub axis: UnitVec3,
    pub angle: f64,
}

impl AxisAngle {
    pub fn new(axis: UnitVec3, angle: f64) -> Self {
        AxisAngle {
            axis,
            angle: wrap_angle(angle),
        }
    }

    pub fn to_orientation(self) -> Orientation {
        Orientation::from_axis_angle(self.axis, self.angle)
    }

    /// Decomposes an orientation. The identity maps to a zero turn about +Y.
    pub fn from_orientation(q: Orientation) -> Self {
        let q = if q.w < 0.0 { q.negated() } else { q };
        let v = Vec3::new(q.x, q.y, q.z);
        match UnitVec3::try_new(v) {
            Some(axis) => AxisAngle::new(axis, 2.0 * v.norm().atan2(q.w)),
            None => AxisAngle {
                axis: UnitVec3::Y,
                angle: 0.0,
            },
        }
    }
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Returns the rotation that applies `b` first, then `a`.
pub fn compose(a: Orientation, b: Orientation) -> Orientation {
    Orientation::from_wxyz(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

pub fn rotate(g: Orientation, v: UnitVec3) -> UnitVec3 {
    UnitVec3::try_new(g.rotate_vec(v.as_vec())).expect("rotation preserves length")
}

/// Great-circle distance in `[0, π]`, via `atan2(|a×b|, a·b)`.
pub fn geodesic_distance(a: UnitVec3, b: UnitVec3) -> f64 {
    let (a, b) = (a.as_vec(), b.as_vec());
    a.cross(b).norm().atan2(a.dot(b))
}

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653; // π (3 − √5)

/// Spherical Fibonacci lattice with `n` points, ordered from +Y towards −Y.
///
/// Panics if `n == 0`.
pub fn sample_sphere(n: usize) -> Vec<UnitVec3> {
    assert!(n >= 1, "sample count must be at least 1");
    let nf = n as f64;
    (0..n)
        .map(|i| {
            let y = 1.0 - (2.0 * i as f64 + 1.0) / nf;
            let rho = (1.0 - y * y).max(0.0).sqrt();
            let (s, c) = (GOLDEN_ANGLE * i as f64).sin_cos();
            UnitVec3::new(rho * c, y, rho * s)
        })
        .collect()
}

/// The smallest rotation carrying `from` onto `to`.
///
/// Antipodal inputs get a half turn about `from × c`, where `c` is the first
/// of X, Z, Y that is not parallel to `from`.
pub fn minimal_rotation(from: UnitVec3, to: UnitVec3) -> Orientation {
    let (f, t) = (from.as_vec(), to.as_vec());
    let cross = f.cross(t);
    let sin = cross.norm();
    let cos = f.dot(t);
    if sin <= 1e-15 {
        if cos > 0.0 {
            return Orientation::IDENTITY;
        }
        let axis = [UnitVec3::X, UnitVec3::Z, UnitVec3::Y]
            .into_iter()
            .find_map(|c| {
                let a = f.cross(c.as_vec());
                (a.norm() > 1e-6).then(|| UnitVec3::try_new(a)).flatten()
            })
            .expect("some coordinate axis is not parallel");
        return Orientation::from_axis_angle(axis, PI);
    }
    let axis = UnitVec3::try_new(cross).expect("non-parallel inputs");
    Orientation::from_axis_angle(axis, sin.atan2(cos))
}
