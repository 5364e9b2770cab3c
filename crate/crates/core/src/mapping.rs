//! Yaw extraction through a motion direction.
//!
//! A scheme with motion direction `r` maps an orientation `g` to the
//! representative `g_0 = g_y ∘ g` of its yaw orbit, where `g_y` is the yaw that
//! brings the heading of `r' = g(r)` onto the heading of `r`. The heading of
//! `r'` is undefined exactly when `r'` is vertical, which happens when the
//! orbit-sphere point `g⁻¹(p)`, `p = +Y`, equals `±r`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::rotmath::{compose, geodesic_distance, minimal_rotation, rotate, wrap_angle, AxisAngle, Orientation, UnitVec3, Vec3};

pub const DEFAULT_EPSILON_SING: f64 = 1e-3;

/// The north pole `p`.
pub const POLE: UnitVec3 = UnitVec3::Y;

/// Tangent seed `t` attached at the pole.
pub const TANGENT_SEED: UnitVec3 = UnitVec3::X;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MappingScheme {
    direction: UnitVec3,
    /// Unit heading `(x, z)` that `g_0(r)` is aligned to.
    #[serde(skip)]
    heading: [f64; 2],
    epsilon_sing: f64,
}

impl MappingScheme {
    pub fn new(direction: UnitVec3) -> Self {
        Self::with_epsilon(direction, DEFAULT_EPSILON_SING)
    }

    /// The conventional facing-direction scheme, `r = +X`.
    pub fn facing() -> Self {
        Self::new(UnitVec3::X)
    }

    pub fn with_epsilon(direction: UnitVec3, epsilon_sing: f64) -> Self {
        let (hx, hz) = (direction.x(), direction.z());
        let len = hx.hypot(hz);
        // A vertical r has no heading of its own; align g_0(r) to +X instead.
        let heading = if len > 1e-12 { [hx / len, hz / len] } else { [1.0, 0.0] };
        MappingScheme {
            direction,
            heading,
            epsilon_sing,
        }
    }

    pub fn direction(&self) -> UnitVec3 {
        self.direction
    }

    pub fn epsilon_sing(&self) -> f64 {
        self.epsilon_sing
    }

    /// The two points on the orbit sphere where the scheme degenerates.
    pub fn singular_points(&self) -> [UnitVec3; 2] {
        [self.direction, -self.direction]
    }

    /// Signed yaw `θ ∈ (−π, π]` carrying the heading of `g(r)` onto the
    /// reference heading. Meaningless (but finite) near a singularity.
    pub fn yaw_angle(&self, g: Orientation) -> f64 {
        let rp = g.rotate_vec(self.direction.as_vec());
        let [hx, hz] = self.heading;
        // Y · (r'_h × h) and r'_h · h
        let cross_y = rp.z * hx - rp.x * hz;
        let dot = rp.x * hx + rp.z * hz;
        wrap_angle(cross_y.atan2(dot))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YawDecomposition {
    /// Rotation about +Y.
    pub g_y: AxisAngle,
    pub g_0: Orientation,
    pub sing_distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("orientation is {sing_distance:.3e} rad from a singular point of the mapping")]
pub struct Singularity {
    pub sing_distance: f64,
}

/// The orbit-sphere point `g⁻¹(p)`; constant along a yaw orbit.
pub fn orbit_point(g: Orientation) -> UnitVec3 {
    rotate(g.inverse(), POLE)
}

/// Distance from the orbit-sphere point to the nearer of `±r`, in `[0, π/2]`.
pub fn point_clearance(q: UnitVec3, r: UnitVec3) -> f64 {
    geodesic_distance(r, q).min(geodesic_distance(-r, q))
}

pub fn singularity_distance(g: Orientation, scheme: &MappingScheme) -> f64 {
    point_clearance(orbit_point(g), scheme.direction)
}

fn decompose_with(g: Orientation, theta: f64, sing_distance: f64) -> YawDecomposition {
    YawDecomposition {
        g_y: AxisAngle {
            axis: UnitVec3::Y,
            angle: theta,
        },
        g_0: compose(Orientation::yaw(theta), g),
        sing_distance,
    }
}

/// Splits `g` into its yaw `g_y` and the representative `g_0 = g_y ∘ g`.
pub fn compute_gy(g: Orientation, scheme: &MappingScheme) -> Result<YawDecomposition, Singularity> {
    let sing_distance = singularity_distance(g, scheme);
    if sing_distance < scheme.epsilon_sing {
        return Err(Singularity { sing_distance });
    }
    Ok(decompose_with(g, scheme.yaw_angle(g), sing_distance))
}

/// Per-frame result of [`decompose_sequence`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameYaw {
    pub decomposition: YawDecomposition,
    /// The frame sat within `epsilon_sing` of a singular point and reuses a
    /// neighbouring frame's yaw.
    pub singular: bool,
}

/// Decomposes a sequence of orientations with hold-last-valid handling:
/// singular frames reuse the previous valid yaw. Singular frames before the
/// first valid one take the first valid yaw; if no frame is valid, yaw is 0.
pub fn decompose_sequence(orientations: &[Orientation], scheme: &MappingScheme) -> Vec<FrameYaw> {
    let results: Vec<Result<YawDecomposition, Singularity>> =
        orientations.iter().map(|&g| compute_gy(g, scheme)).collect();
    let first_valid = results
        .iter()
        .find_map(|r| r.as_ref().ok().map(|d| d.g_y.angle))
        .unwrap_or(0.0);
    let mut held = first_valid;
    orientations
        .iter()
        .zip(results)
        .map(|(&g, r)| match r {
            Ok(d) => {
                held = d.g_y.angle;
                FrameYaw {
                    decomposition: d,
                    singular: false,
                }
            }
            Err(Singularity { sing_distance }) => FrameYaw {
                decomposition: decompose_with(g, held, sing_distance),
                singular: true,
            },
        })
        .collect()
}

/// True iff `a` and `b` differ by a rotation about ±Y, up to `tol` radians.
pub fn orbit_equivalent(a: Orientation, b: Orientation, tol: f64) -> bool {
    let d = compose(a, b.inverse());
    geodesic_distance(rotate(d, POLE), POLE) <= tol
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub point: UnitVec3,
    /// `None` marks a singular point.
    pub tangent: Option<UnitVec3>,
}

/// The field value `g_0⁻¹(t)` for the orbit of `g`, or `None` near `±r`.
pub fn tangent_at(g: Orientation, scheme: &MappingScheme) -> Option<UnitVec3> {
    compute_gy(g, scheme)
        .ok()
        .map(|d| rotate(d.g_0.inverse(), TANGENT_SEED))
}

/// Evaluates the unit tangent field induced by `scheme` at each sphere point.
pub fn tangent_field(scheme: &MappingScheme, points: &[UnitVec3]) -> Vec<FieldSample> {
    points
        .iter()
        .map(|&q| {
            // g⁻¹ carries p to q.
            let g = minimal_rotation(POLE, q).inverse();
            FieldSample {
                point: q,
                tangent: tangent_at(g, scheme),
            }
        })
        .collect()
}

/// Points on the circle of geodesic `radius` around `center`, counter-clockwise
/// seen from outside the sphere.
pub fn ring(center: UnitVec3, radius: f64, samples: usize) -> Vec<UnitVec3> {
    let c = center.as_vec();
    let helper = if center.x().abs() < 0.9 { UnitVec3::X } else { UnitVec3::Z };
    let e1 = UnitVec3::try_new(c.cross(helper.as_vec())).expect("helper not parallel");
    let e2 = c.cross(e1.as_vec());
    let (sr, cr) = radius.sin_cos();
    (0..samples)
        .map(|k| {
            let (s, co) = (2.0 * PI * k as f64 / samples as f64).sin_cos();
            let v = c * cr + (e1.as_vec() * co + e2 * s) * sr;
            UnitVec3::try_new(v).expect("ring point")
        })
        .collect()
}

/// Index of the field around `center`: total turning of the tangent along a
/// ring of geodesic `radius`, measured against a frame that is smooth inside
/// the ring, divided by 2π. Returns `None` if a ring point is singular.
pub fn field_index(scheme: &MappingScheme, center: UnitVec3, radius: f64, samples: usize) -> Option<f64> {
    let pts = ring(center, radius, samples);
    let field = tangent_field(scheme, &pts);
    let c = center.as_vec();
    let helper = if center.x().abs() < 0.9 { UnitVec3::X } else { UnitVec3::Z };
    let e1 = c.cross(helper.as_vec());
    let angles: Option<Vec<f64>> = field
        .iter()
        .map(|s| {
            let q = s.point.as_vec();
            let t = s.tangent?.as_vec();
            let u = e1 - q * e1.dot(q);
            let u = u * (1.0 / u.norm());
            let v = q.cross(u);
            Some(t.dot(v).atan2(t.dot(u)))
        })
        .collect();
    let angles = angles?;
    let mut total = 0.0;
    for k in 0..angles.len() {
        let next = angles[(k + 1) % angles.len()];
        total += wrap_angle(next - angles[k]);
    }
    Some(total / (2.0 * PI))
}

/// Horizontal component `(x, 0, z)` of a vector.
pub fn horizontal(v: Vec3) -> Vec3 {
    Vec3::new(v.x, 0.0, v.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn same_rotation(a: Orientation, b: Orientation, tol: f64) -> bool {
        a.to_array()
            .iter()
            .zip(b.to_array())
            .all(|(x, y)| (x - y).abs() < tol)
            || a.to_array()
                .iter()
                .zip(b.negated().to_array())
                .all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn identity_is_already_aligned() {
        let d = compute_gy(Orientation::IDENTITY, &MappingScheme::facing()).unwrap();
        assert_eq!(d.g_y.angle, 0.0);
        assert_eq!(d.g_y.axis, UnitVec3::Y);
        assert!(same_rotation(d.g_0, Orientation::IDENTITY, 1e-15));
    }

    #[test]
    fn pure_yaw_is_cancelled() {
        let s = MappingScheme::facing();
        for k in -12..=12 {
            let phi = 0.26 * k as f64;
            let d = compute_gy(Orientation::yaw(phi), &s).unwrap();
            assert!(wrap_angle(d.g_y.angle + phi).abs() < 1e-12, "{phi}");
            assert!(same_rotation(d.g_0, Orientation::IDENTITY, 1e-12));
        }
    }

    #[test]
    fn roll_about_z_keeps_heading() {
        let g = Orientation::about_z(FRAC_PI_4);
        let d = compute_gy(g, &MappingScheme::facing()).unwrap();
        // Oracle: the planes with normals Y×r and Y×r' coincide, so the
        // dihedral angle between them is zero.
        let r = UnitVec3::X.as_vec();
        let rp = g.rotate_vec(r);
        let n1 = UnitVec3::Y.as_vec().cross(r);
        let n2 = UnitVec3::Y.as_vec().cross(rp);
        let dihedral = (n1.dot(n2) / (n1.norm() * n2.norm())).clamp(-1.0, 1.0).acos();
        assert!(dihedral.abs() < 1e-12);
        assert!(d.g_y.angle.abs() < 1e-12);
        assert!(same_rotation(d.g_0, g, 1e-12));
    }

    #[test]
    fn quarter_roll_is_singular() {
        let g = Orientation::about_z(FRAC_PI_2);
        let err = compute_gy(g, &MappingScheme::facing()).unwrap_err();
        assert!(err.sing_distance < 1e-12);
    }

    #[test]
    fn singularity_distance_cases() {
        let s = MappingScheme::facing();
        assert!((singularity_distance(Orientation::IDENTITY, &s) - FRAC_PI_2).abs() < 1e-15);
        assert!(singularity_distance(Orientation::about_z(FRAC_PI_2), &s) < 1e-12);
        let d = singularity_distance(Orientation::about_z(PI / 6.0), &s);
        assert!((d - FRAC_PI_3).abs() < 1e-12);
        let g = Orientation::from_wxyz(0.3, 0.1, -0.5, 0.8);
        let dec = compute_gy(g, &s).unwrap();
        assert_eq!(dec.sing_distance, singularity_distance(g, &s));
    }

    #[test]
    fn heading_alignment_for_oblique_direction() {
        let r = UnitVec3::new(0.3, 0.5, -0.8);
        let s = MappingScheme::new(r);
        let g = Orientation::from_wxyz(0.7, 0.2, 0.4, -0.1);
        let d = compute_gy(g, &s).unwrap();
        let rh = horizontal(r.as_vec());
        let ah = horizontal(d.g_0.rotate_vec(r.as_vec()));
        assert!(rh.cross(ah).norm() < 1e-12 * ah.norm().max(1.0));
        assert!(rh.dot(ah) > 0.0);
    }

    #[test]
    fn vertical_direction_uses_x_heading() {
        let s = MappingScheme::new(UnitVec3::Y);
        let g = Orientation::about_z(0.8);
        let d = compute_gy(compose(Orientation::yaw(0.4), g), &s).unwrap();
        let d0 = compute_gy(g, &s).unwrap();
        assert!(same_rotation(d.g_0, d0.g_0, 1e-12));
        assert!(compute_gy(Orientation::IDENTITY, &s).is_err());
    }

    #[test]
    fn hold_last_valid() {
        let s = MappingScheme::facing();
        let qs = [
            Orientation::about_z(FRAC_PI_2),
            Orientation::yaw(0.3),
            Orientation::about_z(FRAC_PI_2),
            Orientation::yaw(-0.2),
        ];
        let out = decompose_sequence(&qs, &s);
        let flags: Vec<bool> = out.iter().map(|f| f.singular).collect();
        assert_eq!(flags, [true, false, true, false]);
        assert!((out[0].decomposition.g_y.angle + 0.3).abs() < 1e-12);
        assert!((out[2].decomposition.g_y.angle + 0.3).abs() < 1e-12);
        assert!((out[3].decomposition.g_y.angle - 0.2).abs() < 1e-12);
    }

    #[test]
    fn orbit_equivalence() {
        let g = Orientation::from_wxyz(0.2, 0.9, -0.3, 0.1);
        assert!(orbit_equivalent(g, compose(Orientation::yaw(2.1), g), 1e-9));
        assert!(!orbit_equivalent(Orientation::IDENTITY, Orientation::about_z(FRAC_PI_2), 1e-9));
        let d = compute_gy(g, &MappingScheme::facing()).unwrap();
        assert!(orbit_equivalent(d.g_0, g, 1e-9));
    }

    #[test]
    fn tangent_field_basics() {
        let s = MappingScheme::new(UnitVec3::new(1.0, 0.2, 0.3));
        let out = tangent_field(&s, &[POLE, s.direction(), -s.direction()]);
        let t = out[0].tangent.unwrap();
        assert!(t.dot(POLE).abs() < 1e-12);
        assert!((t.as_vec().norm() - 1.0).abs() < 1e-12);
        assert!(out[1].tangent.is_none());
        assert!(out[2].tangent.is_none());
    }

    #[test]
    fn field_index_around_singularity_is_nonzero() {
        let s = MappingScheme::facing();
        let idx = field_index(&s, UnitVec3::X, 0.3, 256).unwrap();
        assert!((idx - idx.round()).abs() < 1e-9);
        assert!(idx.round() != 0.0);
        // A ring that does not enclose ±r has index 0.
        let idx = field_index(&s, UnitVec3::Y, 0.3, 256).unwrap();
        assert!(idx.abs() < 1e-9);
    }
}
