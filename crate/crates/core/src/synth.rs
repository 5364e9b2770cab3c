//! Synthetic clips with known root motion, used for fixtures and demos.
//!
//! Every clip shares a five-joint skeleton whose root carries six channels
//! (`Xposition Yposition Zposition Zrotation Xrotation Yrotation`) and whose
//! other joints carry three rotation channels in the same order. Lengths are
//! in centimeters; the default frame rate is 60 fps.

use std::f64::consts::PI;

use crate::bvh::{Channel, Joint, MotionClip, Skeleton, DEFAULT_UNIT_SCALE};
use crate::rotmath::{compose, Axis, Orientation, Vec3};

pub const FRAME_TIME: f64 = 1.0 / 60.0;

const ROOT_ORDER: [Axis; 3] = [Axis::Z, Axis::X, Axis::Y];

fn skeleton() -> Skeleton {
    use Channel::*;
    let rot = vec![Zrotation, Xrotation, Yrotation];
    let joint = |name: &str, parent: usize, offset: Vec3, end: Option<Vec3>| Joint {
        name: name.to_string(),
        parent: Some(parent),
        offset,
        channels: rot.clone(),
        end_site: end,
    };
    Skeleton::new(vec![
        Joint {
            name: "Hips".into(),
            parent: None,
            offset: Vec3::ZERO,
            channels: vec![Xposition, Yposition, Zposition, Zrotation, Xrotation, Yrotation],
            end_site: None,
        },
        joint("Spine", 0, Vec3::new(0.0, 12.0, 1.0), None),
        joint("Head", 1, Vec3::new(0.0, 30.0, 0.0), Some(Vec3::new(0.0, 12.0, 2.0))),
        joint("LeftArm", 1, Vec3::new(16.0, 24.0, -2.0), Some(Vec3::new(28.0, 0.0, 0.0))),
        joint("RightLeg", 0, Vec3::new(-9.0, -6.0, 3.0), Some(Vec3::new(0.0, -42.0, 4.0))),
    ])
    .expect("static skeleton is well formed")
}

/// Per-frame root pose: orientation and position in centimeters.
pub struct RootPose {
    pub orientation: Orientation,
    pub position: Vec3,
}

/// Builds a clip from root poses. Limb joints swing gently with `limb_phase`
/// radians per frame so that relative features are not constant; pass 0 for a
/// rigid pose.
pub fn clip_from_root(poses: &[RootPose], limb_phase: f64) -> MotionClip {
    let skeleton = skeleton();
    let frames = poses
        .iter()
        .enumerate()
        .map(|(t, p)| {
            let [a, b, c] = p.orientation.to_euler(ROOT_ORDER).map(f64::to_degrees);
            let mut row = vec![p.position.x, p.position.y, p.position.z, a, b, c];
            let s = (limb_phase * t as f64).sin();
            row.extend([0.0, 5.0 * s, 0.0]); // Spine
            row.extend([3.0 * s, 0.0, 10.0 * s]); // Head
            row.extend([-20.0 * s, 0.0, 15.0 * s]); // LeftArm
            row.extend([0.0, 25.0 * s, 0.0]); // RightLeg
            row
        })
        .collect();
    MotionClip {
        skeleton,
        frame_time: FRAME_TIME,
        frames,
        unit_scale: DEFAULT_UNIT_SCALE,
    }
}

fn standing(orientation: Orientation) -> RootPose {
    RootPose {
        orientation,
        position: Vec3::new(0.0, 95.0, 0.0),
    }
}

/// Rigid character standing still with identity root orientation.
pub fn static_clip(frames: usize) -> MotionClip {
    let poses: Vec<RootPose> = (0..frames).map(|_| standing(Orientation::IDENTITY)).collect();
    clip_from_root(&poses, 0.0)
}

/// Walks forward along the heading while turning at `rate` rad/s about +Y.
pub fn turning_walk(frames: usize, rate: f64) -> MotionClip {
    let speed = 120.0; // cm/s
    let mut pos = Vec3::new(0.0, 95.0, 0.0);
    let poses: Vec<RootPose> = (0..frames)
        .map(|t| {
            let heading = rate * t as f64 * FRAME_TIME;
            let q = Orientation::yaw(heading);
            if t > 0 {
                pos += q.rotate_vec(Vec3::new(speed * FRAME_TIME, 0.0, 0.0));
            }
            RootPose {
                orientation: q,
                position: Vec3::new(pos.x, 95.0 + 2.0 * (0.3 * t as f64).sin(), pos.z),
            }
        })
        .collect();
    clip_from_root(&poses, 0.15)
}

/// Heading follows `heading(t_seconds)`; the root stays in place.
pub fn yaw_profile(frames: usize, heading: impl Fn(f64) -> f64) -> MotionClip {
    let poses: Vec<RootPose> = (0..frames)
        .map(|t| standing(Orientation::yaw(heading(t as f64 * FRAME_TIME))))
        .collect();
    clip_from_root(&poses, 0.0)
}

/// Back flips: `flips` full turns about +Z, `frames_per_flip` frames each.
/// The root rises and falls once per flip, smoothly across cycle boundaries.
pub fn backflip(frames_per_flip: usize, flips: usize) -> MotionClip {
    let poses: Vec<RootPose> = (0..frames_per_flip * flips)
        .map(|t| {
            let phase = (t % frames_per_flip) as f64 / frames_per_flip as f64;
            RootPose {
                orientation: Orientation::about_z(2.0 * PI * phase),
                position: Vec3::new(0.0, 95.0 + 40.0 * (PI * phase).sin().powi(2), 0.0),
            }
        })
        .collect();
    clip_from_root(&poses, 0.1)
}

/// Spins quickly about the body's own up axis while the body tilts about X
/// with a 60° amplitude.
pub fn composite_spin(frames: usize) -> MotionClip {
    let poses: Vec<RootPose> = (0..frames)
        .map(|t| {
            let s = t as f64 * FRAME_TIME;
            let tilt = (60f64).to_radians() * (2.0 * PI * 0.5 * s).sin();
            let spin = 2.0 * PI * 1.5 * s;
            standing(compose(Orientation::about_x(tilt), Orientation::yaw(spin)))
        })
        .collect();
    clip_from_root(&poses, 0.1)
}

/// A full turn about +Z followed by a full turn about +X. Both coordinate
/// axes pass through a singularity; the best direction lies between them.
pub fn cartwheel_flip(frames_per_turn: usize) -> MotionClip {
    let n = frames_per_turn;
    let poses: Vec<RootPose> = (0..2 * n)
        .map(|t| {
            let a = 2.0 * PI * (t % n) as f64 / n as f64;
            if t < n {
                standing(Orientation::about_z(a))
            } else {
                standing(Orientation::about_x(a))
            }
        })
        .collect();
    clip_from_root(&poses, 0.1)
}

/// Parameters of a smooth, singularity-free wandering motion.
#[derive(Clone, Copy, Debug)]
pub struct Wander {
    /// Heading rate amplitude, rad/s.
    pub turn: f64,
    /// Tilt amplitudes about X and Z, radians (keep well below π/2).
    pub tilt: [f64; 2],
    /// Angular frequencies, rad/s.
    pub freq: [f64; 3],
    pub phase: [f64; 3],
    /// Planar speed, cm/s.
    pub speed: f64,
}

impl Default for Wander {
    fn default() -> Self {
        Wander {
            turn: 0.9,
            tilt: [0.35, 0.25],
            freq: [0.7, 1.9, 1.3],
            phase: [0.0, 0.4, 1.1],
            speed: 110.0,
        }
    }
}

/// Smoothly turning, tilting, translating motion.
pub fn wander(frames: usize, w: &Wander) -> MotionClip {
    let mut heading = 0.0;
    let mut pos = Vec3::new(10.0, 92.0, -30.0);
    let poses: Vec<RootPose> = (0..frames)
        .map(|t| {
            let s = t as f64 * FRAME_TIME;
            if t > 0 {
                heading += w.turn * (w.freq[0] * s + w.phase[0]).sin() * FRAME_TIME;
                let dir = Orientation::yaw(heading).rotate_vec(Vec3::new(1.0, 0.0, 0.0));
                pos += dir * (w.speed * FRAME_TIME);
            }
            let tilt = compose(
                Orientation::about_x(w.tilt[0] * (w.freq[1] * s + w.phase[1]).sin()),
                Orientation::about_z(w.tilt[1] * (w.freq[2] * s + w.phase[2]).sin()),
            );
            RootPose {
                orientation: compose(Orientation::yaw(heading), tilt),
                position: Vec3::new(pos.x, 92.0 + 4.0 * (3.0 * s).sin(), pos.z),
            }
        })
        .collect();
    clip_from_root(&poses, 0.12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bvh::parse_bvh;

    #[test]
    fn fixtures_roundtrip_through_bvh_text() {
        for clip in [static_clip(5), backflip(24, 1), cartwheel_flip(12), wander(30, &Wander::default())] {
            let again = parse_bvh(clip.to_bvh_string().as_bytes()).unwrap();
            assert_eq!(again, clip);
        }
    }

    #[test]
    fn root_orientations_survive_euler_conversion() {
        let clip = composite_spin(50);
        let traj = clip.root_trajectory();
        for (t, q) in traj.orientations.iter().enumerate() {
            let s = t as f64 * FRAME_TIME;
            let tilt = (60f64).to_radians() * (PI * s).sin();
            let expected = compose(Orientation::about_x(tilt), Orientation::yaw(3.0 * PI * s));
            assert!(q.dot(expected).abs() > 1.0 - 1e-12);
        }
    }
}
