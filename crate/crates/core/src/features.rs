//! Feature extraction in three families:
//!
//! * GF: root velocity and joint positions relative to the root, in the world frame.
//! * DIF: the same quantities with the facing-direction yaw removed (`r = +X`).
//! * DIM: the same with the yaw of an arbitrary motion direction `r` removed.
//!
//! DIF and DIM also carry the root yaw rate so the world trajectory can be
//! rebuilt by integration. Velocities are backward differences `(x_t − x_{t−1}) / dt`,
//! with frame 0 copying frame 1; integrating them back is exact.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bvh::{make_hemisphere_continuous, MotionClip, RootTrajectory};
use crate::mapping::{decompose_sequence, MappingScheme};
use crate::motiondir::select_motion_direction;
use crate::rotmath::{compose, wrap_angle, AxisAngle, Orientation, UnitVec3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeatureScheme {
    Global,
    Invariant(MappingScheme),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeTag {
    Gf,
    Dif,
    Dim,
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeTag::Gf => "gf",
            SchemeTag::Dif => "dif",
            SchemeTag::Dim => "dim",
        })
    }
}

impl FeatureScheme {
    pub fn dif() -> Self {
        FeatureScheme::Invariant(MappingScheme::facing())
    }

    pub fn dim(direction: UnitVec3) -> Self {
        FeatureScheme::Invariant(MappingScheme::new(direction))
    }

    /// DIM with `r = +X` is DIF and is tagged as such.
    pub fn tag(&self) -> SchemeTag {
        match self {
            FeatureScheme::Global => SchemeTag::Gf,
            FeatureScheme::Invariant(s) if s.direction() == UnitVec3::X => SchemeTag::Dif,
            FeatureScheme::Invariant(_) => SchemeTag::Dim,
        }
    }

    pub fn mapping(&self) -> Option<&MappingScheme> {
        match self {
            FeatureScheme::Global => None,
            FeatureScheme::Invariant(s) => Some(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureFrame {
    pub frame: usize,
    pub time: f64,
    /// Meters.
    pub root_height: f64,
    /// `(x, z)` in meters per second, in the scheme's frame.
    pub root_planar_velocity: [f64; 2],
    /// Heading rate about +Y in radians per second; `None` for GF.
    pub yaw_rate: Option<f64>,
    /// Yaw-free root orientation (DIF/DIM) or the global root orientation (GF).
    pub g0: Orientation,
    /// Non-root joints, relative to the root, in the scheme's frame (meters).
    pub joint_positions: Vec<Vec3>,
    /// Non-root joint velocities in the scheme's frame (meters per second).
    pub joint_velocities: Vec<Vec3>,
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub scheme: FeatureScheme,
    pub frame_time: f64,
    pub joint_names: Vec<String>,
    pub frames: Vec<FeatureFrame>,
}

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("GF features carry no yaw rate; reconstruction needs DIF or DIM features")]
    GlobalScheme,
    #[error("feature set is empty")]
    Empty,
}

impl FeatureSet {
    pub fn singular_count(&self) -> usize {
        self.frames.iter().filter(|f| f.singular).count()
    }

    /// Names of the flattened numeric channels, see [`FeatureSet::channels`].
    pub fn channel_names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["root_h", "vpx", "vpz", "yaw_rate", "g0_w", "g0_x", "g0_y", "g0_z"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for j in &self.joint_names {
            for suffix in ["px", "py", "pz"] {
                names.push(format!("{j}_{suffix}"));
            }
        }
        for j in &self.joint_names {
            for suffix in ["vx", "vy", "vz"] {
                names.push(format!("{j}_{suffix}"));
            }
        }
        names
    }

    /// Flattened numeric channels of one frame. GF frames report a zero yaw rate.
    pub fn channels(frame: &FeatureFrame) -> Vec<f64> {
        let mut c = vec![
            frame.root_height,
            frame.root_planar_velocity[0],
            frame.root_planar_velocity[1],
            frame.yaw_rate.unwrap_or(0.0),
        ];
        c.extend(frame.g0.to_array());
        for p in &frame.joint_positions {
            c.extend(p.to_array());
        }
        for v in &frame.joint_velocities {
            c.extend(v.to_array());
        }
        c
    }
}

/// Per-frame yaw `θ_t` and singular flags, with hold-last-valid over singular frames.
fn yaw_sequence(orientations: &[Orientation], scheme: &FeatureScheme) -> Vec<(f64, Orientation, bool)> {
    match scheme {
        FeatureScheme::Global => orientations.iter().map(|&g| (0.0, g, false)).collect(),
        FeatureScheme::Invariant(m) => decompose_sequence(orientations, m)
            .into_iter()
            .map(|f| (f.decomposition.g_y.angle, f.decomposition.g_0, f.singular))
            .collect(),
    }
}

fn rate_series(headings: &[f64], dt: f64) -> Vec<f64> {
    let mut rates = vec![0.0; headings.len()];
    for t in 1..headings.len() {
        rates[t] = wrap_angle(headings[t] - headings[t - 1]) / dt;
    }
    if rates.len() > 1 {
        rates[0] = rates[1];
    }
    rates
}

/// Heading `ψ_t = −θ_t` of the root per frame, wrapped to `(−π, π]`.
pub fn headings(traj: &RootTrajectory, scheme: &MappingScheme) -> Vec<f64> {
    decompose_sequence(&traj.orientations, scheme)
        .into_iter()
        .map(|f| wrap_angle(-f.decomposition.g_y.angle))
        .collect()
}

/// Heading rate about +Y in radians per second; frame 0 copies frame 1.
pub fn yaw_rate_series(traj: &RootTrajectory, scheme: &MappingScheme) -> Vec<f64> {
    rate_series(&headings(traj, scheme), traj.frame_time)
}

fn backward_differences(values: &[Vec3], dt: f64) -> Vec<Vec3> {
    let mut out = vec![Vec3::ZERO; values.len()];
    for t in 1..values.len() {
        out[t] = (values[t] - values[t - 1]) * (1.0 / dt);
    }
    if out.len() > 1 {
        out[0] = out[1];
    }
    out
}

/// Global joint positions in meters for every frame.
pub fn global_positions(clip: &MotionClip) -> Vec<Vec<Vec3>> {
    (0..clip.frame_count())
        .into_par_iter()
        .map(|t| {
            clip.forward_kinematics(t)
                .into_iter()
                .map(|p| p.position * clip.unit_scale)
                .collect()
        })
        .collect()
}

pub fn extract_features(clip: &MotionClip, scheme: &FeatureScheme) -> FeatureSet {
    let dt = clip.frame_time;
    let traj = clip.root_trajectory();
    let globals = global_positions(clip);
    let n_joints = clip.skeleton.joints().len();
    let yaws = yaw_sequence(&traj.orientations, scheme);

    let mut g0s: Vec<Orientation> = yaws.iter().map(|y| y.1).collect();
    make_hemisphere_continuous(&mut g0s);

    let root_vel = backward_differences(&traj.positions, dt);
    let joint_vel: Vec<Vec<Vec3>> = (1..n_joints)
        .map(|j| {
            let series: Vec<Vec3> = globals.iter().map(|g| g[j]).collect();
            backward_differences(&series, dt)
        })
        .collect();
    let yaw_rates = match scheme {
        FeatureScheme::Global => None,
        FeatureScheme::Invariant(_) => {
            let hs: Vec<f64> = yaws.iter().map(|y| wrap_angle(-y.0)).collect();
            Some(rate_series(&hs, dt))
        }
    };

    let frames = (0..clip.frame_count())
        .map(|t| {
            let q = Orientation::yaw(yaws[t].0);
            let root = traj.positions[t];
            let v = q.rotate_vec(root_vel[t]);
            FeatureFrame {
                frame: t,
                time: t as f64 * dt,
                root_height: root.y,
                root_planar_velocity: [v.x, v.z],
                yaw_rate: yaw_rates.as_ref().map(|r| r[t]),
                g0: g0s[t],
                joint_positions: (1..n_joints).map(|j| q.rotate_vec(globals[t][j] - root)).collect(),
                joint_velocities: joint_vel.iter().map(|s| q.rotate_vec(s[t])).collect(),
                singular: yaws[t].2,
            }
        })
        .collect();

    FeatureSet {
        scheme: *scheme,
        frame_time: dt,
        joint_names: clip.skeleton.joints()[1..].iter().map(|j| j.name.clone()).collect(),
        frames,
    }
}

/// Integrates DIF/DIM features back into a world trajectory, starting from
/// heading `initial_yaw` and planar position `(x, z)` at frame 0.
pub fn reconstruct_trajectory(
    set: &FeatureSet,
    initial_yaw: f64,
    initial_planar_position: [f64; 2],
) -> Result<RootTrajectory, FeatureError> {
    if set.scheme.mapping().is_none() {
        return Err(FeatureError::GlobalScheme);
    }
    if set.frames.is_empty() {
        return Err(FeatureError::Empty);
    }
    let dt = set.frame_time;
    let mut heading = initial_yaw;
    let mut planar = Vec3::new(initial_planar_position[0], 0.0, initial_planar_position[1]);
    let mut orientations = Vec::with_capacity(set.frames.len());
    let mut positions = Vec::with_capacity(set.frames.len());
    for (t, f) in set.frames.iter().enumerate() {
        let rate = f.yaw_rate.ok_or(FeatureError::GlobalScheme)?;
        if t > 0 {
            heading += rate * dt;
            let v = Vec3::new(f.root_planar_velocity[0], 0.0, f.root_planar_velocity[1]);
            planar += Orientation::yaw(heading).rotate_vec(v) * dt;
        }
        orientations.push(compose(Orientation::yaw(heading), f.g0));
        positions.push(Vec3::new(planar.x, f.root_height, planar.z));
    }
    make_hemisphere_continuous(&mut orientations);
    Ok(RootTrajectory {
        orientations,
        positions,
        frame_time: dt,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub channel_names: Vec<String>,
    pub threshold: Vec<f64>,
    /// Per channel, maximum absolute frame-to-frame change.
    pub max_step: Vec<f64>,
    pub mean_step: Vec<f64>,
    /// Frames `k ≥ 1` where some channel changed by more than its threshold since `k − 1`.
    pub discontinuity_frames: Vec<usize>,
}

impl SmoothnessReport {
    pub fn is_smooth(&self) -> bool {
        self.discontinuity_frames.is_empty()
    }
}

/// Absolute per-channel deltas between consecutive frames. Row `k` holds the
/// change from frame `k` to frame `k + 1`. Quaternion channels are compared
/// after putting both quaternions in the same hemisphere.
pub fn channel_deltas(frames: &[FeatureFrame]) -> Vec<Vec<f64>> {
    frames
        .windows(2)
        .map(|w| {
            let mut cur = w[1].clone();
            cur.g0 = cur.g0.aligned_to(w[0].g0);
            FeatureSet::channels(&w[0])
                .iter()
                .zip(FeatureSet::channels(&cur))
                .map(|(a, b)| (b - a).abs())
                .collect()
        })
        .collect()
}

/// Smoothness of a feature stream against per-channel thresholds.
///
/// Panics if fewer than two frames are given or the threshold length does
/// not match the channel count.
pub fn smoothness(set: &FeatureSet, threshold: &[f64]) -> SmoothnessReport {
    assert!(set.frames.len() >= 2, "smoothness needs at least two frames");
    let names = set.channel_names();
    assert_eq!(threshold.len(), names.len(), "one threshold per channel");
    let deltas = channel_deltas(&set.frames);
    let n = names.len();
    let mut max_step = vec![0.0f64; n];
    let mut sum = vec![0.0f64; n];
    let mut discontinuity_frames = Vec::new();
    for (k, row) in deltas.iter().enumerate() {
        let mut jump = false;
        for c in 0..n {
            max_step[c] = max_step[c].max(row[c]);
            sum[c] += row[c];
            jump |= row[c] > threshold[c];
        }
        if jump {
            discontinuity_frames.push(k + 1);
        }
    }
    let m = deltas.len() as f64;
    SmoothnessReport {
        channel_names: names,
        threshold: threshold.to_vec(),
        max_step,
        mean_step: sum.into_iter().map(|s| s / m).collect(),
        discontinuity_frames,
    }
}

/// Lower bound on self-calibrated thresholds, so numerically constant
/// channels do not flag rounding noise.
pub const THRESHOLD_FLOOR: f64 = 1e-6;

/// Thresholds calibrated on the clip itself: 5× the 99th-percentile delta
/// under DIM with the automatically selected direction.
pub fn default_thresholds(clip: &MotionClip, n_samples: usize) -> Vec<f64> {
    let report = select_motion_direction(&clip.root_trajectory(), n_samples);
    let set = extract_features(clip, &FeatureScheme::dim(report.direction));
    thresholds_from(&set, 5.0, 0.99)
}

/// Channels sharing a threshold: a yaw of the representation mixes the
/// planar velocity pair, the `g0` components and every xyz triplet among
/// themselves, so per-component thresholds would not be comparable across
/// schemes.
fn channel_groups(n: usize) -> Vec<std::ops::Range<usize>> {
    let mut groups = vec![0..1, 1..3, 3..4, 4..8];
    let mut start = 8;
    while start < n {
        groups.push(start..(start + 3).min(n));
        start += 3;
    }
    groups
}

/// Thresholds of `factor` times the `quantile` of frame-to-frame deltas,
/// taken per channel group (see [`channel_groups`]) and floored at
/// [`THRESHOLD_FLOOR`].
pub fn thresholds_from(set: &FeatureSet, factor: f64, quantile: f64) -> Vec<f64> {
    let deltas = channel_deltas(&set.frames);
    let n = set.channel_names().len();
    let quant = |c: usize| {
        let mut col: Vec<f64> = deltas.iter().map(|r| r[c]).collect();
        if col.is_empty() {
            return 0.0;
        }
        col.sort_by(f64::total_cmp);
        let idx = ((quantile * col.len() as f64).ceil() as usize).clamp(1, col.len()) - 1;
        col[idx]
    };
    let mut out = vec![THRESHOLD_FLOOR; n];
    for g in channel_groups(n) {
        let t = (factor * g.clone().map(quant).fold(0.0, f64::max)).max(THRESHOLD_FLOOR);
        out[g].iter_mut().for_each(|v| *v = t);
    }
    out
}

/// A rigid link state expressed relative to the root.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinkState {
    pub position: Vec3,
    pub rotation: Orientation,
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
}

impl LinkState {
    /// Re-expresses the state after removing a yaw `θ` (i.e. applying `yaw(θ)`).
    pub fn yaw_removed(&self, theta: f64) -> LinkState {
        let q = Orientation::yaw(theta);
        LinkState {
            position: q.rotate_vec(self.position),
            rotation: compose(q, self.rotation),
            linear_velocity: q.rotate_vec(self.linear_velocity),
            angular_velocity: q.rotate_vec(self.angular_velocity),
        }
    }
}

/// Per-frame, per-joint link states (all joints, root included) with the
/// scheme's yaw removed. Rotations are hemisphere-aligned per joint over time;
/// angular velocities are world-frame backward differences.
pub fn link_states(clip: &MotionClip, scheme: &FeatureScheme) -> Vec<Vec<LinkState>> {
    let dt = clip.frame_time;
    let traj = clip.root_trajectory();
    let yaws = yaw_sequence(&traj.orientations, scheme);
    let poses: Vec<_> = (0..clip.frame_count())
        .into_par_iter()
        .map(|t| clip.forward_kinematics(t))
        .collect();
    let n_joints = clip.skeleton.joints().len();
    let mut out = vec![Vec::with_capacity(n_joints); poses.len()];
    for j in 0..n_joints {
        let mut rots: Vec<Orientation> = poses.iter().map(|p| p[j].orientation).collect();
        make_hemisphere_continuous(&mut rots);
        let pos: Vec<Vec3> = poses.iter().map(|p| p[j].position * clip.unit_scale).collect();
        let lin = backward_differences(&pos, dt);
        let mut ang = vec![Vec3::ZERO; rots.len()];
        for t in 1..rots.len() {
            let d = AxisAngle::from_orientation(compose(rots[t], rots[t - 1].inverse()));
            ang[t] = d.axis.as_vec() * (d.angle / dt);
        }
        if ang.len() > 1 {
            ang[0] = ang[1];
        }
        for t in 0..poses.len() {
            let world = LinkState {
                position: pos[t] - traj.positions[t],
                rotation: rots[t],
                linear_velocity: lin[t],
                angular_velocity: ang[t],
            };
            out[t].push(world.yaw_removed(yaws[t].0));
        }
    }
    for j in 0..n_joints {
        for t in 1..out.len() {
            out[t][j].rotation = out[t][j].rotation.aligned_to(out[t - 1][j].rotation);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn dim_with_x_is_tagged_dif() {
        assert_eq!(FeatureScheme::dim(UnitVec3::X).tag(), SchemeTag::Dif);
        assert_eq!(FeatureScheme::dim(UnitVec3::Z).tag(), SchemeTag::Dim);
        assert_eq!(FeatureScheme::Global.tag(), SchemeTag::Gf);
    }

    #[test]
    fn identity_root_makes_dif_equal_gf() {
        let clip = synth::static_clip(30);
        let gf = extract_features(&clip, &FeatureScheme::Global);
        let dif = extract_features(&clip, &FeatureScheme::dif());
        for (a, b) in gf.frames.iter().zip(&dif.frames) {
            assert_eq!(a.joint_positions, b.joint_positions);
            assert_eq!(a.joint_velocities, b.joint_velocities);
            assert_eq!(a.root_planar_velocity, b.root_planar_velocity);
            assert_eq!(b.yaw_rate, Some(0.0));
            assert_eq!(a.yaw_rate, None);
        }
    }

    #[test]
    fn yaw_rate_constant_and_static() {
        let traj = RootTrajectory::from_orientations(
            (0..120).map(|t| Orientation::yaw(t as f64 / 60.0)).collect(),
            1.0 / 60.0,
        );
        for r in yaw_rate_series(&traj, &MappingScheme::facing()) {
            assert!((r - 1.0).abs() < 1e-6);
        }
        let still = RootTrajectory::from_orientations(vec![Orientation::IDENTITY; 10], 0.1);
        assert!(yaw_rate_series(&still, &MappingScheme::facing())
            .iter()
            .all(|&r| r == 0.0));
    }

    #[test]
    fn smoothness_flags_injected_jump() {
        let clip = synth::static_clip(20);
        let mut set = extract_features(&clip, &FeatureScheme::dif());
        let n = set.channel_names().len();
        let flat = smoothness(&set, &vec![0.01; n]);
        assert!(flat.is_smooth());
        assert!(flat.max_step.iter().all(|&s| s == 0.0));
        for f in &mut set.frames[7..] {
            f.root_height += 0.1;
        }
        let r = smoothness(&set, &vec![0.01; n]);
        assert_eq!(r.discontinuity_frames, vec![7]);
    }

    #[test]
    fn gf_reconstruction_rejected() {
        let set = extract_features(&synth::static_clip(3), &FeatureScheme::Global);
        assert_eq!(
            reconstruct_trajectory(&set, 0.0, [0.0, 0.0]).unwrap_err(),
            FeatureError::GlobalScheme
        );
    }

    #[test]
    fn link_states_root_is_at_origin() {
        let clip = synth::turning_walk(40, 0.8);
        let links = link_states(&clip, &FeatureScheme::dif());
        for frame in &links {
            assert!(frame[0].position.norm() < 1e-12);
        }
        let dif = extract_features(&clip, &FeatureScheme::dif());
        for (t, frame) in links.iter().enumerate() {
            assert!(frame[0].rotation.dot(dif.frames[t].g0).abs() > 1.0 - 1e-12);
            for (j, p) in dif.frames[t].joint_positions.iter().enumerate() {
                assert!((frame[j + 1].position - *p).norm() < 1e-12);
            }
        }
    }
}
