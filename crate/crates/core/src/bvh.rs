//! BVH motion-capture parsing and forward kinematics.
//!
//! Rotation channels are intrinsic Euler angles in degrees, applied in the
//! order they are listed for each joint. A joint's local transform is
//! `translate(offset + position channels) * rotate(rotation channels)`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::rotmath::{compose, Axis, Orientation, Vec3};

/// Default length multiplier: CMU-style centimeters to meters.
pub const DEFAULT_UNIT_SCALE: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BvhError {
    #[error("line {line}: input is not a text BVH document (binary data)")]
    Binary { line: usize },
    #[error("line {line}: missing HIERARCHY")]
    MissingHierarchy { line: usize },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: missing Frame Time")]
    MissingFrameTime { line: usize },
    #[error("line {line}: frame {frame} has {found} values, expected {expected}")]
    ChannelCount {
        line: usize,
        frame: usize,
        found: usize,
        expected: usize,
    },
    #[error("line {line}: frame {frame}: non-numeric value {token:?}")]
    NonNumeric {
        line: usize,
        frame: usize,
        token: String,
    },
    #[error("line {line}: frame {frame} missing (declared {declared} frames, found {found})")]
    MissingFrame {
        line: usize,
        frame: usize,
        declared: usize,
        found: usize,
    },
    #[error("line {line}: unexpected frame data beyond the declared {declared} frames")]
    ExtraFrame { line: usize, declared: usize },
}

impl BvhError {
    pub fn line(&self) -> usize {
        match *self {
            BvhError::Binary { line }
            | BvhError::MissingHierarchy { line }
            | BvhError::Syntax { line, .. }
            | BvhError::MissingFrameTime { line }
            | BvhError::ChannelCount { line, .. }
            | BvhError::NonNumeric { line, .. }
            | BvhError::MissingFrame { line, .. }
            | BvhError::ExtraFrame { line, .. } => line,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    Xposition,
    Yposition,
    Zposition,
    Xrotation,
    Yrotation,
    Zrotation,
}

impl Channel {
    fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "xposition" => Channel::Xposition,
            "yposition" => Channel::Yposition,
            "zposition" => Channel::Zposition,
            "xrotation" => Channel::Xrotation,
            "yrotation" => Channel::Yrotation,
            "zrotation" => Channel::Zrotation,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::Xposition => "Xposition",
            Channel::Yposition => "Yposition",
            Channel::Zposition => "Zposition",
            Channel::Xrotation => "Xrotation",
            Channel::Yrotation => "Yrotation",
            Channel::Zrotation => "Zrotation",
        }
    }

    pub fn rotation_axis(self) -> Option<Axis> {
        match self {
            Channel::Xrotation => Some(Axis::X),
            Channel::Yrotation => Some(Axis::Y),
            Channel::Zrotation => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn position_axis(self) -> Option<Axis> {
        match self {
            Channel::Xposition => Some(Axis::X),
            Channel::Yposition => Some(Axis::Y),
            Channel::Zposition => Some(Axis::Z),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    pub offset: Vec3,
    pub channels: Vec<Channel>,
    /// Offset of the `End Site` leaf, if the joint has one.
    pub end_site: Option<Vec3>,
}

/// Joints in topological order; index 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    joints: Vec<Joint>,
    channel_starts: Vec<usize>,
}

impl Skeleton {
    /// Fails if the joints are not topologically ordered or there is not
    /// exactly one root at index 0.
    pub fn new(joints: Vec<Joint>) -> Result<Self, String> {
        if joints.is_empty() {
            return Err("skeleton has no joints".into());
        }
        for (i, j) in joints.iter().enumerate() {
            match (i, j.parent) {
                (0, None) => {}
                (0, Some(_)) => return Err("first joint must be the root".into()),
                (_, None) => return Err(format!("joint {:?} is a second root", j.name)),
                (_, Some(p)) if p >= i => {
                    return Err(format!("joint {:?} precedes its parent", j.name))
                }
                _ => {}
            }
        }
        let mut channel_starts = Vec::with_capacity(joints.len());
        let mut acc = 0;
        for j in &joints {
            channel_starts.push(acc);
            acc += j.channels.len();
        }
        Ok(Skeleton {
            joints,
            channel_starts,
        })
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn root(&self) -> &Joint {
        &self.joints[0]
    }

    pub fn channel_count(&self) -> usize {
        self.joints.iter().map(|j| j.channels.len()).sum()
    }

    /// Index of the joint's first channel within a frame row.
    pub fn channel_start(&self, joint: usize) -> usize {
        self.channel_starts[joint]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointPose {
    pub position: Vec3,
    pub orientation: Orientation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionClip {
    pub skeleton: Skeleton,
    /// Seconds per frame.
    pub frame_time: f64,
    /// One row of raw channel values per frame (rotations in degrees).
    pub frames: Vec<Vec<f64>>,
    /// Multiplier from file length units to meters.
    pub unit_scale: f64,
}

/// Root orientation and position per frame.
#[derive(Clone, Debug, PartialEq)]
pub struct RootTrajectory {
    /// Hemisphere-continuous: consecutive quaternions have a non-negative dot product.
    pub orientations: Vec<Orientation>,
    /// Meters.
    pub positions: Vec<Vec3>,
    pub frame_time: f64,
}

impl RootTrajectory {
    pub fn from_orientations(orientations: Vec<Orientation>, frame_time: f64) -> Self {
        let n = orientations.len();
        let mut t = RootTrajectory {
            orientations,
            positions: vec![Vec3::ZERO; n],
            frame_time,
        };
        make_hemisphere_continuous(&mut t.orientations);
        t
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }
}

pub fn make_hemisphere_continuous(qs: &mut [Orientation]) {
    for i in 1..qs.len() {
        qs[i] = qs[i].aligned_to(qs[i - 1]);
    }
}

impl MotionClip {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame_rate(&self) -> f64 {
        1.0 / self.frame_time
    }

    pub fn duration(&self) -> f64 {
        self.frame_time * self.frames.len() as f64
    }

    pub fn with_unit_scale(mut self, scale: f64) -> Self {
        self.unit_scale = scale;
        self
    }

    /// Keeps every `stride`-th frame starting at frame 0. No interpolation.
    pub fn downsample(&self, stride: usize) -> MotionClip {
        assert!(stride >= 1, "stride must be at least 1");
        MotionClip {
            skeleton: self.skeleton.clone(),
            frame_time: self.frame_time * stride as f64,
            frames: self.frames.iter().step_by(stride).cloned().collect(),
            unit_scale: self.unit_scale,
        }
    }

    fn local_transform(&self, joint: usize, row: &[f64]) -> (Vec3, Orientation) {
        let j = &self.skeleton.joints[joint];
        let start = self.skeleton.channel_starts[joint];
        let mut translation = j.offset;
        let mut rotation = Orientation::IDENTITY;
        for (c, &value) in j.channels.iter().zip(&row[start..start + j.channels.len()]) {
            if let Some(axis) = c.rotation_axis() {
                let q = Orientation::from_axis_angle(axis.unit(), value.to_radians());
                rotation = compose(rotation, q);
            } else if let Some(axis) = c.position_axis() {
                match axis {
                    Axis::X => translation.x += value,
                    Axis::Y => translation.y += value,
                    Axis::Z => translation.z += value,
                }
            }
        }
        (translation, rotation)
    }

    /// Global joint poses for one frame, in file length units.
    ///
    /// Panics if `frame` is out of range.
    pub fn forward_kinematics(&self, frame: usize) -> Vec<JointPose> {
        let row = &self.frames[frame];
        let mut poses: Vec<JointPose> = Vec::with_capacity(self.skeleton.joints.len());
        for (i, j) in self.skeleton.joints.iter().enumerate() {
            let (t, r) = self.local_transform(i, row);
            let pose = match j.parent {
                None => JointPose {
                    position: t,
                    orientation: r,
                },
                Some(p) => {
                    let parent = poses[p];
                    JointPose {
                        position: parent.position + parent.orientation.rotate_vec(t),
                        orientation: compose(parent.orientation, r),
                    }
                }
            };
            poses.push(pose);
        }
        poses
    }

    /// Root orientations `{g_t}` and root positions in meters.
    pub fn root_trajectory(&self) -> RootTrajectory {
        let mut orientations = Vec::with_capacity(self.frames.len());
        let mut positions = Vec::with_capacity(self.frames.len());
        for row in &self.frames {
            let (t, r) = self.local_transform(0, row);
            orientations.push(r);
            positions.push(t * self.unit_scale);
        }
        make_hemisphere_continuous(&mut orientations);
        RootTrajectory {
            orientations,
            positions,
            frame_time: self.frame_time,
        }
    }

    /// Rotation order of the root's rotation channels, when it has all three.
    fn root_euler_order(&self) -> Option<[Axis; 3]> {
        let axes: Vec<Axis> = self
            .skeleton
            .root()
            .channels
            .iter()
            .filter_map(|c| c.rotation_axis())
            .collect();
        match axes.as_slice() {
            &[a, b, c] if a != b && b != c && a != c => Some([a, b, c]),
            _ => None,
        }
    }

    /// Applies a world-space rigid transform (yaw about +Y, then a
    /// translation in file units) to the root channels.
    ///
    /// Returns `None` unless the root has three distinct rotation channels and
    /// three position channels.
    pub fn rigidly_transformed(&self, yaw: f64, translation: Vec3) -> Option<MotionClip> {
        let order = self.root_euler_order()?;
        let root = self.skeleton.root();
        let pos_slots: Vec<(usize, Axis)> = root
            .channels
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.position_axis().map(|a| (i, a)))
            .collect();
        if pos_slots.len() != 3 {
            return None;
        }
        let rot_slots: Vec<usize> = root
            .channels
            .iter()
            .enumerate()
            .filter(|(_, c)| c.rotation_axis().is_some())
            .map(|(i, _)| i)
            .collect();
        let q_yaw = Orientation::yaw(yaw);
        let frames = self
            .frames
            .iter()
            .map(|row| {
                let (t, r) = self.local_transform(0, row);
                let new_r = compose(q_yaw, r);
                let new_t = q_yaw.rotate_vec(t) + translation - root.offset;
                let angles = new_r.to_euler(order);
                let mut out = row.clone();
                for (slot, a) in rot_slots.iter().zip(angles) {
                    out[*slot] = a.to_degrees();
                }
                for (slot, axis) in &pos_slots {
                    out[*slot] = new_t.to_array()[axis.index()];
                }
                out
            })
            .collect();
        Some(MotionClip {
            frames,
            ..self.clone()
        })
    }

    /// Writes the clip back out as BVH text. Numbers use the shortest
    /// representation that parses back to the same `f64`.
    pub fn to_bvh_string(&self) -> String {
        let mut s = String::from("HIERARCHY\n");
        let joints = &self.skeleton.joints;
        let mut stack: Vec<usize> = Vec::new();
        for (i, j) in joints.iter().enumerate() {
            while let Some(&top) = stack.last() {
                if Some(top) == j.parent {
                    break;
                }
                close_joint(&mut s, joints, &mut stack);
            }
            let depth = stack.len();
            let ind = "\t".repeat(depth);
            let kw = if i == 0 { "ROOT" } else { "JOINT" };
            let _ = writeln!(s, "{ind}{kw} {}", j.name);
            let _ = writeln!(s, "{ind}{{");
            let _ = writeln!(
                s,
                "{ind}\tOFFSET {} {} {}",
                j.offset.x, j.offset.y, j.offset.z
            );
            if !j.channels.is_empty() {
                let names: Vec<&str> = j.channels.iter().map(|c| c.name()).collect();
                let _ = writeln!(
                    s,
                    "{ind}\tCHANNELS {} {}",
                    j.channels.len(),
                    names.join(" ")
                );
            }
            stack.push(i);
        }
        while !stack.is_empty() {
            close_joint(&mut s, joints, &mut stack);
        }
        let _ = writeln!(s, "MOTION");
        let _ = writeln!(s, "Frames: {}", self.frames.len());
        let _ = writeln!(s, "Frame Time: {}", self.frame_time);
        for row in &self.frames {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", cells.join(" "));
        }
        s
    }
}

fn close_joint(s: &mut String, joints: &[Joint], stack: &mut Vec<usize>) {
    let j = stack.pop().expect("non-empty stack");
    let ind = "\t".repeat(stack.len());
    if let Some(e) = joints[j].end_site {
        let _ = writeln!(s, "{ind}\tEnd Site");
        let _ = writeln!(s, "{ind}\t{{");
        let _ = writeln!(s, "{ind}\t\tOFFSET {} {} {}", e.x, e.y, e.z);
        let _ = writeln!(s, "{ind}\t}}");
    }
    let _ = writeln!(s, "{ind}}}");
}

struct Tokens<'a> {
    toks: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn peek(&self) -> Option<(usize, &'a str)> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn line(&self) -> usize {
        self.peek().map_or(self.last_line, |(l, _)| l)
    }

    fn syntax(&self, reason: impl Into<String>) -> BvhError {
        BvhError::Syntax {
            line: self.line(),
            reason: reason.into(),
        }
    }

    fn expect(&mut self, word: &str) -> Result<usize, BvhError> {
        match self.next() {
            Some((l, t)) if t.eq_ignore_ascii_case(word) => Ok(l),
            Some((l, t)) => Err(BvhError::Syntax {
                line: l,
                reason: format!("expected {word:?}, found {t:?}"),
            }),
            None => Err(self.syntax(format!("expected {word:?}, found end of input"))),
        }
    }

    fn number(&mut self, what: &str) -> Result<f64, BvhError> {
        match self.next() {
            Some((l, t)) => t.parse::<f64>().map_err(|_| BvhError::Syntax {
                line: l,
                reason: format!("expected number for {what}, found {t:?}"),
            }),
            None => Err(self.syntax(format!("expected number for {what}, found end of input"))),
        }
    }

    /// Remaining tokens on the keyword's line, excluding a trailing `{`.
    fn name_on_line(&mut self, line: usize) -> Result<String, BvhError> {
        let mut parts = Vec::new();
        while let Some((l, t)) = self.peek() {
            if l != line || t == "{" {
                break;
            }
            parts.push(t);
            self.pos += 1;
        }
        if parts.is_empty() {
            return Err(BvhError::Syntax {
                line,
                reason: "joint name missing".into(),
            });
        }
        Ok(parts.join(" "))
    }
}

/// Parses a BVH document. Accepts LF or CRLF line endings and arbitrary indentation.
/// Strips a sequence of keywords, ignoring case and the whitespace around them.
fn strip_label<'a>(text: &'a str, words: &[&str]) -> Option<&'a str> {
    let mut rest = text;
    for w in words {
        rest = rest.trim_start();
        let head = rest.get(..w.len())?;
        if !head.eq_ignore_ascii_case(w) {
            return None;
        }
        rest = &rest[w.len()..];
    }
    Some(rest)
}

pub fn parse_bvh(input: &[u8]) -> Result<MotionClip, BvhError> {
    if let Some(pos) = input.iter().position(|&b| b == 0) {
        let line = 1 + input[..pos].iter().filter(|&&b| b == b'\n').count();
        return Err(BvhError::Binary { line });
    }
    let text = std::str::from_utf8(input).map_err(|e| {
        let line = 1 + input[..e.valid_up_to()]
            .iter()
            .filter(|&&b| b == b'\n')
            .count();
        BvhError::Binary { line }
    })?;
    let lines: Vec<&str> = text.lines().collect();

    let motion_line = lines
        .iter()
        .position(|l| l.trim().eq_ignore_ascii_case("MOTION"));
    let header_end = motion_line.unwrap_or(lines.len());

    let toks: Vec<(usize, &str)> = lines[..header_end]
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)))
        .collect();
    let mut tk = Tokens {
        toks,
        pos: 0,
        last_line: header_end.max(1),
    };

    match tk.peek() {
        Some((_, t)) if t.eq_ignore_ascii_case("HIERARCHY") => {
            tk.next();
        }
        Some((line, _)) => return Err(BvhError::MissingHierarchy { line }),
        None => return Err(BvhError::MissingHierarchy { line: 1 }),
    }
    let root_line = tk.expect("ROOT")?;
    let mut joints = Vec::new();
    parse_joint(&mut tk, root_line, None, &mut joints)?;
    if let Some((l, t)) = tk.peek() {
        return Err(BvhError::Syntax {
            line: l,
            reason: format!("unexpected {t:?} after root joint (only one root allowed)"),
        });
    }
    let skeleton = Skeleton::new(joints).map_err(|reason| BvhError::Syntax {
        line: root_line,
        reason,
    })?;

    let Some(motion_idx) = motion_line else {
        return Err(BvhError::Syntax {
            line: lines.len().max(1),
            reason: "missing MOTION section".into(),
        });
    };
    parse_motion(&lines, motion_idx + 1, skeleton)
}

fn parse_joint(
    tk: &mut Tokens<'_>,
    kw_line: usize,
    parent: Option<usize>,
    joints: &mut Vec<Joint>,
) -> Result<(), BvhError> {
    let name = tk.name_on_line(kw_line)?;
    tk.expect("{")?;
    tk.expect("OFFSET")?;
    let offset = Vec3::new(
        tk.number("OFFSET")?,
        tk.number("OFFSET")?,
        tk.number("OFFSET")?,
    );
    let index = joints.len();
    joints.push(Joint {
        name,
        parent,
        offset,
        channels: Vec::new(),
        end_site: None,
    });

    loop {
        let Some((line, t)) = tk.next() else {
            return Err(tk.syntax(format!(
                "unterminated joint {:?}: expected '}}'",
                joints[index].name
            )));
        };
        match t.to_ascii_uppercase().as_str() {
            "CHANNELS" => {
                let n = tk.number("CHANNELS count")?;
                if n < 0.0 || n.fract() != 0.0 {
                    return Err(BvhError::Syntax {
                        line,
                        reason: format!("invalid channel count {n}"),
                    });
                }
                let mut channels = Vec::with_capacity(n as usize);
                for _ in 0..n as usize {
                    let (l, c) = tk.next().ok_or_else(|| tk.syntax("channel list ended early"))?;
                    let ch = Channel::parse(c).ok_or_else(|| BvhError::Syntax {
                        line: l,
                        reason: format!("unknown channel {c:?}"),
                    })?;
                    channels.push(ch);
                }
                joints[index].channels = channels;
            }
            "JOINT" => parse_joint(tk, line, Some(index), joints)?,
            "END" => {
                tk.expect("Site")?;
                tk.expect("{")?;
                tk.expect("OFFSET")?;
                let e = Vec3::new(
                    tk.number("End Site OFFSET")?,
                    tk.number("End Site OFFSET")?,
                    tk.number("End Site OFFSET")?,
                );
                tk.expect("}")?;
                if joints[index].end_site.replace(e).is_some() {
                    return Err(BvhError::Syntax {
                        line,
                        reason: "joint has more than one End Site".into(),
                    });
                }
            }
            "}" => return Ok(()),
            _ => {
                return Err(BvhError::Syntax {
                    line,
                    reason: format!("unexpected token {t:?}"),
                })
            }
        }
    }
}

fn parse_motion(lines: &[&str], start: usize, skeleton: Skeleton) -> Result<MotionClip, BvhError> {
    let mut idx = start;
    let next_content = |idx: &mut usize| -> Option<(usize, &str)> {
        while *idx < lines.len() {
            let l = lines[*idx].trim();
            *idx += 1;
            if !l.is_empty() {
                return Some((*idx, l));
            }
        }
        None
    };

    let (line, frames_line) = next_content(&mut idx).ok_or(BvhError::Syntax {
        line: lines.len(),
        reason: "missing Frames count".into(),
    })?;
    let declared = strip_label(frames_line, &["Frames:"])
        .map(str::trim)
        .ok_or_else(|| BvhError::Syntax {
            line,
            reason: format!("expected \"Frames: <count>\", found {frames_line:?}"),
        })?
        .parse::<usize>()
        .map_err(|_| BvhError::Syntax {
            line,
            reason: "frame count is not a non-negative integer".into(),
        })?;
    if declared == 0 {
        return Err(BvhError::Syntax {
            line,
            reason: "clip must contain at least one frame".into(),
        });
    }

    let frame_time = match next_content(&mut idx) {
        Some((l, text)) => {
            let Some(v) = strip_label(text, &["Frame", "Time:"]) else {
                return Err(BvhError::MissingFrameTime { line: l });
            };
            let ft = v.trim().parse::<f64>().map_err(|_| BvhError::Syntax {
                line: l,
                reason: format!("invalid frame time {:?}", v.trim()),
            })?;
            if !(ft > 0.0 && ft.is_finite()) {
                return Err(BvhError::Syntax {
                    line: l,
                    reason: format!("frame time must be positive, got {ft}"),
                });
            }
            ft
        }
        None => return Err(BvhError::MissingFrameTime { line: lines.len() + 1 }),
    };

    let expected = skeleton.channel_count();
    let mut frames = Vec::with_capacity(declared);
    while let Some((l, text)) = next_content(&mut idx) {
        let frame = frames.len() + 1;
        if frame > declared {
            return Err(BvhError::ExtraFrame { line: l, declared });
        }
        let mut row = Vec::with_capacity(expected);
        for tok in text.split_whitespace() {
            let v = tok.parse::<f64>().map_err(|_| BvhError::NonNumeric {
                line: l,
                frame,
                token: tok.to_string(),
            })?;
            row.push(v);
        }
        if row.len() != expected {
            return Err(BvhError::ChannelCount {
                line: l,
                frame,
                found: row.len(),
                expected,
            });
        }
        frames.push(row);
    }
    if frames.len() < declared {
        return Err(BvhError::MissingFrame {
            line: lines.len() + 1,
            frame: frames.len() + 1,
            declared,
            found: frames.len(),
        });
    }

    Ok(MotionClip {
        skeleton,
        frame_time,
        frames,
        unit_scale: DEFAULT_UNIT_SCALE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_JOINT: &str = "HIERARCHY
ROOT Hips
{
  OFFSET 0 0 0
  CHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation
  JOINT Chest
  {
    OFFSET 0 10 0
    CHANNELS 3 Zrotation Xrotation Yrotation
    End Site
    {
      OFFSET 0 5 0
    }
  }
}
MOTION
Frames: 2
Frame Time: 0.0166667
0 90 0 0 0 0 0 0 0
1 91 2 10 20 30 5 -5 15
";

    #[test]
    fn parses_two_joint_clip() {
        let clip = parse_bvh(TWO_JOINT.as_bytes()).unwrap();
        assert_eq!(clip.skeleton.joints().len(), 2);
        assert_eq!(clip.skeleton.channel_count(), 9);
        assert_eq!(clip.frame_count(), 2);
        assert_eq!(clip.skeleton.joints()[1].parent, Some(0));
        assert_eq!(clip.skeleton.joints()[1].end_site, Some(Vec3::new(0.0, 5.0, 0.0)));
        assert_eq!(
            clip.skeleton.joints()[1].channels,
            vec![Channel::Zrotation, Channel::Xrotation, Channel::Yrotation]
        );
    }

    #[test]
    fn crlf_and_indentation_are_tolerated() {
        let crlf = TWO_JOINT.replace('\n', "\r\n").replace("  ", "\t\t ");
        let a = parse_bvh(TWO_JOINT.as_bytes()).unwrap();
        let b = parse_bvh(crlf.as_bytes()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_input_is_missing_hierarchy() {
        let err = parse_bvh(b"").unwrap_err();
        assert_eq!(err, BvhError::MissingHierarchy { line: 1 });
        assert_eq!(err.to_string(), "line 1: missing HIERARCHY");
    }

    #[test]
    fn binary_input_rejected() {
        let err = parse_bvh(b"HIERARCHY\n\x00\x01\x02").unwrap_err();
        assert!(matches!(err, BvhError::Binary { line: 2 }));
        assert!(matches!(parse_bvh(&[0xff, 0xfe, b'\n']), Err(BvhError::Binary { .. })));
    }

    #[test]
    fn short_frame_data_names_missing_frame() {
        let text = TWO_JOINT.replace("Frames: 2", "Frames: 3");
        match parse_bvh(text.as_bytes()).unwrap_err() {
            BvhError::MissingFrame { frame, declared, found, .. } => {
                assert_eq!((frame, declared, found), (3, 3, 2));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn channel_count_mismatch() {
        let text = TWO_JOINT.replace("1 91 2 10 20 30 5 -5 15", "1 91 2 10 20 30 5 -5");
        let err = parse_bvh(text.as_bytes()).unwrap_err();
        assert_eq!(
            err,
            BvhError::ChannelCount {
                line: 20,
                frame: 2,
                found: 8,
                expected: 9
            }
        );
    }

    #[test]
    fn non_numeric_and_missing_frame_time() {
        let text = TWO_JOINT.replace("1 91 2", "1 abc 2");
        assert!(matches!(
            parse_bvh(text.as_bytes()).unwrap_err(),
            BvhError::NonNumeric { frame: 2, line: 20, .. }
        ));
        let text = TWO_JOINT.replace("Frame Time: 0.0166667\n", "");
        assert!(matches!(
            parse_bvh(text.as_bytes()).unwrap_err(),
            BvhError::MissingFrameTime { line: 18 }
        ));
    }

    #[test]
    fn malformed_header() {
        let text = TWO_JOINT.replace("OFFSET 0 10 0", "OFFSET 0 ten 0");
        let err = parse_bvh(text.as_bytes()).unwrap_err();
        assert_eq!(err.line(), 8);
        let text = TWO_JOINT.replace("Zrotation Xrotation Yrotation\n    End", "Zrotation Xrot Yrotation\n    End");
        assert!(matches!(parse_bvh(text.as_bytes()).unwrap_err(), BvhError::Syntax { line: 9, .. }));
    }

    #[test]
    fn zero_rotations_give_cumulative_offsets() {
        let text = TWO_JOINT.replace("1 91 2 10 20 30 5 -5 15", "3 4 5 0 0 0 0 0 0");
        let clip = parse_bvh(text.as_bytes()).unwrap();
        let poses = clip.forward_kinematics(1);
        assert_eq!(poses[0].position, Vec3::new(3.0, 4.0, 5.0));
        assert_eq!(poses[1].position, Vec3::new(3.0, 14.0, 5.0));
        assert_eq!(poses[1].orientation, Orientation::IDENTITY);
    }

    #[test]
    fn root_yaw_moves_child_to_minus_z() {
        let text = "HIERARCHY\nROOT r\n{\nOFFSET 0 0 0\nCHANNELS 6 Xposition Yposition Zposition Zrotation Xrotation Yrotation\nJOINT c\n{\nOFFSET 1 0 0\nCHANNELS 3 Zrotation Xrotation Yrotation\n}\n}\nMOTION\nFrames: 1\nFrame Time: 0.5\n0 0 0 0 0 90 0 0 0\n";
        let clip = parse_bvh(text.as_bytes()).unwrap();
        let p = clip.forward_kinematics(0)[1].position;
        assert!(p.x.abs() < 1e-12 && p.y.abs() < 1e-12 && (p.z + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hemisphere_continuity_over_two_turns() {
        let mut text = String::from("HIERARCHY\nROOT r\n{\nOFFSET 0 0 0\nCHANNELS 3 Zrotation Xrotation Yrotation\n}\nMOTION\nFrames: 145\nFrame Time: 0.1\n");
        for i in 0..145 {
            text.push_str(&format!("0 0 {}\n", 5.0 * i as f64));
        }
        let traj = parse_bvh(text.as_bytes()).unwrap().root_trajectory();
        for w in traj.orientations.windows(2) {
            assert!(w[0].dot(w[1]) >= 0.0);
        }
    }

    #[test]
    fn downsample_keeps_every_stride() {
        let clip = parse_bvh(TWO_JOINT.as_bytes()).unwrap();
        let d = clip.downsample(2);
        assert_eq!(d.frame_count(), 1);
        assert_eq!(d.frame_time, clip.frame_time * 2.0);
        assert_eq!(d.frames[0], clip.frames[0]);
    }

    #[test]
    fn serialize_roundtrip_is_exact() {
        let clip = parse_bvh(TWO_JOINT.as_bytes()).unwrap();
        let again = parse_bvh(clip.to_bvh_string().as_bytes()).unwrap();
        assert_eq!(clip, again);
    }

    #[test]
    fn rigid_transform_composes_yaw() {
        let clip = parse_bvh(TWO_JOINT.as_bytes()).unwrap();
        let phi = 1.234;
        let moved = clip.rigidly_transformed(phi, Vec3::new(7.0, 0.0, -3.0)).unwrap();
        let a = clip.root_trajectory();
        let b = moved.root_trajectory();
        for (qa, qb) in a.orientations.iter().zip(&b.orientations) {
            let expected = compose(Orientation::yaw(phi), *qa);
            assert!(expected.dot(*qb).abs() > 1.0 - 1e-12);
        }
    }
}
