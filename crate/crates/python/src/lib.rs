//! Python bindings for `dirinv`.
//!
//! Vectors cross the boundary as 3-tuples and quaternions as `Orientation`
//! objects with `(w, x, y, z)` components.

use std::path::PathBuf;
use std::str::FromStr;

use dirinv::cli::{roundtrip_errors, DirSelector};
use dirinv::export::{self, ExportOptions, Format};
use dirinv::features::{default_thresholds, smoothness};
use dirinv::mapping::{singularity_distance, DEFAULT_EPSILON_SING};
use dirinv::motiondir::{self, SelectOptions, DEFAULT_LADDER_THRESHOLD, DEFAULT_SAMPLES};
use dirinv::rotmath as rm;
use dirinv::{bvh, synth, FeatureScheme, UnitVec3, Vec3};
use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

create_exception!(pydirinv, BvhError, PyValueError, "Malformed BVH input.");
create_exception!(
    pydirinv,
    SingularityError,
    PyValueError,
    "Orientation too close to a singular point of the mapping scheme."
);

type V3 = (f64, f64, f64);

fn unit(v: V3) -> PyResult<UnitVec3> {
    UnitVec3::try_new(Vec3::new(v.0, v.1, v.2))
        .ok_or_else(|| PyValueError::new_err("direction must be a finite, non-zero vector"))
}

fn tuple(v: Vec3) -> V3 {
    (v.x, v.y, v.z)
}

fn utuple(v: UnitVec3) -> V3 {
    (v.x(), v.y(), v.z())
}

#[pyclass(frozen, skip_from_py_object, name = "Orientation", module = "pydirinv")]
#[derive(Clone, Copy)]
pub struct PyOrientation(rm::Orientation);

#[pymethods]
impl PyOrientation {
    /// Unit quaternion; the components are normalized.
    #[new]
    #[pyo3(signature = (w=1.0, x=0.0, y=0.0, z=0.0))]
    fn new(w: f64, x: f64, y: f64, z: f64) -> PyResult<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(PyValueError::new_err("quaternion must be finite and non-zero"));
        }
        Ok(PyOrientation(rm::Orientation::from_wxyz(w, x, y, z)))
    }

    #[staticmethod]
    fn identity() -> Self {
        PyOrientation(rm::Orientation::IDENTITY)
    }

    /// Rotation by `angle` radians about +Y.
    #[staticmethod]
    fn yaw(angle: f64) -> Self {
        PyOrientation(rm::Orientation::yaw(angle))
    }

    #[staticmethod]
    fn from_axis_angle(axis: V3, angle: f64) -> PyResult<Self> {
        Ok(PyOrientation(rm::Orientation::from_axis_angle(unit(axis)?, angle)))
    }

    /// Intrinsic Euler angles in radians, e.g. `order="ZXY"`.
    #[staticmethod]
    fn from_euler(order: &str, angles: V3) -> PyResult<Self> {
        Ok(PyOrientation(rm::Orientation::from_euler(
            parse_order(order)?,
            [angles.0, angles.1, angles.2],
        )))
    }

    #[getter]
    fn wxyz(&self) -> (f64, f64, f64, f64) {
        let q = self.0;
        (q.w, q.x, q.y, q.z)
    }

    fn inverse(&self) -> Self {
        PyOrientation(self.0.inverse())
    }

    /// `self ∘ other`: `other` is applied first.
    fn compose(&self, other: &PyOrientation) -> Self {
        PyOrientation(rm::compose(self.0, other.0))
    }

    fn __mul__(&self, other: &PyOrientation) -> Self {
        self.compose(other)
    }

    fn rotate(&self, v: V3) -> V3 {
        tuple(self.0.rotate_vec(Vec3::new(v.0, v.1, v.2)))
    }

    /// Rotation angle in `[0, π]`.
    fn angle(&self) -> f64 {
        self.0.angle()
    }

    fn angle_to(&self, other: &PyOrientation) -> f64 {
        self.0.angle_to(other.0)
    }

    fn to_euler(&self, order: &str) -> PyResult<V3> {
        let [a, b, c] = self.0.to_euler(parse_order(order)?);
        Ok((a, b, c))
    }

    fn to_matrix(&self) -> [[f64; 3]; 3] {
        self.0.to_matrix()
    }

    fn __repr__(&self) -> String {
        let q = self.0;
        format!("Orientation(w={}, x={}, y={}, z={})", q.w, q.x, q.y, q.z)
    }
}

fn parse_order(order: &str) -> PyResult<[rm::Axis; 3]> {
    let axes: Vec<rm::Axis> = order
        .chars()
        .map(|c| match c.to_ascii_uppercase() {
            'X' => Ok(rm::Axis::X),
            'Y' => Ok(rm::Axis::Y),
            'Z' => Ok(rm::Axis::Z),
            _ => Err(PyValueError::new_err(format!("bad Euler order {order:?}"))),
        })
        .collect::<PyResult<_>>()?;
    match axes[..] {
        [a, b, c] if a != b && b != c && a != c => Ok([a, b, c]),
        _ => Err(PyValueError::new_err(format!("Euler order must permute XYZ, got {order:?}"))),
    }
}

#[pyclass(frozen, name = "YawDecomposition", module = "pydirinv")]
pub struct PyYawDecomposition {
    /// Yaw angle θ removed from the input, radians.
    #[pyo3(get)]
    yaw: f64,
    #[pyo3(get)]
    g_y: PyOrientation,
    #[pyo3(get)]
    g0: PyOrientation,
    #[pyo3(get)]
    sing_distance: f64,
}

#[pymethods]
impl PyYawDecomposition {
    fn __repr__(&self) -> String {
        format!(
            "YawDecomposition(yaw={}, g0={}, sing_distance={})",
            self.yaw,
            self.g0.__repr__(),
            self.sing_distance
        )
    }
}

#[pyclass(frozen, name = "MappingScheme", module = "pydirinv")]
pub struct PyMappingScheme(dirinv::MappingScheme);

#[pymethods]
impl PyMappingScheme {
    #[new]
    #[pyo3(signature = (direction=(1.0, 0.0, 0.0), epsilon_sing=DEFAULT_EPSILON_SING))]
    fn new(direction: V3, epsilon_sing: f64) -> PyResult<Self> {
        if !(epsilon_sing >= 0.0 && epsilon_sing.is_finite()) {
            return Err(PyValueError::new_err("epsilon_sing must be finite and non-negative"));
        }
        Ok(PyMappingScheme(dirinv::MappingScheme::with_epsilon(unit(direction)?, epsilon_sing)))
    }

    #[getter]
    fn direction(&self) -> V3 {
        utuple(self.0.direction())
    }

    #[getter]
    fn epsilon_sing(&self) -> f64 {
        self.0.epsilon_sing()
    }

    fn singular_points(&self) -> Vec<V3> {
        self.0.singular_points().into_iter().map(utuple).collect()
    }

    fn singularity_distance(&self, g: &PyOrientation) -> f64 {
        singularity_distance(g.0, &self.0)
    }

    fn yaw_angle(&self, g: &PyOrientation) -> f64 {
        self.0.yaw_angle(g.0)
    }

    /// Splits `g` into a yaw and the representative `g0`. Raises
    /// `SingularityError` inside the singular threshold.
    fn compute_gy(&self, g: &PyOrientation) -> PyResult<PyYawDecomposition> {
        let d = dirinv::compute_gy(g.0, &self.0).map_err(|e| {
            SingularityError::new_err(format!("singularity distance {} below threshold", e.sing_distance))
        })?;
        Ok(PyYawDecomposition {
            yaw: d.g_y.angle,
            g_y: PyOrientation(d.g_y.to_orientation()),
            g0: PyOrientation(d.g_0),
            sing_distance: d.sing_distance,
        })
    }

    fn __repr__(&self) -> String {
        let r = self.0.direction();
        format!(
            "MappingScheme(direction=({}, {}, {}), epsilon_sing={})",
            r.x(),
            r.y(),
            r.z(),
            self.0.epsilon_sing()
        )
    }
}

#[pyclass(frozen, name = "MotionClip", module = "pydirinv")]
pub struct PyMotionClip(bvh::MotionClip);

#[pymethods]
impl PyMotionClip {
    #[getter]
    fn frame_count(&self) -> usize {
        self.0.frame_count()
    }

    #[getter]
    fn frame_time(&self) -> f64 {
        self.0.frame_time
    }

    #[getter]
    fn frame_rate(&self) -> f64 {
        self.0.frame_rate()
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.0.duration()
    }

    #[getter]
    fn unit_scale(&self) -> f64 {
        self.0.unit_scale
    }

    #[getter]
    fn channel_count(&self) -> usize {
        self.0.skeleton.channel_count()
    }

    #[getter]
    fn joint_names(&self) -> Vec<String> {
        self.0.skeleton.joints().iter().map(|j| j.name.clone()).collect()
    }

    /// Raw channel values of one frame (rotations in degrees).
    fn frame(&self, index: usize) -> PyResult<Vec<f64>> {
        self.0
            .frames
            .get(index)
            .cloned()
            .ok_or_else(|| PyIndexError::new_err("frame index out of range"))
    }

    fn with_unit_scale(&self, scale: f64) -> Self {
        PyMotionClip(self.0.clone().with_unit_scale(scale))
    }

    fn downsample(&self, stride: usize) -> PyResult<Self> {
        if stride == 0 {
            return Err(PyValueError::new_err("stride must be at least 1"));
        }
        Ok(PyMotionClip(self.0.downsample(stride)))
    }

    /// Copy with a global yaw (radians) and translation (file units) applied.
    #[pyo3(signature = (yaw, translation=(0.0, 0.0, 0.0)))]
    fn transformed(&self, yaw: f64, translation: V3) -> PyResult<Self> {
        self.0
            .rigidly_transformed(yaw, Vec3::new(translation.0, translation.1, translation.2))
            .map(PyMotionClip)
            .ok_or_else(|| PyValueError::new_err("root needs three position and three rotation channels"))
    }

    fn root_orientations(&self) -> Vec<PyOrientation> {
        self.0.root_trajectory().orientations.into_iter().map(PyOrientation).collect()
    }

    /// Root positions in meters.
    fn root_positions(&self) -> Vec<V3> {
        self.0.root_trajectory().positions.into_iter().map(tuple).collect()
    }

    /// Global `(position, orientation)` per joint, positions in file units.
    fn forward_kinematics(&self, frame: usize) -> PyResult<Vec<(V3, PyOrientation)>> {
        if frame >= self.0.frame_count() {
            return Err(PyIndexError::new_err("frame index out of range"));
        }
        Ok(self
            .0
            .forward_kinematics(frame)
            .into_iter()
            .map(|p| (tuple(p.position), PyOrientation(p.orientation)))
            .collect())
    }

    fn to_bvh(&self) -> String {
        self.0.to_bvh_string()
    }

    fn __len__(&self) -> usize {
        self.0.frame_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "MotionClip({} joints, {} channels, {} frames, {:.1} fps)",
            self.0.skeleton.joints().len(),
            self.0.skeleton.channel_count(),
            self.0.frame_count(),
            self.0.frame_rate()
        )
    }
}

#[pyclass(frozen, name = "DirectionReport", module = "pydirinv")]
pub struct PyDirectionReport(motiondir::DirectionReport);

#[pymethods]
impl PyDirectionReport {
    #[getter]
    fn direction(&self) -> V3 {
        utuple(self.0.direction)
    }

    #[getter]
    fn clearance(&self) -> f64 {
        self.0.clearance
    }

    #[getter]
    fn clearance_deg(&self) -> f64 {
        self.0.clearance_deg
    }

    #[getter]
    fn samples(&self) -> usize {
        self.0.samples
    }

    /// `"lattice"`, `"ladder_x"` or `"ladder_z"`.
    #[getter]
    fn source(&self) -> &'static str {
        match self.0.source {
            motiondir::DirectionSource::Lattice => "lattice",
            motiondir::DirectionSource::LadderX => "ladder_x",
            motiondir::DirectionSource::LadderZ => "ladder_z",
        }
    }

    #[getter]
    fn lattice_index(&self) -> Option<usize> {
        self.0.lattice_index
    }

    #[getter]
    fn polished(&self) -> bool {
        self.0.polished
    }

    fn __repr__(&self) -> String {
        self.0.to_string()
    }
}

#[pyclass(frozen, name = "FeatureSet", module = "pydirinv")]
pub struct PyFeatureSet(dirinv::FeatureSet);

#[pymethods]
impl PyFeatureSet {
    /// `"gf"`, `"dif"` or `"dim"`.
    #[getter]
    fn scheme(&self) -> String {
        self.0.scheme.tag().to_string()
    }

    #[getter]
    fn direction(&self) -> Option<V3> {
        self.0.scheme.mapping().map(|m| utuple(m.direction()))
    }

    #[getter]
    fn frame_time(&self) -> f64 {
        self.0.frame_time
    }

    #[getter]
    fn singular_count(&self) -> usize {
        self.0.singular_count()
    }

    fn singular_flags(&self) -> Vec<bool> {
        self.0.frames.iter().map(|f| f.singular).collect()
    }

    /// Numeric channel names, in the order used by `rows`.
    fn channel_names(&self) -> Vec<String> {
        self.0.channel_names()
    }

    /// One list of channel values per frame. GF rows carry 0 as yaw rate.
    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.frames.iter().map(dirinv::FeatureSet::channels).collect()
    }

    /// Heading rate per frame (rad/s), `None` for GF.
    fn yaw_rates(&self) -> Option<Vec<f64>> {
        self.0.frames.iter().map(|f| f.yaw_rate).collect()
    }

    #[pyo3(signature = (precision=export::DEFAULT_PRECISION, velocities=true))]
    fn to_csv(&self, precision: usize, velocities: bool) -> String {
        self.render(Format::Csv, precision, velocities)
    }

    #[pyo3(signature = (precision=export::DEFAULT_PRECISION, velocities=true))]
    fn to_jsonl(&self, precision: usize, velocities: bool) -> String {
        self.render(Format::Jsonl, precision, velocities)
    }

    fn __len__(&self) -> usize {
        self.0.frames.len()
    }
}

impl PyFeatureSet {
    fn render(&self, format: Format, precision: usize, velocities: bool) -> String {
        let mut buf = Vec::new();
        export::write_features(&mut buf, &self.0, format, &ExportOptions { precision, velocities })
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("exports are ASCII")
    }
}

fn bvh_err(e: bvh::BvhError) -> PyErr {
    BvhError::new_err(e.to_string())
}

/// Parses BVH text (`str` or `bytes`).
#[pyfunction]
#[pyo3(signature = (data, unit_scale=bvh::DEFAULT_UNIT_SCALE))]
fn parse_bvh(data: &Bound<'_, PyAny>, unit_scale: f64) -> PyResult<PyMotionClip> {
    let bytes: Vec<u8> = match data.extract::<String>() {
        Ok(s) => s.into_bytes(),
        Err(_) => data.extract::<Vec<u8>>()?,
    };
    let clip = dirinv::parse_bvh(&bytes).map_err(bvh_err)?;
    Ok(PyMotionClip(clip.with_unit_scale(unit_scale)))
}

#[pyfunction]
#[pyo3(signature = (path, unit_scale=bvh::DEFAULT_UNIT_SCALE))]
fn load_bvh(path: PathBuf, unit_scale: f64) -> PyResult<PyMotionClip> {
    let bytes = std::fs::read(&path)?;
    let clip = dirinv::parse_bvh(&bytes)
        .map_err(|e| BvhError::new_err(format!("{}: {e}", path.display())))?;
    Ok(PyMotionClip(clip.with_unit_scale(unit_scale)))
}

#[pyfunction]
fn compose(a: &PyOrientation, b: &PyOrientation) -> PyOrientation {
    a.compose(b)
}

#[pyfunction]
fn geodesic_distance(a: V3, b: V3) -> PyResult<f64> {
    Ok(rm::geodesic_distance(unit(a)?, unit(b)?))
}

#[pyfunction]
fn minimal_rotation(a: V3, b: V3) -> PyResult<PyOrientation> {
    Ok(PyOrientation(rm::minimal_rotation(unit(a)?, unit(b)?)))
}

#[pyfunction]
#[pyo3(signature = (n=DEFAULT_SAMPLES))]
fn sample_sphere(n: usize) -> PyResult<Vec<V3>> {
    if n == 0 {
        return Err(PyValueError::new_err("n must be at least 1"));
    }
    Ok(rm::sample_sphere(n).into_iter().map(utuple).collect())
}

/// Chooses the motion direction of a clip.
#[pyfunction]
#[pyo3(signature = (clip, samples=DEFAULT_SAMPLES, ladder=false, threshold=DEFAULT_LADDER_THRESHOLD, polish=false))]
fn select_motion_direction(
    py: Python<'_>,
    clip: &PyMotionClip,
    samples: usize,
    ladder: bool,
    threshold: f64,
    polish: bool,
) -> PyResult<PyDirectionReport> {
    if samples == 0 {
        return Err(PyValueError::new_err("samples must be at least 1"));
    }
    let traj = clip.0.root_trajectory();
    let report = py.detach(|| {
        if ladder {
            motiondir::fallback_ladder(&traj, threshold, samples)
        } else {
            motiondir::select_motion_direction_with(
                &traj,
                samples,
                SelectOptions {
                    polish,
                    ..Default::default()
                },
            )
        }
    });
    Ok(PyDirectionReport(report))
}

/// Per-frame clearance (radians) of a candidate direction.
#[pyfunction]
fn clearance_profile(clip: &PyMotionClip, direction: V3) -> PyResult<Vec<f64>> {
    Ok(motiondir::clearance_profile(&clip.0.root_trajectory(), unit(direction)?))
}

fn resolve_scheme(
    clip: &bvh::MotionClip,
    scheme: &str,
    direction: Option<&Bound<'_, PyAny>>,
    epsilon_sing: f64,
    samples: usize,
) -> PyResult<FeatureScheme> {
    let selector = match direction {
        None => DirSelector::Auto,
        Some(d) => match d.extract::<String>() {
            Ok(s) => DirSelector::from_str(&s).map_err(PyValueError::new_err)?,
            Err(_) => DirSelector::Explicit(unit(d.extract::<V3>()?)?),
        },
    };
    let r = match (scheme.to_ascii_lowercase().as_str(), selector) {
        ("gf", _) => return Ok(FeatureScheme::Global),
        ("dif", DirSelector::X | DirSelector::Auto) => UnitVec3::X,
        ("dif", _) => return Err(PyValueError::new_err("dif always uses the X axis; use scheme=\"dim\"")),
        ("dim", DirSelector::X) => UnitVec3::X,
        ("dim", DirSelector::Z) => UnitVec3::Z,
        ("dim", DirSelector::Explicit(v)) => v,
        ("dim", DirSelector::Auto) => motiondir::select_motion_direction(&clip.root_trajectory(), samples).direction,
        (other, _) => return Err(PyValueError::new_err(format!("unknown scheme {other:?}"))),
    };
    Ok(FeatureScheme::Invariant(dirinv::MappingScheme::with_epsilon(r, epsilon_sing)))
}

/// Extracts GF / DIF / DIM features. `direction` is `"x"`, `"z"`, `"auto"`,
/// a 3-tuple, or `None` (auto) and only matters for DIM.
#[pyfunction]
#[pyo3(signature = (clip, scheme="dim", direction=None, epsilon_sing=DEFAULT_EPSILON_SING, samples=DEFAULT_SAMPLES))]
fn extract_features(
    py: Python<'_>,
    clip: &PyMotionClip,
    scheme: &str,
    direction: Option<&Bound<'_, PyAny>>,
    epsilon_sing: f64,
    samples: usize,
) -> PyResult<PyFeatureSet> {
    let scheme = resolve_scheme(&clip.0, scheme, direction, epsilon_sing, samples)?;
    Ok(PyFeatureSet(py.detach(|| dirinv::extract_features(&clip.0, &scheme))))
}

/// Frames where a feature stream jumps, using thresholds calibrated on the
/// clip itself.
#[pyfunction]
#[pyo3(signature = (clip, features, samples=DEFAULT_SAMPLES))]
fn discontinuities(clip: &PyMotionClip, features: &PyFeatureSet, samples: usize) -> PyResult<Vec<usize>> {
    if features.0.frames.len() < 2 {
        return Err(PyValueError::new_err("need at least two frames"));
    }
    let thresholds = default_thresholds(&clip.0, samples);
    Ok(smoothness(&features.0, &thresholds).discontinuity_frames)
}

/// Maximum root position error (m) and orientation error (rad) after
/// extracting features and integrating them back.
#[pyfunction]
#[pyo3(signature = (clip, scheme="dim", direction=None, epsilon_sing=DEFAULT_EPSILON_SING, samples=DEFAULT_SAMPLES))]
fn roundtrip(
    clip: &PyMotionClip,
    scheme: &str,
    direction: Option<&Bound<'_, PyAny>>,
    epsilon_sing: f64,
    samples: usize,
) -> PyResult<(f64, f64)> {
    let scheme = resolve_scheme(&clip.0, scheme, direction, epsilon_sing, samples)?;
    roundtrip_errors(&clip.0, &scheme).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Synthetic clip: `kind` is one of static, turn, walk, backflip, spin,
/// cartwheel, wander.
#[pyfunction]
#[pyo3(signature = (kind, frames=120, cycles=1, rate=0.8))]
fn synthesize(kind: &str, frames: usize, cycles: usize, rate: f64) -> PyResult<PyMotionClip> {
    if frames < 2 {
        return Err(PyValueError::new_err("frames must be at least 2"));
    }
    let clip = match kind {
        "static" => synth::static_clip(frames),
        "turn" => synth::yaw_profile(frames, |s| rate * s),
        "walk" => synth::turning_walk(frames, rate),
        "backflip" => synth::backflip(frames, cycles.max(1)),
        "spin" => synth::composite_spin(frames),
        "cartwheel" => synth::cartwheel_flip(frames),
        "wander" => synth::wander(frames, &synth::Wander::default()),
        other => return Err(PyValueError::new_err(format!("unknown synthetic clip {other:?}"))),
    };
    Ok(PyMotionClip(clip))
}

#[pymodule]
fn pydirinv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BvhError", m.py().get_type::<BvhError>())?;
    m.add("SingularityError", m.py().get_type::<SingularityError>())?;
    m.add_class::<PyOrientation>()?;
    m.add_class::<PyYawDecomposition>()?;
    m.add_class::<PyMappingScheme>()?;
    m.add_class::<PyMotionClip>()?;
    m.add_class::<PyDirectionReport>()?;
    m.add_class::<PyFeatureSet>()?;
    m.add_function(wrap_pyfunction!(parse_bvh, m)?)?;
    m.add_function(wrap_pyfunction!(load_bvh, m)?)?;
    m.add_function(wrap_pyfunction!(compose, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic_distance, m)?)?;
    m.add_function(wrap_pyfunction!(minimal_rotation, m)?)?;
    m.add_function(wrap_pyfunction!(sample_sphere, m)?)?;
    m.add_function(wrap_pyfunction!(select_motion_direction, m)?)?;
    m.add_function(wrap_pyfunction!(clearance_profile, m)?)?;
    m.add_function(wrap_pyfunction!(extract_features, m)?)?;
    m.add_function(wrap_pyfunction!(discontinuities, m)?)?;
    m.add_function(wrap_pyfunction!(roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add("DEFAULT_SAMPLES", DEFAULT_SAMPLES)?;
    m.add("DEFAULT_EPSILON_SING", DEFAULT_EPSILON_SING)?;
    Ok(())
}
