//! Helpers and independent oracles shared by the integration tests.
//!
//! The oracles below work on plain arrays and rotation matrices so that they
//! do not share code paths with the library's quaternion routines.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};

use dirinv::{Orientation, RootTrajectory};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn dirinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dirinv"))
        .args(args)
        .env_remove("DIRINV_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub type Mat3 = [[f64; 3]; 3];

/// Rotation matrix of a unit quaternion (w, x, y, z).
pub fn quat_matrix(q: [f64; 4]) -> Mat3 {
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

pub fn orientation_matrix(g: Orientation) -> Mat3 {
    quat_matrix([g.w, g.x, g.y, g.z])
}

pub fn mat_vec(m: Mat3, v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Angle between unit vectors through the half-chord, stable at 0 and π.
pub fn angle_between(a: [f64; 3], b: [f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    2.0 * (norm(d) / 2.0).min(1.0).asin()
}

/// Orbit-sphere point of an orientation: the inverse rotation applied to +Y,
/// i.e. the middle row of the rotation matrix.
pub fn orbit_point_oracle(g: Orientation) -> [f64; 3] {
    let m = orientation_matrix(g);
    normalize(m[1])
}

/// Clearance of a candidate direction over a set of orbit points.
pub fn clearance_oracle(points: &[[f64; 3]], r: [f64; 3]) -> f64 {
    let neg = [-r[0], -r[1], -r[2]];
    points
        .iter()
        .map(|&p| angle_between(p, r).min(angle_between(p, neg)))
        .fold(std::f64::consts::FRAC_PI_2, f64::min)
}

/// Brute-force maximum clearance over an equal-area spiral of `n` points.
pub fn brute_force_optimum(traj: &RootTrajectory, n: usize) -> ([f64; 3], f64) {
    let points: Vec<[f64; 3]> = traj.orientations.iter().map(|&g| orbit_point_oracle(g)).collect();
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = ([0.0, 1.0, 0.0], f64::NEG_INFINITY);
    for i in 0..n {
        let y = 1.0 - (2 * i + 1) as f64 / n as f64;
        let rad = (1.0 - y * y).sqrt();
        let phi = golden * i as f64;
        let r = [rad * phi.cos(), y, rad * phi.sin()];
        let c = clearance_oracle(&points, r);
        if c > best.1 {
            best = (r, c);
        }
    }
    best
}

/// Quaternions equal up to sign, component-wise within `tol`.
pub fn same_quat(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
    let s = if a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    a.iter().zip(&b).all(|(x, y)| (x - s * y).abs() <= tol)
}

/// Number of maximal runs of `true` in a sequence.
pub fn runs(flags: &[bool]) -> usize {
    flags
        .iter()
        .enumerate()
        .filter(|&(i, &f)| f && (i == 0 || !flags[i - 1]))
        .count()
}
