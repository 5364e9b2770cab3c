//! Motion-direction selection.
//!
//! A direction `r` is good for a clip when the orbit-sphere trajectory
//! `p_t = g_t⁻¹(p)` stays far from both singular points `±r`. Candidates come
//! from a spherical Fibonacci lattice; the winner maximizes the minimum
//! distance over all frames.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bvh::RootTrajectory;
use crate::mapping::{orbit_point, point_clearance};
use crate::rotmath::{sample_sphere, UnitVec3};

pub const DEFAULT_SAMPLES: usize = 1024;

/// Default clearance (20°) a coordinate axis must reach to be accepted by
/// [`fallback_ladder`].
pub const DEFAULT_LADDER_THRESHOLD: f64 = 20.0 * std::f64::consts::PI / 180.0;

/// Candidates within this distance of the best score count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

const POLISH_ITERATIONS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSource {
    /// Argmax over the sphere lattice.
    Lattice,
    /// Accepted by the fallback ladder at its first rung.
    LadderX,
    /// Accepted by the fallback ladder at its second rung.
    LadderZ,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CandidateScore {
    pub direction: UnitVec3,
    pub clearance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionReport {
    /// Canonical member of the antipodal pair `±r`.
    pub direction: UnitVec3,
    /// Minimum over frames of the distance to the nearer of `±r`, radians.
    pub clearance: f64,
    pub clearance_deg: f64,
    pub samples: usize,
    pub source: DirectionSource,
    pub lattice_index: Option<usize>,
    pub polished: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_candidate: Option<Vec<CandidateScore>>,
}

impl DirectionReport {
    fn new(direction: UnitVec3, clearance: f64, samples: usize, source: DirectionSource) -> Self {
        DirectionReport {
            direction: direction.canonical_antipode(),
            clearance,
            clearance_deg: clearance.to_degrees(),
            samples,
            source,
            lattice_index: None,
            polished: false,
            per_candidate: None,
        }
    }
}

impl fmt::Display for DirectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "direction: {:.6}", self.direction)?;
        writeln!(
            f,
            "clearance: {:.6} rad ({:.3} deg)",
            self.clearance, self.clearance_deg
        )?;
        writeln!(f, "samples: {}", self.samples)?;
        match (self.source, self.lattice_index) {
            (DirectionSource::Lattice, Some(i)) => writeln!(
                f,
                "source: lattice index {i} (ties within {TIE_TOLERANCE:e} rad go to the lowest index)"
            )?,
            (DirectionSource::Lattice, None) => writeln!(f, "source: lattice")?,
            (DirectionSource::LadderX, _) => writeln!(f, "source: ladder (X axis accepted)")?,
            (DirectionSource::LadderZ, _) => writeln!(f, "source: ladder (Z axis accepted)")?,
        }
        if self.polished {
            writeln!(f, "polished: yes (local refinement after lattice argmax)")?;
        }
        if let Some(table) = &self.per_candidate {
            writeln!(f, "candidates:")?;
            for (i, c) in table.iter().enumerate() {
                writeln!(
                    f,
                    "  {i:5} {:.6} {:.6}",
                    c.direction, c.clearance
                )?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SelectOptions {
    /// Refine the lattice winner with a short local search.
    pub polish: bool,
    /// Keep the full candidate table in the report.
    pub keep_candidates: bool,
    /// Score candidates sequentially instead of on the rayon pool.
    pub sequential: bool,
}

/// `p_t = g_t⁻¹(p)` for every frame.
pub fn orbit_trajectory(traj: &RootTrajectory) -> Vec<UnitVec3> {
    traj.orientations.iter().map(|&g| orbit_point(g)).collect()
}

/// Minimum distance from `points` to `±r`. An empty set scores π/2.
pub fn candidate_clearance(points: &[UnitVec3], r: UnitVec3) -> f64 {
    points
        .iter()
        .map(|&q| point_clearance(q, r))
        .fold(FRAC_PI_2, f64::min)
}

/// Per-frame distance to the nearer singular point of direction `r`.
pub fn clearance_profile(traj: &RootTrajectory, r: UnitVec3) -> Vec<f64> {
    traj.orientations
        .iter()
        .map(|&g| point_clearance(orbit_point(g), r))
        .collect()
}

pub fn score_candidates(points: &[UnitVec3], candidates: &[UnitVec3], sequential: bool) -> Vec<f64> {
    if sequential {
        candidates.iter().map(|&r| candidate_clearance(points, r)).collect()
    } else {
        candidates
            .par_iter()
            .map(|&r| candidate_clearance(points, r))
            .collect()
    }
}

/// Lowest index whose score is within [`TIE_TOLERANCE`] of the maximum.
pub fn argmax_lowest_index(scores: &[f64]) -> Option<usize> {
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    scores.iter().position(|&s| s >= best - TIE_TOLERANCE)
}

pub fn select_motion_direction(traj: &RootTrajectory, n_samples: usize) -> DirectionReport {
    select_motion_direction_with(traj, n_samples, SelectOptions::default())
}

pub fn select_motion_direction_with(
    traj: &RootTrajectory,
    n_samples: usize,
    opts: SelectOptions,
) -> DirectionReport {
    let points = orbit_trajectory(traj);
    let lattice = sample_sphere(n_samples);
    let scores = score_candidates(&points, &lattice, opts.sequential);
    let j = argmax_lowest_index(&scores).expect("lattice is non-empty");

    let mut report = DirectionReport::new(lattice[j], scores[j], n_samples, DirectionSource::Lattice);
    report.lattice_index = Some(j);
    if opts.polish {
        let radius = 2.0 * (std::f64::consts::PI / n_samples as f64).sqrt();
        let (r, c) = polish(&points, lattice[j], scores[j], radius);
        if c > scores[j] {
            report.direction = r.canonical_antipode();
            report.clearance = c;
            report.clearance_deg = c.to_degrees();
        }
        report.polished = true;
    }
    if opts.keep_candidates {
        report.per_candidate = Some(
            lattice
                .iter()
                .zip(&scores)
                .map(|(&direction, &clearance)| CandidateScore {
                    direction,
                    clearance,
                })
                .collect(),
        );
    }
    report
}

/// Golden-section search along two tangent directions at `start`, each over
/// `[-radius, radius]`. Returns the best point seen.
fn polish(points: &[UnitVec3], start: UnitVec3, start_score: f64, radius: f64) -> (UnitVec3, f64) {
    let helper = if start.x().abs() < 0.9 { UnitVec3::X } else { UnitVec3::Z };
    let u = UnitVec3::try_new(start.as_vec().cross(helper.as_vec())).expect("non-parallel");
    let v = UnitVec3::try_new(start.as_vec().cross(u.as_vec())).expect("orthogonal");
    let (mut best, mut best_score) = (start, start_score);
    for axis in [u, v] {
        let base = best;
        let eval = |a: f64| {
            let (s, c) = a.sin_cos();
            let r = UnitVec3::try_new(base.as_vec() * c + axis.as_vec() * s).expect("unit");
            (r, candidate_clearance(points, r))
        };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (-radius, radius);
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (eval(x1), eval(x2));
        for _ in 0..POLISH_ITERATIONS {
            for cand in [f1, f2] {
                if cand.1 > best_score {
                    (best, best_score) = cand;
                }
            }
            if f1.1 >= f2.1 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = eval(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = eval(x2);
            }
        }
    }
    (best, best_score)
}

/// Tries +X, then +Z, and falls back to lattice selection when neither
/// clears `threshold`.
pub fn fallback_ladder(traj: &RootTrajectory, threshold: f64, n_samples: usize) -> DirectionReport {
    let points = orbit_trajectory(traj);
    for (axis, source) in [
        (UnitVec3::X, DirectionSource::LadderX),
        (UnitVec3::Z, DirectionSource::LadderZ),
    ] {
        let c = candidate_clearance(&points, axis);
        if c >= threshold {
            return DirectionReport::new(axis, c, n_samples, source);
        }
    }
    select_motion_direction(traj, n_samples)
}
