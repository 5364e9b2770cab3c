//! Singularity-aware removal of the heading (yaw about +Y) from
//! character-animation data.
//!
//! The pipeline: parse a BVH clip ([`bvh`]), pick a motion direction that keeps
//! the clip away from the mapping's singular points ([`motiondir`]), strip the
//! yaw frame by frame ([`mapping`]) and export direction-invariant features
//! ([`features`]).

pub mod bvh;
pub mod cli;
pub mod export;
pub mod features;
pub mod mapping;
pub mod motiondir;
pub mod rotmath;
pub mod synth;

pub use bvh::{parse_bvh, BvhError, JointPose, MotionClip, RootTrajectory, Skeleton};
pub use features::{extract_features, FeatureFrame, FeatureScheme, FeatureSet, SmoothnessReport};
pub use mapping::{compute_gy, MappingScheme, YawDecomposition};
pub use motiondir::{fallback_ladder, select_motion_direction, DirectionReport};
pub use rotmath::{compose, geodesic_distance, minimal_rotation, rotate, sample_sphere, AxisAngle, Orientation, UnitVec3, Vec3};
