//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when `roundtrip` exceeds its tolerance,
//! 2 for usage, parse and I/O errors.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bvh::{parse_bvh, MotionClip, DEFAULT_UNIT_SCALE};
use crate::export::{self, ExportOptions, FeatureMetadata, Format, DEFAULT_PRECISION};
use crate::features::{extract_features, headings, reconstruct_trajectory, FeatureScheme};
use crate::mapping::{tangent_field, MappingScheme, DEFAULT_EPSILON_SING};
use crate::motiondir::{
    candidate_clearance, clearance_profile, fallback_ladder, orbit_trajectory, select_motion_direction_with,
    DirectionReport, SelectOptions, DEFAULT_LADDER_THRESHOLD, DEFAULT_SAMPLES,
};
use crate::rotmath::{sample_sphere, UnitVec3, Vec3};
use crate::synth;

/// Directory used for outputs when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "DIRINV_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "dirinv", version, about = "Singularity-aware direction-invariant motion features")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print skeleton and timing summaries of BVH files
    Inspect(ClipArgs),
    /// Choose a motion direction for each clip
    SelectDir(SelectDirArgs),
    /// Export GF / DIF / DIM feature tables
    Features(FeaturesArgs),
    /// Export per-frame clearance profiles for candidate directions
    Singularity(SingularityArgs),
    /// Export the tangent field induced by a direction
    Field(FieldArgs),
    /// Extract features, integrate them back and report the error
    Roundtrip(RoundtripArgs),
    /// Write a synthetic BVH clip
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ClipArgs {
    /// BVH file or directory of BVH files (repeatable)
    #[arg(long, short = 'i', required = true)]
    pub input: Vec<PathBuf>,
    /// Multiplier from file length units to meters
    #[arg(long, default_value_t = DEFAULT_UNIT_SCALE)]
    pub unit_scale: f64,
    /// Keep every n-th frame
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
}

#[derive(Args, Debug, Clone)]
pub struct DirectionArgs {
    /// Lattice size for automatic direction selection
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = parse_samples)]
    pub samples: usize,
    /// Clearance (radians) below which a frame counts as singular
    #[arg(long, default_value_t = DEFAULT_EPSILON_SING)]
    pub epsilon_sing: f64,
    /// With automatic selection, try X then Z before the lattice search
    #[arg(long)]
    pub ladder: bool,
    /// Acceptance clearance for the ladder, radians
    #[arg(long, default_value_t = DEFAULT_LADDER_THRESHOLD)]
    pub threshold: f64,
}

#[derive(Args, Debug)]
pub struct SelectDirArgs {
    #[command(flatten)]
    pub clip: ClipArgs,
    #[command(flatten)]
    pub direction: DirectionArgs,
    /// Refine the lattice winner locally
    #[arg(long)]
    pub polish: bool,
    /// Include the per-candidate table
    #[arg(long)]
    pub candidates: bool,
    /// Write the report(s) as JSON to this file
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Gf,
    Dif,
    Dim,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub clip: ClipArgs,
    #[command(flatten)]
    pub direction: DirectionArgs,
    #[arg(long, value_enum, default_value_t = SchemeArg::Dim)]
    pub scheme: SchemeArg,
    /// Motion direction: x, z, auto, or an explicit vector "x,y,z"
    #[arg(long = "dir", default_value = "auto", allow_hyphen_values = true)]
    pub dir: DirSelector,
    #[arg(long, default_value = "csv")]
    pub format: Format,
    /// Output file, or directory for per-file outputs
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    /// Decimals written for every number
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
    /// Omit per-joint velocity columns
    #[arg(long)]
    pub no_velocities: bool,
}

#[derive(Args, Debug)]
pub struct SingularityArgs {
    #[command(flatten)]
    pub clip: ClipArgs,
    #[command(flatten)]
    pub direction: DirectionArgs,
    /// Candidate direction (repeatable); defaults to x and z
    #[arg(long = "dir", allow_hyphen_values = true)]
    pub dirs: Vec<DirSelector>,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
}

#[derive(Args, Debug)]
pub struct FieldArgs {
    /// Optional clip whose orbit trajectory is appended
    #[arg(long, short = 'i')]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_UNIT_SCALE)]
    pub unit_scale: f64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    #[command(flatten)]
    pub direction: DirectionArgs,
    #[arg(long = "dir", required = true, allow_hyphen_values = true)]
    pub dir: DirSelector,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
}

#[derive(Args, Debug)]
pub struct RoundtripArgs {
    #[command(flatten)]
    pub clip: ClipArgs,
    #[command(flatten)]
    pub direction: DirectionArgs,
    #[arg(long, value_enum, default_value_t = SchemeArg::Dim)]
    pub scheme: SchemeArg,
    #[arg(long = "dir", default_value = "auto", allow_hyphen_values = true)]
    pub dir: DirSelector,
    /// Maximum position error (m) and orientation error (rad)
    #[arg(long, default_value_t = 5e-3)]
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Static,
    Turn,
    Walk,
    Backflip,
    Spin,
    Cartwheel,
    Wander,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Frame count (per flip or turn for backflip and cartwheel)
    #[arg(long, default_value_t = 120)]
    pub frames: usize,
    /// Number of flips for backflip
    #[arg(long, default_value_t = 1)]
    pub cycles: usize,
    /// Turning rate for turn and walk, rad/s
    #[arg(long, default_value_t = 0.8, allow_hyphen_values = true)]
    pub rate: f64,
    /// Extra global yaw applied to the whole clip, degrees
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub yaw: f64,
    #[arg(long, short = 'o', required = true)]
    pub output: PathBuf,
}

/// How the motion direction is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DirSelector {
    X,
    Z,
    Auto,
    Explicit(UnitVec3),
}

impl FromStr for DirSelector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => return Ok(DirSelector::X),
            "z" => return Ok(DirSelector::Z),
            "auto" => return Ok(DirSelector::Auto),
            _ => {}
        }
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| format!("invalid direction {s:?}: expected x, z, auto or \"x,y,z\""))?;
        let [x, y, z] = parts[..] else {
            return Err(format!("invalid direction {s:?}: expected three components"));
        };
        UnitVec3::try_new(Vec3::new(x, y, z))
            .map(DirSelector::Explicit)
            .ok_or_else(|| format!("invalid direction {s:?}: zero or non-finite vector"))
    }
}

fn parse_samples(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err("samples must be a positive integer".into()),
    }
}

/// Result of a successful command run.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    ToleranceExceeded,
}

pub fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Inspect(a) => cmd_inspect(&a),
        Command::SelectDir(a) => cmd_select_dir(&a),
        Command::Features(a) => cmd_features(&a),
        Command::Singularity(a) => cmd_singularity(&a),
        Command::Field(a) => cmd_field(&a),
        Command::Roundtrip(a) => cmd_roundtrip(&a),
        Command::Synth(a) => cmd_synth(&a),
    }
}

/// Expands directories to their `.bvh` files in lexicographic order.
pub fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        let meta = fs::metadata(p).with_context(|| format!("{}: cannot read input", p.display()))?;
        if meta.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("{}: cannot list directory", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.is_file()
                        && f.extension()
                            .is_some_and(|e| e.eq_ignore_ascii_case("bvh"))
                })
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

pub fn load_clip(path: &Path, unit_scale: f64, stride: u64) -> Result<MotionClip> {
    let bytes = fs::read(path).with_context(|| format!("{}: cannot read file", path.display()))?;
    let clip = parse_bvh(&bytes).map_err(|e| anyhow!("{}: {}", path.display(), e))?;
    let clip = clip.with_unit_scale(unit_scale);
    Ok(if stride > 1 {
        clip.downsample(stride as usize)
    } else {
        clip
    })
}

fn load_all(args: &ClipArgs) -> Result<Vec<(PathBuf, MotionClip)>> {
    let files = expand_inputs(&args.input)?;
    if files.is_empty() {
        bail!("no BVH files found in the given inputs");
    }
    files
        .into_par_iter()
        .map(|p| load_clip(&p, args.unit_scale, args.stride).map(|c| (p, c)))
        .collect()
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("{}: cannot create directory", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .with_context(|| format!("{}: cannot create temporary file", dir.display()))?;
    tmp.write_all(contents)
        .with_context(|| format!("{}: write failed", path.display()))?;
    tmp.persist(path)
        .map_err(|e| anyhow!("{}: cannot persist output: {}", path.display(), e.error))?;
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "clip".into())
}

fn env_output_dir() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Where a per-input output goes: `None` means standard output.
fn resolve_output(
    explicit: Option<&Path>,
    input: &Path,
    suffix: &str,
    multiple: bool,
) -> Result<Option<PathBuf>> {
    let per_file = |dir: &Path| dir.join(format!("{}_{}", stem(input), suffix));
    match explicit {
        Some(p) if multiple || p.is_dir() => Ok(Some(per_file(p))),
        Some(p) => Ok(Some(p.to_path_buf())),
        None => match env_output_dir() {
            Some(dir) => Ok(Some(per_file(&dir))),
            None if multiple => bail!("several inputs need --output <dir> or {OUTPUT_DIR_ENV}"),
            None => Ok(None),
        },
    }
}

fn resolve_direction(
    sel: DirSelector,
    clip: &MotionClip,
    d: &DirectionArgs,
) -> (UnitVec3, Option<DirectionReport>) {
    match sel {
        DirSelector::X => (UnitVec3::X, None),
        DirSelector::Z => (UnitVec3::Z, None),
        DirSelector::Explicit(v) => (v, None),
        DirSelector::Auto => {
            let report = auto_report(clip, d, SelectOptions::default());
            (report.direction, Some(report))
        }
    }
}

fn auto_report(clip: &MotionClip, d: &DirectionArgs, opts: SelectOptions) -> DirectionReport {
    let traj = clip.root_trajectory();
    if d.ladder {
        fallback_ladder(&traj, d.threshold, d.samples)
    } else {
        select_motion_direction_with(&traj, d.samples, opts)
    }
}

fn feature_scheme(
    scheme: SchemeArg,
    sel: DirSelector,
    clip: &MotionClip,
    d: &DirectionArgs,
) -> Result<(FeatureScheme, Option<DirectionReport>)> {
    Ok(match scheme {
        SchemeArg::Gf => (FeatureScheme::Global, None),
        SchemeArg::Dif => {
            if !matches!(sel, DirSelector::X | DirSelector::Auto) {
                bail!("--scheme dif always uses the X axis; use --scheme dim for other directions");
            }
            let m = MappingScheme::with_epsilon(UnitVec3::X, d.epsilon_sing);
            (FeatureScheme::Invariant(m), None)
        }
        SchemeArg::Dim => {
            let (r, report) = resolve_direction(sel, clip, d);
            (
                FeatureScheme::Invariant(MappingScheme::with_epsilon(r, d.epsilon_sing)),
                report,
            )
        }
    })
}

pub fn cmd_inspect(args: &ClipArgs) -> Result<Outcome> {
    let clips = load_all(args)?;
    let mut out = String::new();
    for (path, clip) in &clips {
        let sk = &clip.skeleton;
        let _ = writeln!(
            out,
            "{}: {} joints, {} channels, {} frames, {:.1} fps",
            path.display(),
            sk.joints().len(),
            sk.channel_count(),
            clip.frame_count(),
            clip.frame_rate()
        );
        let _ = writeln!(out, "  duration: {:.3} s (frame time {} s)", clip.duration(), clip.frame_time);
        for j in sk.joints() {
            let names: Vec<&str> = j.channels.iter().map(|c| c.name()).collect();
            let parent = j.parent.map_or("-".to_string(), |p| sk.joints()[p].name.clone());
            let _ = writeln!(out, "  {} (parent {}): {}", j.name, parent, names.join(" "));
        }
    }
    print!("{out}");
    Ok(Outcome::Ok)
}

pub fn cmd_select_dir(args: &SelectDirArgs) -> Result<Outcome> {
    let clips = load_all(&args.clip)?;
    let opts = SelectOptions {
        polish: args.polish,
        keep_candidates: args.candidates,
        sequential: false,
    };
    let results: Vec<(PathBuf, DirectionReport, f64, f64)> = clips
        .iter()
        .map(|(path, clip)| {
            let report = auto_report(clip, &args.direction, opts);
            let points = orbit_trajectory(&clip.root_trajectory());
            let cx = candidate_clearance(&points, UnitVec3::X);
            let cz = candidate_clearance(&points, UnitVec3::Z);
            (path.clone(), report, cx, cz)
        })
        .collect();
    let mut text = String::new();
    for (path, report, cx, cz) in &results {
        let _ = writeln!(text, "== {}", path.display());
        let _ = write!(text, "{report}");
        let _ = writeln!(text, "X axis clearance: {:.3} deg", cx.to_degrees());
        let _ = writeln!(text, "Z axis clearance: {:.3} deg", cz.to_degrees());
    }
    print!("{text}");
    if let Some(out) = &args.output {
        let json = if results.len() == 1 {
            serde_json::to_string_pretty(&results[0].1)?
        } else {
            let entries: Vec<serde_json::Value> = results
                .iter()
                .map(|(p, r, _, _)| {
                    serde_json::json!({ "input": p.display().to_string(), "report": r })
                })
                .collect();
            serde_json::to_string_pretty(&entries)?
        };
        write_atomic(out, format!("{json}\n").as_bytes())?;
    }
    Ok(Outcome::Ok)
}

pub fn cmd_features(args: &FeaturesArgs) -> Result<Outcome> {
    let clips = load_all(&args.clip)?;
    let multiple = clips.len() > 1;
    let opts = ExportOptions {
        precision: args.precision,
        velocities: !args.no_velocities,
    };
    let results: Vec<Result<(Option<PathBuf>, Vec<u8>, String)>> = clips
        .par_iter()
        .map(|(path, clip)| {
            let (scheme, report) = feature_scheme(args.scheme, args.dir, clip, &args.direction)?;
            let set = extract_features(clip, &scheme);
            let mut body = Vec::new();
            export::write_features(&mut body, &set, args.format, &opts)?;
            let tag = scheme.tag();
            let target = resolve_output(
                args.output.as_deref(),
                path,
                &format!("{tag}.{}", args.format.extension()),
                multiple,
            )?;
            let clearance = scheme.mapping().map(|m| {
                report
                    .as_ref()
                    .map(|r| r.clearance)
                    .unwrap_or_else(|| candidate_clearance(&orbit_trajectory(&clip.root_trajectory()), m.direction()))
            });
            let meta = FeatureMetadata {
                source: path.display().to_string(),
                scheme: tag.to_string(),
                motion_direction: scheme.mapping().map(|m| m.direction().to_array()),
                direction_source: scheme.mapping().map(|_| match &report {
                    Some(r) => serde_json::to_value(r.source)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_owned))
                        .unwrap_or_default(),
                    None => "manual".to_string(),
                }),
                clearance,
                clearance_deg: clearance.map(f64::to_degrees),
                samples: report.as_ref().map(|r| r.samples),
                epsilon_sing: scheme.mapping().map(|m| m.epsilon_sing()),
                unit_scale: clip.unit_scale,
                frame_rate: clip.frame_rate(),
                frame_time: clip.frame_time,
                stride: args.clip.stride as usize,
                frames: clip.frame_count(),
                singular_frames: set.singular_count(),
                format: args.format,
                precision: args.precision,
                columns: export::feature_columns(&set, &opts),
            };
            let note = format!(
                "{}: {} scheme, {} singular frame(s) flagged",
                path.display(),
                tag,
                set.singular_count()
            );
            if let Some(t) = &target {
                write_atomic(t, &body)?;
                let meta_json = serde_json::to_string_pretty(&meta)?;
                write_atomic(&t.with_extension("meta.json"), format!("{meta_json}\n").as_bytes())?;
            }
            Ok((target, body, note))
        })
        .collect();
    for r in results {
        let (target, body, note) = r?;
        if target.is_none() {
            std::io::stdout().write_all(&body)?;
        }
        eprintln!("{note}");
    }
    Ok(Outcome::Ok)
}

pub fn cmd_singularity(args: &SingularityArgs) -> Result<Outcome> {
    let clips = load_all(&args.clip)?;
    let multiple = clips.len() > 1;
    let selectors = if args.dirs.is_empty() {
        vec![DirSelector::X, DirSelector::Z]
    } else {
        args.dirs.clone()
    };
    for (path, clip) in &clips {
        let traj = clip.root_trajectory();
        let profiles: Vec<(UnitVec3, Vec<f64>)> = selectors
            .iter()
            .map(|&s| {
                let (r, _) = resolve_direction(s, clip, &args.direction);
                (r, clearance_profile(&traj, r))
            })
            .collect();
        let mut body = Vec::new();
        export::write_profiles(&mut body, clip.frame_time, &profiles, args.precision)?;
        match resolve_output(args.output.as_deref(), path, "clearance.csv", multiple)? {
            Some(t) => write_atomic(&t, &body)?,
            None => std::io::stdout().write_all(&body)?,
        }
    }
    Ok(Outcome::Ok)
}

pub fn cmd_field(args: &FieldArgs) -> Result<Outcome> {
    let clip = args
        .input
        .as_ref()
        .map(|p| load_clip(p, args.unit_scale, args.stride))
        .transpose()?;
    let r = match (args.dir, &clip) {
        (DirSelector::Auto, None) => bail!("--dir auto needs --input"),
        (sel, Some(c)) => resolve_direction(sel, c, &args.direction).0,
        (DirSelector::X, None) => UnitVec3::X,
        (DirSelector::Z, None) => UnitVec3::Z,
        (DirSelector::Explicit(v), None) => v,
    };
    let scheme = MappingScheme::with_epsilon(r, args.direction.epsilon_sing);
    let lattice = sample_sphere(args.direction.samples);
    let field = tangent_field(&scheme, &lattice);
    let trajectory: Vec<(UnitVec3, bool)> = clip
        .as_ref()
        .map(|c| {
            orbit_trajectory(&c.root_trajectory())
                .into_iter()
                .map(|q| (q, crate::mapping::point_clearance(q, r) < scheme.epsilon_sing()))
                .collect()
        })
        .unwrap_or_default();
    let mut body = Vec::new();
    export::write_field(&mut body, &scheme.singular_points(), &field, &trajectory, args.precision)?;
    let target = match (&args.output, &args.input) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(input)) => env_output_dir().map(|d| d.join(format!("{}_field.csv", stem(input)))),
        (None, None) => env_output_dir().map(|d| d.join("field.csv")),
    };
    match target {
        Some(t) => write_atomic(&t, &body)?,
        None => std::io::stdout().write_all(&body)?,
    }
    Ok(Outcome::Ok)
}

/// Maximum root position error (m) and orientation error (rad) of the
/// extract-then-integrate round trip.
pub fn roundtrip_errors(clip: &MotionClip, scheme: &FeatureScheme) -> Result<(f64, f64)> {
    let mapping = scheme
        .mapping()
        .ok_or_else(|| anyhow!("GF features cannot be integrated back; use --scheme dif or dim"))?;
    let original = clip.root_trajectory();
    let set = extract_features(clip, scheme);
    let heading0 = headings(&original, mapping)[0];
    let p0 = original.positions[0];
    let rebuilt = reconstruct_trajectory(&set, heading0, [p0.x, p0.z])?;
    let pos_err = original
        .positions
        .iter()
        .zip(&rebuilt.positions)
        .map(|(a, b)| (*a - *b).norm())
        .fold(0.0, f64::max);
    let rot_err = original
        .orientations
        .iter()
        .zip(&rebuilt.orientations)
        .map(|(a, b)| a.angle_to(*b))
        .fold(0.0, f64::max);
    Ok((pos_err, rot_err))
}

pub fn cmd_roundtrip(args: &RoundtripArgs) -> Result<Outcome> {
    if args.scheme == SchemeArg::Gf {
        bail!("roundtrip needs DIF or DIM features: GF carries no yaw rate to integrate");
    }
    let clips = load_all(&args.clip)?;
    let mut outcome = Outcome::Ok;
    for (path, clip) in &clips {
        let (scheme, _) = feature_scheme(args.scheme, args.dir, clip, &args.direction)?;
        let (pos, rot) = roundtrip_errors(clip, &scheme)?;
        let ok = pos <= args.tolerance && rot <= args.tolerance;
        println!(
            "{}: {} max position error {:.3e} m, max orientation error {:.3e} rad [{}]",
            path.display(),
            scheme.tag(),
            pos,
            rot,
            if ok { "ok" } else { "FAIL" }
        );
        if !ok {
            outcome = Outcome::ToleranceExceeded;
        }
    }
    Ok(outcome)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Outcome> {
    if args.frames < 2 {
        bail!("--frames must be at least 2");
    }
    let clip = match args.kind {
        SynthKind::Static => synth::static_clip(args.frames),
        SynthKind::Turn => synth::yaw_profile(args.frames, |s| args.rate * s),
        SynthKind::Walk => synth::turning_walk(args.frames, args.rate),
        SynthKind::Backflip => synth::backflip(args.frames, args.cycles.max(1)),
        SynthKind::Spin => synth::composite_spin(args.frames),
        SynthKind::Cartwheel => synth::cartwheel_flip(args.frames),
        SynthKind::Wander => synth::wander(args.frames, &synth::Wander::default()),
    };
    let clip = if args.yaw != 0.0 {
        clip.rigidly_transformed(args.yaw.to_radians(), Vec3::ZERO)
            .expect("synthetic root has full channels")
    } else {
        clip
    };
    write_atomic(&args.output, clip.to_bvh_string().as_bytes())?;
    Ok(Outcome::Ok)
}
