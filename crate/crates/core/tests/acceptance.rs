//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use common::{
    angle_between, brute_force_optimum, clearance_oracle, dirinv, fixture, orbit_point_oracle, runs, same_quat,
    stderr,
};
use dirinv::cli::roundtrip_errors;
use dirinv::export::{write_features, ExportOptions, Format};
use dirinv::features::{default_thresholds, smoothness};
use dirinv::mapping::{ring, singularity_distance, tangent_field};
use dirinv::motiondir::{orbit_trajectory, score_candidates, select_motion_direction_with, SelectOptions};
use dirinv::synth::{self, Wander};
use dirinv::{
    compose, compute_gy, extract_features, parse_bvh, sample_sphere, select_motion_direction, FeatureScheme,
    MappingScheme, MotionClip, Orientation, UnitVec3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_orientation(rng: &mut ChaCha8Rng) -> Orientation {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = q.iter().map(|v| v * v).sum();
        if n2 > 1e-4 && n2 <= 1.0 {
            return Orientation::from_wxyz(q[0], q[1], q[2], q[3]);
        }
    }
}

fn c1_yaw_invariance() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let schemes = [
        MappingScheme::facing(),
        MappingScheme::new(UnitVec3::Z),
        MappingScheme::new(UnitVec3::new(0.4, -0.7, 0.2)),
    ];
    let (mut pairs, mut worst) = (0usize, 0.0f64);
    while pairs < 10_000 {
        let g = random_orientation(&mut rng);
        let phi = rng.gen_range(-PI..PI);
        let scheme = &schemes[pairs % schemes.len()];
        if singularity_distance(g, scheme) <= 0.1 {
            continue;
        }
        let a = compute_gy(g, scheme).map_err(|e| format!("{e:?}"))?.g_0.to_array();
        let b = compute_gy(compose(Orientation::yaw(phi), g), scheme)
            .map_err(|e| format!("{e:?}"))?
            .g_0
            .to_array();
        let s = if a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        worst = a.iter().zip(&b).map(|(x, y)| (x - s * y).abs()).fold(worst, f64::max);
        pairs += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-9 && secs < 5.0,
        format!("{pairs} pairs, max |Δg0| = {worst:.2e} (≤ 1e-9), {secs:.2} s (< 5 s)"),
    )
}

fn fixtures() -> Vec<(&'static str, MotionClip)> {
    vec![
        ("golden", parse_bvh(&fs::read(fixture("golden.bvh")).unwrap()).unwrap()),
        ("static", synth::static_clip(60)),
        ("yaw-only", synth::yaw_profile(240, |s| 1.1 * s)),
        ("walk", synth::turning_walk(240, 0.8)),
        ("backflip", synth::backflip(120, 2)),
        ("composite-spin", synth::composite_spin(240)),
        ("cartwheel", synth::cartwheel_flip(90)),
        ("wander", synth::wander(300, &Wander::default())),
    ]
}

fn c2_dif_equals_dim_x() -> Outcome {
    let mut compared = 0;
    for (name, clip) in fixtures() {
        for format in [Format::Csv, Format::Jsonl] {
            let render = |scheme: FeatureScheme| {
                let mut buf = Vec::new();
                write_features(&mut buf, &extract_features(&clip, &scheme), format, &ExportOptions::default())
                    .unwrap();
                buf
            };
            let dif = render(FeatureScheme::dif());
            if dif != render(FeatureScheme::dim(UnitVec3::X)) || dif != render(FeatureScheme::dim(UnitVec3::new(5.0, 0.0, 0.0))) {
                return Err(format!("{name} ({format:?}) exports differ"));
            }
            compared += 1;
        }
    }
    Ok(format!("{compared} fixture/format exports byte-identical"))
}

fn c3_oracle_agreement() -> Outcome {
    let start = Instant::now();
    let cases = [
        ("static", synth::static_clip(60)),
        ("yaw-only", synth::yaw_profile(240, |s| 1.1 * s)),
        ("backflip", synth::backflip(120, 2)),
        ("composite-spin", synth::composite_spin(240)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, clip) in &cases {
        let traj = clip.root_trajectory();
        let report = select_motion_direction(&traj, 1024);
        let (_, best) = brute_force_optimum(&traj, 10_240);
        let points: Vec<[f64; 3]> = traj.orientations.iter().map(|&g| orbit_point_oracle(g)).collect();
        let recomputed = clearance_oracle(&points, report.direction.to_array());
        let gap = (best - report.clearance).abs();
        ok &= gap <= 0.11 && (recomputed - report.clearance).abs() <= 1e-9;
        parts.push(format!("{name} gap {gap:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    check(ok, format!("{} (≤ 0.11 rad), {secs:.2} s (< 30 s)", parts.join(", ")))
}

fn c4_backflip() -> Outcome {
    let cycles = 2;
    let clip = synth::backflip(120, cycles);
    let thresholds = default_thresholds(&clip, 1024);
    let dif = extract_features(&clip, &FeatureScheme::dif());
    let flags: Vec<bool> = dif.frames.iter().map(|f| f.singular).collect();
    let crossings = runs(&flags);
    let dif_report = smoothness(&dif, &thresholds);
    let dim = extract_features(&clip, &FeatureScheme::dim(UnitVec3::Z));
    let dim_report = smoothness(&dim, &thresholds);
    check(
        crossings == 2 * cycles && !dif_report.is_smooth() && dim.singular_count() == 0 && dim_report.is_smooth(),
        format!(
            "DIF: {crossings} crossings over {cycles} cycles, {} discontinuities; DIM r=Z: {} flags, {} discontinuities",
            dif_report.discontinuity_frames.len(),
            dim.singular_count(),
            dim_report.discontinuity_frames.len()
        ),
    )
}

fn parse_field(text: &str) -> (Vec<[f64; 3]>, Vec<[f64; 3]>, usize) {
    let (mut markers, mut traj, mut flagged_far) = (Vec::new(), Vec::new(), 0);
    let mut field_flagged = Vec::new();
    for line in text.lines().skip(1) {
        let c: Vec<&str> = line.split(',').collect();
        let q = [c[2].parse().unwrap(), c[3].parse().unwrap(), c[4].parse().unwrap()];
        match c[0] {
            "singular" => markers.push(q),
            "trajectory" => traj.push(q),
            "field" if c[8] == "1" => field_flagged.push(q),
            _ => {}
        }
    }
    for q in field_flagged {
        if markers.iter().all(|&m| angle_between(q, m) > 0.11) {
            flagged_far += 1;
        }
    }
    (markers, traj, flagged_far)
}

fn c5_singular_relocation(dir: &Path) -> Outcome {
    let flip = dir.join("flip.bvh");
    fs::write(&flip, synth::backflip(120, 2).to_bvh_string()).unwrap();
    let mut approach = Vec::new();
    for (label, axis) in [("x", [1.0, 0.0, 0.0]), ("z", [0.0, 0.0, 1.0])] {
        let out = dir.join(format!("field_{label}.csv"));
        let o = dirinv(&["field", "-i", flip.to_str().unwrap(), "--dir", label, "-o", out.to_str().unwrap()]);
        if !o.status.success() {
            return Err(stderr(&o));
        }
        let (markers, traj, far) = parse_field(&fs::read_to_string(out).unwrap());
        let neg = [-axis[0], -axis[1], -axis[2]];
        let at_axis = markers.len() == 2
            && markers.iter().any(|&m| angle_between(m, axis) < 1e-9)
            && markers.iter().any(|&m| angle_between(m, neg) < 1e-9);
        if !at_axis || far > 0 {
            return Err(format!("r={label}: markers {markers:?}, {far} flagged lattice points away from ±r"));
        }
        let closest = traj
            .iter()
            .flat_map(|&q| markers.iter().map(move |&m| angle_between(q, m)))
            .fold(f64::INFINITY, f64::min);
        approach.push(closest);
    }
    check(
        approach[0] < 0.05 && approach[1] >= 0.05,
        format!(
            "markers at ±X / ±Z; closest trajectory approach {:.2e} rad (r=X), {:.3} rad (r=Z)",
            approach[0], approach[1]
        ),
    )
}

/// Winding number of the exported tangents around a ring, measured against
/// the projection of a fixed vector orthogonal to the ring's center.
fn winding(scheme: &MappingScheme, center: UnitVec3, radius: f64, samples: usize) -> Option<f64> {
    let c = center.to_array();
    let helper = if c[1].abs() < 0.9 { [0.0, 1.0, 0.0] } else { [1.0, 0.0, 0.0] };
    let a = common::normalize(cross(c, helper));
    let pts = ring(center, radius, samples);
    let field = tangent_field(scheme, &pts);
    let mut angles = Vec::with_capacity(samples);
    for s in &field {
        let p = s.point.to_array();
        let t = s.tangent?.to_array();
        let d = common::dot(a, p);
        let u = common::normalize([a[0] - d * p[0], a[1] - d * p[1], a[2] - d * p[2]]);
        let w = cross(p, u);
        angles.push(common::dot(t, w).atan2(common::dot(t, u)));
    }
    let mut total = 0.0;
    for k in 0..samples {
        let mut d = angles[(k + 1) % samples] - angles[k];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d <= -PI {
            d += 2.0 * PI;
        }
        total += d;
    }
    Some(total / (2.0 * PI))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn c6_hairy_ball() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for r in [UnitVec3::X, UnitVec3::Z, UnitVec3::new(0.3, 0.8, -0.5)] {
        let scheme = MappingScheme::new(r);
        match winding(&scheme, r, 0.3, 720) {
            Some(idx) => {
                ok &= idx.abs() > 0.5;
                parts.push(format!("r={r:.2}: index {idx:+.2}"));
            }
            None => {
                ok = false;
                parts.push(format!("r={r:.2}: ring hit a singular tangent"));
            }
        }
    }
    check(ok, parts.join("; "))
}

fn c7_roundtrip() -> Outcome {
    let tol = 5e-3;
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, clip) in [
        ("wander", synth::wander(600, &Wander::default())),
        ("walk", synth::turning_walk(600, 0.8)),
        ("composite-spin", synth::composite_spin(600)),
    ] {
        let r = select_motion_direction(&clip.root_trajectory(), 1024).direction;
        for scheme in [FeatureScheme::dif(), FeatureScheme::dim(r)] {
            let set = extract_features(&clip, &scheme);
            if set.singular_count() > 0 {
                continue;
            }
            let (pos, rot) = roundtrip_errors(&clip, &scheme).map_err(|e| e.to_string())?;
            ok &= pos <= tol && rot <= tol;
            parts.push(format!("{name}/{} {:.1e}", scheme.tag(), pos.max(rot)));
        }
    }
    let turn = synth::yaw_profile(600, |s| 1.7 * s);
    let (pos, rot) = roundtrip_errors(&turn, &FeatureScheme::dif()).map_err(|e| e.to_string())?;
    ok &= pos < 1e-6 && rot < 1e-6 && parts.len() >= 4;
    parts.push(format!("constant-rate yaw {:.1e} (< 1e-6)", pos.max(rot)));
    check(ok, format!("600 frames @ 60 fps: {} (≤ 5e-3)", parts.join(", ")))
}

fn c8_parser_golden() -> Outcome {
    let clip = parse_bvh(&fs::read(fixture("golden.bvh")).unwrap()).map_err(|e| e.to_string())?;
    let oracle: Value = serde_json::from_str(&fs::read_to_string(fixture("golden_fk.json")).unwrap()).unwrap();
    let num = |v: &Value| v.as_f64().unwrap();
    let mut worst = 0.0f64;
    for (t, f) in oracle["frames"].as_array().unwrap().iter().enumerate() {
        for (j, pose) in clip.forward_kinematics(t).iter().enumerate() {
            for k in 0..3 {
                worst = worst.max((pose.position.to_array()[k] - num(&f["positions"][j][k])).abs());
            }
            let q: [f64; 4] = std::array::from_fn(|k| num(&f["orientations"][j][k]));
            if !same_quat(pose.orientation.to_array(), q, 1e-9) {
                return Err(format!("frame {t} joint {j} orientation differs from oracle"));
            }
        }
    }
    let expected: Value =
        serde_json::from_str(&fs::read_to_string(fixture("malformed/expected.json")).unwrap()).unwrap();
    let cases = expected.as_object().unwrap();
    for (name, want) in cases {
        let o = dirinv(&["inspect", "-i", fixture(&format!("malformed/{name}")).to_str().unwrap()]);
        let err = stderr(&o);
        if o.status.code() != Some(2)
            || !err.contains(&format!("line {}:", want["line"]))
            || !err.contains(want["message"].as_str().unwrap())
        {
            return Err(format!("{name}: status {:?}, {err}", o.status.code()));
        }
    }
    let missing = dirinv(&["inspect", "-i", "/nonexistent/clip.bvh"]);
    check(
        worst <= 1e-9 && missing.status.code() == Some(2),
        format!(
            "golden FK max error {worst:.1e} (≤ 1e-9); {} malformed files exit 2 with line context",
            cases.len()
        ),
    )
}

fn run_pipeline(work: &Path, clips: &Path) -> Vec<(String, Vec<u8>)> {
    let i = clips.to_str().unwrap();
    let w = |name: &str| work.join(name).to_str().unwrap().to_string();
    fs::create_dir_all(work).unwrap();
    let commands: Vec<Vec<String>> = vec![
        vec!["features".into(), "-i".into(), i.into(), "--scheme".into(), "dim".into(), "-o".into(), w("dim")],
        vec!["features".into(), "-i".into(), i.into(), "--scheme".into(), "dif".into(), "--format".into(), "jsonl".into(), "-o".into(), w("dif")],
        vec!["features".into(), "-i".into(), i.into(), "--scheme".into(), "gf".into(), "-o".into(), w("gf")],
        vec!["select-dir".into(), "-i".into(), i.into(), "--candidates".into(), "-o".into(), w("select.json")],
        vec!["singularity".into(), "-i".into(), i.into(), "--dir".into(), "x".into(), "--dir".into(), "auto".into(), "-o".into(), w("sing")],
    ];
    for args in &commands {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = dirinv(&refs);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    }
    let mut files = Vec::new();
    let mut stack = vec![work.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(work).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn c9_determinism(dir: &Path) -> Outcome {
    let clips = dir.join("clips");
    fs::create_dir_all(&clips).unwrap();
    for (name, clip) in [
        ("backflip", synth::backflip(60, 2)),
        ("cartwheel", synth::cartwheel_flip(48)),
        ("spin", synth::composite_spin(120)),
        ("wander", synth::wander(150, &Wander::default())),
    ] {
        fs::write(clips.join(format!("{name}.bvh")), clip.to_bvh_string()).unwrap();
    }
    let first = run_pipeline(&dir.join("run1"), &clips);
    let second = run_pipeline(&dir.join("run2"), &clips);
    if first != second {
        return Err("pipeline outputs differ between runs".into());
    }

    let traj = synth::cartwheel_flip(90).root_trajectory();
    let sequential = select_motion_direction_with(
        &traj,
        1024,
        SelectOptions {
            sequential: true,
            ..Default::default()
        },
    );
    for threads in [1, 3, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let parallel = pool.install(|| select_motion_direction(&traj, 1024));
        if parallel != sequential {
            return Err(format!("selection differs with {threads} threads"));
        }
    }
    let points = orbit_trajectory(&traj);
    let lattice = sample_sphere(1024);
    let mut order: Vec<usize> = (0..lattice.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for k in (1..order.len()).rev() {
        order.swap(k, rng.gen_range(0..=k));
    }
    let shuffled: Vec<UnitVec3> = order.iter().map(|&k| lattice[k]).collect();
    let base = score_candidates(&points, &lattice, true);
    let scores = score_candidates(&points, &shuffled, false);
    if order.iter().zip(&scores).any(|(&k, s)| base[k].to_bits() != s.to_bits()) {
        return Err("candidate scores depend on evaluation order".into());
    }
    Ok(format!(
        "{} pipeline outputs byte-identical across runs; selection identical on 1/3/8 threads and shuffled order",
        first.len()
    ))
}

fn main() {
    let tmp = TempDir::new().expect("temporary directory");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 yaw invariance", Box::new(c1_yaw_invariance)),
        ("2 DIF == DIM(r=X)", Box::new(c2_dif_equals_dim_x)),
        ("3 direction vs dense oracle", Box::new(c3_oracle_agreement)),
        ("4 backflip singularities", Box::new(c4_backflip)),
        ("5 singular point relocation", Box::new(|| c5_singular_relocation(tmp.path()))),
        ("6 tangent field index", Box::new(c6_hairy_ball)),
        ("7 roundtrip reconstruction", Box::new(c7_roundtrip)),
        ("8 parser golden + malformed", Box::new(c8_parser_golden)),
        ("9 determinism", Box::new(|| c9_determinism(tmp.path()))),
    ];
    let mut failed = 0;
    for (name, f) in &criteria {
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            });
        match outcome {
            Ok(msg) => println!("PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
