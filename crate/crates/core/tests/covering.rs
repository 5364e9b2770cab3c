use dirinv::sample_sphere;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const COVERING_RADIUS: f64 = 0.11;

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

#[test]
fn default_lattice_covers_the_sphere() {
    let lattice: Vec<[f64; 3]> = sample_sphere(1024).iter().map(|v| v.to_array()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let probes: Vec<[f64; 3]> = (0..1_000_000).map(|_| random_unit(&mut rng)).collect();
    let worst = probes
        .par_iter()
        .map(|p| {
            let best = lattice
                .iter()
                .map(|q| p[0] * q[0] + p[1] * q[1] + p[2] * q[2])
                .fold(-1.0f64, f64::max);
            best.clamp(-1.0, 1.0).acos()
        })
        .reduce(|| 0.0, f64::max);
    println!("empirical covering radius at N=1024: {worst:.4} rad");
    assert!(worst <= COVERING_RADIUS, "{worst}");
}

#[test]
fn lattice_points_follow_the_spiral() {
    let n = 37;
    let golden = 2.399963229728653;
    for (i, v) in sample_sphere(n).iter().enumerate() {
        let y = 1.0 - (2 * i + 1) as f64 / n as f64;
        let rad = (1.0 - y * y).sqrt();
        let phi = golden * i as f64;
        let want = [rad * phi.cos(), y, rad * phi.sin()];
        for k in 0..3 {
            assert!((v.to_array()[k] - want[k]).abs() < 1e-12);
        }
    }
}
