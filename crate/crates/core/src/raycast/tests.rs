use super::*;
use crate::transfer::ControlPoint;
use nalgebra::{point, vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn constant_volume(value: f32, n: usize, spacing: f64) -> ScalarVolume {
    ScalarVolume::new(
        [n, n, n],
        Vector3::repeat(spacing),
        Point3::origin(),
        vec![value; n * n * n],
        (0.0, 1.0),
    )
    .unwrap()
}

fn ramp_tf() -> TransferFunction {
    TransferFunction::new(
        "ramp",
        vec![ControlPoint::gray(0.0, 0.0, 0.0), ControlPoint::gray(1.0, 1.0, 1.0)],
    )
    .unwrap()
}

fn sample(t: f64, scalar: f64, color: Rgb, opacity: f64) -> RaySample {
    RaySample {
        t,
        scalar,
        classified: Classified { color, opacity },
    }
}

fn random_samples(rng: &mut impl Rng, n: usize) -> Vec<RaySample> {
    (0..n)
        .map(|k| {
            sample(
                k as f64 * 0.5,
                rng.gen(),
                [rng.gen(), rng.gen(), rng.gen()],
                rng.gen(),
            )
        })
        .collect()
}

/// Back-to-front recursion `C_out = a_k c_k + (1 - a_k) C_in`, seeded with
/// the background.
fn back_to_front(samples: &[RaySample], background: Rgb) -> (Rgb, f64) {
    let mut c = background;
    let mut transmittance = 1.0;
    for s in samples.iter().rev() {
        let a = s.classified.opacity;
        for ch in 0..3 {
            c[ch] = a * s.classified.color[ch] + (1.0 - a) * c[ch];
        }
        transmittance *= 1.0 - a;
    }
    (c, 1.0 - transmittance)
}

fn no_early_stop() -> RaycastConfig {
    RaycastConfig {
        early_termination_alpha: 1.0,
        ..RaycastConfig::default()
    }
}

#[test]
fn sampling_misses_give_nothing() {
    let v = constant_volume(0.5, 4, 1.0);
    let ray = Ray::new(point![-5.0, 10.0, 1.0], vector![1.0, 0.0, 0.0]);
    assert!(ray.clipped_to(&v).is_none());
    let empty = ray.with_range(2.0, 1.0);
    assert!(sample_along_ray(&v, &ramp_tf(), &empty, &RaycastConfig::default()).is_empty());
}

#[test]
fn sampling_uses_interval_midpoints() {
    let v = constant_volume(0.5, 4, 1.0);
    let ray = Ray::new(point![0.0, 1.0, 1.0], vector![1.0, 0.0, 0.0]).with_range(0.0, 1.0);
    let config = RaycastConfig {
        step: 0.25,
        ..RaycastConfig::default()
    };
    let ts: Vec<f64> = sample_along_ray(&v, &ramp_tf(), &ray, &config)
        .iter()
        .map(|s| s.t)
        .collect();
    assert_eq!(ts, vec![0.125, 0.375, 0.625, 0.875]);
}

#[test]
fn reference_step_keeps_opacity() {
    let v = constant_volume(0.5, 8, 1.0);
    let tf = TransferFunction::new(
        "mid",
        vec![
            ControlPoint::gray(0.0, 0.0, 0.0),
            ControlPoint::gray(0.5, 0.5, 0.2),
            ControlPoint::gray(1.0, 1.0, 1.0),
        ],
    )
    .unwrap();
    let config = RaycastConfig {
        step: 0.7,
        reference_step: 0.7,
        ..RaycastConfig::default()
    };
    let ray = Ray::new(point![-1.0, 3.0, 3.0], vector![1.0, 0.0, 0.0])
        .clipped_to(&v)
        .unwrap();
    let samples = sample_along_ray(&v, &tf, &ray, &config);
    assert_eq!(samples.len(), 10);
    assert!(samples.iter().all(|s| s.classified.opacity == 0.2));
}

#[test]
fn composite_of_nothing_is_background() {
    let config = RaycastConfig {
        background: [0.1; 3],
        ..RaycastConfig::default()
    };
    let r = composite_ray(&[], &config);
    assert_eq!(r.color, [0.1; 3]);
    assert_eq!(r.alpha, 0.0);
    assert_eq!(r.samples_taken, 0);
}

#[test]
fn opaque_first_sample_terminates() {
    let config = RaycastConfig {
        background: [0.3; 3],
        ..RaycastConfig::default()
    };
    let samples = [
        sample(0.5, 0.9, [0.2, 0.4, 0.6], 1.0),
        sample(1.5, 0.1, [1.0, 1.0, 1.0], 0.5),
    ];
    let r = composite_ray(&samples, &config);
    assert_eq!(r.color, [0.2, 0.4, 0.6]);
    assert_eq!(r.alpha, 1.0);
    assert!(r.terminated_early);
    assert_eq!(r.samples_taken, 1);
}

#[test]
fn homogeneous_medium_matches_exponential() {
    let sigma: f64 = 0.5;
    let length = 4.0;
    let n = 64;
    let step = length / n as f64;
    let alpha = 1.0 - (-sigma * step).exp();
    let samples: Vec<_> = (0..n)
        .map(|k| sample((k as f64 + 0.5) * step, 0.5, [1.0; 3], alpha))
        .collect();
    let r = composite_ray(&samples, &no_early_stop());
    let expected = 1.0 - (-2.0f64).exp();
    assert!((r.alpha - expected).abs() <= 1e-6);
    assert!((r.alpha - 0.8647).abs() < 1e-4);
    assert!((r.color[0] - expected).abs() <= 1e-6);
}

#[test]
fn composite_matches_back_to_front_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let samples = random_samples(&mut rng, 10);
        let background = [rng.gen(), rng.gen(), rng.gen()];
        let config = RaycastConfig {
            background,
            ..no_early_stop()
        };
        let r = composite_ray(&samples, &config);
        let (c, a) = back_to_front(&samples, background);
        for ch in 0..3 {
            assert!((r.color[ch] - c[ch]).abs() <= 1e-12);
        }
        assert!((r.alpha - a).abs() <= 1e-12);
    }
}

#[test]
fn mip_cases() {
    let config = RaycastConfig {
        background: [0.2; 3],
        ..RaycastConfig::default()
    };
    let r = mip_ray(&[], &config);
    assert_eq!((r.color, r.alpha), ([0.2; 3], 0.0));

    let tf = ramp_tf();
    let constant: Vec<_> = (0..5)
        .map(|k| sample(k as f64, 0.3, tf.classify(0.3).unwrap().color, 0.1))
        .collect();
    let r = mip_ray(&constant, &config);
    assert_eq!(r.color, tf.classify(0.3).unwrap().color);
    assert_eq!(r.alpha, 1.0);
    assert_eq!(r.hit_t, Some(0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let n = 1 + rng.gen_range(0..40);
        let samples = random_samples(&mut rng, n);
        let mut best = 0;
        for i in 1..samples.len() {
            if samples[i].scalar > samples[best].scalar {
                best = i;
            }
        }
        let r = mip_ray(&samples, &config);
        assert_eq!(r.color, samples[best].classified.color);
        assert_eq!(r.hit_t, Some(samples[best].t));
    }
}

#[test]
fn average_cases() {
    let tf = ramp_tf();
    let config = RaycastConfig::default();
    let r = average_ray(&[sample(0.0, 0.4, [0.0; 3], 0.0)], &tf, &config);
    assert_eq!(r.color, tf.classify(0.4).unwrap().color);
    let r = average_ray(
        &[sample(0.0, 0.0, [0.0; 3], 0.0), sample(1.0, 1.0, [0.0; 3], 0.0)],
        &tf,
        &config,
    );
    assert_eq!(r.color, tf.classify(0.5).unwrap().color);
    assert_eq!(average_ray(&[], &tf, &config).alpha, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let samples = random_samples(&mut rng, 50);
    let mean = samples.iter().map(|s| s.scalar).sum::<f64>() / 50.0;
    let r = average_ray(&samples, &tf, &config);
    assert!((r.color[0] - mean).abs() <= 1e-12);
}

#[test]
fn threshold_cases() {
    let mut config = RaycastConfig {
        threshold_value: 0.0,
        background: [0.05; 3],
        ..RaycastConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let samples = random_samples(&mut rng, 8);
    let r = threshold_ray(&samples, &config);
    assert_eq!(r.color, samples[0].classified.color);
    assert_eq!(r.hit_t, Some(samples[0].t));

    config.threshold_value = 1.0;
    let r = threshold_ray(&samples, &config);
    assert_eq!((r.color, r.alpha), ([0.05; 3], 0.0));

    for _ in 0..50 {
        let samples = random_samples(&mut rng, 20);
        config.threshold_value = rng.gen();
        let mut first = None;
        for (i, s) in samples.iter().enumerate() {
            if s.scalar >= config.threshold_value {
                first = Some(i);
                break;
            }
        }
        let r = threshold_ray(&samples, &config);
        assert_eq!(r.hit_t, first.map(|i| samples[i].t));
    }
}

#[test]
fn headlight_cases() {
    let base = [0.4, 0.6, 0.8];
    let view = vector![0.0, 0.0, -1.0];
    let full = shade_headlight(&base, &vector![0.0, 0.0, 2.0], &view);
    assert_eq!(full, base);
    let facing = shade_headlight(&base, &vector![0.0, 0.0, -2.0], &view);
    assert_eq!(facing, base);
    let grazing = shade_headlight(&base, &vector![3.0, 0.0, 0.0], &view);
    for c in 0..3 {
        assert!((grazing[c] - 0.1 * base[c]).abs() < 1e-15);
    }
    assert_eq!(shade_headlight(&base, &Vector3::zeros(), &view), base);
}

fn radial_volume(n: usize, radius: f64) -> ScalarVolume {
    let half = (n - 1) as f64 / 2.0;
    ScalarVolume::from_fn(
        [n, n, n],
        Vector3::repeat(1.0),
        point![-half, -half, -half],
        |p| 1.0 - p.coords.norm() / radius,
    )
    .unwrap()
}

#[test]
fn isosurface_above_max_misses() {
    let v = constant_volume(0.4, 6, 1.0);
    let config = RaycastConfig {
        function: RayFunction::Iso,
        iso_value: 0.9,
        background: [0.2; 3],
        ..RaycastConfig::default()
    };
    let ray = Ray::new(point![-3.0, 2.5, 2.5], vector![1.0, 0.0, 0.0]);
    let r = cast_ray(&v, &ramp_tf(), &ray, &config);
    assert_eq!((r.color, r.alpha, r.hit_t), ([0.2; 3], 0.0, None));
}

#[test]
fn isosurface_finds_sphere_radius() {
    let radius = 40.0;
    let v = radial_volume(49, radius);
    let config = RaycastConfig {
        function: RayFunction::Iso,
        iso_value: 0.5,
        step: 1.0,
        ..RaycastConfig::default()
    };
    let ray = Ray::new(point![-60.0, 0.0, 0.0], vector![1.0, 0.0, 0.0]);
    let r = cast_ray(&v, &ramp_tf(), &ray, &config);
    let hit = ray.at(r.hit_t.unwrap());
    // Along a grid axis the interpolated radial field is exact.
    assert!((hit.coords.norm() - radius / 2.0).abs() <= config.step / 256.0, "{hit:?}");
    assert_eq!(r.alpha, 1.0);
    // The surface faces the viewer head-on: full diffuse.
    assert!((r.color[0] - 0.5).abs() < 1e-3);
}

#[test]
fn isosurface_planar_jump() {
    // Field jumps 0 -> 1 between x = 3 and x = 4; the iso-0.5 plane is at 3.5.
    let n = 8;
    let v = ScalarVolume::from_fn([n, n, n], Vector3::repeat(1.0), Point3::origin(), |p| {
        if p.x >= 4.0 { 1.0 } else { 0.0 }
    })
    .unwrap();
    let config = RaycastConfig {
        function: RayFunction::Iso,
        step: 0.3,
        ..RaycastConfig::default()
    };
    let dir = vector![1.0, 0.2, 0.1].normalize();
    let ray = Ray::new(point![-2.0, 1.0, 1.5], dir);
    let r = cast_ray(&v, &ramp_tf(), &ray, &config);
    let hit = ray.at(r.hit_t.unwrap());
    let tol = config.step / 2f64.powi(config.bisection_iters as i32);
    assert!((hit.x - 3.5).abs() <= tol * dir.x, "{hit:?}");
}

#[test]
fn streaming_matches_materialized_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let samples: Vec<f32> = (0..8 * 8 * 8).map(|_| rng.gen()).collect();
    let v = ScalarVolume::new([8, 8, 8], vector![1.0, 0.8, 1.2], Point3::origin(), samples, (0.0, 1.0))
        .unwrap();
    let tf = TransferFunction::new(
        "t",
        vec![
            ControlPoint::new(0.0, [0.0, 0.1, 0.2], 0.0),
            ControlPoint::new(0.5, [0.9, 0.3, 0.1], 0.3),
            ControlPoint::new(1.0, [1.0, 1.0, 0.8], 0.9),
        ],
    )
    .unwrap();
    for function in [RayFunction::Composite, RayFunction::Mip, RayFunction::Average, RayFunction::Threshold] {
        for _ in 0..30 {
            let config = RaycastConfig {
                function,
                step: rng.gen_range(0.2..1.5),
                threshold_value: rng.gen(),
                background: [0.1, 0.2, 0.3],
                ..RaycastConfig::default()
            };
            let origin = point![rng.gen_range(-3.0..10.0), rng.gen_range(-3.0..10.0), -4.0];
            let target = point![rng.gen_range(0.0..7.0), rng.gen_range(0.0..5.6), rng.gen_range(0.0..8.4)];
            let ray = Ray::new(origin, (target - origin).normalize());
            let streamed = cast_ray(&v, &tf, &ray, &config);
            let clipped = ray.clipped_to(&v).unwrap();
            let samples = sample_along_ray(&v, &tf, &clipped, &config);
            let sliced = match function {
                RayFunction::Composite => composite_ray(&samples, &config),
                RayFunction::Mip => mip_ray(&samples, &config),
                RayFunction::Average => average_ray(&samples, &tf, &config),
                RayFunction::Threshold => threshold_ray(&samples, &config),
                RayFunction::Iso => unreachable!(),
            };
            assert_eq!(streamed, sliced, "{function:?}");
        }
    }
}

fn arb_samples() -> impl Strategy<Value = Vec<RaySample>> {
    proptest::collection::vec(
        (0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0),
        0..40,
    )
    .prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(k, (s, r, g, b, a))| sample(k as f64, s, [r, g, b], a))
            .collect()
    })
}

proptest! {
    #[test]
    fn accumulated_alpha_is_monotone(samples in arb_samples()) {
        let mut acc = Compositor::new(&no_early_stop());
        let mut last = 0.0;
        for s in &samples {
            let _ = acc.push(&s.classified);
            prop_assert!(acc.alpha() >= last && acc.alpha() <= 1.0);
            last = acc.alpha();
        }
    }

    #[test]
    fn front_to_back_equals_back_to_front(samples in arb_samples(), bg in 0.0f64..1.0) {
        let config = RaycastConfig { background: [bg, 0.5 * bg, 1.0 - bg], ..no_early_stop() };
        let r = composite_ray(&samples, &config);
        let (c, a) = back_to_front(&samples, config.background);
        for ch in 0..3 {
            prop_assert!((r.color[ch] - c[ch]).abs() <= 1e-12);
        }
        prop_assert!((r.alpha - a).abs() <= 1e-12);
    }

    #[test]
    fn early_termination_residual_is_bounded(samples in arb_samples()) {
        let full = composite_ray(&samples, &no_early_stop());
        let cut = composite_ray(&samples, &RaycastConfig { early_termination_alpha: 0.999, ..RaycastConfig::default() });
        for ch in 0..3 {
            prop_assert!((full.color[ch] - cut.color[ch]).abs() <= 0.001 + 1e-12);
        }
    }

    #[test]
    fn single_sample_over_background(c in 0.0f64..=1.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let config = RaycastConfig { background: [b; 3], ..no_early_stop() };
        let r = composite_ray(&[sample(0.0, 0.5, [c; 3], a)], &config);
        prop_assert_eq!(r.color[0], a * c + (1.0 - a) * b);
    }

    #[test]
    fn mip_and_average_ignore_order(samples in arb_samples(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = samples.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let tf = ramp_tf();
        let config = RaycastConfig::default();
        prop_assert_eq!(mip_ray(&samples, &config).color, mip_ray(&shuffled, &config).color);
        let a = average_ray(&samples, &tf, &config);
        let b = average_ray(&shuffled, &tf, &config);
        prop_assert!((a.color[0] - b.color[0]).abs() <= 1e-12);
    }

    #[test]
    fn homogeneous_transmittance_telescopes(sigma in 0.01f64..3.0, n in 1usize..300, length in 0.5f64..20.0) {
        let step = length / n as f64;
        let reference_alpha = 1.0 - (-sigma).exp();
        let alpha = crate::transfer::correct_opacity(reference_alpha, step, 1.0).unwrap();
        let samples: Vec<_> = (0..n).map(|k| sample(k as f64 * step, 0.5, [1.0; 3], alpha)).collect();
        let r = composite_ray(&samples, &no_early_stop());
        prop_assert!(((1.0 - r.alpha) - (-sigma * length).exp()).abs() <= 1e-9);
    }
}

#[test]
fn isosurface_hit_respects_lipschitz_bound() {
    let radius = 30.0;
    let v = radial_volume(33, radius);
    let config = RaycastConfig {
        function: RayFunction::Iso,
        step: 0.75,
        ..RaycastConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..64 {
        let origin = point![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), -40.0];
        let target = point![rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), 0.0];
        let ray = Ray::new(origin, (target - origin).normalize());
        let r = cast_ray(&v, &ramp_tf(), &ray, &config);
        let t = r.hit_t.expect("ray through the center must hit");
        let value = v.sample_trilinear(&ray.at(t)).unwrap();
        // Trilinear interpolation of |p|/R is Lipschitz with constant <= sqrt(3)/R.
        let lipschitz = 3f64.sqrt() / radius;
        let bound = lipschitz * config.step / 2f64.powi(config.bisection_iters as i32);
        assert!((value - 0.5).abs() <= bound + 1e-7, "{value}");
    }
}
