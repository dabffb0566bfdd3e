use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;
use wavesrc::scenarios::{build_case, sphere_sensors, CaseOverrides};
use wavesrc::wavefield::{
    evaluate_field, evaluate_source, forward_map, retarded_time, uniform_grid, FieldMatrix,
    PhysicalConfig, PointSource, Region, Source, SourceModel, Vec3,
};

struct Linear {
    start: Vec3,
    velocity: Vec3,
    q: f64,
}

impl PointSource for Linear {
    fn position(&self, t: f64) -> Vec3 {
        self.start + self.velocity * t
    }
    fn velocity(&self, _t: f64) -> Vec3 {
        self.velocity
    }
    fn intensity(&self, _t: f64) -> f64 {
        self.q
    }
}

fn cfg() -> PhysicalConfig {
    PhysicalConfig::new(1.0, 20.0, 15.0).unwrap()
}

/// Retarded integral `(c / 4 pi) int q(s) delta_eps(c (t - s) - |x - p(s)|) / |x - p(s)| ds`
/// with a Gaussian mollifier, summed by the midpoint rule.
fn mollified_field(src: &impl PointSource, x: &Vec3, t: f64, c: f64, eps: f64) -> f64 {
    let n = 400_000;
    let (a, b) = (t - 6.0, t);
    let ds = (b - a) / n as f64;
    let norm = 1.0 / (eps * (2.0 * PI).sqrt());
    let mut acc = 0.0;
    for i in 0..n {
        let s = a + (i as f64 + 0.5) * ds;
        let r = (x - src.position(s)).norm();
        let arg = c * (t - s) - r;
        acc += src.intensity(s) * norm * (-0.5 * (arg / eps).powi(2)).exp() / r;
    }
    c / (4.0 * PI) * acc * ds
}

#[test]
fn moving_source_matches_mollified_retarded_integral() {
    let src = Linear {
        start: Vec3::zeros(),
        velocity: Vec3::new(0.5, 0.0, 0.0),
        q: 1.0,
    };
    let x = Vec3::new(3.0, 0.0, 0.0);
    let oracle = mollified_field(&src, &x, 5.0, 1.0, 1e-4);
    let u = evaluate_source(&src, &x, 5.0, &cfg()).unwrap();
    assert_relative_eq!(u, oracle, max_relative = 1e-6);
    assert_relative_eq!(u, 1.0 / (2.0 * PI), max_relative = 1e-12);
}

#[test]
fn oblique_motion_matches_mollified_retarded_integral() {
    let src = Linear {
        start: Vec3::new(-1.0, 0.5, 0.0),
        velocity: Vec3::new(0.3, -0.4, 0.0),
        q: 2.0,
    };
    let x = Vec3::new(1.0, 2.0, 2.0);
    let oracle = mollified_field(&src, &x, 7.5, 1.0, 1e-4);
    let u = evaluate_source(&src, &x, 7.5, &cfg()).unwrap();
    assert_relative_eq!(u, oracle, max_relative = 1e-6);
}

#[test]
fn stationary_unit_source_gives_inverse_distance_field() {
    let src = Linear {
        start: Vec3::zeros(),
        velocity: Vec3::zeros(),
        q: 1.0,
    };
    let sensors = sphere_sensors(424, 3.0, Region::Hemisphere).unwrap();
    for x in sensors.positions().iter().step_by(37) {
        let r = x.norm();
        let u = evaluate_source(&src, x, r + 0.75, &cfg()).unwrap();
        assert_relative_eq!(u, 1.0 / (4.0 * PI * r), max_relative = 1e-12);
    }
}

fn max_abs_error_against_oracle(m: usize) -> (f64, f64) {
    let s = build_case(2, &CaseOverrides::default()).unwrap();
    let grid = uniform_grid(0.0, s.cfg.turn_off_time, m);
    let model = s.truth_on_grid(&grid).unwrap();
    let approx = forward_map(&model, &s.sensors, &s.times, &s.cfg).unwrap();
    let mut exact = FieldMatrix::zeros(s.sensors.len(), s.times.len());
    for (i, x) in s.sensors.positions().iter().enumerate() {
        for (j, &t) in s.times.iter().enumerate() {
            exact.set(i, j, evaluate_field(&s.truth, x, t, &s.cfg).unwrap());
        }
    }
    (approx.max_abs_diff(&exact), exact.max_abs())
}

#[test]
fn forward_map_converges_to_pointwise_field() {
    let (e1, peak) = max_abs_error_against_oracle(100);
    let (e2, _) = max_abs_error_against_oracle(199);
    assert!(e1 <= 1e-3 * peak, "error {e1} vs peak {peak}");
    assert!(e2 <= 0.5 * e1, "refined error {e2} vs {e1}");
}

#[test]
fn forward_map_superposition() {
    let s = build_case(4, &CaseOverrides::default()).unwrap();
    let model = s.truth_on_grid(&s.latent_grid).unwrap();
    let both = forward_map(&model, &s.sensors, &s.times, &s.cfg).unwrap();
    let parts: Vec<FieldMatrix> = model
        .sources()
        .iter()
        .map(|src| {
            forward_map(&SourceModel::single(src.clone()), &s.sensors, &s.times, &s.cfg).unwrap()
        })
        .collect();
    for (k, v) in both.as_slice().iter().enumerate() {
        let sum = parts[0].as_slice()[k] + parts[1].as_slice()[k];
        assert!((v - sum).abs() <= 1e-14 * v.abs().max(1e-300) + 1e-300, "{v} {sum}");
    }
}

#[test]
fn field_vanishes_before_first_arrival() {
    let s = build_case(1, &CaseOverrides::default()).unwrap();
    let model = s.truth_on_grid(&s.latent_grid).unwrap();
    let field = forward_map(&model, &s.sensors, &s.times, &s.cfg).unwrap();
    for (i, x) in s.sensors.positions().iter().enumerate() {
        let first = x.norm();
        for (j, &t) in s.times.iter().enumerate() {
            if t < first {
                assert_eq!(field.get(i, j), 0.0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn retarded_time_residual_is_small(
        vx in -0.9f64..0.9,
        vy in -0.4f64..0.4,
        theta in 0.0f64..(2.0 * PI),
        z in 0.05f64..1.0,
        t in 0.0f64..20.0,
    ) {
        let src = Linear { start: Vec3::zeros(), velocity: Vec3::new(vx, vy, 0.0), q: 1.0 };
        let rho = (1.0 - z * z).sqrt();
        let x = Vec3::new(3.0 * rho * theta.cos(), 3.0 * rho * theta.sin(), 3.0 * z);
        let rt = retarded_time(&x, t, &src, &cfg()).unwrap();
        prop_assert!(rt.residual <= 1e-10);
        prop_assert!(rt.tau <= t);
    }

    #[test]
    fn field_is_linear_in_intensity(scale in 0.1f64..10.0, t in 4.0f64..18.0) {
        let grid = uniform_grid(0.0, 15.0, 30);
        let xs: Vec<f64> = grid.iter().map(|t| 0.1 * t).collect();
        let ys: Vec<f64> = grid.iter().map(|t| (0.2 * t).sin()).collect();
        let q: Vec<f64> = grid.iter().map(|t| 1.0 + 0.1 * t).collect();
        let qs: Vec<f64> = q.iter().map(|v| v * scale).collect();
        let a = Source::from_values(grid.clone(), xs.clone(), ys.clone(), q).unwrap();
        let b = Source::from_values(grid, xs, ys, qs).unwrap();
        let x = Vec3::new(0.0, 0.0, 3.0);
        let ua = evaluate_source(&a, &x, t, &cfg()).unwrap();
        let ub = evaluate_source(&b, &x, t, &cfg()).unwrap();
        prop_assert!((ub - scale * ua).abs() <= 1e-12 * ub.abs().max(1e-300));
    }
}
