mod common;

use std::f64::consts::PI;
use std::time::Instant;

use proptest::prelude::*;
use slip::analytic::C64;
use slip::pde::*;
use slip::Potential;

fn grid_fn(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
    (0..=n).map(|i| f(i as f64 / n as f64)).collect()
}

fn poly22(x: f64) -> f64 {
    x * x * (1.0 - x) * (1.0 - x)
}

fn dpoly22(x: f64) -> f64 {
    2.0 * x * (1.0 - x) * (1.0 - 2.0 * x)
}

fn poly33(x: f64) -> f64 {
    (x * (1.0 - x)).powi(3)
}

fn dpoly33(x: f64) -> f64 {
    3.0 * (x * (1.0 - x)).powi(2) * (1.0 - 2.0 * x)
}

/// Slope of the odd 2-periodic extension, an even function.
fn ext_slope(df: impl Fn(f64) -> f64, s: f64) -> f64 {
    let r = s.rem_euclid(2.0);
    let r = if r >= 1.0 { r - 2.0 } else { r };
    df(r.abs())
}

fn dalembert(df: impl Fn(f64) -> f64 + Copy, t: f64) -> (f64, f64) {
    let left = ext_slope(df, t);
    let right = 0.5 * (ext_slope(df, 1.0 + t) + ext_slope(df, 1.0 - t));
    (left, right)
}

fn max_dev(tr: &TimeTrace, reference: impl Fn(f64) -> (f64, f64)) -> f64 {
    tr.t.iter()
        .enumerate()
        .map(|(j, &t)| {
            let (l, r) = reference(t);
            (tr.left[j] - l).norm().max((tr.right[j] - r).norm())
        })
        .fold(0.0, f64::max)
}

#[test]
fn single_mode_wave_trace() {
    let v = Potential::zero(1024).unwrap();
    let f = grid_fn(1024, |x| (PI * x).sin());
    let cfg = WaveConfig::new(v, f, 2.5).with_modes(8);
    let tr = wave_trace(&cfg).unwrap();
    let err = max_dev(&tr, |t| (PI * (PI * t).cos(), -PI * (PI * t).cos()));
    assert!(err < 1e-6, "{err}");
    assert_eq!(tr.kind, FieldKind::Real);
    assert!(tr.warnings.is_empty(), "{:?}", tr.warnings);
}

#[test]
fn free_wave_matches_dalembert() {
    let v = Potential::zero(4096).unwrap();
    let cfg = WaveConfig::new(v.clone(), grid_fn(4096, poly33), 2.5).with_samples(1001);
    let tr = wave_trace(&cfg).unwrap();
    let err = max_dev(&tr, |t| dalembert(dpoly33, t));
    assert!(err < 1e-4, "smooth f: {err}");

    // rougher data: kinks in the trace, checked in L^2
    let cfg = WaveConfig::new(v, grid_fn(4096, poly22), 2.5).with_samples(2001);
    let tr = wave_trace(&cfg).unwrap();
    let mut reference = tr.clone();
    for (j, &t) in tr.t.iter().enumerate() {
        let (l, r) = dalembert(dpoly22, t);
        reference.left[j] = C64::new(l, 0.0);
        reference.right[j] = C64::new(r, 0.0);
    }
    let l2 = trace_l2_distance(&tr, &reference).unwrap();
    assert!(l2 < 1e-3, "{l2}");
}

#[test]
fn spectral_wave_matches_leapfrog() {
    let n = 8192;
    let v = common::bump_potential(n);
    let cfg = WaveConfig::new(v, grid_fn(n, poly22), 2.5);
    let start = Instant::now();
    let spectral = wave_trace(&cfg).unwrap();
    let t_spec = start.elapsed();
    let oracle = fdtd_wave_oracle(&cfg, n, None).unwrap();
    let l2 = trace_l2_distance(&spectral, &oracle.trace).unwrap();
    eprintln!(
        "spectral {:?}, fdtd {:?} ({} steps), L2 = {l2:.3e}, energy drift = {:.3e}",
        t_spec,
        start.elapsed() - t_spec,
        oracle.steps,
        oracle.drift
    );
    assert!(l2 <= 1e-3, "{l2}");
    assert!(oracle.drift < 1e-6, "{}", oracle.drift);
    assert!(oracle.dt <= 0.5 / n as f64);
}

#[test]
fn leapfrog_is_second_order() {
    let cfg = WaveConfig::new(Potential::zero(4096).unwrap(), grid_fn(4096, poly33), 1.5)
        .with_samples(301);
    let errs: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&n| {
            let run = fdtd_wave_oracle(&cfg, n, None).unwrap();
            max_dev(&run.trace, |t| dalembert(dpoly33, t))
        })
        .collect();
    eprintln!("fdtd errors {errs:?}");
    assert!(errs[2] < 1e-4, "{errs:?}");
    let (r1, r2) = (errs[0] / errs[1], errs[1] / errs[2]);
    assert!(r1 > 3.0 && r1 < 5.0 && r2 > 3.0 && r2 < 5.0, "{r1} {r2}");
    // CFL guard
    assert!(fdtd_wave_oracle(&cfg, 512, Some(300)).is_err());
}

#[test]
fn parseval_and_modal_energy() {
    let n = 4096;
    let v = common::bump_potential(n);
    let f = grid_fn(n, poly22);
    let modes = wave_modes(&WaveConfig::new(v, f.clone(), 2.5)).unwrap();
    let norm_sq = common::trapezoid(&f.iter().map(|x| x * x).collect::<Vec<_>>(), 1.0 / n as f64);
    let tail = modes.tail_estimate();
    let gap = (modes.parseval_sum() - norm_sq).abs();
    assert!(gap <= tail * tail, "gap {gap:.3e}, tail {tail:.3e}");
    let e0 = modes.energy_at(0.0);
    for t in [0.3, 1.1, 2.5] {
        assert!(((modes.energy_at(t) - e0) / e0).abs() < 1e-12);
    }
}

#[test]
fn stationary_mode() {
    let n = 2048;
    let v = common::bump_potential(n);
    let basis = ModalBasis::new(&v, 1).unwrap();
    let p1 = &basis.pairs()[0];
    let f: Vec<C64> = basis.phi(0).into_iter().map(|x| C64::new(x, 0.0)).collect();
    let cfg = SchrodingerConfig::new(v, f, Vec::new(), 0.0, 1.0)
        .with_modes(32)
        .with_samples(257);
    let tr = schrodinger_trace(&cfg).unwrap();
    let mut worst = 0.0f64;
    for (j, &t) in tr.t.iter().enumerate() {
        let e = C64::from_polar(1.0, p1.lambda * t);
        worst = worst
            .max((tr.left[j] - e).norm())
            .max((tr.right[j] - e * p1.dphi_at_1).norm());
    }
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn smooth_schrodinger_matches_crank_nicolson() {
    let n = 4096;
    let v = common::bump_potential(n);
    // f and F compatible with the boundary to high order, so CN keeps its order
    let f: Vec<C64> = grid_fn(n, |x| 64.0 * (x * (1.0 - x)).powi(5))
        .into_iter()
        .map(|x| C64::new(x, -0.5 * x))
        .collect();
    let src = grid_fn(n, |x| 3.0 * poly22(x));
    let cfg = SchrodingerConfig::new(v, f, src, 0.0, 0.5).with_samples(501);
    let spectral = schrodinger_trace(&cfg).unwrap();
    let errs: Vec<f64> = [1e-4, 5e-5]
        .iter()
        .map(|&dt| {
            trace_l2_distance(
                &spectral,
                &crank_nicolson_oracle(&cfg, n, dt).unwrap().trace,
            )
            .unwrap()
        })
        .collect();
    eprintln!(
        "smooth CN errors {errs:?}, trace sup {:.3e}",
        spectral.sup()
    );
    assert!(errs[0] <= 1e-3, "{errs:?}");
    assert!(errs[0] / errs[1] > 2.5, "{errs:?}");
}

#[test]
fn full_probe_against_crank_nicolson() {
    let n = 4096;
    let cfg = SchrodingerConfig::quiet(Potential::zero(n).unwrap(), 1.0, 0.5).with_samples(501);
    let modes = schrodinger_modes(&cfg).unwrap();
    // (1, phi_1) / ||phi_1||^2 = (2 / pi^2) / (1 / (2 pi^2))
    assert!((modes.beta_probe[0] - 4.0).abs() < 1e-9);
    let a1 = modes.amplitude(0, 0.3);
    let l1 = PI * PI;
    let want = -(C64::from_polar(1.0, l1 * 0.3) - 1.0) * 4.0 / l1;
    assert!((a1 - want).norm() < 1e-12);

    // the probe does not vanish at x = 0, so CN converges like dt^{1/2} here
    let spectral = schrodinger_trace(&cfg.clone().with_modes(1024)).unwrap();
    let errs: Vec<f64> = [1e-4, 2.5e-5]
        .iter()
        .map(|&dt| {
            trace_l2_distance(
                &spectral,
                &crank_nicolson_oracle(&cfg, n, dt).unwrap().trace,
            )
            .unwrap()
        })
        .collect();
    eprintln!("full probe CN errors {errs:?}");
    let rate = (errs[0] / errs[1]).log(4.0);
    assert!(rate > 0.35 && rate < 0.8, "{errs:?}");
}

#[test]
fn mass_is_conserved_without_forcing() {
    let n = 2048;
    let v = common::bump_potential(n);
    let f: Vec<C64> = (0..=n)
        .map(|i| {
            let x = i as f64 / n as f64;
            C64::new(poly22(x) * 10.0, (2.0 * PI * x).sin() * 0.5)
        })
        .collect();
    let cfg = SchrodingerConfig::new(v, f, Vec::new(), 0.0, 1.0).with_samples(201);
    let modes = schrodinger_modes(&cfg).unwrap();
    let m0 = modes.mass_at(0.0);
    let drift = [0.1, 0.37, 1.0]
        .iter()
        .map(|&t| ((modes.mass_at(t) - m0) / m0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-8, "{drift}");
    let cn = crank_nicolson_oracle(&cfg, 1024, 1e-3).unwrap();
    assert!(cn.drift < 1e-4, "{}", cn.drift);
}

#[test]
fn zero_eigenvalue_branch_grows_linearly() {
    let n = 1024;
    let v = Potential::constant(n, -PI * PI).unwrap();
    let cfg = SchrodingerConfig::quiet(v, 0.5, 1.0)
        .with_modes(16)
        .with_samples(101);
    let modes = schrodinger_modes(&cfg).unwrap();
    let lambda1 = modes.basis.pairs()[0].lambda;
    assert!(lambda1.abs() < 1e-9, "{lambda1}");
    // (1_delta, phi_1) / ||phi_1||^2 with phi_1 = sin(pi x) / pi
    let want = (1.0 - (0.5 * PI).cos()) / (PI * PI) / (0.5 / (PI * PI));
    assert!((modes.beta_probe[0] - want).abs() < 1e-9);
    for t in [0.1, 0.25, 0.5] {
        let a = modes.amplitude(0, t);
        assert!((a - C64::new(0.0, -t * want)).norm() < 1e-8, "{t}: {a}");
    }
    // after the probe switches off the amplitude freezes
    let a = modes.amplitude(0, 0.9);
    assert!((a - C64::new(0.0, -0.5 * want)).norm() < 1e-8);
}

#[test]
fn decay_witness_limits() {
    let n = 4096;
    let v = Potential::zero(n).unwrap();
    let f = grid_fn(n, |x| x * x * (1.0 - x).powi(3));
    let (d0, d1) = endpoint_second_derivatives(&f).unwrap();
    assert!((d0 - 2.0).abs() < 1e-6 && d1.abs() < 1e-6, "{d0} {d1}");
    let w = coeff_decay_witness(&v, &f, 64).unwrap();
    let (even, odd) = decay_limits(&w);
    let (want_even, want_odd) = (d1 - d0, -d1 - d0);
    assert!(((even - want_even) / want_even).abs() < 0.02, "{even}");
    assert!(((odd - want_odd) / want_odd).abs() < 0.02, "{odd}");
    assert!(w.iter().skip(3).all(|(_, a)| a.abs() > 0.5), "{w:?}");

    // symmetric data: the even subsequence degenerates
    let f = grid_fn(n, poly22);
    let (even, odd) = decay_limits(&coeff_decay_witness(&v, &f, 64).unwrap());
    assert!(
        even.abs() < 0.02 && (odd + 4.0).abs() < 0.08,
        "{even} {odd}"
    );

    // a single eigenfunction: all higher coefficients vanish
    let f = grid_fn(n, |x| (PI * x).sin());
    let w = coeff_decay_witness(&v, &f, 16).unwrap();
    assert!(w
        .iter()
        .skip(1)
        .all(|(k, a)| a.abs() / (*k as f64 * PI).powi(4) < 1e-12));
}

#[test]
fn exceptional_set_of_free_probe() {
    let start = Instant::now();
    let n = 8192;
    let v = Potential::zero(n).unwrap();
    let zero = vec![0.0; n + 1];
    let p = exceptional_set_p(&v, &zero, &zero, 0.5, 2000, MembershipRule::default()).unwrap();
    eprintln!("P up to 2000 in {:?}", start.elapsed());
    let want: Vec<usize> = (1..=500).map(|m| 4 * m).collect();
    assert_eq!(p.set.indices(), &want[..]);
    assert!((p.density() - 0.25).abs() < 1e-3);
    let env = exceptional_set_p(&v, &zero, &zero, 0.5, 400, MembershipRule::Envelope).unwrap();
    assert_eq!(env.set.indices(), &want[..100]);

    let v = Potential::zero(2048).unwrap();
    let zero = vec![0.0; 2049];
    let p = exceptional_set_p(&v, &zero, &zero, 1.0 / 3.0, 300, MembershipRule::default()).unwrap();
    let want: Vec<usize> = (1..=50).map(|m| 6 * m).collect();
    assert_eq!(p.set.indices(), &want[..]);
}

#[test]
fn exceptional_set_of_generic_probe() {
    let n = 4096;
    let v = common::bump_potential(n);
    let f = grid_fn(n, |x| 0.01 * (x * (1.0 - x)).powi(4));
    let src = grid_fn(n, |x| 0.05 * (x * (1.0 - x)).powi(2));
    for delta in [0.5, 0.3] {
        for rule in [MembershipRule::default(), MembershipRule::Envelope] {
            let p = exceptional_set_p(&v, &f, &src, delta, 1000, rule).unwrap();
            let worst = p.profile.iter().map(|r| r.1).fold(0.0, f64::max);
            assert!(
                worst <= delta / 2.0 + 0.05,
                "{delta} {rule:?}: {:?}",
                p.profile
            );
        }
    }
}

#[test]
fn gauge_pairs_differ_by_constants() {
    let n = 4096;
    let base_v = Potential::zero(n).unwrap();
    let f1: Vec<C64> = grid_fn(n, |x| (x * (1.0 - x)).powi(3))
        .into_iter()
        .map(|x| C64::new(x, 0.5 * x))
        .collect();
    let src = grid_fn(n, |x| x * (1.0 - x));
    let base = SchrodingerConfig::new(base_v, f1.clone(), src.clone(), 0.4, 2.0).with_samples(801);

    let r0 = gauge_pair_check(&base, &vec![0.0; n + 1]).unwrap();
    assert_eq!(r0.variation, 0.0);

    let r = gauge_pair_check(&base, &grid_fn(n, |x| (2.0 * PI * x).sin())).unwrap();
    assert!(r.variation < 1e-6, "{}", r.variation);
    assert!(
        (r.left_offset - 2.0 * PI).norm() < 1e-6,
        "{}",
        r.left_offset
    );
    assert!(
        (r.right_offset - 2.0 * PI).norm() < 1e-6,
        "{}",
        r.right_offset
    );

    let bump = Potential::from_fn(n, Default::default(), common::bump).unwrap();
    let gauged = SchrodingerConfig {
        potential: bump,
        ..base.clone()
    };
    let g = grid_fn(n, poly22);
    let r = gauge_pair_check(&gauged, &g).unwrap();
    assert!(r.variation < 1e-6, "{}", r.variation);
    // the offsets are truncated series for g'(0) = g'(1) = 0
    assert!(r.slope_left.abs() < 1e-9 && r.slope_right.abs() < 1e-9);
    let coarse = gauge_pair_check(&gauged.clone().with_modes(32), &g).unwrap();
    assert!(
        r.left_offset.norm() < 0.3 * coarse.left_offset.norm(),
        "{} {}",
        r.left_offset,
        coarse.left_offset
    );
    assert!(r.left_offset.norm() < 5e-3);
}

#[test]
fn different_interiors_give_different_traces() {
    let n = 4096;
    let v1 = common::bump_potential(n);
    let v2 = Potential::from_fn(n, Default::default(), |x| {
        common::bump(x)
            + if x < 0.5 {
                2.0 * (PI * x / 0.5).sin().powi(4)
            } else {
                0.0
            }
    })
    .unwrap();
    let f = grid_fn(n, |x| x * x * (1.0 - x).powi(3));
    let w1 = wave_trace(&WaveConfig::new(v1.clone(), f.clone(), 2.5).with_samples(1001)).unwrap();
    let w2 = wave_trace(&WaveConfig::new(v2.clone(), f.clone(), 2.5).with_samples(1001)).unwrap();
    let w1_coarse = wave_trace(
        &WaveConfig::new(v1.clone(), f.clone(), 2.5)
            .with_samples(1001)
            .with_modes(96),
    )
    .unwrap();
    let noise = trace_l2_distance(&w1, &w1_coarse).unwrap();
    let signal = trace_l2_distance(&w1, &w2).unwrap();
    assert!(
        signal > 20.0 * noise,
        "signal {signal:.3e}, noise {noise:.3e}"
    );

    let fc: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
    let s1 = schrodinger_trace(
        &SchrodingerConfig::new(v1, fc.clone(), Vec::new(), 0.3, 0.3).with_samples(301),
    )
    .unwrap();
    let s2 =
        schrodinger_trace(&SchrodingerConfig::new(v2, fc, Vec::new(), 0.3, 0.3).with_samples(301))
            .unwrap();
    assert!(trace_l2_distance(&s1, &s2).unwrap() > 1e-4);
}

#[test]
fn configs_round_trip_through_json() {
    let v = Potential::zero(64).unwrap();
    let cfg = WaveConfig::new(v.clone(), grid_fn(64, poly22), 3.0);
    let back = WaveConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
    let f: Vec<C64> = grid_fn(64, poly22)
        .into_iter()
        .map(|x| C64::new(x, -x))
        .collect();
    let s = SchrodingerConfig::new(v, f, Vec::new(), 0.25, 1.0);
    let text = serde_json::to_string(&s).unwrap();
    assert!(text.contains("\"schema_version\":1"));
    assert_eq!(SchrodingerConfig::from_json(&text).unwrap(), s);
    let bad = text.replace("\"delta\":0.25", "\"delta\":1.5");
    assert!(SchrodingerConfig::from_json(&bad).is_err());
    let short = WaveConfig { t_end: 1.5, ..cfg };
    assert_eq!(short.validate().unwrap().len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wave_trace_is_linear_in_data(a in -2.0f64..2.0, b in -2.0f64..2.0, m in 1usize..6) {
        let n = 256;
        let v = Potential::from_fn(n, Default::default(), |x| 3.0 * x * x).unwrap();
        let f = grid_fn(n, poly22);
        let g = grid_fn(n, |x| (m as f64 * PI * x).sin());
        let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let run = |h: Vec<f64>| wave_trace(&WaveConfig::new(v.clone(), h, 2.2).with_modes(24).with_samples(65)).unwrap();
        let (tf, tg, tm) = (run(f), run(g), run(mix));
        for j in 0..tm.len() {
            let want = tf.left[j] * a + tg.left[j] * b;
            prop_assert!((tm.left[j] - want).norm() < 1e-9 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn free_evolution_is_unitary(c in proptest::collection::vec(-1.0f64..1.0, 6), t in 0.0f64..3.0) {
        let n = 256;
        let v = Potential::from_fn(n, Default::default(), |x| 4.0 * (3.0 * x).sin()).unwrap();
        let f: Vec<C64> = (0..=n).map(|i| {
            let x = i as f64 / n as f64;
            c.iter().enumerate().map(|(k, ck)| C64::new(*ck, 0.3 * ck) * ((k + 1) as f64 * PI * x).sin()).sum()
        }).collect();
        let modes = schrodinger_modes(&SchrodingerConfig::new(v, f, Vec::new(), 0.0, 3.0).with_modes(12)).unwrap();
        let m0 = modes.mass_at(0.0);
        prop_assert!(((modes.mass_at(t) - m0) / m0.max(1e-300)).abs() < 1e-10);
    }
}
