mod common;

use common::*;
use slip::inverse::*;
use slip::sl::InterpRule;
use slip::Potential;

fn problem_from(truth: &Potential, s: &IndexSet, eps: f64) -> ReconstructionProblem {
    let data = forward_data(truth, s, s.max().unwrap()).unwrap();
    ReconstructionProblem::new(data, Tail::of(truth, eps, 65).unwrap())
}

fn assert_monotone(h: &[f64]) {
    for w in h.windows(2) {
        assert!(w[1] <= w[0], "{h:?}");
    }
}

#[test]
fn free_data_converges_immediately() {
    let truth = Potential::zero(1024).unwrap();
    let s = IndexSet::range(1, 40).unwrap();
    let p = problem_from(&truth, &s, 0.3);
    let rep = reconstruct(&p, &Potential::zero(256).unwrap(), 10).unwrap();
    assert_eq!(rep.iterations, 0);
    assert!(rep.data_misfit < 1e-12, "{}", rep.data_misfit);
    assert!(rep.v_hat.sup_bound() == 0.0);
}

#[test]
fn constant_potential_is_recovered() {
    let truth = Potential::constant(1024, 2.0).unwrap();
    let s = IndexSet::range(1, 30).unwrap();
    let mut p = problem_from(&truth, &s, 0.3);
    // 30 data pairs support at most 60 unknowns
    p.unknowns = 48;
    let init = p.initial_guess(&Potential::zero(256).unwrap()).unwrap();
    let rep = reconstruct(&p, &init, 10).unwrap();
    assert_monotone(&rep.residual_history);
    let err = rep
        .v_hat
        .samples()
        .iter()
        .map(|v| (v - 2.0).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "sup error {err}");
}

#[test]
fn initial_guess_must_carry_the_tail() {
    let truth = Potential::constant(1024, 2.0).unwrap();
    let s = IndexSet::range(1, 32).unwrap();
    let p = problem_from(&truth, &s, 0.3);
    assert!(reconstruct(&p, &Potential::zero(256).unwrap(), 1).is_err());
}

#[test]
fn tail_is_reproduced_exactly() {
    let truth =
        Potential::from_fn(1024, InterpRule::PiecewiseLinear, |x| smooth_bump(x) + x).unwrap();
    let s = IndexSet::range(1, 32).unwrap();
    let mut p = problem_from(&truth, &s, 0.3);
    p.derivative_weight = 0.05;
    let init = p.initial_guess(&Potential::zero(256).unwrap()).unwrap();
    let rep = reconstruct(&p, &init, 1).unwrap();
    let tail = p.tail().unwrap();
    for (i, v) in rep.v_hat.samples().iter().enumerate() {
        let x = i as f64 / 256.0;
        if x >= 0.7 {
            assert_eq!(*v, tail.eval(x));
        }
    }
}

#[test]
fn thinned_index_set_keeps_the_error_comparable() {
    let truth = Potential::from_fn(1024, InterpRule::PiecewiseLinear, smooth_bump).unwrap();
    let full = IndexSet::range(1, 40).unwrap();
    let thin = IndexSet::new((1..=40).filter(|k| k % 5 != 0).collect()).unwrap();
    assert!(thin.upper_density_estimate() >= 0.7);
    let run = |s: &IndexSet| {
        let mut p = problem_from(&truth, s, 0.3);
        p.derivative_weight = 0.05;
        let rep = reconstruct(&p, &Potential::zero(256).unwrap(), 14).unwrap();
        assert_monotone(&rep.residual_history);
        (rel_l2(&rep.v_hat, &truth), p)
    };
    let (a, p) = run(&full);
    let (b, _) = run(&thin);
    // errors are compared above the coarse-grid interpolation floor
    let floor = rel_l2(&p.initial_guess(&truth).unwrap(), &truth);
    assert!(
        a <= 0.05 && b < 2.0 * a + floor,
        "full {a}, thinned {b}, floor {floor}"
    );
}

#[test]
fn jacobian_matches_global_finite_differences() {
    let v = Potential::from_fn(16, InterpRule::PiecewiseLinear, |x| {
        3.0 * (5.0 * x).sin() + x
    })
    .unwrap();
    let s = IndexSet::range(1, 8).unwrap();
    let j = jacobian(&v, &s).unwrap();
    let h = 1e-4;
    for c in 0..=16 {
        let plus = v
            .map_samples(|i, x| if i == c { x + h } else { x })
            .unwrap();
        let minus = v
            .map_samples(|i, x| if i == c { x - h } else { x })
            .unwrap();
        let a = forward_data(&plus, &s, 8).unwrap();
        let b = forward_data(&minus, &s, 8).unwrap();
        for r in 0..8 {
            let dl = (a[r].lambda - b[r].lambda) / (2.0 * h);
            let dd = (a[r].dphi_at_1 - b[r].dphi_at_1) / (2.0 * h);
            let lam_scale = j.row(r).amax();
            let d_scale = j.row(8 + r).amax();
            assert!(
                (j[(r, c)] - dl).abs() <= 1e-4 * lam_scale,
                "lambda row {r} col {c}: {} vs {dl}",
                j[(r, c)]
            );
            assert!(
                (j[(8 + r, c)] - dd).abs() <= 1e-4 * d_scale,
                "dphi row {r} col {c}: {} vs {dd}",
                j[(8 + r, c)]
            );
        }
    }
    for r in 0..8 {
        assert!((j.row(r).sum() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn shift_equivariance() {
    let truth = Potential::from_fn(512, InterpRule::PiecewiseLinear, smooth_bump).unwrap();
    let s = IndexSet::range(1, 20).unwrap();
    let c = 1.75;
    let mut p = problem_from(&truth, &s, 0.3);
    p.unknowns = 32;
    p.grid = 128;
    p.derivative_weight = 0.05;
    p.reg = Some(1e-6);
    let mut q = problem_from(&truth.shifted(c), &s, 0.3);
    q.unknowns = 32;
    q.grid = 128;
    q.derivative_weight = 0.05;
    q.reg = Some(1e-6);
    let init = p.initial_guess(&Potential::zero(128).unwrap()).unwrap();
    let a = reconstruct(&p, &init, 4).unwrap();
    let b = reconstruct(&q, &init.shifted(c), 4).unwrap();
    for (x, y) in a.v_hat.samples().iter().zip(b.v_hat.samples()) {
        assert!((y - x - c).abs() < 1e-7, "{x} + {c} vs {y}");
    }
}
