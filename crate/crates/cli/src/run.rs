//! One runner per experiment kind.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use slip::analytic::{build_f, build_g, density_profile, C64};
use slip::harmonics::{
    build_cos_window, build_exp_window, cos_window_residual_curve, FrequencySet, LpInterpolator,
    SequenceLP, WindowFunction, FEASIBILITY_TOL,
};
use slip::inverse::{
    data_agreement_certificate, forward_data, reconstruct, ReconstructionProblem, Tail,
};
use slip::io::{save_potential, write_eigendata, write_rows};
use slip::pde::{
    crank_nicolson_oracle, exceptional_set_p, fdtd_wave_oracle, gauge_pair_check,
    schrodinger_modes, schrodinger_trace, trace_l2_distance, wave_modes, wave_trace,
    MembershipRule, ModalBasis, SchrodingerConfig, SchrodingerModes, TimeTrace, WaveConfig,
    DEFAULT_MODES,
};
use slip::sl::EigenSolver;
use slip::Potential;

use crate::inputs::FunctionSpec;
use crate::spec::*;
use crate::summary::{Check, Summary};

/// Output directory, generator and summary of one run.
pub struct Ctx {
    out: PathBuf,
    rng: ChaCha8Rng,
    pub summary: Summary,
}

impl Ctx {
    pub fn new(spec: &ExperimentSpec, out: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self {
            out,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            summary: Summary::new(spec.kind, spec.seed, spec.params.to_value()),
        })
    }

    fn artifact(&mut self, name: &str) -> PathBuf {
        self.summary.artifacts.push(name.to_string());
        self.out.join(name)
    }

    fn csv<R: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = R>) -> Result<()> {
        let path = self.artifact(name);
        write_rows(BufWriter::new(File::create(&path)?), rows)?;
        Ok(())
    }

    fn potential(&mut self, name: &str, v: &Potential) -> Result<()> {
        let path = self.artifact(name);
        save_potential(path, v)?;
        Ok(())
    }

    fn trace(&mut self, name: &str, t: &TimeTrace) -> Result<()> {
        let path = self.artifact(name);
        t.save(path)?;
        self.warn_all(name, &t.warnings);
        Ok(())
    }

    fn window(&mut self, name: &str, w: &WindowFunction) -> Result<()> {
        let path = self.artifact(name);
        w.save(path)?;
        self.warn_all(name, &w.warnings);
        Ok(())
    }

    fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.summary.metrics.insert(name.into(), value);
    }

    fn check(
        &mut self,
        name: impl Into<String>,
        passed: bool,
        value: f64,
        criterion: impl Into<String>,
    ) {
        self.summary.checks.push(Check {
            name: name.into(),
            passed,
            value,
            criterion: criterion.into(),
        });
    }

    fn check_le(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.check(name, value <= bound, value, format!("<= {bound:e}"));
    }

    fn warn(&mut self, w: impl Into<String>) {
        self.summary.warnings.push(w.into());
    }

    fn warn_all(&mut self, source: &str, ws: &[String]) {
        for w in ws {
            self.warn(format!("{source}: {w}"));
        }
    }
}

pub fn run(spec: &ExperimentSpec, out: &Path) -> Result<Summary> {
    let mut ctx = Ctx::new(spec, out.to_path_buf())?;
    match &spec.params {
        Params::Eigs(p) => eigs(&mut ctx, p),
        Params::Zeros(p) => zeros(&mut ctx, p),
        Params::Reconstruct(p) => reconstruct_run(&mut ctx, p),
        Params::WaveTrace(p) => wave(&mut ctx, p),
        Params::SchrodTrace(p) => schrod(&mut ctx, p),
        Params::Windows(p) => windows(&mut ctx, p),
        Params::Interp(p) => interp(&mut ctx, p),
        Params::Theorem1(p) => theorem1(&mut ctx, p),
        Params::Theorem2(p) => theorem2(&mut ctx, p),
        Params::Theorem4(p) => theorem4(&mut ctx, p),
    }
    .with_context(|| format!("running {}", spec.kind))?;
    ctx.summary.write(out)?;
    Ok(ctx.summary)
}

fn eigs(ctx: &mut Ctx, p: &EigsParams) -> Result<()> {
    let v = p.potential.build(p.cells, &mut ctx.rng)?;
    let solver = match p.steps {
        Some(s) => EigenSolver::with_steps(&v, s)?,
        None => EigenSolver::new(&v)?,
    };
    let pairs = solver.pairs(p.k)?;
    ctx.metric("solver_steps", solver.steps() as f64);
    let path = ctx.artifact("eigs.csv");
    write_eigendata(BufWriter::new(File::create(path)?), &pairs)?;
    ctx.potential("potential.csv", &v)?;
    let nodal = pairs
        .iter()
        .filter(|e| e.interior_sign_changes() != e.index - 1)
        .count();
    ctx.check(
        "nodal_count",
        nodal == 0,
        nodal as f64,
        "k-th eigenfunction has k - 1 interior zeros",
    );
    let ordered = pairs.windows(2).all(|w| w[1].lambda > w[0].lambda);
    ctx.check(
        "strictly_increasing",
        ordered,
        pairs.len() as f64,
        "lambda_k < lambda_(k+1)",
    );
    if let Some(c) = p.potential.constant_value() {
        let err = pairs
            .iter()
            .map(|e| {
                let k = e.index as f64;
                let want = k * k * PI * PI + c;
                (e.lambda - want).abs() / want.abs().max(1.0)
            })
            .fold(0.0, f64::max);
        ctx.metric("max_rel_error_closed_form", err);
        ctx.check_le("closed_form_eigenvalues", err, 1e-8);
        if c == 0.0 {
            let sign = pairs
                .iter()
                .map(|e| (e.dphi_at_1 - if e.index % 2 == 0 { 1.0 } else { -1.0 }).abs())
                .fold(0.0, f64::max);
            ctx.metric("max_endpoint_slope_error", sign);
            ctx.check_le("endpoint_slopes", sign, 1e-8);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ZeroRow {
    radius: f64,
    count: usize,
    n_over_r: f64,
    contour_residual: f64,
}

fn zeros(ctx: &mut Ctx, p: &ZerosParams) -> Result<()> {
    let v1 = p.potential1.build(p.cells, &mut ctx.rng)?;
    let v2 = p.potential2.build(p.cells, &mut ctx.rng)?;
    let f = match p.sampler {
        Sampler::F => build_f(&v1, &v2, p.x0)?,
        Sampler::G => build_g(&v1, &v2, p.x0)?,
    };
    let prof = density_profile(&f, &p.radii)?;
    ctx.csv(
        "density.csv",
        prof.counts.iter().map(|c| ZeroRow {
            radius: c.radius,
            count: c.count,
            n_over_r: c.n_over_r(),
            contour_residual: c.contour_residual,
        }),
    )?;
    ctx.metric("plateau", prof.plateau);
    ctx.metric("type_bound", p.x0 / PI);
    ctx.check(
        "monotone_counts",
        prof.monotone,
        prof.plateau,
        "n(r) non-decreasing in r",
    );
    ctx.check_le("plateau_below_type", prof.plateau, p.x0 / PI + 0.02);
    Ok(())
}

/// Relative `L^2(0, 1)` distance on a fine uniform grid.
fn rel_l2(a: &Potential, b: &Potential) -> f64 {
    let n = 8192;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        num += w * (a.eval(x) - b.eval(x)).powi(2);
        den += w * b.eval(x).powi(2);
    }
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

#[derive(Serialize)]
struct ResidualRow {
    iteration: usize,
    residual: f64,
}

struct Recovery {
    v_hat: Potential,
    error: f64,
}

#[allow(clippy::too_many_arguments)]
fn recover(
    ctx: &mut Ctx,
    truth: &Potential,
    s: &slip::inverse::IndexSet,
    epsilon: f64,
    tail_samples: usize,
    configure: impl FnOnce(&mut ReconstructionProblem),
    init: &Potential,
    iterations: usize,
) -> Result<Recovery> {
    let k_max = s.max().unwrap_or(1);
    let data = forward_data(truth, s, k_max)?;
    let mut problem = ReconstructionProblem::new(data, Tail::of(truth, epsilon, tail_samples)?);
    configure(&mut problem);
    problem.validate()?;
    let path = ctx.artifact("problem.json");
    std::fs::write(path, serde_json::to_string_pretty(&problem)? + "\n")?;
    let init = problem.initial_guess(init)?;
    let rep = reconstruct(&problem, &init, iterations)?;
    ctx.csv(
        "residuals.csv",
        rep.residual_history
            .iter()
            .enumerate()
            .map(|(iteration, &residual)| ResidualRow {
                iteration,
                residual,
            }),
    )?;
    ctx.potential("truth.csv", truth)?;
    ctx.potential("v_hat.csv", &rep.v_hat)?;
    let error = rel_l2(&rep.v_hat, truth);
    ctx.metric("recovery_rel_l2", error);
    ctx.metric("data_misfit", rep.data_misfit);
    ctx.metric("regularity_penalty", rep.regularity_penalty);
    ctx.metric("iterations", rep.iterations as f64);
    ctx.metric("final_reg", rep.final_reg);
    if rep.stagnated {
        ctx.warn("reconstruction stagnated before the iteration budget");
    }
    let monotone = rep.residual_history.windows(2).all(|w| w[1] <= w[0]);
    ctx.check(
        "monotone_residuals",
        monotone,
        rep.residual_history.last().copied().unwrap_or(0.0),
        "non-increasing",
    );
    let tail = problem.tail()?;
    let cells = rep.v_hat.cells();
    let dev = rep
        .v_hat
        .samples()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as f64 / cells as f64 >= tail.start())
        .map(|(i, v)| (v - tail.eval(i as f64 / cells as f64)).abs())
        .fold(0.0, f64::max);
    ctx.check(
        "tail_reproduced",
        dev == 0.0,
        dev,
        "v_hat equals the known tail on [1 - epsilon, 1]",
    );
    Ok(Recovery {
        v_hat: rep.v_hat,
        error,
    })
}

fn reconstruct_run(ctx: &mut Ctx, p: &ReconstructParams) -> Result<()> {
    let truth = p.truth.build(p.truth_cells, &mut ctx.rng)?;
    let init = p.init.build(p.grid, &mut ctx.rng)?;
    let s = p.s.build()?;
    let (grid, dw, unknowns, reg) = (p.grid, p.derivative_weight, p.unknowns, p.reg);
    recover(
        ctx,
        &truth,
        &s,
        p.epsilon,
        p.tail_samples,
        |pr| {
            pr.grid = grid;
            pr.derivative_weight = dw;
            if let Some(u) = unknowns {
                pr.unknowns = u;
            }
            if reg.is_some() {
                pr.reg = reg;
            }
        },
        &init,
        p.iterations,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct WaveCoeffRow {
    k: usize,
    lambda: f64,
    a: f64,
}

fn wave(ctx: &mut Ctx, p: &WaveTraceParams) -> Result<()> {
    let v = p.potential.build(p.cells, &mut ctx.rng)?;
    let cfg = WaveConfig::new(v, p.f.sample(p.cells)?, p.t)
        .with_modes(p.k)
        .with_samples(p.samples);
    let ws = cfg.validate()?;
    ctx.warn_all("config", &ws);
    let modes = wave_modes(&cfg)?;
    let trace = wave_trace(&cfg)?;
    ctx.trace("trace.csv", &trace)?;
    ctx.csv(
        "coefficients.csv",
        modes
            .basis
            .lambdas()
            .into_iter()
            .zip(&modes.coeffs)
            .enumerate()
            .map(|(j, (lambda, &a))| WaveCoeffRow {
                k: j + 1,
                lambda,
                a,
            }),
    )?;
    ctx.metric("tail_estimate", modes.tail_estimate());
    ctx.metric("trace_sup", trace.sup());
    let e0 = modes.energy_at(0.0);
    let drift = (modes.energy_at(p.t) - e0).abs() / e0.max(f64::MIN_POSITIVE);
    ctx.metric("energy_drift", drift);
    ctx.check_le("energy_conserved", drift, 1e-10);
    if let Some(n) = p.oracle_cells {
        let oracle = fdtd_wave_oracle(&cfg, n, None)?;
        ctx.trace("oracle.csv", &oracle.trace)?;
        let d = trace_l2_distance(&trace, &oracle.trace)?;
        ctx.metric("oracle_l2_distance", d);
        ctx.metric("oracle_energy_drift", oracle.drift);
        ctx.check_le("oracle_agreement", d, p.oracle_tolerance);
    }
    Ok(())
}

fn complex_probe(re: &FunctionSpec, im: &FunctionSpec, cells: usize) -> Result<Vec<C64>> {
    Ok(re
        .sample(cells)?
        .into_iter()
        .zip(im.sample(cells)?)
        .map(|(a, b)| C64::new(a, b))
        .collect())
}

#[derive(Serialize)]
struct SchrodCoeffRow {
    k: usize,
    lambda: f64,
    alpha_re: f64,
    alpha_im: f64,
    beta_probe: f64,
    beta_source: f64,
}

fn schrod_rows(m: &SchrodingerModes) -> Vec<SchrodCoeffRow> {
    m.basis
        .lambdas()
        .into_iter()
        .enumerate()
        .map(|(j, lambda)| SchrodCoeffRow {
            k: j + 1,
            lambda,
            alpha_re: m.alpha[j].re,
            alpha_im: m.alpha[j].im,
            beta_probe: m.beta_probe[j],
            beta_source: m.beta_source[j],
        })
        .collect()
}

fn schrod(ctx: &mut Ctx, p: &SchrodTraceParams) -> Result<()> {
    let v = p.potential.build(p.cells, &mut ctx.rng)?;
    let f = complex_probe(&p.f, &p.f_im, p.cells)?;
    let cfg = SchrodingerConfig::new(v, f, p.source.sample(p.cells)?, p.delta, p.t)
        .with_modes(p.k)
        .with_samples(p.samples);
    let ws = cfg.validate()?;
    ctx.warn_all("config", &ws);
    let modes = schrodinger_modes(&cfg)?;
    let trace = schrodinger_trace(&cfg)?;
    ctx.trace("trace.csv", &trace)?;
    ctx.csv("coefficients.csv", schrod_rows(&modes))?;
    ctx.metric("tail_estimate", modes.tail_estimate());
    ctx.metric("trace_sup", trace.sup());
    // without a source the L^2 mass is constant once the probe switches off
    if p.t > p.delta && matches!(p.source, FunctionSpec::Zero) {
        let m0 = modes.mass_at(p.delta);
        let drift = (modes.mass_at(p.t) - m0).abs() / m0.max(f64::MIN_POSITIVE);
        ctx.metric("mass_drift_after_delta", drift);
        ctx.check_le("mass_conserved", drift, 1e-10);
    }
    if let Some(n) = p.oracle_cells {
        let oracle = crank_nicolson_oracle(&cfg, n, p.oracle_dt)?;
        ctx.trace("oracle.csv", &oracle.trace)?;
        let d = trace_l2_distance(&trace, &oracle.trace)?;
        ctx.metric("oracle_l2_distance", d);
        ctx.check_le("oracle_agreement", d, p.oracle_tolerance);
    }
    Ok(())
}

fn spectra(
    ctx: &mut Ctx,
    a: &crate::inputs::PotentialSpec,
    b: &crate::inputs::PotentialSpec,
    cells: usize,
    k: usize,
) -> Result<(Potential, Potential, Vec<f64>, Vec<f64>)> {
    let v1 = a.build(cells, &mut ctx.rng)?;
    let v2 = b.build(cells, &mut ctx.rng)?;
    let l1 = ModalBasis::new(&v1, k)?.lambdas();
    let l2 = ModalBasis::new(&v2, k)?.lambdas();
    Ok((v1, v2, l1, l2))
}

/// Records a window build, turning an infeasible moment problem into a failed check.
fn record_window(
    ctx: &mut Ctx,
    m: usize,
    w: slip::Result<WindowFunction>,
) -> Result<Option<WindowFunction>> {
    match w {
        Ok(w) => {
            let verified = w.verify(4);
            ctx.window(&format!("window_m{m}.csv"), &w)?;
            ctx.metric(format!("m{m}.max_residual"), w.max_residual);
            ctx.metric(format!("m{m}.verified_residual"), verified);
            ctx.metric(format!("m{m}.rank"), w.rank as f64);
            ctx.metric(format!("m{m}.norm_l2"), w.norm_l2());
            ctx.check_le(format!("m{m}.constraints"), verified, FEASIBILITY_TOL);
            Ok(Some(w))
        }
        Err(slip::Error::Infeasible(msg)) => {
            ctx.warn(format!("m = {m}: {msg}"));
            ctx.check(
                format!("m{m}.constraints"),
                false,
                f64::INFINITY,
                "moment problem feasible",
            );
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct CurveRow {
    horizon: f64,
    max_residual: f64,
}

fn windows(ctx: &mut Ctx, p: &WindowsParams) -> Result<()> {
    let (_, _, l1, l2) = spectra(ctx, &p.potential1, &p.potential2, p.cells, p.k)?;
    let ms = p.m.to_vec();
    let built: Vec<slip::Result<WindowFunction>> = ms
        .par_iter()
        .map(|&m| match p.family {
            Family::Cos => build_cos_window(&l1, &l2, m, p.t.unwrap_or(0.0), p.k),
            Family::Exp => build_exp_window(&l1, &l2, m, p.delta.unwrap_or(0.0), p.k),
        })
        .collect();
    for (&m, w) in ms.iter().zip(built) {
        if let Some(w) = record_window(ctx, m, w)? {
            if let Ok(set) = FrequencySet::new(w.frequencies.clone()) {
                let path = ctx.artifact(&format!("frequencies_m{m}.csv"));
                set.save(path)?;
            }
        }
    }
    if p.family == Family::Cos && !p.residual_curve.is_empty() {
        let curve = cos_window_residual_curve(&l1, &l2, ms[0], p.k, &p.residual_curve)?;
        ctx.csv(
            "residual_curve.csv",
            curve.into_iter().map(|(horizon, max_residual)| CurveRow {
                horizon,
                max_residual,
            }),
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct WitnessRow {
    sample: usize,
    witness: f64,
    max_residual: f64,
}

fn interp(ctx: &mut Ctx, p: &InterpParams) -> Result<()> {
    let v = p.potential.build(p.cells, &mut ctx.rng)?;
    let set = p.p.build()?;
    let li = LpInterpolator::new(&set, p.epsilon, &v, p.k)?;
    ctx.warn_all("interpolator", &li.warnings);
    ctx.metric("rank", li.rank() as f64);
    ctx.metric("condition", li.condition());
    ctx.metric("density_estimate", li.density_estimate);
    if let Some(c) = &p.c {
        let c = SequenceLP::new(c.clone(), set.clone())?;
        let f = li.apply(&c)?;
        let path = ctx.artifact("interpolant.csv");
        f.save(path)?;
        ctx.metric("max_residual", f.max_residual);
        ctx.metric("witness", f.witness);
        ctx.metric("norm_l2", f.norm_l2);
        ctx.check_le("constraints", f.max_residual, 1e-8);
    }
    if p.ensemble > 0 {
        let n = set.len();
        let cs: Vec<SequenceLP> = (0..p.ensemble)
            .map(|_| {
                let raw: Vec<f64> = (0..n).map(|_| ctx.rng.gen_range(-1.0..1.0)).collect();
                SequenceLP::new(raw, set.clone())?.normalized()
            })
            .collect::<slip::Result<_>>()?;
        let fs = cs
            .par_iter()
            .map(|c| li.apply(c))
            .collect::<slip::Result<Vec<_>>>()?;
        ctx.csv(
            "witness.csv",
            fs.iter().enumerate().map(|(sample, f)| WitnessRow {
                sample,
                witness: f.witness,
                max_residual: f.max_residual,
            }),
        )?;
        let (lo, hi) = fs.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), f| {
            (lo.min(f.witness), hi.max(f.witness))
        });
        let worst = fs.iter().map(|f| f.max_residual).fold(0.0, f64::max);
        ctx.metric("witness_min", lo);
        ctx.metric("witness_max", hi);
        ctx.metric("ensemble_max_residual", worst);
        ctx.check_le("ensemble_constraints", worst, 1e-8);
        ctx.check_le("witness_spread", hi / lo, 10.0);
    }
    Ok(())
}

/// Smooth bump of random position and sign supported in `[0, end)`.
fn perturbation(rng: &mut ChaCha8Rng, end: f64, amplitude: f64) -> impl Fn(f64) -> f64 {
    let lo = rng.gen_range(0.0..0.3) * end;
    let hi = lo + rng.gen_range(0.5..0.7) * (end - lo);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    move |x| {
        let s = (x - m) / r;
        if s.abs() >= 1.0 {
            0.0
        } else {
            sign * amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
        }
    }
}

fn theorem1(ctx: &mut Ctx, p: &Theorem1Params) -> Result<()> {
    let truth = p.truth.build(p.truth_cells, &mut ctx.rng)?;
    let end = 1.0 - p.epsilon;
    let bump = perturbation(&mut ctx.rng, end, p.perturbation);
    let h = 1.0 / truth.cells() as f64;
    let other = truth.map_samples(|i, y| y + bump(i as f64 * h))?;
    ctx.potential("alternative.csv", &other)?;
    let tail_gap = truth
        .samples()
        .iter()
        .zip(other.samples())
        .enumerate()
        .filter(|(i, _)| *i as f64 * h >= end)
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max);
    ctx.check(
        "alternative_shares_tail",
        tail_gap == 0.0,
        tail_gap,
        "V1 = V2 on [1 - epsilon, 1]",
    );
    let s = p.s.build()?;
    let before = data_agreement_certificate(&truth, &other, &s, p.certificate_tol)?;
    ctx.metric("before.worst_deviation", before.worst_deviation);
    ctx.metric("before.worst_index", before.worst_index as f64);
    ctx.check(
        "certificate_false_before",
        !before.agree,
        before.worst_deviation,
        "data of V1 and V2 disagree on S",
    );
    let init = Potential::zero(p.grid)?;
    let (grid, dw) = (p.grid, p.derivative_weight);
    let rec = recover(
        ctx,
        &truth,
        &s,
        p.epsilon,
        p.tail_samples,
        |pr| {
            pr.grid = grid;
            pr.derivative_weight = dw;
        },
        &init,
        p.iterations,
    )?;
    ctx.check_le("recovery_error", rec.error, 0.05);
    let after = data_agreement_certificate(&truth, &rec.v_hat, &s, p.certificate_tol)?;
    ctx.metric("after.worst_deviation", after.worst_deviation);
    Ok(())
}

#[derive(Serialize)]
struct ExtractionRow {
    m: usize,
    got_re: f64,
    got_im: f64,
    want_re: f64,
    want_im: f64,
    error: f64,
}

fn extraction(ctx: &mut Ctx, rows: Vec<ExtractionRow>, tol: f64) -> Result<()> {
    for r in &rows {
        ctx.check_le(format!("m{}.extraction", r.m), r.error, tol);
    }
    ctx.csv("extraction.csv", rows)
}

fn theorem2(ctx: &mut Ctx, p: &Theorem2Params) -> Result<()> {
    let v1 = p.potential1.build(p.cells, &mut ctx.rng)?;
    let v2 = p.potential2.build(p.cells, &mut ctx.rng)?;
    let f = p.f.sample(p.cells)?;
    let cfg = |v: &Potential| {
        WaveConfig::new(v.clone(), f.clone(), p.t)
            .with_modes(p.k)
            .with_samples(p.samples)
    };
    let (c1, c2) = (cfg(&v1), cfg(&v2));
    ctx.warn_all("config", &c1.validate()?);
    c2.validate()?;
    let (m1, m2) = (wave_modes(&c1)?, wave_modes(&c2)?);
    let (t1, t2) = (wave_trace(&c1)?, wave_trace(&c2)?);
    ctx.trace("trace1.csv", &t1)?;
    ctx.trace("trace2.csv", &t2)?;
    let gap = rel_l2(&v1, &v2);
    let dist = trace_l2_distance(&t1, &t2)?;
    ctx.metric("potential_rel_l2", gap);
    ctx.metric("trace_l2_distance", dist);
    if gap > 0.0 {
        ctx.check(
            "traces_differ",
            dist > 0.0,
            dist,
            "distinct potentials give distinct traces",
        );
    }
    let (l1, l2) = (m1.basis.lambdas(), m2.basis.lambdas());
    let d = t1.difference(&t2)?;
    let mut rows = Vec::new();
    for m in p.m.to_vec() {
        let w = build_cos_window(&l1, &l2, m, p.t, p.k);
        let Some(w) = record_window(ctx, m, w)? else {
            continue;
        };
        let got = w.pair(&d.t, &d.left)?;
        let want = m1.coeffs[m - 1];
        rows.push(ExtractionRow {
            m,
            got_re: got.re,
            got_im: got.im,
            want_re: want,
            want_im: 0.0,
            error: (got - want).norm(),
        });
    }
    extraction(ctx, rows, p.tolerance)
}

#[derive(Serialize)]
struct ProfileRow {
    radius: f64,
    density: f64,
}

#[derive(Serialize)]
struct IndexRow {
    k: usize,
}

fn theorem4(ctx: &mut Ctx, p: &Theorem4Params) -> Result<()> {
    let v1 = p.potential.build(p.cells, &mut ctx.rng)?;
    let v2 = p.potential2.build(p.cells, &mut ctx.rng)?;
    let f = complex_probe(&p.f, &p.f_im, p.cells)?;
    let src = p.source.sample(p.cells)?;
    let cfg = |v: &Potential| {
        SchrodingerConfig::new(v.clone(), f.clone(), src.clone(), p.delta, p.delta)
            .with_modes(p.k)
            .with_samples(p.samples)
    };
    let (c1, c2) = (cfg(&v1), cfg(&v2));
    ctx.warn_all("config", &c1.validate()?);
    c2.validate()?;

    let n = p.exceptional_cells;
    let ve = v1.resampled(n)?;
    if !matches!(p.f_im, FunctionSpec::Zero) {
        ctx.warn("exceptional set uses the real part of f");
    }
    let set = exceptional_set_p(
        &ve,
        &p.f.sample(n)?,
        &p.source.sample(n)?,
        p.delta,
        p.exceptional_k,
        MembershipRule::default(),
    )?;
    ctx.csv(
        "exceptional.csv",
        set.set.indices().iter().map(|&k| IndexRow { k }),
    )?;
    ctx.csv(
        "exceptional_profile.csv",
        set.profile
            .iter()
            .map(|&(radius, density)| ProfileRow { radius, density }),
    )?;
    let worst = set.profile.iter().map(|r| r.1).fold(0.0, f64::max);
    ctx.metric("exceptional.density", set.density());
    ctx.metric("exceptional.worst_density", worst);
    ctx.metric("exceptional.count", set.set.len() as f64);
    ctx.check_le("exceptional_density", worst, p.delta / 2.0 + 0.05);

    let (m1, m2) = (schrodinger_modes(&c1)?, schrodinger_modes(&c2)?);
    let (t1, t2) = (schrodinger_trace(&c1)?, schrodinger_trace(&c2)?);
    ctx.trace("trace1.csv", &t1)?;
    ctx.trace("trace2.csv", &t2)?;
    ctx.csv("coefficients.csv", schrod_rows(&m1))?;
    let (l1, l2) = (m1.basis.lambdas(), m2.basis.lambdas());
    let d = t1.difference(&t2)?;
    let ms =
        p.m.as_ref()
            .map(|m| m.to_vec())
            .unwrap_or_else(|| (1..=p.k.min(4)).collect());
    let mut rows = Vec::new();
    for m in ms {
        let w = build_exp_window(&l1, &l2, m, p.delta, p.k);
        let Some(w) = record_window(ctx, m, w)? else {
            continue;
        };
        let got = w.pair(&d.t, &d.left)?;
        let j = m - 1;
        let want = m1.alpha[j] - (m1.beta_probe[j] + m1.beta_source[j]) / l1[j];
        rows.push(ExtractionRow {
            m,
            got_re: got.re,
            got_im: got.im,
            want_re: want.re,
            want_im: want.im,
            error: (got - want).norm(),
        });
    }
    extraction(ctx, rows, p.tolerance)?;

    let n = p.gauge_cells;
    let g = p.gauge.sample(n)?;
    let base = SchrodingerConfig::new(
        v1.resampled(n)?,
        complex_probe(&p.f, &p.f_im, n)?,
        p.source.sample(n)?,
        p.delta,
        2.0 * p.delta,
    )
    .with_modes(DEFAULT_MODES)
    .with_samples(801);
    let gauge = gauge_pair_check(&base, &g)?;
    ctx.metric("gauge.variation", gauge.variation);
    ctx.metric("gauge.left_offset", gauge.left_offset.norm());
    ctx.metric("gauge.right_offset", gauge.right_offset.norm());
    ctx.check_le("gauge_variation", gauge.variation, 1e-6);
    Ok(())
}
