use nalgebra::{DMatrix, DVector};

use super::{
    forward_data, jacobian_along, IndexSet, Parametrization, ReconstructionProblem,
    ReconstructionReport,
};
use crate::error::{invalid, Error, Result};
use crate::sl::SpectralDatum;
use crate::Potential;

const ARMIJO_SLOPE: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 30;
const STOP_REL_DROP: f64 = 1e-10;
const PLATEAU_REL_DROP: f64 = 0.1;
const REG_FLOOR: f64 = 1e-12;
const RANK_REL: f64 = 1e-12;
const DEFAULT_REG_FACTOR: f64 = 1e-6;

struct Model {
    param: Parametrization,
    s: IndexSet,
    targets: Vec<(SpectralDatum, f64)>,
    deriv_weight: f64,
    k_max: usize,
}

impl Model {
    fn row_weights(&self) -> Vec<f64> {
        let n = self.targets.len();
        let mut w = Vec::with_capacity(2 * n);
        w.extend(self.targets.iter().map(|(_, wk)| *wk));
        w.extend(
            self.targets
                .iter()
                .map(|(d, wk)| wk * self.deriv_weight * d.index as f64),
        );
        w
    }

    fn residual(&self, theta: &[f64]) -> Result<(Potential, DVector<f64>)> {
        let v = self.param.potential(theta)?;
        let got = forward_data(&v, &self.s, self.k_max)?;
        let w = self.row_weights();
        let n = self.targets.len();
        let mut r = DVector::zeros(2 * n);
        for (i, ((t, _), g)) in self.targets.iter().zip(&got).enumerate() {
            r[i] = w[i] * (g.lambda - t.lambda);
            r[n + i] = w[n + i] * (g.dphi_at_1 - t.dphi_at_1);
        }
        Ok((v, r))
    }

    fn penalty(&self, theta: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.param.second_difference(theta))
    }
}

fn objective(r: &DVector<f64>, p: &DVector<f64>, reg: f64) -> f64 {
    r.norm_squared() + reg * p.norm_squared()
}

/// Tikhonov-regularized Gauss–Newton fit of the coarse unknowns with Armijo
/// backtracking. The returned potential equals the tail on `[1 - eps, 1]`.
pub fn reconstruct(
    problem: &ReconstructionProblem,
    init: &Potential,
    max_iter: usize,
) -> Result<ReconstructionReport> {
    problem.validate()?;
    let param = problem.parametrization()?;
    let tail = problem.tail()?;
    let tol = 1e-8 * (1.0 + init.sup_bound());
    for (i, &val) in init.samples().iter().enumerate() {
        let x = init.node(i);
        if x >= tail.start() && (val - tail.eval(x)).abs() > tol {
            return invalid(format!(
                "initial guess departs from the known tail at x = {x}"
            ));
        }
    }
    let s = problem.index_set()?;
    let model = Model {
        k_max: s.max().unwrap(),
        s,
        targets: problem.sorted(),
        deriv_weight: problem.derivative_weight,
        param,
    };
    let basis = model.param.basis();
    let d2 = model.param.second_difference_matrix();
    let m = model.param.unknowns;
    let data_scale = model
        .targets
        .iter()
        .zip(model.row_weights())
        .map(|((t, _), w)| (w * t.lambda).powi(2))
        .sum::<f64>()
        .sqrt()
        + model
            .targets
            .iter()
            .zip(model.row_weights().into_iter().skip(model.targets.len()))
            .map(|((t, _), w)| (w * t.dphi_at_1).powi(2))
            .sum::<f64>()
            .sqrt();

    let mut theta = model.param.project(init);
    let (mut v, mut r) = model.residual(&theta)?;
    let mut reg = problem.reg.unwrap_or(DEFAULT_REG_FACTOR * r.norm_squared());
    let mut pen = model.penalty(&theta);
    let mut phi = objective(&r, &pen, reg);
    let mut history = vec![phi];
    let mut iterations = 0;
    let mut stagnated = false;
    let row_w = model.row_weights();

    while iterations < max_iter && r.norm() > 1e-10 * data_scale && phi > 0.0 {
        let mut jac = jacobian_along(&v, &model.s, model.k_max, &basis)?;
        for (i, w) in row_w.iter().enumerate() {
            jac.row_mut(i).scale_mut(*w);
        }
        let nr = jac.nrows();
        let sq = reg.sqrt();
        let mut a = DMatrix::zeros(nr + d2.nrows(), m);
        a.view_mut((0, 0), (nr, m)).copy_from(&jac);
        a.view_mut((nr, 0), (d2.nrows(), m)).copy_from(&(&d2 * sq));
        let mut b = DVector::zeros(nr + d2.nrows());
        b.rows_mut(0, nr).copy_from(&(-&r));
        b.rows_mut(nr, d2.nrows()).copy_from(&(-&pen * sq));
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&x| x > RANK_REL * smax)
            .count();
        if rank < m {
            return Err(Error::RankCollapse { rank, unknowns: m });
        }
        let delta = svd
            .solve(&b, RANK_REL * smax)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let slope = 2.0 * (r.dot(&(&jac * &delta)) + reg * pen.dot(&(&d2 * &delta)));
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = theta
                .iter()
                .zip(delta.iter())
                .map(|(t, d)| t + alpha * d)
                .collect();
            if let Ok((tv, tr)) = model.residual(&trial) {
                let tp = model.penalty(&trial);
                let tphi = objective(&tr, &tp, reg);
                if tphi <= phi + ARMIJO_SLOPE * alpha * slope {
                    accepted = Some((trial, tv, tr, tp, tphi));
                    break;
                }
            }
            alpha *= BACKTRACK;
        }
        let Some((nt, nv, nr_, np, nphi)) = accepted else {
            stagnated = true;
            break;
        };
        let drop = (phi - nphi) / phi;
        let data_drop = (r.norm() - nr_.norm()).abs() / r.norm().max(f64::MIN_POSITIVE);
        theta = nt;
        v = nv;
        r = nr_;
        pen = np;
        phi = nphi;
        iterations += 1;
        if drop < PLATEAU_REL_DROP && reg > REG_FLOOR {
            reg = (reg * 0.5).max(REG_FLOOR);
            phi = objective(&r, &pen, reg);
        }
        history.push(phi);
        if drop < STOP_REL_DROP || data_drop < STOP_REL_DROP {
            break;
        }
    }
    Ok(ReconstructionReport {
        data_misfit: r.norm_squared(),
        regularity_penalty: pen.norm_squared(),
        v_hat: v,
        residual_history: history,
        iterations,
        final_reg: reg,
        stagnated,
    })
}
