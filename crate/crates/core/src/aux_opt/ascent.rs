use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aux_opt::{oracle, aux_alphabet, AuxSolution, Family, Method, OptimizerConfig, REPAIR_SWEEPS};
use crate::error::{Error, Result};
use crate::prob::{Alphabet, JointDist};
use crate::settings::var::BASE;
use crate::settings::{CoordinationProblem, SettingId};

const STAGES: usize = 4;
const POLISH_ROUNDS: usize = 60;
const ARMIJO: f64 = 1e-4;

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &mut [f64]) {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

struct Counter(u64);

/// One projected-gradient update of factor `f` with backtracking. Returns
/// the accepted gain.
fn step_factor(fam: &mut Family, f: usize, lambda: f64, step: &mut f64, evals: &mut Counter) -> f64 {
    let mass = fam.mass();
    let f0 = fam.penalized(&mass, lambda);
    evals.0 += 1;
    let grad = fam.factor_gradient(&fam.cell_gradient(&mass, lambda), f);
    let old = fam.factors[f].probs.clone();
    let (rows, cols) = (fam.factors[f].rows, fam.factors[f].cols);
    for _ in 0..40 {
        let mut cand = old.clone();
        for r in 0..rows {
            let row = &mut cand[r * cols..(r + 1) * cols];
            for (c, x) in row.iter_mut().enumerate() {
                *x += *step * grad[r * cols + c];
            }
            project_simplex(row);
        }
        let dir: f64 = cand.iter().zip(&old).zip(&grad).map(|((n, o), g)| (n - o) * g).sum();
        if dir <= 0.0 {
            break;
        }
        fam.factors[f].probs.clone_from(&cand);
        let f1 = fam.penalized(&fam.mass(), lambda);
        evals.0 += 1;
        if f1 >= f0 + ARMIJO * dir {
            *step = (*step * 2.0).min(1e6);
            return f1 - f0;
        }
        *step *= 0.5;
    }
    fam.factors[f].probs = old;
    *step = (*step * 0.5).max(1e-12);
    0.0
}

fn ascend(fam: &mut Family, cfg: &OptimizerConfig, evals: &mut Counter) {
    let free: Vec<usize> = fam.free_factors().collect();
    let mut steps = vec![1.0; fam.factors.len()];
    let per_stage = (cfg.max_iterations / STAGES).max(1);
    for stage in 0..STAGES {
        let lambda = cfg.penalty_weight * 10f64.powi(stage as i32);
        let mut quiet = 0;
        for _ in 0..per_stage {
            let mut gain = 0.0;
            for &f in &free {
                gain += step_factor(fam, f, lambda, &mut steps[f], evals);
            }
            quiet = if gain < 1e-13 { quiet + 1 } else { 0 };
            if quiet >= 3 {
                break;
            }
        }
    }
}

/// Gradient steps on the objective, each retracted onto the family by
/// repair; a step is kept only when it improves a feasible point.
fn polish(fam: &mut Family, cfg: &OptimizerConfig, tol: f64, evals: &mut Counter) {
    let free: Vec<usize> = fam.free_factors().collect();
    let mut steps = vec![0.05; fam.factors.len()];
    let mut best = fam.objective(&fam.mass());
    let lambda = cfg.penalty_weight * 10f64.powi(STAGES as i32 - 1);
    for _ in 0..POLISH_ROUNDS {
        let mut moved = false;
        for &f in &free {
            if steps[f] < 1e-9 {
                continue;
            }
            let mut cand = fam.clone();
            let mut s = steps[f];
            step_factor(&mut cand, f, lambda, &mut s, evals);
            if cand.repair(tol, 2_000).is_err() {
                steps[f] *= 0.25;
                continue;
            }
            let v = cand.objective(&cand.mass());
            evals.0 += 1;
            if v > best + 1e-15 {
                best = v;
                *fam = cand;
                steps[f] *= 2.0;
                moved = true;
            } else {
                steps[f] *= 0.25;
            }
        }
        if !moved && free.iter().all(|&f| steps[f] < 1e-9) {
            break;
        }
    }
}

fn randomize(fam: &mut Family, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for fac in fam.factors.iter_mut().filter(|f| f.free) {
        for r in 0..fac.rows {
            let row = fac.row_mut(r);
            for x in row.iter_mut() {
                *x = -(1.0 - rng.random::<f64>()).ln();
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
    }
}

/// Deterministic embeddings of the auxiliary variable that are admissible
/// for many targets: a constant, copies of single base variables, and the
/// pair `(U, X)`.
fn witnesses(target: &JointDist<f64>, aux: &Alphabet) -> Vec<JointDist<f64>> {
    let k = aux.len();
    let dims = target.dims();
    let mut maps: Vec<Box<dyn Fn(&[usize]) -> usize>> = vec![Box::new(|_| 0)];
    for p in 0..BASE.len() {
        if dims[p] <= k {
            maps.push(Box::new(move |i: &[usize]| i[p]));
        }
    }
    let (pu, px) = (0, 1);
    if dims[pu] * dims[px] <= k {
        let nx = dims[px];
        maps.push(Box::new(move |i: &[usize]| i[pu] * nx + i[px]));
    }
    maps.into_iter()
        .filter_map(|f| target.with_function(aux.clone(), f).ok())
        .collect()
}

/// Compass refinement when the instance is small enough; keeps `fam` when
/// that does not improve it.
fn sharpen(setting: SettingId, target: &JointDist<f64>, fam: Family, tol: f64, evals: &mut Counter) -> Family {
    match oracle::refine(setting, target, &fam, tol) {
        Some((r, n)) => {
            evals.0 += n;
            if r.objective(&r.mass()) > fam.objective(&fam.mass()) {
                r
            } else {
                fam
            }
        }
        None => fam,
    }
}

fn better(a: &AuxSolution, b: &AuxSolution) -> bool {
    match a.value.partial_cmp(&b.value) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => match a.feasibility_residual.partial_cmp(&b.feasibility_residual) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) => false,
            _ => a
                .extended
                .mass()
                .iter()
                .zip(b.extended.mass())
                .find(|(x, y)| x != y)
                .is_some_and(|(x, y)| x < y),
        },
    }
}

/// Multistart penalized ascent over the setting's free kernels, followed by
/// repair and a feasible polish, merged with deterministic witnesses and, on
/// small instances, the best points of a coarse grid. Small instances also
/// get a compass refinement of every candidate. Identical inputs give
/// bit-identical results.
pub fn maximize(setting: SettingId, problem: &CoordinationProblem, cfg: &OptimizerConfig) -> Result<AuxSolution> {
    cfg.check()?;
    if setting.auxiliary().is_none() {
        return Err(Error::NoAuxiliary(setting));
    }
    let target = problem.target()?;
    let aux = aux_alphabet(setting, cfg.cardinality_for(problem))?;
    let base = Family::new(setting, &target, aux.clone())?;
    let repair_tol = cfg.feasibility_tol * 1e-2;
    let refine_tol = cfg.feasibility_tol * 0.1;

    let runs: Vec<(Option<AuxSolution>, u64)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut fam = base.clone();
            if r > 0 {
                randomize(&mut fam, cfg.seed.wrapping_add(r as u64));
            }
            let mut evals = Counter(0);
            ascend(&mut fam, cfg, &mut evals);
            if fam.repair(repair_tol, REPAIR_SWEEPS).is_err() {
                return (None, evals.0);
            }
            polish(&mut fam, cfg, repair_tol, &mut evals);
            let fam = sharpen(setting, &target, fam, refine_tol, &mut evals);
            let sol = AuxSolution::from_family(&fam, &target, Method::Multistart, 0, None, cfg.feasibility_tol).ok();
            (sol, evals.0)
        })
        .collect();

    let mut evaluations: u64 = runs.iter().map(|r| r.1).sum();
    let mut candidates: Vec<AuxSolution> = runs.into_iter().filter_map(|r| r.0).collect();
    for w in witnesses(&target, &aux) {
        let mut fam = base.clone();
        if fam.fit_joint(&w).is_err() || fam.repair(repair_tol, 2_000).is_err() {
            continue;
        }
        let mut evals = Counter(1);
        let fam = sharpen(setting, &target, fam, refine_tol, &mut evals);
        evaluations += evals.0;
        if let Ok(sol) = AuxSolution::from_family(&fam, &target, Method::Multistart, 0, None, cfg.feasibility_tol) {
            candidates.push(sol);
        }
    }
    let seeded: Vec<(Option<AuxSolution>, u64)> = oracle::grid_seeds(setting, &target, aux.len(), refine_tol)
        .into_par_iter()
        .map(|fam| {
            let mut evals = Counter(0);
            let fam = sharpen(setting, &target, fam, refine_tol, &mut evals);
            let sol = AuxSolution::from_family(&fam, &target, Method::Multistart, 0, None, cfg.feasibility_tol).ok();
            (sol, evals.0)
        })
        .collect();
    evaluations += seeded.iter().map(|r| r.1).sum::<u64>();
    candidates.extend(seeded.into_iter().filter_map(|r| r.0));

    let mut best: Option<AuxSolution> = None;
    let mut best_residual = f64::INFINITY;
    for c in candidates {
        best_residual = best_residual.min(c.feasibility_residual);
        if c.feasibility_residual > cfg.feasibility_tol {
            continue;
        }
        if best.as_ref().is_none_or(|b| better(&c, b)) {
            best = Some(c);
        }
    }
    let mut sol = best.ok_or(Error::Infeasible { best_residual })?;
    sol.evaluations = evaluations;
    Ok(sol)
}
