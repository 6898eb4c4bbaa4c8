//! Exhaustive simplex-grid search for small instances.
//!
//! Only the kernels that shape the auxiliary variable are enumerated. The
//! remaining free kernel is pinned down by the marginal constraint, which is
//! linear in it, and is recovered with a least-squares solve; grid points
//! whose solve is inconsistent or negative are infeasible and skipped. When
//! that linear system is underdetermined the minimum-norm solution is taken,
//! so the result stays a lower bound on the maximum.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::aux_opt::{aux_alphabet, AuxSolution, Family, Method};
use crate::error::{Error, Result};
use crate::prob::{JointDist, Kernel};
use crate::settings::var::{U, V, X, Y};
use crate::settings::{CoordinationProblem, SettingId};

/// Largest number of enumerated simplex coordinates.
pub const ORACLE_MAX_PARAMS: usize = 12;
/// Largest number of grid points visited.
pub const ORACLE_MAX_POINTS: u128 = 200_000_000;

const FEASIBLE: f64 = 1e-9;
const CHUNKS: usize = 1024;

/// All probability vectors of length `k` with entries in `{0, 1/g, ..., 1}`,
/// in lexicographic order of the numerators.
pub(crate) fn compositions(g: usize, k: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for i in 0..=left {
            cur.push(i);
            rec(left - i, k - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(g, k, &mut Vec::with_capacity(k), &mut out);
    out.into_iter()
        .map(|v| v.into_iter().map(|n| n as f64 / g as f64).collect())
        .collect()
}

/// Row-stochastic `R` (rows `k`, columns `nv`) with `sum_w a[j][w] R[w] = b[j]`
/// for every equation `j`.
fn fit_stochastic(a: &[Vec<f64>], b: &[&[f64]], k: usize, nv: usize, tol: f64) -> Option<Vec<f64>> {
    let neq = a.len() * nv + k;
    let mut m = DMatrix::<f64>::zeros(neq, k * nv);
    let mut rhs = DVector::<f64>::zeros(neq);
    for (j, (aj, bj)) in a.iter().zip(b).enumerate() {
        for v in 0..nv {
            for w in 0..k {
                m[(j * nv + v, w * nv + v)] = aj[w];
            }
            rhs[j * nv + v] = bj[v];
        }
    }
    for w in 0..k {
        for v in 0..nv {
            m[(a.len() * nv + w, w * nv + v)] = 1.0;
        }
        rhs[a.len() * nv + w] = 1.0;
    }
    let x = m.clone().svd(true, true).solve(&rhs, 1e-12).ok()?;
    if (&m * &x - &rhs).amax() > tol || x.min() < -tol {
        return None;
    }
    let mut out: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    for w in 0..k {
        let row = &mut out[w * nv..(w + 1) * nv];
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= s);
    }
    Some(out)
}

/// Target conditionals shared by every grid point.
struct Ctx {
    tol: f64,
    nu: usize,
    nx: usize,
    ny: usize,
    nv: usize,
    k: usize,
    pu: Vec<f64>,
    x_given_u: Kernel,
    channel: Kernel,
    v_given_uxy: Kernel,
    /// Target mass of `(u, x, v)`.
    uxv: Vec<f64>,
}

impl Ctx {
    fn new(target: &JointDist<f64>, k: usize, tol: f64) -> Result<Self> {
        let d = target.dims();
        Ok(Self {
            tol,
            nu: d[0],
            nx: d[1],
            ny: d[2],
            nv: d[3],
            k,
            pu: target.marginalize(&[U])?.mass().to_vec(),
            x_given_u: target.conditional(&[X], &[U])?,
            channel: target.conditional(&[Y], &[X])?,
            v_given_uxy: target.conditional(&[V], &[U, X, Y])?,
            uxv: target.marginalize(&[U, X, V])?.mass().to_vec(),
        })
    }

    fn qx(&self, u: usize, x: usize) -> f64 {
        self.x_given_u.row(u)[x]
    }

    fn t(&self, x: usize, y: usize) -> f64 {
        self.channel.row(x)[y]
    }

    fn qv(&self, u: usize, x: usize, y: usize) -> &[f64] {
        self.v_given_uxy.row((u * self.nx + x) * self.ny + y)
    }

    fn px(&self, x: usize) -> f64 {
        (0..self.nu).map(|u| self.pu[u] * self.qx(u, x)).sum()
    }
}

/// Which simplex rows are enumerated and how a grid point becomes a full
/// family member.
trait Plan: Sync {
    fn row_sizes(&self) -> Vec<usize>;
    /// Writes the enumerated rows; false when the point is infeasible.
    fn outer(&self, fam: &mut Family, rows: &[&[f64]]) -> bool;
    /// Solves the remaining kernel; false when no stochastic solution exists.
    fn inner(&self, fam: &mut Family) -> bool;
    /// The objective does not depend on the inner kernel.
    fn prunable(&self) -> bool;
    /// The enumerated rows of a family member, inverse of [`Plan::outer`].
    fn read_outer(&self, fam: &Family) -> Vec<Vec<f64>>;
    fn tol(&self) -> f64;
}

/// `Q(w)`, `Q(x|u,w)` for all but the last `w` (whose row follows from
/// `Q(x|u)`), then `Q(v|u,y,w)` per `(u, y)`.
struct CausalEnc(Ctx);

impl Plan for CausalEnc {
    fn row_sizes(&self) -> Vec<usize> {
        let c = &self.0;
        let active = c.pu.iter().filter(|&&p| p > 0.0).count();
        let mut s = vec![c.k];
        s.extend(std::iter::repeat_n(c.nx, active * (c.k - 1)));
        s
    }

    fn outer(&self, fam: &mut Family, rows: &[&[f64]]) -> bool {
        let c = &self.0;
        fam.factors[1].probs.copy_from_slice(rows[0]);
        let qw = rows[0].to_vec();
        let last = c.k - 1;
        let mut next = 1;
        for u in (0..c.nu).filter(|&u| c.pu[u] > 0.0) {
            for w in 0..last {
                fam.factors[2].row_mut(u * c.k + w).copy_from_slice(rows[next]);
                next += 1;
            }
            let mut solved = vec![0.0; c.nx];
            for (x, s) in solved.iter_mut().enumerate() {
                let used: f64 = (0..last).map(|w| qw[w] * fam.factors[2].row(u * c.k + w)[x]).sum();
                *s = c.qx(u, x) - used;
            }
            if qw[last] > 0.0 {
                for s in solved.iter_mut() {
                    *s /= qw[last];
                    if *s < -c.tol {
                        return false;
                    }
                    *s = s.max(0.0);
                }
                let tot: f64 = solved.iter().sum();
                solved.iter_mut().for_each(|s| *s /= tot);
            } else {
                if solved.iter().any(|s| s.abs() > c.tol) {
                    return false;
                }
                solved = vec![1.0 / c.nx as f64; c.nx];
            }
            fam.factors[2].row_mut(u * c.k + last).copy_from_slice(&solved);
        }
        true
    }

    fn inner(&self, fam: &mut Family) -> bool {
        let c = &self.0;
        let qw = fam.factors[1].probs.clone();
        for u in (0..c.nu).filter(|&u| c.pu[u] > 0.0) {
            for y in 0..c.ny {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for x in 0..c.nx {
                    let m = c.qx(u, x);
                    if m * c.t(x, y) <= 0.0 {
                        continue;
                    }
                    a.push((0..c.k).map(|w| qw[w] * fam.factors[2].row(u * c.k + w)[x] / m).collect());
                    b.push(c.qv(u, x, y));
                }
                let Some(r) = fit_stochastic(&a, &b, c.k, c.nv, c.tol) else {
                    return false;
                };
                for w in 0..c.k {
                    fam.factors[4]
                        .row_mut((u * c.ny + y) * c.k + w)
                        .copy_from_slice(&r[w * c.nv..(w + 1) * c.nv]);
                }
            }
        }
        true
    }

    fn prunable(&self) -> bool {
        false
    }

    fn read_outer(&self, fam: &Family) -> Vec<Vec<f64>> {
        let c = &self.0;
        let mut rows = vec![fam.factors[1].probs.clone()];
        for u in (0..c.nu).filter(|&u| c.pu[u] > 0.0) {
            for w in 0..c.k - 1 {
                rows.push(fam.factors[2].row(u * c.k + w).to_vec());
            }
        }
        rows
    }

    fn tol(&self) -> f64 {
        self.0.tol
    }
}

fn active_ux(c: &Ctx) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..c.nu {
        for x in 0..c.nx {
            if c.pu[u] * c.qx(u, x) > 0.0 {
                out.push((u, x));
            }
        }
    }
    out
}

/// `Q(w2|u,x)`, then `Q(v|y,x,w2)` per `(x, y)`.
struct ScEncNofb(Ctx);

impl Plan for ScEncNofb {
    fn row_sizes(&self) -> Vec<usize> {
        vec![self.0.k; active_ux(&self.0).len()]
    }

    fn outer(&self, fam: &mut Family, rows: &[&[f64]]) -> bool {
        let c = &self.0;
        for ((u, x), row) in active_ux(c).into_iter().zip(rows) {
            fam.factors[2].row_mut(u * c.nx + x).copy_from_slice(row);
        }
        true
    }

    fn inner(&self, fam: &mut Family) -> bool {
        let c = &self.0;
        for x in (0..c.nx).filter(|&x| c.px(x) > 0.0) {
            for y in (0..c.ny).filter(|&y| c.t(x, y) > 0.0) {
                let us: Vec<usize> = (0..c.nu).filter(|&u| c.pu[u] > 0.0).collect();
                let a: Vec<Vec<f64>> = us.iter().map(|&u| fam.factors[2].row(u * c.nx + x).to_vec()).collect();
                let b: Vec<&[f64]> = us.iter().map(|&u| c.qv(u, x, y)).collect();
                let Some(r) = fit_stochastic(&a, &b, c.k, c.nv, c.tol) else {
                    return false;
                };
                for w in 0..c.k {
                    fam.factors[4]
                        .row_mut((y * c.nx + x) * c.k + w)
                        .copy_from_slice(&r[w * c.nv..(w + 1) * c.nv]);
                }
            }
        }
        true
    }

    fn prunable(&self) -> bool {
        true
    }

    fn read_outer(&self, fam: &Family) -> Vec<Vec<f64>> {
        let c = &self.0;
        active_ux(c).into_iter().map(|(u, x)| fam.factors[2].row(u * c.nx + x).to_vec()).collect()
    }

    fn tol(&self) -> f64 {
        self.0.tol
    }
}

/// `Q(w1|u,x,v)` on rows with target mass; nothing else is free.
struct ScDecNofb(Ctx);

impl ScDecNofb {
    fn active(&self) -> Vec<usize> {
        (0..self.0.uxv.len()).filter(|&r| self.0.uxv[r] > 0.0).collect()
    }
}

impl Plan for ScDecNofb {
    fn row_sizes(&self) -> Vec<usize> {
        vec![self.0.k; self.active().len()]
    }

    fn outer(&self, fam: &mut Family, rows: &[&[f64]]) -> bool {
        for (r, row) in self.active().into_iter().zip(rows) {
            fam.factors[2].row_mut(r).copy_from_slice(row);
        }
        true
    }

    fn inner(&self, _: &mut Family) -> bool {
        true
    }

    fn prunable(&self) -> bool {
        true
    }

    fn read_outer(&self, fam: &Family) -> Vec<Vec<f64>> {
        self.active().into_iter().map(|r| fam.factors[2].row(r).to_vec()).collect()
    }

    fn tol(&self) -> f64 {
        self.0.tol
    }
}

/// `Q(w3|u,x)` (with `Q(x|u)` taken from the target), then `Q(v|y,w3)`
/// per `y`.
struct CausalDec(Ctx);

impl Plan for CausalDec {
    fn row_sizes(&self) -> Vec<usize> {
        vec![self.0.k; active_ux(&self.0).len()]
    }

    fn outer(&self, fam: &mut Family, rows: &[&[f64]]) -> bool {
        let c = &self.0;
        let f = &mut fam.factors[1];
        f.probs.iter_mut().for_each(|p| *p = 0.0);
        for u in 0..c.nu {
            for x in 0..c.nx {
                for w in 0..c.k {
                    f.row_mut(u)[x * c.k + w] = if c.pu[u] > 0.0 {
                        c.qx(u, x) / c.k as f64
                    } else {
                        1.0 / (c.nx * c.k) as f64
                    };
                }
            }
        }
        for ((u, x), row) in active_ux(c).into_iter().zip(rows) {
            for w in 0..c.k {
                f.row_mut(u)[x * c.k + w] = c.qx(u, x) * row[w];
            }
        }
        true
    }

    fn inner(&self, fam: &mut Family) -> bool {
        let c = &self.0;
        let act = active_ux(c);
        for y in 0..c.ny {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for &(u, x) in act.iter().filter(|&&(_, x)| c.t(x, y) > 0.0) {
                let joint = &fam.factors[1].row(u)[x * c.k..(x + 1) * c.k];
                let m = c.qx(u, x);
                a.push(joint.iter().map(|p| p / m).collect());
                b.push(c.qv(u, x, y));
            }
            if a.is_empty() {
                continue;
            }
            let Some(r) = fit_stochastic(&a, &b, c.k, c.nv, c.tol) else {
                return false;
            };
            for w in 0..c.k {
                fam.factors[3]
                    .row_mut(y * c.k + w)
                    .copy_from_slice(&r[w * c.nv..(w + 1) * c.nv]);
            }
        }
        true
    }

    fn prunable(&self) -> bool {
        true
    }

    fn read_outer(&self, fam: &Family) -> Vec<Vec<f64>> {
        let c = &self.0;
        active_ux(c)
            .into_iter()
            .map(|(u, x)| {
                let joint = &fam.factors[1].row(u)[x * c.k..(x + 1) * c.k];
                let s: f64 = joint.iter().sum();
                joint.iter().map(|p| p / s).collect()
            })
            .collect()
    }

    fn tol(&self) -> f64 {
        self.0.tol
    }
}

fn plan(setting: SettingId, ctx: Ctx) -> Result<Box<dyn Plan>> {
    Ok(match setting {
        SettingId::CausalEncFb => Box::new(CausalEnc(ctx)),
        SettingId::ScEncNofb => Box::new(ScEncNofb(ctx)),
        SettingId::ScDecNofb => Box::new(ScDecNofb(ctx)),
        SettingId::CausalDecFb => Box::new(CausalDec(ctx)),
        SettingId::ScEncFb | SettingId::ScDecFb => return Err(Error::NoAuxiliary(setting)),
    })
}

fn decode(mut i: u128, radices: &[usize], digits: &mut [usize]) {
    for (d, &r) in digits.iter_mut().zip(radices).rev() {
        *d = (i % r as u128) as usize;
        i /= r as u128;
    }
}

/// Loads `rows` into `fam`; returns the value when feasible and above `best`.
fn visit(plan: &dyn Plan, fam: &mut Family, rows: &[&[f64]], best: f64) -> Option<f64> {
    if !plan.outer(fam, rows) {
        return None;
    }
    let tol = plan.tol();
    if plan.prunable() {
        let v = fam.objective(&fam.mass());
        if !(v > best) || !plan.inner(fam) || fam.residual(&fam.mass()) > tol {
            return None;
        }
        Some(v)
    } else {
        if !plan.inner(fam) {
            return None;
        }
        let mass = fam.mass();
        if fam.residual(&mass) > tol {
            return None;
        }
        let v = fam.objective(&mass);
        (v > best).then_some(v)
    }
}

/// A prepared grid search.
struct Search {
    fam: Family,
    plan: Box<dyn Plan>,
    grids: Vec<Vec<Vec<f64>>>,
    radices: Vec<usize>,
    total: u128,
}

fn free_parameters(plan: &dyn Plan) -> usize {
    plan.row_sizes().iter().map(|k| k - 1).sum()
}

fn points(sizes: &[usize], grid: usize) -> Option<u128> {
    sizes.iter().try_fold(1u128, |acc, &k| {
        // number of compositions of `grid` into `k` parts
        let mut c: u128 = 1;
        for i in 1..k as u128 {
            c = c * (grid as u128 + i) / i;
        }
        acc.checked_mul(c)
    })
}

fn prepare(setting: SettingId, target: &JointDist<f64>, k: usize, tol: f64) -> Result<(Family, Box<dyn Plan>)> {
    let fam = Family::new(setting, target, aux_alphabet(setting, k)?)?;
    let plan = plan(setting, Ctx::new(target, k, tol)?)?;
    Ok((fam, plan))
}

impl Search {
    fn new(fam: Family, plan: Box<dyn Plan>, grid: usize) -> Result<Self> {
        let sizes = plan.row_sizes();
        let params = free_parameters(plan.as_ref());
        if params > ORACLE_MAX_PARAMS {
            return Err(Error::SizeGuard {
                detail: format!("{params} free parameters, limit {ORACLE_MAX_PARAMS}"),
            });
        }
        let total = points(&sizes, grid).filter(|&t| t <= ORACLE_MAX_POINTS).ok_or_else(|| Error::SizeGuard {
            detail: format!("grid {grid} over {params} parameters exceeds {ORACLE_MAX_POINTS} points"),
        })?;
        let grids: Vec<Vec<Vec<f64>>> = sizes.iter().map(|&k| compositions(grid, k)).collect();
        let radices = grids.iter().map(Vec::len).collect();
        Ok(Self {
            fam,
            plan,
            grids,
            radices,
            total,
        })
    }

    fn rows(&self, index: u128) -> Vec<&[f64]> {
        let mut digits = vec![0; self.radices.len()];
        decode(index, &self.radices, &mut digits);
        self.grids.iter().zip(&digits).map(|(g, &d)| g[d].as_slice()).collect()
    }

    /// Best feasible point of each of up to `CHUNKS` contiguous index ranges.
    fn chunk_winners(&self) -> Vec<(f64, u128)> {
        let chunks = (CHUNKS as u128).min(self.total);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = self.total * c / chunks;
                let hi = self.total * (c + 1) / chunks;
                let mut fam = self.fam.clone();
                let mut best: Option<(f64, u128)> = None;
                for i in lo..hi {
                    let bar = best.map_or(f64::NEG_INFINITY, |b| b.0);
                    if let Some(v) = visit(self.plan.as_ref(), &mut fam, &self.rows(i), bar) {
                        best = Some((v, i));
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    }

    fn load(&self, index: u128) -> Family {
        let mut fam = self.fam.clone();
        let rows = self.rows(index);
        self.plan.outer(&mut fam, &rows);
        self.plan.inner(&mut fam);
        fam
    }
}

/// Exhaustive search over simplex grids with denominator `grid`.
///
/// The returned value is attained by a feasible point and so is a lower
/// bound on the true maximum.
pub fn brute_force_oracle(
    setting: SettingId,
    problem: &CoordinationProblem,
    aux_cardinality: usize,
    grid: usize,
) -> Result<AuxSolution> {
    if grid < 2 {
        return Err(Error::Domain(format!("oracle grid must be at least 2, got {grid}")));
    }
    if aux_cardinality == 0 {
        return Err(Error::Domain("auxiliary cardinality must be at least 1".into()));
    }
    let target = problem.target()?;
    let (fam, plan) = prepare(setting, &target, aux_cardinality, FEASIBLE)?;
    let search = Search::new(fam, plan, grid)?;

    let mut best: Option<(f64, u128)> = None;
    for w in search.chunk_winners() {
        if best.is_none_or(|b| w.0 > b.0) {
            best = Some(w);
        }
    }
    let (_, index) = best.ok_or(Error::Infeasible {
        best_residual: f64::INFINITY,
    })?;
    AuxSolution::from_family(
        &search.load(index),
        &target,
        Method::Oracle,
        search.total as u64,
        Some(grid),
        FEASIBLE,
    )
}

/// Grid points visited when seeding the multistart search.
const SEED_POINTS: u128 = 60_000;
const SEEDS: usize = 32;
const REFINE_BUDGET: u64 = 200_000;
const REFINE_SEED: u64 = 0x5eed;
/// Random poll directions per free parameter.
const RANDOM_DIRECTIONS: usize = 8;

/// Small instances only: the best points of the finest grid within a fixed
/// budget, for use as starting points.
pub(crate) fn grid_seeds(setting: SettingId, target: &JointDist<f64>, k: usize, tol: f64) -> Vec<Family> {
    let Ok((fam, plan)) = prepare(setting, target, k, tol) else {
        return Vec::new();
    };
    if free_parameters(plan.as_ref()) > ORACLE_MAX_PARAMS {
        return Vec::new();
    }
    let sizes = plan.row_sizes();
    let Some(grid) = (2..=64).rev().find(|&g| points(&sizes, g).is_some_and(|t| t <= SEED_POINTS)) else {
        return Vec::new();
    };
    let Ok(search) = Search::new(fam, plan, grid) else {
        return Vec::new();
    };
    let mut winners = search.chunk_winners();
    winners.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    winners.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-9);
    winners.truncate(SEEDS);
    winners.into_iter().map(|(_, i)| search.load(i)).collect()
}

fn as_refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
    rows.iter().map(Vec::as_slice).collect()
}

/// Pattern search in the reduced parameterization. Each poll tries every
/// single mass transfer within one enumerated row plus a batch of seeded
/// random zero-sum directions, and the mesh halves when no poll point
/// improves. Every accepted point is exactly feasible. Returns `None` when
/// `fam` cannot be expressed in the reduced parameterization or the instance
/// is too large.
pub(crate) fn refine(setting: SettingId, target: &JointDist<f64>, fam: &Family, tol: f64) -> Option<(Family, u64)> {
    let k = fam.vars.iter().find(|a| a.name() == fam.aux_name())?.len();
    let plan = plan(setting, Ctx::new(target, k, tol).ok()?).ok()?;
    let params = free_parameters(plan.as_ref());
    if params > ORACLE_MAX_PARAMS {
        return None;
    }
    let mut rows = plan.read_outer(fam);
    let mut scratch = fam.clone();
    let mut value = visit(plan.as_ref(), &mut scratch, &as_refs(&rows), f64::NEG_INFINITY)?;
    let mut rng = ChaCha8Rng::seed_from_u64(REFINE_SEED);

    let compass: Vec<Vec<Vec<f64>>> = (0..rows.len())
        .flat_map(|r| {
            let n = rows[r].len();
            let shape: Vec<usize> = rows.iter().map(Vec::len).collect();
            (0..n).flat_map(move |i| {
                let shape = shape.clone();
                (0..n).filter(move |&j| j != i).map(move |j| {
                    let mut d: Vec<Vec<f64>> = shape.iter().map(|&m| vec![0.0; m]).collect();
                    d[r][i] = -1.0;
                    d[r][j] = 1.0;
                    d
                })
            })
        })
        .collect();

    let mut evals = 1;
    let mut delta: f64 = 1.0 / 16.0;
    while delta > 1e-9 && evals < REFINE_BUDGET {
        let random: Vec<_> = (0..RANDOM_DIRECTIONS * params).map(|_| random_direction(&rows, &mut rng)).collect();
        let mut improved = false;
        for dir in compass.iter().chain(&random) {
            let Some(trial) = step(&rows, dir, delta) else {
                continue;
            };
            evals += 1;
            if let Some(v) = visit(plan.as_ref(), &mut scratch, &as_refs(&trial), value + 1e-13) {
                value = v;
                rows = trial;
                improved = true;
            }
        }
        if !improved {
            delta *= 0.5;
        }
    }
    let mut out = fam.clone();
    visit(plan.as_ref(), &mut out, &as_refs(&rows), f64::NEG_INFINITY)?;
    Some((out, evals))
}

/// Zero-sum uniform direction per row, scaled to unit max norm.
fn random_direction(rows: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut d: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let g: Vec<f64> = r.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let mean = g.iter().sum::<f64>() / g.len() as f64;
            g.into_iter().map(|x| x - mean).collect()
        })
        .collect();
    let scale = d.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale > 0.0 {
        d.iter_mut().flatten().for_each(|x| *x /= scale);
    }
    d
}

/// `rows + delta * dir`, shortened to stay on the simplices; `None` when no
/// move is possible.
fn step(rows: &[Vec<f64>], dir: &[Vec<f64>], delta: f64) -> Option<Vec<Vec<f64>>> {
    let mut t = delta;
    for (r, d) in rows.iter().zip(dir) {
        for (&p, &x) in r.iter().zip(d) {
            if x < 0.0 {
                t = t.min(p / -x);
            }
        }
    }
    if !(t > 0.0) {
        return None;
    }
    Some(
        rows.iter()
            .zip(dir)
            .map(|(r, d)| r.iter().zip(d).map(|(&p, &x)| (p + t * x).max(0.0)).collect())
            .collect(),
    )
}
