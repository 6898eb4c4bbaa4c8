#![allow(dead_code)]

use coordination::prob::{joint_from_factors, Alphabet, JointDist, Kernel};
use coordination::settings::var::{U, V, W, X, Y};
use coordination::settings::{CoordinationProblem, SettingId};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn alpha(name: &str, size: usize) -> Alphabet {
    Alphabet::indexed(name, size).unwrap()
}

/// Weights with occasional exact zeros, so boundary points are exercised.
pub fn weights(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.01f64..1.0], len)
}

/// Normalizes each row of `w`; an all-zero row becomes uniform.
pub fn kernel_from(from: Vec<Alphabet>, to: Vec<Alphabet>, w: &[f64]) -> Kernel {
    let cols: usize = to.iter().map(Alphabet::len).product();
    let rows: Vec<Vec<f64>> = w
        .chunks(cols)
        .map(|r| {
            let s: f64 = r.iter().sum();
            if s > 0.0 {
                r.iter().map(|x| x / s).collect()
            } else {
                vec![1.0 / cols as f64; cols]
            }
        })
        .collect();
    Kernel::from_rows(from, to, rows).unwrap()
}

pub fn joint_from(vars: Vec<Alphabet>, w: &[f64]) -> JointDist {
    let w = if w.iter().sum::<f64>() > 0.0 { w.to_vec() } else { vec![1.0; w.len()] };
    JointDist::from_weights(vars, w).unwrap()
}

/// Random kernel from a seeded generator, all entries positive.
pub fn random_kernel(from: Vec<Alphabet>, to: Vec<Alphabet>, rng: &mut ChaCha8Rng) -> Kernel {
    let rows: usize = from.iter().map(Alphabet::len).product();
    let cols: usize = to.iter().map(Alphabet::len).product();
    let w: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>() + 1e-3).collect();
    kernel_from(from, to, &w)
}

pub fn bsc(eps: f64) -> Kernel {
    Kernel::from_rows(vec![alpha(X, 2)], vec![alpha(Y, 2)], vec![vec![1.0 - eps, eps], vec![eps, 1.0 - eps]]).unwrap()
}

/// Member of the causal-encoder family:
/// `P(u) Q(w) Q(x|u,w) T(y|x) Q(v|u,y,w)`.
pub fn causal_member(dims: [usize; 5], seed: u64) -> JointDist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [nu, nx, ny, nv, nw] = dims;
    let factors = [
        random_kernel(vec![], vec![alpha(U, nu)], &mut rng),
        random_kernel(vec![], vec![alpha(W, nw)], &mut rng),
        random_kernel(vec![alpha(U, nu), alpha(W, nw)], vec![alpha(X, nx)], &mut rng),
        random_kernel(vec![alpha(X, nx)], vec![alpha(Y, ny)], &mut rng),
        random_kernel(vec![alpha(U, nu), alpha(Y, ny), alpha(W, nw)], vec![alpha(V, nv)], &mut rng),
    ];
    joint_from_factors(&factors).unwrap().marginalize(&[U, X, Y, V, W]).unwrap()
}

/// Strictly causal encoder problem with `X` independent of `U` and a random
/// target kernel `Q(v|u,x,y)`.
pub fn sc_problem(dims: [usize; 4], seed: u64) -> CoordinationProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [nu, nx, ny, nv] = dims;
    CoordinationProblem::new(
        SettingId::ScEncFb,
        random_kernel(vec![], vec![alpha(U, nu)], &mut rng),
        random_kernel(vec![alpha(X, nx)], vec![alpha(Y, ny)], &mut rng),
        random_kernel(vec![], vec![alpha(X, nx)], &mut rng),
        Some(random_kernel(vec![alpha(U, nu), alpha(X, nx), alpha(Y, ny)], vec![alpha(V, nv)], &mut rng)),
    )
    .unwrap()
}

/// 2x2x2x2 problem induced by a hidden binary `W` whose kernels take values
/// in `{1/16, 3/16, .., 13/16}`, over a BSC(0.1).
pub fn hidden_w_problem(setting: SettingId, seed: u64) -> CoordinationProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = move || (2 * rng.random_range(0..7) + 1) as f64 / 16.0;
    let b = |p: f64, o: usize| if o == 0 { p } else { 1.0 - p };
    let pu = Kernel::marginal(alpha(U, 2), vec![0.5, 0.5]).unwrap();
    let qw = level();
    let qx: Vec<f64> = (0..4).map(|_| level()).collect();
    let qv: Vec<f64> = (0..8).map(|_| level()).collect();
    let joint = joint_from_factors(&[
        pu.clone(),
        Kernel::marginal(alpha(W, 2), vec![qw, 1.0 - qw]).unwrap(),
        Kernel::from_fn(vec![alpha(U, 2), alpha(W, 2)], vec![alpha(X, 2)], |c, o| b(qx[c[0] * 2 + c[1]], o[0])).unwrap(),
        bsc(0.1),
        Kernel::from_fn(vec![alpha(U, 2), alpha(Y, 2), alpha(W, 2)], vec![alpha(V, 2)], |c, o| {
            b(qv[c[0] * 4 + c[1] * 2 + c[2]], o[0])
        })
        .unwrap(),
    ])
    .unwrap();
    let policy = joint.conditional(&[X], &[U]).unwrap();
    let kernel = joint.conditional(&[V], &[U, X, Y]).unwrap();
    CoordinationProblem::new(setting, pu, bsc(0.1), policy, Some(kernel)).unwrap()
}

/// Reads the problem factors back off a joint over `U, X, Y, V`.
pub fn problem_from_joint(setting: SettingId, joint: &JointDist) -> CoordinationProblem {
    CoordinationProblem::new(
        setting,
        joint.conditional(&[U], &[]).unwrap(),
        joint.conditional(&[Y], &[X]).unwrap(),
        joint.conditional(&[X], &[U]).unwrap(),
        Some(joint.conditional(&[V], &[U, X, Y]).unwrap()),
    )
    .unwrap()
}

/// Random binary kernel whose entries lie on the 1/16 lattice.
fn lattice_kernel(from: Vec<Alphabet>, to: Alphabet, rng: &mut ChaCha8Rng) -> Kernel {
    let rows: usize = from.iter().map(Alphabet::len).product();
    let rows = (0..rows)
        .map(|_| {
            let p = (2 * rng.random_range(0..8) + 1) as f64 / 16.0;
            vec![p, 1.0 - p]
        })
        .collect();
    Kernel::from_rows(from, vec![to], rows).unwrap()
}

/// Strictly causal target where `(U, V)` is independent of `(X, Y)`.
/// Kernels take values on the 1/16 lattice.
pub fn independent_pairs_problem(seed: u64) -> CoordinationProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source = lattice_kernel(vec![], alpha(U, 2), &mut rng);
    let policy = lattice_kernel(vec![], alpha(X, 2), &mut rng);
    let v_given_u = lattice_kernel(vec![alpha(U, 2)], alpha(V, 2), &mut rng);
    let kernel = Kernel::from_fn(vec![alpha(U, 2), alpha(X, 2), alpha(Y, 2)], vec![alpha(V, 2)], |c, o| {
        v_given_u.prob(&[c[0]], o)
    })
    .unwrap();
    CoordinationProblem::new(SettingId::ScEncFb, source, bsc(0.1), policy, Some(kernel)).unwrap()
}

/// Strictly causal target where `V` depends on `(U, X)` only, so `W2 = V`
/// is admissible. Kernels take values on the 1/16 lattice.
pub fn v_from_source_and_input_problem(seed: u64) -> CoordinationProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source = lattice_kernel(vec![], alpha(U, 2), &mut rng);
    let policy = lattice_kernel(vec![], alpha(X, 2), &mut rng);
    let v_given_ux = lattice_kernel(vec![alpha(U, 2), alpha(X, 2)], alpha(V, 2), &mut rng);
    let kernel = Kernel::from_fn(vec![alpha(U, 2), alpha(X, 2), alpha(Y, 2)], vec![alpha(V, 2)], |c, o| {
        v_given_ux.prob(&[c[0], c[1]], o)
    })
    .unwrap();
    CoordinationProblem::new(SettingId::ScEncFb, source, bsc(0.1), policy, Some(kernel)).unwrap()
}
