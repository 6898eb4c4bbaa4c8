mod common;

use common::{alpha, bsc, causal_member};
use coordination::binary_example::{make_target, ExampleParams};
use coordination::coord_sim::{
    build_codebooks, decoder_step, encoder_step, estimate_error_probability, run_session, simulate_channel,
    trace_csv, Codebooks, Scheme, SimConfig, TypicalityTests,
};
use coordination::prob::{JointDist, Kernel};
use coordination::settings::var::{U, V, W, X, Y};
use coordination::settings::{evaluate_objective, CoordinationProblem, SettingId};
use coordination::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform binary source and input over `channel`; `V` repeats `U` with
/// probability `agree`.
fn tracking(channel: Kernel, agree: f64) -> (CoordinationProblem, JointDist) {
    let p = CoordinationProblem::new(
        SettingId::ScEncFb,
        Kernel::marginal(alpha(U, 2), vec![0.5, 0.5]).unwrap(),
        channel,
        Kernel::marginal(alpha(X, 2), vec![0.5, 0.5]).unwrap(),
        Some(
            Kernel::from_fn(vec![alpha(U, 2), alpha(X, 2), alpha(Y, 2)], vec![alpha(V, 2)], |c, o| {
                if c[0] == o[0] {
                    agree
                } else {
                    1.0 - agree
                }
            })
            .unwrap(),
        ),
    )
    .unwrap();
    let e = p.target().unwrap().with_copy(X, W, 2).unwrap();
    (p, e)
}

fn sim(n: usize, blocks: usize) -> SimConfig {
    SimConfig {
        n,
        blocks,
        ..SimConfig::default()
    }
}

fn books_with(e: &JointDist, n: usize, rate: f64, seed: u64) -> Codebooks {
    let cfg = SimConfig {
        rate_override: Some(rate),
        seed,
        ..sim(n, 2)
    };
    build_codebooks(e, &cfg).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    0.5 * (v[(v.len() - 1) / 2] + v[v.len() / 2])
}

#[test]
fn noiseless_channel_copies_the_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x: Vec<usize> = (0..1000).map(|i| (i * 7 / 3) % 2).collect();
    assert_eq!(simulate_channel(&x, &bsc(0.0), &mut rng).unwrap(), x);
}

#[test]
fn useless_channel_flips_half_the_letters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = vec![0; 10_000];
    let y = simulate_channel(&x, &bsc(0.5), &mut rng).unwrap();
    let rate = y.iter().sum::<usize>() as f64 / 1e4;
    assert!((rate - 0.5).abs() <= 0.02, "{rate}");
}

#[test]
fn channel_replays_from_its_state() {
    let x: Vec<usize> = (0..500).map(|i| i % 2).collect();
    let rng = ChaCha8Rng::seed_from_u64(3);
    let a = simulate_channel(&x, &bsc(0.3), &mut rng.clone()).unwrap();
    let b = simulate_channel(&x, &bsc(0.3), &mut rng.clone()).unwrap();
    assert_eq!(a, b);
    let err = simulate_channel(&[0, 2], &bsc(0.3), &mut rng.clone()).unwrap_err();
    assert!(matches!(err, Error::SymbolOutOfAlphabet { index: 2, size: 2, .. }));
}

#[test]
fn encoder_picks_the_only_typical_candidate() {
    let (_, e) = tracking(bsc(0.0), 0.9);
    let books = books_with(&e, 400, 0.01, 11);
    assert_eq!(books.message_count, 16);
    let tests = TypicalityTests::new(&e, 0.1).unwrap();
    // source agreeing with V(1, 3) on nine letters in ten, outputs equal to W(1)
    let mut u = books.v_word(1, 3);
    for i in (0..u.len()).step_by(10) {
        u[i] = 1 - u[i];
    }
    let y = books.w_word(1).to_vec();
    assert_eq!(encoder_step(&books, &tests, 1, &u, &y).unwrap(), (3, true));
}

#[test]
fn encoder_falls_back_to_the_first_index() {
    let (_, e) = tracking(bsc(0.0), 0.9);
    let books = books_with(&e, 400, 0.01, 11);
    let tests = TypicalityTests::new(&e, 0.1).unwrap();
    let u = vec![0; 400];
    let y = books.w_word(2).to_vec();
    assert_eq!(encoder_step(&books, &tests, 2, &u, &y).unwrap(), (1, false));
}

#[test]
fn single_message_codebooks() {
    let (_, e) = tracking(bsc(0.0), 0.9);
    let books = books_with(&e, 200, 0.0, 4);
    assert_eq!(books.message_count, 1);
    let tests = TypicalityTests::new(&e, 0.1).unwrap();
    let y = books.w_word(1).to_vec();
    let typical_u = books.v_word(1, 1).iter().enumerate().map(|(i, &v)| if i % 10 == 0 { 1 - v } else { v }).collect::<Vec<_>>();
    assert_eq!(encoder_step(&books, &tests, 1, &typical_u, &y).unwrap(), (1, true));
    assert_eq!(encoder_step(&books, &tests, 1, &vec![1; 200], &y).unwrap(), (1, false));

    let out = decoder_step(&books, &tests, 1, &y, &y).unwrap();
    assert_eq!(out.m_hat, 1);
    assert_eq!(out.v_prev, books.v_word(1, 1));
    assert!(!out.ambiguous);
}

#[test]
fn decoder_reads_the_sent_word_off_a_noiseless_channel() {
    let (_, e) = tracking(bsc(0.0), 0.9);
    let books = books_with(&e, 400, 0.01, 12);
    let tests = TypicalityTests::new(&e, 0.1).unwrap();
    let y_prev = books.w_word(2).to_vec();
    let y_curr = books.w_word(5).to_vec();
    let out = decoder_step(&books, &tests, 2, &y_prev, &y_curr).unwrap();
    assert_eq!((out.m_hat, out.found, out.ambiguous), (5, true, false));
    assert_eq!(out.v_prev, books.v_word(2, 5));
}

#[test]
fn decoder_ties_go_to_the_smallest_index() {
    let (_, e) = tracking(bsc(0.0), 0.9);
    let books = books_with(&e, 400, 0.01, 12);
    let everything = TypicalityTests::new(&e, 1.0).unwrap();
    let y = books.w_word(7).to_vec();
    let out = decoder_step(&books, &everything, 2, &y, &y).unwrap();
    assert_eq!((out.m_hat, out.found, out.ambiguous), (1, true, true));

    let strict = TypicalityTests::new(&e, 0.1).unwrap();
    let out = decoder_step(&books, &strict, 2, &y, &vec![0; 400]).unwrap();
    assert_eq!((out.m_hat, out.found), (1, false));
    assert_eq!(out.v_prev, books.v_word(2, 1));
}

#[test]
fn sessions_are_reproducible() {
    let (p, e) = tracking(bsc(0.1), 0.55);
    let cfg = sim(60, 6);
    let (t1, r1) = run_session(&p, &e, &cfg).unwrap();
    let (t2, r2) = run_session(&p, &e, &cfg).unwrap();
    assert_eq!(t1, t2);
    assert_eq!(r1, r2);
    assert_eq!(trace_csv(&t1), trace_csv(&t2));
    assert_eq!(t1.chosen_indices[0], 1);
    assert!(t1.u_blocks.iter().chain(&t1.v_blocks).all(|b| b.len() == 60));

    let cfg = SimConfig { trials: 8, ..cfg };
    assert_eq!(estimate_error_probability(&p, &e, &cfg).unwrap(), estimate_error_probability(&p, &e, &cfg).unwrap());
    let other = SimConfig { seed: cfg.seed + 1, ..cfg.clone() };
    assert_ne!(estimate_error_probability(&p, &e, &cfg).unwrap().tv_all, estimate_error_probability(&p, &e, &other).unwrap().tv_all);
}

#[test]
fn trace_rows_cover_every_position() {
    let (p, e) = tracking(bsc(0.1), 0.55);
    let (t, _) = run_session(&p, &e, &sim(20, 3)).unwrap();
    let csv = trace_csv(&t);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "block,position,u,x,y,v,m,m_hat,encoder_failure,decoder_failure");
    assert_eq!(lines.count(), 60);
}

#[test]
fn constant_source_is_coordinated() {
    let p = CoordinationProblem::new(
        SettingId::ScEncFb,
        Kernel::marginal(alpha(U, 1), vec![1.0]).unwrap(),
        bsc(0.0),
        Kernel::marginal(alpha(X, 2), vec![0.5, 0.5]).unwrap(),
        Some(Kernel::from_fn(vec![alpha(U, 1), alpha(X, 2), alpha(Y, 2)], vec![alpha(V, 2)], |c, o| (c[2] == o[0]) as u8 as f64).unwrap()),
    )
    .unwrap();
    let e = p.target().unwrap().with_copy(X, W, 2).unwrap();
    // V is a function of W here, so every block resends W(1) and the core
    // distance is that of a single 50-letter word
    let sweep: Vec<f64> = (0..20)
        .map(|seed| {
            let (t, report) = run_session(&p, &e, &SimConfig { seed, ..sim(50, 5) }).unwrap();
            assert!(t.v_blocks.iter().zip(&t.y_blocks).all(|(v, y)| v == y));
            report.median_tv_core.unwrap()
        })
        .collect();
    assert!(median(sweep.clone()) <= 0.1, "{sweep:?}");
}

#[test]
fn negative_constraint_has_no_rate_window() {
    let p = make_target(ExampleParams::<f64>::new(0.1, 0.1).unwrap()).unwrap();
    let e = p.target().unwrap().with_copy(X, W, 2).unwrap();
    assert!(matches!(run_session(&p, &e, &sim(50, 4)), Err(Error::RateWindowEmpty { .. })));
    assert!(matches!(build_codebooks(&e, &sim(50, 4)), Err(Error::RateWindowEmpty { .. })));
}

#[test]
fn error_probability_does_not_grow_with_block_length() {
    let (p, e) = tracking(bsc(0.1), 0.55);
    let run = |n| {
        let cfg = SimConfig {
            trials: 100,
            coord_tol: 0.08,
            ..sim(n, 10)
        };
        estimate_error_probability(&p, &e, &cfg).unwrap()
    };
    let (short, long) = (run(50), run(200));
    for r in [&short, &long] {
        assert!((0.0..=1.0).contains(&r.p_error_estimate));
        assert!(r.p_error_interval[0] <= r.p_error_estimate && r.p_error_estimate <= r.p_error_interval[1]);
        assert!(r.tv_all.iter().chain(&r.tv_core).all(|t| (0.0..=1.0).contains(t)));
    }
    assert!(long.p_error_estimate <= short.p_error_estimate, "{} > {}", long.p_error_estimate, short.p_error_estimate);
}

#[test]
fn core_distance_shrinks_with_block_length() {
    let (p, e) = tracking(bsc(0.1), 0.55);
    let medians: Vec<f64> = [50, 100, 200]
        .into_iter()
        .map(|n| {
            let cfg = SimConfig { trials: 30, ..sim(n, 10) };
            estimate_error_probability(&p, &e, &cfg).unwrap().median_tv_core.unwrap()
        })
        .collect();
    assert!(medians.windows(2).all(|w| w[1] <= w[0]), "{medians:?}");
}

#[test]
fn channel_statistics_match_over_a_long_session() {
    let (p, e) = tracking(bsc(0.1), 0.55);
    let (t, _) = run_session(&p, &e, &sim(1000, 10)).unwrap();
    let mut counts = [[0usize; 2]; 2];
    for (xs, ys) in t.x_blocks.iter().zip(&t.y_blocks) {
        for (&x, &y) in xs.iter().zip(ys) {
            counts[x][y] += 1;
        }
    }
    for (x, row) in counts.iter().enumerate() {
        let visits = row[0] + row[1];
        assert!(visits >= 100);
        let flip = row[1 - x] as f64 / visits as f64;
        assert!((flip - 0.1).abs() <= 0.05, "x = {x}: {flip}");
    }
}

#[test]
fn two_blocks_have_no_core() {
    let (p, e) = tracking(bsc(0.1), 0.55);
    let (_, r) = run_session(&p, &e, &sim(40, 2)).unwrap();
    assert!(r.empirical_core.is_none() && r.median_tv_core.is_none() && r.tv_core.is_empty());
}

#[test]
fn zero_trials_are_rejected() {
    let (p, e) = tracking(bsc(0.1), 0.55);
    let cfg = SimConfig { trials: 0, ..sim(40, 3) };
    assert_eq!(estimate_error_probability(&p, &e, &cfg).unwrap_err(), Error::ZeroTrials);
}

#[test]
fn copy_scheme_needs_a_copy() {
    let e = causal_member([2, 2, 2, 2, 2], 5);
    let cfg = SimConfig { scheme: Scheme::WEqualsX, ..sim(10, 2) };
    assert!(matches!(build_codebooks(&e, &cfg), Err(Error::Domain(_))));
}

#[test]
fn explicit_rates_beyond_the_cap_are_refused() {
    let (_, e) = tracking(bsc(0.1), 0.55);
    let cfg = SimConfig { rate_override: Some(0.5), ..sim(100, 2) };
    assert!(matches!(build_codebooks(&e, &cfg), Err(Error::CodebookTooLarge { .. })));
    let capped = build_codebooks(&e, &sim(100, 2)).unwrap();
    assert!(capped.rate_capped);
    assert_eq!(capped.message_count, 4096);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn empty_window_exactly_when_the_objective_is_small(
        d in [1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3, 1usize..=3],
        seed in any::<u64>(),
        delta in 1e-3f64..0.3,
    ) {
        let e = causal_member(d, seed);
        let cfg = SimConfig { delta, scheme: Scheme::GenericW, ..sim(4, 2) };
        let objective = evaluate_objective(SettingId::CausalEncFb, &e).unwrap();
        let empty = matches!(build_codebooks(&e, &cfg), Err(Error::RateWindowEmpty { .. }));
        prop_assert_eq!(empty, objective <= 2.0 * delta);
    }
}
