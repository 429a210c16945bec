mod common;

use proptest::prelude::*;
use qwalk::analysis::{master_moments, moments};
use qwalk::{
    diagonal_distribution, evolve_master, hadamard, ChannelKind, CoinLabel, CoinState,
    DensityMatrix, PureState, WalkConfig, C64,
};

fn dense_of(rho: &DensityMatrix) -> common::Dense {
    let n = rho.dim();
    (0..n)
        .map(|i| (0..n).map(|j| rho.get(i, j)).collect())
        .collect()
}

#[test]
fn matches_brute_force_master_equation() {
    for t in 0..=6usize {
        for channel in ChannelKind::ALL {
            for p in [0.0, 0.25, 1.0] {
                let init = CoinState::symmetric();
                let cfg = WalkConfig::new(t, p)
                    .unwrap()
                    .with_channel(channel)
                    .with_init(init);
                let fast = evolve_master(&cfg).unwrap();

                let u = common::walk_unitary(t, &hadamard());
                let projs = common::projectors(t, channel);
                let mut rho = common::outer(PureState::at_origin(init, t).amplitudes());
                for _ in 0..t {
                    rho = common::master_step(&rho, &u, &projs, p);
                }
                let fast = dense_of(&fast);
                for i in 0..rho.len() {
                    for j in 0..rho.len() {
                        assert!(
                            (fast[i][j] - rho[i][j]).norm() < 1e-12,
                            "T={t} {channel} p={p} ({i},{j}): {} vs {}",
                            fast[i][j],
                            rho[i][j]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn dephase_matches_projector_sum() {
    let cfg = WalkConfig::new(5, 0.1)
        .unwrap()
        .with_channel(ChannelKind::CoinOnly);
    let rho = evolve_master(&cfg).unwrap();
    for channel in ChannelKind::ALL {
        let fast = dense_of(&qwalk::dephase(&rho, channel));
        let dense = dense_of(&rho);
        let projs = common::projectors(5, channel);
        let mut expected = common::zeros(rho.dim());
        for p in &projs {
            let term = common::matmul(&common::matmul(p, &dense), p);
            for i in 0..rho.dim() {
                for j in 0..rho.dim() {
                    expected[i][j] += term[i][j];
                }
            }
        }
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                assert!((fast[i][j] - expected[i][j]).norm() < 1e-15);
            }
        }
    }
}

#[test]
fn full_joint_dephasing_is_a_markov_chain() {
    for init in [CoinState::symmetric(), CoinLabel::Plus.into()] {
        let t = 25usize;
        let cfg = WalkConfig::new(t, 1.0).unwrap().with_init(init);
        let d = diagonal_distribution(&evolve_master(&cfg).unwrap()).unwrap();

        // P(x,a,t+1) = Σ_b |C_ab|² P(x-a, b, t), starting from |α_b|² at the origin
        let h = t as i64;
        let idx = |x: i64, a: usize| (2 * (x + h)) as usize + a;
        let mut probs = vec![0.0; 2 * (2 * t + 1)];
        for a in 0..2 {
            probs[idx(0, a)] = init.amplitudes()[a].norm_sqr();
        }
        let c = hadamard();
        for _ in 0..t {
            let mut next = vec![0.0; probs.len()];
            for x in -h..=h {
                for (a, step) in [(0usize, -1i64), (1, 1)] {
                    let src = x - step;
                    if src.abs() > h {
                        continue;
                    }
                    next[idx(x, a)] += (0..2)
                        .map(|b| c.entries()[a][b].norm_sqr() * probs[idx(src, b)])
                        .sum::<f64>();
                }
            }
            probs = next;
        }
        for (p, q) in d.probs().iter().zip(&probs) {
            assert!((p - q).abs() < 1e-12);
        }
        let binom = common::binomial_walk(t);
        for x in -h..=h {
            assert!((d.marginal(x) - binom[(x + h) as usize]).abs() < 1e-12);
        }
    }
}

#[test]
fn every_channel_is_classical_at_p_one() {
    for channel in ChannelKind::ALL {
        for t in [10usize, 40] {
            let cfg = WalkConfig::new(t, 1.0).unwrap().with_channel(channel);
            let m = master_moments(&cfg).unwrap();
            let binom = common::binomial_walk(t);
            let oracle: f64 = binom
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let x = i as f64 - t as f64;
                    x * x * p
                })
                .sum();
            assert!((oracle - t as f64).abs() < 1e-9);
            assert!(
                (m.second_moment - oracle).abs() < 1e-9,
                "{channel} T={t}: {}",
                m.second_moment
            );
        }
    }
}

#[test]
fn sigma_decreases_with_p() {
    let ps = [0.0, 1e-3, 1e-2, 1e-1, 1.0];
    for channel in ChannelKind::ALL {
        let sig: Vec<f64> = ps
            .iter()
            .map(|&p| {
                master_moments(&WalkConfig::new(100, p).unwrap().with_channel(channel))
                    .unwrap()
                    .sigma
            })
            .collect();
        for w in sig.windows(2) {
            assert!(w[1] <= w[0] + 1e-6, "{channel}: {sig:?}");
        }
        assert!(sig[0] > sig[4]);
    }
}

#[test]
fn trace_is_preserved_over_long_runs() {
    let cfg = WalkConfig::new(500, 0.37)
        .unwrap()
        .with_channel(ChannelKind::Both);
    let mut rho = DensityMatrix::from_pure(&PureState::at_origin(cfg.init, 500));
    for _ in 0..500 {
        rho.step(&cfg).unwrap();
        assert!((rho.trace() - 1.0).norm() < 1e-10);
    }
    for channel in [ChannelKind::CoinOnly, ChannelKind::PositionOnly] {
        let cfg = WalkConfig::new(200, 0.61).unwrap().with_channel(channel);
        let mut rho = DensityMatrix::from_pure(&PureState::at_origin(cfg.init, 200));
        for _ in 0..200 {
            let before = rho.trace();
            rho.step(&cfg).unwrap();
            assert!((rho.trace() - before).norm() < 1e-12);
            assert!((rho.trace() - 1.0).norm() < 1e-10);
        }
    }
}

#[test]
fn p_zero_master_is_pure() {
    let cfg = WalkConfig::new(60, 0.0)
        .unwrap()
        .with_init(CoinLabel::Minus.into());
    let rho = evolve_master(&cfg).unwrap();
    assert!((rho.purity() - 1.0).abs() < 1e-10);
    let d = diagonal_distribution(&rho).unwrap();
    let m = moments(&d).unwrap();
    let pure = moments(&qwalk::distribution(&qwalk::evolve_pure(&cfg).unwrap())).unwrap();
    assert!((m.second_moment - pure.second_moment).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn structural_invariants_hold_every_step(
        t in 1usize..=50,
        p in 0.0..=1.0f64,
        channel in prop_oneof![Just(ChannelKind::CoinOnly), Just(ChannelKind::PositionOnly), Just(ChannelKind::Both)],
        theta in 0.0..std::f64::consts::FRAC_PI_2,
        phase in -3.2..3.2f64,
    ) {
        let (s, c) = theta.sin_cos();
        let init = CoinState::new(C64::new(c, 0.0), C64::from_polar(s, phase)).unwrap();
        let cfg = WalkConfig::new(t, p).unwrap().with_channel(channel).with_init(init);
        let mut rho = DensityMatrix::from_pure(&PureState::at_origin(init, t));
        for step in 1..=t {
            rho.step(&cfg).unwrap();
            prop_assert!((rho.trace() - 1.0).norm() < 1e-10);
            prop_assert!(rho.hermiticity_error() < 1e-12);
            prop_assert!(rho.min_diagonal() >= -1e-12);
            let d = diagonal_distribution(&rho).unwrap();
            for (x, _, prob) in d.cells() {
                if x.abs() > step as i64 || (x + step as i64) % 2 != 0 {
                    prop_assert_eq!(prob, 0.0);
                }
            }
        }
    }
}
