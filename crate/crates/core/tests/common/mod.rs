//! Dense reference implementations, written independently of the
//! structured kernels: explicit matrices and textbook products.

#![allow(dead_code)]

use qwalk::{ChannelKind, CoinOp, C64};

pub type Dense = Vec<Vec<C64>>;

pub fn zeros(n: usize) -> Dense {
    vec![vec![C64::new(0.0, 0.0); n]; n]
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn dagger(a: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

fn index(horizon: usize, x: i64, coin: usize) -> usize {
    2 * (x + horizon as i64) as usize + coin
}

/// `S` on `[-h, h]`; moves that would leave the lattice are dropped, which
/// never matters while `t < h`.
pub fn shift(horizon: usize) -> Dense {
    let n = 2 * (2 * horizon + 1);
    let mut s = zeros(n);
    let h = horizon as i64;
    for x in -h..=h {
        for (coin, a) in [(0usize, -1i64), (1, 1)] {
            if (x + a).abs() <= h {
                s[index(horizon, x + a, coin)][index(horizon, x, coin)] = C64::new(1.0, 0.0);
            }
        }
    }
    s
}

/// `C ⊗ I` with the coin as the fast index.
pub fn coin_layer(horizon: usize, coin: &CoinOp) -> Dense {
    let n = 2 * (2 * horizon + 1);
    let mut c = zeros(n);
    for site in 0..(2 * horizon + 1) {
        for a in 0..2 {
            for b in 0..2 {
                c[2 * site + a][2 * site + b] = coin.entries()[a][b];
            }
        }
    }
    c
}

pub fn walk_unitary(horizon: usize, coin: &CoinOp) -> Dense {
    matmul(&shift(horizon), &coin_layer(horizon, coin))
}

pub fn apply(u: &Dense, v: &[C64]) -> Vec<C64> {
    u.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// The rank-one projectors of each channel.
pub fn projectors(horizon: usize, channel: ChannelKind) -> Vec<Dense> {
    let n = 2 * (2 * horizon + 1);
    let one = C64::new(1.0, 0.0);
    match channel {
        ChannelKind::Both => (0..n)
            .map(|i| {
                let mut p = zeros(n);
                p[i][i] = one;
                p
            })
            .collect(),
        ChannelKind::CoinOnly => (0..2)
            .map(|c| {
                let mut p = zeros(n);
                for site in 0..(2 * horizon + 1) {
                    p[2 * site + c][2 * site + c] = one;
                }
                p
            })
            .collect(),
        ChannelKind::PositionOnly => (0..(2 * horizon + 1))
            .map(|site| {
                let mut p = zeros(n);
                p[2 * site][2 * site] = one;
                p[2 * site + 1][2 * site + 1] = one;
                p
            })
            .collect(),
    }
}

/// `ρ' = (1-p)·UρU† + p·Σᵢ Pᵢ UρU† Pᵢ` by explicit products.
pub fn master_step(rho: &Dense, u: &Dense, projs: &[Dense], p: f64) -> Dense {
    let evolved = matmul(&matmul(u, rho), &dagger(u));
    let n = rho.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = evolved[i][j] * (1.0 - p);
        }
    }
    for proj in projs {
        let term = matmul(&matmul(proj, &evolved), proj);
        for i in 0..n {
            for j in 0..n {
                out[i][j] += term[i][j] * p;
            }
        }
    }
    out
}

pub fn outer(v: &[C64]) -> Dense {
    v.iter()
        .map(|a| v.iter().map(|b| a * b.conj()).collect())
        .collect()
}

/// Classical walk: each step moves left or right with probability ½.
/// Returns `P(x)` on `[-t, t]` indexed by `x + t`.
pub fn binomial_walk(t: usize) -> Vec<f64> {
    let mut probs = vec![0.0; 2 * t + 1];
    probs[t] = 1.0;
    for _ in 0..t {
        let mut next = vec![0.0; 2 * t + 1];
        for (i, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if i > 0 {
                next[i - 1] += 0.5 * p;
            }
            if i + 1 < next.len() {
                next[i + 1] += 0.5 * p;
            }
        }
        probs = next;
    }
    probs
}
