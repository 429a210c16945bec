//! In-place application of the walk unitary on the flat joint index
//! `i = 2(x + horizon) + coin_index`.
//!
//! Every kernel only touches sites inside the lightcone `[-t, t]` of the
//! state at time `t`; everything outside is zero and stays zero.

use crate::C64;

pub(crate) type Coin2 = [[C64; 2]; 2];

#[inline]
pub(crate) fn flat(horizon: usize, x: i64, coin_index: usize) -> usize {
    2 * (x + horizon as i64) as usize + coin_index
}

#[inline]
pub(crate) fn site_of(horizon: usize, i: usize) -> i64 {
    (i / 2) as i64 - horizon as i64
}

/// Flat index range covering sites `[-t, t]`.
#[inline]
pub(crate) fn active_range(horizon: usize, t: usize) -> std::ops::Range<usize> {
    let t = t.min(horizon);
    2 * (horizon - t)..2 * (horizon + t) + 2
}

/// One walk step on a vector at time `t` (`t < horizon`).
pub(crate) fn step_vector(v: &mut [C64], horizon: usize, t: usize, coin: &Coin2) {
    debug_assert!(t < horizon);
    let t = t as i64;
    for x in -t..=t {
        let i = flat(horizon, x, 0);
        let (m, p) = (v[i], v[i + 1]);
        v[i] = coin[0][0] * m + coin[0][1] * p;
        v[i + 1] = coin[1][0] * m + coin[1][1] * p;
    }
    // coin +1 moves right, coin -1 moves left
    for x in (-t..=t).rev() {
        v[flat(horizon, x + 1, 1)] = v[flat(horizon, x, 1)];
    }
    v[flat(horizon, -t, 1)] = C64::new(0.0, 0.0);
    for x in -t..=t {
        v[flat(horizon, x - 1, 0)] = v[flat(horizon, x, 0)];
    }
    v[flat(horizon, t, 0)] = C64::new(0.0, 0.0);
}

/// Left-multiplies a row-major `dim × dim` matrix by the walk unitary,
/// treating each row as one amplitude. Only columns in `cols` are touched.
pub(crate) fn step_rows(
    m: &mut [C64],
    dim: usize,
    horizon: usize,
    t: usize,
    coin: &Coin2,
    cols: std::ops::Range<usize>,
) {
    debug_assert!(t < horizon);
    let t = t as i64;
    for x in -t..=t {
        let rm = flat(horizon, x, 0) * dim;
        let rp = rm + dim;
        for c in cols.clone() {
            let (a, b) = (m[rm + c], m[rp + c]);
            m[rm + c] = coin[0][0] * a + coin[0][1] * b;
            m[rp + c] = coin[1][0] * a + coin[1][1] * b;
        }
    }
    let move_row = |m: &mut [C64], from: usize, to: usize| {
        m.copy_within(
            from * dim + cols.start..from * dim + cols.end,
            to * dim + cols.start,
        );
    };
    let clear_row = |m: &mut [C64], row: usize| {
        m[row * dim + cols.start..row * dim + cols.end].fill(C64::new(0.0, 0.0));
    };
    for x in (-t..=t).rev() {
        move_row(m, flat(horizon, x, 1), flat(horizon, x + 1, 1));
    }
    clear_row(m, flat(horizon, -t, 1));
    for x in -t..=t {
        move_row(m, flat(horizon, x, 0), flat(horizon, x - 1, 0));
    }
    clear_row(m, flat(horizon, t, 0));
}

/// Right-multiplies a row-major matrix by `U†`: each row `r` in `rows`
/// becomes `conj(U)·r`, i.e. a vector step with the conjugated coin.
pub(crate) fn step_cols(
    m: &mut [C64],
    dim: usize,
    horizon: usize,
    t: usize,
    coin: &Coin2,
    rows: std::ops::Range<usize>,
) {
    let conj = [
        [coin[0][0].conj(), coin[0][1].conj()],
        [coin[1][0].conj(), coin[1][1].conj()],
    ];
    for r in rows {
        step_vector(&mut m[r * dim..(r + 1) * dim], horizon, t, &conj);
    }
}
