//! Difference orders and the Wronskian determinant criterion for C-linear
//! independence.
//!
//! For C-independent x_1..x_r there is a tuple (d_1, ..., d_r) with
//! `det(delta^(d_i)(x_j)) != 0`; the smallest such tuple in lexicographic
//! order gives the difference orders. The naive q-Casoratian
//! `det(sigma^(i-1)(x_j))` can vanish on independent sets when sigma has
//! finite order, which is exactly what this criterion repairs.
//!
//! Only strictly increasing tuples are enumerated: a tuple with a repeated
//! entry has two equal rows, and a non-monotone tuple is a row permutation
//! of its sorted form, so neither can succeed where the increasing
//! enumeration fails.

use crate::matrix::Mat;
use crate::qarith::QContext;
use crate::ratfunc::{delta, sigma_q_pow, RatFunc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WronskianResult {
    Found { orders: Vec<u64>, det: RatFunc },
    NotFoundUpTo(u64),
}

impl WronskianResult {
    pub fn orders(&self) -> Option<&[u64]> {
        match self {
            WronskianResult::Found { orders, .. } => Some(orders),
            WronskianResult::NotFoundUpTo(_) => None,
        }
    }
}

/// Default search bound used by the CLI: 3 n r.
pub fn default_bound(ctx: &QContext, r: usize) -> u64 {
    3 * ctx.n() * r as u64
}

/// The lexicographically least strictly increasing tuple (d_1 < ... < d_r),
/// d_r <= bound, with `det(delta^(d_i)(x_j)) != 0`, together with that
/// determinant; `NotFoundUpTo(bound)` if every tuple vanishes.
pub fn difference_orders(ctx: &QContext, xs: &[RatFunc], bound: u64) -> WronskianResult {
    assert!(!xs.is_empty(), "need at least one function");
    let r = xs.len();
    assert!(bound + 1 >= r as u64, "bound must admit r distinct orders");
    // rows of delta values, computed once per order
    let deltas: Vec<Vec<RatFunc>> = (0..=bound)
        .map(|d| xs.iter().map(|x| delta(ctx, d, x)).collect())
        .collect();
    let mut tuple: Vec<u64> = (0..r as u64).collect();
    loop {
        let m = Mat::from_rows(tuple.iter().map(|&d| deltas[d as usize].clone()).collect());
        let det = m.determinant();
        if !det.is_zero() {
            return WronskianResult::Found { orders: tuple, det };
        }
        // next strictly increasing tuple in lexicographic order
        let mut i = r;
        loop {
            if i == 0 {
                return WronskianResult::NotFoundUpTo(bound);
            }
            i -= 1;
            let max_here = bound - (r - 1 - i) as u64;
            if tuple[i] < max_here {
                tuple[i] += 1;
                for j in i + 1..r {
                    tuple[j] = tuple[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The naive q-Casoratian `det(sigma^(i-1)(x_j))`, kept for contrast with
/// [`difference_orders`].
pub fn casoratian(ctx: &QContext, xs: &[RatFunc]) -> RatFunc {
    let r = xs.len();
    let rows = (0..r)
        .map(|i| {
            xs.iter()
                .map(|x| sigma_q_pow(ctx, i as i64, x))
                .collect::<Vec<_>>()
        })
        .collect();
    Mat::from_rows(rows).determinant()
}
