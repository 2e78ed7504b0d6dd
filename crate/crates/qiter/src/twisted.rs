//! The twisted ring of truncated formal power series `R^{sigma_q}[[T]]`.
//!
//! Addition is coefficient-wise; the product twists coefficients past each
//! other: `a T^r * b T^k = sigma_q^r(b) a T^(r+k)`. The Taylor map
//! `a -> sum_k delta^(k)(a) T^k` is a ring homomorphism into this ring, and
//! inverting a Taylor series gives an independent route to `delta` on
//! fractions — the central dual-path oracle of the crate.
//!
//! Truncation is explicit and carried by the value. Operations that would
//! need coefficients beyond the stored truncation refuse instead of
//! silently zero-filling, since silent truncation would corrupt oracle
//! comparisons.

use crate::error::{Error, Result};
use crate::qarith::{q_binom, QContext};
use crate::ratfunc::{delta, sigma_q_pow, RatFunc};

/// Truncated twisted series: `coeffs[k]` is the coefficient of `T^k`,
/// `k <= truncation`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedSeries {
    coeffs: Vec<RatFunc>,
}

impl TwistedSeries {
    pub fn from_coeffs(coeffs: Vec<RatFunc>) -> TwistedSeries {
        assert!(!coeffs.is_empty(), "a series stores at least T^0");
        TwistedSeries { coeffs }
    }

    pub fn one(ctx: &QContext, truncation: usize) -> TwistedSeries {
        let mut coeffs = vec![RatFunc::zero(ctx.tower()); truncation + 1];
        coeffs[0] = RatFunc::one(ctx.tower());
        TwistedSeries { coeffs }
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &RatFunc {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(RatFunc::is_zero)
    }

    pub fn add(&self, other: &TwistedSeries) -> Result<TwistedSeries> {
        check_truncation(self, other)?;
        Ok(TwistedSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }
}

fn check_truncation(a: &TwistedSeries, b: &TwistedSeries) -> Result<()> {
    if a.truncation() != b.truncation() {
        return Err(Error::TruncationMismatch {
            left: a.truncation(),
            right: b.truncation(),
        });
    }
    Ok(())
}

/// Twisted product: the coefficient of `T^m` is
/// `sum_{r+k=m} sigma_q^r(B_k) A_r`. Noncommutative, associative, unital.
pub fn star_mul(ctx: &QContext, a: &TwistedSeries, b: &TwistedSeries) -> Result<TwistedSeries> {
    check_truncation(a, b)?;
    let nn = a.truncation();
    let mut coeffs = Vec::with_capacity(nn + 1);
    for m in 0..=nn {
        let mut acc = RatFunc::zero(ctx.tower());
        for r in 0..=m {
            let k = m - r;
            if a.coeffs[r].is_zero() || b.coeffs[k].is_zero() {
                continue;
            }
            acc = acc.add(&sigma_q_pow(ctx, r as i64, &b.coeffs[k]).mul(&a.coeffs[r]));
        }
        coeffs.push(acc);
    }
    Ok(TwistedSeries { coeffs })
}

/// The q-iterative Taylor series of `a`: coefficients `delta^(k)(a)` for
/// `k <= truncation`. The constant coefficient recovers `a`.
pub fn taylor(ctx: &QContext, a: &RatFunc, truncation: usize) -> TwistedSeries {
    let coeffs = (0..=truncation as u64).map(|k| delta(ctx, k, a)).collect();
    TwistedSeries { coeffs }
}

/// Two-sided star-inverse by forward substitution; only the constant term
/// is ever divided by.
pub fn star_inverse(ctx: &QContext, a: &TwistedSeries) -> Result<TwistedSeries> {
    if a.coeffs[0].is_zero() {
        return Err(Error::NotInvertible);
    }
    let a0_inv = a.coeffs[0].inv().expect("nonzero constant term");
    let nn = a.truncation();
    let mut b: Vec<RatFunc> = Vec::with_capacity(nn + 1);
    b.push(a0_inv.clone());
    for m in 1..=nn {
        // sum_{r=0..m} sigma^r(B_{m-r}) A_r = 0, solve for B_m (the r = 0 term)
        let mut acc = RatFunc::zero(ctx.tower());
        for r in 1..=m {
            if a.coeffs[r].is_zero() {
                continue;
            }
            acc = acc.add(&sigma_q_pow(ctx, r as i64, &b[m - r]).mul(&a.coeffs[r]));
        }
        b.push(acc.neg().mul(&a0_inv));
    }
    Ok(TwistedSeries { coeffs: b })
}

/// The series route to `delta^(k)(a/b)`: coefficient `k` of
/// `T_a(T) * T_b(T)^{-1}`. Must agree with [`crate::ratfunc::delta`].
pub fn delta_via_series(ctx: &QContext, k: u64, a: &RatFunc, b: &RatFunc) -> Result<RatFunc> {
    if b.is_zero() {
        return Err(Error::NotInvertible);
    }
    let ta = taylor(ctx, a, k as usize);
    let tb_inv = star_inverse(ctx, &taylor(ctx, b, k as usize))?;
    let quot = star_mul(ctx, &ta, &tb_inv)?;
    Ok(quot.coeff(k as usize).clone())
}

/// `delta_T^(k)` on the series ring: `T^r -> binom(r, k)_q T^(r-k)`,
/// extended coefficient-linearly. The truncation drops by `k`.
pub fn delta_t(ctx: &QContext, k: u64, a: &TwistedSeries) -> TwistedSeries {
    let nn = a.truncation();
    let new_trunc = nn.saturating_sub(k as usize);
    let mut coeffs = Vec::with_capacity(new_trunc + 1);
    for r in 0..=new_trunc {
        let src = r as u64 + k;
        let w = q_binom(ctx, src, k);
        coeffs.push(a.coeffs[src as usize].scale(&w));
    }
    TwistedSeries { coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::QContext;
    use crate::ratfunc::parse;
    use std::sync::Arc;

    fn ctx3() -> Arc<QContext> {
        QContext::cyclotomic(3).unwrap()
    }

    #[test]
    fn star_mul_defining_rule() {
        let ctx = ctx3();
        let t = RatFunc::var(ctx.tower());
        let zero = RatFunc::zero(ctx.tower());
        // (t*T) * (t*T^0) = q t^2 T
        let a = TwistedSeries::from_coeffs(vec![zero.clone(), t.clone()]);
        let b = TwistedSeries::from_coeffs(vec![t.clone(), zero.clone()]);
        let prod = star_mul(&ctx, &a, &b).unwrap();
        assert!(prod.coeff(0).is_zero());
        assert_eq!(*prod.coeff(1), t.mul(&t).scale(ctx.q()));
    }

    #[test]
    fn unit_laws_and_noncommutativity() {
        let ctx = ctx3();
        let a = taylor(&ctx, &parse(&ctx, "(t^2+1)/(t-1)").unwrap(), 4);
        let one = TwistedSeries::one(&ctx, 4);
        assert_eq!(star_mul(&ctx, &a, &one).unwrap(), a);
        assert_eq!(star_mul(&ctx, &one, &a).unwrap(), a);
        // (t T) * (1 T) = t T^2 but (1 T) * (t T) = q t T^2
        let t = RatFunc::var(ctx.tower());
        let one_f = RatFunc::one(ctx.tower());
        let zero = RatFunc::zero(ctx.tower());
        let tt = TwistedSeries::from_coeffs(vec![zero.clone(), t.clone(), zero.clone()]);
        let ot = TwistedSeries::from_coeffs(vec![zero.clone(), one_f, zero.clone()]);
        let ab = star_mul(&ctx, &tt, &ot).unwrap();
        let ba = star_mul(&ctx, &ot, &tt).unwrap();
        assert_eq!(*ab.coeff(2), t);
        assert_eq!(*ba.coeff(2), t.scale(ctx.q()));
        assert_ne!(ab, ba);
    }

    #[test]
    fn taylor_examples() {
        let ctx = ctx3();
        let t = RatFunc::var(ctx.tower());
        let s = taylor(&ctx, &t, 2);
        assert_eq!(*s.coeff(0), t);
        assert!(s.coeff(1).is_one());
        assert!(s.coeff(2).is_zero());
        // coefficient n of taylor(t^n) is 1
        let n = ctx.n();
        let tn = t.pow(n as i64).unwrap();
        let s = taylor(&ctx, &tn, n as usize);
        assert!(s.coeff(n as usize).is_one());
        // constants: [c, 0, ..., 0]
        let c = parse(&ctx, "7/2").unwrap();
        let s = taylor(&ctx, &c, 3);
        assert_eq!(*s.coeff(0), c);
        assert!(s.coeffs()[1..].iter().all(RatFunc::is_zero));
    }

    #[test]
    fn star_inverse_examples() {
        let ctx = ctx3();
        let one = TwistedSeries::one(&ctx, 3);
        assert_eq!(star_inverse(&ctx, &one).unwrap(), one);
        let t = RatFunc::var(ctx.tower());
        let inv = star_inverse(&ctx, &taylor(&ctx, &t, 3)).unwrap();
        assert_eq!(*inv.coeff(0), t.inv().unwrap());
        // both-sided inverse on a sample fraction
        let b = taylor(&ctx, &parse(&ctx, "(t^2-2)/(t+1)").unwrap(), 4);
        let binv = star_inverse(&ctx, &b).unwrap();
        assert!(star_mul(&ctx, &b, &binv).unwrap().is_one());
        assert!(star_mul(&ctx, &binv, &b).unwrap().is_one());
        // zero constant term is not invertible
        let zero_head = taylor(&ctx, &t, 2);
        let mut coeffs = zero_head.coeffs().to_vec();
        coeffs[0] = RatFunc::zero(ctx.tower());
        assert!(matches!(
            star_inverse(&ctx, &TwistedSeries::from_coeffs(coeffs)),
            Err(Error::NotInvertible)
        ));
    }

    #[test]
    fn series_delta_matches_direct_delta() {
        let ctx = ctx3();
        let a = parse(&ctx, "1").unwrap();
        let b = RatFunc::var(ctx.tower());
        let lhs = delta_via_series(&ctx, 1, &a, &b).unwrap();
        assert_eq!(lhs, crate::ratfunc::delta(&ctx, 1, &a.div(&b).unwrap()));
        // k = 0 recovers a/b
        let a = parse(&ctx, "t^2+1").unwrap();
        let b = parse(&ctx, "t-1").unwrap();
        assert_eq!(
            delta_via_series(&ctx, 0, &a, &b).unwrap(),
            a.div(&b).unwrap()
        );
        for k in 1..=4 {
            assert_eq!(
                delta_via_series(&ctx, k, &a, &b).unwrap(),
                crate::ratfunc::delta(&ctx, k, &a.div(&b).unwrap()),
                "k={k}"
            );
        }
    }

    #[test]
    fn delta_t_examples() {
        let ctx = ctx3();
        let n = ctx.n();
        // delta_T^(1)(T) = 1
        let zero = RatFunc::zero(ctx.tower());
        let one = RatFunc::one(ctx.tower());
        let series_t = TwistedSeries::from_coeffs(vec![zero.clone(), one.clone()]);
        let d = delta_t(&ctx, 1, &series_t);
        assert_eq!(d.truncation(), 0);
        assert!(d.coeff(0).is_one());
        // delta_T^(n)(T^n) = 1
        let mut coeffs = vec![zero.clone(); n as usize + 1];
        coeffs[n as usize] = one.clone();
        let series_tn = TwistedSeries::from_coeffs(coeffs);
        let d = delta_t(&ctx, n, &series_tn);
        assert!(d.coeff(0).is_one());
        // commutation with the Taylor map, up to truncation
        let a = parse(&ctx, "(t^3+g)/(t-2)").unwrap();
        for k in 0..=2u64 {
            let lhs = delta_t(&ctx, k, &taylor(&ctx, &a, 6));
            let rhs = taylor(&ctx, &crate::ratfunc::delta(&ctx, k, &a), 6 - k as usize);
            assert_eq!(lhs, rhs, "k={k}");
        }
    }

    #[test]
    fn taylor_is_ring_homomorphism() {
        let ctx = ctx3();
        let a = parse(&ctx, "(t+1)/(t-1)").unwrap();
        let b = parse(&ctx, "(t^2+g)/(t+2)").unwrap();
        let lhs = taylor(&ctx, &a.mul(&b), 5);
        let rhs = star_mul(&ctx, &taylor(&ctx, &a, 5), &taylor(&ctx, &b, 5)).unwrap();
        assert_eq!(lhs, rhs);
        // commuting images: T_a * T_b = T_b * T_a
        let sym = star_mul(&ctx, &taylor(&ctx, &b, 5), &taylor(&ctx, &a, 5)).unwrap();
        assert_eq!(rhs, sym);
    }

    #[test]
    fn truncation_mismatch_is_refused() {
        let ctx = ctx3();
        let a = TwistedSeries::one(&ctx, 3);
        let b = TwistedSeries::one(&ctx, 4);
        assert!(matches!(
            star_mul(&ctx, &a, &b),
            Err(Error::TruncationMismatch { left: 3, right: 4 })
        ));
    }
}
