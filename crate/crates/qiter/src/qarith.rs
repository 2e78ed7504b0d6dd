//! q-integers, q-factorials and Gaussian binomial coefficients over a field
//! tower with a designated primitive n-th root of unity q.
//!
//! At a root of unity the q-factorial quotient is ill-defined for large
//! arguments ([k]_q! vanishes for k >= n), so q-binomials are computed by
//! the q-Pascal recursion
//!     B(r, k) = B(r-1, k-1) + q^k * B(r-1, k),
//! which agrees with the quotient wherever both are defined. The table is
//! memoized per context because the operator towers re-query it heavily.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactfield::{
    find_root_of_unity, make_tower, mult_order, FieldElement, FieldTower, Rat, Scalar,
};
use crate::ratfunc::{DeltaFamily, RatFunc};

/// A tower plus a verified primitive n-th root of unity q (n >= 2; q = 1 is
/// rejected). Contexts are immutable; the internal memo tables are
/// synchronized, so a context can be shared freely across threads.
pub struct QContext {
    tower: Arc<FieldTower>,
    q: FieldElement,
    n: u64,
    qpow: Vec<FieldElement>,
    binom: Mutex<BinomTable>,
    pub(crate) delta_cache: Mutex<HashMap<RatFunc, DeltaFamily>>,
}

struct BinomTable {
    /// rows[r][k] = B(r, k) for k <= min(r, kmax)
    rows: Vec<Vec<FieldElement>>,
    kmax: usize,
}

impl std::fmt::Debug for QContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QContext")
            .field("tower", &format!("{}", self.tower))
            .field("q", &format!("{}", self.q))
            .field("n", &self.n)
            .finish()
    }
}

impl QContext {
    pub fn new(tower: Arc<FieldTower>, q: FieldElement, n: u64) -> Result<Arc<QContext>> {
        if n < 2 || q.is_one() {
            return Err(Error::InvalidQ);
        }
        match mult_order(&q, n)? {
            Some(k) if k == n => {}
            _ => return Err(Error::InvalidQ),
        }
        let mut qpow = Vec::with_capacity(n as usize);
        let mut acc = tower.one();
        for _ in 0..n {
            qpow.push(acc.clone());
            acc = acc.mul(&q);
        }
        Ok(Arc::new(QContext {
            tower,
            q,
            n,
            qpow,
            binom: Mutex::new(BinomTable {
                rows: Vec::new(),
                kmax: 0,
            }),
            delta_cache: Mutex::new(HashMap::new()),
        }))
    }

    /// Context over `Q(zeta_n)` presented by the n-th cyclotomic polynomial,
    /// with q the deterministic root returned by [`find_root_of_unity`].
    pub fn cyclotomic(n: u64) -> Result<Arc<QContext>> {
        let tower = cyclotomic_tower(n)?;
        let q = find_root_of_unity(&tower, n)?;
        QContext::new(tower, q, n)
    }

    /// Context over the smallest field `F_{p^k}` containing an element of
    /// order n, with a deterministically chosen modulus and root.
    pub fn prime_power(p: u64, n: u64) -> Result<Arc<QContext>> {
        let tower = prime_power_tower(p, n)?;
        let q = find_root_of_unity(&tower, n)?;
        QContext::new(tower, q, n)
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn q(&self) -> &FieldElement {
        &self.q
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// q^e for any integer e (exponents live mod n).
    pub fn q_pow(&self, e: i64) -> FieldElement {
        let idx = e.rem_euclid(self.n as i64) as usize;
        self.qpow[idx].clone()
    }

    pub fn one(&self) -> FieldElement {
        self.tower.one()
    }

    pub fn zero(&self) -> FieldElement {
        self.tower.zero()
    }
}

/// [k]_q = (q^k - 1)/(q - 1); [0]_q = 0.
pub fn q_int(ctx: &QContext, k: u64) -> FieldElement {
    let qk = ctx.q_pow(k as i64);
    let num = qk.sub(&ctx.one());
    let den = ctx.q().sub(&ctx.one());
    num.div(&den).expect("q != 1")
}

/// [k]_q! = [k]_q [k-1]_q ... [1]_q, with [0]_q! = 1. Vanishes exactly when
/// k >= n.
pub fn q_factorial(ctx: &QContext, k: u64) -> FieldElement {
    if k >= ctx.n() {
        return ctx.zero();
    }
    let mut acc = ctx.one();
    for i in 1..=k {
        acc = acc.mul(&q_int(ctx, i));
    }
    acc
}

/// The Gaussian binomial coefficient, well defined at roots of unity.
/// Returns 0 for k > r.
pub fn q_binom(ctx: &QContext, r: u64, k: u64) -> FieldElement {
    if k > r {
        return ctx.zero();
    }
    if k == 0 || k == r {
        return ctx.one();
    }
    let r = r as usize;
    let k = k as usize;
    let mut table = ctx.binom.lock().unwrap();
    if k > table.kmax {
        table.kmax = k.max(table.kmax * 2).max(16);
        table.rows.clear();
    }
    while table.rows.len() <= r {
        let row_idx = table.rows.len();
        let width = row_idx.min(table.kmax);
        let mut row = Vec::with_capacity(width + 1);
        row.push(ctx.one());
        for kk in 1..=width {
            let up_left = table.rows[row_idx - 1]
                .get(kk - 1)
                .cloned()
                .unwrap_or_else(|| ctx.zero());
            let up = table.rows[row_idx - 1]
                .get(kk)
                .cloned()
                .unwrap_or_else(|| ctx.zero());
            row.push(up_left.add(&ctx.q_pow(kk as i64).mul(&up)));
        }
        table.rows.push(row);
    }
    table.rows[r][k].clone()
}

/// Coefficients of (t; q)_m = (1-t)(1-qt)...(1-q^{m-1}t), low-to-high,
/// length m+1.
pub fn pochhammer_coeffs(ctx: &QContext, m: u64) -> Vec<FieldElement> {
    let mut coeffs = vec![ctx.one()];
    for j in 0..m {
        let qj = ctx.q_pow(j as i64);
        let mut next = Vec::with_capacity(coeffs.len() + 1);
        for i in 0..=coeffs.len() {
            let keep = if i < coeffs.len() {
                coeffs[i].clone()
            } else {
                ctx.zero()
            };
            let shift = if i > 0 {
                qj.mul(&coeffs[i - 1])
            } else {
                ctx.zero()
            };
            next.push(keep.sub(&shift));
        }
        coeffs = next;
    }
    coeffs
}

/// Closed form of the same coefficients: (-1)^j binom(m, j)_q q^{j(j-1)/2}.
/// Kept separate so the product expansion can be tested against it.
pub fn pochhammer_closed_form(ctx: &QContext, m: u64) -> Vec<FieldElement> {
    (0..=m)
        .map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            let e = (j as i64) * (j as i64 - 1) / 2;
            q_binom(ctx, m, j)
                .mul(&ctx.q_pow(e))
                .mul(&ctx.tower().from_i64(sign))
        })
        .collect()
}

/// Image of the ordinary binomial C(a, b) in the tower.
pub fn binomial_image(ctx: &QContext, a: u64, b: u64) -> FieldElement {
    if b > a {
        return ctx.zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..b {
        num *= BigInt::from(a - i);
        den *= BigInt::from(i + 1);
    }
    let r = BigRational::new(num, den);
    ctx.tower().from_rat(&r).expect("binomial is an integer")
}

/// The n-th cyclotomic polynomial as a characteristic-0 tower.
pub fn cyclotomic_tower(n: u64) -> Result<Arc<FieldTower>> {
    let phi = cyclotomic_poly(n);
    let coeffs = phi.into_iter().map(Scalar::Rat).collect();
    make_tower(0, coeffs)
}

fn cyclotomic_poly(n: u64) -> Vec<Rat> {
    use crate::exactfield::Rat;
    // x^n - 1 divided by all phi_d for proper divisors d
    fn poly_div(num: &[Rat], den: &[Rat]) -> Vec<Rat> {
        let mut rem = num.to_vec();
        let dd = den.len() - 1;
        let mut quot = vec![Rat::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd].clone() / den[dd].clone();
            quot[i] = c.clone();
            for j in 0..=dd {
                let t = c.clone() * den[j].clone();
                rem[i + j] -= t;
            }
        }
        quot
    }
    fn phi(n: u64, memo: &mut HashMap<u64, Vec<Rat>>) -> Vec<Rat> {
        if let Some(p) = memo.get(&n) {
            return p.clone();
        }
        let mut num = vec![Rat::zero(); n as usize + 1];
        num[0] = -Rat::one();
        num[n as usize] = Rat::one();
        let mut acc = num;
        for d in 1..n {
            if n % d == 0 {
                let pd = phi(d, memo);
                acc = poly_div(&acc, &pd);
            }
        }
        memo.insert(n, acc.clone());
        acc
    }
    let mut memo = HashMap::new();
    phi(n, &mut memo)
}

/// Smallest extension F_{p^k} with n | p^k - 1, with the lexicographically
/// first irreducible monic modulus of that degree.
pub fn prime_power_tower(p: u64, n: u64) -> Result<Arc<FieldTower>> {
    if n % p == 0 {
        return Err(Error::NoSuchRoot { n });
    }
    let mut k = 1u32;
    loop {
        let order = (p as u128).pow(k) - 1;
        if order % n as u128 == 0 {
            break;
        }
        k += 1;
        if k > 32 {
            return Err(Error::NoSuchRoot { n });
        }
    }
    if k == 1 {
        return make_tower(p, vec![Scalar::Mod(0), Scalar::Mod(1)]);
    }
    let total = (p as u128).pow(k);
    for idx in 0..total {
        let mut coeffs = Vec::with_capacity(k as usize + 1);
        let mut v = idx;
        for _ in 0..k {
            coeffs.push(Scalar::Mod((v % p as u128) as u64));
            v /= p as u128;
        }
        coeffs.push(Scalar::Mod(1));
        if let Ok(t) = make_tower(p, coeffs) {
            return Ok(t);
        }
    }
    Err(Error::NoSuchRoot { n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_int_examples() {
        let ctx = QContext::cyclotomic(3).unwrap();
        assert!(q_int(&ctx, 3).is_zero());
        assert!(q_int(&ctx, 1).is_one());
        let expected = ctx.one().add(ctx.q());
        assert_eq!(q_int(&ctx, 2), expected);
        assert!(q_int(&ctx, 0).is_zero());
    }

    #[test]
    fn q_factorial_examples() {
        let ctx = QContext::cyclotomic(3).unwrap();
        assert!(q_factorial(&ctx, 0).is_one());
        assert!(q_factorial(&ctx, 3).is_zero());
        assert_eq!(q_factorial(&ctx, 2), ctx.one().add(ctx.q()));
    }

    #[test]
    fn q_binom_examples() {
        let ctx = QContext::cyclotomic(3).unwrap();
        assert!(q_binom(&ctx, 7, 0).is_one());
        assert!(q_binom(&ctx, 7, 7).is_one());
        assert_eq!(q_binom(&ctx, 6, 3), ctx.tower().from_i64(2));
        assert!(q_binom(&ctx, 3, 1).is_zero());
        assert!(q_binom(&ctx, 2, 5).is_zero());
        assert!(q_binom(&ctx, 0, 0).is_one());
    }

    #[test]
    fn q_binom_matches_factorial_quotient_when_defined() {
        for n in [2u64, 3, 5] {
            let ctx = QContext::cyclotomic(n).unwrap();
            for r in 0..n {
                for k in 0..=r {
                    let den = q_factorial(&ctx, k).mul(&q_factorial(&ctx, r - k));
                    let quot = q_factorial(&ctx, r).div(&den).unwrap();
                    assert_eq!(q_binom(&ctx, r, k), quot);
                }
            }
        }
    }

    #[test]
    fn pochhammer_examples() {
        let ctx = QContext::cyclotomic(3).unwrap();
        assert_eq!(pochhammer_coeffs(&ctx, 0), vec![ctx.one()]);
        assert_eq!(
            pochhammer_coeffs(&ctx, 1),
            vec![ctx.one(), ctx.one().neg()]
        );
        let two = pochhammer_coeffs(&ctx, 2);
        assert_eq!(two[0], ctx.one());
        assert_eq!(two[1], ctx.one().add(ctx.q()).neg());
        assert_eq!(two[2], ctx.q().clone());
    }

    #[test]
    fn pochhammer_closed_form_matches_product() {
        for n in [2u64, 3, 4] {
            let ctx = QContext::cyclotomic(n).unwrap();
            for m in 0..=15 {
                assert_eq!(pochhammer_coeffs(&ctx, m), pochhammer_closed_form(&ctx, m));
            }
        }
    }

    #[test]
    fn multiplicativity_at_roots_of_unity() {
        for n in [2u64, 3, 5] {
            let ctx = QContext::cyclotomic(n).unwrap();
            for a in 0..=8 {
                for b in 0..=a {
                    assert_eq!(
                        q_binom(&ctx, a * n, b * n),
                        binomial_image(&ctx, a, b),
                        "n={n} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn vandermonde_small() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in [2u64, 3, 4] {
            let ctx = QContext::cyclotomic(n).unwrap();
            for _ in 0..30 {
                let r = rng.gen_range(0..=20u64);
                let s = rng.gen_range(0..=20u64);
                let k = rng.gen_range(0..=(r + s));
                let mut lhs = ctx.zero();
                for i in 0..=k.min(s) {
                    let j = k - i;
                    if j > r {
                        continue;
                    }
                    let term = q_binom(&ctx, r, j)
                        .mul(&q_binom(&ctx, s, i))
                        .mul(&ctx.q_pow((i * (r - j)) as i64));
                    lhs = lhs.add(&term);
                }
                assert_eq!(lhs, q_binom(&ctx, r + s, k), "n={n} r={r} s={s} k={k}");
            }
        }
    }

    #[test]
    fn char_p_vanishing() {
        // q of order 2 in F_5: remark says binom(n p^j, n i)_q = 0 for p^j > i > 0
        let ctx = QContext::prime_power(5, 2).unwrap();
        for i in 1..5u64 {
            assert!(q_binom(&ctx, 2 * 5, 2 * i).is_zero(), "i={i}");
        }
        let ctx = QContext::prime_power(7, 3).unwrap();
        for i in 1..7u64 {
            assert!(q_binom(&ctx, 3 * 7, 3 * i).is_zero(), "i={i}");
        }
    }

    #[test]
    fn prime_power_contexts() {
        // n = 3 needs F_4 over p = 2
        let ctx = QContext::prime_power(2, 3).unwrap();
        assert_eq!(ctx.tower().degree(), 2);
        assert_eq!(mult_order(ctx.q(), 10).unwrap(), Some(3));
        let ctx = QContext::prime_power(13, 6).unwrap();
        assert_eq!(ctx.tower().degree(), 1);
    }

    #[test]
    fn rejects_bad_q() {
        let t = cyclotomic_tower(3).unwrap();
        assert!(QContext::new(t.clone(), t.one(), 1).is_err());
        assert!(QContext::new(t.clone(), t.generator(), 2).is_err());
    }
}
