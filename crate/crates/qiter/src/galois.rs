//! p-adic digit machinery and Galois-group classification for the three
//! worked rank-1 and unipotent families.
//!
//! The classification dichotomies hinge on whether the digit sequence
//! `alpha = sum a_l p^l` is eventually periodic, i.e. whether alpha is
//! rational. Finite digit data can certify periodicity (and hence a finite
//! group) but can never certify aperiodicity, so explicit streams that look
//! aperiodic up to the stored bound are classified `UndecidedUpTo` rather
//! than as the full torus or additive group.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactfield::{FieldElement, Rat};
use crate::qarith::{q_binom, QContext};

/// A finite prefix of a p-adic digit stream, with its provenance: digits of
/// a known rational, or raw digits supplied as data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitStream {
    pub p: u64,
    pub digits: Vec<u64>,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Rational { a: BigInt, m: BigInt },
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupVerdict {
    Cyclic { order: BigInt },
    TorusGm,
    /// Finite subgroup of the additive group; the exact order is not
    /// computed, only finiteness is certified.
    AdditiveFinite,
    AdditiveGa,
    UndecidedUpTo { bound: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PeriodResult {
    Periodic { preperiod: usize, period: usize },
    NoPeriodUpTo(usize),
}

/// First `count` digits of the p-adic expansion of `a/m`, by the exact
/// integer iteration `digit = a m^{-1} mod p; a = (a - digit m)/p`.
pub fn padic_digits(a: i64, m: u64, p: u64, count: usize) -> Result<DigitStream> {
    padic_digits_big(&BigInt::from(a), &BigInt::from(m), p, count)
}

pub fn padic_digits_big(a: &BigInt, m: &BigInt, p: u64, count: usize) -> Result<DigitStream> {
    if m.is_zero() || m.gcd(&BigInt::from(p)) != BigInt::one() {
        return Err(Error::DenominatorDivisibleByP(p));
    }
    let p_big = BigInt::from(p);
    // m^{-1} mod p
    let m_red = m.mod_floor(&p_big).to_u64().unwrap();
    let m_inv = mod_inverse(m_red, p).expect("m invertible mod p");
    let mut cur = a.clone();
    let mut digits = Vec::with_capacity(count);
    for _ in 0..count {
        let c = cur.mod_floor(&p_big).to_u64().unwrap();
        let digit = (c as u128 * m_inv as u128 % p as u128) as u64;
        digits.push(digit);
        cur = (cur - BigInt::from(digit) * m) / &p_big;
    }
    Ok(DigitStream {
        p,
        digits,
        provenance: Provenance::Rational {
            a: a.clone(),
            m: m.clone(),
        },
    })
}

fn mod_inverse(a: u64, p: u64) -> Option<u64> {
    let (mut r0, mut r1) = (a as i128, p as i128);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(p as i128) as u64)
}

impl DigitStream {
    pub fn explicit(p: u64, digits: Vec<u64>) -> Result<DigitStream> {
        if digits.iter().any(|&d| d >= p) {
            return Err(Error::Invalid("digit out of range".into()));
        }
        Ok(DigitStream {
            p,
            digits,
            provenance: Provenance::Explicit,
        })
    }

    /// The rational this stream expands, when known or detectable.
    pub fn rational_value(&self) -> Option<Rat> {
        match &self.provenance {
            Provenance::Rational { a, m } => Some(Rat::new(a.clone(), m.clone())),
            Provenance::Explicit => match detect_period(self) {
                PeriodResult::Periodic { preperiod, period } => {
                    let pre = &self.digits[..preperiod];
                    let per = &self.digits[preperiod..preperiod + period];
                    Some(alpha_from_periodic(pre, per, self.p))
                }
                PeriodResult::NoPeriodUpTo(_) => None,
            },
        }
    }
}

/// Least `(preperiod s, period l)` in lexicographic order such that
/// `a_{i+l} = a_i` for all `s <= i < K - l`, requiring at least two full
/// period repetitions inside the window.
pub fn detect_period(d: &DigitStream) -> PeriodResult {
    let k = d.digits.len();
    for s in 0..k {
        let max_l = (k - s) / 2;
        for l in 1..=max_l {
            let ok = (s..k - l).all(|i| d.digits[i + l] == d.digits[i]);
            if ok {
                return PeriodResult::Periodic {
                    preperiod: s,
                    period: l,
                };
            }
        }
    }
    PeriodResult::NoPeriodUpTo(k)
}

/// The unique rational with the given eventually periodic expansion:
/// `A + p^s B / (1 - p^l)` in lowest terms. Round-trips through
/// [`padic_digits`].
pub fn alpha_from_periodic(preperiod: &[u64], period: &[u64], p: u64) -> Rat {
    assert!(!period.is_empty(), "period must be nonempty");
    let p_big = BigInt::from(p);
    let mut a = BigInt::zero();
    let mut pow = BigInt::one();
    for &d in preperiod {
        a += &pow * BigInt::from(d);
        pow *= &p_big;
    }
    let p_s = pow.clone();
    let mut b = BigInt::zero();
    let mut pow_b = BigInt::one();
    for &d in period {
        b += &pow_b * BigInt::from(d);
        pow_b *= &p_big;
    }
    let one_minus_pl = BigInt::one() - pow_b;
    Rat::from(a) + Rat::new(p_s * b, one_minus_pl)
}

/// Rank-1 family in characteristic p (`delta^(np^k)(y) = (a_k / t^{np^k}) y`):
/// rational alpha gives the cyclic group of order the reduced denominator;
/// aperiodic-so-far explicit data stays undecided (consistent with the
/// torus at this bound), never a certified torus.
pub fn classify_rank1_charp(d: &DigitStream) -> GroupVerdict {
    match d.rational_value() {
        Some(alpha) => GroupVerdict::Cyclic {
            order: alpha.denom().abs(),
        },
        None => GroupVerdict::UndecidedUpTo {
            bound: d.digits.len(),
        },
    }
}

/// Rank-1 family in characteristic 0 (`delta^(n)(y) = (a / (n t^n)) y`):
/// cyclic of order the reduced denominator of a/n when a is rational,
/// the torus otherwise. Here `a` is exact data, so the torus verdict is
/// certain.
pub fn classify_rank1_char0(a: &FieldElement, n: u64) -> GroupVerdict {
    match a.as_rational() {
        Some(r) => {
            let ratio = r / Rat::from(BigInt::from(n));
            GroupVerdict::Cyclic {
                order: ratio.denom().abs(),
            }
        }
        None => GroupVerdict::TorusGm,
    }
}

/// Unipotent family (`delta^(np^k)(Y) = [[0, a_k], [0, 0]] Y`): periodic or
/// rational digits give a finite subgroup of the additive group; otherwise
/// undecided at the stored bound.
pub fn classify_ga(d: &DigitStream) -> GroupVerdict {
    match d.rational_value() {
        Some(_) => GroupVerdict::AdditiveFinite,
        None => GroupVerdict::UndecidedUpTo {
            bound: d.digits.len(),
        },
    }
}

/// Executable witness linking digits to equations at integer exponents:
/// with `A = n sum_{l<K} a_l p^l`, checks `binom(A, n p^k)_q = a_k` in the
/// context's field for all `k < K`. Lucas' theorem forces this to hold.
pub fn monomial_solution_check(ctx: &QContext, d: &DigitStream, count: usize) -> bool {
    let p = ctx.tower().characteristic();
    assert_eq!(p, d.p, "context characteristic must match the digit stream");
    let n = ctx.n();
    let k_used = count.min(d.digits.len());
    let mut a_exp: u64 = 0;
    for (l, &digit) in d.digits.iter().take(k_used).enumerate() {
        a_exp += digit * n * p.pow(l as u32);
    }
    for (k, &digit) in d.digits.iter().take(k_used).enumerate() {
        let level = n * p.pow(k as u32);
        if q_binom(ctx, a_exp, level) != ctx.tower().from_i64(digit as i64) {
            return false;
        }
    }
    true
}

/// First `count` Thue-Morse digits (parity of popcount), an aperiodic
/// binary stream used as the standard undecidable example.
pub fn thue_morse_stream(count: usize) -> DigitStream {
    let digits = (0..count as u64)
        .map(|l| (l.count_ones() % 2) as u64)
        .collect();
    DigitStream {
        p: 2,
        digits,
        provenance: Provenance::Explicit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_examples() {
        assert_eq!(
            padic_digits(1, 3, 5, 6).unwrap().digits,
            vec![2, 3, 1, 3, 1, 3]
        );
        assert_eq!(padic_digits(7, 1, 5, 4).unwrap().digits, vec![2, 1, 0, 0]);
        assert_eq!(padic_digits(-1, 1, 3, 4).unwrap().digits, vec![2, 2, 2, 2]);
        assert!(matches!(
            padic_digits(1, 5, 5, 4),
            Err(Error::DenominatorDivisibleByP(5))
        ));
    }

    #[test]
    fn digits_sum_back_mod_powers() {
        // sum a_l 5^l = 1/3 mod 5^6, exactly
        let d = padic_digits(1, 3, 5, 6).unwrap();
        let mut acc = BigInt::zero();
        let mut pow = BigInt::one();
        for &digit in &d.digits {
            acc += &pow * BigInt::from(digit);
            pow *= 5;
        }
        // acc * 3 = 1 mod 5^6
        let p6 = BigInt::from(5u64).pow(6);
        assert_eq!((acc * BigInt::from(3)).mod_floor(&p6), BigInt::one().mod_floor(&p6));
    }

    #[test]
    fn period_detection() {
        let d = padic_digits(1, 3, 5, 6).unwrap();
        assert_eq!(
            detect_period(&d),
            PeriodResult::Periodic {
                preperiod: 1,
                period: 2
            }
        );
        let zeros = DigitStream::explicit(5, vec![0; 8]).unwrap();
        assert_eq!(
            detect_period(&zeros),
            PeriodResult::Periodic {
                preperiod: 0,
                period: 1
            }
        );
        let tm = thue_morse_stream(32);
        assert_eq!(detect_period(&tm), PeriodResult::NoPeriodUpTo(32));
    }

    #[test]
    fn alpha_reconstruction() {
        assert_eq!(
            alpha_from_periodic(&[2], &[3, 1], 5),
            Rat::new(BigInt::one(), BigInt::from(3))
        );
        assert_eq!(alpha_from_periodic(&[], &[0], 5), Rat::zero());
        assert_eq!(
            alpha_from_periodic(&[], &[4], 5),
            Rat::from(BigInt::from(-1))
        );
    }

    #[test]
    fn round_trip_small() {
        for p in [2u64, 3, 5, 7] {
            for m in 1..=12u64 {
                if m % p == 0 {
                    continue;
                }
                for a in -12..=12i64 {
                    let d = padic_digits(a, m, p, 96).unwrap();
                    match detect_period(&d) {
                        PeriodResult::Periodic { preperiod, period } => {
                            let alpha = alpha_from_periodic(
                                &d.digits[..preperiod],
                                &d.digits[preperiod..preperiod + period],
                                p,
                            );
                            assert_eq!(
                                alpha,
                                Rat::new(BigInt::from(a), BigInt::from(m)),
                                "a={a} m={m} p={p}"
                            );
                        }
                        PeriodResult::NoPeriodUpTo(_) => panic!("rational must be periodic"),
                    }
                }
            }
        }
    }

    #[test]
    fn classification_examples() {
        let d = padic_digits(1, 3, 5, 24).unwrap();
        assert_eq!(
            classify_rank1_charp(&d),
            GroupVerdict::Cyclic {
                order: BigInt::from(3)
            }
        );
        let d = padic_digits(4, 1, 5, 24).unwrap();
        assert_eq!(
            classify_rank1_charp(&d),
            GroupVerdict::Cyclic {
                order: BigInt::one()
            }
        );
        let tm = thue_morse_stream(32);
        assert_eq!(
            classify_rank1_charp(&tm),
            GroupVerdict::UndecidedUpTo { bound: 32 }
        );
        assert_eq!(
            classify_ga(&tm),
            GroupVerdict::UndecidedUpTo { bound: 32 }
        );
        assert_eq!(classify_ga(&padic_digits(1, 3, 5, 24).unwrap()), GroupVerdict::AdditiveFinite);
        assert_eq!(
            classify_ga(&DigitStream::explicit(5, vec![0; 10]).unwrap()),
            GroupVerdict::AdditiveFinite
        );
    }

    #[test]
    fn classification_char0_examples() {
        let ctx = crate::qarith::QContext::cyclotomic(3).unwrap();
        let n = ctx.n();
        // a = 2n/5 -> order 5
        let a = ctx
            .tower()
            .from_rat(&Rat::new(BigInt::from(2 * n), BigInt::from(5)))
            .unwrap();
        assert_eq!(
            classify_rank1_char0(&a, n),
            GroupVerdict::Cyclic {
                order: BigInt::from(5)
            }
        );
        // a = n -> trivial group
        let a = ctx.tower().from_i64(n as i64);
        assert_eq!(
            classify_rank1_char0(&a, n),
            GroupVerdict::Cyclic {
                order: BigInt::one()
            }
        );
        // a = sqrt2 in Q(sqrt2) -> torus
        let sqrt2_tower = crate::exactfield::make_tower(
            0,
            vec![
                crate::exactfield::Scalar::Rat(Rat::from(BigInt::from(-2))),
                crate::exactfield::Scalar::Rat(Rat::zero()),
                crate::exactfield::Scalar::Rat(Rat::one()),
            ],
        )
        .unwrap();
        let sqrt2 = sqrt2_tower.generator();
        assert_eq!(classify_rank1_char0(&sqrt2, 2), GroupVerdict::TorusGm);
    }

    #[test]
    fn monomial_check_examples() {
        // digits [2, 1], p = 5, n = 2: A = 14; C(7,1) = 7 = 2 mod 5, C(7,5) = 21 = 1 mod 5
        let ctx = crate::qarith::QContext::prime_power(5, 2).unwrap();
        let d = DigitStream::explicit(5, vec![2, 1]).unwrap();
        assert!(monomial_solution_check(&ctx, &d, 2));
        let d = DigitStream::explicit(5, vec![0, 0, 0]).unwrap();
        assert!(monomial_solution_check(&ctx, &d, 3));
        let d = DigitStream::explicit(5, vec![1]).unwrap();
        assert!(monomial_solution_check(&ctx, &d, 1));
    }
}
