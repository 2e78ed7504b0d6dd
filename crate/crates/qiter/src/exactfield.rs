//! Exact arithmetic in field towers `K = P[x]/(f)` where `P` is `Q` or `F_p`.
//!
//! A tower is the prime field plus at most one algebraic generator. This is
//! where `q` and all scalar coefficients live. Characteristic-0 elements can
//! be reduced at finite places (a prime `p` together with an irreducible
//! factor of the modulus mod `p`), which drives the curvature surveys.
//!
//! All arithmetic is exact: rationals are arbitrary precision, residues are
//! computed mod `p`. There is no floating point anywhere in this crate.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// A prime-field scalar: a rational in characteristic 0, a residue in
/// characteristic `p` (stored as its representative in `0..p`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(Rat),
    Mod(u64),
}

impl Scalar {
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Mod(v) => *v == 0,
        }
    }
}

/// Prime-field context; `p == 0` stands for `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct PrimeField {
    pub p: u64,
}

impl PrimeField {
    pub fn zero(&self) -> Scalar {
        if self.p == 0 {
            Scalar::Rat(Rat::zero())
        } else {
            Scalar::Mod(0)
        }
    }

    pub fn one(&self) -> Scalar {
        if self.p == 0 {
            Scalar::Rat(Rat::one())
        } else {
            Scalar::Mod(1)
        }
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        if self.p == 0 {
            Scalar::Rat(Rat::from(BigInt::from(v)))
        } else {
            Scalar::Mod(v.rem_euclid(self.p as i64) as u64)
        }
    }

    /// Maps a rational into the field; in characteristic p the denominator
    /// must be invertible mod p.
    pub fn from_rat(&self, r: &Rat) -> Result<Scalar> {
        if self.p == 0 {
            return Ok(Scalar::Rat(r.clone()));
        }
        let p_big = BigInt::from(self.p);
        let den = r.denom().mod_floor(&p_big);
        let den = den.to_u64().expect("residue fits u64");
        if den == 0 {
            return Err(Error::DenominatorDivisibleByP(self.p));
        }
        let num = r.numer().mod_floor(&p_big).to_u64().expect("residue fits u64");
        let dinv = self.inv_mod(den).expect("denominator unit mod p");
        Ok(Scalar::Mod(self.mul_mod(num, dinv)))
    }

    fn mul_mod(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    fn inv_mod(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        // extended Euclid on (a, p)
        let (mut r0, mut r1) = (a as i128, self.p as i128);
        let (mut s0, mut s1) = (1i128, 0i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        if r0 != 1 {
            return None;
        }
        Some(s0.rem_euclid(self.p as i128) as u64)
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u128 + *y as u128) % self.p as u128) as u64)
            }
            _ => panic!("mixed scalar kinds"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Rat(x) => Scalar::Rat(-x),
            Scalar::Mod(x) => Scalar::Mod(if *x == 0 { 0 } else { self.p - *x }),
        }
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (a, b) {
            (Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Scalar::Mod(x), Scalar::Mod(y)) => Scalar::Mod(self.mul_mod(*x, *y)),
            _ => panic!("mixed scalar kinds"),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        match a {
            Scalar::Rat(x) => {
                if x.is_zero() {
                    None
                } else {
                    Some(Scalar::Rat(x.recip()))
                }
            }
            Scalar::Mod(x) => self.inv_mod(*x).map(Scalar::Mod),
        }
    }
}

// ---------------------------------------------------------------------------
// Polynomials over the prime field (used for modulus work and factoring).
// Representation: coefficient vector low-to-high, trimmed of trailing zeros.
// ---------------------------------------------------------------------------

pub(crate) fn pf_trim(mut v: Vec<Scalar>) -> Vec<Scalar> {
    while v.last().map(Scalar::is_zero).unwrap_or(false) {
        v.pop();
    }
    v
}

pub(crate) fn pf_deg(v: &[Scalar]) -> Option<usize> {
    if v.is_empty() {
        None
    } else {
        Some(v.len() - 1)
    }
}

pub(crate) fn pf_add(pf: PrimeField, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(a.len().max(b.len()));
    for i in 0..a.len().max(b.len()) {
        let x = a.get(i).cloned().unwrap_or_else(|| pf.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| pf.zero());
        out.push(pf.add(&x, &y));
    }
    pf_trim(out)
}

pub(crate) fn pf_mul(pf: PrimeField, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![pf.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = pf.add(&out[i + j], &pf.mul(x, y));
        }
    }
    pf_trim(out)
}

/// Division with remainder by a nonzero divisor (made monic internally).
pub(crate) fn pf_divmod(pf: PrimeField, a: &[Scalar], b: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
    let db = pf_deg(b).expect("division by zero polynomial");
    let lead_inv = pf.inv(&b[db]).expect("leading coefficient invertible");
    let mut rem: Vec<Scalar> = a.to_vec();
    let mut quot = vec![pf.zero(); a.len().saturating_sub(db)];
    while let Some(dr) = pf_deg(&rem) {
        if dr < db {
            break;
        }
        let c = pf.mul(&rem[dr], &lead_inv);
        quot[dr - db] = c.clone();
        for i in 0..=db {
            let t = pf.mul(&c, &b[i]);
            rem[dr - db + i] = pf.sub(&rem[dr - db + i], &t);
        }
        rem = pf_trim(rem);
    }
    (pf_trim(quot), rem)
}

pub(crate) fn pf_rem(pf: PrimeField, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    pf_divmod(pf, a, b).1
}

pub(crate) fn pf_monic(pf: PrimeField, a: &[Scalar]) -> Vec<Scalar> {
    match pf_deg(a) {
        None => Vec::new(),
        Some(d) => {
            let inv = pf.inv(&a[d]).expect("nonzero leading coefficient");
            a.iter().map(|c| pf.mul(c, &inv)).collect()
        }
    }
}

pub(crate) fn pf_gcd(pf: PrimeField, a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    let (mut x, mut y) = (pf_trim(a.to_vec()), pf_trim(b.to_vec()));
    while !y.is_empty() {
        let r = pf_rem(pf, &x, &y);
        x = y;
        y = r;
    }
    pf_monic(pf, &x)
}

pub(crate) fn pf_derivative(pf: PrimeField, a: &[Scalar]) -> Vec<Scalar> {
    let mut out = Vec::new();
    for (i, c) in a.iter().enumerate().skip(1) {
        out.push(pf.mul(c, &pf.from_i64(i as i64)));
    }
    pf_trim(out)
}

/// base^e mod f over F_p by square-and-multiply.
fn pf_powmod(pf: PrimeField, base: &[Scalar], mut e: u64, f: &[Scalar]) -> Vec<Scalar> {
    let mut acc = vec![pf.one()];
    let mut b = pf_rem(pf, base, f);
    while e > 0 {
        if e & 1 == 1 {
            acc = pf_rem(pf, &pf_mul(pf, &acc, &b), f);
        }
        b = pf_rem(pf, &pf_mul(pf, &b, &b), f);
        e >>= 1;
    }
    acc
}

/// Rabin irreducibility test over F_p.
pub(crate) fn pf_is_irreducible(pf: PrimeField, f: &[Scalar]) -> bool {
    let d = match pf_deg(f) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    if d == 1 {
        return true;
    }
    let x = vec![pf.zero(), pf.one()];
    // x^(p^d) == x mod f
    let mut frob = x.clone();
    for _ in 0..d {
        frob = pf_powmod(pf, &frob, pf.p, f);
    }
    let minus_x = vec![pf.zero(), pf.neg(&pf.one())];
    if !pf_add(pf, &frob, &minus_x).is_empty() {
        return false;
    }
    // gcd(x^(p^(d/r)) - x, f) == 1 for every prime r | d
    let mut primes = Vec::new();
    let mut m = d;
    let mut r = 2;
    while r * r <= m {
        if m % r == 0 {
            primes.push(r);
            while m % r == 0 {
                m /= r;
            }
        }
        r += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for r in primes {
        let k = d / r;
        let mut h = x.clone();
        for _ in 0..k {
            h = pf_powmod(pf, &h, pf.p, f);
        }
        let g = pf_gcd(pf, &pf_add(pf, &h, &minus_x), f);
        if pf_deg(&g) != Some(0) {
            return false;
        }
    }
    true
}

/// Factors a squarefree monic polynomial over F_p into monic irreducibles by
/// trial division, enumerating candidates by (degree, lexicographic
/// coefficient list). Desk-scale only.
pub(crate) fn pf_factor_squarefree(pf: PrimeField, f: &[Scalar]) -> Vec<Vec<Scalar>> {
    let mut rem = pf_monic(pf, f);
    let mut out = Vec::new();
    let mut deg_cand = 1usize;
    while let Some(d) = pf_deg(&rem) {
        if d == 0 {
            break;
        }
        if deg_cand > d / 2 {
            out.push(rem.clone());
            break;
        }
        // monic candidates of degree deg_cand: low coefficients c_0..c_{deg_cand-1}
        let total = (pf.p as u128).pow(deg_cand as u32);
        let mut found = false;
        for idx in 0..total {
            let mut cand = Vec::with_capacity(deg_cand + 1);
            let mut k = idx;
            for _ in 0..deg_cand {
                cand.push(Scalar::Mod((k % pf.p as u128) as u64));
                k /= pf.p as u128;
            }
            cand.push(pf.one());
            let (q, r) = pf_divmod(pf, &rem, &cand);
            if r.is_empty() {
                out.push(cand);
                rem = q;
                found = true;
                break;
            }
        }
        if !found {
            deg_cand += 1;
        }
    }
    out.sort_by(|a, b| {
        a.len().cmp(&b.len()).then_with(|| {
            let ka: Vec<u64> = a.iter().map(|s| match s {
                Scalar::Mod(v) => *v,
                _ => unreachable!(),
            }).collect();
            let kb: Vec<u64> = b.iter().map(|s| match s {
                Scalar::Mod(v) => *v,
                _ => unreachable!(),
            }).collect();
            ka.cmp(&kb)
        })
    });
    out
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ---------------------------------------------------------------------------
// Towers and elements
// ---------------------------------------------------------------------------

/// An exact field tower `P[x]/(f)`: prime field plus one algebraic generator.
/// A degree-1 modulus presents the prime field itself.
#[derive(Debug, PartialEq, Eq, Hash)]
pub struct FieldTower {
    characteristic: u64,
    modulus: Vec<Scalar>,
    generator_name: String,
}

/// Builds a tower, verifying the characteristic and modulus invariants.
///
/// Irreducibility is decided by trial factorization over `F_p`. Over `Q` the
/// check is: no rational root (divisor search on the cleared-denominator
/// form), plus for degree >= 4 a mod-p irreducibility witness among small
/// primes. Use [`make_tower_asserted`] for a known-irreducible modulus with
/// no witness.
pub fn make_tower(characteristic: u64, modulus: Vec<Scalar>) -> Result<Arc<FieldTower>> {
    make_tower_named(characteristic, modulus, "g")
}

pub fn make_tower_named(
    characteristic: u64,
    modulus: Vec<Scalar>,
    generator_name: &str,
) -> Result<Arc<FieldTower>> {
    make_tower_inner(characteristic, modulus, generator_name, false)
}

/// Same as [`make_tower`] but accepts the caller's assertion of
/// irreducibility over `Q` when no cheap witness exists. A rational root
/// still rejects the modulus.
pub fn make_tower_asserted(
    characteristic: u64,
    modulus: Vec<Scalar>,
    generator_name: &str,
) -> Result<Arc<FieldTower>> {
    make_tower_inner(characteristic, modulus, generator_name, true)
}

fn make_tower_inner(
    characteristic: u64,
    modulus: Vec<Scalar>,
    generator_name: &str,
    asserted: bool,
) -> Result<Arc<FieldTower>> {
    if characteristic != 0 && !is_prime(characteristic) {
        return Err(Error::NotPrime(characteristic));
    }
    let pf = PrimeField { p: characteristic };
    // normalize incoming scalars into the right kind
    let modulus: Vec<Scalar> = modulus
        .iter()
        .map(|s| match (characteristic, s) {
            (0, Scalar::Rat(r)) => Ok(Scalar::Rat(r.clone())),
            (0, Scalar::Mod(_)) => Err(Error::Invalid("residue scalar in characteristic 0".into())),
            (_, Scalar::Mod(v)) => Ok(Scalar::Mod(v % characteristic)),
            (_, Scalar::Rat(r)) => pf.from_rat(r),
        })
        .collect::<Result<_>>()?;
    let deg = match pf_deg(&modulus) {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::Invalid("modulus must have degree >= 1".into())),
    };
    if modulus[deg] != pf.one() {
        return Err(Error::Invalid("modulus must be monic".into()));
    }
    if deg > 1 {
        if characteristic > 0 {
            if !pf_is_irreducible(pf, &modulus) {
                return Err(Error::ReducibleModulus { factor: None });
            }
        } else {
            check_irreducible_q(&modulus, asserted)?;
        }
    }
    Ok(Arc::new(FieldTower {
        characteristic,
        modulus,
        generator_name: generator_name.to_string(),
    }))
}

fn rat_coeffs(modulus: &[Scalar]) -> Vec<Rat> {
    modulus
        .iter()
        .map(|s| match s {
            Scalar::Rat(r) => r.clone(),
            Scalar::Mod(_) => unreachable!("characteristic 0"),
        })
        .collect()
}

fn divisors_capped(n: &BigInt, cap: usize) -> Option<Vec<BigInt>> {
    let n = n.abs();
    if n.is_zero() {
        return Some(vec![]);
    }
    let mut out = Vec::new();
    let mut d = BigInt::one();
    let limit = BigInt::from(1_000_000u64);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            out.push(&n / &d);
            if out.len() > cap {
                return None;
            }
        }
        d += 1;
        if d > limit {
            // too large to enumerate; report failure to the caller
            return None;
        }
    }
    Some(out)
}

fn check_irreducible_q(modulus: &[Scalar], asserted: bool) -> Result<()> {
    let coeffs = rat_coeffs(modulus);
    let deg = coeffs.len() - 1;
    // clear denominators
    let mut lcm = BigInt::one();
    for c in &coeffs {
        lcm = lcm.lcm(c.denom());
    }
    let ints: Vec<BigInt> = coeffs.iter().map(|c| (c * Rat::from(lcm.clone())).to_integer()).collect();
    // rational root search: roots u/v with u | c_0, v | c_deg
    if ints[0].is_zero() {
        return Err(Error::ReducibleModulus { factor: Some("x".into()) });
    }
    let us = divisors_capped(&ints[0], 4096);
    let vs = divisors_capped(&ints[deg], 4096);
    if let (Some(us), Some(vs)) = (us, vs) {
        for u in &us {
            for v in &vs {
                for sign in [1i64, -1] {
                    let cand = Rat::new(u * BigInt::from(sign), v.clone());
                    let mut acc = Rat::zero();
                    for c in coeffs.iter().rev() {
                        acc = acc * &cand + c;
                    }
                    if acc.is_zero() {
                        return Err(Error::ReducibleModulus {
                            factor: Some(format!("x - ({cand})")),
                        });
                    }
                }
            }
        }
    }
    if deg <= 3 || asserted {
        return Ok(());
    }
    // mod-p witness for higher degree
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97] {
        if (&lcm % BigInt::from(p)).is_zero() {
            continue;
        }
        let pfp = PrimeField { p };
        let reduced: Result<Vec<Scalar>> = coeffs.iter().map(|c| pfp.from_rat(c)).collect();
        let reduced = match reduced {
            Ok(v) => pf_trim(v),
            Err(_) => continue,
        };
        if pf_deg(&reduced) == Some(deg) && pf_is_irreducible(pfp, &reduced) {
            return Ok(());
        }
    }
    Err(Error::IrreducibilityUnverified)
}

impl FieldTower {
    pub(crate) fn pf(&self) -> PrimeField {
        PrimeField {
            p: self.characteristic,
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn generator_name(&self) -> &str {
        &self.generator_name
    }

    pub fn modulus(&self) -> &[Scalar] {
        &self.modulus
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        let pf = self.pf();
        FieldElement {
            tower: self.clone(),
            coeffs: vec![pf.zero(); self.degree()],
        }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.from_i64(1)
    }

    pub fn from_i64(self: &Arc<Self>, v: i64) -> FieldElement {
        let pf = self.pf();
        let mut coeffs = vec![pf.zero(); self.degree()];
        coeffs[0] = pf.from_i64(v);
        FieldElement {
            tower: self.clone(),
            coeffs,
        }
    }

    pub fn from_rat(self: &Arc<Self>, r: &Rat) -> Result<FieldElement> {
        let pf = self.pf();
        let mut coeffs = vec![pf.zero(); self.degree()];
        coeffs[0] = pf.from_rat(r)?;
        Ok(FieldElement {
            tower: self.clone(),
            coeffs,
        })
    }

    /// The residue class of `x` (degenerate for a degree-1 modulus, where the
    /// generator is the rational root of the modulus).
    pub fn generator(self: &Arc<Self>) -> FieldElement {
        let pf = self.pf();
        if self.degree() == 1 {
            // x = -c0 in P[x]/(x + c0)
            let c = pf.neg(&self.modulus[0]);
            return FieldElement {
                tower: self.clone(),
                coeffs: vec![c],
            };
        }
        let mut coeffs = vec![pf.zero(); self.degree()];
        coeffs[1] = pf.one();
        FieldElement {
            tower: self.clone(),
            coeffs,
        }
    }

    pub fn element_from_coeffs(self: &Arc<Self>, coeffs: Vec<Scalar>) -> Result<FieldElement> {
        if coeffs.len() > self.degree() {
            return Err(Error::Invalid(format!(
                "expected at most {} coefficients, got {}",
                self.degree(),
                coeffs.len()
            )));
        }
        let pf = self.pf();
        let mut padded = coeffs;
        for s in &padded {
            match (self.characteristic, s) {
                (0, Scalar::Mod(_)) => {
                    return Err(Error::Invalid("residue scalar in characteristic 0".into()))
                }
                (p, Scalar::Mod(v)) if *v >= p => {
                    return Err(Error::Invalid("residue out of range".into()))
                }
                _ => {}
            }
        }
        padded.resize(self.degree(), pf.zero());
        Ok(FieldElement {
            tower: self.clone(),
            coeffs: padded,
        })
    }
}

impl fmt::Display for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.characteristic == 0 {
            write!(f, "Q[{}]", self.generator_name)?;
        } else {
            write!(f, "F{}[{}]", self.characteristic, self.generator_name)?;
        }
        Ok(())
    }
}

/// An element of a field tower: the residue class of a polynomial in the
/// generator, stored as exactly `deg(modulus)` prime-field coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    tower: Arc<FieldTower>,
    coeffs: Vec<Scalar>,
}

impl FieldElement {
    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Scalar::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self == &self.tower.one()
    }

    fn assert_same_tower(&self, other: &FieldElement) {
        assert!(
            self.tower == other.tower,
            "field elements from different towers"
        );
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        self.assert_same_tower(other);
        let pf = self.tower.pf();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| pf.add(a, b))
            .collect();
        FieldElement {
            tower: self.tower.clone(),
            coeffs,
        }
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FieldElement {
        let pf = self.tower.pf();
        FieldElement {
            tower: self.tower.clone(),
            coeffs: self.coeffs.iter().map(|c| pf.neg(c)).collect(),
        }
    }

    pub fn mul(&self, other: &FieldElement) -> FieldElement {
        self.assert_same_tower(other);
        let pf = self.tower.pf();
        let prod = pf_mul(pf, &self.coeffs, &other.coeffs);
        let red = pf_rem(pf, &prod, &self.tower.modulus);
        let mut coeffs = red;
        coeffs.resize(self.tower.degree(), pf.zero());
        FieldElement {
            tower: self.tower.clone(),
            coeffs,
        }
    }

    /// Multiplicative inverse via extended Euclid against the modulus.
    pub fn inv(&self) -> Result<FieldElement> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let pf = self.tower.pf();
        // extended Euclid: s*a + t*f = gcd
        let mut r0 = pf_trim(self.coeffs.clone());
        let mut r1 = self.tower.modulus.clone();
        let mut s0 = vec![pf.one()];
        let mut s1: Vec<Scalar> = Vec::new();
        while !r1.is_empty() {
            let (q, r) = pf_divmod(pf, &r0, &r1);
            let qs1 = pf_mul(pf, &q, &s1);
            let new_s = pf_add(pf, &s0, &qs1.iter().map(|c| pf.neg(c)).collect::<Vec<_>>());
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = new_s;
        }
        // r0 = gcd (nonzero constant since modulus is irreducible and a != 0)
        let d = pf_deg(&r0).expect("gcd nonzero");
        assert_eq!(d, 0, "modulus not irreducible or element not reduced");
        let scale = pf.inv(&r0[0]).expect("unit");
        let mut coeffs: Vec<Scalar> = s0.iter().map(|c| pf.mul(c, &scale)).collect();
        coeffs = pf_rem(pf, &coeffs, &self.tower.modulus);
        coeffs.resize(self.tower.degree(), pf.zero());
        Ok(FieldElement {
            tower: self.tower.clone(),
            coeffs,
        })
    }

    pub fn div(&self, other: &FieldElement) -> Result<FieldElement> {
        Ok(self.mul(&other.inv()?))
    }

    /// `self^e`. Panics on `0^e` with `e < 0`.
    pub fn pow(&self, e: i64) -> FieldElement {
        let base = if e < 0 {
            self.inv().expect("negative power of zero")
        } else {
            self.clone()
        };
        let mut acc = self.tower.one();
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        acc
    }

    /// True when the element lies in the prime field (all generator
    /// coefficients vanish). For degree-1 towers every element qualifies.
    pub fn is_prime_field(&self) -> bool {
        self.coeffs.iter().skip(1).all(Scalar::is_zero)
    }

    /// The constant coefficient, meaningful when `is_prime_field()` holds.
    pub fn constant_part(&self) -> Scalar {
        self.coeffs[0].clone()
    }

    /// For characteristic 0: the element as a rational if it lies in `Q`.
    pub fn as_rational(&self) -> Option<Rat> {
        if self.tower.characteristic != 0 || !self.is_prime_field() {
            return None;
        }
        match &self.coeffs[0] {
            Scalar::Rat(r) => Some(r.clone()),
            Scalar::Mod(_) => None,
        }
    }
}

fn scalar_string(s: &Scalar) -> (bool, String) {
    // (negative, magnitude string)
    match s {
        Scalar::Rat(r) => {
            let neg = r.is_negative();
            let a = r.abs();
            if a.denom().is_one() {
                (neg, format!("{}", a.numer()))
            } else {
                (neg, format!("{}/{}", a.numer(), a.denom()))
            }
        }
        Scalar::Mod(v) => (false, format!("{v}")),
    }
}

impl fmt::Display for FieldElement {
    /// Polynomial in the generator, descending powers, parser-compatible.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = &self.tower.generator_name;
        let mut terms: Vec<(bool, String)> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let (neg, mag) = scalar_string(c);
            let is_one = mag == "1";
            let body = match (i, is_one) {
                (0, _) => mag,
                (1, true) => name.clone(),
                (1, false) => format!("{mag}*{name}"),
                (_, true) => format!("{name}^{i}"),
                (_, false) => format!("{mag}*{name}^{i}"),
            };
            terms.push((neg, body));
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (neg, body)) in terms.iter().enumerate() {
            if idx == 0 {
                if *neg {
                    // fold the sign into a leading rational factor
                    if body.starts_with(|c: char| c.is_ascii_digit()) {
                        write!(f, "-{body}")?;
                    } else {
                        write!(f, "-1*{body}")?;
                    }
                } else {
                    write!(f, "{body}")?;
                }
            } else if *neg {
                write!(f, " - {body}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Roots of unity and multiplicative orders
// ---------------------------------------------------------------------------

fn prime_divisors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn has_exact_order(x: &FieldElement, n: u64) -> bool {
    if x.is_zero() {
        return false;
    }
    if !x.pow(n as i64).is_one() {
        return false;
    }
    prime_divisors(n).iter().all(|r| !x.pow((n / r) as i64).is_one())
}

/// Least `k <= bound` with `x^k = 1`, or `Ok(None)` when no such `k` exists
/// below the bound.
pub fn mult_order(x: &FieldElement, bound: u64) -> Result<Option<u64>> {
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    let mut acc = x.clone();
    for k in 1..=bound {
        if acc.is_one() {
            return Ok(Some(k));
        }
        acc = acc.mul(x);
    }
    Ok(None)
}

/// Finds an element of multiplicative order exactly `n`, deterministically.
///
/// In characteristic p the coefficient vectors of the extension are
/// enumerated in lexicographic order (an exhaustive search; existence is
/// decided first via `n | p^d - 1`). In characteristic 0 exhaustive
/// enumeration is impossible; the candidates are `1, -1, g, -g, g^2, ...`
/// which covers every tower presented by a cyclotomic modulus, and the
/// rational torsion `{1, -1}`.
pub fn find_root_of_unity(tower: &Arc<FieldTower>, n: u64) -> Result<FieldElement> {
    assert!(n >= 2, "n must be at least 2");
    let p = tower.characteristic();
    if p != 0 {
        if n % p == 0 {
            return Err(Error::NoSuchRoot { n });
        }
        let d = tower.degree() as u32;
        let group_order = (p as u128).pow(d) - 1;
        if group_order % n as u128 != 0 {
            return Err(Error::NoSuchRoot { n });
        }
        let total = (p as u128).pow(d);
        for idx in 0..total {
            // lexicographic on (c_0, c_1, ...): c_0 most significant
            let mut k = idx;
            let mut coeffs = vec![Scalar::Mod(0); d as usize];
            for slot in (0..d as usize).rev() {
                coeffs[slot] = Scalar::Mod((k % p as u128) as u64);
                k /= p as u128;
            }
            let cand = tower.element_from_coeffs(coeffs)?;
            if has_exact_order(&cand, n) {
                return Ok(cand);
            }
        }
        Err(Error::NoSuchRoot { n })
    } else {
        let one = tower.one();
        let minus_one = one.neg();
        if n == 2 {
            return Ok(minus_one);
        }
        if tower.degree() >= 2 {
            let g = tower.generator();
            let bound = 4 * n * tower.degree() as u64;
            let mut power = tower.one();
            for _ in 0..=bound {
                power = power.mul(&g);
                for cand in [power.clone(), power.neg()] {
                    if has_exact_order(&cand, n) {
                        return Ok(cand);
                    }
                }
            }
        }
        Err(Error::NoSuchRoot { n })
    }
}

// ---------------------------------------------------------------------------
// Finite places and reduction
// ---------------------------------------------------------------------------

/// A finite place of a characteristic-0 tower: a prime `p` together with a
/// monic irreducible factor of the modulus mod `p`. The residue tower is
/// `F_p[x]/(factor)`.
#[derive(Clone, Debug)]
pub struct Place {
    pub p: u64,
    /// factor coefficients low-to-high, representatives in `0..p`
    pub factor: Vec<u64>,
    pub residue_tower: Arc<FieldTower>,
}

impl Place {
    /// Balanced-representative form of the factor, for reports.
    pub fn balanced_factor(&self) -> Vec<i64> {
        self.factor
            .iter()
            .map(|&c| {
                let c = c as i64;
                if c as u64 > self.p / 2 {
                    c - self.p as i64
                } else {
                    c
                }
            })
            .collect()
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(p={}, factor={:?})", self.p, self.balanced_factor())
    }
}

/// One place per distinct monic irreducible factor of the modulus mod `p`,
/// sorted by degree then lexicographically by coefficient list. Ramified
/// reduction (repeated factors) is an error so surveys can skip the prime.
pub fn residue_places(tower: &Arc<FieldTower>, p: u64) -> Result<Vec<Place>> {
    if tower.characteristic() != 0 {
        return Err(Error::Invalid("residue places require characteristic 0".into()));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pfp = PrimeField { p };
    let reduced: Result<Vec<Scalar>> = rat_coeffs(&tower.modulus)
        .iter()
        .map(|c| pfp.from_rat(c))
        .collect();
    let reduced = pf_trim(reduced.map_err(|_| Error::BadReduction {
        p,
        reason: "modulus coefficient has a denominator divisible by p".into(),
    })?);
    if pf_deg(&reduced) != Some(tower.degree()) {
        return Err(Error::BadReduction {
            p,
            reason: "modulus drops degree mod p".into(),
        });
    }
    let deriv = pf_derivative(pfp, &reduced);
    let g = pf_gcd(pfp, &reduced, &deriv);
    if pf_deg(&g) != Some(0) {
        return Err(Error::BadReduction {
            p,
            reason: "modulus is not squarefree mod p (ramified)".into(),
        });
    }
    let factors = pf_factor_squarefree(pfp, &reduced);
    let mut places = Vec::new();
    for f in factors {
        let coeffs: Vec<u64> = f
            .iter()
            .map(|s| match s {
                Scalar::Mod(v) => *v,
                _ => unreachable!(),
            })
            .collect();
        let residue_tower = make_tower_named(p, f, tower.generator_name())?;
        places.push(Place {
            p,
            factor: coeffs,
            residue_tower,
        });
    }
    Ok(places)
}

/// Coefficient-wise reduction mod `p` followed by reduction mod the place's
/// factor. A ring homomorphism on elements with good reduction.
pub fn reduce_at_place(x: &FieldElement, v: &Place) -> Result<FieldElement> {
    if x.tower().characteristic() != 0 {
        return Err(Error::Invalid("reduction applies to characteristic 0".into()));
    }
    let pfp = PrimeField { p: v.p };
    let mut reduced: Vec<Scalar> = Vec::with_capacity(x.coeffs.len());
    for c in &x.coeffs {
        match c {
            Scalar::Rat(r) => {
                let s = pfp.from_rat(r).map_err(|_| Error::PoleAtPlace { p: v.p })?;
                reduced.push(s);
            }
            Scalar::Mod(_) => unreachable!("characteristic 0"),
        }
    }
    let factor: Vec<Scalar> = v.factor.iter().map(|&c| Scalar::Mod(c)).collect();
    let mut rem = pf_rem(pfp, &pf_trim(reduced), &factor);
    rem.resize(v.residue_tower.degree(), pfp.zero());
    v.residue_tower.element_from_coeffs(rem)
}

pub fn rat_from_str(s: &str) -> Result<Rat> {
    let parts: Vec<&str> = s.split('/').collect();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|_| Error::Invalid(format!("bad rational literal: {s}")))
    };
    match parts.as_slice() {
        [a] => Ok(Rat::from(parse_int(a)?)),
        [a, b] => {
            let den = parse_int(b)?;
            if den.is_zero() {
                return Err(Error::Invalid("zero denominator".into()));
            }
            Ok(Rat::new(parse_int(a)?, den))
        }
        _ => Err(Error::Invalid(format!("bad rational literal: {s}"))),
    }
}
