//! Polynomials and normalized rational functions in `t` over a field tower;
//! the automorphism `sigma_q : f(t) -> f(qt)`; the iterative operators
//! `delta^(k)`; expression parsing and printing.
//!
//! On monomials the operator is `delta^(k)(c t^r) = c binom(r, k)_q t^(r-k)`.
//! On fractions it is the unique extension obtained by solving the twisted
//! Leibniz rule for `a = (a/b) b` backwards:
//!
//!     delta^(k)(a/b) = ( delta^(k)(a)
//!                        - sum_{i=1..k} sigma^i(delta^(k-i)(a/b)) delta^(i)(b) ) / b
//!
//! The whole family `delta^(0..k)(f)` is computed at once and memoized per
//! context, keyed by the normalized fraction; the series route in
//! [`crate::twisted`] provides an independent oracle for this algorithm.

mod parser;

pub use parser::{parse, parse_in_tower};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactfield::{FieldElement, FieldTower};
use crate::qarith::{q_binom, QContext};

/// Sparse polynomial in `t`: exponent -> nonzero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    tower: Arc<FieldTower>,
    coeffs: BTreeMap<u64, FieldElement>,
}

impl Poly {
    pub fn zero(tower: &Arc<FieldTower>) -> Poly {
        Poly {
            tower: tower.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: FieldElement) -> Poly {
        let tower = c.tower().clone();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(0, c);
        }
        Poly { tower, coeffs }
    }

    pub fn one(tower: &Arc<FieldTower>) -> Poly {
        Poly::constant(tower.one())
    }

    pub fn var(tower: &Arc<FieldTower>) -> Poly {
        Poly::monomial(tower.one(), 1)
    }

    pub fn monomial(c: FieldElement, e: u64) -> Poly {
        let tower = c.tower().clone();
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(e, c);
        }
        Poly { tower, coeffs }
    }

    pub fn from_coeff_slice(tower: &Arc<FieldTower>, coeffs: &[FieldElement]) -> Poly {
        let mut map = BTreeMap::new();
        for (e, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                map.insert(e as u64, c.clone());
            }
        }
        Poly {
            tower: tower.clone(),
            coeffs: map,
        }
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, FieldElement> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn leading_coeff(&self) -> Option<&FieldElement> {
        self.coeffs.values().next_back()
    }

    pub fn coeff(&self, e: u64) -> FieldElement {
        self.coeffs
            .get(&e)
            .cloned()
            .unwrap_or_else(|| self.tower.zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).map(|c| c.is_one()).unwrap_or(false)
    }

    fn insert_add(map: &mut BTreeMap<u64, FieldElement>, e: u64, c: FieldElement) {
        if c.is_zero() {
            return;
        }
        match map.remove(&e) {
            None => {
                map.insert(e, c);
            }
            Some(old) => {
                let s = old.add(&c);
                if !s.is_zero() {
                    map.insert(e, s);
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut coeffs = self.coeffs.clone();
        for (e, c) in &other.coeffs {
            Poly::insert_add(&mut coeffs, *e, c.clone());
        }
        Poly {
            tower: self.tower.clone(),
            coeffs,
        }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            tower: self.tower.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| (*e, c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut coeffs = BTreeMap::new();
        for (e1, c1) in &self.coeffs {
            for (e2, c2) in &other.coeffs {
                Poly::insert_add(&mut coeffs, e1 + e2, c1.mul(c2));
            }
        }
        Poly {
            tower: self.tower.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, c: &FieldElement) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.tower);
        }
        Poly {
            tower: self.tower.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, x)| (*e, x.mul(c)))
                .collect(),
        }
    }

    /// Division with remainder by a nonzero divisor.
    pub fn divmod(&self, div: &Poly) -> (Poly, Poly) {
        let dd = div.degree().expect("division by zero polynomial");
        let lead_inv = div
            .leading_coeff()
            .unwrap()
            .inv()
            .expect("field coefficient");
        let mut rem = self.clone();
        let mut quot = Poly::zero(&self.tower);
        while let Some(dr) = rem.degree() {
            if dr < dd {
                break;
            }
            let c = rem.leading_coeff().unwrap().mul(&lead_inv);
            let m = Poly::monomial(c, dr - dd);
            quot = quot.add(&m);
            rem = rem.sub(&m.mul(div));
        }
        (quot, rem)
    }

    pub fn monic(&self) -> Poly {
        match self.leading_coeff() {
            None => self.clone(),
            Some(lc) => self.scale(&lc.inv().expect("nonzero leading coefficient")),
        }
    }

    /// Strips the rational content in characteristic 0 so the coefficient
    /// coordinates are coprime integers; identity otherwise. Controls
    /// coefficient growth in the gcd remainder sequence.
    fn primitive(&self) -> Poly {
        use num_bigint::BigInt;
        use num_integer::Integer;
        use num_traits::{One, Zero as _};
        if self.tower.characteristic() != 0 || self.is_zero() {
            return self.clone();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.coeffs.values() {
            for s in c.coeffs() {
                if let crate::exactfield::Scalar::Rat(r) = s {
                    if !r.is_zero() {
                        num_gcd = num_gcd.gcd(r.numer());
                        den_lcm = den_lcm.lcm(r.denom());
                    }
                }
            }
        }
        if num_gcd.is_zero() {
            return self.clone();
        }
        let scale = crate::exactfield::Rat::new(den_lcm, num_gcd);
        if scale.is_one() {
            return self.clone();
        }
        let factor = self.tower.from_rat(&scale).expect("characteristic 0");
        self.scale(&factor)
    }

    /// Image of this polynomial in `F_p[t]` through a root `r` of the tower
    /// modulus mod p. `None` when a coefficient denominator is divisible
    /// by p.
    fn map_mod_p(&self, p: u64, root: u64) -> Option<Vec<u64>> {
        use num_integer::Integer as _;
        use num_traits::ToPrimitive as _;
        let deg = self.degree()? as usize;
        let p_big = num_bigint::BigInt::from(p);
        let mulp = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
        let mut out = vec![0u64; deg + 1];
        for (e, c) in &self.coeffs {
            let mut acc = 0u64;
            let mut rpow = 1u64;
            for s in c.coeffs() {
                if let crate::exactfield::Scalar::Rat(q) = s {
                    let den = q.denom().mod_floor(&p_big).to_u64().unwrap();
                    if den == 0 {
                        return None;
                    }
                    let num = q.numer().mod_floor(&p_big).to_u64().unwrap();
                    let deninv = mod_inv_u64(den, p)?;
                    acc = (acc + mulp(mulp(num, deninv), rpow)) % p;
                }
                rpow = mulp(rpow, root);
            }
            out[*e as usize] = acc;
        }
        while out.last() == Some(&0) {
            out.pop();
        }
        Some(out)
    }

    /// Modular gcd over a characteristic-0 tower, verified by exact
    /// division. Returns `None` when no usable primes are found; an unlucky
    /// prime costs a retry, never correctness.
    fn gcd_modular(&self, other: &Poly) -> Option<Poly> {
        use num_bigint::BigInt;
        use num_integer::Integer as _;
        use num_traits::{One as _, Zero as _};
        let deg_self = self.degree().unwrap() as usize;
        let deg_other = other.degree().unwrap() as usize;
        if deg_self == 0 || deg_other == 0 {
            return Some(Poly::one(&self.tower));
        }
        let dim = self.tower.degree();
        let mut p = 1_000_000u64;
        let mut best_deg: Option<usize> = None;
        // residues[e][coord] accumulated by CRT
        let mut residues: Vec<Vec<BigInt>> = Vec::new();
        let mut modulus = BigInt::one();
        for _ in 0..24 {
            p = next_prime_u64(p);
            let roots = match tower_roots_mod_p(&self.tower, p) {
                Some(r) => r,
                None => continue,
            };
            let mut gcd_images: Vec<Vec<u64>> = Vec::with_capacity(roots.len());
            let mut lc_survives = false;
            let mut usable = true;
            for &r in &roots {
                let a = match self.map_mod_p(p, r) {
                    Some(v) if !v.is_empty() => v,
                    _ => {
                        usable = false;
                        break;
                    }
                };
                let b = match other.map_mod_p(p, r) {
                    Some(v) if !v.is_empty() => v,
                    _ => {
                        usable = false;
                        break;
                    }
                };
                lc_survives |= a.len() == deg_self + 1 || b.len() == deg_other + 1;
                gcd_images.push(upoly::gcd(a, b, p));
            }
            if !usable || gcd_images.is_empty() {
                continue;
            }
            let d = gcd_images[0].len() - 1;
            if gcd_images.iter().any(|g| g.len() - 1 != d) {
                continue;
            }
            if d == 0 {
                // coprime images; sound as long as the true gcd reduces
                // with its degree intact, which the surviving leading
                // coefficient guarantees
                if lc_survives {
                    return Some(Poly::one(&self.tower));
                }
                continue;
            }
            match best_deg {
                Some(b) if d > b => continue, // unlucky prime
                Some(b) if d < b => {
                    best_deg = Some(d);
                    residues = vec![vec![BigInt::zero(); dim]; d];
                    modulus = BigInt::one();
                }
                None => {
                    best_deg = Some(d);
                    residues = vec![vec![BigInt::zero(); dim]; d];
                }
                _ => {}
            }
            // coordinates of each non-leading coefficient at this prime
            let mut prime_coords: Vec<Vec<u64>> = Vec::with_capacity(d);
            let mut solved = true;
            for e in 0..d {
                let vals: Vec<u64> = gcd_images.iter().map(|g| g[e]).collect();
                match solve_vandermonde(&roots, &vals, p) {
                    Some(c) => prime_coords.push(c),
                    None => {
                        solved = false;
                        break;
                    }
                }
            }
            if !solved {
                continue;
            }
            // CRT into the accumulators
            let p_big = BigInt::from(p);
            let m_inv_mod_p = {
                use num_traits::ToPrimitive as _;
                let m_red = modulus.mod_floor(&p_big).to_u64().unwrap();
                match mod_inv_u64(m_red, p) {
                    Some(v) => v,
                    None => continue, // p divided the old modulus somehow
                }
            };
            for e in 0..d {
                for c in 0..dim {
                    use num_traits::ToPrimitive as _;
                    let cur_u = residues[e][c].mod_floor(&p_big).to_u64().unwrap();
                    let target = prime_coords[e][c];
                    let diff = (target + p - cur_u) % p;
                    let lift = mul_p(p)(diff, m_inv_mod_p);
                    residues[e][c] = &residues[e][c] + &modulus * BigInt::from(lift);
                }
            }
            modulus *= &p_big;
            // try to reconstruct and verify
            let mut coeffs: Vec<FieldElement> = Vec::with_capacity(d + 1);
            let mut complete = true;
            'outer: for e in 0..d {
                let mut coords = Vec::with_capacity(dim);
                for c in 0..dim {
                    match rational_reconstruct(&residues[e][c], &modulus) {
                        Some(r) => coords.push(crate::exactfield::Scalar::Rat(r)),
                        None => {
                            complete = false;
                            break 'outer;
                        }
                    }
                }
                coeffs.push(
                    self.tower
                        .element_from_coeffs(coords)
                        .expect("coordinate count matches"),
                );
            }
            if !complete {
                continue;
            }
            coeffs.push(self.tower.one());
            let candidate = Poly::from_coeff_slice(&self.tower, &coeffs);
            if self.divmod(&candidate).1.is_zero() && other.divmod(&candidate).1.is_zero() {
                // a verified common divisor of the image-gcd degree is the gcd
                return Some(candidate);
            }
        }
        None
    }

    /// Monic gcd. Characteristic 0 goes through verified modular images
    /// (exact remainder sequences on large rational coordinates blow up),
    /// with a primitive remainder sequence as fallback. Characteristic p
    /// uses monic Euclid.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.tower.characteristic() == 0 {
            if self.is_zero() {
                return other.monic();
            }
            if other.is_zero() {
                return self.monic();
            }
            if let Some(g) = self.gcd_modular(other) {
                return g;
            }
            let mut a = self.primitive();
            let mut b = other.primitive();
            while !b.is_zero() {
                if b.degree() == Some(0) {
                    return Poly::one(&self.tower);
                }
                let r = a.divmod(&b).1.primitive();
                a = b;
                b = r;
            }
            return a.monic();
        }
        let mut a = self.monic();
        let mut b = other.monic();
        if a.is_zero() {
            return b;
        }
        while !b.is_zero() {
            let r = a.divmod(&b).1;
            a = b;
            b = r.monic();
        }
        a
    }

    /// Substitution `t -> c t`.
    pub fn subst_scaled_var(&self, c: &FieldElement) -> Poly {
        let mut coeffs = BTreeMap::new();
        for (e, x) in &self.coeffs {
            let scaled = x.mul(&c.pow(*e as i64));
            if !scaled.is_zero() {
                coeffs.insert(*e, scaled);
            }
        }
        Poly {
            tower: self.tower.clone(),
            coeffs,
        }
    }
}

// ---------------------------------------------------------------------------
// Modular gcd machinery (characteristic 0).
//
// Exact Euclidean gcds on fractions with large rational coordinates blow up,
// so gcds over Q(g)[t] are computed from images: pick primes p at which the
// tower modulus splits completely, collapse the tower through each root,
// take monic u64 gcds, undo the evaluation by a Vandermonde solve, CRT the
// coordinates across primes and reconstruct rationals. The candidate is
// verified by exact division, so an unlucky prime can only cost time, never
// correctness. The primitive remainder sequence stays as the fallback.
// ---------------------------------------------------------------------------

fn mod_inv_u64(a: u64, p: u64) -> Option<u64> {
    if a == 0 {
        return None;
    }
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

fn mul_p(p: u64) -> impl Fn(u64, u64) -> u64 {
    move |a, b| ((a as u128 * b as u128) % p as u128) as u64
}

/// Dense u64 polynomial helpers over F_p.
mod upoly {
    use super::{mod_inv_u64, mul_p};

    pub fn trim(v: &mut Vec<u64>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
        let mul = mul_p(p);
        let lead_inv = mod_inv_u64(*b.last().unwrap(), p).expect("nonzero lead");
        while a.len() >= b.len() && !a.is_empty() {
            let c = mul(*a.last().unwrap(), lead_inv);
            let shift = a.len() - b.len();
            for (i, bc) in b.iter().enumerate() {
                let sub = mul(c, *bc);
                a[shift + i] = (a[shift + i] + p - sub) % p;
            }
            trim(&mut a);
        }
        a
    }

    pub fn gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            let r = rem(a, &b, p);
            a = b;
            b = r;
        }
        // monic
        if let Some(&lc) = a.last() {
            let inv = mod_inv_u64(lc, p).unwrap();
            let mul = mul_p(p);
            for c in &mut a {
                *c = mul(*c, inv);
            }
        }
        a
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mulp = mul_p(p);
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + mulp(x, y)) % p;
            }
        }
        out
    }

    pub fn powmod(base: &[u64], mut e: u64, modu: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base.to_vec(), modu, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(mul(&acc, &b, p), modu, p);
            }
            b = rem(mul(&b, &b, p), modu, p);
            e >>= 1;
        }
        acc
    }
}

/// All roots of a fully-split squarefree polynomial over F_p, by repeated
/// random splitting with `gcd((x+c)^((p-1)/2) - 1, f)`.
fn split_all_roots(f: &[u64], p: u64, rng_state: &mut u64) -> Vec<u64> {
    let deg = f.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    if deg == 1 {
        // monic x + c -> root -c
        let inv = mod_inv_u64(*f.last().unwrap(), p).unwrap();
        let c = mul_p(p)(f[0], inv);
        return vec![(p - c) % p];
    }
    loop {
        *rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let shift = *rng_state % p;
        // (x + shift)^((p-1)/2) - 1 mod f
        let base = vec![shift, 1];
        let mut h = upoly::powmod(&base, (p - 1) / 2, f, p);
        if h.is_empty() {
            h = vec![p - 1];
        } else {
            h[0] = (h[0] + p - 1) % p;
            upoly::trim(&mut h);
        }
        if h.is_empty() {
            continue;
        }
        let g = upoly::gcd(f.to_vec(), h, p);
        let dg = g.len().saturating_sub(1);
        if dg == 0 || dg == deg {
            continue;
        }
        let (q, r) = {
            // f / g by monic division
            let mut rem = f.to_vec();
            let mut quot = vec![0u64; f.len() - g.len() + 1];
            let mul = mul_p(p);
            let lead_inv = mod_inv_u64(*g.last().unwrap(), p).unwrap();
            while rem.len() >= g.len() && !rem.is_empty() {
                let c = mul(*rem.last().unwrap(), lead_inv);
                let shift = rem.len() - g.len();
                quot[shift] = c;
                for (i, gc) in g.iter().enumerate() {
                    let sub = mul(c, *gc);
                    rem[shift + i] = (rem[shift + i] + p - sub) % p;
                }
                upoly::trim(&mut rem);
            }
            (quot, rem)
        };
        debug_assert!(r.is_empty());
        let mut roots = split_all_roots(&g, p, rng_state);
        roots.extend(split_all_roots(&q, p, rng_state));
        return roots;
    }
}

/// The tower modulus mod p and, when it splits completely into distinct
/// roots, those roots. Memoized per (tower, prime).
fn tower_roots_mod_p(tower: &Arc<FieldTower>, p: u64) -> Option<Vec<u64>> {
    use num_integer::Integer as _;
    use num_traits::ToPrimitive as _;
    use std::cell::RefCell;
    use std::collections::HashMap;
    thread_local! {
        static CACHE: RefCell<HashMap<(usize, u64), Option<Vec<u64>>>> =
            RefCell::new(HashMap::new());
    }
    let key = (Arc::as_ptr(tower) as usize, p);
    if let Some(hit) = CACHE.with(|c| c.borrow().get(&key).cloned()) {
        return hit;
    }
    let p_big = num_bigint::BigInt::from(p);
    let mut coeffs = Vec::new();
    let mut ok = true;
    for s in tower.modulus() {
        match s {
            crate::exactfield::Scalar::Rat(q) => {
                let den = q.denom().mod_floor(&p_big).to_u64().unwrap();
                let num = q.numer().mod_floor(&p_big).to_u64().unwrap();
                match mod_inv_u64(den, p) {
                    Some(dinv) => coeffs.push(mul_p(p)(num, dinv)),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            crate::exactfield::Scalar::Mod(_) => {
                ok = false;
                break;
            }
        }
    }
    let deg = tower.degree();
    let result = if !ok || coeffs.len() != deg + 1 || *coeffs.last().unwrap() == 0 {
        None
    } else {
        // fully split and squarefree: x^p = x mod f and gcd(f, f') = 1
        let x = vec![0u64, 1];
        let frob = upoly::powmod(&x, p, &coeffs, p);
        let mut diff = frob;
        while diff.len() < 2 {
            diff.push(0);
        }
        diff[1] = (diff[1] + p - 1) % p;
        upoly::trim(&mut diff);
        if !diff.is_empty() {
            None
        } else {
            let mut deriv: Vec<u64> = coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mul_p(p)(c, (i as u64) % p))
                .collect();
            upoly::trim(&mut deriv);
            if deriv.is_empty() || upoly::gcd(coeffs.clone(), deriv, p).len() != 1 {
                None
            } else {
                let mut rng_state = 0x9e3779b97f4a7c15u64 ^ p;
                let mut roots = split_all_roots(&coeffs, p, &mut rng_state);
                roots.sort_unstable();
                if roots.len() == deg {
                    Some(roots)
                } else {
                    None
                }
            }
        }
    };
    CACHE.with(|c| c.borrow_mut().insert(key, result.clone()));
    result
}

fn next_prime_u64(mut n: u64) -> u64 {
    loop {
        n += 1;
        if n % 2 == 0 {
            continue;
        }
        let mut d = 3;
        let mut prime = true;
        while d * d <= n {
            if n % d == 0 {
                prime = false;
                break;
            }
            d += 2;
        }
        if prime {
            return n;
        }
    }
}

/// Rational reconstruction: the unique n/d with |n|, d <= sqrt(m/2) and
/// n = u d (mod m), when it exists.
fn rational_reconstruct(u: &num_bigint::BigInt, m: &num_bigint::BigInt) -> Option<crate::exactfield::Rat> {
    use num_bigint::BigInt;
    use num_integer::Integer as _;
    use num_traits::{One as _, Signed as _, Zero as _};
    let bound = (m / BigInt::from(2)).sqrt();
    let mut r0 = m.clone();
    let mut r1 = u.mod_floor(m);
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    let num = if t1.is_negative() { -r1 } else { r1 };
    let den = t1.abs();
    if num.gcd(&den) != BigInt::one() {
        return None;
    }
    Some(crate::exactfield::Rat::new(num, den))
}

/// Gaussian solve of the Vandermonde system `sum_j x_j roots[i]^j = vals[i]`
/// mod p, recovering tower coordinates from evaluations at the roots.
fn solve_vandermonde(roots: &[u64], vals: &[u64], p: u64) -> Option<Vec<u64>> {
    let d = roots.len();
    let mul = mul_p(p);
    let mut m: Vec<Vec<u64>> = (0..d)
        .map(|i| {
            let mut row = Vec::with_capacity(d + 1);
            let mut acc = 1u64;
            for _ in 0..d {
                row.push(acc);
                acc = mul(acc, roots[i]);
            }
            row.push(vals[i]);
            row
        })
        .collect();
    for col in 0..d {
        let pivot = (col..d).find(|&r| m[r][col] != 0)?;
        m.swap(col, pivot);
        let inv = mod_inv_u64(m[col][col], p)?;
        for j in col..=d {
            m[col][j] = mul(m[col][j], inv);
        }
        for r in 0..d {
            if r == col || m[r][col] == 0 {
                continue;
            }
            let f = m[r][col];
            for j in col..=d {
                let sub = mul(f, m[col][j]);
                m[r][j] = (m[r][j] + p - sub) % p;
            }
        }
    }
    Some((0..d).map(|i| m[i][d]).collect())
}

/// Normalized fraction of polynomials: `gcd(num, den) = 1`, monic
/// denominator, zero stored as `0/1`. Equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFunc::normalized(num, den))
    }

    fn normalized(num: Poly, den: Poly) -> RatFunc {
        if num.is_zero() {
            let tower = num.tower().clone();
            return RatFunc {
                num: Poly::zero(&tower),
                den: Poly::one(&tower),
            };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.degree().unwrap_or(0) > 0 {
            (num.divmod(&g).0, den.divmod(&g).0)
        } else {
            (num, den)
        };
        RatFunc::from_coprime(num, den)
    }

    /// For num, den already known coprime; only rescales the denominator
    /// monic. Keeping arithmetic on this path avoids most gcd work.
    fn from_coprime(num: Poly, den: Poly) -> RatFunc {
        if num.is_zero() {
            let tower = num.tower().clone();
            return RatFunc {
                num: Poly::zero(&tower),
                den: Poly::one(&tower),
            };
        }
        if den.leading_coeff().map(FieldElement::is_one).unwrap_or(false) {
            return RatFunc { num, den };
        }
        let lc_inv = den.leading_coeff().expect("nonzero denominator").inv().expect("nonzero");
        RatFunc {
            num: num.scale(&lc_inv),
            den: den.scale(&lc_inv),
        }
    }

    pub fn from_poly(p: Poly) -> RatFunc {
        let one = Poly::one(p.tower());
        RatFunc { num: p, den: one }
    }

    pub fn zero(tower: &Arc<FieldTower>) -> RatFunc {
        RatFunc::from_poly(Poly::zero(tower))
    }

    pub fn one(tower: &Arc<FieldTower>) -> RatFunc {
        RatFunc::from_poly(Poly::one(tower))
    }

    pub fn var(tower: &Arc<FieldTower>) -> RatFunc {
        RatFunc::from_poly(Poly::var(tower))
    }

    pub fn constant(c: FieldElement) -> RatFunc {
        RatFunc::from_poly(Poly::constant(c))
    }

    /// `c t^e`, with negative exponents allowed.
    pub fn monomial(c: FieldElement, e: i64) -> RatFunc {
        let tower = c.tower().clone();
        if e >= 0 {
            RatFunc::from_poly(Poly::monomial(c, e as u64))
        } else {
            RatFunc {
                num: Poly::constant(c),
                den: Poly::monomial(tower.one(), e.unsigned_abs()),
            }
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        self.num.tower()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den.is_one() && other.den.is_one() {
            return RatFunc::from_poly(self.num.add(&other.num));
        }
        // a/b + c/d with b = g b', d = g d': common factors of the result
        // can only come from g, so only gcd(num, g) remains to strip.
        let g = self.den.gcd(&other.den);
        if g.degree().unwrap_or(0) == 0 {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            return RatFunc::from_coprime(num, self.den.mul(&other.den));
        }
        let b_red = self.den.divmod(&g).0;
        let d_red = other.den.divmod(&g).0;
        let num = self.num.mul(&d_red).add(&other.num.mul(&b_red));
        let den = self.den.mul(&d_red);
        let h = num.gcd(&g);
        if h.degree().unwrap_or(0) == 0 {
            RatFunc::from_coprime(num, den)
        } else {
            RatFunc::from_coprime(num.divmod(&h).0, den.divmod(&h).0)
        }
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero(self.tower());
        }
        // cross-cancel: (a/g1)(c/g2) over (b/g2)(d/g1) is already coprime
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let a = if g1.degree().unwrap_or(0) > 0 {
            self.num.divmod(&g1).0
        } else {
            self.num.clone()
        };
        let d = if g1.degree().unwrap_or(0) > 0 {
            other.den.divmod(&g1).0
        } else {
            other.den.clone()
        };
        let c = if g2.degree().unwrap_or(0) > 0 {
            other.num.divmod(&g2).0
        } else {
            other.num.clone()
        };
        let b = if g2.degree().unwrap_or(0) > 0 {
            self.den.divmod(&g2).0
        } else {
            self.den.clone()
        };
        RatFunc::from_coprime(a.mul(&c), b.mul(&d))
    }

    pub fn scale(&self, c: &FieldElement) -> RatFunc {
        if c.is_zero() {
            return RatFunc::zero(self.tower());
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Result<RatFunc> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFunc::from_coprime(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<RatFunc> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = RatFunc::one(self.tower());
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            k >>= 1;
        }
        Ok(acc)
    }

    /// The constant value when the fraction lies in the coefficient tower.
    pub fn as_constant(&self) -> Option<FieldElement> {
        if self.den.is_one() && self.num.degree().unwrap_or(0) == 0 {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }
}

// ---------------------------------------------------------------------------
// sigma and delta
// ---------------------------------------------------------------------------

/// `f(t) -> f(qt)`, a field automorphism.
pub fn sigma_q(ctx: &QContext, f: &RatFunc) -> RatFunc {
    sigma_q_pow(ctx, 1, f)
}

/// `f(t) -> f(q^j t)` for any integer j. An automorphism, so coprimality of
/// the stored fraction is preserved and no gcd is needed.
pub fn sigma_q_pow(ctx: &QContext, j: i64, f: &RatFunc) -> RatFunc {
    let c = ctx.q_pow(j);
    RatFunc::from_coprime(f.num.subst_scaled_var(&c), f.den.subst_scaled_var(&c))
}

/// Monomial rule, `delta^(0) = id`.
pub fn delta_poly(ctx: &QContext, k: u64, f: &Poly) -> Poly {
    if k == 0 {
        return f.clone();
    }
    let mut out = Poly::zero(f.tower());
    for (e, c) in f.coeffs() {
        if *e < k {
            continue;
        }
        let b = q_binom(ctx, *e, k);
        if b.is_zero() {
            continue;
        }
        out = out.add(&Poly::monomial(c.mul(&b), e - k));
    }
    out
}

/// Cached delta family of one fraction `a/b`. The back-substitution is run
/// in polynomial form over the common denominator
/// `B_k = b sigma(b) ... sigma^k(b)`:
///
///     P_k = delta^(k)(a) (s_1...s_k)
///           - sum_{i=1..k} sigma^i(P_{k-i}) delta^(i)(b) (s_1...s_{i-1})
///
/// with `s_i = sigma^i(b)` and `delta^(k)(a/b) = P_k / B_k`. This is the
/// Leibniz back-substitution with all intermediate fractions cleared; the
/// only gcd work is stripping the known factors `s_i` from the final value.
#[derive(Clone)]
pub(crate) struct DeltaFamily {
    polys: Vec<Poly>,
    reduced: Vec<RatFunc>,
}

/// Cancels the known denominator factors out of `num / prod(factors)`.
/// Each factor is small, so the gcds stay cheap.
fn reduce_known_denominator(num: Poly, factors: &[Poly]) -> RatFunc {
    if num.is_zero() {
        return RatFunc::zero(num.tower());
    }
    let mut num = num;
    let mut den = Poly::one(num.tower());
    for f in factors {
        let g = num.gcd(f);
        if g.degree().unwrap_or(0) == 0 {
            den = den.mul(f);
        } else {
            num = num.divmod(&g).0;
            den = den.mul(&f.divmod(&g).0);
        }
    }
    RatFunc::from_coprime(num, den)
}

/// The unique extension of [`delta_poly`] to fractions. The family
/// `delta^(0..k)(f)` is cached per context, keyed by the normalized input.
pub fn delta(ctx: &QContext, k: u64, f: &RatFunc) -> RatFunc {
    if k == 0 {
        return f.clone();
    }
    if f.is_polynomial() {
        return RatFunc::from_poly(delta_poly(ctx, k, f.num()));
    }
    let cached: Option<DeltaFamily> = {
        let cache = ctx.delta_cache.lock().unwrap();
        cache.get(f).cloned()
    };
    let mut family = cached.unwrap_or_else(|| DeltaFamily {
        polys: vec![f.num().clone()],
        reduced: vec![f.clone()],
    });
    if family.polys.len() <= k as usize {
        let a = f.num().clone();
        let b = f.den().clone();
        // sigma powers of b and the prefix products s_1...s_j
        let mut sig: Vec<Poly> = vec![b.clone()];
        let mut prefix: Vec<Poly> = vec![Poly::one(f.tower())]; // prefix[j] = s_1...s_j
        for i in 1..=k {
            sig.push(sig[(i - 1) as usize].subst_scaled_var(ctx.q()));
            prefix.push(prefix[(i - 1) as usize].mul(&sig[i as usize]));
        }
        for level in family.polys.len() as u64..=k {
            let mut p = delta_poly(ctx, level, &a).mul(&prefix[level as usize]);
            for i in 1..=level {
                let shifted = family.polys[(level - i) as usize].subst_scaled_var(&ctx.q_pow(i as i64));
                let term = shifted
                    .mul(&delta_poly(ctx, i, &b))
                    .mul(&prefix[(i - 1) as usize]);
                p = p.sub(&term);
            }
            let mut dens: Vec<Poly> = Vec::with_capacity(level as usize + 1);
            for s in sig.iter().take(level as usize + 1) {
                dens.push(s.clone());
            }
            family.reduced.push(reduce_known_denominator(p.clone(), &dens));
            family.polys.push(p);
        }
        let mut cache = ctx.delta_cache.lock().unwrap();
        let entry = cache.entry(f.clone()).or_insert_with(|| DeltaFamily {
            polys: Vec::new(),
            reduced: Vec::new(),
        });
        if entry.polys.len() < family.polys.len() {
            *entry = family.clone();
        }
    }
    family.reduced[k as usize].clone()
}

/// Structural constancy: membership in the coefficient tower. The
/// operational check (all `delta^(k)` vanish) is a test, not the definition.
pub fn is_constant(_ctx: &QContext, f: &RatFunc) -> bool {
    f.as_constant().is_some()
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

fn poly_term_strings(p: &Poly) -> Vec<(bool, String)> {
    // (negative, body) per term, descending exponents
    let mut out = Vec::new();
    for (e, c) in p.coeffs().iter().rev() {
        let (neg, coeff_str, coeff_is_simple_one) = if c.is_prime_field() {
            let s = format!("{c}");
            if let Some(m) = s.strip_prefix('-') {
                (true, m.to_string(), m == "1")
            } else {
                (false, s.clone(), s == "1")
            }
        } else {
            (false, format!("({c})"), false)
        };
        let body = match (*e, coeff_is_simple_one) {
            (0, _) => coeff_str,
            (1, true) => "t".to_string(),
            (1, false) => format!("{coeff_str}*t"),
            (_, true) => format!("t^{e}"),
            (_, false) => format!("{coeff_str}*t^{e}"),
        };
        out.push((neg, body));
    }
    out
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = poly_term_strings(self);
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (neg, body)) in terms.iter().enumerate() {
            if idx == 0 {
                if *neg {
                    write!(f, "-{body}")?;
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

impl fmt::Display for RatFunc {
    /// Emits the expression grammar with minimal parentheses; printed output
    /// reparses to an equal value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let num_s = format!("{}", self.num);
        let den_s = format!("{}", self.den);
        let num_wrapped = if self.num.coeffs().len() > 1 || num_s.starts_with('-') {
            format!("({num_s})")
        } else {
            num_s
        };
        let den_wrapped = if self.den.coeffs().len() > 1 {
            format!("({den_s})")
        } else {
            den_s
        };
        write!(f, "{num_wrapped}/{den_wrapped}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::QContext;

    fn ctx3() -> Arc<QContext> {
        QContext::cyclotomic(3).unwrap()
    }

    #[test]
    fn normalization() {
        let ctx = ctx3();
        let t = ctx.tower();
        // (t^2 - 1)/(t - 1) = t + 1
        let num = Poly::from_coeff_slice(t, &[t.from_i64(-1), t.zero(), t.one()]);
        let den = Poly::from_coeff_slice(t, &[t.from_i64(-1), t.one()]);
        let f = RatFunc::new(num, den).unwrap();
        assert!(f.is_polynomial());
        assert_eq!(f.num().degree(), Some(1));
        // denominator made monic
        let num = Poly::one(t);
        let den = Poly::from_coeff_slice(t, &[t.zero(), t.from_i64(2)]);
        let f = RatFunc::new(num, den).unwrap();
        assert!(f.den().leading_coeff().unwrap().is_one());
        assert_eq!(format!("{f}"), "1/2/t");
    }

    #[test]
    fn sigma_examples() {
        let ctx = ctx3();
        let t = RatFunc::var(ctx.tower());
        let t5 = t.pow(5).unwrap();
        assert_eq!(sigma_q(&ctx, &t5), t5.scale(&ctx.q_pow(5)));
        let inv_t = t.inv().unwrap();
        assert_eq!(sigma_q(&ctx, &inv_t), inv_t.scale(&ctx.q_pow(-1)));
        // n = 2: (t+1)/(t-1) -> (t-1)/(t+1)
        let ctx2 = QContext::cyclotomic(2).unwrap();
        let f = parse(&ctx2, "(t+1)/(t-1)").unwrap();
        let g = parse(&ctx2, "(t-1)/(t+1)").unwrap();
        assert_eq!(sigma_q(&ctx2, &f), g);
    }

    #[test]
    fn delta_poly_examples() {
        let ctx = ctx3();
        let tower = ctx.tower();
        let n = ctx.n();
        // delta^(n)(t^n) = 1
        let tn = Poly::monomial(tower.one(), n);
        assert!(delta_poly(&ctx, n, &tn).is_one());
        // delta^(1)(t^2) = (1+q) t
        let t2 = Poly::monomial(tower.one(), 2);
        let d = delta_poly(&ctx, 1, &t2);
        assert_eq!(d, Poly::monomial(tower.one().add(ctx.q()), 1));
        // n=3: delta^(3)(t^6) = 2 t^3
        let t6 = Poly::monomial(tower.one(), 6);
        assert_eq!(
            delta_poly(&ctx, 3, &t6),
            Poly::monomial(tower.from_i64(2), 3)
        );
        // delta^(0) = id
        assert_eq!(delta_poly(&ctx, 0, &t6), t6);
    }

    #[test]
    fn delta_fraction_examples() {
        let ctx = ctx3();
        let tower = ctx.tower();
        let one_over_t = RatFunc::monomial(tower.one(), -1);
        let expected = RatFunc::monomial(ctx.q_pow(-1).neg(), -2);
        assert_eq!(delta(&ctx, 1, &one_over_t), expected);
        // constants die for k >= 1
        let c = RatFunc::constant(tower.from_i64(5));
        for k in 1..=6 {
            assert!(delta(&ctx, k, &c).is_zero());
        }
        // delta^(2)(t^2) = 1
        let t2 = RatFunc::var(tower).pow(2).unwrap();
        assert!(delta(&ctx, 2, &t2).is_one());
    }

    #[test]
    fn delta_first_order_is_difference_quotient() {
        let ctx = ctx3();
        let f = parse(&ctx, "(t^2+1)/(t-1)").unwrap();
        let lhs = delta(&ctx, 1, &f);
        let num = sigma_q(&ctx, &f).sub(&f);
        let den = RatFunc::var(ctx.tower()).scale(&ctx.q().sub(&ctx.one()));
        assert_eq!(lhs, num.div(&den).unwrap());
    }

    #[test]
    fn leibniz_and_composition_small() {
        use rand::{Rng, SeedableRng};
        let ctx = ctx3();
        let n = ctx.n();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let rand_f = |rng: &mut rand_chacha::ChaCha8Rng| loop {
            let tower = ctx.tower();
            let num = Poly::from_coeff_slice(
                tower,
                &(0..3)
                    .map(|_| tower.from_i64(rng.gen_range(-3..=3)))
                    .collect::<Vec<_>>(),
            );
            let den = Poly::from_coeff_slice(
                tower,
                &(0..2)
                    .map(|_| tower.from_i64(rng.gen_range(-3..=3)))
                    .collect::<Vec<_>>(),
            );
            if !den.is_zero() {
                return RatFunc::new(num, den).unwrap();
            }
        };
        for _ in 0..10 {
            let f = rand_f(&mut rng);
            let g = rand_f(&mut rng);
            for k in 0..=n + 1 {
                // Leibniz
                let mut rhs = RatFunc::zero(ctx.tower());
                for i in 0..=k {
                    let j = k - i;
                    let term =
                        sigma_q_pow(&ctx, i as i64, &delta(&ctx, j, &f)).mul(&delta(&ctx, i, &g));
                    rhs = rhs.add(&term);
                }
                assert_eq!(delta(&ctx, k, &f.mul(&g)), rhs, "leibniz k={k}");
            }
            // composition: delta^(i) delta^(j) = binom(i+j, i)_q delta^(i+j)
            for i in 0..=n {
                for j in 0..=n {
                    let lhs = delta(&ctx, i, &delta(&ctx, j, &f));
                    let rhs = delta(&ctx, i + j, &f).scale(&q_binom(&ctx, i + j, i));
                    assert_eq!(lhs, rhs, "composition i={i} j={j}");
                }
            }
            // sigma-delta commutation with factor q^{-ji}
            for jj in 1..=2i64 {
                for i in 1..=n {
                    let lhs = sigma_q_pow(&ctx, jj, &delta(&ctx, i, &f));
                    let rhs = delta(&ctx, i, &sigma_q_pow(&ctx, jj, &f))
                        .scale(&ctx.q_pow(-jj * i as i64));
                    assert_eq!(lhs, rhs, "commutation j={jj} i={i}");
                }
            }
        }
    }

    #[test]
    fn nilpotence_of_delta1() {
        let ctx = ctx3();
        let f = parse(&ctx, "(t^2+g*t+1)/(t-2)").unwrap();
        let mut acc = f;
        for _ in 0..ctx.n() {
            acc = delta(&ctx, 1, &acc);
        }
        assert!(acc.is_zero());
    }

    #[test]
    fn constant_detection() {
        let ctx = ctx3();
        let five_thirds = parse(&ctx, "5/3").unwrap();
        assert!(is_constant(&ctx, &five_thirds));
        let t = RatFunc::var(ctx.tower());
        assert!(!is_constant(&ctx, &t));
        // t^n is not constant: delta^(n)(t^n) = 1
        let tn = t.pow(ctx.n() as i64).unwrap();
        assert!(!is_constant(&ctx, &tn));
        assert!(delta(&ctx, ctx.n(), &tn).is_one());
    }
}
