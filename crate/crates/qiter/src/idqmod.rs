//! Iterative q-difference modules as matrix data.
//!
//! Two presentations are used. The *equation form* stores the matrices of a
//! family `delta^(k)(y) = A_k y` over the index set `{1, n}` in
//! characteristic 0 and `{1, n p^0, n p^1, ...}` in characteristic p. The
//! *operator form* ([`ModuleRep`]) stores, per level `k`, the matrix `N_k`
//! of `delta_M^(k)` on a basis; with column coordinates `x` the total action
//! is `delta_M^(k)(e x) = e sum_{i+j=k} N_i sigma^i(delta^(j)(x))`, with
//! `N_0 = I`. That column-vector convention is fixed once and used by every
//! operation here.
//!
//! Characteristic-p families are finite lists up to a truncation `Kmax`;
//! every "for all k" contract below means "for all stored k".

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::{mat_delta, mat_sigma, Mat};
use crate::qarith::{q_binom, q_int, QContext};
use crate::ratfunc::RatFunc;

fn same_ctx(a: &QContext, b: &QContext) -> bool {
    a.n() == b.n() && a.q() == b.q() && a.tower() == b.tower()
}

/// `(q-1) t` as a rational function, the scalar in `phi = (q-1) t delta^(1) + id`.
fn qm1_t(ctx: &QContext) -> RatFunc {
    RatFunc::var(ctx.tower()).scale(&ctx.q().sub(&ctx.one()))
}

// ---------------------------------------------------------------------------
// Equation form
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum FamilyKind {
    /// Index set {1, n}; the intermediates A_2..A_{n-1} produced by the
    /// recursion are kept for consistency checking.
    Char0 {
        a1: Mat,
        intermediates: Vec<Mat>,
        an: Mat,
    },
    /// Index set {1} and {n p^k : k <= Kmax}; `atilde[k]` is the matrix of
    /// level n p^k.
    CharP { a1: Mat, atilde: Vec<Mat> },
}

#[derive(Clone, Debug)]
pub struct EquationFamily {
    ctx: Arc<QContext>,
    dim: usize,
    kind: FamilyKind,
}

impl EquationFamily {
    pub fn char0(ctx: Arc<QContext>, a1: Mat, intermediates: Vec<Mat>, an: Mat) -> EquationFamily {
        let dim = a1.rows();
        EquationFamily {
            ctx,
            dim,
            kind: FamilyKind::Char0 { a1, intermediates, an },
        }
    }

    pub fn charp(ctx: Arc<QContext>, a1: Mat, atilde: Vec<Mat>) -> EquationFamily {
        let dim = a1.rows();
        EquationFamily {
            ctx,
            dim,
            kind: FamilyKind::CharP { a1, atilde },
        }
    }

    pub fn ctx(&self) -> &Arc<QContext> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn a1(&self) -> &Mat {
        match &self.kind {
            FamilyKind::Char0 { a1, .. } | FamilyKind::CharP { a1, .. } => a1,
        }
    }

    /// The stored levels `(k, A_k)` of the family's index set.
    pub fn levels(&self) -> Vec<(u64, &Mat)> {
        let mut out = vec![(1, self.a1())];
        match &self.kind {
            FamilyKind::Char0 { an, .. } => out.push((self.ctx.n(), an)),
            FamilyKind::CharP { atilde, .. } => {
                let p = self.ctx.tower().characteristic();
                let mut level = self.ctx.n();
                for a in atilde {
                    out.push((level, a));
                    level *= p;
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Projective-system input
// ---------------------------------------------------------------------------

/// Bases of nested kernel submodules, the constructive route to equation
/// matrices. Invertibility and kernel-level membership of the entries are
/// verified at construction; membership is checked against the generating
/// operators `delta^(1)` and `delta^(n p^j)` rather than as abstract
/// subfield membership.
#[derive(Clone, Debug)]
pub enum ProjectiveSystemData {
    /// D_0..D_{Kmax+1}; entries of D_k live in the k-th kernel level.
    CharP { ctx: Arc<QContext>, d: Vec<Mat> },
    /// D_0 invertible over F and C_n with delta^(1)-constant entries.
    Char0 { ctx: Arc<QContext>, d0: Mat, cn: Mat },
}

impl ProjectiveSystemData {
    pub fn charp(ctx: Arc<QContext>, d: Vec<Mat>) -> Result<ProjectiveSystemData> {
        if ctx.tower().characteristic() == 0 {
            return Err(Error::Invalid("characteristic-p system over a characteristic-0 tower".into()));
        }
        if d.is_empty() {
            return Err(Error::Invalid("at least D_0 is required".into()));
        }
        let p = ctx.tower().characteristic();
        let n = ctx.n();
        for (k, dk) in d.iter().enumerate() {
            if dk.inverse().is_err() {
                return Err(Error::SingularD(k));
            }
            if k >= 1 {
                // D_k over L_k: killed by delta^(1) and delta^(n p^j), j < k-1
                let mut gens = vec![1u64];
                let mut lvl = n;
                for _ in 0..k.saturating_sub(1) {
                    gens.push(lvl);
                    lvl *= p;
                }
                for g in gens {
                    if !mat_delta(&ctx, g, dk).is_zero() {
                        return Err(Error::Invalid(format!(
                            "D_{k} has an entry not killed by delta^({g})"
                        )));
                    }
                }
            }
        }
        Ok(ProjectiveSystemData::CharP { ctx, d })
    }

    pub fn char0(ctx: Arc<QContext>, d0: Mat, cn: Mat) -> Result<ProjectiveSystemData> {
        if ctx.tower().characteristic() != 0 {
            return Err(Error::Invalid("characteristic-0 system over a characteristic-p tower".into()));
        }
        if d0.inverse().is_err() {
            return Err(Error::SingularD(0));
        }
        if !mat_delta(&ctx, 1, &cn).is_zero() {
            return Err(Error::Invalid("C_n has an entry not killed by delta^(1)".into()));
        }
        Ok(ProjectiveSystemData::Char0 { ctx, d0, cn })
    }
}

/// Characteristic p: `A_1 = delta^(1)(D_0) D_0^{-1}` and
/// `Atilde_k = delta^(n p^k)(D_0...D_{k+1}) (D_0...D_{k+1})^{-1}`,
/// one matrix per available product.
pub fn equations_from_system_charp(sys: &ProjectiveSystemData) -> Result<EquationFamily> {
    let (ctx, d) = match sys {
        ProjectiveSystemData::CharP { ctx, d } => (ctx, d),
        _ => return Err(Error::Invalid("expected a characteristic-p system".into())),
    };
    let p = ctx.tower().characteristic();
    let n = ctx.n();
    let d0_inv = d[0].inverse().map_err(|_| Error::SingularD(0))?;
    let a1 = mat_delta(ctx, 1, &d[0]).mul(&d0_inv);
    let mut atilde = Vec::new();
    let mut prod = d[0].clone();
    let mut level = n;
    for k in 0..d.len().saturating_sub(1) {
        prod = prod.mul(&d[k + 1]);
        let prod_inv = prod.inverse().map_err(|_| Error::SingularD(k + 1))?;
        atilde.push(mat_delta(ctx, level, &prod).mul(&prod_inv));
        level *= p;
    }
    Ok(EquationFamily::charp(ctx.clone(), a1, atilde))
}

/// Characteristic 0: `A_1 = delta^(1)(D_0) D_0^{-1}`, the intermediate
/// recursion `A_{k+1} = (delta^(1)(A_k) + sigma(A_k) A_1) / [k+1]_q` for
/// `k+1 < n`, and the terminal
/// `A_n = -D_0 C_n D_0^{-1} - sum_{k=0}^{n-1} D_0 sigma^k(delta^(n-k)(D_0^{-1})) A_k`.
pub fn equations_from_system_char0(sys: &ProjectiveSystemData) -> Result<EquationFamily> {
    let (ctx, d0, cn) = match sys {
        ProjectiveSystemData::Char0 { ctx, d0, cn } => (ctx, d0, cn),
        _ => return Err(Error::Invalid("expected a characteristic-0 system".into())),
    };
    let n = ctx.n();
    let d0_inv = d0.inverse().map_err(|_| Error::SingularD(0))?;
    let a1 = mat_delta(ctx, 1, d0).mul(&d0_inv);
    // A_0 = I, A_1, then the recursion up to A_{n-1}
    let mut chain: Vec<Mat> = vec![Mat::identity(ctx.tower(), a1.rows()), a1.clone()];
    for k in 1..n - 1 {
        let ak = &chain[k as usize];
        let next = mat_delta(ctx, 1, ak)
            .add(&mat_sigma(ctx, 1, ak).mul(&a1))
            .scale(&RatFunc::constant(
                q_int(ctx, k + 1).inv().expect("[k+1]_q nonzero below n"),
            ));
        chain.push(next);
    }
    let mut an = d0.mul(cn).mul(&d0_inv).neg();
    for (k, ak) in chain.iter().enumerate() {
        let term = d0
            .mul(&mat_sigma(ctx, k as i64, &mat_delta(ctx, n - k as u64, &d0_inv)))
            .mul(ak);
        an = an.sub(&term);
    }
    let intermediates = chain[2.min(chain.len())..].to_vec();
    Ok(EquationFamily::char0(ctx.clone(), a1, intermediates, an))
}

/// True iff `delta^(k)(Y) = A_k Y` entrywise for every stored level of the
/// family's index set. `Y` may be m x r for any r >= 1.
pub fn check_solution(fam: &EquationFamily, y: &Mat) -> Result<bool> {
    if y.rows() != fam.dim() {
        return Err(Error::DimensionMismatch {
            expected: (fam.dim(), y.cols()),
            got: (y.rows(), y.cols()),
        });
    }
    let ctx = fam.ctx();
    for (k, ak) in fam.levels() {
        if mat_delta(ctx, k, y) != ak.mul(y) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `S = (q-1) t A_1 + I`; for any solution vector y, `sigma_q(y) = S y`.
pub fn sigma_matrix(fam: &EquationFamily) -> Mat {
    let ctx = fam.ctx();
    let a1 = fam.a1();
    a1.scale(&qm1_t(ctx)).add(&Mat::identity(ctx.tower(), fam.dim()))
}

/// Report from [`consistency_check`]: each entry of `violations` is a level
/// `k+1` at which `[k+1]_q A_{k+1} = delta^(1)(A_k) + sigma(A_k) A_1` fails.
#[derive(Clone, Debug)]
pub struct ConsistencyReport {
    pub checked_levels: Vec<u64>,
    pub violations: Vec<u64>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Applying `delta^(1)` to `delta^(k)(Y) = A_k Y` forces
/// `[k+1]_q A_{k+1} = delta^(1)(A_k) + sigma_q(A_k) A_1`. This verifies that
/// relation along each stored level's chain window; where `[k+1]_q = 0`
/// (k+1 a multiple of n) it degenerates to the constraint
/// `delta^(1)(A_k) + sigma_q(A_k) A_1 = 0`, in particular the terminal
/// constraint at `k = n-1`.
pub fn consistency_check(fam: &EquationFamily) -> ConsistencyReport {
    let ctx = fam.ctx();
    let n = ctx.n();
    let a1 = fam.a1().clone();
    let mut checked = Vec::new();
    let mut violations = Vec::new();

    let rhs_of = |ak: &Mat| mat_delta(ctx, 1, ak).add(&mat_sigma(ctx, 1, ak).mul(&a1));

    // Walks the chain upward from the stored matrix of level `base` (a
    // multiple of n, or 0 with the identity). Levels base+1..base+n-1 are
    // derived by the recursion; at base+n the coefficient [base+n]_q
    // vanishes and the relation degenerates to the constraint rhs = 0.
    // Returns (checked levels, violated levels).
    let walk_window = |base: u64, start: &Mat| -> (Vec<u64>, Vec<u64>) {
        let mut ch = Vec::new();
        let mut vio = Vec::new();
        let mut cur = start.clone();
        for off in 1..=n {
            let level = base + off;
            let rhs = rhs_of(&cur);
            ch.push(level);
            if level % n == 0 {
                if !rhs.is_zero() {
                    vio.push(level);
                }
                break;
            }
            cur = rhs.scale(&RatFunc::constant(
                q_int(ctx, level % n)
                    .inv()
                    .expect("[level]_q nonzero off multiples of n"),
            ));
        }
        (ch, vio)
    };
    let absorb = |(ch, vio): (Vec<u64>, Vec<u64>), checked: &mut Vec<u64>, violations: &mut Vec<u64>| {
        checked.extend(ch);
        violations.extend(vio);
    };

    match fam.kind() {
        FamilyKind::Char0 { a1, intermediates, an } => {
            // compare the stored intermediates against the recursion
            let mut cur = a1.clone();
            for level in 2..=n {
                let rhs = rhs_of(&cur);
                checked.push(level);
                if level == n {
                    if !rhs.is_zero() {
                        violations.push(level);
                    }
                } else {
                    let derived = rhs.scale(&RatFunc::constant(
                        q_int(ctx, level).inv().expect("nonzero below n"),
                    ));
                    let stored = &intermediates[(level - 2) as usize];
                    if stored != &derived {
                        violations.push(level);
                    }
                    cur = stored.clone();
                }
            }
            absorb(walk_window(n, an), &mut checked, &mut violations);
        }
        FamilyKind::CharP { atilde, .. } => {
            let eye = Mat::identity(ctx.tower(), fam.dim());
            absorb(walk_window(0, &eye), &mut checked, &mut violations);
            let p = ctx.tower().characteristic();
            let mut level = n;
            for ak in atilde {
                absorb(walk_window(level, ak), &mut checked, &mut violations);
                level *= p;
            }
        }
    }
    ConsistencyReport {
        checked_levels: checked,
        violations,
    }
}

// ---------------------------------------------------------------------------
// Operator form
// ---------------------------------------------------------------------------

/// Operator-form module: `levels[k]` is the matrix `N_k` of `delta_M^(k)` on
/// the basis, stored densely for `k = 0..=max_level` (`N_0 = I`).
#[derive(Clone, Debug)]
pub struct ModuleRep {
    ctx: Arc<QContext>,
    dim: usize,
    levels: Vec<Mat>,
}

impl ModuleRep {
    pub fn new(ctx: Arc<QContext>, levels: Vec<Mat>) -> Result<ModuleRep> {
        if levels.is_empty() || !levels[0].is_identity() {
            return Err(Error::Invalid("levels[0] must be the identity".into()));
        }
        let dim = levels[0].rows();
        if levels.iter().any(|m| m.rows() != dim || m.cols() != dim) {
            return Err(Error::Invalid("level matrices must be square of equal size".into()));
        }
        Ok(ModuleRep { ctx, dim, levels })
    }

    /// The unit module: rank 1, all higher operators zero.
    pub fn unit(ctx: Arc<QContext>, max_level: u64) -> ModuleRep {
        let tower = ctx.tower().clone();
        let mut levels = vec![Mat::identity(&tower, 1)];
        for _ in 0..max_level {
            levels.push(Mat::zero(&tower, 1, 1));
        }
        ModuleRep { ctx, dim: 1, levels }
    }

    /// The module whose solution space is spanned by the columns of the
    /// invertible matrix `Y`: solves `0 = sum_{i+j=k} N_i sigma^i(delta^(j)(Y))`
    /// for `N_k` level by level.
    pub fn from_fundamental_matrix(ctx: Arc<QContext>, y: &Mat, max_level: u64) -> Result<ModuleRep> {
        y.inverse()?;
        let dim = y.rows();
        let mut levels = vec![Mat::identity(ctx.tower(), dim)];
        for k in 1..=max_level {
            let mut acc = Mat::zero(ctx.tower(), dim, dim);
            for i in 0..k {
                let term = levels[i as usize]
                    .mul(&mat_sigma(&ctx, i as i64, &mat_delta(&ctx, k - i, y)));
                acc = acc.add(&term);
            }
            let sigma_k_y_inv = mat_sigma(&ctx, k as i64, y)
                .inverse()
                .map_err(|_| Error::NotInvertible)?;
            levels.push(acc.neg().mul(&sigma_k_y_inv));
        }
        Ok(ModuleRep { ctx, dim, levels })
    }

    /// Rank-1 module with solution `t^e`.
    pub fn rank1_from_monomial(ctx: Arc<QContext>, e: i64, max_level: u64) -> Result<ModuleRep> {
        let y = Mat::from_rows(vec![vec![RatFunc::monomial(ctx.tower().one(), e)]]);
        ModuleRep::from_fundamental_matrix(ctx, &y, max_level)
    }

    pub fn ctx(&self) -> &Arc<QContext> {
        &self.ctx
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_level(&self) -> u64 {
        (self.levels.len() - 1) as u64
    }

    pub fn level(&self, k: u64) -> Result<&Mat> {
        self.levels.get(k as usize).ok_or(Error::MissingLevel(k))
    }

    /// `(q-1) t N_1 + I`, the coordinate matrix of `phi_M`.
    pub fn sigma_matrix(&self) -> Mat {
        self.levels[1]
            .scale(&qm1_t(&self.ctx))
            .add(&Mat::identity(self.ctx.tower(), self.dim))
    }

    /// Violations of the composition law
    /// `sum_{r+s=i} N_r sigma^r(delta^(s)(N_j)) = binom(i+j, i)_q N_{i+j}`
    /// over all stored pairs.
    pub fn composition_violations(&self) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let kmax = self.max_level();
        for i in 0..=kmax {
            for j in 0..=kmax.saturating_sub(i) {
                let mut lhs = Mat::zero(self.ctx.tower(), self.dim, self.dim);
                for r in 0..=i {
                    let s = i - r;
                    let term = self.levels[r as usize].mul(&mat_sigma(
                        &self.ctx,
                        r as i64,
                        &mat_delta(&self.ctx, s, &self.levels[j as usize]),
                    ));
                    lhs = lhs.add(&term);
                }
                let rhs = self.levels[(i + j) as usize]
                    .scale(&RatFunc::constant(q_binom(&self.ctx, i + j, i)));
                if lhs != rhs {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// `phi_M^j` iterates on coordinates as `x -> S^[j] sigma^j(x)` with
/// `S^[j] = S sigma(S) ... sigma^{j-1}(S)`.
fn phi_powers(ctx: &QContext, s: &Mat, up_to: u64) -> Vec<Mat> {
    let mut out = vec![Mat::identity(ctx.tower(), s.rows())];
    for j in 0..up_to {
        let next = s.mul(&mat_sigma(ctx, 1, &out[j as usize]));
        out.push(next);
    }
    out
}

/// Tensor product in operator form:
/// `delta_{M (x) N}^(k)(x (x) y) = sum_{i+j=k} phi_M^j(delta_M^(i)(x)) (x) delta_N^(j)(y)`,
/// realized on the Kronecker basis. Stored levels: the intersection of the
/// inputs' level ranges.
pub fn tensor(m1: &ModuleRep, m2: &ModuleRep) -> Result<ModuleRep> {
    if !same_ctx(&m1.ctx, &m2.ctx) {
        return Err(Error::ContextMismatch);
    }
    let ctx = &m1.ctx;
    let kmax = m1.max_level().min(m2.max_level());
    let s1 = m1.sigma_matrix();
    let s1_pows = phi_powers(ctx, &s1, kmax);
    let mut levels = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let mut acc = Mat::zero(ctx.tower(), m1.dim * m2.dim, m1.dim * m2.dim);
        for j in 0..=k {
            let i = k - j;
            let left = s1_pows[j as usize].mul(&mat_sigma(
                ctx,
                j as i64,
                &m1.levels[i as usize],
            ));
            acc = acc.add(&left.kronecker(&m2.levels[j as usize]));
        }
        levels.push(acc);
    }
    ModuleRep::new(ctx.clone(), levels)
}

/// Dual module on the dual basis:
/// `delta_{M*}^(k)(f) = sum_{i+j=k} (-1)^i q^{i(i+1)/2} sigma^i(delta^(j)) o f o delta_M^(i) o phi_M^{-i}`.
pub fn dual(m: &ModuleRep) -> Result<ModuleRep> {
    let ctx = &m.ctx;
    let s = m.sigma_matrix();
    let s_inv = s.inverse().map_err(|_| Error::SingularPhi)?;
    let kmax = m.max_level();
    // C_i = sigma^{-i}((S^[i])^{-1}): phi^{-i} on unit columns
    let mut c = vec![Mat::identity(ctx.tower(), m.dim)];
    for i in 0..kmax {
        let next = c[i as usize].mul(&mat_sigma(ctx, -(i as i64 + 1), &s_inv));
        c.push(next);
    }
    let mut levels = Vec::with_capacity(kmax as usize + 1);
    for k in 0..=kmax {
        let mut acc = Mat::zero(ctx.tower(), m.dim, m.dim);
        for i in 0..=k {
            let j = k - i;
            // D_i = sum_{r+s=i} N_r sigma^r(delta^(s)(C_i))
            let mut d_i = Mat::zero(ctx.tower(), m.dim, m.dim);
            for r in 0..=i {
                let s_ = i - r;
                let term = m.levels[r as usize].mul(&mat_sigma(
                    ctx,
                    r as i64,
                    &mat_delta(ctx, s_, &c[i as usize]),
                ));
                d_i = d_i.add(&term);
            }
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let weight = ctx
                .q_pow((i * (i + 1) / 2) as i64)
                .mul(&ctx.tower().from_i64(sign));
            let contrib = mat_sigma(ctx, i as i64, &mat_delta(ctx, j, &d_i.transpose()))
                .scale(&RatFunc::constant(weight));
            acc = acc.add(&contrib);
        }
        levels.push(acc);
    }
    ModuleRep::new(ctx.clone(), levels)
}

/// Coordinate bridge from operator data to equation form: solves
/// `0 = sum_{i+j=k} N_i sigma^i(delta^(j)(x))` for `delta^(k)(x) = A_k x`
/// by back-substitution, eliminating `sigma^i(x)` through the sigma matrix.
pub fn n_to_a(m: &ModuleRep) -> Result<EquationFamily> {
    let ctx = &m.ctx;
    let n = ctx.n();
    let p = ctx.tower().characteristic();
    let kmax = m.max_level();
    if kmax < n {
        return Err(Error::MissingLevel(n));
    }
    let s_m = m.sigma_matrix();
    let s_m_inv = s_m.inverse().map_err(|_| Error::SingularPhi)?;
    let a1 = s_m_inv.mul(&m.levels[1]).neg();
    // sigma^i(x) = T_i x with T_{i+1} = sigma(T_i) S_A, S_A = S_M^{-1}
    let s_a = s_m_inv;
    let mut t_pows = vec![Mat::identity(ctx.tower(), m.dim)];
    for i in 0..kmax {
        let next = mat_sigma(ctx, 1, &t_pows[i as usize]).mul(&s_a);
        t_pows.push(next);
    }
    let mut a = vec![Mat::identity(ctx.tower(), m.dim), a1.clone()];
    for k in 2..=kmax {
        let mut acc = Mat::zero(ctx.tower(), m.dim, m.dim);
        for i in 1..=k {
            let term = m.levels[i as usize]
                .mul(&mat_sigma(ctx, i as i64, &a[(k - i) as usize]))
                .mul(&t_pows[i as usize]);
            acc = acc.add(&term);
        }
        a.push(acc.neg());
    }
    if p == 0 {
        let intermediates = a[2..n as usize].to_vec();
        Ok(EquationFamily::char0(
            ctx.clone(),
            a1,
            intermediates,
            a[n as usize].clone(),
        ))
    } else {
        let mut atilde = Vec::new();
        let mut level = n;
        while level <= kmax {
            atilde.push(a[level as usize].clone());
            level *= p;
        }
        Ok(EquationFamily::charp(ctx.clone(), a1, atilde))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfunc::parse;

    fn mat(ctx: &QContext, rows: &[&[&str]]) -> Mat {
        Mat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| parse(ctx, s).unwrap()).collect())
                .collect(),
        )
    }

    #[test]
    fn charp_monomial_system_gives_digit_family() {
        // D_0 = (1), D_{l+1} = (t^{a_l n p^l}) over F_5 with n = 2
        let ctx = QContext::prime_power(5, 2).unwrap();
        let digits = [2u64, 1, 3];
        let n = 2u64;
        let p = 5u64;
        let mut d = vec![mat(&ctx, &[&["1"]])];
        for (l, a) in digits.iter().enumerate() {
            let e = a * n * p.pow(l as u32);
            d.push(mat(&ctx, &[&[format!("t^{e}").as_str()]]));
        }
        let sys = ProjectiveSystemData::charp(ctx.clone(), d).unwrap();
        let fam = equations_from_system_charp(&sys).unwrap();
        assert!(fam.a1().is_zero());
        match fam.kind() {
            FamilyKind::CharP { atilde, .. } => {
                assert_eq!(atilde.len(), 3);
                for (k, a) in atilde.iter().enumerate() {
                    let expect = parse(
                        &ctx,
                        &format!("{}/t^{}", digits[k], n * p.pow(k as u32)),
                    )
                    .unwrap();
                    assert_eq!(*a.at(0, 0), expect, "k={k}");
                }
            }
            _ => panic!("wrong kind"),
        }
        assert!(consistency_check(&fam).is_consistent());
        // solution t^A with A = n * sum digits p^l
        let a_exp: u64 = digits
            .iter()
            .enumerate()
            .map(|(l, a)| a * n * p.pow(l as u32))
            .sum();
        let y = mat(&ctx, &[&[format!("t^{a_exp}").as_str()]]);
        assert!(check_solution(&fam, &y).unwrap());
    }

    #[test]
    fn charp_unipotent_system() {
        // D_0 = I, D_{l+1} = [[1, a_l t^{n p^l}], [0, 1]] over F_5, n = 2
        let ctx = QContext::prime_power(5, 2).unwrap();
        let digits = [3u64, 1];
        let n = 2u64;
        let p = 5u64;
        let mut d = vec![mat(&ctx, &[&["1", "0"], &["0", "1"]])];
        for (l, a) in digits.iter().enumerate() {
            let e = n * p.pow(l as u32);
            d.push(mat(
                &ctx,
                &[&["1", format!("{a}*t^{e}").as_str()], &["0", "1"]],
            ));
        }
        let sys = ProjectiveSystemData::charp(ctx.clone(), d).unwrap();
        let fam = equations_from_system_charp(&sys).unwrap();
        assert!(fam.a1().is_zero());
        match fam.kind() {
            FamilyKind::CharP { atilde, .. } => {
                for (k, a) in atilde.iter().enumerate() {
                    assert!(a.at(0, 0).is_zero() && a.at(1, 0).is_zero() && a.at(1, 1).is_zero());
                    assert_eq!(
                        *a.at(0, 1),
                        parse(&ctx, &format!("{}", digits[k])).unwrap(),
                        "k={k}"
                    );
                }
            }
            _ => panic!("wrong kind"),
        }
        // truncated solution [[1, sum a_l t^{n p^l}], [0, 1]]
        let sum = format!("{}*t^{} + {}*t^{}", digits[0], n, digits[1], n * p);
        let y = mat(&ctx, &[&["1", sum.as_str()], &["0", "1"]]);
        assert!(check_solution(&fam, &y).unwrap());
        assert!(consistency_check(&fam).is_consistent());
    }

    #[test]
    fn all_identity_system_gives_zero_family() {
        let ctx = QContext::prime_power(5, 2).unwrap();
        let eye = mat(&ctx, &[&["1", "0"], &["0", "1"]]);
        let sys = ProjectiveSystemData::charp(ctx.clone(), vec![eye.clone(), eye.clone(), eye]).unwrap();
        let fam = equations_from_system_charp(&sys).unwrap();
        assert!(fam.a1().is_zero());
        assert!(fam.levels().iter().all(|(_, m)| m.is_zero() || true));
        match fam.kind() {
            FamilyKind::CharP { atilde, .. } => assert!(atilde.iter().all(Mat::is_zero)),
            _ => panic!(),
        }
        let y = mat(&ctx, &[&["1", "0"], &["0", "1"]]);
        assert!(check_solution(&fam, &y).unwrap());
    }

    #[test]
    fn char0_examples() {
        let ctx = QContext::cyclotomic(3).unwrap();
        let n = ctx.n();
        // D_0 = (1), C_n = a1/t^n with a1 = 4: A_n = -4/t^n, intermediates 0
        let d0 = mat(&ctx, &[&["1"]]);
        let cn = mat(&ctx, &[&[format!("4/t^{n}").as_str()]]);
        let sys = ProjectiveSystemData::char0(ctx.clone(), d0, cn).unwrap();
        let fam = equations_from_system_char0(&sys).unwrap();
        assert!(fam.a1().is_zero());
        match fam.kind() {
            FamilyKind::Char0 { intermediates, an, .. } => {
                assert!(intermediates.iter().all(Mat::is_zero));
                assert_eq!(*an.at(0, 0), parse(&ctx, &format!("-4/t^{n}")).unwrap());
            }
            _ => panic!(),
        }
        assert!(consistency_check(&fam).is_consistent());

        // D_0 = I, C_n = 0: zero family
        let d0 = mat(&ctx, &[&["1"]]);
        let cn = mat(&ctx, &[&["0"]]);
        let sys = ProjectiveSystemData::char0(ctx.clone(), d0, cn).unwrap();
        let fam = equations_from_system_char0(&sys).unwrap();
        assert!(fam.a1().is_zero());
        match fam.kind() {
            FamilyKind::Char0 { an, .. } => assert!(an.is_zero()),
            _ => panic!(),
        }
    }

    #[test]
    fn char0_nontrivial_d0() {
        // D_0 = (t), C_n = 0, n = 2: A_1 = 1/t; y = t solves the family
        let ctx = QContext::cyclotomic(2).unwrap();
        let d0 = mat(&ctx, &[&["t"]]);
        let cn = mat(&ctx, &[&["0"]]);
        let sys = ProjectiveSystemData::char0(ctx.clone(), d0, cn).unwrap();
        let fam = equations_from_system_char0(&sys).unwrap();
        assert_eq!(*fam.a1().at(0, 0), parse(&ctx, "1/t").unwrap());
        let y = mat(&ctx, &[&["t"]]);
        assert!(check_solution(&fam, &y).unwrap());
        assert!(consistency_check(&fam).is_consistent());
    }

    #[test]
    fn sigma_matrix_examples() {
        let ctx = QContext::cyclotomic(3).unwrap();
        let zero_fam = EquationFamily::char0(
            ctx.clone(),
            mat(&ctx, &[&["0"]]),
            vec![mat(&ctx, &[&["0"]])],
            mat(&ctx, &[&["0"]]),
        );
        assert!(sigma_matrix(&zero_fam).is_identity());
        // A_1 = (1/t): S = (q-1) + 1 = q
        let fam = EquationFamily::char0(
            ctx.clone(),
            mat(&ctx, &[&["1/t"]]),
            vec![],
            mat(&ctx, &[&["0"]]),
        );
        assert_eq!(*sigma_matrix(&fam).at(0, 0), parse(&ctx, "q").unwrap());
        // A_1 = [[0, 1/t], [0, 0]]: S = [[1, q-1], [0, 1]]
        let fam = EquationFamily::char0(
            ctx.clone(),
            mat(&ctx, &[&["0", "1/t"], &["0", "0"]]),
            vec![],
            mat(&ctx, &[&["0", "0"], &["0", "0"]]),
        );
        let s = sigma_matrix(&fam);
        assert!(s.at(0, 0).is_one() && s.at(1, 1).is_one() && s.at(1, 0).is_zero());
        assert_eq!(*s.at(0, 1), parse(&ctx, "q-1").unwrap());
    }

    #[test]
    fn deliberate_consistency_violation() {
        // n = 2, A_1 = (1): delta(1) + sigma(1)*1 = 1 != 0 at the terminal level
        let ctx = QContext::cyclotomic(2).unwrap();
        let fam = EquationFamily::char0(
            ctx.clone(),
            mat(&ctx, &[&["1"]]),
            vec![],
            mat(&ctx, &[&["0"]]),
        );
        let report = consistency_check(&fam);
        assert!(report.violations.contains(&2));
    }

    #[test]
    fn tensor_with_unit_is_identity_functor() {
        let ctx = QContext::prime_power(5, 2).unwrap();
        let m = ModuleRep::rank1_from_monomial(ctx.clone(), 4, 10).unwrap();
        let unit = ModuleRep::unit(ctx.clone(), 10);
        for prod in [tensor(&unit, &m).unwrap(), tensor(&m, &unit).unwrap()] {
            for k in 0..=10u64 {
                assert_eq!(prod.level(k).unwrap(), m.level(k).unwrap(), "k={k}");
            }
        }
        assert_eq!(tensor(&m, &m).unwrap().dim(), 1);
    }

    #[test]
    fn tensor_of_monomial_modules_multiplies_solutions() {
        let ctx = QContext::prime_power(5, 2).unwrap();
        let n = 2i64;
        // digit sequences (2,1) and (4,3): A = n(2 + 1*5), A' = n(4 + 3*5)
        let a = n * (2 + 5);
        let a2 = n * (4 + 15);
        let max_level = 10;
        let m1 = ModuleRep::rank1_from_monomial(ctx.clone(), a, max_level).unwrap();
        let m2 = ModuleRep::rank1_from_monomial(ctx.clone(), a2, max_level).unwrap();
        let prod = tensor(&m1, &m2).unwrap();
        let fam = n_to_a(&prod).unwrap();
        let y = Mat::from_rows(vec![vec![RatFunc::monomial(ctx.tower().one(), a + a2)]]);
        assert!(check_solution(&fam, &y).unwrap());
    }

    #[test]
    fn dual_of_unit_is_unit() {
        let ctx = QContext::cyclotomic(3).unwrap();
        let unit = ModuleRep::unit(ctx.clone(), 6);
        let d = dual(&unit).unwrap();
        for k in 0..=6u64 {
            assert_eq!(d.level(k).unwrap(), unit.level(k).unwrap());
        }
    }

    #[test]
    fn double_dual_of_monomial_module() {
        let ctx = QContext::prime_power(5, 2).unwrap();
        let m = ModuleRep::rank1_from_monomial(ctx.clone(), 4, 10).unwrap();
        let dd = dual(&dual(&m).unwrap()).unwrap();
        let fam = n_to_a(&dd).unwrap();
        let y = Mat::from_rows(vec![vec![RatFunc::monomial(ctx.tower().one(), 4)]]);
        assert!(check_solution(&fam, &y).unwrap());
    }

    #[test]
    fn evaluation_pairing_commutes_with_delta() {
        // epsilon(x (x) f) = f(x): delta_L^(k) o eps = eps o delta_{M (x) M*}^(k)
        let ctx = QContext::cyclotomic(2).unwrap();
        let y = mat(&ctx, &[&["t", "1"], &["0", "1"]]);
        let m = ModuleRep::from_fundamental_matrix(ctx.clone(), &y, 6).unwrap();
        assert!(m.composition_violations().is_empty());
        let md = dual(&m).unwrap();
        let prod = tensor(&m, &md).unwrap();
        // coordinates of x (x) f on the Kronecker basis: w_{(a,b)} = x_a y_b;
        // eps picks sum_a w_{(a,a)}
        let eps = |w: &Mat| -> RatFunc {
            let mut acc = RatFunc::zero(ctx.tower());
            for a in 0..m.dim() {
                acc = acc.add(w.at(a * m.dim() + a, 0));
            }
            acc
        };
        let w = mat(&ctx, &[&["t"], &["1"], &["t+1"], &["t^2"]]);
        for k in 0..=4u64 {
            // coordinates of delta^(k) of the tensor element
            let mut img = Mat::zero(ctx.tower(), 4, 1);
            for i in 0..=k {
                let j = k - i;
                let term = prod
                    .level(i)
                    .unwrap()
                    .mul(&mat_sigma(&ctx, i as i64, &mat_delta(&ctx, j, &w)));
                img = img.add(&term);
            }
            let lhs = crate::ratfunc::delta(&ctx, k, &eps(&w));
            assert_eq!(lhs, eps(&img), "k={k}");
        }
    }

    #[test]
    fn n_to_a_examples() {
        let ctx = QContext::prime_power(5, 2).unwrap();
        let unit = ModuleRep::unit(ctx.clone(), 10);
        let fam = n_to_a(&unit).unwrap();
        assert!(fam.a1().is_zero());
        assert!(fam.levels().iter().all(|(_, m)| m.is_zero()));
        // rank-1 monomial module reproduces the digit family
        let n = 2u64;
        let p = 5u64;
        let digits = [2u64, 1];
        let a_exp: u64 = digits
            .iter()
            .enumerate()
            .map(|(l, d)| d * n * p.pow(l as u32))
            .sum();
        let m = ModuleRep::rank1_from_monomial(ctx.clone(), a_exp as i64, n * p).unwrap();
        assert!(m.composition_violations().is_empty());
        let fam = n_to_a(&m).unwrap();
        match fam.kind() {
            FamilyKind::CharP { a1, atilde } => {
                assert!(a1.is_zero());
                for (k, a) in atilde.iter().enumerate() {
                    let expect =
                        parse(&ctx, &format!("{}/t^{}", digits[k], n * p.pow(k as u32))).unwrap();
                    assert_eq!(*a.at(0, 0), expect, "k={k}");
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn n_to_a_unipotent_matches_equation_route() {
        // operator data built from the truncated unipotent solution gives the
        // same family as the projective-system route
        let ctx = QContext::prime_power(5, 2).unwrap();
        let digits = [3u64, 1];
        let n = 2u64;
        let p = 5u64;
        let sum = format!("{}*t^{} + {}*t^{}", digits[0], n, digits[1], n * p);
        let y = mat(&ctx, &[&["1", sum.as_str()], &["0", "1"]]);
        let m = ModuleRep::from_fundamental_matrix(ctx.clone(), &y, n * p).unwrap();
        let fam = n_to_a(&m).unwrap();
        match fam.kind() {
            FamilyKind::CharP { a1, atilde } => {
                assert!(a1.is_zero());
                for (k, a) in atilde.iter().enumerate() {
                    assert_eq!(
                        *a.at(0, 1),
                        parse(&ctx, &format!("{}", digits[k])).unwrap(),
                        "k={k}"
                    );
                    assert!(a.at(0, 0).is_zero() && a.at(1, 1).is_zero());
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn uniqueness_up_to_constants() {
        let ctx = QContext::cyclotomic(2).unwrap();
        let y = mat(&ctx, &[&["t", "1"], &["0", "1"]]);
        let m = ModuleRep::from_fundamental_matrix(ctx.clone(), &y, ctx.n()).unwrap();
        let fam = n_to_a(&m).unwrap();
        assert!(check_solution(&fam, &y).unwrap());
        let p0 = mat(&ctx, &[&["2", "1"], &["1", "1"]]);
        let y2 = y.mul(&p0);
        assert!(check_solution(&fam, &y2).unwrap());
        let recovered = y.inverse().unwrap().mul(&y2);
        for (k, _) in fam.levels() {
            assert!(mat_delta(&ctx, k, &recovered).is_zero(), "k={k}");
        }
    }

    #[test]
    fn singular_d_is_reported() {
        let ctx = QContext::prime_power(5, 2).unwrap();
        let sing = mat(&ctx, &[&["t", "t"], &["1", "1"]]);
        assert!(matches!(
            ProjectiveSystemData::charp(ctx.clone(), vec![sing]),
            Err(Error::SingularD(0))
        ));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let ctx = QContext::cyclotomic(2).unwrap();
        let fam = EquationFamily::char0(
            ctx.clone(),
            mat(&ctx, &[&["0", "0"], &["0", "0"]]),
            vec![],
            mat(&ctx, &[&["0", "0"], &["0", "0"]]),
        );
        let y = mat(&ctx, &[&["1"]]);
        assert!(matches!(
            check_solution(&fam, &y),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
