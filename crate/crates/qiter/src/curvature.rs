//! The curvature recursion and the isotriviality survey across finite
//! places.
//!
//! For a module presented by `delta^(1) e = 0`, `delta^(n) e = A e`, the
//! iterates of `delta^(n)` are captured by
//! `A_[1] = A`, `A_[k+1] = delta^(n)(A_[k]) + A_[k] A_[1]`. At a finite
//! place `v` with residue characteristic `p` the curvature is the `p`-fold
//! iterate: the module reduces well and has vanishing curvature at almost
//! all places exactly when it is expected to be isotrivial.
//!
//! Production path is reduce-then-iterate: `p` recursion steps over the
//! residue field are cheap, while `A_[p]` over the global field blows up.
//! The commutation of the two routes at good places is part of the test
//! suite.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactfield::{mult_order, reduce_at_place, residue_places, Place};
use crate::matrix::{mat_delta, Mat};
use crate::qarith::QContext;
use crate::ratfunc::{Poly, RatFunc};

/// Matrix data for the curvature recursion: a characteristic-0 context and
/// the matrix `A` of `delta^(n)` in a basis with vanishing `delta^(1)` part.
#[derive(Clone)]
pub struct CurvatureInput {
    pub ctx: Arc<QContext>,
    pub a: Mat,
}

impl CurvatureInput {
    pub fn new(ctx: Arc<QContext>, a: Mat) -> Result<CurvatureInput> {
        if ctx.tower().characteristic() != 0 {
            return Err(Error::Invalid("curvature input must live in characteristic 0".into()));
        }
        if a.rows() != a.cols() {
            return Err(Error::DimensionMismatch {
                expected: (a.rows(), a.rows()),
                got: (a.rows(), a.cols()),
            });
        }
        Ok(CurvatureInput { ctx, a })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlaceStatus {
    Vanishes,
    NonZero { witness: String },
    SkippedBadReduction,
    SkippedOrderLoss,
}

/// Per-place outcome. `factor` is in balanced representatives, matching the
/// report file format; it is absent when the whole prime was skipped before
/// places could be enumerated.
#[derive(Clone, Debug, Serialize)]
pub struct PlaceReport {
    pub p: u64,
    pub factor: Option<Vec<i64>>,
    pub status: PlaceStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveyReport {
    pub places: Vec<PlaceReport>,
    pub summary: SurveySummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveySummary {
    pub vanishes: usize,
    pub nonzero: usize,
    pub skipped: usize,
    pub verdict: String,
    pub witnesses: Vec<(u64, Vec<i64>)>,
}

/// `A_[k]` per the recursion, `delta^(n)` applied entrywise.
pub fn iterate_matrix(ctx: &QContext, a: &Mat, k: u64) -> Mat {
    assert!(k >= 1, "the recursion starts at A_[1]");
    let n = ctx.n();
    let mut acc = a.clone();
    for _ in 1..k {
        acc = mat_delta(ctx, n, &acc).add(&acc.mul(a));
    }
    acc
}

fn reduce_ratfunc(f: &RatFunc, v: &Place) -> Result<RatFunc> {
    let reduce_poly = |p: &Poly| -> Result<Poly> {
        let mut out = Poly::zero(&v.residue_tower);
        for (e, c) in p.coeffs() {
            let rc = reduce_at_place(c, v)?;
            out = out.add(&Poly::monomial(rc, *e));
        }
        Ok(out)
    };
    // the denominator is monic, so it keeps its degree and stays nonzero
    RatFunc::new(reduce_poly(f.num())?, reduce_poly(f.den())?)
}

/// Reduces a matrix entrywise at a place.
pub fn reduce_matrix(m: &Mat, v: &Place) -> Result<Mat> {
    let mut rows = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let mut row = Vec::with_capacity(m.cols());
        for j in 0..m.cols() {
            row.push(reduce_ratfunc(m.at(i, j), v)?);
        }
        rows.push(row);
    }
    Ok(Mat::from_rows(rows))
}

/// Builds the residue context at `v` when the reduced q keeps exact order n.
pub fn residue_context(ctx: &QContext, v: &Place) -> Result<Option<Arc<QContext>>> {
    let q_red = reduce_at_place(ctx.q(), v)?;
    if q_red.is_zero() || mult_order(&q_red, ctx.n())? != Some(ctx.n()) {
        return Ok(None);
    }
    Ok(Some(QContext::new(
        v.residue_tower.clone(),
        q_red,
        ctx.n(),
    )?))
}

/// The curvature at one place: reduce `A` entrywise, verify the reduced q,
/// run `p` recursion steps over the residue field, and report whether the
/// result vanishes. All failure modes are statuses, not errors.
pub fn pi_v_curvature(input: &CurvatureInput, v: &Place) -> PlaceReport {
    let factor = Some(v.balanced_factor());
    if input.ctx.n() % v.p == 0 {
        return PlaceReport {
            p: v.p,
            factor,
            status: PlaceStatus::SkippedOrderLoss,
        };
    }
    let res_ctx = match residue_context(&input.ctx, v) {
        Ok(Some(c)) => c,
        Ok(None) => {
            return PlaceReport {
                p: v.p,
                factor,
                status: PlaceStatus::SkippedOrderLoss,
            }
        }
        Err(_) => {
            return PlaceReport {
                p: v.p,
                factor,
                status: PlaceStatus::SkippedBadReduction,
            }
        }
    };
    let reduced = match reduce_matrix(&input.a, v) {
        Ok(m) => m,
        Err(_) => {
            return PlaceReport {
                p: v.p,
                factor,
                status: PlaceStatus::SkippedBadReduction,
            }
        }
    };
    let curv = iterate_matrix(&res_ctx, &reduced, v.p);
    if curv.is_zero() {
        PlaceReport {
            p: v.p,
            factor,
            status: PlaceStatus::Vanishes,
        }
    } else {
        let witness = (0..curv.rows())
            .flat_map(|i| (0..curv.cols()).map(move |j| (i, j)))
            .find(|&(i, j)| !curv.at(i, j).is_zero())
            .map(|(i, j)| format!("entry ({i},{j}) = {}", curv.at(i, j)))
            .unwrap();
        PlaceReport {
            p: v.p,
            factor,
            status: PlaceStatus::NonZero { witness },
        }
    }
}

/// One report per place over each listed prime, sorted by `(p, factor)`;
/// ramified or otherwise unusable primes appear as skipped rows. The
/// verdict is "consistent-with-isotrivial" when every non-skipped place
/// vanishes — a finite survey never proves the quantifier.
pub fn isotriviality_survey(input: &CurvatureInput, primes: &[u64]) -> SurveyReport {
    let mut sorted_primes = primes.to_vec();
    sorted_primes.sort_unstable();
    sorted_primes.dedup();
    let mut places_out = Vec::new();
    for &p in &sorted_primes {
        match residue_places(input.ctx.tower(), p) {
            Ok(places) => {
                for v in &places {
                    places_out.push(pi_v_curvature(input, v));
                }
            }
            Err(_) => places_out.push(PlaceReport {
                p,
                factor: None,
                status: PlaceStatus::SkippedBadReduction,
            }),
        }
    }
    places_out.sort_by(|a, b| (a.p, &a.factor).cmp(&(b.p, &b.factor)));
    let vanishes = places_out
        .iter()
        .filter(|r| r.status == PlaceStatus::Vanishes)
        .count();
    let nonzero = places_out
        .iter()
        .filter(|r| matches!(r.status, PlaceStatus::NonZero { .. }))
        .count();
    let skipped = places_out.len() - vanishes - nonzero;
    let witnesses: Vec<(u64, Vec<i64>)> = places_out
        .iter()
        .filter(|r| matches!(r.status, PlaceStatus::NonZero { .. }))
        .map(|r| (r.p, r.factor.clone().unwrap_or_default()))
        .collect();
    let verdict = if nonzero == 0 {
        "consistent-with-isotrivial".to_string()
    } else {
        "not-isotrivial".to_string()
    };
    SurveyReport {
        places: places_out,
        summary: SurveySummary {
            vanishes,
            nonzero,
            skipped,
            verdict,
            witnesses,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::{make_tower, Scalar};
    use crate::qarith::QContext;
    use crate::ratfunc::parse;
    use num_bigint::BigInt;
    use num_rational::BigRational as Rat;
    use num_traits::{One, Zero};

    fn sqrt2_ctx() -> Arc<QContext> {
        let tower = make_tower(
            0,
            vec![
                Scalar::Rat(Rat::from(BigInt::from(-2))),
                Scalar::Rat(Rat::zero()),
                Scalar::Rat(Rat::one()),
            ],
        )
        .unwrap();
        let q = tower.from_i64(-1);
        QContext::new(tower, q, 2).unwrap()
    }

    fn rank1_input(ctx: &Arc<QContext>, a: &str) -> CurvatureInput {
        let n = ctx.n();
        let entry = parse(ctx, &format!("({a})/t^{n}")).unwrap();
        CurvatureInput::new(ctx.clone(), Mat::from_rows(vec![vec![entry]])).unwrap()
    }

    #[test]
    fn falling_factorial_closed_form() {
        let ctx = QContext::cyclotomic(3).unwrap();
        let n = ctx.n();
        let input = rank1_input(&ctx, "7");
        // A_[2] = a(a-1)/t^{2n}
        let a2 = iterate_matrix(&ctx, &input.a, 2);
        assert_eq!(*a2.at(0, 0), parse(&ctx, &format!("42/t^{}", 2 * n)).unwrap());
        // A_[3] = a(a-1)(a-2)/t^{3n}
        let a3 = iterate_matrix(&ctx, &input.a, 3);
        assert_eq!(
            *a3.at(0, 0),
            parse(&ctx, &format!("{}/t^{}", 7 * 6 * 5, 3 * n)).unwrap()
        );
        for k in 1..=6u64 {
            let ak = iterate_matrix(&ctx, &input.a, k);
            let mut prod = 1i64;
            for j in 0..k as i64 {
                prod *= 7 - j;
            }
            assert_eq!(
                *ak.at(0, 0),
                parse(&ctx, &format!("{}/t^{}", prod, k * n)).unwrap(),
                "k={k}"
            );
        }
        // zero matrix stays zero
        let zero = CurvatureInput::new(ctx.clone(), Mat::zero(ctx.tower(), 1, 1)).unwrap();
        for k in 1..=4 {
            assert!(iterate_matrix(&ctx, &zero.a, k).is_zero());
        }
    }

    #[test]
    fn delta_n_of_inverse_powers() {
        // the rank-1 recursion forces delta^(n)(t^{-n}) = -t^{-2n}; check the
        // fraction algorithm directly
        let ctx = QContext::cyclotomic(3).unwrap();
        let n = ctx.n();
        let f = RatFunc::monomial(ctx.tower().one(), -(n as i64));
        let expect = RatFunc::monomial(ctx.tower().from_i64(-1), -(2 * n as i64));
        assert_eq!(crate::ratfunc::delta(&ctx, n, &f), expect);
    }

    #[test]
    fn integer_a_vanishes_at_good_primes() {
        let ctx = QContext::cyclotomic(2).unwrap();
        let input = rank1_input(&ctx, "2");
        let places = residue_places(ctx.tower(), 5).unwrap();
        let rep = pi_v_curvature(&input, &places[0]);
        assert_eq!(rep.status, PlaceStatus::Vanishes);
    }

    #[test]
    fn sqrt2_split_vs_inert() {
        let ctx = sqrt2_ctx();
        let n = ctx.n();
        let a = Mat::from_rows(vec![vec![parse(&ctx, &format!("g/t^{n}")).unwrap()]]);
        let input = CurvatureInput::new(ctx.clone(), a).unwrap();
        // p = 7: 2 is a square mod 7, both places vanish
        for v in residue_places(ctx.tower(), 7).unwrap() {
            assert_eq!(pi_v_curvature(&input, &v).status, PlaceStatus::Vanishes);
        }
        // p = 3: inert, nonzero curvature
        for v in residue_places(ctx.tower(), 3).unwrap() {
            assert!(matches!(
                pi_v_curvature(&input, &v).status,
                PlaceStatus::NonZero { .. }
            ));
        }
    }

    #[test]
    fn reduce_then_iterate_commutes() {
        let ctx = sqrt2_ctx();
        let n = ctx.n();
        let a = Mat::from_rows(vec![
            vec![
                parse(&ctx, &format!("g/t^{n}")).unwrap(),
                parse(&ctx, "1/t^2").unwrap(),
            ],
            vec![parse(&ctx, "0").unwrap(), parse(&ctx, &format!("2/t^{n}")).unwrap()],
        ]);
        for p in [5u64, 7, 11, 13] {
            let places = residue_places(ctx.tower(), p).unwrap();
            for v in &places {
                let res_ctx = residue_context(&ctx, v).unwrap().unwrap();
                for k in [2u64, 3, 5] {
                    let global = iterate_matrix(&ctx, &a, k);
                    let lhs = reduce_matrix(&global, v).unwrap();
                    let rhs = iterate_matrix(&res_ctx, &reduce_matrix(&a, v).unwrap(), k);
                    assert_eq!(lhs, rhs, "p={p} k={k}");
                }
            }
        }
    }

    #[test]
    fn survey_is_deterministic() {
        let ctx = sqrt2_ctx();
        let input = rank1_input(&ctx, "g");
        let r1 = isotriviality_survey(&input, &[3, 5, 7, 11, 13]);
        let r2 = isotriviality_survey(&input, &[13, 11, 7, 5, 3]);
        assert_eq!(
            serde_json::to_string(&r1).unwrap(),
            serde_json::to_string(&r2).unwrap()
        );
    }

    #[test]
    fn survey_of_rational_a() {
        // a = 5/2: good reduction everywhere except p = 2, all vanish
        let ctx = QContext::cyclotomic(2).unwrap();
        let input = rank1_input(&ctx, "5/2");
        let report = isotriviality_survey(&input, &[3, 7, 11]);
        assert_eq!(report.summary.nonzero, 0);
        assert_eq!(report.summary.verdict, "consistent-with-isotrivial");
        assert_eq!(report.summary.vanishes, 3);
    }
}
