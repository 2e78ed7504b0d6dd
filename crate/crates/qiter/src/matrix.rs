//! Dense exact matrices over rational functions. Just enough linear algebra
//! for the module machinery: products, Gauss-Jordan inverses, determinants,
//! Kronecker products, and entrywise operator application.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exactfield::FieldTower;
use crate::qarith::QContext;
use crate::ratfunc::{delta, sigma_q_pow, RatFunc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    entries: Vec<RatFunc>,
}

impl Mat {
    pub fn from_rows(rows: Vec<Vec<RatFunc>>) -> Mat {
        let r = rows.len();
        assert!(r > 0, "empty matrix");
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Mat {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zero(tower: &Arc<FieldTower>, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            entries: vec![RatFunc::zero(tower); rows * cols],
        }
    }

    pub fn identity(tower: &Arc<FieldTower>, n: usize) -> Mat {
        let mut m = Mat::zero(tower, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = RatFunc::one(tower);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &RatFunc {
        &self.entries[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut RatFunc {
        &mut self.entries[r * self.cols + c]
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        self.entries[0].tower()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(RatFunc::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    if i == j {
                        self.at(i, j).is_one()
                    } else {
                        self.at(i, j).is_zero()
                    }
                })
            })
    }

    pub fn map<F: Fn(&RatFunc) -> RatFunc>(&self, f: F) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Mat {
        self.map(RatFunc::neg)
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Mat::zero(self.tower(), self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.at(i, j).add(&a.mul(b));
                    *out.at_mut(i, j) = cur;
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> Mat {
        self.map(|e| e.mul(c))
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zero(self.tower(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn kronecker(&self, other: &Mat) -> Mat {
        let mut out = Mat::zero(self.tower(), self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.at(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        *out.at_mut(i * other.rows + k, j * other.cols + l) =
                            a.mul(other.at(k, l));
                    }
                }
            }
        }
        out
    }

    /// Gauss-Jordan inverse over the fraction field.
    pub fn inverse(&self) -> Result<Mat> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::identity(self.tower(), n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.at(r, col).is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return Err(Error::NotInvertible),
            };
            if pivot != col {
                for j in 0..n {
                    let tmp = a.at(pivot, j).clone();
                    *a.at_mut(pivot, j) = a.at(col, j).clone();
                    *a.at_mut(col, j) = tmp;
                    let tmp = inv.at(pivot, j).clone();
                    *inv.at_mut(pivot, j) = inv.at(col, j).clone();
                    *inv.at_mut(col, j) = tmp;
                }
            }
            let piv_inv = a.at(col, col).inv().expect("pivot nonzero");
            for j in 0..n {
                *a.at_mut(col, j) = a.at(col, j).mul(&piv_inv);
                *inv.at_mut(col, j) = inv.at(col, j).mul(&piv_inv);
            }
            for r in 0..n {
                if r == col || a.at(r, col).is_zero() {
                    continue;
                }
                let factor = a.at(r, col).clone();
                for j in 0..n {
                    let na = a.at(r, j).sub(&factor.mul(a.at(col, j)));
                    *a.at_mut(r, j) = na;
                    let ni = inv.at(r, j).sub(&factor.mul(inv.at(col, j)));
                    *inv.at_mut(r, j) = ni;
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by fraction-field Gaussian elimination.
    pub fn determinant(&self) -> RatFunc {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = RatFunc::one(self.tower());
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a.at(r, col).is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => return RatFunc::zero(self.tower()),
            };
            if pivot != col {
                for j in 0..n {
                    let tmp = a.at(pivot, j).clone();
                    *a.at_mut(pivot, j) = a.at(col, j).clone();
                    *a.at_mut(col, j) = tmp;
                }
                det = det.neg();
            }
            let p = a.at(col, col).clone();
            det = det.mul(&p);
            let p_inv = p.inv().expect("pivot nonzero");
            for r in col + 1..n {
                if a.at(r, col).is_zero() {
                    continue;
                }
                let factor = a.at(r, col).mul(&p_inv);
                for j in col..n {
                    let v = a.at(r, j).sub(&factor.mul(a.at(col, j)));
                    *a.at_mut(r, j) = v;
                }
            }
        }
        det
    }

    /// Rank over the fraction field.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..self.cols {
            let pivot = (row..self.rows).find(|&r| !a.at(r, col).is_zero());
            let pivot = match pivot {
                Some(p) => p,
                None => continue,
            };
            if pivot != row {
                for j in 0..self.cols {
                    let tmp = a.at(pivot, j).clone();
                    *a.at_mut(pivot, j) = a.at(row, j).clone();
                    *a.at_mut(row, j) = tmp;
                }
            }
            let p_inv = a.at(row, col).inv().expect("pivot nonzero");
            for r in row + 1..self.rows {
                if a.at(r, col).is_zero() {
                    continue;
                }
                let factor = a.at(r, col).mul(&p_inv);
                for j in col..self.cols {
                    let v = a.at(r, j).sub(&factor.mul(a.at(row, j)));
                    *a.at_mut(r, j) = v;
                }
            }
            rank += 1;
            row += 1;
            if row == self.rows {
                break;
            }
        }
        rank
    }
}

/// `sigma_q^j` applied entrywise.
pub fn mat_sigma(ctx: &QContext, j: i64, m: &Mat) -> Mat {
    m.map(|e| sigma_q_pow(ctx, j, e))
}

/// `delta^(k)` applied entrywise.
pub fn mat_delta(ctx: &QContext, k: u64, m: &Mat) -> Mat {
    m.map(|e| delta(ctx, k, e))
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qarith::QContext;
    use crate::ratfunc::parse;

    #[test]
    fn inverse_and_determinant() {
        let ctx = QContext::cyclotomic(3).unwrap();
        let e = |s: &str| parse(&ctx, s).unwrap();
        let m = Mat::from_rows(vec![
            vec![e("t"), e("1")],
            vec![e("1"), e("t")],
        ]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).is_identity());
        assert_eq!(m.determinant(), e("t^2-1"));
        let sing = Mat::from_rows(vec![
            vec![e("t"), e("t")],
            vec![e("1"), e("1")],
        ]);
        assert!(sing.inverse().is_err());
        assert!(sing.determinant().is_zero());
        assert_eq!(sing.rank(), 1);
    }

    #[test]
    fn kronecker_dimensions() {
        let ctx = QContext::cyclotomic(2).unwrap();
        let e = |s: &str| parse(&ctx, s).unwrap();
        let a = Mat::from_rows(vec![vec![e("1"), e("t")]]);
        let b = Mat::from_rows(vec![vec![e("2")], vec![e("t")]]);
        let k = a.kronecker(&b);
        assert_eq!((k.rows(), k.cols()), (2, 2));
        assert_eq!(*k.at(1, 1), e("t^2"));
    }
}
