//! Exact iterative q-difference calculus at roots of unity.
//!
//! When q is a primitive n-th root of unity the single operator
//! `delta_q = (sigma_q - id)/((q-1)t)` is nilpotent and the classical
//! q-difference theory degenerates. This crate implements the iterative
//! replacement: the whole family `delta^(k)` with a twisted Leibniz rule and
//! the composition law `delta^(i) o delta^(j) = binom(i+j, i)_q delta^(i+j)`,
//! together with the machinery built on top of it:
//!
//! - [`exactfield`]: exact field towers `Q[x]/(f)` and `F_p[x]/(f)`,
//!   roots of unity, finite places, reduction mod p
//! - [`qarith`]: q-integers, q-factorials, Gaussian binomials at roots of
//!   unity (q-Pascal recursion, memoized)
//! - [`ratfunc`]: rational functions in `t`, `sigma_q`, the `delta^(k)`
//!   tower, expression parsing/printing
//! - [`twisted`]: the twisted power-series ring `R^{sigma_q}[[T]]`, Taylor
//!   maps, and the independent series route to `delta` on fractions
//! - [`idqmod`]: matrix presentations of iterative q-difference modules,
//!   equation extraction from projective-system data, tensor and dual
//! - [`wronskian`]: difference orders and the Wronskian independence
//!   criterion
//! - [`galois`]: p-adic digit streams and Galois-group classification for
//!   the rank-1 and unipotent families
//! - [`curvature`]: the curvature recursion and isotriviality surveys over
//!   finite places
//! - [`cli`]: the `qiter` command-line interface
//!
//! Everything is exact; there is no floating point in the crate. See the
//! `examples/` directory for one runnable example per capability.

pub mod cli;
pub mod curvature;
pub mod error;
pub mod exactfield;
pub mod galois;
pub mod idqmod;
pub mod io;
pub mod matrix;
pub mod qarith;
pub mod ratfunc;
pub mod selftest;
pub mod twisted;
pub mod wronskian;

pub use error::{Error, Result};
