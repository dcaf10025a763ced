#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Fractional powers of sparse SPD matrices through best uniform rational
//! approximation and sinc quadrature.

pub mod discretization;
pub mod harness;
pub mod rational;
pub mod solvers;
