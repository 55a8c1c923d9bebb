//! Exact arithmetic in totally real number fields, totally positive cones,
//! unit signatures and quadratic-form representation, combined into a
//! certified obstruction pipeline for universal ternary quadratic forms.

#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod cone;
pub mod criteria;
pub mod enumerate;
pub mod error;
pub mod field;
pub mod lattice;
pub mod linalg;
pub mod poly;
pub mod units;

pub use catalog::Catalog;
pub use error::{Error, Result};
pub use field::{ArithOp, Elem, ElemQ, Field, FieldSpec};
