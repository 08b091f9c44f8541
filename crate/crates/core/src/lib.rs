#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod caustics;
pub mod drivers;
pub mod expr;
pub mod frobenius;
pub mod getzler;
pub mod lgmodels;
pub mod report;
pub mod linalg;
pub mod roots;
pub mod sampling;
pub mod scalar;
pub mod symmetry;
