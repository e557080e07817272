//! Discrete magnetic Schrödinger operators on weighted graphs: operators,
//! forms, intrinsic metrics and capacities.

#![no_std]

extern crate alloc;

pub mod bundle;
pub mod error;
pub mod families;
pub mod form;
pub mod graph;
pub mod linalg;
pub mod metric;
pub mod operator;
pub mod random;

pub use error::{Error, Result};
pub use graph::{Edge, Exhaustion, MeasuredGraph, Path, WeightedGraph};
