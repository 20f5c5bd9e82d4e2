#![no_std]
extern crate alloc;

pub mod error;
pub mod field;
pub mod groebner;
pub mod matrix;
pub mod mle;
pub mod model;
pub mod poly;
pub mod rmld;
pub mod toric;
pub mod tree;
