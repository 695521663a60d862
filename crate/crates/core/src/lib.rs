//! Outcome prediction and controlled direct effect estimation from
//! observational data.

pub mod bench;
pub mod citest;
pub mod dataset;
pub mod discovery;
pub mod linalg;
pub mod mode;
pub mod models;
pub mod rng;
pub mod scm;
pub mod special;
