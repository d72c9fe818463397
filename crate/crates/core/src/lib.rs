pub mod classifier;
pub mod cli;
pub mod data;
pub mod eval;
pub mod features;
pub mod lp;
pub mod numfmt;
pub mod seed;
