//! Exact and numerical tools for the expected cost of the cheapest
//! k-assignment in a matrix of independent exp(1) entries with some entries
//! forced to zero.

pub mod exact;
pub mod pattern;
pub mod conjecture;
pub mod engine;
pub mod golden;
pub mod montecarlo;
pub mod asymptotics;
