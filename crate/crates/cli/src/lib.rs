//! Solve, render and benchmark front end for the fading illumination
//! solvers.

pub mod bench;
pub mod cpu;
pub mod render;
pub mod solve;

pub use solve::{run_solve, Algorithm, SolveConfig, SolveOutcome, SolutionJson};
