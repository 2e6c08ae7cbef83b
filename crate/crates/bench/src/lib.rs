//! Fixtures shared by the solver benchmarks.

use ncspectra_core::{deform, DeformedRadialProblem, NcContext, PotentialSpec};

pub fn even_problem(theta: f64, m: i32) -> DeformedRadialProblem {
    deform(PotentialSpec::even_power(1.0, 1.0, 1.0), NcContext::new(theta, m)).expect("valid even fixture")
}

pub fn inverse_problem(theta: f64, m: i32) -> DeformedRadialProblem {
    deform(PotentialSpec::inverse_power(-2.0, 1.0), NcContext::new(theta, m)).expect("valid inverse fixture")
}
