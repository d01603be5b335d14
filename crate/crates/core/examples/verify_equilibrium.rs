//! Runs every check against a solved contract, then against a profile with a
//! shifted effort.

use phantomdr::dra::solve_specified;
use phantomdr::model::{NoiseModel, Scenario};
use phantomdr::verify::run_suite;

fn main() {
    let (n, beta, gamma) = (2, 1.0, 1.0);
    let s = Scenario::symmetric(n, beta, NoiseModel::default()).with_gamma(gamma);
    let sc = solve_specified(n, beta, gamma).unwrap();
    for shift in [0.0, 0.05] {
        println!("effort shift {shift}");
        for r in run_suite(&s, &sc, shift).unwrap() {
            println!("  {r}");
        }
    }
}
