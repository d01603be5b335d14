//! Linear bonus with no reduction target: profit grows linearly in N.

use phantomdr::customer::symmetric_best_response_profile;
use phantomdr::dra::solve_unspecified;
use phantomdr::model::{expected_outcome, NoiseModel, Scenario};

fn main() {
    let (beta, r0) = (0.5, 1.0);
    for n in [1, 2, 5, 10, 20] {
        let sc = solve_unspecified(n, beta, r0).unwrap();
        let s = Scenario::symmetric(n, beta, NoiseModel::default());
        let p = symmetric_best_response_profile(&s, &sc.contract).unwrap();
        let o = expected_outcome(&s, &sc.contract, &p).unwrap();
        println!(
            "N={n:>2} mu={} alpha={} effort={} E[Pi]={:.4}",
            sc.bonus_parameter(),
            sc.alpha(),
            sc.effort(),
            o.dra_utility
        );
    }
}
