//! Single customer with biased realization or estimation errors.

use phantomdr::customer::symmetric_best_response_profile;
use phantomdr::dra::{solve_me_extension, solve_mn_extension};
use phantomdr::model::{expected_outcome, NoiseModel, Scenario};

fn main() {
    let gamma = 0.4;
    for m_e in [0.0, 0.025, 0.05, 0.1] {
        let sc = solve_me_extension(gamma, m_e).unwrap();
        println!(
            "m_e={m_e:<5} alpha={:.4} lambda={:.4} effort={:.4}",
            sc.alpha(),
            sc.bonus_parameter(),
            sc.effort()
        );
    }
    for m_n in [0.0, 0.05, 0.1] {
        let sc = solve_mn_extension(gamma, m_n).unwrap();
        let s = Scenario::symmetric(1, 1.0, NoiseModel::default()).with_m_n(m_n);
        let p = symmetric_best_response_profile(&s, &sc.contract).unwrap();
        let o = expected_outcome(&s, &sc.contract, &p).unwrap();
        println!(
            "m_n={m_n:<5} alpha={:.4} lambda={:.4} E[P]={:.4} E[Pi]={:.4}",
            sc.alpha(),
            sc.bonus_parameter(),
            o.expected_payments[0],
            o.dra_utility
        );
    }
}
