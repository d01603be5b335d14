//! Full-information benchmark: the aggregator pays effort cost directly.

use phantomdr::dra::first_best;
use phantomdr::model::{NoiseModel, Scenario};

fn main() {
    for n in [1, 3, 10] {
        let s = Scenario::symmetric(n, 1.0, NoiseModel::gaussian(0.05, 0.1));
        let fb = first_best(&s);
        println!(
            "N={n:>2} effort={:.3} payments={:?} E[Pi]={:.4}",
            fb.effort, fb.expected_payments, fb.dra_utility
        );
    }
}
