//! Simulated expectations against the closed forms.

use phantomdr::customer::symmetric_best_response_profile;
use phantomdr::dra::solve_specified;
use phantomdr::model::{expected_outcome, NoiseModel, Scenario};
use phantomdr::montecarlo::{simulate, SimConfig};

fn main() {
    let s = Scenario::symmetric(1, 1.0, NoiseModel::uniform(0.0, 0.1));
    let sc = solve_specified(1, 1.0, 0.4).unwrap();
    let p = symmetric_best_response_profile(&s, &sc.contract).unwrap();
    let closed = expected_outcome(&s, &sc.contract, &p).unwrap();
    for antithetic in [false, true] {
        let cfg = SimConfig { n_reps: 200_000, master_seed: 42, antithetic };
        let stats = simulate(&s, &sc.contract, &p, &cfg).unwrap();
        println!("antithetic={antithetic}");
        for (name, est, c) in stats.compare(&closed) {
            println!(
                "  {name:<14} mc {:>10.6} +- {:.1e}  closed {c:>10.6}  z {:.2}",
                est.mean,
                est.std_err,
                est.z_score(c)
            );
        }
    }
}
