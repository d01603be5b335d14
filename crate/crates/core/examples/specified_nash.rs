//! Cournot bonus tuned so that total effort meets a target.

use phantomdr::dra::{gamma_upper_bound, solve_specified};

fn main() {
    for (n, beta) in [(1, 1.0), (2, 1.0), (3, 2.0)] {
        let bound = gamma_upper_bound(n, beta).value();
        for frac in [0.5, 0.8, 1.0] {
            let gamma = frac * bound;
            let sc = solve_specified(n, beta, gamma).unwrap();
            println!(
                "N={n} beta={beta} gamma={gamma:.4} alpha={:.4} lambda={:.4} effort={:.4} feasible={}",
                sc.alpha(),
                sc.bonus_parameter(),
                sc.effort(),
                sc.feasible
            );
            for why in &sc.infeasibility {
                println!("    {why}");
            }
        }
    }
}
