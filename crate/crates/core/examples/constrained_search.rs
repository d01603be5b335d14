//! Equilibrium share against a direct search over the share with the target
//! held fixed.

use phantomdr::dra::gamma_upper_bound;
use phantomdr::verify::constrained_search_diagnostic;

fn main() {
    for (n, beta) in [(1, 1.0), (2, 1.0), (3, 2.0)] {
        let gamma = 0.8 * gamma_upper_bound(n, beta).value();
        let r = constrained_search_diagnostic(n, beta, gamma).unwrap();
        println!("N={n} beta={beta} gamma={gamma:.4}: {r}");
    }
}
