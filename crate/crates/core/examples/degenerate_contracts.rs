//! Flat bonuses, report-only bonuses and the first-best share.

use phantomdr::verify::demo_degenerate_contracts;

fn main() {
    for r in demo_degenerate_contracts().unwrap() {
        println!("{r}");
    }
}
