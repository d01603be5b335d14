//! Every sweep kind written as CSV under the system temp directory.

use phantomdr::cli::to_csv;
use phantomdr::montecarlo::{sweep, SimConfig, SweepGrid, SweepKind};

fn main() {
    let cfg = SimConfig { n_reps: 20_000, ..SimConfig::default() };
    let dir = std::env::temp_dir();
    for kind in [SweepKind::Fig2BetaN, SweepKind::Fig3GammaN, SweepKind::Fig4aMe, SweepKind::Fig4bMn] {
        let rows = sweep(kind, &SweepGrid::for_kind(kind), &cfg).unwrap();
        let path = dir.join(format!("{}.csv", kind.as_str()));
        std::fs::write(&path, to_csv(&rows)).unwrap();
        let feasible = rows.iter().filter(|r| r.feasible).count();
        println!("{:<14} {} rows ({feasible} feasible) -> {}", kind.as_str(), rows.len(), path.display());
    }
}
