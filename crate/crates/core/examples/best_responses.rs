//! Closed-form customer replies next to a numerical search.

use phantomdr::customer::{optimal_effort, optimal_report};
use phantomdr::model::{BonusRule, Contract, CustomerParams, NoiseModel, Scenario};
use phantomdr::verify::{oracle_best_effort, oracle_best_report, EFFORT_BOUNDS, REPORT_BOUNDS};

fn main() {
    let beta = 1.0;
    let x = 0.4;
    for bonus in [
        BonusRule::Constant { c: 0.2 },
        BonusRule::Linear { mu: 0.5, r0: 1.0 },
        BonusRule::Cournot { lambda: 1.1 },
    ] {
        let r = optimal_report(&bonus, beta, x, 0.0).unwrap();
        let o = oracle_best_report(&bonus, beta, x, 0.0, REPORT_BOUNDS).unwrap();
        let params = CustomerParams::new(beta, NoiseModel::default());
        let a = optimal_effort(&bonus, &params, 0.3, &[], 1).unwrap();
        let s = Scenario::symmetric(1, beta, NoiseModel::default());
        let k = Contract::uniform(1, 0.3, bonus);
        let oa = oracle_best_effort(&s, &k, 0, &[], EFFORT_BOUNDS).unwrap();
        println!(
            "{:<8} report {r:.6} (search {:.6})  effort {a:.6} (search {:.6})",
            bonus.name(),
            o.argmax,
            oa.argmax
        );
    }
}
