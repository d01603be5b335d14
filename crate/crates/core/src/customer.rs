//! Closed-form customer best responses.
//!
//! A customer first chooses her effort, then observes `x_i` and picks a
//! report. With quadratic falsification cost the optimal report balances
//! `beta * (R - x)` against the marginal expected bonus, which makes every
//! optimal report rule affine in `x`.

use crate::dra::{nash_constants, NashConstants};
use crate::error::{Error, Result};
use crate::model::{AffineReport, BonusRule, Contract, CustomerParams, Scenario, StrategyProfile};

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveBeta(beta))
    }
}

/// `dE[B]/dR` at report `r`, with the others' expected reports summing to
/// `others_sum`.
pub fn bonus_marginal(bonus: &BonusRule, r: f64, others_sum: f64) -> f64 {
    match *bonus {
        BonusRule::Constant { .. } => 0.0,
        BonusRule::Linear { mu, .. } => mu,
        BonusRule::Cournot { lambda } => lambda - 2.0 * r - others_sum,
    }
}

/// First-order residual `beta * (r - x) - dE[B]/dR`; zero at the optimum.
pub fn report_foc_residual(bonus: &BonusRule, beta: f64, x: f64, r: f64, others_sum: f64) -> f64 {
    beta * (r - x) - bonus_marginal(bonus, r, others_sum)
}

/// Affine form of the optimal report given the others' expected report sum.
pub fn optimal_report_rule(bonus: &BonusRule, beta: f64, others_sum: f64) -> Result<AffineReport> {
    check_beta(beta)?;
    Ok(match *bonus {
        BonusRule::Constant { .. } => AffineReport::truthful(),
        BonusRule::Linear { mu, .. } => AffineReport::new(mu / beta, 1.0),
        BonusRule::Cournot { lambda } => {
            AffineReport::new((lambda - others_sum) / (beta + 2.0), beta / (beta + 2.0))
        }
    })
}

/// Optimal report after observing `x`.
///
/// ```
/// use phantomdr::customer::optimal_report;
/// use phantomdr::model::BonusRule;
///
/// let r = optimal_report(&BonusRule::Linear { mu: 0.5, r0: 1.0 }, 1.0, 2.0, 0.0).unwrap();
/// assert_eq!(r, 2.5);
/// ```
pub fn optimal_report(bonus: &BonusRule, beta: f64, x: f64, others_sum: f64) -> Result<f64> {
    Ok(optimal_report_rule(bonus, beta, others_sum)?.apply(x))
}

/// Optimal effort of one customer.
///
/// For the Cournot bonus `others_efforts` holds the other `n - 1` efforts and
/// every customer is assumed to share `params` (beta and noise mean); the
/// other customers' reports re-equilibrate when this customer's effort moves.
pub fn optimal_effort(
    bonus: &BonusRule,
    params: &CustomerParams,
    alpha_i: f64,
    others_efforts: &[f64],
    n: usize,
) -> Result<f64> {
    check_beta(params.beta)?;
    if alpha_i < 0.0 {
        return Err(Error::InvalidParameter(format!("share must be >= 0, got {alpha_i}")));
    }
    match *bonus {
        BonusRule::Constant { .. } => Ok(alpha_i),
        BonusRule::Linear { mu, .. } => Ok(mu + alpha_i),
        BonusRule::Cournot { lambda } => {
            if n == 0 {
                return Err(Error::NoCustomers);
            }
            if others_efforts.len() + 1 != n {
                return Err(Error::LengthMismatch {
                    what: "others_efforts",
                    expected: n - 1,
                    got: others_efforts.len(),
                });
            }
            let k = nash_constants(n, params.beta);
            let me = params.noise.mean;
            let others: f64 = others_efforts.iter().map(|a| a + me).sum();
            Ok((alpha_i + me + k.a_c * lambda - k.b_c * others) / k.c_c - me)
        }
    }
}

/// Expected reports when every customer reports optimally, given the mean
/// reductions `means[i] = E[x_i]`.
fn cournot_expected_reports(lambda: f64, betas: &[f64], means: &[f64]) -> Vec<f64> {
    // (beta_i + 1) E[R_i] = lambda - T + beta_i m_i, with T the total.
    let num: f64 = betas
        .iter()
        .zip(means)
        .map(|(b, m)| (lambda + b * m) / (b + 1.0))
        .sum();
    let den: f64 = 1.0 + betas.iter().map(|b| 1.0 / (b + 1.0)).sum::<f64>();
    let total = num / den;
    betas
        .iter()
        .zip(means)
        .map(|(b, m)| (lambda - total + b * m) / (b + 1.0))
        .collect()
}

/// Report rules forming the reporting-stage equilibrium for fixed efforts.
pub fn equilibrium_report_rules(
    s: &Scenario,
    bonus: &BonusRule,
    efforts: &[f64],
) -> Result<Vec<AffineReport>> {
    let n = s.n_customers();
    if n == 0 {
        return Err(Error::NoCustomers);
    }
    if efforts.len() != n {
        return Err(Error::LengthMismatch {
            what: "efforts",
            expected: n,
            got: efforts.len(),
        });
    }
    for c in &s.customers {
        check_beta(c.beta)?;
    }
    match *bonus {
        BonusRule::Cournot { lambda } => {
            let betas: Vec<f64> = s.customers.iter().map(|c| c.beta).collect();
            let means: Vec<f64> = s
                .customers
                .iter()
                .zip(efforts)
                .map(|(c, a)| a + c.noise.mean)
                .collect();
            let reports = cournot_expected_reports(lambda, &betas, &means);
            let total: f64 = reports.iter().sum();
            reports
                .iter()
                .zip(&betas)
                .map(|(r, &b)| optimal_report_rule(bonus, b, total - r))
                .collect()
        }
        _ => s
            .customers
            .iter()
            .map(|c| optimal_report_rule(bonus, c.beta, 0.0))
            .collect(),
    }
}

/// Cournot efforts for possibly different shares and noise means under a
/// common beta.
fn cournot_efforts(k: &NashConstants, lambda: f64, shares: &[f64], me: &[f64]) -> Result<Vec<f64>> {
    let n = shares.len();
    let rhs: Vec<f64> = shares
        .iter()
        .zip(me)
        .map(|(a, m)| a + m + k.a_c * lambda)
        .collect();
    let total = rhs.iter().sum::<f64>() / k.effort_denominator();
    if n == 1 {
        return Ok(vec![total - me[0]]);
    }
    let diag = k.c_c - k.b_c;
    if diag.abs() < 1e-12 {
        return Err(Error::Unsupported("singular Cournot effort system"));
    }
    Ok(rhs
        .iter()
        .zip(me)
        .map(|(r, m)| (r - k.b_c * total) / diag - m)
        .collect())
}

/// Efforts and report rules that are mutual best responses under `k`.
///
/// The Cournot bonus needs a common beta; shares and noise means may differ
/// across customers.
pub fn symmetric_best_response_profile(s: &Scenario, k: &Contract) -> Result<StrategyProfile> {
    let n = s.n_customers();
    if n == 0 {
        return Err(Error::NoCustomers);
    }
    if k.shares.len() != n {
        return Err(Error::LengthMismatch {
            what: "contract shares",
            expected: n,
            got: k.shares.len(),
        });
    }
    for c in &s.customers {
        check_beta(c.beta)?;
    }
    let efforts = match k.bonus {
        BonusRule::Constant { .. } => k.shares.clone(),
        BonusRule::Linear { mu, .. } => k.shares.iter().map(|a| mu + a).collect(),
        BonusRule::Cournot { lambda } => {
            let beta = s.common_beta().ok_or(Error::HeterogeneousBeta)?;
            let me: Vec<f64> = s.customers.iter().map(|c| c.noise.mean).collect();
            cournot_efforts(&nash_constants(n, beta), lambda, &k.shares, &me)?
        }
    };
    let reports = equilibrium_report_rules(s, &k.bonus, &efforts)?;
    Ok(StrategyProfile::new(efforts, reports))
}

/// `E[R_i - x_i]` for each customer, given the noise means `m_e`.
pub fn expected_falsification(profile: &StrategyProfile, noise_means: &[f64]) -> Vec<f64> {
    profile
        .efforts
        .iter()
        .zip(&profile.reports)
        .enumerate()
        .map(|(i, (a, r))| {
            let m = a + noise_means.get(i).copied().unwrap_or(0.0);
            r.intercept + (r.slope - 1.0) * m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseModel;

    const LINEAR: BonusRule = BonusRule::Linear { mu: 0.5, r0: 1.0 };

    fn params(beta: f64) -> CustomerParams {
        CustomerParams::new(beta, NoiseModel::default())
    }

    #[test]
    fn report_examples() {
        assert_eq!(optimal_report(&LINEAR, 1.0, 2.0, 0.0).unwrap(), 2.5);
        assert_eq!(
            optimal_report(&BonusRule::Constant { c: 5.0 }, 1.0, 2.0, 0.0).unwrap(),
            2.0
        );
        let r = optimal_report(&BonusRule::Cournot { lambda: 1.1 }, 1.0, 0.7, 0.0).unwrap();
        assert!((r - 0.6).abs() < 1e-15);
        assert!(matches!(
            optimal_report(&LINEAR, 0.0, 1.0, 0.0),
            Err(Error::NonPositiveBeta(_))
        ));
    }

    #[test]
    fn report_residual_vanishes() {
        for bonus in [LINEAR, BonusRule::Cournot { lambda: 2.3 }, BonusRule::Constant { c: 1.0 }] {
            for (beta, x, s) in [(0.3, -0.5, 0.2), (1.0, 0.7, 0.0), (3.5, 2.0, 1.4)] {
                let r = optimal_report(&bonus, beta, x, s).unwrap();
                assert!(report_foc_residual(&bonus, beta, x, r, s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn effort_examples() {
        let p = params(1.0);
        assert_eq!(optimal_effort(&BonusRule::Constant { c: 2.0 }, &p, 0.0, &[], 1).unwrap(), 0.0);
        assert_eq!(optimal_effort(&LINEAR, &p, 0.0, &[], 1).unwrap(), 0.5);
        let a = optimal_effort(&BonusRule::Cournot { lambda: 1.1 }, &p, 0.3, &[], 1).unwrap();
        assert!((a - 0.4).abs() < 1e-12);
    }

    #[test]
    fn cournot_effort_with_noise_mean() {
        let p = CustomerParams::new(1.0, NoiseModel::gaussian(0.05, 0.1));
        let a = optimal_effort(&BonusRule::Cournot { lambda: 0.551 }, &p, 0.433, &[], 1).unwrap();
        assert!((a - (3.0 * 0.433 + 0.551 - 0.1) / 5.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_fixed_point_agrees_with_single_response() {
        for n in [2usize, 3, 5] {
            for beta in [0.5, 1.0, 2.0] {
                let s = Scenario::symmetric(n, beta, NoiseModel::default());
                let k = Contract::uniform(n, 0.1, BonusRule::Cournot { lambda: 1.7 });
                let p = symmetric_best_response_profile(&s, &k).unwrap();
                let kc = nash_constants(n, beta);
                let closed = (0.1 + kc.a_c * 1.7) / kc.effort_denominator();
                assert!((p.efforts[0] - closed).abs() < 1e-12);
                let own = optimal_effort(&k.bonus, &s.customers[0], 0.1, &p.efforts[1..], n).unwrap();
                assert!((own - p.efforts[0]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heterogeneous_shares_solve_every_equation() {
        let s = Scenario::symmetric(3, 1.5, NoiseModel::gaussian(0.02, 0.1));
        let k = Contract {
            shares: vec![0.05, 0.2, 0.1],
            bonus: BonusRule::Cournot { lambda: 2.0 },
        };
        let p = symmetric_best_response_profile(&s, &k).unwrap();
        for i in 0..3 {
            let others: Vec<f64> = (0..3).filter(|&j| j != i).map(|j| p.efforts[j]).collect();
            let own = optimal_effort(&k.bonus, &s.customers[i], k.shares[i], &others, 3).unwrap();
            assert!((own - p.efforts[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_customer_profile() {
        let s = Scenario::symmetric(1, 1.0, NoiseModel::default());
        let k = Contract::uniform(1, 0.3, BonusRule::Cournot { lambda: 1.1 });
        let p = symmetric_best_response_profile(&s, &k).unwrap();
        assert!((p.efforts[0] - 0.4).abs() < 1e-12);
        assert!((p.reports[0].intercept - 1.1 / 3.0).abs() < 1e-12);
        assert!((p.reports[0].slope - 1.0 / 3.0).abs() < 1e-12);
        let f = expected_falsification(&p, &[0.0]);
        assert!((f[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn linear_profile() {
        let s = Scenario::symmetric(3, 0.5, NoiseModel::default());
        let k = Contract::uniform(3, 0.3, BonusRule::Linear { mu: 0.2, r0: 1.0 });
        let p = symmetric_best_response_profile(&s, &k).unwrap();
        for (a, r) in p.efforts.iter().zip(&p.reports) {
            assert!((a - 0.5).abs() < 1e-15);
            assert!((r.intercept - 0.4).abs() < 1e-15);
            assert_eq!(r.slope, 1.0);
        }
        assert!(expected_falsification(&p, &[0.0; 3])
            .iter()
            .all(|f| (f - 0.4).abs() < 1e-15));
    }

    #[test]
    fn cournot_requires_common_beta() {
        let mut s = Scenario::symmetric(2, 1.0, NoiseModel::default());
        s.customers[1].beta = 2.0;
        let k = Contract::uniform(2, 0.1, BonusRule::Cournot { lambda: 1.0 });
        assert_eq!(
            symmetric_best_response_profile(&s, &k),
            Err(Error::HeterogeneousBeta)
        );
    }

    #[test]
    fn truthful_rule_has_no_falsification() {
        let p = StrategyProfile::new(vec![0.7], vec![AffineReport::truthful()]);
        assert_eq!(expected_falsification(&p, &[0.3]), vec![0.0]);
    }
}
