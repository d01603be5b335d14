//! Aggregator-side solvers: the first-best benchmark, the optimal linear
//! contract for an unspecified load target, the Cournot-bonus contract that
//! hits a target `gamma`, and the two single-customer extensions.

use crate::customer::{equilibrium_report_rules, symmetric_best_response_profile};
use crate::error::{Error, Result};
use crate::model::{
    effort_cost, AffineReport, BonusRule, Contract, NoiseModel, Scenario,
};

/// Constants of the symmetric Cournot-bonus equilibrium.
///
/// `e_c` is the constant usually written `E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NashConstants {
    pub n: usize,
    pub beta: f64,
    pub a_c: f64,
    pub b_c: f64,
    pub c_c: f64,
    pub d_c: f64,
    pub e_c: f64,
    pub f_c: f64,
}

impl NashConstants {
    /// `C + (N - 1) B`, the denominator of the symmetric effort.
    pub fn effort_denominator(&self) -> f64 {
        self.c_c + (self.n as f64 - 1.0) * self.b_c
    }

    fn crowd(&self) -> f64 {
        self.beta + 1.0 + self.n as f64
    }

    /// Coefficient of `lambda` in the share condition.
    pub fn share_slope(&self) -> f64 {
        let n = self.n as f64;
        self.a_c * (1.0 - 2.0 * n * self.d_c) + self.beta * (1.0 - 2.0 * self.e_c) / self.crowd()
    }

    /// `beta (2E - 1) / (beta + 1 + N) + A`.
    pub fn remark_denominator(&self) -> f64 {
        self.beta * (2.0 * self.e_c - 1.0) / self.crowd() + self.a_c
    }

    /// Expanded form of [`remark_denominator`](Self::remark_denominator),
    /// visibly nonnegative.
    pub fn remark_denominator_expanded(&self) -> f64 {
        let n = self.n as f64;
        let q = self.crowd();
        self.beta * (2.0 * n / (q * q) + (n - 1.0) / (q * q * (self.beta + 1.0)))
    }

    /// `G_i = S_i + F a_i` for a symmetric profile with effort `a`: the others'
    /// expected report sum is `G - F a_i`.
    pub fn g_term(&self, lambda: f64, effort: f64) -> f64 {
        let n = self.n as f64;
        let b = self.beta;
        lambda * (n - 1.0) / self.crowd()
            + b * (b + 2.0) * (n - 1.0) * effort / ((b + 1.0) * self.crowd())
    }
}

pub fn nash_constants(n: usize, beta: f64) -> NashConstants {
    let nf = n as f64;
    let b = beta;
    let q = b + 1.0 + nf;
    let f = b * (nf - 1.0) / (q * (b + 1.0));
    let a = (b + f) / q;
    let bb = b * (b + f) / ((b + 1.0) * q);
    let p2 = b + 2.0;
    let c = 1.0 + 2.0 * (b + f) * (b + f) / (p2 * p2) - 2.0 * (b + f) * f / p2
        + b * (4.0 - 4.0 * f + f * f) / (p2 * p2);
    let k = c + (nf - 1.0) * bb;
    let d = (b / q) * (b / q) / k;
    let e = nf / q;
    NashConstants {
        n,
        beta,
        a_c: a,
        b_c: bb,
        c_c: c,
        d_c: d,
        e_c: e,
        f_c: f,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaBound {
    Finite(f64),
    /// The share slope is nonpositive, so no target drives the share negative.
    Unbounded,
}

impl GammaBound {
    pub fn admits(&self, gamma: f64) -> bool {
        match *self {
            GammaBound::Finite(b) => gamma <= b * (1.0 + 1e-12),
            GammaBound::Unbounded => true,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            GammaBound::Finite(b) => b,
            GammaBound::Unbounded => f64::INFINITY,
        }
    }
}

/// Largest target `gamma` for which the equilibrium share stays nonnegative.
pub fn gamma_upper_bound(n: usize, beta: f64) -> GammaBound {
    let k = nash_constants(n, beta);
    let p = k.share_slope();
    if !(p > 0.0) {
        return GammaBound::Unbounded;
    }
    GammaBound::Finite(n as f64 * k.a_c / (k.effort_denominator() * p))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstBest {
    pub effort: f64,
    /// Payment implementing it: `P_i = x_i - E[x_i | a*] + h(a*)`.
    pub payment_rule: String,
    pub expected_payments: Vec<f64>,
    pub dra_utility: f64,
}

/// Benchmark when the aggregator observes every `x_i`.
pub fn first_best(s: &Scenario) -> FirstBest {
    let effort = 1.0;
    let h = effort_cost(effort);
    let dra_utility = s
        .customers
        .iter()
        .map(|c| effort + c.noise.mean - h)
        .sum();
    FirstBest {
        effort,
        payment_rule: format!("P_i = x_i - E[x_i | a*] + {h}"),
        expected_payments: vec![h; s.n_customers()],
        dra_utility,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub name: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvedContract {
    pub contract: Contract,
    pub predicted_efforts: Vec<f64>,
    pub predicted_reports: Vec<AffineReport>,
    pub feasible: bool,
    /// Why the contract is infeasible; empty when feasible.
    pub infeasibility: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SolvedContract {
    pub fn alpha(&self) -> f64 {
        self.contract.shares[0]
    }

    /// `lambda` for Cournot contracts, `mu` for linear ones.
    pub fn bonus_parameter(&self) -> f64 {
        match self.contract.bonus {
            BonusRule::Constant { c } => c,
            BonusRule::Linear { mu, .. } => mu,
            BonusRule::Cournot { lambda } => lambda,
        }
    }

    pub fn effort(&self) -> f64 {
        self.predicted_efforts[0]
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics
            .iter()
            .find(|d| d.name == name)
            .map(|d| d.value)
    }
}

const SHARE_TOL: f64 = 1e-12;

fn share_violations(n: usize, alpha: f64) -> Vec<String> {
    let mut out = Vec::new();
    if alpha < -SHARE_TOL {
        out.push(format!("alpha* = {alpha} < 0"));
    }
    if n as f64 * alpha >= 1.0 {
        out.push(format!("N * alpha* = {} >= 1", n as f64 * alpha));
    }
    out
}

/// Optimal linear contract when no reduction target is imposed.
pub fn solve_unspecified(n: usize, beta: f64, r0: f64) -> Result<SolvedContract> {
    if n == 0 {
        return Err(Error::NoCustomers);
    }
    if !(beta > 0.0) {
        return Err(Error::NonPositiveBeta(beta));
    }
    if !(r0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("r0 must be >= 0, got {r0}")));
    }
    let mu = r0 * beta / 2.0;
    let alpha = 0.5 - mu;
    let mut infeasibility = share_violations(n, alpha);
    if r0 * beta > 1.0 && infeasibility.is_empty() {
        infeasibility.push(format!("r0 * beta = {} > 1", r0 * beta));
    }
    let contract = Contract::uniform(n, alpha, BonusRule::Linear { mu, r0 });
    Ok(SolvedContract {
        contract,
        predicted_efforts: vec![mu + alpha; n],
        predicted_reports: vec![AffineReport::new(mu / beta, 1.0); n],
        feasible: infeasibility.is_empty(),
        infeasibility,
        diagnostics: vec![Diagnostic {
            name: "per_customer_e_pi_closed",
            value: 0.25 + r0 * r0 * beta / 4.0,
        }],
    })
}

/// Solves `m * [x, y] = rhs` by Cramer's rule, returning the determinant too.
fn solve2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> (f64, f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let x = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
    let y = (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det;
    (x, y, det)
}

/// Cournot-bonus contract with total expected reduction `gamma`.
///
/// ```
/// let sc = phantomdr::dra::solve_specified(1, 1.0, 0.4).unwrap();
/// assert!((sc.alpha() - 0.3).abs() < 1e-12);
/// assert!((sc.bonus_parameter() - 1.1).abs() < 1e-12);
/// assert!((sc.effort() - 0.4).abs() < 1e-12);
/// ```
pub fn solve_specified(n: usize, beta: f64, gamma: f64) -> Result<SolvedContract> {
    if n == 0 {
        return Err(Error::NoCustomers);
    }
    if !(beta > 0.0) {
        return Err(Error::NonPositiveBeta(beta));
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let nf = n as f64;
    let k = nash_constants(n, beta);
    let kd = k.effort_denominator();
    let p = k.share_slope();
    let m = [[2.0 * (1.0 - nf * k.d_c), p], [nf, k.a_c * nf]];
    let rhs = [1.0, kd * gamma];
    let (alpha, lambda, det) = solve2(m, rhs);
    if !(det.abs() >= 1e-12) || !alpha.is_finite() || !lambda.is_finite() {
        return Err(Error::DegenerateSystem {
            n,
            beta,
            gamma,
            det,
        });
    }
    let effort = (alpha + k.a_c * lambda) / kd;
    let share_residual = m[0][0] * alpha + m[0][1] * lambda - 1.0;
    let target_residual = lambda - (kd * gamma - nf * alpha) / (k.a_c * nf);

    let bound = gamma_upper_bound(n, beta);
    let mut infeasibility = share_violations(n, alpha);
    if !bound.admits(gamma) {
        infeasibility.push(format!("gamma = {gamma} exceeds bound {}", bound.value()));
    }

    let scenario = Scenario::symmetric(n, beta, NoiseModel::gaussian(0.0, 0.0));
    let bonus = BonusRule::Cournot { lambda };
    let efforts = vec![effort; n];
    let reports = equilibrium_report_rules(&scenario, &bonus, &efforts)?;
    Ok(SolvedContract {
        contract: Contract::uniform(n, alpha, bonus),
        predicted_efforts: efforts,
        predicted_reports: reports,
        feasible: infeasibility.is_empty(),
        infeasibility,
        diagnostics: vec![
            Diagnostic {
                name: "share_equation_residual",
                value: share_residual,
            },
            Diagnostic {
                name: "lambda_equation_residual",
                value: target_residual,
            },
            Diagnostic {
                name: "target_residual",
                value: nf * effort - gamma,
            },
            Diagnostic {
                name: "gamma_bound",
                value: bound.value(),
            },
            Diagnostic {
                name: "determinant",
                value: det,
            },
        ],
    })
}

/// Assembles a single-customer Cournot contract with `beta = 1`.
fn single_customer(
    alpha: f64,
    lambda: f64,
    m_e: f64,
    diagnostics: Vec<Diagnostic>,
) -> Result<SolvedContract> {
    let scenario = Scenario::symmetric(1, 1.0, NoiseModel::gaussian(m_e, 0.0));
    let contract = Contract::uniform(1, alpha, BonusRule::Cournot { lambda });
    let profile = symmetric_best_response_profile(&scenario, &contract)?;
    let infeasibility = share_violations(1, alpha);
    Ok(SolvedContract {
        contract,
        predicted_efforts: profile.efforts,
        predicted_reports: profile.reports,
        feasible: infeasibility.is_empty(),
        infeasibility,
        diagnostics,
    })
}

/// Single customer, `beta = 1`, realization error with mean `m_e`.
pub fn solve_me_extension(gamma: f64, m_e: f64) -> Result<SolvedContract> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    // 14 alpha + 3 lambda = 7.5 + 4.3 m_e
    // 3 alpha + lambda = 5 gamma - 3 m_e
    let rhs = [7.5 + 4.3 * m_e, 5.0 * gamma - 3.0 * m_e];
    let (alpha, lambda, _) = solve2([[14.0, 3.0], [3.0, 1.0]], rhs);
    let effort = (3.0 * alpha + lambda - 2.0 * m_e) / 5.0;
    single_customer(
        alpha,
        lambda,
        m_e,
        vec![
            Diagnostic {
                name: "share_equation_residual",
                value: alpha - (7.5 - 3.0 * lambda + 4.3 * m_e) / 14.0,
            },
            Diagnostic {
                name: "lambda_equation_residual",
                value: lambda - (5.0 * gamma - 3.0 * (alpha + m_e)),
            },
            Diagnostic {
                name: "target_residual",
                value: effort + m_e - gamma,
            },
        ],
    )
}

/// Single customer, `beta = 1`, aggregator estimation error with mean `m_n`.
pub fn solve_mn_extension(gamma: f64, m_n: f64) -> Result<SolvedContract> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma must be > 0, got {gamma}")));
    }
    let rhs = [7.5 - 12.5 * m_n, 5.0 * gamma];
    let (alpha, lambda, _) = solve2([[14.0, 3.0], [3.0, 1.0]], rhs);
    let effort = (3.0 * alpha + lambda) / 5.0;
    single_customer(
        alpha,
        lambda,
        0.0,
        vec![
            Diagnostic {
                name: "share_equation_residual",
                value: alpha - (7.5 - 3.0 * lambda - 12.5 * m_n) / 14.0,
            },
            Diagnostic {
                name: "lambda_equation_residual",
                value: lambda - (5.0 * gamma - 3.0 * alpha),
            },
            Diagnostic {
                name: "target_residual",
                value: effort - gamma,
            },
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constants_n1() {
        let k = nash_constants(1, 1.0);
        assert_eq!(k.f_c, 0.0);
        assert!(close(k.a_c, 1.0 / 3.0, 1e-15));
        // B only enters through (N - 1) B, so its value is inert at N = 1.
        assert!(close(k.b_c, 1.0 / 6.0, 1e-15));
        assert!(close(k.c_c, 5.0 / 3.0, 1e-15));
        assert!(close(k.d_c, 1.0 / 15.0, 1e-15));
        assert!(close(k.e_c, 1.0 / 3.0, 1e-15));

        let k = nash_constants(1, 2.0);
        assert!(close(k.a_c, 0.5, 1e-15));
        assert!(close(k.c_c, 2.0, 1e-15));
        assert!(close(k.e_c, 0.25, 1e-15));
    }

    #[test]
    fn remark_denominator_forms_agree() {
        assert!(close(nash_constants(1, 1.0).remark_denominator(), 2.0 / 9.0, 1e-15));
        assert!(close(nash_constants(2, 1.0).remark_denominator(), 0.28125, 1e-15));
        for n in 1..=20 {
            for beta in [0.01, 0.3, 1.0, 4.0, 10.0] {
                let k = nash_constants(n, beta);
                assert!(close(k.remark_denominator(), k.remark_denominator_expanded(), 1e-13));
            }
        }
    }

    #[test]
    fn bound_n1() {
        assert_eq!(gamma_upper_bound(1, 1.0), GammaBound::Finite(0.5));
        assert!(gamma_upper_bound(1, 1.0).admits(0.4));
        assert!(!gamma_upper_bound(1, 1.0).admits(0.6));
    }

    #[test]
    fn first_best_examples() {
        let s = Scenario::symmetric(1, 1.0, NoiseModel::gaussian(0.0, 0.1));
        let fb = first_best(&s);
        assert_eq!(fb.effort, 1.0);
        assert_eq!(fb.dra_utility, 0.5);
        assert_eq!(first_best(&Scenario::symmetric(4, 1.0, NoiseModel::default())).dra_utility, 2.0);
        let s = Scenario::symmetric(1, 1.0, NoiseModel::gaussian(0.5, 0.1));
        assert_eq!(first_best(&s).dra_utility, 1.0);
    }

    #[test]
    fn unspecified_examples() {
        let sc = solve_unspecified(1, 1.0, 1.0).unwrap();
        assert_eq!(sc.bonus_parameter(), 0.5);
        assert_eq!(sc.alpha(), 0.0);
        assert_eq!(sc.effort(), 0.5);
        assert!(sc.feasible);

        let sc = solve_unspecified(1, 0.5, 1.0).unwrap();
        assert_eq!((sc.bonus_parameter(), sc.alpha(), sc.effort()), (0.25, 0.25, 0.5));
        assert_eq!(sc.diagnostic("per_customer_e_pi_closed"), Some(0.375));

        let sc = solve_unspecified(1, 3.0, 1.0).unwrap();
        assert!(!sc.feasible);
        assert_eq!(sc.alpha(), -1.0);
    }

    #[test]
    fn specified_n1() {
        let sc = solve_specified(1, 1.0, 0.4).unwrap();
        assert!(close(sc.alpha(), 0.3, 1e-12));
        assert!(close(sc.bonus_parameter(), 1.1, 1e-12));
        assert!(close(sc.effort(), 0.4, 1e-12));
        assert!(sc.feasible);
        let r = sc.predicted_reports[0];
        assert!(close(r.intercept, 1.1 / 3.0, 1e-12) && close(r.slope, 1.0 / 3.0, 1e-15));
        assert!(!solve_specified(1, 1.0, 0.6).unwrap().feasible);
    }

    #[test]
    fn specified_hits_target() {
        for n in [1, 2, 3, 5, 10] {
            for beta in [0.5, 1.0, 2.0] {
                for gamma in [0.2, 0.9, 1.7] {
                    let sc = solve_specified(n, beta, gamma).unwrap();
                    assert!(close(n as f64 * sc.effort(), gamma, 1e-12));
                    for d in ["share_equation_residual", "lambda_equation_residual"] {
                        assert!(sc.diagnostic(d).unwrap().abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn extensions() {
        let me = solve_me_extension(0.4, 0.05).unwrap();
        assert!(close(me.alpha(), 0.433, 1e-12));
        assert!(close(me.bonus_parameter(), 0.551, 1e-12));
        assert!(close(me.effort(), 0.35, 1e-12));
        assert!(close(me.predicted_reports[0].slope, 1.0 / 3.0, 1e-15));

        let mn = solve_mn_extension(0.4, 0.1).unwrap();
        assert!(close(mn.alpha(), 0.05, 1e-12));
        assert!(close(mn.bonus_parameter(), 1.85, 1e-12));
        assert!(close(mn.effort(), 0.4, 1e-12));

        for g in [0.1, 0.25, 0.4, 0.45] {
            let a = solve_specified(1, 1.0, g).unwrap();
            let b = solve_me_extension(g, 0.0).unwrap();
            let c = solve_mn_extension(g, 0.0).unwrap();
            for o in [&b, &c] {
                assert!(close(a.alpha(), o.alpha(), 1e-9));
                assert!(close(a.bonus_parameter(), o.bonus_parameter(), 1e-9));
                assert!(close(a.effort(), o.effort(), 1e-9));
            }
        }
    }

    #[test]
    fn g_term_matches_report_stage() {
        for n in [2, 4] {
            let sc = solve_specified(n, 1.5, 0.8).unwrap();
            let k = nash_constants(n, 1.5);
            let r = sc.predicted_reports[0];
            let others = sc.bonus_parameter() - (1.5 + 2.0) * r.intercept;
            let g = k.g_term(sc.bonus_parameter(), sc.effort());
            assert!(close(others, g - k.f_c * sc.effort(), 1e-12));
        }
    }
}
