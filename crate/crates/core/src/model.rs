//! Domain types and closed-form expected utilities.
//!
//! Every customer realizes a load reduction `x_i = a_i + e_i`, where `a_i` is
//! her (hidden) effort and `e_i` an independent noise term. She is paid
//! `P_i = alpha_i * y_i + B_i(R)`, where `y_i` is the aggregator's measure of
//! her reduction (`x_i`, or `x_i + n_i` when the aggregator estimates it with
//! error) and `B_i` a bonus on her reported reduction `R_i`. Her utility is
//! `P_i - h(a_i) - g_i(R_i - x_i)` and the aggregator keeps `sum(y_i - P_i)`.
//!
//! All utilities are quadratic in the noise, so expectations only need the
//! mean and variance of each `x_i`.

use std::fmt;

use crate::error::{Error, Result};

/// Effort cost `h(a) = a^2 / 2`.
#[inline]
pub fn effort_cost(effort: f64) -> f64 {
    0.5 * effort * effort
}

/// Falsification cost `g(d) = beta * d^2 / 2` for a misreport `d = R - x`.
#[inline]
pub fn falsification_cost(beta: f64, misreport: f64) -> f64 {
    0.5 * beta * misreport * misreport
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NoiseDistribution {
    #[default]
    Gaussian,
    /// Symmetric uniform with the configured mean and standard deviation.
    Uniform,
}

impl NoiseDistribution {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseDistribution::Gaussian => "gaussian",
            NoiseDistribution::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for NoiseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(NoiseDistribution::Gaussian),
            "uniform" => Ok(NoiseDistribution::Uniform),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise distribution `{other}`"
            ))),
        }
    }
}

/// Distribution of the realization error `e_i` (or of the estimation error).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub distribution: NoiseDistribution,
    pub mean: f64,
    pub std: f64,
}

impl NoiseModel {
    pub fn gaussian(mean: f64, std: f64) -> Self {
        NoiseModel {
            distribution: NoiseDistribution::Gaussian,
            mean,
            std,
        }
    }

    pub fn uniform(mean: f64, std: f64) -> Self {
        NoiseModel {
            distribution: NoiseDistribution::Uniform,
            mean,
            std,
        }
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }

    /// Half-width of the uniform support with this standard deviation.
    pub fn uniform_half_width(&self) -> f64 {
        3f64.sqrt() * self.std
    }

    pub fn with_std(self, std: f64) -> Self {
        NoiseModel { std, ..self }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::gaussian(0.0, 0.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CustomerParams {
    pub beta: f64,
    pub noise: NoiseModel,
}

impl CustomerParams {
    pub fn new(beta: f64, noise: NoiseModel) -> Self {
        CustomerParams { beta, noise }
    }
}

/// A market instance: the contracted customers plus aggregator-side settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub customers: Vec<CustomerParams>,
    /// Target total expected reduction, for the specified-load setting.
    pub gamma: Option<f64>,
    /// Mean of the aggregator's profit-estimation error `n`.
    pub m_n: f64,
    /// Standard deviation of `n`; falls back to each customer's noise std.
    pub estimation_std: Option<f64>,
}

impl Scenario {
    pub fn new(customers: Vec<CustomerParams>) -> Self {
        Scenario {
            customers,
            gamma: None,
            m_n: 0.0,
            estimation_std: None,
        }
    }

    /// `n` identical customers.
    pub fn symmetric(n: usize, beta: f64, noise: NoiseModel) -> Self {
        Scenario::new(vec![CustomerParams::new(beta, noise); n])
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_m_n(mut self, m_n: f64) -> Self {
        self.m_n = m_n;
        self
    }

    pub fn n_customers(&self) -> usize {
        self.customers.len()
    }

    /// The common beta, if every customer shares it.
    pub fn common_beta(&self) -> Option<f64> {
        let first = self.customers.first()?.beta;
        self.customers
            .iter()
            .all(|c| c.beta == first)
            .then_some(first)
    }

    /// Noise model of customer `i`'s estimation error `n_i`, or `None` when
    /// the aggregator observes `x_i` exactly.
    pub fn estimation_noise(&self, i: usize) -> Option<NoiseModel> {
        if self.m_n == 0.0 {
            return None;
        }
        let c = &self.customers[i];
        Some(NoiseModel {
            distribution: c.noise.distribution,
            mean: self.m_n,
            std: self.estimation_std.unwrap_or(c.noise.std),
        })
    }
}

/// Bonus paid on the reported reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BonusRule {
    /// `B = c`, independent of the report.
    Constant { c: f64 },
    /// `B = mu * (R - r0)`.
    Linear { mu: f64, r0: f64 },
    /// `B_i = R_i * (lambda - sum_j R_j)`.
    Cournot { lambda: f64 },
}

impl BonusRule {
    pub fn name(&self) -> &'static str {
        match self {
            BonusRule::Constant { .. } => "constant",
            BonusRule::Linear { .. } => "linear",
            BonusRule::Cournot { .. } => "cournot",
        }
    }

    /// Bonus for report `r` given the sum of everyone else's reports.
    pub fn value(&self, r: f64, others_sum: f64) -> f64 {
        match *self {
            BonusRule::Constant { c } => c,
            BonusRule::Linear { mu, r0 } => mu * (r - r0),
            BonusRule::Cournot { lambda } => r * (lambda - r - others_sum),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    /// Share `alpha_i` of the aggregator's gross profit paid to customer `i`.
    pub shares: Vec<f64>,
    pub bonus: BonusRule,
}

impl Contract {
    pub fn uniform(n: usize, share: f64, bonus: BonusRule) -> Self {
        Contract {
            shares: vec![share; n],
            bonus,
        }
    }
}

/// Report rule `R(x) = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineReport {
    pub intercept: f64,
    pub slope: f64,
}

impl AffineReport {
    pub fn new(intercept: f64, slope: f64) -> Self {
        AffineReport { intercept, slope }
    }

    pub fn truthful() -> Self {
        AffineReport::new(0.0, 1.0)
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    pub efforts: Vec<f64>,
    pub reports: Vec<AffineReport>,
}

impl StrategyProfile {
    pub fn new(efforts: Vec<f64>, reports: Vec<AffineReport>) -> Self {
        StrategyProfile { efforts, reports }
    }

    pub fn len(&self) -> usize {
        self.efforts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.efforts.is_empty()
    }
}

/// A broken invariant found by [`validate_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoCustomers,
    NonPositiveBeta { customer: usize, beta: f64 },
    NegativeStd { customer: usize, std: f64 },
    NonPositiveGamma(f64),
    ShareCount { expected: usize, got: usize },
    NegativeShare { customer: usize, share: f64 },
    ShareSumAtLeastOne(f64),
    NegativeConstantBonus(f64),
    NegativeMu(f64),
    NegativeR0(f64),
    NonFinite(&'static str),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoCustomers => write!(f, "no customers"),
            Violation::NonPositiveBeta { customer, beta } => {
                write!(f, "beta <= 0 (customer {customer}: {beta})")
            }
            Violation::NegativeStd { customer, std } => {
                write!(f, "noise std < 0 (customer {customer}: {std})")
            }
            Violation::NonPositiveGamma(g) => write!(f, "gamma <= 0 ({g})"),
            Violation::ShareCount { expected, got } => {
                write!(f, "share count {got} != customer count {expected}")
            }
            Violation::NegativeShare { customer, share } => {
                write!(f, "share < 0 (customer {customer}: {share})")
            }
            Violation::ShareSumAtLeastOne(_) => write!(f, "sum of shares ≥ 1"),
            Violation::NegativeConstantBonus(_) => write!(f, "c < 0"),
            Violation::NegativeMu(_) => write!(f, "mu < 0"),
            Violation::NegativeR0(_) => write!(f, "r0 < 0"),
            Violation::NonFinite(what) => write!(f, "{what} is not finite"),
        }
    }
}

/// Checks every scenario and contract invariant. An empty result means the
/// pair is admissible.
pub fn validate_scenario(s: &Scenario, k: &Contract) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = s.n_customers();
    if n == 0 {
        out.push(Violation::NoCustomers);
    }
    for (i, c) in s.customers.iter().enumerate() {
        if !(c.beta > 0.0) {
            out.push(Violation::NonPositiveBeta {
                customer: i,
                beta: c.beta,
            });
        }
        if !(c.noise.std >= 0.0) {
            out.push(Violation::NegativeStd {
                customer: i,
                std: c.noise.std,
            });
        }
        if !c.noise.mean.is_finite() {
            out.push(Violation::NonFinite("noise mean"));
        }
    }
    if let Some(g) = s.gamma {
        if !(g > 0.0) {
            out.push(Violation::NonPositiveGamma(g));
        }
    }
    if !s.m_n.is_finite() {
        out.push(Violation::NonFinite("m_n"));
    }

    if k.shares.len() != n {
        out.push(Violation::ShareCount {
            expected: n,
            got: k.shares.len(),
        });
    }
    for (i, &a) in k.shares.iter().enumerate() {
        if !(a >= 0.0) {
            out.push(Violation::NegativeShare {
                customer: i,
                share: a,
            });
        }
    }
    let total: f64 = k.shares.iter().sum();
    if total >= 1.0 {
        out.push(Violation::ShareSumAtLeastOne(total));
    }
    match k.bonus {
        BonusRule::Constant { c } if !(c >= 0.0) => {
            out.push(Violation::NegativeConstantBonus(c))
        }
        BonusRule::Linear { mu, r0 } => {
            if !(mu >= 0.0) {
                out.push(Violation::NegativeMu(mu));
            }
            if !(r0 >= 0.0) {
                out.push(Violation::NegativeR0(r0));
            }
        }
        BonusRule::Cournot { lambda } if !lambda.is_finite() => {
            out.push(Violation::NonFinite("lambda"))
        }
        _ => {}
    }
    out
}

/// Closed-form expectations under a contract and strategy profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedOutcome {
    pub customer_utilities: Vec<f64>,
    pub dra_utility: f64,
    /// `E[R_i - x_i]`.
    pub expected_falsification: Vec<f64>,
    /// `sum_i E[x_i]`.
    pub expected_total_reduction: f64,
    /// `sum_i E[y_i]`; equals the total reduction unless `m_n != 0`.
    pub expected_gross_profit: f64,
    pub expected_payments: Vec<f64>,
}

/// Mean and variance of one customer's reduction and report.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Moments {
    pub x_mean: f64,
    pub r_mean: f64,
    pub r_var: f64,
    /// `E[(R - x)^2]`.
    pub misreport_sq: f64,
}

pub(crate) fn moments(params: &CustomerParams, effort: f64, rule: &AffineReport) -> Moments {
    let x_mean = effort + params.noise.mean;
    let x_var = params.noise.variance();
    let r_mean = rule.apply(x_mean);
    let r_var = rule.slope * rule.slope * x_var;
    let bias = r_mean - x_mean;
    let d = rule.slope - 1.0;
    Moments {
        x_mean,
        r_mean,
        r_var,
        misreport_sq: bias * bias + d * d * x_var,
    }
}

fn check_dims(s: &Scenario, k: &Contract, p: &StrategyProfile) -> Result<usize> {
    let n = s.n_customers();
    if n == 0 {
        return Err(Error::NoCustomers);
    }
    for (what, got) in [
        ("contract shares", k.shares.len()),
        ("profile efforts", p.efforts.len()),
        ("profile reports", p.reports.len()),
    ] {
        if got != n {
            return Err(Error::LengthMismatch {
                what,
                expected: n,
                got,
            });
        }
    }
    Ok(n)
}

fn expected_bonus(bonus: &BonusRule, m: &Moments, others_report_mean: f64) -> f64 {
    match *bonus {
        BonusRule::Constant { c } => c,
        BonusRule::Linear { mu, r0 } => mu * (m.r_mean - r0),
        BonusRule::Cournot { lambda } => {
            // Reports of other customers are independent of x_i.
            lambda * m.r_mean - (m.r_mean * m.r_mean + m.r_var) - m.r_mean * others_report_mean
        }
    }
}

/// Evaluates every closed-form expectation at once.
pub fn expected_outcome(
    s: &Scenario,
    k: &Contract,
    p: &StrategyProfile,
) -> Result<ExpectedOutcome> {
    let n = check_dims(s, k, p)?;
    let ms: Vec<Moments> = (0..n)
        .map(|i| moments(&s.customers[i], p.efforts[i], &p.reports[i]))
        .collect();
    let report_total: f64 = ms.iter().map(|m| m.r_mean).sum();

    let mut customer_utilities = Vec::with_capacity(n);
    let mut expected_payments = Vec::with_capacity(n);
    let mut expected_falsification = Vec::with_capacity(n);
    let mut gross = 0.0;
    let mut total_reduction = 0.0;
    for (i, m) in ms.iter().enumerate() {
        let measured = m.x_mean + s.m_n;
        let bonus = expected_bonus(&k.bonus, m, report_total - m.r_mean);
        let payment = k.shares[i] * measured + bonus;
        let utility = payment
            - effort_cost(p.efforts[i])
            - 0.5 * s.customers[i].beta * m.misreport_sq;
        customer_utilities.push(utility);
        expected_payments.push(payment);
        expected_falsification.push(m.r_mean - m.x_mean);
        gross += measured;
        total_reduction += m.x_mean;
    }
    let dra_utility = gross - expected_payments.iter().sum::<f64>();
    Ok(ExpectedOutcome {
        customer_utilities,
        dra_utility,
        expected_falsification,
        expected_total_reduction: total_reduction,
        expected_gross_profit: gross,
        expected_payments,
    })
}

/// `E[V_i]`, averaging over every customer's noise.
pub fn customer_expected_utility(
    s: &Scenario,
    k: &Contract,
    p: &StrategyProfile,
    i: usize,
) -> Result<f64> {
    let n = check_dims(s, k, p)?;
    if i >= n {
        return Err(Error::CustomerIndex { index: i, n });
    }
    Ok(expected_outcome(s, k, p)?.customer_utilities[i])
}

/// `E[Pi]` for the aggregator.
pub fn dra_expected_utility(s: &Scenario, k: &Contract, p: &StrategyProfile) -> Result<f64> {
    Ok(expected_outcome(s, k, p)?.dra_utility)
}
