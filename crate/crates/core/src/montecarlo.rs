//! Seeded simulation of DR events and the figure sweeps built on it.
//!
//! Each (replication, customer) pair draws from its own ChaCha stream keyed by
//! the master seed, so results do not depend on how replications are split
//! across threads. Replications are processed in fixed blocks whose running
//! moments are merged pairwise in block order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;

use crate::customer::symmetric_best_response_profile;
use crate::dra::{solve_me_extension, solve_mn_extension, solve_specified, solve_unspecified, SolvedContract};
use crate::error::{Error, Result};
use crate::model::{
    effort_cost, expected_outcome, validate_scenario, ExpectedOutcome, NoiseDistribution,
    NoiseModel, Scenario, Contract, StrategyProfile,
};

const BLOCK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub n_reps: u64,
    pub master_seed: u64,
    /// Pair every draw with its mirror image about the noise mean.
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_reps: 100_000,
            master_seed: 42,
            antithetic: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    /// Replications behind the estimate.
    pub count: u64,
}

impl Estimate {
    /// Distance from `value` in standard errors; exact agreement counts as 0
    /// even when the standard error vanishes.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_err
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    pub customer_utilities: Vec<Estimate>,
    pub dra_utility: Estimate,
    pub falsification: Vec<Estimate>,
    pub total_reduction: Estimate,
    pub payments: Vec<Estimate>,
}

impl SimStats {
    /// Pairs of (quantity name, estimate, closed form).
    pub fn compare<'a>(&'a self, closed: &'a ExpectedOutcome) -> Vec<(String, Estimate, f64)> {
        let mut out = vec![
            ("e_pi".to_string(), self.dra_utility, closed.dra_utility),
            ("total_reduction".to_string(), self.total_reduction, closed.expected_total_reduction),
        ];
        for i in 0..self.customer_utilities.len() {
            out.push((format!("e_v[{i}]"), self.customer_utilities[i], closed.customer_utilities[i]));
            out.push((format!("e_fals[{i}]"), self.falsification[i], closed.expected_falsification[i]));
            out.push((format!("e_payment[{i}]"), self.payments[i], closed.expected_payments[i]));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + d * b.n as f64 / n as f64,
            m2: a.m2 + b.m2 + d * d * (a.n as f64 * b.n as f64 / n as f64),
        }
    }

    fn estimate(&self, per_obs: u64) -> Estimate {
        let se = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            std_err: se,
            count: self.n * per_obs,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream seed for replication `r` of customer `i`.
pub fn stream_seed(master: u64, r: u64, i: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ r) ^ i)
}

enum Sampler {
    Fixed(f64),
    Normal(Normal<f64>),
    Uniform(Uniform<f64>),
}

impl Sampler {
    fn new(noise: &NoiseModel) -> Result<Self> {
        if !(noise.std >= 0.0) || !noise.mean.is_finite() || !noise.std.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "noise needs finite mean and std >= 0, got ({}, {})",
                noise.mean, noise.std
            )));
        }
        if noise.std == 0.0 {
            return Ok(Sampler::Fixed(noise.mean));
        }
        Ok(match noise.distribution {
            NoiseDistribution::Gaussian => Sampler::Normal(
                Normal::new(noise.mean, noise.std).map_err(|e| Error::InvalidParameter(e.to_string()))?,
            ),
            NoiseDistribution::Uniform => {
                let h = noise.uniform_half_width();
                Sampler::Uniform(
                    Uniform::new(noise.mean - h, noise.mean + h)
                        .map_err(|e| Error::InvalidParameter(e.to_string()))?,
                )
            }
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Fixed(v) => *v,
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Uniform(d) => d.sample(rng),
        }
    }
}

struct Event<'a> {
    s: &'a Scenario,
    k: &'a Contract,
    p: &'a StrategyProfile,
    noise: Vec<(Sampler, Option<Sampler>)>,
}

impl Event<'_> {
    /// Number of recorded quantities for `n` customers.
    fn width(n: usize) -> usize {
        3 * n + 2
    }

    /// Draws `(e_i, n_i)` for every customer in observation `r`.
    fn draw(&self, master: u64, r: u64) -> Vec<(f64, f64)> {
        self.noise
            .iter()
            .enumerate()
            .map(|(i, (e, n))| {
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(master, r, i as u64));
                let ev = e.sample(&mut rng);
                let nv = n.as_ref().map_or(0.0, |n| n.sample(&mut rng));
                (ev, nv)
            })
            .collect()
    }

    fn mirror(&self, draws: &[(f64, f64)]) -> Vec<(f64, f64)> {
        draws
            .iter()
            .enumerate()
            .map(|(i, &(e, n))| {
                let em = self.s.customers[i].noise.mean;
                let nm = self.s.m_n;
                (2.0 * em - e, if self.noise[i].1.is_some() { 2.0 * nm - n } else { 0.0 })
            })
            .collect()
    }

    /// Realized quantities: `V_i...`, `Pi`, `R_i - x_i...`, `sum x_i`, `P_i...`.
    fn realize(&self, draws: &[(f64, f64)], out: &mut [f64]) {
        let n = draws.len();
        let mut xs = Vec::with_capacity(n);
        let mut rs = Vec::with_capacity(n);
        for (i, &(e, _)) in draws.iter().enumerate() {
            let x = self.p.efforts[i] + e;
            xs.push(x);
            rs.push(self.p.reports[i].apply(x));
        }
        let report_total: f64 = rs.iter().sum();
        let mut dra = 0.0;
        for i in 0..n {
            let y = xs[i] + draws[i].1;
            let pay = self.k.shares[i] * y + self.k.bonus.value(rs[i], report_total - rs[i]);
            let d = rs[i] - xs[i];
            out[i] = pay - effort_cost(self.p.efforts[i]) - 0.5 * self.s.customers[i].beta * d * d;
            out[n + 1 + i] = d;
            out[2 * n + 2 + i] = pay;
            dra += y - pay;
        }
        out[n] = dra;
        out[2 * n + 1] = xs.iter().sum();
    }
}

fn run_block(ev: &Event, cfg: &SimConfig, block: u64, n_obs: u64) -> Vec<Moments> {
    let n = ev.s.n_customers();
    let w = Event::width(n);
    let mut acc = vec![Moments::default(); w];
    let mut buf = vec![0.0; w];
    let mut mirror = vec![0.0; w];
    let start = block * BLOCK;
    for r in start..(start + BLOCK).min(n_obs) {
        let draws = ev.draw(cfg.master_seed, r);
        ev.realize(&draws, &mut buf);
        if cfg.antithetic {
            ev.realize(&ev.mirror(&draws), &mut mirror);
            for (b, m) in buf.iter_mut().zip(&mirror) {
                *b = 0.5 * (*b + m);
            }
        }
        for (a, v) in acc.iter_mut().zip(&buf) {
            a.push(*v);
        }
    }
    acc
}

fn tree_merge(mut level: Vec<Vec<Moments>>) -> Vec<Moments> {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|c| match c {
                [a, b] => a.iter().zip(b).map(|(x, y)| Moments::merge(*x, *y)).collect(),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().unwrap_or_default()
}

/// Simulates `cfg.n_reps` DR events using every available core.
pub fn simulate(s: &Scenario, k: &Contract, p: &StrategyProfile, cfg: &SimConfig) -> Result<SimStats> {
    simulate_with(s, k, p, cfg, Execution::Parallel)
}

/// [`simulate`] with an explicit execution mode; both modes give
/// bit-identical results.
pub fn simulate_with(
    s: &Scenario,
    k: &Contract,
    p: &StrategyProfile,
    cfg: &SimConfig,
    mode: Execution,
) -> Result<SimStats> {
    if let Some(v) = validate_scenario(s, k).first() {
        return Err(Error::InvalidParameter(v.to_string()));
    }
    let n = s.n_customers();
    for (what, got) in [("profile efforts", p.efforts.len()), ("profile reports", p.reports.len())] {
        if got != n {
            return Err(Error::LengthMismatch { what, expected: n, got });
        }
    }
    if cfg.n_reps == 0 {
        return Err(Error::InvalidParameter("n_reps must be >= 1".into()));
    }
    if cfg.antithetic && cfg.n_reps % 2 == 1 {
        return Err(Error::InvalidParameter("antithetic sampling needs an even n_reps".into()));
    }
    let noise = (0..n)
        .map(|i| {
            Ok((
                Sampler::new(&s.customers[i].noise)?,
                s.estimation_noise(i).map(|m| Sampler::new(&m)).transpose()?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let ev = Event { s, k, p, noise };

    let (n_obs, per_obs) = if cfg.antithetic {
        (cfg.n_reps / 2, 2)
    } else {
        (cfg.n_reps, 1)
    };
    let blocks = n_obs.div_ceil(BLOCK);
    let parts: Vec<Vec<Moments>> = match mode {
        Execution::Parallel => (0..blocks)
            .into_par_iter()
            .map(|b| run_block(&ev, cfg, b, n_obs))
            .collect(),
        Execution::Sequential => (0..blocks).map(|b| run_block(&ev, cfg, b, n_obs)).collect(),
    };
    let m = tree_merge(parts);
    let est = |j: usize| m[j].estimate(per_obs);
    Ok(SimStats {
        customer_utilities: (0..n).map(est).collect(),
        dra_utility: est(n),
        falsification: (0..n).map(|i| est(n + 1 + i)).collect(),
        total_reduction: est(2 * n + 1),
        payments: (0..n).map(|i| est(2 * n + 2 + i)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Unspecified load: `E[Pi]` against `N` for several `beta`.
    Fig2BetaN,
    /// Specified load: share, profit and falsification against `N` for several
    /// targets `gamma`.
    Fig3GammaN,
    /// Single customer, varying realization-error mean.
    Fig4aMe,
    /// Single customer, varying estimation-error mean.
    Fig4bMn,
}

impl SweepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKind::Fig2BetaN => "fig2_beta_N",
            SweepKind::Fig3GammaN => "fig3_gamma_N",
            SweepKind::Fig4aMe => "fig4a_me",
            SweepKind::Fig4bMn => "fig4b_mn",
        }
    }
}

impl std::str::FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" | "fig2_beta_N" => Ok(SweepKind::Fig2BetaN),
            "fig3" | "fig3_gamma_N" => Ok(SweepKind::Fig3GammaN),
            "fig4a" | "fig4a_me" => Ok(SweepKind::Fig4aMe),
            "fig4b" | "fig4b_mn" => Ok(SweepKind::Fig4bMn),
            other => Err(Error::InvalidParameter(format!("unknown sweep kind `{other}`"))),
        }
    }
}

/// Grid of a sweep. Kinds read only the axes they need; the single-customer
/// kinds use the first `gamma` and force `N = beta = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub betas: Vec<f64>,
    pub ns: Vec<usize>,
    pub gammas: Vec<f64>,
    pub m_es: Vec<f64>,
    pub m_ns: Vec<f64>,
    pub r0: f64,
    /// Family and std of the realization error; its mean is ignored.
    pub noise: NoiseModel,
}

impl SweepGrid {
    /// Defaults matching the published figure axes.
    pub fn for_kind(kind: SweepKind) -> Self {
        let (betas, ns) = match kind {
            SweepKind::Fig2BetaN => (vec![0.25, 0.5, 0.75], (1..=20).collect()),
            SweepKind::Fig3GammaN => (vec![1.0], (1..=15).collect()),
            _ => (vec![1.0], vec![1]),
        };
        let gammas = match kind {
            SweepKind::Fig3GammaN => vec![0.3, 0.4],
            _ => vec![0.4],
        };
        SweepGrid {
            betas,
            ns,
            gammas,
            m_es: vec![0.0, 0.025, 0.05, 0.075, 0.1],
            m_ns: vec![0.0, 0.05, 0.1],
            r0: 1.0,
            noise: NoiseModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Sweep kind name, or `point` for a single simulation.
    pub kind: &'static str,
    pub param_name: &'static str,
    pub param_value: f64,
    pub n: usize,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub m_e: f64,
    pub m_n: f64,
    pub sigma: f64,
    pub alpha_star: f64,
    /// `lambda*` for Cournot contracts, `mu*` for linear ones.
    pub lambda_or_mu: f64,
    pub feasible: bool,
    pub effort: f64,
    pub closed: ExpectedOutcome,
    /// `E[Pi]` in closed form with the noise variance set to zero.
    pub e_pi_closed_sigma0: f64,
    pub stats: Option<SimStats>,
}

struct Point {
    param_name: &'static str,
    param_value: f64,
    n: usize,
    beta: f64,
    gamma: Option<f64>,
    m_e: f64,
    m_n: f64,
    solved: SolvedContract,
}

fn points(kind: SweepKind, grid: &SweepGrid) -> Result<Vec<Point>> {
    let nonempty = |len: usize, what: &str| {
        if len == 0 {
            Err(Error::InvalidParameter(format!("sweep grid has no {what}")))
        } else {
            Ok(())
        }
    };
    let mut out = Vec::new();
    match kind {
        SweepKind::Fig2BetaN => {
            nonempty(grid.betas.len(), "beta values")?;
            nonempty(grid.ns.len(), "customer counts")?;
            for &beta in &grid.betas {
                for &n in &grid.ns {
                    out.push(Point {
                        param_name: "beta",
                        param_value: beta,
                        n,
                        beta,
                        gamma: None,
                        m_e: 0.0,
                        m_n: 0.0,
                        solved: solve_unspecified(n, beta, grid.r0)?,
                    });
                }
            }
        }
        SweepKind::Fig3GammaN => {
            nonempty(grid.betas.len(), "beta values")?;
            nonempty(grid.gammas.len(), "gamma values")?;
            nonempty(grid.ns.len(), "customer counts")?;
            for (&beta, &gamma) in grid.betas.iter().flat_map(|b| grid.gammas.iter().map(move |g| (b, g))) {
                for &n in &grid.ns {
                    out.push(Point {
                        param_name: "gamma",
                        param_value: gamma,
                        n,
                        beta,
                        gamma: Some(gamma),
                        m_e: 0.0,
                        m_n: 0.0,
                        solved: solve_specified(n, beta, gamma)?,
                    });
                }
            }
        }
        SweepKind::Fig4aMe | SweepKind::Fig4bMn => {
            nonempty(grid.gammas.len(), "gamma values")?;
            let gamma = grid.gammas[0];
            let values = if kind == SweepKind::Fig4aMe { &grid.m_es } else { &grid.m_ns };
            nonempty(values.len(), "error means")?;
            for &v in values {
                let (m_e, m_n, solved, name) = if kind == SweepKind::Fig4aMe {
                    (v, 0.0, solve_me_extension(gamma, v)?, "m_e")
                } else {
                    (0.0, v, solve_mn_extension(gamma, v)?, "m_n")
                };
                out.push(Point {
                    param_name: name,
                    param_value: v,
                    n: 1,
                    beta: 1.0,
                    gamma: Some(gamma),
                    m_e,
                    m_n,
                    solved,
                });
            }
        }
    }
    Ok(out)
}

/// Evaluates one solved contract in closed form and, when it is feasible,
/// by simulation.
pub fn evaluate_point(
    kind: &'static str,
    param_name: &'static str,
    param_value: f64,
    s: &Scenario,
    solved: &SolvedContract,
    cfg: &SimConfig,
) -> Result<SweepRow> {
    let k = &solved.contract;
    let profile = symmetric_best_response_profile(s, k)?;
    let closed = expected_outcome(s, k, &profile)?;
    let mut quiet = s.clone();
    for c in &mut quiet.customers {
        c.noise.std = 0.0;
    }
    let sigma0 = expected_outcome(&quiet, k, &profile)?.dra_utility;
    let stats = if solved.feasible {
        Some(simulate(s, k, &profile, cfg)?)
    } else {
        None
    };
    let first = s.customers.first().ok_or(Error::NoCustomers)?;
    Ok(SweepRow {
        kind,
        param_name,
        param_value,
        n: s.n_customers(),
        beta: first.beta,
        gamma: s.gamma,
        m_e: first.noise.mean,
        m_n: s.m_n,
        sigma: first.noise.std,
        alpha_star: solved.alpha(),
        lambda_or_mu: solved.bonus_parameter(),
        feasible: solved.feasible,
        effort: profile.efforts[0],
        closed,
        e_pi_closed_sigma0: sigma0,
        stats,
    })
}

/// Solves, evaluates and (for feasible points) simulates every grid point.
/// Every row uses `cfg.master_seed`.
pub fn sweep(kind: SweepKind, grid: &SweepGrid, cfg: &SimConfig) -> Result<Vec<SweepRow>> {
    points(kind, grid)?
        .into_iter()
        .map(|pt| {
            let noise = NoiseModel { mean: pt.m_e, ..grid.noise };
            let mut s = Scenario::symmetric(pt.n, pt.beta, noise).with_m_n(pt.m_n);
            s.gamma = pt.gamma;
            evaluate_point(kind.as_str(), pt.param_name, pt.param_value, &s, &pt.solved, cfg)
        })
        .collect()
}
