//! Command-line front end. This is the only module that reads or writes
//! files.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 infeasible contract,
//! 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{BonusKind, Config};
use crate::dra::{solve_me_extension, solve_mn_extension, solve_specified, solve_unspecified, SolvedContract};
use crate::error::{Error, Result};
use crate::montecarlo::{evaluate_point, sweep, SweepGrid, SweepKind, SweepRow};
use crate::verify::{demo_degenerate_contracts, run_suite, CheckKind, CheckReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;

pub const SEED_ENV: &str = "PHANTOMDR_SEED";

pub const CSV_HEADER: [&str; 20] = [
    "kind",
    "param_name",
    "param_value",
    "n",
    "beta",
    "gamma",
    "m_e",
    "m_n",
    "sigma",
    "alpha_star",
    "lambda_or_mu",
    "feasible",
    "effort",
    "e_pi_closed",
    "e_pi_mc",
    "e_pi_se",
    "e_fals",
    "e_payment",
    "e_v",
    "e_pi_closed_sigma0",
];

#[derive(Debug, Parser)]
#[command(name = "phantomdr", version, about = "Optimal demand-response contracts: solve, verify, simulate, sweep")]
struct Cli {
    /// Scenario file (`[scenario]`, `[contract]`, `[sim]` sections).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; the PHANTOMDR_SEED environment variable takes precedence.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo replications per point.
    #[arg(long, global = true)]
    reps: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    emit_config: bool,
    /// Falsification weight when no config file is given.
    #[arg(long, global = true)]
    beta: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the optimal contract for the configured scenario.
    Solve,
    /// Check best responses, IC, IR and Nash conditions.
    Verify {
        /// Shift customer 0's effort before checking.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        perturb_effort: f64,
        /// Run the degenerate-contract demonstrations instead.
        #[arg(long)]
        demo: bool,
    },
    /// Simulate the solved contract and emit one CSV row.
    Simulate,
    /// Reproduce a figure sweep as CSV.
    Sweep {
        /// fig2 | fig3 | fig4a | fig4b (or the long names).
        kind: String,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long = "m-e")]
        m_e: Option<String>,
        #[arg(long = "m-n")]
        m_n: Option<String>,
    },
}

/// Entry point used by the binary.
pub fn run(args: impl IntoIterator<Item = OsString>) -> i32 {
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run_with(args, env_seed.as_deref(), &mut out, &mut err)
}

/// [`run`] with explicit environment and output streams.
pub fn run_with(
    args: impl IntoIterator<Item = OsString>,
    env_seed: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match dispatch(&cli, env_seed, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn parse_list(what: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("--{what}: `{t}` is not a number")))
        })
        .collect()
}

/// `a..b` (inclusive), a comma list, or a single count.
fn parse_counts(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidParameter(format!("--n: cannot parse `{text}`"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a == 0 || b < a {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|t| match t.trim().parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(bad()),
        })
        .collect()
}

fn load_config(cli: &Cli, env_seed: Option<&str>) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
            Config::parse(&text).map_err(|e| match e {
                Error::InvalidParameter(m) => Error::InvalidParameter(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        None => {
            let beta = match (&cli.beta, &cli.command) {
                (Some(b), _) => parse_list("beta", b)?[0],
                (None, Command::Sweep { .. }) | (None, Command::Verify { demo: true, .. }) => 1.0,
                (None, _) => {
                    return Err(Error::InvalidParameter(
                        "missing required key `beta` (pass --config or --beta)".into(),
                    ))
                }
            };
            Config::with_beta(beta)
        }
    };
    if let (Some(b), Some(_)) = (&cli.beta, &cli.config) {
        cfg.beta = parse_list("beta", b)?[0];
    }
    if let Some(seed) = cli.seed {
        cfg.sim.master_seed = seed;
    }
    if let Some(s) = env_seed {
        cfg.sim.master_seed = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("{SEED_ENV} is not a u64: `{s}`")))?;
    }
    if let Some(r) = cli.reps {
        cfg.sim.n_reps = r;
    }
    cfg.check()?;
    Ok(cfg)
}

/// Picks the solver that matches the configuration.
pub fn solve_config(cfg: &Config) -> Result<SolvedContract> {
    match cfg.bonus {
        BonusKind::Linear => {
            if cfg.m_e != 0.0 || cfg.m_n != 0.0 {
                return Err(Error::Unsupported("the linear contract assumes m_e = m_n = 0"));
            }
            solve_unspecified(cfg.n, cfg.beta, cfg.r0)
        }
        BonusKind::Cournot => {
            let single = cfg.n == 1 && cfg.beta == 1.0;
            match (cfg.m_e != 0.0, cfg.m_n != 0.0) {
                (false, false) => solve_specified(cfg.n, cfg.beta, cfg.gamma),
                (true, false) if single => solve_me_extension(cfg.gamma, cfg.m_e),
                (false, true) if single => solve_mn_extension(cfg.gamma, cfg.m_n),
                (true, true) => Err(Error::Unsupported("m_e and m_n cannot both be nonzero")),
                _ => Err(Error::Unsupported("nonzero m_e or m_n requires n = 1 and beta = 1")),
            }
        }
    }
}

fn emit(cli: &Cli, out: &mut dyn Write, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::InvalidParameter(format!("cannot write output: {e}"))),
    }
}

fn dispatch(cli: &Cli, env_seed: Option<&str>, out: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli, env_seed)?;
    if cli.emit_config {
        emit(cli, out, &cfg.emit())?;
        return Ok(EXIT_OK);
    }
    match &cli.command {
        Command::Solve => cmd_solve(cli, &cfg, out),
        Command::Verify { perturb_effort, demo } => cmd_verify(&cfg, *perturb_effort, *demo, out),
        Command::Simulate => cmd_simulate(cli, &cfg, out),
        Command::Sweep { kind, n, gamma, m_e, m_n } => {
            let kind: SweepKind = kind.parse()?;
            let mut grid = SweepGrid::for_kind(kind);
            if let Some(b) = &cli.beta {
                grid.betas = parse_list("beta", b)?;
            }
            if let Some(v) = n {
                grid.ns = parse_counts(v)?;
            }
            if let Some(v) = gamma {
                grid.gammas = parse_list("gamma", v)?;
            }
            if let Some(v) = m_e {
                grid.m_es = parse_list("m-e", v)?;
            }
            if let Some(v) = m_n {
                grid.m_ns = parse_list("m-n", v)?;
            }
            grid.r0 = cfg.r0;
            grid.noise = cfg.noise_model();
            grid.noise.mean = 0.0;
            let rows = sweep(kind, &grid, &cfg.sim)?;
            emit(cli, out, &to_csv(&rows))?;
            Ok(EXIT_OK)
        }
    }
}

fn describe(sc: &SolvedContract) -> String {
    let mut s = String::new();
    let name = match sc.contract.bonus {
        crate::model::BonusRule::Linear { .. } => "mu",
        _ => "lambda",
    };
    s += &format!(
        "alpha={} {name}={} effort={}\n",
        fmt_g(sc.alpha()),
        fmt_g(sc.bonus_parameter()),
        fmt_g(sc.effort())
    );
    s += &format!("{:<28}{}\n", "bonus", sc.contract.bonus.name());
    s += &format!("{:<28}{}\n", "customers", sc.contract.shares.len());
    let r = sc.predicted_reports[0];
    s += &format!("{:<28}R(x) = {} + {} x\n", "report", fmt_g(r.intercept), fmt_g(r.slope));
    s += &format!("{:<28}{}\n", "feasible", sc.feasible);
    for reason in &sc.infeasibility {
        s += &format!("{:<28}{}\n", "infeasible_because", reason);
    }
    for d in &sc.diagnostics {
        s += &format!("{:<28}{}\n", d.name, fmt_g(d.value));
    }
    s
}

fn cmd_solve(cli: &Cli, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let sc = solve_config(cfg)?;
    let text = describe(&sc);
    if cli.out.is_some() {
        let row = [
            cfg.n.to_string(),
            fmt_g(cfg.beta),
            fmt_g(cfg.gamma),
            fmt_g(sc.alpha()),
            fmt_g(sc.bonus_parameter()),
            fmt_g(sc.effort()),
            sc.feasible.to_string(),
        ];
        emit(cli, out, &format!("n,beta,gamma,alpha_star,lambda_or_mu,effort,feasible\n{}\n", row.join(",")))?;
    }
    write_text(out, &text)?;
    Ok(if sc.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn write_text(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::InvalidParameter(format!("cannot write output: {e}")))
}

fn report_table(reports: &[CheckReport]) -> String {
    reports.iter().map(|r| format!("{r}\n")).collect()
}

fn cmd_verify(cfg: &Config, perturb: f64, demo: bool, out: &mut dyn Write) -> Result<i32> {
    let reports = if demo {
        demo_degenerate_contracts()?
    } else {
        let sc = solve_config(cfg)?;
        run_suite(&cfg.scenario(), &sc, perturb)?
    };
    write_text(out, &report_table(&reports))?;
    let ok = reports
        .iter()
        .filter(|r| r.kind == CheckKind::Gate)
        .all(|r| r.passed);
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn cmd_simulate(cli: &Cli, cfg: &Config, out: &mut dyn Write) -> Result<i32> {
    let sc = solve_config(cfg)?;
    let row = evaluate_point("point", "n", cfg.n as f64, &cfg.scenario(), &sc, &cfg.sim)?;
    emit(cli, out, &to_csv(std::slice::from_ref(&row)))?;
    Ok(if sc.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

/// `%g`-style formatting with 12 significant digits.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{v:.11e}");
        let (mant, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        let e: i32 = e.parse().unwrap_or(0);
        return format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs());
    }
    let s = format!("{v:.*}", (11 - exp).max(0) as usize);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Serializes rows with [`CSV_HEADER`] columns. Per-customer columns refer
/// to customer 0 and hold closed-form values.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = CSV_HEADER.join(",");
    s.push('\n');
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt_g).unwrap_or_default();
        let fields = [
            r.kind.to_string(),
            r.param_name.to_string(),
            fmt_g(r.param_value),
            r.n.to_string(),
            fmt_g(r.beta),
            opt(r.gamma),
            fmt_g(r.m_e),
            fmt_g(r.m_n),
            fmt_g(r.sigma),
            fmt_g(r.alpha_star),
            fmt_g(r.lambda_or_mu),
            r.feasible.to_string(),
            fmt_g(r.effort),
            fmt_g(r.closed.dra_utility),
            opt(r.stats.as_ref().map(|s| s.dra_utility.mean)),
            opt(r.stats.as_ref().map(|s| s.dra_utility.std_err)),
            fmt_g(r.closed.expected_falsification[0]),
            fmt_g(r.closed.expected_payments[0]),
            fmt_g(r.closed.customer_utilities[0]),
            fmt_g(r.e_pi_closed_sigma0),
        ];
        s += &fields.join(",");
        s.push('\n');
    }
    s
}
