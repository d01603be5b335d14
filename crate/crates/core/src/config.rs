//! Flat `key = value` configuration with `[scenario]`, `[contract]` and
//! `[sim]` sections.
//!
//! ```text
//! [scenario]
//! n = 2
//! beta = 1
//! gamma = 0.8
//! sigma = 0.1
//!
//! [contract]
//! bonus = cournot
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{NoiseDistribution, NoiseModel, Scenario};
use crate::montecarlo::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BonusKind {
    /// Target-driven Cournot bonus.
    #[default]
    Cournot,
    /// Linear bonus without a target.
    Linear,
}

impl BonusKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BonusKind::Cournot => "cournot",
            BonusKind::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n: usize,
    pub beta: f64,
    pub gamma: f64,
    pub noise: NoiseDistribution,
    pub sigma: f64,
    pub m_e: f64,
    pub m_n: f64,
    pub estimation_std: Option<f64>,
    pub bonus: BonusKind,
    pub r0: f64,
    pub sim: SimConfig,
}

impl Config {
    pub fn with_beta(beta: f64) -> Self {
        Config {
            n: 1,
            beta,
            gamma: 0.4,
            noise: NoiseDistribution::Gaussian,
            sigma: 0.1,
            m_e: 0.0,
            m_n: 0.0,
            estimation_std: None,
            bonus: BonusKind::Cournot,
            r0: 1.0,
            sim: SimConfig::default(),
        }
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            distribution: self.noise,
            mean: self.m_e,
            std: self.sigma,
        }
    }

    pub fn scenario(&self) -> Scenario {
        let mut s = Scenario::symmetric(self.n, self.beta, self.noise_model()).with_m_n(self.m_n);
        s.estimation_std = self.estimation_std;
        if self.bonus == BonusKind::Cournot {
            s.gamma = Some(self.gamma);
        }
        s
    }

    pub fn emit(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "[scenario]");
        let _ = writeln!(o, "n = {}", self.n);
        let _ = writeln!(o, "beta = {}", self.beta);
        let _ = writeln!(o, "gamma = {}", self.gamma);
        let _ = writeln!(o, "noise = {}", self.noise.as_str());
        let _ = writeln!(o, "sigma = {}", self.sigma);
        let _ = writeln!(o, "m_e = {}", self.m_e);
        let _ = writeln!(o, "m_n = {}", self.m_n);
        if let Some(v) = self.estimation_std {
            let _ = writeln!(o, "estimation_std = {v}");
        }
        let _ = writeln!(o, "\n[contract]");
        let _ = writeln!(o, "bonus = {}", self.bonus.as_str());
        let _ = writeln!(o, "r0 = {}", self.r0);
        let _ = writeln!(o, "\n[sim]");
        let _ = writeln!(o, "seed = {}", self.sim.master_seed);
        let _ = writeln!(o, "reps = {}", self.sim.n_reps);
        let _ = writeln!(o, "antithetic = {}", self.sim.antithetic);
        o
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::with_beta(f64::NAN);
        let mut have_beta = false;
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |msg: String| Error::InvalidParameter(format!("line {line_no}: {msg}"));
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header `{line}`")))?
                    .trim();
                if !matches!(name, "scenario" | "contract" | "sim") {
                    return Err(err(format!("unknown section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let float = || value.parse::<f64>().map_err(|_| err(format!("`{key}` expects a number, got `{value}`")));
            let int = || value.parse::<u64>().map_err(|_| err(format!("`{key}` expects an integer, got `{value}`")));
            match (section.as_str(), key) {
                ("scenario", "n") => cfg.n = int()? as usize,
                ("scenario", "beta") => {
                    cfg.beta = float()?;
                    have_beta = true;
                }
                ("scenario", "gamma") => cfg.gamma = float()?,
                ("scenario", "noise") => cfg.noise = value.parse().map_err(|e: Error| err(e.to_string()))?,
                ("scenario", "sigma") => cfg.sigma = float()?,
                ("scenario", "m_e") => cfg.m_e = float()?,
                ("scenario", "m_n") => cfg.m_n = float()?,
                ("scenario", "estimation_std") => cfg.estimation_std = Some(float()?),
                ("contract", "bonus") => {
                    cfg.bonus = match value {
                        "cournot" => BonusKind::Cournot,
                        "linear" => BonusKind::Linear,
                        _ => return Err(err(format!("unknown bonus `{value}`"))),
                    }
                }
                ("contract", "r0") => cfg.r0 = float()?,
                ("sim", "seed") => cfg.sim.master_seed = int()?,
                ("sim", "reps") => cfg.sim.n_reps = int()?,
                ("sim", "antithetic") => {
                    cfg.sim.antithetic = value
                        .parse()
                        .map_err(|_| err(format!("`antithetic` expects true or false, got `{value}`")))?
                }
                ("", _) => return Err(err(format!("`{key}` appears before any section"))),
                (s, _) => return Err(err(format!("unknown key `{key}` in [{s}]"))),
            }
        }
        if !have_beta {
            return Err(Error::InvalidParameter("missing required key `beta` in [scenario]".into()));
        }
        cfg.check()?;
        Ok(cfg)
    }

    /// Range checks shared by the parser and command-line overrides.
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.n == 0 {
            return bad("n must be >= 1");
        }
        if !(self.beta > 0.0) {
            return Err(Error::NonPositiveBeta(self.beta));
        }
        if !(self.gamma > 0.0) {
            return bad("gamma must be > 0");
        }
        if !(self.sigma >= 0.0) {
            return bad("sigma must be >= 0");
        }
        if self.sim.n_reps == 0 {
            return bad("reps must be >= 1");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = Config::with_beta(0.75);
        c.n = 7;
        c.gamma = 1.0 / 3.0;
        c.noise = NoiseDistribution::Uniform;
        c.m_n = -0.05;
        c.estimation_std = Some(0.2);
        c.bonus = BonusKind::Linear;
        c.sim = SimConfig { n_reps: 123, master_seed: u64::MAX, antithetic: true };
        assert_eq!(Config::parse(&c.emit()).unwrap(), c);
    }

    #[test]
    fn defaults_and_comments() {
        let c = Config::parse("# market\n[scenario]\nbeta = 1 # weight\n").unwrap();
        assert_eq!(c, Config::with_beta(1.0));
    }

    #[test]
    fn missing_beta() {
        let e = Config::parse("[scenario]\nn = 2\n").unwrap_err();
        assert!(e.to_string().contains("beta"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        for (text, line) in [
            ("[scenario]\nbeta = 1\nn = two\n", "line 3"),
            ("[scenario]\nbeta = 1\n\nfoo = 1\n", "line 4"),
            ("beta = 1\n", "line 1"),
            ("[scenario]\nbeta 1\n", "line 2"),
            ("[nope]\n", "line 1"),
        ] {
            let e = Config::parse(text).unwrap_err().to_string();
            assert!(e.contains(line), "{e}");
        }
    }
}
