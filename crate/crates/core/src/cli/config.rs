use std::path::Path;

use serde::Deserialize;

use super::{CliError, CliResult};
use crate::topology::InterferenceGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Hash, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NoInterference,
    Interference,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::NoInterference => "no-interference",
            Regime::Interference => "interference",
        }
    }

    pub fn parse(s: &str) -> CliResult<Self> {
        match s {
            "no-interference" | "ni" => Ok(Regime::NoInterference),
            "interference" | "general" => Ok(Regime::Interference),
            other => Err(CliError::Config(format!("unknown regime '{other}'"))),
        }
    }
}

/// A list of numbers written either as an array or as `"start:step:stop"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum NumberList {
    Values(Vec<f64>),
    Range(String),
}

impl NumberList {
    fn resolve(&self) -> CliResult<Vec<f64>> {
        match self {
            NumberList::Values(v) => Ok(v.clone()),
            NumberList::Range(s) => parse_gain_list(s),
        }
    }
}

/// Parses `"a:step:b"` (inclusive) or a comma-separated list.
pub fn parse_gain_list(s: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("cannot parse number list '{s}'"));
    if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<CliResult<_>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(bad());
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| round12(start + i as f64 * step)).collect())
    } else {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(alias = "K")]
    relays: Option<usize>,
    #[serde(alias = "N")]
    subblocks: Option<usize>,
    tprime: Option<usize>,
    regime: Option<Regime>,
    interference_edges: Option<Vec<[usize; 2]>>,
    snr_db: Option<NumberList>,
    r: Option<NumberList>,
    trials: Option<u64>,
    min_outages: Option<u64>,
    seed: Option<u64>,
}

/// Resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub relays: usize,
    pub subblocks: usize,
    pub tprime: usize,
    pub regime: Regime,
    /// `None` in the interference regime means every pair interferes.
    pub interference_edges: Option<Vec<(usize, usize)>>,
    pub snr_db: Vec<f64>,
    pub r: Vec<f64>,
    pub trials: u64,
    pub min_outages: Option<u64>,
    pub seed: u64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            relays: 2,
            subblocks: 2,
            tprime: 8,
            regime: Regime::NoInterference,
            interference_edges: None,
            snr_db: vec![20.0, 25.0, 30.0, 35.0, 40.0, 45.0],
            r: vec![0.0, 0.25, 0.5, 0.75],
            trials: 100_000,
            min_outages: None,
            seed: 1,
        }
    }
}

impl SchemeConfig {
    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let mut cfg = Self::default();
        if let Some(v) = file.relays {
            cfg.relays = v;
        }
        if let Some(v) = file.subblocks {
            cfg.subblocks = v;
        }
        if let Some(v) = file.tprime {
            cfg.tprime = v;
        }
        if let Some(v) = file.regime {
            cfg.regime = v;
        }
        if let Some(edges) = file.interference_edges {
            cfg.interference_edges = Some(edges.into_iter().map(|[a, b]| (a, b)).collect());
        }
        if let Some(v) = file.snr_db {
            cfg.snr_db = v.resolve()?;
        }
        if let Some(v) = file.r {
            cfg.r = v.resolve()?;
        }
        if let Some(v) = file.trials {
            cfg.trials = v;
        }
        if file.min_outages.is_some() {
            cfg.min_outages = file.min_outages;
        }
        if let Some(v) = file.seed {
            cfg.seed = v;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.relays == 0 {
            return fail("relays must be at least 1".into());
        }
        if self.subblocks < 2 {
            return fail(format!("subblocks must be at least 2 (got {})", self.subblocks));
        }
        if self.tprime == 0 {
            return fail("tprime must be positive".into());
        }
        if self.trials == 0 {
            return fail("trials must be positive".into());
        }
        if self.regime == Regime::Interference && self.relays < 2 {
            return fail("the interference regime needs at least 2 relays".into());
        }
        if let Some(r) = self.r.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return fail(format!("multiplexing gain {r} outside [0, 1]"));
        }
        if self.r.is_empty() {
            return fail("r list is empty".into());
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|v| !v.is_finite()) {
            return fail("snr_db list must be non-empty and finite".into());
        }
        if self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return fail("snr_db must be strictly increasing".into());
        }
        self.graph()?;
        Ok(())
    }

    /// Interference graph for channel sampling; empty in the no-interference regime.
    pub fn graph(&self) -> CliResult<InterferenceGraph> {
        match (self.regime, &self.interference_edges) {
            (Regime::NoInterference, _) => Ok(InterferenceGraph::empty(self.relays)),
            (Regime::Interference, None) => Ok(InterferenceGraph::complete(self.relays)),
            (Regime::Interference, Some(edges)) => {
                InterferenceGraph::from_edges(self.relays, edges).map_err(|e| CliError::Config(e.to_string()))
            }
        }
    }

    /// Interference graph as written in the file, regardless of regime
    /// (used by the `hamiltonian` subcommand).
    pub fn declared_graph(&self) -> CliResult<InterferenceGraph> {
        let edges = self.interference_edges.clone().unwrap_or_default();
        InterferenceGraph::from_edges(self.relays, &edges).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Linear power from dB.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
