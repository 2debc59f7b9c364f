use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::CollectionConfig;
use crate::environments::{load_mdp_spec, Builtin, GridNoiseConfig};
use crate::error::{Error, Result};
use crate::mdp::TabularMdp;
use crate::regularizers::Method;

pub const DEFAULT_REPLICATIONS: usize = 5000;

/// 21 evenly spaced points on `[0, 1]`.
pub fn default_eps_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

pub fn default_magnitude_grid() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0]
}

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdpSource {
    Builtin(Builtin),
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mdp: MdpSource,
    /// Noise for builtin environments; ignored for spec files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<GridNoiseConfig>,
    /// Overrides the MDP's own discount factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub methods: Vec<Method>,
    #[serde(default = "default_eps_grid")]
    pub eps_grid: Vec<f64>,
    #[serde(default = "default_magnitude_grid")]
    pub magnitude_grid: Vec<f64>,
    pub collection: CollectionConfig,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load_mdp(&self) -> Result<TabularMdp> {
        let mdp = match &self.mdp {
            MdpSource::Builtin(b) => b.build(self.noise.unwrap_or_default())?,
            MdpSource::Path(p) => load_mdp_spec(p)?.1,
        };
        match self.gamma {
            Some(g) => mdp.with_gamma(g),
            None => Ok(mdp),
        }
    }

    /// Checks everything that does not need the MDP loaded.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        let mut seen = HashSet::new();
        if let Some(m) = self.methods.iter().find(|m| !seen.insert(**m)) {
            return Err(Error::Config(format!("method `{m}` listed twice")));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if let Some(g) = self.gamma {
            if !(0.0..1.0).contains(&g) {
                return Err(Error::Config(format!("gamma {g} outside [0, 1)")));
            }
        }
        if let Some(noise) = &self.noise {
            noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        let uses = |m: Method| self.methods.contains(&m);
        if uses(Method::Discount) || uses(Method::EpsGreedy) {
            check_grid("eps_grid", &self.eps_grid, |x| (0.0..=1.0).contains(&x))?;
        }
        if uses(Method::Dirichlet) {
            check_grid("magnitude_grid", &self.magnitude_grid, |x| x >= 0.0 && x.is_finite())?;
        }
        Ok(())
    }

    /// The strengths swept for `method`.
    pub fn strengths(&self, method: Method) -> Vec<f64> {
        match method {
            Method::None => vec![0.0],
            Method::Dirichlet => self.magnitude_grid.clone(),
            Method::Discount | Method::EpsGreedy => self.eps_grid.clone(),
        }
    }

    /// Every `(method, strength)` cell, in config order.
    pub fn cells(&self) -> Vec<(Method, f64)> {
        self.methods
            .iter()
            .flat_map(|&m| self.strengths(m).into_iter().map(move |s| (m, s)))
            .collect()
    }

    /// Start distribution used to weight the loss: the collection start mode.
    pub fn loss_weights(&self, n_states: usize) -> DVector<f64> {
        DVector::from_vec(self.collection.start_mode.distribution(n_states))
    }

    /// First 16 hex digits of the SHA-256 of the config JSON, output path excluded.
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn check_grid(name: &str, grid: &[f64], ok: impl Fn(f64) -> bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{name} is empty")));
    }
    if let Some(x) = grid.iter().find(|&&x| !ok(x)) {
        return Err(Error::Config(format!("{name} value {x} out of range")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config(format!("{name} has duplicate values")));
    }
    Ok(())
}
