//! Root configuration: one JSON document with sections for the vehicle
//! model, each controller, the scenario, and the analysis studies. Every
//! output is accompanied by an echo of the effective config so a run can be
//! reproduced exactly.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use ampc_core::ampc::AmpcConfig;
use ampc_core::analysis::{MarginSweep, MonteCarloSpec, TdmConfig};
use ampc_core::l1::L1Config;
use ampc_core::refmpc::RefMpcConfig;
use ampc_core::simkit::Scenario;
use ampc_core::vehicle::{LtvPlant, ReferenceProfile, VehicleModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub montecarlo: MonteCarloSpec,
    pub tdm: TdmConfig,
    pub margins: MarginSweep,
    /// Mach labels defining the operating points for margins/TDM tables.
    pub mach_points: Vec<f64>,
    /// Repetitions for the timing benchmark.
    pub bench_reps: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            montecarlo: MonteCarloSpec::default(),
            tdm: TdmConfig::default(),
            margins: MarginSweep::default(),
            mach_points: vec![5.0, 4.0, 3.0, 2.0, 1.0],
            bench_reps: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RootConfig {
    /// Path to a vehicle model JSON; the bundled synthetic model when null.
    pub plant_file: Option<PathBuf>,
    pub ampc: AmpcConfig,
    pub l1: L1Config,
    pub refmpc: RefMpcConfig,
    pub scenario: Scenario,
    pub analysis: AnalysisConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            plant_file: None,
            ampc: AmpcConfig::default(),
            l1: L1Config::default(),
            refmpc: RefMpcConfig::default(),
            scenario: Scenario::default(),
            analysis: AnalysisConfig::default(),
            out_dir: PathBuf::from("out"),
            seed: 12345,
        }
    }
}

impl RootConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let cfg: RootConfig = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))?;
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    /// Load the plant model referenced by the config (or the bundled one).
    pub fn load_model(&self) -> Result<(LtvPlant, ReferenceProfile)> {
        match &self.plant_file {
            None => Ok(ampc_core::vehicle::default_model()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("cannot read plant file {}", p.display()))?;
                VehicleModel::from_json(&text)
                    .with_context(|| format!("cannot parse plant file {}", p.display()))
            }
        }
    }

    pub fn sim_configs(&self) -> ampc_core::simkit::SimConfigs {
        ampc_core::simkit::SimConfigs {
            ampc: self.ampc,
            l1: self.l1,
            refmpc: self.refmpc,
        }
    }

    /// SHA-256 of the serialized effective config, recorded in campaign
    /// manifests.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = serde_json::to_string(self).expect("config serializes");
        let mut h = Sha256::new();
        h.update(text.as_bytes());
        hex_string(&h.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
