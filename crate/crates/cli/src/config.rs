//! The TOML run configuration: a schema version plus one optional table per subcommand.

use std::path::Path;

use fracnls::experiments::data::BaseDatum;
use fracnls::experiments::{
    BilinearAnnulusConfig, BilinearBallConfig, ConservationConfig, GridSpec, KhintchineConfig, McTailConfig,
    SmoothingConfig, StrichartzConfig, XsbTransferConfig,
};
use fracnls::{Law, Method};
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema: u32,
    pub simulate: Option<SimulateConfig>,
    pub randomize: Option<RandomizeConfig>,
    #[serde(rename = "mc-tail")]
    pub mc_tail: Option<McTailConfig>,
    pub khintchine: Option<KhintchineConfig>,
    #[serde(rename = "bilinear-annulus")]
    pub bilinear_annulus: Option<BilinearAnnulusConfig>,
    #[serde(rename = "bilinear-ball")]
    pub bilinear_ball: Option<BilinearBallConfig>,
    pub strichartz: Option<StrichartzConfig>,
    #[serde(rename = "xsb-transfer")]
    pub xsb_transfer: Option<XsbTransferConfig>,
    pub smoothing: Option<SmoothingConfig>,
    pub conservation: Option<ConservationConfig>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if file.schema != SCHEMA {
            return Err(format!(
                "{}: unsupported schema version {} (this build reads schema = {SCHEMA})",
                path.display(),
                file.schema
            ));
        }
        Ok(file)
    }
}

/// Which coefficients randomize the datum of a `simulate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomizeSpec {
    pub law: Law,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub index: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub grid: GridSpec,
    pub alpha: f64,
    /// `0` runs the free flow.
    pub mu: f64,
    pub base: BaseDatum,
    pub randomize: Option<RandomizeSpec>,
    pub t_final: f64,
    pub n_time: usize,
    pub method: Method,
    pub substeps: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            grid: GridSpec {
                dim: 3,
                n: 16,
                box_length: 4.0 * std::f64::consts::PI,
            },
            alpha: 1.25,
            mu: 1.0,
            base: BaseDatum::Gaussian {
                width: 1.0,
                amplitude: 1.0,
                momentum: vec![],
            },
            randomize: None,
            t_final: 0.1,
            n_time: 11,
            method: Method::Strang,
            substeps: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizeConfig {
    pub grid: GridSpec,
    pub base: BaseDatum,
    pub law: Law,
    pub seed: u64,
    pub count: usize,
    /// Regularity of the Sobolev norm reported per draw.
    pub s: f64,
}

impl Default for RandomizeConfig {
    fn default() -> Self {
        RandomizeConfig {
            grid: GridSpec {
                dim: 3,
                n: 16,
                box_length: 16.0 * std::f64::consts::PI,
            },
            base: BaseDatum::Gaussian {
                width: 1.5,
                amplitude: 1.0,
                momentum: vec![],
            },
            law: Law::ComplexGaussian,
            seed: 1,
            count: 16,
            s: 0.6,
        }
    }
}

/// Configs whose master seed `--seed` replaces.
pub trait Seeded {
    fn seed(&self) -> u64;
    fn set_seed(&mut self, seed: u64);
}

macro_rules! seeded {
    ($($t:ty),*) => {$(
        impl Seeded for $t {
            fn seed(&self) -> u64 {
                self.seed
            }
            fn set_seed(&mut self, seed: u64) {
                self.seed = seed;
            }
        }
    )*};
}

seeded!(
    RandomizeConfig,
    McTailConfig,
    KhintchineConfig,
    BilinearAnnulusConfig,
    BilinearBallConfig,
    StrichartzConfig,
    XsbTransferConfig,
    SmoothingConfig,
    ConservationConfig
);

impl Seeded for SimulateConfig {
    fn seed(&self) -> u64 {
        self.randomize.as_ref().map_or(0, |r| r.seed)
    }

    fn set_seed(&mut self, seed: u64) {
        if let Some(r) = &mut self.randomize {
            r.seed = seed;
        }
    }
}
