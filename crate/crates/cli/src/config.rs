//! Experiment configuration. A config plus seed fixes every output byte.

use std::path::{Path, PathBuf};

use cat0_morse::{CoxeterFlat, FaceType, MetricTree, ReflectionGroup, ThetaCone, TreeProduct, TreeSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// The only generator accepted: ChaCha20 keyed by the seed, one stream per
/// trial.
pub const RNG_NAME: &str = "chacha20";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceConfig {
    Flat { group: String },
    /// Tree JSON files, relative to the config file.
    TreeFiles { files: Vec<PathBuf> },
    Trees { trees: Vec<TreeSpec> },
    RandomTrees {
        factors: usize,
        vertices: usize,
        #[serde(default = "default_min_len")]
        min_len: f64,
        #[serde(default = "default_max_len")]
        max_len: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_min_len")]
    pub length_min: f64,
    #[serde(default = "default_max_len")]
    pub length_max: f64,
    /// Zigzag sizes for the growing-step family.
    #[serde(default = "default_ns")]
    pub ns: Vec<usize>,
    #[serde(default = "default_refine")]
    pub refine: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            steps: default_steps(),
            beta: default_beta(),
            length_min: default_min_len(),
            length_max: default_max_len(),
            ns: default_ns(),
            refine: default_refine(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondConfig {
    pub xm: Vec<f64>,
    pub xp: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceConfig,
    /// Walls of the face type; empty for the chamber.
    #[serde(default)]
    pub face: Vec<usize>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    pub margin_prime: Option<f64>,
    /// Coarse regularity constant; defaults to the generator noise.
    pub b: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rng")]
    pub rng: String,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub generator: GeneratorConfig,
    pub diamond: Option<DiamondConfig>,
    pub points: Option<[Vec<f64>; 2]>,
    #[serde(default = "default_sample_points")]
    pub sample_points: usize,
    /// Not echoed into reports, so outputs do not depend on where they go.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

fn default_min_len() -> f64 {
    0.5
}
fn default_max_len() -> f64 {
    1.5
}
fn default_steps() -> usize {
    100
}
fn default_beta() -> f64 {
    0.5
}
fn default_ns() -> Vec<usize> {
    vec![10, 20, 40, 80]
}
fn default_refine() -> usize {
    1
}
fn default_margin() -> f64 {
    0.2
}
fn default_rng() -> String {
    RNG_NAME.into()
}
fn default_trials() -> usize {
    100
}
fn default_grid() -> usize {
    64
}
fn default_sample_points() -> usize {
    60
}

pub enum Space {
    Flat(CoxeterFlat),
    Trees(TreeProduct),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let SpaceConfig::TreeFiles { files } = &mut cfg.space {
            let base = path.parent().unwrap_or(Path::new("."));
            for f in files.iter_mut() {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let bad = |m: &str| Err(CliError::Config(m.into()));
        if self.rng != RNG_NAME {
            return bad(&format!("unknown rng {:?}, expected {RNG_NAME:?}", self.rng));
        }
        if !(self.margin > 0.0) {
            return bad("margin must be positive");
        }
        if self.margin_prime.is_some_and(|m| !(m > 0.0 && m <= self.margin)) {
            return bad("margin_prime must lie in (0, margin]");
        }
        if self.b.is_some_and(|b| !(b >= 0.0)) || !(self.generator.beta >= 0.0) {
            return bad("b and beta must be nonnegative");
        }
        if !(self.generator.length_min > 0.0 && self.generator.length_min <= self.generator.length_max) {
            return bad("need 0 < length_min <= length_max");
        }
        if self.trials == 0 || self.grid < 2 || self.generator.steps < 2 {
            return bad("trials must be positive, grid and steps at least 2");
        }
        Ok(())
    }

    pub fn face(&self) -> FaceType {
        if self.face.is_empty() {
            FaceType::CHAMBER
        } else {
            FaceType::from_walls(&self.face)
        }
    }

    pub fn b(&self) -> f64 {
        self.b.unwrap_or(self.generator.beta)
    }

    pub fn build_space(&self) -> CliResult<Space> {
        Ok(match &self.space {
            SpaceConfig::Flat { group } => Space::Flat(CoxeterFlat::from_name(group)?),
            SpaceConfig::TreeFiles { files } => {
                let trees = files
                    .iter()
                    .map(|f| {
                        let s = std::fs::read_to_string(f).map_err(|e| CliError::Config(format!("{}: {e}", f.display())))?;
                        Ok(MetricTree::from_json(&s)?)
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                Space::Trees(TreeProduct::new(trees)?)
            }
            SpaceConfig::Trees { trees } => Space::Trees(TreeProduct::new(
                trees.iter().cloned().map(MetricTree::new).collect::<cat0_morse::Result<Vec<_>>>()?,
            )?),
            SpaceConfig::RandomTrees { factors, vertices, min_len, max_len } => {
                if *factors == 0 || *vertices < 3 || !(*min_len > 0.0 && min_len <= max_len) {
                    return Err(CliError::Config("random_trees needs factors >= 1, vertices >= 3, 0 < min_len <= max_len".into()));
                }
                let mut r = stream(self.seed, u64::MAX);
                Space::Trees(TreeProduct::new(
                    (0..*factors).map(|_| MetricTree::random(&mut r, *vertices, *min_len, *max_len)).collect(),
                )?)
            }
        })
    }

    pub fn theta(&self, group: &ReflectionGroup) -> CliResult<ThetaCone> {
        Ok(ThetaCone::new(group, self.face(), self.margin)?)
    }

    pub fn theta_prime(&self, group: &ReflectionGroup) -> CliResult<ThetaCone> {
        Ok(ThetaCone::new(group, self.face(), self.margin_prime.unwrap_or(self.margin / 2.0))?)
    }
}

/// Counter-based stream `index` of the seeded generator.
pub fn stream(seed: u64, index: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn defaults_fill_in() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"space": {"kind": "flat", "group": "A2"}}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.face(), FaceType::CHAMBER);
        assert_eq!(cfg.grid, 64);
        assert_eq!(cfg.b(), cfg.generator.beta);
    }

    #[test]
    fn unknown_fields_and_rngs_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"space": {"kind": "flat", "group": "A2"}, "sed": 1}"#).is_err());
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"space": {"kind": "flat", "group": "A2"}, "rng": "mt19937"}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn streams_are_independent_of_draw_order() {
        let a: u64 = stream(5, 3).random();
        let mut other = stream(5, 2);
        let _: u64 = other.random();
        let b: u64 = stream(5, 3).random();
        assert_eq!(a, b);
        assert_ne!(a, stream(5, 4).random::<u64>());
    }
}
