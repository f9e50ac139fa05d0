//! JSON configuration for experiments. Every section is optional and unknown
//! keys are rejected.

use serde::{Deserialize, Serialize};

use crate::decomp::{Bump, QuadratureSpec};
use crate::error::{invalid, Result};
use crate::grid::Grid;
use crate::symbols::TestSymbolSpec;

/// Version of the configuration and report schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Smoothing cutoff used by the double-smoothing pipeline: small enough for
/// the support window `c|η|^{1/2} ≤ |ξ| ≤ (1+|η|)^β/16`.
pub const PIPELINE_BUMP: Bump = Bump {
    plateau: 1.0 / 128.0,
    support: 1.0 / 64.0,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub grid: GridConfig,
    /// Cutoff `φ` of the smoothing split and of flat-of-b symbols.
    #[serde(default)]
    pub bump: Bump,
    #[serde(default = "pipeline_bump")]
    pub pipeline_bump: Bump,
    /// Sphere quadrature; defaults depend on the dimension.
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub sandwich: SandwichConfig,
    #[serde(default)]
    pub three_lines: ThreeLinesConfig,
    #[serde(default)]
    pub bound_sweep: BoundSweepConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub embedding: EmbeddingConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn pipeline_bump() -> Bump {
    PIPELINE_BUMP
}

impl Default for Config {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.schema_version {
            if v != SCHEMA_VERSION {
                return Err(invalid(format!(
                    "schema_version {v} is not supported (expected {SCHEMA_VERSION})"
                )));
            }
        }
        self.grid.build()?;
        Bump::new(self.bump.plateau, self.bump.support)?;
        Bump::new(self.pipeline_bump.plateau, self.pipeline_bump.support)?;
        if let Some(q) = &self.quadrature {
            q.build(self.grid.n)?;
        }
        self.ensemble.validate()?;
        if self.three_lines.restarts == 0 {
            return Err(invalid("three_lines.restarts must be positive"));
        }
        Ok(())
    }

    pub fn quadrature_for(&self, dim: usize) -> QuadratureSpec {
        self.quadrature.unwrap_or_else(|| QuadratureSpec::default_for(dim))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 2, size: 64 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.n, self.size)
    }
}

/// Band-limited random fields `f = Σ_{|k|_∞ ≤ k_max} c_k ⟨k⟩^{−decay} e^{ik·x}`
/// with standard complex Gaussian `c_k`, drawn in a fixed order so the same
/// seed yields the same function on every grid that resolves it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_kmax")]
    pub k_max: usize,
    #[serde(default = "default_decay")]
    pub decay: f64,
    /// Keep only the real part.
    #[serde(default = "yes")]
    pub real: bool,
}

fn default_count() -> usize {
    16
}
fn default_kmax() -> usize {
    12
}
fn default_decay() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            count: default_count(),
            k_max: default_kmax(),
            decay: default_decay(),
            real: true,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(invalid("ensemble.count must be positive"));
        }
        if !self.decay.is_finite() {
            return Err(invalid("ensemble.decay must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichConfig {
    /// Grid size; shells `1..=log2(N/2)` are available.
    #[serde(default = "sandwich_size", rename = "N")]
    pub size: usize,
    #[serde(default = "default_rhos")]
    pub rhos: Vec<f64>,
    #[serde(default = "default_shells")]
    pub shells: Vec<usize>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Regression value of the measured upper constant.
    #[serde(default)]
    pub pinned_upper: Option<f64>,
    #[serde(default = "ten_percent")]
    pub upper_tolerance: f64,
}

fn sandwich_size() -> usize {
    128
}
fn default_rhos() -> Vec<f64> {
    vec![-1.0, 0.0, 0.5, 1.0]
}
fn default_shells() -> Vec<usize> {
    (1..=6).collect()
}
fn default_samples() -> usize {
    32
}
fn ten_percent() -> f64 {
    0.1
}

impl Default for SandwichConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeLinesConfig {
    #[serde(default = "three_lines_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "three_halves")]
    pub p: f64,
    #[serde(default = "one")]
    pub r: f64,
    /// Strip parameter; the default is the bisection-based choice.
    #[serde(default)]
    pub delta_prime: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
    /// Target regularity `t` of the `p₀` line; `s = (1−θ)t`.
    #[serde(default)]
    pub t: f64,
    #[serde(default = "default_t_samples")]
    pub t_samples: Vec<f64>,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "ten_percent")]
    pub tolerance: f64,
    #[serde(default = "default_sphere_nodes")]
    pub sphere_nodes: usize,
    #[serde(default = "flat_of_b")]
    pub symbol: TestSymbolSpec,
}

fn three_lines_sizes() -> Vec<usize> {
    vec![8, 16]
}
fn three_halves() -> f64 {
    1.5
}
fn one() -> f64 {
    1.0
}
fn default_t_samples() -> Vec<f64> {
    vec![0.0, 1.0, -1.0, 2.0, -2.0, 5.0, -5.0, 10.0, -10.0, 20.0, -20.0]
}
fn default_restarts() -> usize {
    64
}
fn default_sphere_nodes() -> usize {
    64
}
fn flat_of_b() -> TestSymbolSpec {
    TestSymbolSpec::new("flat-of-b")
}

impl Default for ThreeLinesConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSweepConfig {
    #[serde(default = "refinement_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "sweep_ps")]
    pub ps: Vec<f64>,
    #[serde(default = "one")]
    pub r: f64,
    /// `δ` of the symbol class `C^r_*S^m_{1,δ}` used for the Sobolev interval.
    #[serde(default = "half")]
    pub delta: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    /// Sobolev index; the default is the midpoint of the admissible interval.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub m_order: f64,
    #[serde(default = "growth_limit")]
    pub growth_limit: f64,
    #[serde(default = "flat_of_b")]
    pub symbol: TestSymbolSpec,
}

fn refinement_sizes() -> Vec<usize> {
    vec![64, 128]
}
fn sweep_ps() -> Vec<f64> {
    vec![4.0 / 3.0, 1.5, 2.0, 3.0]
}
fn half() -> f64 {
    0.5
}
fn growth_limit() -> f64 {
    1.2
}

impl Default for BoundSweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "three_halves")]
    pub p: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "multiplication")]
    pub symbol: TestSymbolSpec,
}

fn multiplication() -> TestSymbolSpec {
    TestSymbolSpec::new("multiplication")
}

impl Default for PipelineConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    #[serde(default = "refinement_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "embedding_ps")]
    pub ps: Vec<f64>,
    #[serde(default = "embedding_count")]
    pub count: usize,
    #[serde(default = "stability")]
    pub stability: f64,
}

fn embedding_ps() -> Vec<f64> {
    vec![4.0 / 3.0, 1.5, 2.0, 3.0, 4.0]
}
fn embedding_count() -> usize {
    64
}
fn stability() -> f64 {
    0.2
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub csv: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_rejections() {
        let cfg = Config::default();
        assert_eq!(cfg.grid, GridConfig { n: 2, size: 64 });
        assert_eq!(cfg.three_lines.t_samples.len(), 11);
        assert_eq!(cfg.pipeline_bump, PIPELINE_BUMP);
        assert!(Config::from_json(r#"{"grid": {"n": 2, "N": 32}, "seed": 3}"#).is_ok());
        assert!(Config::from_json(r#"{"grdi": {}}"#).is_err());
        assert!(Config::from_json(r#"{"grid": {"n": 2, "N": 30}}"#).is_err());
        assert!(Config::from_json(r#"{"bump": {"plateau": 1.0, "support": 0.5}}"#).is_err());
        assert!(Config::from_json(r#"{"schema_version": 2}"#).is_err());
        assert!(Config::from_json(r#"{"sandwich": {"rhos": [0.0], "bogus": 1}}"#).is_err());
    }
}
