//! TOML run configuration.

use std::path::PathBuf;

use bose_core::fock::{BNormalization, GeneratorKind};
use bose_core::formulas::ELambdaScheme;
use bose_core::potential::PotentialSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Which scattering-length surrogate enters the closed-form formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Substitution {
    /// The scattering length a of the zero-energy problem.
    #[default]
    ScatteringLength,
    /// The first two Born terms a⁽⁰⁾ + a⁽¹⁾.
    Born,
    /// The unsubstituted quadratic Bogoliubov formulas in V̂(p).
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispersionVariant {
    Free,
    #[default]
    GrossPitaevskii,
    MeanField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Inclusive,
    Exclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugationChoice {
    #[default]
    ExactExpm,
    TruncatedBch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatteringConfig {
    /// Outer radius of the integration; 4R when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    pub tolerance: f64,
}

impl Default for ScatteringConfig {
    fn default() -> Self {
        ScatteringConfig { r_max: None, tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    /// Depth |n|² of the Born sum.
    pub born_n_max: u64,
    /// Depth |n|² of the correction sum and the quadratic energy.
    pub correction_n_max: u64,
    /// Tolerance the Born tail bound is compared with.
    pub tail_tolerance: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig { born_n_max: 40_000, correction_n_max: 40_000, tail_tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub m_max: usize,
    pub scheme: ELambdaScheme,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig { m_max: 200, scheme: ELambdaScheme::Richardson }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub zeta: f64,
    pub dispersion: DispersionVariant,
    pub boundary: Boundary,
    /// Shell depth; the smallest depth covering ζ when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            zeta: 200.0,
            dispersion: DispersionVariant::default(),
            boundary: Boundary::default(),
            n_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    /// Shell norms |n|² of the nonzero modes.
    pub shells: Vec<u64>,
    /// Particle number of the Fock simulation; defaults to 3.
    pub n: u32,
    pub generators: Vec<GeneratorKind>,
    /// P_H threshold |n|² >= high_min_norm for the generators that use it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub high_min_norm: Option<u64>,
    /// P_L threshold |n|² <= low_max_norm.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub low_max_norm: Option<u64>,
    pub b_normalization: BNormalization,
    pub conjugation: ConjugationChoice,
    pub bch_order: usize,
    pub eigenvalues: usize,
    /// Localization scale M; N/2 when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub localization_m: Option<f64>,
    /// Random states used for the depletion identity.
    pub random_states: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            shells: vec![1],
            n: 3,
            generators: vec![GeneratorKind::BEta, GeneratorKind::BTau],
            high_min_norm: None,
            low_max_norm: None,
            b_normalization: BNormalization::default(),
            conjugation: ConjugationChoice::default(),
            bch_order: 4,
            eigenvalues: 8,
            localization_m: None,
            random_states: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: OutputFormat,
    /// Report destination; standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Directory for two-column plot data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plot_dir: Option<PathBuf>,
    /// Directory for operator triplet exports of `simulate`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Particle number N.
    pub n: u64,
    #[serde(default)]
    pub substitution: Substitution,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub scattering: ScatteringConfig,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be finite and > 0, got {x}")))
    }
}

impl RunConfig {
    /// A minimal configuration: the given potential and N, defaults elsewhere.
    pub fn new(potential: PotentialSpec, n: u64) -> Self {
        RunConfig {
            n,
            substitution: Substitution::default(),
            potential,
            scattering: ScatteringConfig::default(),
            lattice: LatticeConfig::default(),
            constants: ConstantsConfig::default(),
            spectrum: SpectrumConfig::default(),
            simulate: SimulateConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.potential.validate().map_err(|e| CliError::Validation(format!("potential: {e}")))?;
        if self.n < 1 {
            return Err(CliError::Validation("n must be >= 1".into()));
        }
        if let Some(r) = self.scattering.r_max {
            positive("scattering.r_max", r)?;
        }
        positive("scattering.tolerance", self.scattering.tolerance)?;
        positive("lattice.tail_tolerance", self.lattice.tail_tolerance)?;
        if self.lattice.born_n_max < 1 || self.lattice.correction_n_max < 1 {
            return Err(CliError::Validation("lattice cutoffs must be >= 1".into()));
        }
        if self.constants.m_max < 20 {
            return Err(CliError::Validation(format!("constants.m_max must be >= 20, got {}", self.constants.m_max)));
        }
        positive("spectrum.zeta", self.spectrum.zeta)?;
        if self.spectrum.n_max == Some(0) {
            return Err(CliError::Validation("spectrum.n_max must be >= 1".into()));
        }
        let s = &self.simulate;
        if s.n < 1 {
            return Err(CliError::Validation("simulate.n must be >= 1".into()));
        }
        if s.shells.contains(&0) {
            return Err(CliError::Validation("simulate.shells lists positive norms |n|^2".into()));
        }
        if let Some(m) = s.localization_m {
            positive("simulate.localization_m", m)?;
        }
        if s.generators.contains(&GeneratorKind::CubicA) && (s.high_min_norm.is_none() || s.low_max_norm.is_none()) {
            return Err(CliError::Validation("cubic_a needs simulate.high_min_norm and simulate.low_max_norm".into()));
        }
        Ok(())
    }

    /// Effective configuration as TOML, all defaults written out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

/// Parses and validates a configuration; errors carry the line number.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}
