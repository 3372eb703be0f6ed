//! Run configuration: a single JSON document, unknown keys rejected.

use std::path::Path;

use bienergy_core::finsler::sample_points;
use bienergy_core::identity::PerturbationSetup;
use bienergy_core::quadrature::QuadratureSpec;
use bienergy_core::{
    Chart, FinslerStructure, PointState, PullbackSection, RiemannStructure, SmoothMap, VariationFamily,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Fiber points probed for positive definiteness before any command runs.
const VALIDATION_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Domain dimension `n`.
    pub dimension: usize,
    pub domain: DomainConfig,
    #[serde(default)]
    pub codomain: CodomainConfig,
    /// Components `φ^α` over `x1..xn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<String>>,
    /// Components `f^α` over `x1..xn, eps1, eps2` with `f(0, 0, ·) = φ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variation: Option<VariationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<SectionsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<FieldsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity: Option<IdentityConfig>,
    #[serde(default)]
    pub samples: SampleConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub chart: ChartConfig,
    pub finsler: FinslerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChartConfig {
    Torus {
        periods: Vec<f64>,
    },
    Box {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lower: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        upper: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FinslerConfig {
    Euclidean,
    Riemannian { metric: Vec<Vec<String>> },
    Randers { alpha: Vec<Vec<String>>, beta: Vec<String> },
    Custom { f: String },
    Perturbed { base: Vec<Vec<String>>, b: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodomainConfig {
    Euclidean {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Sphere {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        radius: f64,
    },
    Custom { metric: Vec<Vec<String>> },
}

impl Default for CodomainConfig {
    fn default() -> Self {
        CodomainConfig::Euclidean { dim: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationConfig {
    pub components: Vec<String>,
    /// Random directions for the stability test of the second variation.
    #[serde(default)]
    pub stability_directions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionsConfig {
    /// `X^α` over `x1..xn, y1..yn`.
    pub x: Vec<String>,
    pub y: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    /// Horizontal field `X^i` over `x1..xn, y1..yn` for the divergence check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<String>>,
    /// Scalar `f` over `x1..xn, y1..yn` for the Laplacian check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scalar: Option<String>,
    /// Also integrate `Δ‖τ(φ)‖²` for the configured map.
    #[serde(default)]
    pub tension_norm: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityConfig {
    /// `g̃_ij(x)`; Euclidean when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<Vec<String>>>,
    /// `b(x, y)`, 2-homogeneous in `y`.
    pub b: String,
    /// Covector `a_i(x)` for the parallel-type condition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covector: Option<Vec<String>>,
    /// Scales `c` for the linearized slope fit; no fit when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    /// Perturbation expected to leave the linearized `τ₂` band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
    /// Fraction of each box side kept clear of the boundary.
    pub margin: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            count: 20,
            seed: 0,
            margin: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceConfig {
    /// Relative bound for pointwise identities.
    pub pointwise: f64,
    /// Relative bound for finite-difference comparisons of integrals.
    pub relative: f64,
    /// `‖τ‖` below which a point counts as harmonic.
    pub harmonic: f64,
    /// `‖τ₂‖` below which a point counts as biharmonic.
    pub biharmonic: f64,
    /// Weitzenböck residual bound, relative to the size of its terms.
    pub weitzenbock: f64,
    /// Finite-difference step in `ε`.
    pub fd_step: f64,
    pub slope_tau: [f64; 2],
    pub slope_tau2: [f64; 2],
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            pointwise: 1e-8,
            relative: 1e-3,
            harmonic: 1e-8,
            biharmonic: 1e-6,
            weitzenbock: 1e-6,
            fd_step: 1e-3,
            slope_tau: [0.9, 1.1],
            slope_tau2: [1.8, 2.2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Schema(e.to_string()))?;
        cfg.check_shapes()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    /// Apply a seed override to every seeded block.
    pub fn with_seed(mut self, seed: u64) -> RunConfig {
        self.quadrature.seed = seed;
        self.samples.seed = seed;
        self
    }

    /// sha256 of the canonical (key-sorted, compact) JSON form.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    pub fn codomain_dim(&self) -> usize {
        match &self.codomain {
            CodomainConfig::Euclidean { dim } | CodomainConfig::Sphere { dim, .. } => {
                dim.unwrap_or(self.dimension)
            }
            CodomainConfig::Custom { metric } => metric.len(),
        }
    }

    fn check_shapes(&self) -> Result<(), CliError> {
        let n = self.dimension;
        let d = self.codomain_dim();
        let bad = |what: &str, got: usize, want: usize| {
            CliError::Config(format!("{what} has {got} entries, expected {want}"))
        };
        if n == 0 {
            return Err(CliError::Config("dimension must be at least 1".into()));
        }
        match &self.domain.chart {
            ChartConfig::Torus { periods } if periods.len() != n => {
                return Err(bad("domain.chart.periods", periods.len(), n))
            }
            ChartConfig::Box { lower, upper } => {
                for (name, v) in [("lower", lower), ("upper", upper)] {
                    if let Some(v) = v {
                        if v.len() != n {
                            return Err(bad(&format!("domain.chart.{name}"), v.len(), n));
                        }
                    }
                }
            }
            _ => {}
        }
        let square = |what: &str, m: &Vec<Vec<String>>, k: usize| -> Result<(), CliError> {
            if m.len() != k || m.iter().any(|r| r.len() != k) {
                return Err(CliError::Config(format!("{what} must be a {k}x{k} matrix")));
            }
            Ok(())
        };
        match &self.domain.finsler {
            FinslerConfig::Riemannian { metric } => square("domain.finsler.metric", metric, n)?,
            FinslerConfig::Randers { alpha, beta } => {
                square("domain.finsler.alpha", alpha, n)?;
                if beta.len() != n {
                    return Err(bad("domain.finsler.beta", beta.len(), n));
                }
            }
            FinslerConfig::Perturbed { base, .. } => square("domain.finsler.base", base, n)?,
            _ => {}
        }
        if let CodomainConfig::Custom { metric } = &self.codomain {
            square("codomain.metric", metric, d)?;
        }
        if let Some(m) = &self.map {
            if m.len() != d {
                return Err(bad("map", m.len(), d));
            }
        }
        if let Some(v) = &self.variation {
            if v.components.len() != d {
                return Err(bad("variation.components", v.components.len(), d));
            }
        }
        if let Some(s) = &self.sections {
            if s.x.len() != d || s.y.len() != d {
                return Err(bad("sections", s.x.len().min(s.y.len()), d));
            }
        }
        if let Some(v) = self.fields.as_ref().and_then(|f| f.vector.as_ref()) {
            if v.len() != n {
                return Err(bad("fields.vector", v.len(), n));
            }
        }
        if let Some(id) = &self.identity {
            if let Some(b) = &id.base {
                square("identity.base", b, n)?;
            }
            if let Some(a) = &id.covector {
                if a.len() != n {
                    return Err(bad("identity.covector", a.len(), n));
                }
            }
        }
        Ok(())
    }

    pub fn chart(&self) -> Chart {
        let n = self.dimension;
        match &self.domain.chart {
            ChartConfig::Torus { periods } => Chart::torus(periods),
            ChartConfig::Box { lower, upper } => Chart::Box {
                lower: lower.clone().unwrap_or_else(|| vec![0.0; n]),
                upper: upper.clone().unwrap_or_else(|| vec![1.0; n]),
            },
        }
    }

    pub fn finsler(&self) -> Result<FinslerStructure, CliError> {
        let chart = self.chart();
        let fs = match &self.domain.finsler {
            FinslerConfig::Euclidean => FinslerStructure::euclidean(chart),
            FinslerConfig::Riemannian { metric } => FinslerStructure::riemannian(chart, metric),
            FinslerConfig::Randers { alpha, beta } => FinslerStructure::randers(chart, alpha, beta),
            FinslerConfig::Custom { f } => FinslerStructure::custom(chart, f),
            FinslerConfig::Perturbed { base, b } => FinslerStructure::perturbed(chart, base, b),
        }
        .map_err(|e| CliError::in_block("domain", e))?;
        let fs = match self.domain.r_min {
            Some(r) => fs.with_r_min(r),
            None => fs,
        };
        fs.validate(VALIDATION_SAMPLES, self.samples.seed)
            .map_err(|e| CliError::in_block("domain", e))?;
        Ok(fs)
    }

    pub fn codomain(&self) -> Result<RiemannStructure, CliError> {
        let d = self.codomain_dim();
        match &self.codomain {
            CodomainConfig::Euclidean { .. } => Ok(RiemannStructure::euclidean(d)),
            CodomainConfig::Sphere { radius, .. } => RiemannStructure::sphere(d, *radius),
            CodomainConfig::Custom { metric } => RiemannStructure::custom(metric),
        }
        .map_err(|e| CliError::in_block("codomain", e))
    }

    /// The configured map, or the identity when `map` is omitted and the dimensions agree.
    pub fn map(&self) -> Result<SmoothMap, CliError> {
        match &self.map {
            Some(m) => SmoothMap::new(self.dimension, m).map_err(|e| CliError::in_block("map", e)),
            None if self.codomain_dim() == self.dimension => Ok(SmoothMap::identity(self.dimension)),
            None => Err(CliError::Config("this command needs a `map` block".into())),
        }
    }

    pub fn family(&self) -> Result<VariationFamily, CliError> {
        let v = self
            .variation
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a `variation` block".into()))?;
        VariationFamily::new(self.dimension, &v.components).map_err(|e| CliError::in_block("variation", e))
    }

    pub fn sections(&self) -> Result<(PullbackSection, PullbackSection), CliError> {
        let s = self
            .sections
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a `sections` block".into()))?;
        let build = |c: &[String]| PullbackSection::new(self.dimension, c).map_err(|e| CliError::in_block("sections", e));
        Ok((build(&s.x)?, build(&s.y)?))
    }

    pub fn perturbation(&self) -> Result<PerturbationSetup, CliError> {
        let id = self
            .identity
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs an `identity` block".into()))?;
        let setup = self.perturbation_with(&id.b)?;
        match &id.covector {
            Some(a) => setup.with_covector(a).map_err(|e| CliError::in_block("identity", e)),
            None => Ok(setup),
        }
    }

    pub fn perturbation_with(&self, b: &str) -> Result<PerturbationSetup, CliError> {
        let id = self
            .identity
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs an `identity` block".into()))?;
        match &id.base {
            Some(base) => PerturbationSetup::new(self.chart(), base, b),
            None => PerturbationSetup::euclidean(self.chart(), b),
        }
        .map_err(|e| CliError::in_block("identity", e))
    }

    /// Seeded pointwise sample set, or the explicit point when given.
    pub fn points(&self, point: Option<&PointState>) -> Vec<PointState> {
        match point {
            Some(p) => vec![p.clone()],
            None => sample_points(&self.chart(), self.samples.count, self.samples.seed, self.samples.margin),
        }
    }
}
