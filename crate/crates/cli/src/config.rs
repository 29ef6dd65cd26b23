//! Experiment configuration: one JSON document drives one command.

use geoperc_core::model::ModelSpec;
use serde::{Deserialize, Serialize};

/// Which command a config is meant for; running it under a different
/// subcommand is a config error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Estimate,
    ScanLambda,
    LambdaC,
    Compare,
    VoronoiScan,
    CheckContraction,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::Estimate => "estimate",
            CommandName::ScanLambda => "scan-lambda",
            CommandName::LambdaC => "lambda-c",
            CommandName::Compare => "compare",
            CommandName::VoronoiScan => "voronoi-scan",
            CommandName::CheckContraction => "check-contraction",
        }
    }
}

/// What to estimate, with the grids it sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuantitySpec {
    /// P(origin covered).
    PointCoverage,
    /// P(segment of each length fully covered).
    SegmentCoverage { lengths: Vec<f64> },
    /// P(occupied left-right crossing of the hard box 3n x n).
    BoxCrossing { scales: Vec<f64> },
    /// P(occupied left-right crossing of the easy box n x 3n); with the
    /// hard box this is the phase-certificate pair.
    EasyCrossing { scales: Vec<f64> },
    /// P(vacant bottom-top crossing of the hard box 3n x n), the dual
    /// event.
    VacantCrossing { scales: Vec<f64> },
    /// Mean covered fraction of the square [0,n]^2.
    AreaFraction {
        scales: Vec<f64>,
        #[serde(default = "default_probes")]
        probes: u64,
    },
    /// P(a disc from outside the enlarged box reaches back into the box).
    InfluenceProxy { scales: Vec<f64> },
    /// Largest |covariance| of field level-set indicators between the two
    /// test boxes.
    FieldMixing {
        scales: Vec<f64>,
        #[serde(default)]
        levels: Option<Vec<f64>>,
    },
    /// |covariance| of the two box crossing indicators, with its
    /// decomposition bound.
    CrossingCorrelation {
        scales: Vec<f64>,
        #[serde(default)]
        levels: Option<Vec<f64>>,
    },
}

fn default_probes() -> u64 {
    4096
}

/// Output format for results.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_eps0() -> f64 {
    0.2
}

/// One experiment: a command, its model, and the grids it sweeps. Unknown
/// fields are rejected so config typos fail loudly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandName,
    /// The model under study. Omitted only for voronoi-scan, which builds
    /// its models from the scan grids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec<f64>>,
    /// Quantities for estimate/compare.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quantities: Vec<QuantitySpec>,
    /// Intensities to sweep (or the coupled grid for scan-lambda; the
    /// single check-contraction intensity per entry here).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_grid: Vec<f64>,
    /// Box scale n for scan-lambda, lambda-c, voronoi-scan and
    /// check-contraction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    /// Margin parameter of the influence/mixing boxes, in (0, 1/5].
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    /// Bisection bracket for lambda-c.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    /// Bisection tolerance for lambda-c and voronoi-scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Cell intensity grid for voronoi-scan.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu_grid: Vec<f64>,
    /// High-value probability grid for voronoi-scan.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub p_grid: Vec<f64>,
    /// The two field values for voronoi-scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_high: Option<f64>,
    pub replications: u64,
    pub master_seed: u64,
    /// Output file; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    /// Command-level completeness checks; the library validates every
    /// numeric precondition before sampling anything.
    pub fn validate(&self) -> Result<(), String> {
        if self.replications == 0 {
            return Err("replications must be positive".into());
        }
        if !(self.eps0 > 0.0 && self.eps0 <= 0.2) {
            return Err(format!("eps0 must lie in (0, 1/5], got {}", self.eps0));
        }
        let need_model = !matches!(self.command, CommandName::VoronoiScan);
        if need_model && self.model.is_none() {
            return Err(format!("command {} needs a model", self.command.as_str()));
        }
        match self.command {
            CommandName::Estimate => {
                if self.quantities.is_empty() {
                    return Err("estimate needs at least one quantity".into());
                }
                if self.lambda_grid.is_empty() {
                    return Err("estimate needs a lambda grid".into());
                }
            }
            CommandName::Compare => {
                if self.quantities.is_empty() {
                    return Err("compare needs at least one quantity".into());
                }
                if self.lambda_grid.is_empty() {
                    return Err("compare needs a lambda grid".into());
                }
                for q in &self.quantities {
                    if !matches!(
                        q,
                        QuantitySpec::PointCoverage
                            | QuantitySpec::SegmentCoverage { .. }
                            | QuantitySpec::BoxCrossing { .. }
                    ) {
                        return Err(
                            "compare supports point coverage, segment coverage and box \
                             crossing quantities"
                                .into(),
                        );
                    }
                }
            }
            CommandName::ScanLambda => {
                if self.lambda_grid.is_empty() {
                    return Err("scan-lambda needs a lambda grid".into());
                }
                if self.scale.is_none() {
                    return Err("scan-lambda needs a scale".into());
                }
            }
            CommandName::LambdaC => {
                if self.scale.is_none() {
                    return Err("lambda-c needs a scale".into());
                }
                if self.bracket.is_none() {
                    return Err("lambda-c needs a bracket".into());
                }
                if self.tolerance.is_none() {
                    return Err("lambda-c needs a tolerance".into());
                }
            }
            CommandName::VoronoiScan => {
                if self.mu_grid.is_empty() || self.p_grid.is_empty() {
                    return Err("voronoi-scan needs mu and p grids".into());
                }
                if self.radius_low.is_none() || self.radius_high.is_none() {
                    return Err("voronoi-scan needs radius_low and radius_high".into());
                }
                if self.scale.is_none() {
                    return Err("voronoi-scan needs a scale".into());
                }
                if self.tolerance.is_none() {
                    return Err("voronoi-scan needs a tolerance".into());
                }
            }
            CommandName::CheckContraction => {
                if self.lambda_grid.is_empty() {
                    return Err("check-contraction needs a lambda grid".into());
                }
                if self.scale.is_none() {
                    return Err("check-contraction needs a scale".into());
                }
            }
        }
        Ok(())
    }
}
