//! Experiment configuration: a TOML document with a model block, exactly
//! one method block (exact or mc), and an optional output block.
//!
//! Semantic validation collects every violation it can find, each tagged
//! with the path of the offending field, rather than stopping at the first.

use serde::{Deserialize, Serialize};

use ising_duality::{
    build_chain_model, build_grid_model, sample_couplings_uniform, Boundary, ChainSpec, Domain,
    Estimator, IsingModel,
};

pub const BRUTE_SITE_LIMIT: usize = ising_duality::exact::BRUTE_SITE_LIMIT;
pub const BRUTE_DUAL_FACE_LIMIT: usize = ising_duality::exact::BRUTE_DUAL_FACE_LIMIT;
pub const TRANSFER_GRID_LIMIT: usize = ising_duality::exact::TRANSFER_GRID_LIMIT;

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub method: MethodSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    pub size: usize,
    /// Chains only; grids are always free-boundary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryKind>,
    pub coupling: CouplingSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Chain,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    Free,
    Periodic,
}

/// Exactly one of `constant` / `uniform`.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformCoupling>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct UniformCoupling {
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

/// Exactly one of `exact` / `mc`.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExactSection {
    pub kind: ExactKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactKind {
    Brute,
    BruteDual,
    Transfer,
    ClosedForm,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub estimator: EstimatorKind,
    pub domain: DomainKind,
    pub samples: usize,
    #[serde(default = "default_chains")]
    pub chains: u32,
    /// Defaults to 1000 for gibbs-ot; must be absent or 0 for uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    /// Recording stride along the sample path; defaults to 100.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    pub seed: u64,
}

fn default_chains() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Uniform,
    GibbsOt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Primal,
    Dual,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// One validation failure, located by field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Parses and validates a configuration document; on failure returns every
/// issue found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, Vec<ConfigIssue>> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        vec![ConfigIssue {
            path: "(document)".into(),
            message: e.to_string(),
        }]
    })?;
    let issues = validate(&cfg);
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(issues)
    }
}

/// All semantic violations in an already-parsed configuration.
pub fn validate(cfg: &ExperimentConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    let mut push = |path: &str, message: String| {
        issues.push(ConfigIssue {
            path: path.to_string(),
            message,
        });
    };

    let m = &cfg.model;
    if m.size < 2 {
        push("model.size", format!("must be at least 2, got {}", m.size));
    }
    match m.kind {
        ModelKind::Grid => {
            if m.boundary == Some(BoundaryKind::Periodic) {
                push(
                    "model.boundary",
                    "periodic boundaries apply only to chains; grids are free-boundary".into(),
                );
            }
        }
        ModelKind::Chain => {}
    }

    match (&m.coupling.constant, &m.coupling.uniform) {
        (None, None) => push(
            "model.coupling",
            "one of `constant` or `uniform` is required".into(),
        ),
        (Some(_), Some(_)) => push(
            "model.coupling",
            "`constant` and `uniform` are mutually exclusive; both are set".into(),
        ),
        (None, Some(u)) => {
            if u.lo.partial_cmp(&u.hi) != Some(std::cmp::Ordering::Less) {
                push(
                    "model.coupling.uniform",
                    format!("empty interval: lo = {} must be below hi = {}", u.lo, u.hi),
                );
            }
            if m.kind == ModelKind::Chain {
                push(
                    "model.coupling.uniform",
                    "uniform coupling draws are defined for grid models".into(),
                );
            }
        }
        (Some(_), None) => {}
    }

    let n_sites = match m.kind {
        ModelKind::Chain => m.size,
        ModelKind::Grid => m.size * m.size,
    };

    match (&cfg.method.exact, &cfg.method.mc) {
        (None, None) => push(
            "method",
            "one of `method.exact` or `method.mc` is required".into(),
        ),
        (Some(_), Some(_)) => push(
            "method",
            "`method.exact` and `method.mc` are mutually exclusive; both are set".into(),
        ),
        (Some(exact), None) => match exact.kind {
            ExactKind::Brute => {
                if n_sites > BRUTE_SITE_LIMIT {
                    push(
                        "method.exact.kind",
                        format!(
                            "brute enumeration requires N <= {BRUTE_SITE_LIMIT}, model has {n_sites} sites"
                        ),
                    );
                }
            }
            ExactKind::BruteDual => {
                if m.kind != ModelKind::Grid {
                    push("method.exact.kind", "brute-dual requires a grid model".into());
                } else {
                    let faces = (m.size - 1) * (m.size - 1);
                    if faces > BRUTE_DUAL_FACE_LIMIT {
                        push(
                            "method.exact.kind",
                            format!(
                                "dual enumeration requires (m-1)^2 <= {BRUTE_DUAL_FACE_LIMIT}, model has {faces} faces"
                            ),
                        );
                    }
                }
            }
            ExactKind::Transfer => {
                if m.kind == ModelKind::Grid && m.size > TRANSFER_GRID_LIMIT {
                    push(
                        "method.exact.kind",
                        format!(
                            "the 2D transfer method requires m <= {TRANSFER_GRID_LIMIT}, got {}",
                            m.size
                        ),
                    );
                }
            }
            ExactKind::ClosedForm => {
                if m.kind != ModelKind::Chain {
                    push(
                        "method.exact.kind",
                        "closed forms are defined for chain models".into(),
                    );
                }
            }
        },
        (None, Some(mc)) => {
            if mc.samples == 0 {
                push("method.mc.samples", "must be at least 1".into());
            }
            if mc.chains == 0 {
                push("method.mc.chains", "must be at least 1".into());
            }
            if mc.stride == Some(0) {
                push("method.mc.stride", "must be at least 1".into());
            }
            if mc.estimator == EstimatorKind::Uniform && mc.burn_in.unwrap_or(0) != 0 {
                push(
                    "method.mc.burn_in",
                    "burn-in applies only to the gibbs-ot estimator".into(),
                );
            }
            if mc.domain == DomainKind::Dual {
                if m.kind != ModelKind::Grid {
                    push("method.mc.domain", "dual sampling requires a grid model".into());
                }
                if let Some(j) = m.coupling.constant {
                    if j <= 0.0 {
                        push(
                            "model.coupling.constant",
                            format!("dual sampling requires J > 0, got {j}"),
                        );
                    }
                }
                if let Some(u) = &m.coupling.uniform {
                    if u.lo <= 0.0 {
                        push(
                            "model.coupling.uniform",
                            "dual sampling requires J > 0 over the whole interval".into(),
                        );
                    }
                }
            }
        }
    }

    issues
}

/// Materializes the coupling list of a validated model section.
pub fn resolve_couplings(model: &ModelSection) -> Vec<f64> {
    let n_edges = match (model.kind, model.boundary) {
        (ModelKind::Chain, Some(BoundaryKind::Periodic)) => model.size,
        (ModelKind::Chain, _) => model.size - 1,
        (ModelKind::Grid, _) => 2 * model.size * (model.size - 1),
    };
    if let Some(j) = model.coupling.constant {
        return vec![j; n_edges];
    }
    let u = model
        .coupling
        .uniform
        .as_ref()
        .expect("validated coupling section has one variant");
    sample_couplings_uniform(model.size, u.lo, u.hi, u.seed)
        .expect("validated uniform interval is non-empty")
}

/// Builds the Ising model of a validated configuration.
pub fn build_model(model: &ModelSection) -> Result<IsingModel, Vec<ConfigIssue>> {
    let couplings = resolve_couplings(model);
    let result = match model.kind {
        ModelKind::Chain => {
            let boundary = match model.boundary.unwrap_or(BoundaryKind::Free) {
                BoundaryKind::Free => Boundary::Free,
                BoundaryKind::Periodic => Boundary::Periodic,
            };
            build_chain_model(model.size, boundary, couplings)
        }
        ModelKind::Grid => build_grid_model(model.size, couplings),
    };
    result.map_err(|e| {
        vec![ConfigIssue {
            path: "model".into(),
            message: e.to_string(),
        }]
    })
}

/// Translates a validated mc section into a sampling chain spec.
pub fn chain_spec(mc: &McSection) -> ChainSpec {
    let domain = match mc.domain {
        DomainKind::Primal => Domain::Primal,
        DomainKind::Dual => Domain::Dual,
    };
    match mc.estimator {
        EstimatorKind::Uniform => ChainSpec {
            estimator: Estimator::Uniform,
            domain,
            samples: mc.samples,
            burn_in: 0,
            seed: mc.seed,
            record_stride: mc.stride.unwrap_or(ChainSpec::DEFAULT_RECORD_STRIDE),
            check_constraints: false,
        },
        EstimatorKind::GibbsOt => ChainSpec {
            estimator: Estimator::GibbsOt,
            domain,
            samples: mc.samples,
            burn_in: mc.burn_in.unwrap_or(ChainSpec::DEFAULT_BURN_IN),
            seed: mc.seed,
            record_stride: mc.stride.unwrap_or(ChainSpec::DEFAULT_RECORD_STRIDE),
            check_constraints: false,
        },
    }
}
