//! Scenario configuration: a single JSON document describing the domain,
//! the time grid, the data, thresholds and output paths.
//!
//! Validation reports every violation it finds; nothing is silently fixed.

use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Forward,
    Backward,
    Steer,
    Boundary,
    Diagnostics,
    Matrix,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Forward => "forward",
            ScenarioKind::Backward => "backward",
            ScenarioKind::Steer => "steer",
            ScenarioKind::Boundary => "boundary",
            ScenarioKind::Diagnostics => "diagnostics",
            ScenarioKind::Matrix => "matrix",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub struct DomainSpec {
    pub kind: DomainKindSpec,
    #[serde(default)]
    pub length: Option<f64>,
    #[serde(default)]
    pub length_x: Option<f64>,
    #[serde(default)]
    pub length_y: Option<f64>,
    pub n_modes: usize,
    pub n_quad: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKindSpec {
    Interval,
    Rectangle,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub horizon: f64,
    /// Segments of the piecewise-linear signals.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Points of the output trajectory grid (endpoints included).
    #[serde(default = "default_out_points")]
    pub out_points: usize,
    /// Steering onset for the low modes, defaults to horizon/2.
    #[serde(default)]
    pub t0: Option<f64>,
}

fn default_steps() -> usize {
    16
}

fn default_out_points() -> usize {
    33
}

/// Analytic presets or inline coefficient arrays for state vectors.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields, rename_all = "snake_case")]
pub enum VectorSpec {
    Zero,
    /// Unit coefficient on a 1-based mode, scaled.
    Basis {
        mode: usize,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// `e^{-T lambda_mode} e_mode`: final data reachable from a unit mode.
    ReachableBasis { mode: usize },
    Coeffs {
        re: Vec<f64>,
        #[serde(default)]
        im: Option<Vec<f64>>,
    },
    /// Seeded coefficients `amplitude * U(-1,1) * e^{-rate lambda_j}`.
    RandomDecay {
        rate: f64,
        #[serde(default = "default_scale")]
        amplitude: f64,
    },
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields, rename_all = "snake_case")]
pub enum SignalSpec {
    Zero,
    /// Constant in time with the given coefficient vector.
    Constant { vector: VectorSpec },
    /// Seeded piecewise-linear values `U(-amplitude, amplitude)` per node.
    Random {
        #[serde(default = "default_scale")]
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields, rename_all = "snake_case")]
pub enum BoundarySpec {
    Zero,
    Constant { left: f64, right: f64 },
    /// Linear-in-time endpoint values from `start` to `end`.
    Linear { left: [f64; 2], right: [f64; 2] },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Option<Vec<Vec<f64>>>,
    pub u0_re: Vec<f64>,
    #[serde(default)]
    pub u0_im: Option<Vec<f64>>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_t_steps")]
    pub t_steps: usize,
}

fn default_t_max() -> f64 {
    2.0
}

fn default_t_steps() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub u0: Option<VectorSpec>,
    #[serde(default)]
    pub u_t: Option<VectorSpec>,
    #[serde(default)]
    pub target: Option<VectorSpec>,
    #[serde(default)]
    pub f: Option<SignalSpec>,
    #[serde(default)]
    pub g: Option<BoundarySpec>,
    /// Weyl cut for diagnostics; defaults to the top retained eigenvalue.
    #[serde(default)]
    pub lambda_cut: Option<f64>,
    /// Horizon list for the backward-conditioning table.
    #[serde(default)]
    pub horizons: Option<Vec<f64>>,
    #[serde(default)]
    pub matrix: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    #[serde(default = "default_log_cap")]
    pub log_cap: f64,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn default_log_cap() -> f64 {
    fvp_core::DEFAULT_LOG_CAP
}

fn default_tail_tol() -> f64 {
    1e-6
}

impl Default for ThresholdSpec {
    fn default() -> Self {
        ThresholdSpec { log_cap: default_log_cap(), tail_tol: default_tail_tol() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub time: Option<TimeSpec>,
    #[serde(default)]
    pub data: DataSpec,
    #[serde(default)]
    pub thresholds: ThresholdSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
}

/// One validation violation, addressed by field path.
#[derive(Debug, Clone)]
pub struct Finding {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn check_vector(spec: &VectorSpec, n_modes: usize, field: &str, out: &mut Vec<Finding>) {
    match spec {
        VectorSpec::Basis { mode, .. } | VectorSpec::ReachableBasis { mode } => {
            if *mode == 0 || *mode > n_modes {
                out.push(Finding {
                    field: field.into(),
                    message: format!("mode {mode} outside 1..={n_modes}"),
                });
            }
        }
        VectorSpec::Coeffs { re, im } => {
            if re.len() != n_modes {
                out.push(Finding {
                    field: format!("{field}.re"),
                    message: format!("length {} does not match n_modes {n_modes}", re.len()),
                });
            }
            if let Some(im) = im {
                if im.len() != n_modes {
                    out.push(Finding {
                        field: format!("{field}.im"),
                        message: format!("length {} does not match n_modes {n_modes}", im.len()),
                    });
                }
            }
        }
        VectorSpec::RandomDecay { rate, .. } => {
            if !rate.is_finite() || *rate < 0.0 {
                out.push(Finding {
                    field: format!("{field}.rate"),
                    message: "decay rate must be finite and nonnegative".into(),
                });
            }
        }
        VectorSpec::Zero => {}
    }
}

/// Report every invariant violation in the configuration.
pub fn validate(config: &ScenarioConfig) -> Vec<Finding> {
    let mut out = Vec::new();
    let needs_domain = config.scenario != ScenarioKind::Matrix;
    let needs_time = matches!(
        config.scenario,
        ScenarioKind::Forward | ScenarioKind::Backward | ScenarioKind::Steer | ScenarioKind::Boundary
    );

    let mut n_modes = 0usize;
    if let Some(domain) = &config.domain {
        n_modes = match domain.kind {
            DomainKindSpec::Interval => domain.n_modes,
            DomainKindSpec::Rectangle => domain.n_modes * domain.n_modes,
        };
        if domain.n_modes == 0 {
            out.push(Finding { field: "domain.n_modes".into(), message: "must be at least 1".into() });
        }
        if domain.n_quad < 4 * domain.n_modes {
            out.push(Finding {
                field: "domain.n_quad".into(),
                message: format!(
                    "quadrature underresolved: n_quad = {} < 4 * n_modes = {}",
                    domain.n_quad,
                    4 * domain.n_modes
                ),
            });
        }
        match domain.kind {
            DomainKindSpec::Interval => {
                let l = domain.length.unwrap_or(0.0);
                if !(l > 0.0) {
                    out.push(Finding {
                        field: "domain.length".into(),
                        message: "interval needs a positive length".into(),
                    });
                }
            }
            DomainKindSpec::Rectangle => {
                for (name, v) in [("length_x", domain.length_x), ("length_y", domain.length_y)] {
                    if !(v.unwrap_or(0.0) > 0.0) {
                        out.push(Finding {
                            field: format!("domain.{name}"),
                            message: "rectangle needs positive side lengths".into(),
                        });
                    }
                }
            }
        }
    } else if needs_domain {
        out.push(Finding {
            field: "domain".into(),
            message: format!("required for {} scenarios", config.scenario.as_str()),
        });
    }

    if let Some(time) = &config.time {
        if !(time.horizon > 0.0) || !time.horizon.is_finite() {
            out.push(Finding {
                field: "time.horizon".into(),
                message: format!("must be positive and finite, got {}", time.horizon),
            });
        }
        if time.steps == 0 {
            out.push(Finding { field: "time.steps".into(), message: "must be at least 1".into() });
        }
        if time.out_points < 2 {
            out.push(Finding {
                field: "time.out_points".into(),
                message: "need at least the two endpoint samples".into(),
            });
        }
        if let Some(t0) = time.t0 {
            if !(0.0..time.horizon).contains(&t0) {
                out.push(Finding {
                    field: "time.t0".into(),
                    message: format!("must lie in [0, horizon), got {t0}"),
                });
            }
        }
    } else if needs_time {
        out.push(Finding {
            field: "time".into(),
            message: format!("required for {} scenarios", config.scenario.as_str()),
        });
    }

    let require = |out: &mut Vec<Finding>, present: bool, field: &str| {
        if !present {
            out.push(Finding {
                field: field.into(),
                message: format!("required for {} scenarios", config.scenario.as_str()),
            });
        }
    };
    match config.scenario {
        ScenarioKind::Forward => require(&mut out, config.data.u0.is_some(), "data.u0"),
        ScenarioKind::Backward => require(&mut out, config.data.u_t.is_some(), "data.u_t"),
        ScenarioKind::Steer => require(&mut out, config.data.target.is_some(), "data.target"),
        ScenarioKind::Boundary => {
            require(&mut out, config.data.u0.is_some(), "data.u0");
            require(&mut out, config.data.g.is_some(), "data.g");
            if config
                .domain
                .as_ref()
                .is_some_and(|d| d.kind == DomainKindSpec::Rectangle)
            {
                out.push(Finding {
                    field: "domain.kind".into(),
                    message: "boundary scenarios support interval domains only".into(),
                });
            }
        }
        ScenarioKind::Diagnostics => {}
        ScenarioKind::Matrix => require(&mut out, config.data.matrix.is_some(), "data.matrix"),
    }

    if n_modes > 0 {
        for (field, spec) in [
            ("data.u0", &config.data.u0),
            ("data.u_t", &config.data.u_t),
            ("data.target", &config.data.target),
        ] {
            if let Some(spec) = spec {
                check_vector(spec, n_modes, field, &mut out);
            }
        }
        if let Some(SignalSpec::Constant { vector }) = &config.data.f {
            check_vector(vector, n_modes, "data.f.vector", &mut out);
        }
    }

    if let Some(m) = &config.data.matrix {
        let n = m.re.len();
        if n == 0 || m.re.iter().any(|row| row.len() != n) {
            out.push(Finding {
                field: "data.matrix.re".into(),
                message: "matrix must be square and nonempty".into(),
            });
        }
        if let Some(im) = &m.im {
            if im.len() != n || im.iter().any(|row| row.len() != n) {
                out.push(Finding {
                    field: "data.matrix.im".into(),
                    message: "imaginary part must match the real part's shape".into(),
                });
            }
        }
        if m.u0_re.len() != n {
            out.push(Finding {
                field: "data.matrix.u0_re".into(),
                message: format!("length {} does not match dimension {n}", m.u0_re.len()),
            });
        }
        if let Some(u0_im) = &m.u0_im {
            if u0_im.len() != n {
                out.push(Finding {
                    field: "data.matrix.u0_im".into(),
                    message: format!("length {} does not match dimension {n}", u0_im.len()),
                });
            }
        }
        if !(m.t_max > 0.0) || m.t_steps < 2 {
            out.push(Finding {
                field: "data.matrix.t_max".into(),
                message: "height grid needs t_max > 0 and at least 2 steps".into(),
            });
        }
    }

    if !(config.thresholds.log_cap > 0.0) {
        out.push(Finding {
            field: "thresholds.log_cap".into(),
            message: "must be positive".into(),
        });
    }
    if !(config.thresholds.tail_tol > 0.0) {
        out.push(Finding {
            field: "thresholds.tail_tol".into(),
            message: "must be positive".into(),
        });
    }
    out
}
