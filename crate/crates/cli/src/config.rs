//! TOML configuration schema and conversion into core types.
//!
//! Unknown fields are rejected so typos fail loudly (exit code 2).

use anyhow::{bail, Context, Result};
use ruelle_lab::annealed::MarkovEnvironment;
use ruelle_lab::dynamics::{ExpandingSystem, Generator, Potential, Word};
use ruelle_lab::fixtures;
use ruelle_lab::ncifs::{ContractionMap, Ncifs};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional tag; when present it must match the invoked subcommand.
    pub experiment: Option<String>,
    pub system: Option<SystemConfig>,
    pub environment: Option<EnvironmentConfig>,
    pub ncifs: Option<NcifsConfig>,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Name of a built-in fixture; mutually exclusive with `alphabet`.
    pub fixture: Option<String>,
    pub alphabet: Option<Vec<GeneratorConfig>>,
    pub a: Option<f64>,
    pub lambda: Option<f64>,
    pub holder_alpha: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub branches: usize,
    pub potential: PotentialConfig,
    /// Declared Hölder exponent; all entries must agree (one function
    /// space for the whole alphabet).
    pub holder_alpha: Option<f64>,
    /// Declared Hölder constant; defaults to the family's natural one.
    pub holder_const: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    Const { value: f64 },
    Cos {
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    Linear { slope: f64 },
}

impl PotentialConfig {
    fn build(&self) -> Potential {
        match *self {
            PotentialConfig::Zero => Potential::Zero,
            PotentialConfig::Const { value } => Potential::Const(value),
            PotentialConfig::Cos { amplitude, phase } => Potential::Cos { amplitude, phase },
            PotentialConfig::Linear { slope } => Potential::Linear { slope },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub fixture: Option<String>,
    pub initial: Option<Vec<f64>>,
    pub transition: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub invariant: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NcifsConfig {
    pub fixture: Option<String>,
    pub systems: Option<Vec<Vec<MapConfig>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub r: f64,
    #[serde(default)]
    pub b: f64,
    /// Nonzero turns the map into the smooth perturbed family with offset
    /// `b` reused as the constant term.
    #[serde(default)]
    pub eps: f64,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub grid_n: Option<usize>,
    pub seed: Option<u64>,
    /// Convergence depth for quenched measures.
    pub depth: Option<usize>,
    /// Environment-word prefix `u` (1-based digits).
    pub prefix: Option<String>,
    /// Pattern extended cyclically for `ω`.
    pub omega_pattern: Option<String>,
    pub n_lo: Option<usize>,
    pub n_hi: Option<usize>,
    pub n_step: Option<usize>,
    pub trials: Option<usize>,
    pub lengths: Option<Vec<usize>>,
    pub mc_samples: Option<usize>,
    pub n_max: Option<usize>,
    pub clt_n: Option<usize>,
    pub delta_min: Option<f64>,
    pub delta_max: Option<f64>,
    pub delta_count: Option<usize>,
    pub tol: Option<f64>,
    pub iota_depth: Option<usize>,
    pub x_node: Option<usize>,
    /// Explicit probe words (1-based digit strings).
    pub probe_words: Option<Vec<String>>,
    /// Or a two-sided truncation family toward (σ*, ω*).
    pub sigma_pattern: Option<String>,
    pub probe_lengths: Option<Vec<usize>>,
    pub observable: Option<ObservableConfig>,
    pub observable_g: Option<ObservableConfig>,
    pub quenched_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableConfig {
    Cos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    Dyadic {
        #[serde(default = "eight")]
        levels: usize,
    },
    Constant { value: f64 },
}

fn one() -> f64 {
    1.0
}
fn eight() -> usize {
    8
}

impl ObservableConfig {
    pub fn build(&self, grid_n: usize) -> ruelle_lab::grid::GridFunction {
        match *self {
            ObservableConfig::Cos { amplitude, phase, offset } => {
                ruelle_lab::grid::GridFunction::from_fn(grid_n, |x| {
                    amplitude * (2.0 * std::f64::consts::PI * (x + phase)).cos() + offset
                })
            }
            ObservableConfig::Dyadic { levels } => {
                ruelle_lab::stats::dyadic_observable(grid_n, levels)
            }
            ObservableConfig::Constant { value } => {
                ruelle_lab::grid::GridFunction::constant(grid_n, value)
            }
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).context("config does not match the schema")
    }

    pub fn build_system(&self) -> Result<ExpandingSystem> {
        let sc = self
            .system
            .as_ref()
            .context("this experiment requires a [system] section")?;
        if let Some(name) = &sc.fixture {
            return match name.as_str() {
                "two-three-zero" => Ok(fixtures::two_three_zero()),
                "two-three-cos" => Ok(fixtures::two_three_cos()),
                "doubling-full-cos" => Ok(fixtures::doubling_full_cos()),
                "two-four-zero" => Ok(fixtures::two_four_zero()),
                other => bail!("unknown system fixture {other:?}"),
            };
        }
        let alphabet = sc
            .alphabet
            .as_ref()
            .context("[system] needs either `fixture` or `alphabet`")?;
        let mut alpha = sc.holder_alpha;
        for g in alphabet {
            if let Some(a) = g.holder_alpha {
                match alpha {
                    None => alpha = Some(a),
                    Some(prev) if (prev - a).abs() > 1e-12 => {
                        bail!("generators declare different Hölder exponents ({prev} vs {a})")
                    }
                    _ => {}
                }
            }
        }
        let generators = alphabet
            .iter()
            .map(|g| {
                let potential = g.potential.build();
                let holder_const = g.holder_const.unwrap_or_else(|| potential.default_lipschitz());
                Generator { branches: g.branches, potential, holder_const }
            })
            .collect();
        let a = sc.a.context("[system] needs `a`")?;
        let lambda = sc.lambda.context("[system] needs `lambda`")?;
        Ok(ExpandingSystem::new(generators, a, lambda, alpha.unwrap_or(1.0))?)
    }

    pub fn build_environment(&self) -> Result<MarkovEnvironment> {
        let ec = self
            .environment
            .as_ref()
            .context("this experiment requires an [environment] section")?;
        if let Some(name) = &ec.fixture {
            return match name.as_str() {
                "bernoulli-half" => Ok(fixtures::env_bernoulli_half()),
                "markov-73" => Ok(fixtures::env_markov_73()),
                "single" => Ok(fixtures::env_single()),
                other => bail!("unknown environment fixture {other:?}"),
            };
        }
        let initial = ec
            .initial
            .clone()
            .context("[environment] needs either `fixture` or `initial`")?;
        let transition = ec
            .transition
            .clone()
            .context("[environment] needs `transition`")?;
        Ok(MarkovEnvironment::new(initial, transition, ec.invariant)?)
    }

    pub fn build_ncifs(&self) -> Result<Ncifs> {
        let nc = self
            .ncifs
            .as_ref()
            .context("this experiment requires an [ncifs] section")?;
        if let Some(name) = &nc.fixture {
            return match name.as_str() {
                "cantor-third" => Ok(fixtures::cantor_third()),
                "cantor-mixture" => Ok(fixtures::cantor_mixture()),
                "cantor-smooth" => Ok(fixtures::cantor_smooth()),
                other => bail!("unknown ncifs fixture {other:?}"),
            };
        }
        let systems = nc
            .systems
            .as_ref()
            .context("[ncifs] needs either `fixture` or `systems`")?
            .iter()
            .map(|maps| {
                maps.iter()
                    .map(|m| {
                        if m.eps == 0.0 {
                            ContractionMap::Affine { r: m.r, b: m.b }
                        } else {
                            ContractionMap::Perturbed { c: m.b, r: m.r, eps: m.eps }
                        }
                    })
                    .collect()
            })
            .collect();
        let env = self.build_environment()?;
        Ok(Ncifs::new(systems, env)?)
    }

    pub fn word(&self, field: &Option<String>, default: &str) -> Result<Word> {
        let s = field.as_deref().unwrap_or(default);
        Ok(Word::parse(s)?)
    }
}
