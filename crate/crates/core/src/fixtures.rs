//! Built-in reference systems with known analytic values.
//!
//! Every fixture is chosen so some exact quantity is available in closed
//! form: branch counts are eigenvalues under zero potentials, the Bernoulli
//! average of branch counts drives annealed growth, affine IFS operators
//! act as scalars on constants, and the ratio-1/3 Cantor system solves its
//! Bowen equation at `log 2 / log 3`.

use crate::annealed::MarkovEnvironment;
use crate::dynamics::{ExpandingSystem, Generator, Potential, Word};
use crate::ncifs::{ContractionMap, Ncifs};
use rand::Rng;

/// `{×2, ×3}` with zero potentials: the conformal family is Lebesgue and
/// every eigenvalue is a branch count.
pub fn two_three_zero() -> ExpandingSystem {
    ExpandingSystem::new(
        vec![
            Generator { branches: 2, potential: Potential::Zero, holder_const: 0.0 },
            Generator { branches: 3, potential: Potential::Zero, holder_const: 0.0 },
        ],
        0.15,
        0.5,
        1.0,
    )
    .expect("fixture is valid")
}

/// Amplitude of the standard smooth potentials. Small enough that the
/// piecewise-linear interpolation budget `h²|g''|/8` keeps letter-chained
/// operators within 1e-6 (relative) of brute-force preimage sums for
/// `|v| ≤ 6` at `N = 1024`, and that `Δ = a^{-α}` (the distortion term
/// `4C_φ` stays below `1/a`).
pub const SMOOTH_AMPLITUDE: f64 = 0.05;

/// `{×2, ×3}` with distinct mild trigonometric potentials — the standard
/// smooth fixture.
pub fn two_three_cos() -> ExpandingSystem {
    let amp = SMOOTH_AMPLITUDE;
    let lip = 2.0 * std::f64::consts::PI * amp;
    ExpandingSystem::new(
        vec![
            Generator {
                branches: 2,
                potential: Potential::Cos { amplitude: amp, phase: 0.0 },
                holder_const: lip,
            },
            Generator {
                branches: 3,
                // a quarter-turn phase makes the two potentials genuinely different
                potential: Potential::Cos { amplitude: amp, phase: -0.25 },
                holder_const: lip,
            },
        ],
        0.15,
        0.5,
        1.0,
    )
    .expect("fixture is valid")
}

/// Two doubling branches, one carrying a full-amplitude cosine potential:
/// the classical single-map fixture for eigen-oracle and CLT experiments.
pub fn doubling_full_cos() -> ExpandingSystem {
    ExpandingSystem::new(
        vec![
            Generator {
                branches: 2,
                potential: Potential::Cos { amplitude: 1.0, phase: 0.0 },
                holder_const: 2.0 * std::f64::consts::PI,
            },
            Generator { branches: 2, potential: Potential::Zero, holder_const: 0.0 },
        ],
        0.2,
        0.5,
        1.0,
    )
    .expect("fixture is valid")
}

/// Doubling with the sawtooth test potential `φ(x) = x`; exercises
/// Birkhoff-sum bookkeeping in branch enumeration (not circle-Hölder).
pub fn doubling_linear_potential() -> ExpandingSystem {
    ExpandingSystem::new(
        vec![
            Generator {
                branches: 2,
                potential: Potential::Linear { slope: 1.0 },
                holder_const: 1.0,
            },
            Generator { branches: 2, potential: Potential::Zero, holder_const: 0.0 },
        ],
        0.2,
        0.5,
        1.0,
    )
    .expect("fixture is valid")
}

/// Doubling plus tripling where the tripling letter carries a constant
/// potential `c`, so `L_2(1) = 3·e^c` exactly.
pub fn tripling_constant_potential(c: f64) -> ExpandingSystem {
    ExpandingSystem::new(
        vec![
            Generator { branches: 2, potential: Potential::Zero, holder_const: 0.0 },
            Generator { branches: 3, potential: Potential::Const(c), holder_const: 0.0 },
        ],
        0.15,
        0.5,
        1.0,
    )
    .expect("fixture is valid")
}

/// Commuting pair `{×2, ×4}` with zero potentials; all equilibrium states
/// coincide (Lebesgue), collapsing the boundary to a point.
pub fn two_four_zero() -> ExpandingSystem {
    ExpandingSystem::new(
        vec![
            Generator { branches: 2, potential: Potential::Zero, holder_const: 0.0 },
            Generator { branches: 4, potential: Potential::Zero, holder_const: 0.0 },
        ],
        0.12,
        0.5,
        1.0,
    )
    .expect("fixture is valid")
}

/// Independent uniform letters on two symbols.
pub fn env_bernoulli_half() -> MarkovEnvironment {
    MarkovEnvironment::new(
        vec![0.5, 0.5],
        vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        true,
    )
    .expect("fixture is valid")
}

/// The standard non-Bernoulli mixing chain `Q = [[0.7, 0.3], [0.4, 0.6]]`,
/// started from its stationary vector `(4/7, 3/7)`.
pub fn env_markov_73() -> MarkovEnvironment {
    MarkovEnvironment::new(
        vec![4.0 / 7.0, 3.0 / 7.0],
        vec![vec![0.7, 0.3], vec![0.4, 0.6]],
        true,
    )
    .expect("fixture is valid")
}

/// Same transition matrix, deliberately non-stationary start.
pub fn env_markov_73_nonstationary() -> MarkovEnvironment {
    MarkovEnvironment::new(
        vec![0.9, 0.1],
        vec![vec![0.7, 0.3], vec![0.4, 0.6]],
        false,
    )
    .expect("fixture is valid")
}

/// One-state environment for autonomous IFS runs.
pub fn env_single() -> MarkovEnvironment {
    MarkovEnvironment::new(vec![1.0], vec![vec![1.0]], true).expect("fixture is valid")
}

/// Middle-thirds Cantor system: two ratio-1/3 maps; `δ₀ = log 2 / log 3`.
pub fn cantor_third() -> Ncifs {
    Ncifs::new(
        vec![vec![
            ContractionMap::Affine { r: 1.0 / 3.0, b: 0.0 },
            ContractionMap::Affine { r: 1.0 / 3.0, b: 2.0 / 3.0 },
        ]],
        env_single(),
    )
    .expect("fixture is valid")
}

/// Bernoulli(1/2,1/2) mixture of a two-map ratio-1/4 system and a four-map
/// ratio-1/8 system; annealed pressure `log((2·4^{-δ} + 4·8^{-δ})/2)`.
pub fn cantor_mixture() -> Ncifs {
    Ncifs::new(
        vec![
            vec![
                ContractionMap::Affine { r: 0.25, b: 0.0 },
                ContractionMap::Affine { r: 0.25, b: 0.75 },
            ],
            vec![
                ContractionMap::Affine { r: 0.125, b: 0.0 },
                ContractionMap::Affine { r: 0.125, b: 0.25 },
                ContractionMap::Affine { r: 0.125, b: 0.5 },
                ContractionMap::Affine { r: 0.125, b: 0.75 },
            ],
        ],
        env_bernoulli_half(),
    )
    .expect("fixture is valid")
}

/// Smoothly perturbed two-map system with explicit derivatives, for the
/// finite-difference oracle.
pub fn cantor_smooth() -> Ncifs {
    Ncifs::new(
        vec![vec![
            ContractionMap::Perturbed { c: 0.0, r: 0.3, eps: 0.08 },
            ContractionMap::Perturbed { c: 0.6, r: 0.3, eps: -0.06 },
        ]],
        env_single(),
    )
    .expect("fixture is valid")
}

/// Single ratio-1/2 map: `P(0) = 0`, the degenerate boundary case for the
/// Bowen bracket.
pub fn single_half() -> Ncifs {
    Ncifs::new(
        vec![vec![ContractionMap::Affine { r: 0.5, b: 0.0 }]],
        env_single(),
    )
    .expect("fixture is valid")
}

/// Uniform random word over the system alphabet.
pub fn random_word(sys: &ExpandingSystem, rng: &mut impl Rng, len: usize) -> Word {
    Word::new(
        (0..len)
            .map(|_| rng.gen_range(0..sys.alphabet_size()) as u8)
            .collect(),
    )
}

/// Catalog entry for the CLI.
#[derive(Debug, Clone)]
pub struct FixtureInfo {
    pub name: &'static str,
    pub kind: &'static str,
    pub summary: &'static str,
}

pub fn catalog() -> Vec<FixtureInfo> {
    vec![
        FixtureInfo {
            name: "doubling-zero-potential",
            kind: "generator",
            summary: "x ↦ 2x mod 1 with φ=0: λ=2 exact, conformal measure Lebesgue",
        },
        FixtureInfo {
            name: "two-three-zero",
            kind: "expanding-system",
            summary: "{×2,×3}, φ=0: λ_w = branch count exact; A_n(1)=(5/2)^n under bernoulli-half",
        },
        FixtureInfo {
            name: "two-three-cos",
            kind: "expanding-system",
            summary: "{×2,×3} with 0.05·cos / 0.05·sin potentials: standard smooth fixture",
        },
        FixtureInfo {
            name: "doubling-full-cos",
            kind: "expanding-system",
            summary: "{×2,×2} with cos(2πx) on the first letter: classical eigen-oracle fixture",
        },
        FixtureInfo {
            name: "two-four-zero",
            kind: "expanding-system",
            summary: "commuting {×2,×4}, φ=0: abelian fixture, boundary collapses to a point",
        },
        FixtureInfo {
            name: "bernoulli-half",
            kind: "environment",
            summary: "iid uniform letters: A_n=(A_1)^n exactly",
        },
        FixtureInfo {
            name: "markov-73",
            kind: "environment",
            summary: "Q=[[0.7,0.3],[0.4,0.6]], stationary start (4/7,3/7): non-Bernoulli mixing chain",
        },
        FixtureInfo {
            name: "cantor-third",
            kind: "ncifs",
            summary: "two ratio-1/3 maps: delta0=log2/log3 ≈ 0.630930 exact",
        },
        FixtureInfo {
            name: "cantor-mixture",
            kind: "ncifs",
            summary: "Bernoulli mix of ratio-1/4 and ratio-1/8 systems: root of (2·4^{-δ}+4·8^{-δ})/2 = 1",
        },
        FixtureInfo {
            name: "cantor-smooth",
            kind: "ncifs",
            summary: "perturbed contractions with closed-form derivatives for the FD oracle",
        },
    ]
}
