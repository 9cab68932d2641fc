//! The equilibrium-state boundary of the semigroup.
//!
//! Words are compared by the two-sided metric `d_{W*}` (matching prefix and
//! suffix lengths), semigroup elements by
//!
//! ```text
//! d_G(v, w) = W̄(μ_v, μ_w) + 1/κ(T_v) + 1/κ(T_w),
//! ```
//!
//! where `μ_v` is the equilibrium state of the periodic extensions of `v`
//! and `κ` the minimal local expansion. Cauchy sequences for `d_G` must
//! have `κ → ∞`; their equilibrium measures converge, and the terminal
//! measure represents the boundary point.

use crate::dynamics::{ExpandingSystem, MetricConstants, Word};
use crate::fit::{self, GeometricFit, LinearFit};
use crate::grid::DEFAULT_GRID;
use crate::measures::{bilateral_equilibrium, wasserstein_dstar, GridMeasure};
use crate::Result;

/// Two-sided word metric: `2^{-p} + 2^{-s}` where `p` (resp. `s`) is the
/// first position from the left (resp. right) at which the words disagree
/// or one of them ends.
pub fn word_metric(v: &Word, w: &Word) -> f64 {
    if v == w {
        return 0.0;
    }
    let (m, n) = (v.len(), w.len());
    let shared = m.min(n);
    let mut p = shared + 1;
    for k in 1..=shared {
        if v.letter(k - 1) != w.letter(k - 1) {
            p = k;
            break;
        }
    }
    let mut s = shared + 1;
    for k in 1..=shared {
        if v.letter(m - k) != w.letter(n - k) {
            s = k;
            break;
        }
    }
    0.5_f64.powi(p as i32) + 0.5_f64.powi(s as i32)
}

/// Minimal local expansion of `T_w`: the product of minimal branch slopes
/// (exact for the affine generator family).
pub fn kappa(sys: &ExpandingSystem, w: &Word) -> f64 {
    w.letters()
        .iter()
        .map(|&i| sys.generator(i).slope())
        .product()
}

/// A word together with its expansion coefficient and equilibrium state.
#[derive(Debug, Clone)]
pub struct SemigroupElement {
    pub word: Word,
    pub kappa: f64,
    pub equilibrium: GridMeasure,
}

impl SemigroupElement {
    /// Compute the equilibrium state of the periodic extensions
    /// `(...www, www...)` at the given bilateral truncation depth.
    pub fn compute(sys: &ExpandingSystem, word: &Word, depth: usize, grid_n: usize) -> Result<Self> {
        let sigma = Word::cyclic_suffix(word, depth);
        let omega = Word::cyclic(word, depth);
        let eq = bilateral_equilibrium(sys, &sigma, &omega, depth, depth, grid_n)?;
        Ok(SemigroupElement {
            word: word.clone(),
            kappa: kappa(sys, word),
            equilibrium: eq.measure,
        })
    }

    /// `d_G` between two precomputed elements.
    pub fn distance(&self, other: &SemigroupElement, mc: &MetricConstants) -> Result<f64> {
        if self.word == other.word {
            return Ok(0.0);
        }
        let w = wasserstein_dstar(mc, &self.equilibrium, &other.equilibrium, 256)?;
        Ok(w + 1.0 / self.kappa + 1.0 / other.kappa)
    }
}

/// `d_G(v, w)` from scratch.
pub fn equilibrium_distance(
    sys: &ExpandingSystem,
    v: &Word,
    w: &Word,
    depth: usize,
) -> Result<f64> {
    if v == w {
        return Ok(0.0);
    }
    let mc = MetricConstants::from_system(sys);
    let ev = SemigroupElement::compute(sys, v, depth, DEFAULT_GRID)?;
    let ew = SemigroupElement::compute(sys, w, depth, DEFAULT_GRID)?;
    ev.distance(&ew, &mc)
}

/// Probe report for a candidate Cauchy sequence of words.
#[derive(Debug, Clone)]
pub struct CauchyProbe {
    pub gaps: Vec<f64>,
    pub is_cauchy: bool,
    /// First index with a non-decreasing gap, when not Cauchy.
    pub offending_gap: Option<usize>,
    pub fitted_rate: Option<GeometricFit>,
    pub limit: GridMeasure,
    pub kappas: Vec<f64>,
    /// Hölder regression of `log W̄` on `log d_{W*}` over the probe pairs;
    /// the slope is the sampled Hölder exponent of `w ↦ μ_{w̲,w̄}`.
    pub holder: Option<LinearFit>,
}

fn holder_fit(
    mc: &MetricConstants,
    elements: &[SemigroupElement],
) -> Result<Option<LinearFit>> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..elements.len() {
        for j in (i + 1)..elements.len() {
            let dw = word_metric(&elements[i].word, &elements[j].word);
            let wbar = wasserstein_dstar(
                mc,
                &elements[i].equilibrium,
                &elements[j].equilibrium,
                256,
            )?;
            if dw > 0.0 && wbar > 1e-12 {
                xs.push(dw.ln());
                ys.push(wbar.ln());
            }
        }
    }
    Ok(fit::linear_fit(&xs, &ys).ok())
}

/// Successive `d_G` gaps along the sequence; Cauchy means geometric decay
/// with `κ → ∞`, and the terminal equilibrium represents the limit. The
/// pairwise distances also feed the Hölder regression of the
/// word-to-equilibrium map.
pub fn cauchy_probe(
    sys: &ExpandingSystem,
    words: &[Word],
    depth: usize,
    grid_n: usize,
) -> Result<CauchyProbe> {
    assert!(words.len() >= 5, "need at least five words to probe");
    let mc = MetricConstants::from_system(sys);
    let elements: Vec<SemigroupElement> = words
        .iter()
        .map(|w| SemigroupElement::compute(sys, w, depth, grid_n))
        .collect::<Result<Vec<_>>>()?;
    let mut gaps = Vec::with_capacity(words.len() - 1);
    for pair in elements.windows(2) {
        gaps.push(pair[0].distance(&pair[1], &mc)?);
    }
    let offending_gap = gaps.windows(2).position(|w| w[1] >= w[0]);
    let xs: Vec<f64> = (0..gaps.len()).map(|i| i as f64).collect();
    let fitted_rate = fit::geometric_fit(&xs, &gaps).ok();
    let kappa_grows = elements.windows(2).all(|p| p[1].kappa > p[0].kappa);
    let is_cauchy = match (&fitted_rate, offending_gap) {
        (Some(f), None) => f.rate < 1.0 && kappa_grows,
        _ => false,
    };
    let holder = holder_fit(&mc, &elements)?;
    Ok(CauchyProbe {
        gaps,
        is_cauchy,
        offending_gap,
        fitted_rate,
        limit: elements.last().unwrap().equilibrium.clone(),
        kappas: elements.iter().map(|e| e.kappa).collect(),
        holder,
    })
}

/// Regress `log W̄(μ_v, μ_w)` on `log d_{W*}(v, w)` over all pairs from a
/// pool of words; the slope is the fitted Hölder exponent of the
/// word-to-equilibrium map.
pub fn holder_regression(
    sys: &ExpandingSystem,
    pool: &[Word],
    depth: usize,
    grid_n: usize,
) -> Result<LinearFit> {
    let mc = MetricConstants::from_system(sys);
    let elements: Vec<SemigroupElement> = pool
        .iter()
        .map(|w| SemigroupElement::compute(sys, w, depth, grid_n))
        .collect::<Result<Vec<_>>>()?;
    holder_fit(&mc, &elements)?.ok_or_else(|| {
        crate::error::LabError::DegenerateFit("no usable word pairs for the regression".into())
    })
}

/// Two-sided truncation sequence targeting `(σ*, ω*)`: the n-th word is
/// `[ω*]_n · (last n letters of σ*)`, so consecutive words share both an
/// n-prefix and an n-suffix and the equilibria converge to `μ_{σ*,ω*}`.
pub fn two_sided_truncations(
    sigma_pattern: &Word,
    omega_pattern: &Word,
    lengths: &[usize],
) -> Vec<Word> {
    lengths
        .iter()
        .map(|&n| {
            Word::cyclic(omega_pattern, n).concat(&Word::cyclic_suffix(sigma_pattern, n))
        })
        .collect()
}
