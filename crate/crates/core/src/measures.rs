//! Probability measures on the grid, Vaserstein metrics, and the dual
//! iteration that produces quenched conformal and equilibrium measures.
//!
//! Duals of the quotient operators push an atom at a node `x` to the exact
//! preimages `y` with weights `e^{φ_i(y)} L_u(1)(y) / L_{ui}(1)(x)` and bin
//! the result back to the grid by a mean-preserving two-node split. Because
//! the denominator chain is the letter-composed numerator chain, the push
//! conserves mass to floating precision, and the pairing
//! `⟨(P_u^v)*μ, f⟩ = ⟨μ, P_u^v f⟩` holds exactly against the grid primal.
//!
//! Letters of `v` are processed right to left: the adjoint of
//! `P_u^{vw} = P_{uv}^w ∘ P_u^v` applies the deepest-prefix factor first.
//!
//! Two Vaserstein metrics are provided. The Euclidean one is solved exactly
//! by the circle CDF-median formula. The truncated-Hölder one (`d*` cost)
//! goes through common-mass reduction and the exact min-cost-flow solver in
//! [`crate::ot`]; supports above the cap are coarsened by mean-preserving
//! quantile slices first.

use crate::dynamics::{ExpandingSystem, MetricConstants, Word};
use crate::error::LabError;
use crate::fit::{self, GeometricFit};
use crate::grid::GridFunction;
use crate::ot::{min_cost_transport, quantile_coarsen, Atom};
use crate::transfer::{holder_seminorms, ScaledFunction};
use crate::Result;
use rand::Rng;
use rayon::prelude::*;

/// Default support cap fed to the exact transport solver.
pub const OT_SUPPORT_CAP: usize = 512;

/// Atomic/binned probability measure on the grid nodes.
#[derive(Debug, Clone)]
pub struct GridMeasure {
    weights: Vec<f64>,
}

impl GridMeasure {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let mass: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < -1e-12 || !w.is_finite()) {
            return Err(LabError::NotProbability { mass });
        }
        if (mass - 1.0).abs() > 1e-9 {
            return Err(LabError::NotProbability { mass });
        }
        Ok(GridMeasure { weights: weights.into_iter().map(|w| w.max(0.0)).collect() })
    }

    pub fn lebesgue(n: usize) -> Self {
        GridMeasure { weights: vec![1.0 / n as f64; n] }
    }

    pub fn dirac(n: usize, node: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[node % n] = 1.0;
        GridMeasure { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `∫ f dμ` by node pairing.
    pub fn integrate(&self, f: &GridFunction) -> f64 {
        assert_eq!(f.len(), self.weights.len(), "grid size mismatch");
        self.weights
            .iter()
            .zip(f.values())
            .map(|(&w, &v)| w * v)
            .sum()
    }

    pub fn to_atoms(&self) -> Vec<Atom> {
        let n = self.weights.len() as f64;
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(j, &w)| Atom { pos: j as f64 / n, mass: w })
            .collect()
    }

    /// Inverse-CDF sample, uniform within the chosen cell (the binned
    /// measure read as a piecewise-constant density; O(1/N) placement
    /// bias). The jitter keeps sampled orbits off the dyadic grid points,
    /// which integer-slope maps would otherwise send to a fixed point.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let n = self.weights.len();
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut cell = n - 1;
        for (j, &w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                cell = j;
                break;
            }
        }
        (cell as f64 + rng.gen::<f64>()) / n as f64
    }

    fn renormalize(&mut self) {
        let m = self.mass();
        if m > 0.0 {
            let inv = 1.0 / m;
            for w in &mut self.weights {
                *w *= inv;
            }
        }
    }
}

/// Mean-preserving two-node split of an atom onto the grid.
pub fn bin_atom(weights: &mut [f64], pos: f64, mass: f64) {
    let n = weights.len();
    let t = crate::dynamics::wrap(pos) * n as f64;
    let j = (t.floor() as usize).min(n - 1);
    let frac = t - j as f64;
    let j1 = if j + 1 == n { 0 } else { j + 1 };
    weights[j] += mass * (1.0 - frac);
    if frac > 0.0 {
        weights[j1] += mass * frac;
    }
}

/// Exact circle 1-Wasserstein under arc distance: `(1/N)·Σ_j |G_j − med G|`
/// for the interval-wise CDF difference `G`.
pub fn wasserstein_euclid(mu: &GridMeasure, nu: &GridMeasure) -> Result<f64> {
    check_probability(mu)?;
    check_probability(nu)?;
    assert_eq!(mu.len(), nu.len(), "grid size mismatch");
    let n = mu.len();
    let mut g = Vec::with_capacity(n);
    let mut acc = 0.0;
    for j in 0..n {
        acc += mu.weights[j] - nu.weights[j];
        g.push(acc);
    }
    let mut sorted = g.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = sorted[n / 2];
    Ok(g.iter().map(|&x| (x - med).abs()).sum::<f64>() / n as f64)
}

/// Exact `d*`-Vaserstein after common-mass reduction, with quantile
/// coarsening above `support_cap` atoms per side.
pub fn wasserstein_dstar(
    mc: &MetricConstants,
    mu: &GridMeasure,
    nu: &GridMeasure,
    support_cap: usize,
) -> Result<f64> {
    check_probability(mu)?;
    check_probability(nu)?;
    assert_eq!(mu.len(), nu.len(), "grid size mismatch");
    let n = mu.len() as f64;
    let mut pos_part = Vec::new();
    let mut neg_part = Vec::new();
    for (j, (&a, &b)) in mu.weights.iter().zip(&nu.weights).enumerate() {
        let d = a - b;
        if d > 0.0 {
            pos_part.push(Atom { pos: j as f64 / n, mass: d });
        } else if d < 0.0 {
            neg_part.push(Atom { pos: j as f64 / n, mass: -d });
        }
    }
    if pos_part.is_empty() && neg_part.is_empty() {
        return Ok(0.0);
    }
    let src = quantile_coarsen(&pos_part, support_cap);
    let dst = quantile_coarsen(&neg_part, support_cap);
    min_cost_transport(&src, &dst, |x, y| mc.dstar(x, y))
}

fn check_probability(mu: &GridMeasure) -> Result<()> {
    let mass = mu.mass();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(LabError::NotProbability { mass });
    }
    Ok(())
}

/// Which Vaserstein cost to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WassersteinMetric {
    Euclid,
    Dstar,
}

pub fn wasserstein(
    mc: &MetricConstants,
    mu: &GridMeasure,
    nu: &GridMeasure,
    metric: WassersteinMetric,
) -> Result<f64> {
    match metric {
        WassersteinMetric::Euclid => wasserstein_euclid(mu, nu),
        WassersteinMetric::Dstar => wasserstein_dstar(mc, mu, nu, OT_SUPPORT_CAP),
    }
}

/// Prefix chain `g_j = L_{u·v[..j]}(1)` shared by the dual steps.
fn prefix_chain(sys: &ExpandingSystem, u: &Word, v: &Word, n: usize) -> Vec<ScaledFunction> {
    let mut gs = Vec::with_capacity(v.len() + 1);
    gs.push(ScaledFunction::new(GridFunction::one(n)).apply_word(sys, u));
    for &letter in v.letters() {
        let last = gs.last().unwrap();
        gs.push(last.apply_letter(sys, letter));
    }
    gs
}

/// `(P_u^v)* μ`: atom pushing with mean-preserving binning, one letter at a
/// time (right to left), so arbitrarily long `v` never enumerates a full
/// preimage tree.
pub fn dual_apply(
    sys: &ExpandingSystem,
    u: &Word,
    v: &Word,
    mu: &GridMeasure,
) -> Result<GridMeasure> {
    check_probability(mu)?;
    let n = mu.len();
    let gs = prefix_chain(sys, u, v, n);
    for g in &gs {
        let min = g.f.min();
        if !(min > 0.0) {
            return Err(LabError::NonpositiveDenominator { min });
        }
    }
    let mut weights = mu.weights.clone();
    for j in (1..=v.len()).rev() {
        let letter = v.letter(j - 1);
        let gen = sys.generator(letter);
        let m = gen.branches;
        let g_prev = &gs[j - 1];
        let g_cur = &gs[j];
        let scale = (g_prev.log_scale - g_cur.log_scale).exp();
        let mut next = vec![0.0; n];
        for (idx, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let x = idx as f64 / n as f64;
            let denom = g_cur.f.values()[idx];
            for b in 0..m {
                let y = (x + b as f64) / m as f64;
                let push = w * gen.potential.eval(y).exp() * g_prev.f.eval(y) * scale / denom;
                bin_atom(&mut next, y, push);
            }
        }
        weights = next;
    }
    let mut out = GridMeasure { weights };
    out.renormalize();
    Ok(out)
}

/// A converged (finite-depth) quenched measure with its convergence record.
#[derive(Debug, Clone)]
pub struct QuenchedMeasure {
    pub measure: GridMeasure,
    pub word_prefix: Word,
    pub omega: Word,
    /// `W̄` distance between the depth `l−1` and depth `l` iterates.
    pub gap: f64,
}

/// Coarsening cap used for convergence-gap records (diagnostic only).
const GAP_SUPPORT_CAP: usize = 256;

/// Quenched conformal-family member `μ_{u,ω}` at truncation depth `l`,
/// iterated from a Dirac start at node zero.
pub fn quenched_conformal(
    sys: &ExpandingSystem,
    u: &Word,
    omega: &Word,
    l: usize,
    grid_n: usize,
) -> Result<QuenchedMeasure> {
    quenched_conformal_from(sys, u, omega, l, &GridMeasure::dirac(grid_n, 0))
}

/// Same, from a caller-chosen start measure.
pub fn quenched_conformal_from(
    sys: &ExpandingSystem,
    u: &Word,
    omega: &Word,
    l: usize,
    start: &GridMeasure,
) -> Result<QuenchedMeasure> {
    assert!(l >= 1 && l <= omega.len(), "depth {l} outside 1..={}", omega.len());
    let mc = MetricConstants::from_system(sys);
    let measure = dual_apply(sys, u, &omega.prefix(l), start)?;
    let previous = dual_apply(sys, u, &omega.prefix(l - 1), start)?;
    let gap = wasserstein_dstar(&mc, &measure, &previous, GAP_SUPPORT_CAP)?;
    Ok(QuenchedMeasure { measure, word_prefix: u.clone(), omega: omega.prefix(l), gap })
}

/// Eigendata of the conformal family: `λ_{u,ω} = ∫ L_u(1) dμ_ω` and the
/// density `h_{u,ω} = λ^{-1} L_u(1)`.
#[derive(Debug, Clone)]
pub struct EigenData {
    pub lambda: f64,
    pub h: GridFunction,
}

pub fn eigen_data(
    sys: &ExpandingSystem,
    u: &Word,
    omega: &Word,
    l: usize,
    grid_n: usize,
) -> Result<EigenData> {
    let mu_omega = quenched_conformal(sys, &Word::empty(), omega, l, grid_n)?;
    let g_u = ScaledFunction::new(GridFunction::one(grid_n)).apply_word(sys, u);
    let scale = g_u.log_scale.exp();
    let lambda = mu_omega.measure.integrate(&g_u.f) * scale;
    let h = g_u.f.scale(scale / lambda);
    Ok(EigenData { lambda, h })
}

/// Bilateral equilibrium measure `μ_{σ,ω}` from the truncations
/// `(last k letters of σ, first l letters of ω)`.
pub fn bilateral_equilibrium(
    sys: &ExpandingSystem,
    sigma_suffix: &Word,
    omega: &Word,
    k: usize,
    l: usize,
    grid_n: usize,
) -> Result<QuenchedMeasure> {
    let prefix = sigma_suffix.suffix(k);
    quenched_conformal(sys, &prefix, omega, l, grid_n)
}

/// Functional route to quenched integrals: the full quotient
/// `P_u^{ω}(f) = L_ω(f · L_u(1)) / L_ω(L_u(1))` as a grid function.
/// Its oscillation is `O(s^{|ω|})`, so any node value approximates
/// `∫ f dμ_{u,ω}`.
pub fn quenched_quotient(
    sys: &ExpandingSystem,
    u: &Word,
    omega: &Word,
    f: &GridFunction,
) -> Result<GridFunction> {
    let g_u = ScaledFunction::new(GridFunction::one(f.len())).apply_word(sys, u);
    let num = ScaledFunction::new(f.mul(&g_u.f)).apply_word(sys, omega);
    let den = ScaledFunction::new(g_u.f.clone()).apply_word(sys, omega);
    let min = den.f.min();
    if !(min > 0.0) {
        return Err(LabError::NonpositiveDenominator { min });
    }
    let scale = (num.log_scale - den.log_scale).exp();
    Ok(num.f.zip(&den.f, |a, b| scale * a / b))
}

/// `∫ f dμ_{u, tail}` given `g_u = L_u(1)` as a scaled chain: the quotient
/// `L_tail(f·g_u)/L_tail(g_u)` at node zero. The prefix scale cancels
/// between numerator and denominator. This is the workhorse for integrals
/// of `G∘T_u` against `μ_ω`, which must never be formed by composing `G`
/// with the word map on the grid (aliasing beyond `log N` letters).
pub fn prefix_integral(
    sys: &ExpandingSystem,
    g_u: &ScaledFunction,
    tail: &Word,
    f: &GridFunction,
) -> Result<f64> {
    let num = ScaledFunction::new(f.mul(&g_u.f)).apply_word(sys, tail);
    let den = ScaledFunction::new(g_u.f.clone()).apply_word(sys, tail);
    let d0 = den.f.values()[0];
    if !(d0 > 0.0) {
        return Err(LabError::NonpositiveDenominator { min: d0 });
    }
    Ok((num.log_scale - den.log_scale).exp() * num.f.values()[0] / d0)
}

/// `∫ f dμ_{u,ω}` by the functional route, evaluated at node zero.
pub fn quenched_integral(
    sys: &ExpandingSystem,
    u: &Word,
    omega: &Word,
    f: &GridFunction,
) -> Result<f64> {
    Ok(quenched_quotient(sys, u, omega, f)?.values()[0])
}

/// Per-length statistics of the contraction experiment.
#[derive(Debug, Clone)]
pub struct LengthStats {
    pub length: usize,
    pub mean_log_ratio_wbar: f64,
    pub mean_log_ratio_dbar: f64,
    pub all_contracted: bool,
}

/// Empirical contraction-rate report for the dual (measure) and primal
/// (function) actions.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    /// Smallest sampled length from which every longer sampled word
    /// contracted every trial pair.
    pub k0_hat: Option<usize>,
    pub wbar: GeometricFit,
    pub dbar: GeometricFit,
    pub per_length: Vec<LengthStats>,
}

/// Regress `log W̄((P_u^v)*ν₁, (P_u^v)*ν₂) − log W̄(ν₁, ν₂)` (and the `D̄`
/// analogue for a fixed observable) on `|v|` over random words.
pub fn contraction_rate(
    sys: &ExpandingSystem,
    trials: usize,
    lengths: &[usize],
    grid_n: usize,
    seed: u64,
) -> Result<ContractionReport> {
    assert!(lengths.len() >= 2, "need a length sweep");
    let mc = MetricConstants::from_system(sys);
    let observable = GridFunction::from_fn(grid_n, |x| {
        (2.0 * std::f64::consts::PI * x).cos() + 0.4 * (4.0 * std::f64::consts::PI * x + 1.0).sin()
    });
    let d_bar_before = holder_seminorms(&mc, &observable).d_bar;

    let cells: Vec<(usize, usize)> = lengths
        .iter()
        .flat_map(|&k| (0..trials).map(move |t| (k, t)))
        .collect();
    let results: Vec<(usize, f64, f64, bool)> = cells
        .par_iter()
        .map(|&(k, t)| {
            let mut rng = fit::stream_rng(seed, (k * 1000 + t) as u64);
            let u = crate::fixtures::random_word(sys, &mut rng, 2);
            let v = crate::fixtures::random_word(sys, &mut rng, k);
            // far-separated Dirac pair: W̄ before is exactly 1
            let x1 = rng.gen_range(0..grid_n);
            let x2 = loop {
                let c = rng.gen_range(0..grid_n);
                let d = crate::dynamics::circle_dist(
                    x1 as f64 / grid_n as f64,
                    c as f64 / grid_n as f64,
                );
                if d >= sys.a {
                    break c;
                }
            };
            let m1 = dual_apply(sys, &u, &v, &GridMeasure::dirac(grid_n, x1))?;
            let m2 = dual_apply(sys, &u, &v, &GridMeasure::dirac(grid_n, x2))?;
            let w_before = mc.dstar(x1 as f64 / grid_n as f64, x2 as f64 / grid_n as f64);
            let w_after = wasserstein_dstar(&mc, &m1, &m2, GAP_SUPPORT_CAP)?;
            let p_f = crate::transfer::normalized_quotient(sys, &u, &v, &observable)?;
            let d_after = holder_seminorms(&mc, &p_f).d_bar;
            Ok((
                k,
                (w_after / w_before).ln(),
                (d_after / d_bar_before).ln(),
                w_after < w_before && d_after < d_bar_before,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut per_length = Vec::with_capacity(lengths.len());
    for &k in lengths {
        let rows: Vec<&(usize, f64, f64, bool)> =
            results.iter().filter(|r| r.0 == k).collect();
        per_length.push(LengthStats {
            length: k,
            mean_log_ratio_wbar: rows.iter().map(|r| r.1).sum::<f64>() / rows.len() as f64,
            mean_log_ratio_dbar: rows.iter().map(|r| r.2).sum::<f64>() / rows.len() as f64,
            all_contracted: rows.iter().all(|r| r.3),
        });
    }
    let k0_hat = per_length
        .iter()
        .rev()
        .take_while(|s| s.all_contracted)
        .last()
        .map(|s| s.length);
    let xs: Vec<f64> = per_length.iter().map(|s| s.length as f64).collect();
    let wys: Vec<f64> = per_length.iter().map(|s| s.mean_log_ratio_wbar.exp()).collect();
    let dys: Vec<f64> = per_length.iter().map(|s| s.mean_log_ratio_dbar.exp()).collect();
    let wbar = fit::geometric_fit(&xs, &wys)?;
    let dbar = fit::geometric_fit(&xs, &dys)?;
    if !(wbar.rate > 0.0) || !(dbar.rate > 0.0) {
        return Err(LabError::DegenerateFit("contraction ratios collapsed to zero".into()));
    }
    Ok(ContractionReport { k0_hat, wbar, dbar, per_length })
}
