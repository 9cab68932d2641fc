//! Discretized Ruelle operators and their normalized quotients.
//!
//! `apply_letter` realizes `L_i(f)(x) = Σ_b e^{φ_i(ψ_b x)} f(ψ_b x)` at the
//! grid nodes, with `f` read through the interpolant and `φ_i` evaluated in
//! closed form at the exact preimages. Words compose letter by letter, so
//! `L_{i_1...i_n} = L_{i_n} ∘ ... ∘ L_{i_1}` holds by construction, and the
//! quotient operators
//!
//! ```text
//! P_u^v(f) = L_v(f · L_u(1)) / L_v(L_u(1))
//! ```
//!
//! inherit the exact algebra `P_u^v(1) = 1` and `P_{uv}^w ∘ P_u^v = P_u^{vw}`
//! on the grid: the same cancellations that prove them in exact arithmetic
//! happen node-wise here.

use crate::dynamics::{ExpandingSystem, Letter, MetricConstants, Word};
use crate::error::LabError;
use crate::grid::GridFunction;
use crate::Result;

/// One letter of transfer-operator action.
pub fn apply_letter(sys: &ExpandingSystem, letter: Letter, f: &GridFunction) -> GridFunction {
    let g = sys.generator(letter);
    let n = f.len();
    let m = g.branches;
    let zero_potential = g.potential.is_zero();
    let mut out = vec![0.0; n];
    for (idx, o) in out.iter_mut().enumerate() {
        let x = idx as f64 / n as f64;
        let mut acc = 0.0;
        for b in 0..m {
            let y = (x + b as f64) / m as f64;
            let fy = f.eval(y);
            acc += if zero_potential {
                fy
            } else {
                g.potential.eval(y).exp() * fy
            };
        }
        *o = acc;
    }
    GridFunction::from_values(out)
}

/// `L_v(f)` by letter-by-letter composition, first letter first.
pub fn apply_word(sys: &ExpandingSystem, v: &Word, f: &GridFunction) -> GridFunction {
    let mut g = f.clone();
    for &i in v.letters() {
        g = apply_letter(sys, i, &g);
    }
    g
}

/// A grid function carried as `e^{log_scale} · values`, renormalized per
/// letter so long words do not overflow.
#[derive(Debug, Clone)]
pub struct ScaledFunction {
    pub f: GridFunction,
    pub log_scale: f64,
}

impl ScaledFunction {
    pub fn new(f: GridFunction) -> Self {
        ScaledFunction { f, log_scale: 0.0 }
    }

    pub fn normalized(mut f: GridFunction) -> Self {
        let s = f.sup_norm();
        if s > 0.0 && s.is_finite() {
            let inv = 1.0 / s;
            for v in f.values_mut() {
                *v *= inv;
            }
            ScaledFunction { f, log_scale: s.ln() }
        } else {
            ScaledFunction { f, log_scale: 0.0 }
        }
    }

    pub fn apply_letter(&self, sys: &ExpandingSystem, letter: Letter) -> ScaledFunction {
        let g = apply_letter(sys, letter, &self.f);
        let mut out = ScaledFunction::normalized(g);
        out.log_scale += self.log_scale;
        out
    }

    pub fn apply_word(&self, sys: &ExpandingSystem, v: &Word) -> ScaledFunction {
        let mut cur = self.clone();
        for &i in v.letters() {
            cur = cur.apply_letter(sys, i);
        }
        cur
    }

    /// `log sup |L_v...|` of the represented function.
    pub fn log_sup(&self) -> f64 {
        self.log_scale + self.f.sup_norm().ln()
    }
}

/// `L_v(f)` against brute-force preimage enumeration; the oracle route.
pub fn apply_word_brute(sys: &ExpandingSystem, v: &Word, f: &GridFunction) -> Result<GridFunction> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for (idx, o) in out.iter_mut().enumerate() {
        let x = idx as f64 / n as f64;
        let pre = sys.inverse_branches(v, x)?;
        *o = pre.iter().map(|&(y, s)| s.exp() * f.eval(y)).sum();
    }
    Ok(GridFunction::from_values(out))
}

/// `P_u^v(f) = L_v(f·L_u(1)) / L_v(L_u(1))`.
///
/// The denominator is computed through the same letter chain as the
/// numerator, which is what makes `P_u^v(1) = 1` exact on the grid.
pub fn normalized_quotient(
    sys: &ExpandingSystem,
    u: &Word,
    v: &Word,
    f: &GridFunction,
) -> Result<GridFunction> {
    let g_u = apply_word(sys, u, &GridFunction::one(f.len()));
    quotient_with_weight(sys, &g_u, v, f)
}

/// `P_u^v(f)` given `g_u = L_u(1)` (shared across calls with the same prefix).
pub fn quotient_with_weight(
    sys: &ExpandingSystem,
    g_u: &GridFunction,
    v: &Word,
    f: &GridFunction,
) -> Result<GridFunction> {
    let num = apply_word(sys, v, &f.mul(g_u));
    let den = apply_word(sys, v, g_u);
    let min = den.min();
    if !(min > 0.0) {
        return Err(LabError::NonpositiveDenominator { min });
    }
    Ok(num.zip(&den, |a, b| a / b))
}

/// `max_x L_v(1)(x) / min_y L_v(1)(y)`, the empirical comparability constant.
pub fn comparability_ratio(sys: &ExpandingSystem, v: &Word, n: usize) -> f64 {
    let chain = ScaledFunction::new(GridFunction::one(n)).apply_word(sys, v);
    chain.f.max() / chain.f.min()
}

/// Hölder seminorm report for a grid function.
///
/// All quantities are maxima over a deterministic pair subsample (all pairs
/// for `N ≤ 512`, strided lags otherwise), hence lower bounds of the true
/// seminorms.
#[derive(Debug, Clone, Copy)]
pub struct HolderSeminorms {
    pub sup_norm: f64,
    /// `sup |f(x) − f(y)|` over sampled pairs.
    pub osc: f64,
    /// Global Hölder quotient over sampled pairs.
    pub d_alpha: f64,
    /// Hölder quotient restricted to pairs with `d < Δ^{−1/α}`.
    pub d_alpha_loc: f64,
    /// `D̄(f) = max{osc, D_α^loc / Δ}`.
    pub d_bar: f64,
}

/// Deterministic lag set: dense short lags, then geometric.
fn pair_lags(n: usize) -> Vec<usize> {
    if n <= 512 {
        return (1..=n / 2).collect();
    }
    let mut lags: Vec<usize> = (1..=32).collect();
    let mut l = 40usize;
    while l < n / 2 {
        lags.push(l);
        l = (l as f64 * 1.25) as usize + 1;
    }
    lags.push(n / 2);
    lags
}

pub fn holder_seminorms(mc: &MetricConstants, f: &GridFunction) -> HolderSeminorms {
    let n = f.len();
    let vals = f.values();
    let loc_scale = mc.locality_scale();
    let mut osc = 0.0_f64;
    let mut d_alpha = 0.0_f64;
    let mut d_alpha_loc = 0.0_f64;
    for lag in pair_lags(n) {
        let d = (lag as f64 / n as f64).min(1.0 - lag as f64 / n as f64);
        if d <= 0.0 {
            continue;
        }
        let dpow = d.powf(mc.alpha);
        let mut max_diff = 0.0_f64;
        for i in 0..n {
            let j = (i + lag) % n;
            max_diff = max_diff.max((vals[i] - vals[j]).abs());
        }
        osc = osc.max(max_diff);
        let q = max_diff / dpow;
        d_alpha = d_alpha.max(q);
        if d < loc_scale {
            d_alpha_loc = d_alpha_loc.max(q);
        }
    }
    HolderSeminorms {
        sup_norm: f.sup_norm(),
        osc,
        d_alpha,
        d_alpha_loc,
        d_bar: osc.max(d_alpha_loc / mc.delta),
    }
}
