//! Non-autonomous conformal iterated function systems on `[0,1]`.
//!
//! Each environment letter selects a finite family of contractions; the
//! `δ`-weighted composition operators
//!
//! ```text
//! L^δ_i(f) = Σ_j |φ'_{i,j}(·)|^δ · f ∘ φ_{i,j}
//! ```
//!
//! compose with the first letter outermost, and the annealed pressure
//! `P(δ) = lim (1/n) log ‖A^δ_n(1)‖∞` is strictly decreasing in `δ`. When
//! `P(0) > 0` its unique root is the Bowen dimension of the limit sets.
//! All-affine systems act as scalars on constants, which supplies exact
//! closed forms for every test.

use crate::annealed::MarkovEnvironment;
use crate::dynamics::{Letter, Word};
use crate::error::LabError;
use crate::fit::{self, LinearFit};
use crate::Result;
use rayon::prelude::*;

/// Monotone contraction of `[0,1]` with closed-form derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContractionMap {
    /// `x ↦ r·x + b`
    Affine { r: f64, b: f64 },
    /// `x ↦ c + r·x + (eps/2π)(1 − cos 2πx)`: smooth, fixes the endpoints
    /// of its image interval `[c, c+r]`, derivative `r + eps·sin(2πx)`.
    Perturbed { c: f64, r: f64, eps: f64 },
}

impl ContractionMap {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            ContractionMap::Affine { r, b } => r * x + b,
            ContractionMap::Perturbed { c, r, eps } => {
                let tau = 2.0 * std::f64::consts::PI;
                c + r * x + eps / tau * (1.0 - (tau * x).cos())
            }
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            ContractionMap::Affine { r, .. } => r,
            ContractionMap::Perturbed { r, eps, .. } => {
                r + eps * (2.0 * std::f64::consts::PI * x).sin()
            }
        }
    }

    fn deriv_bounds(&self) -> (f64, f64) {
        match *self {
            ContractionMap::Affine { r, .. } => (r, r),
            ContractionMap::Perturbed { r, eps, .. } => (r - eps.abs(), r + eps.abs()),
        }
    }

    /// Image interval (maps are increasing).
    fn image(&self) -> (f64, f64) {
        (self.eval(0.0), self.eval(1.0))
    }
}

/// A finite family of contraction systems driven by a Markov environment.
#[derive(Debug, Clone)]
pub struct Ncifs {
    systems: Vec<Vec<ContractionMap>>,
    pub env: MarkovEnvironment,
    /// Uniform contraction bounds `0 < η₋ ≤ |φ'| ≤ η₊ < 1`.
    pub eta_minus: f64,
    pub eta_plus: f64,
}

impl Ncifs {
    pub fn new(systems: Vec<Vec<ContractionMap>>, env: MarkovEnvironment) -> Result<Self> {
        if systems.len() != env.k() {
            return Err(LabError::InvalidSystem(format!(
                "{} systems but environment over {} letters",
                systems.len(),
                env.k()
            )));
        }
        let mut eta_minus = f64::INFINITY;
        let mut eta_plus = 0.0_f64;
        for (i, sys) in systems.iter().enumerate() {
            if sys.is_empty() {
                return Err(LabError::InvalidSystem(format!("system {} has no maps", i + 1)));
            }
            for map in sys {
                let (lo, hi) = map.deriv_bounds();
                if !(lo > 0.0 && hi < 1.0) {
                    return Err(LabError::InvalidSystem(format!(
                        "system {}: derivative range [{lo}, {hi}] outside (0,1)",
                        i + 1
                    )));
                }
                let (a, b) = map.image();
                if a < -1e-12 || b > 1.0 + 1e-12 {
                    return Err(LabError::InvalidSystem(format!(
                        "system {}: image [{a}, {b}] leaves [0,1]",
                        i + 1
                    )));
                }
                eta_minus = eta_minus.min(lo);
                eta_plus = eta_plus.max(hi);
            }
            // open set condition: image interiors pairwise disjoint
            let mut images: Vec<(f64, f64)> = sys.iter().map(|m| m.image()).collect();
            images.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            for w in images.windows(2) {
                if w[0].1 > w[1].0 + 1e-12 {
                    return Err(LabError::InvalidSystem(format!(
                        "system {}: images overlap ({:?} vs {:?})",
                        i + 1,
                        w[0],
                        w[1]
                    )));
                }
            }
        }
        Ok(Ncifs { systems, env, eta_minus, eta_plus })
    }

    pub fn k(&self) -> usize {
        self.systems.len()
    }

    pub fn system(&self, letter: Letter) -> &[ContractionMap] {
        &self.systems[letter as usize]
    }

    pub fn min_branching(&self) -> usize {
        self.systems.iter().map(|s| s.len()).min().unwrap()
    }
}

/// Sampled function on `[0,1]` with endpoint nodes (no wraparound).
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFunction {
    values: Vec<f64>,
}

pub const DEFAULT_INTERVAL_GRID: usize = 257;

impl IntervalFunction {
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        assert!(n >= 2);
        IntervalFunction {
            values: (0..n).map(|j| f(j as f64 / (n - 1) as f64)).collect(),
        }
    }

    pub fn one(n: usize) -> Self {
        IntervalFunction { values: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = x.clamp(0.0, 1.0) * (n - 1) as f64;
        let i = (t.floor() as usize).min(n - 2);
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> IntervalFunction {
        IntervalFunction { values: self.values.iter().map(|&v| c * v).collect() }
    }

    pub fn add(&self, other: &IntervalFunction) -> IntervalFunction {
        IntervalFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }
}

/// `L^δ_i(f)` at the interval nodes.
pub fn delta_operator_apply(
    ifs: &Ncifs,
    letter: Letter,
    delta: f64,
    f: &IntervalFunction,
) -> IntervalFunction {
    let maps = ifs.system(letter);
    let n = f.len();
    IntervalFunction {
        values: (0..n)
            .map(|j| {
                let x = j as f64 / (n - 1) as f64;
                maps.iter()
                    .map(|m| m.deriv(x).abs().powf(delta) * f.eval(m.eval(x)))
                    .sum()
            })
            .collect(),
    }
}

/// `L^δ_{ω_1...ω_n}(1) = L^δ_{ω_1} ∘ ... ∘ L^δ_{ω_n}(1)` with per-step
/// normalization; returns `log ‖·‖∞` at each depth `1..=n`.
fn quenched_log_sups(ifs: &Ncifs, omega: &Word, delta: f64, n: usize, grid: usize) -> Vec<f64> {
    // first letter outermost: build from the inside (deep letters first)
    let mut logs = vec![0.0; n + 1];
    for depth in 1..=n {
        let mut f = IntervalFunction::one(grid);
        let mut log_scale = 0.0;
        for j in (0..depth).rev() {
            f = delta_operator_apply(ifs, omega.letter(j), delta, &f);
            let s = f.sup_norm();
            log_scale += s.ln();
            f = f.scale(1.0 / s);
        }
        logs[depth] = log_scale;
    }
    logs
}

/// Annealed estimate of `log ‖A^δ_n(1)‖∞` for every `n ≤ n_max` by the
/// backward state recursion `G_j[b] = L^δ_b(Σ_c Q_{b,c} G_{j+1}[c])`.
fn annealed_log_sups(ifs: &Ncifs, delta: f64, n_max: usize, grid: usize) -> Vec<f64> {
    let k = ifs.k();
    let env = &ifs.env;
    let mut logs = vec![0.0; n_max + 1];
    for (n, log) in logs.iter_mut().enumerate().skip(1) {
        let mut slots: Vec<IntervalFunction> = (0..k)
            .map(|b| delta_operator_apply(ifs, b as Letter, delta, &IntervalFunction::one(grid)))
            .collect();
        let mut log_scale = 0.0;
        for _ in 1..n {
            let m = slots.iter().map(|s| s.sup_norm()).fold(0.0_f64, f64::max);
            log_scale += m.ln();
            let slots_scaled: Vec<IntervalFunction> =
                slots.iter().map(|s| s.scale(1.0 / m)).collect();
            slots = (0..k)
                .map(|b| {
                    let mut mix = IntervalFunction { values: vec![0.0; grid] };
                    for (c, s) in slots_scaled.iter().enumerate() {
                        let q = env.q()[b][c];
                        if q > 0.0 {
                            mix = mix.add(&s.scale(q));
                        }
                    }
                    delta_operator_apply(ifs, b as Letter, delta, &mix)
                })
                .collect();
        }
        let mut total = IntervalFunction { values: vec![0.0; grid] };
        for (b, s) in slots.iter().enumerate() {
            total = total.add(&s.scale(env.initial()[b]));
        }
        *log = log_scale + total.sup_norm().ln();
    }
    logs
}

/// Pressure estimate with a window-slope diagnostic.
#[derive(Debug, Clone, Copy)]
pub struct PressureEstimate {
    pub p_delta: f64,
    /// Difference between the slopes of the two window halves; a
    /// convergence diagnostic that should sit at the transient scale.
    pub slope_gap: f64,
}

/// `P(δ)` fitted as the slope of `log ‖A^δ_n(1)‖∞` over `[n_lo, n_hi]`.
pub fn annealed_pressure(
    ifs: &Ncifs,
    delta: f64,
    n_lo: usize,
    n_hi: usize,
    grid: usize,
) -> Result<PressureEstimate> {
    assert!(1 <= n_lo && n_lo + 3 < n_hi);
    let logs = annealed_log_sups(ifs, delta, n_hi, grid);
    let p_delta = (logs[n_hi] - logs[n_lo]) / (n_hi - n_lo) as f64;
    let mid = (n_lo + n_hi) / 2;
    let s1 = (logs[mid] - logs[n_lo]) / (mid - n_lo) as f64;
    let s2 = (logs[n_hi] - logs[mid]) / (n_hi - mid) as f64;
    Ok(PressureEstimate { p_delta, slope_gap: (s2 - s1).abs() })
}

/// Bowen-equation root data.
#[derive(Debug, Clone, Copy)]
pub struct BowenRoot {
    pub delta0: f64,
    pub bracket: (f64, f64),
    pub p0: f64,
}

/// Bisection on the strictly decreasing `P(δ)`.
pub fn bowen_root(ifs: &Ncifs, tol: f64, n_lo: usize, n_hi: usize, grid: usize) -> Result<BowenRoot> {
    let p0 = annealed_pressure(ifs, 0.0, n_lo, n_hi, grid)?.p_delta;
    if p0 <= 0.0 {
        return Err(LabError::Degenerate(format!(
            "P(0) = {p0:.6} is not positive; dimension not bracketed"
        )));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut iter = 0;
    while annealed_pressure(ifs, hi, n_lo, n_hi, grid)?.p_delta > 0.0 {
        lo = hi;
        hi *= 2.0;
        iter += 1;
        if iter > 12 {
            return Err(LabError::Degenerate("pressure stays positive up to δ = 4096".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if annealed_pressure(ifs, mid, n_lo, n_hi, grid)?.p_delta > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BowenRoot { delta0: 0.5 * (lo + hi), bracket: (lo, hi), p0 })
}

/// Quenched pressure along sampled environment paths.
#[derive(Debug, Clone)]
pub struct QuenchedPressure {
    pub per_sample: Vec<f64>,
    pub mean: f64,
    pub ci_halfwidth: f64,
}

pub fn quenched_pressure(
    ifs: &Ncifs,
    delta: f64,
    n_lo: usize,
    n_hi: usize,
    samples: usize,
    grid: usize,
    seed: u64,
) -> Result<QuenchedPressure> {
    assert!(samples >= 2 && n_lo < n_hi);
    let per_sample: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = fit::stream_rng(seed, s as u64);
            let omega = ifs.env.sample_path(&mut rng, n_hi);
            let logs = quenched_log_sups(ifs, &omega, delta, n_hi, grid);
            (logs[n_hi] - logs[n_lo]) / (n_hi - n_lo) as f64
        })
        .collect();
    Ok(QuenchedPressure {
        mean: fit::mean(&per_sample),
        ci_halfwidth: fit::ci_halfwidth(&per_sample),
        per_sample,
    })
}

/// Box-counting estimate of the limit-set dimension along one sampled path:
/// at cylinder depth `d` the limit set is covered by the depth-`d` cylinder
/// intervals; regress `log N(ε)` on `log 1/ε` over the cover diameters.
pub fn box_counting_dimension(
    ifs: &Ncifs,
    depth: usize,
    seed: u64,
) -> Result<LinearFit> {
    let mut rng = fit::stream_rng(seed, 0);
    let omega = ifs.env.sample_path(&mut rng, depth);
    // intervals as (left, width); compose maps along the path
    let mut intervals = vec![(0.0_f64, 1.0_f64)];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in (0..depth).rev() {
        let maps = ifs.system(omega.letter(j));
        let mut next = Vec::with_capacity(intervals.len() * maps.len());
        for &(lo, hi) in intervals.iter().map(|iv| (iv.0, iv.0 + iv.1)).collect::<Vec<_>>().iter() {
            for m in maps {
                let a = m.eval(lo);
                let b = m.eval(hi);
                next.push((a, b - a));
            }
        }
        intervals = next;
        let mean_width =
            intervals.iter().map(|iv| iv.1).sum::<f64>() / intervals.len() as f64;
        xs.push((1.0 / mean_width).ln());
        ys.push((intervals.len() as f64).ln());
    }
    fit::linear_fit(&xs, &ys)
}
