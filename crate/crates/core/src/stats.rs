//! Sequential limit-theorem diagnostics: the martingale coboundary
//! recursion, reverse-martingale orthogonality, variance growth, and an
//! empirical CLT along a fixed environment word.
//!
//! For an observable `f` and environment truncation `ω`, the centered
//! observables are `f_n = f − ∫ f∘T_{[ω]_n} dμ_ω`, the coboundaries satisfy
//! `h_0 = 0`, `h_{n+1} = P_{[ω]_n}^{[θⁿω]_1}(f_n + h_n)`, and the
//! increments
//!
//! ```text
//! U_n = f_n∘T_{[ω]_n} + h_n∘T_{[ω]_n} − h_{n+1}∘T_{[ω]_{n+1}}
//! ```
//!
//! form a reverse-martingale difference sequence. The recursion also yields
//! the variance bookkeeping for free: since
//! `h_l = Σ_{k<l} P_{[ω]_k}^{[θᵏω]_{l−k}} f_k` realizes the conditional
//! expectations, the running variance satisfies
//! `s_{l+1}² − s_l² = ∫ (f_l² + 2 h_l f_l)∘T_{[ω]_l} dμ_ω`.
//!
//! Integrals of `G∘T_{[ω]_n}` are never formed by composing `G` with the
//! word map on the grid (for `n` beyond `log N` the composition aliases);
//! they are evaluated through the prefix identity
//! `∫ G∘T_{[ω]_n} dμ_ω = ∫ G dμ_{[ω]_n, θⁿω}`, whose right side needs only
//! the prefix weight `L_{[ω]_n}(1)` already maintained by the recursion.
//!
//! The almost-sure Gaussian coupling itself is an existence statement and
//! is not constructed; these are its checkable ingredients.

use crate::dynamics::{ExpandingSystem, Word};
use crate::error::LabError;
use crate::fit::{self, GeometricFit};
use crate::grid::GridFunction;
use crate::measures::{prefix_integral, quenched_conformal, quenched_integral, quenched_quotient};
use crate::transfer::{apply_letter, ScaledFunction};
use crate::Result;
use rayon::prelude::*;
use statrs::function::erf::erf;

/// Depth buffer appended beyond `n_max` when evaluating quenched integrals.
const TAIL_DEPTH: usize = 26;

/// Node-index image of the grid under a single letter (affine maps send
/// nodes to nodes exactly).
fn letter_node_map(sys: &ExpandingSystem, letter: u8, n: usize) -> Vec<usize> {
    let m = sys.generator(letter).branches;
    (0..n).map(|j| (j * m) % n).collect()
}

/// The coboundary decomposition along a fixed `ω`.
#[derive(Debug, Clone)]
pub struct MartingaleDecomposition {
    pub omega: Word,
    pub n_max: usize,
    /// Centering constants `c_n = ∫ f∘T_{[ω]_n} dμ_ω` for `n = 0..n_max`.
    pub centers: Vec<f64>,
    /// Coboundaries `h_0, ..., h_{n_max}` as grid functions.
    pub h: Vec<GridFunction>,
    /// Running variances `s_n²` for `n = 0..n_max` (`s_0² = 0`).
    pub s_sq: Vec<f64>,
    /// `sup_n ‖h_n‖∞` over the computed range.
    pub sup_h_norm: f64,
    f: GridFunction,
    /// Prefix chains `L_{[ω]_n}(1)` for `n = 0..n_max+1`.
    prefix_chains: Vec<ScaledFunction>,
    /// Node-index images of `T_{[ω]_n}`, used only for the algebraic
    /// telescoping bookkeeping.
    node_maps: Vec<Vec<usize>>,
}

/// Build the decomposition; `omega` must provide `n_max + TAIL_DEPTH`
/// letters so every quenched integral converges below the test tolerances.
pub fn build_decomposition(
    sys: &ExpandingSystem,
    omega: &Word,
    f: &GridFunction,
    n_max: usize,
) -> Result<MartingaleDecomposition> {
    if omega.len() < n_max + TAIL_DEPTH {
        return Err(LabError::DegenerateFit(format!(
            "omega truncation {} too short for n_max {} (+{TAIL_DEPTH} tail)",
            omega.len(),
            n_max
        )));
    }
    let grid_n = f.len();

    let mut node_maps: Vec<Vec<usize>> = Vec::with_capacity(n_max + 2);
    node_maps.push((0..grid_n).collect());
    for n in 0..=n_max {
        let lm = letter_node_map(sys, omega.letter(n), grid_n);
        let prev = node_maps.last().unwrap();
        node_maps.push(prev.iter().map(|&j| lm[j]).collect());
    }

    let mut prefix_chains = Vec::with_capacity(n_max + 2);
    prefix_chains.push(ScaledFunction::new(GridFunction::one(grid_n)));
    for n in 0..=n_max {
        let last = prefix_chains.last().unwrap();
        prefix_chains.push(last.apply_letter(sys, omega.letter(n)));
    }

    let tail_of = |n: usize| omega.shifted(n).prefix(TAIL_DEPTH);
    let centers: Vec<f64> = (0..=n_max)
        .into_par_iter()
        .map(|n| prefix_integral(sys, &prefix_chains[n], &tail_of(n), f))
        .collect::<Result<Vec<_>>>()?;

    let mut h = vec![GridFunction::constant(grid_n, 0.0)];
    let mut s_sq = vec![0.0];
    let mut sup_h: f64 = 0.0;
    for n in 0..n_max {
        let f_n = f.map(|v| v - centers[n]);
        // variance increment ∫ (f_n² + 2 h_n f_n) dμ_{[ω]_n, θⁿω}
        let h_n = &h[n];
        let integrand = f_n.zip(h_n, |fv, hv| fv * fv + 2.0 * hv * fv);
        let inc = prefix_integral(sys, &prefix_chains[n], &tail_of(n), &integrand)?;
        s_sq.push(s_sq[n] + inc);

        let letter = omega.letter(n);
        let g = &prefix_chains[n];
        let g_next = &prefix_chains[n + 1];
        let num = apply_letter(sys, letter, &f_n.add(h_n).mul(&g.f));
        let scale = (g.log_scale - g_next.log_scale).exp();
        let h_next = num.zip(&g_next.f, |a, b| scale * a / b);
        sup_h = sup_h.max(h_next.sup_norm());
        h.push(h_next);
    }
    Ok(MartingaleDecomposition {
        omega: omega.clone(),
        n_max,
        centers,
        h,
        s_sq,
        sup_h_norm: sup_h,
        f: f.clone(),
        prefix_chains,
        node_maps,
    })
}

impl MartingaleDecomposition {
    /// `f_n` as a grid function.
    pub fn f_n(&self, n: usize) -> GridFunction {
        let c = self.centers[n];
        self.f.map(|v| v - c)
    }

    /// `U_n` evaluated on the grid through the composed node maps.
    pub fn u_n(&self, n: usize) -> GridFunction {
        let f_n = self.f_n(n);
        let h_n = &self.h[n];
        let h_next = &self.h[n + 1];
        let vals = (0..self.f.len())
            .map(|j| {
                let jn = self.node_maps[n][j];
                let jn1 = self.node_maps[n + 1][j];
                f_n.values()[jn] + h_n.values()[jn] - h_next.values()[jn1]
            })
            .collect();
        GridFunction::from_values(vals)
    }

    /// Exact telescoping residual
    /// `‖Σ_{k<n} U_k − (Σ_{k<n} f_k∘T_{[ω]_k} − h_n∘T_{[ω]_n})‖∞`.
    pub fn telescoping_residual(&self, n: usize) -> f64 {
        let grid_n = self.f.len();
        let mut lhs = GridFunction::constant(grid_n, 0.0);
        for k in 0..n {
            lhs = lhs.add(&self.u_n(k));
        }
        let mut rhs = GridFunction::constant(grid_n, 0.0);
        for k in 0..n {
            let f_k = self.f_n(k);
            let vals = (0..grid_n)
                .map(|j| f_k.values()[self.node_maps[k][j]])
                .collect();
            rhs = rhs.add(&GridFunction::from_values(vals));
        }
        let h_n = &self.h[n];
        let h_comp = GridFunction::from_values(
            (0..grid_n)
                .map(|j| h_n.values()[self.node_maps[n][j]])
                .collect(),
        );
        lhs.sup_dist(&rhs.sub(&h_comp))
    }

    /// Reverse-martingale pairing `∫ U_n · ψ∘T_{[ω]_{n+1}} dμ_ω`, evaluated
    /// through the prefix identity; the conditional-expectation property
    /// makes it vanish.
    pub fn reverse_martingale_residual(
        &self,
        sys: &ExpandingSystem,
        n: usize,
        psi: &GridFunction,
    ) -> Result<f64> {
        let grid_n = self.f.len();
        let letter_map = letter_node_map(sys, self.omega.letter(n), grid_n);
        let psi_letter = GridFunction::from_values(
            (0..grid_n).map(|j| psi.values()[letter_map[j]]).collect(),
        );
        let term1 = self.f_n(n).add(&self.h[n]).mul(&psi_letter);
        let term2 = self.h[n + 1].mul(psi);
        let tail_n = self.omega.shifted(n).prefix(TAIL_DEPTH);
        let tail_n1 = self.omega.shifted(n + 1).prefix(TAIL_DEPTH);
        let a = prefix_integral(sys, &self.prefix_chains[n], &tail_n, &term1)?;
        let b = prefix_integral(sys, &self.prefix_chains[n + 1], &tail_n1, &term2)?;
        Ok(a - b)
    }

    /// Conditional-expectation cross-check:
    /// `‖P_{[ω]_n}^{[θⁿω]_1}(f_n + h_n) − h_{n+1}‖∞` (zero by construction).
    pub fn conditional_expectation_residual(
        &self,
        sys: &ExpandingSystem,
        n: usize,
    ) -> Result<f64> {
        let arg = self.f_n(n).add(&self.h[n]);
        let p = crate::transfer::normalized_quotient(
            sys,
            &self.omega.prefix(n),
            &Word::new(vec![self.omega.letter(n)]),
            &arg,
        )?;
        Ok(p.sup_dist(&self.h[n + 1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CltStatus {
    Ok,
    /// Variance too small to normalize: constant-like observable.
    Degenerate,
}

#[derive(Debug, Clone, Copy)]
pub struct CltReport {
    pub ks_distance: f64,
    pub variance_ratio: f64,
    pub status: CltStatus,
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

/// Orbit denominator: a prime with 2 and 3 as primitive roots, so integer
/// orbits `k ↦ m·k mod q` of the affine maps are exact and have period
/// `q − 1 ≈ 10^18`. Float orbits are useless here: the doubling map shifts
/// mantissa bits out and every IEEE orbit collapses to 0 within ~52 steps.
const ORBIT_DENOMINATOR: u64 = 999_999_999_999_999_989;

/// Empirical CLT for the normalized Birkhoff sums
/// `Σ_{k<n} f_k(T_{[ω]_k} x) / s_n` under `x ~ μ_ω`.
pub fn quenched_clt_check(
    sys: &ExpandingSystem,
    decomp: &MartingaleDecomposition,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<CltReport> {
    assert!(n <= decomp.n_max);
    let s_sq = decomp.s_sq[n];
    if s_sq < 1e-12 {
        return Ok(CltReport { ks_distance: 0.0, variance_ratio: 1.0, status: CltStatus::Degenerate });
    }
    let grid_n = decomp.f.len();
    let depth = (n + TAIL_DEPTH).min(decomp.omega.len());
    let mu = quenched_conformal(sys, &Word::empty(), &decomp.omega, depth, grid_n)?;
    let s_n = s_sq.sqrt();
    let q = ORBIT_DENOMINATOR;
    let mut sums: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = fit::stream_rng(seed, i as u64);
            let x0 = mu.measure.sample(&mut rng);
            let mut k_num = ((x0 * q as f64) as u64) % q;
            let mut acc = 0.0;
            for k in 0..n {
                let x = k_num as f64 / q as f64;
                acc += decomp.f.eval(x) - decomp.centers[k];
                let m = sys.generator(decomp.omega.letter(k)).branches as u64;
                k_num = (m * k_num) % q;
            }
            acc / s_n
        })
        .collect();
    sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sums.len() as f64;
    let mut ks = 0.0_f64;
    for (i, &z) in sums.iter().enumerate() {
        let phi = normal_cdf(z);
        ks = ks.max((((i + 1) as f64) / m - phi).abs());
        ks = ks.max((phi - (i as f64) / m).abs());
    }
    let emp_var = {
        let mean = sums.iter().sum::<f64>() / m;
        sums.iter().map(|&z| (z - mean) * (z - mean)).sum::<f64>() / (m - 1.0)
    };
    Ok(CltReport { ks_distance: ks, variance_ratio: emp_var, status: CltStatus::Ok })
}

/// Sup-norm decay of `P_∅^{[ω]_n}(f) − ∫f dμ_ω` against `n`.
#[derive(Debug, Clone)]
pub struct CorrelationReport {
    pub ns: Vec<usize>,
    pub errors: Vec<f64>,
    pub fit: GeometricFit,
}

pub fn quenched_correlation_decay(
    sys: &ExpandingSystem,
    omega: &Word,
    f: &GridFunction,
    ns: &[usize],
) -> Result<CorrelationReport> {
    let n_max = *ns.iter().max().unwrap();
    assert!(omega.len() >= n_max + TAIL_DEPTH);
    let limit = quenched_integral(sys, &Word::empty(), &omega.prefix(n_max + TAIL_DEPTH), f)?;
    let mut errors = Vec::with_capacity(ns.len());
    for &n in ns {
        let p = quenched_quotient(sys, &Word::empty(), &omega.prefix(n), f)?;
        errors.push(
            p.values()
                .iter()
                .fold(0.0_f64, |m, &v| m.max((v - limit).abs())),
        );
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let fit = fit::geometric_fit(&xs, &errors)?;
    Ok(CorrelationReport { ns: ns.to_vec(), errors, fit })
}

/// Dyadic multi-scale observable `Σ_j 2^{-j} cos(2π 2^j x)`: under the
/// doubling letter the normalized operator shifts modes down one dyadic
/// level, so the correlation decay rate is exactly 1/2.
pub fn dyadic_observable(grid_n: usize, levels: usize) -> GridFunction {
    GridFunction::from_fn(grid_n, |x| {
        (0..levels)
            .map(|j| {
                let freq = (1u64 << j) as f64;
                0.5_f64.powi(j as i32)
                    * (2.0 * std::f64::consts::PI * freq * x).cos()
            })
            .sum()
    })
}
