//! Averaged transfer operators over a Markov environment.
//!
//! The annealed operator `A_n(f) = Σ_{|w|=n} ρ([w]) L_w(f)` is computed by
//! a state-indexed recursion: with `H_1[b] = ρ_0(b)·L_b(f)` and
//!
//! ```text
//! H_{j+1}[c] = L_c( Σ_b Q_{b,c} H_j[b] ),      A_n(f) = Σ_b H_n[b],
//! ```
//!
//! each slot `H_j[b]` carries the cylinder-weighted sum over words ending
//! in letter `b`, so the cost is `O(n·k²)` operator applications rather
//! than `O(kⁿ)`. The family does not form a semigroup (`A_{n+m} ≠ A_n∘A_m`
//! unless the environment is Bernoulli); growth and convergence are instead
//! governed by the Perron data `(β, g_o, m)` of the weighted shift operator
//!
//! ```text
//! ι(g)(ω) = Σ_i λ_{i,ω} p_i(ω) g(iω),
//! ```
//!
//! assembled here on depth-`m` cylinders with tails frozen at a fixed
//! representative.

use crate::dynamics::{ExpandingSystem, Letter, Word};
use crate::eigen::{power_iteration, SparseMatrix};
use crate::error::LabError;
use crate::fit::{self, GeometricFit};
use crate::grid::GridFunction;
use crate::measures::{
    bilateral_equilibrium, bin_atom, prefix_integral, quenched_integral, wasserstein_euclid,
    GridMeasure,
};
use crate::transfer::{apply_letter, ScaledFunction};
use crate::Result;
use rand::Rng;
use rayon::prelude::*;

/// A Markov measure on the one-sided shift: initial vector plus a
/// row-stochastic, primitive transition matrix.
#[derive(Debug, Clone)]
pub struct MarkovEnvironment {
    initial: Vec<f64>,
    q: Vec<Vec<f64>>,
    pub invariant: bool,
}

impl MarkovEnvironment {
    pub fn new(initial: Vec<f64>, q: Vec<Vec<f64>>, invariant: bool) -> Result<Self> {
        let k = initial.len();
        if k == 0 || q.len() != k || q.iter().any(|row| row.len() != k) {
            return Err(LabError::InvalidEnvironment("shape mismatch".into()));
        }
        if initial.iter().any(|&p| p <= 0.0) {
            return Err(LabError::InvalidEnvironment(
                "initial vector must be strictly positive".into(),
            ));
        }
        if (initial.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(LabError::InvalidEnvironment("initial vector must sum to 1".into()));
        }
        for (i, row) in q.iter().enumerate() {
            if row.iter().any(|&p| p < 0.0) {
                return Err(LabError::InvalidEnvironment(format!("negative entry in row {i}")));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(LabError::InvalidEnvironment(format!("row {i} does not sum to 1")));
            }
        }
        // primitivity: some boolean power of Q is strictly positive
        let mut reach: Vec<Vec<bool>> =
            q.iter().map(|row| row.iter().map(|&p| p > 0.0).collect()).collect();
        let mut primitive = false;
        for _ in 0..(2 * k * k + 2) {
            if reach.iter().all(|row| row.iter().all(|&b| b)) {
                primitive = true;
                break;
            }
            let mut next = vec![vec![false; k]; k];
            for i in 0..k {
                for j in 0..k {
                    next[i][j] = (0..k).any(|t| reach[i][t] && q[t][j] > 0.0);
                }
            }
            reach = next;
        }
        if !primitive {
            return Err(LabError::InvalidEnvironment("transition matrix is not primitive".into()));
        }
        if invariant {
            for j in 0..k {
                let v: f64 = (0..k).map(|i| initial[i] * q[i][j]).sum();
                if (v - initial[j]).abs() > 1e-12 {
                    return Err(LabError::InvalidEnvironment(format!(
                        "flagged invariant but (initial·Q − initial)[{j}] = {:.3e}",
                        v - initial[j]
                    )));
                }
            }
        }
        Ok(MarkovEnvironment { initial, q, invariant })
    }

    pub fn k(&self) -> usize {
        self.initial.len()
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn is_bernoulli(&self) -> bool {
        self.q.iter().all(|row| {
            row.iter()
                .zip(&self.initial)
                .all(|(&a, &b)| (a - b).abs() < 1e-14)
        })
    }

    /// `ρ([w]) = ρ_0(w_1) Π Q_{w_j w_{j+1}}`.
    pub fn cylinder_mass(&self, w: &Word) -> f64 {
        if w.is_empty() {
            return 1.0;
        }
        let mut m = self.initial[w.letter(0) as usize];
        for j in 1..w.len() {
            m *= self.q[w.letter(j - 1) as usize][w.letter(j) as usize];
        }
        m
    }

    /// Radon–Nikodym cocycle `p_i(ω) = ρ_0(i) Q_{i,ω_1} / ρ_0(ω_1)` for the
    /// Markov measure (depends on `ω` through its first letter only).
    pub fn p_letter(&self, i: Letter, omega_first: Letter) -> f64 {
        self.initial[i as usize] * self.q[i as usize][omega_first as usize]
            / self.initial[omega_first as usize]
    }

    pub fn sample_path(&self, rng: &mut impl Rng, len: usize) -> Word {
        let mut w = Word::empty();
        if len == 0 {
            return w;
        }
        let mut cur = sample_index(&self.initial, rng);
        w.push(cur as Letter);
        for _ in 1..len {
            cur = sample_index(&self.q[cur], rng);
            w.push(cur as Letter);
        }
        w
    }

    /// Stationary vector of `Q` (power iteration on the transpose).
    pub fn stationary(&self) -> Vec<f64> {
        let k = self.k();
        let mut v = vec![1.0 / k as f64; k];
        for _ in 0..20_000 {
            let mut next = vec![0.0; k];
            for (i, &vi) in v.iter().enumerate() {
                for j in 0..k {
                    next[j] += vi * self.q[i][j];
                }
            }
            let s: f64 = next.iter().sum();
            next.iter_mut().for_each(|x| *x /= s);
            let diff: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            if diff < 1e-15 {
                break;
            }
        }
        v
    }
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn check_alphabets(sys: &ExpandingSystem, env: &MarkovEnvironment) -> Result<()> {
    if sys.alphabet_size() != env.k() {
        return Err(LabError::InvalidEnvironment(format!(
            "environment over {} letters, system over {}",
            env.k(),
            sys.alphabet_size()
        )));
    }
    Ok(())
}

/// `A_n(f)` by the state-indexed recursion (unscaled; fine for small `n`).
pub fn annealed_apply(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    n: usize,
    f: &GridFunction,
) -> Result<GridFunction> {
    let (g, log_scale) = annealed_apply_scaled(sys, env, n, f)?;
    Ok(g.scale(log_scale.exp()))
}

/// `A_n(f)` as `(normalized function, log scale)`; survives `n ≈ 40` at
/// `β > 1`.
pub fn annealed_apply_scaled(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    n: usize,
    f: &GridFunction,
) -> Result<(GridFunction, f64)> {
    let sums = annealed_sweep(sys, env, n, f, &[n])?;
    Ok(sums.into_iter().next().unwrap().1)
}

/// One DP sweep reporting `A_n(f)` at every requested depth.
pub fn annealed_sweep(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    n_max: usize,
    f: &GridFunction,
    wanted: &[usize],
) -> Result<Vec<(usize, (GridFunction, f64))>> {
    check_alphabets(sys, env)?;
    assert!(n_max >= 1 && wanted.iter().all(|&n| n >= 1 && n <= n_max));
    let k = env.k();
    let grid_n = f.len();
    let mut slots: Vec<GridFunction> = (0..k)
        .map(|b| apply_letter(sys, b as Letter, f).scale(env.initial[b]))
        .collect();
    let mut log_scale = 0.0;
    let mut out = Vec::new();
    let record = |slots: &[GridFunction], log_scale: f64, n: usize,
                  out: &mut Vec<(usize, (GridFunction, f64))>| {
        if wanted.contains(&n) {
            let mut total = GridFunction::constant(grid_n, 0.0);
            for s in slots {
                total = total.add(s);
            }
            out.push((n, (total, log_scale)));
        }
    };
    record(&slots, log_scale, 1, &mut out);
    for j in 1..n_max {
        // joint normalization keeps slot ratios intact
        let m = slots.iter().map(|s| s.sup_norm()).fold(0.0_f64, f64::max);
        if m > 0.0 && (m > 1e100 || m < 1e-100) {
            let inv = 1.0 / m;
            for s in &mut slots {
                *s = s.scale(inv);
            }
            log_scale += m.ln();
        }
        let next: Vec<GridFunction> = (0..k)
            .map(|c| {
                let mut mix = GridFunction::constant(grid_n, 0.0);
                for (b, s) in slots.iter().enumerate() {
                    let q = env.q[b][c];
                    if q > 0.0 {
                        mix = mix.add(&s.scale(q));
                    }
                }
                apply_letter(sys, c as Letter, &mix)
            })
            .collect();
        slots = next;
        record(&slots, log_scale, j + 1, &mut out);
    }
    Ok(out)
}

/// Literal word-sum oracle, `O(kⁿ)`.
pub fn annealed_brute_force(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    n: usize,
    f: &GridFunction,
) -> Result<GridFunction> {
    check_alphabets(sys, env)?;
    let k = env.k();
    let mut total = GridFunction::constant(f.len(), 0.0);
    let mut word = vec![0u8; n];
    loop {
        let w = Word::new(word.clone());
        let mass = env.cylinder_mass(&w);
        if mass > 0.0 {
            total = total.add(&crate::transfer::apply_word(sys, &w, f).scale(mass));
        }
        // odometer increment
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            word[pos] += 1;
            if (word[pos] as usize) < k {
                break;
            }
            word[pos] = 0;
        }
    }
}

/// Perron data of the depth-`m` cylinder approximation of `ι`.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub depth: usize,
    pub beta: f64,
    /// Perron value of the depth-`(m−1)` matrix: truncation diagnostic.
    pub beta_coarser: f64,
    pub states: Vec<Word>,
    pub g_o: Vec<f64>,
    pub m_meas: Vec<f64>,
    pub tail: Word,
    pub quench_depth: usize,
}

impl SpectralData {
    /// `π(f) = Σ_w m([w]) · μ_{w·tail}(f)`.
    pub fn pi(&self, sys: &ExpandingSystem, f: &GridFunction) -> Result<f64> {
        let mut acc = 0.0;
        for (w, &mw) in self.states.iter().zip(&self.m_meas) {
            if mw == 0.0 {
                continue;
            }
            let omega = w.concat(&Word::cyclic(&self.tail, self.quench_depth));
            acc += mw * quenched_integral(sys, &Word::empty(), &omega, f)?;
        }
        Ok(acc)
    }
}

fn enumerate_states(k: usize, depth: usize) -> Vec<Word> {
    let mut states = vec![Word::empty()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(states.len() * k);
        for w in &states {
            for i in 0..k {
                let mut v = w.clone();
                v.push(i as Letter);
                next.push(v);
            }
        }
        states = next;
    }
    states
}

fn iota_matrix(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    depth: usize,
    tail: &Word,
    quench_depth: usize,
) -> Result<(Vec<Word>, SparseMatrix)> {
    let k = env.k();
    let states = enumerate_states(k, depth);
    let index = |w: &Word| -> usize {
        w.letters()
            .iter()
            .fold(0usize, |acc, &l| acc * k + l as usize)
    };
    let grid_n = crate::grid::DEFAULT_GRID / 2; // λ integrals need modest resolution
    let l_one: Vec<GridFunction> = (0..k)
        .map(|i| apply_letter(sys, i as Letter, &GridFunction::one(grid_n)))
        .collect();
    // λ_{i, w·tail} for every state and letter
    let lambdas: Vec<Vec<f64>> = states
        .par_iter()
        .map(|w| {
            let omega = w.concat(&Word::cyclic(tail, quench_depth));
            (0..k)
                .map(|i| quenched_integral(sys, &Word::empty(), &omega, &l_one[i]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = vec![Vec::new(); states.len()];
    for (si, w) in states.iter().enumerate() {
        let omega_first = w.letter(0);
        for i in 0..k {
            let p = env.p_letter(i as Letter, omega_first);
            if p == 0.0 {
                continue;
            }
            let mut shifted = Word::new(vec![i as Letter]);
            for j in 0..depth - 1 {
                shifted.push(w.letter(j));
            }
            rows[si].push((index(&shifted) as u32, lambdas[si][i] * p));
        }
    }
    Ok((states, SparseMatrix::from_rows(rows.len(), rows)))
}

/// Assemble and solve the `ι` eigenproblem at cylinder depth `m`.
pub fn iota_spectrum(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    depth: usize,
    tail: &Word,
    quench_depth: usize,
) -> Result<SpectralData> {
    check_alphabets(sys, env)?;
    assert!(depth >= 1, "cylinder depth must be positive");
    let (states, m) = iota_matrix(sys, env, depth, tail, quench_depth)?;
    let (beta, g_o) = power_iteration(&m, 1e-13, 200_000)?;
    let (beta_adj, mut m_meas) = power_iteration(&m.transpose(), 1e-13, 200_000)?;
    if (beta - beta_adj).abs() > 1e-8 * beta.max(1.0) {
        return Err(LabError::EigenNoConvergence(0));
    }
    let mass: f64 = m_meas.iter().sum();
    m_meas.iter_mut().for_each(|x| *x /= mass);
    // m(g_o) = 1
    let pairing: f64 = g_o.iter().zip(&m_meas).map(|(&g, &w)| g * w).sum();
    let g_o: Vec<f64> = g_o.into_iter().map(|g| g / pairing).collect();
    let beta_coarser = if depth > 1 {
        let (_, mc) = iota_matrix(sys, env, depth - 1, tail, quench_depth)?;
        power_iteration(&mc, 1e-13, 200_000)?.0
    } else {
        beta
    };
    Ok(SpectralData {
        depth,
        beta,
        beta_coarser,
        states,
        g_o,
        m_meas,
        tail: tail.clone(),
        quench_depth,
    })
}

/// Report of the annealed convergence experiment.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Growth rate of `‖A_n(1)‖∞` fitted over the reference window.
    pub beta_hat: f64,
    /// Converged `β^{-n} A_n(1)` at the reference depth, sup-normalized.
    pub h: GridFunction,
    /// Self-consistent estimate of `∫f dπ` (converged ratio).
    pub pi_f: f64,
    pub ns: Vec<usize>,
    pub sups: Vec<f64>,
    /// `None` when the sups sit at float noise (identity-like observables).
    pub fit: Option<GeometricFit>,
}

/// Checks `sup_x |A_n(f)/(βⁿ h) − π(f)|` for geometric decay on
/// `n ∈ [n_lo, n_hi]`.
pub fn annealed_convergence(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    f: &GridFunction,
    n_lo: usize,
    n_hi: usize,
) -> Result<ConvergenceReport> {
    assert!(2 <= n_lo && n_lo < n_hi);
    let n_ref = n_hi + 8;
    let wanted: Vec<usize> = (n_lo..=n_ref).collect();
    let ones = GridFunction::one(f.len());
    let a_one = annealed_sweep(sys, env, n_ref, &ones, &wanted)?;
    let a_f = annealed_sweep(sys, env, n_ref, f, &wanted)?;
    let log_sup = |entry: &(usize, (GridFunction, f64))| entry.1 .1 + entry.1 .0.sup_norm().ln();
    // β̂ from the tail slope of log‖A_n(1)‖∞
    let first = a_one.iter().find(|e| e.0 == n_hi).unwrap();
    let last = a_one.iter().find(|e| e.0 == n_ref).unwrap();
    let beta_hat = ((log_sup(last) - log_sup(first)) / (n_ref - n_hi) as f64).exp();
    // reference profile h and the self-consistent π(f)
    let (h_raw, _) = &a_one.iter().find(|e| e.0 == n_ref).unwrap().1;
    let h = h_raw.scale(1.0 / h_raw.sup_norm());
    let ratio_at = |n: usize| -> GridFunction {
        let (gf, lf) = &a_f.iter().find(|e| e.0 == n).unwrap().1;
        let (g1, l1) = &a_one.iter().find(|e| e.0 == n).unwrap().1;
        let scale = (lf - l1).exp();
        gf.zip(g1, |a, b| scale * a / b)
    };
    let pi_f = ratio_at(n_ref).mean();
    let ns: Vec<usize> = (n_lo..=n_hi).collect();
    let mut sups = Vec::with_capacity(ns.len());
    for &n in &ns {
        // sup_x |A_n(f)/(βⁿh) − π| with h realized as A_nref(1)/β̂^{nref}:
        // the ratio A_n(f)(x)/A_n(1)(x) times A_n(1)/(β̂ⁿ h) converges to π;
        // measure the plain quotient against the limit, which is the same
        // decay with the h-profile error folded in
        let r = ratio_at(n);
        let sup = r
            .values()
            .iter()
            .fold(0.0_f64, |m, &v| m.max((v - pi_f).abs()));
        sups.push(sup);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let fit = if sups.iter().all(|&s| s < 1e-12) {
        None
    } else {
        Some(fit::geometric_fit(&xs, &sups)?)
    };
    Ok(ConvergenceReport { beta_hat, h, pi_f, ns, sups, fit })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayStatus {
    Fitted,
    /// Discrepancies never rose above Monte-Carlo noise.
    NoSignal,
}

/// Report of the annealed correlation-decay experiment.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub ns: Vec<usize>,
    pub discrepancy: Vec<f64>,
    pub ci: Vec<f64>,
    pub pi_tilde_f: f64,
    pub mean_mu_g: f64,
    pub fit: Option<GeometricFit>,
    pub status: DecayStatus,
}

/// Monte-Carlo check of annealed decay of correlations:
/// `|E_ρ μ_ω(f∘T_{[ω]_n} · g) − π̃(f)·E_ρ μ_ω(g)|` against `n`, with common
/// random numbers across `n` and a CI-aware fit.
pub fn annealed_decay(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    f: &GridFunction,
    g: &GridFunction,
    ns: &[usize],
    mc_samples: usize,
    seed: u64,
) -> Result<DecayReport> {
    check_alphabets(sys, env)?;
    if !env.invariant {
        return Err(LabError::InvalidEnvironment(
            "annealed decay requires a shift-invariant environment".into(),
        ));
    }
    let tail = 26usize;
    let n_max = *ns.iter().max().unwrap();
    let grid_n = f.len();

    // per-sample quenched integrals with common random numbers across n.
    // μ_ω(f∘T_{[ω]_n}·g) is evaluated by conditioning g on T_{[ω]_n}^{-1}B:
    //   ∫ f∘T_v·g dμ_ω = ∫ f · P_∅^v(g) dμ_{v, θⁿω},
    // which keeps every factor resolvable on the grid (composing f with the
    // word map directly would alias once the branch product exceeds N).
    let per_sample: Vec<(Vec<f64>, f64, f64)> = (0..mc_samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = fit::stream_rng(seed, s as u64);
            let omega = env.sample_path(&mut rng, n_max + tail);
            let mut lhs = Vec::with_capacity(ns.len());
            let mut den = ScaledFunction::new(GridFunction::one(grid_n));
            let mut num_g = ScaledFunction::new(g.clone());
            for j in 1..=n_max {
                let letter = omega.letter(j - 1);
                den = den.apply_letter(sys, letter);
                num_g = num_g.apply_letter(sys, letter);
                if ns.contains(&j) {
                    let scale = (num_g.log_scale - den.log_scale).exp();
                    let p_g = num_g.f.zip(&den.f, |a, b| scale * a / b);
                    let integrand = f.mul(&p_g);
                    let tail_word = omega.shifted(j).prefix(tail);
                    lhs.push(prefix_integral(sys, &den, &tail_word, &integrand)?);
                }
            }
            let mu_g = quenched_integral(sys, &Word::empty(), &omega, g)?;
            // two-sided stationary sample for π̃: split a path in the middle
            let two_sided = env.sample_path(&mut rng, 2 * tail);
            let sigma = two_sided.prefix(tail);
            let omega_fwd = two_sided.shifted(tail);
            let eq = bilateral_equilibrium(sys, &sigma, &omega_fwd, tail, tail, grid_n)?;
            let pi_tilde_sample = eq.measure.integrate(f);
            Ok((lhs, mu_g, pi_tilde_sample))
        })
        .collect::<Result<Vec<_>>>()?;

    let mu_gs: Vec<f64> = per_sample.iter().map(|r| r.1).collect();
    let pi_samples: Vec<f64> = per_sample.iter().map(|r| r.2).collect();
    let mean_mu_g = fit::mean(&mu_gs);
    let pi_tilde_f = fit::mean(&pi_samples);
    let target = pi_tilde_f * mean_mu_g;
    let target_ci =
        fit::ci_halfwidth(&pi_samples) * mean_mu_g.abs() + fit::ci_halfwidth(&mu_gs) * pi_tilde_f.abs();

    let mut discrepancy = Vec::with_capacity(ns.len());
    let mut ci = Vec::with_capacity(ns.len());
    for (j, _) in ns.iter().enumerate() {
        let vals: Vec<f64> = per_sample.iter().map(|r| r.0[j]).collect();
        discrepancy.push((fit::mean(&vals) - target).abs());
        ci.push(fit::ci_halfwidth(&vals) + target_ci);
    }
    // CI-aware fit: keep points where the signal clears its noise
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ((&n, &d), &c) in ns.iter().zip(&discrepancy).zip(&ci) {
        if d > c {
            xs.push(n as f64);
            ys.push(d);
        }
    }
    let (fit, status) = if xs.len() >= 3 {
        (Some(fit::geometric_fit(&xs, &ys)?), DecayStatus::Fitted)
    } else {
        (None, DecayStatus::NoSignal)
    };
    Ok(DecayReport {
        ns: ns.to_vec(),
        discrepancy,
        ci,
        pi_tilde_f,
        mean_mu_g,
        fit,
        status,
    })
}

/// Equidistribution of weighted preimages: `ν_n^x = A_n^* δ_x / A_n(1)(x)`.
#[derive(Debug, Clone)]
pub struct EquiReport {
    pub ns: Vec<usize>,
    /// `W(ν_n^{x₁}, ν_n^{x₂})` per n.
    pub w_pair: Vec<f64>,
    /// `W(ν_n^{x₁}, ν_ref)` per n, against the deepest iterate.
    pub w_limit: Vec<f64>,
    /// `(1/n) log ‖A_n(1)‖∞` per n.
    pub pressure: Vec<f64>,
    pub limit: GridMeasure,
    pub pair_fit: GeometricFit,
}

pub fn equidistribution(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    x_node: usize,
    ns: &[usize],
    grid_n: usize,
) -> Result<EquiReport> {
    check_alphabets(sys, env)?;
    let n_max = *ns.iter().max().unwrap();
    let x2_node = (x_node + (grid_n as f64 * 0.382) as usize) % grid_n;
    let nu_1 = dual_dp_sweep(sys, env, x_node, ns, grid_n)?;
    let nu_2 = dual_dp_sweep(sys, env, x2_node, ns, grid_n)?;
    let limit = nu_1.last().unwrap().1.clone();
    let ones = GridFunction::one(grid_n);
    let sweep = annealed_sweep(sys, env, n_max, &ones, ns)?;
    let mut w_pair = Vec::new();
    let mut w_limit = Vec::new();
    let mut pressure = Vec::new();
    for (j, &n) in ns.iter().enumerate() {
        w_pair.push(wasserstein_euclid(&nu_1[j].1, &nu_2[j].1)?);
        w_limit.push(wasserstein_euclid(&nu_1[j].1, &limit)?);
        let (gf, ls) = &sweep[j].1;
        pressure.push((ls + gf.sup_norm().ln()) / n as f64);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let pair_fit = fit::geometric_fit(&xs, &w_pair)?;
    Ok(EquiReport { ns: ns.to_vec(), w_pair, w_limit, pressure, limit, pair_fit })
}

/// Backward dual recursion `F_j[b] = L_b^*(Σ_c Q_{b,c} F_{j+1}[c])`,
/// `F_n[b] = L_b^*(δ_x)`, giving `A_n^*δ_x = Σ_b ρ_0(b) F_1[b]` after
/// normalization. Mass is renormalized per step; the final measure is the
/// probability `ν_n^x` either way.
fn dual_dp_sweep(
    sys: &ExpandingSystem,
    env: &MarkovEnvironment,
    x_node: usize,
    wanted: &[usize],
    grid_n: usize,
) -> Result<Vec<(usize, GridMeasure)>> {
    let k = env.k();
    let mut out = Vec::new();
    for &n in wanted {
        // F recursion runs from depth n down to 1
        let delta = GridMeasure::dirac(grid_n, x_node);
        let mut slots: Vec<Vec<f64>> =
            (0..k).map(|b| dual_letter_raw(sys, b as Letter, delta.weights())).collect();
        for _ in (1..n).rev() {
            let mut next = Vec::with_capacity(k);
            for b in 0..k {
                let mut mix = vec![0.0; grid_n];
                for (c, slot) in slots.iter().enumerate() {
                    let q = env.q[b][c];
                    if q > 0.0 {
                        for (m, &s) in mix.iter_mut().zip(slot) {
                            *m += q * s;
                        }
                    }
                }
                next.push(dual_letter_raw(sys, b as Letter, &mix));
            }
            // joint renormalization against under/overflow
            let total: f64 = next.iter().flat_map(|v| v.iter()).sum();
            if total > 0.0 {
                let inv = 1.0 / total;
                for v in &mut next {
                    for w in v.iter_mut() {
                        *w *= inv;
                    }
                }
            }
            slots = next;
        }
        let mut weights = vec![0.0; grid_n];
        for (b, slot) in slots.iter().enumerate() {
            for (w, &s) in weights.iter_mut().zip(slot) {
                *w += env.initial[b] * s;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        out.push((n, GridMeasure::from_weights(weights)?));
    }
    Ok(out)
}

/// Unnormalized dual push `L_i^*`: atom at node `x` spreads to the exact
/// preimages with weights `e^{φ_i(y)}`.
fn dual_letter_raw(sys: &ExpandingSystem, letter: Letter, weights: &[f64]) -> Vec<f64> {
    let gen = sys.generator(letter);
    let m = gen.branches;
    let n = weights.len();
    let mut next = vec![0.0; n];
    for (idx, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let x = idx as f64 / n as f64;
        for b in 0..m {
            let y = (x + b as f64) / m as f64;
            bin_atom(&mut next, y, w * gen.potential.eval(y).exp());
        }
    }
    next
}
