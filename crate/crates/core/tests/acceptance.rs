//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured quantities (visible under `--nocapture`).
//!
//! Run with `cargo test --test acceptance -- --nocapture --test-threads=1`
//! to see the criteria reported in order.

use ruelle_lab::annealed::{self, DecayStatus};
use ruelle_lab::boundary;
use ruelle_lab::dynamics::{MetricConstants, Word};
use ruelle_lab::eigen;
use ruelle_lab::fit;
use ruelle_lab::fixtures;
use ruelle_lab::grid::GridFunction;
use ruelle_lab::measures::{self, GridMeasure};
use ruelle_lab::ncifs;
use ruelle_lab::stats;
use ruelle_lab::transfer;
use rand::Rng;

const N: usize = 1024;

fn cos_observable(offset: f64) -> GridFunction {
    GridFunction::from_fn(N, |x| (2.0 * std::f64::consts::PI * x).cos() + offset)
}

#[test]
fn acceptance_01_normalization_and_composition() {
    let fixtures_list = [fixtures::two_three_zero(), fixtures::two_three_cos()];
    let f = GridFunction::from_fn(N, |x| {
        (2.0 * std::f64::consts::PI * x).cos() + 0.4 * (4.0 * std::f64::consts::PI * x).sin()
    });
    let mut worst_one = 0.0_f64;
    let mut worst_comp = 0.0_f64;
    for sys in &fixtures_list {
        let mut rng = fit::seeded_rng(1001);
        for _ in 0..100 {
            let lu = rng.gen_range(1..=8);
            let lv = rng.gen_range(1..=8);
            let lw = rng.gen_range(1..=8);
            let u = fixtures::random_word(sys, &mut rng, lu);
            let v = fixtures::random_word(sys, &mut rng, lv);
            let w = fixtures::random_word(sys, &mut rng, lw);
            let p_one = transfer::normalized_quotient(sys, &u, &v, &GridFunction::one(N)).unwrap();
            worst_one = worst_one.max(p_one.map(|x| x - 1.0).sup_norm());
            let inner = transfer::normalized_quotient(sys, &u, &v, &f).unwrap();
            let lhs = transfer::normalized_quotient(sys, &u.concat(&v), &w, &inner).unwrap();
            let rhs = transfer::normalized_quotient(sys, &u, &v.concat(&w), &f).unwrap();
            worst_comp = worst_comp.max(lhs.sup_dist(&rhs));
        }
    }
    assert!(worst_one <= 1e-12, "normalization deviation {worst_one:.3e}");
    assert!(worst_comp <= 1e-9, "composition deviation {worst_comp:.3e}");
    println!(
        "acceptance 01 (normalization & composition): PASS — \
         sup|P(1)-1| = {worst_one:.2e}, sup composition gap = {worst_comp:.2e}"
    );
}

#[test]
fn acceptance_02_oracle_equivalence() {
    let ones = GridFunction::one(N);
    // smooth fixture: ≤ 1e-6 relative
    let sys = fixtures::two_three_cos();
    let mut rng = fit::seeded_rng(1002);
    let mut worst_smooth = 0.0_f64;
    for len in 1..=6 {
        for _ in 0..3 {
            let v = fixtures::random_word(&sys, &mut rng, len);
            let dp = transfer::apply_word(&sys, &v, &ones);
            let brute = transfer::apply_word_brute(&sys, &v, &ones).unwrap();
            worst_smooth = worst_smooth.max(dp.sup_dist(&brute) / brute.sup_norm());
        }
    }
    assert!(worst_smooth <= 1e-6, "smooth relative deviation {worst_smooth:.3e}");
    // linear fixture: ≤ 1e-10 relative
    let sys = fixtures::two_three_zero();
    let mut worst_linear = 0.0_f64;
    for len in 1..=6 {
        for _ in 0..3 {
            let v = fixtures::random_word(&sys, &mut rng, len);
            let dp = transfer::apply_word(&sys, &v, &ones);
            let brute = transfer::apply_word_brute(&sys, &v, &ones).unwrap();
            worst_linear = worst_linear.max(dp.sup_dist(&brute) / brute.sup_norm());
        }
    }
    assert!(worst_linear <= 1e-10, "linear relative deviation {worst_linear:.3e}");
    println!(
        "acceptance 02 (oracle equivalence): PASS — \
         smooth rel ≤ {worst_smooth:.2e}, linear rel ≤ {worst_linear:.2e}"
    );
}

#[test]
fn acceptance_03_conformality_suite() {
    let sys = fixtures::two_three_cos();
    let mut rng = fit::seeded_rng(1003);
    let depth = 36;
    let mut worst_cocycle = 0.0_f64;
    let mut worst_norm = 0.0_f64;
    for _ in 0..4 {
        let u = fixtures::random_word(&sys, &mut rng, 3);
        let v = fixtures::random_word(&sys, &mut rng, 2);
        let pattern = fixtures::random_word(&sys, &mut rng, 3);
        let omega = Word::cyclic(&pattern, depth + v.len());
        let lam_uv = measures::eigen_data(&sys, &u.concat(&v), &omega, depth, N).unwrap().lambda;
        let lam_v = measures::eigen_data(&sys, &v, &omega, depth, N).unwrap().lambda;
        let v_omega = v.concat(&omega);
        let lam_u = measures::eigen_data(&sys, &u, &v_omega, depth, N).unwrap().lambda;
        worst_cocycle = worst_cocycle.max((lam_uv - lam_u * lam_v).abs());

        let mu = measures::quenched_conformal(&sys, &Word::empty(), &omega, depth, N).unwrap();
        let ed = measures::eigen_data(&sys, &u, &omega, depth, N).unwrap();
        worst_norm = worst_norm.max((mu.measure.integrate(&ed.h) - 1.0).abs());
    }
    assert!(worst_cocycle <= 1e-6, "cocycle residual {worst_cocycle:.3e}");
    assert!(worst_norm <= 1e-8, "density normalization residual {worst_norm:.3e}");
    // pushforward identity μ_{u,ω} = μ_{uω} ∘ T_u^{-1} within 2/N in W
    let u = Word::parse("21").unwrap();
    let omega = Word::cyclic(&Word::parse("12").unwrap(), 34);
    let mu_u_omega = measures::quenched_conformal(&sys, &u, &omega, 30, N).unwrap().measure;
    let u_omega = u.concat(&omega);
    let mu_uomega = measures::quenched_conformal(&sys, &Word::empty(), &u_omega, 32, N)
        .unwrap()
        .measure;
    let mut pushed = vec![0.0; N];
    for (j, &w) in mu_uomega.weights().iter().enumerate() {
        measures::bin_atom(&mut pushed, sys.apply_word_map(&u, j as f64 / N as f64), w);
    }
    let pushed = GridMeasure::from_weights(pushed).unwrap();
    let w = measures::wasserstein_euclid(&mu_u_omega, &pushed).unwrap();
    assert!(w <= 2.0 / N as f64, "pushforward W distance {w:.3e}");
    println!(
        "acceptance 03 (conformality suite): PASS — \
         cocycle ≤ {worst_cocycle:.2e}, ∫h dμ−1 ≤ {worst_norm:.2e}, pushforward W = {w:.2e}"
    );
}

#[test]
fn acceptance_04_contraction_rates() {
    let sys = fixtures::two_three_cos();
    // probe k̂₀ on short lengths, then fit over [k̂₀, k̂₀+10]
    let probe = measures::contraction_rate(&sys, 8, &[1, 2, 3], N, 2024).unwrap();
    let k0 = probe.k0_hat.unwrap_or(3);
    let lengths: Vec<usize> = (k0..=k0 + 10).collect();
    let rep = measures::contraction_rate(&sys, 12, &lengths, N, 2025).unwrap();
    assert!(rep.wbar.rate < 1.0, "W̄ rate {:.4}", rep.wbar.rate);
    assert!(rep.wbar.r2 >= 0.95, "W̄ r² {:.4}", rep.wbar.r2);
    assert!(rep.dbar.rate < 1.0, "D̄ rate {:.4}", rep.dbar.rate);
    assert!(rep.dbar.r2 >= 0.95, "D̄ r² {:.4}", rep.dbar.r2);
    println!(
        "acceptance 04 (contraction): PASS — k̂₀ = {k0}, \
         ŝ_W̄ = {:.4} (r² {:.4}), ŝ_D̄ = {:.4} (r² {:.4})",
        rep.wbar.rate, rep.wbar.r2, rep.dbar.rate, rep.dbar.r2
    );
}

#[test]
fn acceptance_05_classical_consistency() {
    // φ = 0: λ equals the branch count to 1e-8
    let sys = fixtures::two_three_zero();
    let mut lines = Vec::new();
    for (letter, expected) in [(0u8, 2.0), (1u8, 3.0)] {
        let w = Word::new(vec![letter]);
        let omega = Word::cyclic(&w, 40);
        let lam = measures::eigen_data(&sys, &w, &omega, 38, N).unwrap().lambda;
        let m = eigen::assemble_word_matrix(&sys, &w, N).unwrap();
        let (lam_dense, _) = eigen::power_iteration(&m, 1e-13, 100_000).unwrap();
        let rel_chain = (lam - expected).abs() / expected;
        let rel_dense = (lam_dense - expected).abs() / expected;
        assert!(rel_chain <= 1e-8, "chain λ off by {rel_chain:.3e}");
        assert!(rel_dense <= 1e-8, "dense λ off by {rel_dense:.3e}");
        lines.push(format!("λ_{} rel {rel_chain:.1e}/{rel_dense:.1e}", letter + 1));
    }
    // smooth potential: chain λ vs dense Perron value, relative 1e-4
    let sys = fixtures::doubling_full_cos();
    let w = Word::parse("1").unwrap();
    let omega = Word::cyclic(&w, 40);
    let lam_chain = measures::eigen_data(&sys, &w, &omega, 38, N).unwrap().lambda;
    let m = eigen::assemble_word_matrix(&sys, &w, N).unwrap();
    let (lam_dense, _) = eigen::power_iteration(&m, 1e-13, 100_000).unwrap();
    let rel = (lam_chain - lam_dense).abs() / lam_dense;
    assert!(rel <= 1e-4, "smooth λ mismatch rel {rel:.3e}");
    println!(
        "acceptance 05 (classical consistency): PASS — {}, smooth rel = {rel:.2e}",
        lines.join(", ")
    );
}

#[test]
fn acceptance_06_annealed_dp() {
    let sys = fixtures::two_three_cos();
    let env = fixtures::env_markov_73_nonstationary();
    let f = cos_observable(0.4);
    let mut worst_bf = 0.0_f64;
    for n in 1..=5 {
        let dp = annealed::annealed_apply(&sys, &env, n, &f).unwrap();
        let brute = annealed::annealed_brute_force(&sys, &env, n, &f).unwrap();
        worst_bf = worst_bf.max(dp.sup_dist(&brute) / brute.sup_norm().max(1.0));
    }
    assert!(worst_bf <= 1e-10, "DP vs brute force rel {worst_bf:.3e}");

    let env = fixtures::env_bernoulli_half();
    let mut iterated = f.clone();
    let mut worst_bern = 0.0_f64;
    for n in 1..=12 {
        iterated = annealed::annealed_apply(&sys, &env, 1, &iterated).unwrap();
        let direct = annealed::annealed_apply(&sys, &env, n, &f).unwrap();
        worst_bern = worst_bern.max(iterated.sup_dist(&direct) / direct.sup_norm());
    }
    assert!(worst_bern <= 1e-10, "Bernoulli identity rel {worst_bern:.3e}");

    // the composition shortcut must fail for a genuine Markov environment
    let env = fixtures::env_markov_73();
    let ones = GridFunction::one(N);
    let a2 = annealed::annealed_apply(&sys, &env, 2, &ones).unwrap();
    let a2a2 = annealed::annealed_apply(&sys, &env, 2, &a2).unwrap();
    let a4 = annealed::annealed_apply(&sys, &env, 4, &ones).unwrap();
    let mismatch = a2a2.sup_dist(&a4) / a4.sup_norm();
    assert!(mismatch > 1e-3, "Markov composition unexpectedly matched: {mismatch:.3e}");
    println!(
        "acceptance 06 (annealed DP): PASS — brute rel ≤ {worst_bf:.2e}, \
         Bernoulli rel ≤ {worst_bern:.2e}, Markov mismatch = {mismatch:.3e}"
    );
}

#[test]
fn acceptance_07_annealed_spectrum() {
    // full-amplitude smooth fixture, non-Bernoulli environment: the decay
    // signal must span the whole n-window (the mild fixture converges so
    // fast it hits the float floor before n = 30)
    let sys = fixtures::doubling_full_cos();
    let env = fixtures::env_markov_73();
    let f = cos_observable(0.3);
    let rep = annealed::annealed_convergence(&sys, &env, &f, 10, 30).unwrap();
    let fitted = rep.fit.expect("decay signal present");
    assert!(fitted.rate < 1.0, "r̂ = {:.4}", fitted.rate);
    assert!(fitted.r2 >= 0.9, "r² = {:.4}", fitted.r2);
    // φ = 0 special case: β agrees with the analytic Perron value
    let sys0 = fixtures::two_three_zero();
    let rep0 = annealed::annealed_convergence(&sys0, &env, &f, 10, 30).unwrap();
    let analytic = (3.2 + (3.2_f64 * 3.2 - 4.0 * 1.8).sqrt()) / 2.0;
    let beta_err = (rep0.beta_hat - analytic).abs();
    assert!(beta_err <= 1e-8, "β̂ off the analytic value by {beta_err:.3e}");
    let sd = annealed::iota_spectrum(&sys0, &env, 5, &Word::parse("1").unwrap(), 24).unwrap();
    let beta_iota_err = (sd.beta - analytic).abs();
    assert!(beta_iota_err <= 1e-8, "ι-β off by {beta_iota_err:.3e}");
    println!(
        "acceptance 07 (annealed spectrum): PASS — r̂ = {:.4} (r² {:.4}), \
         φ=0 β errors: DP {beta_err:.1e}, ι {beta_iota_err:.1e}",
        fitted.rate, fitted.r2
    );
}

#[test]
fn acceptance_08_annealed_decay() {
    let ns: Vec<usize> = (1..=8).collect();
    // full-amplitude fixture with a dyadic-mode test function: the step-n
    // covariance pairs f∘T_v (mode 2ⁿ) against the 2^{-n}-weighted level of
    // g, a large cleanly-geometric signal above the 10³-sample noise
    let sys = fixtures::doubling_full_cos();
    let env = fixtures::env_markov_73();
    let f = cos_observable(0.0);
    let g = stats::dyadic_observable(N, 8);
    let rep = annealed::annealed_decay(&sys, &env, &f, &g, &ns, 1000, 808).unwrap();
    assert_eq!(rep.status, DecayStatus::Fitted, "no signal above MC noise");
    let fitted = rep.fit.unwrap();
    assert!(fitted.rate < 1.0, "decay rate {:.4}", fitted.rate);
    // φ = 0 control: discrepancy identically zero up to float noise
    let sys0 = fixtures::two_three_zero();
    let f0 = GridFunction::from_fn(N, |x| (2.0 * std::f64::consts::PI * x).cos());
    let g = GridFunction::from_fn(N, |x| (2.0 * std::f64::consts::PI * (x + 0.25)).cos() + 0.5);
    let rep0 = annealed::annealed_decay(&sys0, &env, &f0, &g, &ns, 200, 809).unwrap();
    let worst = rep0
        .discrepancy
        .iter()
        .fold(0.0_f64, |m, &d| m.max(d));
    assert!(worst <= 1e-9, "φ=0 control discrepancy {worst:.3e}");
    assert_eq!(rep0.status, DecayStatus::NoSignal);
    println!(
        "acceptance 08 (annealed decay): PASS — rate = {:.4} (r² {:.4}, {} points), \
         φ=0 control ≤ {worst:.1e}",
        fitted.rate, fitted.r2, fitted.n_points
    );
}

#[test]
fn acceptance_09_asip_ingredients() {
    // cos-potential doubling letter: the coboundaries h_n are genuinely
    // nonzero, so telescoping and orthogonality are nontrivial checks
    let sys = fixtures::doubling_full_cos();
    let omega = Word::cyclic(&Word::parse("1").unwrap(), 240);
    let f = GridFunction::from_fn(N, |x| (2.0 * std::f64::consts::PI * x).cos() + 0.2);
    let d = stats::build_decomposition(&sys, &omega, &f, 200).unwrap();
    let tel = d.telescoping_residual(200);
    assert!(tel <= 1e-10, "telescoping residual {tel:.3e}");
    assert!(d.h[40].sup_norm() > 1e-3, "coboundary unexpectedly trivial");
    // reverse-martingale orthogonality for ten test functions
    let mut worst_orth = 0.0_f64;
    for mode in 1..=10usize {
        let psi = GridFunction::from_fn(N, |x| {
            (2.0 * std::f64::consts::PI * mode as f64 * x).cos() + 0.3
        });
        for n in [0usize, 50, 120] {
            let r = d.reverse_martingale_residual(&sys, n, &psi).unwrap().abs();
            worst_orth = worst_orth.max(r);
        }
    }
    assert!(worst_orth <= 1e-6, "orthogonality residual {worst_orth:.3e}");
    // bounded coboundaries over n ≤ 200
    assert!(
        d.sup_h_norm.is_finite() && d.sup_h_norm <= 100.0,
        "sup‖h_n‖ = {}",
        d.sup_h_norm
    );
    // empirical CLT at n = 200 with 10^4 samples on the classical
    // doubling/cos pair (zero potential, cosine observable)
    let sys0 = fixtures::two_three_zero();
    let f0 = GridFunction::from_fn(N, |x| (2.0 * std::f64::consts::PI * x).cos());
    let d0 = stats::build_decomposition(&sys0, &omega, &f0, 200).unwrap();
    let clt = stats::quenched_clt_check(&sys0, &d0, 200, 10_000, 909).unwrap();
    assert!(clt.ks_distance <= 0.05, "KS distance {:.4}", clt.ks_distance);
    println!(
        "acceptance 09 (ASIP ingredients): PASS — telescoping {tel:.1e}, \
         orthogonality ≤ {worst_orth:.1e}, sup‖h‖ = {:.3}, KS = {:.4}, var ratio = {:.4} \
         (the a.s. invariance principle itself is not empirically assertable)",
        d.sup_h_norm, clt.ks_distance, clt.variance_ratio
    );
}

#[test]
fn acceptance_10_bowen_dimension() {
    let grid = ncifs::DEFAULT_INTERVAL_GRID;
    // autonomous Cantor fixture
    let ifs = fixtures::cantor_third();
    let root = ncifs::bowen_root(&ifs, 1e-6, 10, 40, grid).unwrap();
    let expected = 2.0_f64.ln() / 3.0_f64.ln();
    let cantor_err = (root.delta0 - expected).abs();
    assert!(cantor_err <= 1e-4, "Cantor δ₀ error {cantor_err:.2e}");

    // seeded random affine mixture vs the independent scalar-equation root
    let mut rng = fit::seeded_rng(1010);
    let r1 = 0.2 + 0.15 * rng.gen::<f64>();
    let r2 = 0.08 + 0.04 * rng.gen::<f64>();
    let mix = ncifs::Ncifs::new(
        vec![
            vec![
                ncifs::ContractionMap::Affine { r: r1, b: 0.0 },
                ncifs::ContractionMap::Affine { r: r1, b: 1.0 - r1 },
            ],
            vec![
                ncifs::ContractionMap::Affine { r: r2, b: 0.0 },
                ncifs::ContractionMap::Affine { r: r2, b: 0.4 },
                ncifs::ContractionMap::Affine { r: r2, b: 1.0 - r2 },
            ],
        ],
        fixtures::env_bernoulli_half(),
    )
    .unwrap();
    let root_mix = ncifs::bowen_root(&mix, 1e-8, 10, 40, grid).unwrap();
    let scalar = |d: f64| 0.5 * (2.0 * r1.powf(d) + 3.0 * r2.powf(d)) - 1.0;
    let (mut lo, mut hi) = (0.0_f64, 4.0_f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if scalar(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mix_err = (root_mix.delta0 - 0.5 * (lo + hi)).abs();
    assert!(mix_err <= 1e-6, "mixture root error {mix_err:.2e}");

    // monotonicity and Lipschitz bounds on a 50-point δ-grid
    let ifs = fixtures::cantor_mixture();
    let deltas: Vec<f64> = (0..50).map(|i| i as f64 * 0.03).collect();
    let ps: Vec<f64> = deltas
        .iter()
        .map(|&dl| ncifs::annealed_pressure(&ifs, dl, 10, 40, grid).unwrap().p_delta)
        .collect();
    let eps = 0.03;
    for w in ps.windows(2) {
        let diff = w[1] - w[0];
        assert!(diff < 0.0, "pressure not strictly decreasing");
        assert!(diff >= eps * ifs.eta_minus.ln() - 1e-9, "Lipschitz lower bound violated");
        assert!(diff <= eps * ifs.eta_plus.ln() + 1e-9, "Lipschitz upper bound violated");
    }
    println!(
        "acceptance 10 (Bowen dimension): PASS — Cantor err {cantor_err:.2e}, \
         mixture err {mix_err:.2e}, 50-point grid monotone with Lipschitz bounds"
    );
}

#[test]
fn acceptance_11_equidistribution() {
    let sys = fixtures::two_three_zero();
    let env = fixtures::env_bernoulli_half();
    let ns: Vec<usize> = (2..=30).step_by(2).collect();
    let rep = annealed::equidistribution(&sys, &env, 100, &ns, N).unwrap();
    assert!(rep.pair_fit.rate < 1.0, "pair rate {:.4}", rep.pair_fit.rate);
    assert!(rep.pair_fit.r2 >= 0.9, "pair r² {:.4}", rep.pair_fit.r2);
    let pressure_err = (rep.pressure.last().unwrap() - 2.5_f64.ln()).abs();
    assert!(pressure_err <= 1e-3, "pressure error {pressure_err:.2e} at n=30");
    println!(
        "acceptance 11 (equidistribution): PASS — W-decay rate {:.4} (r² {:.4}), \
         pressure error {pressure_err:.2e}",
        rep.pair_fit.rate, rep.pair_fit.r2
    );
}

#[test]
fn acceptance_12_boundary() {
    // metric axioms for d_{W*} on 10³ sampled triples
    let sys = fixtures::two_three_cos();
    let mut rng = fit::seeded_rng(1012);
    for _ in 0..1000 {
        let (la, lb, lc) = (rng.gen_range(1..8), rng.gen_range(1..8), rng.gen_range(1..8));
        let a = fixtures::random_word(&sys, &mut rng, la);
        let b = fixtures::random_word(&sys, &mut rng, lb);
        let c = fixtures::random_word(&sys, &mut rng, lc);
        let (ab, bc, ac) = (
            boundary::word_metric(&a, &b),
            boundary::word_metric(&b, &c),
            boundary::word_metric(&a, &c),
        );
        assert_eq!(ab, boundary::word_metric(&b, &a));
        assert_eq!(ab == 0.0, a == b);
        assert!(ac <= ab + bc + 1e-15, "d_W* triangle violated");
    }
    // d_G triangle inequality over a pooled set of elements
    let mc = MetricConstants::from_system(&sys);
    let pool: Vec<Word> = ["1", "2", "12", "21", "112", "221", "1212"]
        .iter()
        .map(|s| Word::parse(s).unwrap())
        .collect();
    let elements: Vec<boundary::SemigroupElement> = pool
        .iter()
        .map(|w| boundary::SemigroupElement::compute(&sys, w, 22, N).unwrap())
        .collect();
    let k = elements.len();
    let mut dmat = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                dmat[i][j] = elements[i].distance(&elements[j], &mc).unwrap();
            }
        }
    }
    for i in 0..k {
        for j in 0..k {
            for l in 0..k {
                assert!(
                    dmat[i][j] <= dmat[i][l] + dmat[l][j] + 1e-9,
                    "d_G triangle violated at ({i},{j},{l})"
                );
            }
        }
    }
    // nested-word probes are Cauchy with geometric gaps
    let probe_words = boundary::two_sided_truncations(
        &Word::parse("2").unwrap(),
        &Word::parse("1").unwrap(),
        &[2, 3, 4, 5, 6, 7, 8],
    );
    let probe = boundary::cauchy_probe(&sys, &probe_words, 22, N).unwrap();
    assert!(probe.is_cauchy, "nested probe not Cauchy: {:?}", probe.gaps);
    let rate = probe.fitted_rate.as_ref().unwrap().rate;
    assert!(rate < 1.0, "gap rate {rate:.4}");
    // Hölder regression of W̄ against d_{W*} over the probe pairs, whose
    // word metric genuinely spans scales 2^{-2}..2^{-8}
    let holder = probe.holder.as_ref().unwrap();
    assert!(holder.slope > 0.0, "Hölder exponent {:.4}", holder.slope);
    // commuting fixture: the W̄ term collapses to grid tolerance
    let sys_ab = fixtures::two_four_zero();
    let mc_ab = MetricConstants::from_system(&sys_ab);
    let e1 = boundary::SemigroupElement::compute(&sys_ab, &Word::parse("12").unwrap(), 22, N).unwrap();
    let e2 = boundary::SemigroupElement::compute(&sys_ab, &Word::parse("21").unwrap(), 22, N).unwrap();
    let wbar = measures::wasserstein_dstar(&mc_ab, &e1.equilibrium, &e2.equilibrium, 256).unwrap();
    // both equilibria converge to Lebesgue at rate ~2^{-depth}
    assert!(wbar <= 1e-5, "abelian W̄ term {wbar:.3e}");
    println!(
        "acceptance 12 (boundary): PASS — metric axioms on 10³ triples, \
         Cauchy gaps rate {rate:.4}, Hölder exponent {:.3} (r² {:.3}), abelian W̄ = {wbar:.2e}",
        holder.slope, holder.r2
    );
}
