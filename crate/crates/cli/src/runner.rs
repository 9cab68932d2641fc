//! Experiment runners: each subcommand reads the config, drives the core
//! library, and writes CSV/JSON artifacts plus a manifest.
//!
//! Every numeric output row carries its sweep coordinate (n, δ, depth,
//! word) so downstream fits can be reproduced from the files alone. Given
//! the same config and seed the CSV/JSON bodies are byte-identical; wall
//! time lives only in the manifest.

use crate::config::{ExperimentConfig, ObservableConfig};
use anyhow::{bail, Context, Result};
use ruelle_lab::dynamics::Word;
use ruelle_lab::grid::GridFunction;
use ruelle_lab::measures::{self, GridMeasure};
use ruelle_lab::{annealed, boundary, fixtures, ncifs, stats};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

pub struct RunContext {
    pub config: ExperimentConfig,
    pub config_bytes: Vec<u8>,
    pub experiment: String,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub grid_n: usize,
}

impl RunContext {
    pub fn seed_required(&self) -> Result<u64> {
        self.seed
            .context("this experiment is stochastic: set --seed or params.seed")
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn write_csv(&self, name: &str, header: &str, rows: &[String]) -> Result<PathBuf> {
        let p = self.path(name);
        let mut body = String::with_capacity(rows.len() * 32 + header.len() + 1);
        body.push_str(header);
        body.push('\n');
        for r in rows {
            body.push_str(r);
            body.push('\n');
        }
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    fn write_json(&self, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
        let p = self.path(name);
        fs::write(&p, serde_json::to_string_pretty(value)?)
            .with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    fn write_measure_csv(&self, name: &str, m: &GridMeasure) -> Result<PathBuf> {
        let rows: Vec<String> = m
            .weights()
            .iter()
            .enumerate()
            .map(|(j, w)| format!("{j},{w}"))
            .collect();
        self.write_csv(name, "node,weight", &rows)
    }

    fn write_grid_csv(&self, name: &str, f: &GridFunction) -> Result<PathBuf> {
        let rows: Vec<String> = f
            .values()
            .iter()
            .enumerate()
            .map(|(j, v)| format!("{j},{v}"))
            .collect();
        self.write_csv(name, "node,value", &rows)
    }

    pub fn finish(&self, outputs: Vec<PathBuf>, started: Instant) -> Result<()> {
        let hash = hex(&Sha256::digest(&self.config_bytes));
        let manifest = json!({
            "experiment": self.experiment,
            "config_sha256": hash,
            "library_version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "grid_n": self.grid_n,
            "wall_time_ms": started.elapsed().as_millis() as u64,
            "outputs": outputs.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
        });
        self.write_json("manifest.json", &manifest)?;
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn default_observable() -> ObservableConfig {
    ObservableConfig::Cos { amplitude: 1.0, phase: 0.0, offset: 0.3 }
}

fn range(ctx: &RunContext, lo: usize, hi: usize, step: usize) -> Vec<usize> {
    let lo = ctx.config.params.n_lo.unwrap_or(lo);
    let hi = ctx.config.params.n_hi.unwrap_or(hi);
    let step = ctx.config.params.n_step.unwrap_or(step);
    (lo..=hi).step_by(step.max(1)).collect()
}

pub fn run(ctx: &RunContext) -> Result<()> {
    let started = Instant::now();
    let outputs = match ctx.experiment.as_str() {
        "quenched-measure" => quenched_measure(ctx)?,
        "contraction-rate" => contraction_rate(ctx)?,
        "eigen-cocycle" => eigen_cocycle(ctx)?,
        "annealed-spectrum" => annealed_spectrum(ctx)?,
        "annealed-decay" => annealed_decay(ctx)?,
        "equidistribution" => equidistribution(ctx)?,
        "asip" => asip(ctx)?,
        "ncifs-pressure" => ncifs_pressure(ctx)?,
        "bowen-root" => bowen_root(ctx)?,
        "boundary-probe" => boundary_probe(ctx)?,
        other => bail!("unknown experiment {other:?}"),
    };
    ctx.finish(outputs, started)
}

fn quenched_measure(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let sys = ctx.config.build_system()?;
    let p = &ctx.config.params;
    let depth = p.depth.unwrap_or(25);
    let u = ctx.config.word(&p.prefix, "")?;
    let pattern = ctx.config.word(&p.omega_pattern, "12")?;
    let omega = Word::cyclic(&pattern, depth.max(1));
    let mut rows = Vec::new();
    let mut last = None;
    for l in 1..=depth {
        let q = measures::quenched_conformal(&sys, &u, &omega, l, ctx.grid_n)?;
        rows.push(format!("{l},{}", q.gap));
        last = Some(q);
    }
    let q = last.unwrap();
    Ok(vec![
        ctx.write_csv("gaps.csv", "depth,wbar_gap", &rows)?,
        ctx.write_measure_csv("measure.csv", &q.measure)?,
    ])
}

fn contraction_rate(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let sys = ctx.config.build_system()?;
    let p = &ctx.config.params;
    let seed = ctx.seed_required()?;
    let trials = p.trials.unwrap_or(16);
    let lengths = p.lengths.clone().unwrap_or_else(|| (1..=11).collect());
    let rep = measures::contraction_rate(&sys, trials, &lengths, ctx.grid_n, seed)?;
    let rows: Vec<String> = rep
        .per_length
        .iter()
        .map(|s| {
            format!(
                "{},{},{},{}",
                s.length, s.mean_log_ratio_wbar, s.mean_log_ratio_dbar, s.all_contracted
            )
        })
        .collect();
    let fit = json!({
        "k0_hat": rep.k0_hat,
        "s_hat_wbar": rep.wbar.rate,
        "r2_wbar": rep.wbar.r2,
        "s_hat_dbar": rep.dbar.rate,
        "r2_dbar": rep.dbar.r2,
    });
    Ok(vec![
        ctx.write_csv(
            "rates.csv",
            "length,mean_log_ratio_wbar,mean_log_ratio_dbar,all_contracted",
            &rows,
        )?,
        ctx.write_json("fit.json", &fit)?,
    ])
}

fn eigen_cocycle(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let sys = ctx.config.build_system()?;
    let p = &ctx.config.params;
    let seed = ctx.seed_required()?;
    let trials = p.trials.unwrap_or(10);
    let depth = p.depth.unwrap_or(36);
    let mut rng = ruelle_lab::fit::seeded_rng(seed);
    let mut rows = Vec::new();
    let mut max_err = 0.0_f64;
    for t in 0..trials {
        let u = fixtures::random_word(&sys, &mut rng, 3);
        let v = fixtures::random_word(&sys, &mut rng, 2);
        let pattern = fixtures::random_word(&sys, &mut rng, 3);
        let omega = Word::cyclic(&pattern, depth + v.len());
        let lam_uv = measures::eigen_data(&sys, &u.concat(&v), &omega, depth, ctx.grid_n)?.lambda;
        let lam_v = measures::eigen_data(&sys, &v, &omega, depth, ctx.grid_n)?.lambda;
        let v_omega = v.concat(&omega);
        let lam_u = measures::eigen_data(&sys, &u, &v_omega, depth, ctx.grid_n)?.lambda;
        let err = (lam_uv - lam_u * lam_v).abs();
        max_err = max_err.max(err);
        rows.push(format!("{t},{u},{v},{pattern},{lam_uv},{lam_u},{lam_v},{err}"));
    }
    Ok(vec![
        ctx.write_csv(
            "cocycle.csv",
            "trial,u,v,omega_pattern,lambda_uv,lambda_u_vomega,lambda_v,abs_err",
            &rows,
        )?,
        ctx.write_json("summary.json", &json!({ "max_abs_err": max_err, "trials": trials }))?,
    ])
}

fn annealed_spectrum(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let sys = ctx.config.build_system()?;
    let env = ctx.config.build_environment()?;
    let p = &ctx.config.params;
    let f = p
        .observable
        .clone()
        .unwrap_or_else(default_observable)
        .build(ctx.grid_n);
    let n_lo = p.n_lo.unwrap_or(10);
    let n_hi = p.n_hi.unwrap_or(30);
    let rep = annealed::annealed_convergence(&sys, &env, &f, n_lo, n_hi)?;
    let iota_depth = p.iota_depth.unwrap_or(6);
    let sd = annealed::iota_spectrum(&sys, &env, iota_depth, &Word::parse("1")?, 24)?;
    let pi_iota = sd.pi(&sys, &f)?;
    let rows: Vec<String> = rep
        .ns
        .iter()
        .zip(&rep.sups)
        .map(|(n, s)| format!("{n},{s}"))
        .collect();
    let fit = json!({
        "beta_hat": rep.beta_hat,
        "beta_iota": sd.beta,
        "beta_iota_depth_gap": (sd.beta - sd.beta_coarser).abs(),
        "iota_depth": iota_depth,
        "pi_f": rep.pi_f,
        "pi_iota": pi_iota,
        "r_hat": rep.fit.as_ref().map(|f| f.rate),
        "r2": rep.fit.as_ref().map(|f| f.r2),
    });
    Ok(vec![
        ctx.write_csv("spectrum.csv", "n,sup_err", &rows)?,
        ctx.write_grid_csv("h.csv", &rep.h)?,
        ctx.write_json("fit.json", &fit)?,
    ])
}

fn annealed_decay(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let sys = ctx.config.build_system()?;
    let env = ctx.config.build_environment()?;
    let p = &ctx.config.params;
    let seed = ctx.seed_required()?;
    let f = p
        .observable
        .clone()
        .unwrap_or_else(default_observable)
        .build(ctx.grid_n);
    let g = p
        .observable_g
        .clone()
        .unwrap_or(ObservableConfig::Cos { amplitude: 1.0, phase: 0.25, offset: 0.5 })
        .build(ctx.grid_n);
    let ns = range(ctx, 2, 14, 2);
    let samples = p.mc_samples.unwrap_or(1000);
    let rep = annealed::annealed_decay(&sys, &env, &f, &g, &ns, samples, seed)?;
    let rows: Vec<String> = rep
        .ns
        .iter()
        .zip(rep.discrepancy.iter().zip(&rep.ci))
        .map(|(n, (d, c))| format!("{n},{d},{c}"))
        .collect();
    let fit = json!({
        "status": format!("{:?}", rep.status),
        "rate": rep.fit.as_ref().map(|f| f.rate),
        "r2": rep.fit.as_ref().map(|f| f.r2),
        "pi_tilde_f": rep.pi_tilde_f,
        "mean_mu_g": rep.mean_mu_g,
        "mc_samples": samples,
    });
    Ok(vec![
        ctx.write_csv("decay.csv", "n,discrepancy,ci", &rows)?,
        ctx.write_json("fit.json", &fit)?,
    ])
}

fn equidistribution(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let sys = ctx.config.build_system()?;
    let env = ctx.config.build_environment()?;
    let p = &ctx.config.params;
    let ns = range(ctx, 2, 30, 2);
    let x_node = p.x_node.unwrap_or(0);
    let rep = annealed::equidistribution(&sys, &env, x_node, &ns, ctx.grid_n)?;
    let rows: Vec<String> = rep
        .ns
        .iter()
        .enumerate()
        .map(|(j, n)| {
            format!("{n},{},{},{}", rep.w_pair[j], rep.w_limit[j], rep.pressure[j])
        })
        .collect();
    let fit = json!({
        "pair_rate": rep.pair_fit.rate,
        "pair_r2": rep.pair_fit.r2,
        "pressure_final": rep.pressure.last(),
    });
    Ok(vec![
        ctx.write_csv("equi.csv", "n,w_pair,w_limit,pressure", &rows)?,
        ctx.write_measure_csv("limit.csv", &rep.limit)?,
        ctx.write_json("fit.json", &fit)?,
    ])
}

fn asip(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let sys = ctx.config.build_system()?;
    let p = &ctx.config.params;
    let seed = ctx.seed_required()?;
    let n_max = p.n_max.unwrap_or(200);
    let pattern = ctx.config.word(&p.omega_pattern, "1")?;
    let omega = Word::cyclic(&pattern, n_max + 40);
    let f = p
        .observable
        .clone()
        .unwrap_or(ObservableConfig::Cos { amplitude: 1.0, phase: 0.0, offset: 0.0 })
        .build(ctx.grid_n);
    let d = stats::build_decomposition(&sys, &omega, &f, n_max)?;
    let rows: Vec<String> = (0..=n_max)
        .map(|n| format!("{n},{},{}", d.s_sq[n], d.h[n].sup_norm()))
        .collect();
    let mut orth_rows = Vec::new();
    for mode in 1..=5usize {
        let psi = GridFunction::from_fn(ctx.grid_n, |x| {
            (2.0 * std::f64::consts::PI * mode as f64 * x).cos() + 0.3
        });
        for n in [0, n_max / 2, n_max.saturating_sub(2)] {
            let r = d.reverse_martingale_residual(&sys, n, &psi)?;
            orth_rows.push(format!("{n},{mode},{r}"));
        }
    }
    let clt_n = p.clt_n.unwrap_or(n_max);
    let samples = p.mc_samples.unwrap_or(10_000);
    let clt = stats::quenched_clt_check(&sys, &d, clt_n, samples, seed)?;
    let summary = json!({
        "ks": clt.ks_distance,
        "variance_ratio": clt.variance_ratio,
        "status": format!("{:?}", clt.status),
        "clt_n": clt_n,
        "mc_samples": samples,
        "sup_h_norm": d.sup_h_norm,
        "telescoping_residual": d.telescoping_residual(n_max.min(40)),
    });
    Ok(vec![
        ctx.write_csv("asip.csv", "n,s_n_sq,h_sup_norm", &rows)?,
        ctx.write_csv("orth.csv", "n,psi_mode,residual", &orth_rows)?,
        ctx.write_json("clt.json", &summary)?,
    ])
}

fn ncifs_pressure(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let ifs = ctx.config.build_ncifs()?;
    let p = &ctx.config.params;
    let n_lo = p.n_lo.unwrap_or(10);
    let n_hi = p.n_hi.unwrap_or(40);
    let grid = ncifs::DEFAULT_INTERVAL_GRID;
    let dmin = p.delta_min.unwrap_or(0.0);
    let dmax = p.delta_max.unwrap_or(1.5);
    let count = p.delta_count.unwrap_or(50);
    let quenched_samples = p.quenched_samples.unwrap_or(0);
    let seed = if quenched_samples > 0 { Some(ctx.seed_required()?) } else { ctx.seed };
    let mut rows = Vec::new();
    for i in 0..count {
        let delta = dmin + (dmax - dmin) * i as f64 / (count.max(2) - 1) as f64;
        let est = ncifs::annealed_pressure(&ifs, delta, n_lo, n_hi, grid)?;
        if quenched_samples > 0 {
            let q = ncifs::quenched_pressure(
                &ifs,
                delta,
                n_lo,
                n_hi,
                quenched_samples,
                grid,
                seed.unwrap(),
            )?;
            rows.push(format!(
                "{delta},{},{},{},{}",
                est.p_delta, est.slope_gap, q.mean, q.ci_halfwidth
            ));
        } else {
            rows.push(format!("{delta},{},{},,", est.p_delta, est.slope_gap));
        }
    }
    Ok(vec![ctx.write_csv(
        "pressure.csv",
        "delta,p_delta,slope_gap,quenched_mean,quenched_ci",
        &rows,
    )?])
}

fn bowen_root(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let ifs = ctx.config.build_ncifs()?;
    let p = &ctx.config.params;
    let tol = p.tol.unwrap_or(1e-6);
    let root = ncifs::bowen_root(
        &ifs,
        tol,
        p.n_lo.unwrap_or(10),
        p.n_hi.unwrap_or(40),
        ncifs::DEFAULT_INTERVAL_GRID,
    )?;
    let out = json!({
        "delta0": root.delta0,
        "bracket_lo": root.bracket.0,
        "bracket_hi": root.bracket.1,
        "p0": root.p0,
        "tol": tol,
    });
    Ok(vec![ctx.write_json("bowen.json", &out)?])
}

fn boundary_probe(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let sys = ctx.config.build_system()?;
    let p = &ctx.config.params;
    let depth = p.depth.unwrap_or(22);
    let words: Vec<Word> = if let Some(list) = &p.probe_words {
        list.iter().map(|s| Word::parse(s)).collect::<ruelle_lab::Result<_>>()?
    } else {
        let sigma = ctx.config.word(&p.sigma_pattern, "2")?;
        let omega = ctx.config.word(&p.omega_pattern, "1")?;
        let lengths = p.probe_lengths.clone().unwrap_or_else(|| (2..=8).collect());
        boundary::two_sided_truncations(&sigma, &omega, &lengths)
    };
    let probe = boundary::cauchy_probe(&sys, &words, depth, ctx.grid_n)?;
    let mut rows = Vec::new();
    for (i, w) in words.iter().enumerate() {
        let gap = if i + 1 < words.len() {
            format!("{}", probe.gaps[i])
        } else {
            String::new()
        };
        rows.push(format!("{i},{w},{},{gap}", probe.kappas[i]));
    }
    let out = json!({
        "is_cauchy": probe.is_cauchy,
        "offending_gap": probe.offending_gap,
        "fitted_rate": probe.fitted_rate.as_ref().map(|f| f.rate),
        "fitted_rate_r2": probe.fitted_rate.as_ref().map(|f| f.r2),
        "holder_gamma": probe.holder.as_ref().map(|f| f.slope),
        "holder_r2": probe.holder.as_ref().map(|f| f.r2),
        "limit_measure": "limit_measure.csv",
    });
    Ok(vec![
        ctx.write_csv("probe.csv", "index,word,kappa,gap_to_next", &rows)?,
        ctx.write_json("probe.json", &out)?,
        ctx.write_measure_csv("limit_measure.csv", &probe.limit)?,
    ])
}

pub fn list_fixtures() -> String {
    let mut out = String::new();
    for f in fixtures::catalog() {
        out.push_str(&format!("{:<24} [{}] {}\n", f.name, f.kind, f.summary));
    }
    out
}
