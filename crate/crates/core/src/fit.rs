//! Least-squares fits for empirical rates, plus seeded-RNG helpers.

use crate::error::LabError;
use crate::Result;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Ordinary least squares for `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_stderr: f64,
    pub n: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(LabError::DegenerateFit(format!(
            "need at least two paired points, got {}",
            xs.len().min(ys.len())
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|&y| (y - my) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(LabError::DegenerateFit("x values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let slope_stderr = (ss_res / dof / sxx).sqrt();
    Ok(LinearFit { slope, intercept, r2, slope_stderr, n: xs.len() })
}

/// Fit `value ≈ C·rate^n` by regressing `ln value` on `n`; inputs with
/// non-positive values are rejected.
#[derive(Debug, Clone, Copy)]
pub struct GeometricFit {
    pub rate: f64,
    pub log_c: f64,
    pub r2: f64,
    pub n_points: usize,
}

pub fn geometric_fit(ns: &[f64], values: &[f64]) -> Result<GeometricFit> {
    let mut xs = Vec::with_capacity(ns.len());
    let mut ys = Vec::with_capacity(ns.len());
    for (&n, &v) in ns.iter().zip(values) {
        if v > 0.0 && v.is_finite() {
            xs.push(n);
            ys.push(v.ln());
        }
    }
    if xs.len() < 3 {
        return Err(LabError::DegenerateFit(format!(
            "only {} positive points for a geometric fit",
            xs.len()
        )));
    }
    let lf = linear_fit(&xs, &ys)?;
    Ok(GeometricFit { rate: lf.slope.exp(), log_c: lf.intercept, r2: lf.r2, n_points: xs.len() })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

/// Half-width of a ~95% normal confidence interval for the mean.
pub fn ci_halfwidth(xs: &[f64]) -> f64 {
    1.96 * sample_std(xs) / (xs.len() as f64).sqrt()
}

/// Deterministic RNG for a root seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream-split RNG: independent deterministic stream per sample index,
/// safe to use from parallel loops.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[cfg(test)]
pub fn test_rng(seed: u64) -> ChaCha8Rng {
    seeded_rng(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_line_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 - 0.5 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert_abs_diff_eq!(f.slope, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn geometric_rate_recovered() {
        let ns: Vec<f64> = (1..12).map(|i| i as f64).collect();
        let vs: Vec<f64> = ns.iter().map(|&n| 2.5 * 0.7_f64.powf(n)).collect();
        let g = geometric_fit(&ns, &vs).unwrap();
        assert_abs_diff_eq!(g.rate, 0.7, epsilon = 1e-10);
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(linear_fit(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(geometric_fit(&[1.0, 2.0, 3.0], &[0.0, -1.0, 0.0]).is_err());
    }
}
