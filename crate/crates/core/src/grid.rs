//! Sampled functions on a uniform circle grid.
//!
//! A `GridFunction` stores values at the nodes `j/N` and evaluates elsewhere
//! by piecewise-linear interpolation with wraparound. For an `α`-Hölder
//! function with constant `D` the interpolation error is at most
//! `D·(1/(2N))^α`; for twice-differentiable functions it is `‖g''‖ h²/8`
//! with `h = 1/N`. Those two bounds set every interpolation tolerance used
//! by the operator tests.

use crate::dynamics::wrap;

pub const DEFAULT_GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn from_values(values: Vec<f64>) -> Self {
        assert!(values.len() >= 2, "grid needs at least two nodes");
        GridFunction { values }
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            values: (0..n).map(|j| f(j as f64 / n as f64)).collect(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        GridFunction { values: vec![c; n] }
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, 1.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Piecewise-linear evaluation with wraparound; exact at nodes.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = wrap(x) * n as f64;
        let i = t.floor() as usize;
        let frac = t - i as f64;
        let i = i.min(n - 1);
        if frac == 0.0 {
            self.values[i]
        } else {
            let j = if i + 1 == n { 0 } else { i + 1 };
            self.values[i] * (1.0 - frac) + self.values[j] * frac
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        GridFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Node-wise product.
    pub fn mul(&self, other: &GridFunction) -> GridFunction {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.zip(other, |a, b| a - b)
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.zip(other, |a, b| a + b)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Mean of the node values (the Lebesgue integral of the interpolant).
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_dist(&self, other: &GridFunction) -> f64 {
        self.sub(other).sup_norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_exact_at_nodes_and_linear_between() {
        let g = GridFunction::from_values(vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(g.eval(0.25), 1.0);
        assert_abs_diff_eq!(g.eval(0.125), 0.5, epsilon = 1e-15);
        // wraparound between the last node and node zero
        assert_abs_diff_eq!(g.eval(0.875), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn interpolation_error_bound_for_lipschitz() {
        let n = 256;
        let f = |x: f64| (2.0 * std::f64::consts::PI * x).cos();
        let g = GridFunction::from_fn(n, f);
        let lip = 2.0 * std::f64::consts::PI;
        let bound = lip * (1.0 / (2.0 * n as f64));
        for k in 0..999 {
            let x = k as f64 / 999.0;
            assert!((g.eval(x) - f(x)).abs() <= bound + 1e-12);
        }
    }
}
