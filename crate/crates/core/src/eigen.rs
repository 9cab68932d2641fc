//! Power iteration on explicitly assembled operators.
//!
//! The discretized Ruelle operator in the hat-function basis has rows with
//! `2 · Π m_i` nonzeros (each exact preimage touches two neighboring
//! nodes), so assembly is sparse by construction. Power iteration on the
//! assembled matrix gives the Perron pair, and iteration on its transpose
//! the dual eigenvector; that dense route is the classical oracle the
//! quenched machinery is checked against.

use crate::dynamics::{ExpandingSystem, Word};
use crate::error::LabError;
use crate::Result;

/// Row-major sparse matrix.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    n: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl SparseMatrix {
    pub fn from_rows(n: usize, rows: Vec<Vec<(u32, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        SparseMatrix { n, rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(j, a)| a * x[j as usize]).sum())
            .collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows = vec![Vec::new(); self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in row {
                rows[j as usize].push((i as u32, a));
            }
        }
        SparseMatrix { n: self.n, rows }
    }
}

/// Assemble the grid discretization of `L_v` directly from preimage
/// enumeration (independent of the letter-composition path).
pub fn assemble_word_matrix(sys: &ExpandingSystem, v: &Word, n: usize) -> Result<SparseMatrix> {
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let x = i as f64 / n as f64;
        let pre = sys.inverse_branches(v, x)?;
        let mut row: Vec<(u32, f64)> = Vec::with_capacity(2 * pre.len());
        for (y, s) in pre {
            let w = s.exp();
            let t = y * n as f64;
            let j = (t.floor() as usize).min(n - 1);
            let frac = t - j as f64;
            let j1 = if j + 1 == n { 0 } else { j + 1 };
            push_entry(&mut row, j as u32, w * (1.0 - frac));
            if frac > 0.0 {
                push_entry(&mut row, j1 as u32, w * frac);
            }
        }
        rows.push(row);
    }
    Ok(SparseMatrix::from_rows(n, rows))
}

fn push_entry(row: &mut Vec<(u32, f64)>, col: u32, val: f64) {
    if val == 0.0 {
        return;
    }
    if let Some(e) = row.iter_mut().find(|e| e.0 == col) {
        e.1 += val;
    } else {
        row.push((col, val));
    }
}

/// Dominant eigenpair of a nonnegative irreducible matrix.
///
/// The eigenvector is normalized to unit sup norm; the eigenvalue estimate
/// is the asymptotic ratio of iterate norms.
pub fn power_iteration(
    m: &SparseMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>)> {
    let n = m.dim();
    let mut v = vec![1.0; n];
    let mut lambda = 1.0_f64;
    for it in 0..max_iter {
        let w = m.matvec(&v);
        let norm = w.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(LabError::EigenNoConvergence(it));
        }
        let next: Vec<f64> = w.iter().map(|&x| x / norm).collect();
        let diff = next
            .iter()
            .zip(&v)
            .fold(0.0_f64, |a, (&x, &y)| a.max((x - y).abs()));
        let lchange = (norm - lambda).abs() / norm.max(1.0);
        v = next;
        lambda = norm;
        if diff < tol && lchange < tol {
            return Ok((lambda, v));
        }
    }
    Err(LabError::EigenNoConvergence(max_iter))
}

/// Perron triple `(λ, h, ν)` with `ν` mass-normalized and `∫h dν = 1`.
pub fn perron_triple(
    m: &SparseMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (lambda, h) = power_iteration(m, tol, max_iter)?;
    let (_, mut nu) = power_iteration(&m.transpose(), tol, max_iter)?;
    let mass: f64 = nu.iter().sum();
    for w in &mut nu {
        *w /= mass;
    }
    let pairing: f64 = h.iter().zip(&nu).map(|(&a, &b)| a * b).sum();
    let h = h.into_iter().map(|x| x / pairing).collect();
    Ok((lambda, h, nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_by_two_perron() {
        let m = SparseMatrix::from_rows(
            2,
            vec![vec![(0, 1.4), (1, 0.9)], vec![(0, 0.8), (1, 1.8)]],
        );
        let (lambda, _v) = power_iteration(&m, 1e-14, 10_000).unwrap();
        // dominant root of x² − 3.2x + 1.8
        let expected = (3.2 + (3.2_f64 * 3.2 - 4.0 * 1.8).sqrt()) / 2.0;
        assert_abs_diff_eq!(lambda, expected, epsilon = 1e-10);
    }

    #[test]
    fn assembled_doubling_matrix_has_branch_count_eigenvalue() {
        let sys = crate::fixtures::two_three_zero();
        let m = assemble_word_matrix(&sys, &Word::parse("1").unwrap(), 128).unwrap();
        let (lambda, _h) = power_iteration(&m, 1e-13, 50_000).unwrap();
        assert_abs_diff_eq!(lambda, 2.0, epsilon = 1e-10);
    }
}
