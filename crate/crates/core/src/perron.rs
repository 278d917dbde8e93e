//! Perron roots and vectors of small nonnegative matrices.
//!
//! Two independent routes to the spectral radius are provided: power iteration
//! bracketed by Collatz-Wielandt bounds, and repeated squaring of the matrix
//! with the growth rate read off consecutive squarings. The thermodynamic
//! checks compare one against the other.

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 500_000;

#[derive(Debug, Clone)]
pub struct PerronPair {
    /// Natural log of the spectral radius.
    pub log_root: f64,
    /// Right Perron vector normalized to unit maximum.
    pub vector: Vec<f64>,
}

fn max_entry(matrix: &[Vec<f64>]) -> f64 {
    matrix
        .iter()
        .flat_map(|row| row.iter().copied())
        .fold(0.0, f64::max)
}

/// Power iteration `v <- M v`, stopped when the Collatz-Wielandt bounds
/// `min_i (Mv)_i / v_i <= rho <= max_i (Mv)_i / v_i` agree to `rel_tol`.
pub fn perron_right(matrix: &[Vec<f64>], rel_tol: f64) -> Result<PerronPair> {
    let n = matrix.len();
    let scale = max_entry(matrix);
    if scale == 0.0 {
        return Ok(PerronPair {
            log_root: f64::NEG_INFINITY,
            vector: vec![1.0; n],
        });
    }
    let scaled: Vec<Vec<f64>> = matrix
        .iter()
        .map(|row| row.iter().map(|x| x / scale).collect())
        .collect();
    let mut v = vec![1.0; n];
    let mut gap = f64::INFINITY;
    for _ in 0..MAX_ITERATIONS {
        let w: Vec<f64> = scaled
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (wi, vi) in w.iter().zip(&v) {
            if *vi > 0.0 {
                let r = wi / vi;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        let top = w.iter().copied().fold(0.0, f64::max);
        if top == 0.0 {
            return Ok(PerronPair {
                log_root: f64::NEG_INFINITY,
                vector: v,
            });
        }
        v = w.iter().map(|x| x / top).collect();
        gap = (hi - lo) / hi;
        if gap <= rel_tol {
            let root = (lo * hi).sqrt();
            return Ok(PerronPair {
                log_root: root.ln() + scale.ln(),
                vector: v,
            });
        }
    }
    Err(Error::PerronStagnation {
        iterations: MAX_ITERATIONS,
        gap,
    })
}

/// Left Perron vector, normalized to unit maximum.
pub fn perron_left(matrix: &[Vec<f64>], rel_tol: f64) -> Result<PerronPair> {
    perron_right(&transpose(matrix), rel_tol)
}

pub fn transpose(matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = matrix.len();
    (0..n)
        .map(|j| (0..n).map(|i| matrix[i][j]).collect())
        .collect()
}

/// Log spectral radius via `log sum(M^(2n)) - log sum(M^n)` over `n`, with
/// `n = 2^squarings`. For a primitive matrix the error decays like
/// `(lambda_2 / lambda_1)^n / n`.
pub fn log_radius_by_squaring(matrix: &[Vec<f64>], squarings: u32) -> f64 {
    let n = matrix.len();
    let scale = max_entry(matrix);
    if scale == 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut power: Vec<Vec<f64>> = matrix
        .iter()
        .map(|row| row.iter().map(|x| x / scale).collect())
        .collect();
    // power = M^(2^j) / exp(log_scale)
    let mut log_scale = scale.ln();
    let mut exponent = 1.0f64;
    let mut previous = log_sum(&power) + log_scale;
    let mut estimate = previous;
    for _ in 0..squarings {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for l in 0..n {
                let a = power[i][l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    next[i][j] += a * power[l][j];
                }
            }
        }
        let top = max_entry(&next);
        if top == 0.0 {
            return f64::NEG_INFINITY;
        }
        for row in next.iter_mut() {
            for x in row.iter_mut() {
                *x /= top;
            }
        }
        log_scale = 2.0 * log_scale + top.ln();
        power = next;
        let current = log_sum(&power) + log_scale;
        estimate = (current - previous) / exponent;
        previous = current;
        exponent *= 2.0;
    }
    estimate
}

fn log_sum(matrix: &[Vec<f64>]) -> f64 {
    matrix
        .iter()
        .flat_map(|row| row.iter())
        .sum::<f64>()
        .ln()
}
