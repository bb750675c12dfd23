//! Small dense linear algebra on row-major square matrices.
//!
//! Everything here works on `n <= 8` or so; there is no blocking and no
//! attempt at cache friendliness.

use crate::error::{Error, Result};

/// Determinant of the row-major `n x n` matrix in `m`.
///
/// Uses the closed form for `n <= 3` and LU with partial pivoting above that.
/// `m` is used as scratch space and is clobbered for `n > 3`.
pub fn det_in_place(m: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    match n {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            let mut sign = 1.0;
            for k in 0..n {
                let pivot = (k..n)
                    .max_by(|&a, &b| m[a * n + k].abs().total_cmp(&m[b * n + k].abs()))
                    .unwrap_or(k);
                if m[pivot * n + k] == 0.0 {
                    return 0.0;
                }
                if pivot != k {
                    for c in 0..n {
                        m.swap(k * n + c, pivot * n + c);
                    }
                    sign = -sign;
                }
                let diag = m[k * n + k];
                for r in (k + 1)..n {
                    let factor = m[r * n + k] / diag;
                    if factor != 0.0 {
                        for c in (k + 1)..n {
                            m[r * n + c] -= factor * m[k * n + c];
                        }
                    }
                }
            }
            (0..n).fold(sign, |acc, k| acc * m[k * n + k])
        }
    }
}

/// Determinant of a row-major square matrix, leaving the input intact.
pub fn determinant(m: &[f64], n: usize) -> f64 {
    let mut scratch = m.to_vec();
    det_in_place(&mut scratch, n)
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn new(a: &[f64], n: usize) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: a.len(),
            });
        }
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&x, &y| lu[x * n + k].abs().total_cmp(&lu[y * n + k].abs()))
                .unwrap_or(k);
            if lu[pivot * n + k].abs() <= scale * f64::EPSILON * n as f64 {
                return Err(Error::Singular);
            }
            if pivot != k {
                for c in 0..n {
                    lu.swap(k * n + c, pivot * n + c);
                }
                perm.swap(k, pivot);
                sign = -sign;
            }
            let diag = lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / diag;
                lu[r * n + k] = factor;
                for c in (k + 1)..n {
                    lu[r * n + c] -= factor * lu[k * n + c];
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        (0..self.n).fold(self.sign, |acc, k| acc * self.lu[k * self.n + k])
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.len(),
            });
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for r in 0..n {
            let s: f64 = (0..r).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] -= s;
        }
        for r in (0..n).rev() {
            let s: f64 = ((r + 1)..n).map(|c| self.lu[r * n + c] * x[c]).sum();
            x[r] = (x[r] - s) / self.lu[r * n + r];
        }
        Ok(x)
    }
}

/// Solves `A x = b` for a row-major square `A`.
pub fn solve(a: &[f64], n: usize, b: &[f64]) -> Result<Vec<f64>> {
    Lu::new(a, n)?.solve(b)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn euclidean_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}
