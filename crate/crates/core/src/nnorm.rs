//! The determinant-based n-norm on truncated lp sequences.
//!
//! For vectors `x_1, ..., x_n` in `R^d` with `n <= d` the n-norm is
//!
//! ```text
//! ||x_1, ..., x_n||_p = ( sum over j_1 < ... < j_n of |det [x_i(j_k)]|^p )^(1/p)
//! ```
//!
//! which equals the ordered-tuple form with the `1/n!` prefactor: the `n!`
//! orderings of a column combination contribute equal terms and tuples with
//! a repeated column contribute zero. Infinite sequences are represented by
//! truncation to their first `d` coordinates; values are exact for vectors
//! supported there.

use crate::combinatorics::{next_combination, permutations};
use crate::error::{Error, Result};
use crate::linalg::{det_in_place, euclidean_norm};
use crate::rng::{map_shards, normal_vector, uniform};
use serde::Serialize;

pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

/// Shape and tolerances for one family of n-norm evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormParams {
    n: usize,
    p: f64,
    d: usize,
    rel_tol: f64,
    abs_tol: f64,
}

impl NormParams {
    pub fn new(n: usize, p: f64, d: usize) -> Result<Self> {
        Self::with_tolerances(n, p, d, DEFAULT_REL_TOL, DEFAULT_ABS_TOL)
    }

    pub fn with_tolerances(n: usize, p: f64, d: usize, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameter(format!(
                "n and d must be positive (n = {n}, d = {d})"
            )));
        }
        if n > d {
            return Err(Error::TooManyArguments { n, d });
        }
        check_exponent(p)?;
        if !(rel_tol > 0.0 && rel_tol.is_finite() && abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tolerances must be positive and finite (rel_tol = {rel_tol}, abs_tol = {abs_tol})"
            )));
        }
        Ok(Self {
            n,
            p,
            d,
            rel_tol,
            abs_tol,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }
    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    /// Same tolerances, different shape.
    pub fn reshaped(&self, n: usize, p: f64, d: usize) -> Result<Self> {
        Self::with_tolerances(n, p, d, self.rel_tol, self.abs_tol)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Checks that every vector has length `d` and finite entries.
pub fn validate_vectors<V: AsRef<[f64]>>(vectors: &[V], d: usize) -> Result<()> {
    for (i, v) in vectors.iter().enumerate() {
        let v = v.as_ref();
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        if let Some(coord) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { vector: i, coord });
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn pow_p(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

#[inline]
pub(crate) fn root_p(s: f64, p: f64) -> f64 {
    if p == 1.0 {
        s
    } else if p == 2.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / p)
    }
}

/// Sum of `|minor|^p` over all lexicographic column combinations, then the
/// `p`-th root. Rows must already be validated.
pub(crate) fn n_norm_unchecked(rows: &[&[f64]], p: f64) -> f64 {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    if n == 0 || n > d {
        return 0.0;
    }
    let mut cols: Vec<usize> = (0..n).collect();
    let mut minor = vec![0.0; n * n];
    let mut sum = 0.0;
    loop {
        for (r, row) in rows.iter().enumerate() {
            for (k, &c) in cols.iter().enumerate() {
                minor[r * n + k] = row[c];
            }
        }
        sum += pow_p(det_in_place(&mut minor, n).abs(), p);
        if !next_combination(&mut cols, d) {
            break;
        }
    }
    root_p(sum, p)
}

/// The n-norm of `vectors` at exponent `params.p()`.
pub fn lp_n_norm<V: AsRef<[f64]>>(vectors: &[V], params: &NormParams) -> Result<f64> {
    if vectors.len() != params.n {
        return Err(Error::ArityMismatch {
            expected: params.n,
            found: vectors.len(),
        });
    }
    validate_vectors(vectors, params.d)?;
    let rows: Vec<&[f64]> = vectors.iter().map(AsRef::as_ref).collect();
    Ok(n_norm_unchecked(&rows, params.p))
}

/// `sqrt(det G)` with `G` the Gram matrix of `vectors`: the Euclidean volume
/// of the parallelotope they span. Agrees with [`lp_n_norm`] at `p = 2`.
pub fn gram_2_norm<V: AsRef<[f64]>>(vectors: &[V]) -> Result<f64> {
    let n = vectors.len();
    let Some(first) = vectors.first() else {
        return Err(Error::InvalidParameter("no vectors given".into()));
    };
    let d = first.as_ref().len();
    if n > d {
        return Err(Error::TooManyArguments { n, d });
    }
    validate_vectors(vectors, d)?;
    let rows: Vec<&[f64]> = vectors.iter().map(AsRef::as_ref).collect();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for k in i..n {
            let g = crate::linalg::dot(rows[i], rows[k]);
            gram[i * n + k] = g;
            gram[k * n + i] = g;
        }
    }
    // Hadamard: det G <= prod G_ii, so this keeps the breakdown test scale-free.
    let scale = (0..n).map(|i| gram[i * n + i]).product::<f64>().max(1.0);
    let det = det_in_place(&mut gram, n);
    if det < -DEFAULT_ABS_TOL * scale {
        return Err(Error::NumericalBreakdown(det));
    }
    Ok(det.max(0.0).sqrt())
}

/// Scale-invariant dependence threshold: `rel_tol` times the product of the
/// Euclidean lengths.
pub fn independence_threshold<V: AsRef<[f64]>>(vectors: &[V], params: &NormParams) -> f64 {
    params.rel_tol * vectors.iter().map(|v| euclidean_norm(v.as_ref())).product::<f64>()
}

pub fn is_linearly_independent<V: AsRef<[f64]>>(vectors: &[V], params: &NormParams) -> Result<bool> {
    let value = lp_n_norm(vectors, params)?;
    Ok(value > independence_threshold(vectors, params))
}

/// Outcome of one axiom over all samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct AxiomCheck {
    pub checked: usize,
    pub violations: usize,
    /// Largest normalized excess seen; positive values beyond tolerance are
    /// violations.
    pub worst: f64,
}

impl AxiomCheck {
    fn record(&mut self, excess: f64, violated: bool) {
        self.checked += 1;
        if violated {
            self.violations += 1;
        }
        if self.checked == 1 || excess > self.worst {
            self.worst = excess;
        }
    }

    fn merge(&mut self, other: &AxiomCheck) {
        if other.checked == 0 {
            return;
        }
        if self.checked == 0 || other.worst > self.worst {
            self.worst = other.worst;
        }
        self.checked += other.checked;
        self.violations += other.violations;
    }
}

/// Pass/fail counts for the four n-norm axioms on sampled tuples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub params: NormParams,
    pub samples: usize,
    pub seed: u64,
    /// Axiom (i): nonnegativity, zero on dependent tuples, positive on
    /// independent ones.
    pub nonnegativity: AxiomCheck,
    /// Axiom (ii): all `n!` argument orders agree.
    pub permutation: AxiomCheck,
    /// Axiom (iii): `|alpha|`-homogeneity in the first argument.
    pub homogeneity: AxiomCheck,
    /// Axiom (iv): triangle inequality in the first argument.
    pub triangle: AxiomCheck,
}

impl AxiomReport {
    pub fn violations(&self) -> usize {
        self.nonnegativity.violations
            + self.permutation.violations
            + self.homogeneity.violations
            + self.triangle.violations
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

#[derive(Default)]
struct AxiomTally {
    nonnegativity: AxiomCheck,
    permutation: AxiomCheck,
    homogeneity: AxiomCheck,
    triangle: AxiomCheck,
}

/// Samples random tuples from a seeded generator and checks axioms (i)-(iv).
///
/// Dependent tuples are built explicitly (one slot replaced by a random
/// combination of the others) since dependence has measure zero.
pub fn check_axioms(params: &NormParams, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    if sample_count == 0 {
        return Err(Error::InvalidParameter("sample_count must be at least 1".into()));
    }
    let (n, d, p) = (params.n, params.d, params.p);
    let (rel, abs) = (params.rel_tol, params.abs_tol);
    let perms = permutations(n);

    let shards = map_shards(seed, sample_count, |range, rng| {
        let mut t = AxiomTally::default();
        for _ in range {
            let xs: Vec<Vec<f64>> = (0..n).map(|_| normal_vector(rng, d)).collect();
            let extra = normal_vector(rng, d);
            let alpha = uniform(rng, -5.0, 5.0);
            let slot = (uniform(rng, 0.0, n as f64) as usize).min(n - 1);
            let coeffs: Vec<f64> = (0..n).map(|_| uniform(rng, -2.0, 2.0)).collect();

            let rows: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
            let base = n_norm_unchecked(&rows, p);
            let lengths: f64 = xs.iter().map(|v| euclidean_norm(v)).product();

            // (i) nonnegative, and positive on a generic tuple.
            let threshold = rel * lengths;
            let excess = if base < 0.0 {
                -base
            } else {
                (threshold - base) / lengths.max(1.0)
            };
            t.nonnegativity.record(excess, base < 0.0 || base <= threshold);

            // (i) zero on a constructed dependent tuple.
            let mut dep = xs.clone();
            if n == 1 {
                dep[0] = vec![0.0; d];
            } else {
                let mut combo = vec![0.0; d];
                for (k, v) in xs.iter().enumerate().filter(|(k, _)| *k != slot) {
                    for (c, x) in combo.iter_mut().zip(v) {
                        *c += coeffs[k] * x;
                    }
                }
                dep[slot] = combo;
            }
            let dep_rows: Vec<&[f64]> = dep.iter().map(Vec::as_slice).collect();
            let dep_value = n_norm_unchecked(&dep_rows, p);
            let dep_scale = dep.iter().map(|v| euclidean_norm(v)).product::<f64>().max(1.0);
            t.nonnegativity
                .record(dep_value / dep_scale - abs, dep_value > abs * dep_scale);

            // (ii) every ordering of the arguments.
            let mut worst_perm: f64 = 0.0;
            for perm in &perms {
                let permuted: Vec<&[f64]> = perm.iter().map(|&i| rows[i]).collect();
                let v = n_norm_unchecked(&permuted, p);
                worst_perm = worst_perm.max((v - base).abs() / base.max(abs));
            }
            t.permutation.record(worst_perm - rel, worst_perm > rel);

            // (iii) homogeneity in the first argument.
            let scaled_first: Vec<f64> = xs[0].iter().map(|x| alpha * x).collect();
            let mut scaled_rows = rows.clone();
            scaled_rows[0] = &scaled_first;
            let scaled = n_norm_unchecked(&scaled_rows, p);
            let expected = alpha.abs() * base;
            let err = (scaled - expected).abs();
            let allowed = rel * expected + abs;
            t.homogeneity.record((err - allowed) / expected.max(1.0), err > allowed);

            // (iv) triangle inequality in the first argument.
            let summed: Vec<f64> = xs[0].iter().zip(&extra).map(|(a, b)| a + b).collect();
            let mut sum_rows = rows.clone();
            sum_rows[0] = &summed;
            let lhs = n_norm_unchecked(&sum_rows, p);
            let mut extra_rows = rows.clone();
            extra_rows[0] = &extra;
            let rhs = base + n_norm_unchecked(&extra_rows, p);
            let excess = lhs - rhs;
            let allowed = rel * rhs + abs;
            t.triangle.record((excess - allowed) / rhs.max(1.0), excess > allowed);
        }
        t
    });

    let mut total = AxiomTally::default();
    for s in &shards {
        total.nonnegativity.merge(&s.nonnegativity);
        total.permutation.merge(&s.permutation);
        total.homogeneity.merge(&s.homogeneity);
        total.triangle.merge(&s.triangle);
    }
    Ok(AxiomReport {
        params: *params,
        samples: sample_count,
        seed,
        nonnegativity: total.nonnegativity,
        permutation: total.permutation,
        homogeneity: total.homogeneity,
        triangle: total.triangle,
    })
}
