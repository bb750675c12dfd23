//! Quotient norms derived from an anchor set.
//!
//! Given linearly independent anchors `Y = {y_1, ..., y_n}`, the class-1
//! norm `||u||*_i` is the n-norm of `u` together with every anchor except
//! `y_i`. It vanishes exactly on `span(Y \ {y_i})`, so it is a norm on the
//! quotient by that span. A class-m norm `||u||*_S` for an index subset `S`
//! of size `m` is the sum of the class-1 norms over `S`, and the class-m
//! collection holds all `C(n, m)` of them.
//!
//! Indices follow the mathematical convention and run over `1..=n`.

use crate::combinatorics::{binomial, combinations};
use crate::error::{Error, Result};
use crate::linalg::euclidean_norm;
use crate::nnorm::{
    independence_threshold, n_norm_unchecked, validate_vectors, NormParams, DEFAULT_ABS_TOL, DEFAULT_REL_TOL,
};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A strictly increasing set of 1-based anchor indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSubset(Vec<usize>);

impl IndexSubset {
    /// Validates `indices` against `1..=n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let subset = Self::try_from(indices)?;
        subset.check(n)?;
        Ok(subset)
    }

    pub fn full(n: usize) -> Self {
        Self((1..=n).collect())
    }

    pub fn singleton(i: usize) -> Self {
        Self(vec![i])
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Checks that every index lies in `1..=n`.
    pub fn check(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last > n => Err(Error::IndexOutOfRange { index: last, n }),
            _ => Ok(()),
        }
    }
}

impl TryFrom<Vec<usize>> for IndexSubset {
    type Error = Error;

    fn try_from(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSubset("subset is empty".into()));
        }
        if indices[0] == 0 {
            return Err(Error::InvalidSubset("indices start at 1".into()));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(format!(
                "indices must be strictly increasing: {indices:?}"
            )));
        }
        Ok(Self(indices))
    }
}

impl From<IndexSubset> for Vec<usize> {
    fn from(s: IndexSubset) -> Self {
        s.0
    }
}

impl fmt::Display for IndexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl FromStr for IndexSubset {
    type Err = Error;

    /// Parses `"1,3"`, `"{1,3}"` or `"[1,3]"`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_matches(|c| matches!(c, '{' | '}' | '[' | ']'));
        let indices = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidSubset(format!("not an index: {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::try_from(indices)
    }
}

/// All `C(n, m)` subsets of size `m`, lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassCollection {
    pub n: usize,
    pub m: usize,
    pub subsets: Vec<IndexSubset>,
}

fn check_class(n: usize, m: usize) -> Result<()> {
    if m == 0 || m > n {
        return Err(Error::ClassOutOfRange { m, n });
    }
    Ok(())
}

pub fn enumerate_class(n: usize, m: usize) -> Result<ClassCollection> {
    check_class(n, m)?;
    let subsets: Vec<IndexSubset> = combinations(n, m)
        .into_iter()
        .map(|c| IndexSubset(c.into_iter().map(|i| i + 1).collect()))
        .collect();
    debug_assert_eq!(subsets.len(), binomial(n, m));
    Ok(ClassCollection { n, m, subsets })
}

/// `ceil(n / m)` subsets of size `m` whose union is `1..=n`: consecutive
/// blocks, with the last block right-aligned so it may overlap its
/// predecessor.
pub fn covering_family(n: usize, m: usize) -> Result<Vec<IndexSubset>> {
    check_class(n, m)?;
    let count = n.div_ceil(m);
    Ok((0..count)
        .map(|k| {
            let start = (k * m).min(n - m);
            IndexSubset((start + 1..=start + m).collect())
        })
        .collect())
}

/// Subsets to evaluate for a class-`m` diagnostic.
pub fn class_subsets(n: usize, m: usize, use_covering: bool) -> Result<Vec<IndexSubset>> {
    if use_covering {
        covering_family(n, m)
    } else {
        Ok(enumerate_class(n, m)?.subsets)
    }
}

#[derive(Deserialize)]
struct AnchorSetRepr {
    n: usize,
    p: f64,
    vectors: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct AnchorSetOut<'a> {
    n: usize,
    p: f64,
    vectors: &'a [Vec<f64>],
}

/// A validated, linearly independent anchor set `Y = {y_1, ..., y_n}`.
///
/// JSON form: `{"n": 2, "p": 2.0, "vectors": [[1, 0], [0, 1]]}`. The
/// independence check runs on load.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "AnchorSetRepr")]
pub struct AnchorSet {
    vectors: Vec<Vec<f64>>,
    params: NormParams,
}

impl TryFrom<AnchorSetRepr> for AnchorSet {
    type Error = Error;

    fn try_from(r: AnchorSetRepr) -> Result<Self> {
        if r.n != r.vectors.len() {
            return Err(Error::ArityMismatch {
                expected: r.n,
                found: r.vectors.len(),
            });
        }
        AnchorSet::new(r.vectors, r.p)
    }
}

impl Serialize for AnchorSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AnchorSetOut {
            n: self.n(),
            p: self.p(),
            vectors: &self.vectors,
        }
        .serialize(s)
    }
}

impl AnchorSet {
    pub fn new(vectors: Vec<Vec<f64>>, p: f64) -> Result<Self> {
        Self::with_tolerances(vectors, p, DEFAULT_REL_TOL, DEFAULT_ABS_TOL)
    }

    pub fn with_tolerances(vectors: Vec<Vec<f64>>, p: f64, rel_tol: f64, abs_tol: f64) -> Result<Self> {
        let n = vectors.len();
        let d = vectors.first().map_or(0, Vec::len);
        let params = NormParams::with_tolerances(n, p, d, rel_tol, abs_tol)?;
        validate_vectors(&vectors, d)?;
        let rows: Vec<&[f64]> = vectors.iter().map(Vec::as_slice).collect();
        if n_norm_unchecked(&rows, p) <= independence_threshold(&vectors, &params) {
            return Err(Error::DependentAnchors);
        }
        Ok(Self { vectors, params })
    }

    /// The first `n` standard basis vectors of `R^d`.
    pub fn standard_basis(n: usize, d: usize, p: f64) -> Result<Self> {
        let vectors = (0..n)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(vectors, p)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
    pub fn params(&self) -> &NormParams {
        &self.params
    }
    pub fn n(&self) -> usize {
        self.params.n()
    }
    pub fn d(&self) -> usize {
        self.params.d()
    }
    pub fn p(&self) -> f64 {
        self.params.p()
    }

    /// `||anchors||_p`, the n-norm of the anchors themselves.
    pub fn volume(&self) -> f64 {
        let rows: Vec<&[f64]> = self.vectors.iter().map(Vec::as_slice).collect();
        n_norm_unchecked(&rows, self.p())
    }

    fn check_vector(&self, u: &[f64]) -> Result<()> {
        validate_vectors(&[u], self.d())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n() {
            return Err(Error::IndexOutOfRange { index: i, n: self.n() });
        }
        Ok(())
    }

    fn class1_unchecked(&self, u: &[f64], i: usize) -> f64 {
        let mut rows: Vec<&[f64]> = Vec::with_capacity(self.n());
        rows.push(u);
        rows.extend(
            self.vectors
                .iter()
                .enumerate()
                .filter(|(k, _)| k + 1 != i)
                .map(|(_, v)| v.as_slice()),
        );
        n_norm_unchecked(&rows, self.p())
    }

    /// `||u||*_i = ||u, y_1, ..., y_{i-1}, y_{i+1}, ..., y_n||`.
    pub fn class1_norm(&self, u: &[f64], i: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_vector(u)?;
        Ok(self.class1_unchecked(u, i))
    }

    /// Every class-1 norm of `u`, indexed `0..n` for anchors `1..=n`.
    pub fn class1_norms(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_vector(u)?;
        Ok((1..=self.n()).map(|i| self.class1_unchecked(u, i)).collect())
    }

    /// `||u||*_S`, summed over `S` in ascending index order.
    pub fn classm_norm(&self, u: &[f64], subset: &IndexSubset) -> Result<f64> {
        subset.check(self.n())?;
        self.check_vector(u)?;
        Ok(subset.indices().iter().map(|&i| self.class1_unchecked(u, i)).sum())
    }

    /// Scale used to decide whether a quotient norm of `u` is zero:
    /// `|u|_2 * max_k |y_k|_2^(n-1)`, homogeneous of the same degree as the
    /// n-norm in every argument.
    pub fn zero_scale(&self, u: &[f64]) -> f64 {
        let max_anchor = self.vectors.iter().map(|v| euclidean_norm(v)).fold(0.0f64, f64::max);
        euclidean_norm(u) * max_anchor.powi(self.n() as i32 - 1)
    }

    /// True iff `u` lies in `span(Y \ {y_i : i in S})` up to tolerance, i.e.
    /// its coset in the `S` quotient is zero.
    pub fn quotient_zero_check(&self, u: &[f64], subset: &IndexSubset) -> Result<bool> {
        let value = self.classm_norm(u, subset)?;
        Ok(value <= self.params.abs_tol() * self.zero_scale(u))
    }
}

/// Sums precomputed class-1 values over `subset`, ascending. Bitwise equal
/// to [`AnchorSet::classm_norm`] on the same vector.
pub fn sum_over(class1: &[f64], subset: &IndexSubset) -> f64 {
    subset.indices().iter().map(|&i| class1[i - 1]).sum()
}
