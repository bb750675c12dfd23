//! Norm equivalences on truncated lp.
//!
//! Three norms are compared on `R^d`, each relative to an anchor set `Y`:
//!
//! * the usual `||x||_p`,
//! * `||x||*_p`, the p-sum of the class-1 norms of `x`,
//! * the class-n norm `||x||*_{1..n}`, their plain sum.
//!
//! With `V = ||y_1, ..., y_n||_p`, `L = sum_i ||y_i||_p` and
//! `P = sum_i prod_{k != i} ||y_k||_p^p`:
//!
//! ```text
//! n V / ((2n - 1) L) ||x||_p  <=  ||x||*_p        <=  (n!)^(1 - 1/p)     P^(1/p) ||x||_p
//! ||x||*_p                    <=  ||x||*_{1..n}   <=  n^(1 - 1/p) ||x||*_p
//! n V / ((2n - 1) L) ||x||_p  <=  ||x||*_{1..n}   <=  (n n!)^(1 - 1/p) P^(1/p) ||x||_p
//! ```

use crate::combinatorics::factorial;
use crate::error::Result;
use crate::nnorm::{check_exponent, independence_threshold, pow_p, root_p, validate_vectors};
use crate::quotient::{AnchorSet, IndexSubset};
use crate::rng::{normal_vector, stream};
use serde::Serialize;

/// `(sum |x_i|^p)^(1/p)`.
pub fn usual_lp_norm(x: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    validate_vectors(&[x], x.len())?;
    Ok(root_p(x.iter().map(|v| pow_p(v.abs(), p)).sum(), p))
}

/// `||x||*_p`: the p-sum of the class-1 norms of `x`, at the anchors'
/// exponent.
pub fn star_p_norm(x: &[f64], anchors: &AnchorSet) -> Result<f64> {
    let p = anchors.p();
    let class1 = anchors.class1_norms(x)?;
    Ok(root_p(class1.iter().map(|&v| pow_p(v, p)).sum(), p))
}

/// The class-n norm `||x||*_{1..n}`.
pub fn class_n_norm(x: &[f64], anchors: &AnchorSet) -> Result<f64> {
    anchors.classm_norm(x, &IndexSubset::full(anchors.n()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceCheck {
    /// `||.||*_p` against `||.||_p`.
    StarVsUsual,
    /// `||.||*_{1..n}` against `||.||*_p`.
    ClassNVsStar,
    /// `||.||*_{1..n}` against `||.||_p`.
    ClassNVsUsual,
}

impl EquivalenceCheck {
    pub const ALL: [EquivalenceCheck; 3] = [Self::StarVsUsual, Self::ClassNVsStar, Self::ClassNVsUsual];

    pub fn name(self) -> &'static str {
        match self {
            Self::StarVsUsual => "star-vs-usual",
            Self::ClassNVsStar => "classn-vs-star",
            Self::ClassNVsUsual => "classn-vs-usual",
        }
    }
}

/// One evaluated inequality chain `lower <= mid <= upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceEntry {
    pub lower_constant: f64,
    pub upper_constant: f64,
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    /// Tightest relative margin of the two sides; negative means violated.
    pub slack: f64,
    pub pass: bool,
}

fn relative_margin(small: f64, large: f64) -> f64 {
    let scale = small.abs().max(large.abs());
    if scale == 0.0 {
        0.0
    } else {
        (large - small) / scale
    }
}

impl EquivalenceEntry {
    fn new(lower_constant: f64, upper_constant: f64, base: f64, mid: f64, rel_tol: f64) -> Self {
        Self::from_bounds(
            lower_constant,
            upper_constant,
            lower_constant * base,
            mid,
            upper_constant * base,
            rel_tol,
        )
    }

    fn from_bounds(lower_constant: f64, upper_constant: f64, lower: f64, mid: f64, upper: f64, rel_tol: f64) -> Self {
        let slack = relative_margin(lower, mid).min(relative_margin(mid, upper));
        Self {
            lower_constant,
            upper_constant,
            lower,
            mid,
            upper,
            slack,
            pass: slack >= -rel_tol,
        }
    }
}

/// Constants depending only on the anchors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnchorConstants {
    /// `n V / ((2n - 1) L)`.
    pub lower: f64,
    /// `(n!)^(1 - 1/p) P^(1/p)`.
    pub star_upper: f64,
    /// `n^(1 - 1/p)`.
    pub class_ratio: f64,
    /// `(n n!)^(1 - 1/p) P^(1/p)`.
    pub class_upper: f64,
}

pub fn anchor_constants(anchors: &AnchorSet) -> Result<AnchorConstants> {
    let (n, p) = (anchors.n(), anchors.p());
    let lengths: Vec<f64> = anchors
        .vectors()
        .iter()
        .map(|y| usual_lp_norm(y, p))
        .collect::<Result<_>>()?;
    let lower = n as f64 * anchors.volume() / ((2 * n - 1) as f64 * lengths.iter().sum::<f64>());
    let products: f64 = (0..n)
        .map(|i| {
            lengths
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, &l)| pow_p(l, p))
                .product::<f64>()
        })
        .sum();
    let exponent = 1.0 - 1.0 / p;
    let fact = factorial(n);
    let sum_root = root_p(products, p);
    Ok(AnchorConstants {
        lower,
        star_upper: fact.powf(exponent) * sum_root,
        class_ratio: (n as f64).powf(exponent),
        class_upper: (n as f64 * fact).powf(exponent) * sum_root,
    })
}

/// `lower ||x||_p <= ||x||*_p <= upper ||x||_p`.
pub fn check_theorem_equivalent(x: &[f64], anchors: &AnchorSet) -> Result<EquivalenceEntry> {
    let c = anchor_constants(anchors)?;
    let base = usual_lp_norm(x, anchors.p())?;
    let mid = star_p_norm(x, anchors)?;
    Ok(EquivalenceEntry::new(
        c.lower,
        c.star_upper,
        base,
        mid,
        anchors.params().rel_tol(),
    ))
}

/// `||x||*_p <= ||x||*_{1..n} <= n^(1 - 1/p) ||x||*_p`.
pub fn check_prop1(x: &[f64], anchors: &AnchorSet) -> Result<EquivalenceEntry> {
    let c = anchor_constants(anchors)?;
    let base = star_p_norm(x, anchors)?;
    let mid = class_n_norm(x, anchors)?;
    Ok(EquivalenceEntry::new(
        1.0,
        c.class_ratio,
        base,
        mid,
        anchors.params().rel_tol(),
    ))
}

/// `lower ||x||_p <= ||x||*_{1..n} <= (n n!)^(1 - 1/p) P^(1/p) ||x||_p`.
pub fn check_corollary_combined(x: &[f64], anchors: &AnchorSet) -> Result<EquivalenceEntry> {
    let c = anchor_constants(anchors)?;
    let base = usual_lp_norm(x, anchors.p())?;
    let mid = class_n_norm(x, anchors)?;
    Ok(EquivalenceEntry::new(
        c.lower,
        c.class_upper,
        base,
        mid,
        anchors.params().rel_tol(),
    ))
}

/// All three checks, in [`EquivalenceCheck::ALL`] order, from a single
/// evaluation of the class-1 norms.
pub fn check_all(x: &[f64], anchors: &AnchorSet) -> Result<[EquivalenceEntry; 3]> {
    let (p, rel_tol) = (anchors.p(), anchors.params().rel_tol());
    let c = anchor_constants(anchors)?;
    let base = usual_lp_norm(x, p)?;
    let class1 = anchors.class1_norms(x)?;
    let star = root_p(class1.iter().map(|&v| pow_p(v, p)).sum(), p);
    let class_n: f64 = class1.iter().sum();
    Ok([
        EquivalenceEntry::new(c.lower, c.star_upper, base, star, rel_tol),
        EquivalenceEntry::new(1.0, c.class_ratio, star, class_n, rel_tol),
        EquivalenceEntry::new(c.lower, c.class_upper, base, class_n, rel_tol),
    ])
}

pub fn check(kind: EquivalenceCheck, x: &[f64], anchors: &AnchorSet) -> Result<EquivalenceEntry> {
    match kind {
        EquivalenceCheck::StarVsUsual => check_theorem_equivalent(x, anchors),
        EquivalenceCheck::ClassNVsStar => check_prop1(x, anchors),
        EquivalenceCheck::ClassNVsUsual => check_corollary_combined(x, anchors),
    }
}

/// Margin required of random anchors over the plain independence threshold.
pub const ANCHOR_MARGIN: f64 = 10.0;

/// Draws standard-normal anchors until they clear [`ANCHOR_MARGIN`] times the
/// independence threshold.
pub fn random_anchors(rng: &mut crate::rng::SampleRng, n: usize, d: usize, p: f64) -> Result<AnchorSet> {
    loop {
        let vectors: Vec<Vec<f64>> = (0..n).map(|_| normal_vector(rng, d)).collect();
        let Ok(anchors) = AnchorSet::new(vectors, p) else {
            continue;
        };
        if anchors.volume() > ANCHOR_MARGIN * independence_threshold(anchors.vectors(), anchors.params()) {
            return Ok(anchors);
        }
    }
}

/// Ambient dimensions sampled for a given `n`: `n`, `n + 2` and 8.
pub fn default_dims(n: usize) -> Vec<usize> {
    let mut dims = vec![n, n + 2, 8.max(n)];
    dims.sort_unstable();
    dims.dedup();
    dims
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchConfig {
    pub n: usize,
    pub p: f64,
    pub dims: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
}

impl BatchConfig {
    pub fn new(n: usize, p: f64, samples: usize, seed: u64) -> Self {
        Self {
            n,
            p,
            dims: default_dims(n),
            samples,
            seed,
        }
    }
}

/// One CSV row: a sample, a check, and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchRow {
    pub seed: u64,
    pub sample: usize,
    pub n: usize,
    pub p: f64,
    pub d: usize,
    pub check: &'static str,
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: &'static str,
    pub samples: usize,
    pub failures: usize,
    /// Tightest relative margin observed.
    pub min_slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchReport {
    pub config: BatchConfig,
    pub checks: Vec<CheckSummary>,
    pub pass: bool,
    #[serde(skip)]
    pub rows: Vec<BatchRow>,
}

/// Runs all three checks on `samples` seeded `(x, Y)` draws. Sample `i`
/// draws from stream `i` of the seed and uses `dims[i % dims.len()]`.
pub fn run_batch(config: &BatchConfig) -> Result<BatchReport> {
    check_exponent(config.p)?;
    if config.dims.is_empty() || config.dims.iter().any(|&d| d < config.n) || config.n == 0 {
        return Err(crate::Error::InvalidParameter(format!(
            "every dimension must be at least n = {} (dims = {:?})",
            config.n, config.dims
        )));
    }
    let mut rows = Vec::with_capacity(config.samples * 3);
    let mut summaries: Vec<CheckSummary> = EquivalenceCheck::ALL
        .iter()
        .map(|k| CheckSummary {
            check: k.name(),
            samples: 0,
            failures: 0,
            min_slack: f64::INFINITY,
            pass: true,
        })
        .collect();
    for sample in 0..config.samples {
        let d = config.dims[sample % config.dims.len()];
        let mut rng = stream(config.seed, sample as u64);
        let anchors = random_anchors(&mut rng, config.n, d, config.p)?;
        let x = normal_vector(&mut rng, d);
        let entries = check_all(&x, &anchors)?;
        for ((kind, summary), e) in EquivalenceCheck::ALL.iter().zip(summaries.iter_mut()).zip(entries) {
            summary.samples += 1;
            summary.failures += usize::from(!e.pass);
            summary.min_slack = summary.min_slack.min(e.slack);
            summary.pass &= e.pass;
            rows.push(BatchRow {
                seed: config.seed,
                sample,
                n: config.n,
                p: config.p,
                d,
                check: kind.name(),
                lower: e.lower,
                mid: e.mid,
                upper: e.upper,
                slack: e.slack,
                pass: e.pass,
            });
        }
    }
    let pass = summaries.iter().all(|s| s.pass);
    Ok(BatchReport {
        config: config.clone(),
        checks: summaries,
        pass,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn e2() -> AnchorSet {
        AnchorSet::standard_basis(2, 2, 2.0).unwrap()
    }

    #[test]
    fn usual_norm_examples() {
        assert_eq!(usual_lp_norm(&[3.0, 4.0], 2.0).unwrap(), 5.0);
        assert_eq!(usual_lp_norm(&[1.0, 1.0, 1.0], 1.0).unwrap(), 3.0);
        assert_eq!(usual_lp_norm(&[1.0, 2.0, 2.0], 2.0).unwrap(), 3.0);
        assert!(usual_lp_norm(&[1.0], 0.5).is_err());
    }

    #[test]
    fn star_norm_examples() {
        assert_eq!(star_p_norm(&[3.0, 4.0], &e2()).unwrap(), 5.0);
        assert_eq!(star_p_norm(&[1.0, 0.0], &e2()).unwrap(), 1.0);
        assert_eq!(star_p_norm(&[0.0, 0.0], &e2()).unwrap(), 0.0);
        let p3 = AnchorSet::standard_basis(2, 2, 3.0).unwrap();
        assert_eq!(star_p_norm(&[1.0, 0.0], &p3).unwrap(), 1.0);
    }

    #[test]
    fn worked_instance() {
        let t = check_theorem_equivalent(&[3.0, 4.0], &e2()).unwrap();
        assert_relative_eq!(t.lower, 5.0 / 3.0, max_relative = 1e-15);
        assert_eq!(t.mid, 5.0);
        assert_relative_eq!(t.upper, 10.0, max_relative = 1e-15);
        assert!(t.pass);

        let p = check_prop1(&[3.0, 4.0], &e2()).unwrap();
        assert_eq!((p.lower, p.mid), (5.0, 7.0));
        assert_relative_eq!(p.upper, 5.0 * 2f64.sqrt(), max_relative = 1e-15);
        assert!(p.pass);

        let c = check_corollary_combined(&[3.0, 4.0], &e2()).unwrap();
        assert_relative_eq!(c.upper, 10.0 * 2f64.sqrt(), max_relative = 1e-15);
        assert!(c.pass);
    }

    #[test]
    fn zero_vector_passes_trivially() {
        for kind in EquivalenceCheck::ALL {
            let e = check(kind, &[0.0, 0.0], &e2()).unwrap();
            assert_eq!((e.lower, e.mid, e.upper), (0.0, 0.0, 0.0));
            assert!(e.pass);
        }
    }

    #[test]
    fn p_one_makes_sum_and_psum_agree() {
        let y = AnchorSet::new(vec![vec![1.0, 0.5, -0.2], vec![0.3, -1.0, 0.8]], 1.0).unwrap();
        let e = check_prop1(&[0.4, 1.1, -0.7], &y).unwrap();
        assert_eq!(e.upper_constant, 1.0);
        assert_relative_eq!(e.mid, e.lower, max_relative = 1e-15);
    }

    #[test]
    fn combined_evaluation_matches_individual_checks() {
        let y = AnchorSet::new(vec![vec![1.0, 0.5, -0.2, 0.1], vec![0.3, -1.0, 0.8, 0.0]], 1.5).unwrap();
        let x = [0.4, 1.1, -0.7, 2.0];
        let all = check_all(&x, &y).unwrap();
        for (kind, e) in EquivalenceCheck::ALL.into_iter().zip(all) {
            assert_eq!(check(kind, &x, &y).unwrap(), e);
        }
    }

    #[test]
    fn batch_is_deterministic() {
        let cfg = BatchConfig::new(3, 1.5, 60, 7);
        let a = run_batch(&cfg).unwrap();
        assert!(a.pass, "{:?}", a.checks);
        assert_eq!(a.rows.len(), 180);
        assert_eq!(a, run_batch(&cfg).unwrap());
        assert!(run_batch(&BatchConfig { dims: vec![2], ..cfg }).is_err());
    }
}
