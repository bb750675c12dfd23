//! Contraction constants, class propagation, and Banach iteration with
//! respect to class-m quotient norms.

use crate::error::{Error, Result};
use crate::linalg::sub;
use crate::mapping::{DomainSampler, Mapping, SelfMap};
use crate::nnorm::validate_vectors;
use crate::quotient::{covering_family, enumerate_class, sum_over, AnchorSet, IndexSubset};
use crate::rng::map_shards;
use serde::{Deserialize, Serialize};

/// Number of consecutive step-norm increases that aborts an iteration.
pub const DIVERGENCE_STREAK: usize = 10;

/// Sup of sampled ratios for one subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetValue {
    pub subset: IndexSubset,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionEstimate {
    pub m: usize,
    pub per_subset: Vec<SubsetValue>,
    pub c_hat: f64,
    pub pairs_used: usize,
    /// Sampled estimates are lower bounds on the true constant and are never
    /// certified; only exact computations set this.
    pub is_certified: bool,
}

/// Class-1 norms of `T x - T y` and of `x - y` for one sampled pair.
struct PairNorms {
    image: Vec<f64>,
    source: Vec<f64>,
    /// Denominators at or below this are treated as zero.
    floor: f64,
}

impl PairNorms {
    fn ratio(&self, subset: &IndexSubset) -> Option<f64> {
        let den = sum_over(&self.source, subset);
        (den > self.floor).then(|| sum_over(&self.image, subset) / den)
    }
}

fn sample_pairs<T: SelfMap + Sync + ?Sized>(
    map: &T,
    sampler: &DomainSampler,
    anchors: &AnchorSet,
    num_pairs: usize,
    seed: u64,
) -> Result<Vec<PairNorms>> {
    if num_pairs == 0 {
        return Err(Error::InvalidParameter("num_pairs must be at least 1".into()));
    }
    if sampler.dim() != anchors.d() {
        return Err(Error::DimensionMismatch {
            expected: anchors.d(),
            found: sampler.dim(),
        });
    }
    let abs_tol = anchors.params().abs_tol();
    let shards = map_shards(seed, num_pairs, |range, rng| -> Result<Vec<PairNorms>> {
        range
            .map(|_| {
                let (x, y) = sampler.pair(rng);
                let dx = sub(&x, &y);
                let dt = sub(&map.apply(&x)?, &map.apply(&y)?);
                validate_vectors(&[&dt], anchors.d())?;
                Ok(PairNorms {
                    image: anchors.class1_norms(&dt)?,
                    source: anchors.class1_norms(&dx)?,
                    floor: abs_tol * anchors.zero_scale(&dx),
                })
            })
            .collect()
    });
    let mut pairs = Vec::with_capacity(num_pairs);
    for shard in shards {
        pairs.extend(shard?);
    }
    Ok(pairs)
}

fn estimate_from(pairs: &[PairNorms], subsets: &[IndexSubset], m: usize) -> Result<ContractionEstimate> {
    let mut per_subset: Vec<SubsetValue> = subsets
        .iter()
        .map(|s| SubsetValue {
            subset: s.clone(),
            value: 0.0,
        })
        .collect();
    let mut pairs_used = 0;
    for pair in pairs {
        let mut used = false;
        for entry in per_subset.iter_mut() {
            if let Some(r) = pair.ratio(&entry.subset) {
                entry.value = entry.value.max(r);
                used = true;
            }
        }
        pairs_used += usize::from(used);
    }
    if pairs_used == 0 {
        return Err(Error::NoInformativePairs(pairs.len()));
    }
    let c_hat = per_subset.iter().map(|e| e.value).fold(0.0, f64::max);
    Ok(ContractionEstimate {
        m,
        per_subset,
        c_hat,
        pairs_used,
        is_certified: false,
    })
}

/// Largest observed ratio `||Tx - Ty||*_S / ||x - y||*_S` per class-`m`
/// subset. A lower bound on the Lipschitz constant, never certified.
pub fn estimate_contraction<T: SelfMap + Sync + ?Sized>(
    map: &T,
    sampler: &DomainSampler,
    anchors: &AnchorSet,
    m: usize,
    num_pairs: usize,
    seed: u64,
) -> Result<ContractionEstimate> {
    let subsets = enumerate_class(anchors.n(), m)?.subsets;
    let pairs = sample_pairs(map, sampler, anchors, num_pairs, seed)?;
    estimate_from(&pairs, &subsets, m)
}

/// Exact constant where [`Mapping::certified_contraction`] can compute one.
pub fn certify(map: &Mapping, anchors: &AnchorSet, m: usize) -> Result<ContractionEstimate> {
    let c = map.certified_contraction(anchors, m)?;
    let per_subset = enumerate_class(anchors.n(), m)?
        .subsets
        .into_iter()
        .map(|subset| SubsetValue { subset, value: c })
        .collect();
    Ok(ContractionEstimate {
        m,
        per_subset,
        c_hat: c,
        pairs_used: 0,
        is_certified: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagationDirection {
    /// Class-m ratio bounded by the class-1 constant.
    ClassOneToM,
    /// Class-n ratio bounded by the class-m constant.
    ClassMToN,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub pair: usize,
    pub direction: PropagationDirection,
    pub subset: IndexSubset,
    pub ratio: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationReport {
    pub m: usize,
    pub c1: f64,
    pub cm: f64,
    pub cn: f64,
    pub pairs: usize,
    pub checks: usize,
    pub violations: usize,
    /// Largest `ratio - bound` seen over all checks.
    pub worst_excess: f64,
    /// First few counterexamples, in pair order.
    pub counterexamples: Vec<Counterexample>,
    pub holds: bool,
}

const MAX_COUNTEREXAMPLES: usize = 16;

/// Checks pairwise that class-m ratios stay below the class-1 constant and
/// the class-n ratio below the class-m constant.
pub fn verify_class_propagation<T: SelfMap + Sync + ?Sized>(
    map: &T,
    sampler: &DomainSampler,
    anchors: &AnchorSet,
    m: usize,
    num_pairs: usize,
    seed: u64,
) -> Result<PropagationReport> {
    let n = anchors.n();
    let rel_tol = anchors.params().rel_tol();
    let class1 = enumerate_class(n, 1)?.subsets;
    let class_m = enumerate_class(n, m)?.subsets;
    let class_n = enumerate_class(n, n)?.subsets;
    let pairs = sample_pairs(map, sampler, anchors, num_pairs, seed)?;
    let c1 = estimate_from(&pairs, &class1, 1)?.c_hat;
    let cm = estimate_from(&pairs, &class_m, m)?.c_hat;
    let cn = estimate_from(&pairs, &class_n, n)?.c_hat;

    let mut checks = 0;
    let mut violations = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut counterexamples = Vec::new();
    let mut test = |pair: usize, direction, subset: &IndexSubset, ratio: f64, bound: f64| {
        checks += 1;
        worst_excess = worst_excess.max(ratio - bound);
        if ratio > bound + rel_tol {
            violations += 1;
            if counterexamples.len() < MAX_COUNTEREXAMPLES {
                counterexamples.push(Counterexample {
                    pair,
                    direction,
                    subset: subset.clone(),
                    ratio,
                    bound,
                });
            }
        }
    };
    for (k, pair) in pairs.iter().enumerate() {
        for s in &class_m {
            if let Some(r) = pair.ratio(s) {
                test(k, PropagationDirection::ClassOneToM, s, r, c1);
            }
        }
        if let Some(r) = pair.ratio(&class_n[0]) {
            test(k, PropagationDirection::ClassMToN, &class_n[0], r, cm);
        }
    }
    Ok(PropagationReport {
        m,
        c1,
        cm,
        cn,
        pairs: pairs.len(),
        checks,
        violations,
        worst_excess,
        counterexamples,
        holds: violations == 0,
    })
}

/// Componentwise box `[lower, upper]` that iterates are projected onto.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxBounds {
    /// Clamps `x` in place; returns whether anything moved.
    fn project(&self, x: &mut [f64]) -> bool {
        let mut moved = false;
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            let c = v.clamp(*lo, *hi);
            moved |= c != *v;
            *v = c;
        }
        moved
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub eps: f64,
    pub max_iter: usize,
    /// Contraction constant used for the a-priori bound trace.
    pub contraction: Option<f64>,
    pub bounds: Option<BoxBounds>,
    /// Keep every iterate in the result.
    pub trace: bool,
}

impl SolveOptions {
    pub fn new(eps: f64, max_iter: usize) -> Self {
        Self {
            eps,
            max_iter,
            contraction: None,
            bounds: None,
            trace: false,
        }
    }

    pub fn with_contraction(mut self, c: f64) -> Self {
        self.contraction = Some(c);
        self
    }

    pub fn with_bounds(mut self, bounds: BoxBounds) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointResult {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Full class-m norms of the last step `x_k - x_{k-1}`.
    pub residual_per_subset: Vec<SubsetValue>,
    /// Largest covering-family step norm at each iteration.
    pub step_trace: Vec<f64>,
    /// `C^k M / (1 - C)` for `k = 1..=iterations`, where `M` bounds every
    /// class-m norm of the first step. Empty without a contraction constant
    /// in `(0, 1)`.
    pub apriori_bound_trace: Vec<f64>,
    /// Number of iterations where the box projection moved the iterate.
    pub projections: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterates: Option<Vec<Vec<f64>>>,
}

fn max_over(class1: &[f64], subsets: &[IndexSubset]) -> f64 {
    subsets.iter().map(|s| sum_over(class1, s)).fold(0.0, f64::max)
}

/// Banach iteration `x_k = T(x_{k-1})`.
///
/// Stops once every covering-family norm of the last step is at most `eps`
/// and the full class confirms it. Hitting `max_iter` returns a result with
/// `converged = false`. Step norms that grow for [`DIVERGENCE_STREAK`]
/// consecutive iterations abort with [`Error::Diverged`].
pub fn banach_solve<T: SelfMap + ?Sized>(
    map: &T,
    x0: &[f64],
    anchors: &AnchorSet,
    m: usize,
    options: &SolveOptions,
) -> Result<FixedPointResult> {
    let eps = options.eps;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if options.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    let d = anchors.d();
    validate_vectors(&[x0], d)?;
    if let Some(b) = &options.bounds {
        validate_vectors(&[&b.lower, &b.upper], d)?;
    }
    let covering = covering_family(anchors.n(), m)?;
    let full = enumerate_class(anchors.n(), m)?.subsets;
    let contraction = options.contraction.filter(|c| *c > 0.0 && *c < 1.0);

    let mut x = x0.to_vec();
    let mut iterates = options.trace.then(|| vec![x.clone()]);
    let mut step_trace = Vec::new();
    let mut apriori_bound_trace = Vec::new();
    let mut first_step_bound = 0.0;
    let mut projections = 0;
    let mut growth = 0;
    let mut converged = false;
    let mut last_class1 = vec![0.0; anchors.n()];

    for k in 1..=options.max_iter {
        let mut next = map.apply(&x)?;
        if next.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: next.len(),
            });
        }
        if let Some(b) = &options.bounds {
            projections += usize::from(b.project(&mut next));
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIterate(k));
        }
        let class1 = anchors.class1_norms(&sub(&next, &x))?;
        let step = max_over(&class1, &covering);
        if k == 1 {
            first_step_bound = max_over(&class1, &full);
        }
        if let Some(c) = contraction {
            apriori_bound_trace.push(c.powi(k as i32) * first_step_bound / (1.0 - c));
        }
        if step_trace.last().is_some_and(|&prev| step > prev) {
            growth += 1;
        } else {
            growth = 0;
        }
        step_trace.push(step);
        x = next;
        if let Some(it) = iterates.as_mut() {
            it.push(x.clone());
        }
        last_class1 = class1;
        if growth >= DIVERGENCE_STREAK {
            return Err(Error::Diverged {
                iterations: k,
                growth_steps: growth,
            });
        }
        if step <= eps && max_over(&last_class1, &full) <= eps {
            converged = true;
            break;
        }
    }

    let residual_per_subset = full
        .into_iter()
        .map(|subset| SubsetValue {
            value: sum_over(&last_class1, &subset),
            subset,
        })
        .collect();
    Ok(FixedPointResult {
        solution: x,
        iterations: step_trace.len(),
        converged,
        residual_per_subset,
        step_trace,
        apriori_bound_trace,
        projections,
        iterates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UniquenessStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub solutions: Vec<Vec<f64>>,
    /// Largest class-m norm of a difference between two solutions.
    pub max_pairwise: f64,
    pub threshold: f64,
    /// Step tolerance each run was solved to.
    pub solve_eps: f64,
    pub status: UniquenessStatus,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

/// Solves from every start and compares the solutions; passes iff they lie
/// within `10 eps` of each other in every class-m norm.
///
/// With a known contraction constant `C`, each run is solved to
/// `eps (1 - C) / C` so its distance to the fixed point is at most `eps`.
pub fn uniqueness_probe<T: SelfMap + ?Sized>(
    map: &T,
    starts: &[Vec<f64>],
    anchors: &AnchorSet,
    m: usize,
    eps: f64,
    max_iter: usize,
    contraction: Option<f64>,
) -> Result<UniquenessReport> {
    if starts.len() < 2 {
        return Err(Error::InvalidParameter(
            "uniqueness probe needs at least 2 starts".into(),
        ));
    }
    let solve_eps = match contraction {
        Some(c) if c > 0.0 && c < 1.0 => eps * ((1.0 - c) / c).min(1.0),
        _ => eps,
    };
    let full = enumerate_class(anchors.n(), m)?.subsets;
    let options = SolveOptions::new(solve_eps, max_iter);
    let mut solutions = Vec::with_capacity(starts.len());
    let mut failures = Vec::new();
    for (i, s) in starts.iter().enumerate() {
        match banach_solve(map, s, anchors, m, &options) {
            Ok(r) if r.converged => solutions.push(r.solution),
            Ok(r) => failures.push(format!("start {i}: no convergence in {} iterations", r.iterations)),
            Err(Error::Diverged { iterations, .. }) => {
                failures.push(format!("start {i}: diverged after {iterations} iterations"))
            }
            Err(e) => return Err(e),
        }
    }
    let mut max_pairwise: f64 = 0.0;
    for i in 0..solutions.len() {
        for j in (i + 1)..solutions.len() {
            let class1 = anchors.class1_norms(&sub(&solutions[i], &solutions[j]))?;
            max_pairwise = max_pairwise.max(max_over(&class1, &full));
        }
    }
    let threshold = 10.0 * eps;
    let status = if !failures.is_empty() {
        UniquenessStatus::Inconclusive
    } else if max_pairwise <= threshold {
        UniquenessStatus::Pass
    } else {
        UniquenessStatus::Fail
    };
    Ok(UniquenessReport {
        solutions,
        max_pairwise,
        threshold,
        solve_eps,
        status,
        failures,
    })
}
