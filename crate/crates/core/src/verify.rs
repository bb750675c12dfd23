//! Seeded property suites, one per module, aggregated by `verify-all`.
//!
//! Every suite derives its generators from the run seed through
//! [`derive_seed`], so a report depends on nothing but its [`VerifyConfig`].
//! Reports carry no timings.

use crate::analysis::{check_cauchy, check_convergence, SequencePrefix, Status};
use crate::combinatorics::factorial;
use crate::error::Result;
use crate::fixedpoint::{
    banach_solve, certify, uniqueness_probe, verify_class_propagation, SolveOptions, UniquenessStatus,
};
use crate::linalg::{self, determinant, Lu};
use crate::lp::{self, random_anchors, BatchConfig, EquivalenceCheck};
use crate::mapping::{DomainSampler, Mapping};
use crate::nnorm::{check_axioms, gram_2_norm, lp_n_norm, pow_p, root_p, NormParams};
use crate::quotient::{covering_family, enumerate_class, AnchorSet, IndexSubset};
use crate::rng::{derive_seed, map_shards, normal_vector, stream, uniform, SampleRng};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Samples per configuration in the sampled suites.
    pub samples: usize,
    /// Number of random affine maps in the mapping suites.
    pub maps: usize,
    /// Pairs drawn per map when estimating contraction ratios.
    pub pairs: usize,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            samples: 1000,
            maps: 50,
            pairs: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    /// What `worst` measures.
    pub metric: &'static str,
    pub cases: usize,
    pub violations: usize,
    pub worst: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Accumulates case outcomes for one suite.
struct Tally {
    name: &'static str,
    metric: &'static str,
    cases: usize,
    violations: usize,
    worst: f64,
    notes: Vec<String>,
}

const MAX_NOTES: usize = 8;

impl Tally {
    fn new(name: &'static str, metric: &'static str) -> Self {
        Self {
            name,
            metric,
            cases: 0,
            violations: 0,
            worst: f64::NEG_INFINITY,
            notes: Vec::new(),
        }
    }

    fn record(&mut self, value: f64, ok: bool, note: impl FnOnce() -> String) {
        self.cases += 1;
        self.worst = self.worst.max(value);
        if !ok {
            self.violations += 1;
            if self.notes.len() < MAX_NOTES {
                self.notes.push(note());
            }
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            metric: self.metric,
            cases: self.cases,
            violations: self.violations,
            // `+ 0.0` turns a negative zero into a plain zero in the report.
            worst: if self.cases == 0 { 0.0 } else { self.worst + 0.0 },
            pass: self.cases > 0 && self.violations == 0,
            notes: self.notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
}

pub const AXIOM_NS: [usize; 2] = [2, 3];
pub const AXIOM_PS: [f64; 3] = [1.0, 2.0, 3.0];
pub const AXIOM_DS: [usize; 2] = [4, 8];

/// Axioms (i)-(iv) for every `(n, p, d)` in the grid.
pub fn axioms_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut t = Tally::new("axioms", "largest normalized excess over tolerance");
    let mut tag = 0;
    for n in AXIOM_NS {
        for p in AXIOM_PS {
            for d in AXIOM_DS {
                tag += 1;
                let params = NormParams::new(n, p, d)?;
                let r = check_axioms(&params, cfg.samples, derive_seed(cfg.seed, 100 + tag))?;
                for (axiom, c) in [
                    ("nonnegativity", r.nonnegativity),
                    ("permutation", r.permutation),
                    ("homogeneity", r.homogeneity),
                    ("triangle", r.triangle),
                ] {
                    t.record(c.worst, c.violations == 0, || {
                        format!("n={n} p={p} d={d}: {} {axiom} violations", c.violations)
                    });
                }
            }
        }
    }
    Ok(t.finish())
}

/// `(1/n!) sum over ordered column tuples |det|^p`, root p.
pub fn ordered_tuple_norm<V: AsRef<[f64]>>(vectors: &[V], p: f64) -> f64 {
    let n = vectors.len();
    let d = vectors[0].as_ref().len();
    let mut cols = vec![0usize; n];
    let mut total = 0.0;
    let mut minor = vec![0.0; n * n];
    loop {
        for (r, v) in vectors.iter().enumerate() {
            for (c, &j) in cols.iter().enumerate() {
                minor[r * n + c] = v.as_ref()[j];
            }
        }
        total += pow_p(determinant(&minor, n).abs(), p);
        let mut k = n;
        loop {
            if k == 0 {
                return root_p(total / factorial(n), p);
            }
            k -= 1;
            cols[k] += 1;
            if cols[k] < d {
                break;
            }
            cols[k] = 0;
        }
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Combination sum against the ordered-tuple form, and against the Gram
/// determinant at `p = 2`, for `n <= 3`, `d <= 6`.
pub fn formula_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    const REL: f64 = 1e-9;
    let mut t = Tally::new("formulas", "largest relative gap between formulas");
    let per_config = (cfg.samples / 5).max(1);
    let mut tag = 0;
    for n in 1..=3usize {
        for d in n..=6usize {
            for p in [1.0, 1.5, 2.0, 3.0] {
                tag += 1;
                let params = NormParams::new(n, p, d)?;
                let shards = map_shards(derive_seed(cfg.seed, 200 + tag), per_config, |range, rng| {
                    range
                        .map(|_| -> Result<(f64, f64)> {
                            let v: Vec<Vec<f64>> = (0..n).map(|_| normal_vector(rng, d)).collect();
                            let sum = lp_n_norm(&v, &params)?;
                            let gram = if p == 2.0 { rel_gap(sum, gram_2_norm(&v)?) } else { 0.0 };
                            Ok((rel_gap(sum, ordered_tuple_norm(&v, p)), gram))
                        })
                        .collect::<Result<Vec<_>>>()
                });
                for shard in shards {
                    for (ordered, gram) in shard? {
                        let gap = ordered.max(gram);
                        t.record(gap, gap <= REL, || format!("n={n} d={d} p={p}: relative gap {gap:e}"));
                    }
                }
            }
        }
    }
    Ok(t.finish())
}

/// Class-m norms are unchanged by adding elements of `span(Y \ y_S)`.
pub fn coset_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut t = Tally::new("quotient-cosets", "largest relative change of a class-m norm");
    let mut tag = 0;
    for n in 1..=4usize {
        tag += 1;
        let subsets: Vec<IndexSubset> = (1..=n)
            .flat_map(|m| enumerate_class(n, m).map(|c| c.subsets).unwrap_or_default())
            .collect();
        let shards = map_shards(derive_seed(cfg.seed, 300 + tag), cfg.samples, |range, rng| {
            let mut out = Vec::new();
            for sample in range {
                let d = n + sample % 3;
                let p = [1.0, 1.5, 2.0, 3.0][sample % 4];
                let anchors = random_anchors(rng, n, d, p)?;
                let u = normal_vector(rng, d);
                let floor = anchors.params().abs_tol() * anchors.zero_scale(&u);
                for s in &subsets {
                    let mut shifted = u.clone();
                    for (i, y) in anchors.vectors().iter().enumerate() {
                        if !s.contains(i + 1) {
                            let a = uniform(rng, -3.0, 3.0);
                            shifted = linalg::add(&shifted, &linalg::scale(y, a));
                        }
                    }
                    let before = anchors.classm_norm(&u, s)?;
                    let after = anchors.classm_norm(&shifted, s)?;
                    let change = (after - before).abs();
                    let ok = change <= anchors.params().rel_tol() * before + floor;
                    out.push((sample, d, s.clone(), rel_gap(before, after), ok));
                }
            }
            Ok::<_, crate::Error>(out)
        });
        for shard in shards {
            for (sample, d, s, gap, ok) in shard? {
                t.record(gap, ok, || {
                    format!("n={n} d={d} sample {sample} S={s}: relative change {gap:e}")
                });
            }
        }
    }
    Ok(t.finish())
}

/// A prefix `x_k = limit + f(k) dir` with a known answer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuratedSequence {
    pub label: String,
    pub limit: Vec<f64>,
    pub prefix: SequencePrefix,
    /// Whether the prefix is meant to converge to `limit`.
    pub convergent: bool,
}

pub const CURATED_LEN: usize = 60;
pub const CURATED_EPS: f64 = 0.05;

type Profile = (&'static str, fn(f64) -> f64);

const CONVERGENT: [Profile; 5] = [
    ("k^-2", |k| k.powi(-2)),
    ("(-1)^k k^-2", |k| alternate(k) * k.powi(-2)),
    ("k^-3", |k| k.powi(-3)),
    ("0.7^k", |k| 0.7f64.powf(k)),
    ("exp(-k/4)", |k| (-k / 4.0).exp()),
];

const DIVERGENT: [Profile; 5] = [
    ("k", |k| k),
    ("sqrt(k)", f64::sqrt),
    ("2 ln(k+1)", |k| 2.0 * (k + 1.0).ln()),
    ("(-1)^k k", |k| alternate(k) * k),
    ("offset 1", |_| 1.0),
];

fn alternate(k: f64) -> f64 {
    if k.rem_euclid(2.0) == 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// 20 convergent and 20 divergent prefixes of length [`CURATED_LEN`]: five
/// profiles along four random directions each. Directions are scaled so
/// their largest class-1 norm under `anchors` is 1, which keeps every
/// convergent tail far below [`CURATED_EPS`] and every divergent one far
/// above it.
pub fn curated_sequences(anchors: &AnchorSet, seed: u64) -> Result<Vec<CuratedSequence>> {
    let d = anchors.d();
    let mut rng = stream(seed, 0);
    let limit = normal_vector(&mut rng, d);
    let mut dirs = Vec::with_capacity(4);
    while dirs.len() < 4 {
        let v = normal_vector(&mut rng, d);
        let top = anchors.class1_norms(&v)?.into_iter().fold(0.0, f64::max);
        if top > anchors.params().abs_tol() * anchors.zero_scale(&v) {
            dirs.push(linalg::scale(&v, 1.0 / top));
        }
    }
    let mut out = Vec::with_capacity(40);
    for (profiles, convergent) in [(&CONVERGENT, true), (&DIVERGENT, false)] {
        for (name, f) in profiles.iter() {
            for (j, dir) in dirs.iter().enumerate() {
                let prefix =
                    SequencePrefix::from_fn(CURATED_LEN, |k| linalg::add(&limit, &linalg::scale(dir, f(k as f64))))?;
                out.push(CuratedSequence {
                    label: format!("{name} along direction {}", j + 1),
                    limit: limit.clone(),
                    prefix,
                    convergent,
                });
            }
        }
    }
    Ok(out)
}

/// Covering-family verdicts agree with full-class verdicts on the curated
/// prefixes for every `(n, m)` with `n <= 5`.
pub fn covering_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut t = Tally::new("covering-reduction", "verdict disagreements per case");
    for n in 1..=5usize {
        let mut rng = stream(derive_seed(cfg.seed, 400 + n as u64), 0);
        let anchors = random_anchors(&mut rng, n, n + 1, 2.0)?;
        let sequences = curated_sequences(&anchors, derive_seed(cfg.seed, 450 + n as u64))?;
        for m in 1..=n {
            let covering = covering_family(n, m)?;
            t.record(0.0, covering.len() == n.div_ceil(m), || {
                format!("n={n} m={m}: covering family has {} subsets", covering.len())
            });
            for s in &sequences {
                let conv = [false, true].map(|c| check_convergence(&s.prefix, &s.limit, &anchors, m, CURATED_EPS, c));
                let cauchy = [false, true].map(|c| check_cauchy(&s.prefix, &anchors, m, CURATED_EPS, c));
                let [cf, cc] = conv;
                let [hf, hc] = cauchy;
                let (cf, cc, hf, hc) = (cf?.status, cc?.status, hf?.status, hc?.status);
                let expected = if s.convergent {
                    Status::Satisfied
                } else {
                    Status::Violated
                };
                let disagreements = usize::from(cf != cc) + usize::from(hf != hc);
                let ok = disagreements == 0 && cf == expected;
                t.record(disagreements as f64, ok, || {
                    format!(
                        "n={n} m={m} {}: convergence {cf:?}/{cc:?}, cauchy {hf:?}/{hc:?} (full/covering)",
                        s.label
                    )
                });
            }
        }
    }
    Ok(t.finish())
}

fn row_major(columns: &[Vec<f64>]) -> Vec<f64> {
    let n = columns.len();
    let mut m = vec![0.0; n * n];
    for (j, col) in columns.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            m[r * n + j] = v;
        }
    }
    m
}

fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for k in 0..n {
            let v = a[r * n + k];
            for c in 0..n {
                out[r * n + c] += v * b[k * n + c];
            }
        }
    }
    out
}

fn rows_of(m: &[f64], n: usize) -> Vec<Vec<f64>> {
    m.chunks(n).map(<[f64]>::to_vec).collect()
}

/// An affine map `x -> A x + b` on `R^n` whose class-`m` contraction constant
/// with respect to `anchors` (which must span `R^n`) is at most 0.9.
///
/// For `m < n` every class-m quotient must be respected, which forces
/// `B = Y^-1 A Y` to be diagonal; for `m = n` any `B` with column sums of
/// absolute values at most 0.9 works.
pub fn random_certified_affine(rng: &mut SampleRng, anchors: &AnchorSet, m: usize) -> Result<Mapping> {
    let n = anchors.n();
    if anchors.d() != n {
        return Err(crate::Error::DimensionMismatch {
            expected: n,
            found: anchors.d(),
        });
    }
    let mut b = vec![0.0; n * n];
    if m < n {
        for i in 0..n {
            b[i * n + i] = uniform(rng, -0.9, 0.9);
        }
    } else {
        for v in b.iter_mut() {
            *v = uniform(rng, -1.0, 1.0);
        }
        let target = uniform(rng, 0.1, 0.9);
        let col_max = (0..n)
            .map(|c| (0..n).map(|r| b[r * n + c].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if col_max > 0.0 {
            b.iter_mut().for_each(|v| *v *= target / col_max);
        }
    }
    let y = row_major(anchors.vectors());
    let lu = Lu::new(&y, n)?;
    // A = Y B Y^-1, built column by column from Y^-1 e_c.
    let yb = matmul(&y, &b, n);
    let mut yinv = vec![0.0; n * n];
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        for (r, v) in lu.solve(&e)?.into_iter().enumerate() {
            yinv[r * n + c] = v;
        }
    }
    let a = matmul(&yb, &yinv, n);
    Ok(Mapping::Affine {
        a: rows_of(&a, n),
        b: (0..n).map(|_| uniform(rng, -1.0, 1.0)).collect(),
    })
}

/// A random affine map on `R^d` with max absolute row sum 0.9.
pub fn random_affine(rng: &mut SampleRng, d: usize) -> Mapping {
    let mut a: Vec<Vec<f64>> = (0..d).map(|_| normal_vector(rng, d)).collect();
    let row_max = a
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            *v *= 0.9 / row_max;
        }
    }
    Mapping::Affine {
        a,
        b: (0..d).map(|_| uniform(rng, -1.0, 1.0)).collect(),
    }
}

/// `(n, m)` used for map number `k` of the mapping suites.
fn map_shape(k: usize) -> (usize, usize) {
    let n = 2 + k % 3;
    (n, 1 + (k / 3) % n)
}

/// Per-pair class-m ratios stay below the class-1 estimate and class-n
/// ratios below the class-m estimate.
pub fn propagation_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut t = Tally::new("class-propagation", "largest ratio minus bound");
    for k in 0..cfg.maps {
        let (n, m) = map_shape(k);
        let d = n + k % 2;
        let mut rng = stream(derive_seed(cfg.seed, 500), k as u64);
        let anchors = random_anchors(&mut rng, n, d, [1.0, 2.0, 3.0][k % 3])?;
        let map = random_affine(&mut rng, d);
        let sampler = DomainSampler::origin_box(d, 2.0)?;
        let r = verify_class_propagation(
            &map,
            &sampler,
            &anchors,
            m,
            cfg.pairs,
            derive_seed(cfg.seed, 600 + k as u64),
        )?;
        t.record(r.worst_excess, r.holds, || {
            format!(
                "map {k} (n={n} m={m} d={d}): {} of {} checks violated",
                r.violations, r.checks
            )
        });
    }
    Ok(t.finish())
}

pub const FIXED_POINT_EPS: f64 = 1e-8;
pub const ORACLE_TOL: f64 = 1e-6;
pub const UNIQUENESS_EPS: f64 = 1e-8;

fn class_max(anchors: &AnchorSet, u: &[f64], subsets: &[IndexSubset]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in subsets {
        worst = worst.max(anchors.classm_norm(u, s)?);
    }
    Ok(worst)
}

/// Banach iteration on certified affine contractions: convergence, agreement
/// with the solution of `(I - A) x = b`, domination by the a-priori bound,
/// and uniqueness from four starts.
pub fn fixed_point_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut t = Tally::new(
        "fixed-point",
        "largest oracle or uniqueness gap relative to its tolerance",
    );
    for k in 0..cfg.maps {
        let (n, m) = map_shape(k);
        let mut rng = stream(derive_seed(cfg.seed, 700), k as u64);
        let anchors = random_anchors(&mut rng, n, n, 2.0)?;
        let map = random_certified_affine(&mut rng, &anchors, m)?;
        let c = certify(&map, &anchors, m)?.c_hat;
        let full = enumerate_class(n, m)?.subsets;
        let x0 = normal_vector(&mut rng, n);
        let Mapping::Affine { a, b } = &map else { unreachable!() };

        let mut i_minus_a = vec![0.0; n * n];
        for r in 0..n {
            for col in 0..n {
                i_minus_a[r * n + col] = f64::from(u8::from(r == col)) - a[r][col];
            }
        }
        let oracle = linalg::solve(&i_minus_a, n, b)?;

        let options = SolveOptions::new(FIXED_POINT_EPS, 100_000)
            .with_contraction(c)
            .with_trace(true);
        let result = banach_solve(&map, &x0, &anchors, m, &options)?;
        let residual = result.residual_per_subset.iter().map(|s| s.value).fold(0.0, f64::max);
        let oracle_gap = class_max(&anchors, &linalg::sub(&result.solution, &oracle), &full)?;

        let mut bound_excess: f64 = f64::NEG_INFINITY;
        let iterates = result.iterates.as_deref().unwrap_or_default();
        for (step, bound) in result.apriori_bound_trace.iter().enumerate() {
            let err = class_max(&anchors, &linalg::sub(&iterates[step + 1], &oracle), &full)?;
            let slack = anchors.params().rel_tol() * bound.max(err) + ORACLE_TOL * 1e-3;
            bound_excess = bound_excess.max((err - bound) / slack);
        }
        let bounded = bound_excess <= 1.0 && !result.apriori_bound_trace.is_empty();

        let starts: Vec<Vec<f64>> = (0..4)
            .map(|_| linalg::scale(&normal_vector(&mut rng, n), 10.0))
            .collect();
        let uniq = uniqueness_probe(&map, &starts, &anchors, m, UNIQUENESS_EPS, 100_000, Some(c))?;

        let ok = c <= 0.9
            && result.converged
            && residual <= FIXED_POINT_EPS
            && oracle_gap <= ORACLE_TOL
            && bounded
            && uniq.status == UniquenessStatus::Pass;
        let worst = (oracle_gap / ORACLE_TOL).max(uniq.max_pairwise / uniq.threshold);
        t.record(worst, ok, || {
            format!(
                "map {k} (n={n} m={m} C={c:.3}): converged={} residual={residual:e} oracle gap={oracle_gap:e} \
                 bound excess={bound_excess:e} uniqueness={:?}",
                result.converged, uniq.status
            )
        });
    }
    Ok(t.finish())
}

pub const EQUIVALENCE_NS: [usize; 3] = [2, 3, 4];
pub const EQUIVALENCE_PS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];

/// The three equivalence chains on random `(x, Y)`, plus the worked instance
/// `x = (3, 4)`, `Y = (e1, e2)`, `p = 2`.
pub fn equivalence_suite(cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut t = Tally::new("equivalence", "largest negative slack");
    let mut tag = 0;
    for n in EQUIVALENCE_NS {
        for p in EQUIVALENCE_PS {
            tag += 1;
            let report = lp::run_batch(&BatchConfig::new(n, p, cfg.samples, derive_seed(cfg.seed, 800 + tag)))?;
            for c in &report.checks {
                t.record(-c.min_slack, c.pass, || {
                    format!(
                        "n={n} p={p} {}: {} failures, min slack {:e}",
                        c.check, c.failures, c.min_slack
                    )
                });
            }
        }
    }

    let y = AnchorSet::standard_basis(2, 2, 2.0)?;
    let x = [3.0, 4.0];
    let expected = [
        (EquivalenceCheck::StarVsUsual, [5.0 / 3.0, 5.0, 10.0]),
        (EquivalenceCheck::ClassNVsStar, [5.0, 7.0, 5.0 * 2f64.sqrt()]),
    ];
    for (kind, triple) in expected {
        let e = lp::check(kind, &x, &y)?;
        let gap = [e.lower, e.mid, e.upper]
            .iter()
            .zip(triple)
            .map(|(got, want)| (got - want).abs())
            .fold(0.0, f64::max);
        t.record(-e.slack, gap <= 1e-12 && e.pass, || {
            format!("worked instance {}: triple off by {gap:e}", kind.name())
        });
    }
    Ok(t.finish())
}

pub const SUITE_NAMES: [&str; 7] = [
    "axioms",
    "formulas",
    "quotient-cosets",
    "covering-reduction",
    "class-propagation",
    "fixed-point",
    "equivalence",
];

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Option<Result<SuiteReport>> {
    Some(match name {
        "axioms" => axioms_suite(cfg),
        "formulas" => formula_suite(cfg),
        "quotient-cosets" => coset_suite(cfg),
        "covering-reduction" => covering_suite(cfg),
        "class-propagation" => propagation_suite(cfg),
        "fixed-point" => fixed_point_suite(cfg),
        "equivalence" => equivalence_suite(cfg),
        _ => return None,
    })
}

pub fn verify_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let suites = SUITE_NAMES
        .iter()
        .map(|name| run_suite(name, cfg).expect("listed suite"))
        .collect::<Result<Vec<_>>>()?;
    let pass = suites.iter().all(|s| s.pass);
    Ok(VerifyReport {
        config: cfg.clone(),
        suites,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> VerifyConfig {
        VerifyConfig {
            seed,
            samples: 40,
            maps: 9,
            pairs: 60,
        }
    }

    #[test]
    fn ordered_tuple_form_on_the_plane() {
        let v = [vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 3.0]];
        // Minors 1, 3, 6; ordered tuples count each twice, halved by 1/2!.
        assert!((ordered_tuple_norm(&v, 1.0) - 10.0).abs() < 1e-12);
        assert!((ordered_tuple_norm(&v, 2.0) - 46f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn curated_suite_shape() {
        let y = AnchorSet::standard_basis(3, 4, 2.0).unwrap();
        let seqs = curated_sequences(&y, 3).unwrap();
        assert_eq!(seqs.len(), 40);
        assert_eq!(seqs.iter().filter(|s| s.convergent).count(), 20);
        assert!(seqs.iter().all(|s| s.prefix.len() == CURATED_LEN));
    }

    #[test]
    fn certified_affine_respects_bound() {
        let mut rng = stream(11, 0);
        for n in 2..=4 {
            let y = random_anchors(&mut rng, n, n, 2.0).unwrap();
            for m in 1..=n {
                let map = random_certified_affine(&mut rng, &y, m).unwrap();
                let c = map.certified_contraction(&y, m).unwrap();
                assert!(c <= 0.9 + 1e-9, "n={n} m={m} C={c}");
            }
        }
    }

    #[test]
    fn small_runs_pass_and_repeat() {
        let a = verify_all(&small(5)).unwrap();
        for s in &a.suites {
            assert!(s.pass, "{s:?}");
        }
        let b = verify_all(&small(5)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
