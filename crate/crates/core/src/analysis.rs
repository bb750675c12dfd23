//! Finite-sample diagnostics with respect to class-m norms.
//!
//! A finite prefix can never certify a limit, so every check returns a
//! three-valued [`Verdict`]. A check is `Satisfied` when every evaluated
//! value stays below `eps` over the final quarter of the prefix, `Violated`
//! when some value exceeds `eps` at the last index, and `Inconclusive`
//! otherwise.
//!
//! Completeness is not checked here: on finite data it only shows up through
//! the fixed-point solver converging.

use crate::error::{Error, Result};
use crate::linalg::sub;
use crate::mapping::{ProbeSampler, SelfMap};
use crate::nnorm::validate_vectors;
use crate::quotient::{class_subsets, enumerate_class, sum_over, AnchorSet, IndexSubset};
use crate::rng::{normal_vector, stream};
use serde::{Deserialize, Serialize};

/// An ordered prefix `x_1, ..., x_K` of a sequence, `K >= 2`.
///
/// JSON form: `{"points": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr")]
pub struct SequencePrefix {
    points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct SequenceRepr {
    points: Vec<Vec<f64>>,
}

impl TryFrom<SequenceRepr> for SequencePrefix {
    type Error = Error;
    fn try_from(r: SequenceRepr) -> Result<Self> {
        SequencePrefix::new(r.points)
    }
}

impl SequencePrefix {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a sequence prefix needs at least 2 points, got {}",
                points.len()
            )));
        }
        validate_vectors(&points, points[0].len())?;
        Ok(Self { points })
    }

    /// `x_k = f(k)` for `k = 1..=len`.
    pub fn from_fn(len: usize, f: impl Fn(usize) -> Vec<f64>) -> Result<Self> {
        Self::new((1..=len).map(f).collect())
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// First index of the tail window: the final quarter, at least two points.
    pub fn tail_start(&self) -> usize {
        let k = self.len();
        k - k.div_ceil(4).max(2).min(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Satisfied,
    Violated,
    Inconclusive,
}

/// Where a violation was observed. Indices are 0-based positions in the
/// prefix; `other` is the partner index for pairwise (Cauchy) checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub other: Option<usize>,
    pub subset: IndexSubset,
    pub value: f64,
}

/// Tail values recorded for one subset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetTail {
    pub subset: IndexSubset,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub tail_start: usize,
    pub tail_values: Vec<SubsetTail>,
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")))
    }
}

/// Picks the largest offender (first in subset order on ties).
fn worst_of(candidates: impl Iterator<Item = Witness>) -> Option<Witness> {
    candidates.fold(None, |best: Option<Witness>, w| match best {
        Some(b) if b.value >= w.value => Some(b),
        _ => Some(w),
    })
}

/// Convergence of `seq` to `limit` with respect to the class-`m` norms.
pub fn check_convergence(
    seq: &SequencePrefix,
    limit: &[f64],
    anchors: &AnchorSet,
    m: usize,
    eps: f64,
    use_covering: bool,
) -> Result<Verdict> {
    check_eps(eps)?;
    let subsets = class_subsets(anchors.n(), m, use_covering)?;
    validate_vectors(&[limit], anchors.d())?;
    validate_vectors(seq.points(), anchors.d())?;

    let start = seq.tail_start();
    let last = seq.len() - 1;
    let class1: Vec<Vec<f64>> = seq.points()[start..]
        .iter()
        .map(|x| anchors.class1_norms(&sub(x, limit)))
        .collect::<Result<_>>()?;
    let tails: Vec<SubsetTail> = subsets
        .iter()
        .map(|s| SubsetTail {
            subset: s.clone(),
            values: class1.iter().map(|c| sum_over(c, s)).collect(),
        })
        .collect();

    let all_below = tails.iter().all(|t| t.values.iter().all(|&v| v < eps));
    let witness = worst_of(tails.iter().filter_map(|t| {
        let v = *t.values.last()?;
        (v > eps).then(|| Witness {
            index: last,
            other: None,
            subset: t.subset.clone(),
            value: v,
        })
    }));
    Ok(finish(all_below, witness, start, tails))
}

fn finish(all_below: bool, witness: Option<Witness>, tail_start: usize, tail_values: Vec<SubsetTail>) -> Verdict {
    let status = if all_below {
        Status::Satisfied
    } else if witness.is_some() {
        Status::Violated
    } else {
        Status::Inconclusive
    };
    Verdict {
        status,
        witness: if status == Status::Violated { witness } else { None },
        tail_start,
        tail_values,
    }
}

/// Cauchy property over pairwise differences in the tail window.
///
/// The recorded tail value at position `k` is the largest distance from
/// `x_k` to any other tail point.
pub fn check_cauchy(
    seq: &SequencePrefix,
    anchors: &AnchorSet,
    m: usize,
    eps: f64,
    use_covering: bool,
) -> Result<Verdict> {
    check_eps(eps)?;
    let subsets = class_subsets(anchors.n(), m, use_covering)?;
    validate_vectors(seq.points(), anchors.d())?;

    let start = seq.tail_start();
    let last = seq.len() - 1;
    let tail = &seq.points()[start..];
    let t = tail.len();
    let mut maxima = vec![vec![0.0f64; t]; subsets.len()];
    let mut last_row: Vec<Option<Witness>> = vec![None; subsets.len()];
    for k in 0..t {
        for l in (k + 1)..t {
            let class1 = anchors.class1_norms(&sub(&tail[k], &tail[l]))?;
            for (si, s) in subsets.iter().enumerate() {
                let v = sum_over(&class1, s);
                maxima[si][k] = maxima[si][k].max(v);
                maxima[si][l] = maxima[si][l].max(v);
                if start + l == last && v > eps && last_row[si].as_ref().is_none_or(|w| v > w.value) {
                    last_row[si] = Some(Witness {
                        index: last,
                        other: Some(start + k),
                        subset: s.clone(),
                        value: v,
                    });
                }
            }
        }
    }
    let tails: Vec<SubsetTail> = subsets
        .into_iter()
        .zip(maxima)
        .map(|(subset, values)| SubsetTail { subset, values })
        .collect();
    let all_below = tails.iter().all(|t| t.values.iter().all(|&v| v < eps));
    Ok(finish(
        all_below,
        worst_of(last_row.into_iter().flatten()),
        start,
        tails,
    ))
}

/// Bound `M = max ||x||*_S` over all points and all class-`m` subsets, or
/// `None` for an empty point set.
pub fn check_bounded(points: &[Vec<f64>], anchors: &AnchorSet, m: usize) -> Result<Option<f64>> {
    let subsets = enumerate_class(anchors.n(), m)?.subsets;
    validate_vectors(points, anchors.d())?;
    let mut bound: Option<f64> = None;
    for x in points {
        let class1 = anchors.class1_norms(x)?;
        for s in &subsets {
            let v = sum_over(&class1, s);
            bound = Some(bound.map_or(v, |b| b.max(v)));
        }
    }
    Ok(bound)
}

/// Verdicts of one kind at two classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassPair {
    pub first: Verdict,
    pub second: Verdict,
    pub agree: bool,
}

impl ClassPair {
    fn new(first: Verdict, second: Verdict) -> Self {
        let decided = first.status != Status::Inconclusive && second.status != Status::Inconclusive;
        let agree = !decided || first.status == second.status;
        Self { first, second, agree }
    }
}

/// Convergence and Cauchy verdicts at two classes. Tolerances are scaled by
/// the class size (`eps * m`) since a class-m norm is a sum of `m` class-1
/// terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub m1: usize,
    pub m2: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub convergence: ClassPair,
    pub cauchy: ClassPair,
    /// Decided verdicts that disagree.
    pub defect: bool,
}

pub fn cross_class_consistency(
    seq: &SequencePrefix,
    limit: &[f64],
    anchors: &AnchorSet,
    m1: usize,
    m2: usize,
    eps: f64,
) -> Result<ConsistencyReport> {
    let eps1 = eps * m1 as f64;
    let eps2 = eps * m2 as f64;
    let convergence = ClassPair::new(
        check_convergence(seq, limit, anchors, m1, eps1, false)?,
        check_convergence(seq, limit, anchors, m2, eps2, false)?,
    );
    let cauchy = ClassPair::new(
        check_cauchy(seq, anchors, m1, eps1, false)?,
        check_cauchy(seq, anchors, m2, eps2, false)?,
    );
    let defect = !(convergence.agree && cauchy.agree);
    Ok(ConsistencyReport {
        m1,
        m2,
        eps1,
        eps2,
        convergence,
        cauchy,
        defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusStatus {
    /// Some sampled `delta` works.
    Accepted,
    /// Even the closest sampled points break `eps`.
    NoDelta,
    /// Not enough usable samples to decide.
    Inconclusive,
}

/// Empirical modulus of continuity at one `eps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusRow {
    pub eps: f64,
    /// Largest sampled `delta`: every sample with input distance below it
    /// has output distance below `eps`.
    pub delta: Option<f64>,
    /// True when no sample failed, so `delta` is only limited by the largest
    /// sampled radius.
    pub sample_limited: bool,
    pub status: ModulusStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub l: usize,
    pub m: usize,
    pub samples: usize,
    pub rows: Vec<ModulusRow>,
    /// No row reported `NoDelta`.
    pub continuous: bool,
}

const SAME_RADIUS: f64 = 1e-9;

fn max_class_norm(anchors: &AnchorSet, v: &[f64], subsets: &[IndexSubset]) -> Result<f64> {
    let class1 = anchors.class1_norms(v)?;
    Ok(subsets.iter().map(|s| sum_over(&class1, s)).fold(0.0, f64::max))
}

/// Probes continuity of `map` at `a` from class-`l` input distances to
/// class-`m` output distances.
///
/// Sample points sit at class-`l` distance exactly `r` from `a` for each
/// sampler radius `r`. For each `eps` the reported `delta` is the smallest
/// input distance among samples whose output distance reaches `eps`.
pub fn continuity_probe<T: SelfMap + ?Sized>(
    map: &T,
    a: &[f64],
    anchors: &AnchorSet,
    l: usize,
    m: usize,
    eps_list: &[f64],
    sampler: &ProbeSampler,
) -> Result<ContinuityReport> {
    for &eps in eps_list {
        check_eps(eps)?;
    }
    let (n, d) = (anchors.n(), anchors.d());
    validate_vectors(&[a], d)?;
    let in_subsets = enumerate_class(n, l)?.subsets;
    let out_subsets = enumerate_class(n, m)?.subsets;
    let ta = map.apply(a)?;

    let mut rng = stream(sampler.seed, 0);
    // (input distance, output distance)
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for &r in &sampler.radii {
        for _ in 0..sampler.per_radius {
            let dir = normal_vector(&mut rng, d);
            let size = max_class_norm(anchors, &dir, &in_subsets)?;
            if !(size > 0.0 && r > 0.0) {
                continue;
            }
            let x: Vec<f64> = a.iter().zip(&dir).map(|(ai, di)| ai + r * di / size).collect();
            let input = max_class_norm(anchors, &sub(&x, a), &in_subsets)?;
            let output = max_class_norm(anchors, &sub(&map.apply(&x)?, &ta), &out_subsets)?;
            samples.push((input, output));
        }
    }
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));

    let rows: Vec<ModulusRow> = eps_list
        .iter()
        .map(|&eps| {
            let failure = samples.iter().find(|s| s.1 >= eps).map(|s| s.0);
            let (delta, sample_limited) = match failure {
                Some(f) => (f, false),
                None => (samples.last().map_or(0.0, |s| s.0), true),
            };
            // Samples on the same radius differ only by rounding.
            let supported = sample_limited || samples.iter().any(|s| s.0 < delta * (1.0 - SAME_RADIUS));
            let status = if samples.is_empty() {
                ModulusStatus::Inconclusive
            } else if supported && delta > 0.0 {
                ModulusStatus::Accepted
            } else {
                ModulusStatus::NoDelta
            };
            ModulusRow {
                eps,
                delta: (status == ModulusStatus::Accepted).then_some(delta),
                sample_limited,
                status,
            }
        })
        .collect();
    let continuous = rows.iter().all(|r| r.status != ModulusStatus::NoDelta);
    Ok(ContinuityReport {
        l,
        m,
        samples: samples.len(),
        rows,
        continuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize) -> AnchorSet {
        AnchorSet::standard_basis(n, n, 2.0).unwrap()
    }

    #[test]
    fn harmonic_sequence_converges() {
        let seq = SequencePrefix::from_fn(500, |k| vec![1.0 / k as f64, 0.0]).unwrap();
        let v = check_convergence(&seq, &[0.0, 0.0], &basis(2), 1, 0.01, false).unwrap();
        assert_eq!(v.status, Status::Satisfied);
        assert!(v.witness.is_none());
        assert_eq!(v.tail_values.len(), 2);
        assert_eq!(v.tail_start, 375);
    }

    #[test]
    fn constant_sequence_converges() {
        let seq = SequencePrefix::new(vec![vec![2.0, -1.0]; 10]).unwrap();
        let v = check_convergence(&seq, &[2.0, -1.0], &basis(2), 2, 1e-9, false).unwrap();
        assert_eq!(v.status, Status::Satisfied);
        assert_eq!(
            check_cauchy(&seq, &basis(2), 1, 1e-9, false).unwrap().status,
            Status::Satisfied
        );
    }

    #[test]
    fn growing_sequence_is_violated() {
        let seq = SequencePrefix::from_fn(50, |k| vec![k as f64, 0.0]).unwrap();
        let v = check_convergence(&seq, &[0.0, 0.0], &basis(2), 1, 1.0, false).unwrap();
        assert_eq!(v.status, Status::Violated);
        let w = v.witness.unwrap();
        assert_eq!(w.index, 49);
        assert_eq!(w.subset, IndexSubset::singleton(1));
        assert_eq!(w.value, 50.0);
    }

    #[test]
    fn cauchy_examples() {
        let geometric = SequencePrefix::from_fn(60, |k| vec![0.5f64.powi(k as i32); 2]).unwrap();
        assert_eq!(
            check_cauchy(&geometric, &basis(2), 1, 1e-6, false).unwrap().status,
            Status::Satisfied
        );
        let alternating =
            SequencePrefix::from_fn(40, |k| if k % 2 == 0 { vec![0.0, 0.0] } else { vec![1.0, 0.0] }).unwrap();
        let v = check_cauchy(&alternating, &basis(2), 1, 0.5, false).unwrap();
        assert_eq!(v.status, Status::Violated);
        assert_eq!(v.witness.unwrap().value, 1.0);
    }

    #[test]
    fn dip_below_eps_at_end_is_inconclusive() {
        let mut pts = vec![vec![5.0, 0.0]; 20];
        pts[19] = vec![0.0, 0.0];
        let seq = SequencePrefix::new(pts).unwrap();
        let v = check_convergence(&seq, &[0.0, 0.0], &basis(2), 1, 0.1, false).unwrap();
        assert_eq!(v.status, Status::Inconclusive);
        assert!(v.witness.is_none());
    }

    #[test]
    fn bounded_examples() {
        let y = basis(2);
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(check_bounded(&pts, &y, 1).unwrap(), Some(1.0));
        assert_eq!(check_bounded(&[vec![0.0, 0.0]], &y, 1).unwrap(), Some(0.0));
        let scaled: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|v| v * 10.0).collect()).collect();
        assert_eq!(check_bounded(&scaled, &y, 1).unwrap(), Some(10.0));
        assert_eq!(check_bounded(&[], &y, 1).unwrap(), None);
        assert!(check_bounded(&[vec![1.0]], &y, 1).is_err());
    }

    #[test]
    fn consistency_examples() {
        let y = basis(3);
        let seq = SequencePrefix::from_fn(500, |k| vec![1.0 / k as f64, 0.0, 0.0]).unwrap();
        let r = cross_class_consistency(&seq, &[0.0; 3], &y, 1, 2, 0.01).unwrap();
        assert!(!r.defect);
        assert_eq!(r.convergence.first.status, Status::Satisfied);
        assert_eq!(r.convergence.second.status, Status::Satisfied);

        let grow = SequencePrefix::from_fn(40, |k| vec![k as f64, 0.0, 0.0]).unwrap();
        let r = cross_class_consistency(&grow, &[0.0; 3], &y, 1, 3, 0.5).unwrap();
        assert!(!r.defect);
        assert_eq!(r.convergence.first.status, Status::Violated);
        assert_eq!(r.convergence.second.status, Status::Violated);
    }

    #[test]
    fn halving_map_modulus_is_twice_eps() {
        let y = basis(2);
        let half = |x: &[f64]| x.iter().map(|v| v / 2.0).collect::<Vec<_>>();
        let sampler = ProbeSampler::geometric(1.0, 0.9, 80, 4, 3);
        let eps = [0.1, 0.01];
        let r = continuity_probe(&half, &[1.0, 1.0], &y, 1, 1, &eps, &sampler).unwrap();
        assert!(r.continuous);
        for row in &r.rows {
            let delta = row.delta.unwrap();
            assert!(delta >= 2.0 * row.eps * (1.0 - 1e-9), "{row:?}");
            assert!(delta <= 2.0 * row.eps / 0.9 * (1.0 + 1e-9), "{row:?}");
        }
    }

    #[test]
    fn jump_has_no_delta() {
        let y = basis(2);
        let jump = |x: &[f64]| if x[0] > 1.0 { vec![5.0, 0.0] } else { vec![0.0, 0.0] };
        let sampler = ProbeSampler::geometric(0.5, 0.5, 20, 8, 1);
        let r = continuity_probe(&jump, &[1.0, 0.0], &y, 1, 1, &[0.1], &sampler).unwrap();
        assert!(!r.continuous);
        assert_eq!(r.rows[0].status, ModulusStatus::NoDelta);
    }

    #[test]
    fn invalid_inputs() {
        let y = basis(2);
        assert!(SequencePrefix::new(vec![vec![1.0]]).is_err());
        let seq = SequencePrefix::from_fn(5, |_| vec![0.0, 0.0]).unwrap();
        assert!(check_convergence(&seq, &[0.0, 0.0], &y, 3, 0.1, false).is_err());
        assert!(check_convergence(&seq, &[0.0, 0.0], &y, 1, 0.0, false).is_err());
        assert!(check_convergence(&seq, &[0.0], &y, 1, 0.1, false).is_err());
        let json: SequencePrefix = serde_json::from_str(r#"{"points": [[1, 2], [3, 4]]}"#).unwrap();
        assert_eq!(json.len(), 2);
        assert!(serde_json::from_str::<SequencePrefix>(r#"{"points": [[1, 2], [3]]}"#).is_err());
    }
}
