//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the terminal.

use nalgebra::{DMatrix, DVector};
use nnorm_core::analysis::{check_cauchy, check_convergence, Status};
use nnorm_core::fixedpoint::{
    banach_solve, certify, uniqueness_probe, verify_class_propagation, SolveOptions, UniquenessStatus,
};
use nnorm_core::lp::{self, random_anchors, BatchConfig, EquivalenceCheck};
use nnorm_core::nnorm::{check_axioms, gram_2_norm, lp_n_norm, NormParams};
use nnorm_core::rng::{derive_seed, normal_vector, stream, uniform};
use nnorm_core::verify::{curated_sequences, random_affine, random_certified_affine, CURATED_EPS};
use nnorm_core::{covering_family, enumerate_class, AnchorSet, DomainSampler, IndexSubset, Mapping};
use std::process::Command;
use std::time::{Duration, Instant};

const SEED: u64 = 7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
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

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut violations = 0;
    let mut configs = 0;
    for n in [2, 3] {
        for p in [1.0, 2.0, 3.0] {
            for d in [4, 8] {
                let params = NormParams::new(n, p, d).unwrap();
                let r = check_axioms(&params, 1000, derive_seed(SEED, configs)).unwrap();
                assert_eq!(r.samples, 1000);
                violations += r.violations();
                configs += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && elapsed < Duration::from_secs(30),
        format!(
            "{configs} configurations x 1000 samples, {violations} violations, {:.2?}",
            elapsed
        ),
    )
}

/// Leibniz determinant, written independently of the library's LU.
fn leibniz(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0.0;
    loop {
        let mut inversions = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                inversions += usize::from(perm[i] > perm[j]);
            }
        }
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * (0..n).map(|r| m[r][perm[r]]).product::<f64>();
        // Next permutation in lexicographic order.
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return total;
        };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

/// `((1/n!) sum over all ordered column tuples |det|^p)^(1/p)`.
fn ordered_tuple_oracle(x: &[Vec<f64>], p: f64) -> f64 {
    let n = x.len();
    let d = x[0].len();
    let tuples = d.pow(n as u32);
    let mut sum = 0.0;
    for t in 0..tuples {
        let cols: Vec<usize> = (0..n).map(|k| (t / d.pow(k as u32)) % d).collect();
        let minor: Vec<Vec<f64>> = x.iter().map(|row| cols.iter().map(|&c| row[c]).collect()).collect();
        sum += leibniz(&minor).abs().powf(p);
    }
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    (sum / fact).powf(1.0 / p)
}

fn criterion_2() -> Outcome {
    let mut worst_ordered: f64 = 0.0;
    let mut worst_gram: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=3usize {
        for d in n..=6usize {
            let mut rng = stream(SEED, (10 * n + d) as u64);
            for k in 0..200 {
                let p = [1.0, 1.5, 2.0, 3.0][k % 4];
                let x: Vec<Vec<f64>> = (0..n).map(|_| normal_vector(&mut rng, d)).collect();
                let params = NormParams::new(n, p, d).unwrap();
                let value = lp_n_norm(&x, &params).unwrap();
                worst_ordered = worst_ordered.max(rel_gap(value, ordered_tuple_oracle(&x, p)));
                let params2 = NormParams::new(n, 2.0, d).unwrap();
                let value2 = lp_n_norm(&x, &params2).unwrap();
                worst_gram = worst_gram.max(rel_gap(value2, gram_2_norm(&x).unwrap()));
                cases += 1;
            }
        }
    }
    outcome(
        worst_ordered <= 1e-9 && worst_gram <= 1e-9,
        format!("{cases} samples, worst relative gap {worst_ordered:.2e} (ordered tuples), {worst_gram:.2e} (Gram)"),
    )
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut comparisons = 0;
    let mut rng = stream(SEED, 300);
    for sample in 0..1000 {
        let n = 1 + sample % 4;
        let d = n + (sample / 4) % 3;
        let p = [1.0, 2.0, 3.0][sample % 3];
        let y = random_anchors(&mut rng, n, d, p).unwrap();
        let u = normal_vector(&mut rng, d);
        for m in 1..=n {
            for s in enumerate_class(n, m).unwrap().subsets {
                let mut shifted = u.clone();
                for (i, yi) in y.vectors().iter().enumerate() {
                    if !s.contains(i + 1) {
                        let a = uniform(&mut rng, -5.0, 5.0);
                        for (c, v) in shifted.iter_mut().zip(yi) {
                            *c += a * v;
                        }
                    }
                }
                let before = y.classm_norm(&u, &s).unwrap();
                let after = y.classm_norm(&shifted, &s).unwrap();
                worst = worst.max(rel_gap(before, after));
                comparisons += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("1000 samples, {comparisons} subset comparisons, worst relative change {worst:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let mut disagreements = Vec::new();
    let mut bad_size = 0;
    let mut verdicts = 0;
    for n in 1..=5usize {
        let mut rng = stream(SEED, 400 + n as u64);
        let y = random_anchors(&mut rng, n, n + 1, 2.0).unwrap();
        let sequences = curated_sequences(&y, derive_seed(SEED, n as u64)).unwrap();
        assert_eq!(sequences.iter().filter(|s| s.convergent).count(), 20);
        assert_eq!(sequences.iter().filter(|s| !s.convergent).count(), 20);
        for m in 1..=n {
            bad_size += usize::from(covering_family(n, m).unwrap().len() != n.div_ceil(m));
            for s in &sequences {
                let full = check_convergence(&s.prefix, &s.limit, &y, m, CURATED_EPS, false)
                    .unwrap()
                    .status;
                let cover = check_convergence(&s.prefix, &s.limit, &y, m, CURATED_EPS, true)
                    .unwrap()
                    .status;
                let cauchy_full = check_cauchy(&s.prefix, &y, m, CURATED_EPS, false).unwrap().status;
                let cauchy_cover = check_cauchy(&s.prefix, &y, m, CURATED_EPS, true).unwrap().status;
                let expected = if s.convergent {
                    Status::Satisfied
                } else {
                    Status::Violated
                };
                verdicts += 2;
                if full != cover || cauchy_full != cauchy_cover || full != expected {
                    disagreements.push(format!("n={n} m={m} {}", s.label));
                }
            }
        }
    }
    outcome(
        disagreements.is_empty() && bad_size == 0,
        format!(
            "{verdicts} verdict pairs, {} disagreements, {bad_size} wrongly sized covering families{}",
            disagreements.len(),
            disagreements
                .first()
                .map(|d| format!(" (first: {d})"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut violations = 0;
    let mut checks = 0;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..50u64 {
        let n = 2 + (k % 3) as usize;
        let m = 1 + (k as usize / 3) % n;
        let d = n + (k % 2) as usize;
        let mut rng = stream(SEED, 500 + k);
        let y = random_anchors(&mut rng, n, d, 2.0).unwrap();
        let map = random_affine(&mut rng, d);
        let sampler = DomainSampler::origin_box(d, 2.0).unwrap();
        let r = verify_class_propagation(&map, &sampler, &y, m, 500, derive_seed(SEED, k)).unwrap();
        assert_eq!(r.pairs, 500);
        violations += r.violations;
        checks += r.checks;
        worst = worst.max(r.worst_excess);
    }
    outcome(
        violations == 0,
        format!(
            "50 maps x 500 pairs, {checks} ratio checks, {violations} above bound + 1e-9, worst excess {worst:.2e}"
        ),
    )
}

fn class_max(y: &AnchorSet, u: &[f64], subsets: &[IndexSubset]) -> f64 {
    subsets.iter().map(|s| y.classm_norm(u, s).unwrap()).fold(0.0, f64::max)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst_residual: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut worst_spread: f64 = 0.0;
    for k in 0..50u64 {
        let n = 2 + (k % 3) as usize;
        let m = 1 + (k as usize / 3) % n;
        let mut rng = stream(SEED, 600 + k);
        let y = random_anchors(&mut rng, n, n, 2.0).unwrap();
        let map = random_certified_affine(&mut rng, &y, m).unwrap();
        let c = certify(&map, &y, m).unwrap();
        let Mapping::Affine { a, b } = &map else { unreachable!() };
        let full = enumerate_class(n, m).unwrap().subsets;

        let amat = DMatrix::from_fn(n, n, |r, col| a[r][col]);
        let oracle = (DMatrix::identity(n, n) - amat)
            .lu()
            .solve(&DVector::from_column_slice(b))
            .unwrap();
        let oracle: Vec<f64> = oracle.iter().copied().collect();

        let x0 = normal_vector(&mut rng, n);
        let options = SolveOptions::new(1e-8, 100_000)
            .with_contraction(c.c_hat)
            .with_trace(true);
        let r = banach_solve(&map, &x0, &y, m, &options).unwrap();
        let residual = r.residual_per_subset.iter().map(|s| s.value).fold(0.0, f64::max);
        let gap = |x: &[f64]| {
            let diff: Vec<f64> = x.iter().zip(&oracle).map(|(u, v)| u - v).collect();
            class_max(&y, &diff, &full)
        };
        let oracle_gap = gap(&r.solution);
        let iterates = r.iterates.as_ref().unwrap();
        let dominated = !r.apriori_bound_trace.is_empty()
            && r.apriori_bound_trace.iter().enumerate().all(|(i, &bound)| {
                let err = gap(&iterates[i + 1]);
                err <= bound * (1.0 + 1e-9) + 1e-12
            });

        let starts: Vec<Vec<f64>> = (0..4)
            .map(|_| normal_vector(&mut rng, n).iter().map(|v| 10.0 * v).collect())
            .collect();
        let u = uniqueness_probe(&map, &starts, &y, m, 1e-8, 100_000, Some(c.c_hat)).unwrap();

        worst_residual = worst_residual.max(residual);
        worst_oracle = worst_oracle.max(oracle_gap);
        worst_spread = worst_spread.max(u.max_pairwise);
        let ok = c.is_certified
            && c.c_hat <= 0.9
            && r.converged
            && residual <= 1e-8
            && oracle_gap <= 1e-6
            && dominated
            && u.status == UniquenessStatus::Pass
            && u.max_pairwise <= 1e-7;
        if !ok {
            failures.push(format!("map {k} (n={n} m={m} C={:.3})", c.c_hat));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "50 maps, worst residual {worst_residual:.2e}, worst oracle gap {worst_oracle:.2e}, worst spread {worst_spread:.2e}, \
             {} failures, {elapsed:.2?}",
            failures.len()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst_slack = f64::INFINITY;
    let mut failures = 0;
    for n in [2, 3, 4] {
        for p in [1.0, 1.5, 2.0, 3.0] {
            let r = lp::run_batch(&BatchConfig::new(n, p, 1000, derive_seed(SEED, 700 + n as u64))).unwrap();
            for c in &r.checks {
                assert_eq!(c.samples, 1000);
                worst_slack = worst_slack.min(c.min_slack);
                failures += usize::from(c.min_slack < -1e-9);
            }
        }
    }
    let y = AnchorSet::standard_basis(2, 2, 2.0).unwrap();
    let x = [3.0, 4.0];
    let close = |got: [f64; 3], want: [f64; 3]| got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 1e-12);
    let thm = lp::check(EquivalenceCheck::StarVsUsual, &x, &y).unwrap();
    let prop = lp::check(EquivalenceCheck::ClassNVsStar, &x, &y).unwrap();
    let worked = close([thm.lower, thm.mid, thm.upper], [5.0 / 3.0, 5.0, 10.0])
        && close([prop.lower, prop.mid, prop.upper], [5.0, 7.0, 5.0 * 2f64.sqrt()]);
    outcome(
        failures == 0 && worked,
        format!(
            "12 (n, p) pairs x 1000 samples x 3 chains, min slack {worst_slack:.2e}, worked instance {}",
            if worked { "reproduced" } else { "MISMATCH" }
        ),
    )
}

fn criterion_8() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_nnorm"))
            .args(["verify-all", "--seed", "7"])
            .output()
            .expect("nnorm runs")
    };
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        same && a.status.success(),
        format!(
            "{} report bytes, identical: {same}, exit {:?}",
            a.stdout.len(),
            a.status.code()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("axiom suite", criterion_1),
        ("oracle equivalence", criterion_2),
        ("quotient well-definedness", criterion_3),
        ("covering reduction", criterion_4),
        ("class propagation", criterion_5),
        ("fixed point", criterion_6),
        ("equivalence bounds", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!(
            "{} criterion {} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
