//! Acceptance checks. One PASS/FAIL line per criterion; the process exits 0
//! so every criterion is reported even when some are red.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stein_poisson::bounds::{
    bound_birthday_pairs, bound_birthday_triples, bound_coupling, bound_coupon_collector,
    bound_dependency_graph, bound_dependency_graph_general, bound_generalized_matching,
    bound_matching, bound_monochromatic, bound_negative_association, bound_poisson_binomial,
    CouplingProblem, DependencyGraph, TRIPLES_SURROGATE_CONSTANT,
};
use stein_poisson::exact::{
    coloring_pmf, matching_pmf, occupancy_pmf, poisson_binomial_pmf, ColoringSpec, MatchingSpec,
    OccupancySpec, OccupancyStatistic,
};
use stein_poisson::harness::{run_sweep, CsvSink, Grid, OutputFormat, ProblemId, SweepSpec, THREADS_ENV};
use stein_poisson::multivariate::{
    bound_fixed_point_succession, bound_matching_process, joint_fixed_point_succession_pmf,
    joint_tv, matching_config_law, process_tv, product_poisson_config_law, product_poisson_joint,
};
use stein_poisson::pairs::{verify_exchangeability, verify_step_probs, PairModel};
use stein_poisson::stein::{
    inverse_constants, poisson_expectation, poisson_pmf, stein_apply, stein_identity_oracle,
    stein_inverse,
};
use stein_poisson::{tv_distance, BoundReport, FnTable, Pmf, SteinParams};

const EPS: f64 = 1e-15;

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

fn poisson(lambda: f64) -> Pmf {
    if lambda == 0.0 {
        return Pmf::point_mass(0);
    }
    poisson_pmf(&SteinParams::new(lambda, EPS).unwrap())
}

fn dominates(bound: &BoundReport, tv: f64) -> bool {
    bound.dominates(tv)
}

fn random_p(rng: &mut ChaCha8Rng, count: usize, max_len: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let len = rng.random_range(1..=max_len);
            (0..len).map(|_| rng.random_range(0.001..1.0)).collect()
        })
        .collect()
}

fn c1_stein_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut models = Vec::new();
    for n in [4usize, 6, 8] {
        let p = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
        models.push(PairModel::poisson_binomial(p).unwrap());
    }
    for n in [4usize, 5, 6] {
        models.push(PairModel::matching(MatchingSpec::plain(n).unwrap()).unwrap());
    }
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for model in &models {
        for _ in 0..5 {
            let g = FnTable::from_fn(12, |_| rng.random_range(-1.0..1.0)).unwrap();
            let check = stein_identity_oracle(model, model.c(), &g, 1e-14).unwrap();
            worst = worst.max(check.discrepancy());
            checks += 1;
        }
    }
    outcome(worst <= 1e-10, format!("max |lhs - rhs| = {worst:.2e} over {checks} identities"))
}

fn c2_inverse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    for lambda in [0.25, 1.0, 4.0, 16.0] {
        let params = SteinParams::new(lambda, 1e-12).unwrap();
        for _ in 0..100 {
            let len = rng.random_range(2..80);
            let f = FnTable::from_fn(len, |_| rng.random_range(-1.0..1.0)).unwrap();
            let ef = poisson_expectation(&f, &params);
            let tu = stein_apply(&stein_inverse(&f, &params).unwrap(), &params).unwrap();
            for (j, v) in tu.values().iter().enumerate() {
                worst = worst.max((v - (f.at(j) - ef)).abs());
            }
        }
    }
    outcome(worst <= 1e-12, format!("sup |T U f - (f - E f)| = {worst:.2e} over 400 functions"))
}

fn c3_inverse_constants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut sup_slack = f64::INFINITY;
    let mut diff_slack = f64::INFINITY;
    let grid = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0];
    for lambda in grid {
        let params = SteinParams::new(lambda, 1e-12).unwrap();
        let c = inverse_constants(&params);
        for _ in 0..100 {
            let len = rng.random_range(2..120);
            let f = FnTable::indicator(len, |_| rng.random_bool(0.5)).unwrap();
            let u = stein_inverse(&f, &params).unwrap();
            let v = u.values();
            sup_slack = sup_slack.min(c.sup_bound - u.sup_norm());
            for w in v.windows(2) {
                diff_slack = diff_slack.min(c.diff_bound - (w[1] - w[0]).abs());
            }
        }
    }
    outcome(
        sup_slack >= 0.0 && diff_slack >= 0.0,
        format!("min slack: sup {sup_slack:.3e}, difference {diff_slack:.3e} ({} lambdas x 100 indicators)", grid.len()),
    )
}

fn independent_trials_cases() -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut cases = random_p(&mut rng, 200, 12);
    for lambda in [0.5, 1.0, 2.0] {
        for n in 5..=50usize {
            cases.push(vec![lambda / n as f64; n]);
        }
    }
    cases
}

fn c4_independent_trials() -> Outcome {
    let mut fails = 0;
    let mut unhalved_fails = 0;
    let mut worst = 0.0f64;
    let cases = independent_trials_cases();
    for p in &cases {
        let law = poisson_binomial_pmf(p).unwrap();
        let bound = bound_poisson_binomial(p).unwrap();
        let tv = tv_distance(&law, &poisson(p.iter().sum()));
        worst = worst.max(tv / bound.value);
        if !dominates(&bound, tv) {
            fails += 1;
        }
        if bound.companion.as_ref().unwrap().value < tv - 1e-12 {
            unhalved_fails += 1;
        }
    }
    outcome(
        fails == 0,
        format!(
            "{fails}/{} instances exceed the halved bound; worst TV/bound = {worst:.4}; without the 1/2 factor: {unhalved_fails} failures",
            cases.len()
        ),
    )
}

fn c5_matching() -> Outcome {
    let target = poisson(1.0);
    let mut fails = Vec::new();
    for n in 2..=200usize {
        let tv = tv_distance(&matching_pmf(&MatchingSpec::plain(n).unwrap()).unwrap(), &target);
        let bound = bound_matching(n).unwrap();
        if !dominates(&bound, tv) {
            fails.push(format!("2/n at n={n}"));
        }
        if n <= 12 {
            let sharp = bound.companion.as_ref().unwrap().value;
            if tv > sharp + 1e-12 {
                fails.push(format!("2^n/n! at n={n}"));
            }
        }
    }
    outcome(fails.is_empty(), format!("n in 2..=200, sharp form n in 2..=12; failures: {fails:?}"))
}

fn c6_generalized_matching() -> Outcome {
    let cases: [&[usize]; 5] = [&[2, 2], &[2, 2, 2], &[3, 3], &[2, 2, 2, 2], &[4, 4]];
    let mut lines = Vec::new();
    let mut pass = true;
    for l in cases {
        let spec = MatchingSpec::with_multiplicities(l.to_vec()).unwrap();
        let tv = tv_distance(&matching_pmf(&spec).unwrap(), &poisson(spec.lambda()));
        let bound = bound_generalized_matching(l).unwrap();
        pass &= dominates(&bound, tv);
        lines.push(format!("{l:?}: {tv:.4} <= {:.4} (raw {:.3})", bound.value, bound.raw));
    }
    outcome(pass, lines.join(", "))
}

/// `(n, k)` with `k / sqrt(n)` in `[0.5, 2]`.
fn birthday_grid() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in [25usize, 100, 400] {
        let s = (n as f64).sqrt();
        for k in 1..=(2.0 * s) as usize {
            let theta = k as f64 / s;
            if (0.5..=2.0).contains(&theta) {
                out.push((n, k));
            }
        }
    }
    out
}

fn c7_birthday_pairs() -> Outcome {
    let mut fails = 0;
    let mut worst = 0.0f64;
    let grid = birthday_grid();
    for &(n, k) in &grid {
        let law = occupancy_pmf(&OccupancySpec::pairs(n, k).unwrap()).unwrap();
        let bound = bound_birthday_pairs(n, k).unwrap();
        let tv = tv_distance(&law, &poisson(bound.lambda));
        worst = worst.max(tv / bound.value);
        if !dominates(&bound, tv) {
            fails += 1;
        }
    }
    outcome(fails == 0, format!("{fails}/{} fail; worst TV/bound = {worst:.4}", grid.len()))
}

fn c8_birthday_triples() -> Outcome {
    let mut dominated = true;
    let mut monotone = true;
    let mut bounded = 0.0f64;
    let mut rows = Vec::new();
    for theta in [0.5f64, 1.0] {
        let mut prev: Option<f64> = None;
        let mut series = Vec::new();
        for m in 3usize.. {
            let n = m * m * m;
            let k = (theta * (n as f64).powf(2.0 / 3.0)).round() as usize;
            let spec = OccupancySpec::triples(n, k).unwrap();
            let Ok(law) = occupancy_pmf(&spec) else { break };
            let bound = bound_birthday_triples(n, k).unwrap();
            let tv = tv_distance(&law, &poisson(bound.lambda));
            let ratio = tv * (n as f64).powi(3) / (k as f64).powi(4);
            bounded = bounded.max(ratio);
            dominated &= dominates(&bound, tv);
            if let Some(p) = prev {
                monotone &= ratio <= p;
            }
            prev = Some(ratio);
            series.push(format!("{n}:{ratio:.4}"));
        }
        rows.push(format!("theta={theta} [{}]", series.join(" ")));
    }
    outcome(
        dominated && monotone,
        format!(
            "ratio TV n^3/k^4 max {bounded:.4}; non-increasing: {monotone}; C = {TRIPLES_SURROGATE_CONSTANT} dominates: {dominated}; {}",
            rows.join("; ")
        ),
    )
}

struct CouponCase {
    n: usize,
    k: usize,
    law: Pmf,
}

fn coupon_grid() -> Vec<CouponCase> {
    let mut out = Vec::new();
    for n in [100usize, 300, 1000, 3000, 10_000] {
        for theta in [-0.5, 0.0, 0.5, 1.0] {
            let nf = n as f64;
            let k = (nf * nf.ln() + theta * nf).round() as usize;
            let law = occupancy_pmf(&OccupancySpec::empty(n, k).unwrap()).unwrap();
            out.push(CouponCase { n, k, law });
        }
    }
    out
}

fn c9_coupon(grid: &[CouponCase]) -> Outcome {
    let mut scaled_max = 0.0f64;
    let mut chain_ok = true;
    let mut coupling_ok = true;
    let mut coupling_smaller = true;
    for case in grid {
        let chain = bound_coupon_collector(case.n, case.k).unwrap();
        let nf = case.n as f64;
        let theta = (case.k as f64 - nf * nf.ln()) / nf;
        let tv = tv_distance(&case.law, &poisson(chain.lambda));
        scaled_max = scaled_max.max(tv * theta.exp() * nf.ln().sqrt());
        chain_ok &= dominates(&chain, tv);
        let coupling = bound_coupling(&CouplingProblem::Coupon { n: case.n, k: case.k }).unwrap();
        let tv_c = tv_distance(&case.law, &poisson(coupling.lambda));
        coupling_ok &= dominates(&coupling, tv_c);
        coupling_smaller &= coupling.value < chain.value;
    }
    outcome(
        scaled_max <= 1.0 && chain_ok && coupling_ok && coupling_smaller,
        format!(
            "max TV e^theta sqrt(log n) = {scaled_max:.4}; chain dominates: {chain_ok}; coupling dominates: {coupling_ok}; coupling < chain: {coupling_smaller}; {} instances",
            grid.len()
        ),
    )
}

fn c10_joint() -> Outcome {
    let reference = product_poisson_joint(&[1.0, 1.0], EPS).unwrap();
    let mut pass = true;
    let mut rows = Vec::new();
    for n in 4..=9usize {
        let joint = joint_fixed_point_succession_pmf(n).unwrap();
        let tv = joint_tv(&joint, &reference).unwrap();
        let bound = bound_fixed_point_succession(n).unwrap();
        pass &= dominates(&bound, tv);
        let exact = matching_pmf(&MatchingSpec::plain(n).unwrap()).unwrap();
        for coord in 0..2 {
            let m = joint.marginal(coord).unwrap();
            let gap = (0..=n).map(|j| (m.prob(j) - exact.prob(j)).abs()).fold(0.0, f64::max);
            pass &= gap <= 1e-15;
        }
        rows.push(format!("{n}:{tv:.4}"));
    }
    outcome(pass, format!("joint TV vs 13/n and marginals [{}]", rows.join(" ")))
}

fn c11_process() -> Outcome {
    let mut pass = true;
    let mut rows = Vec::new();
    for n in 3..=12usize {
        let law = matching_config_law(n).unwrap();
        let reference = product_poisson_config_law(&vec![1.0 / n as f64; n]).unwrap();
        let tv = process_tv(&law, &reference).unwrap();
        pass &= dominates(&bound_matching_process(n).unwrap(), tv);
        rows.push(format!("{n}:{tv:.4}"));
    }
    outcome(pass, format!("process TV vs 4/n [{}]", rows.join(" ")))
}

fn c12_coupling(grid: &[CouponCase]) -> Outcome {
    let mut fails = Vec::new();
    let target = poisson(1.0);
    for n in 2..=200usize {
        let tv = tv_distance(&matching_pmf(&MatchingSpec::plain(n).unwrap()).unwrap(), &target);
        if !dominates(&bound_coupling(&CouplingProblem::Matching(n)).unwrap(), tv) {
            fails.push(format!("matching n={n}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for p in random_p(&mut rng, 200, 12) {
        let bound = bound_coupling(&CouplingProblem::PoissonBinomial(p.clone())).unwrap();
        let tv = tv_distance(&poisson_binomial_pmf(&p).unwrap(), &poisson(bound.lambda));
        if !dominates(&bound, tv) {
            fails.push(format!("independent trials {p:?}"));
        }
    }
    for case in grid {
        let bound = bound_coupling(&CouplingProblem::Coupon { n: case.n, k: case.k }).unwrap();
        if !dominates(&bound, tv_distance(&case.law, &poisson(bound.lambda))) {
            fails.push(format!("coupon n={} k={}", case.n, case.k));
        }
    }
    for (n, k) in birthday_grid() {
        let spec = OccupancySpec::new(n, k, OccupancyStatistic::Matches(2)).unwrap();
        let bound = bound_coupling(&CouplingProblem::Birthday { n, k }).unwrap();
        if !dominates(&bound, tv_distance(&occupancy_pmf(&spec).unwrap(), &poisson(bound.lambda))) {
            fails.push(format!("birthday n={n} k={k}"));
        }
    }
    outcome(fails.is_empty(), format!("matching, independent trials, coupon, birthday; failures: {fails:?}"))
}

fn c13_negative_association(grid: &[CouponCase]) -> Outcome {
    let mut fails = 0;
    for case in grid {
        let (lambda, var) = (case.law.mean(), case.law.variance());
        let bound = bound_negative_association(lambda, var).unwrap();
        if !dominates(&bound, tv_distance(&case.law, &poisson(lambda))) {
            fails += 1;
        }
    }
    outcome(fails == 0, format!("{fails}/{} empty-box instances fail", grid.len()))
}

fn c14_monochromatic() -> Outcome {
    let mut cases: Vec<(usize, usize, usize)> = (2..=10).map(|c| (6, 2, c)).collect();
    cases.extend((3..=10).map(|c| (8, 3, c)));
    let mut dominated = true;
    let mut worst_gap = 0.0f64;
    for &(n, k, c) in &cases {
        let bound = bound_monochromatic(n, k, c).unwrap();
        let law = coloring_pmf(&ColoringSpec::new(n, k, c).unwrap()).unwrap();
        dominated &= dominates(&bound, tv_distance(&law, &poisson(bound.lambda)));
        let g = DependencyGraph::monochromatic(n, k, c).unwrap();
        let plain = bound_dependency_graph(&g).unwrap();
        let (z, xz) = g.strong_neighborhood_inputs();
        let general = bound_dependency_graph_general(&g, &vec![0.0; g.len()], &z, &xz).unwrap();
        let scale = 1.0 + plain.raw;
        worst_gap = worst_gap
            .max((general.raw - plain.raw).abs() / scale)
            .max((plain.raw - bound.raw).abs() / scale);
    }
    outcome(
        dominated && worst_gap <= 1e-12,
        format!("{} instances; dominates: {dominated}; general vs plain vs closed form gap {worst_gap:.2e}", cases.len()),
    )
}

fn c15_pairs() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let small = vec![
        PairModel::poisson_binomial(vec![0.2, 0.5, 0.7, 0.9, 0.35]).unwrap(),
        PairModel::matching(MatchingSpec::plain(4).unwrap()).unwrap(),
        PairModel::matching(MatchingSpec::with_multiplicities(vec![2, 1, 2]).unwrap()).unwrap(),
        PairModel::birthday_pairs(3, 2).unwrap(),
        PairModel::birthday_pairs(4, 4).unwrap(),
        PairModel::birthday_triples(3, 5).unwrap(),
        PairModel::coupon(3, 4).unwrap(),
    ];
    let mut exact_ok = true;
    let mut worst: f64 = 0.0;
    for model in &small {
        let r = verify_exchangeability(model).unwrap();
        exact_ok &= r.passes(1e-12);
        worst = worst
            .max(r.max_asymmetry)
            .max(r.max_margin_error)
            .max(r.max_up_error)
            .max(r.max_down_error);
    }
    let large_p = (0..200).map(|_| rng.random_range(0.0..0.1)).collect();
    let large = vec![
        PairModel::poisson_binomial(large_p).unwrap(),
        PairModel::matching(MatchingSpec::plain(100).unwrap()).unwrap(),
        PairModel::matching(MatchingSpec::with_multiplicities(vec![4; 13]).unwrap()).unwrap(),
        PairModel::birthday_pairs(365, 30).unwrap(),
        PairModel::birthday_triples(1000, 100).unwrap(),
        PairModel::coupon(50, 250).unwrap(),
    ];
    let mut mc_ok = true;
    let mut worst_z: f64 = 0.0;
    for model in &large {
        let r = verify_step_probs(model, 200_000, &mut rng).unwrap();
        mc_ok &= r.pass;
        worst_z = worst_z.max(r.max_abs_z());
    }
    outcome(
        exact_ok && mc_ok,
        format!(
            "exact: {} instances, worst error {worst:.2e}; simulation: {} instances, worst |z| = {worst_z:.2}",
            small.len(),
            large.len()
        ),
    )
}

fn sweep_bytes(spec: &SweepSpec) -> Vec<String> {
    let mut buf = Vec::new();
    run_sweep(spec, &mut CsvSink::new(&mut buf)).unwrap();
    String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |x| x.0).to_string())
        .collect()
}

fn c16_determinism() -> Outcome {
    let exact = SweepSpec {
        problem: ProblemId::Matching,
        grid: Grid {
            n: (4..=12).collect(),
            ..Grid::default()
        },
        seed: 7,
        format: OutputFormat::Csv,
        mc_samples: None,
    };
    let mc = SweepSpec {
        problem: ProblemId::BirthdayPairs,
        grid: Grid {
            n: vec![100, 365],
            k: vec![10, 20, 30],
            ..Grid::default()
        },
        seed: 7,
        format: OutputFormat::Csv,
        mc_samples: Some(10_000),
    };
    let mut same = true;
    for spec in [&exact, &mc] {
        let a = sweep_bytes(spec);
        std::env::set_var(THREADS_ENV, "1");
        let b = sweep_bytes(spec);
        std::env::set_var(THREADS_ENV, "3");
        let c = sweep_bytes(spec);
        std::env::remove_var(THREADS_ENV);
        same &= a == b && b == c;
    }
    outcome(same, "exact and simulated sweeps repeated across worker counts, seconds column excluded")
}

fn main() {
    let started = Instant::now();
    let mut passed = 0;
    let mut failed = 0;
    let mut run = |id: u32, name: &str, limit: Option<Duration>, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let mut o = f();
        let elapsed = t.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                o.pass = false;
                o.detail.push_str(&format!("; runtime over {limit:?}"));
            }
        }
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if o.pass {
            passed += 1;
        } else {
            failed += 1;
        }
        println!("{tag} [{id:>2}] {name}: {} ({:.2} s)", o.detail, elapsed.as_secs_f64());
    };
    let secs = Duration::from_secs;
    run(1, "stein identity", Some(secs(10)), &c1_stein_identity);
    run(2, "operator inverse", Some(secs(1)), &c2_inverse);
    run(3, "pseudo-inverse constants", Some(secs(1)), &c3_inverse_constants);
    run(4, "independent trials dominance", Some(secs(30)), &c4_independent_trials);
    run(5, "matching dominance", Some(secs(5)), &c5_matching);
    run(6, "multiset matching dominance", Some(secs(60)), &c6_generalized_matching);
    run(7, "birthday pairs dominance", Some(secs(120)), &c7_birthday_pairs);
    run(8, "triple matches surrogate", None, &c8_birthday_triples);
    let grid = coupon_grid();
    run(9, "empty boxes surrogate and coupling", None, &|| c9_coupon(&grid));
    run(10, "fixed points and successions", Some(secs(120)), &c10_joint);
    run(11, "matching process", Some(secs(5)), &c11_process);
    run(12, "coupling bounds", None, &|| c12_coupling(&grid));
    run(13, "negative association", None, &|| c13_negative_association(&grid));
    run(14, "monochromatic tuples", None, &c14_monochromatic);
    run(15, "pair constructions", None, &c15_pairs);
    run(16, "determinism", None, &c16_determinism);
    println!(
        "acceptance: {passed} PASS, {failed} FAIL ({:.1} s)",
        started.elapsed().as_secs_f64()
    );
}
