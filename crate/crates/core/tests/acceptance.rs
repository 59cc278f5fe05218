//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use dwadvisor::analyzer::parse_query;
use dwadvisor::candidates::{can_answer, view_from_cluster, Candidate, CandidateIndex};
use dwadvisor::catalog::AttrRef;
use dwadvisor::cost::{workload_cost, Configuration};
use dwadvisor::genworkload::generate_workload;
use dwadvisor::miner::{mine_frequent_itemsets, QueryCluster, DEFAULT_MINSUP, DEFAULT_TAU};
use dwadvisor::pipeline::{recommend, Analysis};
use dwadvisor::selector::{greedy_select, select, SelectionParams, Strategy};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random matrices for criteria 1 and 2.
const MINING_MATRICES: u64 = 60;
const MINING_MAX_ROWS: usize = 10;
const MINING_MAX_COLS: usize = 12;
const MINING_TIME_LIMIT: Duration = Duration::from_secs(10);
/// Generated workloads for criterion 3.
const COVERAGE_WORKLOADS: u64 = 100;
const COVERAGE_MAX_QUERIES: usize = 20;
/// Tiny materialized datasets for criterion 4.
const ROLLUP_DATASETS: u64 = 30;
/// Workloads and nested configuration pairs per workload for criterion 5.
const MONOTONE_WORKLOADS: u64 = 100;
const MONOTONE_PAIRS: u64 = 10;
/// Seeded instances for criteria 6 and 7.
const BUDGET_INSTANCES: u64 = 50;
const EXHAUSTIVE_INSTANCES: u64 = 50;
const EXHAUSTIVE_MAX_CANDIDATES: usize = 12;
const GREEDY_MAX_RATIO: f64 = 2.0;
const FIXTURE_TIME_LIMIT: Duration = Duration::from_secs(1);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mining_corpus() -> Vec<(dwadvisor::analyzer::QueryAttributeMatrix, f64)> {
    let mut r = rng(0xA11CE);
    (0..MINING_MATRICES)
        .map(|_| {
            let m = random_matrix(&mut r, MINING_MAX_ROWS, MINING_MAX_COLS);
            let minsup = *[0.1, 0.2, 0.25, 0.3, 1.0 / 3.0, 0.5, 0.7, 1.0]
                .choose(&mut r)
                .unwrap();
            (m, minsup)
        })
        .collect()
}

fn c1_mining_oracle() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    for (i, (m, minsup)) in mining_corpus().iter().enumerate() {
        let got: Vec<(Vec<usize>, usize)> = mine_frequent_itemsets(m, *minsup)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|it| (it.columns, it.support_count))
            .collect();
        let want = brute_force_itemsets(m, *minsup);
        check(got == want, || {
            format!(
                "matrix {i} (minsup {minsup}): {} mined vs {} expected",
                got.len(),
                want.len()
            )
        })?;
        compared += want.len();
    }
    let elapsed = start.elapsed();
    check(elapsed < MINING_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{MINING_MATRICES} matrices, {compared} itemsets identical, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn c2_downward_closure() -> Outcome {
    let mut checked = 0;
    for (i, (m, minsup)) in mining_corpus().iter().enumerate() {
        let mined = mine_frequent_itemsets(m, *minsup).map_err(|e| e.to_string())?;
        let index: std::collections::BTreeMap<&Vec<usize>, usize> = mined
            .iter()
            .map(|it| (&it.columns, it.support_count))
            .collect();
        for it in &mined {
            if it.columns.len() < 2 {
                continue;
            }
            for skip in 0..it.columns.len() {
                let sub: Vec<usize> = it
                    .columns
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, c)| *c)
                    .collect();
                let sup = index.get(&sub).copied();
                check(sup.is_some_and(|s| s >= it.support_count), || {
                    format!(
                        "matrix {i}: subset {sub:?} of {:?} missing or less supported",
                        it.columns
                    )
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} subset checks, 0 violations"))
}

fn c3_view_coverage() -> Outcome {
    let c = retail();
    let mut pairs = 0;
    let mut clusters = 0;
    for seed in 0..COVERAGE_WORKLOADS {
        let n = 1 + (seed as usize % COVERAGE_MAX_QUERIES);
        let a = Analysis::run(
            &generate_workload(&c, n, seed),
            &c,
            DEFAULT_MINSUP,
            DEFAULT_TAU,
        )
        .map_err(|e| format!("seed {seed}: {e}"))?;
        for cl in &a.clusters {
            let v = view_from_cluster(cl, &a.workload, &c).map_err(|e| e.to_string())?;
            for q in &cl.queries {
                check(can_answer(&v, &a.workload[*q]), || {
                    format!("seed {seed}: view misses query {q}")
                })?;
                pairs += 1;
            }
            clusters += 1;
        }
    }
    Ok(format!(
        "{COVERAGE_WORKLOADS} workloads, {clusters} clusters, {pairs} query checks, 0 failures"
    ))
}

fn c4_rollup() -> Outcome {
    let c = tiny();
    let mut answered = 0;
    for seed in 0..ROLLUP_DATASETS {
        let mut r = rng(seed);
        let ds = Dataset::random(&c, &mut r);
        let a = Analysis::run(
            &generate_workload(&c, 10, seed),
            &c,
            DEFAULT_MINSUP,
            DEFAULT_TAU,
        )
        .map_err(|e| format!("seed {seed}: {e}"))?;
        let mut clusters = a.clusters.clone();
        clusters.push(QueryCluster {
            queries: (0..a.workload.len()).collect(),
            attributes: BTreeSet::new(),
        });
        for cl in &clusters {
            let v = view_from_cluster(cl, &a.workload, &c).map_err(|e| e.to_string())?;
            let rows = materialize(&ds, &c, &v);
            for q in &cl.queries {
                let q = &a.workload[*q];
                let base = eval_base(&ds, &c, q);
                let from_view = eval_view(&rows, q);
                check(base == from_view, || {
                    format!("seed {seed}: query {} differs", q.id)
                })?;
                answered += 1;
            }
        }
    }
    Ok(format!(
        "{ROLLUP_DATASETS} datasets, {answered} answers identical"
    ))
}

fn c5_monotonicity() -> Outcome {
    let c = retail();
    let mut instances = 0;
    for seed in 0..MONOTONE_WORKLOADS {
        let n = 1 + (seed as usize % 8);
        let a = Analysis::run(
            &generate_workload(&c, n, 1000 + seed),
            &c,
            DEFAULT_MINSUP,
            DEFAULT_TAU,
        )
        .map_err(|e| e.to_string())?;
        let pool: Vec<Candidate> = a.all_candidates().collect();
        let mut r = rng(seed);
        for pair in 0..MONOTONE_PAIRS {
            let small = random_closed(&pool, &BTreeSet::new(), &mut r);
            let big = random_closed(&pool, &small, &mut r);
            assert!(small.is_subset(&big));
            let cost = |ids: &BTreeSet<usize>| {
                let cfg =
                    Configuration::from_candidates(ids.iter().map(|&i| pool[i].clone())).unwrap();
                workload_cost(&a.workload, &cfg, &c).unwrap().total
            };
            let (lo, hi) = (cost(&big), cost(&small));
            check(lo <= hi, || {
                format!("workload {seed} pair {pair}: {lo} > {hi}")
            })?;
            instances += 1;
        }
    }
    Ok(format!("{instances} nested pairs, 0 violations"))
}

/// `base` plus a random selection of further candidates, closed under the
/// view dependency.
fn random_closed(
    pool: &[Candidate],
    base: &BTreeSet<usize>,
    r: &mut rand_chacha::ChaCha8Rng,
) -> BTreeSet<usize> {
    let p = r.gen_range(0.0..0.6);
    let mut out = base.clone();
    for i in 0..pool.len() {
        if r.gen_bool(p) {
            out.insert(i);
            if let Some(v) = pool[i].parent_view() {
                out.insert(pool.iter().position(|c| c.id() == v).unwrap());
            }
        }
    }
    out
}

fn c6_budget_safety() -> Outcome {
    let c = retail();
    let mut analyses = vec![
        Analysis::run(RETAIL_WORKLOAD, &c, DEFAULT_MINSUP, DEFAULT_TAU)
            .map_err(|e| e.to_string())?,
    ];
    for seed in 0..BUDGET_INSTANCES {
        let n = 1 + (seed as usize % 10);
        analyses.push(
            Analysis::run(
                &generate_workload(&c, n, 2000 + seed),
                &c,
                DEFAULT_MINSUP,
                DEFAULT_TAU,
            )
            .map_err(|e| e.to_string())?,
        );
    }
    let mut r = rng(6);
    let mut runs = 0;
    for (i, a) in analyses.iter().enumerate() {
        let budgets = [1, 1_000, r.gen_range(1..200_000), 1_000_000, 100_000_000];
        for budget in budgets {
            for strategy in Strategy::ALL {
                for alpha in [0.0, 0.5, 1.0] {
                    let p = SelectionParams {
                        budget_bytes: budget,
                        strategy,
                        alpha,
                    };
                    let s = select(&p, &a.indexes, &a.views, &a.workload, &c)
                        .map_err(|e| e.to_string())?;
                    let cfg = &s.configuration;
                    check(cfg.total_size_bytes() <= budget, || {
                        format!(
                            "instance {i} {strategy}: {} > {budget}",
                            cfg.total_size_bytes()
                        )
                    })?;
                    let orphan = cfg
                        .structures()
                        .find(|x| x.parent_view().is_some_and(|v| !cfg.contains(v)));
                    check(orphan.is_none(), || {
                        format!("instance {i} {strategy}: orphan view index")
                    })?;
                    runs += 1;
                }
            }
        }
    }
    Ok(format!(
        "{} instances, {runs} selections, 0 violations",
        analyses.len()
    ))
}

fn c7_greedy_vs_exhaustive() -> Outcome {
    let c = retail();
    // single-query fixture, full candidate pool
    let q = parse_query(FIXTURE_QUERY, &c).map_err(|e| e.to_string())?;
    let a = Analysis::from_workload(vec![q], &c, DEFAULT_MINSUP, DEFAULT_TAU)
        .map_err(|e| e.to_string())?;
    let pool: Vec<Candidate> = a.all_candidates().collect();
    let budget = 1_000_000;
    let greedy = greedy_select(&pool, &a.workload, &c, budget)
        .map_err(|e| e.to_string())?
        .cost
        .total;
    let opt = exhaustive_optimum(&pool, &a.workload, &c, budget);
    check(greedy == opt, || {
        format!("fixture: greedy {greedy} vs optimum {opt}")
    })?;
    let fixture_pool = pool.len();

    let mut worst = 1.0f64;
    let mut worst_at = 0;
    for seed in 0..EXHAUSTIVE_INSTANCES {
        let mut r = rng(7000 + seed);
        let n = r.gen_range(2..=6);
        let a = Analysis::run(
            &generate_workload(&c, n, 7000 + seed),
            &c,
            DEFAULT_MINSUP,
            DEFAULT_TAU,
        )
        .map_err(|e| e.to_string())?;
        let pool = subsample_pool(
            a.all_candidates().collect(),
            EXHAUSTIVE_MAX_CANDIDATES,
            &mut r,
        );
        let total: u64 = pool.iter().map(|x| x.size_bytes().unwrap()).sum();
        let budget = r.gen_range(1..=total.max(1));
        let greedy = greedy_select(&pool, &a.workload, &c, budget)
            .map_err(|e| e.to_string())?
            .cost
            .total;
        let opt = exhaustive_optimum(&pool, &a.workload, &c, budget);
        check(greedy >= opt, || {
            format!("instance {seed}: greedy {greedy} below optimum {opt}")
        })?;
        let ratio = greedy as f64 / opt as f64;
        if ratio > worst {
            worst = ratio;
            worst_at = seed;
        }
        check(ratio <= GREEDY_MAX_RATIO, || {
            format!("instance {seed}: ratio {ratio:.4}")
        })?;
    }
    Ok(format!(
        "fixture equal to optimum ({greedy} pages, {fixture_pool} candidates); {EXHAUSTIVE_INSTANCES} instances within {GREEDY_MAX_RATIO}x, worst ratio {worst:.4} (instance {worst_at})"
    ))
}

fn c8_fixture() -> Outcome {
    let start = Instant::now();
    let c = retail();
    let a = Analysis::run(RETAIL_WORKLOAD, &c, DEFAULT_MINSUP, DEFAULT_TAU)
        .map_err(|e| e.to_string())?;
    let rec = recommend(
        &a,
        &c,
        DEFAULT_MINSUP,
        DEFAULT_TAU,
        &SelectionParams::new(1_000_000, Strategy::Joint),
    )
    .map_err(|e| e.to_string())?;
    let base = workload_cost(&a.workload, &Configuration::new(), &c).map_err(|e| e.to_string())?;
    check(base.queries[0].pages == 494, || {
        format!("fixture query baseline {}", base.queries[0].pages)
    })?;
    let year = AttrRef::new("date", "year");
    let bitmap_id = CandidateIndex::bitmap_join(&c, &year).map(|b| b.id);
    let bitmap = a
        .indexes
        .iter()
        .find(|ix| Some(&ix.id) == bitmap_id.as_ref())
        .and_then(|ix| ix.size_bytes);
    check(bitmap == Some(37500), || {
        format!("bitmap(date.year) size {bitmap:?}")
    })?;
    let first = rec
        .trace
        .first()
        .map(|t| t.candidate.as_str().starts_with("mv_"));
    check(first == Some(true), || {
        "greedy did not pick a view first".into()
    })?;
    check(rec.cost.saving_fraction >= 0.5, || {
        format!("saving {}", rec.cost.saving_fraction)
    })?;

    // the single-query fixture: its view and the greedy's first pick
    let q = parse_query(FIXTURE_QUERY, &c).map_err(|e| e.to_string())?;
    let single = Analysis::from_workload(vec![q], &c, DEFAULT_MINSUP, DEFAULT_TAU)
        .map_err(|e| e.to_string())?;
    let view = &single.views[0];
    check(view.size_bytes == Some(1080), || {
        format!("fixture view size {:?}", view.size_bytes)
    })?;
    let s = select(
        &SelectionParams::new(1_000_000, Strategy::Joint),
        &single.indexes,
        &single.views,
        &single.workload,
        &c,
    )
    .map_err(|e| e.to_string())?;
    check(
        s.trace.first().map(|t| &t.candidate) == Some(&view.id),
        || "fixture: view not picked first".into(),
    )?;
    check(s.trace[0].benefit == 493, || {
        format!("fixture view benefit {}", s.trace[0].benefit)
    })?;
    check(s.cost.total == 1, || {
        format!("fixture final cost {}", s.cost.total)
    })?;

    let elapsed = start.elapsed();
    check(elapsed < FIXTURE_TIME_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "baseline 494, view 1080 B, bitmap(date.year) 37500 B, view picked first; workload {} -> {} pages; {:.3} s",
        rec.cost.baseline_pages,
        rec.cost.final_pages,
        elapsed.as_secs_f64()
    ))
}

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let report = |sub: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_dwadvisor"))
            .args([
                "recommend",
                "--catalog",
                &fixture_path("retail_catalog.json"),
            ])
            .args(["--workload", &fixture_path("retail_workload.sql")])
            .args(["--budget", "1M", "--format", "json", "--trace", "--out-dir"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        check(status.success(), || format!("exit status {status}"))?;
        std::fs::read(out.join("report.json")).map_err(|e| e.to_string())
    };
    let (a, b) = (report("a")?, report("b")?);
    check(a == b, || "reports differ".into())?;
    Ok(format!("two runs, {} byte reports identical", a.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("mining oracle equivalence", c1_mining_oracle),
        ("downward closure", c2_downward_closure),
        ("view coverage", c3_view_coverage),
        ("rollup correctness", c4_rollup),
        ("cost monotonicity", c5_monotonicity),
        ("budget safety and dependency", c6_budget_safety),
        ("greedy vs exhaustive", c7_greedy_vs_exhaustive),
        ("end-to-end fixture", c8_fixture),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} [{name}]: FAIL ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
