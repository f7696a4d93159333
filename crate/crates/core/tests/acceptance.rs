//! Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use treexplain::attribution::{attribute, shap_attribute, shapley_oracle, Method, RankedList};
use treexplain::dataset::{build_templates, load_table, split, synthesize, Dataset, SchemaConfig, SynthConfig};
use treexplain::evaluation::{
    explicit_accuracy, implicit_accuracy, rbo, similarity_report, AccuracyReport, Depth, RboParams,
};
use treexplain::forest::{fit_forest, Forest, ForestParams, RegressionTree, TreeNode};

/// Optional: directory with `data.csv` and `schema.json` of the PostgreSQL experiment data.
const PG_DATA_VAR: &str = "TREEXPLAIN_PG_DATA";

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn within_budget(outcome: Outcome, elapsed: Duration, budget: Option<Duration>) -> Outcome {
    match (outcome, budget) {
        (Outcome::Pass(d), Some(b)) if elapsed > b => Outcome::Fail(format!(
            "{d}; took {:.1}s, budget {:.0}s",
            elapsed.as_secs_f64(),
            b.as_secs_f64()
        )),
        (o, _) => o,
    }
}

fn relative_ok(total: f64, prediction: f64) -> bool {
    (total - prediction).abs() <= 1e-9 * prediction.abs().max(1.0)
}

fn local_accuracy() -> Outcome {
    let mut r = rng(1001);
    let mut cases = Vec::with_capacity(1000);
    for i in 0..10u64 {
        let n_rows = r.random_range(300..1500);
        let data = synthesize(&SynthConfig::new(
            n_rows,
            r.random_range(1..5),
            3,
            vec![1.0, 0.7, 0.4],
            0.05,
            i,
        ))
        .unwrap();
        let params = ForestParams {
            n_estimators: r.random_range(1..=50),
            max_depth: r.random_range(1..=10),
            feature_fraction: r.random_range(0.5..=1.0),
            seed: i,
            ..ForestParams::default()
        };
        let forest = fit_forest(&data, &params).unwrap();
        for j in 0..10 {
            let x = data.row(j * 7).to_vec();
            cases.push((forest.clone(), x));
        }
    }
    while cases.len() < 1000 {
        let n_features = r.random_range(1..=12);
        let (n_trees, depth) = (r.random_range(1..=50), r.random_range(1..=10));
        let forest = random_forest(&mut r, n_trees, n_features, depth);
        let x = random_input(&mut r, n_features);
        cases.push((forest, x));
    }
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for (forest, x) in &cases {
        let prediction = forest.predict(x).unwrap();
        for method in [Method::Ti, Method::Shap] {
            let total = attribute(forest, x, method).unwrap().total();
            worst = worst.max((total - prediction).abs() / prediction.abs().max(1.0));
            failures += usize::from(!relative_ok(total, prediction));
        }
    }
    verdict(
        failures == 0,
        format!(
            "{} cases x 2 methods, worst relative error {worst:.1e}, {failures} over 1e-9",
            cases.len()
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(2002);
    let mut worst: f64 = 0.0;
    let mut compare = |model: &Forest, x: &[f64]| {
        let shap = shap_attribute(model, x).unwrap();
        let oracle = shapley_oracle(model, x).unwrap();
        for (s, o) in shap.contributions.iter().zip(&oracle.contributions) {
            worst = worst.max((s - o).abs());
        }
    };
    for _ in 0..200 {
        let n_features = r.random_range(1..=12);
        let features = all_features(n_features);
        let depth = r.random_range(1..=6);
        let tree = random_tree(&mut r, &features, n_features, depth);
        let forest = Forest::from_trees(vec![tree], names(n_features)).unwrap();
        let x = random_input(&mut r, n_features);
        compare(&forest, &x);
    }
    for _ in 0..20 {
        let n_features = r.random_range(1..=12);
        let (n_trees, depth) = (r.random_range(2..=10), r.random_range(1..=6));
        let forest = random_forest(&mut r, n_trees, n_features, depth);
        let x = random_input(&mut r, n_features);
        compare(&forest, &x);
    }
    verdict(
        worst <= 1e-9,
        format!("200 trees + 20 forests, max |SHAP - oracle| = {worst:.1e}"),
    )
}

fn two_feature_fixture() -> Outcome {
    let tree = RegressionTree::new(
        vec![
            TreeNode::internal(0, 0.5, 1, 2, 2.5, 4),
            TreeNode::leaf(1.0, 2),
            TreeNode::internal(1, 0.5, 3, 4, 4.0, 2),
            TreeNode::leaf(3.0, 1),
            TreeNode::leaf(5.0, 1),
        ],
        2,
    )
    .unwrap();
    let x = [0.7, 0.8];
    let ti = attribute(&tree, &x, Method::Ti).unwrap();
    let shap = attribute(&tree, &x, Method::Shap).unwrap();
    let near = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(u, v)| (u - v).abs() <= 1e-12);
    let ok = near(&[ti.bias], &[2.5])
        && near(&ti.contributions, &[1.5, 1.0])
        && near(&[shap.bias], &[2.5])
        && near(&shap.contributions, &[1.75, 0.75]);
    verdict(
        ok,
        format!(
            "TI {} + {:?}, SHAP {} + {:?}",
            ti.bias, ti.contributions, shap.bias, shap.contributions
        ),
    )
}

fn rbo_correctness() -> Outcome {
    let list = |v: &[usize]| RankedList::from_order(v.to_vec()).unwrap();
    let all = RboParams::default();
    let identical = rbo(&list(&[2, 0, 3, 1]), &list(&[2, 0, 3, 1]), all).unwrap();
    let disjoint = rbo(
        &list(&[0, 1, 2, 3, 4, 5]),
        &list(&[3, 4, 5, 0, 1, 2]),
        RboParams {
            p: 0.9,
            depth: Depth::Top(3),
        },
    )
    .unwrap();
    let swapped = rbo(
        &list(&[0, 1, 2]),
        &list(&[1, 0, 2]),
        RboParams {
            p: 0.9,
            depth: Depth::Top(3),
        },
    )
    .unwrap();
    let ok = (identical - 1.0).abs() <= 1e-12 && disjoint.abs() <= 1e-12 && (swapped - 0.9).abs() <= 1e-12;
    verdict(
        ok,
        format!("identical {identical}, disjoint {disjoint}, [a,b,c] vs [b,a,c] {swapped:.15}"),
    )
}

fn axioms() -> Outcome {
    let mut r = rng(3003);
    let mut dummy_violations = 0;
    let mut worst_asymmetry: f64 = 0.0;
    for _ in 0..200 {
        let n_features = r.random_range(2..=10);
        let used: Vec<usize> = (0..n_features).filter(|_| r.random_bool(0.6)).collect();
        let used = if used.is_empty() { vec![0] } else { used };
        let n_trees = r.random_range(1..6);
        let trees = (0..n_trees)
            .map(|_| {
                let depth = r.random_range(1..=8);
                random_tree(&mut r, &used, n_features, depth)
            })
            .collect();
        let forest = Forest::from_trees(trees, names(n_features)).unwrap();
        let x = random_input(&mut r, n_features);
        for method in [Method::Ti, Method::Shap] {
            let a = attribute(&forest, &x, method).unwrap();
            dummy_violations += (0..n_features)
                .filter(|f| !used.contains(f) && a.contributions[*f] != 0.0)
                .count();
        }

        let depth = r.random_range(1..=8);
        let tree = random_tree(&mut r, &all_features(n_features), n_features, depth);
        let mirror = swap_features(&tree, 0, 1);
        let forest = Forest::from_trees(vec![tree, mirror], names(n_features)).unwrap();
        let mut x = random_input(&mut r, n_features);
        x[1] = x[0];
        let a = shap_attribute(&forest, &x).unwrap();
        worst_asymmetry = worst_asymmetry.max((a.contributions[0] - a.contributions[1]).abs());
    }
    verdict(
        dummy_violations == 0 && worst_asymmetry <= 1e-9,
        format!(
            "{dummy_violations} non-zero unused features, max |phi_0 - phi_1| on mirrored models {worst_asymmetry:.1e}"
        ),
    )
}

fn top3_dominates(r: &AccuracyReport) -> bool {
    r.cells
        .iter()
        .filter(|c| c.k == 1)
        .all(|c| r.cell(&c.treatment, 3).is_some_and(|c3| c3.hits >= c.hits))
}

fn describe(r: &AccuracyReport) -> String {
    let fmt = |v: Option<f64>| v.map_or("--".to_string(), |v| format!("{:.3}", v));
    format!(
        "{} top1 {} top3 {}",
        r.method().label(),
        fmt(r.average(1)),
        fmt(r.average(3))
    )
}

fn synthetic_interventional() -> Outcome {
    let data = synthesize(&SynthConfig::new(
        5000,
        3,
        3,
        vec![1.0, 0.7, 0.4],
        0.05,
        treexplain::DEFAULT_SEED,
    ))
    .unwrap();
    let params = ForestParams {
        n_estimators: 100,
        max_depth: 10,
        ..ForestParams::default()
    };
    let (train, _val, test) = split(&data, (0.6, 0.2, 0.2), params.seed).unwrap();
    let forest = fit_forest(&train, &params).unwrap();
    let templates = build_templates(&data, None).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for method in [Method::Shap, Method::Ti] {
        let explicit = explicit_accuracy(&forest, &test, method, &[1, 3]).unwrap();
        let implicit = implicit_accuracy(&forest, &templates, &data, method, &[1, 3]).unwrap();
        ok &= explicit.average(1).is_some_and(|a| a >= 0.95);
        ok &= implicit.average(1).is_some_and(|a| a >= 0.90);
        ok &= top3_dominates(&explicit) && top3_dominates(&implicit);
        parts.push(format!(
            "explicit {}; implicit {}",
            describe(&explicit),
            describe(&implicit)
        ));
    }
    verdict(ok, parts.join(" | "))
}

fn performance_ordering() -> Outcome {
    let data = synthesize(&SynthConfig::new(5000, 3, 3, vec![1.0, 0.7, 0.4], 0.05, 7)).unwrap();
    let probe = data.select(&(0..10).collect::<Vec<_>>());
    let base = ForestParams {
        n_estimators: 200,
        ..ForestParams::default()
    };
    let depths = [5, 10, 15, 20];
    let records =
        treexplain::bench::depth_scaling(&data, &probe, &depths, &base, &[Method::Shap, Method::Ti], 3).unwrap();
    let ratios: Vec<f64> = records
        .chunks(2)
        .map(|pair| pair[0].seconds_per_instance / pair[1].seconds_per_instance)
        .collect();
    let (at5, at20) = (ratios[0], ratios[3]);
    let ok = at20 >= 5.0 && at20 > at5 && ratios[1..].iter().all(|&r| r > 1.0);
    let shown: Vec<String> = depths
        .iter()
        .zip(&ratios)
        .map(|(d, r)| format!("d{d} {r:.0}x"))
        .collect();
    verdict(
        ok,
        format!(
            "SHAP/TI per-instance time ratio {}; depth-20 SHAP {:.3e}s, TI {:.3e}s",
            shown.join(", "),
            records[6].seconds_per_instance,
            records[7].seconds_per_instance
        ),
    )
}

fn postgres_tier() -> Outcome {
    let Some(dir) = std::env::var_os(PG_DATA_VAR).map(PathBuf::from) else {
        return Outcome::Skip(format!(
            "set {PG_DATA_VAR} to a directory with data.csv and schema.json"
        ));
    };
    let run = || -> treexplain::Result<Outcome> {
        let schema = SchemaConfig::from_json_file(dir.join("schema.json"))?;
        let data: Dataset = load_table(dir.join("data.csv"), &schema)?;
        let params = ForestParams::default();
        let (train, _val, test) = split(&data, (0.6, 0.2, 0.2), params.seed)?;
        let forest = fit_forest(&train, &params)?;
        let templates = build_templates(&data, None)?;
        let similarity = similarity_report(
            &forest,
            &test,
            (Method::Shap, Method::Ti),
            0.9,
            &[Depth::All, Depth::Top(5), Depth::Top(3)],
        )?;
        let mut averages = Vec::new();
        for method in [Method::Shap, Method::Ti] {
            let implicit = implicit_accuracy(&forest, &templates, &data, method, &[1, 3])?;
            let explicit = explicit_accuracy(&forest, &test, method, &[1, 3])?;
            averages.push((implicit.average(1), explicit.average(1)));
        }
        let (shap, ti) = (averages[0], averages[1]);
        let better = |t: Option<f64>, s: Option<f64>| matches!((t, s), (Some(t), Some(s)) if t > s);
        Ok(verdict(
            better(ti.0, shap.0) && better(ti.1, shap.1),
            format!(
                "RBO medians {:?}; top-1 implicit SHAP {:?} TI {:?}, explicit SHAP {:?} TI {:?}",
                similarity.medians, shap.0, ti.0, shap.1, ti.1
            ),
        ))
    };
    run().unwrap_or_else(|e| Outcome::Fail(format!("pipeline error: {e}")))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Option<u64>); 8] = [
        ("local accuracy", local_accuracy, Some(60)),
        ("oracle equivalence", oracle_equivalence, Some(300)),
        ("two-feature fixture tree", two_feature_fixture, None),
        ("RBO correctness", rbo_correctness, None),
        ("dummy and symmetry axioms", axioms, None),
        ("synthetic interventional accuracy", synthetic_interventional, Some(600)),
        ("performance ordering", performance_ordering, None),
        ("PostgreSQL dataset tier", postgres_tier, None),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = within_budget(check(), start.elapsed(), budget.map(Duration::from_secs));
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Outcome::Skip(d) => ("SKIP", d),
        };
        println!("{tag} {name} ({secs:.1}s): {detail}");
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
