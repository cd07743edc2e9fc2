//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line each and exits nonzero if any failed.
//!
//! `cargo test -p prospect-cli --test acceptance` runs all of them;
//! `cargo test -p prospect-cli --test acceptance -- 5 9` runs a selection.

use std::panic;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use prospect_core::agents::{simulate_choices, Agent, Economicus, PtAgent, ResponseEntry, ResponseTable};
use prospect_core::fitting::{
    bootstrap_ci, fit, goodness_of_fit, holdout_split, normalize_payoffs, objective, FitDataset, FitSpec,
    Variant,
};
use prospect_core::metrics::{
    decisiveness, frame_consistency, mse, pearson, variation_consistency, Grouping, Pearson,
};
use prospect_core::models::{pt_utility, regret_choice_prob, sigmoid, PtParams, RegretParams};
use prospect_core::prospects::{
    apply_frame, base_prospects, enumerate_contexts, expected_value, Context, ExplanationMode, Frame,
    GridConfig, OrderVariant,
};
use prospect_core::rng::{derive_seed, rng_from_seed};
use prospect_core::Exec;
use prospect_llm::render_prompt;
use rand::Rng;

const GRID_CONTEXTS: usize = 324;
const GRID_EXPLICIT: usize = 36;
const GRID_IMPLICIT: usize = 288;
const EXACT_TOL: f64 = 1e-12;
const ECON_MSE_MAX: f64 = 1e-6;
const BETA_BOUND: f64 = 1000.0;
const TRUTH: PtParams = PtParams {
    sigma: 0.8,
    lambda: 2.0,
    gamma: 0.7,
    beta: 10.0,
};
const RECOVERY_REPS: u32 = 200;
const RECOVERY_SEEDS: u64 = 5;
const RECOVERY_MIN_PASS: usize = 4;
const SHAPE_REL_TOL: f64 = 0.15;
const BETA_FACTOR: f64 = 2.0;
const HOLDOUT_CORR_MIN: f64 = 0.95;
const COVERAGE_REPS: u32 = 10;
const COVERAGE_RUNS: u64 = 20;
const COVERAGE_B: usize = 200;
const COVERAGE_MIN: usize = 17;
const METRIC_TABLES: u64 = 1000;
const NESTING_DATASETS: u64 = 20;
const NESTING_MARGIN: f64 = 1e-9;
const TABLE_HEADER: &str = "model,σ,λ,γ,β,corr,mse";

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Verdict,
}

fn grid() -> Vec<Context> {
    enumerate_contexts(&GridConfig::default()).unwrap()
}

fn normalized(contexts: &[Context], table: &ResponseTable) -> FitDataset {
    normalize_payoffs(&FitDataset::from_table(contexts, table).unwrap())
        .unwrap()
        .0
}

fn pt_dataset(contexts: &[Context], params: PtParams, reps: u32, seed: u64) -> FitDataset {
    let agent = PtAgent::new(params, contexts).unwrap();
    let data = simulate_choices(&agent, contexts, reps, seed, Exec::Parallel).unwrap();
    normalized(contexts, &data.table())
}

fn grid_fidelity() -> Verdict {
    let contexts = grid();
    let explicit = contexts.iter().filter(|c| !c.is_implicit()).count();
    let implicit = contexts.len() - explicit;
    verdict(
        contexts.len() == GRID_CONTEXTS && explicit == GRID_EXPLICIT && implicit == GRID_IMPLICIT,
        format!("{} contexts = {explicit} explicit + {implicit} implicit", contexts.len()),
    )
}

fn prompt_fidelity() -> Verdict {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../llm/tests/golden");
    let mut matched = 0;
    let mut mismatched = Vec::new();
    for implicit in [false, true] {
        for expl in ExplanationMode::ALL {
            for order in [OrderVariant::AB, OrderVariant::BA] {
                let ctx = if implicit {
                    Context::implicit(
                        2,
                        Frame::Loss,
                        0,
                        order,
                        expl,
                        vec![-5000.0, 0.0, -5000.0, -5000.0, 0.0],
                        vec![-3500.0; 5],
                    )
                } else {
                    Context::explicit(2, Frame::Loss, order, expl)
                }
                .unwrap();
                let rep = if implicit { "implicit" } else { "explicit" };
                let name = format!("{rep}_{}_{}.txt", expl.as_str(), order.as_str());
                match std::fs::read(dir.join(&name)) {
                    Ok(want) if want == render_prompt(&ctx).into_bytes() => matched += 1,
                    _ => mismatched.push(name),
                }
            }
        }
    }
    verdict(
        matched == 12 && mismatched.is_empty(),
        format!("{matched}/12 shells byte-identical {mismatched:?}"),
    )
}

fn pt_ev_collapse() -> Verdict {
    let neutral = PtParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for pair in base_prospects() {
        for frame in [Frame::Gain, Frame::Loss] {
            let framed = apply_frame(&pair, frame);
            for p in [&framed.option_a, &framed.option_b] {
                worst = worst.max((pt_utility(p, &neutral).unwrap() - expected_value(p)).abs());
                n += 1;
            }
        }
    }
    verdict(
        n == 12 && worst <= EXACT_TOL,
        format!("{n} framed prospects, max |u - EV| = {worst:.3e}"),
    )
}

fn economicus_suite() -> Verdict {
    let contexts = grid();
    let analytic = ResponseTable::from_agent(&Economicus, &contexts);
    let dec = decisiveness(&analytic, &contexts).unwrap().value;
    let order = variation_consistency(&analytic, &contexts, Grouping::Order)
        .unwrap()
        .value;
    let prompt = variation_consistency(&analytic, &contexts, Grouping::Prompt)
        .unwrap()
        .value;
    let frame = frame_consistency(&analytic, &contexts).unwrap().value;
    let ties = contexts
        .iter()
        .filter(|c| Economicus.choice_prob(c) == 0.5)
        .count();

    let data = simulate_choices(&Economicus, &contexts, 10, 0, Exec::Parallel).unwrap();
    let ds = normalized(&contexts, &data.table());
    let result = fit(&ds, &FitSpec::new(Variant::BetaOnly)).unwrap();
    let beta = result.best_params[0];
    let train_mse = result.best_objective;

    let pass = dec == 1.0
        && order == 1.0
        && prompt == 1.0
        && frame == 1.0
        && beta == BETA_BOUND
        && result.is_at_bound("beta")
        && train_mse <= ECON_MSE_MAX;
    verdict(
        pass,
        format!(
            "decisiveness {dec} ({ties} tied contexts), order {order}, prompt {prompt}, frame {frame}; \
             beta-only β = {beta} (at bound: {}), training MSE {train_mse:.4e} (max {ECON_MSE_MAX:e})",
            result.is_at_bound("beta")
        ),
    )
}

fn recovered(p: &PtParams) -> bool {
    let rel = |est: f64, truth: f64| ((est - truth) / truth).abs() <= SHAPE_REL_TOL;
    rel(p.sigma, TRUTH.sigma)
        && rel(p.lambda, TRUTH.lambda)
        && rel(p.gamma, TRUTH.gamma)
        && p.beta >= TRUTH.beta / BETA_FACTOR
        && p.beta <= TRUTH.beta * BETA_FACTOR
}

fn parameter_recovery() -> Verdict {
    let contexts = grid();
    let mut passed = 0;
    let mut lines = Vec::new();
    for seed in 0..RECOVERY_SEEDS {
        let ds = pt_dataset(&contexts, TRUTH, RECOVERY_REPS, seed);
        let spec = FitSpec::new(Variant::FullPt).with_seed(seed);
        let result = fit(&ds, &spec).unwrap();
        let truth_mse = objective(
            &[TRUTH.sigma, TRUTH.lambda, TRUTH.gamma, TRUTH.beta],
            Variant::FullPt,
            &ds,
        )
        .unwrap();
        let full = result.pt_params().unwrap();
        let (train, test) = holdout_split(&ds, seed);
        let train_fit = fit(&train, &spec).unwrap();
        let corr = goodness_of_fit(&train_fit, &test).unwrap().corr.value().unwrap_or(f64::NAN);
        let ok = recovered(&full) && corr >= HOLDOUT_CORR_MIN;
        passed += ok as usize;
        lines.push(format!(
            "seed {seed}: σ {:.3} λ {:.3} γ {:.3} β {:.2}, MSE {:.4e} (at truth {truth_mse:.4e}), \
             held-out r {corr:.3}, train-half recovers {} -> {}",
            full.sigma,
            full.lambda,
            full.gamma,
            full.beta,
            result.best_objective,
            recovered(&train_fit.pt_params().unwrap()),
            if ok { "ok" } else { "miss" }
        ));
    }
    verdict(
        passed >= RECOVERY_MIN_PASS,
        format!("{passed}/{RECOVERY_SEEDS} seeds (need {RECOVERY_MIN_PASS})\n    {}", lines.join("\n    ")),
    )
}

fn bootstrap_coverage() -> Verdict {
    let contexts = grid();
    let mut covered = 0;
    let mut intervals = Vec::new();
    for run in 0..COVERAGE_RUNS {
        let ds = pt_dataset(&contexts, TRUTH, COVERAGE_REPS, run);
        let spec = FitSpec::new(Variant::FullPt).with_seed(run);
        let boot = bootstrap_ci(&ds, &spec, COVERAGE_B).unwrap();
        let (lo, hi) = boot.ci[0];
        let hit = lo <= TRUTH.sigma && TRUTH.sigma <= hi;
        covered += hit as usize;
        intervals.push(format!("[{lo:.3}, {hi:.3}]{}", if hit { "" } else { "*" }));
    }
    verdict(
        covered >= COVERAGE_MIN,
        format!(
            "σ CI covers 0.8 in {covered}/{COVERAGE_RUNS} (need {COVERAGE_MIN}); {}",
            intervals.join(" ")
        ),
    )
}

fn regret_reduction() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for pair in base_prospects() {
        for frame in [Frame::Gain, Frame::Loss] {
            let framed = apply_frame(&pair, frame);
            for scale in [1.0, 5000.0] {
                let a = framed.option_a.rescaled(scale);
                let b = framed.option_b.rescaled(scale);
                for lambda_reg in [0.01, 0.1, 1.0, 10.0, 1000.0] {
                    let params = RegretParams::new(lambda_reg, 0.0, 1.0).unwrap();
                    let want = sigmoid(2.0 * lambda_reg * (expected_value(&a) - expected_value(&b)));
                    worst = worst.max((regret_choice_prob(&a, &b, &params) - want).abs());
                    n += 1;
                }
            }
        }
    }
    verdict(
        worst <= EXACT_TOL,
        format!("{n} cases over 6 framed pairs, max deviation {worst:.3e}"),
    )
}

fn random_table(contexts: &[Context], i: u64) -> ResponseTable {
    let mut rng = rng_from_seed(derive_seed(&[b"metric-table", &i.to_le_bytes()]));
    let level: f64 = rng.random();
    let mut t = ResponseTable::new();
    for c in contexts {
        let entry = match i % 4 {
            0 => ResponseEntry::exact(rng.random()),
            1 => {
                let n_total = rng.random_range(1..=10);
                let n_valid = rng.random_range(1..=n_total);
                ResponseEntry::counted(rng.random_range(0..=n_valid), n_valid, n_total)
            }
            2 => ResponseEntry::exact([0.0, 0.5, 1.0][rng.random_range(0..3)]),
            _ if i % 8 == 3 => ResponseEntry::exact(level),
            _ => ResponseEntry::exact(if rng.random::<f64>() < 0.05 { rng.random() } else { 0.5 }),
        };
        t.insert(c.id(), entry).unwrap();
    }
    t
}

fn metric_identities() -> Verdict {
    let contexts = grid();
    let mut failures = Vec::new();
    let mut pearson_dev: f64 = 0.0;
    let mut constant = 0;
    for i in 0..METRIC_TABLES {
        let p = random_table(&contexts, i);
        let flipped = p.complement();
        let m = mse(&p, &p, &contexts).unwrap().value;
        if m != 0.0 {
            failures.push(format!("table {i}: mse(p,p) = {m}"));
        }
        match pearson(&p, &p, &contexts).unwrap().value {
            Pearson::Defined(r) => pearson_dev = pearson_dev.max((r - 1.0).abs()),
            Pearson::Undefined => constant += 1,
        }
        let d = decisiveness(&p, &contexts).unwrap().value;
        let d_flip = decisiveness(&flipped, &contexts).unwrap().value;
        if !(0.5..=1.0).contains(&d) || (d - d_flip).abs() > EXACT_TOL {
            failures.push(format!("table {i}: decisiveness {d} vs flipped {d_flip}"));
        }
        for (name, v) in [
            ("order", variation_consistency(&p, &contexts, Grouping::Order).unwrap().value),
            ("prompt", variation_consistency(&p, &contexts, Grouping::Prompt).unwrap().value),
            ("frame", frame_consistency(&p, &contexts).unwrap().value),
        ] {
            if !(0.0..=1.0).contains(&v) {
                failures.push(format!("table {i}: {name} consistency {v}"));
            }
        }
    }
    let constant_ok = (0..METRIC_TABLES)
        .filter(|i| i % 4 == 3)
        .all(|i| {
            let p = random_table(&contexts, i);
            let rates: Vec<f64> = contexts.iter().map(|c| p.rate(&c.id()).unwrap()).collect();
            rates.iter().all(|r| *r == rates[0])
                == matches!(pearson(&p, &p, &contexts).unwrap().value, Pearson::Undefined)
        });
    if pearson_dev > EXACT_TOL {
        failures.push(format!("pearson(p,p) off by {pearson_dev:e}"));
    }
    if !constant_ok {
        failures.push("Undefined correlation on a non-constant table".into());
    }
    verdict(
        failures.is_empty(),
        format!(
            "{METRIC_TABLES} tables, max |pearson(p,p) - 1| = {pearson_dev:.1e}, {constant} constant; {} violations {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn nesting_dominance() -> Verdict {
    let contexts = grid();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..NESTING_DATASETS {
        let mut rng = rng_from_seed(derive_seed(&[b"nesting", &i.to_le_bytes()]));
        let params = PtParams::new(
            rng.random_range(0.3..1.2),
            rng.random_range(1.0..3.0),
            rng.random_range(0.4..1.0),
            rng.random_range(2.0..30.0),
        )
        .unwrap();
        let ds = pt_dataset(&contexts, params, 10, i);
        let best = |v: Variant| fit(&ds, &FitSpec::new(v).with_seed(i)).unwrap().best_objective;
        let full = best(Variant::FullPt);
        let restricted = best(Variant::BetaOnly).min(best(Variant::ShapeOnly));
        worst = worst.max(full - restricted);
    }
    verdict(
        worst <= NESTING_MARGIN,
        format!("{NESTING_DATASETS} datasets, max FullPT - min(restricted) = {worst:.3e}"),
    )
}

fn end_to_end() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let steps: [&[&str]; 4] = [
        &["gen", "--out", "gen"],
        &[
            "run", "--contexts", "gen/contexts.json", "--backend", "mock-pt", "--sigma", "0.8", "--lambda", "2",
            "--gamma", "0.7", "--beta", "10", "--reps", "10", "--out", "run",
        ],
        &[
            "fit", "--contexts", "gen/contexts.json", "--dataset", "run/dataset.json", "--variant", "full-pt",
            "--label", "mock-pt", "--out", "fit",
        ],
        &[
            "report", "--contexts", "gen/contexts.json", "--model", "mock-pt=run/dataset.json", "--fit",
            "fit/fit.json", "--out", "report",
        ],
    ];
    for args in steps {
        let out = Command::new(env!("CARGO_BIN_EXE_prospect"))
            .args(args)
            .current_dir(tmp.path())
            .output()
            .unwrap();
        if !out.status.success() {
            return verdict(
                false,
                format!(
                    "`prospect {}` exited {:?}: {}",
                    args[0],
                    out.status.code(),
                    String::from_utf8_lossy(&out.stderr).trim()
                ),
            );
        }
    }
    let table = std::fs::read_to_string(tmp.path().join("report/parameters.csv")).unwrap_or_default();
    let header = table.lines().next().unwrap_or("");
    verdict(
        header.starts_with(TABLE_HEADER) && table.lines().count() == 2,
        format!("all steps exit 0; parameters.csv header `{header}`"),
    )
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "context grid", limit: Duration::from_secs(1), run: grid_fidelity },
    Criterion { id: 2, name: "prompt golden files", limit: Duration::from_secs(1), run: prompt_fidelity },
    Criterion { id: 3, name: "PT-EV collapse", limit: Duration::from_secs(1), run: pt_ev_collapse },
    Criterion { id: 4, name: "economicus suite", limit: Duration::from_secs(10), run: economicus_suite },
    Criterion { id: 5, name: "parameter recovery", limit: Duration::from_secs(120), run: parameter_recovery },
    Criterion { id: 6, name: "bootstrap coverage", limit: Duration::from_secs(600), run: bootstrap_coverage },
    Criterion { id: 7, name: "regret reduction", limit: Duration::from_secs(1), run: regret_reduction },
    Criterion { id: 8, name: "metric identities", limit: Duration::from_secs(10), run: metric_identities },
    Criterion { id: 9, name: "nesting dominance", limit: Duration::from_secs(120), run: nesting_dominance },
    Criterion { id: 10, name: "end-to-end mock run", limit: Duration::from_secs(60), run: end_to_end },
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    for c in CRITERIA.iter().filter(|c| selected.is_empty() || selected.contains(&c.id)) {
        let start = Instant::now();
        let v = panic::catch_unwind(c.run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = v.pass && in_time;
        println!(
            "{} criterion {}: {}: {} [{:.2}s, limit {}s{}]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            v.detail,
            elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
        if !pass {
            failed.push(c.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
