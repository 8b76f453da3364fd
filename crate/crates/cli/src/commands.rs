//! The five subcommands. Each reads validated inputs, writes its files
//! atomically under `out_dir` and prints a short summary to `out`.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use pivotcost_core::analysis::{curves, decompose, stats};
use pivotcost_core::bounds::{self, RhoExtrema};
use pivotcost_core::synth::{synth_plans, GroundTruth, OptimizerCostModel, PlanShape, PlanSynth};
use pivotcost_core::tuning::suite::{SuiteParams, TuningSuite};
use pivotcost_core::tuning::{bin_edges, regression_report, Estimator, DEFAULT_REGRESSION_CUT};
use pivotcost_core::{
    combine, pearson, pick_pivot, spearman, CombinedEstimate, CorrelationStats, FeedbackStore,
    ModelSet, PivotChoice, PivotEligibility, QueryPlan,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::formats::{self, EstimatesDoc};
use crate::io::write_atomic;

const CURVE_POINTS: usize = 50;

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, (serde_json::to_string_pretty(value)? + "\n").as_bytes())
}

pub fn generate(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let seed = cfg.require_seed()?;
    let g = &cfg.generate;
    let params = PlanSynth {
        n_queries: g.n_queries,
        ground_truth: GroundTruth::standard(g.noise_sd),
        shape: PlanShape {
            leaves_per_plan: g.leaves_per_plan,
            internals_per_plan: g.internals_per_plan,
        },
        card_range: g.card_range,
        optimizer: OptimizerCostModel::standard(),
        seed,
    };
    let plans = synth_plans(&params)?;
    let path = cfg.out_dir.join("plans.json");
    write_atomic(&path, formats::plans_json(&plans)?.as_bytes())?;
    writeln!(out, "generated {} plans -> {}", plans.len(), path.display())?;
    Ok(())
}

pub fn train(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let plans_path = cfg.optional_input("plans", &cfg.plans)?;
    let feedback_path = cfg.optional_input("feedback", &cfg.feedback)?;
    if plans_path.is_none() && feedback_path.is_none() {
        bail!("train needs --plans, --feedback or both");
    }
    let mut store = match &feedback_path {
        Some(p) => formats::load_feedback(p, cfg.backbone.clone())?,
        None => FeedbackStore::new(cfg.backbone.clone()),
    };
    if let Some(p) = &plans_path {
        for plan in formats::load_plans(p)? {
            store.ingest(&plan);
        }
    }
    let (models, report) = ModelSet::train_from(&store, cfg.threshold);
    for k in &report {
        writeln!(
            out,
            "{}: {} records, {}{}",
            k.kind,
            k.records,
            if k.sufficient { "trained" } else { "insufficient, optimizer cost used" },
            if k.regularized { " (regularized)" } else { "" },
        )?;
    }
    write_atomic(&cfg.out_dir.join("feedback.jsonl"), formats::feedback_jsonl(&store)?.as_bytes())?;
    write_atomic(&cfg.out_dir.join("models.json"), formats::models_json(&models)?.as_bytes())?;
    Ok(())
}

/// Plans, models and the pivot shared by `estimate` and `analyze`.
struct Estimates {
    plans: Vec<QueryPlan>,
    pivot: Option<PivotChoice>,
    estimates: Vec<CombinedEstimate>,
}

fn estimate_plans(cfg: &RunConfig) -> Result<Estimates> {
    let plans = formats::load_plans(&cfg.input("plans", &cfg.plans)?)?;
    let models = match cfg.optional_input("models", &cfg.models)? {
        Some(p) => formats::load_models(&p)?,
        None => ModelSet::new(),
    };
    // Without a feedback file the pivot comes from the executed plans themselves.
    let store = match cfg.optional_input("feedback", &cfg.feedback)? {
        Some(p) => formats::load_feedback(&p, cfg.backbone.clone())?,
        None => {
            let mut s = FeedbackStore::new(cfg.backbone.clone());
            for p in plans.iter().filter(|p| p.has_actuals()) {
                s.ingest(p);
            }
            s
        }
    };
    let pivot = if models.is_empty() {
        None
    } else {
        let elig = PivotEligibility { min_act_cost_ms: cfg.min_act_cost };
        Some(pick_pivot(&store, elig).context("choosing the pivot")?)
    };
    let estimates = plans
        .iter()
        .map(|p| combine(p, &models, pivot.as_ref()).with_context(|| format!("estimating {}", p.query_id())))
        .collect::<Result<Vec<_>>>()?;
    Ok(Estimates { plans, pivot, estimates })
}

fn print_pivot(out: &mut dyn Write, pivot: Option<&PivotChoice>) -> Result<()> {
    match pivot {
        Some(p) => writeln!(
            out,
            "pivot record_id={} opt_cost={} act_cost={} lambda={}",
            p.record_id, p.opt_cost, p.act_cost, p.lambda
        )?,
        None => writeln!(out, "pivot none (no models; plain optimizer costs)")?,
    }
    Ok(())
}

pub fn estimate(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let e = estimate_plans(cfg)?;
    print_pivot(out, e.pivot.as_ref())?;
    for est in &e.estimates {
        writeln!(out, "{} total {}", est.query_id, est.total)?;
    }
    write_json(
        &cfg.out_dir.join("estimates.json"),
        &EstimatesDoc { pivot: e.pivot.as_ref(), estimates: &e.estimates },
    )
}

#[derive(Debug, Serialize)]
struct BoundValues {
    f: f64,
    g: f64,
    /// Bounds with eta' replaced by the infinity stand-in.
    f_eta_prime_inf: f64,
    g_eta_prime_inf: f64,
}

#[derive(Debug, Serialize)]
struct Approx {
    rho_approx: f64,
    /// `(epsilon, eta_0)` at the measured alpha.
    eta_0: Vec<(f64, Option<f64>)>,
    /// `(alpha, eta_0)` at epsilon = 0.05.
    eta_0_curve: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize)]
struct AnalysisReport {
    queries: usize,
    stats: CorrelationStats,
    #[serde(rename = "pearson_PPprime")]
    pearson_pp: f64,
    #[serde(rename = "spearman_PPprime")]
    spearman_pp: f64,
    rho_closed_form: f64,
    bounds: BoundValues,
    approx: Approx,
    /// Absent when eta < 1 or beta, gamma fall outside (0, 1).
    extrema: Option<RhoExtrema>,
}

pub fn analyze(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let e = estimate_plans(cfg)?;
    let d = decompose(&e.plans, &e.estimates, &cfg.backbone)?;
    let s = stats(&d)?;
    let actual = d.actual();
    let estimated = d.estimated();
    let report = AnalysisReport {
        queries: d.len(),
        stats: s,
        pearson_pp: pearson(&actual, &estimated)?,
        spearman_pp: spearman(&actual, &estimated)?,
        rho_closed_form: s.rho_closed_form()?,
        bounds: BoundValues {
            f: bounds::lower_bound_f(s.eta, s.eta_prime),
            g: bounds::lower_bound_g(s.eta, s.eta_prime),
            f_eta_prime_inf: bounds::lower_bound_f(s.eta, cfg.eta_prime_inf),
            g_eta_prime_inf: bounds::lower_bound_g(s.eta, cfg.eta_prime_inf),
        },
        approx: Approx {
            rho_approx: bounds::rho_approx(s.eta, s.alpha)?,
            eta_0: [0.05, 0.01].map(|eps| (eps, bounds::eta_0(s.alpha, eps).ok())).to_vec(),
            eta_0_curve: curves::eta_0_curve(0.05, 21),
        },
        extrema: bounds::rho_extrema_in_eta_prime(s.eta, s.alpha, s.beta, s.gamma).ok(),
    };
    write_json(&cfg.out_dir.join("analysis.json"), &report)?;
    write_curves(cfg)?;

    writeln!(out, "queries {}", report.queries)?;
    writeln!(
        out,
        "eta {:.6} eta' {:.6} alpha {:.6} beta {:.6} gamma {:.6}",
        s.eta, s.eta_prime, s.alpha, s.beta, s.gamma
    )?;
    writeln!(
        out,
        "pearson {:.6} spearman {:.6} f {:.6} g {:.6}",
        report.pearson_pp, report.spearman_pp, report.bounds.f, report.bounds.g
    )?;
    Ok(())
}

fn write_curves(cfg: &RunConfig) -> Result<()> {
    let dir = &cfg.out_dir;
    write_atomic(
        &dir.join("bounds_f_g.csv"),
        &formats::curve_csv(["eta", "f", "g"], curves::lower_bound_curve(1.0, 50.0, CURVE_POINTS, cfg.eta_prime_inf))?,
    )?;
    let eta0 = [0.05, 0.01]
        .into_iter()
        .flat_map(|eps| curves::eta_0_curve(eps, 201).into_iter().map(move |[a, e]| [eps, a, e]));
    write_atomic(&dir.join("eta_0.csv"), &formats::curve_csv(["epsilon", "alpha", "eta_0"], eta0)?)?;
    write_atomic(
        &dir.join("eta_0_max.csv"),
        &formats::curve_csv(
            ["epsilon", "eta_0_max", "eta_0_max_positive"],
            curves::eta_0_max_curve(0.001, 0.2, 200),
        )?,
    )?;
    let rho = [0.0, 0.5]
        .into_iter()
        .flat_map(|a| curves::rho_eta_curve(a, 0.0, 50.0, 201).into_iter().map(move |[e, r]| [a, e, r]));
    write_atomic(&dir.join("rho_eta.csv"), &formats::curve_csv(["alpha", "eta", "rho"], rho)?)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct HistogramDoc<'a> {
    tau: f64,
    bin_edges: [f64; 11],
    #[serde(flatten)]
    report: &'a pivotcost_core::tuning::RegressionReport,
}

pub fn tune(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let seed = cfg.require_seed()?;
    let suite = TuningSuite::generate(SuiteParams { n_queries: cfg.tune.n_queries, seed })?;
    let store = suite.feedback(cfg.backbone.clone());
    let (models, _) = ModelSet::train_from(&store, cfg.threshold);
    let pivot = pick_pivot(&store, PivotEligibility { min_act_cost_ms: cfg.min_act_cost })?;
    print_pivot(out, Some(&pivot))?;

    let mut outcomes = suite.tune(&Estimator::Optimizer, cfg.tau)?;
    outcomes.extend(suite.tune(&Estimator::Combined { models: &models, pivot: &pivot }, cfg.tau)?);
    let report = regression_report(&outcomes, DEFAULT_REGRESSION_CUT)?;

    write_atomic(&cfg.out_dir.join("tuning.csv"), &formats::tuning_csv(&outcomes)?)?;
    write_json(
        &cfg.out_dir.join("tuning_histogram.json"),
        &HistogramDoc { tau: cfg.tau, bin_edges: bin_edges(), report: &report },
    )?;
    for m in &report.modes {
        writeln!(
            out,
            "{}: {} queries, {} recommended, {} regressions below {}",
            m.mode.name(),
            m.outcomes,
            m.recommended,
            m.regressions,
            report.regression_cut
        )?;
    }
    Ok(())
}
