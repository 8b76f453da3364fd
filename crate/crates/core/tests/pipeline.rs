use pivotcost_core::analysis::{decompose, stats};
use pivotcost_core::synth::{synth_plans, GroundTruth, OptimizerCostModel, PlanShape, PlanSynth};
use pivotcost_core::tuning::{carried_improvements, carryover, carryover_deterministic, uniform_errors};
use pivotcost_core::{combine, pearson, pick_pivot, Backbone, FeedbackStore, ModelSet, OperatorKind, PivotEligibility};

fn params(noise: f64, seed: u64) -> PlanSynth {
    PlanSynth {
        n_queries: 200,
        ground_truth: GroundTruth::standard(noise),
        shape: PlanShape { leaves_per_plan: 3, internals_per_plan: 2 },
        card_range: (1e3, 1e6),
        optimizer: OptimizerCostModel::standard(),
        seed,
    }
}

#[test]
fn noiseless_feedback_recovers_ground_truth() {
    let p = params(0.0, 11);
    let plans = synth_plans(&p).unwrap();
    let mut store = FeedbackStore::new(Backbone::leaves());
    for plan in &plans {
        store.ingest(plan);
    }
    let (models, _) = ModelSet::train_from(&store, 10);
    for kind in [OperatorKind::TableScan, OperatorKind::IndexScan, OperatorKind::IndexSeek] {
        let got = models.get(&kind).unwrap().coefficients;
        let want = p.ground_truth.coefficients[&kind];
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-6 * w.abs().max(1e-3), "{kind:?}: {got:?} vs {want:?}");
        }
    }
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(synth_plans(&params(0.5, 4)).unwrap(), synth_plans(&params(0.5, 4)).unwrap());
    assert_ne!(synth_plans(&params(0.5, 4)).unwrap(), synth_plans(&params(0.5, 5)).unwrap());
}

#[test]
fn decomposition_matches_direct_correlation() {
    let plans = synth_plans(&params(0.0, 8)).unwrap();
    let backbone = Backbone::leaves();
    let mut store = FeedbackStore::new(backbone.clone());
    for plan in &plans {
        store.ingest(plan);
    }
    let (models, _) = ModelSet::train_from(&store, 10);
    let pivot = pick_pivot(&store, PivotEligibility::default()).unwrap();
    let estimates: Vec<_> = plans.iter().map(|p| combine(p, &models, Some(&pivot)).unwrap()).collect();
    let d = decompose(&plans, &estimates, &backbone).unwrap();
    for (q, (p, e)) in d.queries.iter().zip(plans.iter().zip(&estimates)) {
        let total = p.actual_total_cost().unwrap();
        assert!((q.leaf + q.internal - total).abs() <= 1e-12 * total);
        assert!((q.estimated() - e.total).abs() <= 1e-9 * e.total);
    }
    let s = stats(&d).unwrap();
    let direct = pearson(&d.actual(), &d.estimated()).unwrap();
    assert!((s.rho_closed_form().unwrap() - direct).abs() <= 1e-9, "{s:?} {direct}");
    let lambda = d.lambda.unwrap();
    for q in &d.queries {
        assert!((q.est_leaf - lambda * q.leaf).abs() <= 1e-9 * lambda * q.leaf);
    }
}

#[test]
fn constant_error_carries_over_exactly() {
    let actual = [3.0, 10.0, 0.5, 42.0];
    let weights = [1.0, 2.0, 1.0, 0.5];
    for eps in [-0.3, 0.0, 0.25] {
        let r = carryover_deterministic(&actual, &weights, eps).unwrap();
        assert!((r.workload_error - eps).abs() <= 1e-12);
        let (est, act) = carried_improvements(&actual, &[1.0, 9.0, 0.5, 20.0], &weights, eps).unwrap();
        assert!((est - act).abs() <= 1e-12);
    }
}

#[test]
fn random_error_stays_near_its_mean() {
    let actual: Vec<f64> = (1..=500).map(|k| 1.0 + (k % 37) as f64).collect();
    let weights = vec![1.0; actual.len()];
    let errors = uniform_errors(actual.len(), -0.2, 0.6, 17);
    let r = carryover(&actual, &weights, &errors, 0.2).unwrap();
    assert!(r.standard_error > 0.0);
    assert!(r.within(3.0), "{r:?}");
}
