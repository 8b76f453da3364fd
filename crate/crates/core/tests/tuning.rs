use pivotcost_core::tuning::suite::{SuiteParams, TuningSuite};
use pivotcost_core::tuning::{Estimator, TuningOutcome};
use pivotcost_core::{pick_pivot, Backbone, ModelSet, PivotEligibility};

fn suite() -> TuningSuite {
    TuningSuite::generate(SuiteParams { n_queries: 20, seed: 77 }).unwrap()
}

fn comparable(o: &[TuningOutcome]) -> Vec<(String, String, f64, bool)> {
    o.iter()
        .map(|o| (o.query_id.clone(), o.new_config.clone(), o.est_improvement, o.recommended))
        .collect()
}

#[test]
fn estimators_never_read_actual_costs() {
    let s = suite();
    let store = s.feedback(Backbone::leaves());
    let (models, _) = ModelSet::train_from(&store, 10);
    let pivot = pick_pivot(&store, PivotEligibility::default()).unwrap();
    let corrupted = TuningSuite {
        oracle: s.oracle.map_actual_costs(|q, c, a| a * (7.0 + q.len() as f64) + c.len() as f64).unwrap(),
        ..s.clone()
    };
    for est in [Estimator::Optimizer, Estimator::Combined { models: &models, pivot: &pivot }] {
        let a = s.tune(&est, 0.1).unwrap();
        let b = corrupted.tune(&est, 0.1).unwrap();
        assert_eq!(comparable(&a), comparable(&b));
    }
}

#[test]
fn gate_is_sound_and_monotone_in_tau() {
    let s = suite();
    let outcomes = s.tune(&Estimator::Optimizer, 0.0).unwrap();
    let mut last = usize::MAX;
    for tau in [0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 0.99] {
        let gated: Vec<TuningOutcome> = outcomes.iter().map(|o| o.regate(tau)).collect();
        for o in &gated {
            if o.recommended {
                assert!(o.est_improvement > tau && o.new_config != o.old_config);
            }
        }
        let n = gated.iter().filter(|o| o.recommended).count();
        assert!(n <= last);
        last = n;
    }
}

#[test]
fn optimizer_scaling_leaves_choices_unchanged() {
    let s = suite();
    let scaled = s.scale_optimizer_costs(250.0).unwrap();
    let a = s.tune(&Estimator::Optimizer, 0.1).unwrap();
    let b = scaled.tune(&Estimator::Optimizer, 0.1).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.new_config, y.new_config);
        assert!((x.est_improvement - y.est_improvement).abs() <= 1e-12);
    }
}
