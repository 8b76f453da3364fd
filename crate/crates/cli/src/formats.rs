//! On-disk formats: plan documents, feedback JSONL, models, estimates,
//! tuning CSV and curve CSVs.

use std::path::Path;

use anyhow::{bail, Context, Result};
use pivotcost_core::tuning::TuningOutcome;
use pivotcost_core::{
    Backbone, CombinedEstimate, FeedbackRecord, FeedbackStore, ModelSet, OperatorId, OperatorKind,
    OperatorModel, PivotChoice, PlanOperator, QueryPlan,
};
use serde::{Deserialize, Serialize};

use crate::io::read_to_string;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub id: OperatorId,
    pub kind: OperatorKind,
    pub opt_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act_cost: Option<f64>,
    pub est_card_in: f64,
    pub est_card_out: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act_card_in: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act_card_out: Option<f64>,
    #[serde(default)]
    pub children: Vec<OperatorId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDoc {
    pub query_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
    pub root: OperatorId,
    pub operators: Vec<OperatorDoc>,
}

impl From<&QueryPlan> for PlanDoc {
    fn from(p: &QueryPlan) -> Self {
        PlanDoc {
            query_id: p.query_id().into(),
            weight: Some(p.weight()),
            root: p.root(),
            operators: p
                .operators()
                .iter()
                .map(|o| OperatorDoc {
                    id: o.id,
                    kind: o.kind.clone(),
                    opt_cost: o.opt_cost,
                    act_cost: o.act_cost,
                    est_card_in: o.est_card_in,
                    est_card_out: o.est_card_out,
                    act_card_in: o.act_card_in,
                    act_card_out: o.act_card_out,
                    children: o.children.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<PlanDoc> for QueryPlan {
    type Error = pivotcost_core::PlanError;

    fn try_from(d: PlanDoc) -> Result<Self, Self::Error> {
        let ops = d
            .operators
            .into_iter()
            .map(|o| PlanOperator {
                id: o.id,
                kind: o.kind,
                opt_cost: o.opt_cost,
                act_cost: o.act_cost,
                est_card_in: o.est_card_in,
                est_card_out: o.est_card_out,
                act_card_in: o.act_card_in,
                act_card_out: o.act_card_out,
                children: o.children,
            })
            .collect();
        QueryPlan::new(d.query_id, d.weight.unwrap_or(1.0), d.root, ops)
    }
}

/// Parses one plan document or an array of them.
pub fn parse_plans(text: &str) -> Result<Vec<QueryPlan>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let docs: Vec<PlanDoc> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    docs.into_iter()
        .map(|d| {
            let id = d.query_id.clone();
            QueryPlan::try_from(d).with_context(|| format!("plan {id}"))
        })
        .collect()
}

pub fn load_plans(path: &Path) -> Result<Vec<QueryPlan>> {
    parse_plans(&read_to_string(path)?).with_context(|| format!("parsing {}", path.display()))
}

pub fn plans_json(plans: &[QueryPlan]) -> Result<String> {
    let docs: Vec<PlanDoc> = plans.iter().map(PlanDoc::from).collect();
    Ok(serde_json::to_string_pretty(&docs)? + "\n")
}

pub fn feedback_jsonl(store: &FeedbackStore) -> Result<String> {
    let mut out = String::new();
    for r in store.records() {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_feedback(text: &str, backbone: Backbone) -> Result<FeedbackStore> {
    let records = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            serde_json::from_str::<FeedbackRecord>(l).with_context(|| format!("line {}", n + 1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeedbackStore::from_records(backbone, records)?)
}

pub fn load_feedback(path: &Path, backbone: Backbone) -> Result<FeedbackStore> {
    parse_feedback(&read_to_string(path)?, backbone)
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn models_json(models: &ModelSet) -> Result<String> {
    let list: Vec<&OperatorModel> = models.iter().collect();
    Ok(serde_json::to_string_pretty(&list)? + "\n")
}

pub fn parse_models(text: &str) -> Result<ModelSet> {
    let list: Vec<OperatorModel> = serde_json::from_str(text)?;
    let mut set = ModelSet::new();
    for m in list {
        if set.get(&m.kind).is_some() {
            bail!("duplicate model for {}", m.kind);
        }
        set.insert(m);
    }
    Ok(set)
}

pub fn load_models(path: &Path) -> Result<ModelSet> {
    parse_models(&read_to_string(path)?).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Serialize)]
pub struct EstimatesDoc<'a> {
    pub pivot: Option<&'a PivotChoice>,
    pub estimates: &'a [CombinedEstimate],
}

#[derive(Debug, Serialize)]
struct TuningRow<'a> {
    query_id: &'a str,
    mode: &'a str,
    old: &'a str,
    new: &'a str,
    est_improvement: f64,
    act_improvement: f64,
    recommended: bool,
}

pub fn tuning_csv(outcomes: &[TuningOutcome]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for o in outcomes {
        w.serialize(TuningRow {
            query_id: &o.query_id,
            mode: o.mode.name(),
            old: &o.old_config,
            new: &o.new_config,
            est_improvement: o.est_improvement,
            act_improvement: o.act_improvement,
            recommended: o.recommended,
        })?;
    }
    Ok(w.into_inner()?)
}

/// CSV with a header row followed by one record per row.
pub fn curve_csv<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [f64; N]>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    Ok(w.into_inner()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = r#"{
        "query_id": "q1", "root": 2,
        "operators": [
            {"id": 2, "kind": "HashJoin", "opt_cost": 5, "est_card_in": 10, "est_card_out": 4, "children": [1]},
            {"id": 1, "kind": "Exotic", "opt_cost": 1.5, "act_cost": 2, "est_card_in": 3, "est_card_out": 3}
        ]
    }"#;

    #[test]
    fn plan_document_round_trip() {
        let plans = parse_plans(PLAN).unwrap();
        assert_eq!(plans[0].weight(), 1.0);
        assert_eq!(plans[0].operator(1).unwrap().kind, OperatorKind::Other("Exotic".into()));
        let again = parse_plans(&plans_json(&plans).unwrap()).unwrap();
        assert_eq!(plans, again);
    }

    #[test]
    fn invalid_plan_is_rejected() {
        let bad = PLAN.replace("\"children\": [1]", "\"children\": [7]");
        assert!(parse_plans(&bad).is_err());
    }

    #[test]
    fn feedback_round_trip() {
        let mut store = FeedbackStore::new(Backbone::all());
        store.ingest(&parse_plans(PLAN).unwrap()[0]);
        let text = feedback_jsonl(&store).unwrap();
        assert_eq!(text.lines().count(), 1);
        let back = parse_feedback(&text, Backbone::all()).unwrap();
        assert_eq!(back.records(), store.records());
    }

    #[test]
    fn models_round_trip() {
        let models: ModelSet = [OperatorModel {
            kind: OperatorKind::Sort,
            coefficients: [1.0, 0.5, 0.0, 1e-3],
            trained_on: 12,
            residual_rms: 0.25,
        }]
        .into_iter()
        .collect();
        assert_eq!(parse_models(&models_json(&models).unwrap()).unwrap(), models);
    }

    #[test]
    fn curve_has_header() {
        let bytes = curve_csv(["x", "y"], [[1.0, 2.5]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "x,y\n1,2.5\n");
    }
}
