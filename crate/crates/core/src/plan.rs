//! Annotated query plans.
//!
//! A [`QueryPlan`] is an operator tree where every operator carries the
//! optimizer's estimate (`opt_cost`, abstract units) and, once executed, the
//! measured CPU time (`act_cost`, milliseconds). Costs are *exclusive*: an
//! operator's cost covers that operator only, never its subtree.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::kind::{Backbone, OperatorKind};

pub type OperatorId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOperator {
    pub id: OperatorId,
    pub kind: OperatorKind,
    pub opt_cost: f64,
    pub act_cost: Option<f64>,
    pub est_card_in: f64,
    pub est_card_out: f64,
    pub act_card_in: Option<f64>,
    pub act_card_out: Option<f64>,
    pub children: Vec<OperatorId>,
}

impl PlanOperator {
    /// An operator with no actuals and no children.
    pub fn new(id: OperatorId, kind: OperatorKind, opt_cost: f64) -> Self {
        PlanOperator {
            id,
            kind,
            opt_cost,
            act_cost: None,
            est_card_in: 0.0,
            est_card_out: 0.0,
            act_card_in: None,
            act_card_out: None,
            children: Vec::new(),
        }
    }

    pub fn with_act_cost(mut self, act_cost: f64) -> Self {
        self.act_cost = Some(act_cost);
        self
    }

    pub fn with_cards(mut self, est_in: f64, est_out: f64) -> Self {
        self.est_card_in = est_in;
        self.est_card_out = est_out;
        self
    }

    pub fn with_children<I: IntoIterator<Item = OperatorId>>(mut self, children: I) -> Self {
        self.children = children.into_iter().collect();
        self
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("plan has no operators")]
    Empty,
    #[error("operator {0}: duplicate id")]
    DuplicateId(OperatorId),
    #[error("operator {id}: {field} must be a finite nonnegative number, got {value}")]
    InvalidValue {
        id: OperatorId,
        field: &'static str,
        value: f64,
    },
    #[error("operator {parent}: child {child} does not exist")]
    DanglingChild {
        parent: OperatorId,
        child: OperatorId,
    },
    #[error("operator {0}: cycle detected")]
    Cycle(OperatorId),
    #[error("root operator {0} does not exist")]
    MissingRoot(OperatorId),
    #[error("operator {0}: root must not have a parent")]
    RootHasParent(OperatorId),
    #[error("operator {0}: has more than one parent")]
    MultipleParents(OperatorId),
    #[error("operator {0}: not reachable from the root")]
    Unreachable(OperatorId),
    #[error("operator {0}: leaf operator must not have children")]
    LeafWithChildren(OperatorId),
    #[error("operator {0}: actual cost required but missing")]
    MissingActualCost(OperatorId),
    #[error("plan weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
}

/// A validated operator tree. Immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPlan {
    query_id: String,
    weight: f64,
    root: OperatorId,
    operators: Vec<PlanOperator>,
    position: BTreeMap<OperatorId, usize>,
}

impl QueryPlan {
    /// Validates and builds a plan. `operators` is kept in the given (document) order.
    pub fn new(
        query_id: impl Into<String>,
        weight: f64,
        root: OperatorId,
        operators: Vec<PlanOperator>,
    ) -> Result<Self, PlanError> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(PlanError::InvalidWeight(weight));
        }
        if operators.is_empty() {
            return Err(PlanError::Empty);
        }

        let mut position = BTreeMap::new();
        for (i, op) in operators.iter().enumerate() {
            if position.insert(op.id, i).is_some() {
                return Err(PlanError::DuplicateId(op.id));
            }
            check_values(op)?;
        }
        for op in &operators {
            for child in &op.children {
                if !position.contains_key(child) {
                    return Err(PlanError::DanglingChild {
                        parent: op.id,
                        child: *child,
                    });
                }
            }
        }
        find_cycle(&operators, &position)?;

        if !position.contains_key(&root) {
            return Err(PlanError::MissingRoot(root));
        }
        let mut parents = vec![0usize; operators.len()];
        for op in &operators {
            for child in &op.children {
                parents[position[child]] += 1;
            }
        }
        for (op, &count) in operators.iter().zip(&parents) {
            if op.id == root {
                if count > 0 {
                    return Err(PlanError::RootHasParent(root));
                }
            } else if count > 1 {
                return Err(PlanError::MultipleParents(op.id));
            } else if count == 0 {
                return Err(PlanError::Unreachable(op.id));
            }
        }
        for op in &operators {
            if op.kind.is_leaf() && !op.children.is_empty() {
                return Err(PlanError::LeafWithChildren(op.id));
            }
        }

        Ok(QueryPlan {
            query_id: query_id.into(),
            weight,
            root,
            operators,
            position,
        })
    }

    pub fn query_id(&self) -> &str {
        &self.query_id
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn root(&self) -> OperatorId {
        self.root
    }

    /// Operators in document order.
    pub fn operators(&self) -> &[PlanOperator] {
        &self.operators
    }

    pub fn operator(&self, id: OperatorId) -> Option<&PlanOperator> {
        self.position.get(&id).map(|&i| &self.operators[i])
    }

    pub fn into_operators(self) -> Vec<PlanOperator> {
        self.operators
    }

    /// Operators whose kind is in `backbone` (the set 𝓛), in document order.
    pub fn leaf_operators(&self, backbone: &Backbone) -> Vec<&PlanOperator> {
        self.operators
            .iter()
            .filter(|op| backbone.contains(&op.kind))
            .collect()
    }

    /// Complement of [`QueryPlan::leaf_operators`] (the set 𝓘).
    pub fn internal_operators(&self, backbone: &Backbone) -> Vec<&PlanOperator> {
        self.operators
            .iter()
            .filter(|op| !backbone.contains(&op.kind))
            .collect()
    }

    /// `L`: summed actual cost of backbone operators.
    pub fn actual_leaf_cost(&self, backbone: &Backbone) -> Result<f64, PlanError> {
        sum_actual(self.operators.iter().filter(|op| backbone.contains(&op.kind)))
    }

    /// `I`: summed actual cost of non-backbone operators.
    pub fn actual_internal_cost(&self, backbone: &Backbone) -> Result<f64, PlanError> {
        sum_actual(self.operators.iter().filter(|op| !backbone.contains(&op.kind)))
    }

    /// `P`: summed actual cost of every operator.
    pub fn actual_total_cost(&self) -> Result<f64, PlanError> {
        sum_actual(self.operators.iter())
    }

    /// Summed optimizer cost of every operator.
    pub fn optimizer_total_cost(&self) -> f64 {
        self.operators.iter().map(|op| op.opt_cost).sum()
    }

    pub fn has_actuals(&self) -> bool {
        self.operators.iter().all(|op| op.act_cost.is_some())
    }

    /// Copy of the plan with every optimizer cost multiplied by `k`.
    pub fn scale_optimizer_costs(&self, k: f64) -> Result<QueryPlan, PlanError> {
        let mut operators = self.operators.clone();
        for op in &mut operators {
            op.opt_cost *= k;
        }
        QueryPlan::new(self.query_id.clone(), self.weight, self.root, operators)
    }
}

fn sum_actual<'a, I: Iterator<Item = &'a PlanOperator>>(ops: I) -> Result<f64, PlanError> {
    let mut total = 0.0;
    for op in ops {
        total += op.act_cost.ok_or(PlanError::MissingActualCost(op.id))?;
    }
    Ok(total)
}

fn check_values(op: &PlanOperator) -> Result<(), PlanError> {
    let check = |field: &'static str, value: f64| {
        if value.is_finite() && value >= 0.0 {
            Ok(())
        } else {
            Err(PlanError::InvalidValue {
                id: op.id,
                field,
                value,
            })
        }
    };
    check("opt_cost", op.opt_cost)?;
    check("est_card_in", op.est_card_in)?;
    check("est_card_out", op.est_card_out)?;
    if let Some(v) = op.act_cost {
        check("act_cost", v)?;
    }
    if let Some(v) = op.act_card_in {
        check("act_card_in", v)?;
    }
    if let Some(v) = op.act_card_out {
        check("act_card_out", v)?;
    }
    Ok(())
}

// Iterative three-colour DFS over every operator; reports the first operator
// found on a back edge.
fn find_cycle(
    operators: &[PlanOperator],
    position: &BTreeMap<OperatorId, usize>,
) -> Result<(), PlanError> {
    const WHITE: u8 = 0;
    const GREY: u8 = 1;
    const BLACK: u8 = 2;
    let mut colour = vec![WHITE; operators.len()];
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for start in 0..operators.len() {
        if colour[start] != WHITE {
            continue;
        }
        colour[start] = GREY;
        stack.push((start, 0));
        while let Some(top) = stack.last_mut() {
            let node = top.0;
            if let Some(child) = operators[node].children.get(top.1) {
                top.1 += 1;
                let c = position[child];
                match colour[c] {
                    WHITE => {
                        colour[c] = GREY;
                        stack.push((c, 0));
                    }
                    GREY => return Err(PlanError::Cycle(*child)),
                    _ => {}
                }
            } else {
                colour[node] = BLACK;
                stack.pop();
            }
        }
    }
    Ok(())
}
