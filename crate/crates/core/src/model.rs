//! Domain types shared across the pipeline.
//!
//! Constraint rows always list the `M` output characteristics first and the
//! `N` input characteristics after them. [`SigmaVector`] follows the same
//! order, so `sigma[i]` scales the uncertainty of constraint row `i`.
//!
//! Objects are identified by their column index in the
//! [`CharacteristicTable`]; labels are carried for display only.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input and output characteristics of every object.
///
/// `inputs` is `N x T` (smaller is better), `outputs` is `M x T` (larger is
/// better). Construction validates the table, so every value of this type
/// satisfies the invariants checked by [`validate_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicTable {
    object_ids: Vec<String>,
    inputs: DMatrix<f64>,
    outputs: DMatrix<f64>,
}

impl CharacteristicTable {
    pub fn new(object_ids: Vec<String>, inputs: DMatrix<f64>, outputs: DMatrix<f64>) -> Result<Self> {
        validate_table(CharacteristicTable {
            object_ids,
            inputs,
            outputs,
        })
    }

    /// Builds a table from per-object rows, `inputs[t]` and `outputs[t]`
    /// holding the characteristics of object `t`.
    pub fn from_rows(object_ids: Vec<String>, inputs: &[Vec<f64>], outputs: &[Vec<f64>]) -> Result<Self> {
        let t = object_ids.len();
        if inputs.len() != t || outputs.len() != t {
            return Err(Error::DimensionMismatch(format!(
                "{} ids, {} input rows, {} output rows",
                t,
                inputs.len(),
                outputs.len()
            )));
        }
        let n = inputs.first().map_or(0, Vec::len);
        let m = outputs.first().map_or(0, Vec::len);
        if inputs.iter().any(|r| r.len() != n) || outputs.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged characteristic rows".into()));
        }
        let x = DMatrix::from_fn(n, t, |i, j| inputs[j][i]);
        let y = DMatrix::from_fn(m, t, |i, j| outputs[j][i]);
        Self::new(object_ids, x, y)
    }

    /// Convenience constructor for single-input, single-output data with
    /// generated labels `o1, o2, ...`.
    pub fn single(inputs: &[f64], outputs: &[f64]) -> Result<Self> {
        let ids = (1..=inputs.len()).map(|i| format!("o{i}")).collect();
        let x = DMatrix::from_row_slice(1, inputs.len(), inputs);
        let y = DMatrix::from_row_slice(1, outputs.len(), outputs);
        Self::new(ids, x, y)
    }

    pub fn object_ids(&self) -> &[String] {
        &self.object_ids
    }

    pub fn inputs(&self) -> &DMatrix<f64> {
        &self.inputs
    }

    pub fn outputs(&self) -> &DMatrix<f64> {
        &self.outputs
    }

    /// Number of objects `T`.
    pub fn num_objects(&self) -> usize {
        self.object_ids.len()
    }

    /// Number of input characteristics `N`.
    pub fn num_inputs(&self) -> usize {
        self.inputs.nrows()
    }

    /// Number of output characteristics `M`.
    pub fn num_outputs(&self) -> usize {
        self.outputs.nrows()
    }

    /// Number of constraint rows, `M + N`.
    pub fn num_rows(&self) -> usize {
        self.num_inputs() + self.num_outputs()
    }

    /// Largest absolute characteristic value.
    pub fn magnitude(&self) -> f64 {
        self.inputs
            .iter()
            .chain(self.outputs.iter())
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Table with objects reordered so that new object `k` is old object
    /// `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let ids = order.iter().map(|&k| self.object_ids[k].clone()).collect();
        let x = self.inputs.select_columns(order);
        let y = self.outputs.select_columns(order);
        Self::new(ids, x, y)
    }

    /// Min-max scales each characteristic onto `[0.1, 1]`. Constant
    /// characteristics map to 1.
    pub fn min_max_scaled(&self) -> Result<Self> {
        fn scale(m: &DMatrix<f64>) -> DMatrix<f64> {
            let mut out = m.clone();
            for mut row in out.row_iter_mut() {
                let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                for v in row.iter_mut() {
                    *v = if hi > lo {
                        0.1 + 0.9 * (*v - lo) / (hi - lo)
                    } else {
                        1.0
                    };
                }
            }
            out
        }
        Self::new(self.object_ids.clone(), scale(&self.inputs), scale(&self.outputs))
    }
}

/// Checks the table invariants, returning the table unchanged when they hold.
pub fn validate_table(table: CharacteristicTable) -> Result<CharacteristicTable> {
    let t = table.object_ids.len();
    if t == 0 {
        return Err(Error::DimensionMismatch("table has no objects".into()));
    }
    if table.inputs.nrows() == 0 || table.outputs.nrows() == 0 {
        return Err(Error::DimensionMismatch(
            "at least one input and one output characteristic are required".into(),
        ));
    }
    if table.inputs.ncols() != t || table.outputs.ncols() != t {
        return Err(Error::DimensionMismatch(format!(
            "{} object ids, {} input columns, {} output columns",
            t,
            table.inputs.ncols(),
            table.outputs.ncols()
        )));
    }
    for (name, m) in [("inputs", &table.inputs), ("outputs", &table.outputs)] {
        for object in 0..m.ncols() {
            for row in 0..m.nrows() {
                if !m[(row, object)].is_finite() {
                    return Err(Error::NonFiniteEntry {
                        matrix: name,
                        row,
                        object,
                    });
                }
            }
        }
    }
    for object in 0..t {
        for row in 0..table.inputs.nrows() {
            let value = table.inputs[(row, object)];
            if value <= 0.0 {
                return Err(Error::NonPositiveInput { row, object, value });
            }
        }
    }
    Ok(table)
}

/// A partition of the objects into categories.
///
/// Each category is kept sorted ascending, which is also the column order
/// used when the category's constraint blocks are built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub categories: Vec<Vec<usize>>,
    pub proximity: Option<Vec<f64>>,
    pub total: Option<f64>,
}

impl Classification {
    pub fn new(categories: Vec<Vec<usize>>) -> Self {
        let categories = categories
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        Classification {
            categories,
            proximity: None,
            total: None,
        }
    }

    /// Attaches per-category proximities; the cached total is their sum.
    pub fn with_proximities(mut self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.categories.len());
        self.total = Some(values.iter().sum());
        self.proximity = Some(values);
        self
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    /// Category index of every object, or `None` for objects that are not
    /// covered.
    pub fn assignment(&self, num_objects: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; num_objects];
        for (s, c) in self.categories.iter().enumerate() {
            for &t in c {
                if t < num_objects {
                    out[t] = Some(s);
                }
            }
        }
        out
    }

    /// Same partition up to category relabelling.
    pub fn same_partition(&self, other: &Classification) -> bool {
        let mut a = self.categories.clone();
        let mut b = other.categories.clone();
        a.sort();
        b.sort();
        a == b
    }
}

/// True iff `classification` splits `{0..num_objects}` into exactly
/// `num_categories` nonempty, pairwise disjoint sets.
pub fn partition_is_valid(classification: &Classification, num_objects: usize, num_categories: usize) -> bool {
    if classification.categories.len() != num_categories {
        return false;
    }
    let mut seen = vec![false; num_objects];
    for c in &classification.categories {
        if c.is_empty() {
            return false;
        }
        for &t in c {
            if t >= num_objects || seen[t] {
                return false;
            }
            seen[t] = true;
        }
    }
    seen.into_iter().all(|s| s)
}

/// Structure of the row uncertainty matrices `R_i = [R'_i | R''_i]`.
///
/// Only `R'_i` is described here; the two trailing columns are implied by
/// the object under assessment (see [`crate::assembly::build_row_uncertainty`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UncertaintySpec {
    /// `R'_i = I` for every row.
    Identity,
    /// `R'_i = diag(w)` restricted to the category members. Holds either one
    /// weight per object or a single weight applied to all objects.
    Diagonal(Vec<f64>),
    /// One explicit `R'_i` per constraint row (output rows first), each with
    /// one column per member of the single category it was written for.
    Explicit(Vec<DMatrix<f64>>),
}

impl UncertaintySpec {
    /// Checks the spec against a table. Diagonal weights must be strictly
    /// positive so each `R'_i` has full column rank.
    pub fn validate(&self, table: &CharacteristicTable) -> Result<()> {
        match self {
            UncertaintySpec::Identity => Ok(()),
            UncertaintySpec::Diagonal(w) => {
                if w.len() != 1 && w.len() != table.num_objects() {
                    return Err(Error::InvalidUncertainty(format!(
                        "expected 1 or {} diagonal weights, got {}",
                        table.num_objects(),
                        w.len()
                    )));
                }
                if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidUncertainty(
                        "diagonal weights must be finite and strictly positive".into(),
                    ));
                }
                Ok(())
            }
            UncertaintySpec::Explicit(rows) => {
                if rows.len() != table.num_rows() {
                    return Err(Error::InvalidUncertainty(format!(
                        "expected {} explicit matrices, got {}",
                        table.num_rows(),
                        rows.len()
                    )));
                }
                Ok(())
            }
        }
    }

    /// Weight of object `t` under a diagonal spec.
    pub(crate) fn diagonal_weight(weights: &[f64], t: usize) -> f64 {
        if weights.len() == 1 {
            weights[0]
        } else {
            weights[t]
        }
    }
}

/// Nonnegative uncertainty scales, one per constraint row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SigmaVector(Vec<f64>);

impl SigmaVector {
    /// Panics on negative or non-finite components.
    pub fn new(values: Vec<f64>) -> Self {
        assert!(
            values.iter().all(|v| v.is_finite() && *v >= 0.0),
            "sigma components must be finite and nonnegative: {values:?}"
        );
        SigmaVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        SigmaVector(vec![0.0; len])
    }

    pub fn uniform(len: usize, value: f64) -> Self {
        SigmaVector::new(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |a, v| a.max(*v))
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    /// Componentwise maximum.
    pub fn max_with(&self, other: &SigmaVector) -> SigmaVector {
        SigmaVector(self.0.iter().zip(&other.0).map(|(a, b)| a.max(*b)).collect())
    }

    /// `self + alpha * direction`, with components clamped at zero.
    pub fn step(&self, alpha: f64, direction: &[f64]) -> SigmaVector {
        SigmaVector(
            self.0
                .iter()
                .zip(direction)
                .map(|(s, d)| (s + alpha * d).max(0.0))
                .collect(),
        )
    }

    /// Copy with component `i` replaced.
    pub fn with_component(&self, i: usize, value: f64) -> SigmaVector {
        let mut v = self.0.clone();
        v[i] = value.max(0.0);
        SigmaVector(v)
    }

    pub fn scaled(&self, factor: f64) -> SigmaVector {
        SigmaVector::new(self.0.iter().map(|v| v * factor).collect())
    }
}

impl std::ops::Index<usize> for SigmaVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Why a first-order descent loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopExit {
    /// No descent loop was needed (small category or single-object decided).
    NotRun,
    /// The direction-search optimum became nonnegative.
    Converged,
    /// The line search could not move from the current iterate.
    Stalled,
    /// `max_iters` iterations were performed.
    IterationLimit,
}

/// One accepted first-order step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub sigma_norm: f64,
    pub gamma: f64,
    pub direction_value: f64,
    pub alpha: f64,
}

/// Proximity to equitable efficiency of one category, with its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximityResult {
    /// Category members, ascending.
    pub members: Vec<usize>,
    /// Minimal sigma found for each member, in member order.
    pub object_sigmas: Vec<SigmaVector>,
    /// Componentwise maximum of `object_sigmas`.
    pub sigma_hat: SigmaVector,
    /// Final iterate of the descent loop (equals `sigma_hat` when no loop ran).
    pub sigma: SigmaVector,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub estimate: f64,
    pub decided_by_single_object: bool,
    /// Set when the two-member rule zeroed a pair holding a nominally
    /// inefficient object.
    pub pair_rule_override: bool,
    pub exit: LoopExit,
    /// Direction-search optimum at the last iterate, when a loop ran.
    pub final_direction_value: Option<f64>,
    pub trace: Vec<TraceEntry>,
}

impl ProximityResult {
    /// Result for categories that carry proximity zero by rule or by data.
    pub(crate) fn zero(members: Vec<usize>, rows: usize, pair_rule_override: bool) -> Self {
        let n = members.len();
        ProximityResult {
            members,
            object_sigmas: vec![SigmaVector::zeros(rows); n],
            sigma_hat: SigmaVector::zeros(rows),
            sigma: SigmaVector::zeros(rows),
            lower_bound: 0.0,
            upper_bound: 0.0,
            estimate: 0.0,
            decided_by_single_object: false,
            pair_rule_override,
            exit: LoopExit::NotRun,
            final_direction_value: None,
            trace: Vec::new(),
        }
    }
}
