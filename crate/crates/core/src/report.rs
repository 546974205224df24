//! Machine-readable run report.
//!
//! `report.json` carries a `schema_version`; the layout is described in the
//! README. Everything outside `runtime` is a pure function of the
//! configuration and the data, so two runs that differ only in worker count
//! produce identical documents once `runtime` is removed.

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::Result;
use crate::model::{Classification, LoopExit, SigmaVector, TraceEntry};
use crate::seeding::SeedCandidate;
use crate::solver::SolveStats;

pub const SCHEMA_VERSION: u32 = 1;

/// Proximity of one category as recorded in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRecord {
    /// Zero-based object indices, ascending.
    pub members: Vec<usize>,
    pub member_ids: Vec<String>,
    pub proximity: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub sigma_hat: SigmaVector,
    pub sigma: SigmaVector,
    pub decided_by_single_object: bool,
    pub pair_rule_override: bool,
    pub exit: LoopExit,
    pub final_direction_value: Option<f64>,
    pub trace: Vec<TraceEntry>,
}

/// One classification of the search history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// `"initial"` for the seed, `"improvement <k>"` afterwards.
    pub label: String,
    pub categories: Vec<CategoryRecord>,
    pub total: f64,
}

impl StepRecord {
    pub fn classification(&self) -> Classification {
        let cats = self.categories.iter().map(|c| c.members.clone()).collect();
        Classification::new(cats).with_proximities(self.categories.iter().map(|c| c.proximity).collect())
    }
}

/// Seed built for one size multiset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub sizes: Vec<usize>,
    pub categories: Vec<Vec<usize>>,
    pub proximities: Vec<f64>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub seeding_seconds: f64,
    pub search_seconds: f64,
    pub total_seconds: f64,
}

/// Environment-dependent facts about a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub workers: usize,
    pub timings: Timings,
    pub solver: SolveStats,
    pub cached_categories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: serde_json::Value,
    pub object_ids: Vec<String>,
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub seeds: Vec<SeedRecord>,
    pub history: Vec<StepRecord>,
    pub runtime: Runtime,
}

impl Report {
    pub fn final_step(&self) -> &StepRecord {
        self.history.last().expect("history holds at least the seed")
    }

    /// The report as JSON with the `runtime` section removed.
    pub fn deterministic_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().unwrap().remove("runtime");
        v
    }
}

pub(crate) fn seed_record(seed: &SeedCandidate) -> SeedRecord {
    let c = &seed.classification;
    SeedRecord {
        sizes: seed.sizes.sizes.clone(),
        categories: c.categories.clone(),
        proximities: c.proximity.clone().unwrap_or_default(),
        total: c.total.unwrap_or(f64::NAN),
    }
}

pub(crate) fn step_record(engine: &Engine, step: usize, classification: &Classification) -> Result<StepRecord> {
    let ids = engine.table().object_ids();
    let mut categories = Vec::with_capacity(classification.num_categories());
    for members in &classification.categories {
        let p = engine.proximity(members)?;
        categories.push(CategoryRecord {
            members: p.members.clone(),
            member_ids: p.members.iter().map(|&t| ids[t].clone()).collect(),
            proximity: p.estimate,
            lower_bound: p.lower_bound,
            upper_bound: p.upper_bound,
            sigma_hat: p.sigma_hat.clone(),
            sigma: p.sigma.clone(),
            decided_by_single_object: p.decided_by_single_object,
            pair_rule_override: p.pair_rule_override,
            exit: p.exit,
            final_direction_value: p.final_direction_value,
            trace: p.trace.clone(),
        });
    }
    let total = categories.iter().map(|c| c.proximity).sum();
    Ok(StepRecord {
        step,
        label: if step == 0 {
            "initial".into()
        } else {
            format!("improvement {step}")
        },
        categories,
        total,
    })
}
