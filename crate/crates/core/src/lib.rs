//! Classification of objects with uncertain characteristics by their
//! proximity to equitable efficiency under robust data envelopment analysis.

pub mod assembly;
pub mod cli;
pub mod dea;
pub mod engine;
pub mod error;
pub mod model;
pub mod plot;
pub mod proximity;
pub mod report;
pub mod search;
pub mod seeding;
pub mod settings;
pub mod solver;

pub use cli::{ingest_csv, run, RunConfig};
pub use engine::Engine;
pub use error::{Error, Result};
pub use model::{
    partition_is_valid, validate_table, CharacteristicTable, Classification, LoopExit, ProximityResult, SigmaVector,
    TraceEntry, UncertaintySpec,
};
pub use search::classify;
pub use seeding::seed_classification;
pub use settings::Settings;
