//! Batch runs from CSV files: ingestion, orchestration and report output.

use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::model::{partition_is_valid, CharacteristicTable, UncertaintySpec};
use crate::plot::scatter_svg;
use crate::report::{seed_record, step_record, Report, Runtime, Timings, SCHEMA_VERSION};
use crate::search::descend;
use crate::seeding::{best_seed, seed_candidates};
use crate::settings::Settings;
use crate::solver;

/// Everything a batch run needs besides the data file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub categories: usize,
    pub input_columns: Vec<String>,
    pub output_columns: Vec<String>,
    /// Column holding object labels. When unset, a column named `id` is
    /// used if present, else the first column that is neither an input nor
    /// an output, else labels `o1, o2, ...`.
    pub id_column: Option<String>,
    pub uncertainty: UncertaintySpec,
    pub delta: f64,
    pub epsilon: f64,
    pub eps_eff: f64,
    pub max_iters: usize,
    /// Size of the worker pool. Not part of the report's config section.
    #[serde(skip_serializing, default = "one")]
    pub workers: usize,
    pub scale_data: bool,
    pub emit_plots: bool,
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn new(categories: usize, input_columns: Vec<String>, output_columns: Vec<String>) -> Self {
        let d = Settings::default();
        RunConfig {
            categories,
            input_columns,
            output_columns,
            id_column: None,
            uncertainty: UncertaintySpec::Identity,
            delta: d.delta,
            epsilon: d.epsilon,
            eps_eff: d.eps_eff,
            max_iters: d.max_iters,
            workers: 1,
            scale_data: false,
            emit_plots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories == 0 {
            return Err(Error::Config("categories must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.input_columns.is_empty() || self.output_columns.is_empty() {
            return Err(Error::Config("input and output column lists must be nonempty".into()));
        }
        let all: Vec<&String> = self.input_columns.iter().chain(&self.output_columns).collect();
        for (i, a) in all.iter().enumerate() {
            if all[..i].contains(a) {
                return Err(Error::Config(format!("column `{a}` is listed twice")));
            }
        }
        if let Some(id) = &self.id_column {
            if all.contains(&id) {
                return Err(Error::Config(format!("id column `{id}` is also a characteristic")));
            }
        }
        if matches!(self.uncertainty, UncertaintySpec::Explicit(_)) {
            return Err(Error::ExplicitSpecInSearch);
        }
        self.settings().validate()
    }

    pub fn settings(&self) -> Settings {
        Settings {
            delta: self.delta,
            epsilon: self.epsilon,
            eps_eff: self.eps_eff,
            max_iters: self.max_iters,
            ..Settings::default()
        }
    }
}

/// Parses `identity` or `diagonal:<w1,w2,...>` (one weight for all objects,
/// or one per object).
pub fn parse_uncertainty(s: &str) -> Result<UncertaintySpec> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("identity") {
        return Ok(UncertaintySpec::Identity);
    }
    let Some(rest) = s.strip_prefix("diagonal:") else {
        return Err(Error::InvalidUncertainty(format!(
            "expected `identity` or `diagonal:<weights>`, got `{s}`"
        )));
    };
    let weights = rest
        .split(',')
        .map(|w| f64::from_str(w.trim()).map_err(|e| Error::InvalidUncertainty(format!("bad weight `{w}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidUncertainty("diagonal weights must be positive".into()));
    }
    Ok(UncertaintySpec::Diagonal(weights))
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Reads a headed CSV file into a table. Data rows are numbered from 1 in
/// error messages.
pub fn ingest_csv(path: &Path, config: &RunConfig) -> Result<CharacteristicTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            column: String::new(),
            message: e.to_string(),
        })?
        .clone();
    let inputs: Vec<usize> = config
        .input_columns
        .iter()
        .map(|c| column_index(&headers, c))
        .collect::<Result<_>>()?;
    let outputs: Vec<usize> = config
        .output_columns
        .iter()
        .map(|c| column_index(&headers, c))
        .collect::<Result<_>>()?;
    let id = match &config.id_column {
        Some(c) => Some(column_index(&headers, c)?),
        None => headers
            .iter()
            .position(|h| h == "id")
            .or_else(|| (0..headers.len()).find(|j| !inputs.contains(j) && !outputs.contains(j))),
    };

    let mut ids = Vec::new();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let field = |j: usize| -> Result<f64> {
            let raw = record.get(j).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    column: headers[j].to_string(),
                    message: format!("`{raw}` is not a finite number"),
                })
        };
        x.push(inputs.iter().map(|&j| field(j)).collect::<Result<Vec<_>>>()?);
        y.push(outputs.iter().map(|&j| field(j)).collect::<Result<Vec<_>>>()?);
        ids.push(match id {
            Some(j) => record.get(j).unwrap_or("").to_string(),
            None => format!("o{row}"),
        });
    }
    if ids.is_empty() {
        return Err(Error::Parse {
            row: 1,
            column: String::new(),
            message: "no data rows".into(),
        });
    }
    CharacteristicTable::from_rows(ids, &x, &y)
}

/// Classifies the data in `data_path` and writes `report.json`,
/// `classification.csv` and, when requested for one-input one-output data,
/// `plots/step_<k>.svg` into `out_dir`.
pub fn run(config: &RunConfig, data_path: &Path, out_dir: &Path) -> Result<Report> {
    config.validate()?;
    let table = ingest_csv(data_path, config)?;
    let table = if config.scale_data {
        table.min_max_scaled()?
    } else {
        table
    };
    info!(
        "{} objects, {} inputs, {} outputs, {} categories",
        table.num_objects(),
        table.num_inputs(),
        table.num_outputs(),
        config.categories
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let report = pool.install(|| execute(config, table.clone()))?;
    write_outputs(config, &table, &report, out_dir)?;
    Ok(report)
}

fn execute(config: &RunConfig, table: CharacteristicTable) -> Result<Report> {
    let started = Instant::now();
    let stats_before = solver::stats();
    let t = table.num_objects();
    let engine = Engine::new(table, config.uncertainty.clone(), config.settings())?;

    let seeds = seed_candidates(&engine, config.categories)?;
    let seed = best_seed(&seeds).expect("at least one size multiset exists");
    info!(
        "seed sizes {:?}, total {:.6}",
        seed.sizes.sizes,
        seed.classification.total.unwrap()
    );
    let seeded = Instant::now();
    let history = descend(&engine, &seed.classification)?;
    let searched = Instant::now();

    let steps = history
        .iter()
        .enumerate()
        .map(|(k, c)| step_record(&engine, k, c))
        .collect::<Result<Vec<_>>>()?;
    for s in &steps {
        debug_assert!(partition_is_valid(&s.classification(), t, config.categories));
        let ps: Vec<String> = s.categories.iter().map(|c| format!("{:.4}", c.proximity)).collect();
        info!("{}: P = [{}], total {:.4}", s.label, ps.join(", "), s.total);
    }
    let config_value = serde_json::to_value(config).map_err(|e| Error::Io(e.to_string()))?;
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        config: config_value,
        object_ids: engine.table().object_ids().to_vec(),
        num_inputs: engine.table().num_inputs(),
        num_outputs: engine.table().num_outputs(),
        seeds: seeds.iter().map(seed_record).collect(),
        history: steps,
        runtime: Runtime {
            workers: config.workers,
            timings: Timings {
                seeding_seconds: (seeded - started).as_secs_f64(),
                search_seconds: (searched - seeded).as_secs_f64(),
                total_seconds: started.elapsed().as_secs_f64(),
            },
            solver: solver::stats() - stats_before,
            cached_categories: engine.cached_categories(),
        },
    })
}

fn write_outputs(config: &RunConfig, table: &CharacteristicTable, report: &Report, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(out_dir.join("report.json"), json + "\n")?;

    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_path(out_dir.join("classification.csv")).map_err(csv_err)?;
    w.write_record(["object_id", "category"]).map_err(csv_err)?;
    let final_step = report.final_step();
    let assignment = final_step.classification().assignment(table.num_objects());
    for (id, cat) in table.object_ids().iter().zip(assignment) {
        let cat = cat.expect("final classification covers every object") + 1;
        w.write_record([id.as_str(), &cat.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;

    if config.emit_plots && table.num_inputs() == 1 && table.num_outputs() == 1 {
        let dir = out_dir.join("plots");
        fs::create_dir_all(&dir)?;
        for step in &report.history {
            let title = format!("{} (total P = {:.4})", capitalize(&step.label), step.total);
            let svg = scatter_svg(
                table,
                &step.classification(),
                &title,
                &config.input_columns[0],
                &config.output_columns[0],
            );
            fs::write(dir.join(format!("step_{}.svg", step.step)), svg)?;
        }
    }
    Ok(())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uncertainty_strings() {
        assert_eq!(parse_uncertainty("identity").unwrap(), UncertaintySpec::Identity);
        assert_eq!(
            parse_uncertainty("diagonal:1, 0.5").unwrap(),
            UncertaintySpec::Diagonal(vec![1.0, 0.5])
        );
        assert!(parse_uncertainty("diagonal:1,-2").is_err());
        assert!(parse_uncertainty("full").is_err());
    }

    #[test]
    fn overlapping_columns_rejected() {
        let c = RunConfig::new(2, vec!["a".into()], vec!["a".into()]);
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = RunConfig::new(0, vec!["a".into()], vec!["b".into()]);
        assert!(c.validate().is_err());
    }
}
