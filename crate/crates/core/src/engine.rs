use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use log::info;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CharacteristicTable, Classification, ProximityResult, UncertaintySpec};
use crate::proximity::proximity;
use crate::settings::Settings;

/// Proximity evaluation with a per-category cache, shared by seeding and
/// search.
///
/// Categories are keyed by their sorted member list. Batches of categories
/// are computed in parallel; each distinct key is computed once and results
/// never change after insertion, so outcomes do not depend on the number of
/// worker threads.
pub struct Engine {
    table: CharacteristicTable,
    spec: UncertaintySpec,
    settings: Settings,
    cache: Mutex<HashMap<Vec<usize>, Arc<ProximityResult>>>,
}

fn key(members: &[usize]) -> Vec<usize> {
    let mut k = members.to_vec();
    k.sort_unstable();
    k
}

impl Engine {
    /// Explicit uncertainty matrices are tied to one fixed category and
    /// are rejected here.
    pub fn new(table: CharacteristicTable, spec: UncertaintySpec, settings: Settings) -> Result<Self> {
        if matches!(spec, UncertaintySpec::Explicit(_)) {
            return Err(Error::ExplicitSpecInSearch);
        }
        spec.validate(&table)?;
        settings.validate()?;
        Ok(Engine {
            table,
            spec,
            settings,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn table(&self) -> &CharacteristicTable {
        &self.table
    }

    pub fn spec(&self) -> &UncertaintySpec {
        &self.spec
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn cached_categories(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    fn cached(&self, members: &[usize]) -> Option<Arc<ProximityResult>> {
        self.cache.lock().unwrap().get(members).cloned()
    }

    /// Computes every distinct uncached category in `categories`.
    pub fn prefetch<I>(&self, categories: I) -> Result<()>
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let pending: BTreeSet<Vec<usize>> = {
            let cache = self.cache.lock().unwrap();
            categories
                .into_iter()
                .map(|c| key(&c))
                .filter(|k| !cache.contains_key(k))
                .collect()
        };
        if pending.is_empty() {
            return Ok(());
        }
        let pending: Vec<_> = pending.into_iter().collect();
        let results = pending
            .par_iter()
            .map(|k| proximity(&self.table, k, &self.spec, &self.settings))
            .collect::<Result<Vec<_>>>()?;
        let mut cache = self.cache.lock().unwrap();
        for (k, r) in pending.into_iter().zip(results) {
            info!(
                "category {:?}: P = {:.6} in [{:.6}, {:.6}] ({:?})",
                k, r.estimate, r.lower_bound, r.upper_bound, r.exit
            );
            cache.entry(k).or_insert_with(|| Arc::new(r));
        }
        Ok(())
    }

    /// Proximity of one category.
    pub fn proximity(&self, members: &[usize]) -> Result<Arc<ProximityResult>> {
        let k = key(members);
        if let Some(r) = self.cached(&k) {
            return Ok(r);
        }
        self.prefetch([k.clone()])?;
        Ok(self.cached(&k).expect("prefetched category is cached"))
    }

    /// `classification` with its per-category proximities and total
    /// attached.
    pub fn evaluate(&self, classification: &Classification) -> Result<Classification> {
        self.prefetch(classification.categories.iter().cloned())?;
        let values = classification
            .categories
            .iter()
            .map(|c| Ok(self.proximity(c)?.estimate))
            .collect::<Result<Vec<_>>>()?;
        Ok(Classification::new(classification.categories.clone()).with_proximities(values))
    }

    /// Total proximity of a batch of partitions, evaluated in parallel.
    pub fn totals(&self, partitions: &[Vec<Vec<usize>>]) -> Result<Vec<f64>> {
        self.prefetch(partitions.iter().flatten().cloned())?;
        partitions
            .iter()
            .map(|p| p.iter().map(|c| Ok(self.proximity(c)?.estimate)).sum())
            .collect()
    }
}
