//! Write-once dataset storage, optionally mirrored to a directory of CSV
//! files so datasets survive a restart.

use std::collections::{BTreeSet, HashMap};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use chrono::{DateTime, NaiveDate, Utc};
use dddm::ingest::{parse_dataset, write_dataset};
use dddm::VisitRecord;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHandle {
    pub id: String,
    pub row_count: usize,
    pub client_count: usize,
    pub min_date: NaiveDate,
    pub max_date: NaiveDate,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug)]
pub struct Dataset {
    pub handle: DatasetHandle,
    pub records: Vec<VisitRecord>,
}

impl Dataset {
    /// `None` when `records` is empty.
    fn new(
        id: String,
        records: Vec<VisitRecord>,
        created_at: DateTime<Utc>,
        warnings: Vec<String>,
    ) -> Option<Self> {
        let (min_date, max_date) = dddm::date_range(&records)?;
        let client_count = records
            .iter()
            .map(|r| &r.client_id)
            .collect::<BTreeSet<_>>()
            .len();
        Some(Self {
            handle: DatasetHandle {
                id,
                row_count: records.len(),
                client_count,
                min_date,
                max_date,
                created_at,
                warnings,
            },
            records,
        })
    }
}

#[derive(Debug, Default)]
pub struct DatasetStore {
    datasets: RwLock<HashMap<String, Arc<Dataset>>>,
    spill_dir: Option<PathBuf>,
}

impl DatasetStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) `dir` and loads every `<id>.csv` in it.
    /// Files that fail to parse are skipped with a warning.
    pub fn with_spill_dir(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut datasets = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            let Some(id) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .map(str::to_string)
            else {
                continue;
            };
            match load(&path, id.clone()) {
                Ok(Some(dataset)) => {
                    datasets.insert(id, Arc::new(dataset));
                }
                Ok(None) => log::warn!("skipping empty dataset file {}", path.display()),
                Err(e) => log::warn!("skipping {}: {e}", path.display()),
            }
        }
        log::info!(
            "loaded {} dataset(s) from {}",
            datasets.len(),
            dir.display()
        );
        Ok(Self {
            datasets: RwLock::new(datasets),
            spill_dir: Some(dir),
        })
    }

    /// Stores `records` under a fresh id. Returns `Ok(None)` for an empty
    /// record list.
    pub fn insert(
        &self,
        records: Vec<VisitRecord>,
        warnings: Vec<String>,
    ) -> io::Result<Option<DatasetHandle>> {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let Some(dataset) = Dataset::new(id.clone(), records, Utc::now(), warnings) else {
            return Ok(None);
        };
        if let Some(dir) = &self.spill_dir {
            spill(dir, &id, &dataset.records)?;
        }
        let handle = dataset.handle.clone();
        self.datasets
            .write()
            .expect("dataset store lock poisoned")
            .insert(id, Arc::new(dataset));
        Ok(Some(handle))
    }

    pub fn get(&self, id: &str) -> Option<Arc<Dataset>> {
        self.datasets
            .read()
            .expect("dataset store lock poisoned")
            .get(id)
            .cloned()
    }

    /// Handles of all stored datasets, oldest first.
    pub fn list(&self) -> Vec<DatasetHandle> {
        let mut handles: Vec<DatasetHandle> = self
            .datasets
            .read()
            .expect("dataset store lock poisoned")
            .values()
            .map(|d| d.handle.clone())
            .collect();
        handles.sort_by(|a, b| {
            a.created_at
                .cmp(&b.created_at)
                .then_with(|| a.id.cmp(&b.id))
        });
        handles
    }
}

fn load(path: &Path, id: String) -> Result<Option<Dataset>, dddm::Error> {
    let created_at = fs::metadata(path)?
        .modified()
        .map(DateTime::<Utc>::from)
        .unwrap_or_else(|_| Utc::now());
    let parsed = parse_dataset(BufReader::new(File::open(path)?))?;
    Ok(Dataset::new(
        id,
        parsed.records,
        created_at,
        parsed.warnings,
    ))
}

fn spill(dir: &Path, id: &str, records: &[VisitRecord]) -> io::Result<()> {
    let tmp = dir.join(format!(".{id}.csv.tmp"));
    let mut out = BufWriter::new(File::create(&tmp)?);
    write_dataset(records, &mut out).map_err(io::Error::other)?;
    out.flush()?;
    drop(out);
    fs::rename(&tmp, dir.join(format!("{id}.csv")))
}
