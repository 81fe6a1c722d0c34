//! Income–need datasets in CSV (`id,income,need`) or JSON
//! (`{"agents":[{"id":..,"income":..,"need":..}]}`).

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use redistrib_core::Problem;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// From the file extension; anything but `.json` is read as CSV.
    pub fn infer(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    #[serde(deserialize_with = "id_from_string_or_number")]
    pub id: String,
    pub income: f64,
    pub need: f64,
}

fn id_from_string_or_number<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        Text(String),
        Number(serde_json::Number),
    }
    Ok(match Id::deserialize(d)? {
        Id::Text(s) => s,
        Id::Number(n) => n.to_string(),
    })
}

#[derive(Deserialize)]
struct JsonDataset {
    agents: Vec<Record>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<Record>,
    pub source: PathBuf,
    pub format: Format,
}

impl Dataset {
    pub fn load(path: &Path, format: Option<Format>) -> Result<Dataset> {
        let format = format.unwrap_or_else(|| Format::infer(path));
        let file = File::open(path).map_err(|e| CliError::dataset(path, e))?;
        Self::from_reader(file, path, format)
    }

    pub fn from_reader(reader: impl Read, source: &Path, format: Format) -> Result<Dataset> {
        let records = match format {
            Format::Csv => csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(reader)
                .deserialize()
                .collect::<std::result::Result<Vec<Record>, _>>()
                .map_err(|e| CliError::dataset(source, e))?,
            Format::Json => {
                serde_json::from_reader::<_, JsonDataset>(reader)
                    .map_err(|e| CliError::dataset(source, e))?
                    .agents
            }
        };
        let mut seen = HashSet::new();
        if let Some(dup) = records.iter().find(|r| !seen.insert(r.id.as_str())) {
            return Err(CliError::dataset(source, format!("duplicate agent id `{}`", dup.id)));
        }
        let dataset = Dataset {
            records,
            source: source.to_path_buf(),
            format,
        };
        dataset.problem()?;
        Ok(dataset)
    }

    /// The dataset as a validated problem; core validation errors are
    /// reported as dataset errors.
    pub fn problem(&self) -> Result<Problem> {
        Problem::new(
            self.records.iter().map(|r| r.id.clone()),
            self.records.iter().map(|r| r.income).collect(),
            self.records.iter().map(|r| r.need).collect(),
        )
        .map_err(|e| CliError::dataset(&self.source, format!("{}: {e}", rule_name(&e))))
    }
}

/// Variant name of a validation error, e.g. `ZeroTotalNeed`.
fn rule_name(e: &redistrib_core::Error) -> String {
    format!("{e:?}")
        .split(|c: char| !c.is_ascii_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_owned()
}
