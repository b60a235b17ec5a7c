//! Static profile data: age distribution, names, and job titles per wage
//! decile. Bundled copies ship in the binary; each table can be swapped via
//! config for files in the same CSV format (UTF-8, header row).

use std::io::Read;
use std::path::Path;

use crate::error::{EconError, Result};

const AGES_CSV: &str = include_str!("../data/ages.csv");
const NAMES_CSV: &str = include_str!("../data/names.csv");
const JOB_TITLES_CSV: &str = include_str!("../data/job_titles.csv");

/// Empirical age distribution (`age,weight` rows).
#[derive(Debug, Clone)]
pub struct AgeTable {
    ages: Vec<u32>,
    weights: Vec<f64>,
}

impl AgeTable {
    pub fn bundled() -> Self {
        Self::from_csv_reader(AGES_CSV.as_bytes(), "<bundled ages>").expect("bundled age table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| EconError::data(path.display().to_string(), e.to_string()))?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub fn from_csv_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut ages = Vec::new();
        let mut weights = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let age: u32 = record
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| EconError::data(source, "bad age value"))?;
            let weight: f64 = record
                .get(1)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| EconError::data(source, "bad weight value"))?;
            if weight < 0.0 {
                return Err(EconError::data(source, "negative weight"));
            }
            ages.push(age);
            weights.push(weight);
        }
        if ages.is_empty() || weights.iter().sum::<f64>() <= 0.0 {
            return Err(EconError::data(source, "age table empty or all-zero weights"));
        }
        Ok(AgeTable { ages, weights })
    }

    pub fn ages(&self) -> &[u32] {
        &self.ages
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// One entry of the name list. The optional `city` column overrides the
/// default city on the agent profile.
#[derive(Debug, Clone)]
pub struct NameEntry {
    pub name: String,
    pub city: Option<String>,
}

/// Name list (`name` rows, optional second `city` column).
#[derive(Debug, Clone)]
pub struct NameList {
    entries: Vec<NameEntry>,
}

impl NameList {
    pub fn bundled() -> Self {
        Self::from_csv_reader(NAMES_CSV.as_bytes(), "<bundled names>").expect("bundled name list is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| EconError::data(path.display().to_string(), e.to_string()))?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub fn from_csv_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
        let mut entries = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let name = record
                .get(0)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| EconError::data(source, "empty name"))?;
            let city = record.get(1).map(str::trim).filter(|s| !s.is_empty()).map(String::from);
            entries.push(NameEntry { name: name.to_string(), city });
        }
        if entries.is_empty() {
            return Err(EconError::data(source, "name list is empty"));
        }
        Ok(NameList { entries })
    }

    pub fn entries(&self) -> &[NameEntry] {
        &self.entries
    }
}

/// Job titles keyed by monthly-wage decile (`decile,title` rows, deciles
/// 1..=10).
#[derive(Debug, Clone)]
pub struct JobTable {
    titles: Vec<Vec<String>>,
}

impl JobTable {
    pub fn bundled() -> Self {
        Self::from_csv_reader(JOB_TITLES_CSV.as_bytes(), "<bundled job titles>")
            .expect("bundled job table is valid")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| EconError::data(path.display().to_string(), e.to_string()))?;
        Self::from_csv_reader(file, &path.display().to_string())
    }

    pub fn from_csv_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut titles: Vec<Vec<String>> = vec![Vec::new(); 10];
        for record in rdr.records() {
            let record = record?;
            let decile: usize = record
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| EconError::data(source, "bad decile value"))?;
            if !(1..=10).contains(&decile) {
                return Err(EconError::data(source, format!("decile {decile} outside 1..=10")));
            }
            let title = record
                .get(1)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .ok_or_else(|| EconError::data(source, "empty title"))?;
            titles[decile - 1].push(title.to_string());
        }
        for (i, bucket) in titles.iter().enumerate() {
            if bucket.is_empty() {
                return Err(EconError::data(source, format!("decile {} has no titles", i + 1)));
            }
        }
        Ok(JobTable { titles })
    }

    /// Titles for a 0-based decile index.
    pub fn titles(&self, decile: usize) -> &[String] {
        &self.titles[decile]
    }
}
