//! Run persistence: CSV tables, the dialogue log, and the run manifest.
//!
//! `months.csv` is long-format (one row per agent-month) and round-trips
//! float values exactly, so indicators and regressions recomputed from disk
//! match the in-run computation bit-for-bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use econ_core::config::SimConfig;
use econ_core::error::{EconError, Result};
use econ_core::metrics::{OkunPoints, RegressionResult, SignificanceTable};
use econ_core::records::{AgentMonthSnapshot, DialogueRecord, MonthRecord, YearRecord};
use econ_core::scalar::Real;
use econ_core::types::CalendarDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MONTHS_FILE: &str = "months.csv";
pub const YEARS_FILE: &str = "years.csv";
pub const PHILLIPS_FILE: &str = "phillips.csv";
pub const OKUN_FILE: &str = "okun.csv";
pub const REGRESSIONS_FILE: &str = "regressions.csv";
pub const TABLE1_FILE: &str = "table1.csv";
pub const DIALOGUES_FILE: &str = "dialogues.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";

#[derive(Debug, Serialize, Deserialize)]
struct MonthsRow<T> {
    month_index: usize,
    date: String,
    price: T,
    interest_rate: T,
    production: T,
    total_demand: T,
    imbalance: T,
    employed_count: usize,
    fallback_count: u32,
    agent_id: usize,
    work_propensity: T,
    consumption_propensity: T,
    worked: bool,
    income: T,
    tax: T,
    redistribution: T,
    realized_consumption: T,
    realized_demand: T,
    savings: T,
    hourly_wage: T,
}

pub fn write_months_csv<T: Real>(path: &Path, months: &[MonthRecord<T>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for month in months {
        for agent in &month.agents {
            writer.serialize(MonthsRow {
                month_index: month.month_index,
                date: month.date.to_string(),
                price: month.price,
                interest_rate: month.interest_rate,
                production: month.production,
                total_demand: month.total_demand,
                imbalance: month.imbalance,
                employed_count: month.employed_count,
                fallback_count: month.fallback_count,
                agent_id: agent.agent_id,
                work_propensity: agent.work_propensity,
                consumption_propensity: agent.consumption_propensity,
                worked: agent.worked,
                income: agent.income,
                tax: agent.tax,
                redistribution: agent.redistribution,
                realized_consumption: agent.realized_consumption,
                realized_demand: agent.realized_demand,
                savings: agent.savings,
                hourly_wage: agent.hourly_wage,
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn read_months_csv<T: Real>(path: &Path) -> Result<Vec<MonthRecord<T>>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut months: Vec<MonthRecord<T>> = Vec::new();
    for row in reader.deserialize() {
        let row: MonthsRow<T> = row?;
        let date: CalendarDate = row.date.parse()?;
        if months.last().map(|m: &MonthRecord<T>| m.month_index) != Some(row.month_index) {
            months.push(MonthRecord {
                month_index: row.month_index,
                date,
                price: row.price,
                interest_rate: row.interest_rate,
                production: row.production,
                total_demand: row.total_demand,
                imbalance: row.imbalance,
                employed_count: row.employed_count,
                fallback_count: row.fallback_count,
                agents: Vec::new(),
            });
        }
        let month = months.last_mut().unwrap();
        if month.agents.len() != row.agent_id {
            return Err(EconError::domain(format!(
                "months CSV out of order at month {}, agent {}",
                row.month_index, row.agent_id
            )));
        }
        month.agents.push(AgentMonthSnapshot {
            agent_id: row.agent_id,
            work_propensity: row.work_propensity,
            consumption_propensity: row.consumption_propensity,
            worked: row.worked,
            income: row.income,
            tax: row.tax,
            redistribution: row.redistribution,
            realized_consumption: row.realized_consumption,
            realized_demand: row.realized_demand,
            savings: row.savings,
            hourly_wage: row.hourly_wage,
        });
    }
    Ok(months)
}

pub fn write_years_csv<T: Real>(path: &Path, years: &[YearRecord<T>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for year in years {
        writer.serialize(year)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_phillips_csv<T: Real>(path: &Path, points: &[(T, T)]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["unemployment", "wage_inflation"])?;
    for (u, w) in points {
        writer.write_record([format_float(*u), format_float(*w)])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_okun_csv<T: Real>(path: &Path, okun: &OkunPoints<T>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["unemployment_growth", "real_gdp_growth"])?;
    for (du, dy) in &okun.points {
        writer.write_record([format_float(*du), format_float(*dy)])?;
    }
    writer.flush()?;
    Ok(())
}

fn format_float<T: Real>(x: T) -> String {
    let mut out = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.serialize(x).expect("float serializes");
        w.flush().expect("flush");
    }
    String::from_utf8(out).expect("utf8").trim_end().to_string()
}

#[derive(Debug, Serialize, Deserialize)]
struct RegressionRow<T> {
    agent_id: usize,
    target: String,
    term: String,
    coefficient: Option<T>,
    std_error: Option<T>,
    t_value: Option<T>,
    p_value: Option<T>,
    n_obs: usize,
    status: String,
}

pub fn write_regressions_csv<T: Real>(path: &Path, results: &[RegressionResult<T>]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for result in results {
        if result.constant_target {
            writer.serialize(RegressionRow::<T> {
                agent_id: result.agent_id,
                target: result.target.clone(),
                term: String::new(),
                coefficient: None,
                std_error: None,
                t_value: None,
                p_value: None,
                n_obs: result.n_obs,
                status: "skipped_constant_target".into(),
            })?;
            continue;
        }
        for (i, term) in result.names.iter().enumerate() {
            writer.serialize(RegressionRow {
                agent_id: result.agent_id,
                target: result.target.clone(),
                term: term.clone(),
                coefficient: Some(result.coefficients[i]),
                std_error: Some(result.std_errors[i]),
                t_value: Some(result.t_values[i]),
                p_value: Some(result.p_values[i]),
                n_obs: result.n_obs,
                status: "ok".into(),
            })?;
        }
        for term in &result.dropped {
            writer.serialize(RegressionRow::<T> {
                agent_id: result.agent_id,
                target: result.target.clone(),
                term: term.clone(),
                coefficient: None,
                std_error: None,
                t_value: None,
                p_value: None,
                n_obs: result.n_obs,
                status: "dropped_zero_variance".into(),
            })?;
        }
    }
    writer.flush()?;
    Ok(())
}

pub fn write_table1_csv(path: &Path, table: &SignificanceTable) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec!["target".to_string()];
    header.extend(table.regressors.iter().cloned());
    writer.write_record(&header)?;
    let mut work = vec!["work".to_string()];
    work.extend(table.work_counts.iter().map(|c| c.to_string()));
    writer.write_record(&work)?;
    let mut consumption = vec!["consumption".to_string()];
    consumption.extend(table.consumption_counts.iter().map(|c| c.to_string()));
    writer.write_record(&consumption)?;
    writer.flush()?;
    Ok(())
}

pub fn write_dialogues_jsonl(path: &Path, dialogues: &[DialogueRecord]) -> Result<()> {
    let mut file = fs::File::create(path)?;
    for record in dialogues {
        let line = serde_json::to_string(record)
            .map_err(|e| EconError::domain(format!("dialogue serialization: {e}")))?;
        file.write_all(line.as_bytes())?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// Everything needed to audit and re-run a simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    /// "completed" or "failed".
    pub status: String,
    pub error: Option<String>,
    pub seed: u64,
    pub policy: String,
    /// SHA-256 of the resolved config JSON.
    pub config_hash: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub months_completed: usize,
    pub fallback_total: u64,
    /// Full resolved configuration (sufficient for a bit-identical re-run
    /// with mock policies).
    pub config: SimConfig<f64>,
    /// SHA-256 per output file.
    pub files: BTreeMap<String, String>,
}

pub fn config_hash(config: &SimConfig<f64>) -> Result<String> {
    let text = serde_json::to_string(config)
        .map_err(|e| EconError::domain(format!("config serialization: {e}")))?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| EconError::domain(format!("manifest serialization: {e}")))?;
    fs::write(path, text)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| EconError::data(path.display().to_string(), e.to_string()))
}

pub fn run_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
