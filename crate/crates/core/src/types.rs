use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EconError, Result};
use crate::scalar::{real, Real};

/// Calendar (year, month) with 1-based months.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalendarDate {
    pub year: i32,
    pub month: u8,
}

impl CalendarDate {
    pub fn new(year: i32, month: u8) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(EconError::domain(format!("month {month} out of range 1..=12")));
        }
        Ok(CalendarDate { year, month })
    }

    /// Date `n` months after this one.
    pub fn plus_months(self, n: usize) -> Self {
        let zero_based = (self.month as usize - 1) + n;
        CalendarDate {
            year: self.year + (zero_based / 12) as i32,
            month: (zero_based % 12 + 1) as u8,
        }
    }

    /// Signed number of months from `other` to `self`.
    pub fn months_since(self, other: CalendarDate) -> i64 {
        (self.year as i64 - other.year as i64) * 12 + (self.month as i64 - other.month as i64)
    }

    /// `YYYY.MM` rendering used in agent-facing text.
    pub fn dotted(&self) -> String {
        format!("{:04}.{:02}", self.year, self.month)
    }
}

impl fmt::Display for CalendarDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for CalendarDate {
    type Err = EconError;

    fn from_str(s: &str) -> Result<Self> {
        let (y, m) = s
            .split_once('-')
            .ok_or_else(|| EconError::domain(format!("bad date {s:?}, expected YYYY-MM")))?;
        let year: i32 = y
            .parse()
            .map_err(|_| EconError::domain(format!("bad year in date {s:?}")))?;
        let month: u8 = m
            .parse()
            .map_err(|_| EconError::domain(format!("bad month in date {s:?}")))?;
        CalendarDate::new(year, month)
    }
}

/// One household agent.
///
/// `worked`, `income`, and the consumption/fiscal fields describe the most
/// recently resolved month; propensities are the latest policy outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentState<T> {
    pub id: usize,
    pub name: String,
    pub age: u32,
    pub city: String,
    pub job_title: String,
    /// Hourly wage w.
    pub hourly_wage: T,
    /// Monthly wage v = hours_per_month * w, kept in sync with `hourly_wage`.
    pub monthly_wage: T,
    pub savings: T,
    /// Last resolved labor decision l.
    pub worked: bool,
    /// Income of the month `worked` describes: monthly_wage if worked, else 0.
    pub income: T,
    pub work_propensity: T,
    pub consumption_propensity: T,
    /// Intended consumption budget c = p^c * savings for the current month.
    pub intended_consumption: T,
    pub realized_consumption: T,
    pub realized_demand: T,
    pub tax_paid: T,
    pub redistribution_received: T,
}

impl<T: Real> AgentState<T> {
    pub fn new(
        id: usize,
        name: String,
        age: u32,
        city: String,
        job_title: String,
        hourly_wage: T,
        hours_per_month: T,
    ) -> Self {
        AgentState {
            id,
            name,
            age,
            city,
            job_title,
            hourly_wage,
            monthly_wage: hourly_wage * hours_per_month,
            savings: T::zero(),
            worked: false,
            income: T::zero(),
            work_propensity: T::zero(),
            consumption_propensity: T::zero(),
            intended_consumption: T::zero(),
            realized_consumption: T::zero(),
            realized_demand: T::zero(),
            tax_paid: T::zero(),
            redistribution_received: T::zero(),
        }
    }

    /// Update the hourly wage, keeping the monthly wage consistent.
    pub fn set_hourly_wage(&mut self, wage: T, hours_per_month: T) {
        self.hourly_wage = wage;
        self.monthly_wage = wage * hours_per_month;
    }
}

/// Shared world state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyState<T> {
    /// Goods inventory G.
    pub inventory: T,
    /// Goods price P (the price quoted to agents this month).
    pub price: T,
    /// Annual interest rate r.
    pub interest_rate: T,
    /// 0-based index of the month currently being simulated.
    pub month_index: usize,
    pub start_date: CalendarDate,
    /// Production S added to inventory this month.
    pub production_this_month: T,
    /// Per completed month: the price goods traded at.
    pub price_history: Vec<T>,
    /// Per completed month: population mean hourly wage in effect.
    pub mean_wage_history: Vec<T>,
    /// Per completed month: number of agents who worked.
    pub employment_history: Vec<usize>,
}

impl<T: Real> EconomyState<T> {
    pub fn new(price: T, interest_rate: T, start_date: CalendarDate) -> Self {
        EconomyState {
            inventory: T::zero(),
            price,
            interest_rate,
            month_index: 0,
            start_date,
            production_this_month: T::zero(),
            price_history: Vec::new(),
            mean_wage_history: Vec::new(),
            employment_history: Vec::new(),
        }
    }

    /// Calendar date of the month currently being simulated.
    pub fn calendar_date(&self) -> CalendarDate {
        self.start_date.plus_months(self.month_index)
    }
}

/// Progressive tax schedule: ascending bracket lower bounds and per-bracket
/// marginal rates. The top bracket is unbounded above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaxSchedule<T> {
    brackets: Vec<T>,
    rates: Vec<T>,
}

impl<T: Real> TaxSchedule<T> {
    pub fn new(brackets: Vec<T>, rates: Vec<T>) -> Result<Self> {
        if brackets.is_empty() {
            return Err(EconError::config("tax.brackets", "must be non-empty"));
        }
        if brackets.len() != rates.len() {
            return Err(EconError::config(
                "tax.brackets",
                format!(
                    "got {} brackets but {} rates; lengths must match",
                    brackets.len(),
                    rates.len()
                ),
            ));
        }
        if brackets[0] != T::zero() {
            return Err(EconError::config("tax.brackets", "first bracket must be 0"));
        }
        for pair in brackets.windows(2) {
            if pair[1] <= pair[0] {
                return Err(EconError::config(
                    "tax.brackets",
                    format!("must be strictly increasing, found {} then {}", pair[0], pair[1]),
                ));
            }
        }
        for &r in &rates {
            if r < T::zero() || r > T::one() || !r.is_finite() {
                return Err(EconError::config("tax.rates", format!("rate {r} outside [0, 1]")));
            }
        }
        Ok(TaxSchedule { brackets, rates })
    }

    /// Monthly U.S. federal single-filer schedule used as the shipped default
    /// (annual bracket bounds divided by 12).
    pub fn us_2018_monthly() -> Self {
        TaxSchedule::new(
            [0.00, 808.33, 3289.58, 7016.67, 13393.75, 17008.33, 42525.00]
                .iter()
                .map(|&b| real(b))
                .collect(),
            [0.10, 0.12, 0.22, 0.24, 0.32, 0.35, 0.37]
                .iter()
                .map(|&r| real(r))
                .collect(),
        )
        .expect("builtin schedule is valid")
    }

    /// Load a `bracket,rate` CSV (header row required).
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut brackets = Vec::new();
        let mut rates = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let b: f64 = record
                .get(0)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| EconError::domain("bad bracket value in tax schedule CSV"))?;
            let r: f64 = record
                .get(1)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| EconError::domain("bad rate value in tax schedule CSV"))?;
            brackets.push(real(b));
            rates.push(real(r));
        }
        TaxSchedule::new(brackets, rates)
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| EconError::data(path.display().to_string(), e.to_string()))?;
        TaxSchedule::from_csv_reader(file)
    }

    pub fn brackets(&self) -> &[T] {
        &self.brackets
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn max_rate(&self) -> T {
        self.rates.iter().cloned().fold(T::zero(), T::max)
    }
}

/// When the goods price reacts to the month's supply/demand imbalance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceAdjustTiming {
    /// Match consumption at the quoted price, then adjust for next month.
    #[default]
    EndOfMonth,
    /// Adjust right after the imbalance is known; matching clears at the
    /// adjusted price.
    BeforeMatching,
}

/// Labor/consumption market parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct MarketParams<T> {
    /// Maximum relative wage change per month (alpha_w).
    #[serde(default = "defaults::max_wage_rate")]
    pub max_wage_rate: T,
    /// Maximum relative price change per month (alpha_P).
    #[serde(default = "defaults::max_price_rate")]
    pub max_price_rate: T,
    /// Goods units produced per hour worked (A).
    #[serde(default = "defaults::productivity")]
    pub productivity: T,
    /// Hours worked in a full month.
    #[serde(default = "defaults::hours_per_month")]
    pub hours_per_month: u32,
    #[serde(default)]
    pub price_adjust_timing: PriceAdjustTiming,
}

impl<T: Real> MarketParams<T> {
    pub fn hours(&self) -> T {
        real(self.hours_per_month as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_wage_rate <= T::zero() || !self.max_wage_rate.is_finite() {
            return Err(EconError::config("market.max_wage_rate", "must be > 0"));
        }
        if self.max_price_rate <= T::zero() || !self.max_price_rate.is_finite() {
            return Err(EconError::config("market.max_price_rate", "must be > 0"));
        }
        if self.productivity <= T::zero() || !self.productivity.is_finite() {
            return Err(EconError::config("market.productivity", "must be > 0"));
        }
        if self.hours_per_month == 0 {
            return Err(EconError::config("market.hours_per_month", "must be > 0"));
        }
        Ok(())
    }
}

impl<T: Real> Default for MarketParams<T> {
    fn default() -> Self {
        MarketParams {
            max_wage_rate: defaults::max_wage_rate(),
            max_price_rate: defaults::max_price_rate(),
            productivity: defaults::productivity(),
            hours_per_month: defaults::hours_per_month(),
            price_adjust_timing: PriceAdjustTiming::default(),
        }
    }
}

/// Taylor-rule parameters for the annual interest-rate update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct TaylorParams<T> {
    /// Natural interest rate r^n.
    #[serde(default = "defaults::natural_rate")]
    pub natural_rate: T,
    /// Target inflation pi^t.
    #[serde(default = "defaults::target_inflation")]
    pub target_inflation: T,
    /// Natural unemployment u^n.
    #[serde(default = "defaults::natural_unemployment")]
    pub natural_unemployment: T,
    /// Inflation adaptation coefficient alpha^pi.
    #[serde(default = "defaults::half")]
    pub inflation_coeff: T,
    /// Unemployment adaptation coefficient alpha^u.
    #[serde(default = "defaults::half")]
    pub unemployment_coeff: T,
}

impl<T: Real> TaylorParams<T> {
    pub fn validate(&self) -> Result<()> {
        if self.inflation_coeff < T::zero() {
            return Err(EconError::config("taylor.inflation_coeff", "must be >= 0"));
        }
        if self.unemployment_coeff < T::zero() {
            return Err(EconError::config("taylor.unemployment_coeff", "must be >= 0"));
        }
        if self.natural_rate < T::zero() {
            return Err(EconError::config("taylor.natural_rate", "must be >= 0"));
        }
        if self.natural_unemployment < T::zero() || self.natural_unemployment > T::one() {
            return Err(EconError::config("taylor.natural_unemployment", "must be in [0, 1]"));
        }
        Ok(())
    }
}

impl<T: Real> Default for TaylorParams<T> {
    fn default() -> Self {
        TaylorParams {
            natural_rate: defaults::natural_rate(),
            target_inflation: defaults::target_inflation(),
            natural_unemployment: defaults::natural_unemployment(),
            inflation_coeff: defaults::half(),
            unemployment_coeff: defaults::half(),
        }
    }
}

mod defaults {
    use crate::scalar::{real, Real};

    pub fn max_wage_rate<T: Real>() -> T {
        real(0.05)
    }
    pub fn max_price_rate<T: Real>() -> T {
        real(0.10)
    }
    pub fn productivity<T: Real>() -> T {
        real(1.0)
    }
    pub fn hours_per_month() -> u32 {
        168
    }
    pub fn natural_rate<T: Real>() -> T {
        real(0.01)
    }
    pub fn target_inflation<T: Real>() -> T {
        real(0.02)
    }
    pub fn natural_unemployment<T: Real>() -> T {
        real(0.04)
    }
    pub fn half<T: Real>() -> T {
        real(0.5)
    }
}
