//! The monthly simulation driver.
//!
//! Step order within a month is fixed (golden files depend on it):
//! (a) in the first month of year 2 onward, accrue interest at the old rate,
//!     then set the new rate from the completed year's stats;
//! (b) job offers for agents unemployed last month;
//! (c) policy decisions from this month's observations;
//! (d) Bernoulli labor resolution, incomes set;
//! (e) production added to inventory;
//! (f) taxation, redistribution, savings update;
//! (g) demand aggregation and imbalance at the quoted price;
//! (h) consumption matching (price moves first under the before-matching
//!     timing switch, otherwise at end of month);
//! (i) wage adjustment, then the end-of-month price adjustment;
//! (j) histories appended, month record emitted;
//! (k) at quarter end, policy reflection hook.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use econ_core::config::{LlmClientKind, PolicyKind, SimConfig};
use econ_core::data::JobTable;
use econ_core::error::{EconError, Result};
use econ_core::records::{DialogueRecord, MonthRecord, YearRecord};
use econ_core::scalar::Real;
use econ_core::types::{AgentState, EconomyState, TaxSchedule};
use econ_core::{finance, fiscal, markets, metrics, population};
use econ_core::policies::{
    composite_assign, resolve_labor, EconObservation, HouseholdPolicy, MonthContext, RulePolicy,
    ScriptedPolicy,
};
use econ_core::rng::RngStreams;
use econ_llm::{
    ChatClient, EconRationalClient, HttpChatClient, HttpClientConfig, LlmPolicy,
    LlmPolicySettings, ScriptedChatClient,
};
use serde::Serialize;

use crate::output;

/// Build the configured household policy. Consumes composite-assignment
/// draws from the profile stream, after population initialization.
pub fn build_policy<T: Real>(
    config: &SimConfig<T>,
    schedule: &TaxSchedule<T>,
    streams: &mut RngStreams,
) -> Result<Box<dyn HouseholdPolicy<T>>> {
    let rule = config.policy.rule;
    Ok(match config.policy.kind {
        PolicyKind::Len => Box::new(RulePolicy::len(rule)),
        PolicyKind::Cats => Box::new(RulePolicy::cats(rule)),
        PolicyKind::Composite => {
            let weight = config.policy.len_weight.to_f64().unwrap();
            let assignment =
                composite_assign(config.num_agents, weight, &mut streams.profile_init);
            Box::new(RulePolicy::composite(rule, assignment))
        }
        PolicyKind::Scripted => Box::new(ScriptedPolicy {
            work: config.policy.scripted_work,
            consumption: config.policy.scripted_consumption,
        }),
        PolicyKind::Llm => {
            let llm = &config.policy.llm;
            let client: Arc<dyn ChatClient> = match llm.client {
                LlmClientKind::EconRational => Arc::new(EconRationalClient::default()),
                LlmClientKind::Scripted => {
                    let path = llm.script_path.as_ref().ok_or_else(|| {
                        EconError::config("policy.llm.script_path", "required for scripted client")
                    })?;
                    Arc::new(
                        ScriptedChatClient::from_jsonl_path(path)
                            .map_err(|e| EconError::Policy(e.to_string()))?,
                    )
                }
                LlmClientKind::Live => {
                    let api_key = std::env::var(&llm.api_key_env).ok();
                    Arc::new(
                        HttpChatClient::new(HttpClientConfig {
                            base_url: llm.base_url.clone(),
                            api_key,
                            timeout: std::time::Duration::from_secs(llm.timeout_secs),
                            retries: llm.transport_retries,
                            backoff: std::time::Duration::from_millis(llm.retry_backoff_ms),
                        })
                        .map_err(|e| EconError::Policy(e.to_string()))?,
                    )
                }
            };
            Box::new(LlmPolicy::new(
                client,
                LlmPolicySettings {
                    model: llm.model.clone(),
                    temperature: llm.temperature,
                    parse_retries: llm.parse_retries,
                    parallelism: llm.parallelism,
                    memory_window: llm.memory_window,
                },
                schedule.clone(),
                config.num_agents,
            ))
        }
    })
}

/// Full simulation state.
pub struct World<T: Real> {
    pub config: SimConfig<T>,
    pub schedule: TaxSchedule<T>,
    pub agents: Vec<AgentState<T>>,
    pub econ: EconomyState<T>,
    pub months: Vec<MonthRecord<T>>,
    pub dialogues: Vec<DialogueRecord>,
    pub initial_price: T,
    pub initial_mean_wage: T,
    streams: RngStreams,
    policy: Box<dyn HouseholdPolicy<T>>,
    job_table: JobTable,
    prev_monthly_wages: Vec<T>,
    prev_price: Option<T>,
    prev_year_mean_price: T,
}

impl<T: Real> World<T> {
    pub fn new(config: SimConfig<T>) -> Result<Self> {
        config.validate()?;
        let mut streams = RngStreams::from_seed(config.seed);
        let (agents, econ) = population::init_population(&config, &mut streams)?;
        Self::assemble(config, agents, econ, streams)
    }

    /// Fixture constructor with explicit hourly wages.
    pub fn with_wages(config: SimConfig<T>, wages: &[T]) -> Result<Self> {
        config.validate()?;
        let mut streams = RngStreams::from_seed(config.seed);
        let (agents, econ) = population::population_from_wages(&config, wages, &mut streams)?;
        Self::assemble(config, agents, econ, streams)
    }

    /// Scenario hook: run with an explicit policy instead of the configured
    /// one. No composite-assignment draws are consumed.
    pub fn with_policy(config: SimConfig<T>, policy: Box<dyn HouseholdPolicy<T>>) -> Result<Self> {
        config.validate()?;
        let mut streams = RngStreams::from_seed(config.seed);
        let (agents, econ) = population::init_population(&config, &mut streams)?;
        let schedule = config.tax.resolve()?;
        let job_table = match &config.data_files.job_titles {
            Some(path) => JobTable::from_path(path)?,
            None => JobTable::bundled(),
        };
        let initial_price = econ.price;
        Ok(World {
            config,
            schedule,
            agents,
            econ,
            months: Vec::new(),
            dialogues: Vec::new(),
            initial_price,
            initial_mean_wage: initial_price,
            streams,
            policy,
            job_table,
            prev_monthly_wages: Vec::new(),
            prev_price: None,
            prev_year_mean_price: initial_price,
        })
    }

    fn assemble(
        config: SimConfig<T>,
        agents: Vec<AgentState<T>>,
        econ: EconomyState<T>,
        mut streams: RngStreams,
    ) -> Result<Self> {
        let schedule = config.tax.resolve()?;
        let policy = build_policy(&config, &schedule, &mut streams)?;
        let job_table = match &config.data_files.job_titles {
            Some(path) => JobTable::from_path(path)?,
            None => JobTable::bundled(),
        };
        let initial_price = econ.price;
        Ok(World {
            config,
            schedule,
            agents,
            econ,
            months: Vec::new(),
            dialogues: Vec::new(),
            initial_price,
            initial_mean_wage: initial_price,
            streams,
            policy,
            job_table,
            prev_monthly_wages: Vec::new(),
            prev_price: None,
            prev_year_mean_price: initial_price,
        })
    }

    pub fn policy_name(&self) -> &'static str {
        self.policy.name()
    }

    pub fn policy(&self) -> &dyn HouseholdPolicy<T> {
        self.policy.as_ref()
    }

    fn active_interventions(&self, date: econ_core::types::CalendarDate) -> Vec<String> {
        self.config
            .interventions
            .iter()
            .filter(|iv| iv.activation <= date)
            .map(|iv| iv.sentence.clone())
            .collect()
    }

    /// Execute one month and append its record.
    pub fn run_month(&mut self) -> Result<MonthRecord<T>> {
        let m = self.econ.month_index;
        let n = self.agents.len();
        let date = self.econ.calendar_date();

        // (a) annual financial step: accrue at the old rate, then update it.
        if m >= 12 && m.is_multiple_of(12) {
            finance::accrue_interest(&mut self.agents, self.econ.interest_rate);
            let stats =
                finance::annual_stats(&self.months[m - 12..m], self.prev_year_mean_price, n)?;
            self.econ.interest_rate = finance::taylor_rate(&stats, &self.config.taylor);
            self.prev_year_mean_price = stats.mean_price;
        }

        // (b) job offers for agents unemployed last month, ascending id.
        if m > 0 {
            let monthly: Vec<T> = self.agents.iter().map(|a| a.monthly_wage).collect();
            for agent in self.agents.iter_mut() {
                population::job_offer_update(
                    agent,
                    &monthly,
                    &self.job_table,
                    &mut self.streams.job_offers,
                );
            }
        }

        // (c) observations and policy decisions.
        let ctx = MonthContext {
            month_index: m,
            date,
            price: self.econ.price,
            prev_price: self.prev_price,
            interest_rate: self.econ.interest_rate,
            interventions: self.active_interventions(date),
        };
        let observations: Vec<EconObservation<T>> = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, agent)| EconObservation {
                expected_income: agent.monthly_wage,
                savings: agent.savings,
                prev_consumption: agent.realized_consumption,
                prev_tax: agent.tax_paid,
                prev_redistribution: agent.redistribution_received,
                prev_monthly_wage: (m > 0).then(|| self.prev_monthly_wages[i]),
                worked_last_month: (m > 0).then_some(agent.worked),
            })
            .collect();
        let decisions = self.policy.decide(&ctx, &self.agents, &observations)?;
        if decisions.len() != n {
            return Err(EconError::Policy(format!(
                "policy returned {} decisions for {n} agents",
                decisions.len()
            )));
        }
        for (agent, decision) in self.agents.iter_mut().zip(&decisions) {
            agent.work_propensity = decision.work_propensity;
            agent.consumption_propensity = decision.consumption_propensity;
        }

        // (d) labor resolution.
        for agent in self.agents.iter_mut() {
            agent.worked = resolve_labor(agent.work_propensity, &mut self.streams.work_sampling);
            agent.income = if agent.worked { agent.monthly_wage } else { T::zero() };
        }

        // (e) production.
        let production = markets::produce(&self.agents, &self.config.market);
        self.econ.inventory += production;
        self.econ.production_this_month = production;

        // (f) fiscal pass.
        let incomes: Vec<T> = self.agents.iter().map(|a| a.income).collect();
        let fiscal_outcome = fiscal::apply_fiscal(&incomes, &self.schedule)?;
        for (i, agent) in self.agents.iter_mut().enumerate() {
            fiscal::update_savings(
                agent,
                fiscal_outcome.post_tax_incomes[i],
                fiscal_outcome.taxes[i],
                fiscal_outcome.redistribution,
            );
        }

        // (g)-(i) demand, imbalance, matching, and the wage/price
        // adjustments feeding next month. Wages during the month are
        // captured before the adjustment; monthly wages feed next month's
        // wage-change wording.
        let wages_during_month: Vec<T> = self.agents.iter().map(|a| a.hourly_wage).collect();
        let monthly_during_month: Vec<T> = self.agents.iter().map(|a| a.monthly_wage).collect();
        let market = markets::run_market_phase(
            &mut self.agents,
            self.econ.inventory,
            self.econ.price,
            production,
            &self.config.market,
            &mut self.streams.wage_adjust,
            &mut self.streams.price_adjust,
            &mut self.streams.consumption_order,
        )?;
        let total_demand = market.total_demand;
        let imbalance = market.imbalance;
        let trading_price = market.trading_price;
        self.econ.inventory = market.end_inventory;
        self.econ.price = market.end_price;

        // (j) histories and the month record.
        let mut wage_sum = T::zero();
        for &w in &wages_during_month {
            wage_sum += w;
        }
        let employed = self.agents.iter().filter(|a| a.worked).count();
        self.econ.price_history.push(trading_price);
        self.econ.mean_wage_history.push(wage_sum / T::from_usize(n).unwrap());
        self.econ.employment_history.push(employed);
        debug_assert_eq!(self.econ.price_history.len(), m + 1);

        let record = MonthRecord {
            month_index: m,
            date,
            price: trading_price,
            interest_rate: ctx.interest_rate,
            production,
            total_demand,
            imbalance,
            employed_count: employed,
            fallback_count: self.policy.take_fallbacks(),
            agents: self
                .agents
                .iter()
                .enumerate()
                .map(|(i, agent)| econ_core::records::AgentMonthSnapshot {
                    agent_id: agent.id,
                    work_propensity: agent.work_propensity,
                    consumption_propensity: agent.consumption_propensity,
                    worked: agent.worked,
                    income: agent.income,
                    tax: agent.tax_paid,
                    redistribution: agent.redistribution_received,
                    realized_consumption: agent.realized_consumption,
                    realized_demand: agent.realized_demand,
                    savings: observations[i].savings,
                    hourly_wage: wages_during_month[i],
                })
                .collect(),
        };
        self.months.push(record.clone());
        self.prev_monthly_wages = monthly_during_month;
        self.prev_price = Some(trading_price);
        self.econ.month_index = m + 1;
        self.dialogues.extend(self.policy.drain_dialogues());

        // (k) quarterly reflection.
        if (m + 1).is_multiple_of(3) {
            self.policy.on_quarter_end(&ctx, &self.agents)?;
            self.dialogues.extend(self.policy.drain_dialogues());
        }

        Ok(record)
    }

    pub fn year_records(&self) -> Result<Vec<YearRecord<T>>> {
        metrics::build_year_records(
            &self.months,
            self.initial_price,
            self.initial_mean_wage,
            self.agents.len(),
        )
    }
}

/// Output of a completed run.
pub struct RunOutput {
    pub months: Vec<MonthRecord<f64>>,
    pub years: Vec<YearRecord<f64>>,
    pub manifest: output::RunManifest,
    pub output_dir: PathBuf,
}

#[derive(Serialize)]
struct Checkpoint<'a, T> {
    month_index: usize,
    agents: &'a [AgentState<T>],
    economy: &'a EconomyState<T>,
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Run the configured simulation to completion and persist every output
/// file. On a mid-run error the pre-month world state is checkpointed and a
/// `failed` manifest with partial outputs is flushed before the error
/// propagates.
pub fn run_simulation(config: SimConfig<f64>) -> Result<RunOutput> {
    config.validate()?;
    let dir = config.output_dir.clone();
    std::fs::create_dir_all(&dir)?;
    let started = now_unix();
    let mut world = World::new(config.clone())?;
    for _ in 0..config.num_months {
        let pre_agents = world.agents.clone();
        let pre_econ = world.econ.clone();
        if let Err(error) = world.run_month() {
            let checkpoint = Checkpoint {
                month_index: pre_econ.month_index,
                agents: &pre_agents,
                economy: &pre_econ,
            };
            let text = serde_json::to_string_pretty(&checkpoint)
                .map_err(|e| EconError::domain(format!("checkpoint serialization: {e}")))?;
            std::fs::write(output::run_file(&dir, output::CHECKPOINT_FILE), text)?;
            let _ = persist(&world, started, "failed", Some(error.to_string()));
            return Err(error);
        }
    }
    let (years, manifest) = persist(&world, started, "completed", None)?;
    Ok(RunOutput { months: world.months, years, manifest, output_dir: dir })
}

/// Compute indicators and regressions from the month records and write all
/// output files plus the manifest.
fn persist(
    world: &World<f64>,
    started: u64,
    status: &str,
    error: Option<String>,
) -> Result<(Vec<YearRecord<f64>>, output::RunManifest)> {
    let dir = &world.config.output_dir;
    let years = world.year_records()?;
    output::write_months_csv(&output::run_file(dir, output::MONTHS_FILE), &world.months)?;
    output::write_years_csv(&output::run_file(dir, output::YEARS_FILE), &years)?;
    write_analysis(dir, &world.months, &years, &world.config)?;
    output::write_dialogues_jsonl(
        &output::run_file(dir, output::DIALOGUES_FILE),
        &world.dialogues,
    )?;

    let mut files = std::collections::BTreeMap::new();
    for name in [
        output::MONTHS_FILE,
        output::YEARS_FILE,
        output::PHILLIPS_FILE,
        output::OKUN_FILE,
        output::REGRESSIONS_FILE,
        output::TABLE1_FILE,
        output::DIALOGUES_FILE,
    ] {
        let path = output::run_file(dir, name);
        if path.exists() {
            files.insert(name.to_string(), output::sha256_file(&path)?);
        }
    }
    let manifest = output::RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: status.to_string(),
        error,
        seed: world.config.seed,
        policy: world.policy_name().to_string(),
        config_hash: output::config_hash(&world.config)?,
        started_unix: started,
        finished_unix: now_unix(),
        months_completed: world.months.len(),
        fallback_total: world.months.iter().map(|m| m.fallback_count as u64).sum(),
        config: world.config.clone(),
        files,
    };
    output::write_manifest(&output::run_file(dir, output::MANIFEST_FILE), &manifest)?;
    Ok((years, manifest))
}

/// Recompute and write the derived analysis files (Phillips/Okun points,
/// per-agent regressions, significance table) from month records.
pub fn write_analysis(
    dir: &std::path::Path,
    months: &[MonthRecord<f64>],
    years: &[YearRecord<f64>],
    config: &SimConfig<f64>,
) -> Result<()> {
    let phillips = if years.len() >= 2 { metrics::phillips_points(years)? } else { Vec::new() };
    output::write_phillips_csv(&output::run_file(dir, output::PHILLIPS_FILE), &phillips)?;
    let okun = if years.len() >= 2 {
        metrics::okun_points(years)?
    } else {
        metrics::OkunPoints { points: Vec::new(), skipped: 0 }
    };
    output::write_okun_csv(&output::run_file(dir, output::OKUN_FILE), &okun)?;

    let mut results = Vec::new();
    if months.len() > 8 {
        for agent_id in 0..config.num_agents {
            let data = metrics::regression_data_from_months(months, agent_id, config.market.hours());
            let (work, consumption) = metrics::agent_regression(&data)?;
            results.push(work);
            results.push(consumption);
        }
    }
    output::write_regressions_csv(&output::run_file(dir, output::REGRESSIONS_FILE), &results)?;
    let table = metrics::significance_table(&results, 0.05);
    output::write_table1_csv(&output::run_file(dir, output::TABLE1_FILE), &table)?;
    Ok(())
}

/// Recompute all derived outputs (years, Phillips, Okun, regressions,
/// significance table) from a stored run directory.
pub fn recompute_metrics(run_dir: &std::path::Path) -> Result<Vec<YearRecord<f64>>> {
    let manifest = output::read_manifest(&output::run_file(run_dir, output::MANIFEST_FILE))?;
    let months = output::read_months_csv::<f64>(&output::run_file(run_dir, output::MONTHS_FILE))?;
    if months.is_empty() {
        return Err(EconError::domain("run has no completed months"));
    }
    // The initial price/mean wage are not part of months.csv; rebuild them
    // from the seeded population, which is deterministic given the config.
    let mut streams = RngStreams::from_seed(manifest.config.seed);
    let (_, econ) = population::init_population(&manifest.config, &mut streams)?;
    let years = metrics::build_year_records(
        &months,
        econ.price,
        econ.price,
        manifest.config.num_agents,
    )?;
    output::write_years_csv(&output::run_file(run_dir, output::YEARS_FILE), &years)?;
    write_analysis(run_dir, &months, &years, &manifest.config)?;
    Ok(years)
}
