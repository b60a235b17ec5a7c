//! Agent-population initialization: Pareto wage sampling, profile assignment
//! (age, name, city, job title by wage decile), and the initial world state.

use rand::distr::Distribution;
use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Pareto;

use crate::config::SimConfig;
use crate::data::{AgeTable, JobTable, NameList};
use crate::error::{EconError, Result};
use crate::rng::RngStreams;
use crate::scalar::{real, Real};
use crate::types::{AgentState, EconomyState};

/// City used when the name list does not carry one.
pub const DEFAULT_CITY: &str = "New York City, New York";

/// Profile data tables resolved from config (bundled unless overridden).
#[derive(Debug, Clone)]
pub struct ProfileData {
    pub ages: AgeTable,
    pub names: NameList,
    pub jobs: JobTable,
}

impl ProfileData {
    pub fn load<T: Real>(config: &SimConfig<T>) -> Result<Self> {
        let ages = match &config.data_files.ages {
            Some(path) => AgeTable::from_path(path)?,
            None => AgeTable::bundled(),
        };
        let names = match &config.data_files.names {
            Some(path) => NameList::from_path(path)?,
            None => NameList::bundled(),
        };
        let jobs = match &config.data_files.job_titles {
            Some(path) => JobTable::from_path(path)?,
            None => JobTable::bundled(),
        };
        Ok(ProfileData { ages, names, jobs })
    }
}

/// 0-based decile of agent `id`'s value among `values`, by rank with ties
/// broken by id. With fewer than 10 agents the top occupied decile is
/// min(9, rank * 10 / n).
pub fn decile_of_agent<T: Real>(values: &[T], id: usize) -> usize {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let rank = order.iter().position(|&i| i == id).unwrap();
    (rank * 10 / n).min(9)
}

/// Sample wages from the configured Pareto distribution and build the
/// population plus the initial world state.
///
/// Draw order on the profile stream is fixed: wages, ages, name permutation,
/// job titles. The initial goods price is the mean sampled hourly wage
/// accumulated in ascending agent-id order; inventory starts at 0, savings
/// at 0, and the interest rate at the natural rate.
pub fn init_population<T: Real>(
    config: &SimConfig<T>,
    streams: &mut RngStreams,
) -> Result<(Vec<AgentState<T>>, EconomyState<T>)> {
    let shape = config.wage_pareto.shape.to_f64().unwrap();
    let scale = config.wage_pareto.scale.to_f64().unwrap();
    if shape <= 0.0 || scale <= 0.0 || shape.is_nan() || scale.is_nan() {
        return Err(EconError::config("wage_pareto", "scale and shape must be > 0"));
    }
    let pareto = Pareto::new(scale, shape)
        .map_err(|e| EconError::config("wage_pareto", e.to_string()))?;
    let wages: Vec<T> = (0..config.num_agents)
        .map(|_| real(pareto.sample(&mut streams.profile_init)))
        .collect();
    build_population(config, &wages, streams)
}

/// Fixture constructor: build the population from explicit hourly wages.
/// Shares every profile-assignment step with [`init_population`].
pub fn population_from_wages<T: Real>(
    config: &SimConfig<T>,
    wages: &[T],
    streams: &mut RngStreams,
) -> Result<(Vec<AgentState<T>>, EconomyState<T>)> {
    if wages.len() != config.num_agents {
        return Err(EconError::domain(format!(
            "{} wages provided for {} agents",
            wages.len(),
            config.num_agents
        )));
    }
    build_population(config, wages, streams)
}

fn build_population<T: Real>(
    config: &SimConfig<T>,
    wages: &[T],
    streams: &mut RngStreams,
) -> Result<(Vec<AgentState<T>>, EconomyState<T>)> {
    let n = config.num_agents;
    let data = ProfileData::load(config)?;
    let rng = &mut streams.profile_init;

    let age_index = WeightedIndex::new(data.ages.weights())
        .map_err(|e| EconError::domain(format!("age table weights: {e}")))?;
    let ages: Vec<u32> = (0..n).map(|_| data.ages.ages()[age_index.sample(rng)]).collect();

    let mut name_order: Vec<usize> = (0..data.names.entries().len()).collect();
    name_order.shuffle(rng);

    let hours = config.market.hours();
    let monthly: Vec<T> = wages.iter().map(|&w| w * hours).collect();

    let mut agents = Vec::with_capacity(n);
    for id in 0..n {
        let entry = &data.names.entries()[name_order[id % name_order.len()]];
        let decile = decile_of_agent(&monthly, id);
        let titles = data.jobs.titles(decile);
        let title = titles[rng.random_range(0..titles.len())].clone();
        agents.push(AgentState::new(
            id,
            entry.name.clone(),
            ages[id],
            entry.city.clone().unwrap_or_else(|| DEFAULT_CITY.to_string()),
            title,
            wages[id],
            hours,
        ));
    }

    let mut wage_sum = T::zero();
    for agent in &agents {
        wage_sum += agent.hourly_wage;
    }
    let initial_price = wage_sum / T::from_usize(n).unwrap();
    let economy = EconomyState::new(initial_price, config.taylor.natural_rate, config.start_date);
    Ok((agents, economy))
}

/// Present a job offer to an agent who was unemployed last month: the title
/// is resampled from the agent's current monthly-wage decile, the wage is
/// untouched. Agents who worked are left unchanged and consume no draw.
pub fn job_offer_update<T: Real>(
    agent: &mut AgentState<T>,
    monthly_wages: &[T],
    table: &JobTable,
    rng: &mut impl Rng,
) {
    if agent.worked {
        return;
    }
    let decile = decile_of_agent(monthly_wages, agent.id);
    let titles = table.titles(decile);
    agent.job_title = titles[rng.random_range(0..titles.len())].clone();
}
