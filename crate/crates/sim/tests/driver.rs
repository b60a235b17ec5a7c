//! Driver-level integration tests: hand-traced months, money conservation,
//! determinism, annual financial timing, interventions, and failure
//! checkpointing.

use econ_core::config::{Intervention, LlmClientKind, PolicyKind, SimConfig};
use econ_core::types::{CalendarDate, PriceAdjustTiming};
use econ_core::{finance, records::MonthRecord};
use econ_sim::{run_simulation, World};
use std::io::Write;

fn base_config(n: usize, months: usize, seed: u64) -> SimConfig<f64> {
    SimConfig { num_agents: n, num_months: months, seed, ..SimConfig::default() }
}

fn scripted(n: usize, work: f64, consumption: f64, seed: u64) -> SimConfig<f64> {
    let mut cfg = base_config(n, 12, seed);
    cfg.policy.kind = PolicyKind::Scripted;
    cfg.policy.scripted_work = work;
    cfg.policy.scripted_consumption = consumption;
    cfg
}

#[test]
fn one_agent_full_work_no_consumption_month_trace() {
    let cfg = scripted(1, 1.0, 0.0, 7);
    let mut world = World::with_wages(cfg, &[10.0]).unwrap();
    let record = world.run_month().unwrap();

    assert!(record.agents[0].worked);
    assert_eq!(record.production, 168.0);
    assert_eq!(record.total_demand, 0.0);
    assert_eq!(record.imbalance, -1.0);
    assert_eq!(world.econ.inventory, 168.0);
    // Single agent: the tax comes straight back, savings = the monthly wage.
    assert!((world.agents[0].savings - 1680.0).abs() < 1e-9);
    // Decision-time savings snapshot precedes the month's income.
    assert_eq!(record.agents[0].savings, 0.0);
    // Price drawn downward within [P(1 - alpha_P), P].
    assert_eq!(record.price, 10.0);
    assert!(world.econ.price > 9.0 && world.econ.price < 10.0, "{}", world.econ.price);
    // Wage drawn downward within [w(1 - alpha_w), w].
    assert!(world.agents[0].hourly_wage > 9.5 && world.agents[0].hourly_wage < 10.0);
}

#[test]
fn one_agent_inert_world_changes_nothing() {
    let cfg = scripted(1, 0.0, 1.0, 7);
    let mut world = World::with_wages(cfg, &[10.0]).unwrap();
    let record = world.run_month().unwrap();

    assert!(!record.agents[0].worked);
    assert_eq!(record.production, 0.0);
    assert_eq!(record.total_demand, 0.0);
    assert_eq!(record.imbalance, 0.0);
    assert_eq!(world.agents[0].savings, 0.0);
    assert_eq!(world.econ.price, 10.0);
    assert_eq!(world.agents[0].hourly_wage, 10.0);
    assert_eq!(world.econ.inventory, 0.0);
}

#[test]
fn seeded_two_agent_len_month_matches_golden() {
    let mut cfg = base_config(2, 12, 42);
    cfg.policy.kind = PolicyKind::Len;
    let mut world = World::with_wages(cfg, &[10.0, 20.0]).unwrap();
    let record = world.run_month().unwrap();
    let rendered = serde_json::to_string_pretty(&record).unwrap();

    let golden_path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden/len_2agent_month0.json");
    if std::env::var("ECON_UPDATE_GOLDEN").is_ok() {
        std::fs::write(&golden_path, rendered.as_bytes()).unwrap();
        return;
    }
    let golden = std::fs::read_to_string(&golden_path).expect(
        "golden file missing; regenerate with ECON_UPDATE_GOLDEN=1 cargo test -p econ-sim",
    );
    let golden_record: MonthRecord<f64> = serde_json::from_str(&golden).unwrap();
    assert_eq!(record, golden_record);
}

#[test]
fn per_agent_and_aggregate_money_conservation() {
    let mut cfg = base_config(20, 60, 11);
    cfg.policy.kind = PolicyKind::Len;
    let mut world = World::new(cfg).unwrap();
    for _ in 0..60 {
        world.run_month().unwrap();
    }
    let months = &world.months;
    for m in 1..months.len() {
        let accrual = if m % 12 == 0 { 1.0 + months[m - 1].interest_rate } else { 1.0 };
        let mut lhs_total = 0.0;
        let mut rhs_total = 0.0;
        for agent in 0..20 {
            let prev = &months[m - 1].agents[agent];
            let post_tax = prev.income - prev.tax + prev.redistribution;
            let expected = (prev.savings + post_tax - prev.realized_consumption) * accrual;
            let actual = months[m].agents[agent].savings;
            assert!(
                (actual - expected).abs() <= 1e-9 * expected.abs().max(1.0),
                "month {m} agent {agent}: {actual} vs {expected}"
            );
            lhs_total += actual;
            rhs_total += expected;
        }
        assert!((lhs_total - rhs_total).abs() <= 1e-6 * rhs_total.abs().max(1.0));
    }
}

#[test]
fn identical_config_and_seed_replays_identically() {
    let run = |seed: u64| {
        let mut cfg = base_config(10, 24, seed);
        cfg.policy.kind = PolicyKind::Cats;
        let mut world = World::new(cfg).unwrap();
        for _ in 0..24 {
            world.run_month().unwrap();
        }
        world.months
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn twelve_month_run_never_updates_the_rate() {
    let mut cfg = base_config(10, 12, 3);
    cfg.policy.kind = PolicyKind::Len;
    cfg.output_dir = tempfile::tempdir().unwrap().keep();
    let output = run_simulation(cfg).unwrap();
    assert_eq!(output.years.len(), 1);
    for month in &output.months {
        assert_eq!(month.interest_rate, 0.01);
    }
}

#[test]
fn taylor_update_fires_at_month_thirteen_with_bootstrap_baseline() {
    let mut cfg = base_config(10, 24, 3);
    cfg.policy.kind = PolicyKind::Len;
    let mut world = World::new(cfg).unwrap();
    let initial_price = world.initial_price;
    for _ in 0..24 {
        world.run_month().unwrap();
    }
    for m in 0..12 {
        assert_eq!(world.months[m].interest_rate, 0.01);
    }
    let stats = finance::annual_stats(&world.months[0..12], initial_price, 10).unwrap();
    let expected = finance::taylor_rate(&stats, &world.config.taylor);
    assert_eq!(world.months[12].interest_rate, expected);
    // Interest accrues at the old rate before the update: decision savings in
    // month 12 equal month 11's end-of-month savings times (1 + old rate).
    let prev = &world.months[11].agents[0];
    let end_of_11 = prev.savings + (prev.income - prev.tax + prev.redistribution)
        - prev.realized_consumption;
    let expected_dec = end_of_11 * (1.0 + world.months[11].interest_rate);
    let actual_dec = world.months[12].agents[0].savings;
    assert!((actual_dec - expected_dec).abs() <= 1e-9 * expected_dec.abs().max(1.0));
}

#[test]
fn interventions_enter_prompts_from_activation_date() {
    let covid = "In response to the large-scale outbreak of COVID-19 in the United States, the federal government has declared a national emergency since March 2020.";
    let mut cfg = base_config(3, 24, 9);
    cfg.start_date = CalendarDate::new(2019, 1).unwrap();
    cfg.policy.kind = PolicyKind::Llm;
    cfg.policy.llm.client = LlmClientKind::EconRational;
    cfg.interventions = vec![Intervention {
        activation: CalendarDate::new(2020, 3).unwrap(),
        sentence: covid.to_string(),
    }];
    let mut world = World::new(cfg).unwrap();
    for _ in 0..24 {
        world.run_month().unwrap();
    }
    // 2020-03 is month index 14 from a 2019-01 start.
    for record in world.dialogues.iter().filter(|d| d.kind == "decision") {
        let has = record.prompt.contains("declared a national emergency");
        assert_eq!(has, record.month_index >= 14, "month {}", record.month_index);
    }
}

#[test]
fn before_matching_price_timing_respects_bounds() {
    let mut cfg = base_config(5, 24, 13);
    cfg.policy.kind = PolicyKind::Len;
    cfg.market.price_adjust_timing = PriceAdjustTiming::BeforeMatching;
    let mut world = World::new(cfg).unwrap();
    let initial_price = world.initial_price;
    for _ in 0..24 {
        world.run_month().unwrap();
    }
    let mut prev_price = initial_price;
    for month in &world.months {
        let rel = (month.price - prev_price) / prev_price;
        assert!(
            rel.abs() <= 0.10 * month.imbalance.abs() + 1e-12,
            "month {}: {rel} vs {}",
            month.month_index,
            month.imbalance
        );
        assert!(world.econ.inventory >= 0.0);
        prev_price = month.price;
    }
}

#[test]
fn failed_month_checkpoints_and_marks_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let script_path = dir.path().join("script.jsonl");
    let mut script = std::fs::File::create(&script_path).unwrap();
    for agent in 0..2 {
        writeln!(
            script,
            "{{\"agent_id\": {agent}, \"month\": 0, \"response\": \"{{\\\"work\\\": 1, \\\"consumption\\\": 0.5}}\"}}"
        )
        .unwrap();
    }
    drop(script);

    let mut cfg = base_config(2, 12, 21);
    cfg.policy.kind = PolicyKind::Llm;
    cfg.policy.llm.client = LlmClientKind::Scripted;
    cfg.policy.llm.script_path = Some(script_path);
    cfg.output_dir = dir.path().join("out");
    let err = match run_simulation(cfg) {
        Err(e) => e,
        Ok(_) => panic!("run should abort on the missing script entry"),
    };
    assert!(err.to_string().contains("no response for agent"), "{err}");

    let manifest =
        econ_sim::output::read_manifest(&dir.path().join("out/manifest.json")).unwrap();
    assert_eq!(manifest.status, "failed");
    assert_eq!(manifest.months_completed, 1);
    assert!(manifest.error.is_some());
    let checkpoint = std::fs::read_to_string(dir.path().join("out/checkpoint.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&checkpoint).unwrap();
    assert_eq!(value["month_index"], 1);
    assert_eq!(value["agents"].as_array().unwrap().len(), 2);
    let months =
        econ_sim::output::read_months_csv::<f64>(&dir.path().join("out/months.csv")).unwrap();
    assert_eq!(months.len(), 1);
}

#[test]
fn unparseable_responses_fall_back_and_are_counted() {
    let dir = tempfile::tempdir().unwrap();
    let script_path = dir.path().join("script.jsonl");
    let mut script = std::fs::File::create(&script_path).unwrap();
    // Month 0 parses; month 1 is garbage; month 2 parses again.
    let entries = [
        (0usize, r#"{\"work\": 0.7, \"consumption\": 0.3}"#),
        (1, "no decision here"),
        (2, r#"{\"work\": 0.9, \"consumption\": 0.1}"#),
    ];
    for (month, response) in entries {
        writeln!(script, r#"{{"agent_id": 0, "month": {month}, "response": "{response}"}}"#)
            .unwrap();
    }
    for month in 3..12 {
        writeln!(
            script,
            r#"{{"agent_id": 0, "month": {month}, "response": "{{\"work\": 0.5, \"consumption\": 0.5}}"}}"#
        )
        .unwrap();
    }
    drop(script);

    let mut cfg = base_config(1, 12, 33);
    cfg.policy.kind = PolicyKind::Llm;
    cfg.policy.llm.client = LlmClientKind::Scripted;
    cfg.policy.llm.script_path = Some(script_path);
    cfg.policy.llm.parse_retries = 2;
    let mut world = World::with_wages(cfg, &[10.0]).unwrap();
    for _ in 0..12 {
        world.run_month().unwrap();
    }
    let months = &world.months;
    assert_eq!(months[0].fallback_count, 0);
    assert_eq!(months[0].agents[0].work_propensity, 0.7);
    // Month 1 falls back to the previous month's decision and is counted.
    assert_eq!(months[1].fallback_count, 1);
    assert_eq!(months[1].agents[0].work_propensity, 0.7);
    assert_eq!(months[1].agents[0].consumption_propensity, 0.3);
    assert_eq!(months[2].fallback_count, 0);
    assert_eq!(months[2].agents[0].work_propensity, 0.9);
    // Each failed parse re-asks: 1 + 2 retries in month 1.
    let month1_chats =
        world.dialogues.iter().filter(|d| d.month_index == 1 && d.kind == "decision").count();
    assert_eq!(month1_chats, 3);
    let manifest_total: u32 = months.iter().map(|m| m.fallback_count).sum();
    assert_eq!(manifest_total, 1);
}

#[test]
fn chat_parallelism_does_not_change_results() {
    let run = |parallelism: usize| {
        let mut cfg = base_config(10, 24, 17);
        cfg.policy.kind = PolicyKind::Llm;
        cfg.policy.llm.client = LlmClientKind::EconRational;
        cfg.policy.llm.parallelism = parallelism;
        let mut world = World::new(cfg).unwrap();
        for _ in 0..24 {
            world.run_month().unwrap();
        }
        world.months
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn histories_track_completed_months() {
    let mut cfg = base_config(4, 12, 2);
    cfg.policy.kind = PolicyKind::Composite;
    let mut world = World::new(cfg).unwrap();
    for expected in 1..=12usize {
        world.run_month().unwrap();
        assert_eq!(world.econ.month_index, expected);
        assert_eq!(world.econ.price_history.len(), expected);
        assert_eq!(world.econ.mean_wage_history.len(), expected);
        assert_eq!(world.econ.employment_history.len(), expected);
    }
    assert_eq!(world.econ.calendar_date(), CalendarDate::new(2002, 1).unwrap());
}
