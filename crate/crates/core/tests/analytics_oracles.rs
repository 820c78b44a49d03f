use piggyback::analytics::{p_replicated_email, p_replicated_news, tr_email_analytic};
use piggyback::email::{self, EmailScenario, EmailTrafficModel};
use piggyback::model::{make_repository, RepositoryProfile};
use piggyback::news::{self, NetworkProfile, NewsReceiverPolicy, SenderPolicy};

fn one_domain(daily: f64) -> EmailTrafficModel {
    EmailTrafficModel { constant: Some(daily), ..EmailTrafficModel::new(0.0, 1.6, 1.0, 1) }
}

#[test]
fn email_probability_reaches_one_on_completion_day() {
    let profile = RepositoryProfile::new(1000, 100, 0, 0);
    for daily in [37.3, 50.0, 99.9, 333.4] {
        let repo = make_repository(profile, 1).unwrap();
        let scenario = EmailScenario { include_rank_one: true, ..EmailScenario::new(one_domain(daily), true, 1) };
        let out = email::run_scenario(repo, &scenario, 100).unwrap();
        let done = out.completion_day(1).unwrap();
        let crossed = (1..).find(|&d| p_replicated_email(daily, d, 1000, 0).unwrap().raw >= 1.0).unwrap();
        assert_eq!(done, crossed, "q = {daily}");
    }
}

#[test]
fn no_history_total_matches_monte_carlo() {
    let profile = RepositoryProfile::new(1000, 100, 0, 0);
    let model = one_domain(50.0);
    let days = 60;
    let analytic = tr_email_analytic(&model, &profile, 1, days, false).unwrap();
    let mut total = 0.0;
    for seed in 0..100 {
        let repo = make_repository(profile, 1).unwrap();
        let scenario = EmailScenario { include_rank_one: true, ..EmailScenario::new(model, false, seed) };
        let out = email::run_scenario(repo, &scenario, days).unwrap();
        total += out.rows.last().unwrap().unique_received as f64;
    }
    let mean = total / 100.0;
    assert!((mean - analytic).abs() / analytic < 0.02, "simulated {mean} vs expected {analytic}");
}

#[test]
fn news_probability_equals_simulated_volume_in_steady_state() {
    // Active profile with its 25% downtime: q = 9112.5, q * N_ttl is whole
    let profile = RepositoryProfile::new(100_000, 1_000_000, 100, 400);
    let net = NetworkProfile::new(1.62e10, 0.25);
    let repo = make_repository(profile, 1).unwrap();
    let out = news::run_scenario(repo, SenderPolicy::continuous(), NewsReceiverPolicy::new(30), net, 2000).unwrap();
    for row in &out.rows[30..] {
        let p = p_replicated_news(out.rate, row.day, 30, 100_000, 100).unwrap();
        assert!((p.raw - row.volume_copies).abs() < 1e-12, "day {}: {} vs {}", row.day, p.raw, row.volume_copies);
    }
    let last = p_replicated_news(out.rate, 2000, 30, 100_000, 100).unwrap();
    assert!(last.value < 1.0 && !last.clamped);
}
