use std::collections::BTreeMap;
use std::fmt;

use super::config::preset;
use super::CliError;
use crate::analytics::{
    cycle_durations, p_replicated_email, p_replicated_news, power_law_fit, records_on_server_analytic,
    tr_email_analytic, tr_news_analytic, NewsAnalyticInputs,
};
use crate::email::{derive_c, h_no_history, load_domain_fixture, builtin_domain_table, q_email, zeta, EmailTrafficModel};
use crate::model::RepositoryProfile;
use crate::news::{q_news, t_news, NetworkProfile, NewsReceiverPolicy, PolicyMode, SenderPolicy, Transfer};
use crate::units::{parse_bandwidth, parse_bytes};

pub const EQUATIONS: [&str; 11] =
    ["zeta", "c", "q_email", "t_news", "q_news", "h", "tr_news", "tr_email", "p_news", "p_email", "fit"];

/// A calculator result: the headline value plus the formula with numbers in.
#[derive(Debug, Clone, PartialEq)]
pub struct CalcResult {
    pub equation: &'static str,
    pub value: f64,
    pub lines: Vec<String>,
}

impl fmt::Display for CalcResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `key=value` arguments; every key must be consumed.
struct Params {
    values: BTreeMap<String, String>,
    used: Vec<String>,
}

impl Params {
    fn parse(args: &[String]) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for a in args {
            let (k, v) = a
                .split_once('=')
                .ok_or_else(|| CliError::invalid("calc", format!("expected key=value, got {a:?}")))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { values, used: Vec::new() })
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        self.used.push(key.to_string());
        self.values.get(key).cloned()
    }

    fn parsed<T>(&mut self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>) -> Result<T, CliError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => parse(&v).ok_or_else(|| CliError::invalid("calc", format!("cannot parse {key}={v}"))),
        }
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        self.parsed(key, default, |v| v.replace('_', "").parse().ok())
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.parsed(key, None, |v| v.replace('_', "").parse().ok().map(Some))
    }

    fn u64(&mut self, key: &str, default: u64) -> Result<u64, CliError> {
        self.parsed(key, default, |v| v.replace('_', "").parse().ok())
    }

    fn bytes(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        self.parsed(key, default, |v| parse_bytes(v).ok())
    }

    fn bandwidth(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        self.parsed(key, default, |v| parse_bandwidth(v).ok())
    }

    fn flag(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        self.parsed(key, default, |v| match v.to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" | "on" => Some(true),
            "0" | "false" | "no" | "off" => Some(false),
            _ => None,
        })
    }

    fn finish(self) -> Result<(), CliError> {
        let unknown: Vec<&String> = self.values.keys().filter(|k| !self.used.contains(k)).collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::invalid("calc", format!("unknown parameter(s): {unknown:?}")))
        }
    }
}

/// Repository, network and policy values shared by several equations,
/// starting from a preset (`preset=`, default active). The preset's downtime
/// only applies when the preset is named explicitly.
struct Common {
    profile: RepositoryProfile,
    bandwidth: f64,
    downtime: f64,
    n_ttl: u64,
    sleep: u64,
}

fn common(p: &mut Params) -> Result<Common, CliError> {
    let named = p.raw("preset");
    let explicit = named.is_some();
    let name = named.unwrap_or_else(|| "active".into());
    let base = preset(&name).ok_or_else(|| CliError::invalid("preset", format!("unknown preset {name:?}")))?;
    let prof = base.profile();
    let profile = RepositoryProfile::new(
        p.u64("R", prof.record_count)?,
        p.bytes("size", prof.mean_record_size as f64)?.round() as u64,
        p.u64("Ra", prof.adds_per_day)?,
        p.u64("Ru", prof.updates_per_day)?,
    );
    Ok(Common {
        profile,
        bandwidth: p.bandwidth("bw", base.network.bandwidth.0)?,
        downtime: p.f64("downtime", if explicit { base.network.downtime_fraction } else { 0.0 })?,
        n_ttl: p.u64("ttl", base.news.n_ttl)?,
        sleep: p.u64("S", base.news.sleep_days)?,
    })
}

fn transfer(p: &mut Params, size: u64) -> Result<Transfer, CliError> {
    match p.raw("mode").as_deref().map(str::to_ascii_lowercase).as_deref() {
        None | Some("full") | Some("full-content") => Ok(Transfer::FullContent),
        Some("by-reference") | Some("reference") | Some("by_reference") => Ok(Transfer::ByReference { metadata_size: size }),
        Some(m) => Err(CliError::invalid("mode", format!("expected full or by-reference, got {m:?}"))),
    }
}

fn email_model(p: &mut Params) -> Result<EmailTrafficModel, CliError> {
    let volume = p.f64("V", 16866.0)?;
    let b = p.f64("b", 1.6)?;
    let g = p.f64("G", 1.0)?;
    let c = p.opt_f64("c")?;
    let model = EmailTrafficModel { constant: c, ..EmailTrafficModel::new(volume, b, g, 1) };
    model.validate()?;
    Ok(model)
}

/// Evaluates one named equation.
pub fn calc(equation: &str, args: &[String]) -> Result<CalcResult, CliError> {
    let mut p = Params::parse(args)?;
    let eq = EQUATIONS
        .iter()
        .copied()
        .find(|e| e.eq_ignore_ascii_case(equation))
        .ok_or_else(|| CliError::UnknownEquation { name: equation.to_string(), known: EQUATIONS.join(", ") })?;
    let (value, lines) = match eq {
        "zeta" => {
            let b = p.f64("b", 1.6)?;
            let tol = p.f64("tol", crate::email::ZETA_TOLERANCE)?;
            let z = zeta(b, tol)?;
            (z, vec![format!("zeta({b}) = sum k^-{b} = {z:.10}")])
        }
        "c" => {
            let v = p.f64("V", 16866.0)?;
            let b = p.f64("b", 1.6)?;
            let c = derive_c(v, b)?;
            let z = zeta(b, crate::email::ZETA_TOLERANCE)?;
            (c, vec![format!("c = V / zeta(b) = {v} / {z:.6} = {c:.4}")])
        }
        "q_email" => {
            let rank = p.u64("rank", 3)? as u32;
            let model = email_model(&mut p)?;
            let c = model.c()?;
            let q = q_email(&model, rank)?;
            (q, vec![format!("Q_email = c * rank^-b * G = {c:.4} * {rank}^-{} * {} = {q:.4} records/day", model.exponent, model.granularity)])
        }
        "q_news" | "t_news" => {
            let c = common(&mut p)?;
            let t = transfer(&mut p, c.profile.mean_record_size)?;
            let net = NetworkProfile::new(c.bandwidth, c.downtime);
            let q = q_news(&c.profile, &net, t)?;
            let nu = net.effective_bandwidth();
            let q_line = match t {
                Transfer::FullContent => format!(
                    "Q_news = nu / (size * 4/3) = {nu:.6e} / ({} * 4/3) = {q:.4} records/day",
                    c.profile.mean_record_size
                ),
                Transfer::ByReference { metadata_size } => {
                    format!("Q_news = nu / metadata = {nu:.6e} / {metadata_size} = {q:.4} records/day")
                }
            };
            if eq == "q_news" {
                (q, vec![q_line])
            } else {
                let days = t_news(&c.profile, &net, t)?;
                let fits = if days < c.n_ttl as f64 { "fits within" } else { "exceeds" };
                (
                    days,
                    vec![
                        q_line,
                        format!("t_news = R / Q_news = {} / {q:.4} = {days:.4} days", c.profile.record_count),
                        format!("baseline {fits} N_ttl = {} days", c.n_ttl),
                    ],
                )
            }
        }
        "h" => {
            let c = common(&mut p)?;
            let day = p.u64("D", 30)?;
            let q = match p.opt_f64("q")? {
                Some(q) => q,
                None => {
                    let rank = p.u64("rank", 3)? as u32;
                    q_email(&email_model(&mut p)?, rank)?
                }
            };
            let h = h_no_history(day, &c.profile, q)?;
            let mut lines = vec![format!(
                "h({day}) = prod_(d=2..{day}) (P_d - q) / P_d, P_d = {} + {} d, q = {q:.4}: {:.6}",
                c.profile.record_count,
                c.profile.changes_per_day(),
                h.value
            )];
            if h.clamped {
                lines.push("clamped: q reached the pool size".into());
            }
            (h.value, lines)
        }
        "tr_news" => {
            let c = common(&mut p)?;
            let day = p.u64("D", 2000)?;
            let policy: PolicyMode = p.raw("policy").unwrap_or_else(|| "cyclic".into()).parse()?;
            let t = transfer(&mut p, c.profile.mean_record_size)?;
            let mut sender = match policy {
                PolicyMode::SingleBaseline => SenderPolicy::single(),
                PolicyMode::CyclicBaseline => SenderPolicy::cyclic(c.sleep),
                PolicyMode::ContinuousBaseline => SenderPolicy::continuous(),
            };
            sender.copies_target = p.u64("copies", sender.copies_target as u64)? as u32;
            sender.sleep_updates = p.flag("sleep_updates", true)?;
            let q = q_news(&c.profile, &NetworkProfile::new(c.bandwidth, c.downtime), t)?;
            let inputs = NewsAnalyticInputs::from_policy(c.profile, q, &sender, &NewsReceiverPolicy::new(c.n_ttl));
            let tr = tr_news_analytic(&inputs, day)?;
            let on_server = records_on_server_analytic(&inputs, day)?;
            let w = cycle_durations(&inputs, day as f64);
            let shown: Vec<String> = w.iter().take(5).map(|x| format!("{x:.3}")).collect();
            (
                tr as f64,
                vec![
                    format!("Q_news = {q:.4} records/day"),
                    format!("TR_news({day}) = {tr} records"),
                    format!("TR_news({day}) - TR_news({}) = {on_server} records on the server", day.saturating_sub(c.n_ttl)),
                    format!("MaxK = {} whole cycles, W = [{}{}]", w.len(), shown.join(", "), if w.len() > 5 { ", ..." } else { "" }),
                ],
            )
        }
        "tr_email" => {
            let c = common(&mut p)?;
            let day = p.u64("D", 2000)?;
            let rank = p.u64("rank", 3)? as u32;
            let history = p.flag("history", true)?;
            let model = email_model(&mut p)?;
            let tr = tr_email_analytic(&model, &c.profile, rank, day, history)?;
            let h = if history { "1".to_string() } else { "h(d)".to_string() };
            (tr, vec![format!("TR_email = sum_(d=1..{day}) Q_email * {h} = {tr:.2} records to rank {rank}")])
        }
        "p_news" => {
            let c = common(&mut p)?;
            let day = p.u64("D", 2000)?;
            let q = match p.opt_f64("q")? {
                Some(q) => q,
                None => q_news(&c.profile, &NetworkProfile::new(c.bandwidth, c.downtime), Transfer::FullContent)?,
            };
            let pr = p_replicated_news(q, day, c.n_ttl, c.profile.record_count, c.profile.adds_per_day)?;
            let clamp = if pr.clamped { format!(" (raw {:.6}, clamped)", pr.raw) } else { String::new() };
            (
                pr.value,
                vec![format!(
                    "P(r) = (Q D - Q max(D - N_ttl, 0)) / (R + D R_a) = ({q:.4} * {day} - {q:.4} * {}) / ({} + {day} * {}) = {:.6}{clamp}",
                    day.saturating_sub(c.n_ttl),
                    c.profile.record_count,
                    c.profile.adds_per_day,
                    pr.value
                )],
            )
        }
        "p_email" => {
            let c = common(&mut p)?;
            let day = p.u64("D", 1)?;
            let q = match p.opt_f64("q")? {
                Some(q) => q,
                None => {
                    let rank = p.u64("rank", 3)? as u32;
                    q_email(&email_model(&mut p)?, rank)?
                }
            };
            let pr = p_replicated_email(q, day, c.profile.record_count, c.profile.adds_per_day)?;
            let clamp = if pr.clamped { format!(" (raw {:.6}, clamped)", pr.raw) } else { String::new() };
            (
                pr.value,
                vec![format!(
                    "P(r) = Q D / (R + D R_a) = {q:.4} * {day} / ({} + {day} * {}) = {:.6}{clamp}",
                    c.profile.record_count, c.profile.adds_per_day, pr.value
                )],
            )
        }
        "fit" => {
            let min_rank = p.u64("min_rank", 2)? as u32;
            let period = p.f64("period", crate::email::FIXTURE_PERIOD_DAYS)?;
            let domains = match p.raw("file") {
                Some(path) => load_domain_fixture(std::path::Path::new(&path), period)?,
                None => builtin_domain_table(),
            };
            let points: Vec<(u32, f64)> =
                domains.iter().filter(|d| d.rank >= min_rank).map(|d| (d.rank, d.daily_emails)).collect();
            let fit = power_law_fit(&points)?;
            (
                fit.b,
                vec![
                    format!("fitted V = c * rank^-b over {} domains", points.len()),
                    format!("c = {:.4}", fit.c),
                    format!("b = {:.6}", fit.b),
                    format!("residual = {:.6}", fit.residual),
                ],
            )
        }
        _ => unreachable!("equation list is exhaustive"),
    };
    p.finish()?;
    Ok(CalcResult { equation: eq, value, lines })
}
