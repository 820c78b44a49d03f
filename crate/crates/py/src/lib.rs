//! Python bindings for the piggyback replication models.

use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use piggyback::analytics::{self, NewsAnalyticInputs};
use piggyback::cli::{self, CodecFormat, ScenarioConfig};
use piggyback::codec::{self, ArchivalMessage, EmailMessage, LineLimits, NewsArticle, NewsOptions};
use piggyback::email::{self, EmailTrafficModel};
use piggyback::news::{self, NetworkProfile, Transfer};
use piggyback::Record;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn harvest_time(iso: Option<&str>) -> PyResult<DateTime<Utc>> {
    match iso {
        Some(s) => DateTime::parse_from_rfc3339(s).map(|t| t.with_timezone(&Utc)).map_err(err),
        None => Ok(Utc.with_ymd_and_hms(2006, 5, 1, 0, 0, 0).unwrap()),
    }
}

#[pyclass(name = "RepositoryProfile", from_py_object)]
#[derive(Clone, Copy)]
struct PyProfile {
    inner: piggyback::RepositoryProfile,
}

#[pymethods]
impl PyProfile {
    #[new]
    #[pyo3(signature = (record_count, mean_record_size, adds_per_day=0, updates_per_day=0))]
    fn new(record_count: u64, mean_record_size: u64, adds_per_day: u64, updates_per_day: u64) -> PyResult<Self> {
        let inner = piggyback::RepositoryProfile::new(record_count, mean_record_size, adds_per_day, updates_per_day);
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn record_count(&self) -> u64 {
        self.inner.record_count
    }
    #[getter]
    fn mean_record_size(&self) -> u64 {
        self.inner.mean_record_size
    }
    #[getter]
    fn adds_per_day(&self) -> u64 {
        self.inner.adds_per_day
    }
    #[getter]
    fn updates_per_day(&self) -> u64 {
        self.inner.updates_per_day
    }

    fn size_on_day(&self, day: u64) -> u64 {
        self.inner.size_on_day(day)
    }

    fn __repr__(&self) -> String {
        let p = self.inner;
        format!(
            "RepositoryProfile(record_count={}, mean_record_size={}, adds_per_day={}, updates_per_day={})",
            p.record_count, p.mean_record_size, p.adds_per_day, p.updates_per_day
        )
    }
}

/// A scenario loaded from a preset name or a TOML file.
#[pyclass(name = "Scenario")]
struct PyScenario {
    config: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        Ok(Self { config: cli::load_scenario(spec).map_err(err)? })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self { config: cli::parse_scenario(text).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.config.name.clone()
    }
    #[getter]
    fn transport(&self) -> String {
        format!("{:?}", self.config.transport).to_lowercase()
    }
    #[setter]
    fn set_transport(&mut self, value: &str) -> PyResult<()> {
        self.config.transport = value.parse().map_err(err)?;
        Ok(())
    }
    #[getter]
    fn days(&self) -> u64 {
        self.config.days
    }
    #[setter]
    fn set_days(&mut self, days: u64) {
        self.config.days = days;
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.config.seed
    }
    #[setter]
    fn set_seed(&mut self, seed: u64) {
        self.config.seed = seed;
    }
    #[getter]
    fn profile(&self) -> PyProfile {
        PyProfile { inner: self.config.profile() }
    }

    /// Runs the simulation, releasing the GIL meanwhile.
    fn run(&self, py: Python<'_>) -> PyResult<PyRunResult> {
        let config = self.config.clone();
        let out = py.detach(move || cli::run(&config)).map_err(err)?;
        Ok(PyRunResult { out })
    }
}

#[pyclass(name = "RunResult")]
struct PyRunResult {
    out: cli::RunOutput,
}

#[pymethods]
impl PyRunResult {
    /// Series labels, e.g. `news-cyclic` or `email-history`.
    fn labels(&self) -> Vec<String> {
        self.out.series.iter().map(|(l, _)| l.clone()).collect()
    }

    fn summary_json(&self) -> String {
        self.out.summary.to_json()
    }

    fn csv(&self, label: &str) -> PyResult<String> {
        self.out
            .series
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s.to_csv_string())
            .ok_or_else(|| PyValueError::new_err(format!("no series named {label}")))
    }

    fn write(&self, dir: &str) -> PyResult<Vec<String>> {
        let files = cli::write_outputs(Path::new(dir), &self.out).map_err(err)?;
        Ok(files.iter().map(|p| p.display().to_string()).collect())
    }
}

#[pyfunction]
fn preset_names() -> Vec<&'static str> {
    cli::preset_names().collect()
}

/// Evaluates one calculator equation; params are `key=value` strings.
#[pyfunction]
#[pyo3(signature = (equation, params=Vec::new()))]
fn calc(equation: &str, params: Vec<String>) -> PyResult<(f64, String)> {
    let r = cli::calc(equation, &params).map_err(err)?;
    Ok((r.value, r.to_string()))
}

#[pyfunction]
#[pyo3(signature = (b, tolerance=email::ZETA_TOLERANCE))]
fn zeta(b: f64, tolerance: f64) -> PyResult<f64> {
    email::zeta(b, tolerance).map_err(err)
}

#[pyfunction]
fn derive_c(volume: f64, b: f64) -> PyResult<f64> {
    email::derive_c(volume, b).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (rank, total_volume=16866.0, exponent=1.6, granularity=1.0, constant=None))]
fn q_email(rank: u32, total_volume: f64, exponent: f64, granularity: f64, constant: Option<f64>) -> PyResult<f64> {
    let model = EmailTrafficModel { constant, ..EmailTrafficModel::new(total_volume, exponent, granularity, rank.max(1)) };
    email::q_email(&model, rank).map_err(err)
}

/// Records per day over news; `bandwidth` is in bytes/day or a string like `"1.5Mbps"`.
#[pyfunction]
#[pyo3(signature = (profile, bandwidth, downtime=0.0, metadata_size=None))]
fn q_news(profile: PyProfile, bandwidth: &Bound<'_, PyAny>, downtime: f64, metadata_size: Option<u64>) -> PyResult<f64> {
    let bw = match bandwidth.extract::<f64>() {
        Ok(v) => v,
        Err(_) => piggyback::units::parse_bandwidth(&bandwidth.extract::<String>()?).map_err(err)?,
    };
    let transfer = metadata_size.map_or(Transfer::FullContent, |m| Transfer::ByReference { metadata_size: m });
    news::q_news(&profile.inner, &NetworkProfile::new(bw, downtime), transfer).map_err(err)
}

#[pyfunction]
fn h_no_history(day: u64, profile: PyProfile, q: f64) -> PyResult<f64> {
    Ok(email::h_no_history(day, &profile.inner, q).map_err(err)?.value)
}

/// Returns `(raw, clamped_value)`.
#[pyfunction]
fn p_news(q: f64, day: u64, n_ttl: u64, records: u64, adds_per_day: u64) -> PyResult<(f64, f64)> {
    let p = analytics::p_replicated_news(q, day, n_ttl, records, adds_per_day).map_err(err)?;
    Ok((p.raw, p.value))
}

#[pyfunction]
fn p_email(q: f64, day: u64, records: u64, adds_per_day: u64) -> PyResult<(f64, f64)> {
    let p = analytics::p_replicated_email(q, day, records, adds_per_day).map_err(err)?;
    Ok((p.raw, p.value))
}

/// Cumulative records posted by the end of each day `0..=horizon` under a cyclic baseline.
#[pyfunction]
fn tr_news_series(profile: PyProfile, q: f64, sleep_days: u64, n_ttl: u64, horizon: u64) -> PyResult<Vec<u64>> {
    let inputs = NewsAnalyticInputs::cyclic(profile.inner, q, sleep_days, n_ttl);
    analytics::tr_news_series(&inputs, horizon).map_err(err)
}

fn xheaders(identifier: &str, base_url: &str, content: &[u8], harvested: Option<&str>) -> PyResult<(Record, codec::XHeaderSet)> {
    let record = Record::from_bytes(identifier, content.to_vec(), 0);
    let xh = codec::build_xheaders(&record, base_url, harvest_time(harvested)?).map_err(err)?;
    Ok((record, xh))
}

#[pyfunction]
#[pyo3(signature = (identifier, content, base_url, newsgroup="archive.repository.replica", harvested=None))]
fn encode_news(identifier: &str, content: &[u8], base_url: &str, newsgroup: &str, harvested: Option<&str>) -> PyResult<String> {
    let (record, xh) = xheaders(identifier, base_url, content, harvested)?;
    let when = harvest_time(harvested)?;
    let opts = NewsOptions::new(when, format!("<{}@replica.example.org>", when.timestamp()));
    Ok(codec::encode_news_article(&record, newsgroup, &xh, &opts).map_err(err)?.render())
}

/// Attaches the record to a plain carrier message and renders it.
#[pyfunction]
#[pyo3(signature = (identifier, content, base_url, to="librarian@mirror.example.org", harvested=None))]
fn encode_email(identifier: &str, content: &[u8], base_url: &str, to: &str, harvested: Option<&str>) -> PyResult<String> {
    let (record, xh) = xheaders(identifier, base_url, content, harvested)?;
    let when = harvest_time(harvested)?;
    let carrier = EmailMessage::text("dlmgr@repository.example.org", to, "status", "<carrier@repository.example.org>", when, "hello\r\n");
    Ok(codec::encode_email_attachment(&carrier, &record, &xh, LineLimits::default()).map_err(err)?.render())
}

/// Parses a rendered message (`"news"` or `"email"`) back to `(identifier, bytes)`.
#[pyfunction]
fn extract<'py>(py: Python<'py>, text: &str, format: &str) -> PyResult<(String, Bound<'py, PyBytes>)> {
    let message = match format.parse::<CodecFormat>().map_err(err)? {
        CodecFormat::News => ArchivalMessage::News(NewsArticle::parse(text).map_err(err)?),
        CodecFormat::Email => ArchivalMessage::Email(EmailMessage::parse(text).map_err(err)?),
    };
    let (xh, payload) = codec::extract_record(&message).map_err(err)?;
    Ok((xh.identifier, PyBytes::new(py, &payload.content)))
}

/// Round-trips every file under `corpus`; returns `(total, intact)`.
#[pyfunction]
#[pyo3(signature = (corpus, format="news"))]
fn codec_roundtrip(corpus: &str, format: &str) -> PyResult<(usize, usize)> {
    let fmt: CodecFormat = format.parse().map_err(err)?;
    let r = cli::codec_roundtrip(Path::new(corpus), fmt, None).map_err(err)?;
    Ok((r.total, r.intact))
}

#[pymodule]
fn piggyback_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(calc, m)?)?;
    m.add_function(wrap_pyfunction!(zeta, m)?)?;
    m.add_function(wrap_pyfunction!(derive_c, m)?)?;
    m.add_function(wrap_pyfunction!(q_email, m)?)?;
    m.add_function(wrap_pyfunction!(q_news, m)?)?;
    m.add_function(wrap_pyfunction!(h_no_history, m)?)?;
    m.add_function(wrap_pyfunction!(p_news, m)?)?;
    m.add_function(wrap_pyfunction!(p_email, m)?)?;
    m.add_function(wrap_pyfunction!(tr_news_series, m)?)?;
    m.add_function(wrap_pyfunction!(encode_news, m)?)?;
    m.add_function(wrap_pyfunction!(encode_email, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(codec_roundtrip, m)?)?;
    Ok(())
}
