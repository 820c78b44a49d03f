use std::path::Path;
use std::process::{Command, Output};

fn piggyback(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_piggyback")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(path: &Path) -> usize {
    csv::Reader::from_path(path).unwrap().records().count()
}

#[test]
fn run_writes_one_row_per_day() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = piggyback(&["run", "--scenario", "active", "--days", "120", "--out", out, "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for policy in ["single", "cyclic", "continuous"] {
        assert_eq!(csv_rows(&dir.path().join(format!("active-news-{policy}.csv"))), 120);
    }
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["scenario"], "active");
    assert_eq!(summary["news"].as_array().unwrap().len(), 3);
    let header = std::fs::read_to_string(dir.path().join("active-news-cyclic.csv")).unwrap();
    assert!(header.starts_with(
        "day,posted_today,expired_today,records_on_server,repo_size,coverage_fraction,volume_copies\n"
    ));
}

#[test]
fn identical_runs_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = piggyback(&[
            "run", "--scenario", "new", "--transport", "email", "--days", "90", "--seed", "11", "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    for name in ["new-email-history.csv", "new-summary.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn scenario_file_and_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("tiny.toml");
    std::fs::write(
        &good,
        "name = \"tiny\"\ntransport = \"news\"\ndays = 15\n\n[repository]\nrecord_count = 50\n\
         mean_record_size = \"2KB\"\nadds_per_day = 1\nupdates_per_day = 1\n\n[news]\npolicies = [\"cyclic_baseline\"]\n\
         n_ttl = 5\nsleep_days = 1\n\n[network]\nbandwidth = \"20KB/day\"\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = piggyback(&["run", "--scenario", good.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out.join("tiny-news-cyclic.csv")), 15);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, std::fs::read_to_string(&good).unwrap().replace("record_count = 50", "record_count = -50")).unwrap();
    let o = piggyback(&["run", "--scenario", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("record_count"), "{err}");

    let o = piggyback(&["run", "--scenario", "no-such-preset"]);
    assert!(!o.status.success());
}

#[test]
fn calc_prints_instantiated_formulas() {
    let o = piggyback(&["calc", "c", "V=16866", "b=1.6"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("= 7378.7"), "{}", stdout(&o));

    let o = piggyback(&["calc", "t_news", "R=500000", "size=1KB", "bw=0.125Mbps", "mode=by-reference"]);
    assert!(stdout(&o).contains("= 0.3704 days"), "{}", stdout(&o));

    let o = piggyback(&["calc", "q_email", "rank=3", "G=1"]);
    assert!(stdout(&o).contains("= 1272.2"), "{}", stdout(&o));

    assert!(!piggyback(&["calc", "warp_factor"]).status.success());
}

#[test]
fn batch_runs_every_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = piggyback(&[
        "batch", "--scenario", "new", "--scenario", "mature", "--days", "10", "--jobs", "2", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("new-summary.json").exists());
    assert!(dir.path().join("mature-summary.json").exists());
    let dup = piggyback(&["batch", "--scenario", "new", "--scenario", "new", "--days", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(!dup.status.success());
}

#[test]
fn codec_roundtrip_command() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    let o = piggyback(&["codec-roundtrip", corpus.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("News: 0/0 intact"));

    let msgs = dir.path().join("messages");
    let o = piggyback(&[
        "codec-roundtrip", corpus.to_str().unwrap(), "--generate", "72", "--max-size", "4900000", "--out",
        msgs.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("News: 72/72 intact"));
    assert!(stdout(&o).contains("Email: 72/72 intact"));
    assert_eq!(std::fs::read_dir(msgs.join("news")).unwrap().count(), 72);
}
