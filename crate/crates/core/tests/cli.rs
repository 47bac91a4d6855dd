use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn chainda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainda")).args(args).output().expect("binary runs")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chainda-cli-{name}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config(dir: &PathBuf) -> String {
    let path = dir.join("market.toml");
    fs::write(&path, "K = 4\nvolatility = 0.02\nagents_per_side = 40\ntrials = 6\ninitial_mean = 10.0\n").unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn simulate_writes_identical_csv_for_a_seed() {
    let dir = workdir("simulate");
    let config = small_config(&dir);
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for out in [&a, &b] {
        let o = chainda(&["simulate", "--config", &config, "--mechanism", "mcafee", "--seed", "7", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("trial,mechanism,alloc_eff,net_eff,revenue,n_trades,opt_value,seed\n"));
    assert_eq!(text.lines().count(), 7);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn compare_prints_one_line_per_mechanism() {
    let dir = workdir("compare");
    let config = small_config(&dir);
    let o = chainda(&["compare", "--config", &config, "--mechanisms", "mcafee,greedy,zip"]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    for m in ["mcafee", "greedy", "zip"] {
        assert!(stdout.lines().any(|l| l.starts_with(m)), "{stdout}");
    }
}

#[test]
fn tune_reports_a_value_inside_the_range() {
    let dir = workdir("tune");
    let config = small_config(&dir);
    let o = chainda(&["tune", "--config", &config, "--mechanism", "ewma", "--param", "lambda", "--range", "0.01:0.5", "--samples", "4", "--passes", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let best: f64 = stdout.lines().last().unwrap().trim_start_matches("best lambda=").parse().unwrap();
    assert!((0.01..=0.5).contains(&best));
}

#[test]
fn verify_writes_a_report_and_passes_for_a_fixed_price() {
    let dir = workdir("verify");
    let config = small_config(&dir);
    let report = dir.join("report.txt");
    let o = chainda(&["verify", "--config", &config, "--mechanism", "fixed", "--schedules", "3", "--seed", "1", "--report", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS") || l.starts_with(' ')), "{text}");
    assert!(text.contains("truthful") && text.contains("ledgers"));
}

#[test]
fn bad_input_fails_cleanly() {
    let o = chainda(&["compare", "--mechanisms", "nonsense"]);
    assert!(!o.status.success());
    let o = chainda(&["tune", "--mechanism", "ewma", "--param", "lambda", "--range", "0.5", "--samples", "3"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("LO:HI"));
}
