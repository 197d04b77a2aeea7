use std::path::Path;
use std::process::{Command, Output};

fn wavesearch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavesearch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary_value(o: &Output, key: &str) -> f64 {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in\n{}", stdout(o)))
        .parse()
        .unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn spectrum_stats_of_linear_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wavesearch(&["spectrum-stats", "--spectrum", "linear", "--n", "4", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning: validity ratio 4"));
    let rows = data_rows(&dir.path().join("spectrum_stats.csv"));
    let plus_one = rows.iter().find(|r| r[0] == "1").unwrap();
    assert_eq!(plus_one[1], "3");
}

#[test]
fn simulate_writes_trajectory_with_config_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wavesearch(&["simulate", "--spectrum", "quadratic", "--n", "16", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(summary_value(&o, "p_star") > 0.95);
    assert!((summary_value(&o, "t_star_over_tau") - 1.0).abs() < 0.05);

    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(text.contains("# n = 16\n"));
    assert!(text.contains("# initial_index = 289\n"));
    assert!(text.contains("\nt,t_over_tau,p_j,p_s,norm,max_spectator\n"));
    let rows = data_rows(&dir.path().join("trajectory.csv"));
    let last: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert!(last >= 2.2 - 1e-3);
}

#[test]
fn verbose_modes_adds_a_column_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wavesearch(&[
        "simulate", "--spectrum", "linear", "--n", "5", "--t-max-tau", "0.5", "--verbose-modes", "--out-dir", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(text.contains("max_spectator,p_1,p_2,p_3,p_4,p_5,p_6\n"));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "# base\nmode = spectrum-stats\nspectrum = quadratic\nn = 6\nout_dir = {}\n",
            dir.path().join("a").display()
        ),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = wavesearch(&["run", "--config", cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("n = 6\n"));
    assert!(dir.path().join("a/spectrum_stats.csv").exists());

    let o = wavesearch(&["run", "--config", cfg, "--n", "7", "--set", "searched_frequency=16"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("n = 7\n"));
    assert!(stdout(&o).contains("searched_index = 16\n"));
}

#[test]
fn compare_rwa_writes_paired_and_tagged_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wavesearch(&["compare-rwa", "--spectrum", "quadratic", "--n", "9", "--t-max-tau", "2.5", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(summary_value(&o, "rwa_deviation") < 0.2);
    assert!(summary_value(&o, "ripple_amplitude") >= 0.0);
    let paired = data_rows(&dir.path().join("compare_rwa.csv"));
    let full = data_rows(&dir.path().join("trajectory_full.csv"));
    let rwa = data_rows(&dir.path().join("trajectory_rwa.csv"));
    assert_eq!(paired.len(), full.len());
    assert!(full.iter().all(|r| r[0] == "full"));
    assert!(rwa.iter().all(|r| r[0] == "rwa"));
}

#[test]
fn scan_reports_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wavesearch(&[
        "scan", "--spectrum", "quadratic", "--t-max-tau", "1.3", "--workers", "2", "--set", "scan_sizes=9,4,16", "--out-dir", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!((summary_value(&o, "alpha_normalized") - 1.0).abs() < 0.1);
    let rows = data_rows(&dir.path().join("scan.csv"));
    let ns: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ns, vec!["4", "9", "16"]);
}

#[test]
fn field_snapshot_starts_as_the_initial_mode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = wavesearch(&[
        "field-snapshot", "--spectrum", "linear", "--n", "6", "--set", "snapshot_times_tau=1,0", "--out-dir", out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = data_rows(&dir.path().join("field_snapshot.csv"));
    // j = 7, grid of 4 * 7 + 1 intervals
    assert_eq!(rows.len(), 2 * 30);
    for r in rows.iter().take(30) {
        let t: f64 = r[0].parse().unwrap();
        let x: f64 = r[2].parse().unwrap();
        let re: f64 = r[3].parse().unwrap();
        assert_eq!(t, 0.0);
        assert!((re - (7.0 * x).sin()).abs() < 1e-10);
    }
}

#[test]
fn identical_runs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = wavesearch(&[
            "simulate", "--spectrum", "linear", "--n", "12", "--set", "velocity_seed=3", "--out-dir", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        (std::fs::read(out.join("trajectory.csv")).unwrap(), o.stdout)
    };
    let (a, sa) = run("one");
    let (b, sb) = run("two");
    assert_eq!(a, b);
    // summaries differ only in the artifact path
    let strip = |s: Vec<u8>| String::from_utf8(s).unwrap().lines().filter(|l| !l.starts_with("trajectory")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(sa), strip(sb));
}

#[test]
fn config_errors_exit_with_2_and_name_the_field() {
    let o = wavesearch(&["simulate", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let line = stderr(&o);
    assert!(line.starts_with("error: class=config kind=config field=n "), "{line}");

    let o = wavesearch(&["simulate", "--spectrum", "linear", "--n", "5", "--set", "searched_frequency=2.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("field=searched_frequency"));

    let o = wavesearch(&["simulate", "--set", "colour=red"]);
    assert_eq!(o.status.code(), Some(2));

    let o = wavesearch(&["run", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn numerical_failures_exit_with_3() {
    let o = wavesearch(&["simulate", "--spectrum", "quadratic", "--n", "100", "--set", "step_cap=1000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("kind=step_cap_exceeded"));
}

#[test]
fn unwritable_output_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = blocker.join("sub");
    let o = wavesearch(&[
        "spectrum-stats", "--spectrum", "linear", "--n", "4", "--out-dir", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error: class=io"));
}
