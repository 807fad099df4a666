use std::path::Path;
use std::process::{Command, Output};

fn qmlint(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmlint")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmlint(&["validate"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("11 of 11 suites passed"));
}

#[test]
fn injected_codec_fault_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let out = qmlint(&["validate", "--inject-fault", "codec"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let codec = text.lines().find(|l| l.starts_with("codec")).unwrap();
    assert!(codec.contains("FAIL"), "{codec}");
    assert_eq!(text.lines().filter(|l| l.contains(" FAIL ")).count(), 1);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["d = 0\n", "colour = red\n", "grid = 256, 128\n", "function = gamma\n", "d = 2\nmode = statevec\n"] {
        let cfg = write_config(dir.path(), "bad.cfg", body);
        let out = qmlint(&["convergence", "--config", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(2), "{body:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = qmlint(&["cost", "--config", "missing.cfg"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn statevec_grid_above_the_cap_is_rejected_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "big.cfg", "grid = 2^12\ntrials = 1\nmode = statevec\n");
    let out = qmlint(&["convergence", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn convergence_writes_csv_and_dat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "grid = 2^7..2^9\ntrials = 5\n");
    let out = qmlint(&["convergence", "--config", &cfg, "--out", "res/conv.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("res/conv.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n_target,n_realized,trial,estimate,reference,abs_error,queries,wall_ms"));
    assert_eq!(lines.count(), 15);
    let dat = std::fs::read_to_string(dir.path().join("res/conv.dat")).unwrap();
    assert_eq!(dat.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(stdout(&out).contains("slope vs n_realized"));
}

#[test]
fn default_output_name_follows_the_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "grid = 128, 256\ntrials = 2\n");
    assert_eq!(qmlint(&["cost", "--config", &cfg], dir.path()).status.code(), Some(0));
    assert!(dir.path().join("cost.csv").exists());
    assert!(dir.path().join("cost.dat").exists());
}

#[test]
fn identical_seeds_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "grid = 2^7..2^9\ntrials = 10\n");
    for cmd in ["convergence", "compare"] {
        let read = |name: &str| {
            let out = qmlint(&[cmd, "--config", &cfg, "--seed", "11", "--out", name], dir.path());
            assert_eq!(out.status.code(), Some(0));
            std::fs::read(dir.path().join(name)).unwrap()
        };
        assert_eq!(read("a.csv"), read("b.csv"), "{cmd}");
    }
}

#[test]
fn constant_integrand_is_exact_for_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "grid = 2^7..2^9\ntrials = 5\nfunction = const\n");
    let out = qmlint(&["compare", "--config", &cfg, "--out", "c.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let errs: Vec<f64> = line.split(',').skip(2).map(|v| v.parse().unwrap()).collect();
        assert!(errs.iter().all(|e| e.abs() <= 1e-10), "{line}");
    }
}

#[test]
fn small_statevec_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sv.cfg", "grid = 16\ntrials = 3\nmode = statevec\n");
    let out = qmlint(&["convergence", "--config", &cfg, "--out", "sv.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sv.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let (n_realized, queries): (u64, u64) = (cols[1].parse().unwrap(), cols[6].parse().unwrap());
        assert!(queries > 16 && queries <= n_realized, "{line}");
    }
}
