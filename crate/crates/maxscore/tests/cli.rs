use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxscore"))
}

fn crate_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("MAXSCORE_WORKERS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn verify_kl_bound_exits_zero() {
    let o = run(&["verify", "--check", "kl-bound"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("check,params,estimate,bound,stderr,pass\n"));
    assert!(out.contains("kl-bound,") && out.contains("PASS"));
}

#[test]
fn verify_unknown_check_is_an_input_error() {
    let o = run(&["verify", "--check", "no-such-check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown check"));
}

#[test]
fn three_point_example() {
    let data = crate_file("data/three_point.csv");
    let data = data.to_str().unwrap();
    let o = run(&["estimate", "--data", data, "--method", "fixed", "--beta", "1,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("score: 1/3 ("), "{}", stdout(&o));
    // the three points are separable, so the exact maximum is one
    let o = run(&["estimate", "--data", data, "--method", "exact-2d"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("score: 1/1"), "{}", stdout(&o));
}

#[test]
fn estimate_rejects_bad_input() {
    let data = crate_file("data/three_point.csv");
    let data = data.to_str().unwrap();
    assert_eq!(run(&["estimate", "--data", data, "--method", "magic"]).status.code(), Some(1));
    assert_eq!(run(&["estimate", "--data", data, "--method", "fixed"]).status.code(), Some(1));
    assert_eq!(run(&["estimate", "--data", "/nonexistent.csv", "--method", "svm"]).status.code(), Some(1));
}

#[test]
fn srm_prints_selection_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let beta = maxscore_core::UnitVector::normalize(vec![1.0, 0.0, 0.0, -1.0, 0.0]).unwrap();
    let spec = maxscore_core::DgpSpec::new(
        beta,
        maxscore_core::CovariateLaw::IsotropicGaussian,
        maxscore_core::ErrorLaw::Gaussian { sigma: 0.0 },
    );
    let data = maxscore_core::generate_binary_dataset(&spec, 200, maxscore_core::SeedSpec::new(1, 0)).unwrap();
    maxscore::dataset_csv::write_dataset(&data, std::fs::File::create(&path).unwrap()).unwrap();
    let o = run(&["srm", "--data", path.to_str().unwrap(), "--K", "1", "--Cn", "1", "--max-sparsity", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("m,score,penalty,objective,exact,support\n"));
    assert!(out.contains("m_hat: 2"), "{out}");
    assert!(out.contains("support: 1,4"), "{out}");
    let o = run(&["srm", "--data", path.to_str().unwrap(), "--K", "1", "--Cn", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

const SMALL: &str = r#"schema_version = 1
regime = "moderate"
n_list = [100, 200]
p_rule = "n^1/4"
methods = ["svm", "smoothed", "grid"]
replicates = 4
master_seed = 99
test_size = 300
"#;

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let csv = dir.join("out.csv");
    let svg = dir.join("out.svg");
    let text = format!("{body}[output]\ncsv = {:?}\nsvg = {:?}\n", csv.to_str().unwrap(), svg.to_str().unwrap());
    let path = dir.join("study.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn simulate_writes_csv_and_svg_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = std::fs::read(dir.path().join("out.csv")).unwrap();
    let svg = std::fs::read_to_string(dir.path().join("out.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<polyline").count() == 6);
    let result = maxscore::emit::parse_csv(first.as_slice()).unwrap();
    assert_eq!(result.rows.len(), 3 * 2 * 4);

    let o = bin().args(["simulate", "--config", cfg.to_str().unwrap()]).env("MAXSCORE_WORKERS", "3").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(dir.path().join("out.csv")).unwrap(), first);
}

#[test]
fn simulate_bad_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (SMALL.replace("replicates = 4", "replicates = 0"), "replicates"),
        (SMALL.replace("replicates = 4", "replicates = 4\nrepetitions = 3"), "repetitions"),
        (SMALL.replace("\"n^1/4\"", "\"n^5\""), "p_rule"),
        (SMALL.replace("\"grid\"", "\"boosting\""), "methods"),
    ];
    for (body, key) in cases {
        let cfg = write_config(dir.path(), &body);
        let o = run(&["simulate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{key}");
        assert!(stderr(&o).contains(key), "{key}: {}", stderr(&o));
    }
    let o = bin().args(["simulate", "--config", write_config(dir.path(), SMALL).to_str().unwrap()]).env("MAXSCORE_WORKERS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("MAXSCORE_WORKERS"));
}

#[test]
fn bundled_configs_are_valid() {
    let dir = crate_file("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            maxscore::config::ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 5);
}
