use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rreach(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rreach"))
        .args(args)
        .env_remove("RREACH_MAX_R")
        .env_remove("RREACH_MAX_GAMMA_R")
        .env_remove("RREACH_MAX_ENUM")
        .env_remove("RREACH_MAX_CELLS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exact_gamma_prints_fractions() {
    let o = rreach(&["exact-gamma", "--model", "bernoulli", "--k", "2", "--r", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("3376/4279 ≈ 0.788969385"));

    let o = rreach(&["exact-gamma", "--model", "string", "--k", "2", "--r", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("7/10"));
    assert!(stdout(&o).contains("(2/5, 1/20, 1/20, 0/1, 0/1, 3/20, 3/20, 1/5)"));

    let o = rreach(&["exact-gamma", "--model", "bernoulli", "--k", "2", "--r", "1", "--augmented"]);
    assert!(stdout(&o).contains("8/11"));
}

#[test]
fn unsupported_string_model_names_the_cap() {
    let o = rreach(&["exact-gamma", "--model", "string", "--k", "3", "--r", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("string model supports k=2, r=1 only"));
}

#[test]
fn caps_and_env_overrides() {
    let o = rreach(&["exact-gamma", "--model", "bernoulli", "--k", "2", "--r", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("RREACH_MAX_GAMMA_R"));

    let o = Command::new(env!("CARGO_BIN_EXE_rreach"))
        .args(["oracle", "--mode", "strings", "--k", "2", "--n", "3"])
        .env("RREACH_MAX_ENUM", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("RREACH_MAX_ENUM"));

    let help = stdout(&rreach(&["--help"]));
    for var in ["RREACH_MAX_R", "RREACH_MAX_GAMMA_R", "RREACH_MAX_ENUM", "RREACH_MAX_CELLS"] {
        assert!(help.contains(var), "{var} missing from --help");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(rreach(&["no-such-command"]).status.code(), Some(2));
    let o = rreach(&["propagate", "--model", "bernoulli", "--k", "2", "--r", "3", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn propagate_writes_curve_fit_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let o = rreach(&[
        "propagate", "--model", "bernoulli", "--k", "2", "--r", "1", "--n-max", "2000", "--csv", path_str(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("gamma_hat = 0.72727272"));

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("model,k,r,n,el_exact_num,el_exact_den,el_float"));
    assert_eq!(lines.next(), Some("bernoulli,2,1,1,1,2,0.5"));
    assert_eq!(text.lines().count(), 2001);

    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("curve.fit.json")).unwrap()).unwrap();
    assert!((fit["gamma_hat"].as_f64().unwrap() - 8.0 / 11.0).abs() < 1e-8);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("curve.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "propagate");
    assert_eq!(manifest["parameters"]["n_max"], 2000);
    assert!(manifest["outputs"].as_array().unwrap().len() == 2);
}

#[test]
fn mc_is_reproducible_and_fit_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = rreach(&[
            "mc", "--model", "string", "--k", "2", "--r", "2", "--n-max", "300", "--trials", "500", "--seed", "9",
            "--csv", path_str(p),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let header = fs::read_to_string(&a).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "model,k,r,n,trials,sum_length,mean,stderr");

    let json = dir.path().join("fit.json");
    let o = rreach(&["fit", "--in", path_str(&a), "--window", "50:300", "--seed", "9", "--json", path_str(&json)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    for key in ["model", "k", "r", "gamma_hat", "a_hat", "n_min", "n_max", "seed"] {
        assert!(fit.get(key).is_some(), "missing {key}");
    }
    assert_eq!(fit["model"], "string");

    let o = rreach(&["fit", "--in", path_str(&a), "--window", "300:50"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_modes() {
    let o = rreach(&["oracle", "--mode", "strings", "--k", "2", "--n", "1"]);
    assert_eq!(stdout(&o).trim(), "1/2");

    let o = rreach(&["oracle", "--mode", "realizability", "--n", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("all configurations have weight 0 or 2: OK"));

    let o = rreach(&["oracle", "--mode", "bernoulli", "--k", "2", "--n", "3", "--r", "1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert!(out.contains(&format!("propagated value agrees: {first}")));
}

#[test]
fn length_of_ascii_pair() {
    let o = rreach(&["length", "cinematography", "neurotransmitter"]);
    assert!(stdout(&o).contains("lcs = 5"));
}

#[test]
fn comparison_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.csv");
    let cache = dir.path().join("mc");
    let args = [
        "table", "--which", "comparison", "--rs", "1,3,4", "--trials", "50", "--mc-n-max", "200", "--mc-window",
        "50:200", "--exact-n-max", "400", "--exact-window", "50:400", "--mc-dir", path_str(&cache), "--out",
        path_str(&out),
    ];
    let o = rreach(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["r", "mc_gamma", "propagated_gamma", "exact_fraction_gamma", "s_statistic"]);
    assert_eq!(rows[1][3], "8/11");
    assert!(rows[1][2].starts_with("0.72727272"));
    assert_eq!(rows[2][3], "3376/4279");
    assert!(rows[2][2].starts_with("0.788969"));
    assert_eq!(rows[3][3], "−");
    assert!(Path::new(&format!("{}.manifest.json", out.display())).exists());

    // A second run reuses the cached curves and reproduces the table.
    let again = dir.path().join("again.csv");
    let mut args2 = args.to_vec();
    let last = args2.len() - 1;
    args2[last] = path_str(&again);
    assert!(rreach(&args2).status.success());
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn gamma_exact_table() {
    let o = rreach(&["table", "--which", "gamma-exact", "--ks", "2,3", "--rs", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "k,r,gamma,gamma_decimal\n2,1,8/11,0.7272727273\n3,1,11/19,0.5789473684\n");
}

#[test]
fn threads_flag_is_accepted() {
    let o = rreach(&["--threads", "2", "oracle", "--mode", "strings", "--k", "2", "--n", "3"]);
    assert!(o.status.success());
}
