use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

static COUNTER: AtomicUsize = AtomicUsize::new(0);

fn scratch(tag: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let dir = std::env::temp_dir().join(format!("locfex-cli-{}-{tag}-{n}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn locfex(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locfex"))
        .args(args)
        .current_dir(dir)
        .env_remove("LOCFEX_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Rows of a CSV as string fields, header first.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn summary_error(out: &str) -> f64 {
    let line = out.lines().find(|l| l.contains("global max error")).expect("summary line");
    line.split("global max error ").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn fit_runge_k12() {
    let dir = scratch("runge");
    let o = locfex(&dir, &["fit", "--fn", "runge", "--K", "12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(summary_error(&stdout(&o)) < 1e-10, "{}", stdout(&o));
    let out = dir.join("locfex-out");
    let errs = csv_rows(&out.join("errors.csv"));
    assert_eq!(errs[0], ["k", "max_abs_err"]);
    assert_eq!(errs.len(), 13);
    let coeffs = csv_rows(&out.join("coefficients.csv"));
    assert_eq!(coeffs[0], ["k", "ell", "re", "im"]);
    assert_eq!(coeffs.len(), 1 + 12 * 19);
    let json = fs::read_to_string(out.join("coefficients.json")).unwrap();
    assert!(json.contains("\"m\": 19") && json.contains("\"L\": 114"), "{json}");
}

#[test]
fn fit_constant_is_exact() {
    let dir = scratch("const");
    let o = locfex(&dir, &["fit", "--fn", "const1", "--K", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(summary_error(&stdout(&o)) <= 1e-12);
}

#[test]
fn missing_data_file_exits_2_and_names_it() {
    let dir = scratch("missing");
    let o = locfex(&dir, &["fit", "--data", "missing.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.csv"), "{}", stderr(&o));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = scratch("config");
    for args in [
        &["fit", "--fn", "nosuch"][..],
        &["fit", "--fn", "runge", "--T", "0.5"],
        &["fit", "--fn", "runge", "--data", "x.csv"],
        &["fit"],
        &["fit", "--fn", "expiw:omega=abc"],
        &["fit", "--fn", "runge", "--refine", "0"],
        &["eval", "--fn", "runge"],
        &["examples", "--id", "9"],
    ] {
        let o = locfex(&dir, args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn out_dir_flag_and_env_fallback() {
    let dir = scratch("outdir");
    let o = Command::new(env!("CARGO_BIN_EXE_locfex"))
        .args(["fit", "--fn", "f5", "--K", "3"])
        .current_dir(&dir)
        .env("LOCFEX_OUT", "from-env")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.join("from-env/errors.csv").exists());
    let o = locfex(&dir, &["fit", "--fn", "f5", "--K", "3", "--out", "explicit"]);
    assert!(o.status.success());
    assert!(dir.join("explicit/errors.csv").exists());
}

#[test]
fn breakpoints_ignore_domain_endpoints() {
    let dir = scratch("bp");
    let with_ends = locfex(&dir, &["fit", "--fn", "runge", "--breakpoints", "-1,-0.5,0,0.5,1", "--out", "a"]);
    let interior = locfex(&dir, &["fit", "--fn", "runge", "--breakpoints", "-0.5,0,0.5", "--out", "b"]);
    assert!(with_ends.status.success(), "{}", stderr(&with_ends));
    assert!(interior.status.success(), "{}", stderr(&interior));
    let a = fs::read(dir.join("a/errors.csv")).unwrap();
    assert_eq!(a, fs::read(dir.join("b/errors.csv")).unwrap());
    assert_eq!(csv_rows(&dir.join("a/errors.csv")).len(), 5);
}

#[test]
fn fit_is_byte_deterministic() {
    let dir = scratch("determinism");
    for out in ["r1", "r2"] {
        assert!(locfex(&dir, &["fit", "--fn", "expiw:omega=7", "--K", "9", "--out", out]).status.success());
    }
    for file in ["coefficients.csv", "coefficients.json", "errors.csv"] {
        assert_eq!(fs::read(dir.join("r1").join(file)).unwrap(), fs::read(dir.join("r2").join(file)).unwrap(), "{file}");
    }
}

#[test]
fn tabulated_data_round_trip() {
    let dir = scratch("data");
    // samples exactly at the construction nodes of K = 4 on [0, 2]
    let total = 4 * 18;
    let mut text = String::from("x,re,im\n");
    for j in 0..=total {
        let x = 2.0 * j as f64 / total as f64;
        text.push_str(&format!("{x:?},{:?},{:?}\n", (3.0 * x).cos(), (3.0 * x).sin()));
    }
    fs::write(dir.join("samples.csv"), text).unwrap();
    let o = locfex(&dir, &["fit", "--data", "samples.csv", "--K", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(summary_error(&stdout(&o)) < 1e-12, "{}", stdout(&o));

    let o = locfex(&dir, &["fit", "--data", "samples.csv", "--K", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no value at node"), "{}", stderr(&o));
}

#[test]
fn eval_samples_follow_the_seed() {
    let dir = scratch("eval");
    let run = |seed: &str, out: &str| {
        let o = locfex(&dir, &["eval", "--fn", "runge", "--K", "12", "--samples", "25", "--seed", seed, "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(dir.join(out).join("eval.csv")).unwrap()
    };
    let a = run("3", "a");
    assert_eq!(a, run("3", "b"));
    assert_ne!(a, run("4", "c"));
    let rows = csv_rows(&dir.join("a/eval.csv"));
    assert_eq!(rows[0], ["x", "re", "im", "ref_re", "ref_im", "abs_err"]);
    assert_eq!(rows.len(), 26);
    assert!(rows[1..].iter().all(|r| r[5].parse::<f64>().unwrap() < 1e-10));
}

#[test]
fn singular_flags_literal_f8() {
    let dir = scratch("f8lit");
    let o = locfex(&dir, &["singular", "--fn", "f8lit", "--K", "21"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("flagged subintervals 6,11"), "{}", stdout(&o));
    let norms = csv_rows(&dir.join("locfex-out/norms.csv"));
    assert_eq!(norms[0], ["k", "coeff_norm", "flagged"]);
    let flagged: Vec<&str> = norms[1..].iter().filter(|r| r[2] == "true").map(|r| r[0].as_str()).collect();
    assert_eq!(flagged, ["6", "11"]);
}

#[test]
fn singular_localizes_corrected_f8() {
    let dir = scratch("f8fix");
    let o = locfex(&dir, &["singular", "--fn", "f8fix", "--K", "21"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.join("locfex-out");
    let h = 2.0 / 21.0;
    let locs = csv_rows(&out.join("localizations.csv"));
    assert_eq!(locs[0], ["k0", "i0", "x_break", "normL", "normR"]);
    let breaks: Vec<f64> = locs[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(breaks.len(), 2);
    assert!((breaks[0] + 0.5).abs() <= h && breaks[1].abs() <= h, "{breaks:?}");
    let corrected = csv_rows(&out.join("corrected_errors.csv"));
    assert_eq!(corrected[0], ["k", "before", "after"]);
    assert_eq!(corrected.len(), 22);
}

#[test]
fn singular_smooth_function_reports_nothing() {
    let dir = scratch("f5");
    let o = locfex(&dir, &["singular", "--fn", "f5", "--K", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("no singular subintervals detected"));
    assert_eq!(csv_rows(&dir.join("locfex-out/localizations.csv")).len(), 1);
}

#[test]
fn bench_rows_and_single_k() {
    let dir = scratch("bench");
    let o = locfex(&dir, &["bench", "--K", "100,200,400"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.join("locfex-out/bench.csv"));
    assert_eq!(rows[0], ["K", "M", "fit_seconds", "factorizations"]);
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r[3] == "1"));
    assert_eq!(rows[3][1], "7201");

    let o = locfex(&dir, &["bench", "--K", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("at least two"));
}

#[test]
fn sweep_from_toml() {
    let dir = scratch("sweep");
    fs::write(
        dir.join("s.toml"),
        "axis = \"K\"\nvalues = [1, 2, 4]\nfunction = \"const1\"\n[metric]\nper_subinterval = true\n",
    )
    .unwrap();
    let o = locfex(&dir, &["sweep", "--config", "s.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&dir.join("locfex-out/sweep.csv"));
    assert_eq!(rows[0], ["axis_value", "max_err", "k1_err", "k2_err", "k3_err", "k4_err"]);
    assert_eq!(rows[1][0], "1");
    assert_eq!(rows[1][3], "");
    assert!(rows[1..].iter().all(|r| r[1].parse::<f64>().unwrap() <= 1e-12));

    fs::write(dir.join("bad.json"), r#"{"axis":"K","values":[2,1],"function":"const1"}"#).unwrap();
    assert_eq!(locfex(&dir, &["sweep", "--config", "bad.json"]).status.code(), Some(2));
}

#[test]
fn plots_render_from_csv() {
    let dir = scratch("plot");
    let o = locfex(&dir, &["fit", "--fn", "runge", "--K", "8", "--plot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(dir.join("locfex-out/errors.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    let o = locfex(&dir, &["examples", "--id", "3", "--plot"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.join("locfex-out/ex3_k20.svg").exists());
    assert!(dir.join("locfex-out/examples_summary.txt").exists());
}

#[test]
fn tables_schema_and_reference_rows() {
    let dir = scratch("tables");
    let o = locfex(&dir, &["tables"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t1 = csv_rows(&dir.join("locfex-out/table1.csv"));
    let t2 = csv_rows(&dir.join("locfex-out/table2.csv"));
    assert_eq!(t1[0], ["gamma", "T1", "reference", "deviation"]);
    assert_eq!(t2[0], ["T", "N0", "reference", "deviation"]);
    assert_eq!(t1.len(), 7);
    assert_eq!(t2.len(), 8);
    assert!(t1[1..].iter().chain(&t2[1..]).all(|r| !r[3].is_empty()));

    let row1 = t1.iter().find(|r| r[0] == "2").expect("gamma = 2 row");
    let t1_at_2: f64 = row1[1].parse().unwrap();
    let row2 = t2.iter().find(|r| r[0] == "6").expect("T = 6 row");
    let n0_at_6: i64 = row2[1].parse().unwrap();
    assert!((t1_at_2 - 2.3).abs() <= 0.3, "T1(2) = {t1_at_2}, reference 2.3");
    assert!((n0_at_6 - 9).abs() <= 2, "N0(6) = {n0_at_6}, reference 9");
}
