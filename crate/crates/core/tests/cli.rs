use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tolerant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tolerant"))
        .args(args)
        .env_remove("TOLERANT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report_value(path: &Path, key: &str) -> f64 {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing from\n{text}"))
        .parse()
        .unwrap()
}

fn write_degenerate_draws(dir: &TempDir) -> String {
    let path = dir.path().join("draws.csv");
    fs::write(&path, format!("nu,tau\n{}", "0,1\n".repeat(10_000))).unwrap();
    path.display().to_string()
}

#[test]
fn degenerate_draws_give_the_normal_quantile() {
    let dir = TempDir::new().unwrap();
    let draws = write_degenerate_draws(&dir);
    let out = dir.path().join("r.txt");
    let o = tolerant(&["solve", "--draws", &draws, "--method", "proposed", "--center", "mean", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = report_value(&out, "B");
    assert!((b - 1.644_853_626_951_472).abs() < 1e-4);
    assert_eq!(report_value(&out, "L"), report_value(&out, "A") - b);
    assert_eq!(report_value(&out, "U"), report_value(&out, "A") + b);
    let line = stdout(&o);
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields.len(), 5);
    assert_eq!(&fields[1..3], &["0.1", "0.05"]);

    let km_out = dir.path().join("km.txt");
    let o = tolerant(&["solve", "--draws", &draws, "--method", "wkm-km", "--out", km_out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!((report_value(&km_out, "B") - b).abs() < 1e-4);
    assert_eq!(report_value(&km_out, "A"), report_value(&out, "A"));
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "nu,tau\n0,1\n0,0\n").unwrap();
    let o = tolerant(&["solve", "--draws", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:"));

    let draws = write_degenerate_draws(&dir);
    let o = tolerant(&["solve", "--draws", &draws, "--method", "upper", "--center", "optimal"]);
    assert_eq!(o.status.code(), Some(2));

    let o = tolerant(&["solve", "--draws", "/nonexistent/draws.csv"]);
    assert_eq!(o.status.code(), Some(2));

    // Fewer than 1/alpha draws leaves no interior quantile rank.
    let few = dir.path().join("few.csv");
    fs::write(&few, "nu,tau\n0,1\n1,1\n").unwrap();
    assert_eq!(tolerant(&["solve", "--draws", few.to_str().unwrap()]).status.code(), Some(2));

    let data = dir.path().join("d.csv");
    fs::write(&data, "group,value\na,1\na,2\nb,3\nb,5\n").unwrap();
    let o = tolerant(&["fit-solve", "--data", data.to_str().unwrap(), "--model", "oneway", "--prior", "conjugate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tolerant(&["fit-solve", "--data", data.to_str().unwrap(), "--model", "iid", "--prior", "px"]);
    assert_eq!(o.status.code(), Some(2));

    // Identical values in every group: the sampler refuses.
    let flat = dir.path().join("flat.csv");
    fs::write(&flat, "group,value\na,1\na,1\nb,3\nb,3\n").unwrap();
    let o = tolerant(&["fit-solve", "--data", flat.to_str().unwrap(), "--model", "oneway"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn fit_solve_conjugate_posterior_mean() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("x.csv");
    fs::write(&data, "group,value\nx,9\nx,10\nx,11\n").unwrap();
    let out = dir.path().join("r.txt");
    let o = tolerant(&[
        "fit-solve", "--data", data.to_str().unwrap(), "--model", "iid", "--prior", "conjugate",
        "--a", "0", "--b", "1", "--seed", "4", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((report_value(&out, "posterior_mean_nu") - 7.5).abs() < 0.05);
}

#[test]
fn fit_solve_is_deterministic_and_saves_draws() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("d.csv");
    let mut text = String::from("group,value\n");
    let values = [[0.3, -0.2].as_slice(), &[1.1, 0.7, 1.6], &[-0.9, -0.4, -1.2, -0.1], &[0.2, 0.8], &[1.4, 0.9, 2.0], &[-0.3, 0.1, 0.4, -0.6]];
    for (i, g) in values.iter().enumerate() {
        for v in *g {
            text.push_str(&format!("g{i},{v}\n"));
        }
    }
    fs::write(&data, text).unwrap();
    for prior in ["vanilla", "px"] {
        let run = |tag: &str| {
            let out = dir.path().join(format!("{prior}-{tag}.txt"));
            let saved = dir.path().join(format!("{prior}-{tag}.csv"));
            let o = tolerant(&[
                "fit-solve", "--data", data.to_str().unwrap(), "--model", "oneway", "--prior", prior,
                "--seed", "11", "--center", "optimal", "--out", out.to_str().unwrap(),
                "--save-draws", saved.to_str().unwrap(),
            ]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            (fs::read(&out).unwrap(), fs::read(&saved).unwrap(), stdout(&o))
        };
        let a = run("a");
        let b = run("b");
        assert_eq!(a, b);

        // The saved draws reproduce the interval through `solve`.
        let saved = dir.path().join(format!("{prior}-a.csv"));
        let o = tolerant(&["solve", "--draws", saved.to_str().unwrap(), "--center", "optimal"]);
        assert_eq!(stdout(&o), a.2);
    }
}

#[test]
fn seed_falls_back_to_the_environment() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("x.csv");
    fs::write(&data, "group,value\nx,1\nx,2\nx,4\nx,3\n").unwrap();
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_tolerant"))
            .args(["fit-solve", "--data", data.to_str().unwrap(), "--model", "iid", "--iters", "3000", "--burnin", "500"])
            .env("TOLERANT_SEED", seed)
            .output()
            .unwrap()
    };
    assert_eq!(run("5").stdout, run("5").stdout);
    assert_ne!(run("5").stdout, run("6").stdout);
}

#[test]
fn profile_marks_the_posterior_mean_and_is_symmetric_for_degenerate_draws() {
    let dir = TempDir::new().unwrap();
    let draws = write_degenerate_draws(&dir);
    let out = dir.path().join("p.csv");
    let o = tolerant(&[
        "profile", "--draws", &draws, "--grid-lo", "-1", "--grid-hi", "1", "--grid-n", "21", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<(f64, f64, u8)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('A'))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 21);
    assert_eq!(rows.iter().filter(|r| r.2 == 1).count(), 1);
    assert_eq!(rows[10].2, 1);
    let argmin = rows.iter().enumerate().min_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).unwrap().0;
    assert_eq!(argmin, 10);
    for i in 0..10 {
        assert!((rows[i].1 - rows[20 - i].1).abs() < 1e-9);
    }
    assert_eq!(tolerant(&["profile", "--draws", &draws, "--grid-n", "2"]).status.code(), Some(2));
}

#[test]
fn compare_prints_one_line_per_method() {
    let dir = TempDir::new().unwrap();
    let draws = dir.path().join("d.csv");
    let mut text = String::from("nu,tau\n");
    for j in 0..400 {
        let u = (j as f64 + 0.5) / 400.0;
        text.push_str(&format!("{},{}\n", 2.0 * (u - 0.5), 1.0 + 0.5 * u));
    }
    fs::write(&draws, text).unwrap();
    let o = tolerant(&["compare", "--draws", draws.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn simulate_smoke_run_is_worker_independent() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"scenarios": [{"intra_correlation": 0.5, "chain": {"iterations": 1500, "burn_in": 500}}]}"#,
    )
    .unwrap();
    let run = |workers: &str, k: &str| {
        let out = dir.path().join(format!("r{workers}-{k}.json"));
        let o = tolerant(&[
            "simulate", "--config", config.to_str().unwrap(), "--replicates", k, "--workers", workers, "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read(&out).unwrap(), fs::read(out.with_extension("txt")).unwrap())
    };
    let one = run("1", "1");
    let json: serde_json::Value = serde_json::from_slice(&one.0).unwrap();
    assert_eq!(json["reports"][0]["completed"], 1);
    assert_eq!(run("1", "6"), run("4", "6"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"scenarios": [{"intra_corelation": 0.5}]}"#).unwrap();
    let o = tolerant(&["simulate", "--config", bad.to_str().unwrap(), "--out", dir.path().join("x.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("intra_corelation"));
}

#[test]
fn bundled_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["coverage_vanilla.json", "coverage_px.json"] {
        let c = tolerant::cli::read_simulation_config(&root.join(name)).unwrap();
        assert_eq!(c.scenarios.len(), 5);
    }
}
