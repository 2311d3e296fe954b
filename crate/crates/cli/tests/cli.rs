use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qisg::dyadic::point_to_f64;
use qisg::{enumerate_grid, HierCoeffs, QIScheme, SmolyakIndexSet};

fn qisg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qisg")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_samples(path: &Path, d: usize, rows: impl Iterator<Item = (Vec<f64>, f64)>) {
    let mut text: String = (1..=d).map(|i| format!("x_{i},")).collect();
    text += "value\n";
    for (x, v) in rows {
        for t in x {
            text += &format!("{t},");
        }
        text += &format!("{v:e}\n");
    }
    fs::write(path, text).unwrap();
}

#[test]
fn derive_scheme_prints_exact_symbols() {
    let out = qisg(&["derive-scheme", "--ell", "2", "--builtin", "faber"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("P*_even     -1/2\n"));

    let out = qisg(&["derive-scheme", "--ell", "4", "--builtin", "cubic"]);
    let text = stdout(&out);
    assert!(text.contains("‖P*_even‖   3/8\n"), "{text}");
    assert!(text.contains("‖P*_odd‖    1/2\n"));
    assert!(text.contains("P*_odd      1/12 z^2 + 1/3 z + 1/12\n"));
}

#[test]
fn scheme_file_loads_back_as_a_mask() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = qisg(&["derive-scheme", "--builtin", "cubic", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let file = out_dir.join("scheme.json");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(json["p_even_star_norm"], "3/8");
    let again = qisg(&["derive-scheme", "--mask", file.to_str().unwrap(), "--format", "json"]);
    let back: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(back["p_odd_star"], json["p_odd_star"]);
}

#[test]
fn bad_masks_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    for (name, body) in [("garbled.json", "{\"ell\": 4, \"lambda\": [\"-1/6\", "), ("short.json", "{\"ell\":4,\"lambda\":[\"1\"]}")] {
        let mask = dir.path().join(name);
        fs::write(&mask, body).unwrap();
        let out = qisg(&["derive-scheme", "--mask", mask.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(out.stdout.is_empty());
        assert!(!out_dir.exists());
    }
    let out = qisg(&["derive-scheme", "--ell", "4", "--builtin", "faber"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(qisg(&["benchmark", "--q", "0.5"]).status.code(), Some(1));
    assert_eq!(qisg(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qisg(&["recover", "--m", "2"]).status.code(), Some(1));
    assert_eq!(qisg(&["--help"]).status.code(), Some(0));
    assert_eq!(qisg(&["--version"]).status.code(), Some(0));
}

#[test]
fn recover_from_zero_samples_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = QIScheme::builtin("cubic").unwrap();
    let grid = enumerate_grid(2, 3, &scheme);
    let samples = dir.path().join("zero.csv");
    write_samples(&samples, 2, grid.points().map(|p| (point_to_f64(p), 0.0)));
    let out = qisg(&["recover", "--d", "2", "--m", "3", "--samples", samples.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_1,x_2,value"));
    let values: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), grid.len());
    assert!(values.iter().all(|&v| v == 0.0));
}

#[test]
fn missing_samples_exit_3_and_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let scheme = QIScheme::builtin("faber").unwrap();
    let grid = enumerate_grid(2, 2, &scheme);
    let samples = dir.path().join("partial.csv");
    write_samples(&samples, 2, grid.points().skip(3).map(|p| (point_to_f64(p), 1.0)));
    let out = qisg(&["recover", "--builtin", "faber", "--d", "2", "--m", "2", "--samples", samples.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.matches("missing ").count(), 3, "{err}");
}

#[test]
fn sine_residual_decreases_with_level() {
    let residual = |m: &str| {
        let out = qisg(&["recover", "--d", "2", "--m", m, "--function", "sine", "--format", "json"]);
        assert!(out.status.success());
        let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        json["residual_l2"].as_f64().unwrap()
    };
    assert!(residual("5") < residual("4"));
}

fn random_spline(scheme: &QIScheme, d: usize, m: u32) -> HierCoeffs {
    let mut hc = HierCoeffs::new(d, scheme.ell(), m).unwrap();
    let mut seed = 12345u64;
    for k in SmolyakIndexSet::new(d, m).iter() {
        let shape = k.shape(scheme.ell());
        for flat in 0..shape.iter().product::<usize>() {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let c = (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            hc.set(k, &[flat / shape[1], flat % shape[1]], c).unwrap();
        }
    }
    hc
}

/// Exports the grid, samples `hc` on it and recovers through the binary.
fn recover_via_grid_export(builtin: &str, hc: &HierCoeffs, dir: &Path) -> HierCoeffs {
    let m = hc.max_level().to_string();
    let out = qisg(&["grid", "--builtin", builtin, "--d", "2", "--m", &m, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.join("grid.csv")).unwrap();
    let points: Vec<Vec<f64>> =
        text.lines().skip(1).map(|l| l.split(',').take(2).map(|v| v.parse().unwrap()).collect()).collect();
    let samples = dir.join("samples.csv");
    write_samples(&samples, 2, points.into_iter().map(|x| {
        let v = hc.eval(&x);
        (x, v)
    }));
    let out_dir = dir.join("rec");
    let out = qisg(&[
        "recover",
        "--builtin",
        builtin,
        "--d",
        "2",
        "--m",
        &m,
        "--samples",
        samples.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&fs::read_to_string(out_dir.join("coeffs.json")).unwrap()).unwrap()
}

#[test]
fn spline_round_trip_through_exported_grid() {
    // Smolyak interpolation is a projector, so a spline in its range comes
    // back with the same coefficients
    let dir = tempfile::tempdir().unwrap();
    let faber = QIScheme::builtin("faber").unwrap();
    let g = random_spline(&faber, 2, 6);
    let hc = qisg::recover_fn(&faber, 2, 4, |x| g.eval(x)).unwrap();
    let back = recover_via_grid_export("faber", &hc, dir.path());
    let worst = hc.entries().map(|(k, s, c)| (back.get(k, &s) - c).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-11, "{worst}");
}

#[test]
fn cubic_recovery_from_files_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let cubic = QIScheme::builtin("cubic").unwrap();
    let hc = random_spline(&cubic, 2, 3);
    let back = recover_via_grid_export("cubic", &hc, dir.path());
    let direct = qisg::recover_fn(&cubic, 2, 3, |x| hc.eval(x)).unwrap();
    let worst = direct.entries().map(|(k, s, c)| (back.get(k, &s) - c).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn benchmark_reports_embed_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = qisg(&[
        "benchmark", "--d", "1", "--m-range", "3..8", "--q", "inf", "--seed", "7", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["q"], "inf");
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["rows"].as_array().unwrap().len(), 6);
    assert!((report["theoretical_rho"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert!(table.starts_with("m,n_points,n_ratio,error,norm_kind\n3,"));
}

#[test]
fn benchmark_selftest_and_degenerate_fit() {
    let out = qisg(&["benchmark", "--selftest"]);
    assert!(out.status.success());
    assert!(stdout(&out).ends_with(": ok\n"));
    assert_eq!(qisg(&["benchmark", "--m-range", "3..5"]).status.code(), Some(4));
}

#[test]
fn witness_g1_vanishes_on_grid() {
    let out = qisg(&["witness", "--kind", "g1", "--d", "2", "--m", "4", "--format", "json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["rows"][0]["grid_max"].as_f64().unwrap() < 1e-12);
    assert!(report["fit"].is_null());

    let out = qisg(&["witness", "--kind", "g1", "--d", "1", "--m-range", "2..8", "--format", "json"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["fit"]["beta"], 0.0);
}

#[test]
fn grid_json_and_cardinality() {
    let out = qisg(&["grid", "--builtin", "faber", "--d", "1", "--m", "2", "--format", "json"]);
    let grid: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(grid["points"].as_array().unwrap().len(), 8);
    assert_eq!(grid["points"][1]["x"][0], 0.125);

    let out = qisg(&["grid", "--builtin", "faber", "--d", "2", "--m-range", "4..6"]);
    assert_eq!(stdout(&out), "m,n_points,ratio\n4,192,3.000000\n5,448,2.800000\n6,1024,2.666667\n");
}
