use std::fs;
use std::process::{Command, Output};

use cone_spectra_cli::{parse_descriptor, Format, RunConfig};
use cone_spectra::spectra::CrossSection;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cone-spectra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn assert_error(o: &Output, code: i32, category: &str) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(o));
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with(&format!("error:{category}: ")), "{err}");
}

#[test]
fn hd_matches_closed_form() {
    let o = bin(&["hd", "--cone", "sphere:m=2", "--d-max", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "d,h_d,k_d,S_d,ratio_sum,ratio_hd");
    assert_eq!(lines.len(), 51);
    for (i, line) in lines[1..].iter().enumerate() {
        let d = i as u64 + 1;
        let cols: Vec<_> = line.split(',').collect();
        assert_eq!(cols[0].parse::<u64>().unwrap(), d);
        assert_eq!(cols[1].parse::<u64>().unwrap(), d * (d + 2));
        assert_eq!(cols[2].parse::<u64>().unwrap(), 2 * d + 1);
    }
    assert!(!text.contains('\r'));
}

#[test]
fn weyl_final_ratio() {
    let o = bin(&["weyl", "--cross-section", "circle:L=6.28318", "--lambda-max", "1e6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    let ratio: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((ratio / 2.0 - 1.0).abs() < 0.02, "{last}");
    assert_eq!(text.lines().count(), 51);
}

#[test]
fn gram_check_lines() {
    let o = bin(&["gram-check", "--n", "3", "--dim", "5", "--trials", "10", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 10);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["holds"], true);
        assert_eq!(v["k"], 5);
        assert_eq!(v["n"], 3);
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["gram-check", "--n", "2", "--trials", "50", "--seed", "9"],
        &["hd", "-c", "football:q=3", "--d-max", "200"],
        &["spectrum", "-x", "circle:L=2.5", "--lambda-max", "400"],
        &["report", "-c", "circle:L=4.0", "--d-max", "200", "--lambda-max", "1e4", "--trials", "40"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for (rep, threads) in ["1", "4"].iter().enumerate() {
            let path = dir.path().join(format!("out{i}-{rep}"));
            let mut full: Vec<&str> = args.to_vec();
            let p = path.to_str().unwrap();
            full.extend(["--out", p]);
            let o = Command::new(env!("CARGO_BIN_EXE_cone-spectra"))
                .args(&full)
                .env("CONE_SPECTRA_THREADS", threads)
                .output()
                .unwrap();
            assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{}", stderr(&o));
            assert!(o.stdout.is_empty());
            outputs.push(fs::read(&path).unwrap());
        }
        assert!(!outputs[0].is_empty());
        assert_eq!(outputs[0], outputs[1], "run {i} differs");
    }
}

#[test]
fn csv_sidecars_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let o = bin(&["spectrum", "-x", "sphere:m=3", "--lambda-max", "30", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&path).unwrap();
    assert_eq!(csv, "eigenvalue,multiplicity\n0,1\n3,4\n8,9\n15,16\n24,25\n");
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("spectrum.csv.json")).unwrap()).unwrap();
    assert_eq!(side["dim"], 3);

    let path = dir.path().join("hd.csv");
    let o = bin(&["hd", "-c", "circle:L=3.0", "--d-max", "20", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("hd.csv.json")).unwrap()).unwrap();
    assert_eq!(meta["n"], 2);
    assert_eq!(meta["d_max"], 20);
}

#[test]
fn json_formats_parse() {
    for args in [
        &["spectrum", "-x", "football:q=2", "--lambda-max", "50", "--format", "json"][..],
        &["hd", "-c", "sphere:m=2", "--d-max", "10", "--format", "json"],
        &["weyl", "-x", "sphere:m=2,r=0.8", "--lambda-max", "1e4", "--points", "4", "--format", "json"],
        &["oracle", "-x", "circle:L=3.0", "--points", "256", "--count", "7"],
    ] {
        let o = bin(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        let _: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    }
}

#[test]
fn oracle_report_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.txt");
    let o = bin(&["oracle", "-x", "football:q=3", "--level", "3", "--count", "4", "--mesh", mesh.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["match"]["pass"], true);
    assert_eq!(v["shape"]["shape"], "football");
    let dump = fs::read_to_string(&mesh).unwrap();
    assert_eq!(dump.lines().filter(|l| l.starts_with("v ")).count(), 642);

    // a far-too-tight tolerance is a validation failure
    let o = bin(&["oracle", "--level", "2", "--count", "4", "--tolerance", "1e-6"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn report_verdicts() {
    let o = bin(&["report", "-c", "sphere:m=2", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["hd"]["d_max"], 1000);
    assert!(v["hd"]["ratio_sum"]["rel_err"].as_f64().unwrap() < 0.005);
    assert_eq!(v["gram_check"]["violations"], 0);

    let o = bin(&["report", "-c", "sphere:m=2", "--trials", "10", "--sum-tolerance", "1e-4"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["hd"]["pass"], false);
    assert_eq!(v["pass"], false);
}

#[test]
fn failures_use_prefixed_single_lines() {
    assert_error(&bin(&["spectrum", "-x", "sphere:m=2,q=3", "--lambda-max", "5"]), 2, "parse");
    assert_error(&bin(&["spectrum", "-x", "circle:L=9", "--lambda-max", "5"]), 2, "domain");
    assert_error(&bin(&["frob"]), 2, "usage");
    assert_error(&bin(&["hd", "--cone", "sphere:m=2"]), 2, "usage");
    assert_error(&bin(&["hd", "--cone", "sphere:m=2", "--d-max", "ten"]), 2, "usage");
    assert_error(&bin(&["report", "-c", "sphere:m=2", "--format", "csv"]), 2, "usage");
    assert_error(&bin(&["gram-check", "--n", "2", "-c", "sphere:m=2"]), 2, "usage");
    assert_error(&bin(&["oracle", "-x", "sphere:m=3"]), 2, "usage");
    assert_error(&bin(&["oracle", "--level", "9"]), 2, "resource");
    assert_error(
        &bin(&["hd", "-c", "sphere:m=2", "--d-max", "3", "--out", "/nonexistent/dir/x.csv"]),
        2,
        "io",
    );
    let o = Command::new(env!("CARGO_BIN_EXE_cone-spectra"))
        .args(["hd", "-c", "sphere:m=2", "--d-max", "3"])
        .env("CONE_SPECTRA_THREADS", "zero")
        .output()
        .unwrap();
    assert_error(&o, 2, "usage");
}

#[test]
fn help_exits_cleanly() {
    let o = bin(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("gram-check"));
}

#[test]
fn config_from_args() {
    let cfg = RunConfig::from_args(["cone-spectra", "gram-check", "--n", "4"]).unwrap();
    assert_eq!(cfg.output.format, Format::Json);
    match cfg.command {
        cone_spectra_cli::Command::GramCheck { cone, seed, .. } => {
            assert_eq!(cone, CrossSection::Sphere { m: 3, radius: 1.0 });
            assert_eq!(seed, cone_spectra_cli::DEFAULT_SEED);
        }
        other => panic!("{other:?}"),
    }
    assert!(parse_descriptor("football:q=").is_err());

    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cone_spectra_cli::main_with(
        ["cone-spectra", "spectrum", "-x", "circle:L=3.14159", "--lambda-max", "20"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    assert!(err.is_empty());
    assert!(String::from_utf8(out).unwrap().starts_with("eigenvalue,multiplicity\n0,1\n"));
}
