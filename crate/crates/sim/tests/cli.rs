use std::process::{Command, Output};

fn satqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satqkd"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn tolerance_subcommand() {
    let o = satqkd(&["tolerance", "--protocol", "bb84", "--d-list", "2,32"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("bb84,2,"));
}

#[test]
fn validation_errors_exit_2() {
    let o = satqkd(&[
        "sweep",
        "--protocol",
        "bb84",
        "--sweep",
        "noise",
        "--d-list",
        "2",
        "--q-list",
        "0.6",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("0.6") && err.contains("0.5"), "{err}");

    let o = satqkd(&[
        "sweep",
        "--protocol",
        "bb84",
        "--sweep",
        "noise",
        "--d-list",
        "2",
        "--q-list",
        "[]",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = satqkd(&["pdt", "--protocol", "bb84", "--n-samples", "10"]);
    assert_eq!(o.status.code(), Some(2), "missing seed");

    let o = satqkd(&[
        "sweep",
        "--protocol",
        "bb84",
        "--sweep",
        "noise",
        "--d-list",
        "2",
        "--speed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("speed"));
}

#[test]
fn numeric_failure_exits_3() {
    let o = satqkd(&[
        "pdt",
        "--protocol",
        "bb84",
        "--seed",
        "1",
        "--n-samples",
        "10",
        "--cn2",
        "1e300",
    ]);
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn config_file_with_flag_override_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("run.json.out");
    std::fs::write(
        &cfg,
        r#"{"protocol": "ext_b92", "sweep": "zenith", "d_list": [8], "zenith_grid": [0, 30],
            "n_samples": 100, "seed": 4, "format": "json"}"#,
    )
    .unwrap();
    let run = || {
        let o = satqkd(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--output-path",
            out.to_str().unwrap(),
            "--seed",
            "5",
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        std::fs::read(&out).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[0]["seed"], 5);
    assert_eq!(v[0]["direction"], "down-link");
}

#[test]
fn presets_subcommand() {
    let o = satqkd(&["presets"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 7);
    let night2: Vec<&str> = text
        .lines()
        .find(|l| l.starts_with("night2,"))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!(night2[1].parse::<f64>().unwrap(), 5.5e-16);
    assert_eq!(night2[2].parse::<f64>().unwrap(), 3.0);
}

#[test]
fn pdr_subcommand_writes_table() {
    let o = satqkd(&[
        "pdr",
        "--protocol",
        "bb84",
        "--d-list",
        "32",
        "--q-list",
        "0.1",
        "--n-samples",
        "200",
        "--seed",
        "3",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert!(text.starts_with("protocol,d,q,xi,direction,weather,zenith_deg,L_m,n_samples,seed,rounding_decimals,rate,probability\n"));
    let total: f64 = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
}
