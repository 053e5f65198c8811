use satqkd::config::Format;
use satqkd::output::{emit, render, RECORD_HEADER};
use satqkd::sweep::SweepOutput;
use satqkd::{emit_records, parse_config, run_sweep, SweepRecord};

fn run(json: &str) -> SweepOutput {
    run_sweep(&parse_config(json).unwrap()).unwrap()
}

fn records(json: &str) -> Vec<SweepRecord> {
    run(json).records().unwrap().to_vec()
}

#[test]
fn bb84_noise_sweep_example() {
    let r = records(
        r#"{"protocol": "bb84", "sweep": "noise", "d_list": [32], "q_list": [0, 0.1, 0.2, 0.3, 0.33]}"#,
    );
    let rates: Vec<f64> = r.iter().map(|x| x.avg_rate.unwrap()).collect();
    assert_eq!(rates[0], 5.0);
    assert!(rates.windows(2).take(3).all(|w| w[1] < w[0]));
    assert!(rates[3] > 0.0);
    assert_eq!(rates[4], 0.0);
}

#[test]
fn record_count_is_grid_product() {
    let n = |json: &str| run(json).len();
    assert_eq!(
        n(r#"{"protocol": "both", "sweep": "noise", "d_list": [2, 4, 8]}"#),
        2 * 3 * 71
    );
    assert_eq!(
        n(r#"{"protocol": "both", "sweep": "tolerance", "d_list": [2, 32]}"#),
        4
    );
    assert_eq!(
        n(
            r#"{"protocol": "both", "sweep": "zenith", "d_list": [2, 32], "q_list": [0, 0.01, 0.02],
              "zenith_grid": [0, 30], "n_samples": 50, "seed": 1}"#
        ),
        2 * 2 * 3 * 2
    );
    assert_eq!(
        n(r#"{"protocol": "bb84", "sweep": "length", "d_list": [2], "n_samples": 20, "seed": 1}"#),
        25
    );
    assert_eq!(
        n(
            r#"{"protocol": "bb84", "sweep": "pdt", "zenith_grid": [0, 20, 40], "n_samples": 20, "seed": 1}"#
        ),
        3
    );
}

#[test]
fn up_link_zenith_sweep_peaks_at_zenith() {
    let r = records(
        r#"{"protocol": "bb84", "sweep": "zenith", "d_list": [32], "direction": "up-link", "weather": "day1",
            "zenith_grid": [0, 20, 40, 60, 80], "n_samples": 10000, "seed": 1}"#,
    );
    let rates: Vec<f64> = r.iter().map(|x| x.avg_rate.unwrap()).collect();
    let peak = rates.iter().copied().fold(0.0, f64::max);
    assert_eq!(peak, rates[0]);
    assert!((rates[0] - 0.008).abs() < 0.004, "{}", rates[0]);
}

#[test]
fn length_sweep_reports_lengths() {
    let r = records(
        r#"{"protocol": "bb84", "sweep": "length", "d_list": [2], "length_grid": [500e3, 1000e3],
            "n_samples": 20, "seed": 1}"#,
    );
    assert!((r[0].zenith_deg.unwrap()).abs() < 1e-9);
    assert!((r[1].zenith_deg.unwrap() - 60.0).abs() < 1e-9);
    assert!((r[1].l_m.unwrap() - 1000e3).abs() < 1e-6);
}

#[test]
fn pdr_shape_follows_noise() {
    let pdr = |q: f64| match run(&format!(
        r#"{{"protocol": "ext_b92", "sweep": "pdr", "d_list": [32], "q_list": [{q}],
            "n_samples": 20000, "seed": 6}}"#
    )) {
        SweepOutput::Pdr(t) => t.into_iter().next().unwrap(),
        other => panic!("{other:?}"),
    };
    let (lo, hi) = (pdr(0.02), pdr(0.06));
    assert_eq!(lo.rounding_decimals, 6);
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    assert!(max(&lo.rate_values) > max(&hi.rate_values));
    assert!(max(&hi.probabilities) > max(&lo.probabilities));
    for t in [&lo, &hi] {
        assert!((t.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(t.rate_values.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn csv_shape() {
    let r = records(r#"{"protocol": "bb84", "sweep": "noise", "d_list": [2], "q_list": [0.05]}"#);
    let text = String::from_utf8(render(&SweepOutput::Records(r), Format::Csv)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], RECORD_HEADER.join(","));
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let q = lines[1].split(',').nth(2).unwrap();
    assert_eq!(q.parse::<f64>().unwrap(), 0.05);
}

#[test]
fn emissions_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let json = r#"{"protocol": "both", "sweep": "zenith", "d_list": [4], "q_list": [0, 0.03],
                   "zenith_grid": [0, 50], "n_samples": 300, "seed": 21}"#;
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    emit(&run(json), Format::Csv, Some(&a)).unwrap();
    emit(&run(json), Format::Csv, Some(&b)).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn csv_and_json_agree() {
    let r = records(
        r#"{"protocol": "both", "sweep": "zenith", "d_list": [2, 16], "q_list": [0, 0.04],
            "zenith_grid": [10], "n_samples": 200, "seed": 3, "bb84_qber": false}"#,
    );
    let json: Vec<SweepRecord> =
        serde_json::from_slice(&render(&SweepOutput::Records(r.clone()), Format::Json)).unwrap();
    assert_eq!(json, r);

    let csv_bytes = render(&SweepOutput::Records(r.clone()), Format::Csv);
    let mut reader = csv::Reader::from_reader(csv_bytes.as_slice());
    let parsed: Vec<SweepRecord> = reader.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(parsed, r);
    assert!(r
        .iter()
        .filter(|x| x.protocol == "bb84")
        .all(|x| x.qber.is_none()));
}

#[test]
fn tolerance_records() {
    let r = records(r#"{"protocol": "both", "sweep": "tolerance", "d_list": [2]}"#);
    assert_eq!(r[0].protocol, "ext_b92");
    assert!((r[0].tolerance.unwrap() - 0.069).abs() < 1e-3);
    assert!((r[1].tolerance.unwrap() - 0.110).abs() < 1e-3);
    // The d = 2 proxy is the symbol error itself.
    assert_eq!(r[1].qber, r[1].tolerance);
    assert!(r.iter().all(|x| x.seed.is_none() && x.q.is_none()));
}

#[test]
fn unwritable_path_names_the_path() {
    let r = records(r#"{"protocol": "bb84", "sweep": "noise", "d_list": [2], "q_list": [0]}"#);
    let err = emit_records(&r, Format::Csv, Some("/nonexistent-dir/out.csv".as_ref())).unwrap_err();
    assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn pdt_tables_are_normalized() {
    match run(
        r#"{"protocol": "bb84", "sweep": "pdt", "direction": "up-link", "zenith_grid": [0, 60],
                  "n_samples": 500, "n_bins": 40, "seed": 2}"#,
    ) {
        SweepOutput::Pdt(tables) => {
            for t in tables {
                assert_eq!(t.bin_centers.len(), 40);
                assert!((t.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let mean: f64 = t
                    .bin_means
                    .iter()
                    .zip(&t.probabilities)
                    .map(|(e, p)| e * p)
                    .sum();
                assert!((mean - t.mean_eta).abs() < 1e-12);
            }
        }
        other => panic!("{other:?}"),
    }
}
