use gelfand_demo::{interval_volume, reconstruct_interval, spectrum};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn spectrum_lists_interval_squares() {
    let v = parse(spectrum("interval", std::f64::consts::PI, 0.0, 4));
    let l: Vec<f64> = serde_json::from_value(v["lambda"].clone()).unwrap();
    for (k, x) in l.iter().enumerate() {
        assert!((x - (k * k) as f64).abs() < 1e-12);
    }
}

#[test]
fn unknown_kind_is_an_error_object() {
    assert!(parse(spectrum("torus", 1.0, 1.0, 4))["error"].is_string());
}

#[test]
fn volume_tracks_truth() {
    let v = parse(interval_volume(0.0, 1.0, 0.0, 64, 0.0));
    let (a, t) = (v["vol_a"].as_f64().unwrap(), v["vol_true"].as_f64().unwrap());
    assert!((a - t).abs() <= 0.15 * t, "{v}");
}

#[test]
fn reconstruction_reports_points() {
    let v = parse(reconstruct_interval(0.4, 32, 0.0, 1));
    assert_eq!(v["report"]["status"], "ok");
    assert!(!v["points"].as_array().unwrap().is_empty());
}
