use plap_cli::format::{sig, to_json, CSV_DIGITS, JSON_DIGITS, SVG_DIGITS};
use proptest::prelude::*;

fn digits_of(s: &str) -> usize {
    let mant = s.split('e').next().unwrap();
    let ds: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    ds.trim_start_matches('0').len()
}

proptest! {
    #[test]
    fn seventeen_digits_round_trip(x in prop::num::f64::NORMAL) {
        prop_assert_eq!(sig(x, JSON_DIGITS).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn fixed_digits_bound_the_relative_error(x in prop::num::f64::NORMAL) {
        for d in [CSV_DIGITS, SVG_DIGITS] {
            let s = sig(x, d);
            let back: f64 = s.parse().unwrap();
            prop_assert!(((back - x) / x).abs() <= 0.5 * 10f64.powi(1 - d as i32) * (1.0 + 1e-12), "{} -> {}", x, s);
            prop_assert!(digits_of(&s) <= d, "{}", s);
        }
    }

    #[test]
    fn json_output_parses_back(v in prop::collection::vec(-1e6f64..1e6, 0..8)) {
        let text = to_json(&v).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, v);
    }
}

#[test]
fn json_numbers_carry_seventeen_digits() {
    let text = to_json(&serde_json::json!({ "x": -15.0 / 7.0, "n": 3 })).unwrap();
    assert!(text.contains("\"x\": -2.1428571428571428"), "{text}");
    assert!(text.contains("\"n\": 3"));
}
