//! Numeric presentation helpers.
//!
//! Human output rounds to 3 significant digits; machine output (TSV/JSON)
//! carries 15 significant digits, pre-rounded so JSON and TSV emissions of
//! the same result hold identical values.

/// Format with `digits` significant digits, fixed notation where practical.
pub fn format_sig(v: f64, digits: u32) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{:.*e}", digits.saturating_sub(1) as usize, v);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Round to 15 significant digits (the machine emission precision).
pub fn round_sig15(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    format!("{v:.14e}").parse().unwrap_or(v)
}

/// Render a value for a machine table cell at 15 significant digits.
pub fn format_full(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    format!("{:.14e}", v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_digits_match_reporting_style() {
        assert_eq!(format_sig(0.059123, 3), "0.0591");
        assert_eq!(format_sig(14.5256, 3), "14.5");
        assert_eq!(format_sig(92.6085, 3), "92.6");
        assert_eq!(format_sig(1.1096, 3), "1.11");
        assert_eq!(format_sig(-0.00193, 3), "-0.00193");
        assert_eq!(format_sig(0.0, 3), "0");
        assert_eq!(format_sig(252.0, 3), "252");
    }

    #[test]
    fn tiny_and_huge_fall_back_to_exponential() {
        assert_eq!(format_sig(1.23456e-7, 3), "1.23e-7");
        assert!(format_sig(4.2e17, 3).contains('e'));
    }

    #[test]
    fn full_precision_round_trips_to_15_digits() {
        let v = 0.123_456_789_012_345_67;
        let r = round_sig15(v);
        assert_eq!(format_full(v).parse::<f64>().unwrap(), r);
        assert!((r - v).abs() <= 1e-15);
        assert_eq!(round_sig15(r), r);
    }
}
