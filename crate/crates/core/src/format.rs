//! Locale-independent float formatting with a fixed number of significant
//! digits, in the style of C's `%g`: fixed notation while it stays compact,
//! scientific otherwise, trailing zeros trimmed. Every float that lands in an
//! output file goes through here, which is what makes run files reproducible
//! byte for byte.

/// Number of significant digits used in all CSV output.
pub const CSV_SIG_DIGITS: usize = 10;

/// Formats with up to `sig` significant digits, `sig >= 1`. Negative zero is
/// normalized to "0".
pub fn fmt_sig(value: f64, sig: usize) -> String {
    assert!(sig >= 1, "need at least one significant digit");
    if value.is_nan() {
        return "NaN".to_string();
    }
    if value.is_infinite() {
        return if value < 0.0 { "-inf" } else { "inf" }.to_string();
    }
    if value == 0.0 {
        return "0".to_string();
    }

    // "d.ddd...e<exp>" with exactly sig digits of mantissa.
    let sci = format!("{:.*e}", sig - 1, value);
    let (mantissa, exp) = sci.split_once('e').expect("float e-format always has an exponent");
    let exp: i32 = exp.parse().expect("float exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), sig);

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp >= -4 && exp < sig as i32 {
        if exp >= 0 {
            let int_len = exp as usize + 1;
            if int_len >= digits.len() {
                out.push_str(&digits);
                for _ in 0..int_len - digits.len() {
                    out.push('0');
                }
            } else {
                out.push_str(&digits[..int_len]);
                let frac = digits[int_len..].trim_end_matches('0');
                if !frac.is_empty() {
                    out.push('.');
                    out.push_str(frac);
                }
            }
        } else {
            out.push_str("0.");
            for _ in 0..(-exp - 1) {
                out.push('0');
            }
            out.push_str(digits.trim_end_matches('0'));
        }
    } else {
        let trimmed = digits.trim_end_matches('0');
        out.push_str(&trimmed[..1]);
        if trimmed.len() > 1 {
            out.push('.');
            out.push_str(&trimmed[1..]);
        }
        out.push('e');
        out.push(if exp < 0 { '-' } else { '+' });
        out.push_str(&format!("{:02}", exp.abs()));
    }
    out
}

/// The crate-wide CSV float format.
pub fn fmt_csv(value: f64) -> String {
    fmt_sig(value, CSV_SIG_DIGITS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_c_style_g_formatting() {
        let cases: &[(f64, &str)] = &[
            (0.0, "0"),
            (0.5, "0.5"),
            (3.2, "3.2"),
            (-1.25, "-1.25"),
            (1.0 / 3.0, "0.3333333333"),
            (10.0, "10"),
            (5.0, "5"),
            (2.5, "2.5"),
            (123.456, "123.456"),
            (-123456.789, "-123456.789"),
            (0.1, "0.1"),
            (0.0001, "0.0001"),
            (0.00002, "2e-05"),
            (0.000123456789012345, "0.000123456789"),
            (123456789.12345679, "123456789.1"),
            (12345678901.0, "1.23456789e+10"),
            (1234567890123.0, "1.23456789e+12"),
            (1e10, "1e+10"),
            (9999999999.5, "1e+10"),
            (1e-5, "1e-05"),
            (-2.5e-7, "-2.5e-07"),
            (7.105427357601002e-15, "7.105427358e-15"),
            (1e100, "1e+100"),
            (std::f64::consts::SQRT_2, "1.414213562"),
            (255.0, "255"),
        ];
        for (value, expected) in cases {
            assert_eq!(fmt_csv(*value), *expected, "formatting {value}");
        }
    }

    #[test]
    fn negative_zero_is_plain_zero() {
        assert_eq!(fmt_csv(-0.0), "0");
    }

    #[test]
    fn non_finite_values_have_fixed_spellings() {
        assert_eq!(fmt_csv(f64::NAN), "NaN");
        assert_eq!(fmt_csv(f64::INFINITY), "inf");
        assert_eq!(fmt_csv(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn lower_precision_rounds() {
        assert_eq!(fmt_sig(123.456, 4), "123.5");
        assert_eq!(fmt_sig(0.0999, 2), "0.1");
        // Rounding carries into a new decade, which tips the choice of
        // notation exactly as C's %g does.
        assert_eq!(fmt_sig(999.9, 3), "1e+03");
    }

    #[test]
    fn ten_digit_decimals_round_trip() {
        // A value printed at 10 significant digits, parsed back, and printed
        // again must give the same text. This is what lets files written from
        // reloaded grids match the originals byte for byte.
        let values = [std::f64::consts::PI, -0.007, 3.204920571, 1e-9, 123456.7891];
        for v in values {
            let s = fmt_csv(v);
            let reparsed: f64 = s.parse().unwrap();
            assert_eq!(fmt_csv(reparsed), s);
        }
    }
}
