//! Number formatting for the output files.
//!
//! Every float written by the CLI goes through [`sig`], which keeps twelve
//! significant digits. Rounding at a fixed precision hides last-bit noise
//! that would otherwise make re-runs on different thread counts diff.

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits, in the style of C's
/// `%.12g`: plain notation for moderate exponents, scientific otherwise,
/// trailing zeros removed. Negative zero prints as `0`.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

/// `x` rounded to the digits [`sig`] would print, for JSON output.
pub fn rounded(x: f64) -> f64 {
    if x.is_finite() {
        sig(x).parse().unwrap_or(x)
    } else {
        x
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig(2.75), "2.75");
        assert_eq!(sig(-0.0), "0");
        assert_eq!(sig(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig(1.5e-7), "1.5e-7");
        assert_eq!(sig(100.0), "100");
        assert_eq!(sig(0.000123), "0.000123");
    }

    #[test]
    fn rounding_is_idempotent() {
        let x = std::f64::consts::PI;
        assert_eq!(sig(rounded(x)), sig(x));
    }
}
