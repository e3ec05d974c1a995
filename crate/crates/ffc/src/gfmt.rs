//! `%.17g` numeric formatting for the CSV output contract.
//!
//! Seventeen significant digits round-trip every `f64` exactly; the `%g`
//! presentation (fixed vs scientific by exponent, trailing zeros trimmed)
//! matches what C's `printf("%.17g", x)` produces, so downstream tooling
//! can diff our CSV against reference implementations byte for byte.

/// Format like C's `printf("%.17g", x)`.
pub fn g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x < 0.0 { "-inf" } else { "inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    // Round to 17 significant digits in scientific form to find the
    // decimal exponent of the rounded value.
    let sci = format!("{:.16e}", x);
    let (mant, exp_str) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp_str.parse().expect("exponent");
    if !(-4..17).contains(&exp) {
        let neg = mant.starts_with('-');
        let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
        let frac = digits[1..].trim_end_matches('0');
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push(digits.as_bytes()[0] as char);
        if !frac.is_empty() {
            out.push('.');
            out.push_str(frac);
        }
        out.push('e');
        out.push(if exp < 0 { '-' } else { '+' });
        if exp.abs() < 10 {
            out.push('0');
        }
        out.push_str(&exp.abs().to_string());
        out
    } else {
        let prec = (16 - exp).max(0) as usize;
        let fixed = format!("{x:.prec$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    }
}
