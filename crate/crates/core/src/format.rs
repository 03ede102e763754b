//! Fixed real-number formatting for CSV output.

/// `x` with 17 significant digits, in the style of C's `%.17g`: positional
/// for decimal exponents in `[-4, 17)`, scientific otherwise, trailing zeros
/// dropped.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };
    if (-4..17).contains(&exp) {
        let body = if exp < 0 {
            format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
        } else {
            let point = exp as usize + 1;
            format!("{}.{}", &digits[..point], &digits[point..])
        };
        let body = body.trim_end_matches('0').trim_end_matches('.');
        format!("{sign}{body}")
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let (e_sign, e_abs) = if exp < 0 { ('-', -exp) } else { ('+', exp) };
        if frac.is_empty() {
            format!("{sign}{}e{e_sign}{e_abs:02}", &digits[..1])
        } else {
            format!("{sign}{}.{frac}e{e_sign}{e_abs:02}", &digits[..1])
        }
    }
}
