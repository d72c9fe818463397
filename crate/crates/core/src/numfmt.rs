/// Format with 9 significant digits, `%.9g` style: fixed notation for
/// decimal exponents in `-5..9`, scientific otherwise, trailing zeros trimmed.
pub fn sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // Round first so the exponent reflects the rounded value (9.99999999996 -> 10).
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!(
            "{}e{}{:02}",
            trim(mantissa.to_string()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
