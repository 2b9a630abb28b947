//! printf-style `%.12e` formatting, used by every text output so that
//! regression baselines compare byte for byte.

/// `%.{digits}e`: mantissa with `digits` decimals, signed exponent with at
/// least two digits. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn sci_digits(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.*e}", digits, x);
    let (mant, exp) = s.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// `%.12e`.
pub fn sci(x: f64) -> String {
    sci_digits(x, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        assert_eq!(sci(1.5), "1.500000000000e+00");
        assert_eq!(sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(6.02e123), "6.020000000000e+123");
        assert_eq!(sci_digits(0.999_999_5, 3), "1.000e+00");
        assert_eq!(sci(f64::NAN), "nan");
    }
}
