//! printf-compatible scientific formatting (`%.Ne`), so emitted tables do not
//! depend on Rust's exponent style.

/// Formats `x` like C's `%.{digits}e`: signed, at least two exponent digits.
pub fn sci(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let s = format!("{x:.digits$e}");
    let (mantissa, exponent) = s.split_once('e').expect("`e` formatting always has an exponent");
    let exp: i32 = exponent.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

#[cfg(test)]
mod tests {
    use super::sci;

    #[test]
    fn matches_printf() {
        assert_eq!(sci(1e-3, 12), "1.000000000000e-03");
        assert_eq!(sci(0.25, 12), "2.500000000000e-01");
        assert_eq!(sci(1.0 / 3.0, 12), "3.333333333333e-01");
        assert_eq!(sci(0.0, 3), "0.000e+00");
        assert_eq!(sci(-12345.0, 2), "-1.23e+04");
        assert_eq!(sci(6.02e123, 1), "6.0e+123");
        assert_eq!(sci(f64::NAN, 3), "nan");
    }
}
