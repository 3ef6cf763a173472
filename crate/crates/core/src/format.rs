//! Fixed-precision number rendering shared by operator text and CSV output.

use num_complex::Complex64;

/// Significant digits used for every rendered real number.
pub const SIG_DIGITS: usize = 12;

/// Renders `x` with 12 significant digits, trailing zeros trimmed.
///
/// Plain decimal notation is used for exponents in `[-5, 12)`, scientific
/// otherwise. Negative zero renders as `0`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        let s = trim_zeros(&s);
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Renders `(re+imi)` with the same precision rules, e.g. `(-0.5+0i)`.
pub fn fmt_complex(z: Complex64) -> String {
    let re = fmt_real(z.re);
    let im = fmt_real(z.im);
    if im.starts_with('-') {
        format!("({re}{im}i)")
    } else {
        format!("({re}+{im}i)")
    }
}
