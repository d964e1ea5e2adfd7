//! Number formatting shared by the text and CSV reports.

/// `x` rounded to `digits` significant digits; scientific notation outside
/// `[1e-4, 10^digits)`.
pub fn sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).unwrap_or(0);
    if exp < -4 || exp >= digits as i32 {
        sci
    } else {
        format!("{:.*}", (digits as i32 - 1 - exp) as usize, x)
    }
}

/// Seconds, 6 significant digits.
pub fn seconds(x: f64) -> String {
    sig(x, 6)
}

/// Percentages, 2 decimals.
pub fn percent(x: f64) -> String {
    format!("{x:.2}")
}
