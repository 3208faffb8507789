//! Fixed 12-significant-digit decimal formatting for CSV output, so that
//! reruns diff byte-for-byte.

/// Format with 12 significant digits. Values whose magnitude fits a plain
/// decimal rendering use one; extreme magnitudes fall back to scientific
/// notation. `-0.0` is normalized to `0`.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..=11).contains(&mag) {
        let decimals = (11 - mag).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.11e}", x)
    }
}
